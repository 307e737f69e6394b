//! Linear algebra and certificates on top of the estimates: dual bases,
//! defect probes, norm lower bounds and the independence matrix.

pub mod zk;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::braid::{BrooksQm, FreeLetter, FreeWord, QmCombination};
use crate::error::{Error, Result};
use crate::estimate::{sample_rng, Estimate};

/// Safety factor applied to empirical defect probes.
pub const DEFECT_SAFETY: f64 = 2.0;

/// Values `qᵢ(gⱼ)` with row and column labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl EvalMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::InvalidArgument("evaluation matrix is not rectangular".into()));
        }
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("evaluation matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Unlabelled matrix, rows and columns numbered from 1.
    pub fn from_rows(entries: Vec<Vec<f64>>) -> Result<Self> {
        let r = entries.len();
        let c = entries.first().map_or(0, |e| e.len());
        Self::new((1..=r).map(|i| i.to_string()).collect(), (1..=c).map(|j| j.to_string()).collect(), entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let (r, c) = self.shape();
        DMatrix::from_fn(r, c, |i, j| self.entries[i][j])
    }

    fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), cols.len(), |i, j| self.entries[i][cols[j]])
    }
}

/// `C` and columns `J` with `(C·M)|_J = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualBasis {
    /// `k × rows` coefficients; new quasi-morphism `i` is `Σⱼ C[i][j]·qⱼ`.
    pub coefficients: Vec<Vec<f64>>,
    pub columns: Vec<usize>,
    /// `‖C·M|_J − I‖∞`.
    pub residual: f64,
}

impl DualBasis {
    pub fn k(&self) -> usize {
        self.columns.len()
    }

    /// The combinations as Brooks quasi-morphism sums, given the patterns
    /// labelling the rows.
    pub fn combinations(&self, patterns: &[BrooksQm]) -> Vec<QmCombination> {
        self.coefficients
            .iter()
            .map(|row| QmCombination {
                terms: row.iter().zip(patterns).filter(|(c, _)| **c != 0.0).map(|(c, q)| (*c, q.clone())).collect(),
            })
            .collect()
    }
}

/// Column-pivoted elimination. With `columns` given, those are used;
/// otherwise columns are picked greedily, preferring earlier columns among
/// those whose residual is at least half the largest. `k` requests a rank;
/// by default the numerical rank is used.
pub fn dual_basis(m: &EvalMatrix, tol: f64, k: Option<usize>, columns: Option<&[usize]>) -> Result<DualBasis> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Err(Error::InvalidArgument("empty evaluation matrix".into()));
    }
    let full = m.to_dmatrix();
    let scale = full.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let chosen: Vec<usize> = match columns {
        Some(cols) => {
            if cols.iter().any(|&j| j >= c) {
                return Err(Error::InvalidArgument("column index out of range".into()));
            }
            cols.to_vec()
        }
        None => {
            let mut res = full.clone();
            let mut chosen = Vec::new();
            let target = k.unwrap_or(r.min(c));
            while chosen.len() < target {
                let norms: Vec<f64> = (0..c)
                    .map(|j| if chosen.contains(&j) { 0.0 } else { res.column(j).norm() })
                    .collect();
                let best = norms.iter().cloned().fold(0.0, f64::max);
                if best <= tol * scale {
                    break;
                }
                let j = norms.iter().position(|&n| n >= 0.5 * best).expect("maximum attains the threshold");
                let v = res.column(j).normalize();
                for jj in 0..c {
                    let proj = v.dot(&res.column(jj));
                    let mut col = res.column_mut(jj);
                    col -= &v * proj;
                }
                chosen.push(j);
            }
            chosen
        }
    };
    let requested = k.unwrap_or(chosen.len());
    if chosen.is_empty() {
        return Err(Error::RankDeficient { achievable: 0, requested: requested.max(1) });
    }
    let mj = m.columns(&chosen);
    let sv = mj.clone().svd(false, false).singular_values;
    let rank = sv.iter().filter(|&&s| s > tol * scale).count();
    if rank < requested || rank < chosen.len() {
        return Err(Error::RankDeficient { achievable: rank, requested: requested.max(chosen.len()) });
    }
    let pinv = mj
        .clone()
        .pseudo_inverse(tol * scale * 1e-3)
        .map_err(|e| Error::InvalidArgument(format!("pseudo-inverse failed: {e}")))?;
    let check = &pinv * &mj;
    let residual = (0..chosen.len())
        .flat_map(|i| (0..chosen.len()).map(move |j| (i, j)))
        .map(|(i, j)| (check[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    if residual > tol.max(1e-9) {
        return Err(Error::RankDeficient { achievable: rank, requested: chosen.len() });
    }
    let coefficients = (0..pinv.nrows()).map(|i| pinv.row(i).iter().cloned().collect()).collect();
    Ok(DualBasis { coefficients, columns: chosen, residual })
}

/// Cyclically reduced non-trivial words up to `max_len`; conjugation
/// invariance makes the other words redundant.
pub fn candidate_words(max_len: usize) -> Vec<FreeWord> {
    FreeWord::all_up_to(max_len).into_iter().filter(|w| !w.is_empty() && w.is_cyclically_reduced()).collect()
}

/// Exact symmetrized values of each pattern on each word.
pub fn exact_eval_matrix(patterns: &[BrooksQm], words: &[FreeWord]) -> EvalMatrix {
    let entries = patterns.iter().map(|q| words.iter().map(|w| q.symmetrized(w) as f64).collect()).collect();
    EvalMatrix {
        rows: patterns.iter().map(|q| q.to_string()).collect(),
        cols: words.iter().map(|w| w.to_string()).collect(),
        entries,
    }
}

/// Dual basis on braids: words `βⱼ` in `σ₁², σ₂²` and combinations `ψᵢ` of
/// the patterns with `ψᵢ(βⱼ) = δᵢⱼ`, using the shortest word length up to
/// `max_len` that reaches full rank.
pub fn braid_dual_basis(patterns: &[BrooksQm], max_len: usize) -> Result<(Vec<FreeWord>, Vec<QmCombination>, DualBasis)> {
    for q in patterns {
        q.check_admissible()?;
    }
    // grow the pool until the rank is reached so the shortest words win
    let mut last = Error::RankDeficient { achievable: 0, requested: patterns.len() };
    for len in 1..=max_len {
        let pool = candidate_words(len);
        let m = exact_eval_matrix(patterns, &pool);
        match dual_basis(&m, 1e-9, Some(patterns.len()), None) {
            Ok(basis) => {
                let words = basis.columns.iter().map(|&j| pool[j].clone()).collect();
                return Ok((words, basis.combinations(patterns), basis));
            }
            Err(e @ Error::RankDeficient { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Uniform reduced word of the given length.
pub fn random_free_word(rng: &mut ChaCha8Rng, len: usize) -> FreeWord {
    let mut out: Vec<FreeLetter> = Vec::with_capacity(len);
    while out.len() < len {
        let l = FreeLetter::ALL[rng.gen_range(0..4)];
        if out.last() != Some(&l.inverse()) {
            out.push(l);
        }
    }
    FreeWord::from_letters(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectProbe {
    /// Largest observed `|q(gh) − q(g) − q(h)|`, a lower bound for the defect.
    pub max: f64,
    pub mean: f64,
    pub pairs: usize,
    pub seed: u64,
    /// Description of the sampling distribution.
    pub sampler: String,
}

/// Probes the defect of `q` on `pairs` independent pairs from `sample`.
pub fn defect_probe<T, Q, S, M>(q: Q, sample: S, mul: M, pairs: usize, seed: u64, sampler: &str) -> Result<DefectProbe>
where
    T: Send,
    Q: Fn(&T) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> T + Sync,
    M: Fn(&T, &T) -> T + Sync,
{
    if pairs < 1000 {
        return Err(Error::InvalidArgument(format!("defect probe needs at least 1000 pairs, got {pairs}")));
    }
    let gaps: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let g = sample(&mut rng);
            let h = sample(&mut rng);
            (q(&mul(&g, &h)) - q(&g) - q(&h)).abs()
        })
        .collect();
    Ok(DefectProbe {
        max: gaps.iter().cloned().fold(0.0, f64::max),
        mean: crate::estimate::pairwise_sum(&gaps) / pairs as f64,
        pairs,
        seed,
        sampler: sampler.to_string(),
    })
}

/// [`defect_probe`] on uniform reduced words of length uniform in `0..=max_len`.
pub fn free_defect_probe(q: impl Fn(&FreeWord) -> f64 + Sync, max_len: usize, pairs: usize, seed: u64) -> Result<DefectProbe> {
    defect_probe(
        q,
        |rng| {
            let len = rng.gen_range(0..=max_len);
            random_free_word(rng, len)
        },
        |a, b| a.concat(b),
        pairs,
        seed,
        &format!("uniform reduced words, length uniform in 0..={max_len}"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    AutLowerBound,
    ZkEmbedding,
    RestrictedBound,
    Independence,
}

/// A checked numerical claim bound to a digest of its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: ClaimKind,
    /// SHA-256 of the canonical JSON of the inputs.
    pub inputs_digest: String,
    pub inputs: serde_json::Value,
    pub content: serde_json::Value,
    pub passed: bool,
    pub caveats: Vec<String>,
}

/// SHA-256 hex digest of the canonical (sorted-key, compact) JSON form.
pub fn digest<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let text = serde_json::to_string(&v)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

impl Certificate {
    fn build<I: Serialize>(kind: ClaimKind, inputs: &I, content: serde_json::Value, passed: bool, caveats: Vec<String>) -> Result<Self> {
        let inputs = serde_json::to_value(inputs)?;
        Ok(Self { kind, inputs_digest: digest(&inputs)?, inputs, content, passed, caveats })
    }

    /// Whether the stored digest matches the stored inputs.
    pub fn verify_digest(&self) -> Result<bool> {
        Ok(digest(&self.inputs)? == self.inputs_digest)
    }

    pub fn render_text(&self) -> String {
        let mut s = format!(
            "certificate: {:?}\nverdict: {}\ninputs sha256: {}\n",
            self.kind,
            if self.passed { "PASS" } else { "FAIL" },
            self.inputs_digest
        );
        if let serde_json::Value::Object(map) = &self.content {
            for (k, v) in map {
                s.push_str(&format!("  {k}: {v}\n"));
            }
        }
        for c in &self.caveats {
            s.push_str(&format!("caveat: {c}\n"));
        }
        s
    }
}

#[derive(Serialize)]
struct AutInputs<'a> {
    values: &'a [Estimate],
    defects: &'a [f64],
}

/// `max_i (|Φ̄ᵢ(f)| − CIᵢ)/Dᵢ` as a lower bound for the autonomous norm.
pub fn aut_lower_bound(values: &[Estimate], defects: &[f64]) -> Result<Certificate> {
    if values.len() != defects.len() || values.is_empty() {
        return Err(Error::InvalidArgument("need one defect bound per estimate".into()));
    }
    if defects.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("defect bounds must be positive".into()));
    }
    let per: Vec<f64> =
        values.iter().zip(defects).map(|(e, d)| ((e.mean.abs() - e.half_width) / d).max(0.0)).collect();
    let bound = per.iter().cloned().fold(0.0, f64::max);
    let content = serde_json::json!({ "bound": bound, "per_quasi_morphism": per });
    Certificate::build(
        ClaimKind::AutLowerBound,
        &AutInputs { values, defects },
        content,
        bound > 0.0,
        vec!["conditional on the defect bounds".into()],
    )
}

#[derive(Serialize)]
struct RestrictedInputs {
    calabi: f64,
    calabi_error: f64,
    r: f64,
}

/// `𝒞(f)/r ≤ ‖f‖_r`, with the quadrature error taken off the bound.
pub fn restricted_lower_bound(calabi: f64, calabi_error: f64, r: f64) -> Result<Certificate> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius r = {r} must be positive")));
    }
    let bound = ((calabi.abs() - calabi_error.abs()) / r).max(0.0);
    let content = serde_json::json!({ "bound": bound, "calabi_over_r": calabi / r, "error": calabi_error.abs() / r });
    Certificate::build(ClaimKind::RestrictedBound, &RestrictedInputs { calabi, calabi_error, r }, content, bound > 0.0, vec![])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkInputs {
    pub d: Vec<i64>,
    /// `Φ̄ᵢ(f_d)` for each dual quasi-morphism.
    pub estimates: Vec<Estimate>,
    /// Defect bounds of the dual quasi-morphisms.
    pub defects: Vec<f64>,
    pub tolerance: f64,
    /// Autonomous factors of the construction per unit of `|d|`, summed.
    pub factor_count: usize,
}

/// Checks `|Φ̄ᵢ(f_d) − dᵢ| ≤ CIᵢ + tol` and compares the lower bound
/// `(k·max D)⁻¹·Σ(|Φ̄ᵢ| − CIᵢ)⁺` with the autonomous factor count.
pub fn zk_certificate(inputs: &ZkInputs) -> Result<Certificate> {
    let k = inputs.d.len();
    if inputs.estimates.len() != k || inputs.defects.len() != k || k == 0 {
        return Err(Error::InvalidArgument("need k estimates and k defects for k exponents".into()));
    }
    if inputs.defects.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("defect bounds must be positive".into()));
    }
    let deviations: Vec<f64> = inputs.estimates.iter().zip(&inputs.d).map(|(e, &d)| (e.mean - d as f64).abs()).collect();
    let delta_ok = inputs
        .estimates
        .iter()
        .zip(&deviations)
        .all(|(e, dev)| *dev <= e.half_width + inputs.tolerance);
    let max_defect = inputs.defects.iter().cloned().fold(0.0, f64::max);
    let lower = inputs.estimates.iter().map(|e| (e.mean.abs() - e.half_width).max(0.0)).sum::<f64>() / (k as f64 * max_defect);
    let best_single = inputs
        .estimates
        .iter()
        .zip(&inputs.defects)
        .map(|(e, d)| ((e.mean.abs() - e.half_width) / d).max(0.0))
        .fold(0.0, f64::max);
    let upper = inputs.factor_count as f64;
    let consistent = lower <= upper + 1e-12;
    let content = serde_json::json!({
        "deviations": deviations,
        "delta_check": delta_ok,
        "lower_bound": lower,
        "lower_bound_single": best_single,
        "lipschitz_constant": 1.0 / (k as f64 * max_defect),
        "upper_bound": upper,
        "bounds_consistent": consistent,
    });
    Certificate::build(
        ClaimKind::ZkEmbedding,
        inputs,
        content,
        delta_ok && consistent,
        vec![
            "lower bound conditional on empirical defect bounds".into(),
            "upper bound counts the construction's autonomous factors, not the exact norm".into(),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceInputs {
    pub patterns: Vec<String>,
    pub words: Vec<String>,
    pub matrix: Vec<Vec<Estimate>>,
    /// Areas `a₁, a₂, a₃` of the layout.
    pub areas: [f64; 3],
    /// Braid-level values `ψᵢ(βᵢ)` scaling the diagonal prediction.
    pub diagonal_values: Vec<f64>,
    /// Whether the layout satisfies the large-area requirement.
    pub large_areas: bool,
}

/// Non-singularity of `Mᵢⱼ = Φ̄ᵢ(s_U(βⱼ))` against estimator noise, and the
/// diagonal compared with `6·a₁a₂a₃·ψᵢ(βᵢ)`.
pub fn independence_matrix(inputs: &IndependenceInputs) -> Result<Certificate> {
    let n = inputs.matrix.len();
    if n == 0 || inputs.matrix.iter().any(|r| r.len() != n) || inputs.diagonal_values.len() != n {
        return Err(Error::InvalidArgument("independence matrix must be square with one diagonal value per row".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| inputs.matrix[i][j].mean);
    let ci = DMatrix::from_fn(n, n, |i, j| inputs.matrix[i][j].half_width);
    let sv = m.clone().svd(false, false).singular_values;
    let s_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = sv.iter().cloned().fold(0.0, f64::max);
    let ci_norm = ci.norm();
    let nonsingular = s_min > 10.0 * ci_norm;
    let base = 6.0 * inputs.areas.iter().product::<f64>();
    let predicted: Vec<f64> = inputs.diagonal_values.iter().map(|v| base * v).collect();
    let diag_ok: Vec<bool> = (0..n).map(|i| inputs.matrix[i][i].covers(predicted[i], 0.0)).collect();
    let off_ratio = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].abs() / m[(i, i)].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let content = serde_json::json!({
        "min_singular_value": s_min,
        "condition_number": if s_min > 0.0 { s_max / s_min } else { f64::MAX },
        "ci_norm": ci_norm,
        "nonsingular": nonsingular,
        "predicted_diagonal": predicted,
        "diagonal_within_ci": diag_ok,
        "max_off_diagonal_ratio": off_ratio,
        "large_areas": inputs.large_areas,
    });
    let mut caveats = vec!["areas are the effective twist areas of the layout".to_string()];
    if !inputs.large_areas {
        caveats.push("layout areas below the large-area regime".into());
    }
    Certificate::build(
        ClaimKind::Independence,
        inputs,
        content,
        nonsingular && diag_ok[0] && inputs.large_areas,
        caveats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<f64>>) -> EvalMatrix {
        EvalMatrix::from_rows(rows).unwrap()
    }

    fn close(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn dual_of_identity_and_diagonal() {
        let d = dual_basis(&m(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), 1e-9, None, None).unwrap();
        assert_eq!(d.columns, vec![0, 1]);
        assert!(close(&d.coefficients, &[vec![1.0, 0.0], vec![0.0, 1.0]]));
        let d = dual_basis(&m(vec![vec![2.0, 0.0], vec![0.0, 4.0]]), 1e-9, None, None).unwrap();
        assert!(close(&d.coefficients, &[vec![0.5, 0.0], vec![0.0, 0.25]]));
    }

    #[test]
    fn dual_with_given_columns() {
        let mat = m(vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let d = dual_basis(&mat, 1e-9, None, Some(&[0, 2])).unwrap();
        let c = DMatrix::from_fn(2, 2, |i, j| d.coefficients[i][j]);
        let prod = c * mat.to_dmatrix();
        assert!((prod[(0, 0)] - 1.0).abs() < 1e-12 && prod[(0, 2)].abs() < 1e-12);
        assert!(prod[(1, 0)].abs() < 1e-12 && (prod[(1, 2)] - 1.0).abs() < 1e-12);
        let auto = dual_basis(&mat, 1e-9, None, None).unwrap();
        assert_eq!(auto.k(), 2);
        assert!(auto.residual < 1e-12);
    }

    #[test]
    fn rank_deficiency_reported() {
        let mat = m(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        match dual_basis(&mat, 1e-9, Some(2), None) {
            Err(Error::RankDeficient { achievable, requested }) => assert_eq!((achievable, requested), (1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn braid_dual_basis_is_exact() {
        let pats: Vec<BrooksQm> = ["xxY", "xxy"].iter().map(|s| BrooksQm::new(s.parse().unwrap()).unwrap()).collect();
        let (words, combos, _) = braid_dual_basis(&pats, 4).unwrap();
        for (i, c) in combos.iter().enumerate() {
            for (j, w) in words.iter().enumerate() {
                let v = c.on_free(w);
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9, "{i} {j} {v}");
            }
        }
    }

    #[test]
    fn homomorphism_has_zero_defect() {
        let x_count = |w: &FreeWord| {
            w.letters().iter().map(|l| match l {
                FreeLetter::X => 1.0,
                FreeLetter::XInv => -1.0,
                _ => 0.0,
            }).sum::<f64>()
        };
        let p = free_defect_probe(x_count, 50, 1000, 1).unwrap();
        assert_eq!(p.max, 0.0);
        assert!(free_defect_probe(x_count, 50, 10, 1).is_err());
    }

    #[test]
    fn brooks_defect_is_positive_and_conjugation_blind() {
        let q = BrooksQm::new("xy".parse().unwrap()).unwrap();
        let a = free_defect_probe(|w| q.hom(w) as f64, 40, 2000, 3).unwrap();
        assert!(a.max > 0.0);
        let h: FreeWord = "xYY".parse().unwrap();
        let b = free_defect_probe(|w| q.hom(&h.concat(w).concat(&h.inverse())) as f64, 40, 2000, 3).unwrap();
        assert!((a.max - b.max).abs() <= 2.0);
    }

    #[test]
    fn aut_bound_arithmetic() {
        let e = Estimate { mean: 1.0, half_width: 0.05, samples: 1, seed: 0, p_schedule: vec![], flags: vec![] };
        let c = aut_lower_bound(std::slice::from_ref(&e), &[2.0]).unwrap();
        assert!((c.content["bound"].as_f64().unwrap() - 0.475).abs() < 1e-12);
        assert!(c.passed);
        let zero = Estimate { mean: 0.0, half_width: 0.0, ..e.clone() };
        let c = aut_lower_bound(std::slice::from_ref(&zero), &[2.0]).unwrap();
        assert_eq!(c.content["bound"].as_f64().unwrap(), 0.0);
        assert!(!c.passed);
        // more quasi-morphisms never lower the bound
        let both = aut_lower_bound(&[zero, e], &[2.0, 2.0]).unwrap();
        assert!(both.content["bound"].as_f64().unwrap() >= 0.475);
    }

    #[test]
    fn restricted_bound_arithmetic() {
        let c = restricted_lower_bound(3.0, 0.0, 1.0).unwrap();
        assert_eq!(c.content["bound"].as_f64().unwrap(), 3.0);
        let half = restricted_lower_bound(3.0, 0.0, 0.5).unwrap();
        assert_eq!(half.content["bound"].as_f64().unwrap(), 6.0);
        assert_eq!(restricted_lower_bound(0.0, 0.0, 1.0).unwrap().content["bound"].as_f64().unwrap(), 0.0);
        assert!(restricted_lower_bound(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn zk_zero_vector_passes() {
        let z = Estimate { mean: 0.0, half_width: 0.0, samples: 1, seed: 0, p_schedule: vec![], flags: vec![] };
        let c = zk_certificate(&ZkInputs {
            d: vec![0, 0],
            estimates: vec![z.clone(), z],
            defects: vec![1.0, 1.0],
            tolerance: 0.1,
            factor_count: 0,
        })
        .unwrap();
        assert!(c.passed);
        assert!(c.verify_digest().unwrap());
        assert!(c.render_text().contains("PASS"));
    }

    #[test]
    fn digests_are_reproducible() {
        let a = restricted_lower_bound(1.5, 1e-9, 0.5).unwrap();
        let b = restricted_lower_bound(1.5, 1e-9, 0.5).unwrap();
        assert_eq!(a.inputs_digest, b.inputs_digest);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a.inputs_digest, restricted_lower_bound(1.5, 1e-9, 0.25).unwrap().inputs_digest);
    }

    #[test]
    fn singular_independence_matrix_fails() {
        let e = |m: f64| Estimate { mean: m, half_width: 0.01, samples: 1, seed: 0, p_schedule: vec![], flags: vec![] };
        let inputs = IndependenceInputs {
            patterns: vec!["a".into(), "b".into()],
            words: vec!["u".into(), "v".into()],
            matrix: vec![vec![e(1.0), e(1.0)], vec![e(1.0), e(1.0)]],
            areas: [1.0, 1.0, 1.0],
            diagonal_values: vec![1.0, 1.0],
            large_areas: true,
        };
        let c = independence_matrix(&inputs).unwrap();
        assert!(!c.passed);
        assert!(c.content["min_singular_value"].as_f64().unwrap() < 1e-9);
    }
}
