//! Embedding `ℤᵏ` by commuting flows: dual quasi-morphisms calibrated on the
//! flows, then certificates for combinations `f₁^{d₁}∘…∘f_k^{d_k}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{braid_dual_basis, dual_basis, free_defect_probe, zk_certificate, Certificate, DefectProbe, EvalMatrix, ZkInputs, DEFECT_SAFETY};
use crate::braid::{BrooksQm, FreeWord, QmCombination};
use crate::error::{Error, Result};
use crate::estimate::{phi_n_bar_many, BraidQm, Domain, Estimate, Homogenized, Sampling, Schedule};
use crate::flow::{build_zk_system, ZkSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkConfig {
    pub patterns: Vec<String>,
    #[serde(default = "default_max_len")]
    pub max_word_len: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    pub calibration: Schedule,
    pub calibration_seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_pairs")]
    pub probe_pairs: usize,
    #[serde(default = "default_probe_len")]
    pub probe_len: usize,
    /// Analytic defect bounds replacing the empirical ones.
    #[serde(default)]
    pub defects: Option<Vec<f64>>,
}

fn default_max_len() -> usize {
    6
}
fn default_step() -> f64 {
    0.01
}
fn default_tolerance() -> f64 {
    0.1
}
fn default_pairs() -> usize {
    2000
}
fn default_probe_len() -> usize {
    40
}

impl ZkConfig {
    pub fn new(patterns: &[&str], calibration: Schedule, calibration_seed: u64) -> Self {
        Self {
            patterns: patterns.iter().map(|s| s.to_string()).collect(),
            max_word_len: default_max_len(),
            step: default_step(),
            calibration,
            calibration_seed,
            tolerance: default_tolerance(),
            probe_pairs: default_pairs(),
            probe_len: default_probe_len(),
            defects: None,
        }
    }
}

/// Everything fixed before verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkSetup {
    pub words: Vec<FreeWord>,
    /// Exact braid-level duals `ψᵢ(βⱼ) = δᵢⱼ`.
    pub braid_duals: Vec<QmCombination>,
    pub system: ZkSystem,
    /// `Eₖⱼ = Φ̄(ψₖ)(fⱼ)`, increment estimates.
    pub calibration: Vec<Vec<Estimate>>,
    /// `E⁻¹`, mapping the `ψ` values to the calibrated ones.
    pub inverse: Vec<Vec<f64>>,
    /// Calibrated quasi-morphisms as pattern combinations.
    pub duals: Vec<QmCombination>,
    pub probes: Vec<Option<DefectProbe>>,
    pub defects: Vec<f64>,
    pub sampling: Sampling,
}

impl ZkSetup {
    pub fn k(&self) -> usize {
        self.words.len()
    }

    fn qms(&self) -> Vec<BraidQm> {
        self.duals.iter().map(|c| BraidQm::Combination { combination: c.clone() }).collect()
    }
}

/// Sum of the stratum volumes `|Sᵢ|³`, the factor between defects of a
/// braid quasi-morphism and of its flow average.
fn strata_volume(sampling: &Sampling) -> f64 {
    match &sampling.domain {
        Domain::Strata { discs } => discs.iter().map(|d| d.area().powi(sampling.n as i32)).sum(),
        Domain::Disc { disc } => disc.area().powi(sampling.n as i32),
        Domain::UnitDisc => PI.powi(sampling.n as i32),
    }
}

fn increment(h: &Homogenized) -> Estimate {
    h.increment.clone().unwrap_or_else(|| h.estimate.clone())
}

/// Dual words, flows, flow-level calibration and defect bounds.
pub fn zk_setup(cfg: &ZkConfig) -> Result<ZkSetup> {
    if cfg.calibration.powers.len() < 2 {
        return Err(Error::InvalidArgument("calibration needs at least two powers".into()));
    }
    let patterns: Vec<BrooksQm> = cfg.patterns.iter().map(|s| BrooksQm::new(s.parse()?)).collect::<Result<_>>()?;
    let (words, braid_duals, _) = braid_dual_basis(&patterns, cfg.max_word_len)?;
    let system = build_zk_system(&words, cfg.step)?;
    let sampling =
        Sampling::new(3, cfg.calibration_seed).with_domain(Domain::Strata { discs: system.sampling_discs() });
    let k = words.len();
    let psi: Vec<BraidQm> = braid_duals.iter().map(|c| BraidQm::Combination { combination: c.clone() }).collect();
    // columns j = flows, rows = ψ
    let mut calibration = vec![Vec::with_capacity(k); k];
    for f in &system.flows {
        for (row, h) in calibration.iter_mut().zip(phi_n_bar_many(f, &psi, &cfg.calibration, &sampling)?) {
            row.push(increment(&h));
        }
    }
    let e = EvalMatrix::from_rows(calibration.iter().map(|r| r.iter().map(|x| x.mean).collect()).collect())?;
    let cols: Vec<usize> = (0..k).collect();
    let inv = dual_basis(&e, 1e-9, Some(k), Some(&cols))?.coefficients;
    let duals: Vec<QmCombination> = inv
        .iter()
        .map(|row| {
            let mut terms: Vec<(f64, BrooksQm)> = Vec::new();
            for (c, dual) in row.iter().zip(&braid_duals) {
                for (a, q) in &dual.terms {
                    match terms.iter_mut().find(|(_, p)| p == q) {
                        Some(t) => t.0 += c * a,
                        None => terms.push((c * a, q.clone())),
                    }
                }
            }
            QmCombination { terms }
        })
        .collect();
    let vol = strata_volume(&sampling);
    let (probes, defects) = match &cfg.defects {
        Some(d) => {
            if d.len() != k || d.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidArgument(format!("need {k} positive defect bounds")));
            }
            (vec![None; k], d.clone())
        }
        None => {
            let mut probes = Vec::with_capacity(k);
            let mut defects = Vec::with_capacity(k);
            for (i, c) in duals.iter().enumerate() {
                let p = free_defect_probe(|w| c.on_free(w), cfg.probe_len, cfg.probe_pairs, cfg.calibration_seed ^ (i as u64 + 1))?;
                // homogenization doubles the defect; the flow average scales it by the volume
                defects.push((DEFECT_SAFETY * 2.0 * vol * p.max).max(f64::MIN_POSITIVE));
                probes.push(Some(p));
            }
            (probes, defects)
        }
    };
    Ok(ZkSetup { words, braid_duals, system, calibration, inverse: inv, duals, probes, defects, sampling })
}

/// One verified combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkPoint {
    pub d: Vec<i64>,
    /// Increment estimates with the calibration uncertainty folded in.
    pub estimates: Vec<Estimate>,
    /// Largest-power values as the homogenized estimator reports them.
    pub largest_power: Vec<Estimate>,
    pub certificate: Certificate,
}

impl ZkPoint {
    pub fn lower_bound(&self) -> f64 {
        self.certificate.content["lower_bound"].as_f64().unwrap_or(0.0)
    }
}

/// Estimates the calibrated duals on `f_d` with an independent seed and
/// certifies them.
pub fn zk_verify(setup: &ZkSetup, d: &[i64], schedule: &Schedule, seed: u64, tolerance: f64) -> Result<ZkPoint> {
    let k = setup.k();
    if d.len() != k {
        return Err(Error::InvalidArgument(format!("need {k} exponents, got {}", d.len())));
    }
    let spec = setup.system.combination(d)?;
    let sampling = setup.sampling.clone().with_seed(seed);
    let hs = phi_n_bar_many(&spec, &setup.qms(), schedule, &sampling)?;
    // first-order error from the calibration: δv = −E⁻¹·δE·d
    let inv = DMatrix::from_fn(k, k, |i, j| setup.inverse[i][j]);
    let estimates: Vec<Estimate> = hs
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let mut e = increment(h);
            let cal: f64 = (0..k)
                .flat_map(|m| (0..k).map(move |j| (m, j)))
                .map(|(m, j)| (inv[(i, m)] * setup.calibration[m][j].half_width * d[j] as f64).powi(2))
                .sum();
            e.half_width = e.half_width.hypot(cal.sqrt());
            e
        })
        .collect();
    let mut certificate = zk_certificate(&ZkInputs {
        d: d.to_vec(),
        estimates: estimates.clone(),
        defects: setup.defects.clone(),
        tolerance,
        factor_count: setup.system.autonomous_factor_count(d),
    })?;
    certificate.caveats.push("estimates are power increments; intervals include calibration uncertainty".into());
    if setup.probes.iter().any(|p| p.is_none()) {
        certificate.caveats.retain(|c| !c.contains("empirical"));
        certificate.caveats.push("defect bounds supplied by the caller".into());
    }
    if hs.iter().any(|h| !h.converged()) {
        certificate.caveats.push("largest-power values flagged non_converged".into());
    }
    Ok(ZkPoint { d: d.to_vec(), estimates, largest_power: hs.into_iter().map(|h| h.estimate).collect(), certificate })
}

/// Least-squares line through `(m, L(m))` and whether every point sits on it
/// within its propagated half-width and the slope is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    pub residuals: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub affine: bool,
}

pub fn affine_growth(points: &[ZkPoint]) -> Result<AffineFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("affine fit needs two points".into()));
    }
    let m: Vec<f64> = points.iter().map(|p| p.d.iter().map(|x| x.abs()).max().unwrap_or(0) as f64).collect();
    let l: Vec<f64> = points.iter().map(|p| p.lower_bound()).collect();
    let n = m.len() as f64;
    let (mm, ml) = (m.iter().sum::<f64>() / n, l.iter().sum::<f64>() / n);
    let sxx: f64 = m.iter().map(|x| (x - mm).powi(2)).sum();
    let sxy: f64 = m.iter().zip(&l).map(|(x, y)| (x - mm) * (y - ml)).sum();
    let slope = sxy / sxx;
    let intercept = ml - slope * mm;
    let residuals: Vec<f64> = m.iter().zip(&l).map(|(x, y)| y - intercept - slope * x).collect();
    // the lower bound moves by Σ CIᵢ/(k·max D) when the estimates move by their intervals
    let tolerances: Vec<f64> = points
        .iter()
        .map(|p| {
            let k = p.estimates.len() as f64;
            let dmax = p.certificate.inputs["defects"]
                .as_array()
                .map(|a| a.iter().filter_map(|x| x.as_f64()).fold(0.0, f64::max))
                .unwrap_or(1.0);
            p.estimates.iter().map(|e| e.half_width).sum::<f64>() / (k * dmax)
        })
        .collect();
    let affine = slope > 0.0 && residuals.iter().zip(&tolerances).all(|(r, t)| r.abs() <= *t);
    Ok(AffineFit { intercept, slope, residuals, tolerances, affine })
}
