//! Monte Carlo evaluation of the integrated braid quasi-morphisms `Φₙ` and
//! their homogenizations `Φ̄ₙ`.
//!
//! A sample draws `n` points, traces the loop `γ(gᵖ; x)` for every power of
//! the schedule in a single integration and evaluates a braid
//! quasi-morphism on each braid. Samples are independent and seeded by
//! index, and the reduction runs in a fixed order, so results do not depend
//! on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidWord, BrooksQm, QmCombination};
use crate::error::{Error, Result};
use crate::flow::{calabi, dist, Disc, FlowSpec, HamiltonianField, Point};
use crate::trace::{direction_chamber, trace_powers, Configuration, SEPARATION_FLOOR};

mod morse;

pub use morse::{check_morse_type, CriticalPoint};

/// Normal quantile of the two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Share of degenerate draws above which a run aborts.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;
/// Projection directions tried per configuration before it is redrawn.
const DIRECTION_TRIES: usize = 4;
/// Draws per sample index before giving up.
const MAX_DRAWS: usize = 64;

/// Sample mean with a 95% normal confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub p_schedule: Vec<usize>,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl Estimate {
    /// `scale · mean(values)` with the matching CLT half-width.
    pub fn from_values(values: &[f64], scale: f64, seed: u64, samples: usize, p_schedule: Vec<usize>) -> Self {
        let n = values.len();
        let mut flags = Vec::new();
        if n == 0 {
            return Self { mean: 0.0, half_width: 0.0, samples, seed, p_schedule, flags: vec!["empty".into()] };
        }
        let mean = pairwise_sum(values) / n as f64;
        let half_width = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = pairwise_sum(&dev) / (n - 1) as f64;
            Z95 * scale.abs() * (var / n as f64).sqrt()
        } else {
            flags.push("single_sample".into());
            0.0
        };
        Self { mean: scale * mean, half_width, samples, seed, p_schedule, flags }
    }

    /// An exact value.
    pub fn exact(value: f64, seed: u64) -> Self {
        Self { mean: value, half_width: 0.0, samples: 0, seed, p_schedule: Vec::new(), flags: Vec::new() }
    }

    /// `|mean − target| ≤ half_width + slack`.
    pub fn covers(&self, target: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= self.half_width + slack
    }

    /// Distance from zero in half-widths.
    pub fn z_score(&self) -> f64 {
        if self.half_width > 0.0 {
            self.mean.abs() / self.half_width
        } else if self.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn is_flagged(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Sum of independent estimates; half-widths add in quadrature.
    pub fn sum(parts: &[Estimate]) -> Self {
        let mean = parts.iter().map(|e| e.mean).sum();
        let half_width = parts.iter().map(|e| e.half_width * e.half_width).sum::<f64>().sqrt();
        let mut flags: Vec<String> = parts.iter().flat_map(|e| e.flags.iter().cloned()).collect();
        flags.sort();
        flags.dedup();
        Self {
            mean,
            half_width,
            samples: parts.iter().map(|e| e.samples).sum(),
            seed: parts.first().map_or(0, |e| e.seed),
            p_schedule: parts.first().map(|e| e.p_schedule.clone()).unwrap_or_default(),
            flags,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { mean: c * self.mean, half_width: c.abs() * self.half_width, ..self.clone() }
    }
}

/// Summation by recursive halving; the grouping depends only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93)))
}

/// Derived seed for a sub-run (a stratum, a table row).
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Powers `p` of the homogenization and samples per power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub powers: Vec<usize>,
    pub samples: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { powers: vec![1, 2, 4, 8, 16, 32], samples: 10_000 }
    }
}

impl Schedule {
    pub fn new(powers: Vec<usize>, samples: usize) -> Result<Self> {
        let s = Self { powers, samples };
        s.validate()?;
        Ok(s)
    }

    /// `1, 2, 4, …, p_max`.
    pub fn doubling(p_max: usize, samples: usize) -> Result<Self> {
        let mut powers = vec![1];
        while powers.last().is_some_and(|&p| p * 2 <= p_max) {
            powers.push(powers.last().unwrap() * 2);
        }
        Self::new(powers, samples)
    }

    pub fn validate(&self) -> Result<()> {
        if self.powers.is_empty() || self.powers[0] == 0 || self.powers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("schedule powers {:?} must increase from 1 or more", self.powers)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("schedule needs at least one sample".into()));
        }
        Ok(())
    }

    pub fn p_max(&self) -> usize {
        *self.powers.last().expect("validated schedule")
    }
}

/// Quasi-morphism evaluated on traced braids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BraidQm {
    /// Symmetrized Brooks pullback on `P₃`.
    Brooks { pattern: BrooksQm },
    Combination { combination: QmCombination },
    /// `brooks_hom ∘ p3_to_f2` without symmetrization.
    Literal { pattern: BrooksQm },
    /// Exponent of `σ₁²` on `P₂`: half the writhe.
    Linking,
}

impl BraidQm {
    pub fn brooks(pattern: &str) -> Result<Self> {
        Ok(Self::Brooks { pattern: BrooksQm::new(pattern.parse()?)? })
    }

    pub fn strands(&self) -> usize {
        match self {
            BraidQm::Linking => 2,
            _ => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BraidQm::Brooks { pattern } => pattern.check_admissible(),
            BraidQm::Combination { combination } => combination.check_admissible(),
            BraidQm::Literal { .. } | BraidQm::Linking => Ok(()),
        }
    }

    pub fn value(&self, w: &BraidWord) -> Result<f64> {
        if w.strands() != self.strands() {
            return Err(Error::InvalidArgument(format!(
                "quasi-morphism on {} strands applied to a {}-strand braid",
                self.strands(),
                w.strands()
            )));
        }
        match self {
            BraidQm::Brooks { pattern } => Ok(pattern.on_braid(w)? as f64),
            BraidQm::Combination { combination } => combination.on_braid(w),
            BraidQm::Literal { pattern } => Ok(pattern.pure_value(w)? as f64),
            BraidQm::Linking => {
                if !w.is_pure() {
                    return Err(Error::NotPure(w.permutation()));
                }
                Ok(w.writhe() as f64 / 2.0)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            BraidQm::Brooks { pattern } => pattern.to_string(),
            BraidQm::Combination { combination } => combination
                .terms
                .iter()
                .map(|(c, q)| format!("{c}*{q}"))
                .collect::<Vec<_>>()
                .join(" + "),
            BraidQm::Literal { pattern } => format!("literal {pattern}"),
            BraidQm::Linking => "linking".into(),
        }
    }
}

/// Where configurations are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Uniform on `(D²)ⁿ`.
    #[default]
    UnitDisc,
    /// All points uniform in one disc.
    Disc { disc: Disc },
    /// Sum of the [`Domain::Disc`] estimates over the listed discs.
    Strata { discs: Vec<Disc> },
}

impl Domain {
    fn disc(&self) -> Disc {
        match self {
            Domain::UnitDisc => Disc::UNIT,
            Domain::Disc { disc } => *disc,
            Domain::Strata { .. } => unreachable!("strata are split before sampling"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let discs = match self {
            Domain::UnitDisc => return Ok(()),
            Domain::Disc { disc } => std::slice::from_ref(disc),
            Domain::Strata { discs } => discs.as_slice(),
        };
        if discs.is_empty() {
            return Err(Error::InvalidArgument("empty strata".into()));
        }
        for d in discs {
            if !(d.radius > 0.0) || crate::flow::norm(d.center) + d.radius > 1.0 + 1e-12 {
                return Err(Error::Geometry(format!("sampling disc {d:?} is not inside the unit disc")));
            }
        }
        Ok(())
    }
}

/// Everything about drawing and tracing samples except their number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub domain: Domain,
    /// Basepoints `z`; points on the horizontal diameter by default.
    #[serde(default)]
    pub basepoints: Option<Vec<Point>>,
    /// Default projection direction.
    #[serde(default)]
    pub omega: f64,
}

impl Sampling {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, domain: Domain::UnitDisc, basepoints: None, omega: 0.0 }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn basepoints(&self) -> Result<Configuration> {
        match &self.basepoints {
            Some(z) => {
                if z.len() != self.n {
                    return Err(Error::InvalidArgument(format!("{} basepoints for n = {}", z.len(), self.n)));
                }
                Configuration::new(z.clone())
            }
            None => Ok(Configuration::diameter(self.n)),
        }
    }
}

/// Sample values of one run.
struct Draws {
    /// `values[j][k][i]`: quasi-morphism `j` on sample `i` at power
    /// `powers[k]`, divided by the power.
    values: Vec<Vec<Vec<f64>>>,
    degenerate: usize,
}

fn draw_configuration(rng: &mut ChaCha8Rng, disc: Disc, n: usize) -> Vec<Point> {
    loop {
        let x: Vec<Point> = (0..n).map(|_| disc.sample(rng.gen(), rng.gen())).collect();
        let separated = (0..n).all(|i| (0..i).all(|j| dist(x[i], x[j]) >= SEPARATION_FLOOR));
        let inside = x.iter().all(|p| crate::flow::norm(*p) < 1.0);
        if separated && inside {
            return x;
        }
    }
}

/// Braids of one sample for all powers, or `None` after the direction
/// fallbacks fail.
fn trace_sample(
    spec: &FlowSpec,
    plan: &crate::flow::integrate::Plan,
    x: &[Point],
    z: &[Point],
    powers: &[usize],
    omega: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<BraidWord>>> {
    // fallbacks stay in the chamber of `omega` so every sample reads its
    // braid with the same strand labelling
    let (lo, hi) = direction_chamber(z, omega);
    let mut w = omega;
    for _ in 0..DIRECTION_TRIES {
        match trace_powers(spec, plan, x, z, powers, w) {
            Ok(b) => return Ok(Some(b)),
            Err(Error::Degenerate(_)) => w = lo + (hi - lo) * rng.gen_range(0.05..0.95),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn run_draws(spec: &FlowSpec, qms: &[BraidQm], powers: &[usize], sampling: &Sampling, samples: usize) -> Result<Draws> {
    spec.validate()?;
    if qms.is_empty() {
        return Err(Error::InvalidArgument("no quasi-morphism to evaluate".into()));
    }
    for q in qms {
        q.validate()?;
        if sampling.n != q.strands() {
            return Err(Error::InvalidArgument(format!(
                "{} needs n = {}, got n = {}",
                q.label(),
                q.strands(),
                sampling.n
            )));
        }
    }
    let disc = sampling.domain.disc();
    let z = sampling.basepoints()?;
    let plan = spec.plan();
    let per_sample: Vec<(Vec<f64>, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(sampling.seed, i as u64);
            let mut degenerate = 0;
            for _ in 0..MAX_DRAWS {
                let x = draw_configuration(&mut rng, disc, sampling.n);
                let traced = match trace_sample(spec, &plan, &x, z.points(), powers, sampling.omega, &mut rng)? {
                    Some(b) => b,
                    None => {
                        degenerate += 1;
                        continue;
                    }
                };
                let mut vals = Vec::with_capacity(qms.len() * powers.len());
                for q in qms {
                    for (b, &p) in traced.iter().zip(powers) {
                        vals.push(q.value(b)? / p as f64);
                    }
                }
                return Ok((vals, degenerate));
            }
            Err(Error::DegenerateSampling { degenerate, attempts: degenerate })
        })
        .collect::<Result<_>>()?;
    let degenerate: usize = per_sample.iter().map(|s| s.1).sum();
    if degenerate as f64 > MAX_DEGENERATE_FRACTION * samples as f64 {
        return Err(Error::DegenerateSampling { degenerate, attempts: samples + degenerate });
    }
    let k = powers.len();
    let values = (0..qms.len())
        .map(|j| (0..k).map(|m| per_sample.iter().map(|s| s.0[j * k + m]).collect()).collect())
        .collect();
    Ok(Draws { values, degenerate })
}

fn volume(sampling: &Sampling) -> f64 {
    sampling.domain.disc().area().powi(sampling.n as i32)
}

/// `Φₙ(g) = ∫ φ(γ(g; x)) dx` from `samples` configurations.
pub fn phi_n(spec: &FlowSpec, q: &BraidQm, sampling: &Sampling, samples: usize) -> Result<Estimate> {
    sampling.domain.validate()?;
    if let Domain::Strata { discs } = &sampling.domain {
        let parts = strata(discs, sampling, |s| phi_n(spec, q, s, samples))?;
        return Ok(Estimate::sum(&parts));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let d = run_draws(spec, std::slice::from_ref(q), &[1], sampling, samples)?;
    let mut e = Estimate::from_values(&d.values[0][0], volume(sampling), sampling.seed, samples, vec![1]);
    if d.degenerate > 0 {
        e.flags.push(format!("resampled_{}", d.degenerate));
    }
    Ok(e)
}

fn strata<T>(discs: &[Disc], sampling: &Sampling, f: impl Fn(&Sampling) -> Result<T>) -> Result<Vec<T>> {
    discs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let s = Sampling {
                seed: child_seed(sampling.seed, i as u64),
                domain: Domain::Disc { disc: *d },
                ..sampling.clone()
            };
            f(&s)
        })
        .collect()
}

/// Homogenized estimate with the whole `Φₙ(gᵖ)/p` curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homogenized {
    /// Value at the largest power, flagged `non_converged` when the last
    /// two powers disagree beyond their combined interval.
    pub estimate: Estimate,
    pub curve: Vec<Estimate>,
    /// `(Φₙ(g^{p₂}) − Φₙ(g^{p₁}))/(p₂ − p₁)` over the last two powers.
    /// Unlike the value at the largest power it carries no `b/p` bias from
    /// a bounded offset `Φₙ(gᵖ) ≈ p·Φ̄ₙ + b`.
    #[serde(default)]
    pub increment: Option<Estimate>,
}

impl Homogenized {
    pub fn converged(&self) -> bool {
        !self.estimate.is_flagged("non_converged")
    }

    fn from_curve(curve: Vec<Estimate>, increment: Option<Estimate>) -> Self {
        let mut estimate = curve.last().expect("non-empty schedule").clone();
        if curve.len() >= 2 {
            let (a, b) = (&curve[curve.len() - 2], &curve[curve.len() - 1]);
            if (a.mean - b.mean).abs() > a.half_width + b.half_width {
                estimate.flags.push("non_converged".into());
            }
        }
        estimate.flags.sort();
        estimate.flags.dedup();
        Self { estimate, curve, increment }
    }
}

/// `Φ̄ₙ(g) ≈ Φₙ(gᵖ)/p` over the schedule, all powers from the same samples.
pub fn phi_n_bar(spec: &FlowSpec, q: &BraidQm, schedule: &Schedule, sampling: &Sampling) -> Result<Homogenized> {
    Ok(phi_n_bar_many(spec, std::slice::from_ref(q), schedule, sampling)?.remove(0))
}

/// [`phi_n_bar`] for several quasi-morphisms on the same traced braids.
pub fn phi_n_bar_many(
    spec: &FlowSpec,
    qms: &[BraidQm],
    schedule: &Schedule,
    sampling: &Sampling,
) -> Result<Vec<Homogenized>> {
    schedule.validate()?;
    sampling.domain.validate()?;
    if let Domain::Strata { discs } = &sampling.domain {
        let parts = strata(discs, sampling, |s| phi_n_bar_many(spec, qms, schedule, s))?;
        return Ok((0..qms.len()).map(|j| combine_strata(parts.iter().map(|p| &p[j]), sampling.seed)).collect());
    }
    let d = run_draws(spec, qms, &schedule.powers, sampling, schedule.samples)?;
    let vol = volume(sampling);
    let k = schedule.powers.len();
    let out = d
        .values
        .iter()
        .map(|per_power| {
            let curve = per_power
                .iter()
                .map(|v| {
                    let mut e = Estimate::from_values(v, vol, sampling.seed, schedule.samples, schedule.powers.clone());
                    if d.degenerate > 0 {
                        e.flags.push(format!("resampled_{}", d.degenerate));
                    }
                    e
                })
                .collect();
            let increment = (k >= 2).then(|| {
                let (p1, p2) = (schedule.powers[k - 2] as f64, schedule.powers[k - 1] as f64);
                let inc: Vec<f64> = per_power[k - 2]
                    .iter()
                    .zip(&per_power[k - 1])
                    .map(|(a, b)| (b * p2 - a * p1) / (p2 - p1))
                    .collect();
                Estimate::from_values(&inc, vol, sampling.seed, schedule.samples, schedule.powers.clone())
            });
            Homogenized::from_curve(curve, increment)
        })
        .collect();
    Ok(out)
}

fn combine_strata<'a>(parts: impl Iterator<Item = &'a Homogenized> + Clone, seed: u64) -> Homogenized {
    let k = parts.clone().next().map_or(0, |h| h.curve.len());
    let curve = (0..k)
        .map(|m| {
            let mut e = Estimate::sum(&parts.clone().map(|h| h.curve[m].clone()).collect::<Vec<_>>());
            e.seed = seed;
            e.flags.retain(|f| f != "non_converged");
            e
        })
        .collect();
    let increment = parts.map(|h| h.increment.clone()).collect::<Option<Vec<_>>>().map(|v| {
        let mut e = Estimate::sum(&v);
        e.seed = seed;
        e
    });
    Homogenized::from_curve(curve, increment)
}

/// One row of [`calabi_ratio`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub calabi: f64,
    pub phi_bar: Estimate,
    pub ratio: f64,
    pub ratio_half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalabiRatioReport {
    pub rows: Vec<RatioRow>,
    /// `(max − min)/|mean|` over the ratios.
    pub spread: f64,
    pub tolerance: f64,
    pub constant: bool,
}

/// Smallest `|𝒞|` accepted as a denominator.
pub const CALABI_THRESHOLD: f64 = 1e-6;

/// `Φ̄₂(g)/𝒞(g)` per flow with common random numbers; the verdict holds
/// when the relative spread stays within `tolerance`.
pub fn calabi_ratio(specs: &[FlowSpec], schedule: &Schedule, seed: u64, tolerance: f64) -> Result<CalabiRatioReport> {
    let sampling = Sampling::new(2, seed);
    let mut rows = Vec::new();
    for spec in specs {
        let c = calabi(spec)?;
        if c.abs() <= CALABI_THRESHOLD {
            continue;
        }
        let h = phi_n_bar(spec, &BraidQm::Linking, schedule, &sampling)?;
        rows.push(RatioRow {
            calabi: c,
            ratio: h.estimate.mean / c,
            ratio_half_width: h.estimate.half_width / c.abs(),
            phi_bar: h.estimate,
        });
    }
    if rows.len() < 2 {
        return Err(Error::InvalidArgument("need two specs with non-zero Calabi value".into()));
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = (hi - lo) / mean.abs();
    Ok(CalabiRatioReport { rows, spread, tolerance, constant: spread <= tolerance })
}

/// One `(flow, quasi-morphism)` cell of a vanishing table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingRow {
    pub label: String,
    pub qm: String,
    /// Whether the flow is autonomous and Morse-type (expected zero).
    pub expect_zero: bool,
    pub estimate: Estimate,
    pub increment: Option<Estimate>,
    pub zero_within_ci: bool,
    /// Same quasi-morphism on `H + δ·bump` for each perturbation size.
    #[serde(default)]
    pub perturbed: Vec<(f64, Estimate)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub field: HamiltonianField,
    pub deltas: Vec<f64>,
}

/// `Φ̄₃` of Morse-type autonomous fields (expected to vanish) and of
/// control flows (expected not to), with common random numbers. Fields
/// run for unit time with integration step `step`.
pub fn vanishing_report(
    fields: &[(String, HamiltonianField)],
    qms: &[BraidQm],
    controls: &[(String, FlowSpec)],
    perturbation: Option<&Perturbation>,
    schedule: &Schedule,
    sampling: &Sampling,
    step: f64,
) -> Result<Vec<VanishingRow>> {
    let mut rows = Vec::new();
    let row = |label: &str, q: &BraidQm, h: Homogenized, expect_zero: bool| VanishingRow {
        label: label.to_string(),
        qm: q.label(),
        expect_zero,
        zero_within_ci: h.estimate.covers(0.0, 0.0),
        estimate: h.estimate,
        increment: h.increment,
        perturbed: Vec::new(),
    };
    for (label, field) in fields {
        check_morse_type(field)?;
        let spec = FlowSpec::autonomous(field.clone(), 1.0).with_step(step);
        let base = phi_n_bar_many(&spec, qms, schedule, sampling)?;
        let mut perturbed: Vec<Vec<(f64, Estimate)>> = vec![Vec::new(); qms.len()];
        if let Some(pert) = perturbation {
            for &delta in &pert.deltas {
                let sum = HamiltonianField::Sum { fields: vec![field.clone(), pert.field.clone().scaled(delta)] };
                let s = FlowSpec::autonomous(sum, 1.0).with_step(step);
                for (j, h) in phi_n_bar_many(&s, qms, schedule, sampling)?.into_iter().enumerate() {
                    perturbed[j].push((delta, h.estimate));
                }
            }
        }
        for ((q, h), p) in qms.iter().zip(base).zip(perturbed) {
            rows.push(VanishingRow { perturbed: p, ..row(label, q, h, true) });
        }
    }
    for (label, spec) in controls {
        for (q, h) in qms.iter().zip(phi_n_bar_many(spec, qms, schedule, sampling)?) {
            rows.push(row(label, q, h, false));
        }
    }
    Ok(rows)
}

/// Whether `|v(δ) − v₀|` shrinks (up to combined intervals) as `δ`
/// decreases, and ends within the interval of `v₀`.
pub fn continuity_verdict(base: &Estimate, perturbed: &[(f64, Estimate)]) -> bool {
    let mut sorted: Vec<&(f64, Estimate)> = perturbed.iter().collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let gap = |e: &Estimate| (e.mean - base.mean).abs();
    let shrinking = sorted
        .windows(2)
        .all(|w| gap(&w[1].1) <= gap(&w[0].1) + w[0].1.half_width + w[1].1.half_width);
    let last_close = sorted.last().is_none_or(|(_, e)| gap(e) <= e.half_width + base.half_width);
    shrinking && last_close
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{build_radial_bump, RigidMotion, TwistSystem};

    #[test]
    fn estimate_arithmetic() {
        let e = Estimate::from_values(&[1.0, 3.0], 2.0, 7, 2, vec![]);
        assert_eq!(e.mean, 4.0);
        let sd = 2f64.sqrt();
        assert!((e.half_width - Z95 * 2.0 * sd / 2f64.sqrt()).abs() < 1e-12);
        let c = Estimate::from_values(&[5.0; 10], 1.0, 0, 10, vec![]);
        assert_eq!((c.mean, c.half_width), (5.0, 0.0));
        let s = Estimate::sum(&[Estimate { half_width: 3.0, ..c.clone() }, Estimate { half_width: 4.0, ..c }]);
        assert_eq!((s.mean, s.half_width), (10.0, 5.0));
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-10);
    }

    #[test]
    fn rng_streams_differ_and_repeat() {
        let a: u64 = sample_rng(1, 0).gen();
        let b: u64 = sample_rng(1, 1).gen();
        let c: u64 = sample_rng(2, 0).gen();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, sample_rng(1, 0).gen::<u64>());
    }

    #[test]
    fn schedule_validation() {
        assert_eq!(Schedule::doubling(16, 10).unwrap().powers, vec![1, 2, 4, 8, 16]);
        assert!(Schedule::new(vec![2, 2], 10).is_err());
        assert!(Schedule::new(vec![0, 1], 10).is_err());
        assert_eq!(Schedule::default().powers, vec![1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn identity_flow_estimates_zero() {
        let q = BraidQm::brooks("xxY").unwrap();
        let e = phi_n(&FlowSpec::identity(), &q, &Sampling::new(3, 1), 200).unwrap();
        assert_eq!((e.mean, e.half_width), (0.0, 0.0));
    }

    #[test]
    fn inadmissible_pattern_rejected() {
        let q = BraidQm::brooks("xy").unwrap();
        assert!(matches!(
            phi_n(&FlowSpec::identity(), &q, &Sampling::new(3, 1), 10),
            Err(Error::InadmissiblePattern { .. })
        ));
    }

    #[test]
    fn twist_samples_are_integers() {
        let (h, _) = crate::flow::build_twist_system(&TwistSystem::standard()).unwrap();
        let q = BraidQm::brooks("xxY").unwrap();
        let s = Sampling::new(3, 5);
        let d = run_draws(&h.with_step(0.01), &[q], &[1], &s, 100).unwrap();
        assert!(d.values[0][0].iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let layout = TwistSystem::standard();
        let spec = layout.word_flow(&"xxY".parse().unwrap(), 0.01);
        let q = BraidQm::brooks("xxY").unwrap();
        let sched = Schedule::new(vec![1, 2], 60).unwrap();
        let s = Sampling::new(3, 11);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| phi_n_bar(&spec, &q, &sched, &s).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a, b);
        assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
    }

    #[test]
    fn linking_on_rigid_rotation() {
        // every pair in the rotating disc winds once per unit time
        let f = HamiltonianField::Twist { center: [0.0, 0.0], inner: 0.99, outer: 0.999, turns: 1.0 };
        let spec = FlowSpec::autonomous(f, 1.0).with_step(0.01);
        let inner = Disc::new([0.0, 0.0], 0.9);
        let s = Sampling::new(2, 3).with_domain(Domain::Disc { disc: inner });
        let e = phi_n_bar(&spec, &BraidQm::Linking, &Schedule::new(vec![1, 2], 50).unwrap(), &s).unwrap();
        assert!((e.estimate.mean - inner.area().powi(2)).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn strata_add_up() {
        let f = HamiltonianField::Twist { center: [0.0, 0.0], inner: 0.99, outer: 0.999, turns: 1.0 };
        let spec = FlowSpec::autonomous(f, 1.0).with_step(0.01);
        let discs = vec![Disc::new([-0.4, 0.0], 0.3), Disc::new([0.4, 0.0], 0.2)];
        let s = Sampling::new(2, 3).with_domain(Domain::Strata { discs: discs.clone() });
        let e = phi_n(&spec, &BraidQm::Linking, &s, 20).unwrap();
        let want: f64 = discs.iter().map(|d| d.area().powi(2)).sum();
        assert!((e.mean - want).abs() < 1e-9);
    }

    #[test]
    fn calabi_ratio_conjugate_and_power() {
        let b = build_radial_bump([0.0, 0.0], 0.7, 1.0, 3).unwrap();
        let spec = FlowSpec::autonomous(b, 1.0).with_step(0.01);
        let conj = spec.conjugated(RigidMotion::rotation(0.7));
        let sched = Schedule::new(vec![1, 2], 300).unwrap();
        let r = calabi_ratio(&[spec.clone(), conj, spec.power(2)], &sched, 9, 0.05).unwrap();
        // rotation about the centre leaves the field and the samples unchanged
        assert!((r.rows[0].ratio - r.rows[1].ratio).abs() < 1e-6 * r.rows[0].ratio.abs());
        assert!((r.rows[0].ratio - r.rows[2].ratio).abs() <= r.rows[0].ratio_half_width + r.rows[2].ratio_half_width);
    }

    #[test]
    fn continuity_verdict_logic() {
        let e = |m: f64| Estimate { mean: m, half_width: 0.01, samples: 1, seed: 0, p_schedule: vec![], flags: vec![] };
        let base = e(0.0);
        assert!(continuity_verdict(&base, &[(0.1, e(0.4)), (0.05, e(0.2)), (0.025, e(0.01))]));
        assert!(!continuity_verdict(&base, &[(0.1, e(0.1)), (0.05, e(0.3)), (0.025, e(0.01))]));
        assert!(!continuity_verdict(&base, &[(0.1, e(0.4)), (0.05, e(0.2)), (0.025, e(0.1))]));
    }
}
