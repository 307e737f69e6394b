//! Constructors for the flows used by the experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::braid::{FreeLetter, FreeWord};
use crate::error::{Error, Result};

use super::calabi::calabi;
use super::{dist, Disc, FlowSpec, HamiltonianField, Point, RigidMotion, Segment};

pub const DEFAULT_EXPONENT: u32 = 3;

/// `H = h₀·(1 − |p − c|²/ρ²)^exponent` inside the disc, 0 outside.
pub fn build_radial_bump(center: Point, radius: f64, amplitude: f64, exponent: u32) -> Result<HamiltonianField> {
    let f = HamiltonianField::RadialBump { center, radius, amplitude, exponent };
    f.validate()?;
    if amplitude == 0.0 {
        return Err(Error::Geometry("a Morse-type bump needs non-zero amplitude".into()));
    }
    Ok(f)
}

/// Three marked discs and two concentric twist annuli `W ⊂ V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistSystem {
    pub u: [Disc; 3],
    pub w12: Disc,
    pub v12: Disc,
    pub w23: Disc,
    pub v23: Disc,
    #[serde(default = "one")]
    pub turns: f64,
}

fn one() -> f64 {
    1.0
}

impl TwistSystem {
    /// The layout on the horizontal diameter of a disc of radius `scale`
    /// about the origin: marked points at `∓scale/2` and `0`.
    pub fn scaled(scale: f64) -> Self {
        let z = [[-0.5 * scale, 0.0], [0.0, 0.0], [0.5 * scale, 0.0]];
        let a = 0.12 * scale;
        let (rw, rv) = (0.38 * scale, 0.60 * scale);
        TwistSystem {
            u: z.map(|c| Disc::new(c, a)),
            w12: Disc::new([-0.25 * scale, 0.0], rw),
            v12: Disc::new([-0.25 * scale, 0.0], rv),
            w23: Disc::new([0.25 * scale, 0.0], rw),
            v23: Disc::new([0.25 * scale, 0.0], rv),
            turns: 1.0,
        }
    }

    pub fn standard() -> Self {
        Self::scaled(1.0)
    }

    pub fn basepoints(&self) -> [Point; 3] {
        self.u.map(|d| d.center)
    }

    pub fn validate(&self, require_large: bool) -> Result<()> {
        let fail = |m: &str| Err(Error::Geometry(m.to_string()));
        if self.w12.center != self.v12.center || self.w23.center != self.v23.center {
            return fail("twist discs W and V must be concentric");
        }
        if !(self.w12.radius < self.v12.radius && self.w23.radius < self.v23.radius) {
            return fail("need W strictly inside V");
        }
        if !(self.v12.inside_unit() && self.v23.inside_unit()) {
            return fail("V discs must lie in the unit disc");
        }
        if !(self.w12.contains_disc(&self.u[0]) && self.w12.contains_disc(&self.u[1])) {
            return fail("U1 and U2 must lie in W12");
        }
        if !(self.w23.contains_disc(&self.u[1]) && self.w23.contains_disc(&self.u[2])) {
            return fail("U2 and U3 must lie in W23");
        }
        if !(self.v12.disjoint(&self.u[2]) && self.v23.disjoint(&self.u[0])) {
            return fail("V12 must miss U3 and V23 must miss U1");
        }
        if require_large && self.u.iter().any(|d| d.area() < PI / 4.0) {
            return Err(Error::Geometry(format!(
                "marked discs have areas {:?}, below π/4",
                self.u.map(|d| d.area())
            )));
        }
        Ok(())
    }

    pub fn field12(&self) -> HamiltonianField {
        HamiltonianField::Twist {
            center: self.w12.center,
            inner: self.w12.radius,
            outer: self.v12.radius,
            turns: self.turns,
        }
    }

    pub fn field23(&self) -> HamiltonianField {
        HamiltonianField::Twist {
            center: self.w23.center,
            inner: self.w23.radius,
            outer: self.v23.radius,
            turns: self.turns,
        }
    }

    /// The flow realizing a word in `x = σ₁²`, `y = σ₂²`: each letter runs
    /// one unit of the matching twist, inverses backwards.
    pub fn word_flow(&self, word: &FreeWord, step: f64) -> FlowSpec {
        let segments = word
            .letters()
            .iter()
            .map(|l| {
                let f = if l.is_x() { self.field12() } else { self.field23() };
                let f = match l {
                    FreeLetter::X | FreeLetter::Y => f,
                    _ => f.scaled(-1.0),
                };
                Segment::new(f, 1.0)
            })
            .collect();
        FlowSpec { segments, step }
    }

    /// Areas of `W12∖V23`, `W12∩W23`, `W23∖V12` on an `n × n` grid.
    pub fn effective_areas(&self, n: usize) -> [f64; 3] {
        let lo = [
            (self.w12.center[0] - self.w12.radius).min(self.w23.center[0] - self.w23.radius),
            (self.w12.center[1] - self.w12.radius).min(self.w23.center[1] - self.w23.radius),
        ];
        let hi = [
            (self.w12.center[0] + self.w12.radius).max(self.w23.center[0] + self.w23.radius),
            (self.w12.center[1] + self.w12.radius).max(self.w23.center[1] + self.w23.radius),
        ];
        let (hx, hy) = ((hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64);
        let mut a = [0.0; 3];
        for i in 0..n {
            for j in 0..n {
                let p = [lo[0] + (i as f64 + 0.5) * hx, lo[1] + (j as f64 + 0.5) * hy];
                let (in12, in23) = (self.w12.contains(p), self.w23.contains(p));
                if in12 && !self.v23.contains(p) {
                    a[0] += 1.0;
                }
                if in12 && in23 {
                    a[1] += 1.0;
                }
                if in23 && !self.v12.contains(p) {
                    a[2] += 1.0;
                }
            }
        }
        a.map(|c| c * hx * hy)
    }

    /// Moves the whole layout by a rigid motion.
    pub fn moved(&self, m: RigidMotion) -> Self {
        let mv = |d: Disc| Disc::new(m.apply(d.center), d.radius);
        TwistSystem {
            u: self.u.map(mv),
            w12: mv(self.w12),
            v12: mv(self.v12),
            w23: mv(self.w23),
            v23: mv(self.v23),
            turns: self.turns,
        }
    }
}

/// `(h, h′)`: one unit of each twist.
pub fn build_twist_system(layout: &TwistSystem) -> Result<(FlowSpec, FlowSpec)> {
    layout.validate(false)?;
    Ok((FlowSpec::autonomous(layout.field12(), 1.0), FlowSpec::autonomous(layout.field23(), 1.0)))
}

/// `k` commuting Calabi-free flows with supports in disjoint discs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZkSystem {
    /// Disc `Dᵢ` holding the twist part of `fᵢ`.
    pub discs: Vec<Disc>,
    /// Companion disc of the Calabi corrector of `fᵢ`.
    pub companions: Vec<Disc>,
    /// Twist layout centred at the origin; `fᵢ` moves it onto `Dᵢ`.
    pub template: TwistSystem,
    pub words: Vec<FreeWord>,
    /// Twist parts `gᵢ`, already placed in `Dᵢ`.
    pub twists: Vec<FlowSpec>,
    /// `fᵢ = gᵢ` followed by its corrector.
    pub flows: Vec<FlowSpec>,
}

impl ZkSystem {
    pub fn k(&self) -> usize {
        self.flows.len()
    }

    /// `f₁^{d₁} ∘ … ∘ f_k^{d_k}`, negative exponents through the inverse flow.
    pub fn combination(&self, d: &[i64]) -> Result<FlowSpec> {
        if d.len() != self.k() {
            return Err(Error::InvalidArgument(format!("need {} exponents, got {}", self.k(), d.len())));
        }
        let step = self.flows.first().map_or(super::DEFAULT_STEP, |f| f.step);
        let mut out = FlowSpec::identity().with_step(step);
        for (f, &di) in self.flows.iter().zip(d) {
            let base = if di < 0 { f.inverse() } else { f.clone() };
            out = out.then(&base.power(di.unsigned_abs() as usize));
        }
        Ok(out)
    }

    /// Smallest disc about each `Dᵢ`'s centre holding the twist support of
    /// `fᵢ`. A configuration with a point outside it sees that strand fixed
    /// and unlinked, so per-disc sampling may use these instead of `Dᵢ`.
    pub fn sampling_discs(&self) -> Vec<Disc> {
        self.twists
            .iter()
            .zip(&self.discs)
            .map(|(g, d)| {
                let r = g.support().iter().map(|s| dist(s.center, d.center) + s.radius).fold(0.0, f64::max);
                Disc::new(d.center, r.min(d.radius))
            })
            .collect()
    }

    /// Number of autonomous pieces in the combination, an upper bound for
    /// its autonomous norm.
    pub fn autonomous_factor_count(&self, d: &[i64]) -> usize {
        self.flows.iter().zip(d).map(|(f, &di)| f.segments.len() * di.unsigned_abs() as usize).sum()
    }
}

fn zk_discs(k: usize) -> Vec<Disc> {
    if k == 1 {
        return vec![Disc::new([-0.3, 0.0], 0.65)];
    }
    let r = 1.0 / k as f64;
    (0..k).map(|i| Disc::new([-1.0 + (2 * i + 1) as f64 * r, 0.0], r)).collect()
}

/// Greedy placement of `k` corrector discs near the boundary, clear of the
/// twist discs and of each other.
fn companion_discs(k: usize, discs: &[Disc]) -> Result<Vec<Disc>> {
    let rho = if k == 1 { 0.2 } else { (0.28 / k as f64).min(0.14) };
    let ring = 1.0 - rho - 0.03;
    let mut out: Vec<Disc> = Vec::with_capacity(k);
    for i in 0..k {
        // prefer the angle above/below this disc's centre, alternating
        let target = discs[i].center[0];
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut best: Option<(f64, Disc)> = None;
        for j in 0..3600 {
            let a = 2.0 * PI * j as f64 / 3600.0;
            let c = Disc::new([ring * a.cos(), ring * a.sin()], rho);
            let clear = discs.iter().all(|d| d.disjoint(&c)) && out.iter().all(|d| dist(d.center, c.center) > 2.0 * rho + 0.01);
            if !clear {
                continue;
            }
            let cost = (c.center[0] - target).abs() + if c.center[1] * sign > 0.0 { 0.0 } else { 1.0 };
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, c));
            }
        }
        match best {
            Some((_, c)) => out.push(c),
            None => {
                return Err(Error::Geometry(format!("no room for {k} twist discs and their Calabi correctors")));
            }
        }
    }
    Ok(out)
}

/// Builds `fᵢ`: the twist word `wᵢ` realized in `Dᵢ` (a layout of radius
/// 0.9·rad(Dᵢ) conjugated into place), then a radial bump in a companion
/// disc whose Calabi value cancels the twist part exactly.
pub fn build_zk_system(words: &[FreeWord], step: f64) -> Result<ZkSystem> {
    let k = words.len();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let discs = zk_discs(k);
    let companions = companion_discs(k, &discs)?;
    let template = TwistSystem::scaled(0.9 * discs[0].radius);
    template.validate(false)?;
    let mut twists = Vec::with_capacity(k);
    let mut flows = Vec::with_capacity(k);
    for ((w, d), c) in words.iter().zip(&discs).zip(&companions) {
        if w.is_empty() {
            return Err(Error::InvalidArgument("twist words must be non-trivial".into()));
        }
        let g = template.word_flow(w, step).conjugated(RigidMotion::translation(d.center));
        g.validate()?;
        let cal = calabi(&g)?;
        let amplitude = -cal * (DEFAULT_EXPONENT + 1) as f64 / (PI * c.radius * c.radius);
        let mut f = g.clone();
        if amplitude != 0.0 {
            let bump = build_radial_bump(c.center, c.radius, amplitude, DEFAULT_EXPONENT)?;
            f.segments.push(Segment::new(bump, 1.0));
        }
        twists.push(g);
        flows.push(f);
    }
    Ok(ZkSystem { discs, companions, template, words: words.to_vec(), twists, flows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::integrate::time_one;

    #[test]
    fn standard_layout_is_valid() {
        let t = TwistSystem::standard();
        t.validate(false).unwrap();
        assert!(t.validate(true).is_err());
        let a = t.effective_areas(400);
        assert!(a.iter().all(|&x| x > 0.05), "{a:?}");
        assert!((a[0] - a[2]).abs() < 1e-3);
    }

    #[test]
    fn twist_is_identity_outside_v() {
        let (h, _) = build_twist_system(&TwistSystem::standard()).unwrap();
        for p in [[0.5, 0.0], [0.0, 0.9], [-0.9, 0.1]] {
            assert_eq!(time_one(&h, p).unwrap(), p);
        }
    }

    #[test]
    fn twist_is_identity_on_w_after_one_turn() {
        let (h, _) = build_twist_system(&TwistSystem::standard()).unwrap();
        let p = [-0.5, 0.1];
        assert!(dist(time_one(&h, p).unwrap(), p) < 1e-8);
    }

    #[test]
    fn bump_validation() {
        assert!(build_radial_bump([0.0, 0.0], 0.5, 1.0, 3).is_ok());
        assert!(build_radial_bump([0.0, 0.0], 0.5, 0.0, 3).is_err());
        assert!(build_radial_bump([0.6, 0.0], 0.5, 1.0, 3).is_err());
    }

    #[test]
    fn zk_flows_are_calabi_free_and_disjoint() {
        let words: Vec<FreeWord> = ["xxY", "xYxy"].iter().map(|s| s.parse().unwrap()).collect();
        let z = build_zk_system(&words, 0.01).unwrap();
        for f in &z.flows {
            assert!(calabi(f).unwrap().abs() < 1e-6);
        }
        let a: Vec<Disc> = z.flows[0].support();
        let b: Vec<Disc> = z.flows[1].support();
        assert!(a.iter().all(|d| b.iter().all(|e| d.disjoint(e))));
        let ab = z.flows[0].then(&z.flows[1]);
        let ba = z.flows[1].then(&z.flows[0]);
        for i in 0..20 {
            for j in 0..20 {
                let p = [-0.95 + 0.1 * i as f64, -0.95 + 0.1 * j as f64];
                if p[0] * p[0] + p[1] * p[1] < 0.98 {
                    assert!(dist(time_one(&ab, p).unwrap(), time_one(&ba, p).unwrap()) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn zk_single_flow() {
        let z = build_zk_system(&["xxY".parse().unwrap()], 0.01).unwrap();
        assert_eq!(z.k(), 1);
        assert!(calabi(&z.flows[0]).unwrap().abs() < 1e-6);
    }
}
