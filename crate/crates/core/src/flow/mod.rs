//! Autonomous Hamiltonian fields on the unit disc and their flows.

pub mod builders;
pub mod calabi;
pub mod integrate;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builders::{build_radial_bump, build_twist_system, build_zk_system, TwistSystem, ZkSystem};
pub use calabi::{calabi, gauss_functional, l2_length, l2_length_precomposed};
pub use integrate::{integrate, time_one, Trajectory};

pub type Point = [f64; 2];

pub fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

pub fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub const UNIT: Disc = Disc { center: [0.0, 0.0], radius: 1.0 };

    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, p: Point) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn inside_unit(&self) -> bool {
        norm(self.center) + self.radius < 1.0
    }

    pub fn disjoint(&self, o: &Disc) -> bool {
        dist(self.center, o.center) > self.radius + o.radius
    }

    pub fn contains_disc(&self, o: &Disc) -> bool {
        dist(self.center, o.center) + o.radius <= self.radius
    }

    /// Maps `[0,1)²` uniform samples to a uniform point of the disc.
    pub fn sample(&self, u: f64, v: f64) -> Point {
        let r = self.radius * u.sqrt();
        let a = 2.0 * PI * v;
        [self.center[0] + r * a.cos(), self.center[1] + r * a.sin()]
    }
}

/// `p ↦ R(angle)·p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    #[serde(default)]
    pub angle: f64,
    #[serde(default)]
    pub translation: Point,
}

impl RigidMotion {
    pub fn translation(t: Point) -> Self {
        Self { angle: 0.0, translation: t }
    }

    pub fn rotation(angle: f64) -> Self {
        Self { angle, translation: [0.0, 0.0] }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        [c * p[0] - s * p[1] + self.translation[0], s * p[0] + c * p[1] + self.translation[1]]
    }

    pub fn rotate_vector(&self, v: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn apply_inverse(&self, p: Point) -> Point {
        let q = [p[0] - self.translation[0], p[1] - self.translation[1]];
        let (s, c) = self.angle.sin_cos();
        [c * q[0] + s * q[1], -s * q[0] + c * q[1]]
    }
}

/// Quintic smoothstep weight: 1 below `t = 0`, 0 above `t = 1`.
fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn ramp_slope(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// A compactly supported autonomous Hamiltonian.
///
/// Radial pieces are written `H(p) = F(|p − c|²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianField {
    Zero,
    /// `F(u) = amplitude·(1 − u/ρ²)^exponent` for `u < ρ²`.
    RadialBump { center: Point, radius: f64, amplitude: f64, exponent: u32 },
    /// Rigid counterclockwise rotation by `2π·turns` per unit time on the
    /// disc of radius `inner`, identity outside radius `outer`.
    Twist { center: Point, inner: f64, outer: f64, turns: f64 },
    Sum { fields: Vec<HamiltonianField> },
    Scaled { factor: f64, field: Box<HamiltonianField> },
}

impl HamiltonianField {
    pub fn validate(&self) -> Result<()> {
        match self {
            HamiltonianField::Zero => Ok(()),
            HamiltonianField::RadialBump { center, radius, amplitude, exponent } => {
                if !(*radius > 0.0) || !amplitude.is_finite() || *exponent < 2 {
                    return Err(Error::Geometry(format!(
                        "bump needs radius > 0, finite amplitude, exponent >= 2; got {radius}, {amplitude}, {exponent}"
                    )));
                }
                check_inside(Disc::new(*center, *radius))
            }
            HamiltonianField::Twist { center, inner, outer, turns } => {
                if !(*inner > 0.0 && outer > inner) || !turns.is_finite() {
                    return Err(Error::Geometry(format!("twist needs 0 < inner < outer, got {inner}, {outer}")));
                }
                check_inside(Disc::new(*center, *outer))
            }
            HamiltonianField::Sum { fields } => fields.iter().try_for_each(|f| f.validate()),
            HamiltonianField::Scaled { factor, field } => {
                if !factor.is_finite() {
                    return Err(Error::InvalidArgument("non-finite scale".into()));
                }
                field.validate()
            }
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        HamiltonianField::Scaled { factor, field: Box::new(self) }
    }

    /// Discs whose union contains the support.
    pub fn support(&self) -> Vec<Disc> {
        match self {
            HamiltonianField::Zero => Vec::new(),
            HamiltonianField::RadialBump { center, radius, .. } => vec![Disc::new(*center, *radius)],
            HamiltonianField::Twist { center, outer, .. } => vec![Disc::new(*center, *outer)],
            HamiltonianField::Sum { fields } => fields.iter().flat_map(|f| f.support()).collect(),
            HamiltonianField::Scaled { factor, field } => {
                if *factor == 0.0 {
                    Vec::new()
                } else {
                    field.support()
                }
            }
        }
    }

    /// Largest `|c| + r` over the support discs.
    pub fn support_radius(&self) -> f64 {
        self.support().iter().map(|d| norm(d.center) + d.radius).fold(0.0, f64::max)
    }

    pub fn in_support(&self, p: Point) -> bool {
        self.support().iter().any(|d| d.contains(p))
    }

    /// `(F(u), F'(u))` of a radial piece.
    fn radial(&self, u: f64) -> (f64, f64) {
        match *self {
            HamiltonianField::RadialBump { radius, amplitude, exponent, .. } => {
                let r2 = radius * radius;
                if u >= r2 {
                    return (0.0, 0.0);
                }
                let s = 1.0 - u / r2;
                let k = exponent as i32;
                let pk1 = s.powi(k - 1);
                (amplitude * pk1 * s, -amplitude * k as f64 / r2 * pk1)
            }
            HamiltonianField::Twist { inner, outer, turns, .. } => {
                let (uw, uv) = (inner * inner, outer * outer);
                let l = uv - uw;
                let c = PI * turns;
                if u >= uv {
                    (0.0, 0.0)
                } else if u <= uw {
                    (-c * ((uw - u) + 0.5 * l), c)
                } else {
                    let t = (u - uw) / l;
                    let g = t.powi(6) - 3.0 * t.powi(5) + 2.5 * t.powi(4);
                    (-c * l * ((1.0 - t) - 0.5 + g), c * ramp(t))
                }
            }
            _ => unreachable!("radial pieces only"),
        }
    }

    /// `F''(u)` of a radial piece.
    fn radial_second(&self, u: f64) -> f64 {
        match *self {
            HamiltonianField::RadialBump { radius, amplitude, exponent, .. } => {
                let r2 = radius * radius;
                if u >= r2 {
                    return 0.0;
                }
                let k = exponent as i32;
                amplitude * (k * (k - 1)) as f64 / (r2 * r2) * (1.0 - u / r2).powi(k - 2)
            }
            HamiltonianField::Twist { inner, outer, turns, .. } => {
                let (uw, uv) = (inner * inner, outer * outer);
                PI * turns * ramp_slope((u - uw) / (uv - uw)) / (uv - uw)
            }
            _ => unreachable!("radial pieces only"),
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        match self {
            HamiltonianField::Zero => 0.0,
            HamiltonianField::RadialBump { center, .. } | HamiltonianField::Twist { center, .. } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                self.radial(dx * dx + dy * dy).0
            }
            HamiltonianField::Sum { fields } => fields.iter().map(|f| f.value(p)).sum(),
            HamiltonianField::Scaled { factor, field } => factor * field.value(p),
        }
    }

    pub fn gradient(&self, p: Point) -> Point {
        let v = self.vector_field(p);
        [v[1], -v[0]]
    }

    /// `X_H = (−∂H/∂y, ∂H/∂x)`, no range check.
    #[inline]
    pub fn vector_field(&self, p: Point) -> Point {
        match self {
            HamiltonianField::Zero => [0.0, 0.0],
            HamiltonianField::RadialBump { center, .. } | HamiltonianField::Twist { center, .. } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let w = 2.0 * self.radial(dx * dx + dy * dy).1;
                [-w * dy, w * dx]
            }
            HamiltonianField::Sum { fields } => fields.iter().fold([0.0, 0.0], |acc, f| {
                let v = f.vector_field(p);
                [acc[0] + v[0], acc[1] + v[1]]
            }),
            HamiltonianField::Scaled { factor, field } => {
                let v = field.vector_field(p);
                [factor * v[0], factor * v[1]]
            }
        }
    }

    /// Bound on the Lipschitz constant of `X_H`, used to pick time steps.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            HamiltonianField::Zero => 0.0,
            HamiltonianField::RadialBump { radius, .. } | HamiltonianField::Twist { outer: radius, .. } => {
                // |DX| ≤ 2|F'| + 4u|F''| on the support; sampled densely.
                let r2 = radius * radius;
                (0..=400)
                    .map(|i| {
                        let u = r2 * i as f64 / 400.0;
                        2.0 * self.radial(u).1.abs() + 4.0 * u * self.radial_second(u).abs()
                    })
                    .fold(0.0, f64::max)
                    * 1.05
            }
            HamiltonianField::Sum { fields } => fields.iter().map(|f| f.lipschitz_bound()).sum(),
            HamiltonianField::Scaled { factor, field } => factor.abs() * field.lipschitz_bound(),
        }
    }

    /// `∫_{D²} H` through the radial primitives.
    pub fn integral(&self, tol: f64) -> Result<f64> {
        match self {
            HamiltonianField::Zero => Ok(0.0),
            HamiltonianField::RadialBump { radius, .. } | HamiltonianField::Twist { outer: radius, .. } => {
                // ∫ F(|p|²) dp = π ∫₀^{ρ²} F(u) du
                let top = radius * radius;
                let mut breaks = vec![0.0, top];
                if let HamiltonianField::Twist { inner, .. } = self {
                    breaks.insert(1, inner * inner);
                }
                let mut total = 0.0;
                for w in breaks.windows(2) {
                    total += calabi::adaptive_simpson(&|u| self.radial(u).0, w[0], w[1], tol)?;
                }
                Ok(PI * total)
            }
            HamiltonianField::Sum { fields } => fields.iter().map(|f| f.integral(tol)).sum(),
            HamiltonianField::Scaled { factor, field } => Ok(factor * field.integral(tol)?),
        }
    }
}

fn check_inside(d: Disc) -> Result<()> {
    if d.inside_unit() {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "support disc at ({}, {}) of radius {} leaves the unit disc",
            d.center[0], d.center[1], d.radius
        )))
    }
}

/// One autonomous piece: flow of `field` for `duration`, optionally viewed
/// through a rigid motion `φ` (the flow of `H∘φ⁻¹`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub field: HamiltonianField,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<RigidMotion>,
}

impl Segment {
    pub fn new(field: HamiltonianField, duration: f64) -> Self {
        Self { field, duration, conjugator: None }
    }

    pub fn conjugated(mut self, by: RigidMotion) -> Self {
        self.conjugator = Some(match self.conjugator {
            None => by,
            Some(inner) => RigidMotion {
                angle: by.angle + inner.angle,
                translation: by.apply(inner.translation),
            },
        });
        self
    }

    pub fn support(&self) -> Vec<Disc> {
        let discs = self.field.support();
        match &self.conjugator {
            None => discs,
            Some(m) => discs.into_iter().map(|d| Disc::new(m.apply(d.center), d.radius)).collect(),
        }
    }

    pub fn in_support(&self, p: Point) -> bool {
        self.support().iter().any(|d| d.contains(p))
    }

    #[inline]
    pub fn vector_field(&self, p: Point) -> Point {
        match &self.conjugator {
            None => self.field.vector_field(p),
            Some(m) => m.rotate_vector(self.field.vector_field(m.apply_inverse(p))),
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        match &self.conjugator {
            None => self.field.value(p),
            Some(m) => self.field.value(m.apply_inverse(p)),
        }
    }

    pub fn inverse(&self) -> Segment {
        Segment {
            field: self.field.clone().scaled(-1.0),
            duration: self.duration,
            conjugator: self.conjugator,
        }
    }
}

pub const DEFAULT_STEP: f64 = 1e-3;

/// A piecewise-autonomous isotopy: segments run in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub segments: Vec<Segment>,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

impl FlowSpec {
    pub fn identity() -> Self {
        Self { segments: Vec::new(), step: DEFAULT_STEP }
    }

    pub fn autonomous(field: HamiltonianField, duration: f64) -> Self {
        Self { segments: vec![Segment::new(field, duration)], step: DEFAULT_STEP }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::InvalidArgument(format!("integration step must be positive, got {}", self.step)));
        }
        for s in &self.segments {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::InvalidArgument(format!("segment duration must be positive, got {}", s.duration)));
            }
            s.field.validate()?;
            for d in s.support() {
                check_inside(d)?;
            }
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Runs `self` then `other`. Uses the finer of the two steps.
    pub fn then(&self, other: &FlowSpec) -> FlowSpec {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        FlowSpec { segments, step: self.step.min(other.step) }
    }

    pub fn power(&self, p: usize) -> FlowSpec {
        let segments = (0..p).flat_map(|_| self.segments.iter().cloned()).collect();
        FlowSpec { segments, step: self.step }
    }

    /// The reversed isotopy, ending at the inverse map.
    pub fn inverse(&self) -> FlowSpec {
        FlowSpec { segments: self.segments.iter().rev().map(|s| s.inverse()).collect(), step: self.step }
    }

    pub fn conjugated(&self, by: RigidMotion) -> FlowSpec {
        FlowSpec { segments: self.segments.iter().map(|s| s.clone().conjugated(by)).collect(), step: self.step }
    }

    /// Union of all segment supports.
    pub fn support(&self) -> Vec<Disc> {
        self.segments.iter().flat_map(|s| s.support()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.segments.iter().all(|s| s.field.support().is_empty())
    }
}
