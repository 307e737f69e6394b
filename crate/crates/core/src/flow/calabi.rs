//! Calabi invariant, isotopy lengths and the Gauss turning functional.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{sample_rng, Estimate};

use super::integrate::{advance_segment, time_one_planned};
use super::{Disc, FlowSpec, Point};

const MAX_DEPTH: usize = 50;
pub const CALABI_TOL: f64 = 1e-12;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // A few forced levels keep narrow features from being skipped.
    if depth >= 4 && delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(depth));
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// `∫_{D²} f` in polar coordinates about the origin, nested adaptive Simpson.
/// Independent of the radial decomposition used by [`calabi`].
pub fn integrate_over_disc(f: &dyn Fn(Point) -> f64, tol: f64) -> Result<f64> {
    let ring = |r: f64| -> f64 {
        let g = |t: f64| f([r * t.cos(), r * t.sin()]);
        adaptive_simpson(&g, 0.0, 2.0 * PI, tol).unwrap_or(f64::NAN) * r
    };
    let v = adaptive_simpson(&ring, 0.0, 1.0, tol)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature(MAX_DEPTH))
    }
}

/// `𝒞 = Σ duration·∫_{D²} H`. Rigid conjugation leaves each term unchanged.
pub fn calabi(spec: &FlowSpec) -> Result<f64> {
    spec.validate()?;
    spec.segments.iter().map(|s| Ok(s.duration * s.field.integral(CALABI_TOL)?)).sum()
}

/// Cell-centred grid on the disc, with the cell area as weight.
fn disc_grid(n: usize) -> (Vec<Point>, f64) {
    let h = 2.0 / n as f64;
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
            if p[0] * p[0] + p[1] * p[1] < 1.0 {
                pts.push(p);
            }
        }
    }
    (pts, h * h)
}

/// `∫₀ᵀ (∫ ‖ġ_t‖² dx)^{1/2} dt` for the isotopy of `spec`, on an `n × n` grid.
pub fn l2_length(spec: &FlowSpec, grid: usize) -> Result<f64> {
    l2_length_inner(spec, None, grid)
}

/// [`l2_length`] for the isotopy `g_t ∘ f`.
pub fn l2_length_precomposed(spec: &FlowSpec, f: &FlowSpec, grid: usize) -> Result<f64> {
    l2_length_inner(spec, Some(f), grid)
}

fn l2_length_inner(spec: &FlowSpec, pre: Option<&FlowSpec>, grid: usize) -> Result<f64> {
    spec.validate()?;
    let (mut pts, w) = disc_grid(grid);
    if let Some(f) = pre {
        f.validate()?;
        let plan = f.plan();
        pts = pts.into_iter().map(|p| time_one_planned(f, &plan, p)).collect::<Result<_>>()?;
    }
    let plan = spec.plan();
    let mut total = 0.0;
    for (seg, &(n, dt)) in spec.segments.iter().zip(&plan.steps) {
        // speed² summed over the grid at each time node of this segment
        let mut energy = vec![0.0; n + 1];
        let mut path = Vec::with_capacity(n);
        for p in pts.iter_mut() {
            if !seg.in_support(*p) {
                continue;
            }
            path.clear();
            let start = *p;
            *p = advance_segment(seg, start, n, dt, &mut path)?;
            for (k, q) in std::iter::once(&start).chain(path.iter()).enumerate() {
                let v = seg.vector_field(*q);
                energy[k] += w * (v[0] * v[0] + v[1] * v[1]);
            }
        }
        let roots: Vec<f64> = energy.iter().map(|e| e.sqrt()).collect();
        total += dt * (roots.iter().sum::<f64>() - 0.5 * (roots[0] + roots[n]));
    }
    Ok(total)
}

/// Signed angle from chord `a` to chord `b`, in `(−π, π]`.
pub fn chord_turn(a: Point, b: Point) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
}

/// Total unsigned turning of the chord between two trajectories, in turns.
/// `None` when a single step turns by more than a quarter.
fn pair_turning(spec: &FlowSpec, plan: &super::integrate::Plan, x: Point, y: Point) -> Result<Option<f64>> {
    let mut total = 0.0;
    let (mut px, mut py) = (x, y);
    let (mut bx, mut by) = (Vec::new(), Vec::new());
    for (seg, &(n, dt)) in spec.segments.iter().zip(&plan.steps) {
        bx.clear();
        by.clear();
        let (sx, sy) = (px, py);
        px = advance_segment(seg, px, n, dt, &mut bx)?;
        py = advance_segment(seg, py, n, dt, &mut by)?;
        let mut prev = [sy[0] - sx[0], sy[1] - sx[1]];
        for (a, b) in bx.iter().zip(&by) {
            let chord = [b[0] - a[0], b[1] - a[1]];
            let d = chord_turn(prev, chord);
            if d.abs() > 0.5 * PI {
                return Ok(None);
            }
            total += d.abs();
            prev = chord;
        }
    }
    Ok(Some(total / (2.0 * PI)))
}

/// Monte Carlo estimate of `∫∫ (1/2π)·(total chord turning) dx dy` over
/// pairs in `domain` (the unit disc by default).
pub fn gauss_functional(spec: &FlowSpec, samples: usize, seed: u64, domain: Option<Disc>) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    spec.validate()?;
    let domain = domain.unwrap_or(Disc::UNIT);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let (x, y) = loop {
                let x = domain.sample(rng.gen(), rng.gen());
                let y = domain.sample(rng.gen(), rng.gen());
                if super::dist(x, y) > 1e-4 {
                    break (x, y);
                }
            };
            let mut s = spec.clone();
            for _ in 0..10 {
                if let Some(v) = pair_turning(&s, &s.plan(), x, y)? {
                    return Ok(v);
                }
                s.step *= 0.5;
            }
            Err(Error::Degenerate("chord turning unresolved after 10 refinements".into()))
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_values(&values, domain.area().powi(2), seed, samples, Vec::new()))
}
