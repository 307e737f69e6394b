//! Numerical screening of Morse-type Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{dist, HamiltonianField, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub at: Point,
    pub value: f64,
    pub hessian_det: f64,
}

/// Sign of every bump amplitude, or `None` for other kinds or mixed signs.
fn bump_sign(f: &HamiltonianField) -> Option<f64> {
    match f {
        HamiltonianField::RadialBump { amplitude, exponent, .. } if *exponent >= 2 => Some(amplitude.signum()),
        HamiltonianField::Scaled { factor, field } if *factor != 0.0 => bump_sign(field).map(|s| s * factor.signum()),
        HamiltonianField::Sum { fields } => {
            let signs: Option<Vec<f64>> = fields.iter().map(bump_sign).collect();
            let signs = signs?;
            let first = *signs.first()?;
            signs.iter().all(|&s| s == first).then_some(first)
        }
        _ => None,
    }
}

fn hessian(f: &HamiltonianField, p: Point, h: f64) -> [[f64; 2]; 2] {
    let gx = |q: Point| f.gradient(q);
    let (xp, xm) = (gx([p[0] + h, p[1]]), gx([p[0] - h, p[1]]));
    let (yp, ym) = (gx([p[0], p[1] + h]), gx([p[0], p[1] - h]));
    let hxx = (xp[0] - xm[0]) / (2.0 * h);
    let hyy = (yp[1] - ym[1]) / (2.0 * h);
    let hxy = 0.5 * ((xp[1] - xm[1]) + (yp[0] - ym[0])) / (2.0 * h);
    [[hxx, hxy], [hxy, hyy]]
}

/// Checks that `f` is a same-sign sum of radial bumps (so its support is a
/// union of discs on which it does not vanish) whose support is connected,
/// and that every interior critical point is non-degenerate with a
/// distinct critical value. Returns the critical points found.
pub fn check_morse_type(f: &HamiltonianField) -> Result<Vec<CriticalPoint>> {
    f.validate()?;
    if bump_sign(f).is_none() {
        return Err(Error::Geometry("Morse-type check accepts same-sign sums of radial bumps only".into()));
    }
    let discs = f.support();
    // connected support: grow a component from the first disc
    let mut reached = vec![false; discs.len()];
    reached[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..discs.len() {
            if reached[i] {
                continue;
            }
            if (0..discs.len()).any(|j| reached[j] && !discs[i].disjoint(&discs[j])) {
                reached[i] = true;
                changed = true;
            }
        }
    }
    if reached.iter().any(|r| !r) {
        return Err(Error::Geometry("support of a Morse-type field must be connected".into()));
    }

    let lo = [
        discs.iter().map(|d| d.center[0] - d.radius).fold(f64::INFINITY, f64::min),
        discs.iter().map(|d| d.center[1] - d.radius).fold(f64::INFINITY, f64::min),
    ];
    let hi = [
        discs.iter().map(|d| d.center[0] + d.radius).fold(f64::NEG_INFINITY, f64::max),
        discs.iter().map(|d| d.center[1] + d.radius).fold(f64::NEG_INFINITY, f64::max),
    ];
    let m = 161;
    let step = [(hi[0] - lo[0]) / (m - 1) as f64, (hi[1] - lo[1]) / (m - 1) as f64];
    let at = |i: usize, j: usize| [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
    let mut grad = vec![vec![f64::INFINITY; m]; m];
    let mut hmax: f64 = 0.0;
    for (i, row) in grad.iter_mut().enumerate() {
        for (j, g) in row.iter_mut().enumerate() {
            let p = at(i, j);
            let v = f.value(p);
            hmax = hmax.max(v.abs());
            let d = f.gradient(p);
            *g = d[0].hypot(d[1]);
        }
    }
    // skip the flat collar near the support boundary
    let floor = 0.05 * hmax;
    let mut found: Vec<CriticalPoint> = Vec::new();
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let p = at(i, j);
            if f.value(p).abs() < floor {
                continue;
            }
            let g = grad[i][j];
            let is_min = (-1i32..=1).all(|a| {
                (-1i32..=1).all(|b| grad[(i as i32 + a) as usize][(j as i32 + b) as usize] >= g)
            });
            if !is_min {
                continue;
            }
            // Newton polish
            let mut q = p;
            let h = 1e-5;
            for _ in 0..30 {
                let d = f.gradient(q);
                let hs = hessian(f, q, h);
                let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
                if det.abs() < 1e-300 {
                    break;
                }
                let dx = (hs[1][1] * d[0] - hs[0][1] * d[1]) / det;
                let dy = (-hs[1][0] * d[0] + hs[0][0] * d[1]) / det;
                q = [q[0] - dx, q[1] - dy];
                if dx.hypot(dy) < 1e-13 {
                    break;
                }
            }
            let d = f.gradient(q);
            if d[0].hypot(d[1]) > 1e-8 * hmax.max(1.0) || dist(q, p) > 2.0 * step[0].max(step[1]) {
                continue;
            }
            if found.iter().any(|c| dist(c.at, q) < 1e-6) {
                continue;
            }
            let hs = hessian(f, q, h);
            let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
            found.push(CriticalPoint { at: q, value: f.value(q), hessian_det: det });
        }
    }
    let curv = found.iter().map(|c| c.hessian_det.abs()).fold(0.0, f64::max);
    for c in &found {
        if c.hessian_det.abs() <= 1e-6 * curv.max(1e-12) {
            return Err(Error::Geometry(format!("degenerate critical point at {:?}", c.at)));
        }
    }
    for (a, c) in found.iter().enumerate() {
        if found[..a].iter().any(|d| (d.value - c.value).abs() <= 1e-9 * hmax) {
            return Err(Error::Geometry(format!("repeated critical value {}", c.value)));
        }
    }
    if found.is_empty() {
        return Err(Error::Geometry("no interior critical point found".into()));
    }
    Ok(found)
}
