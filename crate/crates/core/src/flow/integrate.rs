//! Classical RK4 integration of piecewise-autonomous flows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{norm, FlowSpec, Point, Segment};

/// Escape tolerance beyond the closed unit disc.
const ESCAPE_TOL: f64 = 1e-6;

/// Per-segment step counts. Every point integrated under one plan shares
/// the same time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// `(steps, dt)` per segment.
    pub steps: Vec<(usize, f64)>,
}

impl Plan {
    pub fn total_steps(&self) -> usize {
        self.steps.iter().map(|s| s.0).sum()
    }
}

impl FlowSpec {
    /// Step is the configured one, shortened where the field's Lipschitz
    /// bound would make it coarse.
    pub fn plan(&self) -> Plan {
        let steps = self
            .segments
            .iter()
            .map(|s| {
                let lip = s.field.lipschitz_bound();
                let h = if lip > 0.0 { self.step.min(0.25 / lip) } else { s.duration };
                let n = ((s.duration / h).ceil() as usize).max(1);
                (n, s.duration / n as f64)
            })
            .collect();
        Plan { steps }
    }
}

#[inline]
pub fn rk4_step(seg: &Segment, p: Point, dt: f64) -> Point {
    let k1 = seg.vector_field(p);
    let k2 = seg.vector_field([p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]]);
    let k3 = seg.vector_field([p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]]);
    let k4 = seg.vector_field([p[0] + dt * k3[0], p[1] + dt * k3[1]]);
    [
        p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn check_escape(p: Point) -> Result<()> {
    let r = norm(p);
    if r > 1.0 + ESCAPE_TOL || !r.is_finite() {
        return Err(Error::Escaped(r));
    }
    Ok(())
}

/// Runs `n` steps of one segment, pushing each new position. Points outside
/// the segment's support stay put without evaluating the field.
pub fn advance_segment(seg: &Segment, mut p: Point, n: usize, dt: f64, out: &mut Vec<Point>) -> Result<Point> {
    if !seg.in_support(p) {
        out.extend(std::iter::repeat_n(p, n));
        return Ok(p);
    }
    for _ in 0..n {
        p = rk4_step(seg, p, dt);
        out.push(p);
    }
    check_escape(p)?;
    Ok(p)
}

/// Same as [`advance_segment`] without recording.
pub fn advance_segment_end(seg: &Segment, mut p: Point, n: usize, dt: f64) -> Result<Point> {
    if !seg.in_support(p) {
        return Ok(p);
    }
    for _ in 0..n {
        p = rk4_step(seg, p, dt);
    }
    check_escape(p)?;
    Ok(p)
}

/// Time samples and positions of one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
}

impl Trajectory {
    pub fn end(&self) -> Point {
        *self.points.last().expect("trajectory has its start point")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for (t, p) in self.times.iter().zip(&self.points) {
            writeln!(w, "{t},{},{}", p[0], p[1])?;
        }
        Ok(())
    }
}

fn check_start(spec: &FlowSpec, x0: Point) -> Result<()> {
    spec.validate()?;
    if norm(x0) >= 1.0 {
        return Err(Error::OutsideDisc(x0[0], x0[1]));
    }
    Ok(())
}

pub fn integrate(spec: &FlowSpec, x0: Point) -> Result<Trajectory> {
    check_start(spec, x0)?;
    let plan = spec.plan();
    let mut times = Vec::with_capacity(plan.total_steps() + 1);
    let mut points = Vec::with_capacity(plan.total_steps() + 1);
    times.push(0.0);
    points.push(x0);
    let (mut t, mut p) = (0.0, x0);
    for (seg, &(n, dt)) in spec.segments.iter().zip(&plan.steps) {
        p = advance_segment(seg, p, n, dt, &mut points)?;
        times.extend((1..=n).map(|k| t + k as f64 * dt));
        t += seg.duration;
    }
    Ok(Trajectory { times, points })
}

/// Endpoint of [`integrate`] without storing the path.
pub fn time_one(spec: &FlowSpec, x0: Point) -> Result<Point> {
    check_start(spec, x0)?;
    time_one_planned(spec, &spec.plan(), x0)
}

pub fn time_one_planned(spec: &FlowSpec, plan: &Plan, mut p: Point) -> Result<Point> {
    for (seg, &(n, dt)) in spec.segments.iter().zip(&plan.steps) {
        p = advance_segment_end(seg, p, n, dt)?;
    }
    Ok(p)
}

/// Determinant of the time-one map's Jacobian by central differences.
pub fn jacobian_det(spec: &FlowSpec, p: Point, h: f64) -> Result<f64> {
    let plan = spec.plan();
    let f = |q: Point| time_one_planned(spec, &plan, q);
    let xp = f([p[0] + h, p[1]])?;
    let xm = f([p[0] - h, p[1]])?;
    let yp = f([p[0], p[1] + h])?;
    let ym = f([p[0], p[1] - h])?;
    let a = (xp[0] - xm[0]) / (2.0 * h);
    let c = (xp[1] - xm[1]) / (2.0 * h);
    let b = (yp[0] - ym[0]) / (2.0 * h);
    let d = (yp[1] - ym[1]) / (2.0 * h);
    Ok(a * d - b * c)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::flow::{dist, HamiltonianField, RigidMotion};

    fn bump() -> HamiltonianField {
        HamiltonianField::RadialBump { center: [0.0, 0.0], radius: 0.8, amplitude: 0.5, exponent: 3 }
    }

    #[test]
    fn zero_field_is_constant() {
        let t = integrate(&FlowSpec::autonomous(HamiltonianField::Zero, 1.0), [0.3, 0.2]).unwrap();
        assert!(t.points.iter().all(|&p| p == [0.3, 0.2]));
    }

    #[test]
    fn circular_orbit_period() {
        // On the rigid part of a twist the angular speed is 2π·turns.
        let f = HamiltonianField::Twist { center: [0.0, 0.0], inner: 0.5, outer: 0.7, turns: 0.25 };
        let period = 1.0 / 0.25;
        let p = integrate(&FlowSpec::autonomous(f, period), [0.3, 0.0]).unwrap().end();
        let angle = p[1].atan2(p[0]);
        assert!(angle.abs() < 1e-6, "{angle}");
        assert!((p[0].hypot(p[1]) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn bump_orbit_matches_angular_velocity() {
        let f = bump();
        let r: f64 = 0.4;
        let s = 1.0 - r * r / 0.64;
        let omega = 2.0 * (-0.5 * 3.0 / 0.64 * s * s);
        let period = 2.0 * PI / omega.abs();
        let p = integrate(&FlowSpec::autonomous(f, period), [r, 0.0]).unwrap().end();
        assert!(dist(p, [r, 0.0]) < 1e-6 * r);
    }

    #[test]
    fn energy_is_conserved() {
        let f = bump();
        let spec = FlowSpec::autonomous(f.clone(), 3.0);
        let t = integrate(&spec, [0.2, 0.5]).unwrap();
        let h0 = f.value(t.points[0]);
        for p in &t.points {
            assert!((f.value(*p) - h0).abs() < 1e-9);
        }
    }

    #[test]
    fn flow_property() {
        let f = HamiltonianField::Sum {
            fields: vec![
                bump(),
                HamiltonianField::Twist { center: [0.2, 0.1], inner: 0.2, outer: 0.4, turns: 1.0 },
            ],
        };
        let a = FlowSpec { segments: vec![super::Segment::new(f.clone(), 0.3), super::Segment::new(f.clone(), 0.7)], step: 1e-3 };
        let b = FlowSpec::autonomous(f, 1.0);
        for p in [[0.1, 0.1], [0.4, -0.2], [-0.3, 0.5]] {
            assert!(dist(time_one(&a, p).unwrap(), time_one(&b, p).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn inverse_spec_undoes_the_map() {
        let spec = FlowSpec::autonomous(bump(), 1.0).then(
            &FlowSpec::autonomous(HamiltonianField::Twist { center: [0.0, 0.0], inner: 0.3, outer: 0.6, turns: 1.0 }, 1.0)
                .conjugated(RigidMotion::translation([0.2, 0.0])),
        );
        let round = spec.then(&spec.inverse());
        for p in [[0.1, 0.3], [0.5, -0.1]] {
            assert!(dist(time_one(&round, p).unwrap(), p) < 1e-8);
        }
    }

    #[test]
    fn points_outside_support_never_move() {
        let spec = FlowSpec::autonomous(bump(), 2.0);
        let t = integrate(&spec, [0.85, 0.0]).unwrap();
        assert!(t.points.iter().all(|&p| p == [0.85, 0.0]));
    }

    #[test]
    fn area_preserved() {
        let spec = FlowSpec::autonomous(bump(), 1.0);
        let det = jacobian_det(&spec, [0.3, 0.2], 1e-5).unwrap();
        assert!((det - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_start_outside() {
        assert!(integrate(&FlowSpec::identity(), [1.0, 0.0]).is_err());
    }

    #[test]
    fn csv_export() {
        let t = integrate(&FlowSpec::autonomous(bump(), 0.002), [0.1, 0.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y\n0,0.1,0\n"));
        assert_eq!(text.lines().count(), t.points.len() + 1);
    }
}
