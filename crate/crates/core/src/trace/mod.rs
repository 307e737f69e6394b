//! Braids traced by `n` points: the loop `γ(g; x)` and its braid word.
//!
//! A loop runs straight from the basepoints `z` to `x`, follows the
//! isotopy, and returns straight to `z`. Strands are projected on the
//! direction `ω`; every exchange of adjacent projections emits `σᵢ^{±1}`,
//! positive when the strand moving rightwards has the smaller orthogonal
//! coordinate. With this convention a counterclockwise full turn of two
//! strands reads `σ₁²`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::braid::{BraidLetter, BraidWord};
use crate::error::{Error, Result};
use crate::flow::calabi::chord_turn;
use crate::flow::integrate::{rk4_step, Plan};
use crate::flow::{dist, norm, FlowSpec, Point};

/// Minimum allowed distance between two strands.
pub const SEPARATION_FLOOR: f64 = 1e-4;
/// Bisection depth for unresolved flow intervals.
pub const MAX_REFINE_DEPTH: usize = 10;

/// `n` distinct points of the open unit disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Configuration(Vec<Point>);

impl Configuration {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty configuration".into()));
        }
        for p in &points {
            if norm(*p) >= 1.0 {
                return Err(Error::OutsideDisc(p[0], p[1]));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if dist(points[i], points[j]) < SEPARATION_FLOOR {
                    return Err(Error::Degenerate(format!("points {j} and {i} closer than the separation floor")));
                }
            }
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `n` points on the horizontal diameter, evenly spaced in `[−0.5, 0.5]`.
    pub fn diameter(n: usize) -> Self {
        if n == 1 {
            return Self(vec![[0.0, 0.0]]);
        }
        Self((0..n).map(|i| [-0.5 + i as f64 / (n - 1) as f64, 0.0]).collect())
    }
}

impl TryFrom<Vec<Point>> for Configuration {
    type Error = Error;

    fn try_from(v: Vec<Point>) -> Result<Self> {
        Configuration::new(v)
    }
}

impl From<Configuration> for Vec<Point> {
    fn from(c: Configuration) -> Self {
        c.0
    }
}

/// How positions move between two consecutive nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Interval {
    /// Exactly linear in time.
    Straight,
    /// One RK4 step of segment `segment` of length `dt`.
    Flow { segment: usize, dt: f64 },
}

/// Strand positions on a common time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrandBundle {
    pub n: usize,
    pub times: Vec<f64>,
    /// Node-major: `positions[k]` holds all strands at `times[k]`.
    pub positions: Vec<Vec<Point>>,
    pub intervals: Vec<Interval>,
    pub spec: FlowSpec,
}

impl StrandBundle {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 0..self.n {
            write!(w, ",x{i},y{i}")?;
        }
        writeln!(w)?;
        for (t, ps) in self.times.iter().zip(&self.positions) {
            write!(w, "{t}")?;
            for p in ps {
                write!(w, ",{},{}", p[0], p[1])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Positions strictly inside interval `k` at fraction `s`, refined from
    /// the interval start.
    fn interior(&self, k: usize, a: &[Point], span: f64, s: f64) -> Vec<Point> {
        match self.intervals[k] {
            Interval::Straight => {
                let b = &self.positions[k + 1];
                let a0 = &self.positions[k];
                // `a` is already on the segment; interpolate from the node.
                let _ = span;
                a0.iter().zip(b).map(|(p, q)| lerp(*p, *q, s)).collect()
            }
            Interval::Flow { segment, .. } => {
                let seg = &self.spec.segments[segment];
                a.iter()
                    .map(|&p| if seg.in_support(p) { rk4_step(seg, p, span) } else { p })
                    .collect()
            }
        }
    }
}

fn lerp(p: Point, q: Point, s: f64) -> Point {
    [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
}

fn check_loop_inputs(x: &Configuration, z: &Configuration, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    if x.len() != z.len() {
        return Err(Error::InvalidArgument(format!("{} points but {} basepoints", x.len(), z.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("braids need at least 2 strands".into()));
    }
    Ok(())
}

/// The loop `γ(gᵖ; x)` based at `z`: straight `z → x` on `[0, ⅓]`, the
/// flow of `spec` repeated `p` times on `[⅓, ⅔]`, straight back on `[⅔, 1]`.
pub fn make_loop(spec: &FlowSpec, x: &Configuration, z: &Configuration, p: usize) -> Result<StrandBundle> {
    check_loop_inputs(x, z, p)?;
    spec.validate()?;
    let plan = spec.plan();
    let n = x.len();
    let total = spec.total_time() * p as f64;
    let mut times = vec![0.0, 1.0 / 3.0];
    let mut positions = vec![z.points().to_vec(), x.points().to_vec()];
    let mut intervals = vec![Interval::Straight];
    let mut cur = x.points().to_vec();
    let mut t = 0.0;
    for _ in 0..p {
        for (si, (seg, &(steps, dt))) in spec.segments.iter().zip(&plan.steps).enumerate() {
            let moving: Vec<bool> = cur.iter().map(|&q| seg.in_support(q)).collect();
            for _ in 0..steps {
                for (q, &m) in cur.iter_mut().zip(&moving) {
                    if m {
                        *q = rk4_step(seg, *q, dt);
                    }
                }
                t += dt;
                times.push(1.0 / 3.0 + t / (3.0 * total.max(f64::MIN_POSITIVE)));
                positions.push(cur.clone());
                intervals.push(Interval::Flow { segment: si, dt });
            }
            for q in &cur {
                if norm(*q) > 1.0 + 1e-6 {
                    return Err(Error::Escaped(norm(*q)));
                }
            }
        }
    }
    times.push(1.0);
    positions.push(z.points().to_vec());
    intervals.push(Interval::Straight);
    Ok(StrandBundle { n, times, positions, intervals, spec: spec.clone() })
}

/// Incremental projection sweep.
#[derive(Clone, Debug)]
pub struct Sweep {
    dir: Point,
    /// `order[k]` is the strand at projected position `k`.
    order: Vec<usize>,
    start: Vec<usize>,
    letters: Vec<BraidLetter>,
}

struct Event {
    s: f64,
    i: usize,
    j: usize,
}

impl Sweep {
    pub fn new(omega: f64, start: &[Point]) -> Self {
        let dir = [omega.cos(), omega.sin()];
        let mut order: Vec<usize> = (0..start.len()).collect();
        let key = |p: Point| p[0] * dir[0] + p[1] * dir[1];
        order.sort_by(|&a, &b| key(start[a]).total_cmp(&key(start[b])).then(a.cmp(&b)));
        Self { dir, start: order.clone(), order, letters: Vec::new() }
    }

    fn u(&self, p: Point) -> f64 {
        p[0] * self.dir[0] + p[1] * self.dir[1]
    }

    fn v(&self, p: Point) -> f64 {
        -p[0] * self.dir[1] + p[1] * self.dir[0]
    }

    /// Applies the exchanges of one linear interval, or returns `false`
    /// (leaving `self` unchanged) when the interval cannot be resolved
    /// with interpolation error `err[i]` per strand.
    pub fn try_interval(&mut self, a: &[Point], b: &[Point], err: &[f64]) -> bool {
        let n = a.len();
        let mut events = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let da = self.u(a[j]) - self.u(a[i]);
                let db = self.u(b[j]) - self.u(b[i]);
                let tol = err[i] + err[j];
                if (da >= 0.0) != (db >= 0.0) {
                    events.push(Event { s: da / (da - db), i, j });
                } else if tol > 0.0 && da.abs().min(db.abs()) <= 2.0 * tol {
                    // the true paths may cross and cross back
                    let va = self.v(a[j]) - self.v(a[i]);
                    let vb = self.v(b[j]) - self.v(b[i]);
                    if va.abs().min(vb.abs()) <= 4.0 * tol + 1e-12 {
                        return false;
                    }
                }
            }
        }
        events.sort_by(|x, y| x.s.total_cmp(&y.s));
        let mut order = self.order.clone();
        let mut pos = vec![0; n];
        for (k, &s) in order.iter().enumerate() {
            pos[s] = k;
        }
        let mut letters = Vec::with_capacity(events.len());
        for e in &events {
            let (pi, pj) = (pos[e.i], pos[e.j]);
            if pi.abs_diff(pj) != 1 {
                return false;
            }
            let (left, right, k) = if pi < pj { (e.i, e.j, pi) } else { (e.j, e.i, pj) };
            let vl = self.v(lerp(a[left], b[left], e.s));
            let vr = self.v(lerp(a[right], b[right], e.s));
            if (vl - vr).abs() <= 2.0 * (err[left] + err[right]) + 1e-12 {
                return false;
            }
            letters.push(BraidLetter::new(k + 1, vl < vr));
            order.swap(k, k + 1);
            pos[left] = k + 1;
            pos[right] = k;
        }
        self.order = order;
        self.letters.extend(letters);
        true
    }

    /// Whether every strand is back at its starting rank.
    pub fn is_closed(&self) -> bool {
        self.order == self.start
    }

    /// Reduced braid read so far. Fails unless every strand is back in place.
    pub fn finish(&self, strands: usize) -> Result<BraidWord> {
        if !self.is_closed() {
            return Err(Error::NotPure(self.order.clone()));
        }
        Ok(BraidWord::new(strands, self.letters.clone())?.free_reduce())
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }
}

/// Interpolation error of one RK4 step: the path leaves its chord by at most
/// `dt·|ΔX|/8` per strand.
fn flow_errors(spec: &FlowSpec, segment: usize, a: &[Point], b: &[Point], dt: f64) -> Vec<f64> {
    let seg = &spec.segments[segment];
    a.iter()
        .zip(b)
        .map(|(&p, &q)| {
            if p == q {
                return 0.0;
            }
            let (va, vb) = (seg.vector_field(p), seg.vector_field(q));
            dt * (va[0] - vb[0]).hypot(va[1] - vb[1]) / 8.0 + 1e-12
        })
        .collect()
}

fn min_straight_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            // chord c(s) = c0 + s·dc, minimize |c| over s ∈ [0,1]
            let c0 = [a[j][0] - a[i][0], a[j][1] - a[i][1]];
            let c1 = [b[j][0] - b[i][0], b[j][1] - b[i][1]];
            let dc = [c1[0] - c0[0], c1[1] - c0[1]];
            let dd = dc[0] * dc[0] + dc[1] * dc[1];
            let s = if dd > 0.0 { (-(c0[0] * dc[0] + c0[1] * dc[1]) / dd).clamp(0.0, 1.0) } else { 0.0 };
            best = best.min(norm(lerp(c0, c1, s)));
        }
    }
    best
}

/// Feeds one straight interval to the sweep.
pub fn sweep_straight(sweep: &mut Sweep, a: &[Point], b: &[Point]) -> Result<()> {
    if min_straight_distance(a, b) < SEPARATION_FLOOR {
        return Err(Error::Degenerate("straight legs pass closer than the separation floor".into()));
    }
    let zero = vec![0.0; a.len()];
    if sweep.try_interval(a, b, &zero) {
        Ok(())
    } else {
        Err(Error::Degenerate("projection tie on a straight leg".into()))
    }
}

/// Feeds one RK4 step of `segment` from `a` (landing at `b`), bisecting
/// with fresh RK4 sub-steps while the exchanges are ambiguous.
pub fn sweep_flow(
    sweep: &mut Sweep,
    spec: &FlowSpec,
    segment: usize,
    a: &[Point],
    b: &[Point],
    dt: f64,
    depth: usize,
) -> Result<()> {
    let err = flow_errors(spec, segment, a, b, dt);
    if sweep.try_interval(a, b, &err) {
        return Ok(());
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::Degenerate(format!("exchange unresolved after {MAX_REFINE_DEPTH} bisections")));
    }
    let seg = &spec.segments[segment];
    let mid: Vec<Point> =
        a.iter().map(|&p| if seg.in_support(p) { rk4_step(seg, p, 0.5 * dt) } else { p }).collect();
    sweep_flow(sweep, spec, segment, a, &mid, 0.5 * dt, depth + 1)?;
    sweep_flow(sweep, spec, segment, &mid, b, 0.5 * dt, depth + 1)
}

/// Open interval of directions around `omega` in which the basepoints keep
/// their projected order. Braids read with directions from one interval
/// agree; crossing a boundary conjugates the word.
pub fn direction_chamber(z: &[Point], omega: f64) -> (f64, f64) {
    let (mut below, mut above) = (PI, PI);
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            let t = (z[j][1] - z[i][1]).atan2(z[j][0] - z[i][0]) + 0.5 * PI;
            // ties recur every half turn
            let up = (t - omega).rem_euclid(PI);
            let down = (omega - t).rem_euclid(PI);
            above = above.min(up);
            below = below.min(down);
        }
    }
    (omega - below, omega + above)
}

/// Reads the braid of a bundle in projection direction `omega`.
pub fn extract_braid(b: &StrandBundle, omega: f64) -> Result<BraidWord> {
    let mut sweep = Sweep::new(omega, &b.positions[0]);
    for (k, iv) in b.intervals.iter().enumerate() {
        let (a, c) = (&b.positions[k], &b.positions[k + 1]);
        match *iv {
            Interval::Straight => sweep_straight(&mut sweep, a, c)?,
            Interval::Flow { segment, dt } => sweep_flow(&mut sweep, &b.spec, segment, a, c, dt, 0)?,
        }
    }
    sweep.finish(b.n)
}

/// Visits consecutive node pairs, splitting any interval where some chord
/// turns by more than a quarter turn.
fn for_each_fine_step(b: &StrandBundle, mut visit: impl FnMut(&[Point], &[Point])) -> Result<()> {
    fn rec(
        b: &StrandBundle,
        k: usize,
        a: &[Point],
        c: &[Point],
        span: f64,
        depth: usize,
        visit: &mut dyn FnMut(&[Point], &[Point]),
    ) -> Result<()> {
        let n = a.len();
        let mut big = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let ca = [a[j][0] - a[i][0], a[j][1] - a[i][1]];
                let cc = [c[j][0] - c[i][0], c[j][1] - c[i][1]];
                if chord_turn(ca, cc).abs() > 0.5 * PI {
                    big = true;
                }
            }
        }
        // a linearly moving chord sweeps less than a half-turn, so the
        // endpoint angle is exact on straight legs
        if !big || matches!(b.intervals[k], Interval::Straight) {
            visit(a, c);
            return Ok(());
        }
        if depth >= MAX_REFINE_DEPTH {
            return Err(Error::Degenerate("chord turning unresolved".into()));
        }
        let mid = match b.intervals[k] {
            Interval::Straight => a.iter().zip(c).map(|(p, q)| lerp(*p, *q, 0.5)).collect::<Vec<_>>(),
            Interval::Flow { .. } => b.interior(k, a, 0.5 * span, 0.5),
        };
        rec(b, k, a, &mid, 0.5 * span, depth + 1, visit)?;
        rec(b, k, &mid, c, 0.5 * span, depth + 1, visit)
    }
    for k in 0..b.intervals.len() {
        let span = match b.intervals[k] {
            Interval::Straight => 1.0,
            Interval::Flow { dt, .. } => dt,
        };
        rec(b, k, &b.positions[k], &b.positions[k + 1], span, 0, &mut visit)?;
    }
    Ok(())
}

/// Signed winding numbers of every chord over the closed loop.
pub fn pairwise_winding(b: &StrandBundle) -> Result<Vec<Vec<i64>>> {
    let n = b.n;
    let mut raw = vec![vec![0.0; n]; n];
    for_each_fine_step(b, |a, c| {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let ca = [a[j][0] - a[i][0], a[j][1] - a[i][1]];
                    let cc = [c[j][0] - c[i][0], c[j][1] - c[i][1]];
                    raw[i][j] += chord_turn(ca, cc);
                }
            }
        }
    })?;
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let turns = raw[i][j] / (2.0 * PI);
            let r = turns.round();
            if (turns - r).abs() > 1e-3 {
                return Err(Error::Degenerate(format!("winding of chord ({i},{j}) is {turns}, not an integer")));
            }
            out[i][j] = r as i64;
        }
    }
    Ok(out)
}

/// `counts[d][i][j]`: times the direction of chord `i → j` passes
/// `directions[d]`.
pub fn crossing_profile(b: &StrandBundle, directions: &[f64]) -> Result<Vec<Vec<Vec<usize>>>> {
    let n = b.n;
    let mut counts = vec![vec![vec![0usize; n]; n]; directions.len()];
    for_each_fine_step(b, |a, c| {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ca = [a[j][0] - a[i][0], a[j][1] - a[i][1]];
                let cc = [c[j][0] - c[i][0], c[j][1] - c[i][1]];
                let turn = chord_turn(ca, cc);
                if turn == 0.0 {
                    continue;
                }
                let start = ca[1].atan2(ca[0]);
                for (d, &w) in directions.iter().enumerate() {
                    let delta = (w - start + PI).rem_euclid(2.0 * PI) - PI;
                    let hit = if turn > 0.0 { delta > 0.0 && delta <= turn } else { delta < 0.0 && delta >= turn };
                    if hit {
                        counts[d][i][j] += 1;
                    }
                }
            }
        }
    })?;
    Ok(counts)
}

/// Braids of `γ(gᵖ; x)` for every `p` in `powers` (increasing) from one
/// integration: the sweep state after `p` repetitions is closed off with
/// the return leg.
pub fn trace_powers(
    spec: &FlowSpec,
    plan: &Plan,
    x: &[Point],
    z: &[Point],
    powers: &[usize],
    omega: f64,
) -> Result<Vec<BraidWord>> {
    let n = x.len();
    let p_max = *powers.last().ok_or_else(|| Error::InvalidArgument("empty power list".into()))?;
    let mut sweep = Sweep::new(omega, z);
    sweep_straight(&mut sweep, z, x)?;
    let mut cur = x.to_vec();
    let mut next = cur.clone();
    let mut out = Vec::with_capacity(powers.len());
    let mut want = powers.iter().peekable();
    for rep in 1..=p_max {
        for (si, (seg, &(steps, dt))) in spec.segments.iter().zip(&plan.steps).enumerate() {
            let moving: Vec<bool> = cur.iter().map(|&q| seg.in_support(q)).collect();
            if !moving.iter().any(|&m| m) {
                continue;
            }
            for _ in 0..steps {
                for i in 0..n {
                    next[i] = if moving[i] { rk4_step(seg, cur[i], dt) } else { cur[i] };
                }
                sweep_flow(&mut sweep, spec, si, &cur, &next, dt, 0)?;
                std::mem::swap(&mut cur, &mut next);
            }
            for q in &cur {
                if norm(*q) > 1.0 + 1e-6 {
                    return Err(Error::Escaped(norm(*q)));
                }
            }
        }
        if want.peek() == Some(&&rep) {
            want.next();
            let mut closing = sweep.clone();
            sweep_straight(&mut closing, &cur, z)?;
            out.push(closing.finish(n)?);
        }
    }
    if want.next().is_some() {
        return Err(Error::InvalidArgument("powers must be increasing and positive".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::sl2::sl2_matrix;
    use crate::flow::{build_twist_system, HamiltonianField, TwistSystem};

    fn cfg(p: &[Point]) -> Configuration {
        Configuration::new(p.to_vec()).unwrap()
    }

    fn rotation(turns: f64) -> FlowSpec {
        FlowSpec::autonomous(HamiltonianField::Twist { center: [0.0, 0.0], inner: 0.6, outer: 0.9, turns }, 1.0)
            .with_step(0.005)
    }

    #[test]
    fn identity_flow_gives_constant_strands_and_empty_braid() {
        let z = Configuration::diameter(3);
        let b = make_loop(&FlowSpec::identity(), &z, &z, 1).unwrap();
        assert!(b.positions.iter().all(|ps| ps == z.points()));
        assert!(extract_braid(&b, 0.0).unwrap().is_empty());
        assert_eq!(pairwise_winding(&b).unwrap(), vec![vec![0; 3]; 3]);
        let c = crossing_profile(&b, &[0.3]).unwrap();
        assert!(c[0].iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn counterclockwise_turn_is_positive() {
        let z = cfg(&[[-0.3, 0.0], [0.3, 0.0]]);
        let b = make_loop(&rotation(1.0), &z, &z, 1).unwrap();
        assert_eq!(extract_braid(&b, 0.0).unwrap().to_signed(), vec![1, 1]);
        assert_eq!(pairwise_winding(&b).unwrap(), vec![vec![0, 1], vec![1, 0]]);
        let b = make_loop(&rotation(-1.0), &z, &z, 1).unwrap();
        assert_eq!(extract_braid(&b, 0.0).unwrap().to_signed(), vec![-1, -1]);
    }

    #[test]
    fn rigid_rotation_crossing_counts() {
        let z = cfg(&[[-0.3, 0.1], [0.2, -0.2]]);
        let b = make_loop(&rotation(1.0), &z, &z, 1).unwrap();
        let c = crossing_profile(&b, &[0.1, 2.0]).unwrap();
        for d in &c {
            assert_eq!(d[0][1], 1);
            assert_eq!(d[1][0], 1);
        }
    }

    #[test]
    fn twist_layout_reads_generators() {
        let layout = TwistSystem::standard();
        let (h, h2) = build_twist_system(&layout).unwrap();
        let z = cfg(&layout.basepoints());
        let b1 = make_loop(&h.clone().with_step(0.005), &z, &z, 1).unwrap();
        let b2 = make_loop(&h2.clone().with_step(0.005), &z, &z, 1).unwrap();
        for omega in [0.0, 0.37, -1.2] {
            assert_eq!(extract_braid(&b1, omega).unwrap().to_signed(), vec![1, 1]);
            assert_eq!(extract_braid(&b2, omega).unwrap().to_signed(), vec![2, 2]);
        }
        // the opposite chamber reverses the ranks
        assert_eq!(extract_braid(&b1, 2.0).unwrap().to_signed(), vec![2, 2]);
    }

    #[test]
    fn chamber_of_horizontal_basepoints() {
        let z = Configuration::diameter(3);
        let (lo, hi) = direction_chamber(z.points(), 0.3);
        assert!((lo + 0.5 * PI).abs() < 1e-12 && (hi - 0.5 * PI).abs() < 1e-12, "{lo} {hi}");
        let (lo, hi) = direction_chamber(&[[0.0, 0.0], [0.1, 0.1]], 0.0);
        assert!((lo + 0.25 * PI).abs() < 1e-12 && (hi - 0.75 * PI).abs() < 1e-12);
    }

    #[test]
    fn writhe_is_twice_total_winding() {
        let layout = TwistSystem::standard();
        let w = "xxYx".parse().unwrap();
        let spec = layout.word_flow(&w, 0.005);
        let x = cfg(&[[-0.45, 0.05], [0.02, 0.1], [0.4, -0.12]]);
        let z = Configuration::diameter(3);
        let b = make_loop(&spec, &x, &z, 2).unwrap();
        let br = extract_braid(&b, 0.2).unwrap();
        let wind = pairwise_winding(&b).unwrap();
        let total: i64 = (0..3).flat_map(|i| ((i + 1)..3).map(move |j| (i, j))).map(|(i, j)| wind[i][j]).sum();
        assert_eq!(br.writhe(), 2 * total);
        assert!(br.is_pure());
        let other = extract_braid(&b, 1.3).unwrap();
        assert_eq!(sl2_matrix(&br).unwrap(), sl2_matrix(&other).unwrap());
        assert_eq!(br.writhe(), other.writhe());
    }

    #[test]
    fn streaming_matches_bundle() {
        let layout = TwistSystem::standard();
        let spec = layout.word_flow(&"xY".parse().unwrap(), 0.005);
        let x = cfg(&[[-0.5, 0.1], [0.05, 0.05], [0.45, -0.1]]);
        let z = Configuration::diameter(3);
        let got = trace_powers(&spec, &spec.plan(), x.points(), z.points(), &[1, 2, 3], 0.1).unwrap();
        for (p, w) in [1, 2, 3].iter().zip(&got) {
            let b = make_loop(&spec, &x, &z, *p).unwrap();
            assert_eq!(&extract_braid(&b, 0.1).unwrap(), w);
        }
    }

    #[test]
    fn configuration_checks() {
        assert!(Configuration::new(vec![[0.0, 0.0], [0.0, 0.00001]]).is_err());
        assert!(Configuration::new(vec![[1.0, 0.0]]).is_err());
        let json = serde_json::to_string(&Configuration::diameter(3)).unwrap();
        assert_eq!(json, "[[-0.5,0.0],[0.0,0.0],[0.5,0.0]]");
    }

    #[test]
    fn bundle_csv() {
        let z = Configuration::diameter(2);
        let b = make_loop(&FlowSpec::identity(), &z, &z, 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,x0,y0,x1,y1\n"));
    }
}
