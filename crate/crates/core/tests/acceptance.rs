//! Acceptance run: one PASS/FAIL line per criterion. A red criterion is
//! reported, never turned into a panic.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use autobraid::braid::sl2::{p3_to_f2, sl2_matrix};
use autobraid::braid::{eta, BraidWord};
use autobraid::estimate::check_morse_type;
use autobraid::estimate::{
    calabi_ratio, continuity_verdict, phi_n_bar_many, sample_rng, vanishing_report, BraidQm, Perturbation, Sampling,
    Schedule,
};
use autobraid::flow::integrate::jacobian_det;
use autobraid::flow::{build_radial_bump, build_twist_system, integrate, FlowSpec, HamiltonianField, TwistSystem};
use autobraid::toolkit::zk::{affine_growth, zk_setup, zk_verify, ZkConfig};
use autobraid::toolkit::{braid_dual_basis, independence_matrix, random_free_word, IndependenceInputs};
use autobraid::trace::{crossing_profile, direction_chamber, extract_braid, make_loop};
use autobraid::{BrooksQm, Configuration, IntMatrix2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn bump(c: [f64; 2], r: f64, a: f64) -> HamiltonianField {
    build_radial_bump(c, r, a, 3).expect("valid bump")
}

fn brooks(p: &str) -> BrooksQm {
    BrooksQm::new(p.parse().expect("pattern")).expect("pattern")
}

fn fmt_e(e: &autobraid::Estimate) -> String {
    format!("{:.4} ± {:.4}", e.mean, e.half_width)
}

fn random_pure(rng: &mut ChaCha8Rng, max: usize) -> BraidWord {
    let len = rng.gen_range(0..=max.saturating_sub(3));
    let s: Vec<i32> = (0..len).map(|_| [1, -1, 2, -2][rng.gen_range(0..4)]).collect();
    let suffixes: [&[i32]; 6] = [&[], &[1], &[2], &[1, 2], &[2, 1], &[1, 2, 1]];
    suffixes
        .iter()
        .map(|fix| BraidWord::from_signed(3, &[&s[..], fix].concat()).expect("3 strands"))
        .find(|w| w.is_pure())
        .expect("some suffix closes the permutation")
}

fn ac1() -> Outcome {
    let delta = eta(2, 3).and_then(|a| a.concat(&eta(3, 3)?)).map_err(|e| e.to_string())?;
    let garside = BraidWord::from_signed(3, &[1, 2, 1, 2, 1, 2]).map_err(|e| e.to_string())?;
    let (m1, m2) = (sl2_matrix(&delta).map_err(|e| e.to_string())?, sl2_matrix(&garside).map_err(|e| e.to_string())?);
    let minus = IntMatrix2::new(-1, 0, 0, -1);
    let ok = m1 == minus && m2 == minus && delta.writhe() == garside.writhe();
    Ok((ok, format!("matrices {m1} / {m2}, writhes {} / {}", delta.writhe(), garside.writhe())))
}

fn ac2() -> Outcome {
    let mut rng = sample_rng(2, 0);
    let mut bad = 0;
    for _ in 0..1000 {
        let w = random_pure(&mut rng, 40);
        let g = p3_to_f2(&w).map_err(|e| e.to_string())?;
        if !g.matrix().map_err(|e| e.to_string())?.eq_up_to_sign(&sl2_matrix(&w).map_err(|e| e.to_string())?) {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} mismatches in 1000 pure braids")))
}

fn ac3() -> Outcome {
    let mut rng = sample_rng(3, 0);
    let mut worst: f64 = 0.0;
    for p in ["xy", "xY", "xxy"] {
        let q = brooks(p);
        for _ in 0..500 {
            let len = rng.gen_range(0..=30);
            let g = random_free_word(&mut rng, len);
            let approx = q.count(&g.pow(64)) as f64 / 64.0;
            worst = worst.max((approx - q.hom(&g) as f64).abs());
        }
    }
    Ok((worst <= 0.125, format!("max |count(g^64)/64 - hom(g)| = {worst:.4}")))
}

fn ac4() -> Outcome {
    let f = bump([0.1, -0.05], 0.7, 1.3);
    let spec = FlowSpec::autonomous(f.clone(), 1.0);
    let mut det_err: f64 = 0.0;
    let mut h_err: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            // grid over the support square, keeping the points inside the disc
            let p = [0.1 - 0.7 + 1.4 * (i as f64 + 0.5) / 20.0, -0.05 - 0.7 + 1.4 * (j as f64 + 0.5) / 20.0];
            if !f.in_support(p) {
                continue;
            }
            det_err = det_err.max((jacobian_det(&spec, p, 1e-5).map_err(|e| e.to_string())? - 1.0).abs());
            let tr = integrate(&spec, p).map_err(|e| e.to_string())?;
            let h0 = f.value(p);
            h_err = h_err.max(tr.points.iter().map(|q| (f.value(*q) - h0).abs()).fold(0.0, f64::max));
        }
    }
    Ok((det_err <= 1e-4 && h_err <= 1e-6, format!("max |det J - 1| = {det_err:.2e}, max |ΔH| = {h_err:.2e}")))
}

fn ac5() -> Outcome {
    let layout = TwistSystem::standard();
    let (h, h2) = build_twist_system(&layout).map_err(|e| e.to_string())?;
    let z = Configuration::new(layout.basepoints().to_vec()).map_err(|e| e.to_string())?;
    let b1 = extract_braid(&make_loop(&h, &z, &z, 1).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
    let b2 = extract_braid(&make_loop(&h2, &z, &z, 1).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
    let ok = b1.to_signed() == [1, 1] && b2.to_signed() == [2, 2];
    Ok((ok, format!("h -> {b1}, h' -> {b2}")))
}

fn ac6() -> Outcome {
    let specs: Vec<FlowSpec> = [
        bump([0.0, 0.0], 0.9, 1.0),
        bump([0.15, -0.1], 0.75, 1.5),
        bump([-0.2, 0.25], 0.6, 2.0),
    ]
    .into_iter()
    .map(|f| FlowSpec::autonomous(f, 1.0).with_step(0.01))
    .collect();
    let schedule = Schedule::new(vec![1, 2, 4, 8, 16], 10_000).map_err(|e| e.to_string())?;
    let r = calabi_ratio(&specs, &schedule, 6, 0.05).map_err(|e| e.to_string())?;
    let ratios: Vec<String> = r.rows.iter().map(|w| format!("{:.4} ± {:.4}", w.ratio, w.ratio_half_width)).collect();
    Ok((r.constant, format!("ratios [{}], spread {:.3}", ratios.join(", "), r.spread)))
}

fn morse_fields() -> Vec<(String, HamiltonianField)> {
    vec![
        ("centred bump".into(), bump([0.0, 0.0], 0.9, 1.0)),
        ("offset bump".into(), bump([0.15, -0.1], 0.75, 1.5)),
    ]
}

fn ac7() -> Outcome {
    let qms = vec![BraidQm::brooks("xxY").map_err(|e| e.to_string())?, BraidQm::brooks("xxy").map_err(|e| e.to_string())?];
    let layout = TwistSystem::standard();
    let controls = vec![("twist word xxY".to_string(), layout.word_flow(&"xxY".parse().map_err(|e: autobraid::Error| e.to_string())?, 0.01))];
    let fields = morse_fields();
    for (_, f) in &fields {
        check_morse_type(f).map_err(|e| e.to_string())?;
    }
    let schedule = Schedule::new(vec![1, 2, 4, 8, 16, 32], 20_000).map_err(|e| e.to_string())?;
    let rows = vanishing_report(&fields, &qms, &controls, None, &schedule, &Sampling::new(3, 7), 0.01)
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &rows {
        let inc = r.increment.as_ref().map(fmt_e).unwrap_or_default();
        if r.expect_zero {
            ok &= r.zero_within_ci;
            parts.push(format!("{} {}: {} (increment {inc})", r.label, r.qm, fmt_e(&r.estimate)));
        } else if r.qm == "xxY" {
            let far = r.estimate.mean.abs() > 5.0 * r.estimate.half_width;
            ok &= far;
            parts.push(format!("control {}: {} ({:.1} half-widths)", r.qm, fmt_e(&r.estimate), r.estimate.mean.abs() / r.estimate.half_width));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn ac8() -> Outcome {
    let cfg = ZkConfig::new(&["xxY", "xxy"], Schedule::new(vec![1, 2, 4, 8], 8000).map_err(|e| e.to_string())?, 81);
    let setup = zk_setup(&cfg).map_err(|e| e.to_string())?;
    let schedule = Schedule::new(vec![1, 2, 4, 8], 8000).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = vec![format!("words {}, {}", setup.words[0], setup.words[1])];
    for d in [[1i64, 0], [0, 1], [3, -2]] {
        let p = zk_verify(&setup, &d, &schedule, 82, cfg.tolerance).map_err(|e| e.to_string())?;
        ok &= p.certificate.passed;
        parts.push(format!("d={d:?}: [{}] {}", p.estimates.iter().map(fmt_e).collect::<Vec<_>>().join(", "), if p.certificate.passed { "ok" } else { "fail" }));
    }
    let growth_schedule = Schedule::new(vec![1, 2, 4, 8], 4000).map_err(|e| e.to_string())?;
    let points = (1..=4)
        .map(|m| zk_verify(&setup, &[m, 0], &growth_schedule, 83, cfg.tolerance))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let fit = affine_growth(&points).map_err(|e| e.to_string())?;
    ok &= fit.affine;
    parts.push(format!("lower bounds for (m,0): slope {:.3e}, intercept {:.3e}, affine {}", fit.slope, fit.intercept, fit.affine));
    Ok((ok, parts.join("; ")))
}

fn ac9() -> Outcome {
    let layout = TwistSystem::standard();
    let patterns = [brooks("xxY"), brooks("xxy")];
    let (words, duals, _) = braid_dual_basis(&patterns, 6).map_err(|e| e.to_string())?;
    let qms: Vec<BraidQm> = duals.iter().map(|c| BraidQm::Combination { combination: c.clone() }).collect();
    let schedule = Schedule::new(vec![1, 2, 4, 8], 10_000).map_err(|e| e.to_string())?;
    let mut matrix = vec![Vec::new(); 2];
    for w in &words {
        let hs = phi_n_bar_many(&layout.word_flow(w, 0.01), &qms, &schedule, &Sampling::new(3, 9)).map_err(|e| e.to_string())?;
        for (row, h) in matrix.iter_mut().zip(hs) {
            row.push(h.increment.unwrap_or(h.estimate));
        }
    }
    let areas = layout.effective_areas(400);
    let inputs = IndependenceInputs {
        patterns: patterns.iter().map(|p| p.to_string()).collect(),
        words: words.iter().map(|w| w.to_string()).collect(),
        matrix,
        areas,
        diagonal_values: vec![1.0, 1.0],
        large_areas: layout.validate(true).is_ok(),
    };
    let c = independence_matrix(&inputs).map_err(|e| e.to_string())?;
    let m = &inputs.matrix;
    Ok((
        c.passed,
        format!(
            "M = [[{}, {}], [{}, {}]], min singular value {:.2e} vs 10·CI {:.2e}, prediction 6a1a2a3 = {:.2e}, areas {:.3?} (need ≥ π/4)",
            fmt_e(&m[0][0]),
            fmt_e(&m[0][1]),
            fmt_e(&m[1][0]),
            fmt_e(&m[1][1]),
            c.content["min_singular_value"].as_f64().unwrap_or(f64::NAN),
            10.0 * c.content["ci_norm"].as_f64().unwrap_or(f64::NAN),
            6.0 * areas.iter().product::<f64>(),
            areas
        ),
    ))
}

fn ac10() -> Outcome {
    let layout = TwistSystem::standard();
    let spec = layout.word_flow(&"xxYx".parse().map_err(|e: autobraid::Error| e.to_string())?, 0.01);
    let z = Configuration::diameter(3);
    let mut rng = sample_rng(10, 0);
    let mut violations = 0;
    let mut worst_slack = usize::MAX;
    let mut traced = 0;
    while traced < 500 {
        let x: Vec<[f64; 2]> = (0..3).map(|_| autobraid::flow::Disc::UNIT.sample(rng.gen(), rng.gen())).collect();
        let Ok(x) = Configuration::new(x) else { continue };
        let Ok(bundle) = make_loop(&spec, &x, &z, 1) else { continue };
        let (lo, hi) = direction_chamber(z.points(), 0.0);
        let omega = lo + (hi - lo) * (0.05 + 0.9 * rng.gen::<f64>());
        let Ok(b) = extract_braid(&bundle, omega) else { continue };
        // exchanges in direction ω happen when a chord is perpendicular to it
        let counts = crossing_profile(&bundle, &[omega + 0.5 * std::f64::consts::PI]).map_err(|e| e.to_string())?;
        let bound: usize = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| counts[0][i][j] + 4).sum();
        let len = b.free_reduce().len();
        if len > bound {
            violations += 1;
        }
        worst_slack = worst_slack.min(bound.saturating_sub(len));
        traced += 1;
    }
    Ok((violations == 0, format!("{violations} violations in {traced} samples, smallest slack {worst_slack}")))
}

fn ac11() -> Outcome {
    let q = vec![BraidQm::brooks("xxY").map_err(|e| e.to_string())?];
    let fields = vec![("centred bump".to_string(), bump([0.0, 0.0], 0.9, 1.0))];
    let pert = Perturbation { field: bump([0.3, 0.2], 0.4, 1.0), deltas: vec![0.1, 0.05, 0.025] };
    let schedule = Schedule::new(vec![1, 2, 4, 8, 16], 8000).map_err(|e| e.to_string())?;
    let rows = vanishing_report(&fields, &q, &[], Some(&pert), &schedule, &Sampling::new(3, 11), 0.01).map_err(|e| e.to_string())?;
    let r = &rows[0];
    let ok = continuity_verdict(&r.estimate, &r.perturbed);
    let parts: Vec<String> = r.perturbed.iter().map(|(d, e)| format!("δ={d}: {}", fmt_e(e))).collect();
    Ok((ok, format!("base {}; {}", fmt_e(&r.estimate), parts.join(", "))))
}

type Criterion = fn() -> Outcome;

// runs without the libtest harness so the verdict lines are never captured
fn main() {
    // comma-separated ids, e.g. ACCEPTANCE_ONLY=AC6,AC8
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|o| o.split(',').map(|s| s.trim().to_string()).collect());
    let criteria: [(&str, Criterion); 11] = [
        ("AC1 exact algebra", ac1),
        ("AC2 projection round-trip", ac2),
        ("AC3 homogenization oracle", ac3),
        ("AC4 flow fidelity", ac4),
        ("AC5 twist tracing", ac5),
        ("AC6 Calabi proportionality", ac6),
        ("AC7 Morse-type vanishing", ac7),
        ("AC8 Z^k certificates", ac8),
        ("AC9 independence matrix", ac9),
        ("AC10 crossing inequality", ac10),
        ("AC11 continuity probe", ac11),
    ];
    let (mut passed, mut ran) = (0, 0);
    for (name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.iter().any(|id| name.starts_with(&format!("{id} ")))) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (ok, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        println!("{} {name} ({:.1}s): {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {passed}/{ran} criteria pass");
}
