use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use autobraid::estimate::{
    calabi_ratio, continuity_verdict, phi_n, phi_n_bar_many, vanishing_report, BraidQm, Estimate, Sampling,
};
use autobraid::flow::calabi::CALABI_TOL;
use autobraid::flow::{calabi, TwistSystem};
use autobraid::toolkit::zk::{affine_growth, zk_setup, zk_verify, ZkConfig};
use autobraid::toolkit::{
    braid_dual_basis, digest, independence_matrix, restricted_lower_bound, Certificate, IndependenceInputs,
};
use autobraid::trace::{extract_braid, make_loop, pairwise_winding};
use autobraid::{BrooksQm, Configuration};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};

/// Verdict of a finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub summary: String,
    pub out_dir: PathBuf,
}

/// Writes every artifact with the config digest and seed embedded.
struct Output {
    dir: PathBuf,
    digest: String,
    seed: u64,
    kind: &'static str,
    files: Vec<String>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn header(&self) -> String {
        format!("# config_digest={} seed={}\n", self.digest, self.seed)
    }

    fn json(&mut self, name: &str, value: Value) -> anyhow::Result<()> {
        let doc = json!({ "config_digest": self.digest, "seed": self.seed, "kind": self.kind, "result": value });
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", path.display()))
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let mut buf = self.header().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        let path = self.path(name);
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))
    }

    fn text(&mut self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        fs::write(&path, self.header() + body).with_context(|| format!("writing {}", path.display()))
    }

    fn certificates(&mut self, certs: &[Certificate]) -> anyhow::Result<()> {
        self.json("certificates.json", serde_json::to_value(certs)?)?;
        let text: String = certs.iter().map(|c| c.render_text() + "\n").collect();
        self.text("certificates.txt", &text)
    }
}

fn estimate_row(e: &Estimate) -> [String; 2] {
    [e.mean.to_string(), e.half_width.to_string()]
}

fn to_value<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

/// Digest of the effective config; the output directory is not part of it.
pub fn config_digest(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let mut c = cfg.clone();
    c.out = None;
    Ok(digest(&c)?)
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> anyhow::Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Output { dir: dir.clone(), digest: config_digest(cfg)?, seed: cfg.seed, kind: cfg.experiment.kind(), files: Vec::new() };
    let (passed, summary) = dispatch(cfg, &mut out)?;
    let manifest = json!({
        "config_digest": out.digest,
        "seed": cfg.seed,
        "kind": out.kind,
        "versions": { "autobraid": autobraid::VERSION, "cli": env!("CARGO_PKG_VERSION") },
        "threads": threads,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "files": out.files,
        "passed": passed,
        "summary": summary,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(RunOutcome { passed, summary, out_dir: dir })
}

fn brooks_qms(patterns: &[String]) -> anyhow::Result<Vec<BraidQm>> {
    patterns.iter().map(|p| Ok(BraidQm::brooks(p)?)).collect()
}

fn dispatch(cfg: &ExperimentConfig, out: &mut Output) -> anyhow::Result<(bool, String)> {
    match &cfg.experiment {
        Experiment::Trace { flow, points, basepoints, power, omega, step } => {
            let spec = flow.build(*step)?;
            let z = match basepoints.clone().or_else(|| flow.natural_basepoints()) {
                Some(z) => Configuration::new(z)?,
                None => Configuration::diameter(3),
            };
            let x = match points {
                Some(x) => Configuration::new(x.clone())?,
                None => z.clone(),
            };
            let bundle = make_loop(&spec, &x, &z, *power)?;
            let braid = extract_braid(&bundle, *omega)?;
            let winding = pairwise_winding(&bundle)?;
            let mut csv = Vec::new();
            bundle.write_csv(&mut csv)?;
            let text = format!("{}{}", out.header(), String::from_utf8(csv)?);
            let path = out.path("trajectory.csv");
            fs::write(path, text)?;
            out.text("braid.txt", &format!("{braid}\n"))?;
            out.json(
                "result.json",
                json!({
                    "braid": braid.to_signed(),
                    "strands": braid.strands(),
                    "pure": braid.is_pure(),
                    "writhe": braid.writhe(),
                    "winding": winding,
                    "omega": omega,
                    "power": power,
                }),
            )?;
            Ok((true, format!("braid {braid}")))
        }
        Experiment::Phi { flow, qm, domain, step } => {
            let spec = flow.build(*step)?;
            let sampling = Sampling::new(qm.strands(), cfg.seed).with_domain(domain.clone());
            let e = phi_n(&spec, qm, &sampling, cfg.samples)?;
            out.json("result.json", json!({ "qm": qm.label(), "estimate": to_value(&e)? }))?;
            Ok((true, format!("{} = {:.6} ± {:.6}", qm.label(), e.mean, e.half_width)))
        }
        Experiment::Homogenize { flow, qms, powers, domain, step } => {
            if qms.is_empty() {
                bail!("homogenize needs at least one quasi-morphism");
            }
            if qms.iter().any(|q| q.strands() != qms[0].strands()) {
                bail!("all quasi-morphisms of one run must act on the same number of strands");
            }
            let spec = flow.build(*step)?;
            let sampling = Sampling::new(qms[0].strands(), cfg.seed).with_domain(domain.clone());
            let hs = phi_n_bar_many(&spec, qms, &cfg.schedule(powers)?, &sampling)?;
            let mut rows = Vec::new();
            for (q, h) in qms.iter().zip(&hs) {
                for (p, e) in powers.iter().zip(&h.curve) {
                    let [m, w] = estimate_row(e);
                    rows.push(vec![q.label(), p.to_string(), m, w]);
                }
            }
            out.csv("curve.csv", &["qm", "p", "mean", "half_width"], &rows)?;
            let results: Vec<Value> = qms
                .iter()
                .zip(&hs)
                .map(|(q, h)| json!({ "qm": q.label(), "estimate": h.estimate, "increment": h.increment, "converged": h.converged() }))
                .collect();
            out.json("result.json", Value::Array(results))?;
            let summary = qms
                .iter()
                .zip(&hs)
                .map(|(q, h)| format!("{}: {:.6} ± {:.6}", q.label(), h.estimate.mean, h.estimate.half_width))
                .collect::<Vec<_>>()
                .join("; ");
            Ok((true, summary))
        }
        Experiment::CalabiRatio { flows, powers, tolerance, step } => {
            let specs = flows.iter().map(|f| f.build(*step)).collect::<anyhow::Result<Vec<_>>>()?;
            let r = calabi_ratio(&specs, &cfg.schedule(powers)?, cfg.seed, *tolerance)?;
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|w| {
                    let [m, h] = estimate_row(&w.phi_bar);
                    vec![w.calabi.to_string(), m, h, w.ratio.to_string(), w.ratio_half_width.to_string()]
                })
                .collect();
            out.csv("ratios.csv", &["calabi", "phi_bar", "phi_bar_half_width", "ratio", "ratio_half_width"], &rows)?;
            out.json("result.json", to_value(&r)?)?;
            Ok((r.constant, format!("relative spread {:.4} (tolerance {})", r.spread, r.tolerance)))
        }
        Experiment::Vanishing { fields, patterns, controls, perturbation, powers, step } => {
            let qms = brooks_qms(patterns)?;
            let fields: Vec<_> = fields.iter().map(|f| (f.label.clone(), f.field.clone())).collect();
            let controls = controls
                .iter()
                .map(|c| Ok((c.label.clone(), c.flow.build(*step)?)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let rows = vanishing_report(
                &fields,
                &qms,
                &controls,
                perturbation.as_ref(),
                &cfg.schedule(powers)?,
                &Sampling::new(3, cfg.seed),
                *step,
            )?;
            let mut table = Vec::new();
            let mut passed = true;
            let mut verdicts = Vec::new();
            for r in &rows {
                let [m, h] = estimate_row(&r.estimate);
                let [im, ih] = r.increment.as_ref().map(estimate_row).unwrap_or_default();
                table.push(vec![r.label.clone(), r.qm.clone(), String::new(), r.expect_zero.to_string(), m, h, im, ih, r.zero_within_ci.to_string()]);
                for (d, e) in &r.perturbed {
                    let [m, h] = estimate_row(e);
                    table.push(vec![r.label.clone(), r.qm.clone(), d.to_string(), "false".into(), m, h, String::new(), String::new(), e.covers(0.0, 0.0).to_string()]);
                }
                if r.expect_zero {
                    passed &= r.zero_within_ci;
                    if !r.perturbed.is_empty() {
                        let ok = continuity_verdict(&r.estimate, &r.perturbed);
                        passed &= ok;
                        verdicts.push(json!({ "label": r.label, "qm": r.qm, "continuous": ok }));
                    }
                }
            }
            out.csv(
                "vanishing.csv",
                &["label", "qm", "delta", "expect_zero", "mean", "half_width", "increment", "increment_half_width", "zero_within_ci"],
                &table,
            )?;
            out.json("result.json", json!({ "rows": to_value(&rows)?, "continuity": verdicts }))?;
            let zero_rows = rows.iter().filter(|r| r.expect_zero).count();
            let ok_rows = rows.iter().filter(|r| r.expect_zero && r.zero_within_ci).count();
            Ok((passed, format!("{ok_rows}/{zero_rows} autonomous rows within CI of 0")))
        }
        Experiment::Zk { patterns, d, powers, calibration_samples, tolerance, growth, defects, step } => {
            let names: Vec<&str> = patterns.iter().map(String::as_str).collect();
            let cal = autobraid::estimate::Schedule::new(powers.clone(), calibration_samples.unwrap_or(cfg.samples))?;
            let mut zc = ZkConfig::new(&names, cal, cfg.seed);
            zc.tolerance = *tolerance;
            zc.step = *step;
            zc.defects = defects.clone();
            let setup = zk_setup(&zc)?;
            let schedule = cfg.schedule(powers)?;
            let verify_seed = autobraid::estimate::child_seed(cfg.seed, 1);
            let mut points = Vec::new();
            for v in d {
                points.push(zk_verify(&setup, v, &schedule, verify_seed, *tolerance)?);
            }
            let mut passed = points.iter().all(|p| p.certificate.passed);
            let fit = match growth {
                Some(m) if *m >= 2 => {
                    let k = setup.k();
                    let pts = (1..=*m)
                        .map(|j| {
                            let mut v = vec![0; k];
                            v[0] = j;
                            zk_verify(&setup, &v, &schedule, autobraid::estimate::child_seed(cfg.seed, 2), *tolerance)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let fit = affine_growth(&pts)?;
                    passed &= fit.affine;
                    Some((fit, pts))
                }
                Some(_) => bail!("growth needs at least two multiples"),
                None => None,
            };
            let mut rows = Vec::new();
            for p in points.iter().chain(fit.iter().flat_map(|(_, pts)| pts.iter())) {
                for (i, e) in p.estimates.iter().enumerate() {
                    let [m, h] = estimate_row(e);
                    rows.push(vec![format!("{:?}", p.d), i.to_string(), p.d[i].to_string(), m, h, p.certificate.passed.to_string()]);
                }
            }
            out.csv("zk.csv", &["d", "i", "target", "mean", "half_width", "passed"], &rows)?;
            let certs: Vec<Certificate> = points.iter().map(|p| p.certificate.clone()).collect();
            out.certificates(&certs)?;
            out.json(
                "result.json",
                json!({
                    "words": setup.words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                    "calibration": to_value(&setup.calibration)?,
                    "duals": to_value(&setup.duals)?,
                    "defects": setup.defects,
                    "points": to_value(&points)?,
                    "growth": fit.as_ref().map(|(f, _)| to_value(f)).transpose()?,
                }),
            )?;
            let ok = certs.iter().filter(|c| c.passed).count();
            Ok((passed, format!("{ok}/{} certificates pass", certs.len())))
        }
        Experiment::Independence { layout, patterns, powers, max_word_len, step } => {
            let layout = layout.clone().unwrap_or_else(TwistSystem::standard);
            layout.validate(false)?;
            let pats: Vec<BrooksQm> = patterns.iter().map(|p| Ok(BrooksQm::new(p.parse()?)?)).collect::<anyhow::Result<_>>()?;
            let (words, duals, _) = braid_dual_basis(&pats, *max_word_len)?;
            let qms: Vec<BraidQm> = duals.iter().map(|c| BraidQm::Combination { combination: c.clone() }).collect();
            let schedule = cfg.schedule(powers)?;
            let mut matrix = vec![Vec::new(); qms.len()];
            for w in &words {
                let hs = phi_n_bar_many(&layout.word_flow(w, *step), &qms, &schedule, &Sampling::new(3, cfg.seed))?;
                for (row, h) in matrix.iter_mut().zip(hs) {
                    row.push(h.increment.unwrap_or(h.estimate));
                }
            }
            let inputs = IndependenceInputs {
                patterns: patterns.clone(),
                words: words.iter().map(|w| w.to_string()).collect(),
                matrix,
                areas: layout.effective_areas(400),
                diagonal_values: vec![1.0; qms.len()],
                large_areas: layout.validate(true).is_ok(),
            };
            let cert = independence_matrix(&inputs)?;
            let rows: Vec<Vec<String>> = inputs
                .matrix
                .iter()
                .enumerate()
                .flat_map(|(i, r)| {
                    r.iter().enumerate().map(move |(j, e)| {
                        let [m, h] = estimate_row(e);
                        vec![i.to_string(), j.to_string(), m, h]
                    })
                })
                .collect();
            out.csv("matrix.csv", &["i", "j", "mean", "half_width"], &rows)?;
            out.certificates(std::slice::from_ref(&cert))?;
            out.json("result.json", to_value(&cert)?)?;
            Ok((cert.passed, format!("min singular value {}", cert.content["min_singular_value"])))
        }
        Experiment::RestrictedBound { flow, r, step } => {
            let spec = flow.build(*step)?;
            let c = calabi(&spec)?;
            let cert = restricted_lower_bound(c, CALABI_TOL, *r)?;
            out.certificates(std::slice::from_ref(&cert))?;
            out.json("result.json", to_value(&cert)?)?;
            Ok((cert.passed, format!("bound {}", cert.content["bound"])))
        }
    }
}

/// Loads `path`, applies overrides and runs.
pub fn run_path(
    path: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    threads: usize,
) -> anyhow::Result<RunOutcome> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = samples {
        cfg.samples = n;
    }
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    let outcome = run(&cfg, threads)?;
    let mut so = std::io::stdout().lock();
    writeln!(so, "{} {}: {}", if outcome.passed { "PASS" } else { "FAIL" }, cfg.experiment.kind(), outcome.summary)?;
    writeln!(so, "outputs in {}", outcome.out_dir.display())?;
    Ok(outcome)
}
