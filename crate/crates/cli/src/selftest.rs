//! Exact-algebra checks runnable on a fresh install in well under a minute.

use autobraid::braid::sl2::{p3_to_f2, p3_to_f2_by_descent, sl2_matrix};
use autobraid::braid::{eta, BraidWord};
use autobraid::estimate::sample_rng;
use autobraid::toolkit::{braid_dual_basis, random_free_word};
use autobraid::{BrooksQm, IntMatrix2, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn pure_word(rng: &mut ChaCha8Rng, max: usize) -> Result<BraidWord> {
    let len = rng.gen_range(0..=max);
    let s: Vec<i32> = (0..len).map(|_| [1, -1, 2, -2][rng.gen_range(0..4)]).collect();
    for fix in [&[][..], &[1], &[2], &[1, 2], &[2, 1], &[1, 2, 1]] {
        let w = BraidWord::from_signed(3, &[&s[..], fix].concat())?;
        if w.is_pure() {
            return Ok(w);
        }
    }
    unreachable!("one suffix closes every permutation of three strands")
}

fn brooks(p: &str) -> Result<BrooksQm> {
    BrooksQm::new(p.parse()?)
}

/// `η₂,₃·η₃,₃` against the Garside square `(σ₁σ₂)³` for the given `η`.
pub fn delta_identity(eta: impl Fn(usize, usize) -> Result<BraidWord>) -> Result<(bool, String)> {
    let delta = eta(2, 3)?.concat(&eta(3, 3)?)?;
    let garside = BraidWord::from_signed(3, &[1, 2, 1, 2, 1, 2])?;
    let minus = IntMatrix2::new(-1, 0, 0, -1);
    let (a, b) = (sl2_matrix(&delta)?, sl2_matrix(&garside)?);
    let ok = a == minus && b == minus && delta.writhe() == garside.writhe();
    Ok((ok, format!("{a} vs {b}, writhe {} vs {}", delta.writhe(), garside.writhe())))
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("delta identity", || delta_identity(eta)),
        check("projection round-trip", || {
            let mut rng = sample_rng(1, 0);
            let mut bad = 0;
            for _ in 0..500 {
                let w = pure_word(&mut rng, 40)?;
                let g = p3_to_f2(&w)?;
                if !g.matrix()?.eq_up_to_sign(&sl2_matrix(&w)?) || p3_to_f2_by_descent(&w)? != g {
                    bad += 1;
                }
            }
            Ok((bad == 0, format!("{bad}/500 mismatches")))
        }),
        check("projection is a homomorphism", || {
            let mut rng = sample_rng(2, 0);
            let mut bad = 0;
            for _ in 0..200 {
                let (a, b) = (pure_word(&mut rng, 30)?, pure_word(&mut rng, 30)?);
                if p3_to_f2(&a.concat(&b)?)? != p3_to_f2(&a)?.concat(&p3_to_f2(&b)?) {
                    bad += 1;
                }
            }
            Ok((bad == 0, format!("{bad}/200 mismatches")))
        }),
        check("Brooks homogenization oracle", || {
            let mut rng = sample_rng(3, 0);
            let mut worst: f64 = 0.0;
            for p in ["xy", "xY", "xxy"] {
                let q = brooks(p)?;
                for _ in 0..300 {
                    let len = rng.gen_range(0..=30);
                    let g = random_free_word(&mut rng, len);
                    worst = worst.max((q.count(&g.pow(64)) as f64 / 64.0 - q.hom(&g) as f64).abs());
                }
            }
            Ok((worst <= 0.125, format!("max deviation {worst:.4} (limit 0.125)")))
        }),
        check("homogeneity and inversion", || {
            let mut rng = sample_rng(4, 0);
            let q = brooks("xxY")?;
            let mut bad = 0;
            for _ in 0..300 {
                let len = rng.gen_range(0..=20);
                let g = random_free_word(&mut rng, len);
                let k = rng.gen_range(1..6);
                if q.hom(&g.pow(k)) != k * q.hom(&g) || q.hom(&g.inverse()) != -q.hom(&g) {
                    bad += 1;
                }
            }
            Ok((bad == 0, format!("{bad}/300 violations")))
        }),
        check("conjugation invariance", || {
            let mut rng = sample_rng(5, 0);
            let q = brooks("xxy")?;
            let mut bad = 0;
            for _ in 0..300 {
                let (lg, lh) = (rng.gen_range(0..=20), rng.gen_range(0..=10));
                let (g, h) = (random_free_word(&mut rng, lg), random_free_word(&mut rng, lh));
                if q.symmetrized(&h.concat(&g).concat(&h.inverse())) != q.symmetrized(&g) {
                    bad += 1;
                }
            }
            Ok((bad == 0, format!("{bad}/300 violations")))
        }),
        check("admissibility", || {
            let ok = brooks("xxY")?.is_admissible() && brooks("xxy")?.is_admissible() && !brooks("xy")?.is_admissible();
            Ok((ok, "xxY, xxy admissible; xy not".into()))
        }),
        check("dual basis", || {
            let (words, duals, basis) = braid_dual_basis(&[brooks("xxY")?, brooks("xxy")?], 6)?;
            let mut worst: f64 = 0.0;
            for (i, c) in duals.iter().enumerate() {
                for (j, w) in words.iter().enumerate() {
                    worst = worst.max((c.on_free(w) - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
            let names: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            Ok((worst < 1e-9 && basis.residual < 1e-9, format!("words {names:?}, max |ψᵢ(βⱼ) − δᵢⱼ| = {worst:.1e}")))
        }),
    ]
}
