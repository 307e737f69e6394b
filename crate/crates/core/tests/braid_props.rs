use autobraid::braid::sl2::{p3_to_f2, p3_to_f2_by_descent, sl2_matrix};
use autobraid::braid::{eta, BraidWord};
use autobraid::{BrooksQm, FreeLetter, FreeWord};
use proptest::prelude::*;

fn braid_letters(max: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..max)
}

/// Closes a random word up to a pure braid by appending the letters that
/// undo its permutation.
fn pure_word(max: usize) -> impl Strategy<Value = BraidWord> {
    braid_letters(max).prop_map(|s| {
        let suffixes: [&[i32]; 6] = [&[], &[1], &[2], &[1, 2], &[2, 1], &[1, 2, 1]];
        suffixes
            .iter()
            .map(|fix| BraidWord::from_signed(3, &[&s[..], fix].concat()).unwrap())
            .find(|w| w.is_pure())
            .unwrap()
    })
}

fn free_word(max: usize) -> impl Strategy<Value = FreeWord> {
    prop::collection::vec(prop::sample::select(FreeLetter::ALL.to_vec()), 0..max).prop_map(FreeWord::from_letters)
}

fn patterns() -> Vec<BrooksQm> {
    ["xy", "xY", "xxy", "xxY", "xyXY"].iter().map(|p| BrooksQm::new(p.parse().unwrap()).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn free_reduce_idempotent_and_invariant(s in braid_letters(40)) {
        let w = BraidWord::from_signed(3, &s).unwrap();
        let r = w.free_reduce();
        prop_assert_eq!(r.free_reduce(), r.clone());
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.permutation(), w.permutation());
        prop_assert_eq!(r.writhe(), w.writhe());
        prop_assert_eq!(sl2_matrix(&r).unwrap(), sl2_matrix(&w).unwrap());
    }

    #[test]
    fn projection_round_trip(w in pure_word(40)) {
        let g = p3_to_f2(&w).unwrap();
        prop_assert!(g.matrix().unwrap().eq_up_to_sign(&sl2_matrix(&w).unwrap()));
        prop_assert_eq!(p3_to_f2_by_descent(&w).unwrap(), g);
    }

    #[test]
    fn projection_is_a_homomorphism(a in pure_word(30), b in pure_word(30)) {
        let ab = a.concat(&b).unwrap();
        prop_assert_eq!(p3_to_f2(&ab).unwrap(), p3_to_f2(&a).unwrap().concat(&p3_to_f2(&b).unwrap()));
    }

    #[test]
    fn hom_inverse_and_conjugation(g in free_word(30), h in free_word(30)) {
        for q in patterns() {
            prop_assert_eq!(q.hom(&g.inverse()), -q.hom(&g));
            prop_assert_eq!(q.hom(&h.concat(&g).concat(&h.inverse())), q.hom(&g));
        }
    }

    #[test]
    fn hom_is_homogeneous(g in free_word(20), k in -5i64..=5) {
        for q in patterns() {
            prop_assert_eq!(q.hom(&g.pow(k)), k * q.hom(&g));
        }
    }

    #[test]
    fn admissible_patterns_vanish_on_eta_products(a in -6i64..=6, b in -6i64..=6) {
        let w = eta(2, 3).unwrap().pow(a).concat(&eta(3, 3).unwrap().pow(b)).unwrap();
        for q in patterns().into_iter().filter(|q| q.is_admissible()) {
            prop_assert_eq!(q.on_braid(&w).unwrap(), 0);
        }
    }

    #[test]
    fn symmetrized_invariant_under_braid_conjugation(w in pure_word(20), c in braid_letters(8)) {
        let c = BraidWord::from_signed(3, &c).unwrap();
        let conj = w.conjugate_by(&c).unwrap();
        for q in patterns().into_iter().filter(|q| q.is_admissible()) {
            prop_assert_eq!(q.on_braid(&conj).unwrap(), q.on_braid(&w).unwrap());
        }
    }
}

#[test]
fn defect_plateaus_with_length() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let q = BrooksQm::new("xy".parse().unwrap()).unwrap();
    let mut maxima = Vec::new();
    for len in [25usize, 50, 100, 200] {
        let mut worst = 0;
        for _ in 0..2000 {
            let mut draw = || {
                FreeWord::from_letters((0..rng.gen_range(0..=len)).map(|_| FreeLetter::ALL[rng.gen_range(0..4)]))
            };
            let (g, h) = (draw(), draw());
            worst = worst.max((q.hom(&g.concat(&h)) - q.hom(&g) - q.hom(&h)).abs());
        }
        maxima.push(worst);
    }
    println!("Brooks(xy) defect maxima by length: {maxima:?}");
    assert!(maxima.iter().all(|&m| m <= 3), "{maxima:?}");
    assert_eq!(maxima[2], maxima[3]);
}
