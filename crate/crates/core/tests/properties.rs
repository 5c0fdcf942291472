mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use multrep_core::linalg::{self, c};
use multrep_core::multfunc::MultiplicativeFunction;
use multrep_core::perron::{self, PF_TOL};
use multrep_core::system::{MatrixSystem, SystemMap};
use multrep_core::transport;
use multrep_core::words::cone_contains;
use multrep_core::Word;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn raw_word(max: usize) -> impl Strategy<Value = Vec<u16>> {
    prop::collection::vec(0u16..4, 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduce_is_idempotent(raw in raw_word(16)) {
        let al = f2();
        let w = al.word_from_indices(&raw).unwrap();
        prop_assert_eq!(al.reduce(w.letters()), w.clone());
        for pair in w.letters().windows(2) {
            prop_assert_ne!(pair[1], al.inv(pair[0]));
        }
    }

    #[test]
    fn multiplication_is_associative(x in raw_word(8), y in raw_word(8), z in raw_word(8)) {
        let al = f2();
        let (x, y, z) = (
            al.word_from_indices(&x).unwrap(),
            al.word_from_indices(&y).unwrap(),
            al.word_from_indices(&z).unwrap(),
        );
        prop_assert_eq!(al.mul(&al.mul(&x, &y), &z), al.mul(&x, &al.mul(&y, &z)));
    }

    #[test]
    fn inverse_cancels(raw in raw_word(12)) {
        let al = f2();
        let x = al.word_from_indices(&raw).unwrap();
        prop_assert!(al.mul(&x, &al.inverse(&x)).is_identity());
        prop_assert!(al.mul(&al.inverse(&x), &x).is_identity());
        prop_assert_eq!(al.inverse(&al.inverse(&x)), x);
    }

    #[test]
    fn word_round_trips_through_text(raw in raw_word(12)) {
        let al = f2();
        let x = al.word_from_indices(&raw).unwrap();
        prop_assert_eq!(al.parse_word(&al.format_word(&x)).unwrap(), x);
    }

    #[test]
    fn distance_is_a_tree_metric(x in raw_word(8), y in raw_word(8), g in raw_word(6)) {
        let al = f2();
        let (x, y, g) = (
            al.word_from_indices(&x).unwrap(),
            al.word_from_indices(&y).unwrap(),
            al.word_from_indices(&g).unwrap(),
        );
        let d = al.distance(&x, &y);
        prop_assert_eq!(d, al.distance(&al.mul(&g, &x), &al.mul(&g, &y)));
        let path = al.geodesic(&x, &y);
        prop_assert_eq!(path.len(), d + 1);
        prop_assert_eq!(path.first(), Some(&x));
        prop_assert_eq!(path.last(), Some(&y));
    }

    /// Left translation by `x` maps `C(z)` into `C(xz)` when `x` and `z`
    /// do not cancel.
    #[test]
    fn cone_translation(x in raw_word(6), z in raw_word(6), t in raw_word(6)) {
        let al = f2();
        let (x, z, t) = (
            al.word_from_indices(&x).unwrap(),
            al.word_from_indices(&z).unwrap(),
            al.word_from_indices(&t).unwrap(),
        );
        prop_assume!(!z.is_identity());
        let xz = al.mul(&x, &z);
        prop_assume!(xz.len() == x.len() + z.len());
        let y = al.mul(&z, &t);
        if cone_contains(&z, &y) {
            prop_assert!(cone_contains(&xz, &al.mul(&x, &y)));
        }
    }
}

#[test]
fn sphere_index_is_a_bijection() {
    let al = f2();
    for n in 0..=5 {
        let sphere = al.sphere(n);
        assert_eq!(sphere.len(), al.sphere_len(n));
        for (i, w) in sphere.iter().enumerate() {
            assert_eq!(w.len(), n);
            assert_eq!(al.sphere_index(w), i);
        }
        let distinct: BTreeSet<&Word> = sphere.iter().collect();
        assert_eq!(distinct.len(), sphere.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Normalization yields a compatible system with ρ = 1.
    #[test]
    fn normalization_gives_compatible_systems(seed in any::<u64>()) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 3, &mut rng);
        let sys = random_compatible(&al, &dims, &mut rng);
        prop_assert!(sys.compatibility_defect() <= 1e-9 * sys.form_scale().max(1.0));
        let rho = perron::pf_eigenpair(&sys, PF_TOL).unwrap().rho;
        prop_assert!((rho - 1.0).abs() <= 1e-8);
    }

    /// The defect is unchanged by unitary conjugation.
    #[test]
    fn defect_is_unitarily_invariant(seed in any::<u64>()) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 3, &mut rng);
        let sys = MatrixSystem::with_identity_forms(&al, dims.clone(), |b, a| {
            if al.inv(a) == b {
                linalg::zeros(dims[b.index()], dims[a.index()])
            } else {
                linalg::random_matrix(&mut rng, dims[b.index()], dims[a.index()])
            }
        })
        .unwrap();
        let u = SystemMap::new(al.letters().map(|l| linalg::random_unitary(&mut rng, sys.dim(l))).collect());
        let conj = sys.conjugate(&u).unwrap();
        prop_assert!((sys.compatibility_defect() - conj.compatibility_defect()).abs() <= 1e-10 * sys.h_scale().max(1.0));
    }

    /// ρ scales quadratically with H.
    #[test]
    fn pf_radius_scales_with_h(seed in any::<u64>(), t in 0.1f64..3.0) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 2, &mut rng);
        let sys = random_compatible(&al, &dims, &mut rng);
        let rho = perron::pf_eigenpair(&sys.scaled(c(t, 0.0)), PF_TOL).unwrap().rho;
        prop_assert!((rho - t * t).abs() <= 1e-8 * (t * t).max(1.0));
    }

    /// `π(x)` is a homomorphism and `π(x)π(x⁻¹)` is the identity.
    #[test]
    fn action_is_a_homomorphism(seed in any::<u64>(), x in raw_word(4), y in raw_word(4)) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 2, &mut rng);
        let sys = Arc::new(random_compatible(&al, &dims, &mut rng));
        let f = random_unit_function(&sys, 2, &mut rng);
        let (x, y) = (al.word_from_indices(&x).unwrap(), al.word_from_indices(&y).unwrap());
        let lhs = f.act(&y).unwrap().act(&x).unwrap();
        let rhs = f.act(&al.mul(&x, &y)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-9);
        let back = f.act(&x).unwrap().act(&al.inverse(&x)).unwrap();
        prop_assert!(back.distance(&f).unwrap() <= 1e-9);
    }

    /// Matrix coefficients satisfy `⟨π(x)f, g⟩ = ⟨f, π(x⁻¹)g⟩`.
    #[test]
    fn action_is_unitary_on_pairs(seed in any::<u64>(), x in raw_word(4)) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 2, &mut rng);
        let sys = Arc::new(random_compatible(&al, &dims, &mut rng));
        let f = random_unit_function(&sys, 2, &mut rng);
        let g = random_unit_function(&sys, 3, &mut rng);
        let x = al.word_from_indices(&x).unwrap();
        let lhs = MultiplicativeFunction::matrix_coefficient(&x, &f, &g).unwrap();
        let rhs = f.inner_product(&g.act(&al.inverse(&x)).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
    }

    /// Refinement does not change the function.
    #[test]
    fn refinement_preserves_values(seed in any::<u64>(), raw in raw_word(6)) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = random_dims(&al, 2, &mut rng);
        let sys = Arc::new(random_compatible(&al, &dims, &mut rng));
        let f = random_unit_function(&sys, 1, &mut rng);
        let g = f.refine(3).unwrap();
        let y = al.word_from_indices(&raw).unwrap();
        prop_assume!(y.len() >= 3);
        let d = (f.evaluate(&y).unwrap() - g.evaluate(&y).unwrap()).norm();
        prop_assert!(d <= 1e-12);
        prop_assert!((f.norm2().unwrap() - g.norm2().unwrap()).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Frontier partition and translation identities for random Nielsen maps.
    #[test]
    fn frontiers_partition_cones(seed in any::<u64>(), moves in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gm = random_nielsen_map(3, moves, &mut rng);
        let (s, t) = (gm.source(), gm.target());
        for a in t.letters() {
            let za = Word::letter(a);
            let ya: BTreeSet<Word> = gm.compute_y(&za).unwrap().words().into_iter().collect();
            // Every A'-word of the sampled ball whose image lands deep in C(a)
            // lies below exactly one frontier element.
            for y in s.words_up_to(4) {
                let img = gm.expand(&y);
                if img.len() > gm.stretch_to_target() * 2 + 1 && za.is_prefix_of(&img) && gm.cone_included(&y, &za).unwrap() {
                    let hits = ya.iter().filter(|w| w.is_prefix_of(&y) || y.is_prefix_of(w)).count();
                    prop_assert!(hits >= 1);
                }
            }
            for b in t.letters().filter(|&b| b != t.inv(a)) {
                let zb = Word::letter(b);
                let translated: BTreeSet<Word> = gm
                    .compute_y(&zb)
                    .unwrap()
                    .words()
                    .iter()
                    .map(|w| s.mul(&gm.contract(&za), w))
                    .collect();
                let direct: BTreeSet<Word> = gm.compute_y(&t.mul(&za, &zb)).unwrap().words().into_iter().collect();
                prop_assert_eq!(translated, direct);
            }
        }
    }

    /// Restriction preserves norms and intertwines the subgroup action.
    #[test]
    fn restriction_is_isometric(seed in any::<u64>()) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = if seed % 2 == 0 { index_two() } else { index_three() };
        let dims = random_dims(&al, 2, &mut rng);
        let sys = Arc::new(random_compatible(&al, &dims, &mut rng));
        let r = transport::restrict_system(&sys, &fs).unwrap();
        let f = random_unit_function(&sys, 2, &mut rng);
        let g = r.intertwine(&f).unwrap();
        prop_assert!((g.norm2().unwrap() - 1.0).abs() <= 1e-9);
        for l in fs.generators().letters() {
            let lhs = r.intertwine(&f.act(fs.generator_word(l)).unwrap()).unwrap();
            let rhs = g.act(&Word::letter(l)).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-9);
        }
    }

    /// Induction: the intertwiner maps the family norm onto the induced norm
    /// and the translated family onto the translated function.
    #[test]
    fn induction_is_isometric_and_equivariant(seed in any::<u64>(), raw in raw_word(3)) {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = if seed % 2 == 0 { index_two() } else { index_three() };
        let gen = fs.generators();
        let dims = random_dims(gen, 2, &mut rng);
        let sub = Arc::new(random_compatible(gen, &dims, &mut rng));
        let ind = transport::induce_system(&sub, &fs).unwrap();
        let family: Vec<MultiplicativeFunction> =
            fs.d().iter().map(|_| random_unit_function(&sub, 1, &mut rng)).collect();
        let f = ind.intertwine(&family).unwrap();
        prop_assert!((f.norm2().unwrap() - ind.family_norm2(&family).unwrap()).abs() <= 1e-9);
        let g0 = al.word_from_indices(&raw).unwrap();
        let moved = ind.intertwine(&ind.translate_family(&family, &g0).unwrap()).unwrap();
        let acted = f.act(&g0).unwrap();
        prop_assert!(moved.distance(&acted).unwrap() <= 1e-9);
    }
}
