//! Library results checked against brute-force or independently derived
//! values.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use multrep_core::changegen::GeneratorMap;
use multrep_core::decompose;
use multrep_core::linalg::{self, c};
use multrep_core::perron::{self, PF_TOL};
use multrep_core::system::MatrixSystem;
use multrep_core::transport;
use multrep_core::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn scalar_system_radius_matches_dense_eigensolve() {
    // Constant h on F_r: ρ = (2r - 1)|h|² from the q-regular count.
    for (rank, h) in [(2, 1.0), (2, 0.5), (3, 0.3)] {
        let al = multrep_core::Alphabet::standard(rank);
        let sys = MatrixSystem::scalar(&al, c(h, 0.0), 1.0);
        let rho = perron::pf_eigenpair(&sys, PF_TOL).unwrap().rho;
        assert!((rho - kron_spectral_radius(&sys)).abs() <= 1e-9);
        assert!((rho - (2 * rank - 1) as f64 * h * h).abs() <= 1e-9);
    }
}

#[test]
fn pf_forms_are_fixed_by_the_transfer() {
    let al = f2();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let dims = random_dims(&al, 3, &mut rng);
        let sys = random_compatible(&al, &dims, &mut rng);
        let pf = perron::pf_eigenpair(&sys, PF_TOL).unwrap();
        let moved = sys.transfer_forms(&pf.forms.forms).unwrap();
        for (m, b) in moved.iter().zip(&pf.forms.forms) {
            assert!(linalg::max_abs_diff(m, &(b * c(pf.rho, 0.0))) <= 1e-8 * linalg::spectral_norm(b).max(1.0));
            assert!(linalg::is_psd(b, 1e-9));
        }
    }
}

#[test]
fn cone_inclusion_matches_enumeration() {
    let gm = example_map();
    let (s, t) = (gm.source(), gm.target());
    for z in t.words_up_to(2).into_iter().filter(|z| !z.is_identity()) {
        for y in s.words_up_to(3).into_iter().filter(|y| !y.is_identity()) {
            assert_eq!(
                gm.cone_included(&y, &z).unwrap(),
                cone_included_oracle(&gm, &y, &z),
                "y = {}, z = {}",
                s.format_word(&y),
                t.format_word(&z)
            );
        }
    }
}

#[test]
fn frontiers_match_the_definition() {
    let mut maps = vec![example_map(), GeneratorMap::identity(&f2())];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while maps.len() < 5 {
        let gm = random_nielsen_map(2, rng.random_range(1..6), &mut rng);
        if gm.stretch_to_source() <= 2 && gm.stretch_to_target() <= 2 {
            maps.push(gm);
        }
    }
    for gm in &maps {
        let t = gm.target();
        for a in t.letters() {
            let z = Word::letter(a);
            let got: BTreeSet<Word> = gm.compute_y(&z).unwrap().words().into_iter().collect();
            assert_eq!(got, y_oracle(gm, &z), "Y({})", t.name(a));
        }
    }
}

#[test]
fn transported_intertwiner_is_isometric_and_equivariant() {
    let gm = example_map();
    let s = gm.source().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..6 {
        let dims = random_dims(&s, 2, &mut rng);
        let sys = Arc::new(random_compatible(&s, &dims, &mut rng));
        let tr = gm.transport_system(&sys).unwrap();
        assert!(tr.system.compatibility_defect() <= 1e-8);
        let f = random_unit_function(&sys, 2, &mut rng);
        let g = tr.intertwine(&f).unwrap();
        assert!((g.norm2().unwrap() - 1.0).abs() <= 1e-9);
        for l in s.letters() {
            let lhs = tr.intertwine(&f.act(&Word::letter(l)).unwrap()).unwrap();
            let rhs = g.act(gm.image(l)).unwrap();
            assert!(lhs.distance(&rhs).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn lambda0_is_maximal() {
    let al = f2();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let dims = random_dims(&al, 3, &mut rng);
        let sys = random_compatible(&al, &dims, &mut rng);
        let pulled: Vec<_> = al
            .letters()
            .map(|l| {
                let m = linalg::random_matrix(&mut rng, sys.dim(l), 1);
                &m * m.adjoint()
            })
            .collect();
        let l0 = decompose::sup_lambda(&sys, &pulled).unwrap();
        assert!(l0 > 0.0);
        let shifted = |lam: f64| al.letters().all(|l| linalg::is_psd(&(sys.form(l) - &pulled[l.index()] * c(lam, 0.0)), 1e-12));
        assert!(shifted(l0 * (1.0 - 1e-4)));
        assert!(!shifted(l0 * (1.0 + 1e-4)));
    }
}

#[test]
fn geodesics_cross_neighbouring_tiles() {
    for fs in [index_two(), index_three()] {
        let al = fs.alphabet();
        let gen = fs.generators();
        for g in gen.words_up_to(3) {
            let tile = |w: &Word| -> BTreeSet<Word> {
                let e = fs.expand(w);
                fs.d().iter().map(|u| al.mul(&e, u)).collect()
            };
            for l in gen.outward_letters(&g) {
                let ga = gen.mul(&g, &Word::letter(l));
                let near = tile(&g);
                for v in tile(&ga) {
                    assert!(al.geodesic(&Word::identity(), &v).iter().any(|p| near.contains(p)));
                }
            }
        }
    }
}

#[test]
fn subgroup_norms_via_truncation_subtrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for fs in [index_two(), index_three()] {
        let al = fs.alphabet().clone();
        let gen = fs.generators();
        let dims = random_dims(gen, 2, &mut rng);
        let sub = Arc::new(random_compatible(gen, &dims, &mut rng));
        for u in fs.d() {
            let z = al.inverse(u);
            let f = random_unit_function(&sub, 1, &mut rng);
            for n in [z.len() + 2, z.len() + 4] {
                let t = match transport::truncation_subtree(&fs, &z, n, f.depth()) {
                    Ok(t) => t,
                    Err(multrep_core::Error::Precondition(_)) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert!(t.is_complete() && t.contains_ball(&Word::identity(), f.depth()));
                let sum = f.norm_via_subtree(&t).unwrap();
                assert!((sum - 1.0).abs() <= 1e-9, "z = {}, N = {n}: {sum}", al.format_word(&z));
            }
        }
    }
}

#[test]
fn induced_block_rules_cover_every_pair() {
    for fs in [index_two(), index_three()] {
        let gen = fs.generators();
        let dims: Vec<usize> = gen.letters().map(|_| 1).collect();
        let sub = Arc::new(MatrixSystem::spherical(gen, 0.2));
        assert_eq!(sub.dims(), &dims[..]);
        let ind = transport::induce_system(&sub, &fs).unwrap();
        let al = fs.alphabet();
        for b in al.letters() {
            for a in al.letters().filter(|&a| a != al.inv(b)) {
                for (v, _) in &ind.p[b.index()] {
                    assert!(ind.block_rule(b, a, v).is_some());
                }
            }
        }
        let total: usize = ind.p.iter().map(|p| p.len()).sum();
        assert_eq!(total, fs.index() * gen.size());
    }
}
