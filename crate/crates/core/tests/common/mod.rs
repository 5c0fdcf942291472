//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use multrep_core::changegen::GeneratorMap;
use multrep_core::linalg::{self, c, Mat, C64};
use multrep_core::multfunc::MultiplicativeFunction;
use multrep_core::perron;
use multrep_core::subgroup::{schreier_subtree, CosetAutomaton, FundamentalSubtree};
use multrep_core::system::MatrixSystem;
use multrep_core::{Alphabet, FiniteSubtree, Letter, Word};
use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn f2() -> Alphabet {
    Alphabet::standard(2)
}

/// `A' = {α, β}` with inverses `Α, Β`.
pub fn greek() -> Alphabet {
    Alphabet::from_pairs(&[("α".into(), "Α".into()), ("β".into(), "Β".into())]).unwrap()
}

/// α ↦ a, β ↦ ab.
pub fn example_map() -> GeneratorMap {
    let (s, t) = (greek(), f2());
    GeneratorMap::from_positive_images(
        &s,
        &t,
        &[(s.letter("α").unwrap(), t.w("a")), (s.letter("β").unwrap(), t.w("ab"))],
    )
    .unwrap()
}

pub fn index_two() -> FundamentalSubtree {
    let al = f2();
    let aut = CosetAutomaton::from_generators(&al, &[al.w("b"), al.w("abA"), al.w("aa")]).unwrap();
    schreier_subtree(&aut).unwrap()
}

/// a acts as the 3-cycle (0 1 2), b swaps 1 and 2.
pub fn index_three() -> FundamentalSubtree {
    let al = f2();
    let table = vec![vec![1, 0, 2, 0], vec![2, 2, 0, 2], vec![0, 1, 1, 1]];
    schreier_subtree(&CosetAutomaton::from_table(&al, table).unwrap()).unwrap()
}

/// Gaussian `H` with the given dimensions, normalized to a compatible system.
pub fn random_compatible<R: Rng>(al: &Alphabet, dims: &[usize], rng: &mut R) -> MatrixSystem {
    let raw = MatrixSystem::with_identity_forms(al, dims.to_vec(), |b, a| {
        if al.inv(a) == b {
            linalg::zeros(dims[b.index()], dims[a.index()])
        } else {
            linalg::random_matrix(rng, dims[b.index()], dims[a.index()])
        }
    })
    .unwrap();
    perron::normalize_to_compatible(&raw).unwrap()
}

pub fn random_dims<R: Rng>(al: &Alphabet, max: usize, rng: &mut R) -> Vec<usize> {
    (0..al.size()).map(|_| rng.random_range(1..=max)).collect()
}

/// Spectral radius of `B ↦ (Σ_b H_ba† B_b H_ba)_a` through the complex
/// Kronecker form `vec(H†BH) = (Hᵀ ⊗ H†) vec(B)` and a complex Schur
/// decomposition.
pub fn kron_spectral_radius(sys: &MatrixSystem) -> f64 {
    let al = sys.alphabet();
    let d2: Vec<usize> = sys.dims().iter().map(|d| d * d).collect();
    let off: Vec<usize> = d2.iter().scan(0, |acc, &x| { let o = *acc; *acc += x; Some(o) }).collect();
    let n: usize = d2.iter().sum();
    let mut big = DMatrix::<C64>::zeros(n, n);
    for a in al.letters() {
        for b in al.letters() {
            if b == al.inv(a) {
                continue;
            }
            let h = sys.h(b, a);
            let k = h.transpose().kronecker(&h.adjoint());
            big.view_mut((off[a.index()], off[b.index()]), k.shape()).copy_from(&k);
        }
    }
    big.clone().schur()
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or_else(|| linalg::eigenvalues(&big).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// A complete subtree: `B(e, r)` with random terminal expansions.
pub fn random_complete_subtree<R: Rng>(al: &Alphabet, r: usize, expansions: usize, rng: &mut R) -> FiniteSubtree {
    let mut t = al.ball(&Word::identity(), r);
    for _ in 0..expansions {
        let terms: Vec<Word> = t.terminal_vertices().into_iter().collect();
        let v = terms.choose(rng).unwrap().clone();
        t.expand_terminal(&v).unwrap();
    }
    t
}

/// A complete subtree based at `x_e`: `{x̄_e, x_e}` plus the outward
/// neighbours of `x_e`, then random expansions away from `x̄_e`.
pub fn random_based_subtree<R: Rng>(al: &Alphabet, x_e: &Word, expansions: usize, rng: &mut R) -> FiniteSubtree {
    let parent = x_e.drop_last().unwrap();
    let mut verts = vec![parent.clone(), x_e.clone()];
    verts.extend(al.neighbours(x_e).into_iter().filter(|n| *n != parent));
    let mut t = FiniteSubtree::new(al, verts).unwrap();
    for _ in 0..expansions {
        let terms: Vec<Word> = t.terminal_vertices().into_iter().filter(|v| *v != parent).collect();
        let v = terms.choose(rng).unwrap().clone();
        t.expand_terminal(&v).unwrap();
    }
    t
}

pub fn form_norm2(sys: &MatrixSystem, l: Letter, v: &linalg::Vector) -> f64 {
    (v.adjoint() * sys.form(l) * v)[(0, 0)].re
}

/// Random function of unit norm.
pub fn random_unit_function<R: Rng>(sys: &Arc<MatrixSystem>, depth: usize, rng: &mut R) -> MultiplicativeFunction {
    let f = MultiplicativeFunction::random(sys.clone(), depth, rng).unwrap();
    let n = f.norm2().unwrap().sqrt();
    f.scale(c(1.0 / n, 0.0))
}

/// Composition of random Nielsen moves on `{α, β}` whose images stay of
/// length at most `max_len`.
pub fn random_nielsen_map<R: Rng>(max_len: usize, moves: usize, rng: &mut R) -> GeneratorMap {
    let (s, t) = (greek(), f2());
    let mut imgs = [t.w("a"), t.w("b")];
    for _ in 0..moves {
        let i = rng.random_range(0..2);
        let j = 1 - i;
        let cand = match rng.random_range(0..5) {
            0 => t.mul(&imgs[i], &imgs[j]),
            1 => t.mul(&imgs[j], &imgs[i]),
            2 => t.mul(&imgs[i], &t.inverse(&imgs[j])),
            3 => t.mul(&t.inverse(&imgs[j]), &imgs[i]),
            _ => t.inverse(&imgs[i]),
        };
        if cand.len() <= max_len {
            imgs[i] = cand;
        }
    }
    GeneratorMap::from_positive_images(
        &s,
        &t,
        &[(s.letter("α").unwrap(), imgs[0].clone()), (s.letter("β").unwrap(), imgs[1].clone())],
    )
    .unwrap()
}

/// Brute-force `C'(y) ⊆ C(z)`. An `A'`-path leaving `C(z)` must pass
/// through `z`, which it can only do from a vertex `w` with
/// `|w|' ≤ ℓ(A,A')·(|z| + ℓ(A',A))`; checking every vertex of `C'(y)` up to
/// that length plus one settles the question.
pub fn cone_included_oracle(gm: &GeneratorMap, y: &Word, z: &Word) -> bool {
    let s = gm.source();
    let r = gm.stretch_to_source() * (z.len() + gm.stretch_to_target()) + 1;
    let mut stack = vec![y.clone()];
    while let Some(u) = stack.pop() {
        if !z.is_prefix_of(&gm.expand(&u)) {
            return false;
        }
        if u.len() < r {
            for l in s.outward_letters(&u) {
                stack.push(s.mul(&u, &Word::letter(l)));
            }
        }
    }
    true
}

/// `Y(z)` by the definition, over all `A'`-words up to the oracle radius.
pub fn y_oracle(gm: &GeneratorMap, z: &Word) -> BTreeSet<Word> {
    let s = gm.source();
    let r = gm.stretch_to_source() * (z.len() + gm.stretch_to_target()) + 1;
    s.words_up_to(r)
        .into_iter()
        .filter(|y| !y.is_identity())
        .filter(|y| cone_included_oracle(gm, y, z))
        .filter(|y| {
            let p = y.drop_last().unwrap();
            p.is_identity() || !cone_included_oracle(gm, &p, z)
        })
        .collect()
}

pub fn max_h_diff(x: &MatrixSystem, y: &MatrixSystem) -> f64 {
    let al = x.alphabet();
    let mut m: f64 = 0.0;
    for b in al.letters() {
        for a in al.letters() {
            m = m.max(linalg::max_abs_diff(x.h(b, a), y.h(b, a)));
        }
    }
    m
}

pub fn unit(n: usize) -> Mat {
    linalg::eye(n)
}
