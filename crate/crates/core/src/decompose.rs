//! Invariant subsystems and the decomposition of a system with inner
//! products into irreducible compatible pieces.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{internal, Error, Result};
use crate::linalg::{self, c, Mat};
use crate::perron::{self, classify_rho, RhoClass};
use crate::system::{MatrixSystem, Subsystem, SystemMap, INVARIANCE_TOL};
use crate::words::Letter;

pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Relative threshold below which a propagated direction is treated as
/// roundoff during closures.
const CLOSURE_TOL: f64 = 1e-8;
/// Residual allowed when checking that the null directions of the forms are
/// invariant, relative to the largest transfer map.
const STRIP_TOL: f64 = 1e-6;
/// Compatibility defect accepted on input, relative to the forms.
const INPUT_DEFECT_TOL: f64 = 1e-8;

/// Knobs for the randomized parts of the decomposition.
#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub trials: usize,
    pub seed: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }
}

/// Removes the common null directions of the forms. Returns the quotient
/// (with strictly positive induced forms) and the removed subsystem.
pub fn strip_null_directions(sys: &MatrixSystem) -> Result<(MatrixSystem, Subsystem)> {
    let scale = sys.form_scale();
    let null: Vec<Mat> = sys
        .forms()
        .iter()
        .map(|b| linalg::null_space_with(b, linalg::RANK_TOL * scale))
        .collect();
    let w = Subsystem::from_spans(sys, null)?;
    let resid = sys.invariance_residual(&w)?;
    if resid > STRIP_TOL {
        return Err(internal(format!(
            "null directions of the forms are not invariant (residual {resid:e}); \
             the input is not compatible"
        )));
    }
    let (q, _) = quotient_loose(sys, &w)?;
    Ok((q, w))
}

/// Quotient that skips the strict invariance check (used after the caller
/// verified invariance with its own tolerance).
fn quotient_loose(sys: &MatrixSystem, w: &Subsystem) -> Result<(MatrixSystem, Vec<Mat>)> {
    let comp = w.orthogonal_complement();
    let q = sys.restrict_to(&comp)?;
    Ok((q, comp.bases().to_vec()))
}

/// Adds the directions of `cands` not already in the span of `q`.
fn extend_basis(q: &Mat, cands: &Mat, thr: f64) -> Option<Mat> {
    if cands.ncols() == 0 || q.nrows() == 0 {
        return None;
    }
    let mut r = cands - q * (q.adjoint() * cands);
    r -= q * (q.adjoint() * &r);
    let new = linalg::column_space_with(&r, thr);
    if new.ncols() == 0 {
        return None;
    }
    let mut new = &new - q * (q.adjoint() * &new);
    for j in 0..new.ncols() {
        let n = new.column(j).norm();
        new.column_mut(j).scale_mut(1.0 / n);
    }
    let mut out = linalg::zeros(q.nrows(), q.ncols() + new.ncols());
    out.view_mut((0, 0), q.shape()).copy_from(q);
    out.view_mut((0, q.ncols()), new.shape()).copy_from(&new);
    // Reorthonormalize to keep the basis clean.
    let cs = linalg::column_space_with(&out, 0.5);
    if cs.ncols() <= q.ncols() {
        return None;
    }
    Some(cs)
}

/// Smallest invariant subsystem containing the seed vectors (columns of
/// `seeds[a]` lie in `V_a`).
pub fn closure_subsystem(sys: &MatrixSystem, seeds: &[Mat]) -> Result<Subsystem> {
    let al = sys.alphabet().clone();
    if seeds.len() != al.size() {
        return Err(crate::error::input("closure needs one seed matrix per letter"));
    }
    let hs = sys.h_scale();
    let mut basis: Vec<Mat> = Vec::with_capacity(al.size());
    for a in al.letters() {
        let s = &seeds[a.index()];
        if s.nrows() != sys.dim(a) {
            return Err(crate::error::input("seed has the wrong length"));
        }
        let sn = linalg::spectral_norm(s);
        basis.push(linalg::column_space_with(s, CLOSURE_TOL * sn));
    }
    let mut dirty: Vec<bool> = basis.iter().map(|b| b.ncols() > 0).collect();
    let mut fresh: Vec<Mat> = basis.clone();
    while let Some(a) = dirty.iter().position(|&d| d) {
        dirty[a] = false;
        let la = Letter(a as u16);
        let src = std::mem::replace(&mut fresh[a], linalg::zeros(sys.dim(la), 0));
        if src.ncols() == 0 {
            continue;
        }
        for b in al.letters() {
            if al.inv(la) == b || sys.dim(b) == 0 {
                continue;
            }
            let img = sys.h(b, la) * &src;
            if let Some(ext) = extend_basis(&basis[b.index()], &img, CLOSURE_TOL * hs) {
                let old = basis[b.index()].ncols();
                let added = ext.columns(old, ext.ncols() - old).into_owned();
                basis[b.index()] = ext;
                let prev = std::mem::replace(&mut fresh[b.index()], linalg::zeros(0, 0));
                fresh[b.index()] = if prev.ncols() == 0 {
                    added
                } else {
                    let mut m = linalg::zeros(prev.nrows(), prev.ncols() + added.ncols());
                    m.view_mut((0, 0), prev.shape()).copy_from(&prev);
                    m.view_mut((0, prev.ncols()), added.shape()).copy_from(&added);
                    m
                };
                dirty[b.index()] = true;
            }
        }
    }
    Ok(Subsystem::from_orthonormal(basis))
}

/// The dual system: maps `H_ba†` from `V_b` to `V_a`, identity forms.
pub fn dual_system(sys: &MatrixSystem) -> MatrixSystem {
    MatrixSystem::with_identity_forms(sys.alphabet(), sys.dims().to_vec(), |b, a| {
        sys.h(a, b).adjoint()
    })
    .expect("dual of a valid system is valid")
}

fn is_proper(w: &Subsystem, sys: &MatrixSystem) -> bool {
    !w.is_zero() && !w.is_full(sys)
}

fn accept(sys: &MatrixSystem, w: Subsystem) -> Option<Subsystem> {
    if is_proper(&w, sys) && sys.invariance_residual(&w).ok()? <= INVARIANCE_TOL {
        Some(w)
    } else {
        None
    }
}

/// Offsets of the letter blocks inside `V = ⊕ V_a`.
fn offsets(sys: &MatrixSystem) -> Vec<usize> {
    let mut off = Vec::with_capacity(sys.dims().len() + 1);
    let mut acc = 0;
    off.push(0);
    for &d in sys.dims() {
        acc += d;
        off.push(acc);
    }
    off
}

fn split(sys: &MatrixSystem, v: &linalg::Vector) -> Vec<Mat> {
    let off = offsets(sys);
    sys.alphabet()
        .letters()
        .map(|a| {
            let (s, e) = (off[a.index()], off[a.index() + 1]);
            Mat::from_column_slice(e - s, 1, v.rows(s, e - s).as_slice())
        })
        .collect()
}

/// A random element of the path algebra acting on `V = ⊕ V_a`: a random
/// combination of the block idempotents and of products of `H` along
/// random reduced walks of length up to 3.
fn random_algebra_element<R: Rng>(sys: &MatrixSystem, rng: &mut R) -> Mat {
    let al = sys.alphabet();
    let off = offsets(sys);
    let n = sys.total_dim();
    let mut theta = linalg::zeros(n, n);
    let live: Vec<Letter> = al.letters().filter(|&a| sys.dim(a) > 0).collect();
    for &a in &live {
        let d = sys.dim(a);
        let coef = linalg::random_complex(rng);
        let mut blk = theta.view_mut((off[a.index()], off[a.index()]), (d, d));
        for i in 0..d {
            blk[(i, i)] += coef;
        }
    }
    let walks = 3 * live.len() + 4;
    for _ in 0..walks {
        let start = *live.choose(rng).expect("system is nonzero");
        let len = rng.random_range(1..=3);
        let mut prod = linalg::eye(sys.dim(start));
        let mut cur = start;
        for _ in 0..len {
            let options: Vec<Letter> = al
                .letters()
                .filter(|&b| b != al.inv(cur) && sys.dim(b) > 0)
                .collect();
            let Some(&next) = options.choose(rng) else { break };
            prod = sys.h(next, cur) * prod;
            cur = next;
        }
        let coef = linalg::random_complex(rng);
        let (r0, c0) = (off[cur.index()], off[start.index()]);
        let mut blk = theta.view_mut((r0, c0), prod.shape());
        blk += prod * coef;
    }
    theta
}

/// Searches for a proper nonzero invariant subsystem. `None` means the
/// system was certified irreducible (or no witness turned up within the
/// trial budget).
pub fn find_proper_invariant(
    sys: &MatrixSystem,
    max_trials: usize,
    seed: u64,
) -> Result<Option<Subsystem>> {
    let n = sys.total_dim();
    if n == 0 {
        return Err(Error::Precondition("the system is zero".into()));
    }
    if n == 1 {
        return Ok(None);
    }
    let al = sys.alphabet().clone();
    let dual = dual_system(sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let live: Vec<Letter> = al.letters().filter(|&a| sys.dim(a) > 0).collect();
    let seed_at = |a: Letter, v: Mat| -> Vec<Mat> {
        al.letters()
            .map(|b| if b == a { v.clone() } else { linalg::zeros(sys.dim(b), 0) })
            .collect()
    };

    for _ in 0..max_trials.max(1) {
        // Closure of a random vector, in the system and in its dual.
        let a = *live.choose(&mut rng).expect("system is nonzero");
        let v = linalg::random_matrix(&mut rng, sys.dim(a), 1);
        if let Some(w) = accept(sys, closure_subsystem(sys, &seed_at(a, v.clone()))?) {
            return Ok(Some(w));
        }
        let wd = closure_subsystem(&dual, &seed_at(a, v))?;
        if is_proper(&wd, &dual) {
            if let Some(w) = accept(sys, wd.orthogonal_complement()) {
                return Ok(Some(w));
            }
        }

        // Kernels of a random algebra element, with the dual test deciding
        // irreducibility when the kernel is a line.
        let theta = random_algebra_element(sys, &mut rng);
        let scale = linalg::spectral_norm(&theta).max(f64::MIN_POSITIVE);
        let mut certified = false;
        for lambda in linalg::eigenvalues(&theta) {
            let shifted = &theta - linalg::eye(n) * lambda;
            let ker = linalg::null_space_with(&shifted, 1e-9 * scale);
            if ker.ncols() == 0 {
                continue;
            }
            let v = ker.column(0).into_owned();
            let w = closure_subsystem(sys, &split(sys, &v))?;
            if let Some(w) = accept(sys, w.clone()) {
                return Ok(Some(w));
            }
            let left = linalg::null_space_with(&shifted.adjoint(), 1e-9 * scale);
            if left.ncols() == 0 {
                continue;
            }
            let u = left.column(0).into_owned();
            let wd = closure_subsystem(&dual, &split(sys, &u))?;
            if is_proper(&wd, &dual) {
                if let Some(w) = accept(sys, wd.orthogonal_complement()) {
                    return Ok(Some(w));
                }
            }
            if ker.ncols() == 1 && left.ncols() == 1 && w.is_full(sys) && wd.is_full(&dual) {
                certified = true;
                break;
            }
        }
        if certified {
            return Ok(None);
        }
    }
    Ok(None)
}

/// A maximal proper invariant subsystem: the annihilator of a minimal
/// invariant subsystem of the dual. The quotient by it is irreducible.
pub fn maximal_invariant(sys: &MatrixSystem, trials: usize, seed: u64) -> Result<Subsystem> {
    let dual = dual_system(sys);
    let mut current = Subsystem::full(&dual);
    let mut restricted = dual.clone();
    let mut round = 0u64;
    loop {
        if restricted.total_dim() <= 1 {
            break;
        }
        match find_proper_invariant(&restricted, trials, seed.wrapping_add(round))? {
            Some(u) => {
                current = u.pushed_forward(current.bases());
                restricted = dual.restrict_to(&current)?;
                round += 1;
            }
            None => break,
        }
    }
    if current.is_full(&dual) {
        return Err(Error::Precondition("the system is irreducible".into()));
    }
    let w = current.orthogonal_complement();
    let resid = sys.invariance_residual(&w)?;
    if resid > INVARIANCE_TOL {
        return Err(internal(format!(
            "annihilator is not invariant (residual {resid:e})"
        )));
    }
    Ok(w)
}

/// One irreducible piece of a decomposition.
#[derive(Clone, Debug)]
pub struct Component {
    pub system: MatrixSystem,
    /// `J_a : component V_a → input V_a`, isometric in the Euclidean sense.
    pub embedding: SystemMap,
    /// `λ₀` of the split that produced this component; `None` when the piece
    /// was irreducible on arrival.
    pub lambda0: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub components: Vec<Component>,
    /// True when some quotient had spectral radius below 1 and was dropped.
    pub pruned: bool,
    /// Null directions of the input forms removed before splitting.
    pub stripped: Subsystem,
}

impl Decomposition {
    pub fn dims(&self) -> Vec<Vec<usize>> {
        self.components
            .iter()
            .map(|c| c.system.dims().to_vec())
            .collect()
    }
}

/// Splits a compatible system into irreducible compatible components.
pub fn decompose(sys: &MatrixSystem, opts: DecomposeOptions) -> Result<Decomposition> {
    let defect = sys.compatibility_defect();
    if defect > INPUT_DEFECT_TOL * sys.form_scale().max(1.0) {
        return Err(Error::Precondition(format!(
            "input is not compatible (defect {defect:e})"
        )));
    }
    let (stripped_sys, null) = strip_null_directions(sys)?;
    let emb: Vec<Mat> = null.orthogonal_complement().bases().to_vec();
    let mut out = Decomposition {
        components: Vec::new(),
        pruned: false,
        stripped: null,
    };
    let bound = sys.total_dim();
    split_recursive(&stripped_sys, emb, opts, 0, &mut out)?;
    let used: usize = out.components.iter().map(|c| c.system.total_dim()).sum();
    if used > bound {
        return Err(internal("decomposition exceeds the input dimension"));
    }
    Ok(out)
}

fn split_recursive(
    s: &MatrixSystem,
    emb: Vec<Mat>,
    opts: DecomposeOptions,
    depth: u64,
    out: &mut Decomposition,
) -> Result<()> {
    if s.total_dim() == 0 {
        return Ok(());
    }
    let seed = opts.seed.wrapping_add(depth.wrapping_mul(0x9e37_79b9));
    if find_proper_invariant(s, opts.trials, seed)?.is_none() {
        out.components.push(Component {
            system: s.clone(),
            embedding: SystemMap::new(emb),
            lambda0: None,
        });
        return Ok(());
    }
    let w = maximal_invariant(s, opts.trials, seed)?;
    let (q, comp) = s.quotient(&w)?;
    let pf = perron::pf_eigenpair(&q, perron::PF_TOL)?;
    let w_emb: Vec<Mat> = emb.iter().zip(w.bases()).map(|(e, q)| e * q).collect();
    match classify_rho(pf.rho) {
        RhoClass::Below => {
            out.pruned = true;
            split_recursive(&s.restrict_to(&w)?, w_emb, opts, depth + 1, out)
        }
        RhoClass::Above => Err(internal(format!(
            "quotient by a maximal subsystem has spectral radius {} > 1",
            pf.rho
        ))),
        RhoClass::One => {
            let al = s.alphabet().clone();
            let pulled: Vec<Mat> = al
                .letters()
                .map(|a| {
                    let ca = &comp[a.index()];
                    linalg::hermitize(&(ca * &pf.forms.forms[a.index()] * ca.adjoint()))
                })
                .collect();
            let lambda0 = sup_lambda(s, &pulled)?;
            let mut w0 = Vec::with_capacity(al.size());
            let scale = s.form_scale();
            for a in al.letters() {
                let b0 = s.form(a) - &pulled[a.index()] * c(lambda0, 0.0);
                let k = comp[a.index()].ncols();
                let (vals, vecs) = linalg::hermitian_eigen(&b0);
                if k > 0 && vals[k - 1].abs() > 1e-6 * scale {
                    return Err(internal(format!(
                        "B − λ₀B̃ has only {} null directions at {}, expected {k}",
                        vals.iter().filter(|v| v.abs() <= 1e-6 * scale).count(),
                        al.name(a)
                    )));
                }
                w0.push(vecs.columns(0, k).into_owned());
            }
            let w0 = Subsystem::from_orthonormal(w0);
            let resid = s.invariance_residual(&w0)?;
            if resid > 1e-6 {
                return Err(internal(format!(
                    "null space of B − λ₀B̃ is not invariant (residual {resid:e})"
                )));
            }
            let piece = s.restrict_to(&w0)?;
            let forms: Vec<Mat> = al
                .letters()
                .map(|a| {
                    let q0 = w0.basis(a);
                    linalg::hermitize(&(q0.adjoint() * &pulled[a.index()] * q0 * c(lambda0, 0.0)))
                })
                .collect();
            let piece = piece.with_forms(forms)?;
            let piece_emb: Vec<Mat> = emb.iter().zip(w0.bases()).map(|(e, q)| e * q).collect();
            out.components.push(Component {
                system: piece,
                embedding: SystemMap::new(piece_emb),
                lambda0: Some(lambda0),
            });
            split_recursive(&s.restrict_to(&w)?, w_emb, opts, depth + 1, out)
        }
    }
}

/// `sup{λ : B_a − λ B̃_a ≥ 0 for all a}` for `B > 0`, via the largest
/// eigenvalue of `L⁻¹ B̃ L⁻†` with `B = LL†`.
pub fn sup_lambda(s: &MatrixSystem, pulled: &[Mat]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for a in s.alphabet().letters() {
        if s.dim(a) == 0 {
            continue;
        }
        let chol = s
            .form(a)
            .clone()
            .cholesky()
            .ok_or_else(|| internal("form is not positive definite during splitting"))?;
        let l = chol.l();
        let linv = l
            .try_inverse()
            .ok_or_else(|| internal("singular Cholesky factor"))?;
        let m = &linv * &pulled[a.index()] * linv.adjoint();
        if let Some(&mu) = linalg::hermitian_eigenvalues(&m).last() {
            if mu > 0.0 {
                best = best.min(1.0 / mu);
            }
        }
    }
    if !best.is_finite() {
        return Err(internal("pulled-back form vanishes"));
    }
    Ok(best)
}
