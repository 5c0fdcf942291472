//! The positive map `𝓛` on tuples of Hermitian forms and its
//! Perron-Frobenius eigenpair.
//!
//! `(𝓛𝓑)_a = Σ_b H_ba† B_b H_ba` maps the cone of PSD tuples into itself.
//! Tuples are vectorized over a real basis (diagonal entries, then real and
//! imaginary parts of the strict upper triangle, letter by letter) and `𝓛`
//! is assembled as a dense real matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{input, Error, Result};
use crate::linalg::{self, c, Mat};
use crate::system::MatrixSystem;

/// Half-width of the band in which a spectral radius counts as equal to 1.
pub const RHO_BAND: f64 = 1e-8;
/// Default relative tolerance for the eigen-equation residual.
pub const PF_TOL: f64 = 1e-9;

/// Position of a spectral radius relative to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoClass {
    Below,
    One,
    Above,
}

pub fn classify_rho(rho: f64) -> RhoClass {
    if (rho - 1.0).abs() <= RHO_BAND {
        RhoClass::One
    } else if rho < 1.0 {
        RhoClass::Below
    } else {
        RhoClass::Above
    }
}

/// One Hermitian form per letter.
#[derive(Clone, Debug, PartialEq)]
pub struct FormTuple {
    pub forms: Vec<Mat>,
}

impl FormTuple {
    pub fn new(forms: Vec<Mat>) -> Self {
        FormTuple { forms }
    }

    pub fn identity(sys: &MatrixSystem) -> Self {
        FormTuple {
            forms: sys.dims().iter().map(|&d| linalg::eye(d)).collect(),
        }
    }

    pub fn max_trace(&self) -> f64 {
        self.forms
            .iter()
            .map(|f| f.trace().re)
            .fold(0.0, f64::max)
    }

    pub fn scale(&self) -> f64 {
        self.forms
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Every component PSD with tolerance relative to the largest component.
    pub fn is_psd(&self, tol: f64) -> bool {
        let s = self.scale();
        self.forms.iter().all(|f| {
            linalg::hermitian_eigenvalues(f)
                .first()
                .is_none_or(|&l| l >= -tol * s)
        })
    }

    /// Every component positive definite with margin `tol·scale`.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        let s = self.scale();
        s > 0.0
            && self.forms.iter().all(|f| {
                linalg::hermitian_eigenvalues(f)
                    .first()
                    .is_none_or(|&l| l > tol * s)
            })
    }

    fn scaled(&self, t: f64) -> Self {
        FormTuple {
            forms: self.forms.iter().map(|f| f * c(t, 0.0)).collect(),
        }
    }
}

/// `𝓛𝓑`.
pub fn apply_l(sys: &MatrixSystem, b: &FormTuple) -> Result<FormTuple> {
    Ok(FormTuple::new(sys.transfer_forms(&b.forms)?))
}

/// Real dimension of the space of Hermitian tuples, `Σ_a dim(a)²`.
pub fn real_dimension(dims: &[usize]) -> usize {
    dims.iter().map(|d| d * d).sum()
}

/// Coordinates of a Hermitian tuple in the real basis.
pub fn vectorize(dims: &[usize], t: &FormTuple) -> DVector<f64> {
    let mut out = Vec::with_capacity(real_dimension(dims));
    for (f, &d) in t.forms.iter().zip(dims) {
        for i in 0..d {
            out.push(f[(i, i)].re);
        }
        for i in 0..d {
            for j in i + 1..d {
                let z = (f[(i, j)] + f[(j, i)].conj()) * 0.5;
                out.push(z.re);
                out.push(z.im);
            }
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`vectorize`].
pub fn devectorize(dims: &[usize], x: &DVector<f64>) -> FormTuple {
    let mut k = 0;
    let mut forms = Vec::with_capacity(dims.len());
    for &d in dims {
        let mut f = linalg::zeros(d, d);
        for i in 0..d {
            f[(i, i)] = c(x[k], 0.0);
            k += 1;
        }
        for i in 0..d {
            for j in i + 1..d {
                f[(i, j)] = c(x[k], x[k + 1]);
                f[(j, i)] = c(x[k], -x[k + 1]);
                k += 2;
            }
        }
        forms.push(f);
    }
    FormTuple::new(forms)
}

/// Dense real matrix of `𝓛` in the vectorization basis.
pub fn assemble_l(sys: &MatrixSystem) -> DMatrix<f64> {
    let dims = sys.dims();
    let n = real_dimension(dims);
    let mut out = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for k in 0..n {
        e[k] = 1.0;
        let img = apply_l(sys, &devectorize(dims, &e)).expect("shapes come from the system");
        out.set_column(k, &vectorize(dims, &img));
        e[k] = 0.0;
    }
    out
}

/// Perron-Frobenius data: spectral radius and a PSD eigen-tuple normalized
/// to maximal trace 1.
#[derive(Clone, Debug)]
pub struct PfEigenpair {
    pub rho: f64,
    pub forms: FormTuple,
    /// Relative residual `‖𝓛𝓑 − ρ𝓑‖ / ‖𝓑‖` in the vectorization.
    pub residual: f64,
    pub iterations: usize,
}

fn relative_residual(l: &DMatrix<f64>, x: &DVector<f64>, rho: f64) -> f64 {
    let nx = x.norm();
    if nx == 0.0 {
        return f64::INFINITY;
    }
    (l * x - x * rho).norm() / nx
}

/// Residual small relative to `ρ`, with a floor tied to `‖𝓛‖` so that tiny
/// spectral radii do not demand impossible accuracy.
fn acceptable(residual: f64, rho: f64, lnorm: f64, tol: f64) -> bool {
    residual <= tol * rho.abs().max(1e-6 * lnorm)
}

fn rayleigh(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(l * x)) / x.dot(x)
}

fn spectral_radius(l: &DMatrix<f64>) -> f64 {
    if l.nrows() == 0 {
        return 0.0;
    }
    l.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Power chain `I, 𝓛I, 𝓛²I, …`. Returns the last nonzero element if the
/// chain dies within `n` steps, which happens exactly when `ρ = 0`.
fn nilpotent_witness(l: &DMatrix<f64>, start: &DVector<f64>) -> Option<DVector<f64>> {
    let lnorm = l.norm();
    if lnorm == 0.0 {
        return Some(start.clone());
    }
    let mut cur = start.clone() / start.norm();
    for _ in 0..=l.nrows() {
        let next = l * &cur;
        if next.norm() <= 1e-13 * lnorm {
            return Some(cur);
        }
        cur = &next / next.norm();
    }
    None
}

/// Shifted inverse iteration from the identity tuple. The resolvent
/// `(tI − 𝓛)⁻¹` with `t > ρ` maps the cone into itself, so the iterates stay
/// PSD and converge to the Perron-Frobenius direction.
fn inverse_iteration(
    l: &DMatrix<f64>,
    start: &DVector<f64>,
    rho: f64,
    tol: f64,
) -> Option<(DVector<f64>, usize)> {
    let n = l.nrows();
    let scale = l.norm().max(f64::MIN_POSITIVE);
    for shift in [1e-8, 1e-6, 1e-4] {
        let t = rho * (1.0 + shift) + shift * 1e-3 * scale;
        let m = DMatrix::identity(n, n) * t - l;
        let lu = m.lu();
        let mut x = start.clone() / start.norm();
        for it in 1..=12 {
            let y = lu.solve(&x)?;
            let ny = y.norm();
            if !ny.is_finite() || ny == 0.0 {
                break;
            }
            x = y / ny;
            let r = rayleigh(l, &x);
            if acceptable(relative_residual(l, &x, r), r, scale, tol) {
                return Some((x, it));
            }
        }
    }
    None
}

/// Cesàro-averaged power iteration for `𝓛/ρ`, which handles a peripheral
/// spectrum without a dominant eigenvalue.
fn cesaro(l: &DMatrix<f64>, start: &DVector<f64>, rho: f64, tol: f64) -> Option<(DVector<f64>, usize)> {
    let mut cur = start.clone() / start.norm();
    let mut sum = cur.clone();
    for k in 1..=20_000 {
        cur = l * &cur / rho;
        let nc = cur.norm();
        if !nc.is_finite() || nc == 0.0 {
            return None;
        }
        sum += &cur;
        if k % 50 == 0 {
            let avg = &sum / (k as f64 + 1.0);
            if acceptable(relative_residual(l, &avg, rho), rho, l.norm(), tol) {
                return Some((avg, k));
            }
        }
    }
    None
}

/// Spectral radius of `𝓛` together with a PSD eigen-tuple.
pub fn pf_eigenpair(sys: &MatrixSystem, tol: f64) -> Result<PfEigenpair> {
    let dims = sys.dims().to_vec();
    if real_dimension(&dims) == 0 {
        return Err(input("all spaces are zero-dimensional"));
    }
    let l = assemble_l(sys);
    let start = vectorize(&dims, &FormTuple::identity(sys));

    let (rho, x, iterations) = if let Some(x) = nilpotent_witness(&l, &start) {
        (0.0, x, 0)
    } else {
        let rho0 = spectral_radius(&l);
        let found = inverse_iteration(&l, &start, rho0, tol)
            .or_else(|| cesaro(&l, &start, rho0, tol));
        let Some((x, it)) = found else {
            return Err(Error::Numeric {
                iterations: 20_000,
                detail: format!("no eigen-tuple for spectral radius {rho0:e}"),
            });
        };
        let r = rayleigh(&l, &x);
        let rho = if (r - rho0).abs() <= 1e-6 * rho0.max(1e-300) { r } else { rho0 };
        (rho, x, it)
    };

    let mut t = devectorize(&dims, &x);
    let trace_sum: f64 = t.forms.iter().map(|f| f.trace().re).sum();
    if trace_sum < 0.0 {
        t = t.scaled(-1.0);
    }
    let mt = t.max_trace();
    if mt <= 0.0 {
        return Err(Error::Numeric {
            iterations,
            detail: "eigen-tuple has no positive trace".into(),
        });
    }
    let t = t.scaled(1.0 / mt);
    let xv = vectorize(&dims, &t);
    let residual = relative_residual(&l, &xv, rho);
    if !acceptable(residual, rho, l.norm(), tol) {
        return Err(Error::Numeric {
            iterations,
            detail: format!("eigen-equation residual {residual:e} for ρ = {rho:e}"),
        });
    }
    if !t.is_psd(1e-8) {
        return Err(Error::Numeric {
            iterations,
            detail: "eigen-tuple is not positive semi-definite".into(),
        });
    }
    let forms = FormTuple::new(t.forms.iter().map(linalg::hermitize).collect());
    Ok(PfEigenpair {
        rho,
        forms,
        residual,
        iterations,
    })
}

/// Rescales `H` by `ρ^(-1/2)` and replaces the forms by the Perron-Frobenius
/// eigen-tuple, producing a compatible system.
pub fn normalize_to_compatible(sys: &MatrixSystem) -> Result<MatrixSystem> {
    let pf = pf_eigenpair(sys, PF_TOL)?;
    if pf.rho <= 1e-14 * sys.h_scale().powi(2).max(f64::MIN_POSITIVE) || pf.rho == 0.0 {
        return Err(Error::Degenerate(
            "Perron-Frobenius eigenvalue is zero; the system cannot be normalized".into(),
        ));
    }
    sys.scaled(c(pf.rho.powf(-0.5), 0.0)).with_forms(pf.forms.forms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vectorize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [2, 0, 3, 1];
        let t = FormTuple::new(
            dims.iter()
                .map(|&d| linalg::hermitize(&linalg::random_matrix(&mut rng, d, d)))
                .collect(),
        );
        let back = devectorize(&dims, &vectorize(&dims, &t));
        for (x, y) in t.forms.iter().zip(&back.forms) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_l_examples() {
        let al = Alphabet::standard(2);
        let sys = MatrixSystem::spherical(&al, 0.0);
        let img = apply_l(&sys, &FormTuple::new(sys.forms().to_vec())).unwrap();
        for (x, y) in img.forms.iter().zip(sys.forms()) {
            assert!((x - y).norm() < 1e-12);
        }
        let two = MatrixSystem::scalar(&al, c(2.0, 0.0), 1.0);
        let img = apply_l(&two, &FormTuple::identity(&two)).unwrap();
        assert!(img.forms.iter().all(|f| (f[(0, 0)].re - 12.0).abs() < 1e-12));
        let zero = MatrixSystem::scalar(&al, c(0.0, 0.0), 1.0);
        let img = apply_l(&zero, &FormTuple::identity(&zero)).unwrap();
        assert!(img.forms.iter().all(|f| f.norm() == 0.0));
    }

    #[test]
    fn scalar_spectral_radii() {
        let al = Alphabet::standard(2);
        let pf = pf_eigenpair(&MatrixSystem::spherical(&al, 0.0), PF_TOL).unwrap();
        assert!((pf.rho - 1.0).abs() < 1e-12);
        let pf = pf_eigenpair(&MatrixSystem::scalar(&al, c(1.0, 0.0), 1.0), PF_TOL).unwrap();
        assert!((pf.rho - 3.0).abs() < 1e-12);
        let pf = pf_eigenpair(&MatrixSystem::scalar(&al, c(0.0, 0.0), 1.0), PF_TOL).unwrap();
        assert_eq!(pf.rho, 0.0);
        let al3 = Alphabet::standard(3);
        let pf = pf_eigenpair(&MatrixSystem::scalar(&al3, c(0.5, 0.5), 1.0), PF_TOL).unwrap();
        assert!((pf.rho - 5.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalization() {
        let al = Alphabet::standard(2);
        let sys = normalize_to_compatible(&MatrixSystem::scalar(&al, c(1.0, 0.0), 1.0)).unwrap();
        let h = sys.h(al.letter("b").unwrap(), al.letter("a").unwrap())[(0, 0)];
        assert!((h.re - 3f64.powf(-0.5)).abs() < 1e-12);
        assert!(sys.compatibility_defect() < 1e-12);

        let sph = MatrixSystem::spherical(&al, 0.2);
        let n = normalize_to_compatible(&sph).unwrap();
        for b in al.letters() {
            for a in al.letters() {
                assert!((n.h(b, a) - sph.h(b, a)).norm() < 1e-10);
            }
        }
        let zero = MatrixSystem::scalar(&al, c(0.0, 0.0), 1.0);
        assert!(matches!(normalize_to_compatible(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn nilpotent_chain_gives_zero() {
        // H_ba nonzero only for (b, a) = (b, a): 𝓛 moves mass from b to a once.
        let al = Alphabet::standard(2);
        let (la, lb) = (al.letter("a").unwrap(), al.letter("b").unwrap());
        let sys = MatrixSystem::with_identity_forms(&al, vec![1; 4], |b, a| {
            if b == lb && a == la {
                Mat::from_element(1, 1, c(1.0, 0.0))
            } else {
                linalg::zeros(1, 1)
            }
        })
        .unwrap();
        let pf = pf_eigenpair(&sys, PF_TOL).unwrap();
        assert_eq!(pf.rho, 0.0);
        let img = apply_l(&sys, &pf.forms).unwrap();
        assert!(img.scale() < 1e-12);
    }
}
