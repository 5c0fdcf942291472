//! Matrix systems `(V_a, H_ba)` with inner-product tuples `(B_a)`.
//!
//! A system assigns to each letter `a` a space `V_a = C^{dim a}`, to each
//! ordered pair `(b, a)` a map `H_ba : V_a → V_b` (zero when `ab = e`), and to
//! each letter a Hermitian form `B_a(v, w) = v† B_a w`. The system is
//! compatible when `B_a = Σ_b H_ba† B_b H_ba` for every `a`.

use crate::error::{input, Error, Result};
use crate::linalg::{self, c, Mat, C64};
use crate::words::{Alphabet, Letter};

/// Acceptance threshold for compatibility defects and map residuals.
pub const DEFECT_TOL: f64 = 1e-9;
/// PSD check: smallest eigenvalue at least `-PSD_TOL·‖B‖`.
pub const PSD_TOL: f64 = 1e-9;
/// Relative residual allowed when verifying invariance of a subspace.
pub const INVARIANCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSystem {
    alphabet: Alphabet,
    dims: Vec<usize>,
    /// `h[b * n + a] = H_ba`, shape `dim b × dim a`.
    h: Vec<Mat>,
    forms: Vec<Mat>,
}

impl MatrixSystem {
    /// Builds a system from per-letter dimensions, a function giving `H_ba`
    /// for every pair and the forms. Shapes are checked, forms must be
    /// Hermitian and PSD within tolerance, and `H_ba` must vanish when `ab = e`.
    pub fn new(
        alphabet: &Alphabet,
        dims: Vec<usize>,
        mut h: impl FnMut(Letter, Letter) -> Mat,
        forms: Vec<Mat>,
    ) -> Result<Self> {
        let n = alphabet.size();
        if dims.len() != n || forms.len() != n {
            return Err(input(format!(
                "expected {n} dimensions and forms, got {} and {}",
                dims.len(),
                forms.len()
            )));
        }
        let mut hs = Vec::with_capacity(n * n);
        for b in alphabet.letters() {
            for a in alphabet.letters() {
                let m = h(b, a);
                if m.shape() != (dims[b.index()], dims[a.index()]) {
                    return Err(input(format!(
                        "H({},{}) has shape {:?}, expected {:?}",
                        alphabet.name(b),
                        alphabet.name(a),
                        m.shape(),
                        (dims[b.index()], dims[a.index()])
                    )));
                }
                if alphabet.inv(a) == b && m.iter().any(|x| x.norm() > 0.0) {
                    return Err(input(format!(
                        "H({},{}) must vanish because the letters are inverse",
                        alphabet.name(b),
                        alphabet.name(a)
                    )));
                }
                hs.push(m);
            }
        }
        let scale = forms.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
        let mut clean = Vec::with_capacity(n);
        for (a, f) in alphabet.letters().zip(forms) {
            if f.shape() != (dims[a.index()], dims[a.index()]) {
                return Err(input(format!(
                    "B({}) has shape {:?}, expected square of size {}",
                    alphabet.name(a),
                    f.shape(),
                    dims[a.index()]
                )));
            }
            if (&f - f.adjoint()).norm() > 1e-9 * scale.max(1.0) {
                return Err(input(format!("B({}) is not Hermitian", alphabet.name(a))));
            }
            let f = linalg::hermitize(&f);
            if let Some(&low) = linalg::hermitian_eigenvalues(&f).first() {
                if low < -PSD_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(input(format!(
                        "B({}) is not positive semi-definite (eigenvalue {low:e})",
                        alphabet.name(a)
                    )));
                }
            }
            clean.push(f);
        }
        Ok(MatrixSystem {
            alphabet: alphabet.clone(),
            dims,
            h: hs,
            forms: clean,
        })
    }

    /// Same as [`MatrixSystem::new`] with identity forms.
    pub fn with_identity_forms(
        alphabet: &Alphabet,
        dims: Vec<usize>,
        h: impl FnMut(Letter, Letter) -> Mat,
    ) -> Result<Self> {
        let forms = dims.iter().map(|&d| linalg::eye(d)).collect();
        Self::new(alphabet, dims, h, forms)
    }

    /// All spaces one-dimensional, `H_ba = h` whenever `ab ≠ e`, `B_a = b`.
    pub fn scalar(alphabet: &Alphabet, h: C64, b: f64) -> Self {
        let n = alphabet.size();
        let al = alphabet.clone();
        Self::new(
            alphabet,
            vec![1; n],
            |bl, a| {
                if al.inv(a) == bl {
                    linalg::zeros(1, 1)
                } else {
                    Mat::from_element(1, 1, h)
                }
            },
            vec![Mat::from_element(1, 1, c(b, 0.0)); n],
        )
        .expect("scalar system is well formed")
    }

    /// The spherical system: `H_ba = q^(-1/2 + is)` and `B_a = 1/|A|`.
    pub fn spherical(alphabet: &Alphabet, s: f64) -> Self {
        let q = alphabet.q() as f64;
        let h = C64::new(-0.5 * q.ln(), s * q.ln()).exp();
        Self::scalar(alphabet, h, 1.0 / alphabet.size() as f64)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, a: Letter) -> usize {
        self.dims[a.index()]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `H_ba : V_a → V_b`.
    pub fn h(&self, b: Letter, a: Letter) -> &Mat {
        &self.h[b.index() * self.alphabet.size() + a.index()]
    }

    pub fn form(&self, a: Letter) -> &Mat {
        &self.forms[a.index()]
    }

    pub fn forms(&self) -> &[Mat] {
        &self.forms
    }

    /// Same maps, new forms (validated).
    pub fn with_forms(&self, forms: Vec<Mat>) -> Result<Self> {
        Self::new(&self.alphabet, self.dims.clone(), |b, a| self.h(b, a).clone(), forms)
    }

    /// Every `H_ba` multiplied by `t`.
    pub fn scaled(&self, t: C64) -> Self {
        let mut out = self.clone();
        for m in &mut out.h {
            *m *= t;
        }
        out
    }

    /// Largest spectral norm among the transfer maps.
    pub fn h_scale(&self) -> f64 {
        self.h.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn form_scale(&self) -> f64 {
        self.forms.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    /// `(𝓛𝓑)_a = Σ_b H_ba† B_b H_ba`.
    pub fn transfer_forms(&self, forms: &[Mat]) -> Result<Vec<Mat>> {
        self.check_form_shapes(forms)?;
        Ok(self
            .alphabet
            .letters()
            .map(|a| {
                let mut acc = linalg::zeros(self.dim(a), self.dim(a));
                for b in self.alphabet.letters() {
                    let h = self.h(b, a);
                    if h.nrows() > 0 && h.ncols() > 0 {
                        acc += h.adjoint() * &forms[b.index()] * h;
                    }
                }
                acc
            })
            .collect())
    }

    pub(crate) fn check_form_shapes(&self, forms: &[Mat]) -> Result<()> {
        if forms.len() != self.alphabet.size() {
            return Err(input("form tuple has the wrong number of components"));
        }
        for a in self.alphabet.letters() {
            let d = self.dim(a);
            if forms[a.index()].shape() != (d, d) {
                return Err(input(format!(
                    "form for {} has shape {:?}, expected {d}×{d}",
                    self.alphabet.name(a),
                    forms[a.index()].shape()
                )));
            }
        }
        Ok(())
    }

    /// `max_a ‖B_a − Σ_b H_ba† B_b H_ba‖`.
    pub fn compatibility_defect(&self) -> f64 {
        let image = self
            .transfer_forms(&self.forms)
            .expect("own forms have matching shapes");
        self.forms
            .iter()
            .zip(&image)
            .map(|(b, lb)| linalg::spectral_norm(&(b - lb)))
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of each form.
    pub fn form_min_eigenvalues(&self) -> Vec<Option<f64>> {
        self.forms
            .iter()
            .map(|f| linalg::hermitian_eigenvalues(f).first().copied())
            .collect()
    }

    /// True when every form is strictly positive definite relative to the
    /// largest form.
    pub fn forms_positive_definite(&self) -> bool {
        let scale = self.form_scale();
        scale > 0.0
            && self
                .form_min_eigenvalues()
                .iter()
                .all(|e| e.is_none_or(|l| l > linalg::RANK_TOL * scale))
    }

    fn check_same_alphabet(&self, other: &MatrixSystem) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::Mismatch(format!(
                "systems over {} and {}",
                self.alphabet, other.alphabet
            )));
        }
        Ok(())
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &MatrixSystem) -> Result<Self> {
        self.check_same_alphabet(other)?;
        let dims = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(x, y)| x + y)
            .collect();
        let forms = self
            .alphabet
            .letters()
            .map(|a| linalg::block_diag(&[self.form(a), other.form(a)]))
            .collect();
        Self::new(
            &self.alphabet,
            dims,
            |b, a| linalg::block_diag(&[self.h(b, a), other.h(b, a)]),
            forms,
        )
    }

    /// Transports the system along invertible maps `U_a`:
    /// `H'_ba = U_b H_ba U_a⁻¹`, `B'_a = U_a⁻† B_a U_a⁻¹`. For unitary `U`
    /// this is `U_b H U_a†` and `U_a B_a U_a†`.
    pub fn conjugate(&self, u: &SystemMap) -> Result<Self> {
        if u.j.len() != self.alphabet.size() {
            return Err(input("system map has the wrong number of components"));
        }
        let mut inv = Vec::with_capacity(u.j.len());
        for a in self.alphabet.letters() {
            let m = &u.j[a.index()];
            if m.shape() != (self.dim(a), self.dim(a)) {
                return Err(input("conjugating map must be square per letter"));
            }
            let mi = m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Precondition("conjugating map is singular".into()))?;
            inv.push(mi);
        }
        let forms = self
            .alphabet
            .letters()
            .map(|a| inv[a.index()].adjoint() * self.form(a) * &inv[a.index()])
            .collect();
        Self::new(
            &self.alphabet,
            self.dims.clone(),
            |b, a| &u.j[b.index()] * self.h(b, a) * &inv[a.index()],
            forms,
        )
    }

    /// `(W, H|W, B|W)` in the orthonormal bases of `W`.
    pub fn restrict_to(&self, w: &Subsystem) -> Result<Self> {
        w.check_shape(self)?;
        let q = &w.basis;
        let forms = self
            .alphabet
            .letters()
            .map(|a| q[a.index()].adjoint() * self.form(a) * &q[a.index()])
            .collect();
        Self::new(
            &self.alphabet,
            w.dims(),
            |b, a| q[b.index()].adjoint() * self.h(b, a) * &q[a.index()],
            forms,
        )
    }

    /// Relative invariance residual `max ‖(I − P_b) H_ba Q_a‖ / ‖H‖`.
    pub fn invariance_residual(&self, w: &Subsystem) -> Result<f64> {
        w.check_shape(self)?;
        let scale = self.h_scale();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let mut worst: f64 = 0.0;
        for b in self.alphabet.letters() {
            let qb = &w.basis[b.index()];
            for a in self.alphabet.letters() {
                let qa = &w.basis[a.index()];
                if qa.ncols() == 0 || self.dim(b) == 0 {
                    continue;
                }
                let img = self.h(b, a) * qa;
                let resid = &img - qb * (qb.adjoint() * &img);
                worst = worst.max(linalg::spectral_norm(&resid));
            }
        }
        Ok(worst / scale)
    }

    pub fn is_invariant_subsystem(&self, w: &Subsystem, tol: f64) -> Result<bool> {
        Ok(self.invariance_residual(w)? <= tol)
    }

    /// Quotient by an invariant subsystem, realized on the orthogonal
    /// complements `C_a` of `W_a`: `H̃_ba = C_b† H_ba C_a`, `B̃_a = C_a† B_a C_a`.
    /// The forms are the induced ones exactly when `W_a ⊆ ker B_a`.
    /// Returns the quotient and the complements.
    pub fn quotient(&self, w: &Subsystem) -> Result<(Self, Vec<Mat>)> {
        let r = self.invariance_residual(w)?;
        if r > INVARIANCE_TOL {
            return Err(Error::Precondition(format!(
                "subspace is not invariant (relative residual {r:e})"
            )));
        }
        let comp: Vec<Mat> = w.basis.iter().map(linalg::complement).collect();
        let dims = comp.iter().map(|m| m.ncols()).collect();
        let forms = self
            .alphabet
            .letters()
            .map(|a| linalg::hermitize(&(comp[a.index()].adjoint() * self.form(a) * &comp[a.index()])))
            .collect();
        let q = Self::new(
            &self.alphabet,
            dims,
            |b, a| {
                if self.alphabet.inv(a) == b {
                    linalg::zeros(comp[b.index()].ncols(), comp[a.index()].ncols())
                } else {
                    comp[b.index()].adjoint() * self.h(b, a) * &comp[a.index()]
                }
            },
            forms,
        )?;
        Ok((q, comp))
    }

    /// `max_(b,a) ‖H^other_ba J_a − J_b H^self_ba‖` for `J : self → other`.
    pub fn map_residual(&self, other: &MatrixSystem, j: &SystemMap) -> Result<f64> {
        self.check_same_alphabet(other)?;
        j.check_shape(self, other)?;
        let mut worst: f64 = 0.0;
        for b in self.alphabet.letters() {
            for a in self.alphabet.letters() {
                let lhs = other.h(b, a) * &j.j[a.index()];
                let rhs = &j.j[b.index()] * self.h(b, a);
                worst = worst.max(linalg::spectral_norm(&(lhs - rhs)));
            }
        }
        Ok(worst)
    }

    /// Residual within `tol` and every `J_a` square and invertible.
    pub fn is_equivalence(&self, other: &MatrixSystem, j: &SystemMap, tol: f64) -> Result<bool> {
        if self.map_residual(other, j)? > tol {
            return Ok(false);
        }
        Ok(j.j.iter().all(|m| m.is_square() && linalg::rank(m) == m.nrows()))
    }
}

/// Per-letter subspaces `W_a ⊆ V_a`, stored as orthonormal column bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Subsystem {
    basis: Vec<Mat>,
}

impl Subsystem {
    /// Orthonormalizes the given spanning sets (columns of each matrix).
    pub fn from_spans(sys: &MatrixSystem, spans: Vec<Mat>) -> Result<Self> {
        if spans.len() != sys.alphabet.size() {
            return Err(input("subsystem needs one spanning set per letter"));
        }
        let basis: Vec<Mat> = spans.iter().map(linalg::column_space).collect();
        let s = Subsystem { basis };
        s.check_shape(sys)?;
        Ok(s)
    }

    /// Wraps bases that the caller guarantees to be orthonormal.
    pub(crate) fn from_orthonormal(basis: Vec<Mat>) -> Self {
        Subsystem { basis }
    }

    pub fn zero(sys: &MatrixSystem) -> Self {
        Subsystem {
            basis: sys.dims.iter().map(|&d| linalg::zeros(d, 0)).collect(),
        }
    }

    pub fn full(sys: &MatrixSystem) -> Self {
        Subsystem {
            basis: sys.dims.iter().map(|&d| linalg::eye(d)).collect(),
        }
    }

    pub fn basis(&self, a: Letter) -> &Mat {
        &self.basis[a.index()]
    }

    pub fn bases(&self) -> &[Mat] {
        &self.basis
    }

    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(|m| m.ncols()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.basis.iter().map(|m| m.ncols()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn is_full(&self, sys: &MatrixSystem) -> bool {
        self.dims() == sys.dims
    }

    /// Per-letter orthogonal complement.
    pub fn orthogonal_complement(&self) -> Self {
        Subsystem {
            basis: self.basis.iter().map(linalg::complement).collect(),
        }
    }

    /// Maps the subsystem of a restricted system back into the parent:
    /// `W_a ↦ Q_a W_a`.
    pub fn pushed_forward(&self, embedding: &[Mat]) -> Self {
        Subsystem {
            basis: self
                .basis
                .iter()
                .zip(embedding)
                .map(|(w, q)| q * w)
                .collect(),
        }
    }

    fn check_shape(&self, sys: &MatrixSystem) -> Result<()> {
        if self.basis.len() != sys.alphabet.size()
            || self.basis.iter().zip(&sys.dims).any(|(m, &d)| m.nrows() != d)
        {
            return Err(input("subsystem shape does not match the system"));
        }
        Ok(())
    }
}

/// Per-letter linear maps `J_a : V_a → V'_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMap {
    pub j: Vec<Mat>,
}

impl SystemMap {
    pub fn new(j: Vec<Mat>) -> Self {
        SystemMap { j }
    }

    pub fn identity(sys: &MatrixSystem) -> Self {
        SystemMap {
            j: sys.dims.iter().map(|&d| linalg::eye(d)).collect(),
        }
    }

    pub fn zero(from: &MatrixSystem, to: &MatrixSystem) -> Self {
        SystemMap {
            j: from
                .dims
                .iter()
                .zip(&to.dims)
                .map(|(&d, &e)| linalg::zeros(e, d))
                .collect(),
        }
    }

    pub fn get(&self, a: Letter) -> &Mat {
        &self.j[a.index()]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SystemMap) -> SystemMap {
        SystemMap {
            j: self.j.iter().zip(&inner.j).map(|(x, y)| x * y).collect(),
        }
    }

    /// Kernels of the `J_a`, as a subsystem of the domain.
    pub fn kernel(&self, from: &MatrixSystem) -> Result<Subsystem> {
        Subsystem::from_spans(from, self.j.iter().map(linalg::null_space).collect())
    }

    fn check_shape(&self, from: &MatrixSystem, to: &MatrixSystem) -> Result<()> {
        if self.j.len() != from.alphabet.size()
            || from
                .alphabet
                .letters()
                .any(|a| self.j[a.index()].shape() != (to.dim(a), from.dim(a)))
        {
            return Err(input("system map shape does not match the systems"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Alphabet {
        Alphabet::standard(2)
    }

    #[test]
    fn spherical_is_compatible() {
        for s in [0.0, 0.3, -1.7] {
            let sys = MatrixSystem::spherical(&f2(), s);
            assert!(sys.compatibility_defect() <= 1e-12);
        }
    }

    #[test]
    fn defect_examples() {
        let al = f2();
        let zero = MatrixSystem::scalar(&al, c(0.0, 0.0), 1.0);
        assert!((zero.compatibility_defect() - 1.0).abs() < 1e-15);
        let one = MatrixSystem::scalar(&al, c(1.0, 0.0), 1.0);
        assert!((one.compatibility_defect() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let al = f2();
        let r = MatrixSystem::with_identity_forms(&al, vec![1; 4], |_, _| {
            Mat::from_element(1, 1, c(1.0, 0.0))
        });
        assert!(matches!(r, Err(Error::Input(_))));
        let r = MatrixSystem::with_identity_forms(&al, vec![1; 4], |_, _| linalg::zeros(2, 1));
        assert!(r.is_err());
        let r = MatrixSystem::new(
            &al,
            vec![1; 4],
            |_, _| linalg::zeros(1, 1),
            vec![Mat::from_element(1, 1, c(-1.0, 0.0)); 4],
        );
        assert!(r.is_err());
    }

    #[test]
    fn direct_sum_and_conjugation() {
        let al = f2();
        let s1 = MatrixSystem::spherical(&al, 0.0);
        let s2 = MatrixSystem::spherical(&al, 0.4);
        let sum = s1.direct_sum(&s2).unwrap();
        assert_eq!(sum.dims(), &[2, 2, 2, 2]);
        assert!(sum.compatibility_defect() <= 1e-12);

        let conj = sum.conjugate(&SystemMap::identity(&sum)).unwrap();
        assert_eq!(conj, sum);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = SystemMap::new((0..4).map(|_| linalg::random_unitary(&mut rng, 2)).collect());
        let conj = sum.conjugate(&u).unwrap();
        assert!(conj.compatibility_defect() <= 1e-10);
        assert!(sum.map_residual(&conj, &u).unwrap() <= 1e-12);
        assert!(sum.is_equivalence(&conj, &u, 1e-9).unwrap());
    }

    #[test]
    fn map_residuals() {
        let sys = MatrixSystem::spherical(&f2(), 0.0);
        assert_eq!(sys.map_residual(&sys, &SystemMap::identity(&sys)).unwrap(), 0.0);
        assert_eq!(sys.map_residual(&sys, &SystemMap::zero(&sys, &sys)).unwrap(), 0.0);
        let j = SystemMap::new(
            [1.0, 2.0, 1.0, 1.0]
                .iter()
                .map(|&x| Mat::from_element(1, 1, c(x, 0.0)))
                .collect(),
        );
        // |H (j_a − j_b)| with h = 1/√3 and a single differing letter.
        let r = sys.map_residual(&sys, &j).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quotient_by_zero_and_full() {
        let sys = MatrixSystem::spherical(&f2(), 0.0);
        let (q, _) = sys.quotient(&Subsystem::zero(&sys)).unwrap();
        assert_eq!(q, sys);
        let (q, _) = sys.quotient(&Subsystem::full(&sys)).unwrap();
        assert_eq!(q.dims(), &[0, 0, 0, 0]);
    }

    #[test]
    fn non_invariant_quotient_fails() {
        let al = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = MatrixSystem::with_identity_forms(&al, vec![2; 4], |b, a| {
            if al.inv(a) == b {
                linalg::zeros(2, 2)
            } else {
                linalg::random_matrix(&mut rng, 2, 2)
            }
        })
        .unwrap();
        let line = Subsystem::from_spans(
            &sys,
            vec![Mat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]); 4],
        )
        .unwrap();
        assert!(matches!(sys.quotient(&line), Err(Error::Precondition(_))));
    }

    #[test]
    fn restriction_of_invariant_subsystem_stays_compatible() {
        let al = f2();
        let sum = MatrixSystem::spherical(&al, 0.0)
            .direct_sum(&MatrixSystem::spherical(&al, 1.1))
            .unwrap();
        let w = Subsystem::from_spans(
            &sum,
            vec![Mat::from_column_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]); 4],
        )
        .unwrap();
        assert!(sum.is_invariant_subsystem(&w, 1e-12).unwrap());
        let r = sum.restrict_to(&w).unwrap();
        assert!(r.compatibility_defect() <= 1e-12);
    }
}
