//! Multiplicative functions, shadows, the action `π` and the inner product.
//!
//! A function is stored as its depth `N` and its values on the sphere of
//! radius `N`, in the lexicographic sphere order. Beyond the sphere values
//! propagate outward: `f(xb) = H_{b t(x)} f(x)`. Two functions are equal when
//! their refinements to a common depth agree.

use std::sync::Arc;

use crate::error::{input, Error, Result};
use crate::linalg::{self, Vector, C64};
use crate::system::MatrixSystem;
use crate::words::{FiniteSubtree, Letter, Word};

/// Default bound on stored sphere entries: the sphere of radius 12 for a
/// rank-2 free group.
pub const DEFAULT_SPHERE_CAP: usize = 708_588;

#[derive(Clone, Debug)]
pub struct MultiplicativeFunction {
    system: Arc<MatrixSystem>,
    depth: usize,
    values: Vec<Vector>,
    cap: usize,
}

fn check_cap(sys: &MatrixSystem, depth: usize, cap: usize) -> Result<()> {
    let needed = sys.alphabet().sphere_len(depth);
    if needed > cap {
        return Err(Error::DepthOverflow { depth, needed, cap });
    }
    Ok(())
}

impl MultiplicativeFunction {
    /// Builds a function from its sphere values (in sphere order).
    pub fn new(system: Arc<MatrixSystem>, depth: usize, values: Vec<Vector>) -> Result<Self> {
        if depth == 0 {
            return Err(input("multiplicative functions have depth at least 1"));
        }
        check_cap(&system, depth, DEFAULT_SPHERE_CAP)?;
        let al = system.alphabet().clone();
        if values.len() != al.sphere_len(depth) {
            return Err(input(format!(
                "expected {} sphere values, got {}",
                al.sphere_len(depth),
                values.len()
            )));
        }
        for (w, v) in al.sphere(depth).iter().zip(&values) {
            let t = w.last_letter()?;
            if v.len() != system.dim(t) {
                return Err(input(format!(
                    "value at {} has length {}, expected {}",
                    al.format_word(w),
                    v.len(),
                    system.dim(t)
                )));
            }
        }
        Ok(MultiplicativeFunction {
            system,
            depth,
            values,
            cap: DEFAULT_SPHERE_CAP,
        })
    }

    /// Builds a function of the given depth from a value for each sphere word.
    pub fn from_fn(
        system: Arc<MatrixSystem>,
        depth: usize,
        mut f: impl FnMut(&Word) -> Vector,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(input("multiplicative functions have depth at least 1"));
        }
        check_cap(&system, depth, DEFAULT_SPHERE_CAP)?;
        let values = system.alphabet().sphere(depth).iter().map(&mut f).collect();
        Self::new(system, depth, values)
    }

    pub fn zero(system: Arc<MatrixSystem>, depth: usize) -> Result<Self> {
        let s = system.clone();
        Self::from_fn(system, depth, |w| {
            Vector::zeros(s.dim(w.last_letter().expect("depth ≥ 1")))
        })
    }

    /// The shadow `μ[x, v]`: depth `|x|`, value `v` at `x`, zero elsewhere.
    pub fn shadow(system: Arc<MatrixSystem>, x: &Word, v: Vector) -> Result<Self> {
        system.alphabet().check_word(x)?;
        let t = x
            .last_letter()
            .map_err(|_| Error::Domain("shadows need a base x ≠ e".into()))?;
        if v.len() != system.dim(t) {
            return Err(input(format!(
                "shadow vector has length {}, expected {}",
                v.len(),
                system.dim(t)
            )));
        }
        let s = system.clone();
        Self::from_fn(system, x.len(), |w| {
            if w == x {
                v.clone()
            } else {
                Vector::zeros(s.dim(w.last_letter().expect("depth ≥ 1")))
            }
        })
    }

    /// Random function with Gaussian sphere values.
    pub fn random<R: rand::Rng + ?Sized>(
        system: Arc<MatrixSystem>,
        depth: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let s = system.clone();
        Self::from_fn(system, depth, |w| {
            linalg::random_vector(rng, s.dim(w.last_letter().expect("depth ≥ 1")))
        })
    }

    /// Sum of shadows, computed at the largest base length.
    pub fn from_shadows(system: Arc<MatrixSystem>, shadows: &[(Word, Vector)]) -> Result<Self> {
        let mut acc: Option<Self> = None;
        for (x, v) in shadows {
            let s = Self::shadow(system.clone(), x, v.clone())?;
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s)?,
            });
        }
        acc.ok_or_else(|| input("empty shadow list"))
    }

    /// Changes the sphere-entry budget for operations producing deeper functions.
    pub fn with_sphere_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn system(&self) -> &Arc<MatrixSystem> {
        &self.system
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn sphere_cap(&self) -> usize {
        self.cap
    }

    /// Value at `x` with `|x| = depth`.
    pub fn value_at(&self, x: &Word) -> Result<&Vector> {
        if x.len() != self.depth {
            return Err(Error::Domain(format!(
                "value_at needs |x| = {}, got {}",
                self.depth,
                x.len()
            )));
        }
        self.system.alphabet().check_word(x)?;
        Ok(&self.values[self.system.alphabet().sphere_index(x)])
    }

    /// `f(y)` for `|y| ≥ depth`, propagating the sphere value along `y`.
    pub fn evaluate(&self, y: &Word) -> Result<Vector> {
        if y.len() < self.depth {
            return Err(Error::Domain(format!(
                "evaluation needs |y| ≥ {}, got {}",
                self.depth,
                y.len()
            )));
        }
        let p = y.prefix(self.depth);
        let mut v = self.value_at(&p)?.clone();
        let letters = y.letters();
        for i in self.depth..letters.len() {
            v = self.system.h(letters[i], letters[i - 1]) * v;
        }
        Ok(v)
    }

    fn same_system(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || *self.system == *other.system {
            Ok(())
        } else {
            Err(Error::Mismatch("functions over different systems".into()))
        }
    }

    /// The same function stored at depth `m ≥ depth`.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m < self.depth {
            return Err(Error::Domain(format!(
                "cannot refine depth {} down to {m}",
                self.depth
            )));
        }
        if m == self.depth {
            return Ok(self.clone());
        }
        check_cap(&self.system, m, self.cap)?;
        let al = self.system.alphabet();
        let mut last: Vec<Letter> = al
            .sphere(self.depth)
            .iter()
            .map(|w| w.last_letter().expect("depth ≥ 1"))
            .collect();
        let mut vals = self.values.clone();
        for _ in self.depth..m {
            let mut nv = Vec::with_capacity(vals.len() * al.q());
            let mut nl = Vec::with_capacity(vals.len() * al.q());
            for (v, &t) in vals.iter().zip(&last) {
                let ti = al.inv(t);
                for b in al.letters().filter(|&b| b != ti) {
                    nv.push(self.system.h(b, t) * v);
                    nl.push(b);
                }
            }
            vals = nv;
            last = nl;
        }
        Ok(MultiplicativeFunction {
            system: self.system.clone(),
            depth: m,
            values: vals,
            cap: self.cap,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let m = self.depth.max(other.depth);
        let (f, g) = (self.refine(m)?, other.refine(m)?);
        Ok(MultiplicativeFunction {
            values: f.values.iter().zip(&g.values).map(|(x, y)| x + y).collect(),
            ..f
        })
    }

    pub fn scale(&self, t: C64) -> Self {
        MultiplicativeFunction {
            values: self.values.iter().map(|v| v * t).collect(),
            ..self.clone()
        }
    }

    /// `⟨f, g⟩ = Σ_{|x|=N} B_{t(x)}(f(x), g(x))` at the common depth, with
    /// `B(v, w) = v† B w`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        self.same_system(other)?;
        let m = self.depth.max(other.depth);
        let (f, g) = (self.refine(m)?, other.refine(m)?);
        let al = self.system.alphabet();
        let mut acc = C64::new(0.0, 0.0);
        for (w, (v, u)) in al.sphere(m).iter().zip(f.values.iter().zip(&g.values)) {
            let b = self.system.form(w.last_letter()?);
            acc += (v.adjoint() * b * u)[(0, 0)];
        }
        Ok(acc)
    }

    pub fn norm2(&self) -> Result<f64> {
        Ok(self.inner_product(self)?.re)
    }

    /// `π(x)f`: depth `N + |x|`, value at `z` equal to `f(x⁻¹z)`.
    pub fn act(&self, x: &Word) -> Result<Self> {
        let al = self.system.alphabet().clone();
        al.check_word(x)?;
        let m = self.depth + x.len();
        check_cap(&self.system, m, self.cap)?;
        let xi = al.inverse(x);
        let values = al
            .sphere(m)
            .iter()
            .map(|z| self.evaluate(&al.mul(&xi, z)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiplicativeFunction {
            system: self.system.clone(),
            depth: m,
            values,
            cap: self.cap,
        })
    }

    /// `⟨π(x)f, g⟩`.
    pub fn matrix_coefficient(x: &Word, f: &Self, g: &Self) -> Result<C64> {
        f.act(x)?.inner_product(g)
    }

    /// `Σ_{x ∈ T(𝒳)} ‖f(x)‖²` over the terminal vertices of a complete
    /// subtree containing `B(e, N(f))`.
    pub fn norm_via_subtree(&self, t: &FiniteSubtree) -> Result<f64> {
        if !t.is_complete() {
            return Err(Error::Precondition("subtree is not complete".into()));
        }
        if !t.contains_ball(&Word::identity(), self.depth) {
            return Err(Error::Precondition(format!(
                "subtree does not contain the ball of radius {}",
                self.depth
            )));
        }
        self.sum_over(t.terminal_vertices().iter())
    }

    /// `Σ_{t ∈ T_e(𝒳)} ‖f(t)‖²` for a complete subtree based at `x_e` with
    /// `e` not interior. For the shadow `μ[x_e, v]` this equals `‖v‖²`.
    pub fn norm_via_based_subtree(&self, t: &FiniteSubtree) -> Result<f64> {
        let terms = t.terminal_vertices_except_root()?;
        self.sum_over(terms.iter())
    }

    fn sum_over<'a>(&self, words: impl Iterator<Item = &'a Word>) -> Result<f64> {
        let mut acc = 0.0;
        for x in words {
            let v = self.evaluate(x)?;
            let b = self.system.form(x.last_letter()?);
            acc += (v.adjoint() * b * &v)[(0, 0)].re;
        }
        Ok(acc)
    }

    /// The nonzero sphere values as shadows `(x, f(x))`; their sum is `f`.
    pub fn shadows(&self) -> Vec<(Word, Vector)> {
        self.system
            .alphabet()
            .sphere(self.depth)
            .into_iter()
            .zip(&self.values)
            .filter(|(_, v)| v.iter().any(|z| z.norm() > 0.0))
            .map(|(w, v)| (w, v.clone()))
            .collect()
    }

    /// Largest entry difference after refining both to a common depth.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_system(other)?;
        let m = self.depth.max(other.depth);
        let (f, g) = (self.refine(m)?, other.refine(m)?);
        Ok(f.values
            .iter()
            .zip(&g.values)
            .map(|(x, y)| (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max))
    }
}
