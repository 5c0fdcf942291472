//! Restriction to and induction from a finite-index subgroup `Γ'`.
//!
//! Both directions work over the fundamental subtree `D` and the induced
//! generators `A'` of a [`FundamentalSubtree`]. Induced functions are given
//! as families indexed by `D`: the entry for `u` is the value of the
//! induced function at `u⁻¹`, since `{u⁻¹ : u ∈ D}` meets every coset
//! `gΓ'` exactly once.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{internal, Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::multfunc::{MultiplicativeFunction, DEFAULT_SPHERE_CAP};
use crate::subgroup::FundamentalSubtree;
use crate::system::MatrixSystem;
use crate::words::{FiniteSubtree, Letter, Word};

/// Largest depth tried when searching for an output depth.
const MAX_DEPTH: usize = 64;

fn check_compatible(sys: &MatrixSystem) -> Result<()> {
    let defect = sys.compatibility_defect();
    if defect > 1e-8 * sys.form_scale().max(1.0) {
        return Err(Error::Precondition(format!(
            "system is not compatible (defect {defect:e})"
        )));
    }
    Ok(())
}

fn check_output(sys: &MatrixSystem) -> Result<()> {
    check_compatible(sys).map_err(|e| internal(format!("constructed system: {e}")))
}

/// Smallest depth `m ≥ 1` for which `ok(m)` holds, within the sphere cap.
fn least_depth(sizes: impl Fn(usize) -> usize, mut ok: impl FnMut(usize) -> Result<bool>) -> Result<usize> {
    for m in 1..=MAX_DEPTH {
        if sizes(m) > DEFAULT_SPHERE_CAP {
            return Err(Error::DepthOverflow {
                depth: m,
                needed: sizes(m),
                cap: DEFAULT_SPHERE_CAP,
            });
        }
        if ok(m)? {
            return Ok(m);
        }
    }
    Err(internal("no admissible output depth"))
}

/// The restriction of a system over `A` to `Γ'`, as a system over `A'`.
#[derive(Clone, Debug)]
pub struct RestrictedSystem {
    pub fs: FundamentalSubtree,
    pub source: Arc<MatrixSystem>,
    pub system: Arc<MatrixSystem>,
}

/// `V_{a'} = V_{q(a')}`, `B_{a'} = B_{q(a')}`, and `H_{b'a'}` the product of
/// the `H` along the path from `x(a')` to `a'x(b')`.
pub fn restrict_system(sys: &MatrixSystem, fs: &FundamentalSubtree) -> Result<RestrictedSystem> {
    if sys.alphabet() != fs.alphabet() {
        return Err(Error::Mismatch("system and subgroup use different alphabets".into()));
    }
    check_compatible(sys)?;
    let al = fs.alphabet();
    let gen = fs.generators().clone();
    let n = gen.size();
    let mut h = Vec::with_capacity(n * n);
    for b in gen.letters() {
        for a in gen.letters() {
            let (qa, qb) = (fs.q(a), fs.q(b));
            if b == gen.inv(a) {
                h.push(linalg::zeros(sys.dim(qb), sys.dim(qa)));
                continue;
            }
            let xa = fs.contact(a);
            let target = al.mul(fs.generator_word(a), fs.contact(b));
            if !xa.is_prefix_of(&target) || target.last_letter()? != qb {
                return Err(internal("a'x(b') does not continue x(a')"));
            }
            let mut m = linalg::eye(sys.dim(qa));
            let mut prev = qa;
            for &next in target.suffix_from(xa.len()).letters() {
                m = sys.h(next, prev) * m;
                prev = next;
            }
            h.push(m);
        }
    }
    let dims = gen.letters().map(|a| sys.dim(fs.q(a))).collect();
    let forms = gen.letters().map(|a| sys.form(fs.q(a)).clone()).collect();
    let out = MatrixSystem::new(&gen, dims, |b, a| h[b.index() * n + a.index()].clone(), forms)?;
    check_output(&out)?;
    Ok(RestrictedSystem {
        fs: fs.clone(),
        source: Arc::new(sys.clone()),
        system: Arc::new(out),
    })
}

impl RestrictedSystem {
    /// `(Uf)(y'a') = f(y'·x(a'))`.
    pub fn intertwine(&self, f: &MultiplicativeFunction) -> Result<MultiplicativeFunction> {
        if **f.system() != *self.source {
            return Err(Error::Mismatch("function is not over the restricted system".into()));
        }
        let al = self.fs.alphabet();
        let gen = self.fs.generators();
        let point = |x: &Word| -> Result<Word> {
            let a = x.last_letter()?;
            Ok(al.mul(&self.fs.expand(&x.drop_last()?), self.fs.contact(a)))
        };
        let m = least_depth(
            |m| gen.sphere_len(m),
            |m| {
                for x in gen.sphere(m) {
                    if point(&x)?.len() < f.depth() {
                        return Ok(false);
                    }
                }
                Ok(true)
            },
        )?;
        let values = gen
            .sphere(m)
            .iter()
            .map(|x| f.evaluate(&point(x)?))
            .collect::<Result<Vec<_>>>()?;
        MultiplicativeFunction::new(self.system.clone(), m, values)
    }
}

/// `P(a) = (D⁻¹·A') ∩ C(a)` as pairs `(u, c')`, ordered by `u` then `c'`.
pub fn compute_p(fs: &FundamentalSubtree) -> Vec<Vec<(Word, Letter)>> {
    let al = fs.alphabet();
    let gen = fs.generators();
    let mut p = vec![Vec::new(); al.size()];
    for u in fs.d() {
        let ui = al.inverse(u);
        for c in gen.letters() {
            let y = al.mul(&ui, fs.generator_word(c));
            // u⁻¹c' = e would put c' in D ∩ Γ' = {e}.
            let a = y.first_letter().expect("u⁻¹c' is never the identity");
            p[a.index()].push((u.clone(), c));
        }
    }
    p
}

/// The induced system over `A` together with its block bookkeeping.
#[derive(Clone, Debug)]
pub struct InducedSystem {
    pub fs: FundamentalSubtree,
    pub source: Arc<MatrixSystem>,
    pub system: Arc<MatrixSystem>,
    /// `P(a)` for each letter `a`.
    pub p: Vec<Vec<(Word, Letter)>>,
    offsets: Vec<Vec<usize>>,
}

/// Which rule produced a block of `H_{ba}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRule {
    /// `va⁻¹ ∈ D`: the `(va⁻¹, d')` block is copied.
    Copy,
    /// `va⁻¹ ∉ D` and `av⁻¹ = u⁻¹c'`: the block is `H'_{d'c'}`.
    Transfer,
}

/// `V_a = ⊕_{(u,c') ∈ P(a)} V'_{c'}` with block-diagonal `B_a`. Each block
/// row `(v, d')` of `H_{ba}` is filled by exactly one of the two rules of
/// [`BlockRule`]; a row matching neither is an internal error.
pub fn induce_system(sys: &MatrixSystem, fs: &FundamentalSubtree) -> Result<InducedSystem> {
    if sys.alphabet() != fs.generators() {
        return Err(Error::Mismatch(
            "system is not over the induced generators of the subgroup".into(),
        ));
    }
    check_compatible(sys)?;
    let al = fs.alphabet().clone();
    let gen = fs.generators();
    let p = compute_p(fs);
    let mut offsets = Vec::with_capacity(al.size());
    let mut dims = Vec::with_capacity(al.size());
    for pa in &p {
        let mut off = Vec::with_capacity(pa.len());
        let mut acc = 0;
        for (_, c) in pa {
            off.push(acc);
            acc += sys.dim(*c);
        }
        offsets.push(off);
        dims.push(acc);
    }
    let find = |a: Letter, u: &Word, c: Letter| p[a.index()].iter().position(|(w, l)| w == u && *l == c);
    let n = al.size();
    let mut h = Vec::with_capacity(n * n);
    for b in al.letters() {
        for a in al.letters() {
            let mut m = linalg::zeros(dims[b.index()], dims[a.index()]);
            if b != al.inv(a) {
                for (row, (v, d)) in p[b.index()].iter().enumerate() {
                    let va = al.mul(v, &Word::letter(al.inv(a)));
                    let (col, block) = if fs.in_d(&va) {
                        let col = find(a, &va, *d)
                            .ok_or_else(|| internal("copy rule source block is not in P(a)"))?;
                        (col, linalg::eye(sys.dim(*d)))
                    } else {
                        // va⁻¹ = c'⁻¹u, so av⁻¹ = u⁻¹c'.
                        let f = fs.decompose_left(&va)?;
                        if f.gamma_letters.len() != 1 {
                            return Err(internal("va⁻¹ is not adjacent to D"));
                        }
                        let c = gen.inv(f.gamma_letters.letters()[0]);
                        if c == gen.inv(*d) {
                            return Err(internal("no rule applies to an H block"));
                        }
                        let col = find(a, &f.u, c)
                            .ok_or_else(|| internal("transfer rule source block is not in P(a)"))?;
                        (col, sys.h(*d, c).clone())
                    };
                    let (r0, c0) = (offsets[b.index()][row], offsets[a.index()][col]);
                    m.view_mut((r0, c0), block.shape()).copy_from(&block);
                }
            }
            h.push(m);
        }
    }
    let forms = p
        .iter()
        .map(|pa| {
            let blocks: Vec<&Mat> = pa.iter().map(|(_, c)| sys.form(*c)).collect();
            linalg::block_diag(&blocks)
        })
        .collect();
    let out = MatrixSystem::new(&al, dims, |b, a| h[b.index() * n + a.index()].clone(), forms)?;
    check_output(&out)?;
    Ok(InducedSystem {
        fs: fs.clone(),
        source: Arc::new(sys.clone()),
        system: Arc::new(out),
        p,
        offsets,
    })
}

impl InducedSystem {
    /// The rule used for block row `(v, d')` of `H_{ba}`, or `None` when
    /// `ab = e`.
    pub fn block_rule(&self, b: Letter, a: Letter, v: &Word) -> Option<BlockRule> {
        let al = self.fs.alphabet();
        if b == al.inv(a) {
            return None;
        }
        if self.fs.in_d(&al.mul(v, &Word::letter(al.inv(a)))) {
            Some(BlockRule::Copy)
        } else {
            Some(BlockRule::Transfer)
        }
    }

    /// Checks the family shape and returns `f(g)(y')` for `g ∈ Γ`, `y'` an
    /// `A'`-word: writing `g⁻¹ = γ'v` gives `f(g) = π'(γ')f(v⁻¹)`.
    fn evaluate_family(&self, family: &[MultiplicativeFunction], g: &Word, y: &Word) -> Result<Vector> {
        let al = self.fs.alphabet();
        let gen = self.fs.generators();
        let fac = self.fs.decompose_left(&al.inverse(g))?;
        let v = self
            .fs
            .d_position(&fac.u)
            .ok_or_else(|| internal("left factor outside D"))?;
        family[v].evaluate(&gen.mul(&gen.inverse(&fac.gamma_letters), y))
    }

    fn evaluation_length(&self, g: &Word, c: Letter) -> Result<(usize, usize)> {
        let al = self.fs.alphabet();
        let gen = self.fs.generators();
        let fac = self.fs.decompose_left(&al.inverse(g))?;
        let v = self.fs.d_position(&fac.u).ok_or_else(|| internal("left factor outside D"))?;
        Ok((v, gen.mul(&gen.inverse(&fac.gamma_letters), &Word::letter(c)).len()))
    }

    fn check_family(&self, family: &[MultiplicativeFunction]) -> Result<()> {
        if family.len() != self.fs.d().len() {
            return Err(Error::Input(format!(
                "a family needs one function per element of D ({}), got {}",
                self.fs.d().len(),
                family.len()
            )));
        }
        if family.iter().any(|f| **f.system() != *self.source) {
            return Err(Error::Mismatch("family is not over the subgroup system".into()));
        }
        Ok(())
    }

    /// `Uf(xa)` has `(u, c')`-block `f(x u⁻¹)(c')`.
    pub fn intertwine(&self, family: &[MultiplicativeFunction]) -> Result<MultiplicativeFunction> {
        self.check_family(family)?;
        let al = self.fs.alphabet().clone();
        let blocks = |w: &Word| -> Result<Vec<Word>> {
            let a = w.last_letter()?;
            let x = w.drop_last()?;
            Ok(self.p[a.index()]
                .iter()
                .map(|(u, _)| al.mul(&x, &al.inverse(u)))
                .collect())
        };
        let m = least_depth(
            |m| al.sphere_len(m),
            |m| {
                for w in al.sphere(m) {
                    let a = w.last_letter()?;
                    for (g, (_, c)) in blocks(&w)?.iter().zip(&self.p[a.index()]) {
                        let (v, len) = self.evaluation_length(g, *c)?;
                        if len < family[v].depth() {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            },
        )?;
        let mut values = Vec::with_capacity(al.sphere_len(m));
        for w in al.sphere(m) {
            let a = w.last_letter()?;
            let mut val = Vector::zeros(self.system.dim(a));
            for ((g, (_, c)), &off) in blocks(&w)?.iter().zip(&self.p[a.index()]).zip(&self.offsets[a.index()]) {
                let block = self.evaluate_family(family, g, &Word::letter(*c))?;
                val.rows_mut(off, block.len()).copy_from(&block);
            }
            values.push(val);
        }
        MultiplicativeFunction::new(self.system.clone(), m, values)
    }

    /// `‖f‖² = Σ_{u ∈ D} ‖f(u⁻¹)‖²`.
    pub fn family_norm2(&self, family: &[MultiplicativeFunction]) -> Result<f64> {
        self.check_family(family)?;
        family.iter().map(|f| f.norm2()).sum()
    }

    /// The family of `ind π'(g₀)f`: entry `u` is `f(g₀⁻¹u⁻¹) = π'(γ')f(v⁻¹)`
    /// where `u·g₀ = γ'v`.
    pub fn translate_family(
        &self,
        family: &[MultiplicativeFunction],
        g0: &Word,
    ) -> Result<Vec<MultiplicativeFunction>> {
        self.check_family(family)?;
        let al = self.fs.alphabet();
        self.fs
            .d()
            .iter()
            .map(|u| {
                let fac = self.fs.decompose_left(&al.mul(u, g0))?;
                let v = self.fs.d_position(&fac.u).ok_or_else(|| internal("left factor outside D"))?;
                family[v].act(&fac.gamma_letters)
            })
            .collect()
    }
}

/// The finite complete subtree `𝒮' = S'₀ ⊔ S'ₜ` of `𝒯'` for the coset
/// translate by `z` and radius `n`. `S'₀` holds the `γ'` whose tile `γ'D`
/// meets `z⁻¹B(e, n+1)` (open ball); `S'ₜ` holds the first tiles inside a cone
/// `z⁻¹C(xa)` with `|xa| = n + 1`. Fails if `𝒮'` misses `B'(e, m)`.
pub fn truncation_subtree(fs: &FundamentalSubtree, z: &Word, n: usize, m: usize) -> Result<FiniteSubtree> {
    let al = fs.alphabet();
    let gen = fs.generators();
    al.check_word(z)?;
    if n <= z.len() {
        return Err(Error::Precondition(format!("radius {n} must exceed |z| = {}", z.len())));
    }
    let tile = |g: &Word| -> Vec<Word> {
        let zg = al.mul(z, &fs.expand(g));
        fs.d().iter().map(|u| al.mul(&zg, u)).collect()
    };
    // The ball is taken open, `|w| < n + 1`, so that it is disjoint from the cones.
    let meets_ball = |g: &Word| tile(g).iter().any(|w| w.len() <= n);
    // The common cone z⁻¹C(xa), |xa| = n + 1, containing the tile, if any.
    let cone_of = |g: &Word| -> Option<Word> {
        let t = tile(g);
        let c = t[0].prefix(n + 1);
        (t.iter().all(|w| w.len() > n && c.is_prefix_of(w))).then_some(c)
    };
    let mut verts = BTreeSet::new();
    let mut terminals = BTreeSet::new();
    let mut queue = vec![Word::identity()];
    while let Some(g) = queue.pop() {
        if !meets_ball(&g) {
            return Err(internal("a tile left the ball before entering a cone"));
        }
        verts.insert(g.clone());
        for c in gen.outward_letters(&g) {
            let child = g.pushed(c);
            if meets_ball(&child) {
                queue.push(child);
            } else {
                let cone = cone_of(&child)
                    .ok_or_else(|| internal("a tile outside the ball straddles two cones"))?;
                if cone_of(&g).as_ref() == Some(&cone) {
                    return Err(internal("parent tile already inside the cone"));
                }
                verts.insert(child.clone());
                terminals.insert(child);
            }
        }
    }
    let t = FiniteSubtree::complete_subtree_of(gen, verts)
        .map_err(|e| internal(format!("truncation subtree: {e}")))?;
    if t.terminal_vertices() != terminals {
        return Err(internal("terminal vertices differ from the first-entry tiles"));
    }
    if !t.contains_ball(&Word::identity(), m) {
        return Err(Error::Precondition(format!(
            "radius {n} is too small to contain the ball of radius {m} in the subgroup tree"
        )));
    }
    Ok(t)
}

/// `{z⁻¹xy ∈ Γ' : |x| = n, |xa| = n + 1, y ∈ P(a)}`, spelled over `A'`.
pub fn truncation_terminals_direct(fs: &FundamentalSubtree, z: &Word, n: usize) -> Result<BTreeSet<Word>> {
    let al = fs.alphabet();
    let p = compute_p(fs);
    let zi = al.inverse(z);
    let mut out = BTreeSet::new();
    for x in al.sphere(n) {
        for a in al.outward_letters(&x) {
            for (u, c) in &p[a.index()] {
                let y = al.mul(&al.inverse(u), fs.generator_word(*c));
                let g = al.mul3(&zi, &x, &y);
                if fs.automaton().contains(&g) {
                    out.insert(fs.decompose_left(&g)?.gamma_letters);
                }
            }
        }
    }
    Ok(out)
}
