//! Change of generators: transporting a system over an alphabet `A'` to a
//! system over another free basis `A` of the same group.
//!
//! A [`GeneratorMap`] writes every letter of `A'` as a word over `A`. Words
//! over `A'` are vertices of the tree `𝒯'`, words over `A` vertices of `𝒯`;
//! `C'(y)` and `C(z)` are the respective cones. The frontier `Y(z)` collects
//! the `A'`-words whose `A'`-cone first fits inside `C(z)`.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use crate::error::{input, internal, Error, Result};
use crate::fold::{self, TagPolicy};
use crate::linalg::{self, Mat};
use crate::multfunc::MultiplicativeFunction;
use crate::system::MatrixSystem;
use crate::words::{Alphabet, FiniteSubtree, Letter, Word};

/// Upper bound on frontier searches; far above anything a valid map needs.
const SEARCH_LIMIT: usize = 1_000_000;

/// An isomorphism `F(A') → F(A)` given by the images of the letters of `A'`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMap {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Word>,
    /// `contract[a]`: the letter `a ∈ A` spelled over `A'`.
    contract: Vec<Word>,
}

impl GeneratorMap {
    /// Validates the involution and checks, by folding, that the images form
    /// a free basis of `F(A)`.
    pub fn new(source: &Alphabet, target: &Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != source.size() {
            return Err(input("one image per source letter is required"));
        }
        for (alpha, img) in source.letters().zip(&images) {
            target.check_word(img)?;
            if img.is_identity() {
                return Err(input(format!("{} maps to the identity", source.name(alpha))));
            }
            if images[source.inv(alpha).index()] != target.inverse(img) {
                return Err(input(format!(
                    "image of {} is not the inverse of the image of {}",
                    source.name(source.inv(alpha)),
                    source.name(alpha)
                )));
            }
        }
        if source.size() != target.size() {
            return Err(Error::Precondition(format!(
                "a free basis of a rank-{} group needs {} letters, got {}",
                target.rank(),
                target.size(),
                source.size()
            )));
        }
        let gens: Vec<(Word, Word)> = source
            .positive_letters()
            .into_iter()
            .map(|alpha| (images[alpha.index()].clone(), Word::letter(alpha)))
            .collect();
        let (n, edges) = fold::rose(&gens);
        let folded = fold::fold(target, source, n, edges, TagPolicy::Strict)?;
        if folded.vertices != 1 {
            return Err(Error::Precondition(
                "the images do not generate the whole group".into(),
            ));
        }
        let contract = target
            .letters()
            .map(|a| {
                folded.base_loop_tag(target, source, a).ok_or_else(|| {
                    Error::Precondition("the images do not generate the whole group".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gm = GeneratorMap {
            source: source.clone(),
            target: target.clone(),
            images,
            contract,
        };
        for a in target.letters() {
            if gm.expand(&gm.contract[a.index()]) != Word::letter(a) {
                return Err(internal("folding produced an inconsistent inverse map"));
            }
        }
        Ok(gm)
    }

    /// Builds the map from images of one letter per inverse pair.
    pub fn from_positive_images(
        source: &Alphabet,
        target: &Alphabet,
        images: &[(Letter, Word)],
    ) -> Result<Self> {
        let mut all: Vec<Option<Word>> = vec![None; source.size()];
        for (alpha, w) in images {
            for (l, img) in [(*alpha, w.clone()), (source.inv(*alpha), target.inverse(w))] {
                if let Some(prev) = &all[l.index()] {
                    if *prev != img {
                        return Err(input(format!("conflicting images for {}", source.name(l))));
                    }
                }
                all[l.index()] = Some(img);
            }
        }
        let all = all
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or_else(|| input(format!("no image for {}", source.name(Letter(i as u16)))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, all)
    }

    /// The identity map of an alphabet onto itself.
    pub fn identity(al: &Alphabet) -> Self {
        let images = al.letters().map(Word::letter).collect();
        Self::new(al, al, images).expect("identity is a basis")
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn image(&self, alpha: Letter) -> &Word {
        &self.images[alpha.index()]
    }

    /// An `A'`-word as an `A`-word.
    pub fn expand(&self, w: &Word) -> Word {
        let letters: Vec<Letter> = w
            .letters()
            .iter()
            .flat_map(|l| self.images[l.index()].letters().iter().copied())
            .collect();
        self.target.reduce(&letters)
    }

    /// An `A`-word as an `A'`-word.
    pub fn contract(&self, w: &Word) -> Word {
        let letters: Vec<Letter> = w
            .letters()
            .iter()
            .flat_map(|l| self.contract[l.index()].letters().iter().copied())
            .collect();
        self.source.reduce(&letters)
    }

    /// `ℓ(A, A') = max_a |a|'`.
    pub fn stretch_to_source(&self) -> usize {
        self.contract.iter().map(Word::len).max().unwrap_or(0)
    }

    /// `ℓ(A', A) = max_α |α|`.
    pub fn stretch_to_target(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap_or(0)
    }

    /// `ℓ(A, A')·|w|`, an upper bound for the `A'`-length of an `A`-word.
    pub fn contract_length_bound(&self, w: &Word) -> usize {
        self.stretch_to_source() * w.len()
    }

    /// Words `z·s` in `C(z)` with `|s| < ℓ(A', A)`: the only places where an
    /// `A'`-edge can cross the boundary of `C(z)`.
    fn near_boundary(&self, z: &Word) -> Vec<Word> {
        let mut out = vec![z.clone()];
        let mut frontier = vec![z.clone()];
        for _ in 1..self.stretch_to_target() {
            let mut next = Vec::new();
            for u in &frontier {
                for l in self.target.outward_letters(u) {
                    next.push(u.pushed(l));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn outward_source_letters(&self, u: &Word) -> Vec<Letter> {
        self.source.outward_letters(u)
    }

    /// Decides `C'(y) ⊆ C(z)` exactly. An `A'`-cone lies in `C(z)` unless
    /// some outward `A'`-edge leaves `C(z)`, and such an edge must start
    /// within `ℓ(A', A) − 1` of `z` inside the cone.
    pub fn cone_included(&self, y: &Word, z: &Word) -> Result<bool> {
        if y.is_identity() || z.is_identity() {
            return Err(Error::Domain("cone_included needs y ≠ e and z ≠ e".into()));
        }
        self.source.check_word(y)?;
        self.target.check_word(z)?;
        Ok(self.included_unchecked(y, z))
    }

    fn included_unchecked(&self, y: &Word, z: &Word) -> bool {
        if !z.is_prefix_of(&self.expand(y)) {
            return false;
        }
        for u in self.near_boundary(z) {
            let up = self.contract(&u);
            if !y.is_prefix_of(&up) {
                continue;
            }
            for alpha in self.outward_source_letters(&up) {
                let step = self.target.mul(&u, &self.images[alpha.index()]);
                if !z.is_prefix_of(&step) {
                    return false;
                }
            }
        }
        true
    }

    /// `C'(w) ∩ C(z) ≠ ∅`.
    fn intersects(&self, w: &Word, z: &Word) -> bool {
        if z.is_prefix_of(&self.expand(w)) {
            return true;
        }
        self.near_boundary(z)
            .iter()
            .any(|u| w.is_prefix_of(&self.contract(u)))
    }

    /// The frontier `Y(z)`, members in shortlex order, each tagged.
    pub fn compute_y(&self, z: &Word) -> Result<YFrontier> {
        if z.is_identity() {
            return Err(Error::Domain("Y(z) needs z ≠ e".into()));
        }
        self.target.check_word(z)?;
        let mut members = Vec::new();
        let mut queue = VecDeque::from([Word::identity()]);
        let mut visited = 0usize;
        while let Some(w) = queue.pop_front() {
            visited += 1;
            if visited > SEARCH_LIMIT {
                return Err(internal("frontier search did not terminate"));
            }
            for alpha in self.source.outward_letters(&w) {
                let child = w.pushed(alpha);
                if self.included_unchecked(&child, z) {
                    let tag = if self
                        .target
                        .outward_letters(z)
                        .into_iter()
                        .any(|b| self.included_unchecked(&child, &z.pushed(b)))
                    {
                        YTag::Y1
                    } else {
                        YTag::Y0
                    };
                    members.push((child, tag));
                } else if self.intersects(&child, z) {
                    queue.push_back(child);
                }
            }
        }
        members.sort_by(|x, y| x.0.cmp(&y.0));
        Ok(YFrontier {
            z: z.clone(),
            members,
        })
    }

    /// `(y)~_z`: the first vertex on `[e, y]'` whose `A'`-cone lies in `C(z)`.
    pub fn first_inclusion(&self, y: &Word, z: &Word) -> Option<Word> {
        (1..=y.len())
            .map(|k| y.prefix(k))
            .find(|p| self.included_unchecked(p, z))
    }

    /// The finite complete subtree `{w̄} ∪ I'_w ∪ T'_w` of `𝒯'` attached to
    /// `w ∈ Y₀(a)`.
    pub fn pruned_subtree(&self, w: &Word, a: Letter) -> Result<FiniteSubtree> {
        let za = Word::letter(a);
        let fr = self.compute_y(&za)?;
        if fr.tag_of(w) != Some(YTag::Y0) {
            return Err(Error::Precondition(format!(
                "{} is not in Y₀({})",
                self.source.format_word(w),
                self.target.name(a)
            )));
        }
        let zab: Vec<Word> = self
            .target
            .outward_letters(&za)
            .into_iter()
            .map(|b| za.pushed(b))
            .collect();
        let mut verts = BTreeSet::from([w.drop_last()?]);
        let mut queue = VecDeque::from([w.clone()]);
        while let Some(y) = queue.pop_front() {
            if verts.len() > SEARCH_LIMIT {
                return Err(internal("pruned subtree search did not terminate"));
            }
            verts.insert(y.clone());
            if zab.iter().any(|z| self.included_unchecked(&y, z)) {
                continue;
            }
            for alpha in self.source.outward_letters(&y) {
                queue.push_back(y.pushed(alpha));
            }
        }
        FiniteSubtree::complete_subtree_of(&self.source, verts)
    }

    /// Builds the system over `A` realizing the representation of `sys` over `A'`.
    pub fn transport_system(&self, sys: &MatrixSystem) -> Result<TransportedSystem> {
        if sys.alphabet() != &self.source {
            return Err(Error::Mismatch("system is not over the source alphabet".into()));
        }
        let defect = sys.compatibility_defect();
        if defect > 1e-8 * sys.form_scale().max(1.0) {
            return Err(Error::Precondition(format!(
                "input system is not compatible (defect {defect:e})"
            )));
        }
        let al = self.target.clone();
        let frontiers = al
            .letters()
            .map(|a| self.compute_y(&Word::letter(a)))
            .collect::<Result<Vec<_>>>()?;
        let block_dim = |y: &Word| sys.dim(y.last_letter().expect("frontier words are nonempty"));
        let mut offsets = Vec::with_capacity(al.size());
        let mut dims = Vec::with_capacity(al.size());
        for fr in &frontiers {
            let mut off = Vec::with_capacity(fr.members.len());
            let mut acc = 0;
            for (y, _) in &fr.members {
                off.push(acc);
                acc += block_dim(y);
            }
            offsets.push(off);
            dims.push(acc);
        }

        let mut h: Vec<Mat> = Vec::with_capacity(al.size() * al.size());
        let mut hit: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); al.size()];
        for b in al.letters() {
            for a in al.letters() {
                let mut m = linalg::zeros(dims[b.index()], dims[a.index()]);
                if al.inv(a) != b {
                    let ya = &frontiers[a.index()];
                    for (zi, (z, _)) in frontiers[b.index()].members.iter().enumerate() {
                        let az = self.source.mul(&self.contract[a.index()], z);
                        let w = self.first_inclusion(&az, &Word::letter(a)).ok_or_else(|| {
                            internal("a translated frontier word never enters C(a)")
                        })?;
                        let wi = ya.position(&w).ok_or_else(|| {
                            internal("first inclusion vertex is not in the frontier")
                        })?;
                        hit[a.index()].insert(wi);
                        let tail = az.suffix_from(w.len());
                        if !w.is_prefix_of(&az) {
                            return Err(internal("first inclusion vertex is not a prefix"));
                        }
                        let mut block = linalg::eye(sys.dim(w.last_letter()?));
                        let mut prev = w.last_letter()?;
                        for &next in tail.letters() {
                            block = sys.h(next, prev) * block;
                            prev = next;
                        }
                        if z.last_letter()? != prev {
                            return Err(internal("last letters of az and z differ"));
                        }
                        let (r0, c0) = (offsets[b.index()][zi], offsets[a.index()][wi]);
                        m.view_mut((r0, c0), block.shape()).copy_from(&block);
                    }
                }
                h.push(m);
            }
        }
        // Every member of Y(a) must arise from some translated frontier.
        for a in al.letters() {
            if hit[a.index()].len() != frontiers[a.index()].members.len() {
                return Err(internal(format!(
                    "frontier partition fails at {}",
                    al.name(a)
                )));
            }
        }
        let forms = al
            .letters()
            .map(|a| {
                let blocks: Vec<&Mat> = frontiers[a.index()]
                    .members
                    .iter()
                    .map(|(y, _)| sys.form(y.last_letter().expect("nonempty")))
                    .collect();
                linalg::block_diag(&blocks)
            })
            .collect();
        let n = al.size();
        let system = MatrixSystem::new(&al, dims, |b, a| h[b.index() * n + a.index()].clone(), forms)?;
        Ok(TransportedSystem {
            map: self.clone(),
            source_system: Arc::new(sys.clone()),
            system: Arc::new(system),
            frontiers,
            offsets,
        })
    }
}

/// Whether a frontier member's cone already fits in some `C(zb)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YTag {
    Y0,
    Y1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct YFrontier {
    pub z: Word,
    pub members: Vec<(Word, YTag)>,
}

impl YFrontier {
    pub fn words(&self) -> Vec<Word> {
        self.members.iter().map(|(w, _)| w.clone()).collect()
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.members.iter().position(|(m, _)| m == w)
    }

    pub fn tag_of(&self, w: &Word) -> Option<YTag> {
        self.members.iter().find(|(m, _)| m == w).map(|(_, t)| *t)
    }
}

/// The transported system together with the data needed for the intertwiner.
#[derive(Clone, Debug)]
pub struct TransportedSystem {
    pub map: GeneratorMap,
    pub source_system: Arc<MatrixSystem>,
    pub system: Arc<MatrixSystem>,
    /// `Y(a)` for each letter `a` of the target alphabet.
    pub frontiers: Vec<YFrontier>,
    offsets: Vec<Vec<usize>>,
}

impl TransportedSystem {
    /// Smallest depth `M` such that every `x(a)` with `|xa| = M` reads
    /// `f` only where it is already multiplicative.
    fn output_depth(&self, n: usize) -> Result<usize> {
        let al = self.map.target();
        for m in 1..=64 {
            let ok = al.sphere(m - 1).iter().all(|x| {
                al.outward_letters(x).into_iter().all(|a| {
                    let xp = self.map.contract(x);
                    self.frontiers[a.index()]
                        .members
                        .iter()
                        .all(|(z, _)| self.map.source().mul(&xp, z).len() >= n)
                })
            });
            if ok {
                return Ok(m);
            }
            if al.sphere_len(m) > crate::multfunc::DEFAULT_SPHERE_CAP {
                break;
            }
        }
        Err(Error::DepthOverflow {
            depth: 64,
            needed: usize::MAX,
            cap: crate::multfunc::DEFAULT_SPHERE_CAP,
        })
    }

    /// `(Uf)(xa)` has block `f(x·z)` at `z ∈ Y(a)`, with `x` spelled over `A'`.
    pub fn intertwine(&self, f: &MultiplicativeFunction) -> Result<MultiplicativeFunction> {
        if **f.system() != *self.source_system {
            return Err(Error::Mismatch("function is not over the source system".into()));
        }
        let m = self.output_depth(f.depth())?;
        let al = self.map.target().clone();
        let mut values = Vec::with_capacity(al.sphere_len(m));
        for w in al.sphere(m) {
            let a = w.last_letter()?;
            let xp = self.map.contract(&w.drop_last()?);
            let mut v = linalg::Vector::zeros(self.system.dim(a));
            for ((z, _), &off) in self.frontiers[a.index()]
                .members
                .iter()
                .zip(&self.offsets[a.index()])
            {
                let val = f.evaluate(&self.map.source().mul(&xp, z))?;
                v.rows_mut(off, val.len()).copy_from(&val);
            }
            values.push(v);
        }
        MultiplicativeFunction::new(self.system.clone(), m, values)
    }
}
