//! Freely reduced words and the combinatorics of the Cayley tree.
//!
//! An [`Alphabet`] is a symmetric generating set `A = A⁻¹` with a
//! fixed-point-free involution. Words are plain letter sequences kept in
//! reduced form; every operation that takes a word also takes the alphabet
//! so that inverses can be looked up. Vertices of the Cayley tree are
//! reduced words, `|x|` is the distance to the identity and the cone `C(x)`
//! is the set of words that have `x` as a prefix.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{input, Error, Result};

/// Index of a letter in its alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u16);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A reduced word. Ordering is shortlex (length first, then letter indices),
/// which is also the breadth-first order of the Cayley tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    /// The identity `e`.
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Last letter `t(x)`.
    pub fn last_letter(&self) -> Result<Letter> {
        self.0
            .last()
            .copied()
            .ok_or_else(|| Error::Domain("the identity has no last letter".into()))
    }

    /// `x̄`: the word with its last letter removed. `ā = e` for a letter `a`.
    pub fn drop_last(&self) -> Result<Word> {
        if self.0.is_empty() {
            return Err(Error::Domain("cannot drop the last letter of the identity".into()));
        }
        Ok(Word(self.0[..self.0.len() - 1].to_vec()))
    }

    /// First `n` letters.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Letters after the first `n`.
    pub fn suffix_from(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    /// `self ∈ [e, y]`, i.e. `y ∈ C(self)`.
    pub fn is_prefix_of(&self, y: &Word) -> bool {
        y.0.len() >= self.0.len() && y.0[..self.0.len()] == self.0[..]
    }

    /// Appends a letter without reducing. Callers guarantee the result is
    /// reduced; used by tree enumeration on outward edges.
    pub(crate) fn pushed(&self, l: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }
}

/// `y ∈ C(z)`.
pub fn cone_contains(z: &Word, y: &Word) -> bool {
    z.is_prefix_of(y)
}

#[derive(Debug, PartialEq, Eq)]
struct AlphabetInner {
    names: Vec<String>,
    inv: Vec<Letter>,
    lookup: HashMap<String, Letter>,
}

/// A symmetric set of free generators together with its involution.
///
/// Cheap to clone; equality compares names and the involution table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet(Arc<AlphabetInner>);

fn swap_case(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_lowercase() {
                c.to_uppercase().next().unwrap_or(c)
            } else if c.is_uppercase() {
                c.to_lowercase().next().unwrap_or(c)
            } else {
                c
            }
        })
        .collect()
}

impl Alphabet {
    /// Builds an alphabet from letter names and an explicit involution given
    /// as name pairs. Every letter must appear in exactly one pair with a
    /// different letter.
    pub fn with_involution(names: &[String], pairs: &[(String, String)]) -> Result<Self> {
        let mut lookup = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(input("empty letter name"));
            }
            if lookup.insert(n.clone(), Letter(i as u16)).is_some() {
                return Err(input(format!("duplicate letter {n:?}")));
            }
        }
        if names.is_empty() || !names.len().is_multiple_of(2) {
            return Err(input(format!(
                "alphabet must have a positive even number of letters, got {}",
                names.len()
            )));
        }
        if names.len() > u16::MAX as usize {
            return Err(input("alphabet too large"));
        }
        let mut inv: Vec<Option<Letter>> = vec![None; names.len()];
        let get = |n: &str| {
            lookup
                .get(n)
                .copied()
                .ok_or_else(|| input(format!("involution mentions unknown letter {n:?}")))
        };
        for (x, y) in pairs {
            let (lx, ly) = (get(x)?, get(y)?);
            if lx == ly {
                return Err(input(format!("letter {x:?} cannot be its own inverse")));
            }
            for (p, q) in [(lx, ly), (ly, lx)] {
                match inv[p.index()] {
                    Some(prev) if prev != q => {
                        return Err(input(format!(
                            "letter {:?} has two inverses",
                            names[p.index()]
                        )))
                    }
                    _ => inv[p.index()] = Some(q),
                }
            }
        }
        let inv = inv
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| input(format!("letter {:?} has no inverse", names[i]))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Alphabet(Arc::new(AlphabetInner {
            names: names.to_vec(),
            inv,
            lookup,
        })))
    }

    /// Builds an alphabet pairing each name with its case-swapped version
    /// (`a` ↔ `A`). Fails if some letter has no partner in the list.
    pub fn from_names(names: &[String]) -> Result<Self> {
        let set: BTreeSet<&String> = names.iter().collect();
        let mut pairs = Vec::new();
        for n in names {
            let s = swap_case(n);
            if s == *n || !set.contains(&s) {
                return Err(input(format!(
                    "letter {n:?} has no case-swapped partner; give an explicit involution"
                )));
            }
            pairs.push((n.clone(), s));
        }
        Self::with_involution(names, &pairs)
    }

    /// Free alphabet on `rank` generators named `a, b, c, …` with inverses
    /// `A, B, C, …`, ordered generators first.
    pub fn standard(rank: usize) -> Self {
        assert!((1..=26).contains(&rank), "standard alphabets have rank 1..=26");
        let lower: Vec<String> = (0..rank)
            .map(|i| ((b'a' + i as u8) as char).to_string())
            .collect();
        let names: Vec<String> = lower
            .iter()
            .cloned()
            .chain(lower.iter().map(|s| s.to_uppercase()))
            .collect();
        Self::from_names(&names).expect("standard alphabet is well formed")
    }

    /// Alphabet whose letters are `names[i]` paired with `inv_names[i]`,
    /// ordered `names[0], inv_names[0], names[1], …`.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let names: Vec<String> = pairs
            .iter()
            .flat_map(|(p, q)| [p.clone(), q.clone()])
            .collect();
        Self::with_involution(&names, pairs)
    }

    pub fn size(&self) -> usize {
        self.0.names.len()
    }

    /// Rank of the free group, `|A| / 2`.
    pub fn rank(&self) -> usize {
        self.size() / 2
    }

    /// Tree degree minus one: `q = |A| - 1`.
    pub fn q(&self) -> usize {
        self.size() - 1
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.size()).map(|i| Letter(i as u16))
    }

    /// One letter from each inverse pair (the first in alphabet order).
    pub fn positive_letters(&self) -> Vec<Letter> {
        self.letters()
            .filter(|l| l.index() < self.inv(*l).index())
            .collect()
    }

    pub fn inv(&self, l: Letter) -> Letter {
        self.0.inv[l.index()]
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.0.names[l.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.0
            .lookup
            .get(name)
            .copied()
            .ok_or_else(|| input(format!("unknown letter {name:?}")))
    }

    fn single_char_names(&self) -> bool {
        self.0.names.iter().all(|n| n.chars().count() == 1)
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if let Some(l) = w.0.iter().find(|l| l.index() >= self.size()) {
            return Err(Error::Mismatch(format!(
                "letter index {} outside alphabet of size {}",
                l.0,
                self.size()
            )));
        }
        Ok(())
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(&self, letters: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last().is_some_and(|&p| self.inv(p) == l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Reduces after checking that every letter belongs to the alphabet.
    pub fn reduce_checked(&self, letters: &[Letter]) -> Result<Word> {
        if let Some(l) = letters.iter().find(|l| l.index() >= self.size()) {
            return Err(input(format!("letter index {} not in alphabet", l.0)));
        }
        Ok(self.reduce(letters))
    }

    pub fn mul(&self, x: &Word, y: &Word) -> Word {
        let mut k = 0;
        let (xs, ys) = (&x.0, &y.0);
        while k < xs.len() && k < ys.len() && self.inv(xs[xs.len() - 1 - k]) == ys[k] {
            k += 1;
        }
        let mut v = Vec::with_capacity(xs.len() + ys.len() - 2 * k);
        v.extend_from_slice(&xs[..xs.len() - k]);
        v.extend_from_slice(&ys[k..]);
        Word(v)
    }

    pub fn mul3(&self, x: &Word, y: &Word, z: &Word) -> Word {
        self.mul(&self.mul(x, y), z)
    }

    /// `multiply` with the alphabet check.
    pub fn multiply(&self, x: &Word, y: &Word) -> Result<Word> {
        self.check_word(x)?;
        self.check_word(y)?;
        Ok(self.mul(x, y))
    }

    pub fn inverse(&self, x: &Word) -> Word {
        Word(x.0.iter().rev().map(|&l| self.inv(l)).collect())
    }

    /// `xy` when `xC(y) = C(xy)`, `None` when the translate is not a cone
    /// (exactly when `y` lies on the geodesic `[e, x⁻¹]`).
    pub fn translate_cone(&self, x: &Word, y: &Word) -> Result<Option<Word>> {
        let xy = self.mul(x, y);
        if xy.is_identity() {
            return Err(Error::Domain("translate_cone requires xy ≠ e".into()));
        }
        if y.is_prefix_of(&self.inverse(x)) {
            Ok(None)
        } else {
            Ok(Some(xy))
        }
    }

    /// Vertices of the geodesic from `x` to `y`, both included.
    pub fn geodesic(&self, x: &Word, y: &Word) -> Vec<Word> {
        let step = self.mul(&self.inverse(x), y);
        let mut out = Vec::with_capacity(step.len() + 1);
        let mut cur = x.clone();
        out.push(cur.clone());
        for &l in &step.0 {
            cur = self.mul(&cur, &Word::letter(l));
            out.push(cur.clone());
        }
        out
    }

    pub fn distance(&self, x: &Word, y: &Word) -> usize {
        self.mul(&self.inverse(x), y).len()
    }

    /// The `|A|` neighbours of `x` in the Cayley tree.
    pub fn neighbours(&self, x: &Word) -> Vec<Word> {
        self.letters()
            .map(|l| self.mul(x, &Word::letter(l)))
            .collect()
    }

    /// Letters `b` with `|xb| = |x| + 1`.
    pub fn outward_letters(&self, x: &Word) -> Vec<Letter> {
        match x.0.last() {
            None => self.letters().collect(),
            Some(&t) => {
                let ti = self.inv(t);
                self.letters().filter(|&l| l != ti).collect()
            }
        }
    }

    /// Number of words of length `n`.
    pub fn sphere_len(&self, n: usize) -> usize {
        if n == 0 {
            1
        } else {
            let m = self.size();
            m.saturating_mul((m - 1).saturating_pow(n as u32 - 1))
        }
    }

    /// Position of a word in the lexicographic enumeration of its sphere.
    pub fn sphere_index(&self, w: &Word) -> usize {
        let m = self.size();
        let mut idx = 0usize;
        let mut prev: Option<Letter> = None;
        for &l in &w.0 {
            idx = match prev {
                None => l.index(),
                Some(p) => {
                    let skip = self.inv(p).index();
                    let d = if l.index() > skip { l.index() - 1 } else { l.index() };
                    idx * (m - 1) + d
                }
            };
            prev = Some(l);
        }
        idx
    }

    /// All words of length exactly `n`, in lexicographic order.
    pub fn sphere(&self, n: usize) -> Vec<Word> {
        let mut level = vec![Word::identity()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.size());
            for w in &level {
                for l in self.outward_letters(w) {
                    next.push(w.pushed(l));
                }
            }
            level = next;
        }
        level
    }

    /// All words of length at most `n`, in shortlex order.
    pub fn words_up_to(&self, n: usize) -> Vec<Word> {
        (0..=n).flat_map(|k| self.sphere(k)).collect()
    }

    /// `B(center, n)`.
    pub fn ball(&self, center: &Word, n: usize) -> FiniteSubtree {
        let vertices = self
            .words_up_to(n)
            .into_iter()
            .map(|w| self.mul(center, &w))
            .collect();
        FiniteSubtree {
            alphabet: self.clone(),
            vertices,
        }
    }

    /// Parses a word. Single-character alphabets are read character by
    /// character; otherwise letters are separated by `.` or whitespace.
    /// `e` and the empty string denote the identity unless `e` is a letter.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || (s == "e" && !self.0.lookup.contains_key("e")) {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        if self.single_char_names() {
            for c in s.chars().filter(|c| !c.is_whitespace() && *c != '.') {
                letters.push(self.letter(&c.to_string())?);
            }
        } else {
            for tok in s.split(|c: char| c == '.' || c.is_whitespace()) {
                if !tok.is_empty() {
                    letters.push(self.letter(tok)?);
                }
            }
        }
        Ok(self.reduce(&letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_identity() {
            return "e".into();
        }
        let parts: Vec<&str> = w.0.iter().map(|&l| self.name(l)).collect();
        if self.single_char_names() {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    /// Convenience for tests and fixtures: parse or panic.
    pub fn w(&self, s: &str) -> Word {
        self.parse_word(s)
            .unwrap_or_else(|e| panic!("bad word {s:?}: {e}"))
    }

    /// Builds a word from raw letter indices, reducing.
    pub fn word_from_indices(&self, idx: &[u16]) -> Result<Word> {
        let letters: Vec<Letter> = idx.iter().map(|&i| Letter(i)).collect();
        self.reduce_checked(&letters)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.names.join(", "))
    }
}

/// A finite connected set of tree vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSubtree {
    alphabet: Alphabet,
    vertices: BTreeSet<Word>,
}

impl FiniteSubtree {
    /// Builds a subtree, checking that the vertex set is nonempty and connected.
    pub fn new(alphabet: &Alphabet, vertices: impl IntoIterator<Item = Word>) -> Result<Self> {
        let vertices: BTreeSet<Word> = vertices.into_iter().collect();
        for v in &vertices {
            alphabet.check_word(v)?;
        }
        let t = FiniteSubtree {
            alphabet: alphabet.clone(),
            vertices,
        };
        if t.vertices.is_empty() {
            return Err(input("a subtree needs at least one vertex"));
        }
        if !t.is_connected() {
            return Err(input("vertex set is not connected"));
        }
        Ok(t)
    }

    /// Builds a subtree and requires it to be complete.
    pub fn complete_subtree_of(
        alphabet: &Alphabet,
        vertices: impl IntoIterator<Item = Word>,
    ) -> Result<Self> {
        let t = Self::new(alphabet, vertices)?;
        if !t.is_complete() {
            return Err(Error::Precondition("subtree is not complete".into()));
        }
        Ok(t)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertices(&self) -> &BTreeSet<Word> {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.vertices.contains(w)
    }

    fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some(v) = queue.pop_front() {
            for n in self.alphabet.neighbours(&v) {
                if self.vertices.contains(&n) && seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Number of neighbours of `v` inside the subtree.
    pub fn relative_degree(&self, v: &Word) -> usize {
        self.alphabet
            .neighbours(v)
            .iter()
            .filter(|n| self.vertices.contains(*n))
            .count()
    }

    /// Every vertex has relative degree 1 or `q + 1`.
    pub fn is_complete(&self) -> bool {
        let full = self.alphabet.size();
        self.vertices.len() >= 2
            && self.vertices.iter().all(|v| {
                let d = self.relative_degree(v);
                d == 1 || d == full
            })
    }

    pub fn is_nonelementary(&self) -> bool {
        self.vertices.len() >= 2
    }

    /// `T(𝒳)`: vertices of relative degree 1.
    pub fn terminal_vertices(&self) -> BTreeSet<Word> {
        self.vertices
            .iter()
            .filter(|v| self.relative_degree(v) == 1)
            .cloned()
            .collect()
    }

    pub fn interior_vertices(&self) -> BTreeSet<Word> {
        self.vertices
            .iter()
            .filter(|v| self.relative_degree(v) != 1)
            .cloned()
            .collect()
    }

    /// `(x̄_e, x_e)`: the vertex closest to `e` and its unique neighbour in
    /// the subtree. Requires a complete nonelementary subtree in which `e` is
    /// not interior.
    pub fn based_root(&self) -> Result<(Word, Word)> {
        if !self.is_complete() {
            return Err(Error::Precondition("based_root needs a complete subtree".into()));
        }
        let root = self
            .vertices
            .iter()
            .next()
            .cloned()
            .expect("complete subtrees are nonempty");
        if self.relative_degree(&root) != 1 {
            return Err(Error::Precondition(
                "the identity is an interior vertex of the subtree".into(),
            ));
        }
        let x_e = self
            .alphabet
            .neighbours(&root)
            .into_iter()
            .find(|n| self.vertices.contains(n))
            .expect("terminal vertex has one neighbour");
        Ok((root, x_e))
    }

    /// `T_e(𝒳) = T(𝒳) ∖ {x̄_e}`.
    pub fn terminal_vertices_except_root(&self) -> Result<BTreeSet<Word>> {
        let (root, _) = self.based_root()?;
        let mut t = self.terminal_vertices();
        t.remove(&root);
        Ok(t)
    }

    /// Adds every neighbour of the terminal vertex `v` not yet present,
    /// which keeps a complete subtree complete.
    pub fn expand_terminal(&mut self, v: &Word) -> Result<()> {
        if !self.vertices.contains(v) || self.relative_degree(v) != 1 {
            return Err(Error::Precondition(format!(
                "{} is not a terminal vertex",
                self.alphabet.format_word(v)
            )));
        }
        for n in self.alphabet.neighbours(v) {
            self.vertices.insert(n);
        }
        Ok(())
    }

    pub fn contains_ball(&self, center: &Word, n: usize) -> bool {
        self.alphabet
            .ball(center, n)
            .vertices
            .iter()
            .all(|v| self.vertices.contains(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Alphabet {
        Alphabet::standard(2)
    }

    #[test]
    fn reduce_examples() {
        let a = f2();
        let (la, lb) = (a.letter("a").unwrap(), a.letter("b").unwrap());
        let (ia, ib) = (a.inv(la), a.inv(lb));
        assert!(a.reduce(&[la, ia]).is_identity());
        assert_eq!(a.reduce(&[la, lb, ib, la]), a.w("aa"));
        assert_eq!(a.reduce(&[la]), a.w("a"));
        assert!(a.reduce_checked(&[Letter(9)]).is_err());
        assert!(a.parse_word("ax").is_err());
    }

    #[test]
    fn multiply_and_inverse() {
        let a = f2();
        assert_eq!(a.mul(&a.w("ab"), &a.w("B")), a.w("a"));
        assert_eq!(a.inverse(&a.w("ab")), a.w("BA"));
        let x = a.w("abAB");
        assert!(a.mul(&x, &a.inverse(&x)).is_identity());
    }

    #[test]
    fn last_letter_and_drop() {
        let a = f2();
        assert_eq!(a.w("ab").last_letter().unwrap(), a.letter("b").unwrap());
        assert_eq!(a.w("ab").drop_last().unwrap(), a.w("a"));
        assert!(a.w("a").drop_last().unwrap().is_identity());
        assert!(Word::identity().last_letter().is_err());
        assert!(Word::identity().drop_last().is_err());
    }

    #[test]
    fn cones() {
        let a = f2();
        assert!(cone_contains(&a.w("a"), &a.w("ab")));
        assert!(!cone_contains(&a.w("a"), &a.w("ba")));
        assert!(cone_contains(&Word::identity(), &a.w("bAB")));
    }

    #[test]
    fn translate_cone_examples() {
        let a = f2();
        assert_eq!(a.translate_cone(&a.w("a"), &a.w("b")).unwrap(), Some(a.w("ab")));
        // b⁻¹ lies on [e, (ab)⁻¹] = [e, b⁻¹a⁻¹]
        assert_eq!(a.translate_cone(&a.w("ab"), &a.w("B")).unwrap(), None);
        assert_eq!(a.translate_cone(&Word::identity(), &a.w("a")).unwrap(), Some(a.w("a")));
        assert!(a.translate_cone(&a.w("a"), &a.w("A")).is_err());
    }

    #[test]
    fn geodesic_ball_sphere() {
        let a = f2();
        assert_eq!(
            a.geodesic(&Word::identity(), &a.w("ab")),
            vec![Word::identity(), a.w("a"), a.w("ab")]
        );
        assert_eq!(a.ball(&Word::identity(), 1).len(), 5);
        assert_eq!(a.sphere(2).len(), 12);
        for n in 0..5 {
            let expected = if n == 0 { 1 } else { 1 + 4 * (3usize.pow(n) - 1) / 2 };
            assert_eq!(a.ball(&Word::identity(), n as usize).len(), expected);
        }
    }

    #[test]
    fn sphere_index_matches_enumeration() {
        let a = Alphabet::standard(3);
        for n in 1..4 {
            for (i, w) in a.sphere(n).iter().enumerate() {
                assert_eq!(a.sphere_index(w), i);
            }
            assert_eq!(a.sphere(n).len(), a.sphere_len(n));
        }
    }

    #[test]
    fn complete_subtrees() {
        let a = f2();
        let e = Word::identity();
        let ball = a.ball(&e, 2);
        assert!(ball.is_complete());
        let sphere: BTreeSet<Word> = a.sphere(2).into_iter().collect();
        assert_eq!(ball.terminal_vertices(), sphere);

        let based = a.ball(&a.w("a"), 1);
        let (root, x_e) = based.based_root().unwrap();
        assert_eq!(root, e);
        assert_eq!(x_e, a.w("a"));
        assert_eq!(based.terminal_vertices_except_root().unwrap().len(), 3);

        let edge = FiniteSubtree::complete_subtree_of(&a, [e.clone(), a.w("a")]).unwrap();
        assert_eq!(
            edge.terminal_vertices(),
            [e.clone(), a.w("a")].into_iter().collect()
        );

        assert!(FiniteSubtree::complete_subtree_of(&a, [e.clone(), a.w("a"), a.w("b")]).is_err());
        assert!(FiniteSubtree::new(&a, [e.clone(), a.w("ab")]).is_err());
        // e interior
        assert!(ball.based_root().is_err());
    }

    #[test]
    fn alphabet_validation() {
        let names: Vec<String> = ["a", "b", "A"].iter().map(|s| s.to_string()).collect();
        assert!(Alphabet::from_names(&names).is_err());
        let names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        assert!(Alphabet::from_names(&names).is_err());
        let pairs = vec![("x".to_string(), "y".to_string())];
        let al = Alphabet::with_involution(&names, &pairs).unwrap();
        assert_eq!(al.inv(Letter(0)), Letter(1));
        let bad = vec![("x".to_string(), "x".to_string())];
        assert!(Alphabet::with_involution(&names, &bad).is_err());
    }

    #[test]
    fn multi_char_names_round_trip() {
        let al = Alphabet::from_pairs(&[
            ("alpha".into(), "ALPHA".into()),
            ("beta".into(), "BETA".into()),
        ])
        .unwrap();
        let w = al.parse_word("alpha.beta.BETA.ALPHA.beta").unwrap();
        assert_eq!(al.format_word(&w), "beta");
        assert_eq!(al.parse_word(&al.format_word(&w)).unwrap(), w);
    }
}
