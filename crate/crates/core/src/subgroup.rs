//! Finite-index subgroups of a free group.
//!
//! A subgroup is stored as its coset automaton: states are the cosets
//! `Γ'x`, reading a letter moves `Γ'x` to `Γ'xa`, and state 0 is `Γ'`
//! itself. From the automaton we build a fundamental subtree `D` (a
//! prefix-closed transversal with `𝒯 = ⊔ γ'D`) and the induced free basis
//! `A' = {a' : d(D, a'D) = 1}`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{input, internal, Error, Result};
use crate::fold::{self, TagPolicy};
use crate::words::{Alphabet, FiniteSubtree, Letter, Word};

/// Right action of the free group on the cosets of a finite-index subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetAutomaton {
    alphabet: Alphabet,
    /// `table[state][letter]`.
    table: Vec<Vec<usize>>,
}

impl CosetAutomaton {
    /// Folds the rose of `words`; the subgroup they generate has finite index
    /// exactly when the folded graph has every letter at every vertex.
    pub fn from_generators(al: &Alphabet, words: &[Word]) -> Result<Self> {
        for w in words {
            al.check_word(w)?;
            if al.reduce(w.letters()) != *w {
                return Err(input(format!("generator {} is not reduced", al.format_word(w))));
            }
        }
        let tagged: Vec<(Word, Word)> = words
            .iter()
            .map(|w| (w.clone(), Word::identity()))
            .collect();
        let (n, edges) = fold::rose(&tagged);
        let folded = fold::fold(al, al, n, edges, TagPolicy::Ignore)?;
        let table = folded.transition_table(al).ok_or_else(|| {
            Error::InfiniteIndex("the folded graph is missing edges".into())
        })?;
        Self::from_table(al, table)
    }

    /// Validates an explicit transition table (0-based states, base 0).
    pub fn from_table(al: &Alphabet, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(input("an automaton needs at least one state"));
        }
        for (s, row) in table.iter().enumerate() {
            if row.len() != al.size() {
                return Err(input(format!("state {s} has {} transitions", row.len())));
            }
            for l in al.letters() {
                let t = row[l.index()];
                if t >= n {
                    return Err(input(format!("state {s} moves to unknown state {t}")));
                }
                if table[t][al.inv(l).index()] != s {
                    return Err(input(format!(
                        "{} and {} are not inverse permutations",
                        al.name(l),
                        al.name(al.inv(l))
                    )));
                }
            }
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(s) = queue.pop_front() {
            for &t in &table[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(input("automaton is not connected from the base state"));
        }
        Ok(CosetAutomaton {
            alphabet: al.clone(),
            table,
        })
    }

    /// Builds the table from one permutation per letter. Letters whose
    /// inverse is listed may be omitted.
    pub fn from_permutations(al: &Alphabet, perms: &BTreeMap<Letter, Vec<usize>>) -> Result<Self> {
        let n = perms
            .values()
            .next()
            .map(Vec::len)
            .ok_or_else(|| input("no transitions given"))?;
        let mut table = vec![vec![usize::MAX; al.size()]; n];
        for (&l, p) in perms {
            if p.len() != n {
                return Err(input("permutations have different lengths"));
            }
            for (s, &t) in p.iter().enumerate() {
                if t >= n {
                    return Err(input(format!("state {t} out of range")));
                }
                for (from, letter, to) in [(s, l, t), (t, al.inv(l), s)] {
                    let slot = &mut table[from][letter.index()];
                    if *slot != usize::MAX && *slot != to {
                        return Err(input(format!("{} is not a permutation", al.name(l))));
                    }
                    *slot = to;
                }
            }
        }
        if table.iter().flatten().any(|&t| t == usize::MAX) {
            return Err(input("some letter has no transitions"));
        }
        Self::from_table(al, table)
    }

    /// The whole group.
    pub fn trivial(al: &Alphabet) -> Self {
        CosetAutomaton {
            alphabet: al.clone(),
            table: vec![vec![0; al.size()]],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn index(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn step(&self, s: usize, l: Letter) -> usize {
        self.table[s][l.index()]
    }

    /// State reached from the base by reading `w`.
    pub fn run(&self, w: &Word) -> usize {
        w.letters().iter().fold(0, |s, &l| self.step(s, l))
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.run(w) == 0
    }
}

/// `x = γ'·u` with `γ' ∈ Γ'` and `u ∈ D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftFactor {
    /// `γ'` as a word over `A`.
    pub gamma: Word,
    /// `γ'` spelled over `A'`.
    pub gamma_letters: Word,
    pub u: Word,
}

/// A fundamental subtree `D` with the induced generators `A'`.
#[derive(Clone, Debug)]
pub struct FundamentalSubtree {
    automaton: CosetAutomaton,
    /// `reps[state]`, the member of `D` in that coset.
    reps: Vec<Word>,
    /// `D` in shortlex order.
    d: Vec<Word>,
    generators: Alphabet,
    /// `γ'` for each letter of `A'`, as a word over `A`.
    gamma: Vec<Word>,
    contact: Vec<Word>,
    q: Vec<Letter>,
    /// `edge[state][letter]`: the `A'`-letter crossed by a non-tree edge.
    edge: Vec<Vec<Option<Letter>>>,
}

/// Shortlex search for `D`, then one induced generator per non-tree edge.
pub fn schreier_subtree(aut: &CosetAutomaton) -> Result<FundamentalSubtree> {
    let al = aut.alphabet().clone();
    let n = aut.index();
    let mut reps: Vec<Option<Word>> = vec![None; n];
    reps[0] = Some(Word::identity());
    let mut d = vec![Word::identity()];
    let mut queue = VecDeque::from([(Word::identity(), 0usize)]);
    while let Some((w, s)) = queue.pop_front() {
        for l in al.outward_letters(&w) {
            let t = aut.step(s, l);
            if reps[t].is_none() {
                let child = w.pushed(l);
                reps[t] = Some(child.clone());
                d.push(child.clone());
                queue.push_back((child, t));
            }
        }
    }
    let reps: Vec<Word> = reps
        .into_iter()
        .map(|r| r.ok_or_else(|| internal("automaton state unreachable")))
        .collect::<Result<_>>()?;
    d.sort();

    // Non-tree edges (u, a): u·a leaves D. Each one and its reverse give an
    // inverse pair of generators.
    let state_of: BTreeMap<&Word, usize> = reps.iter().enumerate().map(|(s, w)| (w, s)).collect();
    let mut pairs: Vec<((usize, Letter), (usize, Letter))> = Vec::new();
    let mut done = BTreeSet::new();
    for u in &d {
        let s = state_of[u];
        for a in al.letters() {
            let t = aut.step(s, a);
            if al.mul(u, &Word::letter(a)) == reps[t] || done.contains(&(s, a)) {
                continue;
            }
            done.insert((s, a));
            done.insert((t, al.inv(a)));
            pairs.push(((s, a), (t, al.inv(a))));
        }
    }
    let mut gamma = Vec::with_capacity(2 * pairs.len());
    let mut contact = Vec::with_capacity(2 * pairs.len());
    let mut q = Vec::with_capacity(2 * pairs.len());
    let mut names = Vec::new();
    let mut edges_of = Vec::new();
    // Generators first, then their inverses, as in the standard alphabets.
    for side in 0..2 {
        for p in &pairs {
            let (s, a) = if side == 0 { p.0 } else { p.1 };
            let t = aut.step(s, a);
            let x = reps[s].pushed(a);
            let g = al.mul(&x, &al.inverse(&reps[t]));
            names.push(format!("[{}]", al.format_word(&g)));
            gamma.push(g);
            contact.push(x);
            q.push(a);
            edges_of.push((s, a));
        }
    }
    let m = pairs.len();
    let inv_pairs: Vec<(String, String)> = (0..m).map(|i| (names[i].clone(), names[i + m].clone())).collect();
    let generators = if m == 0 {
        // Only possible for the trivial group, which has no letters at all.
        return Err(internal("a subgroup of a free group of positive rank has generators"));
    } else {
        Alphabet::with_involution(&names, &inv_pairs)?
    };
    let mut edge = vec![vec![None; al.size()]; n];
    for (i, &(s, a)) in edges_of.iter().enumerate() {
        edge[s][a.index()] = Some(Letter(i as u16));
    }
    let fs = FundamentalSubtree {
        automaton: aut.clone(),
        reps,
        d,
        generators,
        gamma,
        contact,
        q,
        edge,
    };
    fs.verify()?;
    Ok(fs)
}

impl FundamentalSubtree {
    pub fn automaton(&self) -> &CosetAutomaton {
        &self.automaton
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    pub fn index(&self) -> usize {
        self.automaton.index()
    }

    /// `D` in shortlex order.
    pub fn d(&self) -> &[Word] {
        &self.d
    }

    /// Position of `u` in [`Self::d`].
    pub fn d_position(&self, u: &Word) -> Option<usize> {
        self.d.binary_search(u).ok()
    }

    pub fn in_d(&self, u: &Word) -> bool {
        self.d_position(u).is_some()
    }

    /// The member of `D` in the coset `Γ'x`.
    pub fn representative(&self, x: &Word) -> &Word {
        &self.reps[self.automaton.run(x)]
    }

    /// The alphabet `A'` of induced generators.
    pub fn generators(&self) -> &Alphabet {
        &self.generators
    }

    /// `a'` as a word over `A`.
    pub fn generator_word(&self, a: Letter) -> &Word {
        &self.gamma[a.index()]
    }

    /// `x(a')`: the vertex of `a'D` closest to `D`.
    pub fn contact(&self, a: Letter) -> &Word {
        &self.contact[a.index()]
    }

    /// `q(a')`: the last letter of `x(a')`.
    pub fn q(&self, a: Letter) -> Letter {
        self.q[a.index()]
    }

    /// An `A'`-word as a word over `A`.
    pub fn expand(&self, w: &Word) -> Word {
        let letters: Vec<Letter> = w
            .letters()
            .iter()
            .flat_map(|l| self.gamma[l.index()].letters().iter().copied())
            .collect();
        self.alphabet().reduce(&letters)
    }

    /// Factors `x = γ'·u` by reading `x` through the Schreier graph; every
    /// non-tree edge crossed contributes one letter of `A'`.
    pub fn decompose_left(&self, x: &Word) -> Result<LeftFactor> {
        let al = self.alphabet();
        al.check_word(x)?;
        let mut s = 0;
        let mut spelled = Vec::new();
        for &l in x.letters() {
            if let Some(g) = self.edge[s][l.index()] {
                spelled.push(g);
            }
            s = self.automaton.step(s, l);
        }
        let gamma_letters = self.generators.reduce(&spelled);
        let u = self.reps[s].clone();
        let gamma = self.expand(&gamma_letters);
        if al.mul(&gamma, &u) != al.reduce(x.letters()) {
            return Err(internal(format!(
                "left factorization of {} does not multiply back",
                al.format_word(x)
            )));
        }
        Ok(LeftFactor {
            gamma,
            gamma_letters,
            u,
        })
    }

    /// `D' = D ∪ {x(a')}`: complete, with terminal vertices exactly the `x(a')`.
    pub fn complete_d(&self) -> Result<FiniteSubtree> {
        let al = self.alphabet();
        let t = FiniteSubtree::complete_subtree_of(
            al,
            self.d.iter().cloned().chain(self.contact.iter().cloned()),
        )
        .map_err(|e| internal(format!("D' is not complete: {e}")))?;
        let contacts: BTreeSet<Word> = self.contact.iter().cloned().collect();
        let d: BTreeSet<Word> = self.d.iter().cloned().collect();
        if t.terminal_vertices() != contacts || (self.d.len() > 1 && t.interior_vertices() != d) {
            return Err(internal("terminal vertices of D' are not the contact vertices"));
        }
        Ok(t)
    }

    fn verify(&self) -> Result<()> {
        let al = self.alphabet();
        if self.d.len() != self.index() {
            return Err(internal("|D| differs from the index"));
        }
        for u in &self.d {
            if !u.is_identity() && !self.in_d(&u.drop_last()?) {
                return Err(internal("D is not prefix-closed"));
            }
        }
        let expected = 1 + self.index() * (al.rank() - 1);
        if self.generators.rank() != expected {
            return Err(internal(format!(
                "induced rank {} differs from the Nielsen-Schreier rank {expected}",
                self.generators.rank()
            )));
        }
        for a in self.generators.letters() {
            let g = &self.gamma[a.index()];
            if !self.automaton.contains(g) {
                return Err(internal("induced generator outside the subgroup"));
            }
            if self.gamma[self.generators.inv(a).index()] != al.inverse(g) {
                return Err(internal("induced generators are not paired with inverses"));
            }
            let x = &self.contact[a.index()];
            for u in &self.d {
                if !x.is_prefix_of(&al.mul(g, u)) {
                    return Err(internal("a'D does not lie in the cone of x(a')"));
                }
            }
        }
        // x(γ'a') = γ'x(a') for all reduced pairs.
        for a in self.generators.letters() {
            for b in self.generators.letters() {
                if b == self.generators.inv(a) {
                    continue;
                }
                let ga = self.expand(&Word::letter(a).pushed(b));
                let closest = self
                    .d
                    .iter()
                    .map(|u| al.mul(&ga, u))
                    .min_by_key(|w| w.len())
                    .expect("D is nonempty");
                if closest != al.mul(&self.gamma[a.index()], &self.contact[b.index()]) {
                    return Err(internal("translation identity for contact vertices fails"));
                }
            }
        }
        Ok(())
    }
}
