//! Stallings folding of letter-labelled graphs.
//!
//! Every edge carries a letter of the ambient alphabet and a tag, an element
//! of a second free group. Closed paths at the base vertex keep their tag
//! product through every fold, so after folding a rose of generators the
//! loop tags spell each letter in terms of the generators.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

#[derive(Clone, Debug)]
pub(crate) struct Edge {
    pub from: usize,
    pub to: usize,
    pub letter: Letter,
    pub tag: Word,
}

/// A folded graph: vertex 0 is the base; every vertex has at most one
/// outgoing half-edge per letter.
#[derive(Clone, Debug)]
pub(crate) struct Folded {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

/// How to treat two parallel edges with the same letter but different tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TagPolicy {
    /// Differing tags witness a relation among the generators: error.
    Strict,
    /// Tags are bookkeeping only; keep one edge.
    Ignore,
}

/// The rose of the given words: one loop at the base per word, subdivided
/// into letter edges. The first edge of each loop carries the word's tag.
pub(crate) fn rose(words: &[(Word, Word)]) -> (usize, Vec<Edge>) {
    let mut n = 1;
    let mut edges = Vec::new();
    for (w, tag) in words {
        let letters = w.letters();
        if letters.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                0
            } else {
                n += 1;
                n - 1
            };
            edges.push(Edge {
                from: cur,
                to: next,
                letter: l,
                tag: if i == 0 { tag.clone() } else { Word::identity() },
            });
            cur = next;
        }
    }
    (n, edges)
}

/// Half-edge seen from `v`: (target, tag) read along the letter.
fn half_edges(al: &Alphabet, tags: &Alphabet, edges: &[Option<Edge>], v: usize, l: Letter) -> Vec<(usize, usize, Word)> {
    let mut out = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let Some(e) = e else { continue };
        if e.from == v && e.letter == l {
            out.push((i, e.to, e.tag.clone()));
        } else if e.to == v && al.inv(e.letter) == l {
            out.push((i, e.from, tags.inverse(&e.tag)));
        }
    }
    out
}

pub(crate) fn fold(
    al: &Alphabet,
    tags: &Alphabet,
    vertices: usize,
    edges: Vec<Edge>,
    policy: TagPolicy,
) -> Result<Folded> {
    let mut edges: Vec<Option<Edge>> = edges.into_iter().map(Some).collect();
    let mut alive = vec![true; vertices];
    'outer: loop {
        for v in 0..vertices {
            if !alive[v] {
                continue;
            }
            for l in al.letters() {
                let hs = half_edges(al, tags, &edges, v, l);
                if hs.len() < 2 {
                    continue;
                }
                let (i1, x, t1) = hs[0].clone();
                let (i2, y, t2) = hs[1].clone();
                if x == y {
                    if t1 != t2 && policy == TagPolicy::Strict {
                        return Err(Error::Precondition(
                            "the words satisfy a relation and are not a free basis".into(),
                        ));
                    }
                    // Drop the second edge (for a loop both half-edges may be
                    // the same edge; then the tags agree and nothing changes).
                    if i1 != i2 {
                        edges[i2] = None;
                        continue 'outer;
                    }
                    continue;
                }
                // Gauge-transform the non-base endpoint so that both tags
                // agree, then merge it into the other endpoint.
                let (gone, keep, g) = if x != 0 {
                    (x, y, tags.mul(&tags.inverse(&t1), &t2))
                } else {
                    (y, x, tags.mul(&tags.inverse(&t2), &t1))
                };
                let gi = tags.inverse(&g);
                for e in edges.iter_mut().flatten() {
                    if e.to == gone {
                        e.tag = tags.mul(&e.tag, &g);
                    }
                    if e.from == gone {
                        e.tag = tags.mul(&gi, &e.tag);
                    }
                }
                for e in edges.iter_mut().flatten() {
                    if e.to == gone {
                        e.to = keep;
                    }
                    if e.from == gone {
                        e.from = keep;
                    }
                }
                alive[gone] = false;
                edges[i2] = None;
                continue 'outer;
            }
        }
        break;
    }
    // Renumber the surviving vertices with the base first.
    let mut map = BTreeMap::new();
    for (v, &a) in alive.iter().enumerate() {
        if a {
            let k = map.len();
            map.insert(v, k);
        }
    }
    let edges = edges
        .into_iter()
        .flatten()
        .map(|e| Edge {
            from: map[&e.from],
            to: map[&e.to],
            ..e
        })
        .collect();
    Ok(Folded {
        vertices: map.len(),
        edges,
    })
}

impl Folded {
    /// Transition table `table[v][l]` if every vertex has every letter.
    pub fn transition_table(&self, al: &Alphabet) -> Option<Vec<Vec<usize>>> {
        let mut table = vec![vec![usize::MAX; al.size()]; self.vertices];
        for e in &self.edges {
            table[e.from][e.letter.index()] = e.to;
            table[e.to][al.inv(e.letter).index()] = e.from;
        }
        if table.iter().flatten().any(|&t| t == usize::MAX) {
            None
        } else {
            Some(table)
        }
    }

    /// Tag of the loop at the base reading `l`, if present.
    pub fn base_loop_tag(&self, al: &Alphabet, tags: &Alphabet, l: Letter) -> Option<Word> {
        self.edges.iter().find_map(|e| {
            if e.from == 0 && e.to == 0 && e.letter == l {
                Some(e.tag.clone())
            } else if e.from == 0 && e.to == 0 && al.inv(e.letter) == l {
                Some(tags.inverse(&e.tag))
            } else {
                None
            }
        })
    }
}
