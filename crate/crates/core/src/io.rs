//! JSON formats for systems, generator maps, subgroups and functions.
//!
//! Complex entries are written `[re, im]`; a bare number is read as a real
//! entry. Letters pair with their case-swapped names unless an explicit
//! involution is given.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::changegen::GeneratorMap;
use crate::error::{input, Result};
use crate::linalg::{self, c, Mat, Vector};
use crate::multfunc::MultiplicativeFunction;
use crate::subgroup::CosetAutomaton;
use crate::system::MatrixSystem;
use crate::words::{Alphabet, Word};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(&self) -> linalg::C64 {
        match *self {
            Entry::Complex([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        }
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<BTreeMap<String, String>>,
    pub dims: BTreeMap<String, usize>,
    #[serde(rename = "H", default)]
    pub h: BTreeMap<String, MatrixJson>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<BTreeMap<String, MatrixJson>>,
}

fn alphabet_from(names: &[String], involution: Option<&BTreeMap<String, String>>) -> Result<Alphabet> {
    match involution {
        None => Alphabet::from_names(names),
        Some(inv) => {
            let pairs: Vec<(String, String)> = inv.iter().map(|(x, y)| (x.clone(), y.clone())).collect();
            Alphabet::with_involution(names, &pairs)
        }
    }
}

fn involution_of(al: &Alphabet) -> BTreeMap<String, String> {
    al.letters()
        .map(|l| (al.name(l).to_string(), al.name(al.inv(l)).to_string()))
        .collect()
}

pub fn matrix_from_json(m: &MatrixJson, rows: usize, cols: usize, what: &str) -> Result<Mat> {
    // An empty list stands for any matrix with a zero dimension.
    if rows == 0 || cols == 0 {
        if m.iter().any(|r| !r.is_empty()) && rows == 0 {
            return Err(input(format!("{what}: expected {rows}×{cols}")));
        }
        return Ok(linalg::zeros(rows, cols));
    }
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(input(format!(
            "{what}: expected a {rows}×{cols} matrix, got {} rows",
            m.len()
        )));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| m[i][j].value()))
}

pub fn matrix_to_json(m: &Mat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

pub fn vector_from_json(v: &[Entry]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(Entry::value))
}

pub fn vector_to_json(v: &Vector) -> Vec<Entry> {
    v.iter().map(|z| Entry::Complex([z.re, z.im])).collect()
}

impl SystemJson {
    pub fn to_system(&self) -> Result<MatrixSystem> {
        let al = alphabet_from(&self.alphabet, self.involution.as_ref())?;
        for k in self.dims.keys() {
            al.letter(k)?;
        }
        let dims: Vec<usize> = al
            .letters()
            .map(|l| {
                self.dims
                    .get(al.name(l))
                    .copied()
                    .ok_or_else(|| input(format!("no dimension for {}", al.name(l))))
            })
            .collect::<Result<_>>()?;
        let n = al.size();
        let mut h: Vec<Mat> = Vec::with_capacity(n * n);
        for b in al.letters() {
            for a in al.letters() {
                h.push(linalg::zeros(dims[b.index()], dims[a.index()]));
            }
        }
        for (key, m) in &self.h {
            let (bn, an) = key
                .split_once('|')
                .ok_or_else(|| input(format!("H key {key:?} is not of the form \"b|a\"")))?;
            let (b, a) = (al.letter(bn)?, al.letter(an)?);
            h[b.index() * n + a.index()] =
                matrix_from_json(m, dims[b.index()], dims[a.index()], &format!("H[{key}]"))?;
        }
        let forms = match &self.b {
            None => al.letters().map(|l| linalg::eye(dims[l.index()])).collect(),
            Some(bs) => {
                for k in bs.keys() {
                    al.letter(k)?;
                }
                al.letters()
                    .map(|l| {
                        let d = dims[l.index()];
                        let m = bs
                            .get(al.name(l))
                            .ok_or_else(|| input(format!("no form for {}", al.name(l))))?;
                        matrix_from_json(m, d, d, &format!("B[{}]", al.name(l)))
                    })
                    .collect::<Result<_>>()?
            }
        };
        MatrixSystem::new(&al, dims, |b, a| h[b.index() * n + a.index()].clone(), forms)
    }

    pub fn from_system(sys: &MatrixSystem) -> Self {
        let al = sys.alphabet();
        let mut h = BTreeMap::new();
        for b in al.letters() {
            for a in al.letters() {
                let m = sys.h(b, a);
                if m.iter().any(|z| z.norm() > 0.0) {
                    h.insert(format!("{}|{}", al.name(b), al.name(a)), matrix_to_json(m));
                }
            }
        }
        SystemJson {
            alphabet: al.names().to_vec(),
            involution: Some(involution_of(al)),
            dims: al.letters().map(|l| (al.name(l).to_string(), sys.dim(l))).collect(),
            h,
            b: Some(
                al.letters()
                    .map(|l| (al.name(l).to_string(), matrix_to_json(sys.form(l))))
                    .collect(),
            ),
        }
    }
}

pub fn parse_system(text: &str) -> Result<MatrixSystem> {
    let j: SystemJson = serde_json::from_str(text).map_err(|e| input(format!("system JSON: {e}")))?;
    j.to_system()
}

pub fn system_to_value(sys: &MatrixSystem) -> Value {
    serde_json::to_value(SystemJson::from_system(sys)).expect("systems serialize")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenMapJson {
    pub target_alphabet: Vec<String>,
    #[serde(default)]
    pub target_involution: Option<BTreeMap<String, String>>,
    pub images: BTreeMap<String, String>,
}

/// Reads a generator map whose source is the alphabet of `source`. Images
/// may be given for one letter of each inverse pair.
pub fn parse_genmap(text: &str, source: &Alphabet) -> Result<GeneratorMap> {
    let j: GenMapJson = serde_json::from_str(text).map_err(|e| input(format!("generator map JSON: {e}")))?;
    let target = alphabet_from(&j.target_alphabet, j.target_involution.as_ref())?;
    let images = j
        .images
        .iter()
        .map(|(k, w)| Ok((source.letter(k)?, target.parse_word(w)?)))
        .collect::<Result<Vec<_>>>()?;
    GeneratorMap::from_positive_images(source, &target, &images)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupJson {
    #[serde(default)]
    pub alphabet: Option<Vec<String>>,
    #[serde(default)]
    pub involution: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub index: Option<usize>,
    /// One permutation per letter, states numbered from 1 (the subgroup).
    #[serde(default)]
    pub transitions: Option<BTreeMap<String, Vec<usize>>>,
}

impl SubgroupJson {
    /// The alphabet named in the file, else lowercase letters mentioned
    /// (case-folded) followed by their uppercase inverses.
    pub fn alphabet(&self) -> Result<Alphabet> {
        if let Some(names) = &self.alphabet {
            return alphabet_from(names, self.involution.as_ref());
        }
        let mut lower = std::collections::BTreeSet::new();
        for g in self.generators.iter().flatten() {
            lower.extend(g.chars().filter(|c| c.is_alphabetic()).flat_map(char::to_lowercase));
        }
        for k in self.transitions.iter().flat_map(|t| t.keys()) {
            lower.extend(k.chars().flat_map(char::to_lowercase));
        }
        if lower.is_empty() {
            return Err(input("subgroup file names no letters"));
        }
        let lower: Vec<String> = lower.into_iter().map(String::from).collect();
        let names: Vec<String> = lower
            .iter()
            .cloned()
            .chain(lower.iter().map(|s| s.to_uppercase()))
            .collect();
        Alphabet::from_names(&names)
    }

    pub fn automaton(&self, al: &Alphabet) -> Result<CosetAutomaton> {
        match (&self.generators, &self.transitions) {
            (Some(gens), None) => {
                let words = gens.iter().map(|g| al.parse_word(g)).collect::<Result<Vec<_>>>()?;
                CosetAutomaton::from_generators(al, &words)
            }
            (None, Some(tr)) => {
                let mut perms = BTreeMap::new();
                for (k, p) in tr {
                    if p.contains(&0) {
                        return Err(input("states are numbered from 1"));
                    }
                    perms.insert(al.letter(k)?, p.iter().map(|s| s - 1).collect::<Vec<_>>());
                }
                let aut = CosetAutomaton::from_permutations(al, &perms)?;
                if let Some(n) = self.index {
                    if n != aut.index() {
                        return Err(input(format!("index {n} disagrees with {} states", aut.index())));
                    }
                }
                Ok(aut)
            }
            _ => Err(input("give exactly one of \"generators\" and \"transitions\"")),
        }
    }
}

pub fn parse_subgroup(text: &str, al: Option<&Alphabet>) -> Result<CosetAutomaton> {
    let j: SubgroupJson = serde_json::from_str(text).map_err(|e| input(format!("subgroup JSON: {e}")))?;
    let al = match al {
        Some(a) => a.clone(),
        None => j.alphabet()?,
    };
    j.automaton(&al)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowJson {
    pub at: String,
    pub vector: Vec<Entry>,
}

/// A multiplicative function as a sum of shadows `μ[x, v]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionJson {
    pub shadows: Vec<ShadowJson>,
}

pub fn parse_function(text: &str, sys: Arc<MatrixSystem>) -> Result<MultiplicativeFunction> {
    let j: FunctionJson = serde_json::from_str(text).map_err(|e| input(format!("function JSON: {e}")))?;
    let al = sys.alphabet().clone();
    let shadows = j
        .shadows
        .iter()
        .map(|s| Ok((al.parse_word(&s.at)?, vector_from_json(&s.vector))))
        .collect::<Result<Vec<(Word, Vector)>>>()?;
    MultiplicativeFunction::from_shadows(sys, &shadows)
}

pub fn function_to_value(f: &MultiplicativeFunction) -> Value {
    let al = f.system().alphabet();
    let j = FunctionJson {
        shadows: f
            .shadows()
            .iter()
            .map(|(w, v)| ShadowJson {
                at: al.format_word(w),
                vector: vector_to_json(v),
            })
            .collect(),
    };
    serde_json::to_value(j).expect("functions serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_round_trip() {
        let al = Alphabet::standard(2);
        let sys = MatrixSystem::spherical(&al, 0.3);
        let text = serde_json::to_string(&system_to_value(&sys)).unwrap();
        assert_eq!(parse_system(&text).unwrap(), sys);
    }

    #[test]
    fn hand_written_system() {
        let text = r#"{"alphabet": ["a","b","A","B"], "dims": {"a":1,"b":1,"A":1,"B":1},
            "H": {"b|a": [[0.5]], "a|a": [[[0.5, 0.0]]]}}"#;
        let sys = parse_system(text).unwrap();
        let al = sys.alphabet();
        assert_eq!(sys.h(al.letter("b").unwrap(), al.letter("a").unwrap())[(0, 0)], c(0.5, 0.0));
        assert_eq!(sys.h(al.letter("B").unwrap(), al.letter("a").unwrap())[(0, 0)], c(0.0, 0.0));
        assert_eq!(*sys.form(al.letter("a").unwrap()), linalg::eye(1));
        assert!(parse_system(r#"{"alphabet": ["a","A"], "dims": {"a":1}}"#).is_err());
        assert!(parse_system(r#"{"alphabet": ["a","A"], "dims": {"a":1,"A":1}, "H": {"a": [[1]]}}"#).is_err());
    }

    #[test]
    fn subgroup_formats() {
        let aut = parse_subgroup(r#"{"generators": ["b","abA","aa"]}"#, None).unwrap();
        assert_eq!(aut.index(), 2);
        let aut = parse_subgroup(r#"{"index": 3, "transitions": {"a": [2,3,1], "b": [1,3,2]}}"#, None).unwrap();
        assert_eq!(aut.index(), 3);
        assert!(parse_subgroup(r#"{"index": 2, "transitions": {"a": [2,3,1], "b": [1,3,2]}}"#, None).is_err());
        assert!(parse_subgroup(r#"{"alphabet": ["a","b","A","B"], "generators": ["a"]}"#, None).is_err());
        assert_eq!(parse_subgroup(r#"{"generators": ["aa"]}"#, None).unwrap().index(), 2);
    }

    #[test]
    fn genmap_format() {
        let src = Alphabet::from_names(&["x".into(), "y".into(), "X".into(), "Y".into()]).unwrap();
        let gm = parse_genmap(r#"{"target_alphabet": ["a","b","A","B"], "images": {"x": "a", "y": "ab"}}"#, &src).unwrap();
        assert_eq!(gm.expand(&src.w("Y")), gm.target().w("BA"));
    }
}
