//! `multrep`: command-line access to matrix systems over free groups.
//!
//! Every subcommand reads JSON files and prints one JSON document on stdout.
//! Exit codes: 0 success, 1 validation failure, 2 numeric failure,
//! 3 malformed input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use multrep_core::decompose::{self, DecomposeOptions};
use multrep_core::io;
use multrep_core::linalg::C64;
use multrep_core::multfunc::MultiplicativeFunction;
use multrep_core::perron;
use multrep_core::subgroup::{schreier_subtree, FundamentalSubtree};
use multrep_core::system::MatrixSystem;
use multrep_core::transport;
use multrep_core::{Alphabet, Error, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "multrep", version, about = "Matrix systems with inner products over free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Verify {
    /// Check that the intertwiner preserves norms (and the group action
    /// where applicable) on random functions.
    #[arg(long)]
    verify_unitary: bool,
    /// Random functions used by the verification.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Depth of the random functions.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accepted defect and verification error.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Compatibility defect and positivity of the forms.
    Check {
        system: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Perron-Frobenius eigenvalue and eigen-tuple of forms.
    Pf {
        system: PathBuf,
        #[arg(long, default_value_t = perron::PF_TOL)]
        tol: f64,
    },
    /// Rescales H and replaces B by the Perron-Frobenius forms.
    Normalize { system: PathBuf },
    /// Splits a compatible system into irreducible components.
    Decompose {
        system: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Transports a system across a change of free generators.
    Changegen {
        system: PathBuf,
        genmap: PathBuf,
        #[command(flatten)]
        verify: Verify,
    },
    /// Fundamental domain, induced generators and contact vertices of a
    /// finite-index subgroup.
    Schreier { subgroup: PathBuf },
    /// Restricts a system to a finite-index subgroup.
    Restrict {
        system: PathBuf,
        subgroup: PathBuf,
        #[command(flatten)]
        verify: Verify,
    },
    /// Induces a system from a finite-index subgroup. Letters of the system
    /// are the generator names printed by `schreier`.
    Induce {
        system: PathBuf,
        subgroup: PathBuf,
        #[command(flatten)]
        verify: Verify,
    },
    /// Spherical system (h = q^(-1/2 + is)) on a free alphabet or on the
    /// induced generators of a subgroup.
    Spherical {
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = 2, conflicts_with = "subgroup")]
        rank: usize,
        #[arg(long)]
        subgroup: Option<PathBuf>,
    },
    /// Translates a function by a word.
    Act {
        system: PathBuf,
        function: PathBuf,
        word: String,
    },
    /// Squared norm of a function.
    Norm { system: PathBuf, function: PathBuf },
    /// Matrix coefficient `<π(x) f, g>`.
    Coeff {
        system: PathBuf,
        f: PathBuf,
        g: PathBuf,
        word: String,
    },
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Read(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Read(_) => 3,
            Failure::Lib(e) => match e {
                Error::Input(_) | Error::Mismatch(_) | Error::Domain(_) => 3,
                Error::Numeric { .. } | Error::Degenerate(_) => 2,
                Error::Precondition(_)
                | Error::DepthOverflow { .. }
                | Error::InfiniteIndex(_)
                | Error::Internal(_) => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Read(m) | Failure::Invalid(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Read(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<MatrixSystem, Failure> {
    Ok(io::parse_system(&read(path)?)?)
}

/// Subgroups are read over the alphabet of the system they act on.
fn load_subtree(path: &Path, al: Option<&Alphabet>) -> Result<FundamentalSubtree, Failure> {
    let aut = io::parse_subgroup(&read(path)?, al)?;
    Ok(schreier_subtree(&aut)?)
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn words(al: &Alphabet, ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| al.format_word(w)).collect()
}

/// Fails with exit code 1 when verification was requested and missed.
fn verdict(report: &mut Value, ok: bool, what: &str) -> Result<(), Failure> {
    report["verified"] = json!(ok);
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{what} verification failed: {report}")))
    }
}

fn check(path: &Path, tol: f64) -> Outcome {
    let sys = load_system(path)?;
    let defect = sys.compatibility_defect();
    let mins = sys.form_min_eigenvalues();
    let psd = mins.iter().flatten().all(|&m| m >= -1e-9 * sys.form_scale().max(1.0));
    let out = json!({
        "defect": defect,
        "relative_defect": defect / sys.form_scale().max(f64::MIN_POSITIVE),
        "form_min_eigenvalues": mins,
        "forms_psd": psd,
        "forms_positive_definite": sys.forms_positive_definite(),
        "compatible": defect <= tol && psd,
    });
    if defect <= tol && psd {
        Ok(out)
    } else {
        Err(Failure::Invalid(out.to_string()))
    }
}

fn pf(path: &Path, tol: f64) -> Outcome {
    let sys = load_system(path)?;
    let pair = perron::pf_eigenpair(&sys, tol)?;
    let al = sys.alphabet();
    let forms: serde_json::Map<String, Value> = al
        .letters()
        .map(|l| (al.name(l).to_string(), json!(io::matrix_to_json(&pair.forms.forms[l.index()]))))
        .collect();
    Ok(json!({
        "rho": pair.rho,
        "residual": pair.residual,
        "iterations": pair.iterations,
        "forms": forms,
    }))
}

fn run_decompose(path: &Path, trials: usize, seed: u64) -> Outcome {
    let sys = load_system(path)?;
    let al = sys.alphabet().clone();
    let dec = decompose::decompose(&sys, DecomposeOptions { trials, seed })?;
    let comps: Vec<Value> = dec
        .components
        .iter()
        .map(|c| {
            let emb: serde_json::Map<String, Value> = al
                .letters()
                .map(|l| (al.name(l).to_string(), json!(io::matrix_to_json(c.embedding.get(l)))))
                .collect();
            json!({
                "system": io::system_to_value(&c.system),
                "embedding": emb,
                "lambda0": c.lambda0,
            })
        })
        .collect();
    Ok(json!({
        "components": comps,
        "dims": dec.dims(),
        "pruned": dec.pruned,
        "stripped_dims": dec.stripped.dims(),
    }))
}

fn changegen(sys_path: &Path, map_path: &Path, v: Verify) -> Outcome {
    let sys = Arc::new(load_system(sys_path)?);
    let gm = io::parse_genmap(&read(map_path)?, sys.alphabet())?;
    let tr = gm.transport_system(&sys)?;
    let (s, t) = (gm.source(), gm.target());
    let frontiers: serde_json::Map<String, Value> = tr
        .frontiers
        .iter()
        .map(|fr| {
            let members: Vec<Value> = fr
                .members
                .iter()
                .map(|(w, tag)| json!({"word": s.format_word(w), "tag": format!("{tag:?}")}))
                .collect();
            (t.format_word(&fr.z), json!(members))
        })
        .collect();
    let defect = tr.system.compatibility_defect();
    let mut out = json!({
        "system": io::system_to_value(&tr.system),
        "defect": defect,
        "frontiers": frontiers,
    });
    if defect > v.tol {
        return Err(Failure::Invalid(format!("transported defect {defect:e} exceeds {:e}", v.tol)));
    }
    if v.verify_unitary {
        let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
        let (mut norm_err, mut equiv_err) = (0.0f64, 0.0f64);
        for _ in 0..v.trials {
            let f = MultiplicativeFunction::random(sys.clone(), v.depth, &mut rng)?;
            let n = f.norm2()?;
            let g = tr.intertwine(&f)?;
            norm_err = norm_err.max((g.norm2()? - n).abs() / n);
            for l in s.letters() {
                let lhs = tr.intertwine(&f.act(&Word::letter(l))?)?;
                let rhs = g.act(gm.image(l))?;
                equiv_err = equiv_err.max(lhs.distance(&rhs)? / n.sqrt());
            }
        }
        out["max_norm_error"] = json!(norm_err);
        out["max_equivariance_error"] = json!(equiv_err);
        verdict(&mut out, norm_err <= v.tol && equiv_err <= v.tol, "unitarity")?;
    }
    Ok(out)
}

fn schreier_report(fs: &FundamentalSubtree) -> Result<Value, Failure> {
    let al = fs.alphabet();
    let gen = fs.generators();
    let generators: Vec<Value> = gen
        .letters()
        .map(|l| {
            json!({
                "name": gen.name(l),
                "inverse": gen.name(gen.inv(l)),
                "word": al.format_word(fs.generator_word(l)),
                "contact": al.format_word(fs.contact(l)),
                "q": al.name(fs.q(l)),
            })
        })
        .collect();
    let dp = fs.complete_d()?;
    let dp_words: Vec<Word> = dp.vertices().iter().cloned().collect();
    Ok(json!({
        "index": fs.index(),
        "D": words(al, fs.d()),
        "generators": generators,
        "rank": gen.size() / 2,
        "D_prime": words(al, &dp_words),
        "D_prime_complete": dp.is_complete(),
    }))
}

fn restrict(sys_path: &Path, sub_path: &Path, v: Verify) -> Outcome {
    let sys = Arc::new(load_system(sys_path)?);
    let fs = load_subtree(sub_path, Some(sys.alphabet()))?;
    let r = transport::restrict_system(&sys, &fs)?;
    let defect = r.system.compatibility_defect();
    let mut out = json!({"system": io::system_to_value(&r.system), "defect": defect});
    if defect > v.tol {
        return Err(Failure::Invalid(format!("restricted defect {defect:e} exceeds {:e}", v.tol)));
    }
    if v.verify_unitary {
        let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
        let mut norm_err = 0.0f64;
        for _ in 0..v.trials {
            let f = MultiplicativeFunction::random(sys.clone(), v.depth, &mut rng)?;
            let n = f.norm2()?;
            norm_err = norm_err.max((r.intertwine(&f)?.norm2()? - n).abs() / n);
        }
        out["max_norm_error"] = json!(norm_err);
        verdict(&mut out, norm_err <= v.tol, "unitarity")?;
    }
    Ok(out)
}

/// Reads the subgroup over the free alphabet named in its file (default
/// `a, b, A, B`) and checks the system is written over its generators.
fn induce(sys_path: &Path, sub_path: &Path, v: Verify) -> Outcome {
    let sub = Arc::new(load_system(sys_path)?);
    let fs = load_subtree(sub_path, None)?;
    if sub.alphabet() != fs.generators() {
        return Err(Failure::Lib(Error::Mismatch(format!(
            "system alphabet {} differs from the subgroup generators {}",
            sub.alphabet(),
            fs.generators()
        ))));
    }
    let ind = transport::induce_system(&sub, &fs)?;
    let defect = ind.system.compatibility_defect();
    let mut out = json!({
        "system": io::system_to_value(&ind.system),
        "dims": ind.system.dims(),
        "defect": defect,
    });
    if defect > v.tol {
        return Err(Failure::Invalid(format!("induced defect {defect:e} exceeds {:e}", v.tol)));
    }
    if v.verify_unitary {
        let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
        let mut norm_err = 0.0f64;
        for _ in 0..v.trials {
            let family = fs
                .d()
                .iter()
                .map(|_| MultiplicativeFunction::random(sub.clone(), v.depth, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            let n = ind.family_norm2(&family)?;
            norm_err = norm_err.max((ind.intertwine(&family)?.norm2()? - n).abs() / n);
        }
        out["max_norm_error"] = json!(norm_err);
        verdict(&mut out, norm_err <= v.tol, "unitarity")?;
    }
    Ok(out)
}

fn spherical(s: f64, rank: usize, subgroup: Option<&Path>) -> Outcome {
    let al = match subgroup {
        Some(p) => load_subtree(p, None)?.generators().clone(),
        None if rank == 0 => return Err(Failure::Lib(Error::Input("rank must be positive".into()))),
        None => Alphabet::standard(rank),
    };
    Ok(io::system_to_value(&MatrixSystem::spherical(&al, s)))
}

fn load_function(sys: &Arc<MatrixSystem>, path: &Path) -> Result<MultiplicativeFunction, Failure> {
    Ok(io::parse_function(&read(path)?, sys.clone())?)
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Check { system, tol } => check(&system, tol),
        Command::Pf { system, tol } => pf(&system, tol),
        Command::Normalize { system } => {
            let sys = perron::normalize_to_compatible(&load_system(&system)?)?;
            Ok(io::system_to_value(&sys))
        }
        Command::Decompose { system, trials, seed } => run_decompose(&system, trials, seed),
        Command::Changegen { system, genmap, verify } => changegen(&system, &genmap, verify),
        Command::Schreier { subgroup } => schreier_report(&load_subtree(&subgroup, None)?),
        Command::Restrict { system, subgroup, verify } => restrict(&system, &subgroup, verify),
        Command::Induce { system, subgroup, verify } => induce(&system, &subgroup, verify),
        Command::Spherical { s, rank, subgroup } => spherical(s, rank, subgroup.as_deref()),
        Command::Act { system, function, word } => {
            let sys = Arc::new(load_system(&system)?);
            let f = load_function(&sys, &function)?;
            let x = sys.alphabet().parse_word(&word)?;
            Ok(io::function_to_value(&f.act(&x)?))
        }
        Command::Norm { system, function } => {
            let sys = Arc::new(load_system(&system)?);
            let f = load_function(&sys, &function)?;
            Ok(json!({"norm2": f.norm2()?, "depth": f.depth()}))
        }
        Command::Coeff { system, f, g, word } => {
            let sys = Arc::new(load_system(&system)?);
            let (f, g) = (load_function(&sys, &f)?, load_function(&sys, &g)?);
            let x = sys.alphabet().parse_word(&word)?;
            Ok(json!({"coefficient": complex(MultiplicativeFunction::matrix_coefficient(&x, &f, &g)?)}))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("values serialize");
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("multrep: {e}");
            ExitCode::from(e.code())
        }
    }
}
