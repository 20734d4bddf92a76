use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use holant::dichotomy::{classify_holant_c, verify_certificate, Certificate, Verdict};
use holant::entanglement::{is_genuinely_entangled, ternary_class};
use holant::families::{check_family, Family};
use holant::grid::{gadget_signature, holant, holant_bruteforce, holant_contract, make_bipartite, transform_bipartite, GridFile, SignatureGrid};
use holant::signature::SignatureSpec;
use holant::tractable_eval::eval_family;
use holant::{Error, Mat2, Signature};

const EXIT_PARSE: u8 = 64;
const EXIT_SEMANTIC: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "holant", version, about = "Exact Holant evaluation and Holant^c classification over Q(zeta_8)")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Contract,
    Family,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    L,
    R,
}

#[derive(Subcommand)]
enum Cmd {
    /// Holant value of a closed grid.
    Eval {
        grid: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// Classify Holant^c of a signature set.
    Classify {
        set: PathBuf,
        /// Write the hardness certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// JSON list of candidate S matrices.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Membership of a signature set in one tractable family.
    ClassifyFamily {
        set: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Entanglement class of a signature.
    Entclass { signature: PathBuf },
    /// Tensor factorization of a signature.
    Factor { signature: PathBuf },
    /// Holographic transformation of a grid (made bipartite first if needed).
    Transform {
        grid: PathBuf,
        /// Matrix name (I, T, X, K, KX) or [[a, b], [c, d]].
        #[arg(long)]
        matrix: String,
        /// Side that receives the matrix; the other side gets its inverse transpose.
        #[arg(long, value_enum, default_value = "l")]
        side: SideArg,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Signature realised by a grid with dangling edges.
    Gadget { grid: PathBuf },
    /// Replay a hardness certificate against a signature set.
    VerifyCert { certificate: PathBuf, set: PathBuf },
}

enum Failure {
    Io(String),
    Parse(String),
    Semantic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Parse(e.to_string()),
            _ => Failure::Semantic(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_grid(path: &Path) -> Result<SignatureGrid, Failure> {
    Ok(parse_json::<GridFile>(path)?.build()?)
}

fn load_signature(path: &Path) -> Result<Signature, Failure> {
    Ok(parse_json::<SignatureSpec>(path)?.build()?)
}

/// A set file is a JSON list of signature objects, or `{"signatures": [...]}`.
fn load_set(path: &Path) -> Result<Vec<Signature>, Failure> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum SetFile {
        List(Vec<SignatureSpec>),
        Wrapped { signatures: Vec<SignatureSpec> },
    }
    let specs = match parse_json::<SetFile>(path)? {
        SetFile::List(v) | SetFile::Wrapped { signatures: v } => v,
    };
    specs.iter().map(|s| s.build().map_err(Failure::from)).collect()
}

fn load_candidates(path: Option<&PathBuf>) -> Result<Option<Vec<Mat2>>, Failure> {
    let Some(p) = path else { return Ok(None) };
    let raw: Vec<serde_json::Value> = parse_json(p)?;
    let mats = raw
        .into_iter()
        .map(|v| match v {
            serde_json::Value::String(s) => s.parse::<Mat2>().map_err(Failure::from),
            other => serde_json::from_value::<Mat2>(other).map_err(|e| Failure::Parse(format!("{}: {e}", p.display()))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(mats))
}

/// Print a line; a closed pipe (e.g. `| head`) is not an error.
fn print_line(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    if json {
        print_line(&serde_json::to_string_pretty(&value).expect("JSON values serialize"));
    } else {
        print_line(&text());
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.cmd {
        Cmd::Eval { grid, method } => {
            let g = load_grid(&grid)?;
            let (value, algorithm) = match method {
                Method::Brute => (holant_bruteforce(&g)?, "brute-force".to_string()),
                Method::Contract => (holant_contract(&g)?, "contraction".to_string()),
                Method::Auto => (holant(&g)?, "auto".to_string()),
                Method::Family => {
                    let (fam, v) = eval_family(&g)?;
                    (v, format!("family {fam}"))
                }
            };
            emit(json, json!({ "value": value, "algorithm": algorithm }), || match method {
                Method::Family => format!("{value}\nalgorithm: {algorithm}"),
                _ => value.to_string(),
            });
            Ok(0)
        }
        Cmd::Classify { set, certificate, candidates } => {
            let sigs = load_set(&set)?;
            let cands = load_candidates(candidates.as_ref())?;
            let verdict = classify_holant_c(&sigs, cands.as_deref())?;
            if let (Some(path), Verdict::Hard { certificate: cert }) = (&certificate, &verdict) {
                let text = serde_json::to_string_pretty(cert).expect("certificates serialize");
                fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            }
            emit(json, to_value(&verdict), || verdict.to_string());
            Ok(match verdict {
                Verdict::Tractable { .. } => 0,
                Verdict::Hard { .. } => 1,
                Verdict::Unknown { .. } => 2,
            })
        }
        Cmd::ClassifyFamily { set, family, candidates } => {
            let fam = Family::parse(&family).ok_or_else(|| Failure::Parse(format!("unknown family {family:?}")))?;
            let sigs = load_set(&set)?;
            let cands = load_candidates(candidates.as_ref())?;
            let v = check_family(&sigs, fam, cands.as_deref())?;
            emit(json, to_value(&v), || {
                let mut line = format!("{} {}", v.family, v.member);
                if let Some(m) = &v.matrix {
                    line.push_str(&format!(" matrix {m}"));
                }
                if let Some(w) = v.witness.as_ref().or(v.reason.as_ref()) {
                    line.push_str(&format!(": {w}"));
                }
                line
            });
            Ok(0)
        }
        Cmd::Entclass { signature } => {
            let f = load_signature(&signature)?;
            let class = if f.arity() == 3 {
                ternary_class(&f)?.to_string()
            } else if is_genuinely_entangled(&f)? {
                "ENTANGLED".to_string()
            } else {
                let parts: Vec<String> = f
                    .factorize()?
                    .iter()
                    .map(|fa| format!("{{{}}}", fa.slots.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                format!("PRODUCT({})", parts.join("|"))
            };
            emit(json, json!({ "class": class }), || class.clone());
            Ok(0)
        }
        Cmd::Factor { signature } => {
            let f = load_signature(&signature)?;
            let factors = f.factorize()?;
            let value = json!(factors.iter().map(|fa| json!({ "slots": fa.slots, "signature": fa.sig })).collect::<Vec<_>>());
            emit(json, value, || {
                factors
                    .iter()
                    .map(|fa| format!("{:?}: {}", fa.slots, fa.sig))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(0)
        }
        Cmd::Transform { grid, matrix, side, out } => {
            let g = load_grid(&grid)?;
            let m: Mat2 = matrix.parse()?;
            let m = match side {
                SideArg::L => m,
                SideArg::R => m.invert()?.transpose(),
            };
            let g = if g.sides().is_some() { g } else { make_bipartite(&g)? };
            let t = transform_bipartite(&g, &m)?;
            let text = serde_json::to_string_pretty(&GridFile::from_grid(&t)).expect("grids serialize");
            match out {
                Some(path) => {
                    fs::write(&path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    emit(json, json!({ "written": path }), || format!("wrote {}", path.display()));
                }
                None => print_line(&text),
            }
            Ok(0)
        }
        Cmd::Gadget { grid } => {
            let g = load_grid(&grid)?;
            let f = gadget_signature(&g)?;
            emit(json, to_value(&f), || f.to_string());
            Ok(0)
        }
        Cmd::VerifyCert { certificate, set } => {
            let cert: Certificate = parse_json(&certificate)?;
            let sigs = load_set(&set)?;
            let report = verify_certificate(&cert, &sigs);
            emit(json, to_value(&report), || report.to_string());
            Ok(if report.ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Parse(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_PARSE)
        }
        Err(Failure::Semantic(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SEMANTIC)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NO_INPUT)
        }
    }
}
