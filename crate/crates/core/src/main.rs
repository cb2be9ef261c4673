use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use newton_radon::analysis::{analyze, run_box_test, run_sublevel, A0_TOLERANCE};
use newton_radon::error::Error;
use newton_radon::problem::{parse_spec, ProblemSpec};
use newton_radon::rational::{parse_rational, Q};
use newton_radon::report;
use newton_radon::sharpness::SharpnessVerdict;
use newton_radon::svg;

/// Newton-polyhedron invariants, smoothing regions and numerical checks for
/// fractional Radon transforms.
#[derive(Parser)]
#[command(name = "newton-radon", version)]
struct Cli {
    /// Output directory (defaults to $NEWTON_RADON_OUT, then the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every stochastic step (overrides `seed` in the problem file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polyhedron, o(S), a0, g, k and the region summary -> analysis.json
    Analyze { spec: PathBuf },
    /// Region surface pieces -> regions.json; optionally classify points
    Region {
        spec: PathBuf,
        /// A point `x,y,s` with x = 1/p, y = 1/q; repeatable.
        #[arg(long, value_name = "X,Y,S")]
        classify: Vec<String>,
    },
    /// The z = 0 slice of the region -> slice.json
    Slice { spec: PathBuf },
    /// Sublevel-set growth fit -> sublevel.json, sublevel.csv
    VerifySublevel {
        spec: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Box-test growth exponent -> sharpness.json, sharpness.csv
    VerifySharpness {
        spec: PathBuf,
        /// Smoothing order; repeat to test several values on shared data.
        #[arg(long, allow_hyphen_values = true)]
        s: Vec<String>,
        /// Source exponent p > 1, e.g. `2`
        #[arg(long)]
        p: Option<String>,
        /// Target exponent q > 1, e.g. `4`
        #[arg(long)]
        q: Option<String>,
    },
    /// Static plots -> regions.svg, slice.svg
    Export {
        spec: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::Input(_) | Error::DimensionMismatch { .. } | Error::Domain(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_spec(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::write(dir.join(name), contents).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", dir.join(name).display()),
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn rational_arg(text: &str, name: &str) -> Result<Q, Failure> {
    parse_rational(text).map_err(|e| Failure {
        code: 2,
        message: format!("--{name}: {e}"),
    })
}

fn parse_point(text: &str) -> Result<(f64, f64, f64), Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure {
            code: 2,
            message: format!("--classify expects x,y,s; got '{text}'"),
        })?;
    match parts[..] {
        [x, y, s] => Ok((x, y, s)),
        _ => Err(Failure {
            code: 2,
            message: format!("--classify expects three numbers; got '{text}'"),
        }),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let out = cli
        .out
        .or_else(|| std::env::var_os("NEWTON_RADON_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let seed_for = |spec: &ProblemSpec| cli.seed.or(spec.seed).unwrap_or(0);

    match cli.command {
        Command::Analyze { spec } => {
            let spec = load(&spec)?;
            let a = analyze(&spec, seed_for(&spec))?;
            let mut v = report::analysis_json(&spec.phase, &a);
            v["regions"] = report::regions_json(&a.regions);
            v["slice"] = report::slice_json(&a.slice, a.profile.exact);
            let text = pretty(&v);
            write(&out, "analysis.json", &text)?;
            print!("{text}");
            Ok(0)
        }
        Command::Region { spec, classify } => {
            let spec = load(&spec)?;
            let a = analyze(&spec, seed_for(&spec))?;
            let mut v = report::regions_json(&a.regions);
            if !classify.is_empty() {
                let mut verdicts = Vec::new();
                for c in &classify {
                    let (x, y, s) = parse_point(c)?;
                    let verdict = a.regions.classify(x, y, s)?;
                    verdicts.push(report::verdict_json(x, y, s, &verdict));
                }
                v["classifications"] = Value::Array(verdicts);
            }
            let text = pretty(&v);
            write(&out, "regions.json", &text)?;
            print!("{text}");
            Ok(0)
        }
        Command::Slice { spec } => {
            let spec = load(&spec)?;
            let a = analyze(&spec, seed_for(&spec))?;
            let text = pretty(&report::slice_json(&a.slice, a.profile.exact));
            write(&out, "slice.json", &text)?;
            print!("{text}");
            Ok(0)
        }
        Command::VerifySublevel { spec, budget } => {
            let mut spec = load(&spec)?;
            if let Some(b) = budget {
                spec.sublevel.budget = b;
            }
            let run = run_sublevel(&spec, seed_for(&spec))?;
            let consistent = run.relative_error().map(|e| e <= A0_TOLERANCE);
            let mut v = report::sublevel_json(&run);
            v["consistent_with_prediction"] = json!(consistent);
            let text = pretty(&v);
            write(&out, "sublevel.json", &text)?;
            write(&out, "sublevel.csv", &report::sublevel_csv(&run))?;
            print!("{text}");
            if run.fit.unstable || consistent == Some(false) {
                eprintln!("sublevel verification inconclusive");
                return Ok(3);
            }
            Ok(0)
        }
        Command::VerifySharpness { spec, s, p, q } => {
            let mut spec = load(&spec)?;
            if let Some(p) = p {
                spec.sharpness.p = rational_arg(&p, "p")?;
            }
            if let Some(q) = q {
                spec.sharpness.q = rational_arg(&q, "q")?;
            }
            let s_values: Vec<Q> = if s.is_empty() {
                vec![spec.sharpness.s.clone()]
            } else {
                s.iter().map(|x| rational_arg(x, "s")).collect::<Result<_, _>>()?
            };
            let reports = run_box_test(&spec, &s_values)?;
            let text = pretty(&report::sharpness_json(&reports));
            write(&out, "sharpness.json", &text)?;
            write(&out, "sharpness.csv", &report::sharpness_csv(&reports))?;
            print!("{text}");
            if reports.iter().any(|r| r.verdict == SharpnessVerdict::Inconclusive) {
                eprintln!("sharpness verification inconclusive");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Export { spec, svg } => {
            if !svg {
                return Err(Failure {
                    code: 2,
                    message: "export needs a format flag (--svg)".into(),
                });
            }
            let spec = load(&spec)?;
            let a = analyze(&spec, seed_for(&spec))?;
            write(&out, "regions.svg", &svg::region_svg(&a.regions))?;
            write(&out, "slice.svg", &svg::slice_svg(&a.slice))?;
            println!("{}", out.join("regions.svg").display());
            println!("{}", out.join("slice.svg").display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
