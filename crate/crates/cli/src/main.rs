//! `spheredeg`: degree, index and Morse-formula checks from the command line.
//!
//! Reports go to stdout as JSON (or CSV for `degree-table`). Errors go to
//! stderr as a JSON object. Exit status 1 marks invalid input, 2 marks a
//! failed mathematical cross-check.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sphere_degree::constructors::{build_alpha, degree_table, rows_to_csv};
use sphere_degree::degree::{degree, DegreeOptions, SphereMap};
use sphere_degree::fields::{PolyField, Sign};
use sphere_degree::index::{check_lemma21, index_at, DEFAULT_RADIUS};
use sphere_degree::morse::{bundled_scenario, morse_check, MorseOptions, MorseScenario};

#[derive(Parser)]
#[command(name = "spheredeg", version, about = "Topological degree and index checks for polynomial vector fields")]
struct Cli {
    /// Seed for the ChaCha8 generator that draws PL target points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// First mesh level tried by the PL engine.
    #[arg(long, global = true)]
    mesh_level: Option<u32>,
    /// Report format; `degree-table` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    output: Option<Output>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the field realizing a map Sⁿ → Sⁿ of degree m.
    ConstructMap {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
    /// Degree of V/‖V‖ on a sphere.
    Degree {
        #[arg(long)]
        field: PathBuf,
        /// Comma-separated center, default the origin.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Index of a field at an isolated zero.
    Index {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        zero: String,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: f64,
    },
    /// Append ±x_{n+1} as a last component.
    Suspend {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sign: i64,
    },
    /// Compare the index of a suspension with sign · the base index.
    Lemma21 {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sign: i64,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: f64,
    },
    /// Morse index formula and doubling identity on a scenario.
    MorseCheck {
        /// Scenario file, or the name of a bundled scenario.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        collar_width: Option<f64>,
        #[arg(long)]
        no_doubling: bool,
    },
    /// Degrees of the constructed maps for n ≤ n_max, m_min ≤ m ≤ m_max.
    DegreeTable {
        #[arg(long)]
        n_max: usize,
        #[arg(long, allow_hyphen_values = true)]
        m_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        m_max: i64,
    },
}

/// A failed run: the error object for stderr, or a report that completed
/// but whose cross-check failed.
enum Failure {
    Invalid(Value),
    CrossCheck(Value),
    Report(String),
}

impl Failure {
    fn from_error<E: Serialize + std::fmt::Display>(e: E, cross_check: bool) -> Self {
        let body = json!({ "error": e, "message": e.to_string() });
        if cross_check {
            Failure::CrossCheck(body)
        } else {
            Failure::Invalid(body)
        }
    }

    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure::Invalid(json!({ "error": { "kind": kind }, "message": message.into() }))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": { "kind": "usage" }, "message": message.trim_end() }));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(body)) => {
            eprintln!("{body}");
            ExitCode::from(1)
        }
        Err(Failure::CrossCheck(body)) => {
            eprintln!("{body}");
            ExitCode::from(2)
        }
        Err(Failure::Report(out)) => {
            print!("{out}");
            eprintln!("{}", json!({ "error": { "kind": "cross_check_failed" }, "message": "report above failed its check" }));
            ExitCode::from(2)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn read_field(path: &Path) -> Result<PolyField, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
    PolyField::from_json(&text).map_err(|e| Failure::input("field", format!("{}: {e}", path.display())))
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::input("point", format!("{text:?}: {e}")))
}

fn parse_sign(v: i64) -> Result<Sign, Failure> {
    Sign::try_from(v).map_err(|e| Failure::input("sign", e.to_string()))
}

fn load_scenario(arg: &str) -> Result<MorseScenario, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{arg}: {e}")))?;
        return MorseScenario::from_json(&text).map_err(|e| Failure::from_error(e, false));
    }
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    bundled_scenario(name).ok_or_else(|| Failure::input("io", format!("{arg}: no such file or bundled scenario")))
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let mut opts = DegreeOptions::with_seed(cli.seed);
    if let Some(level) = cli.mesh_level {
        opts.start_level = level;
    }
    if cli.output == Some(Output::Csv) && !matches!(cli.command, Command::DegreeTable { .. }) {
        return Err(Failure::input("output", "csv output is only available for degree-table"));
    }
    match &cli.command {
        Command::ConstructMap { n, m } => {
            let alpha = build_alpha(*n, *m).map_err(|e| Failure::from_error(e, false))?;
            Ok(to_json(&alpha))
        }
        Command::Degree { field, center, radius } => {
            let field = read_field(field)?;
            let center = match center {
                Some(c) => parse_point(c)?,
                None => vec![0.0; field.dim()],
            };
            let map = SphereMap::new(&field, &center, *radius).map_err(|e| Failure::from_error(e, false))?;
            degree(&map, &opts)
                .map(|r| to_json(&r))
                .map_err(|e| {
                    let cross = e.is_cross_check_failure();
                    Failure::from_error(e, cross)
                })
        }
        Command::Index { field, zero, radius } => {
            let field = read_field(field)?;
            let zero = parse_point(zero)?;
            index_at(&field, &zero, *radius, &opts).map(|r| to_json(&r)).map_err(|e| {
                let cross = e.is_cross_check_failure();
                Failure::from_error(e, cross)
            })
        }
        Command::Suspend { field, sign } => {
            let field = read_field(field)?;
            Ok(to_json(&field.suspend(parse_sign(*sign)?)))
        }
        Command::Lemma21 { field, sign, radius } => {
            let field = read_field(field)?;
            let report = check_lemma21(&field, parse_sign(*sign)?, *radius, &opts).map_err(|e| {
                let cross = e.is_cross_check_failure();
                Failure::from_error(e, cross)
            })?;
            if report.relation_holds {
                Ok(to_json(&report))
            } else {
                Err(Failure::Report(to_json(&report)))
            }
        }
        Command::MorseCheck { scenario, collar_width, no_doubling } => {
            let scenario = load_scenario(scenario)?;
            let morse_opts = MorseOptions { degree: opts, collar_width: *collar_width, doubling: !no_doubling };
            let report = morse_check(&scenario, &morse_opts).map_err(|e| {
                let cross = e.is_cross_check_failure();
                Failure::from_error(e, cross)
            })?;
            let doubling_ok = report.doubling_check.as_ref().is_none_or(|d| d.holds);
            if report.formula_holds && doubling_ok {
                Ok(to_json(&report))
            } else {
                Err(Failure::Report(to_json(&report)))
            }
        }
        Command::DegreeTable { n_max, m_min, m_max } => {
            let rows = degree_table(*n_max, *m_min, *m_max, &opts).map_err(|e| {
                let cross = e.is_cross_check_failure();
                Failure::from_error(e, cross)
            })?;
            Ok(match cli.output.unwrap_or(Output::Csv) {
                Output::Csv => rows_to_csv(&rows),
                Output::Json => to_json(&rows),
            })
        }
    }
}
