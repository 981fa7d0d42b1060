use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rkdarboux::detect::DetectOptions;
use rkdarboux_cli::*;

#[derive(Parser)]
#[command(name = "rkdarboux", version, about = "Darboux polynomials and Runge-Kutta maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Step size.
    #[arg(long, global = true, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides the suite tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Fmt>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Thm2,
    Rational,
    Pade,
    Higher,
    Negative,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a system and print a CSV trajectory.
    Integrate {
        /// Fixture name or path to an .ode file.
        spec: String,
        #[arg(long)]
        tableau: Option<String>,
        /// Initial point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Integrals to track (`all` for every declared one).
        #[arg(long, value_delimiter = ',')]
        track: Vec<String>,
        /// Sweep the 21x21 grid of starts (-10+i, -10+j).
        #[arg(long)]
        grid: bool,
        #[arg(long, default_value_t = DEFAULT_ESCAPE)]
        escape: f64,
    },
    /// Constant-cofactor affine Darboux polynomials and the decoupled system.
    FindDarboux { spec: String },
    /// Rational integrals from the Jacobian determinant of the RK map.
    DetectRational {
        spec: String,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
    },
    /// Run a verification suite and print a PASS/FAIL/SKIP report.
    Verify {
        /// Fixture name, path, or `all`.
        spec: String,
        #[arg(long, value_enum, default_value = "thm2")]
        suite: SuiteArg,
        /// Tableau ids, comma separated, or `all`. Defaults to the
        /// fixture's own tableau.
        #[arg(long, value_delimiter = ',')]
        tableau: Vec<String>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Print the stability function of a tableau.
    Stability {
        tableau: String,
        /// Number of samples of R on [-2, 2].
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    ListTableaux,
    ListFixtures,
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    let format = match g.format {
        Some(Fmt::Csv) => Format::Csv,
        _ => Format::Text,
    };
    match cli.cmd {
        Cmd::Integrate { spec, tableau, x0, track, grid, escape } => {
            let spec = load_spec(&spec)?;
            cmd_integrate(&spec, &IntegrateArgs { tableau, x0, h: g.h, steps: g.steps, track, grid, escape })
        }
        Cmd::FindDarboux { spec } => cmd_find_darboux(&load_spec(&spec)?),
        Cmd::DetectRational { spec, max_degree } => {
            let opts = DetectOptions { seed: g.seed, max_num_degree: max_degree, max_den_degree: max_degree, ..Default::default() };
            cmd_detect_rational(&load_spec(&spec)?, &opts)
        }
        Cmd::Verify { spec, suite, tableau, samples } => {
            let specs = load_specs(&spec)?;
            let suite = match suite {
                SuiteArg::Thm2 => Suite::Thm2,
                SuiteArg::Rational => Suite::Rational,
                SuiteArg::Pade => Suite::Pade,
                SuiteArg::Higher => Suite::Higher,
                SuiteArg::Negative => Suite::Negative,
            };
            let args = VerifyArgs { suite, tableaux: tableau, samples, h: g.h, steps: g.steps, seed: g.seed, tol: g.tol };
            let report = cmd_verify(&specs, &args)?;
            let text = match format {
                Format::Csv => {
                    let mut buf = vec![];
                    report.write_csv(&mut buf).map_err(|e| CliError::input(e.to_string()))?;
                    String::from_utf8(buf).expect("csv is utf-8")
                }
                Format::Text => report.to_text(),
            };
            let failed = report.failed();
            Ok(Outcome { text, notes: vec![], failed })
        }
        Cmd::Stability { tableau, samples } => cmd_stability(&tableau, samples, format),
        Cmd::ListTableaux => Ok(cmd_list_tableaux()),
        Cmd::ListFixtures => cmd_list_fixtures(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.global.output.clone();
    match run(cli) {
        Ok(out) => {
            for n in &out.notes {
                eprintln!("{n}");
            }
            let written = match &output {
                Some(p) => std::fs::write(p, &out.text),
                None => std::io::stdout().write_all(out.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code as u8)
        }
    }
}
