//! The `ctxfer` command line.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 inequality violated
//! (`check` only), 4 undefined weak values with `--strict`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::contextuality::{noncontextual_margin, scan_violation, uniform_grid};
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::interferometer::{
    build_network, derive_reflectivities, symmetric_reflectivity, Context,
    PathId, PathVectorTable,
};
use crate::io::{
    render, BuildDoc, CheckDoc, CoherenceDoc, CoherenceRow, Format, KdDoc, KdRow, ProbeDoc,
    ProbsDoc, SampleDoc, ScanDoc, WeakDoc,
};
use crate::measurement::{
    context_probabilities, probe_extrapolate, sample_context, ProbeMode, DEFAULT_EPSILONS,
};
use crate::states::{probability_table, StateSpec};
use crate::weak::{
    coherence_coefficient, coherence_target, current_difference_coefficients, kd_element,
    kd_reconstruction_residual, weak_value, WeakReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_UNDEFINED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ctxfer",
    version,
    about = "Five-context three-path interferometer: probabilities, weak values and contextuality checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct NetworkArgs {
    /// Reflectivity of the first beam splitter.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub r1: f64,
    /// Reflectivity of the last beam splitter.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub r2: f64,
    /// Use R1 = R2 = (3 - √5)/2, which makes all five reflectivities equal.
    #[arg(long)]
    pub symmetric: bool,
}

impl NetworkArgs {
    pub fn table(&self) -> Result<PathVectorTable> {
        let config = if self.symmetric {
            let r = symmetric_reflectivity();
            derive_reflectivities(r, r)?
        } else {
            derive_reflectivities(self.r1, self.r2)?
        };
        build_network(config)
    }
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 4 if any weak value is undefined.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Clone)]
pub struct StateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// `nf`, comma-separated amplitudes such as `1,0+1i,0`, or `@rho.json`.
    #[arg(long, default_value = "nf")]
    pub state: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl StateArgs {
    fn resolve(&self) -> Result<(PathVectorTable, DensityMatrix)> {
        let table = self.network.table()?;
        let rho = self.state.parse::<StateSpec>()?.resolve(&table)?;
        Ok((table, rho))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflectivities, path vectors, beam splitters and cycle closure.
    Build {
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Detection probability of every path.
    Probs(StateArgs),
    /// Weak values W(i|o) for all paths and output ports.
    Weak(StateArgs),
    /// Kirkwood-Dirac elements and their coherence expansion residuals.
    Kd(StateArgs),
    /// Coherence coefficients C(i|n,o) for one pair of output ports.
    Coherence {
        #[command(flatten)]
        state: StateArgs,
        /// Ket outcome n.
        #[arg(long, default_value = "3")]
        n: PathId,
        /// Bra outcome o.
        #[arg(long, default_value = "1")]
        o: PathId,
    },
    /// Noncontextual inequality P(f) <= P(D1) + P(D2); exit 3 on violation.
    Check(StateArgs),
    /// P(f|N_f) over a grid of (R1, R2).
    Scan {
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long, default_value_t = 0.05)]
        min: f64,
        #[arg(long, default_value_t = 0.95)]
        max: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo photon counting in one context.
    Sample {
        #[command(flatten)]
        state: StateArgs,
        /// Context as three comma-separated paths, e.g. `f,S1,P1`.
        #[arg(long, default_value = "1,2,3")]
        context: Context,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weak polarization probe extrapolated to zero coupling.
    Probe {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        path: PathId,
        #[arg(long)]
        outcome: PathId,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS)]
        eps_list: Vec<f64>,
        /// Pointer shots per basis; exact expectation values if omitted.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Rendered output and exit code of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

fn emit(out: &OutputArgs, text: String, exit_code: i32) -> Result<Outcome> {
    if let Some(path) = &out.out {
        std::fs::write(path, &text)?;
        Ok(Outcome {
            text: String::new(),
            exit_code,
        })
    } else {
        Ok(Outcome { text, exit_code })
    }
}

fn strict_code(out: &OutputArgs, undefined: bool) -> i32 {
    if out.strict && undefined {
        EXIT_UNDEFINED
    } else {
        EXIT_OK
    }
}

/// Maps an error to the documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ImpossiblePostselection { .. } => EXIT_UNDEFINED,
        _ => EXIT_USAGE,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Build { network, output } => {
            let table = network.table()?;
            emit(output, render("build", &BuildDoc::new(&table), output.format)?, EXIT_OK)
        }
        Command::Probs(args) => {
            let (table, rho) = args.resolve()?;
            let probs = probability_table(&rho, &table)?;
            let doc = ProbsDoc::new(&table.config, &probs);
            emit(&args.output, render("probs", &doc, args.output.format)?, EXIT_OK)
        }
        Command::Weak(args) => {
            let (table, rho) = args.resolve()?;
            let report = WeakReport::new(&rho, &table);
            let doc = WeakDoc::new(&table, &report);
            let code = strict_code(&args.output, report.has_undefined());
            emit(&args.output, render("weak", &doc, args.output.format)?, code)
        }
        Command::Kd(args) => {
            let (table, rho) = args.resolve()?;
            let mut rows = Vec::with_capacity(30);
            for o in PathId::PORTS {
                for i in PathId::ALL {
                    rows.push(KdRow {
                        path: i.to_string(),
                        outcome: o.to_string(),
                        kd: kd_element(&rho, &table, i, o).value.into(),
                        reconstruction_residual: kd_reconstruction_residual(&rho, &table, i, o),
                    });
                }
            }
            let doc = KdDoc {
                config: (&table.config).into(),
                rows,
            };
            emit(&args.output, render("kd", &doc, args.output.format)?, EXIT_OK)
        }
        Command::Coherence { state, n, o } => {
            if !n.is_port() || !o.is_port() {
                return Err(Error::InvalidArgument(
                    "coherence outcomes n and o must be output ports 1, 2 or 3".into(),
                ));
            }
            let table = state.network.table()?;
            let via = match coherence_target(*n, *o) {
                Some(target) => Some(current_difference_coefficients(&table, target)?),
                None => None,
            };
            let rows = PathId::ALL
                .iter()
                .map(|&i| CoherenceRow {
                    path: i.to_string(),
                    n: n.to_string(),
                    o: o.to_string(),
                    value: coherence_coefficient(&table, i, *n, *o).value.into(),
                    via_current_difference: via.map(|v| v[i.index()].into()),
                })
                .collect();
            let doc = CoherenceDoc {
                config: (&table.config).into(),
                rows,
            };
            emit(&state.output, render("coherence", &doc, state.output.format)?, EXIT_OK)
        }
        Command::Check(args) => {
            let (table, rho) = args.resolve()?;
            let probs = probability_table(&rho, &table)?;
            let report = noncontextual_margin(&rho, &table)?;
            let doc = CheckDoc::new(&table.config, &probs, &report);
            let code = if args.output.strict && report.decomposition_terms.is_none() {
                EXIT_UNDEFINED
            } else if report.violated {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            };
            emit(&args.output, render("check", &doc, args.output.format)?, code)
        }
        Command::Scan {
            grid,
            min,
            max,
            output,
        } => {
            if min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidArgument(format!(
                    "--min {min} must be below --max {max}"
                )));
            }
            let g = uniform_grid(*min, *max, *grid)?;
            let scan = scan_violation(&g, &g)?;
            emit(output, render("scan", &ScanDoc::from(&scan), output.format)?, EXIT_OK)
        }
        Command::Sample {
            state,
            context,
            shots,
            seed,
        } => {
            let (table, rho) = state.resolve()?;
            let rec = sample_context(&rho, &table, context, *shots, *seed)?;
            let probs = context_probabilities(&rho, &table, context)?;
            let doc = SampleDoc::new(&table.config, &rec, probs);
            emit(&state.output, render("sample", &doc, state.output.format)?, EXIT_OK)
        }
        Command::Probe {
            state,
            path,
            outcome,
            eps_list,
            shots,
            seed,
        } => {
            let (table, rho) = state.resolve()?;
            let mode = match shots {
                Some(shots) => ProbeMode::Sampled {
                    shots: *shots,
                    seed: *seed,
                },
                None => ProbeMode::Exact,
            };
            let fit = probe_extrapolate(&rho, &table, *path, *outcome, eps_list, mode)?;
            let w = weak_value(&rho, &table, *path, *outcome)?.value;
            let doc = ProbeDoc::new(&table.config, &fit, mode, w);
            emit(&state.output, render("probe", &doc, state.output.format)?, EXIT_OK)
        }
    }
}

/// Parses `args`, runs the command and returns the exit code, printing
/// output to stdout and diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            outcome.exit_code
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
