//! Command-line front end for finite lattice measurement systems. The
//! `mackey` binary calls [`main_exit`].

pub mod commands;
pub mod input;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mackey_core::equivalence::ScaleRule;

use crate::commands::ConvergeArgs;
use crate::input::{Context, Experiment, ModelFile, Sizes, StateSpec};
use crate::output::Format;

const STATE_HELP: &str = "State specification, `kind:key=value,...` or a JSON object with a \
`kind` field. Kinds: uniform; dirac:index=K; gibbs:beta=B[,H=OBS]; \
microcanonical:E=E[,dE=W][,H=OBS]; grand_canonical:beta=B[,mu=M][,N=OBS][,H=OBS]; \
csv:PATH (config_index,weight). H defaults to the model's `H` observable or `energy`, \
N to the model's `N` observable or `occupation`.";

const OBSERVABLE_HELP: &str = "Observable: a name defined in the model file, a built-in \
(magnetization, magnetization_per_site, energy, occupation, spin(K), constant(C), \
indicator(OBS OP VALUE)), or @PATH to a config_index,value CSV.";

#[derive(Debug, Parser)]
#[command(
    name = "mackey",
    version,
    about = "Exact measurement statistics on finite lattice models"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model JSON: {"dims": [...], "alphabet": [...], "boundary": "open"|"periodic",
    /// "observables": {"NAME": "EXPR"}}.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// List every configuration in canonical order.
    Enumerate {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the weight table of a state.
    State {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value = "uniform", help = STATE_HELP)]
        state: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Outcome distribution of an observable, the probability of a Borel set,
    /// or seeded samples.
    Measure {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value = "uniform", help = STATE_HELP)]
        state: String,
        #[arg(long, help = OBSERVABLE_HELP)]
        observable: String,
        /// Report only the probability of this Borel set (JSON interval list or @PATH).
        #[arg(long, value_name = "JSON")]
        borel: Option<String>,
        /// Draw this many measurement outcomes instead.
        #[arg(long, value_name = "N", conflicts_with = "borel")]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectral measure of an observable, or its value on a Borel set.
    Spectral {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, help = OBSERVABLE_HELP)]
        observable: String,
        /// Borel set to evaluate the spectral measure on (JSON interval list or @PATH).
        #[arg(long, value_name = "JSON")]
        borel: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// A question separating two states, or a Dirac state separating two
    /// observables (give two --observable and no states).
    Separate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, help = STATE_HELP, requires = "state2")]
        state1: Option<String>,
        #[arg(long, requires = "state1")]
        state2: Option<String>,
        #[arg(long, help = OBSERVABLE_HELP, conflicts_with = "state1")]
        observable: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Whether two states agree on every probe within accuracy epsilon.
    Equivalent {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, help = STATE_HELP)]
        state1: String,
        #[arg(long)]
        state2: String,
        #[arg(long, required = true, help = OBSERVABLE_HELP)]
        observable: Vec<String>,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the microcanonical, canonical and grand-canonical ensembles on
    /// models of growing size.
    Converge {
        /// Model template; each size sets every axis length. Defaults to an
        /// Ising chain.
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Experiment JSON with any of: model, sizes, beta, delta, mu,
        /// shell_width, center, probe. Flags take precedence.
        #[arg(long, value_name = "PATH")]
        experiment: Option<PathBuf>,
        /// Comma-separated axis lengths [default: 4,6,8,10].
        #[arg(long, value_parser = input::sizes)]
        sizes: Option<Sizes>,
        /// Inverse temperature [default: 1].
        #[arg(long)]
        beta: Option<f64>,
        /// Deviation half-width [default: 0.1].
        #[arg(long)]
        delta: Option<f64>,
        /// Chemical potential [default: 0].
        #[arg(long)]
        mu: Option<f64>,
        /// Microcanonical shell half-width [default: 0].
        #[arg(long)]
        shell_width: Option<f64>,
        /// Limit value m* [default: canonical mean at the largest size].
        #[arg(long)]
        center: Option<f64>,
        /// Intensive probe [default: magnetization_per_site].
        #[arg(long)]
        observable: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// f_t = c_t χ_{all up}: expectations against P(f_t ≠ 0) as size grows.
    DemoLdct {
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Comma-separated axis lengths [default: 1,...,10].
        #[arg(long, value_parser = input::sizes)]
        sizes: Option<Sizes>,
        #[arg(long, default_value = "uniform", help = STATE_HELP)]
        state: String,
        /// `inverse` for c_t = 1/P(A_t), or a constant scale.
        #[arg(long, default_value = "inverse", value_parser = commands::parse_scale)]
        scale: ScaleRule,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded property checks of the whole library; exits 3 on failure.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

/// Why a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable input: I/O, malformed JSON or CSV, bad specifications.
    Input(String),
    /// The input was read but the model rejects it.
    Domain(mackey_core::Error),
}

impl From<mackey_core::Error> for Failure {
    fn from(e: mackey_core::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Domain(e)
        }
    }
}

fn run(verb: Verb) -> Result<bool, Failure> {
    let (result, output) = match verb {
        Verb::Enumerate { model, output } => {
            (commands::enumerate(&Context::load(&model.model)?)?, output)
        }
        Verb::State {
            model,
            state,
            output,
        } => {
            let ctx = Context::load(&model.model)?;
            (commands::state(&ctx, &StateSpec::parse(&state)?)?, output)
        }
        Verb::Measure {
            model,
            state,
            observable,
            borel,
            samples,
            seed,
            output,
        } => {
            let ctx = Context::load(&model.model)?;
            let borel = borel.as_deref().map(input::borel).transpose()?;
            let result = commands::measure(
                &ctx,
                &StateSpec::parse(&state)?,
                &observable,
                borel.as_ref(),
                samples,
                seed,
            )?;
            (result, output)
        }
        Verb::Spectral {
            model,
            observable,
            borel,
            output,
        } => {
            let ctx = Context::load(&model.model)?;
            let borel = borel.as_deref().map(input::borel).transpose()?;
            (
                commands::spectral(&ctx, &observable, borel.as_ref())?,
                output,
            )
        }
        Verb::Separate {
            model,
            state1,
            state2,
            observable,
            output,
        } => {
            let ctx = Context::load(&model.model)?;
            let result = match (state1, state2, observable.as_slice()) {
                (Some(a), Some(b), []) => {
                    commands::separate_states(&ctx, &StateSpec::parse(&a)?, &StateSpec::parse(&b)?)?
                }
                (None, None, [f, g]) => commands::separate_observables(&ctx, f, g)?,
                _ => {
                    return Err(Failure::Input(
                        "separate needs --state1 and --state2, or exactly two --observable".into(),
                    ))
                }
            };
            (result, output)
        }
        Verb::Equivalent {
            model,
            state1,
            state2,
            observable,
            epsilon,
            output,
        } => {
            let ctx = Context::load(&model.model)?;
            let result = commands::equivalent(
                &ctx,
                &StateSpec::parse(&state1)?,
                &StateSpec::parse(&state2)?,
                &observable,
                epsilon,
            )?;
            (result, output)
        }
        Verb::Converge {
            model,
            experiment,
            sizes,
            beta,
            delta,
            mu,
            shell_width,
            center,
            observable,
            output,
        } => {
            let args = ConvergeArgs {
                template: model.as_deref().map(ModelFile::load).transpose()?,
                experiment: match experiment {
                    Some(path) => Experiment::load(&path)?,
                    None => Experiment::default(),
                },
                sizes: sizes.map(|s| s.0),
                beta,
                delta,
                mu,
                shell_width,
                center,
                probe: observable,
            };
            (commands::converge(args)?, output)
        }
        Verb::DemoLdct {
            model,
            sizes,
            state,
            scale,
            output,
        } => {
            let template = model.as_deref().map(ModelFile::load).transpose()?;
            let sizes = sizes.map(|s| s.0);
            let result = commands::demo_ldct(template, sizes, &StateSpec::parse(&state)?, scale)?;
            (result, output)
        }
        Verb::Selftest { seed, out, format } => {
            let (result, passed) = commands::selftest(seed);
            result.emit(format, out.as_deref())?;
            return Ok(passed);
        }
    };
    result.emit(output.format, output.out.as_deref())?;
    Ok(true)
}

/// Parses the process arguments, runs the verb and maps the outcome to an
/// exit status: 1 for unreadable input, 2 for domain errors, 3 for a failed
/// selftest.
pub fn main_exit() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.verb) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("mackey: selftest failed");
            ExitCode::from(3)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("mackey: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("mackey: {e}");
            ExitCode::from(2)
        }
    }
}
