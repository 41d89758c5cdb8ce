//! One function per verb. Each returns the result in CSV and JSON form.

use std::collections::BTreeMap;

use mackey_core::equivalence::{
    all_up_event, dominated_convergence_demo, ensemble_convergence, separating_observable,
    states_separate_observables, weakly_equivalent, ConvergenceModel, ConvergenceReport,
    ConvergenceSetup, ProbeSet, ScaleRule,
};
use mackey_core::io::{self, format_real};
use mackey_core::measurement::{outcome_distribution, probability, sample_measurements};
use mackey_core::phase::{ModelSpec, PhaseSpace};
use mackey_core::{
    builtins, selftest, BorelSet, Observable, Precision, Question, SpectralMeasure, State,
};
use serde_json::{json, Value};

use crate::input::{enumeration_cap, Context, Experiment, ModelFile, StateSpec};
use crate::output::{write_rows, write_summary, Output};
use crate::Failure;

fn csv_of(write: impl FnOnce(&mut Vec<u8>) -> mackey_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn json_of<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("results serialize to JSON")
}

fn members_text(q: &Question) -> String {
    q.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn enumerate(ctx: &Context) -> Result<Output, Failure> {
    let x = &ctx.phase;
    let rows: Vec<Value> = (0..x.size())
        .map(|k| {
            let values: Vec<f64> = (0..x.site_count()).map(|s| x.value_at(k, s)).collect();
            json!({ "config_index": k, "values": values })
        })
        .collect();
    Ok(Output {
        csv: csv_of(|b| io::write_configurations(x, b))?,
        json: Value::Array(rows),
    })
}

pub fn state(ctx: &Context, spec: &StateSpec) -> Result<Output, Failure> {
    let s = spec.build(ctx)?;
    Ok(Output {
        csv: csv_of(|b| io::write_state(&s, b))?,
        json: json!({
            "weights": s.weights(),
            "support_size": s.support_size(),
            "pure": s.is_pure(),
        }),
    })
}

pub fn measure(
    ctx: &Context,
    spec: &StateSpec,
    name: &str,
    borel: Option<&BorelSet>,
    samples: Option<usize>,
    seed: u64,
) -> Result<Output, Failure> {
    let f = ctx.observable(name)?;
    let s = spec.build(ctx)?;
    if let Some(n) = samples {
        let outcomes = sample_measurements(&f, &s, n, seed)?;
        return Ok(Output {
            csv: csv_of(|b| io::write_samples(&outcomes, b))?,
            json: json!({ "seed": seed, "outcomes": outcomes }),
        });
    }
    if let Some(b) = borel {
        let p = probability(&f, &s, b)?;
        return Ok(Output {
            csv: write_summary(&[
                ("observable", name.to_string()),
                ("borel", b.to_string()),
                ("probability", format_real(p)),
            ]),
            json: json!({ "observable": name, "borel": b, "probability": p }),
        });
    }
    let d = outcome_distribution(&f, &s)?;
    Ok(Output {
        csv: csv_of(|b| io::write_distribution(&d, b))?,
        json: json_of(&d),
    })
}

pub fn spectral(ctx: &Context, name: &str, borel: Option<&BorelSet>) -> Result<Output, Failure> {
    let f = ctx.observable(name)?;
    let q = SpectralMeasure::of(&f, Precision::Exact);
    if let Some(b) = borel {
        let question = q.apply(b);
        return Ok(Output {
            csv: csv_of(|w| io::write_question(&question, w))?,
            json: json!({ "observable": name, "borel": b, "members": question }),
        });
    }
    Ok(Output {
        csv: csv_of(|w| io::write_atoms(&q, w))?,
        json: json_of(&q),
    })
}

/// Names `q` as a level set `[f=λ]` of the first observable that has it as
/// one, or else as its member set.
fn describe(ctx: &Context, q: &Question) -> String {
    for (name, f) in ctx.labelled_observables() {
        let measure = SpectralMeasure::of(&f, Precision::Exact);
        if let Some(atom) = measure.atoms().iter().find(|a| &a.question == q) {
            return format!("[{name}={}]", atom.lambda);
        }
    }
    format!(
        "{{{}}}",
        q.phi()
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

pub fn separate_states(ctx: &Context, s1: &StateSpec, s2: &StateSpec) -> Result<Output, Failure> {
    let (a, b) = (s1.build(ctx)?, s2.build(ctx)?);
    let tv = a.total_variation(&b)?;
    Ok(match separating_observable(&a, &b)? {
        None => Output {
            csv: write_summary(&[("separated", "false".into())]),
            json: json!({ "separated": false }),
        },
        Some(sep) => {
            let label = describe(ctx, &sep.question);
            Output {
                csv: write_summary(&[
                    ("separated", "true".into()),
                    ("witness", label.clone()),
                    ("members", members_text(&sep.question)),
                    ("gap", format_real(sep.gap)),
                    ("total_variation", format_real(tv)),
                ]),
                json: json!({
                    "separated": true,
                    "witness": label,
                    "members": sep.question,
                    "gap": sep.gap,
                    "total_variation": tv,
                }),
            }
        }
    })
}

pub fn separate_observables(ctx: &Context, f_name: &str, g_name: &str) -> Result<Output, Failure> {
    let (f, g) = (ctx.observable(f_name)?, ctx.observable(g_name)?);
    Ok(match states_separate_observables(&f, &g)? {
        None => Output {
            csv: write_summary(&[("separated", "false".into())]),
            json: json!({ "separated": false }),
        },
        Some(w) => Output {
            csv: write_summary(&[
                ("separated", "true".into()),
                ("witness", format!("dirac:index={}", w.index)),
                ("config_index", w.index.to_string()),
                ("f_value", format_real(w.f_value)),
                ("g_value", format_real(w.g_value)),
            ]),
            json: json!({
                "separated": true,
                "witness": format!("dirac:index={}", w.index),
                "config_index": w.index,
                "f_value": w.f_value,
                "g_value": w.g_value,
            }),
        },
    })
}

pub fn equivalent(
    ctx: &Context,
    s1: &StateSpec,
    s2: &StateSpec,
    names: &[String],
    epsilon: f64,
) -> Result<Output, Failure> {
    let (a, b) = (s1.build(ctx)?, s2.build(ctx)?);
    let probes = names
        .iter()
        .map(|n| Ok((n.clone(), ctx.observable(n)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = weakly_equivalent(&a, &b, &ProbeSet::new(probes, epsilon)?)?;
    let rows: Vec<Vec<String>> = report
        .gaps
        .iter()
        .map(|g| vec![g.name.clone(), format_real(g.gap), g.within.to_string()])
        .collect();
    Ok(Output {
        csv: write_rows(&["probe", "gap", "within"], &rows),
        json: json_of(&report),
    })
}

fn resolver(
    named: &BTreeMap<String, String>,
    name: String,
) -> impl Fn(&PhaseSpace) -> mackey_core::Result<Observable> + '_ {
    move |x: &PhaseSpace| builtins::parse_with(x, &name, named)
}

fn report_output(report: &ConvergenceReport) -> Result<Output, Failure> {
    Ok(Output {
        csv: csv_of(|b| io::write_report(report, b))?,
        json: json_of(report),
    })
}

pub struct ConvergeArgs {
    pub template: Option<ModelFile>,
    pub experiment: Experiment,
    pub sizes: Option<Vec<usize>>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub shell_width: Option<f64>,
    pub center: Option<f64>,
    pub probe: Option<String>,
}

pub fn converge(args: ConvergeArgs) -> Result<Output, Failure> {
    let exp = args.experiment;
    let template = args
        .template
        .or(exp.model)
        .unwrap_or_else(|| ModelFile::ising_chain(1));
    let sizes = args
        .sizes
        .or(exp.sizes)
        .unwrap_or_else(|| vec![4, 6, 8, 10]);
    let defaults = ConvergenceSetup::default();
    let setup = ConvergenceSetup {
        beta: args.beta.or(exp.beta).unwrap_or(defaults.beta),
        delta: args.delta.or(exp.delta).unwrap_or(defaults.delta),
        mu: args.mu.or(exp.mu).unwrap_or(defaults.mu),
        shell_width: args
            .shell_width
            .or(exp.shell_width)
            .unwrap_or(defaults.shell_width),
        center: args.center.or(exp.center),
    };
    let probe = args
        .probe
        .or(exp.probe)
        .unwrap_or_else(|| "magnetization_per_site".into());
    let named = &template.observables;
    let h_name = if named.contains_key("H") {
        "H"
    } else {
        "energy"
    };
    let n_name = if named.contains_key("N") {
        "N"
    } else {
        "occupation"
    };
    let hamiltonian = resolver(named, h_name.into());
    let probe = resolver(named, probe);
    let particles = resolver(named, n_name.into());
    let model = ConvergenceModel {
        hamiltonian: &hamiltonian,
        probe: &probe,
        particle_number: &particles,
    };
    let specs: Vec<ModelSpec> = sizes.iter().map(|&n| template.resized(n)).collect();
    report_output(&ensemble_convergence(
        &specs,
        &setup,
        &model,
        enumeration_cap()?,
    )?)
}

pub fn demo_ldct(
    template: Option<ModelFile>,
    sizes: Option<Vec<usize>>,
    state: &StateSpec,
    scale: ScaleRule,
) -> Result<Output, Failure> {
    let template = template.unwrap_or_else(|| ModelFile::ising_chain(1));
    let sizes = sizes.unwrap_or_else(|| (1..=10).collect());
    let specs: Vec<ModelSpec> = sizes.iter().map(|&n| template.resized(n)).collect();
    let named = template.observables.clone();
    let build = |x: &PhaseSpace| -> mackey_core::Result<State> {
        let ctx = Context {
            phase: x.clone(),
            named: named.clone(),
        };
        state.build(&ctx).map_err(|f| match f {
            Failure::Domain(e) => e,
            Failure::Input(m) => mackey_core::Error::Parse(m),
        })
    };
    report_output(&dominated_convergence_demo(
        &specs,
        &all_up_event,
        scale,
        &build,
        enumeration_cap()?,
    )?)
}

pub fn parse_scale(text: &str) -> Result<ScaleRule, String> {
    match text.trim() {
        "inverse" => Ok(ScaleRule::InverseProbability),
        t => t
            .parse::<f64>()
            .map(ScaleRule::Constant)
            .map_err(|_| format!("`{t}` is neither `inverse` nor a number")),
    }
}

/// Results of the seeded self-test, and whether every check passed.
pub fn selftest(seed: u64) -> (Output, bool) {
    let outcomes = selftest::run(seed);
    let passed = outcomes.iter().all(|o| o.passed);
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| vec![o.name.to_string(), o.passed.to_string(), o.detail.clone()])
        .collect();
    let json = Value::Array(
        outcomes
            .iter()
            .map(|o| json!({ "check": o.name, "passed": o.passed, "detail": o.detail }))
            .collect(),
    );
    let csv = write_rows(&["check", "passed", "detail"], &rows);
    (Output { csv, json }, passed)
}
