//! Reading models, experiments, state specifications and observables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mackey_core::phase::{Boundary, ModelSpec, PhaseSpace, DEFAULT_ENUMERATION_CAP};
use mackey_core::{builtins, io, BorelSet, Observable, State};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::Failure;

pub const CAP_VAR: &str = "MACKEY_ENUM_CAP";

pub fn enumeration_cap() -> Result<usize, Failure> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{CAP_VAR}=`{v}` is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

/// Deserializes JSON text, naming the offending path on failure.
pub fn from_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, Failure> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Input(format!("{origin}: at `{path}`: {}", e.into_inner()))
    })
}

fn from_value<T: DeserializeOwned>(value: Value, origin: &str) -> Result<T, Failure> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Failure::Input(format!("{origin}: at `{path}`: {}", e.into_inner()))
    })
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// A model file: the lattice plus optional named observable expressions.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dims: Vec<usize>,
    pub alphabet: Vec<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub observables: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        from_json(&read_text(path)?, &path.display().to_string())
    }

    pub fn ising_chain(n: usize) -> Self {
        let spec = ModelSpec::ising_chain(n);
        Self {
            dims: spec.dims,
            alphabet: spec.alphabet,
            boundary: spec.boundary,
            observables: BTreeMap::new(),
        }
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.dims.clone(), self.alphabet.clone(), self.boundary)
    }

    /// The same model with every axis of length `side`.
    pub fn resized(&self, side: usize) -> ModelSpec {
        ModelSpec::new(
            vec![side; self.dims.len().max(1)],
            self.alphabet.clone(),
            self.boundary,
        )
    }
}

/// A built phase space together with the model's named observables.
pub struct Context {
    pub phase: PhaseSpace,
    pub named: BTreeMap<String, String>,
}

impl Context {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let model = ModelFile::load(path)?;
        Self::build(&model)
    }

    pub fn build(model: &ModelFile) -> Result<Self, Failure> {
        Ok(Self {
            phase: PhaseSpace::build_with_cap(&model.spec(), enumeration_cap()?)?,
            named: model.observables.clone(),
        })
    }

    /// Resolves `@file.csv`, a name from the model file, or a built-in
    /// expression.
    pub fn observable(&self, name: &str) -> Result<Observable, Failure> {
        if let Some(path) = name.strip_prefix('@') {
            let file = fs::File::open(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
            return io::read_observable(file, self.phase.size())
                .map_err(|e| Failure::Input(format!("{path}: {e}")));
        }
        Ok(builtins::parse_with(&self.phase, name, &self.named)?)
    }

    /// A named model observable if the model defines one, else `fallback`.
    fn observable_or(
        &self,
        key: Option<&str>,
        default_name: &str,
        fallback: &str,
    ) -> Result<Observable, Failure> {
        match key {
            Some(name) => self.observable(name),
            None if self.named.contains_key(default_name) => self.observable(default_name),
            None => self.observable(fallback),
        }
    }

    pub fn hamiltonian(&self, key: Option<&str>) -> Result<Observable, Failure> {
        self.observable_or(key, "H", "energy")
    }

    /// Observables tried, in order, when naming a question as a level set.
    pub fn labelled_observables(&self) -> Vec<(String, Observable)> {
        let mut out: Vec<(String, Observable)> = Vec::new();
        let names = self
            .named
            .keys()
            .cloned()
            .chain(["energy", "magnetization", "occupation"].map(String::from));
        for name in names {
            if let Ok(f) = self.observable(&name) {
                out.push((name, f));
            }
        }
        out
    }
}

/// The state grammar: `kind:key=value,...` or a JSON object with a `kind`
/// field.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Uniform,
    Dirac {
        index: usize,
    },
    Gibbs {
        beta: f64,
        #[serde(rename = "H", default)]
        hamiltonian: Option<String>,
    },
    Microcanonical {
        #[serde(rename = "E")]
        energy: f64,
        #[serde(rename = "dE", default)]
        width: f64,
        #[serde(rename = "H", default)]
        hamiltonian: Option<String>,
    },
    GrandCanonical {
        beta: f64,
        #[serde(default)]
        mu: f64,
        #[serde(rename = "N", default)]
        particles: Option<String>,
        #[serde(rename = "H", default)]
        hamiltonian: Option<String>,
    },
    Csv {
        path: PathBuf,
    },
    Weights {
        weights: Vec<f64>,
    },
}

fn scalar(text: &str) -> Value {
    let t = text.trim();
    if let Ok(n) = t.parse::<u64>() {
        return Value::from(n);
    }
    if let Ok(n) = t.parse::<i64>() {
        return Value::from(n);
    }
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => Value::from(t),
    }
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let origin = format!("state `{text}`");
        let t = text.trim();
        if t.starts_with('{') {
            return from_json(t, &origin);
        }
        let (kind, rest) = t.split_once(':').unwrap_or((t, ""));
        let kind = kind.trim().replace('-', "_");
        let mut object = Map::new();
        object.insert("kind".into(), Value::from(kind.as_str()));
        if kind == "csv" {
            object.insert("path".into(), Value::from(rest.trim()));
        } else {
            for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    Failure::Input(format!("{origin}: `{pair}` is not of the form key=value"))
                })?;
                object.insert(key.trim().to_string(), scalar(value));
            }
        }
        from_value(Value::Object(object), &origin)
    }

    pub fn build(&self, ctx: &Context) -> Result<State, Failure> {
        let len = ctx.phase.size();
        Ok(match self {
            StateSpec::Uniform => State::uniform(len)?,
            StateSpec::Dirac { index } => State::dirac(len, *index)?,
            StateSpec::Gibbs { beta, hamiltonian } => {
                State::gibbs(&ctx.hamiltonian(hamiltonian.as_deref())?, *beta)?
            }
            StateSpec::Microcanonical {
                energy,
                width,
                hamiltonian,
            } => State::microcanonical(&ctx.hamiltonian(hamiltonian.as_deref())?, *energy, *width)?,
            StateSpec::GrandCanonical {
                beta,
                mu,
                particles,
                hamiltonian,
            } => State::grand_canonical(
                &ctx.hamiltonian(hamiltonian.as_deref())?,
                &ctx.observable_or(particles.as_deref(), "N", "occupation")?,
                *beta,
                *mu,
            )?,
            StateSpec::Csv { path } => {
                let file = fs::File::open(path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                io::read_state(file, len).map_err(|e| match e {
                    e if e.is_input_error() => Failure::Input(format!("{}: {e}", path.display())),
                    e => e.into(),
                })?
            }
            StateSpec::Weights { weights } => State::new(weights.clone())?,
        })
    }
}

/// Inline JSON, or `@path` to a JSON file. The form is a list of intervals
/// `{"lo":..,"hi":..,"lo_closed":..,"hi_closed":..}`; a missing or null
/// endpoint is infinite.
pub fn borel(text: &str) -> Result<BorelSet, Failure> {
    match text.strip_prefix('@') {
        Some(path) => from_json(&read_text(Path::new(path))?, path),
        None => from_json(text, "--borel"),
    }
}

/// Parameters of a `converge` run; flags override fields read from an
/// experiment file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub model: Option<ModelFile>,
    pub sizes: Option<Vec<usize>>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub shell_width: Option<f64>,
    pub center: Option<f64>,
    pub probe: Option<String>,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        from_json(&read_text(path)?, &path.display().to_string())
    }
}

/// A comma-separated list of axis lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

pub fn sizes(text: &str) -> Result<Sizes, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{s}` is not a size"))
        })
        .collect::<Result<_, _>>()
        .map(Sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_and_json_agree() {
        let a = StateSpec::parse("microcanonical:E=-1,dE=0").unwrap();
        let b = StateSpec::parse(r#"{"kind":"microcanonical","E":-1,"dE":0}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a,
            StateSpec::Microcanonical {
                energy: -1.0,
                width: 0.0,
                hamiltonian: None
            }
        );
        assert_eq!(StateSpec::parse("uniform").unwrap(), StateSpec::Uniform);
        assert_eq!(
            StateSpec::parse("dirac:index=3").unwrap(),
            StateSpec::Dirac { index: 3 }
        );
        assert_eq!(
            StateSpec::parse("grand-canonical:beta=0.5,mu=1,N=occupation").unwrap(),
            StateSpec::GrandCanonical {
                beta: 0.5,
                mu: 1.0,
                particles: Some("occupation".into()),
                hamiltonian: None
            }
        );
        assert_eq!(
            StateSpec::parse("csv:dir/a,b.csv").unwrap(),
            StateSpec::Csv {
                path: "dir/a,b.csv".into()
            }
        );
    }

    #[test]
    fn diagnostics_name_the_field() {
        let msg = |t: &str| match StateSpec::parse(t) {
            Err(Failure::Input(m)) => m,
            other => panic!("expected input failure, got {other:?}"),
        };
        assert!(msg("gibbs:bta=1").contains("bta"));
        assert!(msg("gibbs:beta=hot").contains("beta"));
        assert!(msg("thermal").contains("thermal"));
        assert!(msg(r#"{"kind":"dirac","index":-1}"#).contains("index"));
    }

    #[test]
    fn model_paths_in_errors() {
        let err = from_json::<ModelFile>(r#"{"dims":[2],"alphabet":[-1,"x"]}"#, "m.json");
        match err {
            Err(Failure::Input(m)) => assert!(m.contains("alphabet[1]"), "{m}"),
            _ => panic!(),
        }
    }

    #[test]
    fn size_lists() {
        assert_eq!(sizes("4, 6,8").unwrap(), Sizes(vec![4, 6, 8]));
        assert!(sizes("4,x").is_err());
    }
}
