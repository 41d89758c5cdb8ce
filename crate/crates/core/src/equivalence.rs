//! Separation of states and observables, weak equivalence at finite
//! accuracy, and finite-size ensemble comparisons.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::builtins;
use crate::error::{Error, Result};
use crate::measurement::probability_of_measure;
use crate::observable::{Observable, Precision};
use crate::phase::{ModelSpec, PhaseSpace};
use crate::question::Question;
use crate::spectral::SpectralMeasure;
use crate::state::{State, TAU_NORM};

/// A question whose transmission differs between two states.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub question: Question,
    /// ζ1(χ_F) - ζ2(χ_F).
    pub gap: f64,
}

/// Finds `F = {x : σ1(x) > σ2(x)}`, whose mass gap is the total-variation
/// distance. Returns `None` iff the weight tables agree within `TAU_NORM`.
pub fn separating_observable(s1: &State, s2: &State) -> Result<Option<Separation>> {
    if s1.max_abs_diff(s2)? <= TAU_NORM {
        return Ok(None);
    }
    let (w1, w2) = (s1.weights(), s2.weights());
    let mut question = Question::from_predicate(s1.len(), |k| w1[k] > w2[k]);
    let mut gap = s1.mass(&question)? - s2.mass(&question)?;
    if gap == 0.0 {
        // Both totals sit within rounding of 1 and all excess is on one side.
        question = Question::from_predicate(s1.len(), |k| w1[k] < w2[k]);
        gap = s1.mass(&question)? - s2.mass(&question)?;
    }
    Ok(Some(Separation { question, gap }))
}

/// A pure state on which two observables take different values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableWitness {
    pub index: usize,
    pub state: State,
    pub f_value: f64,
    pub g_value: f64,
}

/// Returns the Dirac state at the first configuration where `f` and `g`
/// differ, or `None` if their tables are equal.
pub fn states_separate_observables(
    f: &Observable,
    g: &Observable,
) -> Result<Option<ObservableWitness>> {
    g.check_len(f.len())?;
    let Some(index) = f.values().iter().zip(g.values()).position(|(a, b)| a != b) else {
        return Ok(None);
    };
    Ok(Some(ObservableWitness {
        index,
        state: State::dirac(f.len(), index)?,
        f_value: f.values()[index],
        g_value: g.values()[index],
    }))
}

#[derive(Debug, Clone)]
pub struct ProbeSet {
    probes: Vec<(String, Observable)>,
    epsilon: f64,
}

impl ProbeSet {
    pub fn new(probes: Vec<(String, Observable)>, epsilon: f64) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::InvalidParameter("probe set is empty".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "accuracy {epsilon} must be positive and finite"
            )));
        }
        Ok(Self { probes, epsilon })
    }

    pub fn probes(&self) -> &[(String, Observable)] {
        &self.probes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeGap {
    pub name: String,
    pub gap: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakEquivalence {
    pub equivalent: bool,
    pub epsilon: f64,
    pub gaps: Vec<ProbeGap>,
}

/// Whether `ζ2` lies in every neighbourhood `{ζ : |ζ1(f) - ζ(f)| < ε}` of
/// the probe set.
pub fn weakly_equivalent(s1: &State, s2: &State, probes: &ProbeSet) -> Result<WeakEquivalence> {
    let gaps = probes
        .probes
        .iter()
        .map(|(name, f)| {
            let gap = (s1.pair(f)? - s2.pair(f)?).abs();
            Ok(ProbeGap {
                name: name.clone(),
                gap,
                within: gap < probes.epsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakEquivalence {
        equivalent: gaps.iter().all(|g| g.within),
        epsilon: probes.epsilon,
        gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Microcanonical,
    Canonical,
    GrandCanonical,
    /// A caller-supplied state, used by the dominated-convergence demo.
    Reference,
}

impl Ensemble {
    pub const STANDARD: [Ensemble; 3] = [
        Ensemble::Microcanonical,
        Ensemble::Canonical,
        Ensemble::GrandCanonical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Microcanonical => "microcanonical",
            Ensemble::Canonical => "canonical",
            Ensemble::GrandCanonical => "grand-canonical",
            Ensemble::Reference => "reference",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "microcanonical" => Ok(Ensemble::Microcanonical),
            "canonical" => Ok(Ensemble::Canonical),
            "grand-canonical" => Ok(Ensemble::GrandCanonical),
            "reference" => Ok(Ensemble::Reference),
            other => Err(Error::Parse(format!("unknown ensemble `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub sites: usize,
    pub ensemble: Ensemble,
    /// β for the Gibbs ensembles, the shell energy for the microcanonical
    /// one, the scale c_t in the dominated-convergence demo.
    pub parameter: f64,
    pub expectation: f64,
    pub deviation_probability: f64,
    /// |m - m_canonical| at the same size, when a canonical row exists.
    pub gap_to_canonical: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn rows_for(&self, ensemble: Ensemble) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.ensemble == ensemble)
    }

    pub fn row(&self, sites: usize, ensemble: Ensemble) -> Option<&ConvergenceRow> {
        self.rows
            .iter()
            .find(|r| r.sites == sites && r.ensemble == ensemble)
    }

    /// True when the ensemble has at least two rows and its deviation
    /// probabilities strictly decrease with size.
    pub fn deviation_strictly_decreasing(&self, ensemble: Ensemble) -> bool {
        let devs: Vec<f64> = self
            .rows_for(ensemble)
            .map(|r| r.deviation_probability)
            .collect();
        devs.len() >= 2 && devs.windows(2).all(|w| w[1] < w[0])
    }

    /// |m_canonical - m_microcanonical| at the given size.
    pub fn cross_gap(&self, sites: usize) -> Option<f64> {
        self.row(sites, Ensemble::Microcanonical)?.gap_to_canonical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub beta: f64,
    /// Half-width of the window around the limit value.
    pub delta: f64,
    /// Chemical potential of the grand-canonical ensemble.
    pub mu: f64,
    /// Microcanonical shell half-width.
    pub shell_width: f64,
    /// Limit value m*. `None` uses the canonical expectation at the largest
    /// size.
    pub center: Option<f64>,
}

impl Default for ConvergenceSetup {
    fn default() -> Self {
        Self {
            beta: 1.0,
            delta: 0.1,
            mu: 0.0,
            shell_width: 0.0,
            center: None,
        }
    }
}

/// Observables that define one ensemble-convergence experiment.
pub struct ConvergenceModel<'a> {
    pub hamiltonian: &'a dyn Fn(&PhaseSpace) -> Result<Observable>,
    pub probe: &'a dyn Fn(&PhaseSpace) -> Result<Observable>,
    pub particle_number: &'a dyn Fn(&PhaseSpace) -> Result<Observable>,
}

impl ConvergenceModel<'static> {
    /// Ising energy, magnetization per site, and up-spin count.
    pub fn ising() -> Self {
        Self {
            hamiltonian: &|x| Ok(builtins::energy(x)),
            probe: &|x| Ok(builtins::magnetization_per_site(x)),
            particle_number: &|x| Ok(builtins::occupation(x)),
        }
    }
}

/// The attainable energy nearest `target`; ties go to the lower energy.
pub fn nearest_level(h: &Observable, target: f64) -> f64 {
    h.values()
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - target)
                .abs()
                .total_cmp(&(b - target).abs())
                .then(a.total_cmp(b))
        })
        .expect("nonempty phase space")
}

struct Cell {
    sites: usize,
    ensemble: Ensemble,
    parameter: f64,
    expectation: f64,
    measure: SpectralMeasure,
    state: State,
}

/// Exact comparison of the three standard ensembles on models of growing
/// size.
///
/// The microcanonical energy is the attainable level nearest the canonical
/// mean energy at the same β. Each row reports the probe's expectation and
/// the probability that it falls outside `[m* - δ, m* + δ]`.
pub fn ensemble_convergence(
    specs: &[ModelSpec],
    setup: &ConvergenceSetup,
    model: &ConvergenceModel<'_>,
    cap: usize,
) -> Result<ConvergenceReport> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no model sizes given".into()));
    }
    if !(setup.delta >= 0.0 && setup.delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "deviation threshold {} must be finite and nonnegative",
            setup.delta
        )));
    }
    if specs
        .windows(2)
        .any(|w| w[1].site_count() <= w[0].site_count())
    {
        return Err(Error::InvalidParameter(
            "model sizes must be strictly ascending".into(),
        ));
    }

    let mut cells = Vec::new();
    for spec in specs {
        let phase = PhaseSpace::build_with_cap(spec, cap)?;
        let h = (model.hamiltonian)(&phase)?;
        let probe = (model.probe)(&phase)?;
        let n = (model.particle_number)(&phase)?;
        let measure = SpectralMeasure::of(&probe, Precision::Exact);

        let canonical = State::gibbs(&h, setup.beta)?;
        let energy = nearest_level(&h, canonical.pair(&h)?);
        let micro = State::microcanonical(&h, energy, setup.shell_width)?;
        let grand = State::grand_canonical(&h, &n, setup.beta, setup.mu)?;

        for (ensemble, parameter, state) in [
            (Ensemble::Microcanonical, energy, micro),
            (Ensemble::Canonical, setup.beta, canonical),
            (Ensemble::GrandCanonical, setup.beta, grand),
        ] {
            cells.push(Cell {
                sites: phase.site_count(),
                ensemble,
                parameter,
                expectation: state.pair(&probe)?,
                measure: measure.clone(),
                state,
            });
        }
    }

    let center = match setup.center {
        Some(c) => c,
        None => cells
            .iter()
            .rev()
            .find(|c| c.ensemble == Ensemble::Canonical)
            .map(|c| c.expectation)
            .expect("at least one size"),
    };
    let window = BorelSet::closed(center - setup.delta, center + setup.delta)?.complement();

    let mut rows = Vec::with_capacity(cells.len());
    for cell in &cells {
        let canonical = cells
            .iter()
            .find(|c| c.sites == cell.sites && c.ensemble == Ensemble::Canonical)
            .map(|c| c.expectation);
        rows.push(ConvergenceRow {
            sites: cell.sites,
            ensemble: cell.ensemble,
            parameter: cell.parameter,
            expectation: cell.expectation,
            deviation_probability: probability_of_measure(&cell.measure, &cell.state, &window)?,
            gap_to_canonical: canonical.map(|m| (cell.expectation - m).abs()),
        });
    }
    Ok(ConvergenceReport { rows })
}

/// How the scale `c_t` of `f_t = c_t χ_{A_t}` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScaleRule {
    /// `c_t = 1 / P(A_t)`, so every expectation is 1.
    InverseProbability,
    /// A fixed scale; with `c = 1` the family is dominated by `g = 1`.
    Constant(f64),
}

/// `A_t` is the configuration with every site at the top alphabet symbol.
pub fn all_up_event(phase: &PhaseSpace) -> Result<Question> {
    let top = phase.alphabet().len() - 1;
    let index = phase.index_of(&crate::phase::Configuration::from_symbols(vec![
        top;
        phase
            .site_count(
            )
    ]))?;
    Question::chi(phase.size(), [index])
}

/// Builds `f_t = c_t χ_{A_t}` on each model and reports `ζ_t(f_t)` next to
/// `P(f_t ≠ 0)`. With `c_t P(A_t) = 1` the expectations stay at 1 while
/// `f_t → 0` in probability.
pub fn dominated_convergence_demo(
    specs: &[ModelSpec],
    event: &dyn Fn(&PhaseSpace) -> Result<Question>,
    scale: ScaleRule,
    state: &dyn Fn(&PhaseSpace) -> Result<State>,
    cap: usize,
) -> Result<ConvergenceReport> {
    let nonzero = BorelSet::point(0.0)?.complement();
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let phase = PhaseSpace::build_with_cap(spec, cap)?;
        let zeta = state(&phase)?;
        let a = event(&phase)?;
        let p_a = zeta.mass(&a)?;
        if p_a <= 0.0 {
            return Err(Error::InvalidRule(format!(
                "event has probability {p_a} on a lattice of {} sites",
                phase.site_count()
            )));
        }
        let c = match scale {
            ScaleRule::InverseProbability => 1.0 / p_a,
            ScaleRule::Constant(c) => c,
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidRule(format!(
                "scale {c} must be positive and finite"
            )));
        }
        let f = a.to_observable().scale(c)?;
        let measure = SpectralMeasure::of(&f, Precision::Exact);
        rows.push(ConvergenceRow {
            sites: phase.site_count(),
            ensemble: Ensemble::Reference,
            parameter: c,
            expectation: zeta.pair(&f)?,
            deviation_probability: probability_of_measure(&measure, &zeta, &nonzero)?,
            gap_to_canonical: None,
        });
    }
    Ok(ConvergenceReport { rows })
}
