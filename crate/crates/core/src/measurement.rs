//! Outcome probabilities of measurements.
//!
//! Measuring `f` on a system prepared in state `ζ` isolates it in one pure
//! configuration `x`, drawn from the weights of `ζ`, and reads off `f(x)`.
//! The probability that the outcome lies in a Borel set `B` is therefore the
//! `ζ`-mass of the question `[f ∈ B]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::observable::{Observable, Precision};
use crate::question::Question;
use crate::spectral::SpectralMeasure;
use crate::state::State;

/// p(Q^f, ζ, B) = ζ(χ_[f ∈ B]).
pub fn probability(f: &Observable, state: &State, b: &BorelSet) -> Result<f64> {
    f.check_len(state.len())?;
    probability_of_measure(&SpectralMeasure::of(f, Precision::Exact), state, b)
}

/// Same as [`probability`] for a precomputed spectral measure.
pub fn probability_of_measure(q: &SpectralMeasure, state: &State, b: &BorelSet) -> Result<f64> {
    state.pair(&q.apply(b).to_observable())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePoint {
    pub lambda: f64,
    pub probability: f64,
}

/// Probabilities of each spectral value, λ ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub points: Vec<OutcomePoint>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        let ps: Vec<f64> = self.points.iter().map(|p| p.probability).collect();
        pairwise_sum(&ps)
    }

    /// Σ λ p.
    pub fn mean(&self) -> f64 {
        let terms: Vec<f64> = self
            .points
            .iter()
            .map(|p| p.lambda * p.probability)
            .collect();
        pairwise_sum(&terms)
    }

    pub fn probability_of(&self, b: &BorelSet) -> f64 {
        let ps: Vec<f64> = self
            .points
            .iter()
            .filter(|p| b.contains(p.lambda))
            .map(|p| p.probability)
            .collect();
        pairwise_sum(&ps)
    }
}

pub fn outcome_distribution(f: &Observable, state: &State) -> Result<OutcomeDistribution> {
    f.check_len(state.len())?;
    let q = SpectralMeasure::of(f, Precision::Exact);
    let points = q
        .atoms()
        .iter()
        .map(|atom| {
            Ok(OutcomePoint {
                lambda: atom.lambda,
                probability: state.mass(&atom.question)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OutcomeDistribution { points })
}

/// Inverse-CDF sampler over configurations in canonical order.
#[derive(Debug, Clone)]
pub struct ConfigurationSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl ConfigurationSampler {
    pub fn new(state: &State) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = state
            .weights()
            .iter()
            .rposition(|&w| w > 0.0)
            .expect("a state has positive mass somewhere");
        Self {
            cumulative,
            last_positive,
        }
    }

    /// Configuration index for a uniform variate `u ∈ [0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let target = u * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= target);
        k.min(self.last_positive)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(rng.gen::<f64>())
    }
}

/// Outcomes of `n` independent measurements of `f` in state `ζ`.
///
/// Draws use ChaCha8 seeded with `seed` via `seed_from_u64`, one `f64`
/// variate per draw, so a seed fixes the whole sequence.
pub fn sample_measurements(f: &Observable, state: &State, n: usize, seed: u64) -> Result<Vec<f64>> {
    f.check_len(state.len())?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let sampler = ConfigurationSampler::new(state);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| f.values()[sampler.draw(&mut rng)]).collect())
}

/// Transmission probability of the filter `χ_F`: the mass of `F`.
///
/// Computed both as `ζ(χ_F)` and as the probability that measuring `χ_F`
/// lands in `(1/2, 3/2)`; the two must agree exactly.
pub fn transmission(filter: &Question, state: &State) -> Result<f64> {
    let chi = filter.to_observable();
    let direct = state.pair(&chi)?;
    let window = BorelSet::open(0.5, 1.5)?;
    let measured = probability(&chi, state, &window)?;
    if direct != measured {
        return Err(Error::Consistency(format!(
            "transmission {direct} differs from outcome probability {measured}"
        )));
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::phase::{ModelSpec, PhaseSpace};

    fn two() -> PhaseSpace {
        PhaseSpace::build(&ModelSpec::ising_chain(2)).unwrap()
    }

    #[test]
    fn probability_examples() {
        let x = two();
        let m = builtins::magnetization(&x);
        let u = State::uniform(4).unwrap();
        assert_eq!(probability(&m, &u, &BorelSet::real_line()).unwrap(), 1.0);
        assert_eq!(
            probability(&m, &u, &BorelSet::open(-1.0, 3.0).unwrap()).unwrap(),
            0.75
        );
        let shell = State::microcanonical(&builtins::energy(&x), -1.0, 0.0).unwrap();
        assert_eq!(
            probability(&m, &shell, &BorelSet::point(0.0).unwrap()).unwrap(),
            0.0
        );
        assert!(probability(&m, &State::uniform(3).unwrap(), &BorelSet::real_line()).is_err());
    }

    #[test]
    fn distributions() {
        let x = two();
        let m = builtins::magnetization(&x);
        let d = outcome_distribution(&m, &State::uniform(4).unwrap()).unwrap();
        let pairs: Vec<(f64, f64)> = d.points.iter().map(|p| (p.lambda, p.probability)).collect();
        assert_eq!(pairs, vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]);
        let c = Observable::constant(&x, 3.0).unwrap();
        let dc = outcome_distribution(&c, &State::uniform(4).unwrap()).unwrap();
        assert_eq!(
            dc.points,
            vec![OutcomePoint {
                lambda: 3.0,
                probability: 1.0
            }]
        );
        let dd = outcome_distribution(&m, &State::dirac(4, 3).unwrap()).unwrap();
        let probs: Vec<f64> = dd.points.iter().map(|p| p.probability).collect();
        assert_eq!(probs, vec![0.0, 0.0, 1.0]);
        assert_eq!(dd.mean(), 2.0);
    }

    #[test]
    fn sampling() {
        let x = two();
        let m = builtins::magnetization(&x);
        let d = State::dirac(4, 1).unwrap();
        assert!(sample_measurements(&m, &d, 50, 9)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let one = sample_measurements(&m, &State::uniform(4).unwrap(), 1, 3).unwrap();
        assert!([-2.0, 0.0, 2.0].contains(&one[0]));
        assert!(sample_measurements(&m, &d, 0, 1).is_err());
        let n = 100_000;
        let draws = sample_measurements(&m, &State::uniform(4).unwrap(), n, 42).unwrap();
        let freq = draws.iter().filter(|&&v| v == 0.0).count() as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.013);
        assert_eq!(
            draws,
            sample_measurements(&m, &State::uniform(4).unwrap(), n, 42).unwrap()
        );
    }

    #[test]
    fn sampler_skips_zero_weight() {
        let s = State::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let sampler = ConfigurationSampler::new(&s);
        assert_eq!(sampler.index_for(0.0), 1);
        assert_eq!(sampler.index_for(0.4999), 1);
        assert_eq!(sampler.index_for(0.5), 3);
        assert_eq!(sampler.index_for(0.999_999_999), 3);
    }

    #[test]
    fn transmissions() {
        let x = two();
        let g0 = State::gibbs(&builtins::energy(&x), 0.0).unwrap();
        assert_eq!(transmission(&Question::unit(4), &g0).unwrap(), 1.0);
        assert_eq!(transmission(&Question::zero(4), &g0).unwrap(), 0.0);
        assert_eq!(
            transmission(&Question::chi(4, [3]).unwrap(), &g0).unwrap(),
            0.25
        );
    }
}
