//! States: probability weight tables on the phase space.
//!
//! Every state is a finite sum of Dirac masses, and its value on an
//! observable is the weighted sum of the observable's table. Sums use a
//! fixed pairwise order so results are bit-stable.

use crate::error::{Error, Result};
use crate::numeric::{pairwise_dot, pairwise_sum};
use crate::observable::Observable;
use crate::phase::{PhaseSpace, Region};
use crate::question::Question;

/// Normalisation tolerance for weight tables.
pub const TAU_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    weights: Vec<f64>,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if let Some((k, &w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidState(format!(
            "weight {w} at index {k} is negative or not finite"
        )));
    }
    let sum = pairwise_sum(weights);
    if (sum - 1.0).abs() > TAU_NORM {
        return Err(Error::WeightSum { sum });
    }
    Ok(())
}

fn normalise(mut weights: Vec<f64>) -> Result<Vec<f64>> {
    let total = pairwise_sum(&weights);
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidState(format!(
            "cannot normalise weights with total {total}"
        )));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

impl State {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidState("empty weight table".into()));
        }
        check_weights(&weights)?;
        Ok(Self { weights })
    }

    /// Normalises nonnegative weights by their total.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        if let Some((k, &w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidState(format!(
                "weight {w} at index {k} is negative or not finite"
            )));
        }
        Self::new(normalise(weights)?)
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidState("empty phase space".into()));
        }
        Ok(Self {
            weights: vec![1.0 / len as f64; len],
        })
    }

    /// The pure state concentrated on configuration `index`.
    pub fn dirac(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::UnknownConfiguration { index, size: len });
        }
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// ζ(f) = Σ_x f(x) σ(x).
    pub fn pair(&self, f: &Observable) -> Result<f64> {
        f.check_len(self.len())?;
        Ok(pairwise_dot(f.values(), &self.weights))
    }

    /// σ(F), the mass of a question. Same value as `pair` on `χ_F`.
    pub fn mass(&self, q: &Question) -> Result<f64> {
        self.pair(&q.to_observable())
    }

    /// Convex combination Σ t_i ζ_i.
    ///
    /// The result is renormalised only if rounding pushed its total outside
    /// `TAU_NORM`; otherwise entries are exactly the weighted sums.
    pub fn mix(ts: &[f64], states: &[State]) -> Result<State> {
        if ts.len() != states.len() {
            return Err(Error::Mismatch {
                expected: ts.len(),
                found: states.len(),
            });
        }
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("mixture of no states".into()))?;
        if let Some(t) = ts.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mixture coefficient {t} is negative or not finite"
            )));
        }
        let t_sum = pairwise_sum(ts);
        if (t_sum - 1.0).abs() > TAU_NORM {
            return Err(Error::WeightSum { sum: t_sum });
        }
        let len = first.len();
        for s in states {
            if s.len() != len {
                return Err(Error::Mismatch {
                    expected: len,
                    found: s.len(),
                });
            }
        }
        let mut weights = vec![0.0; len];
        for (t, s) in ts.iter().zip(states) {
            for (w, v) in weights.iter_mut().zip(&s.weights) {
                *w += t * v;
            }
        }
        if (pairwise_sum(&weights) - 1.0).abs() > TAU_NORM {
            weights = normalise(weights)?;
        }
        State::new(weights)
    }

    /// Uniform distribution on the shell `|H - energy| <= width`.
    pub fn microcanonical(h: &Observable, energy: f64, width: f64) -> Result<State> {
        if !(energy.is_finite() && width.is_finite() && width >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shell E={energy}, dE={width} must be finite with dE >= 0"
            )));
        }
        let shell: Vec<bool> = h
            .values()
            .iter()
            .map(|&v| (v - energy).abs() <= width)
            .collect();
        let count = shell.iter().filter(|&&b| b).count();
        if count == 0 {
            let nearest = h
                .values()
                .iter()
                .copied()
                .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
                .unwrap_or(f64::NAN);
            return Err(Error::EmptyShell {
                energy,
                width,
                nearest,
            });
        }
        let w = 1.0 / count as f64;
        State::new(shell.iter().map(|&b| if b { w } else { 0.0 }).collect())
    }

    /// Canonical state with weights ∝ exp(-β H).
    pub fn gibbs(h: &Observable, beta: f64) -> Result<State> {
        Self::boltzmann(h.values().iter().map(|&e| -beta * e), beta)
    }

    /// Grand-canonical state with weights ∝ exp(-β (H - μ N)).
    pub fn grand_canonical(h: &Observable, n: &Observable, beta: f64, mu: f64) -> Result<State> {
        n.check_len(h.len())?;
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "chemical potential {mu} is not finite"
            )));
        }
        Self::boltzmann(
            h.values()
                .iter()
                .zip(n.values())
                .map(|(&e, &k)| -beta * (e - mu * k)),
            beta,
        )
    }

    fn boltzmann(log_weights: impl Iterator<Item = f64>, beta: f64) -> Result<State> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature {beta} is not finite"
            )));
        }
        let log_weights: Vec<f64> = log_weights.collect();
        let shift = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::InvalidParameter(
                "Boltzmann exponents are not finite".into(),
            ));
        }
        let weights = log_weights.iter().map(|l| (l - shift).exp()).collect();
        State::new(normalise(weights)?)
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Extreme points of the state set are exactly the Dirac states.
    pub fn is_pure(&self) -> bool {
        self.support_size() == 1
    }

    /// Writes the state as Σ σ(x) δ_x over its support.
    pub fn decompose(&self) -> (Vec<f64>, Vec<State>) {
        let len = self.len();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| (w, State::dirac(len, k).expect("index in range")))
            .unzip()
    }

    /// Largest entrywise difference between weight tables.
    pub fn max_abs_diff(&self, other: &State) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Mismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Total-variation distance, `sup_F |σ1(F) - σ2(F)| = ½ Σ |σ1 - σ2|`.
    pub fn total_variation(&self, other: &State) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Mismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let diffs: Vec<f64> = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(0.5 * pairwise_sum(&diffs))
    }

    pub fn marginalize(&self, phase: &PhaseSpace, region: &Region) -> Result<LocalState> {
        phase.check_region(region)?;
        if self.len() != phase.size() {
            return Err(Error::Mismatch {
                expected: phase.size(),
                found: self.len(),
            });
        }
        let mut weights = vec![0.0; phase.local_size(region)];
        for (k, &w) in self.weights.iter().enumerate() {
            weights[phase.local_rank(k, region)] += w;
        }
        Ok(LocalState {
            region: region.clone(),
            weights,
        })
    }
}

/// A probability table over the local configurations of one region.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalState {
    region: Region,
    weights: Vec<f64>,
}

impl LocalState {
    pub fn new(phase: &PhaseSpace, region: Region, weights: Vec<f64>) -> Result<Self> {
        phase.check_region(&region)?;
        let expected = phase.local_size(&region);
        if weights.len() != expected {
            return Err(Error::IncompleteTable {
                sites: region.len(),
                expected,
                found: weights.len(),
            });
        }
        check_weights(&weights)?;
        Ok(Self { region, weights })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Marginal onto a subregion.
    pub fn marginalize(&self, phase: &PhaseSpace, smaller: &Region) -> Result<LocalState> {
        if !smaller.is_subset(&self.region) {
            return Err(Error::UnknownRegion(format!(
                "{smaller} is not contained in {}",
                self.region
            )));
        }
        let mut weights = vec![0.0; phase.local_size(smaller)];
        for (rank, &w) in self.weights.iter().enumerate() {
            weights[phase.sub_rank(rank, &self.region, smaller)] += w;
        }
        Ok(LocalState {
            region: smaller.clone(),
            weights,
        })
    }
}

/// One local state per region, consistent under marginalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    entries: Vec<LocalState>,
}

impl Thread {
    /// Builds a thread from local states without checking consistency.
    pub fn from_entries(entries: Vec<LocalState>) -> Self {
        Self { entries }
    }

    /// The marginals of `state` on every region of the model.
    pub fn of(state: &State, phase: &PhaseSpace) -> Result<Thread> {
        let entries = phase
            .regions()
            .iter()
            .map(|r| state.marginalize(phase, r))
            .collect::<Result<_>>()?;
        Ok(Thread { entries })
    }

    pub fn entries(&self) -> &[LocalState] {
        &self.entries
    }

    pub fn get(&self, region: &Region) -> Option<&LocalState> {
        self.entries.iter().find(|e| &e.region == region)
    }

    /// Checks every pair `r1 ⊊ r2` and reports the first violation.
    pub fn check_consistency(&self, phase: &PhaseSpace) -> Result<()> {
        for larger in &self.entries {
            for smaller in &self.entries {
                if smaller.region == larger.region || !smaller.region.is_subset(&larger.region) {
                    continue;
                }
                let projected = larger.marginalize(phase, &smaller.region)?;
                let discrepancy = projected
                    .weights
                    .iter()
                    .zip(&smaller.weights)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if discrepancy > TAU_NORM {
                    return Err(Error::InconsistentThread {
                        smaller: smaller.region.to_string(),
                        larger: larger.region.to_string(),
                        discrepancy,
                    });
                }
            }
        }
        Ok(())
    }

    /// The global state carried by the entry on the whole lattice.
    pub fn to_state(&self, phase: &PhaseSpace) -> Result<State> {
        self.check_consistency(phase)?;
        let full = phase.full_region();
        let entry = self
            .get(&full)
            .ok_or_else(|| Error::UnknownRegion(format!("thread has no entry for {full}")))?;
        State::new(entry.weights.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::phase::ModelSpec;

    fn two() -> PhaseSpace {
        PhaseSpace::build(&ModelSpec::ising_chain(2)).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let x = two();
        let m = builtins::magnetization(&x);
        assert_eq!(State::uniform(4).unwrap().pair(&m).unwrap(), 0.0);
        for k in 0..4 {
            assert_eq!(State::dirac(4, k).unwrap().pair(&m).unwrap(), m.values()[k]);
        }
        let g0 = State::gibbs(&builtins::energy(&x), 0.0).unwrap();
        let up = Question::chi(4, [3]).unwrap();
        assert_eq!(g0.mass(&up).unwrap(), 0.25);
        assert!(State::uniform(4)
            .unwrap()
            .pair(&Observable::new(vec![1.0]).unwrap())
            .is_err());
    }

    #[test]
    fn dirac_examples() {
        let x = two();
        let h = builtins::energy(&x);
        let down_up = x.index_of_values(&[-1.0, 1.0]).unwrap();
        let delta = State::dirac(4, down_up).unwrap();
        let excited = builtins::indicator(&h, builtins::Comparison::Eq, 1.0);
        assert_eq!(delta.pair(&excited).unwrap(), 1.0);
        assert_eq!(
            delta.pair(&Observable::constant(&x, 1.0).unwrap()).unwrap(),
            1.0
        );
        assert!(State::dirac(4, 4).is_err());
        assert!(delta.is_pure());
    }

    #[test]
    fn mixtures() {
        let g = State::gibbs(&builtins::energy(&two()), 1.0).unwrap();
        let same = State::mix(&[1.0], std::slice::from_ref(&g)).unwrap();
        assert_eq!(same, g);
        let half = State::mix(
            &[0.5, 0.5],
            &[State::dirac(4, 0).unwrap(), State::dirac(4, 2).unwrap()],
        )
        .unwrap();
        assert_eq!(half.mass(&Question::chi(4, [0]).unwrap()).unwrap(), 0.5);
        let three = State::mix(
            &[0.2, 0.3, 0.5],
            &[
                State::dirac(4, 0).unwrap(),
                State::dirac(4, 1).unwrap(),
                State::dirac(4, 3).unwrap(),
            ],
        )
        .unwrap();
        let total = three.mass(&Question::unit(4)).unwrap();
        assert!((total - 1.0).abs() <= TAU_NORM);
        assert!(matches!(
            State::mix(&[0.5, 0.4], &[g.clone(), g.clone()]),
            Err(Error::WeightSum { .. })
        ));
        assert!(State::mix(&[1.0], &[g.clone(), g.clone()]).is_err());
        assert!(State::mix(&[], &[]).is_err());
    }

    #[test]
    fn microcanonical_shells() {
        let x = two();
        let h = builtins::energy(&x);
        let m = builtins::magnetization(&x);
        let ground = State::microcanonical(&h, -1.0, 0.0).unwrap();
        assert_eq!(ground.weights(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(ground.pair(&m).unwrap(), 0.0);
        let excited = State::microcanonical(&h, 1.0, 0.0).unwrap();
        assert_eq!(excited.weights(), &[0.0, 0.5, 0.5, 0.0]);
        let all = State::microcanonical(&h, 0.0, 2.0).unwrap();
        assert_eq!(all, State::uniform(4).unwrap());
        match State::microcanonical(&h, 0.2, 0.1) {
            Err(Error::EmptyShell { nearest, .. }) => assert_eq!(nearest, 1.0),
            other => panic!("expected empty shell, got {other:?}"),
        }
    }

    #[test]
    fn gibbs_two_site_partition_function() {
        let x = two();
        let h = builtins::energy(&x);
        assert_eq!(State::gibbs(&h, 0.0).unwrap(), State::uniform(4).unwrap());
        for beta in [0.3, 1.0, 2.5, -0.7] {
            let g = State::gibbs(&h, beta).unwrap();
            // Oracle: Z = 2e^β + 2e^{-β}, H(++) = -1.
            let z: f64 = 2.0 * f64::exp(beta) + 2.0 * f64::exp(-beta);
            let p_up = f64::exp(beta) / z;
            assert!((g.weights()[3] - p_up).abs() < 1e-15);
        }
        let cold = State::gibbs(&h, 50.0).unwrap();
        let ground = Question::chi(4, [0, 3]).unwrap();
        assert!((cold.mass(&ground).unwrap() - 1.0).abs() < 1e-9);
        let huge = State::gibbs(&h, 1e5).unwrap();
        assert_eq!(huge.weights(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(State::gibbs(&h, f64::INFINITY).is_err());
    }

    #[test]
    fn grand_canonical_matches_canonical_at_zero_mu() {
        let x = PhaseSpace::build(&ModelSpec::ising_chain(3)).unwrap();
        let h = builtins::energy(&x);
        let n = builtins::occupation(&x);
        assert_eq!(
            State::grand_canonical(&h, &n, 0.8, 0.0).unwrap(),
            State::gibbs(&h, 0.8).unwrap()
        );
        let gc = State::grand_canonical(&h, &n, 1.0, 0.5).unwrap();
        let shifted = State::gibbs(
            &h.combine(crate::Combine::Sub, &n.scale(0.5).unwrap())
                .unwrap(),
            1.0,
        )
        .unwrap();
        assert!(gc.max_abs_diff(&shifted).unwrap() < 1e-15);
    }

    #[test]
    fn marginals() {
        let x = PhaseSpace::build(&ModelSpec::ising_chain(3)).unwrap();
        let u = State::uniform(8)
            .unwrap()
            .marginalize(&x, &Region::new([0, 2]))
            .unwrap();
        assert_eq!(u.weights(), &[0.25; 4]);
        let k = x.index_of_values(&[1.0, -1.0, 1.0]).unwrap();
        let d = State::dirac(8, k)
            .unwrap()
            .marginalize(&x, &Region::new([1, 2]))
            .unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0, 0.0, 0.0]);
        let two = two();
        let g = State::gibbs(&builtins::energy(&two), 1.0).unwrap();
        let site0 = g.marginalize(&two, &Region::new([0])).unwrap();
        assert!((site0.weights()[1] - 0.5).abs() < 1e-15);
        assert!(g.marginalize(&two, &Region::new([3])).is_err());
    }

    #[test]
    fn thread_round_trip() {
        let x = PhaseSpace::build(&ModelSpec::ising_chain(4)).unwrap();
        let g = State::gibbs(&builtins::energy(&x), 1.0).unwrap();
        let thread = Thread::of(&g, &x).unwrap();
        thread.check_consistency(&x).unwrap();
        assert_eq!(thread.to_state(&x).unwrap(), g);
        let u = Thread::of(&State::uniform(16).unwrap(), &x).unwrap();
        for e in u.entries() {
            let n = e.weights().len() as f64;
            assert!(e.weights().iter().all(|&w| w == 1.0 / n));
        }
    }

    #[test]
    fn inconsistent_thread_is_rejected() {
        let x = two();
        let g = State::gibbs(&builtins::energy(&x), 1.0).unwrap();
        let mut entries = Thread::of(&g, &x).unwrap().entries().to_vec();
        // Site-0 marginal no longer matches the pair marginal.
        entries[0] = LocalState::new(&x, Region::new([0]), vec![0.9, 0.1]).unwrap();
        let err = Thread::from_entries(entries).to_state(&x).unwrap_err();
        match err {
            Error::InconsistentThread {
                smaller, larger, ..
            } => {
                assert_eq!(smaller, "{0}");
                assert_eq!(larger, "{0,1}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decomposition_is_exact() {
        let x = PhaseSpace::build(&ModelSpec::ising_chain(3)).unwrap();
        let g = State::gibbs(&builtins::energy(&x), 0.7).unwrap();
        let (ts, diracs) = g.decompose();
        assert_eq!(State::mix(&ts, &diracs).unwrap(), g);
        assert!(!g.is_pure());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(State::new(vec![0.5, 0.6]).is_err());
        assert!(State::new(vec![1.5, -0.5]).is_err());
        assert!(State::new(vec![]).is_err());
        assert!(State::from_unnormalized(vec![0.0, 0.0]).is_err());
        assert_eq!(
            State::from_unnormalized(vec![1.0, 3.0]).unwrap().weights(),
            &[0.25, 0.75]
        );
    }
}
