//! Question-valued measures on the real line and the spectral theorem for
//! observables.
//!
//! The spectral measure of `f` sends a Borel set `B` to the question
//! `[f ∈ B]`. On a finite phase space it is determined by its atoms: the
//! distinct values `λ_i` of `f` and their level sets `F_i`, which partition
//! the phase space. `f` is recovered as `Σ λ_i χ_{F_i}`, and any function
//! `g` of `f` as `Σ g(λ_i) χ_{F_i}`.

use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::error::{Error, Result};
use crate::observable::{Observable, Precision};
use crate::question::Question;

/// Distinct values of `f`, ascending. In relaxed mode values within 1e-9 of
/// the smallest member of their group are merged into it.
pub fn spectrum(f: &Observable, precision: Precision) -> Vec<f64> {
    level_sets(f, precision)
        .into_iter()
        .map(|(l, _)| l)
        .collect()
}

fn level_sets(f: &Observable, precision: Precision) -> Vec<(f64, Vec<usize>)> {
    let values = f.values();
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Tables are finite, so partial_cmp never fails; the sort is stable and
    // keeps indices ascending within a level.
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let tol = precision.spectral_tolerance();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in order {
        let v = values[k];
        match groups.last_mut() {
            Some((lambda, members)) if v - *lambda <= tol => members.push(k),
            _ => groups.push((v, vec![k])),
        }
    }
    for (_, members) in &mut groups {
        members.sort_unstable();
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub lambda: f64,
    #[serde(rename = "members")]
    pub question: Question,
}

/// JSON form of an atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomRecord {
    pub lambda: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    universe: usize,
    atoms: Vec<Atom>,
    precision: Precision,
}

impl SpectralMeasure {
    /// Q^f, with atoms in ascending λ.
    pub fn of(f: &Observable, precision: Precision) -> Self {
        let universe = f.len();
        let atoms = level_sets(f, precision)
            .into_iter()
            .map(|(lambda, members)| Atom {
                lambda,
                question: Question::chi(universe, members).expect("indices in range"),
            })
            .collect();
        Self {
            universe,
            atoms,
            precision,
        }
    }

    /// A measure given by atoms. The questions must partition the phase space
    /// and the λ must be finite and strictly ascending.
    pub fn new(universe: usize, atoms: Vec<Atom>, precision: Precision) -> Result<Self> {
        for (i, atom) in atoms.iter().enumerate() {
            if !atom.lambda.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has non-finite value {}",
                    atom.lambda
                )));
            }
            if atom.question.universe() != universe {
                return Err(Error::Mismatch {
                    expected: universe,
                    found: atom.question.universe(),
                });
            }
            if atom.question.is_zero() {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} at {} has an empty level set",
                    atom.lambda
                )));
            }
        }
        if atoms.windows(2).any(|w| w[0].lambda >= w[1].lambda) {
            return Err(Error::InvalidMeasure(
                "atom values must be strictly ascending".into(),
            ));
        }
        let mut covered = Question::zero(universe);
        for atom in &atoms {
            if !covered.is_disjoint(&atom.question)? {
                return Err(Error::InvalidMeasure(format!(
                    "level set at {} overlaps an earlier atom",
                    atom.lambda
                )));
            }
            covered = covered.join(&atom.question)?;
        }
        if !covered.is_unit() {
            return Err(Error::InvalidMeasure(format!(
                "atoms cover {} of {} configurations",
                covered.count(),
                universe
            )));
        }
        Ok(Self {
            universe,
            atoms,
            precision,
        })
    }

    pub fn from_records(
        universe: usize,
        records: Vec<AtomRecord>,
        precision: Precision,
    ) -> Result<Self> {
        let atoms = records
            .into_iter()
            .map(|r| {
                Ok(Atom {
                    lambda: r.lambda,
                    question: Question::chi(universe, r.members)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(universe, atoms, precision)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.lambda).collect()
    }

    /// Q(B): the join of the level sets whose value lies in `B`.
    pub fn apply(&self, b: &BorelSet) -> Question {
        Question::join_all(
            self.universe,
            self.atoms
                .iter()
                .filter(|a| b.contains(a.lambda))
                .map(|a| &a.question),
        )
        .expect("atoms share the measure's universe")
    }

    /// Q((-∞, λ]).
    pub fn resolution(&self, lambda: f64) -> Question {
        Question::join_all(
            self.universe,
            self.atoms
                .iter()
                .take_while(|a| a.lambda <= lambda)
                .map(|a| &a.question),
        )
        .expect("atoms share the measure's universe")
    }

    /// Σ λ_i χ_{F_i}.
    pub fn reconstruct(&self) -> Observable {
        let mut values = vec![0.0; self.universe];
        for atom in &self.atoms {
            for k in atom.question.iter() {
                values[k] = atom.lambda;
            }
        }
        Observable::new(values).expect("atom values are finite")
    }

    /// Σ g(λ_i) χ_{F_i}.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> Result<Observable> {
        let mut values = vec![0.0; self.universe];
        for atom in &self.atoms {
            let v = g(atom.lambda);
            if !v.is_finite() {
                return Err(Error::Undefined(atom.lambda));
            }
            for k in atom.question.iter() {
                values[k] = v;
            }
        }
        Observable::new(values)
    }

    pub fn to_records(&self) -> Vec<AtomRecord> {
        self.atoms
            .iter()
            .map(|a| AtomRecord {
                lambda: a.lambda,
                members: a.question.phi(),
            })
            .collect()
    }
}

impl Serialize for SpectralMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.atoms.serialize(s)
    }
}

/// `g ∘ f`, computed through the spectral measure of `f` and checked against
/// direct composition. `g` must be finite on the spectrum of `f`.
pub fn functional_calculus(g: impl Fn(f64) -> f64, f: &Observable) -> Result<Observable> {
    let via_measure = SpectralMeasure::of(f, Precision::Exact).integrate(&g)?;
    let direct = f.map(&g)?;
    if via_measure != direct {
        return Err(Error::Consistency(
            "spectral and pointwise functional calculus disagree".into(),
        ));
    }
    Ok(via_measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::phase::{ModelSpec, PhaseSpace};
    use proptest::prelude::*;

    fn two() -> PhaseSpace {
        PhaseSpace::build(&ModelSpec::ising_chain(2)).unwrap()
    }

    #[test]
    fn spectra() {
        let x = two();
        assert_eq!(
            spectrum(&Observable::constant(&x, 1.0).unwrap(), Precision::Exact),
            vec![1.0]
        );
        assert_eq!(
            spectrum(&builtins::magnetization(&x), Precision::Exact),
            vec![-2.0, 0.0, 2.0]
        );
        assert_eq!(
            spectrum(&builtins::energy(&x), Precision::Exact),
            vec![-1.0, 1.0]
        );
        let noisy = Observable::new(vec![0.1 + 0.2, 0.3, 1.0]).unwrap();
        assert_eq!(spectrum(&noisy, Precision::Exact).len(), 3);
        assert_eq!(spectrum(&noisy, Precision::Relaxed), vec![0.3, 1.0]);
    }

    #[test]
    fn magnetization_measure() {
        let x = two();
        let q = SpectralMeasure::of(&builtins::magnetization(&x), Precision::Exact);
        let sizes: Vec<usize> = q.atoms().iter().map(|a| a.question.count()).collect();
        assert_eq!(sizes, vec![1, 2, 1]);
        let b = BorelSet::open(-1.0, 3.0).unwrap();
        assert_eq!(q.apply(&b).phi(), vec![1, 2, 3]);
        assert!(q.apply(&BorelSet::empty()).is_zero());
        assert!(q.apply(&BorelSet::real_line()).is_unit());
        assert_eq!(q.reconstruct(), builtins::magnetization(&x));
    }

    #[test]
    fn indicator_and_constant_measures() {
        let f = Question::chi(5, [1, 3]).unwrap();
        let q = SpectralMeasure::of(&f.to_observable(), Precision::Exact);
        assert_eq!(q.atoms().len(), 2);
        assert_eq!(q.atoms()[0].lambda, 0.0);
        assert_eq!(q.atoms()[0].question, f.complement());
        assert_eq!(q.atoms()[1].question, f);
        assert_eq!(q.reconstruct(), f.to_observable());
        let c = Observable::new(vec![7.0; 5]).unwrap();
        let qc = SpectralMeasure::of(&c, Precision::Exact);
        assert_eq!(qc.atoms().len(), 1);
        assert!(qc.atoms()[0].question.is_unit());
        assert_eq!(qc.reconstruct(), c);
    }

    #[test]
    fn invalid_measures() {
        let a = Question::chi(4, [0, 1]).unwrap();
        let b = Question::chi(4, [1, 2, 3]).unwrap();
        let atoms = |qa: &Question, qb: &Question, la: f64, lb: f64| {
            vec![
                Atom {
                    lambda: la,
                    question: qa.clone(),
                },
                Atom {
                    lambda: lb,
                    question: qb.clone(),
                },
            ]
        };
        assert!(SpectralMeasure::new(4, atoms(&a, &b, 0.0, 1.0), Precision::Exact).is_err());
        let c = Question::chi(4, [2]).unwrap();
        assert!(SpectralMeasure::new(4, atoms(&a, &c, 0.0, 1.0), Precision::Exact).is_err());
        let d = Question::chi(4, [2, 3]).unwrap();
        assert!(SpectralMeasure::new(4, atoms(&a, &d, 1.0, 0.0), Precision::Exact).is_err());
        let q = SpectralMeasure::new(4, atoms(&a, &d, -1.0, 5.0), Precision::Exact).unwrap();
        assert_eq!(q.reconstruct().values(), &[-1.0, -1.0, 5.0, 5.0]);
    }

    #[test]
    fn calculus_examples() {
        let x = two();
        let m = builtins::magnetization(&x);
        assert_eq!(functional_calculus(|v| v, &m).unwrap(), m);
        let sq = functional_calculus(|v| v * v, &m).unwrap();
        assert_eq!(spectrum(&sq, Precision::Exact), vec![0.0, 4.0]);
        let b = BorelSet::open(-1.0, 3.0).unwrap();
        let ind = functional_calculus(|v| if b.contains(v) { 1.0 } else { 0.0 }, &m).unwrap();
        let q = SpectralMeasure::of(&m, Precision::Exact);
        assert_eq!(ind, q.apply(&b).to_observable());
        assert!(matches!(
            functional_calculus(|v| 1.0 / v, &m),
            Err(Error::Undefined(l)) if l == 0.0
        ));
    }

    #[test]
    fn json_form() {
        let q = SpectralMeasure::of(&builtins::energy(&two()), Precision::Exact);
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(
            text,
            r#"[{"lambda":-1.0,"members":[0,3]},{"lambda":1.0,"members":[1,2]}]"#
        );
        let records: Vec<AtomRecord> = serde_json::from_str(&text).unwrap();
        assert_eq!(
            SpectralMeasure::from_records(4, records, Precision::Exact).unwrap(),
            q
        );
    }

    fn table() -> impl Strategy<Value = Observable> {
        proptest::collection::vec(-4i32..=4, 1..200)
            .prop_map(|v| Observable::new(v.into_iter().map(|x| x as f64 / 2.0).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn spectral_round_trips(f in table()) {
            let q = SpectralMeasure::of(&f, Precision::Exact);
            prop_assert_eq!(q.reconstruct(), f.clone());
            let q2 = SpectralMeasure::new(f.len(), q.atoms().to_vec(), Precision::Exact).unwrap();
            prop_assert_eq!(SpectralMeasure::of(&q2.reconstruct(), Precision::Exact), q2);
        }

        #[test]
        fn resolution_is_monotone(f in table()) {
            let q = SpectralMeasure::of(&f, Precision::Exact);
            let spec = q.spectrum();
            for w in spec.windows(2) {
                prop_assert!(q.resolution(w[0]).le(&q.resolution(w[1])).unwrap());
            }
            prop_assert!(q.resolution(*spec.last().unwrap()).is_unit());
            prop_assert_eq!(q.resolution(spec[0] - 1.0), Question::zero(f.len()));
            for &l in &spec {
                prop_assert_eq!(q.resolution(l), q.apply(&BorelSet::at_most(l).unwrap()));
            }
        }
    }
}
