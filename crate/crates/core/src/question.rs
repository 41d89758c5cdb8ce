//! Questions: the idempotents of the observable algebra, held as subsets of
//! the phase space.
//!
//! A question is a packed bitmask over configuration indices. Meet, join and
//! complement are word-parallel, which keeps joins over very large families
//! cheap. Bits past the end of the phase space are always zero, so equal
//! subsets have equal representations.

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::observable::{Observable, Precision};

const WORD: usize = u64::BITS as usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Question {
    len: usize,
    words: Vec<u64>,
}

impl Question {
    /// The 0 of the logic: the empty set.
    pub fn zero(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    /// The 1 of the logic: the whole phase space.
    pub fn unit(len: usize) -> Self {
        let mut q = Self {
            len,
            words: vec![!0; len.div_ceil(WORD)],
        };
        q.clear_tail();
        q
    }

    /// χ_F for `F` given as configuration indices.
    pub fn chi(len: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut q = Self::zero(len);
        for index in members {
            if index >= len {
                return Err(Error::UnknownConfiguration { index, size: len });
            }
            q.words[index / WORD] |= 1 << (index % WORD);
        }
        Ok(q)
    }

    pub fn from_predicate(len: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut q = Self::zero(len);
        for index in (0..len).filter(|&k| pred(k)) {
            q.words[index / WORD] |= 1 << (index % WORD);
        }
        q
    }

    /// Reads an idempotent observable back as the set where it equals 1.
    pub fn from_observable(f: &Observable, precision: Precision) -> Result<Self> {
        if !f.is_idempotent(precision) {
            return Err(Error::InvalidParameter(
                "observable is not idempotent".into(),
            ));
        }
        let tol = precision.idempotence_tolerance();
        let values = f.values();
        Ok(Self::from_predicate(values.len(), |k| {
            (values[k] - 1.0).abs() <= tol
        }))
    }

    /// Size of the phase space this question lives on.
    pub fn universe(&self) -> usize {
        self.len
    }

    /// φ: the subset of X, as ascending indices.
    pub fn phi(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * WORD + tz)
            })
        })
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.len && self.words[index / WORD] & (1 << (index % WORD)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.count() == self.len
    }

    fn check_same(&self, other: &Question) -> Result<()> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(Error::Mismatch {
                expected: self.len,
                found: other.len,
            })
        }
    }

    fn zip_with(&self, other: &Question, op: impl Fn(u64, u64) -> u64) -> Result<Question> {
        self.check_same(other)?;
        Ok(Question {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn meet(&self, other: &Question) -> Result<Question> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn join(&self, other: &Question) -> Result<Question> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn complement(&self) -> Question {
        let mut q = Question {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        q.clear_tail();
        q
    }

    /// Join of an arbitrary family; the empty family gives the zero question.
    pub fn join_all<'a>(
        len: usize,
        family: impl IntoIterator<Item = &'a Question>,
    ) -> Result<Question> {
        let mut acc = Question::zero(len);
        for q in family {
            acc.check_same(q)?;
            for (a, b) in acc.words.iter_mut().zip(&q.words) {
                *a |= b;
            }
        }
        Ok(acc)
    }

    /// Meet of an arbitrary family; the empty family gives the unit question.
    pub fn meet_all<'a>(
        len: usize,
        family: impl IntoIterator<Item = &'a Question>,
    ) -> Result<Question> {
        let mut acc = Question::unit(len);
        for q in family {
            acc.check_same(q)?;
            for (a, b) in acc.words.iter_mut().zip(&q.words) {
                *a &= b;
            }
        }
        Ok(acc)
    }

    /// The order of the logic: `self ≤ other` iff `self ⊆ other`.
    pub fn le(&self, other: &Question) -> Result<bool> {
        self.check_same(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &Question) -> Result<bool> {
        self.check_same(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & b == 0))
    }

    /// χ_F as an element of the observable algebra.
    pub fn to_observable(&self) -> Observable {
        Observable::new(
            (0..self.len)
                .map(|k| if self.contains(k) { 1.0 } else { 0.0 })
                .collect(),
        )
        .expect("indicator values are finite")
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Serialised as the sorted list of member indices.
impl Serialize for Question {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.count()))?;
        for k in self.iter() {
            seq.serialize_element(&k)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::observable::Combine;
    use crate::phase::{ModelSpec, PhaseSpace};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn zero_and_unit() {
        assert!(Question::chi(4, []).unwrap().is_zero());
        assert_eq!(Question::chi(4, 0..4).unwrap(), Question::unit(4));
        assert_eq!(Question::unit(70).count(), 70);
        assert_eq!(Question::unit(64).complement(), Question::zero(64));
        assert!(Question::chi(4, [4]).is_err());
    }

    #[test]
    fn level_set_of_magnetization() {
        let x = PhaseSpace::build(&ModelSpec::ising_chain(2)).unwrap();
        let m = builtins::magnetization(&x);
        let q = Question::from_predicate(x.size(), |k| m.values()[k] == 0.0);
        let expected = vec![
            x.index_of_values(&[-1.0, 1.0]).unwrap(),
            x.index_of_values(&[1.0, -1.0]).unwrap(),
        ];
        assert_eq!(q.phi(), expected);
    }

    #[test]
    fn round_trips_and_ops() {
        assert!(Question::zero(8).phi().is_empty());
        assert_eq!(Question::chi(8, [3]).unwrap().phi(), vec![3]);
        let e = Question::chi(4, [0, 1]).unwrap();
        assert_eq!(e.complement().phi(), vec![2, 3]);
        assert!(e.meet(&e.complement()).unwrap().is_zero());
        let singles: Vec<Question> = (0..3).map(|k| Question::chi(4, [k]).unwrap()).collect();
        assert_eq!(
            Question::join_all(4, &singles).unwrap(),
            Question::chi(4, [0, 1, 2]).unwrap()
        );
        let a = Question::chi(4, [0, 1]).unwrap();
        let b = Question::chi(4, [1, 2]).unwrap();
        assert_eq!(a.meet(&b).unwrap().phi(), vec![1]);
    }

    #[test]
    fn degenerate_families() {
        assert_eq!(Question::join_all(10, []).unwrap(), Question::zero(10));
        let q = Question::chi(10, [2, 7]).unwrap();
        assert_eq!(Question::join_all(10, [&q]).unwrap(), q);
        assert_eq!(Question::meet_all(10, []).unwrap(), Question::unit(10));
    }

    #[test]
    fn mismatched_universes() {
        let a = Question::zero(4);
        let b = Question::zero(8);
        assert!(matches!(a.meet(&b), Err(Error::Mismatch { .. })));
        assert!(a.join(&b).is_err());
        assert!(Question::join_all(4, [&a, &b]).is_err());
        assert!(a.le(&b).is_err());
    }

    #[test]
    fn as_observable() {
        let e = Question::chi(6, [0, 2, 4]).unwrap();
        let f = Question::chi(6, [2, 3, 4, 5]).unwrap();
        let chi_e = e.to_observable();
        assert!(chi_e.is_idempotent(Precision::Exact));
        assert_eq!(
            chi_e.combine(Combine::Mul, &f.to_observable()).unwrap(),
            e.meet(&f).unwrap().to_observable()
        );
        assert_eq!(
            Question::from_observable(&chi_e, Precision::Exact).unwrap(),
            e
        );
        assert!(
            Question::from_observable(&Observable::new(vec![0.5]).unwrap(), Precision::Exact)
                .is_err()
        );
    }

    #[test]
    fn serialises_as_index_list() {
        let q = Question::chi(100, [70, 3, 64]).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), "[3,64,70]");
    }

    fn subset(len: usize) -> impl Strategy<Value = BTreeSet<usize>> {
        proptest::collection::btree_set(0..len, 0..=len)
    }

    proptest! {
        #[test]
        fn phi_is_a_lattice_isomorphism(e in subset(130), f in subset(130)) {
            let qe = Question::chi(130, e.iter().copied()).unwrap();
            let qf = Question::chi(130, f.iter().copied()).unwrap();
            let inter: Vec<usize> = e.intersection(&f).copied().collect();
            let union: Vec<usize> = e.union(&f).copied().collect();
            let comp: Vec<usize> = (0..130).filter(|k| !f.contains(k)).collect();
            prop_assert_eq!(qe.meet(&qf).unwrap().phi(), inter);
            prop_assert_eq!(Question::join_all(130, [&qe, &qf]).unwrap().phi(), union);
            prop_assert_eq!(qf.complement().phi(), comp);
            prop_assert_eq!(qe.le(&qf).unwrap(), e.is_subset(&f));
        }

        #[test]
        fn boolean_laws(e in subset(77), f in subset(77), g in subset(77)) {
            let a = Question::chi(77, e).unwrap();
            let b = Question::chi(77, f).unwrap();
            let c = Question::chi(77, g).unwrap();
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert_eq!(
                a.meet(&b).unwrap().complement(),
                a.complement().join(&b.complement()).unwrap()
            );
            prop_assert_eq!(
                a.join(&b).unwrap().complement(),
                a.complement().meet(&b.complement()).unwrap()
            );
            prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(
                a.meet(&b.join(&c).unwrap()).unwrap(),
                a.meet(&b).unwrap().join(&a.meet(&c).unwrap()).unwrap()
            );
        }

        #[test]
        fn infinite_distributivity(q in subset(90), family in proptest::collection::vec(subset(90), 0..90)) {
            let q = Question::chi(90, q).unwrap();
            let family: Vec<Question> =
                family.into_iter().map(|s| Question::chi(90, s).unwrap()).collect();
            let lhs = q.meet(&Question::join_all(90, &family).unwrap()).unwrap();
            let met: Vec<Question> = family.iter().map(|f| q.meet(f).unwrap()).collect();
            prop_assert_eq!(lhs, Question::join_all(90, &met).unwrap());
        }
    }
}
