//! Finite unions of real intervals.
//!
//! A spectral measure only ever looks at `B ∩ spectrum(f)`, and spectra are
//! finite, so finite interval unions are enough to stand in for the Borel
//! sets of the line. Sets are kept canonical (sorted, disjoint, merged,
//! infinite endpoints open), so structural equality is set equality.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    fn make(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval::make(lo, hi, lo_closed, hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<IntervalRecord>", into = "Vec<IntervalRecord>")]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

/// JSON form of an interval; a missing or null endpoint is infinite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalRecord {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl TryFrom<Vec<IntervalRecord>> for BorelSet {
    type Error = Error;

    fn try_from(records: Vec<IntervalRecord>) -> Result<Self> {
        records
            .into_iter()
            .map(|r| {
                BorelSet::interval(
                    r.lo.unwrap_or(f64::NEG_INFINITY),
                    r.hi.unwrap_or(f64::INFINITY),
                    r.lo_closed,
                    r.hi_closed,
                )
            })
            .try_fold(BorelSet::empty(), |acc, b| Ok(acc.union(&b?)))
    }
}

impl From<BorelSet> for Vec<IntervalRecord> {
    fn from(b: BorelSet) -> Self {
        b.intervals
            .iter()
            .map(|iv| IntervalRecord {
                lo: iv.lo.is_finite().then_some(iv.lo),
                hi: iv.hi.is_finite().then_some(iv.hi),
                lo_closed: iv.lo_closed,
                hi_closed: iv.hi_closed,
            })
            .collect()
    }
}

impl BorelSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn real_line() -> Self {
        Self {
            intervals: vec![Interval::make(
                f64::NEG_INFINITY,
                f64::INFINITY,
                false,
                false,
            )],
        }
    }

    pub fn interval(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidBorel("interval endpoint is NaN".into()));
        }
        Ok(Self::canonical(vec![Interval::make(
            lo, hi, lo_closed, hi_closed,
        )]))
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, true, true)
    }

    /// `(-∞, λ]`.
    pub fn at_most(lambda: f64) -> Result<Self> {
        Self::interval(f64::NEG_INFINITY, lambda, false, true)
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::closed(x, x)
    }

    pub fn points(xs: impl IntoIterator<Item = f64>) -> Result<Self> {
        xs.into_iter()
            .try_fold(Self::empty(), |acc, x| Ok(acc.union(&Self::point(x)?)))
    }

    pub fn from_intervals(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.iter().any(|iv| iv.lo.is_nan() || iv.hi.is_nan()) {
            return Err(Error::InvalidBorel("interval endpoint is NaN".into()));
        }
        Ok(Self::canonical(
            intervals
                .into_iter()
                .map(|iv| Interval::make(iv.lo, iv.hi, iv.lo_closed, iv.hi_closed))
                .collect(),
        ))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &BorelSet) -> BorelSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::canonical(all)
    }

    pub fn intersection(&self, other: &BorelSet) -> BorelSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                out.push(a.intersect(b));
            }
        }
        Self::canonical(out)
    }

    pub fn complement(&self) -> BorelSet {
        let mut gaps = Vec::with_capacity(self.intervals.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        let mut lo_closed = false;
        for iv in &self.intervals {
            gaps.push(Interval::make(lo, iv.lo, lo_closed, !iv.lo_closed));
            lo = iv.hi;
            lo_closed = !iv.hi_closed;
        }
        gaps.push(Interval::make(lo, f64::INFINITY, lo_closed, false));
        Self::canonical(gaps)
    }

    pub fn difference(&self, other: &BorelSet) -> BorelSet {
        self.intersection(&other.complement())
    }

    pub fn is_subset(&self, other: &BorelSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &BorelSet) -> bool {
        self.intersection(other).is_empty()
    }

    fn canonical(mut intervals: Vec<Interval>) -> BorelSet {
        intervals.retain(|iv| !iv.is_empty());
        intervals.sort_by(|a, b| {
            a.lo.total_cmp(&b.lo)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            if let Some(cur) = merged.last_mut() {
                let touches =
                    iv.lo < cur.hi || (iv.lo == cur.hi && (cur.hi_closed || iv.lo_closed));
                if touches {
                    if iv.hi > cur.hi {
                        cur.hi = iv.hi;
                        cur.hi_closed = iv.hi_closed;
                    } else if iv.hi == cur.hi {
                        cur.hi_closed |= iv.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        BorelSet { intervals: merged }
    }
}

impl fmt::Display for BorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merging() {
        let a = BorelSet::interval(0.0, 1.0, true, false).unwrap();
        let b = BorelSet::closed(1.0, 2.0).unwrap();
        assert_eq!(a.union(&b), BorelSet::closed(0.0, 2.0).unwrap());
        let c = BorelSet::open(0.0, 1.0)
            .unwrap()
            .union(&BorelSet::open(1.0, 2.0).unwrap());
        assert_eq!(c.intervals().len(), 2);
        assert!(!c.contains(1.0));
        assert!(BorelSet::open(1.0, 1.0).unwrap().is_empty());
        assert!(!BorelSet::point(1.0).unwrap().is_empty());
    }

    #[test]
    fn complements() {
        assert_eq!(BorelSet::empty().complement(), BorelSet::real_line());
        assert_eq!(BorelSet::real_line().complement(), BorelSet::empty());
        let p = BorelSet::point(0.0).unwrap();
        let c = p.complement();
        assert!(!c.contains(0.0));
        assert!(c.contains(1e-300) && c.contains(-1e-300));
        assert_eq!(c.complement(), p);
        let half = BorelSet::at_most(3.0).unwrap();
        assert_eq!(
            half.complement(),
            BorelSet::interval(3.0, f64::INFINITY, false, false).unwrap()
        );
    }

    #[test]
    fn infinite_endpoints_are_open() {
        let b = BorelSet::interval(f64::NEG_INFINITY, 0.0, true, true).unwrap();
        assert!(!b.intervals()[0].lo_closed);
        assert!(BorelSet::interval(f64::NAN, 0.0, true, true).is_err());
    }

    #[test]
    fn json_round_trip() {
        let b = BorelSet::open(-1.0, 3.0)
            .unwrap()
            .union(&BorelSet::at_most(-5.0).unwrap());
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(
            text,
            r#"[{"lo":null,"hi":-5.0,"lo_closed":false,"hi_closed":true},{"lo":-1.0,"hi":3.0,"lo_closed":false,"hi_closed":false}]"#
        );
        let back: BorelSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
        let sparse: BorelSet = serde_json::from_str(r#"[{"lo":0,"lo_closed":true}]"#).unwrap();
        assert!(sparse.contains(0.0) && sparse.contains(1e300) && !sparse.contains(-1e-9));
    }

    fn endpoint() -> impl Strategy<Value = f64> {
        prop_oneof![
            8 => (-6i32..=6).prop_map(|v| v as f64 / 2.0),
            1 => Just(f64::NEG_INFINITY),
            1 => Just(f64::INFINITY),
        ]
    }

    fn interval() -> impl Strategy<Value = Interval> {
        (endpoint(), endpoint(), any::<bool>(), any::<bool>())
            .prop_map(|(a, b, lc, hc)| Interval::make(a.min(b), a.max(b), lc, hc))
    }

    fn borel() -> impl Strategy<Value = BorelSet> {
        proptest::collection::vec(interval(), 0..5)
            .prop_map(|ivs| BorelSet::from_intervals(ivs).unwrap())
    }

    // Probe points: every half-integer in range plus the quarter points
    // between them, so every open/closed distinction is visible.
    fn probes() -> Vec<f64> {
        (-30..=30).map(|k| k as f64 / 4.0).collect()
    }

    proptest! {
        #[test]
        fn set_operations_agree_pointwise(a in borel(), b in borel()) {
            for x in probes() {
                prop_assert_eq!(a.union(&b).contains(x), a.contains(x) || b.contains(x));
                prop_assert_eq!(a.intersection(&b).contains(x), a.contains(x) && b.contains(x));
                prop_assert_eq!(a.complement().contains(x), !a.contains(x));
            }
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert!(a.intersection(&b).is_subset(&a));
        }

        #[test]
        fn canonical_form_is_unique(a in borel(), b in borel()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.intersection(&b), b.intersection(&a));
            for w in a.intervals().windows(2) {
                prop_assert!(w[0].hi <= w[1].lo);
            }
        }
    }
}
