//! Real-valued functions on the phase space, stored as dense tables.

use crate::error::{Error, Result};
use crate::phase::{Configuration, PhaseSpace, Region};

/// Comparison mode for values that may come out of floating arithmetic.
///
/// `Exact` compares bit-for-bit and is the right choice for tables built from
/// integer-valued alphabets and indicators. `Relaxed` allows 1e-12 when testing
/// idempotence or equality, and groups spectral values within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Exact,
    Relaxed,
}

impl Precision {
    pub fn idempotence_tolerance(self) -> f64 {
        match self {
            Precision::Exact => 0.0,
            Precision::Relaxed => 1e-12,
        }
    }

    pub fn spectral_tolerance(self) -> f64 {
        match self {
            Precision::Exact => 0.0,
            Precision::Relaxed => 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Add,
    Sub,
    Mul,
    Min,
    Max,
}

impl Combine {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Combine::Add => a + b,
            Combine::Sub => a - b,
            Combine::Mul => a * b,
            Combine::Min => a.min(b),
            Combine::Max => a.max(b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Observable {
    values: Vec<f64>,
    support: Option<Region>,
}

/// Table equality; the support hint is ignored.
impl PartialEq for Observable {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Observable {
    /// Rejects non-finite entries. Negative zero is stored as zero.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        for v in &mut values {
            *v += 0.0;
        }
        Ok(Self {
            values,
            support: None,
        })
    }

    pub fn with_support(mut self, region: Region) -> Self {
        self.support = Some(region);
        self
    }

    pub fn from_fn(phase: &PhaseSpace, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((0..phase.size()).map(f).collect())
    }

    pub fn constant(phase: &PhaseSpace, c: f64) -> Result<Self> {
        Self::new(vec![c; phase.size()])
    }

    pub fn zero(phase: &PhaseSpace) -> Self {
        Self {
            values: vec![0.0; phase.size()],
            support: None,
        }
    }

    /// Cylinder extension of a table over the local configurations of
    /// `region`, indexed by local rank.
    pub fn local(phase: &PhaseSpace, region: &Region, local_fn: &[f64]) -> Result<Self> {
        phase.check_region(region)?;
        let expected = phase.local_size(region);
        if local_fn.len() != expected {
            return Err(Error::IncompleteTable {
                sites: region.len(),
                expected,
                found: local_fn.len(),
            });
        }
        let obs = Self::from_fn(phase, |k| local_fn[phase.local_rank(k, region)])?;
        Ok(obs.with_support(region.clone()))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn support(&self) -> Option<&Region> {
        self.support.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, phase: &PhaseSpace, x: &Configuration) -> Result<f64> {
        let k = phase.index_of(x)?;
        self.eval_index(k)
    }

    pub fn eval_index(&self, index: usize) -> Result<f64> {
        self.values
            .get(index)
            .copied()
            .ok_or(Error::UnknownConfiguration {
                index,
                size: self.values.len(),
            })
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::Mismatch {
                expected,
                found: self.values.len(),
            })
        }
    }

    pub fn combine(&self, op: Combine, other: &Observable) -> Result<Observable> {
        other.check_len(self.len())?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op.apply(a, b))
                .collect(),
        )
    }

    pub fn combine_scalar(&self, op: Combine, c: f64) -> Result<Observable> {
        Self::new(self.values.iter().map(|&a| op.apply(a, c)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Observable> {
        self.combine_scalar(Combine::Mul, c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Observable> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Every value is 0 or 1, up to the precision's idempotence tolerance.
    pub fn is_idempotent(&self, precision: Precision) -> bool {
        let tol = precision.idempotence_tolerance();
        self.values
            .iter()
            .all(|&v| v.abs() <= tol || (v - 1.0).abs() <= tol)
    }

    pub fn approx_eq(&self, other: &Observable, precision: Precision) -> bool {
        let tol = precision.idempotence_tolerance();
        self.len() == other.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}
