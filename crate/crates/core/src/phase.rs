//! Finite lattice models and their configuration space.
//!
//! A model is a hypercubic box of sites, each carrying one symbol from a
//! finite real alphabet. The phase space is the set of all assignments,
//! enumerated in lexicographic order of site values with site 0 the most
//! significant digit. Sites are numbered row-major (last axis fastest).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dims: Vec<usize>,
    pub alphabet: Vec<f64>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ModelSpec {
    pub fn new(dims: Vec<usize>, alphabet: Vec<f64>, boundary: Boundary) -> Self {
        Self {
            dims,
            alphabet,
            boundary,
        }
    }

    /// Open Ising chain of `n` spins with alphabet {-1, +1}.
    pub fn ising_chain(n: usize) -> Self {
        Self::new(vec![n], vec![-1.0, 1.0], Boundary::Open)
    }

    pub fn site_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of configurations, saturating at `u128::MAX`.
    pub fn configuration_count(&self) -> u128 {
        let a = self.alphabet.len() as u128;
        let mut total: u128 = 1;
        for _ in 0..self.site_count() {
            total = total.saturating_mul(a);
        }
        total
    }

    pub fn validate(&self, cap: usize) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidModel(
                "dims must name at least one axis".into(),
            ));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidModel(
                "every lattice extent must be positive".into(),
            ));
        }
        if self.alphabet.is_empty() {
            return Err(Error::InvalidModel("alphabet is empty".into()));
        }
        if let Some(v) = self.alphabet.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "alphabet value {v} is not finite"
            )));
        }
        let mut sorted = self.alphabet.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(
                "alphabet values must be distinct".into(),
            ));
        }
        let size = self.configuration_count();
        if size > cap as u128 {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(())
    }
}

/// A set of lattice sites, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(sites: impl IntoIterator<Item = usize>) -> Self {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        sites.dedup();
        Self { sites }
    }

    pub fn full(site_count: usize) -> Self {
        Self {
            sites: (0..site_count).collect(),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// A full assignment of symbols to sites, stored as alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    symbols: Vec<usize>,
}

impl Configuration {
    pub fn from_symbols(symbols: Vec<usize>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }
}

/// The restriction of a configuration to a region. `symbols[i]` belongs to
/// `region.sites()[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalConfiguration {
    pub region: Region,
    pub symbols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpace {
    spec: ModelSpec,
    alphabet: Vec<f64>,
    site_count: usize,
    size: usize,
    // place[s] = |alphabet|^(n - 1 - s): weight of site s in the rank.
    place: Vec<usize>,
}

impl PhaseSpace {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        Self::build_with_cap(spec, DEFAULT_ENUMERATION_CAP)
    }

    pub fn build_with_cap(spec: &ModelSpec, cap: usize) -> Result<Self> {
        spec.validate(cap)?;
        let mut alphabet = spec.alphabet.clone();
        alphabet.sort_by(f64::total_cmp);
        let site_count = spec.site_count();
        let a = alphabet.len();
        let mut place = vec![1usize; site_count];
        for s in (0..site_count.saturating_sub(1)).rev() {
            place[s] = place[s + 1] * a;
        }
        let size = place.first().map_or(1, |p| p * a);
        Ok(Self {
            spec: spec.clone(),
            alphabet,
            site_count,
            size,
            place,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dims(&self) -> &[usize] {
        &self.spec.dims
    }

    pub fn boundary(&self) -> Boundary {
        self.spec.boundary
    }

    /// The alphabet in ascending order; symbol indices refer to this order.
    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// |X|.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::UnknownConfiguration {
                index,
                size: self.size,
            })
        }
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site < self.site_count {
            Ok(())
        } else {
            Err(Error::UnknownSite {
                site,
                sites: self.site_count,
            })
        }
    }

    pub fn check_region(&self, region: &Region) -> Result<()> {
        region.sites().iter().try_for_each(|&s| self.check_site(s))
    }

    /// Alphabet index held by `site` in configuration `index`.
    #[inline]
    pub fn symbol_at(&self, index: usize, site: usize) -> usize {
        (index / self.place[site]) % self.alphabet.len()
    }

    #[inline]
    pub fn value_at(&self, index: usize, site: usize) -> f64 {
        self.alphabet[self.symbol_at(index, site)]
    }

    pub fn configuration(&self, index: usize) -> Result<Configuration> {
        self.check_index(index)?;
        Ok(Configuration {
            symbols: (0..self.site_count)
                .map(|s| self.symbol_at(index, s))
                .collect(),
        })
    }

    pub fn index_of(&self, x: &Configuration) -> Result<usize> {
        if x.symbols.len() != self.site_count {
            return Err(Error::Mismatch {
                expected: self.site_count,
                found: x.symbols.len(),
            });
        }
        let a = self.alphabet.len();
        let mut index = 0;
        for (site, &sym) in x.symbols.iter().enumerate() {
            if sym >= a {
                return Err(Error::InvalidModel(format!(
                    "symbol index {sym} at site {site} is outside an alphabet of {a}"
                )));
            }
            index += sym * self.place[site];
        }
        Ok(index)
    }

    /// Look up a configuration by its site values.
    pub fn index_of_values(&self, values: &[f64]) -> Result<usize> {
        let symbols = values
            .iter()
            .map(|v| {
                self.alphabet
                    .iter()
                    .position(|a| a == v)
                    .ok_or_else(|| Error::InvalidModel(format!("{v} is not in the alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.index_of(&Configuration { symbols })
    }

    pub fn values(&self, x: &Configuration) -> Vec<f64> {
        x.symbols.iter().map(|&s| self.alphabet[s]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.size).map(move |k| Configuration {
            symbols: (0..self.site_count).map(|s| self.symbol_at(k, s)).collect(),
        })
    }

    pub fn restrict(&self, x: &Configuration, region: &Region) -> Result<LocalConfiguration> {
        self.check_region(region)?;
        if x.symbols.len() != self.site_count {
            return Err(Error::Mismatch {
                expected: self.site_count,
                found: x.symbols.len(),
            });
        }
        Ok(LocalConfiguration {
            region: region.clone(),
            symbols: region.sites().iter().map(|&s| x.symbols[s]).collect(),
        })
    }

    /// Number of local configurations of `region`.
    pub fn local_size(&self, region: &Region) -> usize {
        self.alphabet.len().pow(region.len() as u32)
    }

    /// Lexicographic rank of the restriction of configuration `index` to
    /// `region`. The region must already be checked.
    #[inline]
    pub fn local_rank(&self, index: usize, region: &Region) -> usize {
        let a = self.alphabet.len();
        region
            .sites()
            .iter()
            .fold(0, |acc, &s| acc * a + self.symbol_at(index, s))
    }

    pub fn local_rank_of(&self, local: &LocalConfiguration) -> usize {
        let a = self.alphabet.len();
        local.symbols.iter().fold(0, |acc, &s| acc * a + s)
    }

    /// Rank of the restriction of a local configuration on `larger` to
    /// `smaller`, both given by rank. Requires `smaller ⊆ larger`.
    pub fn sub_rank(&self, rank: usize, larger: &Region, smaller: &Region) -> usize {
        let a = self.alphabet.len();
        let n = larger.len();
        let mut out = 0;
        for &site in smaller.sites() {
            let pos = larger
                .sites()
                .binary_search(&site)
                .expect("smaller region must be contained in larger");
            let digit = (rank / a.pow((n - 1 - pos) as u32)) % a;
            out = out * a + digit;
        }
        out
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let dims = &self.spec.dims;
        let mut coords = vec![0; dims.len()];
        let mut rest = site;
        for axis in (0..dims.len()).rev() {
            coords[axis] = rest % dims[axis];
            rest /= dims[axis];
        }
        coords
    }

    pub fn site_at(&self, coords: &[usize]) -> Result<usize> {
        let dims = &self.spec.dims;
        if coords.len() != dims.len() || coords.iter().zip(dims).any(|(c, d)| c >= d) {
            return Err(Error::InvalidModel(format!(
                "coordinates {coords:?} lie outside the lattice {dims:?}"
            )));
        }
        Ok(coords.iter().zip(dims).fold(0, |acc, (c, d)| acc * d + c))
    }

    /// Nearest-neighbour bonds, each listed once as `(i, j)` with `i < j`.
    ///
    /// Periodic wrap bonds are only added along axes of extent greater than
    /// two; for extent two the wrap bond coincides with the interior one.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let dims = &self.spec.dims;
        let mut bonds = Vec::new();
        for site in 0..self.site_count {
            let coords = self.coords(site);
            for axis in 0..dims.len() {
                let mut next = coords.clone();
                if coords[axis] + 1 < dims[axis] {
                    next[axis] += 1;
                } else if self.spec.boundary == Boundary::Periodic && dims[axis] > 2 {
                    next[axis] = 0;
                } else {
                    continue;
                }
                let other = self.site_at(&next).expect("neighbour inside lattice");
                bonds.push((site.min(other), site.max(other)));
            }
        }
        bonds.sort_unstable();
        bonds
    }

    /// All contiguous sub-boxes, ordered by site count and then by their
    /// site lists; the full lattice comes last.
    pub fn regions(&self) -> Vec<Region> {
        let dims = &self.spec.dims;
        // Per axis, every interval [lo, hi].
        let intervals: Vec<Vec<(usize, usize)>> = dims
            .iter()
            .map(|&d| {
                (0..d)
                    .flat_map(|lo| (lo..d).map(move |hi| (lo, hi)))
                    .collect()
            })
            .collect();
        let mut boxes: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for axis in &intervals {
            boxes = boxes
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&iv| {
                        let mut b = prefix.clone();
                        b.push(iv);
                        b
                    })
                })
                .collect();
        }
        let mut regions: Vec<Region> = boxes
            .iter()
            .map(|b| {
                let mut sites = Vec::new();
                self.collect_box(b, 0, &mut Vec::new(), &mut sites);
                Region::new(sites)
            })
            .collect();
        regions.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        regions
    }

    fn collect_box(
        &self,
        b: &[(usize, usize)],
        axis: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<usize>,
    ) {
        if axis == b.len() {
            out.push(self.site_at(prefix).expect("box inside lattice"));
            return;
        }
        for c in b[axis].0..=b[axis].1 {
            prefix.push(c);
            self.collect_box(b, axis + 1, prefix, out);
            prefix.pop();
        }
    }

    pub fn full_region(&self) -> Region {
        Region::full(self.site_count)
    }
}

/// Regions of a model without enumerating its configurations.
pub fn enumerate_regions(spec: &ModelSpec) -> Result<Vec<Region>> {
    // Regions do not depend on the alphabet size, so skip the cap.
    Ok(PhaseSpace::build_with_cap(spec, usize::MAX)?.regions())
}
