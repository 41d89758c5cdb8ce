//! Named observables for lattice spin models.
//!
//! Names accepted by [`parse`]:
//!
//! | name                       | value at x                               |
//! |----------------------------|------------------------------------------|
//! | `magnetization`            | sum of site values                       |
//! | `magnetization_per_site`   | magnetization / number of sites          |
//! | `energy`                   | `-Σ s_i s_j` over nearest-neighbour bonds |
//! | `occupation`               | number of sites holding the top symbol   |
//! | `spin(k)`                  | value at site `k`                        |
//! | `constant(c)`              | `c`                                      |
//! | `indicator(NAME OP VALUE)` | 1 where the comparison holds, else 0     |
//!
//! `OP` is one of `=`, `!=`, `<`, `<=`, `>`, `>=`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::phase::{PhaseSpace, Region};

pub fn magnetization(phase: &PhaseSpace) -> Observable {
    table(phase, |k| {
        (0..phase.site_count()).map(|s| phase.value_at(k, s)).sum()
    })
}

pub fn magnetization_per_site(phase: &PhaseSpace) -> Observable {
    let n = phase.site_count() as f64;
    table(phase, |k| {
        (0..phase.site_count())
            .map(|s| phase.value_at(k, s))
            .sum::<f64>()
            / n
    })
}

/// Nearest-neighbour Ising energy with unit coupling and no field.
pub fn energy(phase: &PhaseSpace) -> Observable {
    ising_energy(phase, 1.0, 0.0)
}

/// `-J Σ_<ij> s_i s_j - h Σ_i s_i`.
pub fn ising_energy(phase: &PhaseSpace, coupling: f64, field: f64) -> Observable {
    let bonds = phase.bonds();
    table(phase, |k| {
        let bond: f64 = bonds
            .iter()
            .map(|&(i, j)| phase.value_at(k, i) * phase.value_at(k, j))
            .sum();
        let spins: f64 = (0..phase.site_count()).map(|s| phase.value_at(k, s)).sum();
        -coupling * bond - field * spins
    })
}

/// Number of sites holding the largest alphabet symbol (up spins, occupied
/// lattice-gas cells).
pub fn occupation(phase: &PhaseSpace) -> Observable {
    let top = phase.alphabet().len() - 1;
    table(phase, |k| {
        (0..phase.site_count())
            .filter(|&s| phase.symbol_at(k, s) == top)
            .count() as f64
    })
}

pub fn spin(phase: &PhaseSpace, site: usize) -> Result<Observable> {
    phase.check_site(site)?;
    Ok(table(phase, |k| phase.value_at(k, site)).with_support(Region::new([site])))
}

fn table(phase: &PhaseSpace, f: impl Fn(usize) -> f64) -> Observable {
    Observable::from_fn(phase, f).expect("finite alphabet gives finite tables")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
        }
    }
}

pub fn indicator(f: &Observable, cmp: Comparison, value: f64) -> Observable {
    Observable::new(
        f.values()
            .iter()
            .map(|&v| if cmp.holds(v, value) { 1.0 } else { 0.0 })
            .collect(),
    )
    .expect("indicator values are finite")
}

pub fn parse(phase: &PhaseSpace, name: &str) -> Result<Observable> {
    parse_with(phase, name, &BTreeMap::new())
}

/// Like [`parse`], with `aliases` mapping extra names to expressions. Aliases
/// may refer to each other and may appear inside `indicator(...)`.
pub fn parse_with(
    phase: &PhaseSpace,
    name: &str,
    aliases: &BTreeMap<String, String>,
) -> Result<Observable> {
    parse_at_depth(phase, name, aliases, 0)
}

const MAX_ALIAS_DEPTH: usize = 32;

fn parse_at_depth(
    phase: &PhaseSpace,
    name: &str,
    aliases: &BTreeMap<String, String>,
    depth: usize,
) -> Result<Observable> {
    let name = name.trim();
    if let Some(expr) = aliases.get(name) {
        if depth >= MAX_ALIAS_DEPTH {
            return Err(Error::UnknownObservable(format!(
                "{name} (aliases form a cycle)"
            )));
        }
        return parse_at_depth(phase, expr, aliases, depth + 1);
    }
    match name {
        "magnetization" => return Ok(magnetization(phase)),
        "magnetization_per_site" => return Ok(magnetization_per_site(phase)),
        "energy" => return Ok(energy(phase)),
        "occupation" => return Ok(occupation(phase)),
        _ => {}
    }
    if let Some(arg) = call_argument(name, "spin") {
        let site = arg
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::UnknownObservable(name.to_string()))?;
        return spin(phase, site);
    }
    if let Some(arg) = call_argument(name, "constant") {
        let c = parse_number(arg, name)?;
        return Observable::constant(phase, c);
    }
    if let Some(arg) = call_argument(name, "indicator") {
        let (lhs, cmp, rhs) =
            split_comparison(arg).ok_or_else(|| Error::UnknownObservable(name.to_string()))?;
        let inner = parse_at_depth(phase, lhs, aliases, depth)?;
        let value = parse_number(rhs, name)?;
        return Ok(indicator(&inner, cmp, value));
    }
    Err(Error::UnknownObservable(name.to_string()))
}

fn call_argument<'a>(name: &'a str, func: &str) -> Option<&'a str> {
    name.strip_prefix(func)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn parse_number(s: &str, context: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::UnknownObservable(context.to_string()))
}

fn split_comparison(s: &str) -> Option<(&str, Comparison, &str)> {
    let at = s.find(['=', '!', '<', '>'])?;
    let (lhs, rest) = s.split_at(at);
    let (cmp, len) = match rest.as_bytes() {
        [b'<', b'=', ..] => (Comparison::Le, 2),
        [b'>', b'=', ..] => (Comparison::Ge, 2),
        [b'!', b'=', ..] => (Comparison::Ne, 2),
        [b'=', b'=', ..] => (Comparison::Eq, 2),
        [b'=', ..] => (Comparison::Eq, 1),
        [b'<', ..] => (Comparison::Lt, 1),
        [b'>', ..] => (Comparison::Gt, 1),
        _ => return None,
    };
    Some((lhs, cmp, &rest[len..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{Boundary, ModelSpec};

    fn chain(n: usize) -> PhaseSpace {
        PhaseSpace::build(&ModelSpec::ising_chain(n)).unwrap()
    }

    #[test]
    fn aliases_resolve_inside_expressions() {
        let x = chain(2);
        let aliases: BTreeMap<String, String> = [
            ("M".to_string(), "magnetization".to_string()),
            ("up".to_string(), "indicator(M > 0)".to_string()),
            ("loop".to_string(), "loop".to_string()),
        ]
        .into();
        assert_eq!(
            parse_with(&x, "up", &aliases).unwrap().values(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        assert!(parse_with(&x, "loop", &aliases).is_err());
        assert!(parse(&x, "M").is_err());
    }

    #[test]
    fn two_site_tables() {
        let x = chain(2);
        assert_eq!(magnetization(&x).values(), &[-2.0, 0.0, 0.0, 2.0]);
        assert_eq!(energy(&x).values(), &[-1.0, 1.0, 1.0, -1.0]);
        assert_eq!(occupation(&x).values(), &[0.0, 1.0, 1.0, 2.0]);
        assert_eq!(magnetization_per_site(&x).values(), &[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(spin(&x, 1).unwrap().values(), &[-1.0, 1.0, -1.0, 1.0]);
        assert!(spin(&x, 2).is_err());
    }

    #[test]
    fn ring_energy_counts_wrap_bond() {
        let x = PhaseSpace::build(&ModelSpec::new(
            vec![3],
            vec![-1.0, 1.0],
            Boundary::Periodic,
        ))
        .unwrap();
        let h = energy(&x);
        assert_eq!(h.values()[0], -3.0);
        // (-,-,+): bonds (0,1) aligned, (1,2) and (0,2) broken.
        assert_eq!(h.values()[1], 1.0);
    }

    #[test]
    fn field_term() {
        let x = chain(2);
        let h = ising_energy(&x, 0.0, 1.0);
        assert_eq!(h, magnetization(&x).scale(-1.0).unwrap());
    }

    #[test]
    fn parse_names() {
        let x = chain(2);
        assert_eq!(parse(&x, "magnetization").unwrap(), magnetization(&x));
        assert_eq!(parse(&x, " spin( 0 ) ").unwrap(), spin(&x, 0).unwrap());
        assert_eq!(parse(&x, "constant(2.5)").unwrap().values(), &[2.5; 4]);
        assert_eq!(
            parse(&x, "indicator(magnetization=2)").unwrap().values(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(
            parse(&x, "indicator(energy <= -1)").unwrap().values(),
            &[1.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(
            parse(&x, "indicator(spin(1)!=1)").unwrap().values(),
            &[1.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            parse(&x, "indicator(magnetization>0)").unwrap().values(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        assert!(matches!(
            parse(&x, "entropy"),
            Err(Error::UnknownObservable(_))
        ));
        assert!(parse(&x, "indicator(magnetization)").is_err());
        assert!(parse(&x, "spin(x)").is_err());
    }
}
