//! CSV readers and writers.
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! round-trips every `f64`. Every writer has a matching reader.

use std::io::{Read, Write};

use crate::equivalence::{ConvergenceReport, ConvergenceRow, Ensemble};
use crate::error::{Error, Result};
use crate::measurement::{OutcomeDistribution, OutcomePoint};
use crate::observable::{Observable, Precision};
use crate::phase::PhaseSpace;
use crate::question::Question;
use crate::spectral::{Atom, SpectralMeasure};
use crate::state::State;

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a number")))
}

fn parse_index(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not an index")))
}

fn records<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found.len() < header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            header.join(","),
            found.join(",")
        )));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| Ok((i + 2, r?)))
        .collect()
}

/// Reads `(index, value)` rows into a dense table, requiring each index in
/// `0..len` exactly once.
fn indexed_table<R: Read>(reader: R, header: &[&str], len: usize) -> Result<Vec<f64>> {
    let mut table = vec![None; len];
    for (line, rec) in records(reader, header)? {
        let k = parse_index(&rec[0], line)?;
        let v = parse_real(&rec[1], line)?;
        let slot = table.get_mut(k).ok_or(Error::UnknownConfiguration {
            index: k,
            size: len,
        })?;
        if slot.replace(v).is_some() {
            return Err(Error::Parse(format!("line {line}: index {k} repeated")));
        }
    }
    table
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::Parse(format!("index {k} missing"))))
        .collect()
}

fn write_indexed<W: Write>(w: W, header: [&str; 2], values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    for (k, v) in values.iter().enumerate() {
        wtr.write_record([k.to_string(), format_real(*v)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_configurations<W: Write>(phase: &PhaseSpace, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["config_index".to_string()];
    header.extend((0..phase.site_count()).map(|s| format!("s{s}")));
    wtr.write_record(&header)?;
    for k in 0..phase.size() {
        let mut row = vec![k.to_string()];
        row.extend((0..phase.site_count()).map(|s| format_real(phase.value_at(k, s))));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Rows of `(config_index, site values)`.
pub fn read_configurations<R: Read>(r: R) -> Result<Vec<(usize, Vec<f64>)>> {
    records(r, &["config_index"])?
        .into_iter()
        .map(|(line, rec)| {
            let k = parse_index(&rec[0], line)?;
            let values = rec
                .iter()
                .skip(1)
                .map(|f| parse_real(f, line))
                .collect::<Result<_>>()?;
            Ok((k, values))
        })
        .collect()
}

pub fn write_observable<W: Write>(f: &Observable, w: W) -> Result<()> {
    write_indexed(w, ["config_index", "value"], f.values())
}

pub fn read_observable<R: Read>(r: R, len: usize) -> Result<Observable> {
    Observable::new(indexed_table(r, &["config_index", "value"], len)?)
}

pub fn write_state<W: Write>(s: &State, w: W) -> Result<()> {
    write_indexed(w, ["config_index", "weight"], s.weights())
}

pub fn read_state<R: Read>(r: R, len: usize) -> Result<State> {
    State::new(indexed_table(r, &["config_index", "weight"], len)?)
}

pub fn write_distribution<W: Write>(d: &OutcomeDistribution, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["lambda", "probability"])?;
    for p in &d.points {
        wtr.write_record([format_real(p.lambda), format_real(p.probability)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_distribution<R: Read>(r: R) -> Result<OutcomeDistribution> {
    let points = records(r, &["lambda", "probability"])?
        .into_iter()
        .map(|(line, rec)| {
            Ok(OutcomePoint {
                lambda: parse_real(&rec[0], line)?,
                probability: parse_real(&rec[1], line)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OutcomeDistribution { points })
}

pub fn write_samples<W: Write>(outcomes: &[f64], w: W) -> Result<()> {
    write_indexed(w, ["draw_index", "outcome"], outcomes)
}

pub fn read_samples<R: Read>(r: R) -> Result<Vec<f64>> {
    let rows = records(r, &["draw_index", "outcome"])?;
    let len = rows.len();
    let mut out = vec![0.0; len];
    for (line, rec) in rows {
        let k = parse_index(&rec[0], line)?;
        *out.get_mut(k)
            .ok_or_else(|| Error::Parse(format!("line {line}: draw index {k} out of range")))? =
            parse_real(&rec[1], line)?;
    }
    Ok(out)
}

/// One row per member of the question.
pub fn write_question<W: Write>(q: &Question, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["config_index"])?;
    for k in q.iter() {
        wtr.write_record([k.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_question<R: Read>(r: R, len: usize) -> Result<Question> {
    let members = records(r, &["config_index"])?
        .into_iter()
        .map(|(line, rec)| parse_index(&rec[0], line))
        .collect::<Result<Vec<_>>>()?;
    Question::chi(len, members)
}

/// Long form: one `(lambda, config_index)` row per configuration, λ
/// ascending.
pub fn write_atoms<W: Write>(q: &SpectralMeasure, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["lambda", "config_index"])?;
    for atom in q.atoms() {
        let lambda = format_real(atom.lambda);
        for k in atom.question.iter() {
            wtr.write_record([lambda.as_str(), &k.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads atoms written by [`write_atoms`] and validates them as an exact
/// spectral measure on a phase space of size `len`.
pub fn read_atoms<R: Read>(r: R, len: usize) -> Result<SpectralMeasure> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (line, rec) in records(r, &["lambda", "config_index"])? {
        let lambda = parse_real(&rec[0], line)?;
        let k = parse_index(&rec[1], line)?;
        match groups.last_mut() {
            Some((l, members)) if *l == lambda => members.push(k),
            _ => groups.push((lambda, vec![k])),
        }
    }
    let atoms = groups
        .into_iter()
        .map(|(lambda, members)| {
            Ok(Atom {
                lambda,
                question: Question::chi(len, members)?,
            })
        })
        .collect::<Result<_>>()?;
    SpectralMeasure::new(len, atoms, Precision::Exact)
}

const REPORT_HEADER: [&str; 6] = [
    "sites",
    "ensemble",
    "parameter",
    "expectation",
    "deviation_probability",
    "gap_to_canonical",
];

pub fn write_report<W: Write>(report: &ConvergenceReport, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(REPORT_HEADER)?;
    for row in &report.rows {
        wtr.write_record([
            row.sites.to_string(),
            row.ensemble.name().to_string(),
            format_real(row.parameter),
            format_real(row.expectation),
            format_real(row.deviation_probability),
            row.gap_to_canonical.map(format_real).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_report<R: Read>(r: R) -> Result<ConvergenceReport> {
    let rows = records(r, &REPORT_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(ConvergenceRow {
                sites: parse_index(&rec[0], line)?,
                ensemble: rec[1].parse::<Ensemble>()?,
                parameter: parse_real(&rec[2], line)?,
                expectation: parse_real(&rec[3], line)?,
                deviation_probability: parse_real(&rec[4], line)?,
                gap_to_canonical: match rec[5].trim() {
                    "" => None,
                    g => Some(parse_real(g, line)?),
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::equivalence::{ensemble_convergence, ConvergenceModel, ConvergenceSetup};
    use crate::measurement::outcome_distribution;
    use crate::phase::{ModelSpec, DEFAULT_ENUMERATION_CAP};
    use proptest::prelude::*;

    fn chain(n: usize) -> PhaseSpace {
        PhaseSpace::build(&ModelSpec::ising_chain(n)).unwrap()
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.25), "2.5000000000000000e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn distribution_csv() {
        let x = chain(2);
        let d = outcome_distribution(&builtins::magnetization(&x), &State::uniform(4).unwrap())
            .unwrap();
        let mut buf = Vec::new();
        write_distribution(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "lambda,probability\n\
             -2.0000000000000000e0,2.5000000000000000e-1\n\
             0.0000000000000000e0,5.0000000000000000e-1\n\
             2.0000000000000000e0,2.5000000000000000e-1\n"
        );
        assert_eq!(read_distribution(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn state_and_observable_csv() {
        let x = chain(3);
        let h = builtins::energy(&x);
        let g = State::gibbs(&h, 0.37).unwrap();
        let mut buf = Vec::new();
        write_state(&g, &mut buf).unwrap();
        assert_eq!(read_state(buf.as_slice(), 8).unwrap(), g);
        assert!(read_state(buf.as_slice(), 9).is_err());
        let mut buf = Vec::new();
        write_observable(&h, &mut buf).unwrap();
        assert_eq!(read_observable(buf.as_slice(), 8).unwrap(), h);
        assert!(read_observable("weight,value\n0,1\n".as_bytes(), 1).is_err());
        assert!(read_observable("config_index,value\n0,1\n0,2\n".as_bytes(), 2).is_err());
        assert!(read_observable("config_index,value\n0,x\n".as_bytes(), 1).is_err());
    }

    #[test]
    fn configurations_csv() {
        let x = chain(2);
        let mut buf = Vec::new();
        write_configurations(&x, &mut buf).unwrap();
        let rows = read_configurations(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1], (1, vec![-1.0, 1.0]));
    }

    #[test]
    fn report_csv() {
        let specs = [ModelSpec::ising_chain(3), ModelSpec::ising_chain(4)];
        let report = ensemble_convergence(
            &specs,
            &ConvergenceSetup::default(),
            &ConvergenceModel::ising(),
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_report(&report, &mut buf).unwrap();
        assert_eq!(read_report(buf.as_slice()).unwrap(), report);
    }

    #[test]
    fn question_and_atoms_csv() {
        let x = chain(3);
        let q = SpectralMeasure::of(&builtins::magnetization(&x), Precision::Exact);
        let mut buf = Vec::new();
        write_atoms(&q, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with(
            "lambda,config_index\n-3.0000000000000000e0,0\n-1.0000000000000000e0,1\n"
        ));
        assert_eq!(read_atoms(buf.as_slice(), 8).unwrap(), q);
        assert!(read_atoms(buf.as_slice(), 9).is_err());

        let f = Question::chi(8, [1, 4, 6]).unwrap();
        let mut buf = Vec::new();
        write_question(&f, &mut buf).unwrap();
        assert_eq!(buf, b"config_index\n1\n4\n6\n");
        assert_eq!(read_question(buf.as_slice(), 8).unwrap(), f);
        assert!(read_question(buf.as_slice(), 5).is_err());
    }

    proptest! {
        #[test]
        fn samples_round_trip(v in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..50)) {
            let mut buf = Vec::new();
            write_samples(&v, &mut buf).unwrap();
            prop_assert_eq!(read_samples(buf.as_slice()).unwrap(), v);
        }
    }
}
