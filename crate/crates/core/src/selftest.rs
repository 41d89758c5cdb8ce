//! Seeded property checks of the measurement-theory propositions, run by
//! `mackey selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::borel::BorelSet;
use crate::builtins;
use crate::equivalence::{
    separating_observable, states_separate_observables, weakly_equivalent, ProbeSet,
};
use crate::error::Result;
use crate::measurement::{outcome_distribution, probability, sample_measurements, transmission};
use crate::observable::{Observable, Precision};
use crate::phase::{ModelSpec, PhaseSpace};
use crate::question::Question;
use crate::spectral::{functional_calculus, SpectralMeasure};
use crate::state::{State, Thread, TAU_NORM};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> Result<std::result::Result<String, String>>;

const CHECKS: [(&str, Check); 9] = [
    (
        "question logic is a complete Boolean algebra",
        question_logic,
    ),
    (
        "states are full and strongly convex",
        states_full_and_convex,
    ),
    ("threads and states correspond", threads),
    (
        "spectral decomposition and functional calculus",
        spectral_theorem,
    ),
    (
        "spectral measures are lattice homomorphisms",
        measure_axioms,
    ),
    (
        "outcome probabilities form a probability measure",
        outcome_probabilities,
    ),
    (
        "observables separate states and states separate observables",
        separation,
    ),
    (
        "weak equivalence is reflexive and symmetric",
        weak_equivalence,
    ),
    ("sampled outcomes follow the outcome distribution", sampling),
];

pub fn run(seed: u64) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (passed, detail) = match check(&mut rng) {
                Ok(Ok(detail)) => (true, detail),
                Ok(Err(detail)) => (false, detail),
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn chain(n: usize) -> Result<PhaseSpace> {
    PhaseSpace::build(&ModelSpec::ising_chain(n))
}

fn random_question(rng: &mut ChaCha8Rng, len: usize) -> Question {
    let density: f64 = rng.gen();
    Question::from_predicate(len, |_| rng.gen::<f64>() < density)
}

fn random_state(rng: &mut ChaCha8Rng, len: usize) -> Result<State> {
    let sparse = rng.gen_bool(0.3);
    let weights: Vec<f64> = (0..len)
        .map(|_| {
            if sparse && rng.gen_bool(0.7) {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return State::dirac(len, rng.gen_range(0..len));
    }
    State::from_unnormalized(weights)
}

fn random_observable(rng: &mut ChaCha8Rng, len: usize) -> Result<Observable> {
    let levels = rng.gen_range(1..=8);
    Observable::new(
        (0..len)
            .map(|_| rng.gen_range(0..levels) as f64 - 3.0)
            .collect(),
    )
}

fn random_borel(rng: &mut ChaCha8Rng) -> Result<BorelSet> {
    let mut b = BorelSet::empty();
    for _ in 0..rng.gen_range(0..4) {
        let a = rng.gen_range(-10..=10) as f64 / 2.0;
        let c = rng.gen_range(-10..=10) as f64 / 2.0;
        b = b.union(&BorelSet::interval(
            a.min(c),
            a.max(c),
            rng.gen(),
            rng.gen(),
        )?);
    }
    Ok(b)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {{
        let holds: bool = $cond;
        if !holds {
            return Ok(Err(format!($($msg)*)));
        }
    }};
}

fn question_logic(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let len = 256;
    for _ in 0..200 {
        let e = random_question(rng, len);
        let f = random_question(rng, len);
        let inter: Vec<usize> = e.iter().filter(|&k| f.contains(k)).collect();
        let union: Vec<usize> = (0..len)
            .filter(|&k| e.contains(k) || f.contains(k))
            .collect();
        let comp: Vec<usize> = (0..len).filter(|&k| !f.contains(k)).collect();
        ensure!(e.meet(&f)?.phi() == inter, "meet is not intersection");
        ensure!(
            Question::join_all(len, [&e, &f])?.phi() == union,
            "join is not union"
        );
        ensure!(
            f.complement().phi() == comp,
            "complement is not set complement"
        );
        let family: Vec<Question> = (0..rng.gen_range(0..=len))
            .map(|_| random_question(rng, len))
            .collect();
        let joined = Question::join_all(len, &family)?;
        let met: Vec<Question> = family.iter().map(|q| e.meet(q)).collect::<Result<_>>()?;
        ensure!(
            e.meet(&joined)? == Question::join_all(len, &met)?,
            "infinite distributivity fails"
        );
    }
    Ok(Ok("200 random pairs and families on |X| = 256".into()))
}

fn states_full_and_convex(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let len = 16;
    for _ in 0..200 {
        let e = random_question(rng, len);
        let f = random_question(rng, len);
        let mut dominated = true;
        for k in 0..len {
            let d = State::dirac(len, k)?;
            dominated &= d.mass(&e)? <= d.mass(&f)?;
        }
        ensure!(dominated == e.le(&f)?, "Dirac states are not full");
    }
    let h = builtins::energy(&chain(4)?);
    for _ in 0..50 {
        let count = rng.gen_range(1..=64);
        let states: Vec<State> = (0..count)
            .map(|_| random_state(rng, len))
            .collect::<Result<_>>()?;
        let raw: Vec<f64> = (0..count).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let ts: Vec<f64> = raw.iter().map(|t| t / total).collect();
        let mixed = match State::mix(&ts, &states) {
            Ok(m) => m,
            Err(_) => continue, // coefficient rounding outside tolerance
        };
        let direct: f64 = ts
            .iter()
            .zip(&states)
            .map(|(t, s)| Ok(t * s.pair(&h)?))
            .sum::<Result<f64>>()?;
        ensure!(
            (mixed.pair(&h)? - direct).abs() <= TAU_NORM,
            "pairing is not linear"
        );
    }
    Ok(Ok("fullness on all Diracs, 50 mixtures".into()))
}

fn threads(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let x = chain(5)?;
    for _ in 0..10 {
        let s = random_state(rng, x.size())?;
        let thread = Thread::of(&s, &x)?;
        thread.check_consistency(&x)?;
        ensure!(
            thread.to_state(&x)? == s,
            "thread round trip changed the state"
        );
    }
    Ok(Ok("10 random states on a 5-site chain".into()))
}

fn spectral_theorem(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    for _ in 0..100 {
        let len = rng.gen_range(1..=256);
        let f = random_observable(rng, len)?;
        let q = SpectralMeasure::of(&f, Precision::Exact);
        ensure!(q.reconstruct() == f, "reconstruction differs from f");
        functional_calculus(|v| v * v, &f)?;
        functional_calculus(f64::abs, &f)?;
        let b = random_borel(rng)?;
        let ind = functional_calculus(|v| if b.contains(v) { 1.0 } else { 0.0 }, &f)?;
        ensure!(
            ind == q.apply(&b).to_observable(),
            "indicator calculus differs from Q(B)"
        );
    }
    Ok(Ok("100 random observables".into()))
}

fn measure_axioms(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    for _ in 0..200 {
        let f = random_observable(rng, 64)?;
        let q = SpectralMeasure::of(&f, Precision::Exact);
        let b1 = random_borel(rng)?;
        let b2 = random_borel(rng)?;
        ensure!(q.apply(&BorelSet::empty()).is_zero(), "Q(∅) ≠ 0");
        ensure!(q.apply(&BorelSet::real_line()).is_unit(), "Q(R) ≠ 1");
        ensure!(
            q.apply(&b1.intersection(&b2)) == q.apply(&b1).meet(&q.apply(&b2))?,
            "meet"
        );
        ensure!(
            q.apply(&b1.union(&b2)) == q.apply(&b1).join(&q.apply(&b2))?,
            "join"
        );
        ensure!(
            q.apply(&b1.complement()) == q.apply(&b1).complement(),
            "complement"
        );
        let inner = b1.intersection(&b2);
        ensure!(q.apply(&inner).le(&q.apply(&b1))?, "order");
        let spec = q.spectrum();
        for w in spec.windows(2) {
            ensure!(
                q.resolution(w[0]).le(&q.resolution(w[1]))?,
                "resolution not monotone"
            );
        }
    }
    Ok(Ok("200 random (f, B1, B2) triples".into()))
}

fn outcome_probabilities(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    for _ in 0..200 {
        let f = random_observable(rng, 32)?;
        let s = random_state(rng, 32)?;
        let b1 = random_borel(rng)?;
        let b2 = random_borel(rng)?.difference(&b1);
        let p1 = probability(&f, &s, &b1)?;
        let p2 = probability(&f, &s, &b2)?;
        let p12 = probability(&f, &s, &b1.union(&b2))?;
        ensure!(p1 >= 0.0 && p2 >= 0.0, "negative probability");
        ensure!((p12 - p1 - p2).abs() <= TAU_NORM, "not additive");
        ensure!(
            (probability(&f, &s, &BorelSet::real_line())? - 1.0).abs() <= TAU_NORM,
            "total mass ≠ 1"
        );
        let mean = outcome_distribution(&f, &s)?.mean();
        ensure!((mean - s.pair(&f)?).abs() <= TAU_NORM, "Σ λ p ≠ ζ(f)");
        let filter = random_question(rng, 32);
        ensure!(
            transmission(&filter, &s)? == s.pair(&filter.to_observable())?,
            "transmission"
        );
    }
    Ok(Ok("200 random (f, ζ, B) triples".into()))
}

fn separation(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    for _ in 0..200 {
        let a = random_state(rng, 16)?;
        let b = random_state(rng, 16)?;
        let differ = a.max_abs_diff(&b)? > TAU_NORM;
        match separating_observable(&a, &b)? {
            Some(sep) => ensure!(differ && sep.gap != 0.0, "spurious or zero-gap separation"),
            None => ensure!(!differ, "distinct states not separated"),
        }
        let f = random_observable(rng, 16)?;
        let mut g = f.values().to_vec();
        if rng.gen_bool(0.8) {
            let k = rng.gen_range(0..16);
            g[k] += 1.0;
        }
        let g = Observable::new(g)?;
        match states_separate_observables(&f, &g)? {
            Some(w) => ensure!(
                w.state.pair(&f)? != w.state.pair(&g)?,
                "witness does not separate"
            ),
            None => ensure!(f == g, "distinct observables not separated"),
        }
    }
    Ok(Ok("200 state pairs and 200 observable pairs".into()))
}

fn weak_equivalence(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let x = chain(4)?;
    let probes = ProbeSet::new(
        vec![
            ("magnetization".into(), builtins::magnetization(&x)),
            ("energy".into(), builtins::energy(&x)),
        ],
        0.25,
    )?;
    for _ in 0..100 {
        let a = random_state(rng, x.size())?;
        let b = random_state(rng, x.size())?;
        ensure!(
            weakly_equivalent(&a, &a, &probes)?.equivalent,
            "not reflexive"
        );
        ensure!(
            weakly_equivalent(&a, &b, &probes)?.equivalent
                == weakly_equivalent(&b, &a, &probes)?.equivalent,
            "not symmetric"
        );
    }
    Ok(Ok("100 random state pairs".into()))
}

fn sampling(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let x = chain(3)?;
    let f = builtins::magnetization(&x);
    let s = random_state(rng, x.size())?;
    let n = 20_000;
    let seed = rng.gen();
    let draws = sample_measurements(&f, &s, n, seed)?;
    ensure!(
        draws == sample_measurements(&f, &s, n, seed)?,
        "not reproducible"
    );
    for p in outcome_distribution(&f, &s)?.points {
        let freq = draws.iter().filter(|&&v| v == p.lambda).count() as f64 / n as f64;
        let bound = 4.0 * (p.probability * (1.0 - p.probability) / n as f64).sqrt();
        ensure!(
            (freq - p.probability).abs() <= bound.max(1.0 / n as f64),
            "frequency {freq} of {} outside {bound} of {}",
            p.lambda,
            p.probability
        );
    }
    Ok(Ok(format!("{n} draws")))
}
