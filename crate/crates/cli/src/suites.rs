//! Seeded invariant suites behind `verify`.

use num_bigint::BigInt;
use num_rational::BigRational;
use padic_potts::analytic::{exp_p, log_p};
use padic_potts::gibbs::{
    f_map_z, solve_k1_bipartite, vertex_step, witness_field, EdgeFactor, ThetaValue, ZVector,
};
use padic_potts::potts::{
    compatibility_check, BoundaryField, CouplingField, FieldPattern, PadicVector,
};
use padic_potts::tree::TreeShape;
use padic_potts::{PadicNumber, Prime, Result, Tolerance, Valuation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const N: u32 = 32;
const SAMPLES_SHOWN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma21,
    Lemma42,
    Lemma43,
    Compat,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Lemma21 => "lemma21",
            Suite::Lemma42 => "lemma42",
            Suite::Lemma43 => "lemma43",
            Suite::Compat => "compat",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: u64,
    pub passed: u64,
    pub failed: u64,
    /// The first few inputs drawn, for reproduction.
    pub samples: Vec<String>,
    pub first_failure: Option<String>,
}

impl SuiteSummary {
    fn new(suite: Suite, seed: u64) -> Self {
        SuiteSummary {
            suite: suite.name(),
            seed,
            checks: 0,
            passed: 0,
            failed: 0,
            samples: Vec::new(),
            first_failure: None,
        }
    }

    fn record(
        &mut self,
        sample: impl FnOnce() -> String,
        ok: bool,
        failure: impl FnOnce() -> String,
    ) {
        self.checks += 1;
        if self.samples.len() < SAMPLES_SHOWN {
            self.samples.push(sample());
        }
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(failure());
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Aggregate {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: u64,
    pub failed: u64,
    pub suites: Vec<SuiteSummary>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Single(SuiteSummary),
    All(Aggregate),
}

impl Report {
    pub fn failed(&self) -> u64 {
        match self {
            Report::Single(s) => s.failed,
            Report::All(a) => a.failed,
        }
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<Report> {
    let one = |s: Suite| -> Result<SuiteSummary> {
        // Each suite draws from its own stream so that running one alone
        // reproduces the same inputs as running it inside `all`.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        match s {
            Suite::Lemma21 => exp_log(&mut rng, seed),
            Suite::Lemma42 => product_bound(&mut rng, seed),
            Suite::Lemma43 => contraction(&mut rng, seed),
            Suite::Compat => compat(&mut rng, seed),
            Suite::All => unreachable!("expanded by the caller"),
        }
    };
    if suite != Suite::All {
        return one(suite).map(Report::Single);
    }
    let suites = [
        Suite::Lemma21,
        Suite::Lemma42,
        Suite::Lemma43,
        Suite::Compat,
    ]
    .into_iter()
    .map(one)
    .collect::<Result<Vec<_>>>()?;
    Ok(Report::All(Aggregate {
        suite: Suite::All.name(),
        seed,
        checks: suites.iter().map(|s| s.checks).sum(),
        failed: suites.iter().map(|s| s.failed).sum(),
        suites,
    }))
}

/// `sign * p^v * u / w` with `u`, `w` prime to `p`, as (numerator, denominator).
fn draw(rng: &mut ChaCha8Rng, p: Prime, v: u32) -> (BigInt, BigInt) {
    let pv = p.value() as i64;
    let unit = |rng: &mut ChaCha8Rng, hi: i64| loop {
        let n = rng.gen_range(1..hi);
        if n % pv != 0 {
            break n;
        }
    };
    let u = BigInt::from(unit(rng, 1_000_000_000)) * BigInt::from(pv).pow(v);
    let num = if rng.gen_bool(0.5) { u } else { -u };
    (num, BigInt::from(unit(rng, 1_000_000)))
}

fn number(frac: &(BigInt, BigInt), p: Prime, precision: u32) -> Result<PadicNumber> {
    PadicNumber::from_rational(frac.0.clone(), frac.1.clone(), p, precision)
}

fn show(frac: &(BigInt, BigInt)) -> String {
    format!("{}/{}", frac.0, frac.1)
}

fn agrees(a: &Result<PadicNumber>, b: &PadicNumber, digits: i64) -> bool {
    a.as_ref()
        .is_ok_and(|a| a.difference_valuation(b).is_ok_and(|v| v.at_least(digits)))
}

/// `|exp(x)| = 1`, `v(exp(x) - 1) = v(x)`, `log(exp(x)) = x` and
/// `exp(log(1 + x)) = 1 + x` on the exp disk, 500 points per prime.
fn exp_log(rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary::new(Suite::Lemma21, seed);
    for p in [2u64, 3, 5, 7] {
        let p = Prime::new(p)?;
        let one = PadicNumber::one(p, N);
        for _ in 0..500 {
            let v = p.exp_domain_valuation() as u32 + rng.gen_range(0..6);
            let frac = draw(rng, p, v);
            let x = number(&frac, p, N)?;
            let verdict = (|| -> Result<std::result::Result<(), &'static str>> {
                let e = exp_p(&x)?;
                if e.valuation() != Valuation::Finite(0) {
                    return Ok(Err("|exp(x)| != 1"));
                }
                if e.checked_sub(&one)?.valuation() != x.valuation() {
                    return Ok(Err("v(exp(x) - 1) != v(x)"));
                }
                if !agrees(&log_p(&e), &x, N as i64) {
                    return Ok(Err("log(exp(x)) != x"));
                }
                let y = one.checked_add(&x)?;
                if !agrees(&log_p(&y).and_then(|l| exp_p(&l)), &y, N as i64) {
                    return Ok(Err("exp(log(1 + x)) != 1 + x"));
                }
                Ok(Ok(()))
            })();
            let ok = matches!(verdict, Ok(Ok(())));
            summary.record(
                || format!("p = {}, x = {}", p.value(), show(&frac)),
                ok,
                || match verdict {
                    Ok(Err(what)) => format!("p = {}, x = {}: {what}", p.value(), show(&frac)),
                    Err(e) => format!("p = {}, x = {}: {e}", p.value(), show(&frac)),
                    Ok(Ok(())) => unreachable!(),
                },
            );
        }
    }
    Ok(summary)
}

/// `v(Π a_i - 1) >= m` whenever every `v(a_i - 1) >= m`.
fn product_bound(rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary::new(Suite::Lemma42, seed);
    for case in 0..500 {
        let p = Prime::new([2u64, 3, 5, 7][case % 4])?;
        let m: u32 = rng.gen_range(1..=3);
        let len = rng.gen_range(1..=8);
        let one = PadicNumber::one(p, N);
        let mut factors = Vec::with_capacity(len);
        let mut shown = Vec::with_capacity(len);
        for _ in 0..len {
            let v = m + rng.gen_range(0..4);
            let frac = draw(rng, p, v);
            shown.push(show(&frac));
            factors.push(EdgeFactor::from(ZVector::from_values(&[
                one.checked_add(&number(&frac, p, N)?)?
            ])?));
        }
        let step = vertex_step(&factors);
        let ok = step
            .as_ref()
            .is_ok_and(|z| z.min_valuation().at_least(m as i64));
        summary.record(
            || format!("p = {}, m = {m}, a - 1 = [{}]", p.value(), shown.join(", ")),
            ok,
            || format!("p = {}, m = {m}: product gave {step:?}", p.value()),
        );
    }
    Ok(summary)
}

/// With `|q|_p = 1`: `v(a - 1) >= v(z - 1) + v(θ - 1)` for the edge factor,
/// and distances between two points shrink by the same amount.
fn contraction(rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary::new(Suite::Lemma43, seed);
    for (p, q) in [(3u64, 2u32), (5, 2), (5, 3), (7, 4)] {
        let p = Prime::new(p)?;
        let one = PadicNumber::one(p, N);
        for _ in 0..125 {
            let vj = rng.gen_range(1..4);
            let j = draw(rng, p, vj);
            let theta =
                ThetaValue::from_coupling(&BigRational::new(j.0.clone(), j.1.clone()), p, N)?;
            let mut point = || -> Result<ZVector> {
                let values = (0..q - 1)
                    .map(|_| {
                        let v = rng.gen_range(1..5);
                        one.checked_add(&number(&draw(rng, p, v), p, N)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                ZVector::from_values(&values)
            };
            let (z, w) = (point()?, point()?);
            let ve = theta.minus_one().valuation().finite().unwrap_or(N as i64);
            let (fz, fw) = (f_map_z(&z, &theta)?, f_map_z(&w, &theta)?);
            let gain = |before: Valuation, after: Valuation| match (before, after) {
                (_, Valuation::Infinite) => true,
                (Valuation::Infinite, Valuation::Finite(_)) => false,
                (Valuation::Finite(b), a) => a.at_least((b + ve).min(N as i64)),
            };
            let moved = gain(z.min_valuation(), fz.min_valuation());
            let shrunk = gain(z.distance_valuation(&w)?, fz.distance_valuation(&fw)?);
            summary.record(
                || format!("p = {}, q = {q}, J = {}", p.value(), show(&j)),
                moved && shrunk,
                || {
                    format!(
                        "p = {}, q = {q}, J = {}: moved {moved}, shrunk {shrunk}",
                        p.value(),
                        show(&j)
                    )
                },
            );
        }
    }
    Ok(summary)
}

/// Brute-force compatibility: the zero field holds, the nontrivial `k = 1`
/// witness fields hold, and a field alternating by level fails.
fn compat(rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteSummary> {
    let mut summary = SuiteSummary::new(Suite::Compat, seed);
    let p = Prime::new(3)?;
    let tol = Tolerance::default();
    let w = tol.working();
    let rational = |n: i64| BigRational::from_integer(BigInt::from(n));

    let shape = TreeShape::new(2, 2)?;
    let coupling = CouplingField::homogeneous(p, 3, rational(3))?;
    let zero = BoundaryField::zero(p, 3, w);
    let report = compatibility_check(&zero, &coupling, &shape, 2, tol)?;
    summary.record(
        || "zero field, p = 3, q = 3, k = 2, n = 2".into(),
        report.holds,
        || format!("zero field failed: {report:?}"),
    );

    let line = TreeShape::new(1, 2)?;
    for _ in 0..5 {
        let j1 = rational(3 * rng.gen_range(1..30i64));
        let j2 = rational(-3 * rng.gen_range(1..30i64));
        let t1 = ThetaValue::from_coupling(&j1, p, w)?;
        let t2 = ThetaValue::from_coupling(&j2, p, w)?;
        let solved = solve_k1_bipartite(&t1, &t2, 3, &tol)?;
        let bipartite = CouplingField::bipartite(p, 3, j1.clone(), j2.clone())?;
        let mut holds = solved.witnesses.len() == 2;
        for witness in &solved.witnesses {
            let field = witness_field(witness, w)?;
            holds &= compatibility_check(&field, &bipartite, &line, 2, tol)?.holds;
        }
        summary.record(
            || format!("k = 1 witnesses, J = ({j1}, {j2})"),
            holds,
            || format!("k = 1 witnesses for J = ({j1}, {j2}) are not all compatible"),
        );
    }

    let h = PadicVector::new(vec![
        PadicNumber::from_integer(3, p, w),
        PadicNumber::zero(p, w),
    ])?;
    let alternating = BoundaryField::new(
        p,
        3,
        w,
        FieldPattern::ByParity {
            even: h,
            odd: PadicVector::zero(2, p, w),
        },
    )?;
    let coupling = CouplingField::homogeneous(p, 3, rational(3))?;
    let report = compatibility_check(&alternating, &coupling, &line, 2, tol)?;
    let fails = !report.holds && report.discrepancy_valuation.finite().is_some();
    summary.record(
        || "field alternating by level, k = 1".into(),
        fails,
        || format!("alternating field was not rejected: {report:?}"),
    );

    Ok(summary)
}
