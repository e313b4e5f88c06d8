//! Closed-form analysis of periodic solutions for small `k`.
//!
//! Every candidate root is re-checked against the recursion itself before it
//! is reported as a witness, so a verdict never rests on an algebraic
//! reduction alone.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{hensel_roots_in_disk, PadicPolynomial};
use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation};
use crate::potts::{
    rational_valuation, BoundaryField, CouplingField, CouplingPattern, FieldPattern, Tolerance,
};

use super::theta_poly::{cubic_coefficients, period2_alpha, period2_beta, period2_tau, IntPoly};
use super::zform::{
    f_map_z, homogeneous_step, hprime_to_h, uniqueness_certificate, vertex_step, ThetaValue,
    ZVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `|q|_p = 1`: the recursion contracts to a single solution.
    Unique,
    /// At least two distinct translation-invariant solutions were certified.
    MultipleTranslationInvariant,
    /// The period-2 search found nothing besides translation-invariant points.
    NoPeriodicBeyondTranslationInvariant,
    /// The period-2 search certified a solution with distinct even and odd values.
    PeriodicBeyondTranslationInvariant,
    Inconclusive,
}

/// Values on even and odd vertices of a periodic solution, at working
/// precision. Serialization truncates them to the target precision.
#[derive(Clone, Debug)]
pub struct Witness {
    pub even: ZVector,
    pub odd: ZVector,
    pub translation_invariant: bool,
    pub reported_precision: u32,
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Witness", 3)?;
        s.serialize_field("even", &self.even.with_precision(self.reported_precision))?;
        s.serialize_field("odd", &self.odd.with_precision(self.reported_precision))?;
        s.serialize_field("translation_invariant", &self.translation_invariant)?;
        s.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub verdict: Verdict,
    /// The argument the verdict rests on.
    pub basis: String,
    pub certificates: BTreeMap<String, Value>,
    pub witnesses: Vec<Witness>,
}

impl PhaseReport {
    fn new(verdict: Verdict, basis: impl Into<String>) -> Self {
        PhaseReport {
            verdict,
            basis: basis.into(),
            certificates: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    fn certify(&mut self, key: &str, value: impl Serialize) {
        self.certificates.insert(
            key.to_string(),
            serde_json::to_value(value).expect("certificate values serialize"),
        );
    }
}

fn check_theta(theta: &ThetaValue, tol: &Tolerance) -> Result<()> {
    if theta.precision() < tol.precision {
        return Err(Error::InvalidInput(format!(
            "θ carries {} digits, the tolerance needs at least {}",
            theta.precision(),
            tol.precision
        )));
    }
    Ok(())
}

fn q_number(q: u32, prime: Prime, precision: u32) -> PadicNumber {
    PadicNumber::from_integer(q as i64, prime, precision)
}

/// Evaluates a polynomial in `θ` at `θ = 1 + e`, keeping the digits of `e`.
fn eval_at_theta(poly: &IntPoly, theta: &ThetaValue) -> Result<Approx> {
    poly.shift_by_one().eval_padic(theta.minus_one())
}

fn coefficient(poly: &IntPoly, theta: &ThetaValue) -> Result<PadicNumber> {
    eval_at_theta(poly, theta)?.into_value()
}

fn witness(even: ZVector, odd: ZVector, tol: &Tolerance) -> Result<Witness> {
    let translation_invariant = even.distance_valuation(&odd)?.at_least(tol.threshold());
    Ok(Witness {
        even,
        odd,
        translation_invariant,
        reported_precision: tol.precision,
    })
}

fn roots_json(roots: &[PadicNumber], tol: &Tolerance) -> Value {
    json!(roots
        .iter()
        .map(|z| z.with_precision(tol.precision.min(z.precision())))
        .collect::<Vec<_>>())
}

/// Period-2 solutions for `k = 1` with couplings alternating by parity.
///
/// Restricted to `z = (z, 1, .., 1)`, the system reduces to
/// `z = (αz + q - 1)/(z + α + q - 2)` with
/// `α = (θ1 θ2 + q - 1)/(θ1 + θ2 + q - 2)`, whose roots are `1` and `1 - q`
/// (the latter only when `α ≠ 1`). A root is a witness when `v(z - 1) >= 1`
/// and the paired odd value `t = f(z; θ2)` maps back to `z` under `θ1`.
pub fn solve_k1_bipartite(
    theta1: &ThetaValue,
    theta2: &ThetaValue,
    q: u32,
    tol: &Tolerance,
) -> Result<PhaseReport> {
    check_theta(theta1, tol)?;
    check_theta(theta2, tol)?;
    let prime = theta1.prime();
    if theta2.prime() != prime {
        return Err(Error::PrimeMismatch {
            left: prime.value(),
            right: theta2.prime().value(),
        });
    }
    let w = theta1.precision().min(theta2.precision());
    let (e1, e2) = (theta1.minus_one(), theta2.minus_one());

    // α - 1 = e1 e2 / (q + e1 + e2).
    let den = Approx::from(q_number(q, prime, w))
        .add(&Approx::from(e1.clone()))?
        .add(&Approx::from(e2.clone()))?;
    let den = match den {
        Approx::Value(d) if !d.is_zero() => d,
        _ => {
            return Err(Error::DenominatorDegenerate(
                "θ1 + θ2 + q - 2 vanishes at working precision".into(),
            ))
        }
    };
    let alpha_minus_one = e1.checked_mul(e2)?.checked_div(&den)?;
    let alpha_is_one = alpha_minus_one.is_zero();

    let quadratic = PadicPolynomial::from_integers(&[-(q as i64 - 1), q as i64 - 2, 1], prime, w)?;
    let one = PadicNumber::one(prime, w);
    let roots: Vec<PadicNumber> = hensel_roots_in_disk(&quadratic, &one, 0)?
        .into_iter()
        .filter(|z| !(alpha_is_one && z.to_exact_integer() == Some((1 - q as i64).into())))
        .collect();

    let certificate = uniqueness_certificate(prime, q);
    let mut report = PhaseReport::new(Verdict::Inconclusive, "");
    report.certify("alpha_minus_one_valuation", alpha_minus_one.valuation());
    report.certify("alpha_is_one", alpha_is_one);
    report.certify("roots", roots_json(&roots, tol));
    report.certify("q_divisible_by_p", !certificate.applies);

    let len = q as usize - 1;
    let mut rejected = Vec::new();
    for z in &roots {
        if !z.difference_valuation(&one)?.at_least(1) {
            rejected.push(z.clone());
            continue;
        }
        let zv = ZVector::first_component(z, len)?;
        let pair = f_map_z(&zv, theta2).and_then(|t| {
            let t = t.into_zvector()?;
            let back = vertex_step(&[f_map_z(&t, theta1)?])?;
            Ok((back.distance_valuation(&zv)?.at_least(tol.threshold()), t))
        });
        match pair {
            Ok((true, t)) => report.witnesses.push(witness(zv, t, tol)?),
            Ok((false, _))
            | Err(Error::DenominatorDegenerate(_))
            | Err(Error::DomainViolation { .. }) => rejected.push(z.clone()),
            Err(e) => return Err(e),
        }
    }
    report.certify("rejected_roots", roots_json(&rejected, tol));

    let count = report.witnesses.len();
    if count >= 2 {
        report.verdict = Verdict::MultipleTranslationInvariant;
        report.basis = format!(
            "k = 1 alternating couplings: {count} disk roots of the reduced period-2 equation, \
             each with even and odd values in the same residue disk"
        );
    } else if certificate.applies {
        report.verdict = Verdict::Unique;
        report.basis = certificate.reason;
    } else {
        report.basis = "k = 1 alternating couplings with α = 1: only z = 1 remains".into();
    }
    Ok(report)
}

/// Translation-invariant solutions `z = (z, 1, .., 1)` for `k = 2`: the roots
/// of `z^3 + (2q - (θ-1)^2 - 3) z^2 + ((θ-1)^2 + 3 + q^2 - 4q) z - (q-1)^2`
/// with `v(z - 1) >= 1` that the recursion itself fixes.
pub fn translation_invariant_cubic(
    theta: &ThetaValue,
    q: u32,
    tol: &Tolerance,
) -> Result<PhaseReport> {
    check_theta(theta, tol)?;
    let prime = theta.prime();
    let w = theta.precision();
    let coefficients = cubic_coefficients(q as i64)
        .iter()
        .map(|c| coefficient(c, theta))
        .collect::<Result<Vec<_>>>()?;
    let cubic = PadicPolynomial::new(coefficients)?;
    let one = PadicNumber::one(prime, w);
    let roots = hensel_roots_in_disk(&cubic, &one, 1)?;

    let mut report = PhaseReport::new(Verdict::Inconclusive, "");
    report.certify("disk_roots", roots_json(&roots, tol));

    let len = q as usize - 1;
    let mut degenerate = Vec::new();
    for z in &roots {
        let zv = ZVector::first_component(z, len)?;
        match homogeneous_step(&zv, theta, 2) {
            Ok(image) if image.distance_valuation(&zv)?.at_least(tol.threshold()) => {
                report.witnesses.push(witness(zv.clone(), zv, tol)?);
            }
            Ok(_) | Err(Error::DenominatorDegenerate(_)) | Err(Error::DomainViolation { .. }) => {
                degenerate.push(z.clone());
            }
            Err(e) => return Err(e),
        }
    }
    report.certify("rejected_roots", roots_json(&degenerate, tol));

    let certificate = uniqueness_certificate(prime, q);
    let count = report.witnesses.len();
    if count >= 2 {
        report.verdict = Verdict::MultipleTranslationInvariant;
        report.basis = format!(
            "k = 2 homogeneous: {count} fixed points of the recursion in the disk |z - 1|_p <= 1/p"
        );
    } else if certificate.applies {
        report.verdict = Verdict::Unique;
        report.basis = certificate.reason;
    } else {
        report.basis = "k = 2 homogeneous: fewer than two disk fixed points found".into();
    }
    Ok(report)
}

/// Period-2 solutions for `k = 2`, homogeneous `θ`, via the quadratic
/// `α z^2 + β z + τ` left after dividing out the translation-invariant
/// cubic. Records the norms of `α`, `β`, `τ` and `α + β + τ`, then searches
/// the disk and keeps roots `z1` for which `z2 = step(z1)` lies in the disk
/// and `step(z2)` returns to `z1`.
pub fn period2_k2_analysis(theta: &ThetaValue, q: u32, tol: &Tolerance) -> Result<PhaseReport> {
    check_theta(theta, tol)?;
    let prime = theta.prime();
    let w = theta.precision();
    let qi = q as i64;
    let (alpha_p, beta_p, tau_p) = (period2_alpha(qi), period2_beta(qi), period2_tau(qi));
    let alpha = eval_at_theta(&alpha_p, theta)?;
    let beta = eval_at_theta(&beta_p, theta)?;
    let tau = eval_at_theta(&tau_p, theta)?;
    let sum = eval_at_theta(&alpha_p.add(&beta_p).add(&tau_p), theta)?;

    let mut report = PhaseReport::new(Verdict::Inconclusive, "");
    let (va, vb, vt) = (
        alpha.valuation_bound(),
        beta.valuation_bound(),
        tau.valuation_bound(),
    );
    report.certify("alpha_valuation", va);
    report.certify("beta_valuation", vb);
    report.certify("tau_valuation", vt);
    report.certify("alpha_plus_beta_plus_tau_valuation", sum.valuation_bound());
    report.certify("alpha_in_p", va.at_least(1));
    report.certify("beta_in_p", vb.at_least(1));
    report.certify("tau_unit", vt == Valuation::Finite(0));

    let quadratic = PadicPolynomial::new(vec![
        tau.into_value()?,
        beta.into_value()?,
        alpha.into_value()?,
    ])?;
    let one = PadicNumber::one(prime, w);
    let roots = hensel_roots_in_disk(&quadratic, &one, 1)?;
    report.certify("disk_roots", roots_json(&roots, tol));

    let len = q as usize - 1;
    let mut rejected = Vec::new();
    for z1 in &roots {
        let zv = ZVector::first_component(z1, len)?;
        let closes = homogeneous_step(&zv, theta, 2).and_then(|z2| {
            let back = homogeneous_step(&z2, theta, 2)?;
            Ok((back.distance_valuation(&zv)?.at_least(tol.threshold()), z2))
        });
        match closes {
            Ok((true, z2)) => report.witnesses.push(witness(zv, z2, tol)?),
            Ok((false, _))
            | Err(Error::DenominatorDegenerate(_))
            | Err(Error::DomainViolation { .. }) => rejected.push(z1.clone()),
            Err(e) => return Err(e),
        }
    }
    report.certify("rejected_roots", roots_json(&rejected, tol));

    if report.witnesses.iter().any(|w| !w.translation_invariant) {
        report.verdict = Verdict::PeriodicBeyondTranslationInvariant;
        report.basis = "k = 2 homogeneous: a disk root of the period-2 quadratic closes a \
                        two-cycle with distinct even and odd values"
            .into();
    } else {
        report.verdict = Verdict::NoPeriodicBeyondTranslationInvariant;
        report.basis = "k = 2 homogeneous: no disk root of the period-2 quadratic closes a \
                        two-cycle with distinct values"
            .into();
    }
    Ok(report)
}

fn homogeneous_value(coupling: &CouplingField) -> Option<&BigRational> {
    match coupling.pattern() {
        CouplingPattern::Homogeneous(j) => Some(j),
        CouplingPattern::BipartiteByParity {
            even_to_odd,
            odd_to_even,
        } if even_to_odd == odd_to_even => Some(even_to_odd),
        _ => None,
    }
}

/// Dispatches to the analysis whose hypotheses the input meets.
pub fn classify_phase(k: u32, coupling: &CouplingField, tol: &Tolerance) -> Result<PhaseReport> {
    let prime = coupling.prime();
    let q = coupling.q();
    let w = tol.working();
    let certificate = uniqueness_certificate(prime, q);
    if certificate.applies {
        let mut report = PhaseReport::new(Verdict::Unique, certificate.reason);
        let ones = ZVector::ones(q as usize - 1, prime, tol.precision);
        report.witnesses.push(Witness {
            even: ones.clone(),
            odd: ones,
            translation_invariant: true,
            reported_precision: tol.precision,
        });
        return Ok(report);
    }

    let homogeneous = homogeneous_value(coupling);
    match (k, coupling.pattern(), homogeneous) {
        (
            1,
            CouplingPattern::BipartiteByParity {
                even_to_odd,
                odd_to_even,
            },
            _,
        ) => {
            let t1 = ThetaValue::from_coupling(even_to_odd, prime, w)?;
            let t2 = ThetaValue::from_coupling(odd_to_even, prime, w)?;
            solve_k1_bipartite(&t1, &t2, q, tol)
        }
        (1, _, Some(j)) => {
            let t = ThetaValue::from_coupling(j, prime, w)?;
            solve_k1_bipartite(&t, &t, q, tol)
        }
        (2, _, Some(j)) if prime.value() >= 3 => {
            let theta = ThetaValue::from_coupling(j, prime, w)?;
            let mut report = translation_invariant_cubic(&theta, q, tol)?;
            let period2 = period2_k2_analysis(&theta, q, tol)?;
            report.certify("period2_verdict", period2.verdict);
            for (key, value) in period2.certificates {
                report.certificates.insert(format!("period2_{key}"), value);
            }
            report.witnesses.extend(
                period2
                    .witnesses
                    .into_iter()
                    .filter(|w| !w.translation_invariant),
            );
            Ok(report)
        }
        (2, _, Some(j)) => Ok(two_adic_table(j, q, prime)),
        _ => {
            let mut report = PhaseReport::new(
                Verdict::Inconclusive,
                format!(
                    "no closed-form analysis covers k = {k} with {} couplings and p | q",
                    pattern_name(coupling.pattern())
                ),
            );
            report.certify("q_divisible_by_p", true);
            Ok(report)
        }
    }
}

fn pattern_name(pattern: &CouplingPattern) -> &'static str {
    match pattern {
        CouplingPattern::Homogeneous(_) => "homogeneous",
        CouplingPattern::BipartiteByParity { .. } => "bipartite",
        CouplingPattern::PerEdge(_) => "per-edge",
    }
}

/// `p = 2`, `k = 2`: phase transition when `q = 4s` with `s` odd and
/// `|J|_2 = 1/4`, or `q = 2^m s` with `m >= 3` and `0 < |J|_2 <= 1/4`.
fn two_adic_table(j: &BigRational, q: u32, prime: Prime) -> PhaseReport {
    let m = q.trailing_zeros();
    let vj = rational_valuation(j, prime);
    let multiple =
        !j.is_zero() && ((m == 2 && vj == Valuation::Finite(2)) || (m >= 3 && vj.at_least(2)));
    let mut report = if multiple {
        PhaseReport::new(
            Verdict::MultipleTranslationInvariant,
            format!("p = 2, k = 2: q = 2^{m} * odd with v_2(J) = {vj} meets the known threshold"),
        )
    } else {
        PhaseReport::new(
            Verdict::Inconclusive,
            format!(
                "p = 2, k = 2: q = 2^{m} * odd with v_2(J) = {vj} is outside the known thresholds"
            ),
        )
    };
    report.certify("v2_q", m);
    report.certify("v2_j", vj);
    report
}

/// The periodic boundary field behind a witness: `h' = -log_p(z)` on each
/// parity class, then `h` recovered from `h'`. For `p = 2` this needs
/// `v(z - 1) >= 2`.
pub fn witness_field(witness: &Witness, precision: u32) -> Result<BoundaryField> {
    let even = hprime_to_h(&witness.even.to_hprime()?)?;
    let odd = hprime_to_h(&witness.odd.to_hprime()?)?;
    let q = even.len() as u32 + 1;
    BoundaryField::new(
        even.prime(),
        q,
        precision,
        FieldPattern::ByParity { even, odd },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn theta(j: i64, prime: Prime, tol: &Tolerance) -> ThetaValue {
        ThetaValue::from_coupling(&r(j), prime, tol.working()).unwrap()
    }

    #[test]
    fn k1_two_witnesses_when_q_divisible() {
        let tol = Tolerance::default();
        let prime = p(3);
        let report =
            solve_k1_bipartite(&theta(3, prime, &tol), &theta(6, prime, &tol), 3, &tol).unwrap();
        assert_eq!(report.verdict, Verdict::MultipleTranslationInvariant);
        assert_eq!(report.witnesses.len(), 2);
        let nontrivial = report
            .witnesses
            .iter()
            .find(|w| w.even.min_valuation() == Valuation::Finite(1))
            .unwrap();
        let minus_two = PadicNumber::from_integer(-2, prime, 32);
        assert!(nontrivial.even.values()[0].agrees_with(&minus_two));
        assert!(nontrivial.odd.values()[0].agrees_with(&minus_two));
    }

    #[test]
    fn k1_alpha_one_keeps_only_one() {
        let tol = Tolerance::default();
        let prime = p(3);
        let one = ThetaValue::one(prime, tol.working());
        let report = solve_k1_bipartite(&one, &theta(3, prime, &tol), 3, &tol).unwrap();
        assert_eq!(report.witnesses.len(), 1);
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn k1_unit_q_rejects_far_root() {
        let tol = Tolerance::default();
        let prime = p(3);
        let report =
            solve_k1_bipartite(&theta(3, prime, &tol), &theta(3, prime, &tol), 2, &tol).unwrap();
        assert_eq!(report.witnesses.len(), 1);
        assert_eq!(report.verdict, Verdict::Unique);
    }

    #[test]
    fn cubic_in_the_disk() {
        let tol = Tolerance::default();
        let prime = p(3);
        let report = translation_invariant_cubic(&theta(3, prime, &tol), 3, &tol).unwrap();
        assert!(report.witnesses.len() >= 2, "{:?}", report.certificates);
        assert_eq!(report.verdict, Verdict::MultipleTranslationInvariant);
        let report = translation_invariant_cubic(&theta(3, prime, &tol), 2, &tol).unwrap();
        assert_eq!(report.witnesses.len(), 1);
    }

    #[test]
    fn period2_for_p_equal_q_has_non_invariant_cycle() {
        // The constant term is a square of a multiple of p here, so the
        // quadratic keeps its roots in the disk and they close two-cycles.
        let tol = Tolerance::default();
        let prime = p(3);
        let report = period2_k2_analysis(&theta(3, prime, &tol), 3, &tol).unwrap();
        assert_eq!(report.certificates["tau_unit"], json!(false));
        assert_eq!(report.verdict, Verdict::PeriodicBeyondTranslationInvariant);
        assert!(report.witnesses.iter().any(|w| !w.translation_invariant));
        for w in &report.witnesses {
            let image = homogeneous_step(&w.odd, &theta(3, prime, &tol), 2).unwrap();
            assert!(image
                .distance_valuation(&w.even)
                .unwrap()
                .at_least(tol.threshold()));
        }
    }

    #[test]
    fn dispatch() {
        let tol = Tolerance::default();
        let c = CouplingField::homogeneous(p(5), 3, r(5)).unwrap();
        assert_eq!(
            classify_phase(2, &c, &tol).unwrap().verdict,
            Verdict::Unique
        );
        let c = CouplingField::bipartite(p(3), 3, r(3), r(-6)).unwrap();
        assert_eq!(
            classify_phase(1, &c, &tol).unwrap().verdict,
            Verdict::MultipleTranslationInvariant
        );
        let c = CouplingField::homogeneous(p(3), 3, r(3)).unwrap();
        assert_eq!(
            classify_phase(3, &c, &tol).unwrap().verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn two_adic_thresholds() {
        let tol = Tolerance::default();
        let verdict = |q, j| {
            let c = CouplingField::homogeneous(p(2), q, r(j)).unwrap();
            classify_phase(2, &c, &tol).unwrap().verdict
        };
        assert_eq!(verdict(4, 4), Verdict::MultipleTranslationInvariant);
        assert_eq!(verdict(4, 8), Verdict::Inconclusive);
        assert_eq!(verdict(8, 8), Verdict::MultipleTranslationInvariant);
        assert_eq!(verdict(6, 4), Verdict::Inconclusive);
    }
}
