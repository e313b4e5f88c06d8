use num_bigint::BigInt;
use proptest::prelude::*;

use padic_potts::analytic::{exp_p, hensel_roots_in_disk, log_p, PadicPolynomial};
use padic_potts::{Error, PadicNumber, Prime, Valuation};

const N: u32 = 32;

fn primes() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11]).prop_map(|p| Prime::new(p).unwrap())
}

fn nonzero() -> impl Strategy<Value = i64> {
    prop_oneof![-1_000_000_000i64..-1, 1..1_000_000_000i64]
}

fn rational(n: i64, d: i64, p: Prime) -> PadicNumber {
    PadicNumber::from_rational(n, d, p, N).unwrap()
}

fn val(x: &PadicNumber) -> i64 {
    x.valuation().finite().unwrap()
}

/// `p^v * n / (p d + 1)`, so the valuation is at least `v`.
fn in_disk(p: Prime, v: u32, n: i64, d: i64) -> PadicNumber {
    let scale = BigInt::from(p.value()).pow(v);
    PadicNumber::from_rational(scale * n, d * p.value() as i64 + 1, p, N).unwrap()
}

proptest! {
    #[test]
    fn valuation_is_multiplicative(p in primes(), a in nonzero(), b in 1i64..1_000_000, c in nonzero(), d in 1i64..1_000_000) {
        let (x, y) = (rational(a, b, p), rational(c, d, p));
        let xy = x.checked_mul(&y).unwrap();
        prop_assert_eq!(val(&xy), val(&x) + val(&y));
        let ratio = x.checked_div(&y).unwrap();
        prop_assert_eq!(val(&ratio), val(&x) - val(&y));
    }

    #[test]
    fn strong_triangle_inequality(p in primes(), a in nonzero(), b in 1i64..1_000_000, c in nonzero(), d in 1i64..1_000_000) {
        let (x, y) = (rational(a, b, p), rational(c, d, p));
        let floor = val(&x).min(val(&y));
        match x.checked_add(&y) {
            Ok(s) => {
                prop_assert!(s.valuation().at_least(floor));
                if val(&x) != val(&y) {
                    prop_assert_eq!(s.valuation(), Valuation::Finite(floor));
                }
            }
            // Cancellation past the known digits still respects the bound.
            Err(Error::PrecisionExhausted { absolute }) => prop_assert!(absolute >= floor),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn rational_round_trip(p in primes(), n in nonzero(), d in 1i64..1_000_000) {
        let x = rational(n, d, p);
        let back = x.checked_mul(&PadicNumber::from_integer(d, p, N)).unwrap();
        prop_assert!(back.agrees_with(&PadicNumber::from_integer(n, p, N)));
    }

    #[test]
    fn integers_are_exact(p in primes(), n in nonzero()) {
        let x = PadicNumber::from_integer(n, p, N);
        prop_assert_eq!(x.to_exact_integer(), Some(BigInt::from(n)));
        let doubled = x.checked_add(&x).unwrap();
        prop_assert_eq!(doubled.to_exact_integer(), Some(BigInt::from(2 * n)));
    }

    #[test]
    fn exp_is_a_homomorphism(p in primes(), v1 in 0u32..4, v2 in 0u32..4, a in nonzero(), b in nonzero(), d in 1i64..1000) {
        let lo = p.exp_domain_valuation() as u32;
        let (x, y) = (in_disk(p, lo + v1, a, d), in_disk(p, lo + v2, b, d));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let sum = match x.checked_add(&y) {
            Ok(s) => s,
            Err(Error::PrecisionExhausted { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let lhs = exp_p(&sum).unwrap();
        let rhs = exp_p(&x).unwrap().checked_mul(&exp_p(&y).unwrap()).unwrap();
        let digits = lhs.absolute_precision().unwrap().min(rhs.absolute_precision().unwrap());
        prop_assert!(lhs.difference_valuation(&rhs).unwrap().at_least(digits));
    }

    #[test]
    fn log_turns_products_into_sums(p in primes(), v1 in 0u32..4, v2 in 0u32..4, a in nonzero(), b in nonzero(), d in 1i64..1000) {
        let lo = p.exp_domain_valuation() as u32;
        let one = PadicNumber::one(p, N);
        let x = one.checked_add(&in_disk(p, lo + v1, a, d)).unwrap();
        let y = one.checked_add(&in_disk(p, lo + v2, b, d)).unwrap();
        let lhs = log_p(&x.checked_mul(&y).unwrap()).unwrap();
        let rhs = match log_p(&x).unwrap().checked_add(&log_p(&y).unwrap()) {
            Ok(s) => s,
            Err(Error::PrecisionExhausted { absolute }) => {
                prop_assert!(lhs.valuation().at_least(absolute));
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let digits = lhs.absolute_precision().unwrap().min(rhs.absolute_precision().unwrap());
        prop_assert!(lhs.difference_valuation(&rhs).unwrap().at_least(digits));
    }
}

/// `f(r) mod m` for integer coefficients, lowest degree first.
fn eval_mod(coeffs: &[i64], r: i128, m: i128) -> i128 {
    coeffs
        .iter()
        .rev()
        .fold(0i128, |acc, &c| ((acc * r + c as i128) % m + m) % m)
}

fn discriminant_cubic(c: &[i64; 4]) -> i128 {
    let (d, cc, b, a) = (c[0] as i128, c[1] as i128, c[2] as i128, c[3] as i128);
    18 * a * b * cc * d - 4 * b * b * b * d + b * b * cc * cc
        - 4 * a * cc * cc * cc
        - 27 * a * a * d * d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Monic cubics squarefree mod p: every root mod p lifts uniquely, so the
    /// roots found must be exactly the residues an exhaustive search finds.
    #[test]
    fn hensel_matches_exhaustive_search(pi in prop::sample::select(vec![3u64, 5, 7]), c0 in -50i64..50, c1 in -50i64..50, c2 in -50i64..50) {
        let p = Prime::new(pi).unwrap();
        let coeffs = [c0, c1, c2, 1];
        prop_assume!(discriminant_cubic(&coeffs) % pi as i128 != 0);
        let width = 6u32;
        let m = (pi as i128).pow(width);
        let mut expected: Vec<i128> = (0..m).filter(|&r| eval_mod(&coeffs, r, m) == 0).collect();
        expected.sort();

        let f = PadicPolynomial::from_integers(&coeffs, p, N).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::zero(p, N), 0).unwrap();
        let mut found: Vec<i128> = roots
            .iter()
            .map(|z| {
                let r = z.integer_residue(width).unwrap();
                i128::try_from(BigInt::from(r)).unwrap()
            })
            .collect();
        found.sort();
        prop_assert_eq!(found, expected);
    }

    /// Without the squarefree condition every returned root must still vanish
    /// modulo the certified depth.
    #[test]
    fn hensel_roots_are_roots(pi in prop::sample::select(vec![2u64, 3, 5]), c0 in -30i64..30, c1 in -30i64..30, c2 in -30i64..30) {
        let p = Prime::new(pi).unwrap();
        let coeffs = [c0, c1, c2, 1];
        let f = PadicPolynomial::from_integers(&coeffs, p, N).unwrap();
        let m = (pi as i128).pow(12);
        for z in hensel_roots_in_disk(&f, &PadicNumber::zero(p, N), 0).unwrap() {
            let r = i128::try_from(BigInt::from(z.integer_residue(12).unwrap())).unwrap();
            prop_assert_eq!(eval_mod(&coeffs, r, m), 0, "root {:?}", z);
        }
    }
}
