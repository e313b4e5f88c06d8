use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiskKind {
    /// `|x|_p < p^(-1/(p-1))`.
    ExpDomain,
    /// `|x - 1|_p < 1`.
    LogDomain,
}

/// Region of convergence of `exp_p` or `log_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvergenceDisk {
    pub kind: DiskKind,
    pub prime: Prime,
}

impl ConvergenceDisk {
    pub fn exp(prime: Prime) -> Self {
        ConvergenceDisk {
            kind: DiskKind::ExpDomain,
            prime,
        }
    }

    pub fn log(prime: Prime) -> Self {
        ConvergenceDisk {
            kind: DiskKind::LogDomain,
            prime,
        }
    }

    /// Membership test. Points of `LogDomain` whose distance to 1 cancels
    /// below working precision are reported as members.
    pub fn contains(&self, x: &PadicNumber) -> bool {
        if x.prime() != self.prime {
            return false;
        }
        match self.kind {
            DiskKind::ExpDomain => x.valuation().at_least(self.prime.exp_domain_valuation()),
            DiskKind::LogDomain => {
                let one = PadicNumber::one(self.prime, x.precision());
                x.difference_valuation(&one)
                    .map(|v| v.at_least(1))
                    .unwrap_or(false)
            }
        }
    }
}

/// `p`-adic exponential `sum_{n >= 0} x^n / n!`.
///
/// Terms are summed until the lower bound `n v(x) - floor((n-1)/(p-1))` on
/// their valuation reaches `v(x) + N + 2`; the bound is nondecreasing in `n`
/// on the domain, so every dropped term lies below the result's precision.
///
/// The result is a unit known to the absolute precision of the tail, i.e.
/// `v(x) + N` digits; capping it at `N` would discard honest digits.
pub fn exp_p(x: &PadicNumber) -> Result<PadicNumber> {
    match exp_minus_one(x)? {
        None => Ok(PadicNumber::one(x.prime(), x.precision())),
        Some(tail) => {
            let digits = tail
                .absolute_precision()
                .map_or(x.precision(), |a| a.max(x.precision() as i64) as u32);
            PadicNumber::one(x.prime(), digits).checked_add(&tail)
        }
    }
}

/// `exp_p(x) - 1` carried to the full relative precision of `x`, or `None`
/// for `x = 0`. Subtracting 1 from [`exp_p`] would lose `v(x)` digits.
pub fn exp_p_minus_one(x: &PadicNumber) -> Result<PadicNumber> {
    Ok(exp_minus_one(x)?.unwrap_or_else(|| PadicNumber::zero(x.prime(), x.precision())))
}

fn exp_minus_one(x: &PadicNumber) -> Result<Option<PadicNumber>> {
    let prime = x.prime();
    let n_digits = x.precision();
    let Valuation::Finite(v) = x.valuation() else {
        return Ok(None);
    };
    if v < prime.exp_domain_valuation() {
        return Err(Error::DomainViolation {
            function: "exp_p",
            detail: format!(
                "v_{prime}(x) = {v}, need at least {}",
                prime.exp_domain_valuation()
            ),
        });
    }
    let p = prime.value() as i64;
    let stop = v + n_digits as i64 + 2;
    let mut sum = Approx::from(x.clone());
    let mut term = x.clone();
    let mut n: i64 = 2;
    while n * v - (n - 1) / (p - 1) < stop {
        term = term
            .checked_mul(x)?
            .checked_div(&PadicNumber::from_integer(n, prime, n_digits))?;
        sum = sum.add(&Approx::from(term.clone()))?;
        n += 1;
    }
    sum.into_value().map(Some)
}

fn floor_log(p: i64, n: i64) -> i64 {
    let mut k = 0;
    let mut power = p;
    while power <= n {
        power *= p;
        k += 1;
    }
    k
}

/// `p`-adic logarithm `sum_{n >= 1} (-1)^(n+1) (x-1)^n / n`.
///
/// Stops once `n w - floor(log_p n)` reaches `w + N + 2`, where `w = v(x - 1)`.
/// A result that cancels below working precision is an error: for `p = 2`
/// this happens at `x = -1`, where the true value is zero.
pub fn log_p(x: &PadicNumber) -> Result<PadicNumber> {
    let prime = x.prime();
    let one = PadicNumber::one(prime, x.precision());
    let y = match x.checked_sub(&one) {
        Ok(y) => y,
        Err(Error::PrecisionExhausted { absolute }) if absolute >= 1 => {
            return Err(Error::PrecisionExhausted { absolute })
        }
        Err(e) => return Err(e),
    };
    log_one_plus(&y)
}

/// `log_p(1 + y)` computed from `y` itself, so digits of `y` beyond the
/// relative precision of `1 + y` are kept.
pub fn log_one_plus(y: &PadicNumber) -> Result<PadicNumber> {
    let prime = y.prime();
    let Valuation::Finite(w) = y.valuation() else {
        return Ok(PadicNumber::zero(prime, y.precision()));
    };
    if w < 1 {
        return Err(Error::DomainViolation {
            function: "log_p",
            detail: format!("v_{prime}(x - 1) = {w}, need at least 1"),
        });
    }
    let p = prime.value() as i64;
    let n_digits = y.precision();
    let stop = w + n_digits as i64 + 2;
    let mut sum = Approx::from(y.clone());
    let mut power = y.clone();
    let mut n: i64 = 2;
    while n * w - floor_log(p, n) < stop {
        power = power.checked_mul(y)?;
        let mut term = power.checked_div(&PadicNumber::from_integer(n, prime, n_digits))?;
        if n % 2 == 0 {
            term = -term;
        }
        sum = sum.add(&Approx::from(term))?;
        n += 1;
    }
    sum.into_value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn int(n: i64, prime: u64) -> PadicNumber {
        PadicNumber::from_integer(n, p(prime), 32)
    }

    #[test]
    fn exp_of_zero_is_one() {
        let one = exp_p(&PadicNumber::zero(p(3), 32)).unwrap();
        assert_eq!(one, int(1, 3));
    }

    #[test]
    fn exp_keeps_distance_to_one() {
        let e = exp_p(&int(3, 3)).unwrap();
        assert_eq!(e.valuation(), Valuation::Finite(0));
        assert_eq!(
            e.checked_sub(&int(1, 3)).unwrap().valuation(),
            Valuation::Finite(1)
        );
    }

    #[test]
    fn exp_rejects_points_outside_the_disk() {
        assert!(matches!(
            exp_p(&int(2, 2)),
            Err(Error::DomainViolation {
                function: "exp_p",
                ..
            })
        ));
        assert!(exp_p(&int(4, 2)).is_ok());
        assert!(exp_p(&int(1, 5)).is_err());
    }

    #[test]
    fn log_examples() {
        assert!(log_p(&int(1, 3)).unwrap().is_zero());
        let back = log_p(&exp_p(&int(3, 3)).unwrap()).unwrap();
        assert!(back.agrees_with(&int(3, 3)));
        let four = exp_p(&log_p(&int(4, 3)).unwrap()).unwrap();
        assert!(four.agrees_with(&int(4, 3)));
        assert!(log_p(&int(2, 3)).is_err());
    }

    #[test]
    fn log_of_minus_one_at_two_cancels() {
        assert!(matches!(
            log_p(&int(-1, 2)),
            Err(Error::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn exp_matches_rational_partial_sum() {
        // exp_5(5) = sum 5^n/n!; terms with n >= 60 lie below 5^45.
        let prime = p(5);
        let mut num = num_bigint::BigInt::from(0);
        let mut den = num_bigint::BigInt::from(1);
        let mut fact = num_bigint::BigInt::from(1);
        for n in 0..60u32 {
            if n > 0 {
                fact *= n;
            }
            let t_num = num_bigint::BigInt::from(5).pow(n);
            num = &num * &fact + &t_num * &den;
            den = &den * &fact;
        }
        let expected = PadicNumber::from_rational(num, den, prime, 32).unwrap();
        assert!(exp_p(&int(5, 5)).unwrap().agrees_with(&expected));
    }

    #[test]
    fn exp_minus_one_keeps_all_digits() {
        let x = PadicNumber::from_rational(9, 2, p(3), 32).unwrap();
        let tail = exp_p_minus_one(&x).unwrap();
        assert_eq!(tail.precision(), 32);
        assert_eq!(tail.valuation(), Valuation::Finite(2));
        let via_exp = exp_p(&x).unwrap().checked_sub(&int(1, 3)).unwrap();
        assert!(tail.agrees_with(&via_exp));
        assert!(exp_p_minus_one(&PadicNumber::zero(p(3), 8))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn disk_membership() {
        assert!(ConvergenceDisk::exp(p(3)).contains(&int(3, 3)));
        assert!(!ConvergenceDisk::exp(p(2)).contains(&int(2, 2)));
        assert!(ConvergenceDisk::log(p(3)).contains(&int(4, 3)));
        assert!(ConvergenceDisk::log(p(3)).contains(&int(1, 3)));
        assert!(!ConvergenceDisk::log(p(3)).contains(&int(2, 3)));
    }
}
