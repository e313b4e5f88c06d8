//! Roots of polynomials over `Q_p` inside a disk, by residue enumeration and
//! Newton lifting.
//!
//! The polynomial is scaled by its content and reduced to integer residues
//! modulo `p^M`, where `M` is the number of digits every coefficient actually
//! carries. Roots are then searched for in `Z/p^M` one digit at a time.

use std::cmp::min;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation};

/// Residual valuations within this many digits of `N` are accepted as roots.
pub const HENSEL_MARGIN: u32 = 4;

/// A polynomial with `Q_p` coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicPolynomial {
    coefficients: Vec<PadicNumber>,
}

impl PadicPolynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial is rejected.
    pub fn new(mut coefficients: Vec<PadicNumber>) -> Result<Self> {
        while coefficients.last().is_some_and(|c| c.is_zero()) {
            coefficients.pop();
        }
        let Some(first) = coefficients.first() else {
            return Err(Error::InvalidInput("zero polynomial".into()));
        };
        let prime = first.prime();
        if let Some(other) = coefficients.iter().find(|c| c.prime() != prime) {
            return Err(Error::PrimeMismatch {
                left: prime.value(),
                right: other.prime().value(),
            });
        }
        Ok(PadicPolynomial { coefficients })
    }

    pub fn from_integers(coefficients: &[i64], prime: Prime, precision: u32) -> Result<Self> {
        Self::new(
            coefficients
                .iter()
                .map(|&c| PadicNumber::from_integer(c, prime, precision))
                .collect(),
        )
    }

    pub fn coefficients(&self) -> &[PadicNumber] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn prime(&self) -> Prime {
        self.coefficients[0].prime()
    }

    /// Smallest coefficient precision.
    pub fn precision(&self) -> u32 {
        self.coefficients
            .iter()
            .map(PadicNumber::precision)
            .min()
            .expect("nonempty")
    }

    /// Horner evaluation. Cancellation below precision yields `Approx::Negligible`.
    pub fn evaluate(&self, x: &PadicNumber) -> Result<Approx> {
        let mut acc = Approx::from(PadicNumber::zero(self.prime(), self.precision()));
        for c in self.coefficients.iter().rev() {
            acc = acc
                .mul(&Approx::from(x.clone()))?
                .add(&Approx::from(c.clone()))?;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Result<Self> {
        let prime = self.prime();
        let precision = self.precision();
        let mut out = Vec::with_capacity(self.degree().max(1));
        for (i, c) in self.coefficients.iter().enumerate().skip(1) {
            out.push(c.checked_mul(&PadicNumber::from_integer(i as i64, prime, precision))?);
        }
        if out.iter().all(PadicNumber::is_zero) {
            return Err(Error::InvalidInput("derivative of a constant".into()));
        }
        Self::new(out)
    }

    fn content(&self) -> i64 {
        self.coefficients
            .iter()
            .filter_map(|c| c.valuation().finite())
            .min()
            .expect("nonzero polynomial")
    }

    /// Number of digits to which `f / p^content` is known as an integer polynomial.
    fn residue_width(&self) -> u32 {
        let content = self.content();
        self.coefficients
            .iter()
            .filter_map(|c| c.absolute_precision().map(|a| a - content))
            .min()
            .map(|w| w.max(1) as u32)
            .unwrap_or_else(|| self.precision())
    }

    fn scaled_residues(&self, width: u32) -> Vec<BigInt> {
        let content = self.content();
        self.coefficients
            .iter()
            .map(|c| {
                BigInt::from(
                    c.shift(-content)
                        .integer_residue(width)
                        .expect("scaled coefficients are integral"),
                )
            })
            .collect()
    }

    fn exact_integer_coefficients(&self) -> Option<Vec<BigInt>> {
        self.coefficients
            .iter()
            .map(PadicNumber::to_exact_integer)
            .collect()
    }

    /// Lower bound on `v(f(z))` computed from the integer representative of `z`.
    ///
    /// Unlike [`Self::evaluate`] this sees cancellation among the terms, so it
    /// certifies roots to the full width of the coefficients. Requires `v(z) >= 0`.
    pub fn residual_valuation(&self, z: &PadicNumber) -> Result<Valuation> {
        if let Some(exact) = self.exact_integer_coefficients() {
            if let Some(zi) = z.to_exact_integer() {
                let value = eval_int(&exact, &zi);
                return Ok(if value.is_zero() {
                    Valuation::Infinite
                } else {
                    PadicNumber::from_bigint(&value, self.prime(), 1).valuation()
                });
            }
        }
        let width = self.residue_width();
        let modulus = BigInt::from(self.prime().pow(width));
        let zr = z
            .integer_residue(width)
            .ok_or_else(|| Error::DomainViolation {
                function: "residual_valuation",
                detail: "point must lie in Z_p".into(),
            })?;
        let value = eval_int(&self.scaled_residues(width), &BigInt::from(zr)).mod_floor(&modulus);
        let v = int_valuation(&value, self.prime()).map_or(width as i64, |v| v as i64);
        Ok(Valuation::Finite(v + self.content()))
    }
}

fn eval_int(coefficients: &[BigInt], x: &BigInt) -> BigInt {
    coefficients
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn int_valuation(n: &BigInt, prime: Prime) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(prime.value());
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    Some(v)
}

/// `G(t) = F(a + s t)` with coefficients reduced modulo `modulus`.
fn taylor_shift(f: &[BigInt], a: &BigInt, s: &BigInt, modulus: &BigInt) -> Vec<BigInt> {
    let mut g: Vec<BigInt> = vec![BigInt::zero()];
    for c in f.iter().rev() {
        let mut next = vec![BigInt::zero(); g.len() + 1];
        for (i, gi) in g.iter().enumerate() {
            next[i] += gi * a;
            next[i + 1] += gi * s;
        }
        next[0] += c;
        g = next.into_iter().map(|x| x.mod_floor(modulus)).collect();
    }
    while g.len() > 1 && g.last().is_some_and(Zero::is_zero) {
        g.pop();
    }
    g
}

fn derivative_int(f: &[BigInt]) -> Vec<BigInt> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

fn inverse_mod(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(modulus).extended_gcd(modulus);
    e.gcd.is_one().then(|| e.x.mod_floor(modulus))
}

/// A root `t` known modulo `p^digits`.
struct TRoot {
    value: BigInt,
    digits: u32,
}

struct Search {
    p: BigInt,
    prime: Prime,
    depth_cap: u32,
    roots: Vec<TRoot>,
}

impl Search {
    /// Roots of `g` (coefficients modulo `p^m`) in `Z_p`, each reported as
    /// `prefix + p^depth * t`.
    fn run(&mut self, g: Vec<BigInt>, m: u32, prefix: BigInt, depth: u32) -> Result<()> {
        if depth > self.depth_cap {
            return Err(Error::LiftStall {
                depth,
                detail: format!("residue branch {prefix} did not separate"),
            });
        }
        let content = g
            .iter()
            .filter_map(|c| int_valuation(c, self.prime))
            .min()
            .unwrap_or(m)
            .min(m);
        if content >= m {
            self.roots.push(TRoot {
                value: prefix,
                digits: depth,
            });
            return Ok(());
        }
        let scale = self.p.pow(content);
        let g: Vec<BigInt> = g.iter().map(|c| c / &scale).collect();
        let m = m - content;
        let modulus = self.p.pow(m);
        let dg = derivative_int(&g);
        let step = self.p.pow(depth);
        let p_small = self.prime.value();
        for r in 0..p_small {
            let r = BigInt::from(r);
            if !eval_int(&g, &r).is_multiple_of(&self.p) {
                continue;
            }
            let slope = eval_int(&dg, &r);
            if !slope.is_multiple_of(&self.p) {
                let t = newton_lift(&g, &dg, r, &modulus);
                self.roots.push(TRoot {
                    value: &prefix + &step * t,
                    digits: depth + m,
                });
            } else {
                let shifted = taylor_shift(&g, &r, &self.p, &modulus);
                self.run(shifted, m, &prefix + &step * &r, depth + 1)?;
            }
        }
        Ok(())
    }
}

fn newton_lift(g: &[BigInt], dg: &[BigInt], start: BigInt, modulus: &BigInt) -> BigInt {
    let mut t = start;
    loop {
        let value = eval_int(g, &t).mod_floor(modulus);
        if value.is_zero() {
            return t;
        }
        let inv = inverse_mod(&eval_int(dg, &t), modulus).expect("simple residue root");
        t = (&t - value * inv).mod_floor(modulus);
    }
}

/// All roots `z` of `f` with `v(z - center) >= offset`.
///
/// Each root is certified by `v(f(z)) - c >= N - HENSEL_MARGIN`, where `c` is
/// the content of `f` and `N` its precision. Roots are sorted by distance to
/// the center, then by digits. When `f` has exact integer coefficients, roots
/// whose symmetric integer representative is an exact root are returned exact.
pub fn hensel_roots_in_disk(
    f: &PadicPolynomial,
    center: &PadicNumber,
    offset: i64,
) -> Result<Vec<PadicNumber>> {
    let prime = f.prime();
    if center.prime() != prime {
        return Err(Error::PrimeMismatch {
            left: prime.value(),
            right: center.prime().value(),
        });
    }
    if offset < 0 || !center.valuation().at_least(0) {
        return Err(Error::DomainViolation {
            function: "hensel_roots_in_disk",
            detail: "disk must lie in Z_p (center integral, offset >= 0)".into(),
        });
    }
    let n = f.precision();
    let width = f.residue_width();
    let total = width + offset as u32;
    let big_modulus = BigInt::from(prime.pow(total));
    let p = BigInt::from(prime.value());
    let residues = f.scaled_residues(total);
    let c = BigInt::from(center.integer_residue(total).expect("integral center"));
    let g = taylor_shift(&residues, &c, &p.pow(offset as u32), &big_modulus);

    let mut search = Search {
        p: p.clone(),
        prime,
        depth_cap: 2 * n,
        roots: Vec::new(),
    };
    search.run(g, width, BigInt::zero(), 0)?;

    let exact = f.exact_integer_coefficients();
    let threshold = n as i64 - HENSEL_MARGIN as i64;
    let mut roots: Vec<PadicNumber> = Vec::new();
    for t in search.roots {
        let absolute = offset as u32 + t.digits;
        let modulus = p.pow(absolute);
        let z_res = (&c + p.pow(offset as u32) * &t.value).mod_floor(&modulus);
        let z = match root_from_residue(&z_res, &modulus, absolute, exact.as_deref(), prime, n)? {
            Some(z) => z,
            None => continue,
        };
        let residual = f.residual_valuation(&z)?;
        if !residual.at_least(threshold + f.content()) {
            return Err(Error::LiftStall {
                depth: t.digits,
                detail: format!("candidate {z:?} leaves residual valuation {residual}"),
            });
        }
        let cut = BigUint::from(prime.value()).pow(min(threshold.max(1) as u32, absolute));
        let key = z.integer_residue(total).expect("integral root") % &cut;
        if roots
            .iter()
            .any(|r| r.integer_residue(total).expect("integral root") % &cut == key)
        {
            continue;
        }
        roots.push(z);
    }
    roots.sort_by(|a, b| {
        let da = a
            .difference_valuation(center)
            .unwrap_or(Valuation::Infinite);
        let db = b
            .difference_valuation(center)
            .unwrap_or(Valuation::Infinite);
        da.cmp(&db).then_with(|| a.digits().cmp(&b.digits()))
    });
    Ok(roots)
}

fn root_from_residue(
    residue: &BigInt,
    modulus: &BigInt,
    absolute: u32,
    exact: Option<&[BigInt]>,
    prime: Prime,
    precision: u32,
) -> Result<Option<PadicNumber>> {
    if let Some(coefficients) = exact {
        let half: BigInt = modulus / 2;
        let symmetric = if residue > &half {
            residue - modulus
        } else {
            residue.clone()
        };
        if eval_int(coefficients, &symmetric).is_zero() {
            return Ok(Some(PadicNumber::from_bigint(&symmetric, prime, precision)));
        }
    }
    if absolute == 0 {
        return Err(Error::LiftStall {
            depth: 0,
            detail: "polynomial vanishes identically on the disk".into(),
        });
    }
    let r = residue.abs().to_biguint().expect("nonnegative residue");
    match PadicNumber::from_residue(prime, &r, absolute, precision) {
        Ok(z) => Ok(Some(z)),
        Err(Error::PrecisionExhausted { .. }) => Ok(Some(PadicNumber::zero(prime, precision))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn linear_root() {
        let f = PadicPolynomial::from_integers(&[-1, 1], p(3), 32).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::one(p(3), 32), 0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].is_exact());
        assert_eq!(roots[0], PadicNumber::one(p(3), 32));
    }

    #[test]
    fn congruent_integer_roots_separate() {
        // z^2 + z - 2 = (z - 1)(z + 2); both roots are 1 mod 3.
        let f = PadicPolynomial::from_integers(&[-2, 1, 1], p(3), 32).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::one(p(3), 32), 0).unwrap();
        let values: Vec<_> = roots
            .iter()
            .map(|r| r.to_exact_integer().unwrap())
            .collect();
        assert_eq!(values, vec![BigInt::from(-2), BigInt::from(1)]);
    }

    #[test]
    fn irrational_simple_root() {
        // z^2 = 7 has two roots in Z_3 (7 = 1 mod 3).
        let f = PadicPolynomial::from_integers(&[-7, 0, 1], p(3), 20).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::zero(p(3), 20), 0).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(f.residual_valuation(r).unwrap().at_least(16));
            let sq = r.checked_mul(r).unwrap();
            assert!(sq.agrees_with(&PadicNumber::from_integer(7, p(3), 20)));
        }
    }

    #[test]
    fn no_root_outside_the_disk() {
        let f = PadicPolynomial::from_integers(&[-2, 1], p(3), 32).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::one(p(3), 32), 1).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn squares_without_roots() {
        // 2 is not a square mod 3.
        let f = PadicPolynomial::from_integers(&[-2, 0, 1], p(3), 16).unwrap();
        assert!(hensel_roots_in_disk(&f, &PadicNumber::zero(p(3), 16), 0)
            .unwrap()
            .is_empty());
        // z^2 - 3 has no root: the valuation of a square is even.
        let f = PadicPolynomial::from_integers(&[-3, 0, 1], p(3), 16).unwrap();
        assert!(hensel_roots_in_disk(&f, &PadicNumber::zero(p(3), 16), 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn repeated_root_is_reported_once() {
        let f = PadicPolynomial::from_integers(&[1, -2, 1], p(5), 16).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::zero(p(5), 16), 0).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].to_exact_integer(), Some(BigInt::from(1)));
    }

    #[test]
    fn rational_coefficients_are_scaled() {
        // (z - 1/3 * 3)(z - 4) / 9 with inexact coefficients.
        let prime = p(3);
        let c = |n: i64, d: i64| PadicNumber::from_rational(n, d, prime, 24).unwrap();
        let f = PadicPolynomial::new(vec![c(4, 9), c(-5, 9), c(1, 9)]).unwrap();
        let roots = hensel_roots_in_disk(&f, &PadicNumber::one(prime, 24), 0).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots
            .iter()
            .any(|r| r.agrees_with(&PadicNumber::from_integer(4, prime, 24))));
        assert!(roots
            .iter()
            .any(|r| r.agrees_with(&PadicNumber::one(prime, 24))));
    }

    #[test]
    fn evaluate_and_derivative() {
        let prime = p(5);
        let f = PadicPolynomial::from_integers(&[1, 2, 3], prime, 10).unwrap();
        let x = PadicNumber::from_integer(2, prime, 10);
        let value = f.evaluate(&x).unwrap().into_value().unwrap();
        assert_eq!(value.to_exact_integer(), Some(BigInt::from(17)));
        let d = f.derivative().unwrap();
        assert_eq!(d.degree(), 1);
        assert!(PadicPolynomial::from_integers(&[0, 0], prime, 10).is_err());
    }
}
