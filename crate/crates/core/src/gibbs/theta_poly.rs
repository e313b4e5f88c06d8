//! Integer polynomials in `θ`, used to build the coefficients of the fixed
//! point equations exactly before evaluating them p-adically.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::padic::{Approx, PadicNumber};

/// `Σ c_i x^i` with integer coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(coefficients: Vec<BigInt>) -> Self {
        let mut p = IntPoly(coefficients);
        p.trim();
        p
    }

    pub fn from_i64(coefficients: &[i64]) -> Self {
        Self::new(coefficients.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: i64) -> Self {
        Self::from_i64(&[c])
    }

    /// The indeterminate itself.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(BigInt::zero());
        }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.0
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.0.len().max(other.0.len());
        let get = |v: &Vec<BigInt>, i: usize| v.get(i).cloned().unwrap_or_default();
        IntPoly::new((0..n).map(|i| get(&self.0, i) + get(&other.0, i)).collect())
    }

    pub fn scale(&self, c: i64) -> IntPoly {
        IntPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn square(&self) -> IntPoly {
        self.mul(self)
    }

    /// `P(x + 1)`, i.e. the same polynomial written in `e = θ - 1`.
    pub fn shift_by_one(&self) -> IntPoly {
        let x_plus_one = IntPoly::from_i64(&[1, 1]);
        let mut out = IntPoly::constant(0);
        for c in self.0.iter().rev() {
            out = out.mul(&x_plus_one).add(&IntPoly::new(vec![c.clone()]));
        }
        out
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * x + BigRational::from_integer(c.clone())
        })
    }

    /// Horner evaluation; cancellation below precision is kept as a bound.
    pub fn eval_padic(&self, x: &PadicNumber) -> Result<Approx> {
        let prime = x.prime();
        let n = x.precision();
        let mut acc = Approx::from(PadicNumber::zero(prime, n));
        for c in self.0.iter().rev() {
            acc = acc
                .mul(&Approx::from(x.clone()))?
                .add(&Approx::from(PadicNumber::from_bigint(c, prime, n)))?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_zero()
    }

    pub fn sum_of_coefficients(&self) -> BigInt {
        self.0.iter().sum()
    }

    pub fn leading_is_one(&self) -> bool {
        self.0.last().is_some_and(One::is_one)
    }
}

/// Coefficients (lowest first, each an [`IntPoly`] in `θ`) of the cubic
/// whose roots are the translation-invariant solutions for `k = 2`:
/// `z^3 + (2q - (θ-1)^2 - 3) z^2 + ((θ-1)^2 + 3 + q^2 - 4q) z - (q-1)^2`.
pub fn cubic_coefficients(q: i64) -> [IntPoly; 4] {
    let e2 = IntPoly::from_i64(&[-1, 1]).square();
    [
        IntPoly::constant(-(q - 1) * (q - 1)),
        e2.add(&IntPoly::constant(3 + q * q - 4 * q)),
        IntPoly::constant(2 * q - 3).add(&e2.scale(-1)),
        IntPoly::constant(1),
    ]
}

/// `α = (θ^2 + θ + q - 2)^2`, leading coefficient of the period-2 quadratic.
pub fn period2_alpha(q: i64) -> IntPoly {
    IntPoly::from_i64(&[q - 2, 1, 1]).square()
}

/// `β`, the middle coefficient of the period-2 quadratic.
pub fn period2_beta(q: i64) -> IntPoly {
    IntPoly::from_i64(&[
        2 * q * q * q - 13 * q * q + 26 * q - 17,
        2 * (5 * q * q - 18 * q + 16),
        q * q + 6 * q - 12,
        4 * (q - 1),
        1,
    ])
}

/// `τ = (θ(q - 1) + (θ + q - 2)^2)^2`, the constant term.
pub fn period2_tau(q: i64) -> IntPoly {
    let shifted = IntPoly::from_i64(&[q - 2, 1]).square();
    shifted.add(&IntPoly::from_i64(&[0, q - 1])).square()
}

/// Numerator of `f(z) - w` for `f(z) = ((θ z + q - 1)/(z + θ + q - 2))^2`,
/// as a polynomial in `z` whose coefficients are polynomials in `θ`, in the
/// case `w = z` reduced to the cubic above. Used by tests as an oracle.
pub fn fixed_point_numerator(q: i64) -> Vec<IntPoly> {
    // (z + θ + q - 2)^2 z - (θ z + q - 1)^2
    let a = IntPoly::from_i64(&[q - 2, 1]);
    let theta = IntPoly::x();
    let qm1 = IntPoly::constant(q - 1);
    vec![
        qm1.square().scale(-1),
        a.square().add(&theta.mul(&qm1).scale(-2)),
        a.scale(2).add(&theta.square().scale(-1)),
        IntPoly::constant(1),
    ]
}
