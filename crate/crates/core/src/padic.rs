//! Arithmetic in `Q_p` at fixed relative precision.
//!
//! A nonzero element is stored as `p^v * u + O(p^(v + N))` where `u` is a
//! unit residue modulo `p^N` and `N` is the relative precision. Zero is a
//! separate variant with infinite valuation; it is never produced by
//! cancellation. When the significant digits of a sum cancel completely the
//! operation fails with [`Error::PrecisionExhausted`] instead.
//!
//! Values built from integers (or integers times a power of `p`) also carry
//! their exact integer unit. Arithmetic between exact operands stays exact,
//! which lets identities such as `1 + (-1) = 0` resolve to the true zero.

use std::cmp::{max, min, Ordering};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Working precision used when callers do not pick one.
pub const DEFAULT_PRECISION: u32 = 32;

/// Exact integer units larger than this are demoted to plain residues.
const EXACT_BITS_LIMIT: u64 = 4096;

/// A rational prime. Construction checks primality by trial division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Prime(u32);

impl Prime {
    pub fn new(value: u64) -> Result<Prime> {
        if value < 2 || value > u32::MAX as u64 {
            return Err(Error::NotPrime(value));
        }
        let mut d = 2u64;
        while d * d <= value {
            if value.is_multiple_of(d) {
                return Err(Error::NotPrime(value));
            }
            d += 1;
        }
        Ok(Prime(value as u32))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// `p^n` as a big integer.
    pub fn pow(self, n: u32) -> BigUint {
        BigUint::from(self.0).pow(n)
    }

    /// Smallest valuation inside the convergence disk of `exp_p`:
    /// `|x|_p < p^(-1/(p-1))` means `v(x) >= 1` for odd `p` and `v(x) >= 2` for `p = 2`.
    pub fn exp_domain_valuation(self) -> i64 {
        if self.0 == 2 {
            2
        } else {
            1
        }
    }

    /// `p`-adic valuation of a machine integer (`None` for zero).
    pub fn valuation_of(self, n: i64) -> Option<i64> {
        if n == 0 {
            return None;
        }
        let p = self.0 as i64;
        let mut n = n;
        let mut v = 0;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        Some(v)
    }

    pub fn divides(self, n: i64) -> bool {
        n % self.0 as i64 == 0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The exponent `γ(x)` in `|x|_p = p^(-γ(x))`; `Infinite` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// True when `self >= bound`.
    pub fn at_least(self, bound: i64) -> bool {
        self >= Valuation::Finite(bound)
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => serializer.serialize_i64(*v),
            Valuation::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[derive(Clone)]
enum Kind {
    Zero,
    Nonzero {
        valuation: i64,
        /// Unit residue modulo `p^precision`, coprime to `p`.
        unit: BigUint,
        /// The exact integer unit, when the value is known exactly.
        exact: Option<BigInt>,
    },
}

/// An element of `Q_p` carried to a fixed number of significant digits.
#[derive(Clone)]
pub struct PadicNumber {
    prime: Prime,
    precision: u32,
    kind: Kind,
}

fn strip_prime(n: &mut BigInt, p: &BigInt) -> i64 {
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        *n = q;
        v += 1;
    }
}

fn mod_inverse(a: &BigUint, modulus: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let egcd = a.extended_gcd(&m);
    debug_assert!(egcd.gcd.is_one());
    egcd.x
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor of a positive modulus is nonnegative")
}

fn residue(n: &BigInt, modulus: &BigUint) -> BigUint {
    n.mod_floor(&BigInt::from(modulus.clone()))
        .to_biguint()
        .expect("mod_floor of a positive modulus is nonnegative")
}

impl PadicNumber {
    pub fn zero(prime: Prime, precision: u32) -> Self {
        assert!(precision > 0, "precision must be positive");
        PadicNumber {
            prime,
            precision,
            kind: Kind::Zero,
        }
    }

    pub fn one(prime: Prime, precision: u32) -> Self {
        Self::from_integer(1, prime, precision)
    }

    pub fn from_integer(n: i64, prime: Prime, precision: u32) -> Self {
        Self::from_bigint(&BigInt::from(n), prime, precision)
    }

    pub fn from_bigint(n: &BigInt, prime: Prime, precision: u32) -> Self {
        Self::from_exact(prime, 0, n.clone(), precision)
    }

    /// Canonical expansion of `numerator / denominator` to `precision` digits.
    pub fn from_rational(
        numerator: impl Into<BigInt>,
        denominator: impl Into<BigInt>,
        prime: Prime,
        precision: u32,
    ) -> Result<Self> {
        let mut num: BigInt = numerator.into();
        let mut den: BigInt = denominator.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero(prime, precision));
        }
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let p = BigInt::from(prime.0);
        let vn = strip_prime(&mut num, &p);
        let vd = strip_prime(&mut den, &p);
        let valuation = vn - vd;
        if den.is_one() {
            return Ok(Self::from_exact(prime, valuation, num, precision));
        }
        let modulus = prime.pow(precision);
        let unit =
            (residue(&num, &modulus) * mod_inverse(&residue(&den, &modulus), &modulus)) % &modulus;
        Ok(PadicNumber {
            prime,
            precision,
            kind: Kind::Nonzero {
                valuation,
                unit,
                exact: None,
            },
        })
    }

    /// Builds `p^valuation * (d0 + d1 p + ...)` from base-`p` digits, lowest first.
    /// The precision is the number of digits supplied.
    pub fn from_digits(prime: Prime, valuation: i64, digits: &[u32]) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidInput("digit sequence is empty".into()));
        }
        if digits[0] == 0 {
            return Err(Error::InvalidInput("leading digit must be nonzero".into()));
        }
        let p = BigUint::from(prime.0);
        let mut unit = BigUint::zero();
        for &d in digits.iter().rev() {
            if d >= prime.0 {
                return Err(Error::InvalidInput(format!(
                    "digit {d} out of range for p = {prime}"
                )));
            }
            unit = unit * &p + BigUint::from(d);
        }
        Ok(PadicNumber {
            prime,
            precision: digits.len() as u32,
            kind: Kind::Nonzero {
                valuation,
                unit,
                exact: None,
            },
        })
    }

    /// The element of `Z_p` congruent to `residue` modulo `p^absolute`, carried
    /// to at most `cap` significant digits.
    pub fn from_residue(prime: Prime, residue: &BigUint, absolute: u32, cap: u32) -> Result<Self> {
        let raw = residue % prime.pow(absolute);
        Self::from_raw(prime, 0, raw, absolute, cap)
    }

    fn from_exact(prime: Prime, valuation: i64, mut n: BigInt, precision: u32) -> Self {
        assert!(precision > 0, "precision must be positive");
        if n.is_zero() {
            return Self::zero(prime, precision);
        }
        let shift = strip_prime(&mut n, &BigInt::from(prime.0));
        let unit = residue(&n, &prime.pow(precision));
        let exact = if n.bits() > EXACT_BITS_LIMIT {
            None
        } else {
            Some(n)
        };
        PadicNumber {
            prime,
            precision,
            kind: Kind::Nonzero {
                valuation: valuation + shift,
                unit,
                exact,
            },
        }
    }

    /// `p^valuation * raw + O(p^(valuation + width))`, with `raw` possibly
    /// divisible by `p`, truncated to at most `cap` significant digits.
    fn from_raw(prime: Prime, valuation: i64, raw: BigUint, width: u32, cap: u32) -> Result<Self> {
        if raw.is_zero() {
            return Err(Error::PrecisionExhausted {
                absolute: valuation + width as i64,
            });
        }
        let p = BigUint::from(prime.0);
        let mut raw = raw;
        let mut shift = 0u32;
        loop {
            let (q, r) = raw.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            raw = q;
            shift += 1;
        }
        let precision = min(width - shift, cap);
        let unit = raw % prime.pow(precision);
        Ok(PadicNumber {
            prime,
            precision,
            kind: Kind::Nonzero {
                valuation: valuation + shift as i64,
                unit,
                exact: None,
            },
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Number of significant base-`p` digits carried.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `γ(x)`, or `Infinite` for zero.
    pub fn valuation(&self) -> Valuation {
        match &self.kind {
            Kind::Zero => Valuation::Infinite,
            Kind::Nonzero { valuation, .. } => Valuation::Finite(*valuation),
        }
    }

    /// `|x|_p` as a float, for display only.
    pub fn norm(&self) -> f64 {
        match self.valuation() {
            Valuation::Infinite => 0.0,
            Valuation::Finite(v) => (self.prime.0 as f64).powi(-(v as i32)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// True when the value is known exactly rather than to `precision` digits.
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::Nonzero { exact, .. } => exact.is_some(),
        }
    }

    /// Exponent of the `O(p^k)` error term; `None` for exact values.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.kind {
            Kind::Nonzero {
                valuation,
                exact: None,
                ..
            } => Some(valuation + self.precision as i64),
            _ => None,
        }
    }

    /// The unit part `x / p^γ(x)` as a residue modulo `p^precision`.
    pub fn unit_residue(&self) -> Option<&BigUint> {
        match &self.kind {
            Kind::Zero => None,
            Kind::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// Canonical digits `x_0, x_1, ...` of the unit part; empty for zero.
    pub fn digits(&self) -> Vec<u32> {
        let Some(unit) = self.unit_residue() else {
            return Vec::new();
        };
        let p = BigUint::from(self.prime.0);
        let mut rest = unit.clone();
        let mut out = Vec::with_capacity(self.precision as usize);
        for _ in 0..self.precision {
            let (q, r) = rest.div_rem(&p);
            out.push(r.to_u32().expect("digit below p"));
            rest = q;
        }
        out
    }

    /// Same value carried to `precision` digits. Shrinking truncates. Growing
    /// recomputes exact values and pads inexact ones with zero digits, i.e.
    /// it promotes the truncated representative to a value in its own right.
    pub fn with_precision(&self, precision: u32) -> Self {
        assert!(precision > 0, "precision must be positive");
        let kind = match &self.kind {
            Kind::Zero => Kind::Zero,
            Kind::Nonzero {
                valuation,
                unit,
                exact,
            } => {
                let modulus = self.prime.pow(precision);
                let unit = match exact {
                    Some(e) => residue(e, &modulus),
                    None => unit % modulus,
                };
                Kind::Nonzero {
                    valuation: *valuation,
                    unit,
                    exact: exact.clone(),
                }
            }
        };
        PadicNumber {
            prime: self.prime,
            precision,
            kind,
        }
    }

    fn capped(&self, cap: u32) -> Self {
        if self.precision <= cap {
            self.clone()
        } else {
            self.with_precision(cap)
        }
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime.0,
                right: other.prime.0,
            });
        }
        Ok(())
    }

    /// `self * p^shift` reduced modulo `p^width`, for `shift >= 0`.
    fn shifted_residue(&self, shift: i64, width: u32) -> BigUint {
        let Kind::Nonzero { unit, exact, .. } = &self.kind else {
            return BigUint::zero();
        };
        if shift >= width as i64 {
            return BigUint::zero();
        }
        let keep = self.prime.pow(width - shift as u32);
        let base = match exact {
            Some(e) => residue(e, &keep),
            None => unit % keep,
        };
        base * self.prime.pow(shift as u32)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let cap = min(self.precision, other.precision);
        let (
            Kind::Nonzero {
                valuation: va,
                exact: ea,
                ..
            },
            Kind::Nonzero {
                valuation: vb,
                exact: eb,
                ..
            },
        ) = (&self.kind, &other.kind)
        else {
            return Ok(if self.is_zero() {
                other.capped(cap)
            } else {
                self.capped(cap)
            });
        };
        let v = min(*va, *vb);
        if let (Some(ea), Some(eb)) = (ea, eb) {
            let p = BigInt::from(self.prime.0);
            let sum = ea * num_traits::pow(p.clone(), (va - v) as usize)
                + eb * num_traits::pow(p, (vb - v) as usize);
            return Ok(Self::from_exact(self.prime, v, sum, cap));
        }
        let absolute = [self.absolute_precision(), other.absolute_precision()]
            .into_iter()
            .flatten()
            .min()
            .expect("at least one operand is inexact");
        let width = (absolute - v) as u32;
        let modulus = self.prime.pow(width);
        let raw =
            (self.shifted_residue(va - v, width) + other.shifted_residue(vb - v, width)) % modulus;
        // The absolute precision already bounds the digits; capping at the
        // smaller relative precision would discard digits regained after an
        // earlier cancellation.
        Self::from_raw(
            self.prime,
            v,
            raw,
            width,
            max(self.precision, other.precision),
        )
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.mul_same_field(other))
    }

    fn mul_same_field(&self, other: &Self) -> Self {
        let cap = min(self.precision, other.precision);
        match (&self.kind, &other.kind) {
            (
                Kind::Nonzero {
                    valuation: va,
                    unit: ua,
                    exact: ea,
                },
                Kind::Nonzero {
                    valuation: vb,
                    unit: ub,
                    exact: eb,
                },
            ) => {
                if let (Some(ea), Some(eb)) = (ea, eb) {
                    return Self::from_exact(self.prime, va + vb, ea * eb, cap);
                }
                let unit = (ua * ub) % self.prime.pow(cap);
                PadicNumber {
                    prime: self.prime,
                    precision: cap,
                    kind: Kind::Nonzero {
                        valuation: va + vb,
                        unit,
                        exact: None,
                    },
                }
            }
            _ => Self::zero(self.prime, cap),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let Kind::Nonzero {
            valuation,
            unit,
            exact,
        } = &self.kind
        else {
            return Err(Error::DivisionByZero);
        };
        if let Some(e) = exact {
            if e.abs().is_one() {
                return Ok(Self::from_exact(
                    self.prime,
                    -valuation,
                    e.clone(),
                    self.precision,
                ));
            }
        }
        let modulus = self.prime.pow(self.precision);
        Ok(PadicNumber {
            prime: self.prime,
            precision: self.precision,
            kind: Kind::Nonzero {
                valuation: -valuation,
                unit: mod_inverse(unit, &modulus),
                exact: None,
            },
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.mul_same_field(&other.inverse()?))
    }

    /// Multiplication by `p^k`; exact, no digits are lost.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        if let Kind::Nonzero { valuation, .. } = &mut out.kind {
            *valuation += k;
        }
        out
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut result = Self::one(self.prime, self.precision);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_same_field(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same_field(&base);
            }
        }
        result
    }

    /// A lower bound on `v(self - other)`: the exact valuation when the
    /// difference resolves, otherwise the absolute precision at which it vanishes.
    pub fn difference_valuation(&self, other: &Self) -> Result<Valuation> {
        match self.checked_sub(other) {
            Ok(d) => Ok(d.valuation()),
            Err(Error::PrecisionExhausted { absolute }) => Ok(Valuation::Finite(absolute)),
            Err(e) => Err(e),
        }
    }

    /// Equality on the digits both operands carry.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        match (&self.kind, &other.kind) {
            (Kind::Zero, Kind::Zero) => true,
            (
                Kind::Nonzero {
                    valuation: va,
                    unit: ua,
                    ..
                },
                Kind::Nonzero {
                    valuation: vb,
                    unit: ub,
                    ..
                },
            ) => {
                let m = self.prime.pow(min(self.precision, other.precision));
                va == vb && ua % &m == ub % &m
            }
            _ => false,
        }
    }

    /// The exact integer value, when the number is exact and integral.
    pub fn to_exact_integer(&self) -> Option<BigInt> {
        match &self.kind {
            Kind::Zero => Some(BigInt::zero()),
            Kind::Nonzero {
                valuation,
                exact: Some(e),
                ..
            } if *valuation >= 0 => {
                Some(e * num_traits::pow(BigInt::from(self.prime.0), *valuation as usize))
            }
            _ => None,
        }
    }

    /// Residue of an element of `Z_p` modulo `p^width`. Requires `v(self) >= 0`.
    pub fn integer_residue(&self, width: u32) -> Option<BigUint> {
        match self.valuation() {
            Valuation::Infinite => Some(BigUint::zero()),
            Valuation::Finite(v) if v >= 0 => Some(self.shifted_residue(v, width)),
            _ => None,
        }
    }
}

impl std::ops::Neg for &PadicNumber {
    type Output = PadicNumber;

    fn neg(self) -> PadicNumber {
        let kind = match &self.kind {
            Kind::Zero => Kind::Zero,
            Kind::Nonzero {
                valuation,
                unit,
                exact,
            } => Kind::Nonzero {
                valuation: *valuation,
                unit: self.prime.pow(self.precision) - unit,
                exact: exact.as_ref().map(|e| -e),
            },
        };
        PadicNumber {
            prime: self.prime,
            precision: self.precision,
            kind,
        }
    }
}

impl std::ops::Neg for PadicNumber {
    type Output = PadicNumber;

    fn neg(self) -> PadicNumber {
        -&self
    }
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.prime == other.prime
            && self.precision == other.precision
            && self.valuation() == other.valuation()
            && self.unit_residue() == other.unit_residue()
    }
}

impl Eq for PadicNumber {}

impl PartialOrd for PadicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by valuation, then by digits. Used for deterministic output only.
impl Ord for PadicNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prime
            .cmp(&other.prime)
            .then(self.valuation().cmp(&other.valuation()))
            .then_with(|| self.digits().cmp(&other.digits()))
            .then(self.precision.cmp(&other.precision))
    }
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Valuation::Finite(v) = self.valuation() else {
            return write!(f, "0");
        };
        let p = self.prime.0;
        write!(f, "{p}^{v} * (")?;
        for (i, d) in self.digits().iter().enumerate() {
            match i {
                0 => write!(f, "{d}")?,
                1 => write!(f, " + {d}*{p}")?,
                _ => write!(f, " + {d}*{p}^{i}")?,
            }
        }
        write!(f, ") + O({p}^{})", v + self.precision as i64)
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for PadicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PadicNumber", 2)?;
        s.serialize_field("valuation", &self.valuation())?;
        s.serialize_field("digits", &self.digits())?;
        s.end()
    }
}

/// A p-adic quantity that may have cancelled below working precision.
///
/// Sums and differences whose digits vanish become `Negligible`, recording
/// only that the true value is divisible by `p^absolute`. Asking for the value
/// of a negligible quantity fails with [`Error::PrecisionExhausted`].
#[derive(Clone, Debug)]
pub enum Approx {
    Value(PadicNumber),
    Negligible {
        prime: Prime,
        precision: u32,
        absolute: i64,
    },
}

impl From<PadicNumber> for Approx {
    fn from(x: PadicNumber) -> Self {
        Approx::Value(x)
    }
}

impl Approx {
    fn lift(result: Result<PadicNumber>, prime: Prime, precision: u32) -> Result<Approx> {
        match result {
            Ok(x) => Ok(Approx::Value(x)),
            Err(Error::PrecisionExhausted { absolute }) => Ok(Approx::Negligible {
                prime,
                precision,
                absolute,
            }),
            Err(e) => Err(e),
        }
    }

    pub fn prime(&self) -> Prime {
        match self {
            Approx::Value(x) => x.prime(),
            Approx::Negligible { prime, .. } => *prime,
        }
    }

    pub fn precision(&self) -> u32 {
        match self {
            Approx::Value(x) => x.precision(),
            Approx::Negligible { precision, .. } => *precision,
        }
    }

    /// Exact valuation of a resolved value, or the guaranteed lower bound.
    pub fn valuation_bound(&self) -> Valuation {
        match self {
            Approx::Value(x) => x.valuation(),
            Approx::Negligible { absolute, .. } => Valuation::Finite(*absolute),
        }
    }

    pub fn value(&self) -> Result<&PadicNumber> {
        match self {
            Approx::Value(x) => Ok(x),
            Approx::Negligible { absolute, .. } => Err(Error::PrecisionExhausted {
                absolute: *absolute,
            }),
        }
    }

    pub fn into_value(self) -> Result<PadicNumber> {
        match self {
            Approx::Value(x) => Ok(x),
            Approx::Negligible { absolute, .. } => Err(Error::PrecisionExhausted { absolute }),
        }
    }

    fn check_prime(&self, other: &Approx) -> Result<()> {
        if self.prime() != other.prime() {
            return Err(Error::PrimeMismatch {
                left: self.prime().value(),
                right: other.prime().value(),
            });
        }
        Ok(())
    }

    /// `x` restricted to what is known modulo `p^absolute`.
    fn value_plus_negligible(x: &PadicNumber, absolute: i64, precision: u32) -> Approx {
        let precision = min(precision, x.precision());
        match x.valuation() {
            Valuation::Finite(v) if v < absolute => {
                let keep = min(precision as i64, absolute - v) as u32;
                let keep = match x.absolute_precision() {
                    Some(a) => min(keep, (a - v) as u32),
                    None => keep,
                };
                let mut y = x.with_precision(keep);
                if let Kind::Nonzero { exact, .. } = &mut y.kind {
                    *exact = None;
                }
                Approx::Value(y)
            }
            _ => Approx::Negligible {
                prime: x.prime(),
                precision,
                absolute: min(absolute, x.absolute_precision().unwrap_or(absolute)),
            },
        }
    }

    pub fn add(&self, other: &Approx) -> Result<Approx> {
        self.check_prime(other)?;
        let precision = min(self.precision(), other.precision());
        Ok(match (self, other) {
            (Approx::Value(a), Approx::Value(b)) => {
                return Approx::lift(a.checked_add(b), a.prime(), precision)
            }
            (Approx::Value(x), Approx::Negligible { absolute, .. })
            | (Approx::Negligible { absolute, .. }, Approx::Value(x)) => {
                Self::value_plus_negligible(x, *absolute, precision)
            }
            (Approx::Negligible { absolute: a, .. }, Approx::Negligible { absolute: b, .. }) => {
                Approx::Negligible {
                    prime: self.prime(),
                    precision,
                    absolute: min(*a, *b),
                }
            }
        })
    }

    pub fn neg(&self) -> Approx {
        match self {
            Approx::Value(x) => Approx::Value(-x),
            n => n.clone(),
        }
    }

    pub fn sub(&self, other: &Approx) -> Result<Approx> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Approx) -> Result<Approx> {
        self.check_prime(other)?;
        let precision = min(self.precision(), other.precision());
        Ok(match (self, other) {
            (Approx::Value(a), Approx::Value(b)) => Approx::Value(a.checked_mul(b)?),
            (Approx::Value(x), Approx::Negligible { absolute, .. })
            | (Approx::Negligible { absolute, .. }, Approx::Value(x)) => match x.valuation() {
                Valuation::Infinite => Approx::Value(PadicNumber::zero(x.prime(), precision)),
                Valuation::Finite(v) => Approx::Negligible {
                    prime: x.prime(),
                    precision,
                    absolute: absolute + v,
                },
            },
            (Approx::Negligible { absolute: a, .. }, Approx::Negligible { absolute: b, .. }) => {
                Approx::Negligible {
                    prime: self.prime(),
                    precision,
                    absolute: a + b,
                }
            }
        })
    }

    pub fn div(&self, divisor: &PadicNumber) -> Result<Approx> {
        match self {
            Approx::Value(x) => Ok(Approx::Value(x.checked_div(divisor)?)),
            Approx::Negligible {
                prime,
                precision,
                absolute,
            } => match divisor.valuation() {
                Valuation::Infinite => Err(Error::DivisionByZero),
                Valuation::Finite(v) => Ok(Approx::Negligible {
                    prime: *prime,
                    precision: min(*precision, divisor.precision()),
                    absolute: absolute - v,
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(n: i64, d: i64, prime: u64, prec: u32) -> PadicNumber {
        PadicNumber::from_rational(n, d, p(prime), prec).unwrap()
    }

    #[test]
    fn prime_checks() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(97).is_ok());
        assert_eq!(Prime::new(4), Err(Error::NotPrime(4)));
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(Prime::new(0), Err(Error::NotPrime(0)));
        assert_eq!(p(2).exp_domain_valuation(), 2);
        assert_eq!(p(5).exp_domain_valuation(), 1);
    }

    #[test]
    fn valuation_order_puts_infinity_last() {
        assert!(Valuation::Finite(1_000_000) < Valuation::Infinite);
        assert!(Valuation::Finite(-3) < Valuation::Finite(2));
        assert!(Valuation::Infinite.at_least(i64::MAX));
    }

    #[test]
    fn from_rational_examples() {
        let x = q(8, 3, 2, 10);
        assert_eq!(x.valuation(), Valuation::Finite(3));
        assert_eq!(x.norm(), 0.125);

        let zero = q(0, 1, 5, 10);
        assert!(zero.is_zero());
        assert_eq!(zero.valuation(), Valuation::Infinite);
        assert_eq!(zero.norm(), 0.0);

        let minus_one = q(-1, 1, 3, 4);
        assert_eq!(minus_one.valuation(), Valuation::Finite(0));
        assert_eq!(minus_one.digits(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn minus_one_digits_satisfy_modular_identity() {
        // 1 + (2 + 2*3 + 2*9 + 2*27) = 81 = 0 mod 3^4
        let digits = q(-1, 1, 3, 4).digits();
        let value: u64 = digits.iter().rev().fold(0, |acc, &d| acc * 3 + d as u64);
        assert_eq!((1 + value) % 81, 0);
    }

    #[test]
    fn from_rational_rejects_zero_denominator() {
        assert_eq!(
            PadicNumber::from_rational(1, 0, p(3), 5).unwrap_err(),
            Error::DivisionByZero
        );
    }

    #[test]
    fn add_examples() {
        let one = q(1, 1, 3, 10);
        let minus_one = q(-1, 1, 3, 10);
        assert!(one.checked_add(&minus_one).unwrap().is_zero());

        let s = q(3, 1, 3, 10).checked_add(&q(9, 1, 3, 10)).unwrap();
        assert_eq!(s.valuation(), Valuation::Finite(1));
    }

    #[test]
    fn inexact_cancellation_is_an_error() {
        let half = q(1, 2, 3, 8);
        let err = half.checked_sub(&half).unwrap_err();
        assert_eq!(err, Error::PrecisionExhausted { absolute: 8 });
        assert_eq!(
            half.difference_valuation(&half).unwrap(),
            Valuation::Finite(8)
        );
    }

    #[test]
    fn partial_cancellation_loses_digits() {
        // 1/2 and 1/2 + 9 agree on two digits, the difference is 9 known to 6 digits.
        let a = q(1, 2, 3, 8);
        let b = q(19, 2, 3, 8);
        let d = b.checked_sub(&a).unwrap();
        assert_eq!(d.valuation(), Valuation::Finite(2));
        assert_eq!(d.precision(), 6);
        assert!(d.agrees_with(&q(9, 1, 3, 8)));
    }

    #[test]
    fn mul_div_inverse_examples() {
        let prod = q(3, 1, 3, 10).checked_mul(&q(1, 3, 3, 10)).unwrap();
        assert_eq!(prod.valuation(), Valuation::Finite(0));
        assert!(prod.agrees_with(&q(1, 1, 3, 10)));

        let half = PadicNumber::from_integer(2, p(3), 5).inverse().unwrap();
        assert_eq!(half.digits(), vec![2, 1, 1, 1, 1]);
        let value: u64 = half
            .digits()
            .iter()
            .rev()
            .fold(0, |acc, &d| acc * 3 + d as u64);
        assert_eq!((2 * value) % 243, 1);

        assert_eq!(q(0, 1, 3, 10).inverse().unwrap_err(), Error::DivisionByZero);
        assert_eq!(
            q(1, 1, 3, 10).checked_div(&q(0, 1, 3, 10)).unwrap_err(),
            Error::DivisionByZero
        );
    }

    #[test]
    fn norm_valuation_examples() {
        assert_eq!(q(3, 1, 3, 8).valuation(), Valuation::Finite(1));
        assert_eq!(q(1, 9, 3, 8).valuation(), Valuation::Finite(-2));
        assert_eq!(q(6, 1, 3, 8).valuation(), Valuation::Finite(1));
    }

    #[test]
    fn prime_mismatch_is_reported() {
        let err = q(1, 1, 3, 4).checked_add(&q(1, 1, 5, 4)).unwrap_err();
        assert_eq!(err, Error::PrimeMismatch { left: 3, right: 5 });
    }

    #[test]
    fn debug_rendering() {
        assert_eq!(
            format!("{:?}", q(-1, 1, 3, 4)),
            "3^0 * (2 + 2*3 + 2*3^2 + 2*3^3) + O(3^4)"
        );
        assert_eq!(format!("{:?}", q(1, 3, 3, 2)), "3^-1 * (1 + 0*3) + O(3^1)");
        assert_eq!(format!("{:?}", q(0, 1, 3, 2)), "0");
    }

    #[test]
    fn precision_never_grows() {
        let a = q(1, 2, 5, 12);
        let b = q(1, 7, 5, 20);
        assert_eq!(a.checked_add(&b).unwrap().precision(), 12);
        assert_eq!(a.checked_mul(&b).unwrap().precision(), 12);
        assert_eq!(a.checked_div(&b).unwrap().precision(), 12);
    }

    #[test]
    fn from_digits_round_trip() {
        let x = q(5, 7, 5, 6);
        let y = PadicNumber::from_digits(p(5), 1, &x.digits()).unwrap();
        assert_eq!(x, y);
        assert!(PadicNumber::from_digits(p(5), 0, &[0, 1]).is_err());
        assert!(PadicNumber::from_digits(p(5), 0, &[5]).is_err());
    }

    #[test]
    fn approx_absorbs_cancellation() {
        let half = Approx::from(q(1, 2, 3, 8));
        let d = half.sub(&half).unwrap();
        assert_eq!(d.valuation_bound(), Valuation::Finite(8));
        let y = d.add(&Approx::from(q(3, 1, 3, 8))).unwrap();
        assert_eq!(y.valuation_bound(), Valuation::Finite(1));
        assert_eq!(y.value().unwrap().precision(), 7);
        let z = d.mul(&Approx::from(q(9, 1, 3, 8))).unwrap();
        assert_eq!(z.valuation_bound(), Valuation::Finite(10));
        assert!(d.value().is_err());
    }
}
