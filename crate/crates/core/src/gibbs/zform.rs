//! The boundary recursion in multiplicative coordinates.
//!
//! For a spin vector `z = (z_1, .., z_(q-1))` at a successor `y` (with the
//! implicit `z_q = 1`) and `θ = exp_p(J_xy)`, one edge contributes the factor
//! `((θ - 1) z_i + Σ_j z_j + 1) / (Σ_j z_j + θ)` to `z_(i,x)`.
//!
//! Everything is stored as deviations `d_i = z_i - 1`. With `e = θ - 1` the
//! factor becomes `1 + e d_i / (Σ_j d_j + e + q)`, which keeps every digit
//! of `d_i` even after many contracting steps have pushed `z_i` toward 1.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::analytic::{exp_p_minus_one, log_one_plus};
use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation};
use crate::potts::{rational_to_padic, rational_valuation, CouplingField, PadicVector};
use crate::tree::{TreeShape, TreeVertex};

/// `θ = exp_p(J)`, kept as `e = θ - 1` at full relative precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaValue {
    minus_one: PadicNumber,
}

impl ThetaValue {
    pub fn from_coupling(j: &BigRational, prime: Prime, precision: u32) -> Result<Self> {
        let v = rational_valuation(j, prime);
        if !v.at_least(prime.exp_domain_valuation()) {
            return Err(Error::InadmissibleCoupling(format!(
                "J = {j} has v_{prime}(J) = {v}, need at least {}",
                prime.exp_domain_valuation()
            )));
        }
        Self::from_padic_coupling(&rational_to_padic(j, prime, precision))
    }

    pub fn from_padic_coupling(j: &PadicNumber) -> Result<Self> {
        Ok(ThetaValue {
            minus_one: exp_p_minus_one(j)?,
        })
    }

    /// `θ = 1`, from `J = 0`.
    pub fn one(prime: Prime, precision: u32) -> Self {
        ThetaValue {
            minus_one: PadicNumber::zero(prime, precision),
        }
    }

    pub fn prime(&self) -> Prime {
        self.minus_one.prime()
    }

    pub fn precision(&self) -> u32 {
        self.minus_one.precision()
    }

    /// `θ - 1`.
    pub fn minus_one(&self) -> &PadicNumber {
        &self.minus_one
    }

    pub fn theta(&self) -> Result<PadicNumber> {
        PadicNumber::one(self.prime(), self.precision()).checked_add(&self.minus_one)
    }

    pub fn is_one(&self) -> bool {
        self.minus_one.is_zero()
    }
}

/// A point `z` with every `z_i ≡ 1 (mod p)`, stored as `z_i - 1`.
#[derive(Clone, Debug)]
pub struct ZVector {
    deviations: Vec<Approx>,
}

impl ZVector {
    fn validate(deviations: Vec<Approx>) -> Result<Self> {
        let Some(first) = deviations.first() else {
            return Err(Error::InvalidInput(
                "z-vector needs q - 1 >= 1 components".into(),
            ));
        };
        let prime = first.prime();
        for (i, d) in deviations.iter().enumerate() {
            if d.prime() != prime {
                return Err(Error::PrimeMismatch {
                    left: prime.value(),
                    right: d.prime().value(),
                });
            }
            if !d.valuation_bound().at_least(1) {
                return Err(Error::DomainViolation {
                    function: "ZVector",
                    detail: format!(
                        "component {} has v(z - 1) = {}, need at least 1",
                        i + 1,
                        d.valuation_bound()
                    ),
                });
            }
        }
        Ok(ZVector { deviations })
    }

    /// The fixed point `z = (1, .., 1)`.
    pub fn ones(len: usize, prime: Prime, precision: u32) -> Self {
        ZVector {
            deviations: vec![Approx::from(PadicNumber::zero(prime, precision)); len],
        }
    }

    pub fn from_values(values: &[PadicNumber]) -> Result<Self> {
        let deviations = values
            .iter()
            .map(|z| {
                let one = PadicNumber::one(z.prime(), z.precision());
                Approx::from(z.clone()).sub(&Approx::from(one))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::validate(deviations)
    }

    pub fn from_deviations(deviations: Vec<Approx>) -> Result<Self> {
        Self::validate(deviations)
    }

    /// `(z_1, 1, .., 1)` with `len` components.
    pub fn first_component(z: &PadicNumber, len: usize) -> Result<Self> {
        let mut values = vec![PadicNumber::one(z.prime(), z.precision()); len];
        values[0] = z.clone();
        Self::from_values(&values)
    }

    /// `z_i = exp_p(-h'_i)`.
    pub fn from_hprime(hprime: &PadicVector) -> Result<Self> {
        let deviations = hprime
            .components()
            .iter()
            .map(|h| exp_p_minus_one(&-h).map(Approx::from))
            .collect::<Result<Vec<_>>>()?;
        Self::validate(deviations)
    }

    /// `h'_i = -log_p(z_i)`. Needs `v(z_i - 1)` inside the exponential disk so
    /// that the result is an admissible field.
    pub fn to_hprime(&self) -> Result<PadicVector> {
        let prime = self.prime();
        let bound = prime.exp_domain_valuation();
        let mut out = Vec::with_capacity(self.len());
        for (i, d) in self.deviations.iter().enumerate() {
            if !d.valuation_bound().at_least(bound) {
                return Err(Error::DomainViolation {
                    function: "log_p",
                    detail: format!(
                        "component {} has v(z - 1) = {}, need at least {bound} to recover h'",
                        i + 1,
                        d.valuation_bound()
                    ),
                });
            }
            // A negligible deviation gives h' = 0 to the digits it is known to.
            out.push(match d {
                Approx::Value(y) => -log_one_plus(y)?,
                Approx::Negligible {
                    prime, precision, ..
                } => PadicNumber::zero(*prime, *precision),
            });
        }
        let precision = out
            .iter()
            .map(PadicNumber::precision)
            .min()
            .expect("nonempty");
        PadicVector::new(out.iter().map(|h| h.with_precision(precision)).collect())
    }

    pub fn prime(&self) -> Prime {
        self.deviations[0].prime()
    }

    pub fn precision(&self) -> u32 {
        self.deviations
            .iter()
            .map(Approx::precision)
            .min()
            .expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    pub fn deviations(&self) -> &[Approx] {
        &self.deviations
    }

    /// `z_i` themselves. A negligible deviation yields `1` carried to the
    /// digits that are actually known.
    pub fn values(&self) -> Vec<PadicNumber> {
        self.deviations
            .iter()
            .map(|d| {
                let one = Approx::from(PadicNumber::one(d.prime(), d.precision()));
                one.add(d)
                    .and_then(Approx::into_value)
                    .expect("1 + d with v(d) >= 1 is a unit")
            })
            .collect()
    }

    /// `min_i v(z_i - 1)`, a lower bound when some deviation is negligible.
    pub fn min_valuation(&self) -> Valuation {
        self.deviations
            .iter()
            .map(Approx::valuation_bound)
            .min()
            .expect("nonempty")
    }

    pub fn max_valuation(&self) -> Valuation {
        self.deviations
            .iter()
            .map(Approx::valuation_bound)
            .max()
            .expect("nonempty")
    }

    /// `min_i v(z_i - w_i)`, a lower bound.
    pub fn distance_valuation(&self, other: &ZVector) -> Result<Valuation> {
        if self.len() != other.len() {
            return Err(Error::InvalidInput("z-vectors of different lengths".into()));
        }
        let mut worst = Valuation::Infinite;
        for (a, b) in self.deviations.iter().zip(&other.deviations) {
            worst = worst.min(a.sub(b)?.valuation_bound());
        }
        Ok(worst)
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        let deviations = self
            .deviations
            .iter()
            .map(|d| match d {
                Approx::Value(x) => Approx::Value(x.with_precision(precision.min(x.precision()))),
                Approx::Negligible {
                    prime, absolute, ..
                } => Approx::Negligible {
                    prime: *prime,
                    precision,
                    absolute: *absolute,
                },
            })
            .collect();
        ZVector { deviations }
    }
}

/// Serialized as the list of `z_i`, each `{"valuation", "digits"}`.
impl Serialize for ZVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(serializer)
    }
}

fn q_of(z: &ZVector) -> i64 {
    z.len() as i64 + 1
}

/// `Σ_j d_j + e + q`, the shifted denominator `Σ_j z_j + θ`.
fn denominator(z: &ZVector, theta: &ThetaValue) -> Result<PadicNumber> {
    let prime = z.prime();
    let precision = z.precision().min(theta.precision());
    let mut sum = Approx::from(PadicNumber::from_integer(q_of(z), prime, precision));
    sum = sum.add(&Approx::from(theta.minus_one().clone()))?;
    for d in &z.deviations {
        sum = sum.add(d)?;
    }
    match sum {
        Approx::Value(x) if !x.is_zero() => Ok(x),
        Approx::Value(_) => Err(Error::DenominatorDegenerate(
            "Σ z_j + θ is exactly zero".into(),
        )),
        Approx::Negligible { absolute, .. } => Err(Error::DenominatorDegenerate(format!(
            "Σ z_j + θ vanishes modulo p^{absolute}"
        ))),
    }
}

/// One edge's contribution `a = (a_1, .., a_(q-1))`, stored as `a_i - 1`.
///
/// Every `a_i` is a unit, but when `p | q` it need not lie in the disk
/// around 1: only the product over all successors has to.
#[derive(Clone, Debug)]
pub struct EdgeFactor {
    deviations: Vec<Approx>,
}

impl EdgeFactor {
    fn validate(deviations: Vec<Approx>) -> Result<Self> {
        for (i, d) in deviations.iter().enumerate() {
            let one = Approx::from(PadicNumber::one(d.prime(), d.precision()));
            let unit = d.valuation_bound().at_least(1)
                || one.add(d)?.valuation_bound() == Valuation::Finite(0);
            if !unit {
                return Err(Error::DomainViolation {
                    function: "edge factor",
                    detail: format!("component {} is not a p-adic unit", i + 1),
                });
            }
        }
        Ok(EdgeFactor { deviations })
    }

    pub fn deviations(&self) -> &[Approx] {
        &self.deviations
    }

    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    /// `min_i v(a_i - 1)`, a lower bound.
    pub fn min_valuation(&self) -> Valuation {
        self.deviations
            .iter()
            .map(Approx::valuation_bound)
            .min()
            .expect("nonempty")
    }

    /// `min_i v(a_i - b_i)`, a lower bound.
    pub fn distance_valuation(&self, other: &EdgeFactor) -> Result<Valuation> {
        let mut worst = Valuation::Infinite;
        for (a, b) in self.deviations.iter().zip(&other.deviations) {
            worst = worst.min(a.sub(b)?.valuation_bound());
        }
        Ok(worst)
    }

    /// The factor as a point of the disk, when it is one.
    pub fn into_zvector(self) -> Result<ZVector> {
        ZVector::validate(self.deviations)
    }
}

impl From<ZVector> for EdgeFactor {
    fn from(z: ZVector) -> Self {
        EdgeFactor {
            deviations: z.deviations,
        }
    }
}

/// The single-edge factor `a_i = 1 + (θ - 1)(z_i - 1) / (Σ_j z_j + θ)`.
///
/// When `|q|_p = 1` the result lies in the disk with `v(a_i - 1) >= v(z_i - 1) + 1`.
pub fn f_map_z(z: &ZVector, theta: &ThetaValue) -> Result<EdgeFactor> {
    if z.prime() != theta.prime() {
        return Err(Error::PrimeMismatch {
            left: z.prime().value(),
            right: theta.prime().value(),
        });
    }
    let den = denominator(z, theta)?;
    let e = Approx::from(theta.minus_one().clone());
    let deviations = z
        .deviations
        .iter()
        .map(|d| e.mul(d)?.div(&den))
        .collect::<Result<Vec<_>>>()?;
    EdgeFactor::validate(deviations)
}

/// [`f_map_z`] evaluated as written, on the values `z_i` and `θ`. Loses the
/// digits of `z_i - 1` beyond the relative precision of `z_i`.
pub fn f_map_z_direct(z: &ZVector, theta: &ThetaValue) -> Result<EdgeFactor> {
    let values = z.values();
    let th = theta.theta()?;
    let prime = z.prime();
    let precision = z.precision().min(theta.precision());
    let one = PadicNumber::one(prime, precision);
    let mut sum = PadicNumber::zero(prime, precision);
    for v in &values {
        sum = sum.checked_add(v)?;
    }
    let den = match sum.checked_add(&th) {
        Ok(d) if !d.is_zero() => d,
        Ok(_) | Err(Error::PrecisionExhausted { .. }) => {
            return Err(Error::DenominatorDegenerate("Σ z_j + θ".into()))
        }
        Err(e) => return Err(e),
    };
    let e = th.checked_sub(&one)?;
    let deviations = values
        .iter()
        .map(|v| {
            let a = e
                .checked_mul(v)?
                .checked_add(&sum)?
                .checked_add(&one)?
                .checked_div(&den)?;
            Approx::from(a).sub(&Approx::from(one.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    EdgeFactor::validate(deviations)
}

/// `z_x = Π_y a_y` over the factors of the direct successors.
pub fn vertex_step(factors: &[EdgeFactor]) -> Result<ZVector> {
    let Some(first) = factors.first() else {
        return Err(Error::InvalidInput(
            "a vertex needs at least one successor".into(),
        ));
    };
    let mut acc = first.deviations.clone();
    for f in &factors[1..] {
        if f.len() != acc.len() {
            return Err(Error::InvalidInput("factors of different lengths".into()));
        }
        for (a, b) in acc.iter_mut().zip(&f.deviations) {
            // (1 + a)(1 + b) - 1
            *a = a.add(b)?.add(&a.mul(b)?)?;
        }
    }
    ZVector::validate(acc)
}

/// One application of the recursion at a non-root vertex whose `k`
/// successors all carry `z` across edges with the same `θ`.
pub fn homogeneous_step(z: &ZVector, theta: &ThetaValue, k: u32) -> Result<ZVector> {
    let factor = f_map_z(z, theta)?;
    vertex_step(&vec![factor; k as usize])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelValuations {
    pub level: u32,
    /// Smallest `v(z_(i,x) - 1)` over the sphere.
    pub min_valuation: Valuation,
    pub max_valuation: Valuation,
}

#[derive(Clone, Debug)]
pub struct RecursionOutcome {
    pub root: ZVector,
    /// From `W_n` down to the root.
    pub levels: Vec<LevelValuations>,
}

/// Runs the recursion from the values on `W_n` down to the root. Vertices
/// of `W_n` missing from `boundary` carry `z = 1`.
pub fn recursion_backward(
    shape: &TreeShape,
    boundary: &BTreeMap<TreeVertex, ZVector>,
    coupling: &CouplingField,
    precision: u32,
) -> Result<RecursionOutcome> {
    let prime = coupling.prime();
    let len = coupling.q() as usize - 1;
    let n = shape.depth;
    coupling.covers(shape, n)?;

    let mut current: BTreeMap<TreeVertex, ZVector> = BTreeMap::new();
    for x in shape.sphere(n)? {
        let z = match boundary.get(&x) {
            Some(z) if z.len() != len => {
                return Err(Error::InvalidInput(format!(
                    "boundary at {x:?} has {} components, need q - 1 = {len}",
                    z.len()
                )))
            }
            Some(z) if z.prime() != prime => {
                return Err(Error::PrimeMismatch {
                    left: prime.value(),
                    right: z.prime().value(),
                })
            }
            Some(z) => z.clone(),
            None => ZVector::ones(len, prime, precision),
        };
        current.insert(x, z);
    }
    if let Some(x) = boundary.keys().find(|x| !current.contains_key(*x)) {
        return Err(Error::InvalidInput(format!(
            "boundary vertex {x:?} is not in W_{n}"
        )));
    }

    let mut thetas: BTreeMap<BigRational, ThetaValue> = BTreeMap::new();
    let mut levels = vec![summarize(n, &current)];
    for level in (0..n).rev() {
        let mut next = BTreeMap::new();
        for x in shape.sphere(level)? {
            let mut factors = Vec::new();
            for y in shape.direct_successors(&x) {
                let j = coupling.rational_coupling(&y)?;
                let theta = match thetas.get(j) {
                    Some(t) => t.clone(),
                    None => {
                        let t = ThetaValue::from_coupling(j, prime, precision)?;
                        thetas.insert(j.clone(), t.clone());
                        t
                    }
                };
                factors.push(f_map_z(&current[&y], &theta)?);
            }
            next.insert(x, vertex_step(&factors)?);
        }
        current = next;
        levels.push(summarize(level, &current));
    }
    let root = current
        .remove(&TreeVertex::root())
        .expect("level 0 holds the root");
    Ok(RecursionOutcome { root, levels })
}

fn summarize(level: u32, zs: &BTreeMap<TreeVertex, ZVector>) -> LevelValuations {
    LevelValuations {
        level,
        min_valuation: zs
            .values()
            .map(ZVector::min_valuation)
            .min()
            .expect("nonempty"),
        max_valuation: zs
            .values()
            .map(ZVector::max_valuation)
            .max()
            .expect("nonempty"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniquenessCertificate {
    pub applies: bool,
    pub reason: String,
}

/// Whether the contraction argument applies: it needs `|q|_p = 1`.
pub fn uniqueness_certificate(prime: Prime, q: u32) -> UniquenessCertificate {
    if prime.divides(q as i64) {
        UniquenessCertificate {
            applies: false,
            reason: format!(
                "{prime} divides q = {q}; the edge denominator can lose its unit norm and the \
                 recursion need not contract"
            ),
        }
    } else {
        UniquenessCertificate {
            applies: true,
            reason: format!(
                "|q|_{prime} = 1, so each edge factor satisfies |a - 1| <= |z - 1| / {prime} and \
                 the recursion is a contraction with a single fixed point"
            ),
        }
    }
}

/// `h'_i = Σ_(j ≠ i) h_j`. For `q = 2` the sum is empty and the result is zero.
pub fn h_to_hprime(h: &PadicVector) -> Result<PadicVector> {
    let prime = h.prime();
    let precision = h.precision();
    let comps = h.components();
    let out = (0..comps.len())
        .map(|i| {
            let mut sum = Approx::from(PadicNumber::zero(prime, precision));
            for (j, c) in comps.iter().enumerate() {
                if j != i {
                    sum = sum.add(&Approx::from(c.clone()))?;
                }
            }
            sum.into_value()
        })
        .collect::<Result<Vec<_>>>()?;
    PadicVector::new(out)
}

/// Inverse of [`h_to_hprime`]: `h_k = (Σ_(i ≠ k) h'_i - (q - 3) h'_k) / (q - 2)`.
/// When `p | q - 2` the division lowers valuations by `v_p(q - 2)`.
pub fn hprime_to_h(hprime: &PadicVector) -> Result<PadicVector> {
    let q = hprime.len() as i64 + 1;
    if q == 2 {
        return Err(Error::NotInvertible(
            "for q = 2 every field maps to h' = 0".into(),
        ));
    }
    let prime = hprime.prime();
    let precision = hprime.precision();
    let divisor = PadicNumber::from_integer(q - 2, prime, precision);
    let weight = Approx::from(PadicNumber::from_integer(-(q - 3), prime, precision));
    let comps = hprime.components();
    let out = (0..comps.len())
        .map(|k| {
            let mut sum = weight.mul(&Approx::from(comps[k].clone()))?;
            for (i, c) in comps.iter().enumerate() {
                if i != k {
                    sum = sum.add(&Approx::from(c.clone()))?;
                }
            }
            sum.div(&divisor)?.into_value()
        })
        .collect::<Result<Vec<_>>>()?;
    PadicVector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn num(n: i64, d: i64, prime: Prime, prec: u32) -> PadicNumber {
        PadicNumber::from_rational(n, d, prime, prec).unwrap()
    }

    fn vector(xs: &[(i64, i64)], prime: Prime, prec: u32) -> PadicVector {
        PadicVector::new(xs.iter().map(|&(n, d)| num(n, d, prime, prec)).collect()).unwrap()
    }

    #[test]
    fn ones_are_fixed() {
        let prime = p(3);
        let theta = ThetaValue::from_coupling(&r(3, 1), prime, 24).unwrap();
        let z = ZVector::ones(2, prime, 24);
        let out = f_map_z(&z, &theta).unwrap();
        assert!(out.min_valuation().is_infinite());
    }

    #[test]
    fn single_edge_contracts() {
        let prime = p(3);
        let theta = ThetaValue::from_coupling(&r(3, 1), prime, 24).unwrap();
        let z = ZVector::from_values(&[num(4, 1, prime, 24)]).unwrap();
        let out = f_map_z(&z, &theta).unwrap();
        assert!(out.min_valuation().at_least(2));
    }

    #[test]
    fn direct_arrangement_agrees() {
        let prime = p(5);
        let theta = ThetaValue::from_coupling(&r(10, 3), prime, 30).unwrap();
        let z = ZVector::from_values(&[num(6, 1, prime, 30), num(-4, 1, prime, 30)]).unwrap();
        let a = f_map_z(&z, &theta).unwrap();
        let b = f_map_z_direct(&z, &theta).unwrap();
        assert!(a.distance_valuation(&b).unwrap().at_least(28));
    }

    #[test]
    fn factor_may_leave_the_disk() {
        // p = q = 3, θ = 1 + 3: the factor at z = (1 + 3, 1) is ≡ -1 mod 3,
        // while the product of two such factors is back in the disk.
        let prime = p(3);
        let theta = ThetaValue {
            minus_one: num(3, 1, prime, 20),
        };
        let z = ZVector::first_component(&num(4, 1, prime, 20), 2).unwrap();
        let a = f_map_z(&z, &theta).unwrap();
        assert!(a.clone().into_zvector().is_err());
        assert!(vertex_step(&[a.clone(), a]).is_ok());
    }

    #[test]
    fn off_disk_values_are_rejected() {
        let prime = p(3);
        assert!(matches!(
            ZVector::from_values(&[num(2, 1, prime, 10)]),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn degenerate_denominator() {
        // q = 3, θ = 1, z = (1 - 3, 1): Σ d + e + q = -3 + 0 + 3 = 0.
        let prime = p(3);
        let z = ZVector::first_component(&num(-2, 1, prime, 20), 2).unwrap();
        assert!(matches!(
            f_map_z(&z, &ThetaValue::one(prime, 20)),
            Err(Error::DenominatorDegenerate(_))
        ));
    }

    #[test]
    fn product_of_factors() {
        let prime = p(3);
        let a = ZVector::from_values(&[num(4, 1, prime, 20)]).unwrap();
        let b = ZVector::from_values(&[num(10, 1, prime, 20)]).unwrap();
        let out = vertex_step(&[a.into(), b.into()]).unwrap();
        assert_eq!(out.values()[0], num(40, 1, prime, 20));
    }

    #[test]
    fn backward_recursion_keeps_ones() {
        let prime = p(3);
        let shape = TreeShape::new(2, 3).unwrap();
        let coupling = CouplingField::homogeneous(prime, 3, r(3, 1)).unwrap();
        let out = recursion_backward(&shape, &BTreeMap::new(), &coupling, 20).unwrap();
        assert_eq!(out.levels.len(), 4);
        assert!(out.root.min_valuation().is_infinite());
    }

    #[test]
    fn backward_recursion_contracts() {
        let prime = p(3);
        let shape = TreeShape::new(2, 3).unwrap();
        let coupling = CouplingField::homogeneous(prime, 2, r(3, 1)).unwrap();
        let boundary = shape
            .sphere(3)
            .unwrap()
            .into_iter()
            .map(|x| (x, ZVector::from_values(&[num(4, 1, prime, 30)]).unwrap()))
            .collect();
        let out = recursion_backward(&shape, &boundary, &coupling, 30).unwrap();
        let mins: Vec<_> = out.levels.iter().map(|l| l.min_valuation).collect();
        for w in mins.windows(2) {
            assert!(w[1] > w[0], "{mins:?}");
        }
    }

    #[test]
    fn uniqueness_needs_unit_q() {
        assert!(uniqueness_certificate(p(3), 2).applies);
        assert!(!uniqueness_certificate(p(3), 3).applies);
        assert!(!uniqueness_certificate(p(2), 4).applies);
    }

    #[test]
    fn hprime_examples() {
        let prime = p(3);
        let h = vector(&[(3, 1), (9, 2)], prime, 20);
        let hp = h_to_hprime(&h).unwrap();
        assert_eq!(
            hp.components(),
            &[num(9, 2, prime, 20), num(3, 1, prime, 20)]
        );
        let h = vector(&[(3, 1), (6, 1), (9, 1)], prime, 20);
        let hp = h_to_hprime(&h).unwrap();
        assert_eq!(
            hp.components(),
            &[
                num(15, 1, prime, 20),
                num(12, 1, prime, 20),
                num(9, 1, prime, 20)
            ]
        );
        assert_eq!(hprime_to_h(&hp).unwrap(), h);
    }

    #[test]
    fn zero_hprime_gives_zero_field() {
        let prime = p(5);
        let zero = PadicVector::zero(3, prime, 16);
        assert_eq!(hprime_to_h(&zero).unwrap(), zero);
        assert!(matches!(
            hprime_to_h(&PadicVector::zero(1, prime, 16)),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn hprime_and_z_round_trip() {
        let prime = p(3);
        let hp = vector(&[(3, 1), (-9, 4)], prime, 24);
        let z = ZVector::from_hprime(&hp).unwrap();
        let back = z.to_hprime().unwrap();
        for (a, b) in back.components().iter().zip(hp.components()) {
            let v = a.difference_valuation(b).unwrap();
            assert!(v.at_least(24), "{v} {a} {b}");
        }
    }
}
