//! The inhomogeneous Potts model with `Q_p` couplings on `Γ^k`.
//!
//! Spins are labels `1..=q`. The embedding of labels as vectors in
//! `Q_p^(q-1)` only enters through [`spin_pairing`], so it is never built.

mod io;
mod measure;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub use io::{parse_boundary_field, parse_coupling_field, parse_rational};
pub use measure::{
    compatibility_check, finite_measure, measure_norm_profile, partition_function,
    CompatibilityReport, NormProfileLevel, Tolerance, ENUMERATION_LIMIT,
};

use crate::analytic::{exp_p, ConvergenceDisk};
use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation};
use crate::tree::{Parity, TreeShape, TreeVertex};

/// A spin value in `1..=q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLabel(u32);

impl SpinLabel {
    pub fn new(value: u32, q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("q = {q}, need q >= 2")));
        }
        if value == 0 || value > q {
            return Err(Error::InvalidInput(format!("spin {value} outside 1..={q}")));
        }
        Ok(SpinLabel(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// An element of `Q_p^(q-1)`; all components share prime and precision.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicVector {
    components: Vec<PadicNumber>,
}

impl PadicVector {
    pub fn new(components: Vec<PadicNumber>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidInput(
                "vector needs at least one component".into(),
            ));
        };
        let (prime, precision) = (first.prime(), first.precision());
        for c in &components {
            if c.prime() != prime {
                return Err(Error::PrimeMismatch {
                    left: prime.value(),
                    right: c.prime().value(),
                });
            }
            if c.precision() != precision {
                return Err(Error::InvalidInput(
                    "vector components must share one precision".into(),
                ));
            }
        }
        Ok(PadicVector { components })
    }

    pub fn zero(len: usize, prime: Prime, precision: u32) -> Self {
        PadicVector {
            components: vec![PadicNumber::zero(prime, precision); len],
        }
    }

    pub fn components(&self) -> &[PadicNumber] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn prime(&self) -> Prime {
        self.components[0].prime()
    }

    pub fn precision(&self) -> u32 {
        self.components[0].precision()
    }

    /// Valuation of the sup-norm, i.e. the smallest component valuation.
    pub fn sup_valuation(&self) -> Valuation {
        self.components
            .iter()
            .map(PadicNumber::valuation)
            .min()
            .expect("nonempty")
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        PadicVector {
            components: self
                .components
                .iter()
                .map(|c| c.with_precision(precision))
                .collect(),
        }
    }
}

/// `h σ_s`: `h_s` for `s < q`, and `h_1 + ... + h_(q-1)` for `s = q`.
pub fn spin_pairing(h: &PadicVector, s: SpinLabel) -> Result<PadicNumber> {
    let q = h.len() as u32 + 1;
    if s.0 > q {
        return Err(Error::InvalidInput(format!("spin {} outside 1..={q}", s.0)));
    }
    if s.0 < q {
        return Ok(h.components[s.0 as usize - 1].clone());
    }
    let mut sum = Approx::from(PadicNumber::zero(h.prime(), h.precision()));
    for c in &h.components {
        sum = sum.add(&Approx::from(c.clone()))?;
    }
    sum.into_value()
}

/// `v_p` of a nonzero rational.
pub(crate) fn rational_valuation(x: &BigRational, prime: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let v = |n: &BigInt| {
        PadicNumber::from_bigint(n, prime, 1)
            .valuation()
            .finite()
            .expect("nonzero")
    };
    Valuation::Finite(v(x.numer()) - v(x.denom()))
}

pub(crate) fn rational_to_padic(x: &BigRational, prime: Prime, precision: u32) -> PadicNumber {
    PadicNumber::from_rational(x.numer().clone(), x.denom().clone(), prime, precision)
        .expect("denominator of a rational is nonzero")
}

/// How couplings are spread over the edges.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingPattern {
    Homogeneous(BigRational),
    /// Keyed by the parity of the edge's endpoint nearer the root.
    BipartiteByParity {
        even_to_odd: BigRational,
        odd_to_even: BigRational,
    },
    /// Keyed by the endpoint farther from the root.
    PerEdge(BTreeMap<TreeVertex, BigRational>),
}

/// Rational couplings `J_xy` with `|J_xy|_p < p^(-1/(p-1))` on every edge.
///
/// Couplings are kept as rationals so that `θ = exp_p(J)` can be produced at
/// any working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingField {
    prime: Prime,
    q: u32,
    pattern: CouplingPattern,
}

impl CouplingField {
    pub fn new(prime: Prime, q: u32, pattern: CouplingPattern) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("q = {q}, need q >= 2")));
        }
        let check = |j: &BigRational, place: String| -> Result<()> {
            let v = rational_valuation(j, prime);
            if v.at_least(prime.exp_domain_valuation()) {
                Ok(())
            } else {
                Err(Error::InadmissibleCoupling(format!(
                    "J = {j} at {place} has v_{prime}(J) = {v}, need at least {}",
                    prime.exp_domain_valuation()
                )))
            }
        };
        match &pattern {
            CouplingPattern::Homogeneous(j) => check(j, "every edge".into())?,
            CouplingPattern::BipartiteByParity {
                even_to_odd,
                odd_to_even,
            } => {
                check(even_to_odd, "even-to-odd edges".into())?;
                check(odd_to_even, "odd-to-even edges".into())?;
            }
            CouplingPattern::PerEdge(map) => {
                for (y, j) in map {
                    if y.is_root() {
                        return Err(Error::InvalidInput(
                            "per-edge couplings are keyed by the child vertex; the root has no parent edge"
                                .into(),
                        ));
                    }
                    check(j, format!("edge into {y:?}"))?;
                }
            }
        }
        Ok(CouplingField { prime, q, pattern })
    }

    pub fn homogeneous(prime: Prime, q: u32, j: BigRational) -> Result<Self> {
        Self::new(prime, q, CouplingPattern::Homogeneous(j))
    }

    pub fn bipartite(
        prime: Prime,
        q: u32,
        even_to_odd: BigRational,
        odd_to_even: BigRational,
    ) -> Result<Self> {
        Self::new(
            prime,
            q,
            CouplingPattern::BipartiteByParity {
                even_to_odd,
                odd_to_even,
            },
        )
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn pattern(&self) -> &CouplingPattern {
        &self.pattern
    }

    /// `J_xy` for the edge from `child`'s parent to `child`.
    pub fn rational_coupling(&self, child: &TreeVertex) -> Result<&BigRational> {
        let parent = child
            .parent()
            .ok_or_else(|| Error::InvalidInput("the root has no parent edge".into()))?;
        match &self.pattern {
            CouplingPattern::Homogeneous(j) => Ok(j),
            CouplingPattern::BipartiteByParity {
                even_to_odd,
                odd_to_even,
            } => Ok(match parent.parity() {
                Parity::Even => even_to_odd,
                Parity::Odd => odd_to_even,
            }),
            CouplingPattern::PerEdge(map) => map
                .get(child)
                .ok_or_else(|| Error::MissingCoupling(child.to_string())),
        }
    }

    pub fn coupling(&self, child: &TreeVertex, precision: u32) -> Result<PadicNumber> {
        Ok(rational_to_padic(
            self.rational_coupling(child)?,
            self.prime,
            precision,
        ))
    }

    /// `θ_xy = exp_p(J_xy)` for the edge into `child`.
    pub fn theta(&self, child: &TreeVertex, precision: u32) -> Result<PadicNumber> {
        exp_p(&self.coupling(child, precision)?)
    }

    /// Every edge of `L_n` has a coupling.
    pub fn covers(&self, shape: &TreeShape, n: u32) -> Result<()> {
        for (_, y) in shape.edges(n)? {
            self.rational_coupling(&y)?;
        }
        Ok(())
    }
}

/// How the boundary field `h_x` is assigned.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldPattern {
    Zero,
    Constant(PadicVector),
    ByParity {
        even: PadicVector,
        odd: PadicVector,
    },
    /// Vertices absent from the map carry the zero field.
    PerVertex(BTreeMap<TreeVertex, PadicVector>),
}

/// `h : V -> Q_p^(q-1)` with every component inside the `exp_p` disk.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    prime: Prime,
    q: u32,
    precision: u32,
    pattern: FieldPattern,
}

impl BoundaryField {
    pub fn new(prime: Prime, q: u32, precision: u32, pattern: FieldPattern) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("q = {q}, need q >= 2")));
        }
        let disk = ConvergenceDisk::exp(prime);
        let check = |h: &PadicVector, place: String| -> Result<()> {
            if h.len() != q as usize - 1 {
                return Err(Error::InadmissibleField(format!(
                    "{place}: {} components, need q - 1 = {}",
                    h.len(),
                    q - 1
                )));
            }
            if h.prime() != prime {
                return Err(Error::PrimeMismatch {
                    left: prime.value(),
                    right: h.prime().value(),
                });
            }
            if let Some(c) = h.components().iter().find(|c| !disk.contains(c)) {
                return Err(Error::InadmissibleField(format!(
                    "{place}: component of valuation {} lies outside the exp_p disk",
                    c.valuation()
                )));
            }
            Ok(())
        };
        match &pattern {
            FieldPattern::Zero => {}
            FieldPattern::Constant(h) => check(h, "constant field".into())?,
            FieldPattern::ByParity { even, odd } => {
                check(even, "even vertices".into())?;
                check(odd, "odd vertices".into())?;
            }
            FieldPattern::PerVertex(map) => {
                for (x, h) in map {
                    check(h, format!("vertex {x:?}"))?;
                }
            }
        }
        Ok(BoundaryField {
            prime,
            q,
            precision,
            pattern,
        })
    }

    pub fn zero(prime: Prime, q: u32, precision: u32) -> Self {
        BoundaryField {
            prime,
            q,
            precision,
            pattern: FieldPattern::Zero,
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn pattern(&self) -> &FieldPattern {
        &self.pattern
    }

    /// `h_x`, at the field's precision.
    pub fn at(&self, x: &TreeVertex) -> PadicVector {
        let zero = || PadicVector::zero(self.q as usize - 1, self.prime, self.precision);
        match &self.pattern {
            FieldPattern::Zero => zero(),
            FieldPattern::Constant(h) => h.clone(),
            FieldPattern::ByParity { even, odd } => match x.parity() {
                Parity::Even => even.clone(),
                Parity::Odd => odd.clone(),
            },
            FieldPattern::PerVertex(map) => map.get(x).cloned().unwrap_or_else(zero),
        }
    }

    /// The same field carried to `precision` digits.
    pub fn with_precision(&self, precision: u32) -> Self {
        let lift = |h: &PadicVector| h.with_precision(precision);
        let pattern = match &self.pattern {
            FieldPattern::Zero => FieldPattern::Zero,
            FieldPattern::Constant(h) => FieldPattern::Constant(lift(h)),
            FieldPattern::ByParity { even, odd } => FieldPattern::ByParity {
                even: lift(even),
                odd: lift(odd),
            },
            FieldPattern::PerVertex(map) => {
                FieldPattern::PerVertex(map.iter().map(|(x, h)| (x.clone(), lift(h))).collect())
            }
        };
        BoundaryField {
            prime: self.prime,
            q: self.q,
            precision,
            pattern,
        }
    }
}

/// A spin assignment on `V_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    spins: BTreeMap<TreeVertex, SpinLabel>,
}

impl Configuration {
    pub fn new(spins: BTreeMap<TreeVertex, SpinLabel>) -> Self {
        Configuration { spins }
    }

    /// Spins listed in the order of [`TreeShape::ball`].
    pub fn from_ball(shape: &TreeShape, n: u32, labels: &[u32], q: u32) -> Result<Self> {
        let ball = shape.ball(n)?;
        if ball.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} spins given for {} vertices",
                labels.len(),
                ball.len()
            )));
        }
        let spins = ball
            .into_iter()
            .zip(labels)
            .map(|(x, &s)| Ok((x, SpinLabel::new(s, q)?)))
            .collect::<Result<_>>()?;
        Ok(Configuration { spins })
    }

    pub fn spin(&self, x: &TreeVertex) -> Option<SpinLabel> {
        self.spins.get(x).copied()
    }

    pub fn spins(&self) -> &BTreeMap<TreeVertex, SpinLabel> {
        &self.spins
    }

    fn require(&self, x: &TreeVertex) -> Result<SpinLabel> {
        self.spin(x)
            .ok_or_else(|| Error::InvalidInput(format!("configuration has no spin at {x:?}")))
    }
}

/// `H_n(σ) = -Σ_{<x,y> ∈ L_n} J_xy δ(σ(x), σ(y))`.
pub fn hamiltonian(
    cfg: &Configuration,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
    precision: u32,
) -> Result<PadicNumber> {
    let mut sum = BigRational::zero();
    for (x, y) in shape.edges(n)? {
        if cfg.require(&x)? == cfg.require(&y)? {
            sum -= coupling.rational_coupling(&y)?;
        }
    }
    Ok(rational_to_padic(&sum, coupling.prime(), precision))
}

/// The exponent `-H_n(σ) + Σ_{x ∈ W_n} h_x σ(x)` of the unnormalised weight.
pub fn weight_exponent(
    cfg: &Configuration,
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
) -> Result<Approx> {
    let precision = field.precision();
    let mut total = Approx::from(-hamiltonian(cfg, coupling, shape, n, precision)?);
    for x in shape.sphere(n)? {
        let s = cfg.require(&x)?;
        let pairing = spin_pairing(&field.at(&x), s);
        let term = match pairing {
            Ok(v) => Approx::from(v),
            Err(Error::PrecisionExhausted { absolute }) => Approx::Negligible {
                prime: field.prime(),
                precision,
                absolute,
            },
            Err(e) => return Err(e),
        };
        total = total.add(&term)?;
    }
    Ok(total)
}

pub(crate) fn ensure_same_model(field: &BoundaryField, coupling: &CouplingField) -> Result<()> {
    if field.prime() != coupling.prime() {
        return Err(Error::PrimeMismatch {
            left: field.prime().value(),
            right: coupling.prime().value(),
        });
    }
    if field.q() != coupling.q() {
        return Err(Error::InvalidInput(format!(
            "field has q = {}, couplings have q = {}",
            field.q(),
            coupling.q()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn num(n: i64, d: i64, prime: Prime) -> PadicNumber {
        PadicNumber::from_rational(n, d, prime, 16).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let prime = p(3);
        let a = num(3, 1, prime);
        let b = num(9, 2, prime);
        let h = PadicVector::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(spin_pairing(&h, SpinLabel::new(1, 3).unwrap()).unwrap(), a);
        let sum = spin_pairing(&h, SpinLabel::new(3, 3).unwrap()).unwrap();
        assert!(sum.agrees_with(&a.checked_add(&b).unwrap()));
        let zero = PadicVector::zero(2, prime, 16);
        for s in 1..=3 {
            assert!(spin_pairing(&zero, SpinLabel::new(s, 3).unwrap())
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn coupling_admissibility() {
        assert!(CouplingField::homogeneous(p(3), 3, rat(3, 1)).is_ok());
        assert!(CouplingField::homogeneous(p(3), 3, rat(0, 1)).is_ok());
        assert!(matches!(
            CouplingField::homogeneous(p(3), 3, rat(1, 3)),
            Err(Error::InadmissibleCoupling(_))
        ));
        assert!(matches!(
            CouplingField::homogeneous(p(2), 2, rat(2, 1)),
            Err(Error::InadmissibleCoupling(_))
        ));
        assert!(CouplingField::homogeneous(p(2), 2, rat(4, 3)).is_ok());
    }

    #[test]
    fn bipartite_coupling_follows_parent_parity() {
        let c = CouplingField::bipartite(p(3), 3, rat(3, 1), rat(6, 1)).unwrap();
        let depth1 = TreeVertex::from_address(vec![0]);
        let depth2 = TreeVertex::from_address(vec![0, 0]);
        assert_eq!(c.rational_coupling(&depth1).unwrap(), &rat(3, 1));
        assert_eq!(c.rational_coupling(&depth2).unwrap(), &rat(6, 1));
    }

    #[test]
    fn per_edge_coupling_reports_gaps() {
        let mut map = BTreeMap::new();
        map.insert(TreeVertex::from_address(vec![0]), rat(3, 1));
        let c = CouplingField::new(p(3), 2, CouplingPattern::PerEdge(map)).unwrap();
        let shape = TreeShape::new(1, 1).unwrap();
        assert!(matches!(
            c.covers(&shape, 1),
            Err(Error::MissingCoupling(_))
        ));
    }

    #[test]
    fn hamiltonian_examples() {
        let shape = TreeShape::new(2, 1).unwrap();
        let j = CouplingField::homogeneous(p(3), 3, rat(3, 1)).unwrap();
        let constant = Configuration::from_ball(&shape, 1, &[1, 1, 1, 1], 3).unwrap();
        let h = hamiltonian(&constant, &j, &shape, 1, 16).unwrap();
        assert_eq!(h.to_exact_integer(), Some(BigInt::from(-9)));
        let distinct = Configuration::from_ball(&shape, 1, &[1, 2, 3, 2], 3).unwrap();
        assert!(hamiltonian(&distinct, &j, &shape, 1, 16).unwrap().is_zero());
    }

    #[test]
    fn field_admissibility_and_defaults() {
        let prime = p(3);
        let bad = PadicVector::new(vec![num(1, 1, prime), num(0, 1, prime)]).unwrap();
        assert!(matches!(
            BoundaryField::new(prime, 3, 16, FieldPattern::Constant(bad)),
            Err(Error::InadmissibleField(_))
        ));
        let short = PadicVector::new(vec![num(3, 1, prime)]).unwrap();
        assert!(BoundaryField::new(prime, 3, 16, FieldPattern::Constant(short)).is_err());
        let mut map = BTreeMap::new();
        let h = PadicVector::new(vec![num(3, 1, prime), num(6, 5, prime)]).unwrap();
        map.insert(TreeVertex::from_address(vec![1]), h.clone());
        let field = BoundaryField::new(prime, 3, 16, FieldPattern::PerVertex(map)).unwrap();
        assert_eq!(field.at(&TreeVertex::from_address(vec![1])), h);
        assert_eq!(
            field.at(&TreeVertex::root()).sup_valuation(),
            Valuation::Infinite
        );
    }

    #[test]
    fn rational_valuations() {
        assert_eq!(rational_valuation(&rat(9, 2), p(3)), Valuation::Finite(2));
        assert_eq!(rational_valuation(&rat(2, 27), p(3)), Valuation::Finite(-3));
        assert_eq!(rational_valuation(&rat(0, 1), p(3)), Valuation::Infinite);
    }
}
