//! Finite-volume measures by exhaustive enumeration of `Ω_n = Ψ^(V_n)`.
//!
//! The unnormalised weight of `σ` is the product of `θ_xy` over agreeing
//! edges and of `exp_p(h_x σ(x))` over `x ∈ W_n`. For the spin `q` the
//! boundary factor is taken as `Π_i exp_p(h_(x,i))`, which equals
//! `exp_p(Σ_i h_(x,i))` but cannot cancel.

use serde::Serialize;

use crate::analytic::exp_p;
use crate::error::{Error, Result};
use crate::padic::{Approx, PadicNumber, Prime, Valuation, DEFAULT_PRECISION};
use crate::tree::TreeShape;

use super::{ensure_same_model, BoundaryField, Configuration, CouplingField};

/// Largest number of configurations any enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

struct Model {
    prime: Prime,
    q: usize,
    precision: u32,
    parent: Vec<Option<usize>>,
    /// `θ` on the edge into each non-root vertex.
    theta: Vec<Option<PadicNumber>>,
    /// Boundary factor per spin for vertices of `W_n`.
    boundary: Vec<Option<Vec<PadicNumber>>>,
}

fn check_guard(q: u32, vertices: u64) -> Result<()> {
    let terms = (q as u128)
        .checked_pow(vertices as u32)
        .unwrap_or(u128::MAX);
    if vertices > 64 || terms > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            terms,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

impl Model {
    fn build(
        shape: &TreeShape,
        n: u32,
        field: &BoundaryField,
        coupling: &CouplingField,
    ) -> Result<Model> {
        ensure_same_model(field, coupling)?;
        check_guard(field.q(), shape.ball_size(n))?;
        let precision = field.precision();
        let ball = shape.ball(n)?;
        let index: std::collections::HashMap<_, _> = ball
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i))
            .collect();
        let mut parent = Vec::with_capacity(ball.len());
        let mut theta = Vec::with_capacity(ball.len());
        let mut boundary = Vec::with_capacity(ball.len());
        for x in &ball {
            match x.parent() {
                Some(px) => {
                    parent.push(Some(index[&px]));
                    theta.push(Some(coupling.theta(x, precision)?));
                }
                None => {
                    parent.push(None);
                    theta.push(None);
                }
            }
            if x.level() == n {
                let h = field.at(x);
                let mut factors = Vec::with_capacity(field.q() as usize);
                let mut all = PadicNumber::one(field.prime(), precision);
                for c in h.components() {
                    let e = exp_p(c)?;
                    all = all.checked_mul(&e)?;
                    factors.push(e);
                }
                factors.push(all);
                boundary.push(Some(factors));
            } else {
                boundary.push(None);
            }
        }
        Ok(Model {
            prime: field.prime(),
            q: field.q() as usize,
            precision,
            parent,
            theta,
            boundary,
        })
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    /// Weight factor contributed by vertex `i` carrying spin `s` (0-based).
    fn factor(&self, i: usize, s: usize, spins: &[usize]) -> Option<PadicNumber> {
        let mut out: Option<PadicNumber> = None;
        if let (Some(pi), Some(theta)) = (self.parent[i], &self.theta[i]) {
            if spins[pi] == s {
                out = Some(theta.clone());
            }
        }
        if let Some(b) = &self.boundary[i] {
            out = Some(match out {
                Some(t) => t.checked_mul(&b[s]).expect("same prime"),
                None => b[s].clone(),
            });
        }
        out
    }

    /// For every assignment of the first `cut` vertices (base-`q` index,
    /// first vertex most significant), the summed weight over the rest.
    fn partial_sums(&self, cut: usize) -> Result<Vec<Approx>> {
        let zero = Approx::from(PadicNumber::zero(self.prime, self.precision));
        let mut sums = vec![zero; self.q.pow(cut as u32)];
        let mut spins = vec![0usize; self.len()];
        let one = PadicNumber::one(self.prime, self.precision);
        self.visit(0, cut, 0, &one, &mut spins, &mut sums)?;
        Ok(sums)
    }

    fn visit(
        &self,
        i: usize,
        cut: usize,
        slot: usize,
        weight: &PadicNumber,
        spins: &mut [usize],
        sums: &mut [Approx],
    ) -> Result<()> {
        if i == self.len() {
            sums[slot] = sums[slot].add(&Approx::from(weight.clone()))?;
            return Ok(());
        }
        for s in 0..self.q {
            spins[i] = s;
            let next_slot = if i < cut { slot * self.q + s } else { slot };
            match self.factor(i, s, spins) {
                Some(f) => {
                    let w = weight.checked_mul(&f)?;
                    self.visit(i + 1, cut, next_slot, &w, spins, sums)?;
                }
                None => self.visit(i + 1, cut, next_slot, weight, spins, sums)?,
            }
        }
        Ok(())
    }

    fn weight_of(&self, spins: &[usize]) -> PadicNumber {
        let mut w = PadicNumber::one(self.prime, self.precision);
        for i in 0..self.len() {
            if let Some(f) = self.factor(i, spins[i], spins) {
                w = w.checked_mul(&f).expect("same prime");
            }
        }
        w
    }
}

fn total(sums: &[Approx]) -> Result<PadicNumber> {
    let mut z = sums[0].clone();
    for s in &sums[1..] {
        z = z.add(s)?;
    }
    match z {
        Approx::Value(z) if !z.is_zero() => Ok(z),
        Approx::Value(_) => Err(Error::PartitionFunctionDegenerate { absolute: i64::MAX }),
        Approx::Negligible { absolute, .. } => Err(Error::PartitionFunctionDegenerate { absolute }),
    }
}

/// `Z_n`, the sum of unnormalised weights over `Ω_n`.
pub fn partition_function(
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
) -> Result<PadicNumber> {
    let model = Model::build(shape, n, field, coupling)?;
    total(&model.partial_sums(0)?)
}

/// `μ^(n)_h(σ)` at the field's precision.
pub fn finite_measure(
    cfg: &Configuration,
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
) -> Result<PadicNumber> {
    let model = Model::build(shape, n, field, coupling)?;
    let spins = shape
        .ball(n)?
        .iter()
        .map(|x| {
            cfg.spin(x)
                .map(|s| s.value() as usize - 1)
                .ok_or_else(|| Error::InvalidInput(format!("configuration has no spin at {x:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let z = total(&model.partial_sums(0)?)?;
    model.weight_of(&spins).checked_div(&z)
}

/// Target precision and slack shared by every verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tolerance {
    /// Target precision `N`.
    pub precision: u32,
    /// Discrepancies of relative valuation at least `N - margin` count as agreement.
    pub margin: u32,
    /// Extra digits carried during enumeration.
    pub guard: u32,
}

impl Tolerance {
    pub fn with_precision(precision: u32) -> Self {
        Tolerance {
            precision,
            ..Tolerance::default()
        }
    }

    /// `N + guard`, the precision carried during computation.
    pub fn working(&self) -> u32 {
        self.precision + self.guard
    }

    /// `N - margin`, the valuation at which residuals count as zero.
    pub fn threshold(&self) -> i64 {
        self.precision as i64 - self.margin as i64
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            precision: DEFAULT_PRECISION,
            margin: 4,
            guard: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub holds: bool,
    /// Smallest `v(μ^(n) marginal - μ^(n-1)) - v(μ^(n-1))` over `Ω_(n-1)`.
    pub discrepancy_valuation: Valuation,
    pub threshold: i64,
    pub configurations: u64,
    /// Digits carried in the final pass.
    pub working_precision: u32,
}

/// Passes allowed before a precision-limited discrepancy is reported as is.
const COMPATIBILITY_PASSES: u32 = 3;

/// Sums `μ^(n)` over the spins of `W_n` and compares with `μ^(n-1)` for every
/// configuration on `V_(n-1)`. Inputs are carried at `N + guard` digits.
///
/// When `p | q` the partition functions can have large valuation and eat the
/// guard digits. If the worst discrepancy is then only a precision bound below
/// the threshold, the check reruns with the shortfall added to the guard.
pub fn compatibility_check(
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
    options: Tolerance,
) -> Result<CompatibilityReport> {
    if n == 0 {
        return Err(Error::InvalidInput("compatibility needs n >= 1".into()));
    }
    check_guard(field.q(), shape.ball_size(n))?;
    let threshold = options.threshold();
    let mut working = options.working();
    let mut pass = 1;
    loop {
        let (worst, resolved) = discrepancy(field, coupling, shape, n, working)?;
        let done = worst.at_least(threshold) || resolved || pass == COMPATIBILITY_PASSES;
        if done {
            return Ok(CompatibilityReport {
                holds: worst.at_least(threshold),
                discrepancy_valuation: worst,
                threshold,
                configurations: (field.q() as u64).pow(shape.ball_size(n) as u32),
                working_precision: working,
            });
        }
        let shortfall = threshold - worst.finite().expect("below a finite threshold");
        working += shortfall as u32 + options.guard;
        pass += 1;
    }
}

/// The worst relative discrepancy at `working` digits, and whether it is a
/// resolved value rather than a precision bound.
fn discrepancy(
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n: u32,
    working: u32,
) -> Result<(Valuation, bool)> {
    let field = field.with_precision(working);
    let outer = Model::build(shape, n, &field, coupling)?;
    let inner = Model::build(shape, n - 1, &field, coupling)?;
    let cut = inner.len();
    let marginals = outer.partial_sums(cut)?;
    let weights = inner.partial_sums(cut)?;
    let z_outer = total(&marginals)?;
    let z_inner = total(&weights)?;

    let mut worst = Valuation::Infinite;
    let mut resolved = true;
    for (m, w) in marginals.iter().zip(&weights) {
        let reference = w.value()?.checked_div(&z_inner)?;
        let diff = m.div(&z_outer)?.sub(&Approx::from(reference.clone()))?;
        let relative = match (diff.valuation_bound(), reference.valuation()) {
            (Valuation::Finite(d), Valuation::Finite(r)) => Valuation::Finite(d - r),
            (Valuation::Infinite, _) => Valuation::Infinite,
            (_, Valuation::Infinite) => unreachable!("weights are products of units"),
        };
        if relative < worst {
            worst = relative;
            resolved = matches!(diff, Approx::Value(_));
        }
    }
    Ok((worst, resolved))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NormProfileLevel {
    pub n: u32,
    /// Smallest `v(μ^(n)(σ))`; negative means `|μ^(n)(σ)|_p > 1`.
    pub min_valuation: Valuation,
    pub max_valuation: Valuation,
}

/// Extremes of `v(μ^(n)(σ))` over `Ω_n` for `n = 0..=n_max`.
pub fn measure_norm_profile(
    field: &BoundaryField,
    coupling: &CouplingField,
    shape: &TreeShape,
    n_max: u32,
) -> Result<Vec<NormProfileLevel>> {
    check_guard(field.q(), shape.ball_size(n_max))?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let model = Model::build(shape, n, field, coupling)?;
        let weights = model.partial_sums(model.len())?;
        let z = total(&weights)?;
        let vz = z.valuation().finite().expect("nonzero");
        let mut lo = Valuation::Infinite;
        let mut hi = Valuation::Finite(i64::MIN);
        for w in &weights {
            let v = match w.valuation_bound() {
                Valuation::Finite(v) => Valuation::Finite(v - vz),
                Valuation::Infinite => Valuation::Infinite,
            };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        out.push(NormProfileLevel {
            n,
            min_valuation: lo,
            max_valuation: hi,
        });
    }
    Ok(out)
}
