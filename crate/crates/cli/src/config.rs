use std::fs;

use num_bigint::BigInt;
use padic_potts::potts::{
    parse_boundary_field, parse_coupling_field, BoundaryField, CouplingField, ENUMERATION_LIMIT,
};
use padic_potts::tree::TreeShape;
use padic_potts::{Error, Prime, Result, Tolerance};

use crate::Common;

/// Validated inputs shared by the model subcommands.
pub struct RunConfig {
    pub prime: Prime,
    pub q: u32,
    pub k: u32,
    pub n: u32,
    pub tolerance: Tolerance,
    pub coupling: CouplingField,
    /// The coupling document as given, or the default one that was built.
    pub coupling_source: String,
    pub field: Option<BoundaryField>,
}

/// Inline JSON starts with `{`; anything else is a path.
fn read_inline_or_path(spec: &str) -> Result<String> {
    if spec.trim_start().starts_with('{') {
        return Ok(spec.to_string());
    }
    fs::read_to_string(spec).map_err(|e| Error::InvalidInput(format!("cannot read {spec:?}: {e}")))
}

fn default_coupling(p: u32, q: u32) -> String {
    // J = p sits on the edge of the exp disk for odd p; p = 2 needs |J|_2 <= 1/4.
    let j = if p == 2 { 4 } else { p };
    format!(r#"{{"pattern":"homogeneous","p":{p},"q":{q},"values":"{j}"}}"#)
}

impl RunConfig {
    /// Checks primality, coupling admissibility, the field file and, when
    /// `enumerates` is set, the enumeration guard, before any computation.
    pub fn from_args(common: &Common, enumerates: bool) -> Result<Self> {
        if common.k == 0 {
            return Err(Error::InvalidInput("--k must be at least 1".into()));
        }
        if common.precision < 8 {
            return Err(Error::InvalidInput("--precision must be at least 8".into()));
        }
        let coupling_source = match &common.couplings {
            Some(spec) => read_inline_or_path(spec)?,
            None => {
                let prime = Prime::new(common.p)?;
                default_coupling(prime.value(), common.q)
            }
        };
        let coupling = parse_coupling_field(&coupling_source)?;
        let prime = coupling.prime();
        let q = coupling.q();
        if common.couplings.is_some() && (prime.value() as u64 != common.p || q != common.q) {
            return Err(Error::InvalidInput(format!(
                "coupling document has p = {}, q = {q} but the flags give p = {}, q = {}",
                prime.value(),
                common.p,
                common.q
            )));
        }
        let tolerance = Tolerance::with_precision(common.precision);
        let shape = TreeShape::new(common.k, common.n)?;
        if enumerates {
            let terms = BigInt::from(q).pow(shape.ball_size(common.n) as u32);
            if terms > BigInt::from(ENUMERATION_LIMIT) {
                return Err(Error::EnumerationTooLarge {
                    terms: u128::try_from(&terms).unwrap_or(u128::MAX),
                    limit: ENUMERATION_LIMIT,
                });
            }
            coupling.covers(&shape, common.n)?;
        }
        let field = match &common.field {
            Some(path) => Some(parse_boundary_field(
                &read_inline_or_path(path)?,
                prime,
                q,
                tolerance.working(),
            )?),
            None => None,
        };
        Ok(RunConfig {
            prime,
            q,
            k: common.k,
            n: common.n,
            tolerance,
            coupling,
            coupling_source,
            field,
        })
    }

    pub fn shape(&self) -> Result<TreeShape> {
        TreeShape::new(self.k, self.n)
    }

    pub fn field_or_zero(&self) -> BoundaryField {
        self.field
            .clone()
            .unwrap_or_else(|| BoundaryField::zero(self.prime, self.q, self.tolerance.working()))
    }
}
