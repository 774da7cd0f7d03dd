use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::perco::{ArmSpec, PercoConfig, Workspace};

/// Largest support enumerated by [`oracle_exact`].
pub const ORACLE_MAX_HEXES: usize = 22;

/// Exact probability of `spec` under fair colouring, by enumerating every colouring of its support.
pub fn oracle_exact(spec: &ArmSpec, lat: &Lattice) -> Result<BigRational> {
    let det = spec.compile(lat)?;
    let support: Vec<u32> = det.support().iter().collect();
    let m = support.len();
    if m > ORACLE_MAX_HEXES {
        return Err(Error::DimensionCap { n: m, cap: ORACLE_MAX_HEXES });
    }
    let mut ws = Workspace::new();
    let mut c = PercoConfig::from_fn(lat, |_| false);
    let mut hits: u64 = 0;
    for mask in 0u64..1 << m {
        for (j, &id) in support.iter().enumerate() {
            c.set(id, mask >> j & 1 == 1);
        }
        hits += det.eval(&c, &mut ws) as u64;
    }
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(1u64) << m))
}
