//! Seeded probe batteries for isometry and commutation checks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::site::{total_dim, unflatten, SiteId};
use crate::state::{tensor_states, LazyProductState};

/// Largest explicit dimension for which probes are drawn densely.
pub const MAX_PROBE_DIM: usize = 1 << 14;

/// Haar-like random unit vector on `sites` (complex Gaussian, normalized).
pub fn random_state(sites: &[SiteId], rng: &mut ChaCha8Rng) -> Result<LazyProductState> {
    let dim = total_dim(sites);
    if dim > MAX_PROBE_DIM {
        return Err(Error::Dimension(format!("probe dimension {dim} exceeds {MAX_PROBE_DIM}")));
    }
    let dims: Vec<u32> = sites.iter().map(|s| s.dim).collect();
    let terms = (0..dim).map(|flat| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        (unflatten(flat, &dims), Complex64::new(re, im))
    });
    LazyProductState::from_terms(sites.to_vec(), terms)?.normalized()
}

/// `count` random probes from a single seeded stream.
pub fn random_battery(sites: &[SiteId], count: usize, seed: u64) -> Result<Vec<LazyProductState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_state(sites, &mut rng)).collect()
}

/// Cap on the amplitude count of a chunked product probe.
pub const MAX_PRODUCT_PROBE_DIM: usize = 1 << 17;

/// Random probes for spaces beyond [`MAX_PROBE_DIM`]: sites are cut into
/// consecutive chunks, each small enough for a dense draw, and the chunk
/// states are tensored. Probes are then product across chunks but generic
/// within each.
pub fn random_product_battery(sites: &[SiteId], count: usize, seed: u64) -> Result<Vec<LazyProductState>> {
    let dim = total_dim(sites);
    if dim > MAX_PRODUCT_PROBE_DIM {
        return Err(Error::Dimension(format!("probe dimension {dim} exceeds {MAX_PRODUCT_PROBE_DIM}")));
    }
    if dim <= MAX_PROBE_DIM {
        return random_battery(sites, count, seed);
    }
    let mut chunks: Vec<Vec<SiteId>> = vec![Vec::new()];
    for s in sites {
        let cur = chunks.last_mut().expect("nonempty");
        if total_dim(cur) * s.dim as usize > MAX_PROBE_DIM / 4 {
            chunks.push(vec![*s]);
        } else {
            cur.push(*s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            chunks.iter().try_fold(LazyProductState::vacuum(), |acc, c| {
                tensor_states(&acc, &random_state(c, &mut rng)?)
            })
        })
        .collect()
}

/// Every computational basis vector of `sites`.
pub fn basis_battery(sites: &[SiteId]) -> Result<Vec<LazyProductState>> {
    let dims: Vec<u32> = sites.iter().map(|s| s.dim).collect();
    (0..total_dim(sites))
        .map(|flat| LazyProductState::basis(sites.to_vec(), unflatten(flat, &dims)))
        .collect()
}
