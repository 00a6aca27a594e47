//! Seed derivation and sampling helpers shared by the search and the
//! simulator. Streams are derived per (seed, lane, index) so that any
//! parallel execution order would reproduce the sequential results.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent RNG stream for the given lane and index under one seed.
pub(crate) fn stream_rng(seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(lane.wrapping_add(splitmix64(index))));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Uniform sample from the probability simplex (flat Dirichlet) via
/// normalized exponentials.
pub(crate) fn dirichlet_uniform<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(1e-12);
            -u.ln()
        })
        .collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Inverse-CDF draw from a PMF given a uniform variate.
pub(crate) fn draw_index(pmf: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // fall back to the last index with positive mass
    pmf.iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(pmf.len() - 1)
}
