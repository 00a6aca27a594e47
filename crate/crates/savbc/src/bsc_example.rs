//! Closed-form evaluation of the binary-symmetric instance: a BSC(p) to
//! the ordinary receiver and a BSC with state-dependent crossover in
//! [p_min, p_max] to the robust receiver. Provides the per-alpha rate
//! bounds, the boundary sweep behind the region figure, the degraded
//! broadcast-channel region, the sum-rate line of the reversely degraded
//! case, and a cross-check against the general region search.

use crate::channels::{SavbcSpec, StateFamily, StochasticMatrix};
use crate::geometry::{bounded_polytope, region_distance, RatePair, RateRegion};
use crate::measures::{binary_entropy, convolve, MeasureError};
use crate::regions::{compute_region, RegionError, SearchBudget};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BscExampleError {
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Crossover parameters of the binary-symmetric instance: the fixed
/// channel's crossover `p` and the adversary's range [p_min, p_max], all
/// in [0, 1/2) with p_min ≤ p_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsSavbcParams {
    pub p: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl BsSavbcParams {
    pub fn new(p: f64, p_min: f64, p_max: f64) -> Result<Self, BscExampleError> {
        if !(0.0..0.5).contains(&p) {
            return Err(BscExampleError::OutOfRange { what: "p", value: p });
        }
        if !(0.0..0.5).contains(&p_min) {
            return Err(BscExampleError::OutOfRange {
                what: "p_min",
                value: p_min,
            });
        }
        if !(0.0..0.5).contains(&p_max) || p_max < p_min {
            return Err(BscExampleError::OutOfRange {
                what: "p_max",
                value: p_max,
            });
        }
        Ok(Self { p, p_min, p_max })
    }

    /// The two-vertex state family {BSC(p_min), BSC(p_max)} representing
    /// the crossover interval (a single vertex when the interval is a
    /// point).
    pub fn spec(&self) -> SavbcSpec {
        let w = StochasticMatrix::bsc(self.p).expect("validated crossover");
        let mut vertices = vec![StochasticMatrix::bsc(self.p_min).expect("validated crossover")];
        if self.p_max > self.p_min {
            vertices.push(StochasticMatrix::bsc(self.p_max).expect("validated crossover"));
        }
        SavbcSpec::new(w, StateFamily::new(vertices).expect("nonempty family"))
            .expect("matching dimensions")
    }
}

/// The three rate bounds at one value of the superposition parameter α.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaSample {
    pub alpha: f64,
    /// 1 − H_b(α ∗ p_max)
    pub rc_bound: f64,
    /// H_b(α ∗ p) − H_b(p)
    pub rp_bound: f64,
    /// 1 − H_b(p)
    pub sum_bound: f64,
}

/// Boundary sweep output: the per-α bounds and the hull across α.
#[derive(Debug, Clone)]
pub struct BsBoundary {
    pub samples: Vec<AlphaSample>,
    pub hull: RateRegion,
    /// true when p_max ≤ p and the region is the sum-rate triangle
    pub is_triangle: bool,
}

fn hb(p: f64) -> f64 {
    binary_entropy(p).expect("probability in range").0
}

/// Per-α polytopes of the binary-symmetric region for α on a uniform
/// grid over [0, 1/2], plus their hull. When p_max ≤ p the region is the
/// triangle rc + rp ≤ 1 − H_b(p) and the hull is emitted exactly.
pub fn bs_region_boundary(
    params: &BsSavbcParams,
    n_alpha: usize,
) -> Result<BsBoundary, BscExampleError> {
    if n_alpha < 2 {
        return Err(BscExampleError::OutOfRange {
            what: "n_alpha",
            value: n_alpha as f64,
        });
    }
    let sum_bound = 1.0 - hb(params.p);
    let mut samples = Vec::with_capacity(n_alpha);
    let mut pool: Vec<RatePair> = vec![RatePair::new(0.0, 0.0)];
    for i in 0..n_alpha {
        let alpha = 0.5 * i as f64 / (n_alpha - 1) as f64;
        let rc_bound = 1.0 - hb(convolve(alpha, params.p_max)?);
        let rp_bound = hb(convolve(alpha, params.p)?) - hb(params.p);
        samples.push(AlphaSample {
            alpha,
            rc_bound,
            rp_bound,
            sum_bound,
        });
        let poly = bounded_polytope(rc_bound, Some(rp_bound), &[sum_bound]);
        pool.extend_from_slice(poly.vertices());
    }
    let is_triangle = params.p_max <= params.p;
    let hull = if is_triangle {
        RateRegion::from_points(&[
            RatePair::new(0.0, 0.0),
            RatePair::new(sum_bound, 0.0),
            RatePair::new(0.0, sum_bound),
        ])
    } else {
        RateRegion::from_points(&pool)
    };
    Ok(BsBoundary {
        samples,
        hull,
        is_triangle,
    })
}

/// One boundary point of the stochastically degraded binary-symmetric
/// broadcast channel.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DegradedSample {
    pub alpha: f64,
    /// 1 − H_b(α ∗ p_weak), the common-rate bound at the weak receiver
    pub rc_bound: f64,
    /// H_b(α ∗ p_strong) − H_b(p_strong), the private-rate bound
    pub rp_bound: f64,
}

/// Private-message region boundary of the degraded BS-BC with the strong
/// receiver behind BSC(p_strong) and the weak one behind BSC(p_weak).
pub fn degraded_bsbc_region(
    p_strong: f64,
    p_weak: f64,
    n_alpha: usize,
) -> Result<Vec<DegradedSample>, BscExampleError> {
    if !(0.0..0.5).contains(&p_strong) {
        return Err(BscExampleError::OutOfRange {
            what: "p_strong",
            value: p_strong,
        });
    }
    if !(0.0..0.5).contains(&p_weak) || p_weak < p_strong {
        return Err(BscExampleError::OutOfRange {
            what: "p_weak",
            value: p_weak,
        });
    }
    if n_alpha < 2 {
        return Err(BscExampleError::OutOfRange {
            what: "n_alpha",
            value: n_alpha as f64,
        });
    }
    let mut samples = Vec::with_capacity(n_alpha);
    for i in 0..n_alpha {
        let alpha = 0.5 * i as f64 / (n_alpha - 1) as f64;
        samples.push(DegradedSample {
            alpha,
            rc_bound: 1.0 - hb(convolve(alpha, p_weak)?),
            rp_bound: hb(convolve(alpha, p_strong)?) - hb(p_strong),
        });
    }
    Ok(samples)
}

/// One point of the sum-rate line traced when the ordinary receiver is
/// the degraded one (p ≥ p_max).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumRateSample {
    pub alpha: f64,
    pub rc: f64,
    pub rp: f64,
}

/// Samples of the pair (1 − H_b(α∗p), H_b(α∗p) − H_b(p)), which traces
/// the line rc + rp = 1 − H_b(p). Every sample is verified against the
/// three per-α bounds before being returned.
pub fn case2_sumrate_line(
    params: &BsSavbcParams,
    n_alpha: usize,
) -> Result<Vec<SumRateSample>, BscExampleError> {
    if params.p < params.p_max {
        return Err(BscExampleError::OutOfRange {
            what: "p (must be at least p_max for the reversely degraded case)",
            value: params.p,
        });
    }
    if n_alpha < 2 {
        return Err(BscExampleError::OutOfRange {
            what: "n_alpha",
            value: n_alpha as f64,
        });
    }
    let hp = hb(params.p);
    let mut samples = Vec::with_capacity(n_alpha);
    for i in 0..n_alpha {
        let alpha = 0.5 * i as f64 / (n_alpha - 1) as f64;
        let mixed = hb(convolve(alpha, params.p)?);
        let sample = SumRateSample {
            alpha,
            rc: 1.0 - mixed,
            rp: mixed - hp,
        };
        let rc_bound = 1.0 - hb(convolve(alpha, params.p_max)?);
        debug_assert!(sample.rc <= rc_bound + 1e-12);
        debug_assert!(sample.rc + sample.rp <= 1.0 - hp + 1e-12);
        if sample.rc > rc_bound + 1e-9 || sample.rc + sample.rp > 1.0 - hp + 1e-9 {
            return Err(BscExampleError::OutOfRange {
                what: "internal bound violation at alpha",
                value: alpha,
            });
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Cross-validation report: closed-form hull versus the general region
/// search on the two-vertex family.
#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub distance: f64,
    pub closed_form: RateRegion,
    pub computed: RateRegion,
    pub warnings: Vec<String>,
}

/// Runs the general optimizer on {BSC(p_min), BSC(p_max)} and reports the
/// Hausdorff distance to the closed-form hull.
pub fn crosscheck(
    params: &BsSavbcParams,
    budget: &SearchBudget,
    tol: f64,
) -> Result<CrosscheckReport, BscExampleError> {
    let closed = bs_region_boundary(params, 201)?;
    let spec = params.spec();
    let result = compute_region(&spec, budget, tol)?;
    let distance = region_distance(&closed.hull, &result.region);
    Ok(CrosscheckReport {
        distance,
        closed_form: closed.hull,
        computed: result.region,
        warnings: result.warnings,
    })
}
