//! Rate-region computation: per-auxiliary inner and outer polytopes, the
//! global region via direction-fan support maximization over the
//! auxiliary simplex, a brute-force grid oracle, corner points and the
//! bounding triangle, and numerical verification of the Q-absorption and
//! inner/outer equivalence identities.

use crate::channels::{ChannelError, SavbcSpec, StateWeights};
use crate::geometry::{bounded_polytope, region_distance, RatePair, RateRegion};
use crate::measures::{
    grad_mi_uz, grad_mi_xy, mi_x_y, mi_x_y_given_q, mi_x_y_given_u_q, min_state_capacity,
    min_state_mi_certified, shannon_capacity, AuxiliaryJoint, MeasureError,
};
use crate::util::{dirichlet_uniform, stream_rng};
use serde::Serialize;

/// Hard cap on brute-force grid enumeration.
const GRID_GUARD: u128 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum RegionError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid too large: {points} points exceed the {max}-point guard")]
    GridTooLarge { points: u128, max: u128 },
}

/// The three per-auxiliary rate bounds, with the state weights achieving
/// the common-rate minimum.
#[derive(Debug, Clone)]
pub struct InnerBounds {
    /// min over the state closure of I(U;Z|Q)
    pub common_max: f64,
    /// I(X;Y|U,Q)
    pub private_max: f64,
    /// I(X;Y|Q)
    pub sum_max: f64,
    pub minimizing_weights: StateWeights,
}

fn check_aux(aux: &AuxiliaryJoint, spec: &SavbcSpec) -> Result<(), RegionError> {
    if aux.x_size() != spec.x_size() {
        return Err(RegionError::DimensionMismatch(format!(
            "auxiliary joint has x_size {} but the spec has {}",
            aux.x_size(),
            spec.x_size()
        )));
    }
    Ok(())
}

/// Evaluates the three bounds for one auxiliary joint.
pub fn inner_bounds(
    aux: &AuxiliaryJoint,
    spec: &SavbcSpec,
    tol: f64,
) -> Result<InnerBounds, RegionError> {
    check_aux(aux, spec)?;
    let min = min_state_mi_certified(aux, spec.family(), tol)?;
    let weights = StateWeights::new(min.weights).map_err(RegionError::Channel)?;
    Ok(InnerBounds {
        common_max: min.value,
        private_max: mi_x_y_given_u_q(aux, spec.w())?.0,
        sum_max: mi_x_y_given_q(aux, spec.w())?.0,
        minimizing_weights: weights,
    })
}

/// Polytope cut from the nonnegative quadrant by
/// rc ≤ min_s I(U;Z|Q), rp ≤ I(X;Y|U,Q), rc + rp ≤ I(X;Y|Q).
pub fn inner_polytope(
    aux: &AuxiliaryJoint,
    spec: &SavbcSpec,
    tol: f64,
) -> Result<RateRegion, RegionError> {
    let b = inner_bounds(aux, spec, tol)?;
    Ok(bounded_polytope(
        b.common_max,
        Some(b.private_max),
        &[b.sum_max],
    ))
}

/// Polytope cut by rc ≤ min_s I(U;Z|Q) and the two sum constraints
/// rc + rp ≤ I(X;Y|U,Q) + min_s I(U;Z|Q), rc + rp ≤ I(X;Y|Q). The state
/// minimum is the single joint minimization of the Q-averaged conditional
/// mutual information.
pub fn outer_polytope(
    aux: &AuxiliaryJoint,
    spec: &SavbcSpec,
    tol: f64,
) -> Result<RateRegion, RegionError> {
    let b = inner_bounds(aux, spec, tol)?;
    Ok(bounded_polytope(
        b.common_max,
        None,
        &[b.private_max + b.common_max, b.sum_max],
    ))
}

/// Search parameters for [`compute_region`].
#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// support directions fanned over the first quadrant
    pub directions: usize,
    /// gradient-ascent starts per direction (structured starts first,
    /// then Dirichlet restarts)
    pub restarts: usize,
    /// iteration cap per start
    pub max_iters: usize,
    /// auxiliary cardinality; defaults to |X| + 1
    pub u_size: Option<usize>,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            directions: 64,
            restarts: 16,
            max_iters: 2000,
            u_size: None,
            seed: 0,
        }
    }
}

/// Region output plus best-effort warnings (budget exhaustion).
#[derive(Debug, Clone)]
pub struct RegionResult {
    pub region: RateRegion,
    pub warnings: Vec<String>,
}

/// Support value and a supergradient of the per-auxiliary polytope's
/// support function in direction `mu`, assembled from the active bounds
/// at the maximizing vertex.
fn support_and_supergrad(
    bounds: &InnerBounds,
    grad_a: &[f64],
    grad_b: &[f64],
    grad_c: &[f64],
    mu: (f64, f64),
) -> (f64, Vec<f64>) {
    let (a, b, c) = (bounds.common_max, bounds.private_max, bounds.sum_max);
    let poly = bounded_polytope(a, Some(b), &[c]);
    let mut best_v = RatePair::new(0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    for &v in poly.vertices() {
        let val = mu.0 * v.rc + mu.1 * v.rp;
        if val > best {
            best = val;
            best_v = v;
        }
    }
    let eps = 1e-9;
    let on = |x: f64, bound: f64| (x - bound).abs() <= eps * (1.0 + bound.abs());
    let d = grad_a.len();
    let mut grad = vec![0.0; d];
    let mut add = |coef: f64, g: &[f64]| {
        for (o, &v) in grad.iter_mut().zip(g) {
            *o += coef * v;
        }
    };
    let rc_at_a = on(best_v.rc, a);
    let rp_at_b = on(best_v.rp, b);
    let at_sum = on(best_v.rc + best_v.rp, c);
    if rc_at_a && rp_at_b {
        add(mu.0, grad_a);
        add(mu.1, grad_b);
    } else if rc_at_a && at_sum {
        add(mu.0 - mu.1, grad_a);
        add(mu.1, grad_c);
    } else if rp_at_b && at_sum {
        add(mu.1 - mu.0, grad_b);
        add(mu.0, grad_c);
    } else if rc_at_a {
        add(mu.0, grad_a);
    } else if rp_at_b {
        add(mu.1, grad_b);
    } else if at_sum {
        add(mu.0.max(mu.1), grad_c);
    } else {
        // origin with all bounds at zero: push along every bound
        add(mu.0, grad_a);
        add(mu.1, grad_b);
    }
    (best, grad)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

struct DirectionOutcome {
    polytope_vertices: Vec<RatePair>,
    exhausted: bool,
}

fn ascend_direction(
    spec: &SavbcSpec,
    u_size: usize,
    mu: (f64, f64),
    budget: &SearchBudget,
    dir_index: u64,
    tol: f64,
) -> Result<DirectionOutcome, RegionError> {
    let x_size = spec.x_size();
    let d = u_size * x_size;
    let fw_tol = (tol * 0.1).clamp(1e-12, 1e-6);

    let evaluate = |p: &[f64]| -> Result<(f64, InnerBounds), RegionError> {
        let aux = AuxiliaryJoint::with_q(u_size, x_size, 1, p.to_vec())
            .map_err(RegionError::Measure)?;
        let bounds = inner_bounds(&aux, spec, fw_tol)?;
        let poly = bounded_polytope(bounds.common_max, Some(bounds.private_max), &[bounds.sum_max]);
        Ok((poly.support(mu), bounds))
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(budget.restarts.max(1));
    // structured starts: uniform, an identity embedding of X into U, and a
    // deterministic cloud over uniform inputs
    starts.push(vec![1.0 / d as f64; d]);
    if starts.len() < budget.restarts.max(1) {
        let mut identity = vec![0.0; d];
        for x in 0..x_size {
            identity[(x % u_size) * x_size + x] = 1.0 / x_size as f64;
        }
        starts.push(identity);
    }
    if starts.len() < budget.restarts.max(1) {
        let mut det_u = vec![0.0; d];
        for x in 0..x_size {
            det_u[x] = 1.0 / x_size as f64;
        }
        starts.push(det_u);
    }
    let mut restart = 0u64;
    while starts.len() < budget.restarts.max(1) {
        let mut rng = stream_rng(budget.seed, dir_index, restart);
        starts.push(dirichlet_uniform(&mut rng, d));
        restart += 1;
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_bounds: Option<InnerBounds> = None;
    let mut exhausted = false;
    for start in starts {
        let mut p = start;
        let (mut value, mut bounds) = evaluate(&p)?;
        let mut step = 0.25;
        let mut iters = 0;
        let mut last_gain = 0.0;
        while iters < budget.max_iters {
            iters += 1;
            let aux = AuxiliaryJoint::with_q(u_size, x_size, 1, p.clone())
                .map_err(RegionError::Measure)?;
            let mixed = spec.family().mix(&bounds.minimizing_weights)?;
            let grad_a = grad_mi_uz(&aux, &mixed);
            let grad_c = grad_mi_xy(&aux, spec.w());
            let grad_uy = grad_mi_uz(&aux, spec.w());
            let grad_b: Vec<f64> = grad_c
                .iter()
                .zip(&grad_uy)
                .map(|(c, u)| c - u)
                .collect();
            let (_, grad) = support_and_supergrad(&bounds, &grad_a, &grad_b, &grad_c, mu);
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
                let projected = project_simplex(&trial);
                let (trial_value, trial_bounds) = evaluate(&projected)?;
                if trial_value > value + 1e-12 {
                    last_gain = trial_value - value;
                    p = projected;
                    value = trial_value;
                    bounds = trial_bounds;
                    step = (step * 1.5).min(2.0);
                    accepted = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
            if !accepted {
                break;
            }
        }
        if iters >= budget.max_iters && last_gain > 1e-9 {
            exhausted = true;
        }
        if value > best_value {
            best_value = value;
            best_bounds = Some(bounds);
        }
    }
    let bounds = best_bounds.expect("at least one start evaluated");
    let poly = bounded_polytope(bounds.common_max, Some(bounds.private_max), &[bounds.sum_max]);
    Ok(DirectionOutcome {
        polytope_vertices: poly.vertices().to_vec(),
        exhausted,
    })
}

/// Computes the capacity region: for each direction on a fan over the
/// first quadrant, maximizes the supported rate combination over the
/// auxiliary joint by multi-start projected gradient ascent, then hulls
/// all supporting polytope vertices together with the two corner points.
pub fn compute_region(
    spec: &SavbcSpec,
    budget: &SearchBudget,
    tol: f64,
) -> Result<RegionResult, RegionError> {
    let u_size = budget.u_size.unwrap_or(spec.x_size() + 1);
    if u_size == 0 {
        return Err(RegionError::DimensionMismatch(
            "u_size must be positive".into(),
        ));
    }
    let mut pool: Vec<RatePair> = vec![RatePair::new(0.0, 0.0)];
    let (lower_corner, upper_corner) = corner_points(spec, tol)?;
    pool.push(lower_corner);
    pool.push(upper_corner);

    let mut warnings = Vec::new();
    let directions = budget.directions.max(1);
    for i in 0..directions {
        let theta = if directions == 1 {
            std::f64::consts::FRAC_PI_4
        } else {
            std::f64::consts::FRAC_PI_2 * i as f64 / (directions - 1) as f64
        };
        let mu = (theta.cos(), theta.sin());
        let outcome = ascend_direction(spec, u_size, mu, budget, i as u64, tol)?;
        if outcome.exhausted {
            warnings.push(format!(
                "direction {i} (angle {theta:.4}) hit the iteration cap while still improving"
            ));
        }
        pool.extend(outcome.polytope_vertices);
    }
    Ok(RegionResult {
        region: RateRegion::from_points(&pool),
        warnings,
    })
}

/// Enumerates all auxiliary joints on a simplex grid with `grid_steps`
/// subdivisions and hulls their inner polytopes. The inner state minimum
/// is itself taken over a dense weight grid, so this oracle shares no
/// optimizer machinery with [`compute_region`].
pub fn brute_force_region(
    spec: &SavbcSpec,
    u_size: usize,
    grid_steps: usize,
) -> Result<RateRegion, RegionError> {
    let d = u_size * spec.x_size();
    let points = compositions_count(grid_steps, d);
    if points > GRID_GUARD {
        return Err(RegionError::GridTooLarge {
            points,
            max: GRID_GUARD,
        });
    }
    let lambda_grid = state_weight_grid(spec.family().len());
    let mixtures: Vec<_> = lambda_grid
        .iter()
        .map(|w| spec.family().mix(w))
        .collect::<Result<Vec<_>, _>>()?;

    let mut pool: Vec<RatePair> = vec![RatePair::new(0.0, 0.0)];
    let mut composition = vec![0usize; d];
    enumerate_compositions(grid_steps, d, &mut composition, &mut |comp| {
        let probs: Vec<f64> = comp
            .iter()
            .map(|&c| c as f64 / grid_steps as f64)
            .collect();
        let aux = AuxiliaryJoint::with_q(u_size, spec.x_size(), 1, probs)
            .expect("grid point is a valid pmf");
        let mut common = f64::INFINITY;
        for mixed in &mixtures {
            let value = crate::measures::mi_u_z(&aux, mixed).expect("dimensions checked").0;
            common = common.min(value);
        }
        let private = mi_x_y_given_u_q(&aux, spec.w()).expect("dimensions checked").0;
        let sum = mi_x_y(&aux, spec.w()).expect("dimensions checked").0;
        let poly = bounded_polytope(common, Some(private), &[sum]);
        pool.extend_from_slice(poly.vertices());
    });
    Ok(RateRegion::from_points(&pool))
}

/// Weight-simplex grid used by the brute-force oracle; densities are
/// pinned per family size.
fn state_weight_grid(k: usize) -> Vec<StateWeights> {
    let steps = match k {
        1 => 1,
        2 => 128,
        3 => 48,
        _ => 16,
    };
    let mut grid = Vec::new();
    let mut comp = vec![0usize; k];
    enumerate_compositions(steps, k, &mut comp, &mut |c| {
        let w: Vec<f64> = c.iter().map(|&v| v as f64 / steps as f64).collect();
        grid.push(StateWeights::new(w).expect("grid weights are a valid pmf"));
    });
    grid
}

fn compositions_count(total: usize, parts: usize) -> u128 {
    // C(total + parts - 1, parts - 1)
    let n = (total + parts - 1) as u128;
    let k = (parts - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn enumerate_compositions(
    total: usize,
    parts: usize,
    scratch: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    fn rec(
        remaining: usize,
        index: usize,
        parts: usize,
        scratch: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if index == parts - 1 {
            scratch[index] = remaining;
            visit(scratch);
            return;
        }
        for take in 0..=remaining {
            scratch[index] = take;
            rec(remaining - take, index + 1, parts, scratch, visit);
        }
    }
    rec(total, 0, parts, scratch, visit);
}

/// The two rate pairs every nonempty region contains:
/// (min{C_Sh(W), min_s C_Sh(V_s)}, 0) and (0, C_Sh(W)).
pub fn corner_points(spec: &SavbcSpec, tol: f64) -> Result<(RatePair, RatePair), RegionError> {
    let cw = shannon_capacity(spec.w(), tol)?.0;
    let (cv, _) = min_state_capacity(spec.family(), tol)?;
    Ok((
        RatePair::new(cw.min(cv.0), 0.0),
        RatePair::new(0.0, cw),
    ))
}

/// The triangle with legs C_Sh(W) that contains the whole region.
pub fn bounding_triangle(spec: &SavbcSpec, tol: f64) -> Result<RateRegion, RegionError> {
    let c = shannon_capacity(spec.w(), tol)?.0;
    if c <= 1e-12 {
        return Ok(RateRegion::from_points(&[RatePair::new(0.0, 0.0)]));
    }
    Ok(RateRegion::from_points(&[
        RatePair::new(0.0, 0.0),
        RatePair::new(c, 0.0),
        RatePair::new(0.0, c),
    ]))
}

/// Report of the Q-absorption check: substituting the merged auxiliary
/// Ũ = (U,Q) into the Q-free bounds must dominate the Q-conditioned
/// bounds, per the three proof chains.
#[derive(Debug, Clone, Serialize)]
pub struct QAbsorptionReport {
    pub samples: usize,
    pub max_violation_common: f64,
    pub max_violation_private: f64,
    pub max_violation_sum: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_q_absorption(
    spec: &SavbcSpec,
    u_size: usize,
    q_size: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<QAbsorptionReport, RegionError> {
    let fw_tol = (tol * 1e-2).clamp(1e-13, 1e-10);
    let mut worst_common: f64 = 0.0;
    let mut worst_private: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for sample in 0..samples {
        let mut rng = stream_rng(seed, 0xAB50, sample as u64);
        let probs = dirichlet_uniform(&mut rng, u_size * spec.x_size() * q_size);
        let aux = AuxiliaryJoint::with_q(u_size, spec.x_size(), q_size, probs)
            .map_err(RegionError::Measure)?;
        let folded = aux.fold_q_into_u();

        let with_q = min_state_mi_certified(&aux, spec.family(), fw_tol)?;
        let merged = min_state_mi_certified(&folded, spec.family(), fw_tol)?;
        worst_common = worst_common.max(with_q.value - merged.value);

        let private_q = mi_x_y_given_u_q(&aux, spec.w())?.0;
        let private_merged = mi_x_y_given_u_q(&folded, spec.w())?.0;
        worst_private = worst_private.max((private_q - private_merged).abs());

        let sum_q = mi_x_y_given_q(&aux, spec.w())?.0;
        let sum_plain = mi_x_y(&aux, spec.w())?.0;
        worst_sum = worst_sum.max(sum_q - sum_plain);
    }
    let pass = worst_common <= tol && worst_private <= tol && worst_sum <= tol;
    Ok(QAbsorptionReport {
        samples,
        max_violation_common: worst_common,
        max_violation_private: worst_private,
        max_violation_sum: worst_sum,
        tolerance: tol,
        pass,
    })
}

/// Report of the inner/outer equivalence check: per-sample polytope
/// containment and the global agreement between the hull of outer
/// polytopes and the hull of the case-split witness constructions.
#[derive(Debug, Clone, Serialize)]
pub struct InnerOuterReport {
    pub samples: usize,
    pub containment_violations: usize,
    pub max_containment_violation: f64,
    pub worst_sample: Option<usize>,
    pub global_distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_inner_outer(
    spec: &SavbcSpec,
    u_size: usize,
    q_size: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<InnerOuterReport, RegionError> {
    let fw_tol = 1e-10;
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    let mut worst_sample = None;
    let mut outer_pool: Vec<RatePair> = vec![RatePair::new(0.0, 0.0)];
    let mut witness_pool: Vec<RatePair> = vec![RatePair::new(0.0, 0.0)];
    for sample in 0..samples {
        let mut rng = stream_rng(seed, 0x10E8, sample as u64);
        let probs = dirichlet_uniform(&mut rng, u_size * spec.x_size() * q_size);
        let aux = AuxiliaryJoint::with_q(u_size, spec.x_size(), q_size, probs)
            .map_err(RegionError::Measure)?;
        let b = inner_bounds(&aux, spec, fw_tol)?;
        let inner = bounded_polytope(b.common_max, Some(b.private_max), &[b.sum_max]);
        let outer = bounded_polytope(
            b.common_max,
            None,
            &[b.private_max + b.common_max, b.sum_max],
        );
        for &v in inner.vertices() {
            let excess = outer.distance_to(v);
            if excess > 1e-9 {
                violations += 1;
                if excess > worst {
                    worst = excess;
                    worst_sample = Some(sample);
                }
            }
        }
        outer_pool.extend_from_slice(outer.vertices());
        // case-split witnesses drawn from the inner polytope and the
        // achievable axis point
        witness_pool.extend_from_slice(inner.vertices());
        if b.common_max + b.private_max >= b.sum_max {
            witness_pool.push(RatePair::new(0.0, b.sum_max));
        } else {
            witness_pool.push(RatePair::new(0.0, b.common_max + b.private_max));
        }
    }
    let global_distance = region_distance(
        &RateRegion::from_points(&outer_pool),
        &RateRegion::from_points(&witness_pool),
    );
    let pass = violations == 0 && global_distance <= tol;
    Ok(InnerOuterReport {
        samples,
        containment_violations: violations,
        max_containment_violation: worst,
        worst_sample,
        global_distance,
        tolerance: tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{StateFamily, StochasticMatrix};
    use crate::measures::binary_entropy;

    fn bsc(p: f64) -> StochasticMatrix {
        StochasticMatrix::bsc(p).unwrap()
    }

    fn bsc_spec(p: f64, states: &[f64]) -> SavbcSpec {
        SavbcSpec::new(
            bsc(p),
            StateFamily::new(states.iter().map(|&s| bsc(s)).collect()).unwrap(),
        )
        .unwrap()
    }

    fn small_budget(seed: u64) -> SearchBudget {
        SearchBudget {
            directions: 12,
            restarts: 4,
            max_iters: 300,
            u_size: None,
            seed,
        }
    }

    #[test]
    fn inner_polytope_independent_u_is_a_segment() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let region = inner_polytope(&aux, &spec, 1e-9).unwrap();
        // rc pinned to zero, rp up to I(X;Y)
        let expected_rp = 1.0 - binary_entropy(0.1).unwrap().0;
        assert!(region.vertices().len() == 2);
        for v in region.vertices() {
            assert!(v.rc.abs() < 1e-9);
        }
        let top = region
            .vertices()
            .iter()
            .map(|v| v.rp)
            .fold(0.0f64, f64::max);
        assert!((top - expected_rp).abs() < 1e-9);
    }

    #[test]
    fn inner_polytope_u_equals_x_is_a_common_rate_segment() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::u_equals_x(&[0.5, 0.5]).unwrap();
        let region = inner_polytope(&aux, &spec, 1e-9).unwrap();
        let expected_rc = 1.0 - binary_entropy(0.2).unwrap().0;
        // I(X;Y|U) = 0, so the polytope collapses to a segment on the rc axis
        let max_rc = region
            .vertices()
            .iter()
            .map(|v| v.rc)
            .fold(0.0f64, f64::max);
        assert!((max_rc - expected_rc).abs() < 1e-9);
        for v in region.vertices() {
            assert!(v.rp.abs() < 1e-9);
        }
    }

    #[test]
    fn inner_polytope_deterministic_u_gives_private_only() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::independent(&[1.0], &[0.5, 0.5]).unwrap();
        let region = inner_polytope(&aux, &spec, 1e-9).unwrap();
        let expected = 1.0 - binary_entropy(0.1).unwrap().0;
        let top = region
            .vertices()
            .iter()
            .map(|v| v.rp)
            .fold(0.0f64, f64::max);
        assert!((top - expected).abs() < 1e-9);
        for v in region.vertices() {
            assert!(v.rc.abs() < 1e-9);
        }
    }

    #[test]
    fn outer_polytope_with_point_mass_q_matches_plain_bounds() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        let aux2 = AuxiliaryJoint::from_rows(vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        // embed the same joint with a degenerate Q axis
        let mut probs = Vec::new();
        for u in 0..2 {
            for x in 0..2 {
                probs.push(aux2.prob(u, x, 0));
                probs.push(0.0);
            }
        }
        let aux3 = AuxiliaryJoint::with_q(2, 2, 2, probs).unwrap();
        let a = outer_polytope(&aux2, &spec, 1e-10).unwrap();
        let b = outer_polytope(&aux3, &spec, 1e-10).unwrap();
        assert!(region_distance(&a, &b) < 1e-8);
    }

    #[test]
    fn outer_polytope_contains_inner() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::u_equals_x(&[0.5, 0.5]).unwrap();
        let inner = inner_polytope(&aux, &spec, 1e-9).unwrap();
        let outer = outer_polytope(&aux, &spec, 1e-9).unwrap();
        for &v in inner.vertices() {
            assert!(outer.contains(v, 1e-9));
        }
    }

    #[test]
    fn outer_polytope_independent_u_is_a_private_segment() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let region = outer_polytope(&aux, &spec, 1e-9).unwrap();
        for v in region.vertices() {
            assert!(v.rc.abs() < 1e-9);
        }
        let expected = 1.0 - binary_entropy(0.1).unwrap().0;
        let top = region
            .vertices()
            .iter()
            .map(|v| v.rp)
            .fold(0.0f64, f64::max);
        assert!((top - expected).abs() < 1e-9);
    }

    #[test]
    fn corner_points_examples() {
        let spec = bsc_spec(0.1, &[0.2]);
        let (lower, upper) = corner_points(&spec, 1e-9).unwrap();
        assert!((lower.rc - (1.0 - binary_entropy(0.2).unwrap().0)).abs() < 1e-6);
        assert_eq!(lower.rp, 0.0);
        assert!((upper.rp - (1.0 - binary_entropy(0.1).unwrap().0)).abs() < 1e-6);

        let degenerate = bsc_spec(0.0, &[0.5]);
        let (lower, upper) = corner_points(&degenerate, 1e-9).unwrap();
        assert!(lower.rc.abs() < 1e-6);
        assert!((upper.rp - 1.0).abs() < 1e-6);

        // the minimum picks C_Sh(W) when W is the worse channel
        let reversed = bsc_spec(0.2, &[0.1]);
        let (lower, upper) = corner_points(&reversed, 1e-9).unwrap();
        assert!((lower.rc - (1.0 - binary_entropy(0.2).unwrap().0)).abs() < 1e-6);
        assert!((upper.rp - (1.0 - binary_entropy(0.2).unwrap().0)).abs() < 1e-6);
    }

    #[test]
    fn bounding_triangle_examples() {
        let noiseless = bsc_spec(0.0, &[0.2]);
        let tri = bounding_triangle(&noiseless, 1e-9).unwrap();
        assert_eq!(tri.vertices().len(), 3);
        assert!(tri.contains(RatePair::new(0.999, 0.0), 1e-6));

        let useless = bsc_spec(0.5, &[0.2]);
        let origin = bounding_triangle(&useless, 1e-9).unwrap();
        assert_eq!(origin.vertices().len(), 1);

        let faded = bounding_triangle(&bsc_spec(0.1, &[0.2]), 1e-9).unwrap();
        let leg = 1.0 - binary_entropy(0.1).unwrap().0;
        assert!(faded.contains(RatePair::new(leg - 1e-7, 0.0), 1e-6));
        assert!(!faded.contains(RatePair::new(leg + 1e-3, 0.0), 1e-6));
    }

    #[test]
    fn compute_region_noiseless_is_unit_triangle() {
        let spec = bsc_spec(0.0, &[0.0]);
        let result = compute_region(&spec, &small_budget(3), 1e-6).unwrap();
        let triangle = RateRegion::from_points(&[
            RatePair::new(0.0, 0.0),
            RatePair::new(1.0, 0.0),
            RatePair::new(0.0, 1.0),
        ]);
        assert!(region_distance(&result.region, &triangle) < 1e-5);
    }

    #[test]
    fn compute_region_useless_w_collapses_to_origin() {
        let w = StochasticMatrix::validate(vec![vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let spec = SavbcSpec::new(w, StateFamily::new(vec![bsc(0.1)]).unwrap()).unwrap();
        let result = compute_region(&spec, &small_budget(5), 1e-6).unwrap();
        for v in result.region.vertices() {
            assert!(v.rc < 1e-6 && v.rp < 1e-6);
        }
    }

    #[test]
    fn brute_force_step_one_hulls_point_masses() {
        let spec = bsc_spec(0.1, &[0.2]);
        let region = brute_force_region(&spec, 2, 1).unwrap();
        // point-mass auxiliaries make U deterministic, so rc = 0 and the
        // hull is the private segment up to max_x I(X;Y) = 0 for a point
        // mass on x... the hull over all 4 point masses is degenerate
        for v in region.vertices() {
            assert!(v.rc.abs() < 1e-9);
            assert!(v.rp.abs() < 1e-9);
        }
    }

    #[test]
    fn brute_force_grids_nest() {
        let spec = bsc_spec(0.1, &[0.2]);
        let coarse = brute_force_region(&spec, 2, 2).unwrap();
        let mid = brute_force_region(&spec, 2, 4).unwrap();
        let fine = brute_force_region(&spec, 2, 8).unwrap();
        for &v in coarse.vertices() {
            assert!(mid.contains(v, 1e-9));
        }
        for &v in mid.vertices() {
            assert!(fine.contains(v, 1e-9));
        }
    }

    #[test]
    fn brute_force_guard_rejects_huge_grids() {
        let spec = bsc_spec(0.1, &[0.2]);
        assert!(matches!(
            brute_force_region(&spec, 4, 200),
            Err(RegionError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn compute_region_contains_brute_force_region() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        let result = compute_region(
            &spec,
            &SearchBudget {
                u_size: Some(2),
                directions: 32,
                ..small_budget(11)
            },
            1e-6,
        )
        .unwrap();
        let brute = brute_force_region(&spec, 2, 8).unwrap();
        for &v in brute.vertices() {
            assert!(
                result.region.contains(v, 2e-3),
                "brute-force vertex ({}, {}) escapes the searched region",
                v.rc,
                v.rp
            );
        }
    }

    #[test]
    fn enlarging_the_family_never_grows_the_region() {
        let smaller = bsc_spec(0.1, &[0.1]);
        let larger = bsc_spec(0.1, &[0.1, 0.3]);
        let a = compute_region(&smaller, &small_budget(17), 1e-6).unwrap();
        let b = compute_region(&larger, &small_budget(17), 1e-6).unwrap();
        for &v in b.region.vertices() {
            assert!(a.region.contains(v, 1e-3));
        }
    }

    #[test]
    fn q_absorption_point_mass_is_tight() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        // q_size = 1 makes all three comparisons equalities
        let report = verify_q_absorption(&spec, 2, 1, 20, 7, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_violation_common.abs() < 1e-9);
        assert!(report.max_violation_private.abs() < 1e-12);
        assert!(report.max_violation_sum.abs() < 1e-12);
    }

    #[test]
    fn q_absorption_holds_on_random_samples() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        let report = verify_q_absorption(&spec, 2, 2, 100, 13, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
        let wider = verify_q_absorption(&spec, 2, 3, 50, 29, 1e-9).unwrap();
        assert!(wider.pass, "{wider:?}");
    }

    #[test]
    fn inner_outer_point_mass_u_gives_common_free_segments() {
        let spec = bsc_spec(0.1, &[0.2]);
        let aux = AuxiliaryJoint::independent(&[1.0], &[0.5, 0.5]).unwrap();
        let inner = inner_polytope(&aux, &spec, 1e-9).unwrap();
        let outer = outer_polytope(&aux, &spec, 1e-9).unwrap();
        for v in inner.vertices().iter().chain(outer.vertices()) {
            assert!(v.rc.abs() < 1e-9);
        }
    }

    #[test]
    fn inner_outer_verification_passes() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        let report = verify_inner_outer(&spec, 2, 2, 100, 3, 1e-2).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.containment_violations, 0);
        assert!(report.global_distance < 1e-6);
    }

    #[test]
    fn region_vertices_are_nonnegative_and_inside_triangle() {
        let spec = bsc_spec(0.1, &[0.05, 0.2]);
        let result = compute_region(&spec, &small_budget(23), 1e-6).unwrap();
        let triangle = bounding_triangle(&spec, 1e-9).unwrap();
        for &v in result.region.vertices() {
            assert!(v.rc >= 0.0 && v.rp >= 0.0);
            assert!(triangle.contains(v, 1e-6));
        }
        let (lower, upper) = corner_points(&spec, 1e-9).unwrap();
        assert!(result.region.contains(lower, 1e-3));
        assert!(result.region.contains(upper, 1e-3));
    }
}
