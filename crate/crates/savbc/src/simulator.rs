//! Desk-scale Monte-Carlo embodiment of the operational model:
//! superposition codebooks, exhaustive maximum-likelihood decoding, the
//! greedy per-index adversary from the converse construction, and an
//! exhaustive adversary over vertex-valued state sequences.
//!
//! The simulator is a qualitative instrument. At blocklengths up to 16
//! it demonstrates error trends inside versus outside the region; it
//! cannot certify capacity.
//!
//! Per-trial randomness is drawn from a stream derived from
//! (seed, trial index), in a pinned order: common message, private
//! message, one uniform per symbol for Y, then per symbol the state draw
//! (mixed plans only) and one uniform for Z. Trials are therefore
//! independent and any parallel schedule reproduces the sequential
//! estimates; the exhaustive scan reuses the same Z uniforms across all
//! state sequences, so its per-sequence estimates match standalone runs
//! exactly.

use crate::channels::{ChannelError, StateFamily, StateWeights, StochasticMatrix};
use crate::measures::{min_state_mi, AuxiliaryJoint, MeasureError};
use crate::util::{draw_index, stream_rng};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Blocklength guard.
pub const MAX_BLOCKLENGTH: usize = 16;

/// Guard on enumerated state sequences for the exhaustive adversary.
pub const MAX_STATE_SEQUENCES: u64 = 4096;

/// Guard on the number of message pairs.
const MAX_MESSAGE_PAIRS: u64 = 1 << 20;

const TRIAL_LANE: u64 = 0x51;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("{what} too large: {got} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        got: u64,
        limit: u64,
    },
    #[error("degenerate auxiliary joint: {0}")]
    DegenerateAux(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Cloud-center/satellite codebook drawn i.i.d. from an auxiliary joint.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionCode {
    n: usize,
    u_size: usize,
    x_size: usize,
    rc: f64,
    rp: f64,
    seed: u64,
    /// cloud[m_c][i] is the u-symbol of cloud center m_c at index i
    cloud: Vec<Vec<usize>>,
    /// satellites[m_c][m_p][i] is the transmitted x-symbol
    satellites: Vec<Vec<Vec<usize>>>,
    /// design conditional p(x|u) used by the robust decoder
    px_given_u: Vec<Vec<f64>>,
}

/// Message count for a rate: |M| = max(1, round(2^{nR})).
pub fn message_count(n: usize, rate: f64) -> u64 {
    ((n as f64 * rate).exp2().round() as u64).max(1)
}

impl SuperpositionCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn common_count(&self) -> usize {
        self.cloud.len()
    }

    pub fn private_count(&self) -> usize {
        self.satellites[0].len()
    }

    pub fn rates(&self) -> (f64, f64) {
        (self.rc, self.rp)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cloud(&self) -> &[Vec<usize>] {
        &self.cloud
    }

    pub fn satellites(&self) -> &[Vec<Vec<usize>>] {
        &self.satellites
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    /// Builds a code from explicit codebooks, for hand-crafted decoding
    /// experiments. Shapes are validated; rates are taken at face value.
    pub fn from_parts(
        cloud: Vec<Vec<usize>>,
        satellites: Vec<Vec<Vec<usize>>>,
        px_given_u: Vec<Vec<f64>>,
        u_size: usize,
        x_size: usize,
        rc: f64,
        rp: f64,
    ) -> Result<Self, SimulatorError> {
        let m_c = cloud.len();
        if m_c == 0 || satellites.len() != m_c {
            return Err(SimulatorError::LengthMismatch {
                expected: m_c.max(1),
                got: satellites.len(),
            });
        }
        let n = cloud[0].len();
        if n == 0 || n > MAX_BLOCKLENGTH {
            return Err(SimulatorError::TooLarge {
                what: "blocklength",
                got: n as u64,
                limit: MAX_BLOCKLENGTH as u64,
            });
        }
        let m_p = satellites[0].len();
        for row in &cloud {
            if row.len() != n || row.iter().any(|&u| u >= u_size) {
                return Err(SimulatorError::DegenerateAux(
                    "cloud symbols out of alphabet".into(),
                ));
            }
        }
        for sats in &satellites {
            if sats.len() != m_p {
                return Err(SimulatorError::LengthMismatch {
                    expected: m_p,
                    got: sats.len(),
                });
            }
            for x in sats {
                if x.len() != n || x.iter().any(|&v| v >= x_size) {
                    return Err(SimulatorError::DegenerateAux(
                        "satellite symbols out of alphabet".into(),
                    ));
                }
            }
        }
        if px_given_u.len() != u_size || px_given_u.iter().any(|r| r.len() != x_size) {
            return Err(SimulatorError::LengthMismatch {
                expected: u_size,
                got: px_given_u.len(),
            });
        }
        Ok(Self {
            n,
            u_size,
            x_size,
            rc,
            rp,
            seed: 0,
            cloud,
            satellites,
            px_given_u,
        })
    }
}

/// Draws a superposition codebook: cloud centers i.i.d. from the U
/// marginal, satellites i.i.d. from p(x|u) given their cloud.
/// Deterministic in the seed.
pub fn generate_code(
    aux: &AuxiliaryJoint,
    n: usize,
    rc: f64,
    rp: f64,
    seed: u64,
) -> Result<SuperpositionCode, SimulatorError> {
    if n == 0 || n > MAX_BLOCKLENGTH {
        return Err(SimulatorError::TooLarge {
            what: "blocklength",
            got: n as u64,
            limit: MAX_BLOCKLENGTH as u64,
        });
    }
    if aux.q_size() != 1 {
        return Err(SimulatorError::DegenerateAux(
            "codebooks are drawn from a joint without time sharing".into(),
        ));
    }
    let p_u = aux.p_u();
    if p_u.iter().all(|&v| v <= 0.0) {
        return Err(SimulatorError::DegenerateAux("p_U has empty support".into()));
    }
    let m_c = message_count(n, rc);
    let m_p = message_count(n, rp);
    if m_c.saturating_mul(m_p) > MAX_MESSAGE_PAIRS {
        return Err(SimulatorError::TooLarge {
            what: "message pairs",
            got: m_c.saturating_mul(m_p),
            limit: MAX_MESSAGE_PAIRS,
        });
    }
    let px_given_u = aux.x_given_u();
    let mut rng = stream_rng(seed, 0xC0DE, 0);
    let mut cloud = Vec::with_capacity(m_c as usize);
    let mut satellites = Vec::with_capacity(m_c as usize);
    for _ in 0..m_c {
        let centers: Vec<usize> = (0..n).map(|_| draw_index(&p_u, rng.random())).collect();
        let mut sats = Vec::with_capacity(m_p as usize);
        for _ in 0..m_p {
            let x: Vec<usize> = centers
                .iter()
                .map(|&u| draw_index(&px_given_u[u], rng.random()))
                .collect();
            sats.push(x);
        }
        cloud.push(centers);
        satellites.push(sats);
    }
    Ok(SuperpositionCode {
        n,
        u_size: aux.u_size(),
        x_size: aux.x_size(),
        rc,
        rp,
        seed,
        cloud,
        satellites,
        px_given_u,
    })
}

/// Exhaustive maximum-likelihood decoding of the ordinary receiver's
/// observation over all message pairs; ties break toward the smallest
/// (m_c, m_p) pair.
pub fn decode_y(
    code: &SuperpositionCode,
    y: &[usize],
    w: &StochasticMatrix,
) -> Result<(usize, usize), SimulatorError> {
    if y.len() != code.n {
        return Err(SimulatorError::LengthMismatch {
            expected: code.n,
            got: y.len(),
        });
    }
    let mut best = (0usize, 0usize);
    let mut best_ll = f64::NEG_INFINITY;
    for (mc, sats) in code.satellites.iter().enumerate() {
        for (mp, x) in sats.iter().enumerate() {
            let mut ll = 0.0;
            for (xi, yi) in x.iter().zip(y) {
                let p = w.prob(*xi, *yi);
                ll += if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
            }
            if ll > best_ll {
                best_ll = ll;
                best = (mc, mp);
            }
        }
    }
    Ok(best)
}

/// Log-likelihoods are carried as integers (units of 2^-40 nats) so that
/// the exhaustive scan's incremental updates are exact and break ties
/// identically to a fresh summation.
const LL_SCALE: f64 = (1u64 << 40) as f64;
/// Sentinel for a zero-probability transition; one of these outweighs
/// any all-positive block likelihood and sixteen of them cannot
/// overflow.
const LL_ZERO: i64 = -(1i64 << 54);

fn quantize_ln(p: f64) -> i64 {
    if p > 0.0 {
        (p.ln().max(-745.0) * LL_SCALE) as i64
    } else {
        LL_ZERO
    }
}

/// Quantized tables ln p(z|u) per symbol index under a nominal channel
/// sequence, marginalizing the satellite through p(x|u).
fn cloud_loglik_tables(
    code: &SuperpositionCode,
    nominal: &[StochasticMatrix],
) -> Result<Vec<i64>, SimulatorError> {
    if nominal.len() != code.n {
        return Err(SimulatorError::LengthMismatch {
            expected: code.n,
            got: nominal.len(),
        });
    }
    let z_size = nominal[0].output_size();
    let mut tables = vec![0i64; code.n * code.u_size * z_size];
    for (i, ch) in nominal.iter().enumerate() {
        if ch.input_size() != code.x_size {
            return Err(SimulatorError::LengthMismatch {
                expected: code.x_size,
                got: ch.input_size(),
            });
        }
        for u in 0..code.u_size {
            for z in 0..z_size {
                let mut p = 0.0;
                for x in 0..code.x_size {
                    p += code.px_given_u[u][x] * ch.prob(x, z);
                }
                tables[(i * code.u_size + u) * z_size + z] = quantize_ln(p);
            }
        }
    }
    Ok(tables)
}

/// Maximum-likelihood decoding of the robust receiver's observation over
/// cloud centers, under a caller-supplied nominal per-symbol channel
/// list (the decoder is fixed before the state sequence is chosen). Ties
/// break toward the smallest index.
pub fn decode_z(
    code: &SuperpositionCode,
    z: &[usize],
    nominal: &[StochasticMatrix],
) -> Result<usize, SimulatorError> {
    if z.len() != code.n {
        return Err(SimulatorError::LengthMismatch {
            expected: code.n,
            got: z.len(),
        });
    }
    let tables = cloud_loglik_tables(code, nominal)?;
    let z_size = nominal[0].output_size();
    let mut best = 0usize;
    let mut best_ll = i64::MIN;
    for (mc, centers) in code.cloud.iter().enumerate() {
        let mut ll = 0i64;
        for (i, &u) in centers.iter().enumerate() {
            ll += tables[(i * code.u_size + u) * z_size + z[i]];
        }
        if ll > best_ll {
            best_ll = ll;
            best = mc;
        }
    }
    Ok(best)
}

/// Per-symbol state choice: either a fixed vertex per index or a mixture
/// realized by per-trial sampling.
#[derive(Debug, Clone)]
pub enum StatePlan {
    Vertices(Vec<usize>),
    Mixed(Vec<StateWeights>),
}

impl StatePlan {
    fn len(&self) -> usize {
        match self {
            StatePlan::Vertices(v) => v.len(),
            StatePlan::Mixed(v) => v.len(),
        }
    }

    fn validate(&self, family: &StateFamily, n: usize) -> Result<(), SimulatorError> {
        if self.len() != n {
            return Err(SimulatorError::LengthMismatch {
                expected: n,
                got: self.len(),
            });
        }
        match self {
            StatePlan::Vertices(seq) => {
                if seq.iter().any(|&s| s >= family.len()) {
                    return Err(SimulatorError::LengthMismatch {
                        expected: family.len(),
                        got: seq.iter().copied().max().unwrap_or(0) + 1,
                    });
                }
            }
            StatePlan::Mixed(weights) => {
                if weights.iter().any(|w| w.len() != family.len()) {
                    return Err(SimulatorError::LengthMismatch {
                        expected: family.len(),
                        got: weights.iter().map(StateWeights::len).max().unwrap_or(0),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Monte-Carlo error estimate with a 95% binomial confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub p_err: f64,
    pub trials: u64,
    pub half_width: f64,
}

impl ErrorEstimate {
    fn from_counts(errors: u64, trials: u64) -> Self {
        let p = errors as f64 / trials as f64;
        Self {
            p_err: p,
            trials,
            half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Greedy adversary from the converse construction: at each index it
/// forms the empirical per-index joint of (cloud symbol, input symbol)
/// over the codebook and picks the weights minimizing I(U_i;Z_i).
pub fn greedy_adversary(
    code: &SuperpositionCode,
    family: &StateFamily,
    tol: f64,
) -> Result<Vec<StateWeights>, SimulatorError> {
    let pairs = (code.common_count() * code.private_count()) as f64;
    let mut plan = Vec::with_capacity(code.n);
    for i in 0..code.n {
        let mut joint = vec![vec![0.0; code.x_size]; code.u_size];
        for (mc, sats) in code.satellites.iter().enumerate() {
            let u = code.cloud[mc][i];
            for x in sats {
                joint[u][x[i]] += 1.0 / pairs;
            }
        }
        let empirical = AuxiliaryJoint::from_rows(joint)?;
        let (_, weights) = min_state_mi(&empirical, family, tol)?;
        plan.push(weights);
    }
    Ok(plan)
}

/// Averages a state plan into one channel, the default nominal law handed
/// to the robust decoder.
pub fn average_channel(
    family: &StateFamily,
    plan: &StatePlan,
) -> Result<StochasticMatrix, SimulatorError> {
    plan.validate(family, plan.len())?;
    let n = plan.len() as f64;
    let (ni, no) = (family.input_size(), family.output_size());
    let mut rows = vec![vec![0.0; no]; ni];
    let mut add = |m: &StochasticMatrix, scale: f64| {
        for x in 0..ni {
            for z in 0..no {
                rows[x][z] += scale * m.prob(x, z);
            }
        }
    };
    match plan {
        StatePlan::Vertices(seq) => {
            for &s in seq {
                add(&family.vertices()[s], 1.0 / n);
            }
        }
        StatePlan::Mixed(weights) => {
            for w in weights {
                let mixed = family.mix(w)?;
                add(&mixed, 1.0 / n);
            }
        }
    }
    Ok(StochasticMatrix::validate(rows)?)
}

struct Trial {
    mc: usize,
    mp: usize,
    y: Vec<usize>,
    /// uniforms reserved for the Z draws, shared across state sequences
    z_uniforms: Vec<f64>,
}

/// Draws the plan-independent part of a trial in the pinned stream order.
fn draw_trial(code: &SuperpositionCode, w: &StochasticMatrix, seed: u64, trial: u64) -> Trial {
    let mut rng = stream_rng(seed, TRIAL_LANE, trial);
    let mc = (rng.random::<f64>() * code.common_count() as f64) as usize % code.common_count();
    let mp = (rng.random::<f64>() * code.private_count() as f64) as usize % code.private_count();
    let x = &code.satellites[mc][mp];
    let y: Vec<usize> = x
        .iter()
        .map(|&xi| draw_index(w.row(xi), rng.random()))
        .collect();
    let z_uniforms: Vec<f64> = (0..code.n).map(|_| rng.random()).collect();
    Trial {
        mc,
        mp,
        y,
        z_uniforms,
    }
}

/// Message-averaged error estimate under a fixed state plan: Y and Z are
/// drawn conditionally independently given the input and the state, and
/// a trial errs when either decoder misses its message set.
pub fn estimate_error(
    code: &SuperpositionCode,
    w: &StochasticMatrix,
    family: &StateFamily,
    plan: &StatePlan,
    nominal: &[StochasticMatrix],
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate, SimulatorError> {
    if trials == 0 {
        return Err(SimulatorError::TooLarge {
            what: "trials",
            got: 0,
            limit: u64::MAX,
        });
    }
    plan.validate(family, code.n)?;
    let tables = cloud_loglik_tables(code, nominal)?;
    let z_size = nominal[0].output_size();
    let mut errors = 0u64;
    for t in 0..trials {
        let mut rng = stream_rng(seed, TRIAL_LANE, t);
        let mc = (rng.random::<f64>() * code.common_count() as f64) as usize
            % code.common_count();
        let mp = (rng.random::<f64>() * code.private_count() as f64) as usize
            % code.private_count();
        let x = &code.satellites[mc][mp];
        let y: Vec<usize> = x
            .iter()
            .map(|&xi| draw_index(w.row(xi), rng.random()))
            .collect();
        let z: Vec<usize> = match plan {
            StatePlan::Vertices(seq) => x
                .iter()
                .zip(seq)
                .map(|(&xi, &s)| draw_index(family.vertices()[s].row(xi), rng.random()))
                .collect(),
            StatePlan::Mixed(weights) => x
                .iter()
                .zip(weights)
                .map(|(&xi, wi)| {
                    let s = draw_index(wi.as_slice(), rng.random());
                    draw_index(family.vertices()[s].row(xi), rng.random())
                })
                .collect(),
        };
        let y_hat = decode_y(code, &y, w)?;
        let mut z_best = 0usize;
        let mut z_ll = i64::MIN;
        for (cand, centers) in code.cloud.iter().enumerate() {
            let mut ll = 0i64;
            for (i, &u) in centers.iter().enumerate() {
                ll += tables[(i * code.u_size + u) * z_size + z[i]];
            }
            if ll > z_ll {
                z_ll = ll;
                z_best = cand;
            }
        }
        if y_hat != (mc, mp) || z_best != mc {
            errors += 1;
        }
    }
    Ok(ErrorEstimate::from_counts(errors, trials))
}

/// Reflected mixed-radix Gray enumeration: all `radix^length` digit
/// vectors in an order where consecutive vectors differ in one digit.
/// Returns the visit-order vectors and the flip list (position, old,
/// new).
fn gray_sequence(radix: usize, length: usize) -> (Vec<Vec<u8>>, Vec<(usize, u8, u8)>) {
    let mut digits = vec![0u8; length];
    let mut dir = vec![1i8; length];
    let mut seqs = vec![digits.clone()];
    let mut flips = Vec::new();
    loop {
        let mut j = 0;
        loop {
            if j == length {
                return (seqs, flips);
            }
            let next = digits[j] as i32 + dir[j] as i32;
            if next >= 0 && next < radix as i32 {
                let old = digits[j];
                digits[j] = next as u8;
                flips.push((j, old, digits[j]));
                seqs.push(digits.clone());
                break;
            }
            dir[j] = -dir[j];
            j += 1;
        }
    }
}

/// Worst vertex-valued state sequence by exhaustive enumeration, with
/// its error estimate. Every sequence is evaluated on the same trial
/// draws (common random numbers), so the returned estimate equals the
/// standalone [`estimate_error`] of the winning sequence under the same
/// seed, and dominates it for every other enumerated sequence.
pub fn exhaustive_adversary(
    code: &SuperpositionCode,
    w: &StochasticMatrix,
    family: &StateFamily,
    nominal: &[StochasticMatrix],
    trials: u64,
    seed: u64,
) -> Result<(Vec<usize>, ErrorEstimate), SimulatorError> {
    let k = family.len();
    let total = (k as u64).checked_pow(code.n as u32).unwrap_or(u64::MAX);
    if total > MAX_STATE_SEQUENCES {
        return Err(SimulatorError::TooLarge {
            what: "state sequences",
            got: total,
            limit: MAX_STATE_SEQUENCES,
        });
    }
    if trials == 0 {
        return Err(SimulatorError::TooLarge {
            what: "trials",
            got: 0,
            limit: u64::MAX,
        });
    }
    let tables = cloud_loglik_tables(code, nominal)?;
    let z_size = nominal[0].output_size();
    let (seqs, flips) = gray_sequence(k, code.n);
    let m_c = code.common_count();
    let n = code.n;

    let mut counts = vec![0u64; seqs.len()];
    let mut lls = vec![0i64; m_c];
    let mut z_by_vertex = vec![0usize; k * n];
    for t in 0..trials {
        let trial = draw_trial(code, w, seed, t);
        let x = &code.satellites[trial.mc][trial.mp];
        let y_ok = decode_y(code, &trial.y, w)? == (trial.mc, trial.mp);
        for (i, (&xi, &uz)) in x.iter().zip(&trial.z_uniforms).enumerate() {
            for (s, vertex) in family.vertices().iter().enumerate() {
                z_by_vertex[s * n + i] = draw_index(vertex.row(xi), uz);
            }
        }
        // sequence 0: all digits zero
        for (cand, centers) in code.cloud.iter().enumerate() {
            let mut ll = 0i64;
            for (i, &u) in centers.iter().enumerate() {
                ll += tables[(i * code.u_size + u) * z_size + z_by_vertex[i]];
            }
            lls[cand] = ll;
        }
        let mut visit = 0usize;
        let argmax = |lls: &[i64]| {
            let mut best = 0usize;
            let mut best_ll = i64::MIN;
            for (i, &ll) in lls.iter().enumerate() {
                if ll > best_ll {
                    best_ll = ll;
                    best = i;
                }
            }
            best
        };
        if !y_ok || argmax(&lls) != trial.mc {
            counts[visit] += 1;
        }
        for &(pos, old, new) in &flips {
            let z_old = z_by_vertex[old as usize * n + pos];
            let z_new = z_by_vertex[new as usize * n + pos];
            if z_old != z_new {
                for (cand, centers) in code.cloud.iter().enumerate() {
                    let u = centers[pos];
                    let base = (pos * code.u_size + u) * z_size;
                    lls[cand] += tables[base + z_new] - tables[base + z_old];
                }
            }
            visit += 1;
            if !y_ok || argmax(&lls) != trial.mc {
                counts[visit] += 1;
            }
        }
    }
    let mut worst_visit = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[worst_visit] {
            worst_visit = i;
        }
    }
    let sequence: Vec<usize> = seqs[worst_visit].iter().map(|&d| d as usize).collect();
    Ok((
        sequence,
        ErrorEstimate::from_counts(counts[worst_visit], trials),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(p: f64) -> StochasticMatrix {
        StochasticMatrix::bsc(p).unwrap()
    }

    fn family(ps: &[f64]) -> StateFamily {
        StateFamily::new(ps.iter().map(|&p| bsc(p)).collect()).unwrap()
    }

    fn uniform_coupled() -> AuxiliaryJoint {
        AuxiliaryJoint::u_equals_x(&[0.5, 0.5]).unwrap()
    }

    /// Two antipodal codewords with the clouds equal to the codewords.
    fn antipodal_code(n: usize) -> SuperpositionCode {
        SuperpositionCode::from_parts(
            vec![vec![0; n], vec![1; n]],
            vec![vec![vec![0; n]], vec![vec![1; n]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            2,
            2,
            1.0 / n as f64,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_rates_give_a_single_codeword() {
        let code = generate_code(&uniform_coupled(), 4, 0.0, 0.0, 9).unwrap();
        assert_eq!(code.common_count(), 1);
        assert_eq!(code.private_count(), 1);
    }

    #[test]
    fn codebooks_are_deterministic_in_the_seed() {
        let a = generate_code(&uniform_coupled(), 6, 0.3, 0.2, 1234).unwrap();
        let b = generate_code(&uniform_coupled(), 6, 0.3, 0.2, 1234).unwrap();
        let c = generate_code(&uniform_coupled(), 6, 0.3, 0.2, 1235).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn quarter_rates_at_blocklength_four() {
        let code = generate_code(&uniform_coupled(), 4, 0.25, 0.25, 5).unwrap();
        assert_eq!(code.common_count(), 2);
        assert_eq!(code.private_count(), 2);
    }

    #[test]
    fn blocklength_guard() {
        assert!(matches!(
            generate_code(&uniform_coupled(), 17, 0.1, 0.1, 0),
            Err(SimulatorError::TooLarge { .. })
        ));
    }

    #[test]
    fn decode_y_noiseless_returns_the_sent_pair() {
        let code = antipodal_code(3);
        let w = bsc(0.0);
        assert_eq!(decode_y(&code, &[1, 1, 1], &w).unwrap(), (1, 0));
        assert_eq!(decode_y(&code, &[0, 0, 0], &w).unwrap(), (0, 0));
    }

    #[test]
    fn decode_y_single_pair_is_trivial() {
        let code = SuperpositionCode::from_parts(
            vec![vec![0, 1]],
            vec![vec![vec![0, 1]]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            2,
            2,
            0.0,
            0.0,
        )
        .unwrap();
        assert_eq!(decode_y(&code, &[1, 0], &bsc(0.3)).unwrap(), (0, 0));
    }

    #[test]
    fn decode_y_matches_hand_enumeration() {
        // codewords [0,0] and [1,1] under BSC(0.1):
        //   y = [0,1]: both likelihoods 0.9*0.1, tie -> (0,0)
        //   y = [1,1]: 0.1*0.1 vs 0.9*0.9 -> (1,0)
        let code = antipodal_code(2);
        let w = bsc(0.1);
        assert_eq!(decode_y(&code, &[0, 1], &w).unwrap(), (0, 0));
        assert_eq!(decode_y(&code, &[1, 1], &w).unwrap(), (1, 0));
        assert!(matches!(
            decode_y(&code, &[1], &w),
            Err(SimulatorError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn decode_z_cases() {
        let code = antipodal_code(2);
        let noiseless = vec![bsc(0.0); 2];
        assert_eq!(decode_z(&code, &[1, 1], &noiseless).unwrap(), 1);
        assert_eq!(decode_z(&code, &[0, 0], &noiseless).unwrap(), 0);

        // hand enumeration under BSC(0.2): z = [1,0] ties -> cloud 0,
        // z = [1,1] -> cloud 1
        let noisy = vec![bsc(0.2); 2];
        assert_eq!(decode_z(&code, &[1, 0], &noisy).unwrap(), 0);
        assert_eq!(decode_z(&code, &[1, 1], &noisy).unwrap(), 1);

        let single = SuperpositionCode::from_parts(
            vec![vec![0, 0]],
            vec![vec![vec![0, 0], vec![0, 1]]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            2,
            2,
            0.0,
            0.5,
        )
        .unwrap();
        assert_eq!(decode_z(&single, &[1, 1], &noisy).unwrap(), 0);
    }

    #[test]
    fn greedy_single_vertex_is_constant() {
        let code = generate_code(&uniform_coupled(), 5, 0.2, 0.2, 3).unwrap();
        let plan = greedy_adversary(&code, &family(&[0.2]), 1e-9).unwrap();
        assert_eq!(plan.len(), 5);
        for w in &plan {
            assert_eq!(w.as_slice(), &[1.0]);
        }
    }

    #[test]
    fn greedy_bsc_family_picks_pmax_everywhere() {
        let code = antipodal_code(4);
        let plan = greedy_adversary(&code, &family(&[0.05, 0.2]), 1e-9).unwrap();
        for w in &plan {
            assert!(w.as_slice()[1] > 1.0 - 1e-6, "weights {:?}", w.as_slice());
        }
    }

    #[test]
    fn greedy_xor_family_mixes_to_the_useless_channel() {
        let code = antipodal_code(4);
        let fam = family(&[0.0, 1.0]);
        let plan = greedy_adversary(&code, &fam, 1e-9).unwrap();
        for w in &plan {
            let mixed = fam.mix(w).unwrap();
            for x in 0..2 {
                for z in 0..2 {
                    assert!((mixed.prob(x, z) - 0.5).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn average_channel_of_mixed_plan() {
        let fam = family(&[0.1, 0.3]);
        let plan = StatePlan::Mixed(vec![
            StateWeights::new(vec![1.0, 0.0]).unwrap(),
            StateWeights::new(vec![0.0, 1.0]).unwrap(),
        ]);
        let avg = average_channel(&fam, &plan).unwrap();
        assert_eq!(avg, bsc(0.2));
    }

    #[test]
    fn plans_are_validated_against_the_family() {
        let code = antipodal_code(3);
        let fam = family(&[0.1, 0.2]);
        let nominal = vec![bsc(0.2); 3];
        let out_of_range = StatePlan::Vertices(vec![0, 2, 0]);
        assert!(matches!(
            estimate_error(&code, &bsc(0.1), &fam, &out_of_range, &nominal, 10, 0),
            Err(SimulatorError::LengthMismatch { .. })
        ));
        let wrong_arity = StatePlan::Mixed(vec![
            StateWeights::uniform(3),
            StateWeights::uniform(3),
            StateWeights::uniform(3),
        ]);
        assert!(matches!(
            average_channel(&fam, &wrong_arity),
            Err(SimulatorError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn noiseless_error_is_zero() {
        let code = antipodal_code(3);
        let fam = family(&[0.0]);
        let nominal = vec![bsc(0.0); 3];
        let estimate = estimate_error(
            &code,
            &bsc(0.0),
            &fam,
            &StatePlan::Vertices(vec![0; 3]),
            &nominal,
            500,
            7,
        )
        .unwrap();
        assert_eq!(estimate.p_err, 0.0);
    }

    #[test]
    fn single_message_pair_never_errs() {
        let code = generate_code(&uniform_coupled(), 4, 0.0, 0.0, 11).unwrap();
        let fam = family(&[0.3]);
        let nominal = vec![bsc(0.3); 4];
        let estimate = estimate_error(
            &code,
            &bsc(0.4),
            &fam,
            &StatePlan::Vertices(vec![0; 4]),
            &nominal,
            200,
            13,
        )
        .unwrap();
        assert_eq!(estimate.p_err, 0.0);
    }

    #[test]
    fn estimates_are_deterministic() {
        let code = generate_code(&uniform_coupled(), 6, 0.3, 0.2, 21).unwrap();
        let fam = family(&[0.05, 0.2]);
        let nominal = vec![bsc(0.2); 6];
        let run = || {
            estimate_error(
                &code,
                &bsc(0.1),
                &fam,
                &StatePlan::Vertices(vec![1; 6]),
                &nominal,
                2000,
                99,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn gray_sequence_covers_everything_once() {
        for (k, n) in [(2usize, 5usize), (3, 3), (4, 2)] {
            let (seqs, flips) = gray_sequence(k, n);
            assert_eq!(seqs.len(), k.pow(n as u32));
            assert_eq!(flips.len(), seqs.len() - 1);
            let mut sorted: Vec<Vec<u8>> = seqs.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), seqs.len(), "duplicate sequence for {k}^{n}");
            for pair in seqs.windows(2) {
                let differing = pair[0]
                    .iter()
                    .zip(&pair[1])
                    .filter(|(a, b)| a != b)
                    .count();
                assert_eq!(differing, 1);
            }
        }
    }

    #[test]
    fn exhaustive_single_vertex_returns_the_constant_sequence() {
        let code = antipodal_code(3);
        let fam = family(&[0.2]);
        let nominal = vec![bsc(0.2); 3];
        let (seq, _) =
            exhaustive_adversary(&code, &bsc(0.1), &fam, &nominal, 500, 5).unwrap();
        assert_eq!(seq, vec![0, 0, 0]);
    }

    #[test]
    fn exhaustive_one_symbol_picks_the_worse_channel() {
        let code = antipodal_code(1);
        let fam = family(&[0.05, 0.4]);
        let nominal = vec![bsc(0.4); 1];
        let (seq, estimate) =
            exhaustive_adversary(&code, &bsc(0.0), &fam, &nominal, 4000, 71).unwrap();
        assert_eq!(seq, vec![1]);
        let quiet = estimate_error(
            &code,
            &bsc(0.0),
            &fam,
            &StatePlan::Vertices(vec![0]),
            &nominal,
            4000,
            71,
        )
        .unwrap();
        assert!(estimate.p_err >= quiet.p_err);
    }

    #[test]
    fn exhaustive_estimate_matches_standalone_runs_exactly() {
        let code = generate_code(&uniform_coupled(), 4, 0.3, 0.3, 17).unwrap();
        let fam = family(&[0.05, 0.25]);
        let nominal = vec![bsc(0.25); 4];
        let trials = 1500;
        let seed = 31;
        let (worst, estimate) =
            exhaustive_adversary(&code, &bsc(0.1), &fam, &nominal, trials, seed).unwrap();
        let standalone = estimate_error(
            &code,
            &bsc(0.1),
            &fam,
            &StatePlan::Vertices(worst.clone()),
            &nominal,
            trials,
            seed,
        )
        .unwrap();
        assert_eq!(estimate, standalone);

        // and it dominates the all-quiet sequence on the same draws
        let quiet = estimate_error(
            &code,
            &bsc(0.1),
            &fam,
            &StatePlan::Vertices(vec![0; 4]),
            &nominal,
            trials,
            seed,
        )
        .unwrap();
        assert!(estimate.p_err >= quiet.p_err);
    }

    #[test]
    fn exhaustive_guard_rejects_large_products() {
        let code = antipodal_code(13);
        let fam = family(&[0.05, 0.25]);
        let nominal = vec![bsc(0.25); 13];
        assert!(matches!(
            exhaustive_adversary(&code, &bsc(0.1), &fam, &nominal, 10, 0),
            Err(SimulatorError::TooLarge { .. })
        ));
    }

    #[test]
    fn degradation_monotonicity_for_bsc_states() {
        let code = generate_code(&uniform_coupled(), 8, 0.2, 0.2, 41).unwrap();
        let fam = family(&[0.05, 0.25]);
        let nominal = vec![bsc(0.25); 8];
        let trials = 10_000;
        let noisy = estimate_error(
            &code,
            &bsc(0.1),
            &fam,
            &StatePlan::Vertices(vec![1; 8]),
            &nominal,
            trials,
            53,
        )
        .unwrap();
        let quiet = estimate_error(
            &code,
            &bsc(0.1),
            &fam,
            &StatePlan::Vertices(vec![0; 8]),
            &nominal,
            trials,
            53,
        )
        .unwrap();
        assert!(
            noisy.p_err + 2.0 * (noisy.half_width + quiet.half_width) >= quiet.p_err,
            "noisy {noisy:?} vs quiet {quiet:?}"
        );
    }

    #[test]
    fn y_and_z_draws_factorize_conditionally() {
        // chi-square independence check of (Y, Z) given a fixed input
        // and state, against the product of empirical marginals
        let w = bsc(0.15);
        let v = bsc(0.3);
        let trials = 20_000usize;
        let mut counts = [[0usize; 2]; 2];
        for t in 0..trials {
            let mut rng = stream_rng(77, TRIAL_LANE, t as u64);
            let y = draw_index(w.row(0), rng.random());
            let z = draw_index(v.row(0), rng.random());
            counts[y][z] += 1;
        }
        let total = trials as f64;
        let py: Vec<f64> = (0..2)
            .map(|y| (counts[y][0] + counts[y][1]) as f64 / total)
            .collect();
        let pz: Vec<f64> = (0..2)
            .map(|z| (counts[0][z] + counts[1][z]) as f64 / total)
            .collect();
        let mut chi2 = 0.0;
        for y in 0..2 {
            for z in 0..2 {
                let expected = total * py[y] * pz[z];
                let observed = counts[y][z] as f64;
                chi2 += (observed - expected).powi(2) / expected;
            }
        }
        // df = 1; 10.83 is the 99.9% quantile
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn inside_rates_beat_outside_rates_under_the_greedy_plan() {
        let fam = family(&[0.05, 0.2]);
        let w = bsc(0.1);
        let n = 8;
        let aux = AuxiliaryJoint::binary_superposition(0.09).unwrap();
        let run = |scale: f64| {
            let (rc, rp) = (0.18 * scale, 0.18 * scale);
            let code = generate_code(&aux, n, rc, rp, 7).unwrap();
            let plan = StatePlan::Mixed(greedy_adversary(&code, &fam, 1e-9).unwrap());
            let nominal = vec![average_channel(&fam, &plan).unwrap(); n];
            estimate_error(&code, &w, &fam, &plan, &nominal, 6000, 70).unwrap()
        };
        let inside = run(0.5);
        let outside = run(1.5);
        assert!(
            inside.p_err < outside.p_err,
            "inside {inside:?} vs outside {outside:?}"
        );
    }
}
