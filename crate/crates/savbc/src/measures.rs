//! Entropy and mutual-information kernels on finite alphabets, the
//! auxiliary joint distribution p(U,X,Q), convex minimization of mutual
//! information over a state family's weight simplex, and Shannon capacity
//! via alternating maximization.
//!
//! All logarithms are base 2 and all rates are in bits, with the
//! convention 0·log 0 = 0.

use crate::channels::{renormalize, StateFamily, StateWeights, StochasticMatrix};
use thiserror::Error;

/// Floor applied inside logarithms where a zero probability would
/// otherwise produce an infinite gradient entry.
const LOG_FLOOR: f64 = 1e-300;

/// Sweep cap for the weight-simplex minimization.
const FW_MAX_ITERS: usize = 10_000;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no convergence certificate after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },
}

/// An information quantity in bits (log base 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

fn check_pmf(p: &[f64]) -> Result<(), MeasureError> {
    if p.is_empty() {
        return Err(MeasureError::InvalidPmf("empty".into()));
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(MeasureError::InvalidPmf("negative or non-finite entry".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(MeasureError::InvalidPmf(format!("sums to {sum}")));
    }
    Ok(())
}

/// Shannon entropy −Σ p log2 p of a PMF.
pub fn entropy(p: &[f64]) -> Result<Bits, MeasureError> {
    check_pmf(p)?;
    Ok(Bits(-p.iter().map(|&v| xlog2(v)).sum::<f64>()))
}

/// Binary entropy H_b(p).
pub fn binary_entropy(p: f64) -> Result<Bits, MeasureError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MeasureError::OutOfRange {
            what: "probability",
            value: p,
        });
    }
    Ok(Bits(-xlog2(p) - xlog2(1.0 - p)))
}

/// Binary convolution α ∗ δ = α(1−δ) + (1−α)δ, the crossover probability
/// of two cascaded binary symmetric channels.
pub fn convolve(alpha: f64, delta: f64) -> Result<f64, MeasureError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MeasureError::OutOfRange {
            what: "alpha",
            value: alpha,
        });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(MeasureError::OutOfRange {
            what: "delta",
            value: delta,
        });
    }
    Ok(alpha * (1.0 - delta) + (1.0 - alpha) * delta)
}

/// Mutual information of a two-axis joint stored row-major, in bits.
/// Assumes a valid PMF; callers validate.
fn mi2(p: &[f64], na: usize, nb: usize) -> f64 {
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for a in 0..na {
        for b in 0..nb {
            let v = p[a * nb + b];
            pa[a] += v;
            pb[b] += v;
        }
    }
    let mut info = 0.0;
    for a in 0..na {
        for b in 0..nb {
            let v = p[a * nb + b];
            if v > 0.0 {
                info += v * (v / (pa[a] * pb[b])).log2();
            }
        }
    }
    info.max(0.0)
}

/// Conditional mutual information I(A;B|C) of a three-axis joint stored
/// row-major with C as the last axis.
fn cond_mi3(p: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    let mut pc = vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p[(a * nb + b) * nc + c];
                pac[a * nc + c] += v;
                pbc[b * nc + c] += v;
                pc[c] += v;
            }
        }
    }
    let mut info = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p[(a * nb + b) * nc + c];
                if v > 0.0 {
                    info += v * (v * pc[c] / (pac[a * nc + c] * pbc[b * nc + c])).log2();
                }
            }
        }
    }
    info.max(0.0)
}

/// Dense joint PMF over up to four named axes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self, MeasureError> {
        if dims.is_empty() || dims.len() > 4 || dims.contains(&0) {
            return Err(MeasureError::DimensionMismatch(format!(
                "unsupported axis layout {dims:?}"
            )));
        }
        let expect: usize = dims.iter().product();
        if probs.len() != expect {
            return Err(MeasureError::DimensionMismatch(format!(
                "{} entries for shape {dims:?}",
                probs.len()
            )));
        }
        check_pmf(&probs)?;
        let mut probs = probs;
        renormalize(&mut probs);
        Ok(Self { dims, probs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// I(A;B) of a two-axis joint, clamped to be nonnegative.
pub fn mutual_information(joint: &JointPmf) -> Result<Bits, MeasureError> {
    match joint.dims() {
        &[na, nb] => Ok(Bits(mi2(joint.probs(), na, nb))),
        other => Err(MeasureError::DimensionMismatch(format!(
            "mutual_information expects two axes, got {other:?}"
        ))),
    }
}

/// I(A;B|C) of a three-axis joint (conditioning on the last axis).
pub fn conditional_mi(joint: &JointPmf) -> Result<Bits, MeasureError> {
    match joint.dims() {
        &[na, nb, nc] => Ok(Bits(cond_mi3(joint.probs(), na, nb, nc))),
        other => Err(MeasureError::DimensionMismatch(format!(
            "conditional_mi expects three axes, got {other:?}"
        ))),
    }
}

/// Joint PMF of the auxiliary cloud-center variable U, the channel input
/// X, and an optional time-sharing variable Q. Stored as p(u,x,q) with
/// `q_size == 1` meaning no time sharing.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryJoint {
    u_size: usize,
    x_size: usize,
    q_size: usize,
    probs: Vec<f64>,
}

impl AuxiliaryJoint {
    /// Builds p(u,x) from a row-per-u table.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let u_size = rows.len();
        let x_size = rows.first().map_or(0, Vec::len);
        if u_size == 0 || x_size == 0 || rows.iter().any(|r| r.len() != x_size) {
            return Err(MeasureError::DimensionMismatch(
                "p(u,x) table must be rectangular and nonempty".into(),
            ));
        }
        let probs: Vec<f64> = rows.into_iter().flatten().collect();
        Self::with_q(u_size, x_size, 1, probs)
    }

    /// Builds p(u,x,q) from a flat table indexed `(u*x_size + x)*q_size + q`.
    pub fn with_q(
        u_size: usize,
        x_size: usize,
        q_size: usize,
        probs: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if u_size == 0 || x_size == 0 || q_size == 0 {
            return Err(MeasureError::DimensionMismatch(
                "all axis sizes must be positive".into(),
            ));
        }
        if probs.len() != u_size * x_size * q_size {
            return Err(MeasureError::DimensionMismatch(format!(
                "{} entries for {u_size}x{x_size}x{q_size}",
                probs.len()
            )));
        }
        check_pmf(&probs)?;
        let mut probs = probs;
        renormalize(&mut probs);
        Ok(Self {
            u_size,
            x_size,
            q_size,
            probs,
        })
    }

    /// Uniform joint over U × X.
    pub fn uniform(u_size: usize, x_size: usize) -> Self {
        let n = u_size * x_size;
        Self {
            u_size,
            x_size,
            q_size: 1,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// U = X with input distribution `p_x`.
    pub fn u_equals_x(p_x: &[f64]) -> Result<Self, MeasureError> {
        check_pmf(p_x)?;
        let n = p_x.len();
        let mut probs = vec![0.0; n * n];
        for (x, &px) in p_x.iter().enumerate() {
            probs[x * n + x] = px;
        }
        Self::with_q(n, n, 1, probs)
    }

    /// U independent of X.
    pub fn independent(p_u: &[f64], p_x: &[f64]) -> Result<Self, MeasureError> {
        check_pmf(p_u)?;
        check_pmf(p_x)?;
        let mut probs = Vec::with_capacity(p_u.len() * p_x.len());
        for &pu in p_u {
            for &px in p_x {
                probs.push(pu * px);
            }
        }
        Self::with_q(p_u.len(), p_x.len(), 1, probs)
    }

    /// Binary superposition joint: U uniform on {0,1} and X = U xor a
    /// Bernoulli(alpha) flip.
    pub fn binary_superposition(alpha: f64) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MeasureError::OutOfRange {
                what: "alpha",
                value: alpha,
            });
        }
        Self::from_rows(vec![
            vec![0.5 * (1.0 - alpha), 0.5 * alpha],
            vec![0.5 * alpha, 0.5 * (1.0 - alpha)],
        ])
    }

    /// Absorbs Q into the auxiliary variable: returns p(ũ,x) with
    /// ũ = (u,q) and no time-sharing axis.
    pub fn fold_q_into_u(&self) -> Self {
        let mut probs = vec![0.0; self.u_size * self.q_size * self.x_size];
        for u in 0..self.u_size {
            for x in 0..self.x_size {
                for q in 0..self.q_size {
                    let merged_u = u * self.q_size + q;
                    probs[merged_u * self.x_size + x] = self.prob(u, x, q);
                }
            }
        }
        Self {
            u_size: self.u_size * self.q_size,
            x_size: self.x_size,
            q_size: 1,
            probs,
        }
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn q_size(&self) -> usize {
        self.q_size
    }

    pub fn prob(&self, u: usize, x: usize, q: usize) -> f64 {
        self.probs[(u * self.x_size + x) * self.q_size + q]
    }

    pub fn p_u(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.u_size];
        for u in 0..self.u_size {
            for x in 0..self.x_size {
                for q in 0..self.q_size {
                    out[u] += self.prob(u, x, q);
                }
            }
        }
        out
    }

    pub fn p_x(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.x_size];
        for u in 0..self.u_size {
            for x in 0..self.x_size {
                for q in 0..self.q_size {
                    out[x] += self.prob(u, x, q);
                }
            }
        }
        out
    }

    pub fn p_q(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.q_size];
        for u in 0..self.u_size {
            for x in 0..self.x_size {
                for q in 0..self.q_size {
                    out[q] += self.prob(u, x, q);
                }
            }
        }
        out
    }

    /// Conditional p(x|u) rows; rows for zero-probability u are uniform.
    pub fn x_given_u(&self) -> Vec<Vec<f64>> {
        let pu = self.p_u();
        let mut rows = vec![vec![0.0; self.x_size]; self.u_size];
        for u in 0..self.u_size {
            if pu[u] > 0.0 {
                for x in 0..self.x_size {
                    let mut m = 0.0;
                    for q in 0..self.q_size {
                        m += self.prob(u, x, q);
                    }
                    rows[u][x] = m / pu[u];
                }
            } else {
                rows[u] = vec![1.0 / self.x_size as f64; self.x_size];
            }
        }
        rows
    }

    fn check_channel_input(
        &self,
        ch: &StochasticMatrix,
        name: &str,
    ) -> Result<(), MeasureError> {
        if ch.input_size() != self.x_size {
            return Err(MeasureError::DimensionMismatch(format!(
                "{} has {} inputs but the auxiliary joint has x_size {}",
                name,
                ch.input_size(),
                self.x_size
            )));
        }
        Ok(())
    }
}

/// I(U;Z) when the channel output Z is drawn through `v` from X, with Q
/// (if present) marginalized out.
pub fn mi_u_z(aux: &AuxiliaryJoint, v: &StochasticMatrix) -> Result<Bits, MeasureError> {
    aux.check_channel_input(v, "state channel")?;
    let (nu, nx, nz) = (aux.u_size, aux.x_size, v.output_size());
    let mut joint = vec![0.0; nu * nz];
    for u in 0..nu {
        for x in 0..nx {
            let mut m = 0.0;
            for q in 0..aux.q_size {
                m += aux.prob(u, x, q);
            }
            if m > 0.0 {
                for z in 0..nz {
                    joint[u * nz + z] += m * v.prob(x, z);
                }
            }
        }
    }
    Ok(Bits(mi2(&joint, nu, nz)))
}

/// I(U;Z|Q) with Z drawn through `v`.
pub fn mi_u_z_given_q(aux: &AuxiliaryJoint, v: &StochasticMatrix) -> Result<Bits, MeasureError> {
    aux.check_channel_input(v, "state channel")?;
    let (nu, nx, nz, nq) = (aux.u_size, aux.x_size, v.output_size(), aux.q_size);
    let mut joint = vec![0.0; nu * nz * nq];
    for u in 0..nu {
        for x in 0..nx {
            for q in 0..nq {
                let m = aux.prob(u, x, q);
                if m > 0.0 {
                    for z in 0..nz {
                        joint[(u * nz + z) * nq + q] += m * v.prob(x, z);
                    }
                }
            }
        }
    }
    Ok(Bits(cond_mi3(&joint, nu, nz, nq)))
}

/// I(X;Y) under the input marginal of `aux` and the channel `w`.
pub fn mi_x_y(aux: &AuxiliaryJoint, w: &StochasticMatrix) -> Result<Bits, MeasureError> {
    aux.check_channel_input(w, "channel")?;
    let (nx, ny) = (aux.x_size, w.output_size());
    let px = aux.p_x();
    let mut joint = vec![0.0; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            joint[x * ny + y] = px[x] * w.prob(x, y);
        }
    }
    Ok(Bits(mi2(&joint, nx, ny)))
}

/// I(X;Y|Q) under `aux` and the channel `w`.
pub fn mi_x_y_given_q(aux: &AuxiliaryJoint, w: &StochasticMatrix) -> Result<Bits, MeasureError> {
    aux.check_channel_input(w, "channel")?;
    let (nx, ny, nq) = (aux.x_size, w.output_size(), aux.q_size);
    let mut joint = vec![0.0; nx * ny * nq];
    for u in 0..aux.u_size {
        for x in 0..nx {
            for q in 0..nq {
                let m = aux.prob(u, x, q);
                if m > 0.0 {
                    for y in 0..ny {
                        joint[(x * ny + y) * nq + q] += m * w.prob(x, y);
                    }
                }
            }
        }
    }
    Ok(Bits(cond_mi3(&joint, nx, ny, nq)))
}

/// I(X;Y|U,Q) under `aux` and the channel `w`. With no time-sharing axis
/// this is the private-rate bound I(X;Y|U).
pub fn mi_x_y_given_u_q(aux: &AuxiliaryJoint, w: &StochasticMatrix) -> Result<Bits, MeasureError> {
    aux.check_channel_input(w, "channel")?;
    let (nu, nx, ny, nq) = (aux.u_size, aux.x_size, w.output_size(), aux.q_size);
    let mut joint = vec![0.0; nx * ny * nu * nq];
    for u in 0..nu {
        for x in 0..nx {
            for q in 0..nq {
                let m = aux.prob(u, x, q);
                if m > 0.0 {
                    for y in 0..ny {
                        joint[(x * ny + y) * (nu * nq) + (u * nq + q)] += m * w.prob(x, y);
                    }
                }
            }
        }
    }
    Ok(Bits(cond_mi3(&joint, nx, ny, nu * nq)))
}

// ---------------------------------------------------------------------------
// Minimization of I(U;Z|Q) over the state weight simplex
// ---------------------------------------------------------------------------

/// Outcome of the weight-simplex minimization, including the duality-gap
/// certificate reached.
#[derive(Debug, Clone)]
pub(crate) struct SimplexMin {
    pub value: f64,
    pub weights: Vec<f64>,
    pub gap: f64,
    pub converged: bool,
}

/// The per-vertex linear statistics behind I(U;Z|Q) as a function of the
/// state weights: stacks[s] holds Σ_x p(u,x,q)·V_s(z|x) over (u,z,q).
struct StateMiObjective {
    stacks: Vec<Vec<f64>>,
    p_uq: Vec<f64>,
    p_q: Vec<f64>,
    nu: usize,
    nz: usize,
    nq: usize,
}

impl StateMiObjective {
    fn new(aux: &AuxiliaryJoint, family: &StateFamily) -> Self {
        let (nu, nx, nq) = (aux.u_size, aux.x_size, aux.q_size);
        let nz = family.output_size();
        let mut stacks = Vec::with_capacity(family.len());
        for v in family.vertices() {
            let mut t = vec![0.0; nu * nz * nq];
            for u in 0..nu {
                for x in 0..nx {
                    for q in 0..nq {
                        let m = aux.prob(u, x, q);
                        if m > 0.0 {
                            for z in 0..nz {
                                t[(u * nz + z) * nq + q] += m * v.prob(x, z);
                            }
                        }
                    }
                }
            }
            stacks.push(t);
        }
        let mut p_uq = vec![0.0; nu * nq];
        for u in 0..nu {
            for x in 0..nx {
                for q in 0..nq {
                    p_uq[u * nq + q] += aux.prob(u, x, q);
                }
            }
        }
        Self {
            stacks,
            p_uq,
            p_q: aux.p_q(),
            nu,
            nz,
            nq,
        }
    }

    fn joint(&self, lambda: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (stack, &l) in self.stacks.iter().zip(lambda) {
            if l > 0.0 {
                for (o, &t) in out.iter_mut().zip(stack) {
                    *o += l * t;
                }
            }
        }
    }

    fn value_of_joint(&self, joint: &[f64]) -> f64 {
        let (nu, nz, nq) = (self.nu, self.nz, self.nq);
        let mut m_z = vec![0.0; nz * nq];
        for u in 0..nu {
            for z in 0..nz {
                for q in 0..nq {
                    m_z[z * nq + q] += joint[(u * nz + z) * nq + q];
                }
            }
        }
        let mut info = 0.0;
        for u in 0..nu {
            for z in 0..nz {
                for q in 0..nq {
                    let v = joint[(u * nz + z) * nq + q];
                    if v > 0.0 {
                        info += v
                            * (v * self.p_q[q] / (self.p_uq[u * nq + q] * m_z[z * nq + q])).log2();
                    }
                }
            }
        }
        info.max(0.0)
    }

    fn value(&self, lambda: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.resize(self.nu * self.nz * self.nq, 0.0);
        self.joint(lambda, scratch);
        self.value_of_joint(scratch)
    }

    /// Gradient of the objective in the weights. Entries that would be
    /// −∞ because the mixture assigns zero mass to a cell a vertex can
    /// reach are floored, which keeps the Frank-Wolfe gap conservative.
    fn gradient(&self, lambda: &[f64], scratch: &mut Vec<f64>) -> Vec<f64> {
        let (nu, nz, nq) = (self.nu, self.nz, self.nq);
        scratch.resize(nu * nz * nq, 0.0);
        self.joint(lambda, scratch);
        let mut m_z = vec![0.0; nz * nq];
        for u in 0..nu {
            for z in 0..nz {
                for q in 0..nq {
                    m_z[z * nq + q] += scratch[(u * nz + z) * nq + q];
                }
            }
        }
        let mut grad = vec![0.0; self.stacks.len()];
        for (g, stack) in grad.iter_mut().zip(&self.stacks) {
            let mut acc = 0.0;
            for u in 0..nu {
                for z in 0..nz {
                    for q in 0..nq {
                        let idx = (u * nz + z) * nq + q;
                        let b = stack[idx];
                        if b > 0.0 {
                            let j = scratch[idx].max(LOG_FLOOR);
                            let m = m_z[z * nq + q].max(LOG_FLOOR);
                            acc += b * (j / m).log2();
                        }
                    }
                }
            }
            *g = acc;
        }
        grad
    }
}

/// Frank-Wolfe duality gap of a convex objective at `lambda`:
/// ⟨g, λ⟩ − min_s g_s, an upper bound on the distance to the minimum.
fn fw_gap(grad: &[f64], lambda: &[f64]) -> (f64, usize) {
    let fw = (0..grad.len())
        .min_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap())
        .unwrap();
    let dot: f64 = grad.iter().zip(lambda).map(|(g, l)| g * l).sum();
    (dot - grad[fw], fw)
}

/// Exact minimization of a convex function over the step interval
/// [lo, hi] by bisection on the sign of the directional derivative.
/// Value-based searches can only localize a minimum to about
/// sqrt(machine epsilon); the derivative sign localizes it to machine
/// precision, which the duality-gap certificates downstream rely on.
fn bisect_pair_step(
    mut dir_derivative: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
) -> f64 {
    if hi <= lo {
        return lo;
    }
    let mut a = lo;
    let mut b = hi;
    if dir_derivative(a) >= 0.0 {
        return a;
    }
    if dir_derivative(b) <= 0.0 {
        return b;
    }
    for _ in 0..90 {
        let mid = 0.5 * (a + b);
        if dir_derivative(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * (1.0 + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Minimizes a convex objective over the weight simplex by cyclic exact
/// line searches along vertex-pair directions, stopping on the
/// Frank-Wolfe duality-gap certificate (the linear oracle is the vertex
/// argmin of the gradient).
fn minimize_on_simplex(
    k: usize,
    start: Vec<f64>,
    tol: f64,
    max_sweeps: usize,
    mut value: impl FnMut(&[f64]) -> f64,
    mut gradient: impl FnMut(&[f64]) -> Vec<f64>,
) -> SimplexMin {
    let mut lambda = start;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let grad = gradient(&lambda);
        let (g, _) = fw_gap(&grad, &lambda);
        gap = g;
        if gap <= tol {
            converged = true;
            break;
        }
        let mut sweep_move = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                // signed move gamma along e_j − e_i, feasible for
                // gamma in [−λ_j, λ_i]
                let lo = -lambda[j];
                let hi = lambda[i];
                if hi - lo <= 0.0 {
                    continue;
                }
                let mut trial = lambda.clone();
                let gamma = bisect_pair_step(
                    |g| {
                        trial.copy_from_slice(&lambda);
                        trial[i] -= g;
                        trial[j] += g;
                        for v in trial.iter_mut() {
                            *v = v.max(0.0);
                        }
                        let grad = gradient(&trial);
                        grad[j] - grad[i]
                    },
                    lo,
                    hi,
                );
                if gamma.abs() > 0.0 {
                    lambda[i] = (lambda[i] - gamma).max(0.0);
                    lambda[j] = (lambda[j] + gamma).max(0.0);
                    let total: f64 = lambda.iter().sum();
                    for v in lambda.iter_mut() {
                        *v /= total;
                    }
                    sweep_move += gamma.abs();
                }
            }
        }
        if sweep_move <= 1e-15 {
            // rescue: one exact line search straight toward the oracle
            // vertex before giving up
            let grad_now = gradient(&lambda);
            let (_, fw) = fw_gap(&grad_now, &lambda);
            let base = lambda.clone();
            let gamma = bisect_pair_step(
                |g| {
                    let trial: Vec<f64> = base
                        .iter()
                        .enumerate()
                        .map(|(s, &l)| l * (1.0 - g) + if s == fw { g } else { 0.0 })
                        .collect();
                    let grad = gradient(&trial);
                    // derivative along the fixed direction e_fw − base
                    let dot: f64 = grad.iter().zip(&base).map(|(gv, lv)| gv * lv).sum();
                    grad[fw] - dot
                },
                0.0,
                1.0,
            );
            if gamma <= 1e-15 {
                break;
            }
            for (s, l) in lambda.iter_mut().enumerate() {
                *l = *l * (1.0 - gamma) + if s == fw { gamma } else { 0.0 };
            }
        }
    }
    SimplexMin {
        value: value(&lambda),
        weights: lambda,
        gap,
        converged,
    }
}

/// Support of a weight vector, for the deterministic tie-break rule.
fn support_of(weights: &[f64]) -> Vec<usize> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-9)
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn min_state_mi_certified(
    aux: &AuxiliaryJoint,
    family: &StateFamily,
    tol: f64,
) -> Result<SimplexMin, MeasureError> {
    if family.input_size() != aux.x_size() {
        return Err(MeasureError::DimensionMismatch(format!(
            "state family has {} inputs but the auxiliary joint has x_size {}",
            family.input_size(),
            aux.x_size()
        )));
    }
    if !(tol > 0.0) {
        return Err(MeasureError::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    let k = family.len();
    let objective = StateMiObjective::new(aux, family);
    let mut scratch = Vec::new();
    if k == 1 {
        let value = objective.value(&[1.0], &mut scratch);
        return Ok(SimplexMin {
            value,
            weights: vec![1.0],
            gap: 0.0,
            converged: true,
        });
    }

    // Vertex starts certify the common endpoint-minimum case for free:
    // a vertex is optimal exactly when its duality gap vanishes. The
    // interior case is covered by the barycenter run; the objective is
    // convex, so one converged run finds the global minimum.
    let mut candidates: Vec<SimplexMin> = Vec::new();
    for s in 0..k {
        let mut vertex = vec![0.0; k];
        vertex[s] = 1.0;
        let grad = objective.gradient(&vertex, &mut scratch);
        let (gap, _) = fw_gap(&grad, &vertex);
        if gap <= tol {
            candidates.push(SimplexMin {
                value: objective.value(&vertex, &mut scratch),
                weights: vertex,
                gap,
                converged: true,
            });
        }
    }
    let center = minimize_on_simplex(
        k,
        vec![1.0 / k as f64; k],
        tol,
        FW_MAX_ITERS,
        |l| {
            let mut s = Vec::new();
            objective.value(l, &mut s)
        },
        |l| {
            let mut s = Vec::new();
            objective.gradient(l, &mut s)
        },
    );
    let center_gap = center.gap;
    candidates.push(center);
    let best = candidates
        .into_iter()
        .filter(|c| c.converged)
        .reduce(pick_min);
    match best {
        Some(found) => Ok(found),
        None => Err(MeasureError::NonConvergence {
            iterations: FW_MAX_ITERS,
            gap: center_gap,
        }),
    }
}

/// Ties within 1e-12 in value go to the lexicographically smallest
/// vertex-index support.
fn pick_min(a: SimplexMin, b: SimplexMin) -> SimplexMin {
    if (a.value - b.value).abs() <= 1e-12 {
        match (a.converged, b.converged) {
            (true, false) => return a,
            (false, true) => return b,
            _ => {}
        }
        if support_of(&b.weights) < support_of(&a.weights) {
            return b;
        }
        return a;
    }
    if b.value < a.value {
        b
    } else {
        a
    }
}

/// Minimizes I(U;Z|Q) over the convex closure of the state family. The
/// objective is convex in the mixture weights, so the Frank-Wolfe duality
/// gap certifies the returned minimum to within `tol`.
pub fn min_state_mi(
    aux: &AuxiliaryJoint,
    family: &StateFamily,
    tol: f64,
) -> Result<(Bits, StateWeights), MeasureError> {
    let outcome = min_state_mi_certified(aux, family, tol)?;
    let weights = StateWeights::new(outcome.weights)
        .map_err(|e| MeasureError::InvalidPmf(e.to_string()))?;
    Ok((Bits(outcome.value), weights))
}

// ---------------------------------------------------------------------------
// Shannon capacity
// ---------------------------------------------------------------------------

/// Shannon capacity of a DMC in bits via alternating maximization, with
/// the standard stopping rule: the spread between the largest and the
/// input-averaged KL divergence D(W(·|x) ‖ pW) bounds the gap to the
/// optimum.
pub fn shannon_capacity(ch: &StochasticMatrix, tol: f64) -> Result<Bits, MeasureError> {
    shannon_capacity_with_input(ch, tol).map(|(value, _)| Bits(value))
}

/// Per-input divergences D(W(·|x) ‖ pW); the stopping certificate reads
/// max_x D_x ≥ C ≥ Σ_x p(x) D_x at any input law p.
fn divergences(ch: &StochasticMatrix, p: &[f64], q: &mut [f64], d: &mut [f64]) {
    let (ni, no) = (ch.input_size(), ch.output_size());
    q.fill(0.0);
    for x in 0..ni {
        if p[x] > 0.0 {
            for y in 0..no {
                q[y] += p[x] * ch.prob(x, y);
            }
        }
    }
    for x in 0..ni {
        let mut acc = 0.0;
        for y in 0..no {
            let w = ch.prob(x, y);
            if w > 0.0 {
                acc += w * (w / q[y].max(LOG_FLOOR)).log2();
            }
        }
        d[x] = acc;
    }
}

fn ba_update(p: &[f64], d: &[f64], out: &mut Vec<f64>) {
    let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.clear();
    out.extend(p.iter().zip(d).map(|(&pv, &dv)| pv * (dv - upper).exp2()));
    let total: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// Capacity-achieving input distribution alongside the capacity value.
/// Plain alternating maximization converges only linearly, with a rate
/// near one on almost-useless channels, so the iteration is extrapolated
/// (two base steps plus a squared step) under a monotone safeguard; the
/// divergence-spread certificate is checked at the accepted iterate, so
/// acceleration cannot produce a false stop. If the iteration stalls,
/// small input alphabets fall back to a certified bracketing search of
/// the concave mutual information over the input simplex.
fn shannon_capacity_with_input(
    ch: &StochasticMatrix,
    tol: f64,
) -> Result<(f64, Vec<f64>), MeasureError> {
    match ba_with_input(ch, tol, 20_000) {
        Ok(found) => Ok(found),
        Err(stall) => {
            let ni = ch.input_size();
            if ni > 6 {
                return Err(stall);
            }
            let no = ch.output_size();
            let mut q = vec![0.0; no];
            let mut d = vec![0.0; ni];
            let mut info_at = |p: &[f64]| -> f64 {
                let cleaned: Vec<f64> = p.iter().map(|&v| v.max(0.0)).collect();
                let total: f64 = cleaned.iter().sum();
                let normalized: Vec<f64> = cleaned.iter().map(|&v| v / total).collect();
                divergences(ch, &normalized, &mut q, &mut d);
                let value: f64 = normalized.iter().zip(&d).map(|(pv, dv)| pv * dv).sum();
                -value
            };
            let mut certified = true;
            let (p, negated) = certified_simplex_min(&mut info_at, ni, tol, 0.0, &mut certified);
            if !certified {
                return Err(stall);
            }
            Ok(((-negated).max(0.0), p))
        }
    }
}

fn ba_with_input(
    ch: &StochasticMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, Vec<f64>), MeasureError> {
    if !(tol > 0.0) {
        return Err(MeasureError::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    let (ni, no) = (ch.input_size(), ch.output_size());
    let mut p = vec![1.0 / ni as f64; ni];
    let mut q = vec![0.0; no];
    let mut d = vec![0.0; ni];
    let mut p1 = Vec::with_capacity(ni);
    let mut p2 = Vec::with_capacity(ni);
    for _ in 0..max_iters {
        divergences(ch, &p, &mut q, &mut d);
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lower: f64 = p.iter().zip(&d).map(|(pv, dv)| pv * dv).sum();
        if upper - lower <= tol {
            return Ok((lower.max(0.0), p));
        }
        ba_update(&p, &d, &mut p1);
        divergences(ch, &p1, &mut q, &mut d);
        ba_update(&p1, &d, &mut p2);

        // squared extrapolation through the two base iterates
        let mut r_norm = 0.0;
        let mut v_norm = 0.0;
        for x in 0..ni {
            let r = p1[x] - p[x];
            let v = p2[x] - 2.0 * p1[x] + p[x];
            r_norm += r * r;
            v_norm += v * v;
        }
        if v_norm > 1e-300 {
            let alpha = -(r_norm / v_norm).sqrt().max(1.0);
            let mut candidate = vec![0.0; ni];
            let mut total = 0.0;
            for x in 0..ni {
                let r = p1[x] - p[x];
                let v = p2[x] - 2.0 * p1[x] + p[x];
                candidate[x] = (p[x] - 2.0 * alpha * r + alpha * alpha * v).max(1e-18);
                total += candidate[x];
            }
            for v in candidate.iter_mut() {
                *v /= total;
            }
            // stabilize and keep the candidate only if it does not lose
            // mutual information against the plain double step
            divergences(ch, &candidate, &mut q, &mut d);
            ba_update(&candidate, &d, &mut p1);
            divergences(ch, &p1, &mut q, &mut d);
            let cand_value: f64 = p1.iter().zip(&d).map(|(pv, dv)| pv * dv).sum();
            divergences(ch, &p2, &mut q, &mut d);
            let base_value: f64 = p2.iter().zip(&d).map(|(pv, dv)| pv * dv).sum();
            if cand_value >= base_value {
                std::mem::swap(&mut p, &mut p1);
            } else {
                std::mem::swap(&mut p, &mut p2);
            }
        } else {
            std::mem::swap(&mut p, &mut p2);
        }
    }
    Err(MeasureError::NonConvergence {
        iterations: max_iters,
        gap: f64::NAN,
    })
}

/// Outcome of a certified one-dimensional convex minimization: best
/// point, best value, and whether the convexity lower bound closed to
/// the requested tolerance.
struct BracketMin {
    arg: f64,
    value: f64,
    certified: bool,
}

/// Minimizes a convex function on [0, 1] by adaptive bracketing with a
/// convexity certificate: a secant through two evaluations
/// under-estimates the function beyond its span, so neighbouring secants
/// bound the minimum inside every gap from below. Refinement targets the
/// gap limiting the bound until the certified lower bound is within
/// `tol` of the best evaluation. `noise` is the evaluation error of `f`.
fn certified_convex_min_1d(mut f: impl FnMut(f64) -> f64, tol: f64, noise: f64) -> BracketMin {
    let mut xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
    let mut fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for _ in 0..260 {
        let (best_idx, _) = fs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let best = fs[best_idx];
        let m = xs.len();
        let mut level = best;
        let mut worst_gap = None;
        for i in 0..m - 1 {
            let (x1, f1) = (xs[i], fs[i]);
            let (x2, f2) = (xs[i + 1], fs[i + 1]);
            let width = x2 - x1;
            let left_slope = (i >= 1).then(|| (f1 - fs[i - 1]) / (x1 - xs[i - 1]));
            let right_slope = (i + 2 < m).then(|| (fs[i + 2] - f2) / (xs[i + 2] - x2));
            let mut bound = f64::NEG_INFINITY;
            if let Some(sl) = left_slope {
                bound = bound.max(f1 + sl.min(0.0) * width);
            }
            if let Some(sr) = right_slope {
                bound = bound.max(f2 - sr.max(0.0) * width);
            }
            if let (Some(sl), Some(sr)) = (left_slope, right_slope) {
                if sr - sl > 1e-30 {
                    let t = ((f1 - f2) + sr * x2 - sl * x1) / (sr - sl);
                    if (x1 - 1e-12..=x2 + 1e-12).contains(&t) {
                        bound = bound.max(f1 + sl * (t - x1));
                    }
                }
            }
            if bound < level {
                level = bound;
                worst_gap = Some(i);
            }
        }
        let lower = level - 4.0 * noise;
        if best - lower <= tol {
            return BracketMin {
                arg: xs[best_idx],
                value: best,
                certified: true,
            };
        }
        let i = worst_gap.unwrap_or(best_idx.min(m - 2));
        let (x1, x2) = (xs[i], xs[i + 1]);
        if x2 - x1 <= 1e-12 {
            break;
        }
        for &t in &[x1 + (x2 - x1) / 3.0, x1 + 2.0 * (x2 - x1) / 3.0] {
            let ft = f(t);
            let pos = xs.partition_point(|&v| v < t);
            xs.insert(pos, t);
            fs.insert(pos, ft);
        }
    }
    let (best_idx, _) = fs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    BracketMin {
        arg: xs[best_idx],
        value: fs[best_idx],
        certified: false,
    }
}

/// Recursive certified minimization of a convex function over the
/// probability simplex: the leading coordinate is bracketed on [0, 1]
/// and the remainder is a scaled sub-simplex problem. Partial minima of
/// a convex function are convex, so every level certifies by bracketing.
/// The inner recursion gets a tenth of the tolerance and its
/// certification error enters the outer bracket as evaluation noise;
/// a one-dimensional tail is an exact evaluation and costs nothing.
fn certified_simplex_min(
    f: &mut dyn FnMut(&[f64]) -> f64,
    k: usize,
    tol: f64,
    noise: f64,
    certified: &mut bool,
) -> (Vec<f64>, f64) {
    if k == 1 {
        return (vec![1.0], f(&[1.0]));
    }
    let inner_tol = tol * 0.1;
    let inner_err = if k - 1 == 1 { 0.0 } else { inner_tol };
    let outcome = certified_convex_min_1d(
        |a| {
            let mut g = |tail: &[f64]| {
                let mut full = Vec::with_capacity(k);
                full.push(a);
                for &t in tail {
                    full.push((1.0 - a) * t);
                }
                f(&full)
            };
            certified_simplex_min(&mut g, k - 1, inner_tol, noise, certified).1
        },
        tol - inner_err,
        noise + inner_err,
    );
    if !outcome.certified {
        *certified = false;
    }
    let head = outcome.arg;
    let mut g = |tail: &[f64]| {
        let mut full = Vec::with_capacity(k);
        full.push(head);
        for &t in tail {
            full.push((1.0 - head) * t);
        }
        f(&full)
    };
    let (tail, value) = certified_simplex_min(&mut g, k - 1, inner_tol, noise, certified);
    let mut point = vec![0.0; k];
    point[0] = head;
    for (slot, &t) in point[1..].iter_mut().zip(&tail) {
        *slot = (1.0 - head) * t;
    }
    (point, value.min(outcome.value))
}

/// Minimizes the Shannon capacity over the convex closure of the state
/// family: a saddle problem, concave in the input law and convex in the
/// mixture weights. Each weight evaluation runs Blahut-Arimoto on the
/// mixed channel; the weight search certifies its minimum by convex
/// bracketing, which is robust at the kinks where the maximizing input
/// law switches.
pub fn min_state_capacity(
    family: &StateFamily,
    tol: f64,
) -> Result<(Bits, StateWeights), MeasureError> {
    if !(tol > 0.0) {
        return Err(MeasureError::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    let k = family.len();
    if k > 6 {
        return Err(MeasureError::DimensionMismatch(
            "state families beyond six vertices are not supported by the capacity search".into(),
        ));
    }
    // the deepest bracket level is the binding one for the evaluation
    // noise budget: each level passes a tenth of its tolerance inward
    let levels = (k as i32 - 2).max(0);
    let inner_tol = (tol * 0.1f64.powi(levels) / 80.0).max(1e-13);
    let failure: std::cell::RefCell<Option<MeasureError>> = std::cell::RefCell::new(None);
    let mut capacity_at = |lambda: &[f64]| -> f64 {
        let run = || -> Result<f64, MeasureError> {
            let cleaned: Vec<f64> = lambda.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
            let weights = StateWeights::new(cleaned)
                .map_err(|e| MeasureError::InvalidPmf(e.to_string()))?;
            let mixed = family
                .mix(&weights)
                .map_err(|e| MeasureError::InvalidPmf(e.to_string()))?;
            Ok(shannon_capacity_with_input(&mixed, inner_tol)?.0)
        };
        match run() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    if k == 1 {
        let value = capacity_at(&[1.0]);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        return Ok((Bits(value), StateWeights::point_mass(0, 1)));
    }

    let mut certified = true;
    let (mut lambda, mut value) =
        certified_simplex_min(&mut capacity_at, k, tol, inner_tol, &mut certified);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    if !certified {
        return Err(MeasureError::NonConvergence {
            iterations: 0,
            gap: f64::NAN,
        });
    }
    // prefer an exact vertex when it ties the bracketed minimum
    for s in 0..k {
        let mut vertex = vec![0.0; k];
        vertex[s] = 1.0;
        let at_vertex = capacity_at(&vertex);
        if at_vertex <= value + tol {
            lambda = vertex;
            value = at_vertex.min(value);
            break;
        }
    }
    let weights =
        StateWeights::new(lambda).map_err(|e| MeasureError::InvalidPmf(e.to_string()))?;
    Ok((Bits(value.max(0.0)), weights))
}

// ---------------------------------------------------------------------------
// Gradients in the auxiliary joint, used by the region search
// ---------------------------------------------------------------------------

/// Partial derivatives of I(U;Z) in the entries p(u,x), up to an additive
/// constant that vanishes under projection onto the simplex tangent.
pub(crate) fn grad_mi_uz(aux: &AuxiliaryJoint, v: &StochasticMatrix) -> Vec<f64> {
    debug_assert_eq!(aux.q_size(), 1);
    let (nu, nx, nz) = (aux.u_size, aux.x_size, v.output_size());
    let mut joint = vec![0.0; nu * nz];
    let mut p_u = vec![0.0; nu];
    for u in 0..nu {
        for x in 0..nx {
            let m = aux.prob(u, x, 0);
            p_u[u] += m;
            if m > 0.0 {
                for z in 0..nz {
                    joint[u * nz + z] += m * v.prob(x, z);
                }
            }
        }
    }
    let mut m_z = vec![0.0; nz];
    for u in 0..nu {
        for z in 0..nz {
            m_z[z] += joint[u * nz + z];
        }
    }
    let mut grad = vec![0.0; nu * nx];
    for u in 0..nu {
        for x in 0..nx {
            let mut acc = 0.0;
            for z in 0..nz {
                let w = v.prob(x, z);
                if w > 0.0 {
                    acc += w
                        * (joint[u * nz + z].max(LOG_FLOOR) / m_z[z].max(LOG_FLOOR)).log2();
                }
            }
            acc -= p_u[u].max(LOG_FLOOR).log2();
            grad[u * nx + x] = acc;
        }
    }
    grad
}

/// Partial derivatives of I(X;Y) in the entries p(u,x): the divergence
/// D(W(·|x) ‖ pW), constant in u.
pub(crate) fn grad_mi_xy(aux: &AuxiliaryJoint, w: &StochasticMatrix) -> Vec<f64> {
    debug_assert_eq!(aux.q_size(), 1);
    let (nu, nx, ny) = (aux.u_size, aux.x_size, w.output_size());
    let px = aux.p_x();
    let mut p_y = vec![0.0; ny];
    for x in 0..nx {
        if px[x] > 0.0 {
            for y in 0..ny {
                p_y[y] += px[x] * w.prob(x, y);
            }
        }
    }
    let mut per_x = vec![0.0; nx];
    for x in 0..nx {
        let mut acc = 0.0;
        for y in 0..ny {
            let v = w.prob(x, y);
            if v > 0.0 {
                acc += v * (v / p_y[y].max(LOG_FLOOR)).log2();
            }
        }
        per_x[x] = acc;
    }
    let mut grad = vec![0.0; nu * nx];
    for u in 0..nu {
        for x in 0..nx {
            grad[u * nx + x] = per_x[x];
        }
    }
    grad
}
