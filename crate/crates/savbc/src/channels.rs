//! Finite-alphabet channel representations: validated row-stochastic
//! matrices, state families with an implicit convex closure, and the
//! JSON channel-spec document.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance accepted on ingested row sums; rows are renormalized to an
/// exact sum of one after validation.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Scales a near-unit PMF to unit sum. Sums already within a few ulps of
/// one are left untouched so that validation is idempotent and emitted
/// documents parse back bit-identically.
pub(crate) fn renormalize(pmf: &mut [f64]) {
    let sum: f64 = pmf.iter().sum();
    if (sum - 1.0).abs() > 1e-14 {
        for v in pmf.iter_mut() {
            *v /= sum;
        }
    }
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("matrix has no rows or columns")]
    EmptyMatrix,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    RowSumNotOne { row: usize, sum: f64 },
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid spec at {location}: {message}")]
    Validation { location: String, message: String },
}

/// A row-stochastic conditional law over finite alphabets. Row `x` is the
/// output PMF given input `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    /// Validates a rectangular nonempty table of probabilities and
    /// renormalizes every row to an exact unit sum.
    pub fn validate(rows: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(ChannelError::EmptyMatrix);
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(ChannelError::RaggedRows {
                    row: i,
                    got: row.len(),
                    expected: width,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(ChannelError::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ChannelError::RowSumNotOne { row: i, sum });
            }
        }
        let mut rows = rows;
        for row in rows.iter_mut() {
            renormalize(row);
        }
        Ok(Self { rows })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::OutOfRange {
                what: "crossover probability",
                value: p,
            });
        }
        Ok(Self {
            rows: vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        })
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// Transition probability of output `y` given input `x`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// PMF over the vertex index set of a [`StateFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateWeights {
    weights: Vec<f64>,
}

impl StateWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self, ChannelError> {
        if weights.is_empty() {
            return Err(ChannelError::EmptyMatrix);
        }
        for &w in &weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(ChannelError::NegativeEntry {
                    row: 0,
                    col: 0,
                    value: w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(ChannelError::RowSumNotOne { row: 0, sum });
        }
        let mut weights = weights;
        renormalize(&mut weights);
        Ok(Self { weights })
    }

    /// All mass on vertex `idx`.
    pub fn point_mass(idx: usize, len: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[idx] = 1.0;
        Self { weights }
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Finite vertex list of state channels. The represented state set is the
/// convex hull of the vertices; mixtures are taken entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFamily {
    vertices: Vec<StochasticMatrix>,
}

impl StateFamily {
    pub fn new(vertices: Vec<StochasticMatrix>) -> Result<Self, ChannelError> {
        let first = vertices.first().ok_or(ChannelError::EmptyMatrix)?;
        let (ni, no) = (first.input_size(), first.output_size());
        for (i, v) in vertices.iter().enumerate() {
            if v.input_size() != ni || v.output_size() != no {
                return Err(ChannelError::DimensionMismatch(format!(
                    "state {i} is {}x{}, expected {ni}x{no}",
                    v.input_size(),
                    v.output_size()
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[StochasticMatrix] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn input_size(&self) -> usize {
        self.vertices[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.vertices[0].output_size()
    }

    /// Entrywise convex combination of the vertex channels.
    pub fn mix(&self, w: &StateWeights) -> Result<StochasticMatrix, ChannelError> {
        if w.len() != self.vertices.len() {
            return Err(ChannelError::DimensionMismatch(format!(
                "{} weights for {} vertices",
                w.len(),
                self.vertices.len()
            )));
        }
        let (ni, no) = (self.input_size(), self.output_size());
        let mut rows = vec![vec![0.0; no]; ni];
        for (v, &lambda) in self.vertices.iter().zip(w.as_slice()) {
            for x in 0..ni {
                for z in 0..no {
                    rows[x][z] += lambda * v.prob(x, z);
                }
            }
        }
        StochasticMatrix::validate(rows)
    }
}

/// A semi-arbitrarily-varying broadcast channel: a fixed DMC `w` to the
/// ordinary receiver and a state family to the robust receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct SavbcSpec {
    w: StochasticMatrix,
    family: StateFamily,
    state_names: Vec<String>,
}

impl SavbcSpec {
    pub fn new(w: StochasticMatrix, family: StateFamily) -> Result<Self, ChannelError> {
        if w.input_size() != family.input_size() {
            return Err(ChannelError::DimensionMismatch(format!(
                "W has {} inputs but the state family has {}",
                w.input_size(),
                family.input_size()
            )));
        }
        let state_names = (0..family.len()).map(|i| format!("s{i}")).collect();
        Ok(Self {
            w,
            family,
            state_names,
        })
    }

    pub fn x_size(&self) -> usize {
        self.w.input_size()
    }

    pub fn y_size(&self) -> usize {
        self.w.output_size()
    }

    pub fn z_size(&self) -> usize {
        self.family.output_size()
    }

    pub fn w(&self) -> &StochasticMatrix {
        &self.w
    }

    pub fn family(&self) -> &StateFamily {
        &self.family
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    /// Parses the JSON channel-spec document. Unknown fields are rejected;
    /// validation failures carry the offending location.
    pub fn parse_str(text: &str) -> Result<Self, ChannelError> {
        let doc: SpecDoc =
            serde_json::from_str(text).map_err(|e| ChannelError::Parse(e.to_string()))?;
        doc.into_spec()
    }

    /// Emits the canonical JSON document; `parse_str` round-trips it.
    pub fn to_json(&self) -> String {
        let doc = SpecDoc {
            x_size: self.x_size(),
            y_size: self.y_size(),
            z_size: self.z_size(),
            w: self.w.rows().to_vec(),
            states: self
                .family
                .vertices()
                .iter()
                .zip(&self.state_names)
                .map(|(m, name)| StateDoc {
                    name: name.clone(),
                    matrix: m.rows().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("spec serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    states: Vec<StateDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    name: String,
    matrix: Vec<Vec<f64>>,
}

impl SpecDoc {
    fn into_spec(self) -> Result<SavbcSpec, ChannelError> {
        let located = |location: &str, e: ChannelError| ChannelError::Validation {
            location: location.to_string(),
            message: e.to_string(),
        };
        if self.x_size == 0 || self.y_size == 0 || self.z_size == 0 {
            return Err(ChannelError::Validation {
                location: "sizes".into(),
                message: "alphabet sizes must be positive".into(),
            });
        }
        let w = StochasticMatrix::validate(self.w).map_err(|e| located("W", e))?;
        if w.input_size() != self.x_size || w.output_size() != self.y_size {
            return Err(ChannelError::Validation {
                location: "W".into(),
                message: format!(
                    "matrix is {}x{} but sizes declare {}x{}",
                    w.input_size(),
                    w.output_size(),
                    self.x_size,
                    self.y_size
                ),
            });
        }
        if self.states.is_empty() {
            return Err(ChannelError::Validation {
                location: "states".into(),
                message: "at least one state channel is required".into(),
            });
        }
        let mut vertices = Vec::with_capacity(self.states.len());
        let mut state_names = Vec::with_capacity(self.states.len());
        for (i, s) in self.states.into_iter().enumerate() {
            let loc = format!("states[{i}].matrix");
            let m = StochasticMatrix::validate(s.matrix).map_err(|e| located(&loc, e))?;
            if m.input_size() != self.x_size || m.output_size() != self.z_size {
                return Err(ChannelError::Validation {
                    location: loc,
                    message: format!(
                        "matrix is {}x{} but sizes declare {}x{}",
                        m.input_size(),
                        m.output_size(),
                        self.x_size,
                        self.z_size
                    ),
                });
            }
            vertices.push(m);
            state_names.push(s.name);
        }
        let family = StateFamily::new(vertices)?;
        let mut spec = SavbcSpec::new(w, family)?;
        spec.state_names = state_names;
        Ok(spec)
    }
}
