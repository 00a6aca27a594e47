//! Symmetrizability of the AVC branch and the resulting verdict on
//! whether the capacity region has a nonempty interior.
//!
//! The check solves, as a linear program, for a channel σ(s|x) making
//! Σ_s σ(s|x')·V_s(z|x) symmetric in (x, x'); the AVC has positive
//! deterministic-code capacity exactly when no such σ exists.

use crate::channels::{SavbcSpec, StateFamily};
use crate::lp::{self, Cmp, Constraint};
use crate::measures::{shannon_capacity, MeasureError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetrizabilityError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

/// A conditional PMF σ(state vertex | input symbol), row per input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrizingChannel {
    pub sigma: Vec<Vec<f64>>,
}

/// Verdict of the symmetrizability linear program. The witness is the
/// residual-minimizing σ whether or not it certifies symmetrizability.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizabilityReport {
    pub symmetrizable: bool,
    /// optimal value of the max absolute symmetry defect
    pub residual: f64,
    /// verdicts within a decade of the tolerance are knife-edge
    pub borderline: bool,
    pub tolerance: f64,
    pub witness: SymmetrizingChannel,
}

/// Max absolute symmetry defect of a candidate σ, by direct enumeration
/// over (x, x', z).
pub fn residual_of(family: &StateFamily, sigma: &SymmetrizingChannel) -> f64 {
    let nx = family.input_size();
    let nz = family.output_size();
    let k = family.len();
    let mut worst = 0.0f64;
    for x in 0..nx {
        for xp in 0..nx {
            for z in 0..nz {
                let mut forward = 0.0;
                let mut backward = 0.0;
                for s in 0..k {
                    forward += sigma.sigma[xp][s] * family.vertices()[s].prob(x, z);
                    backward += sigma.sigma[x][s] * family.vertices()[s].prob(xp, z);
                }
                worst = worst.max((forward - backward).abs());
            }
        }
    }
    worst
}

/// Decides symmetrizability by minimizing the maximum absolute residual
/// of the defining identity over all channels σ, a linear program over
/// the per-input simplices.
pub fn is_symmetrizable(
    family: &StateFamily,
    tol: f64,
) -> Result<SymmetrizabilityReport, SymmetrizabilityError> {
    let nx = family.input_size();
    let nz = family.output_size();
    let k = family.len();
    // variables: σ(s|x) at x*k + s, then the bound t
    let nv = nx * k + 1;
    let t_col = nx * k;
    let mut objective = vec![0.0; nv];
    objective[t_col] = 1.0;

    let mut constraints = Vec::new();
    for x in 0..nx {
        let mut coeffs = vec![0.0; nv];
        for s in 0..k {
            coeffs[x * k + s] = 1.0;
        }
        constraints.push(Constraint {
            coeffs,
            cmp: Cmp::Eq,
            rhs: 1.0,
        });
    }
    for x in 0..nx {
        for xp in (x + 1)..nx {
            for z in 0..nz {
                // r = Σ_s σ(s|x')V_s(z|x) − Σ_s σ(s|x)V_s(z|x')
                let mut row = vec![0.0; nv];
                for s in 0..k {
                    row[xp * k + s] += family.vertices()[s].prob(x, z);
                    row[x * k + s] -= family.vertices()[s].prob(xp, z);
                }
                let mut le = row.clone();
                le[t_col] = -1.0;
                constraints.push(Constraint {
                    coeffs: le,
                    cmp: Cmp::Le,
                    rhs: 0.0,
                });
                let mut ge: Vec<f64> = row.iter().map(|&v| -v).collect();
                ge[t_col] = -1.0;
                constraints.push(Constraint {
                    coeffs: ge,
                    cmp: Cmp::Le,
                    rhs: 0.0,
                });
            }
        }
    }

    let solution = lp::solve(&objective, &constraints)
        .map_err(|e| SymmetrizabilityError::SolverFailure(e.to_string()))?;
    let mut sigma = vec![vec![0.0; k]; nx];
    for x in 0..nx {
        for s in 0..k {
            sigma[x][s] = solution.x[x * k + s].max(0.0);
        }
        let total: f64 = sigma[x].iter().sum();
        if total > 0.0 {
            for v in sigma[x].iter_mut() {
                *v /= total;
            }
        }
    }
    let witness = SymmetrizingChannel { sigma };
    // report the exact residual of the recovered witness rather than the
    // tableau objective
    let residual = residual_of(family, &witness).min(solution.value.max(0.0));
    let residual = if residual < 0.0 { 0.0 } else { residual };
    Ok(SymmetrizabilityReport {
        symmetrizable: residual <= tol,
        residual,
        borderline: residual > tol * 0.1 && residual < tol * 10.0,
        tolerance: tol,
        witness,
    })
}

/// Interior verdict for the capacity region: nonempty exactly when the
/// DMC to Y has positive capacity and the AVC to Z is nonsymmetrizable.
#[derive(Debug, Clone, Serialize)]
pub struct InteriorReport {
    pub nonempty: bool,
    pub w_capacity: f64,
    pub symmetrizable: bool,
    pub residual: f64,
    pub reasons: Vec<String>,
}

pub fn interior_nonempty(
    spec: &SavbcSpec,
    tol: f64,
) -> Result<InteriorReport, SymmetrizabilityError> {
    let w_capacity = shannon_capacity(spec.w(), (tol * 0.1).clamp(1e-12, 1e-9))?.0;
    let symmetry = is_symmetrizable(spec.family(), tol)?;
    let mut reasons = Vec::new();
    if w_capacity <= tol {
        reasons.push(format!("C_Sh(W) = {w_capacity:.3e} is zero within tolerance"));
    }
    if symmetry.symmetrizable {
        reasons.push(format!(
            "AVC to Z is symmetrizable (residual {:.3e})",
            symmetry.residual
        ));
    }
    Ok(InteriorReport {
        nonempty: reasons.is_empty(),
        w_capacity,
        symmetrizable: symmetry.symmetrizable,
        residual: symmetry.residual,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::StochasticMatrix;
    use proptest::prelude::*;

    fn bsc(p: f64) -> StochasticMatrix {
        StochasticMatrix::bsc(p).unwrap()
    }

    /// V_s(z|x) = 1{z = x xor s}: the classic symmetrizable pair.
    fn xor_family() -> StateFamily {
        StateFamily::new(vec![bsc(0.0), bsc(1.0)]).unwrap()
    }

    #[test]
    fn xor_family_is_symmetrizable() {
        let report = is_symmetrizable(&xor_family(), 1e-8).unwrap();
        assert!(report.symmetrizable, "{report:?}");
        assert!(report.residual <= 1e-8);
        assert!(residual_of(&xor_family(), &report.witness) <= 1e-8);
    }

    #[test]
    fn xor_identity_sigma_satisfies_the_identity() {
        // σ(s|x) = 1{s = x}, verified by enumeration over (x, x', z)
        let sigma = SymmetrizingChannel {
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert_eq!(residual_of(&xor_family(), &sigma), 0.0);
    }

    #[test]
    fn single_bsc_state_is_nonsymmetrizable() {
        let family = StateFamily::new(vec![bsc(0.2)]).unwrap();
        let report = is_symmetrizable(&family, 1e-8).unwrap();
        assert!(!report.symmetrizable, "{report:?}");
        // rows differ by 0.6 in each entry
        assert!((report.residual - 0.6).abs() < 1e-9);
        assert!(report.residual >= 0.1);
    }

    #[test]
    fn identical_row_state_is_symmetrizable() {
        let useless =
            StochasticMatrix::validate(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        let family = StateFamily::new(vec![useless]).unwrap();
        let report = is_symmetrizable(&family, 1e-8).unwrap();
        assert!(report.symmetrizable, "{report:?}");
    }

    #[test]
    fn bsc_families_below_half_are_nonsymmetrizable() {
        for &(lo, hi) in &[(0.0, 0.2), (0.05, 0.2), (0.1, 0.45), (0.3, 0.49)] {
            let family = StateFamily::new(vec![bsc(lo), bsc(hi)]).unwrap();
            let report = is_symmetrizable(&family, 1e-8).unwrap();
            assert!(
                !report.symmetrizable,
                "family ({lo}, {hi}) reported symmetrizable: {report:?}"
            );
        }
    }

    #[test]
    fn redundant_mixture_vertex_keeps_the_verdict() {
        let base = StateFamily::new(vec![bsc(0.05), bsc(0.2)]).unwrap();
        let mixture = bsc(0.125); // midpoint of the family
        let extended = StateFamily::new(vec![bsc(0.05), bsc(0.2), mixture]).unwrap();
        let a = is_symmetrizable(&base, 1e-8).unwrap();
        let b = is_symmetrizable(&extended, 1e-8).unwrap();
        assert_eq!(a.symmetrizable, b.symmetrizable);

        let xor_plus = StateFamily::new(vec![bsc(0.0), bsc(1.0), bsc(0.5)]).unwrap();
        let c = is_symmetrizable(&xor_plus, 1e-8).unwrap();
        assert!(c.symmetrizable, "{c:?}");
    }

    #[test]
    fn interior_verdicts() {
        let good = SavbcSpec::new(
            bsc(0.1),
            StateFamily::new(vec![bsc(0.2)]).unwrap(),
        )
        .unwrap();
        let report = interior_nonempty(&good, 1e-8).unwrap();
        assert!(report.nonempty, "{report:?}");

        let useless_w = SavbcSpec::new(
            bsc(0.5),
            StateFamily::new(vec![bsc(0.2)]).unwrap(),
        )
        .unwrap();
        let report = interior_nonempty(&useless_w, 1e-8).unwrap();
        assert!(!report.nonempty);
        assert!(report.reasons.iter().any(|r| r.contains("C_Sh")));

        let spoofable = SavbcSpec::new(bsc(0.1), xor_family()).unwrap();
        let report = interior_nonempty(&spoofable, 1e-8).unwrap();
        assert!(!report.nonempty);
        assert!(report.reasons.iter().any(|r| r.contains("symmetrizable")));
    }

    fn arb_pmf(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01..1.0f64, len).prop_map(|raw| {
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
    }

    fn arb_matrix(ni: usize, no: usize) -> impl Strategy<Value = StochasticMatrix> {
        proptest::collection::vec(arb_pmf(no), ni)
            .prop_map(|rows| StochasticMatrix::validate(rows).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn verdict_is_invariant_under_vertex_permutation(
            m0 in arb_matrix(2, 2),
            m1 in arb_matrix(2, 2),
            m2 in arb_matrix(2, 2),
        ) {
            let fwd = StateFamily::new(vec![m0.clone(), m1.clone(), m2.clone()]).unwrap();
            let rev = StateFamily::new(vec![m2, m0, m1]).unwrap();
            let a = is_symmetrizable(&fwd, 1e-8).unwrap();
            let b = is_symmetrizable(&rev, 1e-8).unwrap();
            prop_assert_eq!(a.symmetrizable, b.symmetrizable);
            prop_assert!((a.residual - b.residual).abs() < 1e-7);
        }

        #[test]
        fn witness_residual_matches_enumeration(
            m0 in arb_matrix(2, 3),
            m1 in arb_matrix(2, 3),
        ) {
            let family = StateFamily::new(vec![m0, m1]).unwrap();
            let report = is_symmetrizable(&family, 1e-8).unwrap();
            let direct = residual_of(&family, &report.witness);
            prop_assert!(direct <= report.residual + 1e-7,
                "direct {direct} vs reported {}", report.residual);
        }
    }
}
