//! Browser bindings for the interactive demo page. Three operations are
//! exposed, all JSON-in/JSON-out so the page needs no generated types:
//! the closed-form binary-symmetric boundary sweep, the general region
//! search on a pasted channel spec, and the symmetrizability verdict.
//!
//! The `*_impl` functions carry the logic and run on any target; the
//! `#[wasm_bindgen]` wrappers only translate errors for JavaScript.

use savbc::bsc_example::{bs_region_boundary, BsSavbcParams};
use savbc::channels::SavbcSpec;
use savbc::regions::{bounding_triangle, compute_region, corner_points, SearchBudget};
use savbc::symmetrizability::{interior_nonempty, is_symmetrizable};
use wasm_bindgen::prelude::*;

fn vertices_json(region: &savbc::RateRegion) -> serde_json::Value {
    serde_json::json!(region
        .vertices()
        .iter()
        .map(|v| [v.rc, v.rp])
        .collect::<Vec<_>>())
}

fn bs_boundary_impl(p: f64, p_min: f64, p_max: f64, n_alpha: usize) -> Result<String, String> {
    let params = BsSavbcParams::new(p, p_min.min(p_max), p_max).map_err(|e| e.to_string())?;
    let boundary = bs_region_boundary(&params, n_alpha.max(2)).map_err(|e| e.to_string())?;
    let samples: Vec<serde_json::Value> = boundary
        .samples
        .iter()
        .map(|s| serde_json::json!([s.alpha, s.rc_bound, s.rp_bound, s.sum_bound]))
        .collect();
    let doc = serde_json::json!({
        "is_triangle": boundary.is_triangle,
        "samples": samples,
        "hull": vertices_json(&boundary.hull),
    });
    Ok(doc.to_string())
}

fn region_impl(
    spec_json: &str,
    directions: usize,
    restarts: usize,
    seed: u64,
) -> Result<String, String> {
    let spec = SavbcSpec::parse_str(spec_json).map_err(|e| e.to_string())?;
    if spec.x_size() > 4 || spec.y_size() > 4 || spec.z_size() > 4 || spec.family().len() > 4 {
        return Err("demo page caps alphabets and state counts at 4".into());
    }
    let budget = SearchBudget {
        directions: directions.clamp(4, 96),
        restarts: restarts.clamp(1, 24),
        max_iters: 400,
        u_size: None,
        seed,
    };
    let result = compute_region(&spec, &budget, 1e-6).map_err(|e| e.to_string())?;
    let (lower, upper) = corner_points(&spec, 1e-6).map_err(|e| e.to_string())?;
    let triangle = bounding_triangle(&spec, 1e-9).map_err(|e| e.to_string())?;
    let doc = serde_json::json!({
        "vertices": vertices_json(&result.region),
        "warnings": result.warnings,
        "corner_points": [[lower.rc, lower.rp], [upper.rc, upper.rp]],
        "triangle": vertices_json(&triangle),
    });
    Ok(doc.to_string())
}

fn symmetrizable_impl(spec_json: &str, tol: f64) -> Result<String, String> {
    let spec = SavbcSpec::parse_str(spec_json).map_err(|e| e.to_string())?;
    let report = is_symmetrizable(spec.family(), tol.max(1e-12)).map_err(|e| e.to_string())?;
    let interior = interior_nonempty(&spec, tol.max(1e-12)).map_err(|e| e.to_string())?;
    let doc = serde_json::json!({
        "symmetrizable": report.symmetrizable,
        "residual": report.residual,
        "borderline": report.borderline,
        "witness": report.witness.sigma,
        "interior_nonempty": interior.nonempty,
        "w_capacity": interior.w_capacity,
        "reasons": interior.reasons,
    });
    Ok(doc.to_string())
}

/// Closed-form binary-symmetric region: per-alpha bounds and the hull,
/// for the fixed channel crossover `p` and adversary range
/// [`p_min`, `p_max`].
#[wasm_bindgen]
pub fn bs_boundary_json(p: f64, p_min: f64, p_max: f64, n_alpha: usize) -> Result<String, JsValue> {
    bs_boundary_impl(p, p_min, p_max, n_alpha).map_err(|e| JsValue::from_str(&e))
}

/// General region search on a channel-spec document. The budget knobs
/// are capped so a misclick cannot hang the page thread.
#[wasm_bindgen]
pub fn region_json(
    spec_json: &str,
    directions: usize,
    restarts: usize,
    seed: u64,
) -> Result<String, JsValue> {
    region_impl(spec_json, directions, restarts, seed).map_err(|e| JsValue::from_str(&e))
}

/// Symmetrizability verdict plus the interior test for a channel spec.
#[wasm_bindgen]
pub fn symmetrizable_json(spec_json: &str, tol: f64) -> Result<String, JsValue> {
    symmetrizable_impl(spec_json, tol).map_err(|e| JsValue::from_str(&e))
}
