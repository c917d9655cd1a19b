//! Browser bindings: TT ranks of the test functions, POD against greedy
//! errors on the diffusion family, and an interactive reduced model.
//!
//! Every export returns a JSON string; the page parses it.

use serde_json::json;
use tensormor_core::formats::tt_svd;
use tensormor_core::generators::{diffusion_affine, uniform_grid, TestFunction};
use tensormor_core::greedy::strong_greedy;
use tensormor_core::linalg::sub;
use tensormor_core::order2::{pod, ErrorReport, SnapshotSet, Subspace};
use tensormor_core::rom::{AffineModel, ReducedModel};
use tensormor_core::Matrix;
use wasm_bindgen::prelude::*;

fn js(e: tensormor_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// TT-SVD of `name` (`additive`, `rank-one` or `multiquadric`) sampled on
/// `points^d` grid points of [-1, 1]^d.
#[wasm_bindgen]
pub fn tt_ranks(name: &str, d: usize, points: usize, tol: f64) -> Result<String, JsError> {
    let f = match name {
        "additive" => TestFunction::AdditiveFn { d },
        "rank-one" => TestFunction::RankOneFn { d },
        "multiquadric" => TestFunction::MultiquadricFn { d, c: 1.0 },
        other => return Err(JsError::new(&format!("unknown function {other:?}"))),
    };
    f.validate().map_err(js)?;
    let t = f.on_grid(&vec![uniform_grid(points, -1.0, 1.0); d]).map_err(js)?;
    let tt = tt_svd(&t, tol, None).map_err(js)?;
    let rounded = tt.to_dense().map_err(js)?;
    let err = t.sub(&rounded).map_err(js)?.norm() / t.norm();
    Ok(json!({
        "ranks": tt.ranks(),
        "entries": t.len(),
        "parameters": tt.storage_count(),
        "relative_error": err,
    })
    .to_string())
}

fn snapshots(model: &AffineModel, k: usize, seed: u64) -> tensormor_core::Result<SnapshotSet> {
    let params = model.domain.sample(k, seed)?;
    let cols = params.iter().map(|xi| model.full_solve(xi)).collect::<tensormor_core::Result<Vec<_>>>()?;
    SnapshotSet::uniform(Matrix::from_cols(&cols)?, params)
}

fn pairs(report: &ErrorReport) -> Vec<(usize, f64)> {
    report.records.iter().map(|r| (r.m, r.error)).collect()
}

/// POD (mean-square) and strong greedy (worst-case) errors up to dimension
/// `m` on `k` diffusion snapshots.
#[wasm_bindgen]
pub fn reduction_errors(grid: usize, d: usize, k: usize, m: usize, seed: u64) -> Result<String, JsError> {
    let model = diffusion_affine(grid, d).map_err(js)?;
    let s = snapshots(&model, k, seed).map_err(js)?;
    let (_, pod_report) = pod(&s, m).map_err(js)?;
    let g = strong_greedy(&s, m).map_err(js)?;
    Ok(json!({
        "pod": pairs(&pod_report),
        "greedy": pairs(&g.report),
        "selected": g.selected,
        "warnings": g.warnings,
    })
    .to_string())
}

/// A minimal-residual reduced model built once; `solve` is the online stage.
#[wasm_bindgen]
pub struct RomDemo {
    model: AffineModel,
    basis: Subspace,
    reduced: ReducedModel,
}

#[wasm_bindgen]
impl RomDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(grid: usize, d: usize, m: usize, seed: u64) -> Result<RomDemo, JsError> {
        let model = diffusion_affine(grid, d).map_err(js)?;
        let s = snapshots(&model, 100, seed).map_err(js)?;
        let basis = strong_greedy(&s, m).map_err(js)?.subspace;
        let reduced = ReducedModel::build(&model, &basis, None).map_err(js)?;
        Ok(RomDemo { model, basis, reduced })
    }

    pub fn dimension(&self) -> usize {
        self.basis.dim()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.model.domain.lower.clone()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.model.domain.upper.clone()
    }

    /// Reduced and full solutions at `xi` with the error, the best
    /// approximation error and the residual norm.
    pub fn solve(&self, xi: Vec<f64>) -> Result<String, JsError> {
        let sol = self.reduced.solve(&xi).map_err(js)?;
        let um = self.reduced.lift(&sol.coefficients);
        let u = self.model.full_solve(&xi).map_err(js)?;
        let best = self.basis.projection_error(&u).map_err(js)?;
        let bound = self.model.bounds_at(&xi).map(|(lo, hi)| hi / lo);
        Ok(json!({
            "reduced": um,
            "full": u,
            "error": norm(&sub(&u, &um)),
            "best_error": best,
            "residual": sol.residual,
            "bound": bound,
        })
        .to_string())
    }
}
