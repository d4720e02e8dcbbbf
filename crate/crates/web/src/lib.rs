//! Browser demo bindings. Every operation takes and returns JSON text so the
//! page needs no generated types; the plain functions are usable natively.

use serde::{Deserialize, Serialize};
use stationary_fermat::lagrangian::validate_assumptions;
use stationary_fermat::registry::parse_model;
use stationary_fermat::solver::minimize_arrival;
use stationary_fermat::{
    Branch, DiscretePath, Point, PolynomialModel, Region, SeedSpec, SolverOptions, StationaryModel,
};
use wasm_bindgen::prelude::*;

fn default_segments() -> usize {
    64
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub model: String,
    pub p: [f64; 2],
    pub q: [f64; 2],
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default)]
    pub winding: i64,
    #[serde(default)]
    pub minus: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveReply {
    pub t_plus: f64,
    pub t_minus: f64,
    pub converged: bool,
    pub iters: usize,
    pub el_residual: f64,
    pub winding: Vec<i64>,
    /// Spatial nodes of the geodesic with periodic axes unwrapped.
    pub xy: Vec<[f64; 2]>,
    /// Time coordinate of each node of the geodesic.
    pub t: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeRequest {
    pub model: String,
    pub at: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    90
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConeReply {
    /// Spatial velocities reached in unit time along lightlike directions.
    pub curve: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub model: String,
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub kappas: Vec<f64>,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default)]
    pub winding: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kappa: f64,
    pub admissible: bool,
    pub t_plus: Option<f64>,
    pub converged: bool,
}

fn planar_model(spec: &str) -> Result<PolynomialModel, String> {
    let model = parse_model(spec).map_err(|e| e.to_string())?;
    if model.dim() != 2 {
        return Err(format!("the demo draws planar models; '{spec}' has dimension {}", model.dim()));
    }
    Ok(model)
}

fn seed_for(model: &PolynomialModel, winding: i64) -> SeedSpec {
    if model.topology().is_periodic() {
        SeedSpec::Winding(winding)
    } else {
        SeedSpec::Straight
    }
}

fn unwrap_xy(path: &DiscretePath) -> Vec<[f64; 2]> {
    let periods = path.topology().periods().to_vec();
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(path.nodes().len());
    for node in path.nodes() {
        let mut xy = [node.y[0], node.y[1]];
        if let Some(prev) = out.last() {
            for k in 0..2 {
                if let Some(per) = periods[k] {
                    xy[k] -= per * ((xy[k] - prev[k]) / per).round();
                }
            }
        }
        out.push(xy);
    }
    out
}

const GATE_SAMPLES: usize = 400;

/// Sampled upper bound on admissible energies over the endpoint box.
fn kappa_bound(model: &PolynomialModel, p: [f64; 2], q: [f64; 2]) -> Result<f64, String> {
    let lo = vec![p[0].min(q[0]) - 1.0, p[1].min(q[1]) - 1.0];
    let hi = vec![p[0].max(q[0]) + 1.0, p[1].max(q[1]) + 1.0];
    let report = validate_assumptions(model, &Region::new(lo, hi), GATE_SAMPLES, 0).map_err(|e| e.to_string())?;
    Ok(report.kappa_admissible_bound)
}

fn solve_inner(req: &SolveRequest, bound: f64) -> Result<SolveReply, String> {
    let model = planar_model(&req.model)?;
    if req.kappa > bound {
        return Err(format!("kappa = {} is above the admissible bound {bound:.6}", req.kappa));
    }
    let opts = SolverOptions {
        segments: req.segments,
        max_iters: 2000,
        branch: if req.minus { Branch::Minus } else { Branch::Plus },
        ..SolverOptions::default()
    };
    let (p, q) = (Point::new(req.p.to_vec(), 0.0), Point::new(req.q.to_vec(), 0.0));
    let r = minimize_arrival(&model, &p, &q, req.kappa, &seed_for(&model, req.winding), &opts)
        .map_err(|e| e.to_string())?;
    Ok(SolveReply {
        t_plus: r.arrival.t_plus,
        t_minus: r.arrival.t_minus,
        converged: r.converged,
        iters: r.iters,
        el_residual: r.el_residual,
        winding: r.winding.clone(),
        xy: unwrap_xy(&r.geodesic),
        t: r.geodesic.nodes().iter().map(|n| n.t).collect(),
    })
}

/// Solves one arrival problem in the plane. Input and output are JSON.
pub fn solve_json(request: &str) -> Result<String, String> {
    let req: SolveRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let bound = kappa_bound(&planar_model(&req.model)?, req.p, req.q)?;
    serde_json::to_string(&solve_inner(&req, bound)?).map_err(|e| e.to_string())
}

/// Lightlike indicatrix at a point: for each unit direction `u`, the
/// velocity `u / tau` where `tau` is the future root of `L(x, (u, tau)) = 0`.
pub fn cone_json(request: &str) -> Result<String, String> {
    let req: ConeRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let model = planar_model(&req.model)?;
    if req.samples < 3 {
        return Err("need at least 3 samples".into());
    }
    let y = req.at.to_vec();
    let d = model.d_offset(&y);
    let mut curve = Vec::with_capacity(req.samples + 1);
    for i in 0..=req.samples {
        let a = std::f64::consts::TAU * i as f64 / req.samples as f64;
        let u = [a.cos(), a.sin()];
        let w = model.omega(&y, &u) + d;
        let disc = w * w + 2.0 * model.l0(&y, &u);
        let tau = w + disc.max(0.0).sqrt();
        if disc >= 0.0 && tau > 0.0 {
            curve.push([u[0] / tau, u[1] / tau]);
        }
    }
    serde_json::to_string(&ConeReply { curve }).map_err(|e| e.to_string())
}

/// Future arrival time as a function of the energy level.
pub fn sweep_json(request: &str) -> Result<String, String> {
    let req: SweepRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let bound = kappa_bound(&planar_model(&req.model)?, req.p, req.q)?;
    let points = req
        .kappas
        .iter()
        .map(|&kappa| {
            let one = SolveRequest {
                model: req.model.clone(),
                p: req.p,
                q: req.q,
                kappa,
                segments: req.segments,
                winding: req.winding,
                minus: false,
            };
            match solve_inner(&one, bound) {
                Ok(r) => SweepPoint {
                    kappa,
                    admissible: true,
                    t_plus: Some(r.t_plus),
                    converged: r.converged,
                },
                Err(_) => SweepPoint {
                    kappa,
                    admissible: kappa <= bound,
                    t_plus: None,
                    converged: false,
                },
            }
        })
        .collect::<Vec<_>>();
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve(request: &str) -> Result<String, JsError> {
    solve_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cone(request: &str) -> Result<String, JsError> {
    cone_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(request: &str) -> Result<String, JsError> {
    sweep_json(request).map_err(|e| JsError::new(&e))
}
