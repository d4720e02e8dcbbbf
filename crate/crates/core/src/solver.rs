//! Minimization of the arrival time over the constant-charge manifold,
//! multi-start over winding classes, and certification of the reconstructed
//! geodesic.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::lagrangian::{dl_dv, dl_dx, eval_e};
use crate::model::{Point, StationaryModel, TangentVector};
use crate::path::{apply_flow, noether_values, project_to_n, sub, norm, DiscretePath};
use crate::variational::{
    arrival_times, has_arrival_principle, local_model, ArrivalEvaluation, Branch, ResidualForm, Target,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stopping tolerance on the `H^1` dual norm of the arrival-time gradient.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub initial_step: f64,
    pub segments: usize,
    pub rng_seed: u64,
    pub branch: Branch,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-7,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            initial_step: 1.0,
            segments: 200,
            rng_seed: 0,
            branch: Branch::Plus,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(FermatError::Argument(format!("solver option {what}")));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return bad("backtrack_ratio must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if self.segments < 2 {
            return bad("segments must be at least 2");
        }
        Ok(())
    }
}

/// How to initialize one descent run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSpec {
    /// Straight interpolant in `(y, t)`.
    Straight,
    /// Straight lift with `k` extra turns along the first periodic axis.
    Winding(i64),
    /// Straight interpolant plus a smooth random perturbation; the index
    /// selects the random stream.
    Random(u64),
    /// Explicit initial path.
    Path(DiscretePath),
}

impl std::fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedSpec::Straight => write!(f, "straight"),
            SeedSpec::Winding(k) => write!(f, "winding({k})"),
            SeedSpec::Random(i) => write!(f, "random({i})"),
            SeedSpec::Path(_) => write!(f, "path"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub seed: String,
    pub branch: Branch,
    pub z_star: DiscretePath,
    pub arrival: ArrivalEvaluation,
    /// `F^{t}(z_star)` with `t` the arrival time of the selected branch.
    pub geodesic: DiscretePath,
    pub el_residual: f64,
    pub energy_dev: f64,
    pub noether_dev: f64,
    pub winding: Vec<i64>,
    pub iters: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

impl SolutionRecord {
    pub fn time(&self) -> f64 {
        self.arrival.time(self.branch)
    }
}

/// Builds the initial path for a seed.
pub fn seed_path(
    model: &dyn StationaryModel,
    p: &Point,
    q: &Point,
    seed: &SeedSpec,
    opts: &SolverOptions,
) -> Result<DiscretePath> {
    let topology = model.topology();
    let n = opts.segments;
    match seed {
        SeedSpec::Straight => DiscretePath::straight(p, q, n, topology),
        SeedSpec::Winding(k) => {
            let lifted = lifted_target(model, q, *k)?;
            DiscretePath::interpolate(p, q, &lifted, n, topology)
        }
        SeedSpec::Random(index) => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                opts.rng_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let base = DiscretePath::straight(p, q, n, topology.clone())?;
            let dist = norm(&sub(&q.y, &p.y)).max(1.0);
            let m = p.dim();
            let amps: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..m).map(|_| rng.gen_range(-0.3..0.3) * dist).collect())
                .collect();
            let mut nodes = base.nodes().to_vec();
            for (i, node) in nodes.iter_mut().enumerate().take(n).skip(1) {
                let s = i as f64 / n as f64;
                for (j, a) in amps.iter().enumerate() {
                    let shape = ((j + 1) as f64 * std::f64::consts::PI * s).sin();
                    for k in 0..m {
                        node.y[k] = topology.wrap(k, node.y[k] + a[k] * shape);
                    }
                }
            }
            DiscretePath::new(nodes, topology)
        }
        SeedSpec::Path(path) => {
            if path.segments() != n && path.segments() < 2 {
                return Err(FermatError::Argument("initial path needs at least 2 segments".into()));
            }
            if path.start() != p || path.end() != q {
                return Err(FermatError::Argument("initial path must join p and q".into()));
            }
            Ok(path.clone())
        }
    }
}

fn lifted_target(model: &dyn StationaryModel, q: &Point, k: i64) -> Result<Vec<f64>> {
    let topology = model.topology();
    let mut lifted = q.y.clone();
    if k != 0 {
        let axis = *topology.periodic_axes().first().ok_or_else(|| {
            FermatError::Argument("winding seeds need a periodic coordinate".into())
        })?;
        lifted[axis] += k as f64 * topology.period(axis).unwrap();
    }
    Ok(lifted)
}

fn check_endpoints(model: &dyn StationaryModel, p: &Point, q: &Point, init: &DiscretePath) -> Result<()> {
    let m = model.dim();
    if p.dim() != m || q.dim() != m {
        return Err(FermatError::Argument(format!("endpoints must have {m} spatial coordinates")));
    }
    if !p.is_finite() || !q.is_finite() {
        return Err(FermatError::Argument("endpoints must be finite".into()));
    }
    let top = model.topology();
    let same_base = (0..m).all(|k| top.unwrap_diff(k, p.y[k], q.y[k]).0 == 0.0);
    if same_base && init.winding().iter().all(|&w| w == 0) {
        return Err(FermatError::DegenerateEndpoints);
    }
    Ok(())
}

const NOISE_FACTOR: f64 = 16.0;

/// Resolution below which two arrival times are treated as equal in the
/// line search.
pub fn rounding_level(f: f64) -> f64 {
    NOISE_FACTOR * f64::EPSILON * f.abs().max(1.0)
}

/// Projected `H^1` descent for the arrival time of `opts.branch`.
///
/// When [`has_arrival_principle`] holds the plus time is minimized (the minus
/// time maximized) with Armijo backtracking. Otherwise the iteration follows
/// the criticality residual and backtracks on its norm. In both cases the
/// stopping test is the `H^1` dual norm of the criticality residual, which
/// coincides with `|dt|` under the principle.
pub fn minimize_arrival(
    model: &dyn StationaryModel,
    p: &Point,
    q: &Point,
    kappa: f64,
    init: &SeedSpec,
    opts: &SolverOptions,
) -> Result<SolutionRecord> {
    opts.validate()?;
    if !kappa.is_finite() {
        return Err(FermatError::Argument("kappa must be finite".into()));
    }
    let seed = seed_path(model, p, q, init, opts)?;
    check_endpoints(model, p, q, &seed)?;

    let branch = opts.branch;
    let sign = branch.sign();
    let variational = has_arrival_principle(model);
    let target = if variational {
        Target::Time
    } else {
        Target::Residual(ResidualForm::Affine)
    };
    let mut z = project_to_n(model, &seed)?;
    let mut lm = local_model(model, &z, kappa, branch, target)?;
    let mut f = sign * lm.arrival.time(branch);
    let n = z.segments();
    let mut iters = 0;
    let mut converged = lm.norm <= opts.grad_tol;

    while !converged && iters < opts.max_iters {
        iters += 1;
        let mut alpha = opts.initial_step;
        let noise = rounding_level(f);
        let mut accepted = None;
        while alpha * lm.norm > f64::EPSILON {
            let mut trial = z.clone();
            for k in 1..n {
                let y: Vec<f64> = trial.nodes()[k]
                    .y
                    .iter()
                    .zip(&lm.riesz[k - 1])
                    .map(|(y, u)| y - alpha * sign * u)
                    .collect();
                trial.set_interior_y(k, &y);
            }
            let trial = project_to_n(model, &trial)?;
            if let Ok(cand) = local_model(model, &trial, kappa, branch, target) {
                let f_trial = sign * cand.arrival.time(branch);
                let accept = if variational {
                    let predicted = opts.armijo_c * alpha * lm.norm * lm.norm;
                    // Below the rounding level of f the decrease test cannot
                    // discriminate; require no increase beyond rounding and
                    // a strictly smaller gradient instead.
                    if predicted > noise {
                        f_trial <= f - predicted
                    } else {
                        f_trial <= f + noise && cand.norm < lm.norm
                    }
                } else {
                    cand.norm <= (1.0 - opts.armijo_c * alpha.min(1.0)) * lm.norm
                };
                if accept {
                    accepted = Some((trial, cand, f_trial));
                    break;
                }
            }
            alpha *= opts.backtrack_ratio;
        }
        let Some((trial, cand, f_trial)) = accepted else {
            break;
        };
        if variational {
            assert!(f_trial <= f + noise, "accepted step increased the objective");
        }
        z = trial;
        lm = cand;
        f = f_trial;
        converged = lm.norm <= opts.grad_tol;
    }

    certify(model, z, lm.arrival, lm.norm, iters, converged, branch, init.to_string())
}

#[allow(clippy::too_many_arguments)]
fn certify(
    model: &dyn StationaryModel,
    z: DiscretePath,
    arrival: ArrivalEvaluation,
    grad_norm: f64,
    iters: usize,
    converged: bool,
    branch: Branch,
    seed: String,
) -> Result<SolutionRecord> {
    let geodesic = apply_flow(&z, arrival.time(branch));
    let el = el_residual(model, &geodesic)?;
    let (energy_dev, noether_dev) = conservation_check(model, &geodesic, arrival.kappa)?;
    Ok(SolutionRecord {
        seed,
        branch,
        winding: z.winding(),
        z_star: z,
        arrival,
        geodesic,
        el_residual: el,
        energy_dev,
        noether_dev,
        iters,
        grad_norm,
        converged,
    })
}

/// Re-certifies an existing path on the manifold without optimizing it.
pub fn evaluate_path(
    model: &dyn StationaryModel,
    z: &DiscretePath,
    kappa: f64,
    branch: Branch,
) -> Result<SolutionRecord> {
    let target = if has_arrival_principle(model) {
        Target::Time
    } else {
        Target::Residual(ResidualForm::Affine)
    };
    let lm = local_model(model, z, kappa, branch, target)?;
    certify(model, z.clone(), lm.arrival, lm.norm, 0, false, branch, "path".into())
}

/// Euler-Lagrange residual of a path: the maximum over interior nodes of
/// `|N (dL/dv_{i+1} - dL/dv_i) - dL/dx(x_i, (v_i + v_{i+1})/2)|`.
pub fn el_residual(model: &dyn StationaryModel, path: &DiscretePath) -> Result<f64> {
    let n = path.segments();
    let nf = n as f64;
    let segs = path.segment_data();
    let momenta: Vec<TangentVector> = segs.iter().map(|s| dl_dv(model, &s.mid, &s.vel)).collect();
    let mut worst = 0.0f64;
    for k in 1..n {
        let (va, vb) = (&segs[k - 1].vel, &segs[k].vel);
        let vbar = TangentVector::new(
            va.nu.iter().zip(&vb.nu).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<_>>(),
            0.5 * (va.tau + vb.tau),
        );
        let force = dl_dx(model, &path.nodes()[k], &vbar);
        let (pa, pb) = (&momenta[k - 1], &momenta[k]);
        let mut sq = 0.0;
        for j in 0..pa.nu.len() {
            let r = nf * (pb.nu[j] - pa.nu[j]) - force.nu[j];
            sq += r * r;
        }
        let rt = nf * (pb.tau - pa.tau) - force.tau;
        sq += rt * rt;
        let r = sq.sqrt();
        if !r.is_finite() {
            return Err(FermatError::NonFinite {
                y: path.nodes()[k].y.clone(),
                t: path.nodes()[k].t,
                nu: vbar.nu,
                tau: vbar.tau,
            });
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `(max_i |E_i - kappa|, max_i |N_i - mean N|)` over segments.
pub fn conservation_check(model: &dyn StationaryModel, geodesic: &DiscretePath, kappa: f64) -> Result<(f64, f64)> {
    let mut energy_dev = 0.0f64;
    for s in geodesic.segment_data() {
        energy_dev = energy_dev.max((eval_e(model, &s.mid, &s.vel)? - kappa).abs());
    }
    let noether_dev = noether_values(model, geodesic)?.max_deviation;
    Ok((energy_dev, noether_dev))
}

/// Relative tolerance used to merge records with equal arrival time.
pub const MERGE_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct MultiStart {
    /// Deduplicated records sorted by arrival time.
    pub records: Vec<SolutionRecord>,
    /// Seeds whose run failed, with the error message.
    pub failures: Vec<(String, String)>,
}

impl MultiStart {
    pub fn converged(&self) -> impl Iterator<Item = &SolutionRecord> {
        self.records.iter().filter(|r| r.converged)
    }
}

fn rank(a: &SolutionRecord, b: &SolutionRecord) -> Ordering {
    b.converged
        .cmp(&a.converged)
        .then(a.el_residual.total_cmp(&b.el_residual))
}

/// Runs [`minimize_arrival`] from every seed (in parallel), merges records
/// of equal winding whose arrival times agree within [`MERGE_TOL`], keeping
/// converged records with the smaller Euler-Lagrange residual.
pub fn multi_start(
    model: &dyn StationaryModel,
    p: &Point,
    q: &Point,
    kappa: f64,
    seeds: &[SeedSpec],
    opts: &SolverOptions,
) -> MultiStart {
    let outcomes: Vec<(String, Result<SolutionRecord>)> = seeds
        .par_iter()
        .map(|s| (s.to_string(), minimize_arrival(model, p, q, kappa, s, opts)))
        .collect();

    let mut failures = Vec::new();
    let mut all = Vec::new();
    for (label, out) in outcomes {
        match out {
            Ok(r) => all.push(r),
            Err(e) => failures.push((label, e.to_string())),
        }
    }
    all.sort_by(|a, b| {
        a.time()
            .total_cmp(&b.time())
            .then_with(|| a.winding.cmp(&b.winding))
            .then_with(|| rank(a, b))
            .then_with(|| a.seed.cmp(&b.seed))
    });

    let mut kept: Vec<SolutionRecord> = Vec::new();
    for r in all {
        let dup = kept.iter_mut().find(|k| {
            k.winding == r.winding && (k.time() - r.time()).abs() <= MERGE_TOL
        });
        match dup {
            Some(k) => {
                if rank(&r, k) == Ordering::Less {
                    *k = r;
                }
            }
            None => kept.push(r),
        }
    }
    kept.sort_by(|a, b| a.time().total_cmp(&b.time()).then_with(|| a.winding.cmp(&b.winding)));
    MultiStart {
        records: kept,
        failures,
    }
}

/// Arrival evaluation of an arbitrary path after projection; convenience for
/// callers that only need the numbers.
pub fn arrival_of(model: &dyn StationaryModel, path: &DiscretePath, kappa: f64) -> Result<ArrivalEvaluation> {
    arrival_times(model, &project_to_n(model, path)?, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PolynomialModel, Topology};

    fn pt(y: [f64; 2], t: f64) -> Point {
        Point::new(y.to_vec(), t)
    }

    #[test]
    fn options_validation() {
        assert!(SolverOptions::default().validate().is_ok());
        let mut o = SolverOptions::default();
        o.backtrack_ratio = 1.0;
        assert!(o.validate().is_err());
        o = SolverOptions::default();
        o.armijo_c = 0.0;
        assert!(o.validate().is_err());
        o = SolverOptions::default();
        o.segments = 1;
        assert!(o.validate().is_err());
    }

    #[test]
    fn flat_solve_is_straight_lightlike() {
        let flat = PolynomialModel::flat(2);
        let opts = SolverOptions { segments: 50, ..Default::default() };
        let rec = minimize_arrival(&flat, &pt([0.0, 0.0], 0.0), &pt([3.0, 4.0], 0.0), 0.0, &SeedSpec::Random(3), &opts).unwrap();
        assert!(rec.converged, "{rec:?}");
        assert!((rec.arrival.t_plus - 5.0).abs() < 1e-6);
        assert_eq!(rec.geodesic.end().t, rec.arrival.t_plus);
        assert!(rec.el_residual < 1e-4);
    }

    #[test]
    fn degenerate_endpoints_are_rejected() {
        let flat = PolynomialModel::flat(2);
        let err = minimize_arrival(&flat, &pt([1.0, 1.0], 0.0), &pt([1.0, 1.0], 2.0), 0.0, &SeedSpec::Straight, &SolverOptions::default());
        assert!(matches!(err, Err(FermatError::DegenerateEndpoints)));
    }

    #[test]
    fn winding_seed_needs_periodic_axis() {
        let flat = PolynomialModel::flat(2);
        let err = minimize_arrival(&flat, &pt([0.0, 0.0], 0.0), &pt([1.0, 1.0], 0.0), 0.0, &SeedSpec::Winding(1), &SolverOptions::default());
        assert!(matches!(err, Err(FermatError::Argument(_))));
    }

    #[test]
    fn el_residual_examples() {
        let flat = PolynomialModel::flat(2);
        let line = DiscretePath::straight(&pt([0.0, 0.0], 0.0), &pt([4.0, -2.0], 8.0), 32, Topology::euclidean(2)).unwrap();
        let r0 = el_residual(&flat, &line).unwrap();
        assert!(r0 < 1e-12, "{r0}");
        let n = 40;
        let nodes = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                pt([s * (1.0 - s), 0.0], 0.0)
            })
            .collect();
        let para = DiscretePath::new(nodes, Topology::euclidean(2)).unwrap();
        let r = el_residual(&flat, &para).unwrap();
        assert!((r - 2.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn conservation_on_flat_geodesic() {
        let flat = PolynomialModel::flat(2);
        let z = DiscretePath::straight(&pt([0.0, 0.0], 0.0), &pt([3.0, 4.0], 0.0), 30, Topology::euclidean(2)).unwrap();
        let g = apply_flow(&z, 5.0);
        let (e, nd) = conservation_check(&flat, &g, 0.0).unwrap();
        assert!(e < 1e-12 && nd < 1e-12);
    }
}
