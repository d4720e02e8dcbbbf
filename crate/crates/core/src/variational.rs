//! Arrival-time functionals `t_pm^kappa = Q + sqrt(Q^2 + 2(E - kappa))` on
//! the constant-charge manifold, their first variations, the criticality
//! residual and the Randers arrival functional.
//!
//! First variations are assembled nodally from per-segment partials of the
//! midpoint-rule integrands, then reduced to the interior spatial nodes by
//! eliminating the `t` components (which are slaved to `y` on the manifold).
//! The `H^1` Riesz map on those coordinates is a tridiagonal solve.

use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::lagrangian::{eval_l, eval_q, shift_by_flow};
use crate::model::{dot, StationaryModel};
use crate::path::{
    drift_jacobians, linearized_drift, require_constraint, slaved_time_variation, DiscretePath,
    Segment, TangentField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalEvaluation {
    pub t_plus: f64,
    pub t_minus: f64,
    /// `sqrt(Q^2 + 2(E - kappa))`.
    pub s: f64,
    /// Constant charge (mean of the linear charge in the affine case).
    pub q_bar: f64,
    pub e_val: f64,
    pub kappa: f64,
    pub branch_valid: bool,
}

impl ArrivalEvaluation {
    pub fn time(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.t_plus,
            Branch::Minus => self.t_minus,
        }
    }
}

/// `H^1`-preconditioned gradient on the tangent space of the manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalGradient {
    pub field: TangentField,
    pub norm: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `integral of Q(z') ds` by the midpoint rule.
pub fn q_functional(model: &dyn StationaryModel, path: &DiscretePath) -> Result<f64> {
    let vals = path
        .segment_data()
        .iter()
        .map(|s| eval_q(model, &s.mid, &s.vel))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

/// `integral of d(z) ds` by the midpoint rule.
pub fn d_functional(model: &dyn StationaryModel, path: &DiscretePath) -> Result<f64> {
    let vals: Vec<f64> = path
        .segment_data()
        .iter()
        .map(|s| model.d_offset(&s.mid.y))
        .collect();
    Ok(mean(&vals))
}

fn energy_and_charge(model: &dyn StationaryModel, path: &DiscretePath) -> Result<(f64, f64)> {
    Ok((
        crate::path::energy_integral(model, path)?,
        q_functional(model, path)?,
    ))
}

/// Both arrival times of a path on the constant-charge manifold.
pub fn arrival_times(model: &dyn StationaryModel, path: &DiscretePath, kappa: f64) -> Result<ArrivalEvaluation> {
    require_constraint(model, path)?;
    let (e_val, q_bar) = energy_and_charge(model, path)?;
    arrival_from(q_bar, e_val, kappa)
}

fn arrival_from(q_bar: f64, e_val: f64, kappa: f64) -> Result<ArrivalEvaluation> {
    let s2 = q_bar * q_bar + 2.0 * (e_val - kappa);
    let eps = 1e-12 * (1.0 + e_val.abs());
    if !s2.is_finite() || s2 < -eps {
        return Err(FermatError::Inadmissible {
            kappa,
            reason: format!("Q^2 + 2(E - kappa) = {s2:e} is negative"),
        });
    }
    let s = s2.max(0.0).sqrt();
    Ok(ArrivalEvaluation {
        t_plus: q_bar + s,
        t_minus: q_bar - s,
        s,
        q_bar,
        e_val,
        kappa,
        branch_valid: s2 > eps,
    })
}

/// Errors unless `kappa` is below the sampled admissibility bound.
pub fn check_kappa(report: &crate::lagrangian::ValidationReport, kappa: f64) -> Result<()> {
    if report.admits(kappa) {
        Ok(())
    } else {
        Err(FermatError::Inadmissible {
            kappa,
            reason: format!(
                "kappa must not exceed -sup L(x,0) = {}",
                report.kappa_admissible_bound
            ),
        })
    }
}

/// `H(z, t) = integral of L(z, z' + t K) ds`.
pub fn h_functional(model: &dyn StationaryModel, path: &DiscretePath, t: f64) -> Result<f64> {
    let vals = path
        .segment_data()
        .iter()
        .map(|s| eval_l(model, &s.mid, &shift_by_flow(&s.vel, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

/// Nodal gradient of a path functional with respect to all node coordinates.
#[derive(Debug, Clone)]
pub(crate) struct NodalGradient {
    pub y: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

impl NodalGradient {
    fn zeros(nodes: usize, m: usize) -> Self {
        Self {
            y: vec![vec![0.0; m]; nodes],
            t: vec![0.0; nodes],
        }
    }

    /// Adds the contribution of segment `i` (1-based) of a functional
    /// `(1/N) sum f(ybar_i, nu_i, tau_i)`.
    fn add_segment(&mut self, i: usize, n: f64, d_mid: &[f64], d_nu: &[f64], d_tau: f64) {
        for k in 0..d_mid.len() {
            let half = 0.5 * d_mid[k] / n;
            self.y[i - 1][k] += half - d_nu[k];
            self.y[i][k] += half + d_nu[k];
        }
        self.t[i - 1] -= d_tau;
        self.t[i] += d_tau;
    }

    fn combine(terms: &[(f64, &NodalGradient)]) -> Self {
        let (a0, g0) = terms[0];
        let mut out = Self {
            y: g0.y.iter().map(|v| v.iter().map(|x| a0 * x).collect()).collect(),
            t: g0.t.iter().map(|x| a0 * x).collect(),
        };
        for &(a, g) in &terms[1..] {
            for (o, v) in out.y.iter_mut().zip(&g.y) {
                for (ok, vk) in o.iter_mut().zip(v) {
                    *ok += a * vk;
                }
            }
            for (o, v) in out.t.iter_mut().zip(&g.t) {
                *o += a * v;
            }
        }
        out
    }

    fn apply(&self, delta: &TangentField) -> f64 {
        self.y
            .iter()
            .zip(&self.t)
            .zip(&delta.deltas)
            .map(|((gy, gt), d)| dot(gy, &d.nu) + gt * d.tau)
            .sum()
    }
}

/// Nodal first variations of the energy, the linear charge, the offset
/// functional and of `L - E` (the action minus the energy).
pub(crate) struct FirstVariations {
    pub energy: NodalGradient,
    pub charge: NodalGradient,
    pub offset: NodalGradient,
    pub action_minus_energy: NodalGradient,
}

pub(crate) fn first_variations(model: &dyn StationaryModel, segs: &[Segment]) -> FirstVariations {
    let m = model.dim();
    let nodes = segs.len() + 1;
    let n = segs.len() as f64;
    let mut energy = NodalGradient::zeros(nodes, m);
    let mut charge = NodalGradient::zeros(nodes, m);
    let mut offset = NodalGradient::zeros(nodes, m);
    let mut lme = NodalGradient::zeros(nodes, m);
    let homogeneous = model.is_homogeneous();
    let affine = model.has_offset();

    let mut de0_dy = vec![0.0; m];
    let mut de0_dnu = vec![0.0; m];
    let mut dw = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut dd = vec![0.0; m];
    let mut dl0_dy = vec![0.0; m];
    let mut dl0_dnu = vec![0.0; m];
    let mut mid = vec![0.0; m];
    let mut nu = vec![0.0; m];
    let zeros = vec![0.0; m];

    for (idx, s) in segs.iter().enumerate() {
        let i = idx + 1;
        let (y, v, tau) = (&s.mid.y, &s.vel.nu, s.vel.tau);
        model.de0_dy(y, v, &mut de0_dy);
        model.de0_dnu(y, v, &mut de0_dnu);
        model.domega_dy(y, v, &mut dw);
        model.omega_covector(y, &mut w);
        model.dd_dy(y, &mut dd);
        let om = dot(&w, v);

        for k in 0..m {
            mid[k] = de0_dy[k] + dw[k] * tau;
            nu[k] = de0_dnu[k] + w[k] * tau;
        }
        energy.add_segment(i, n, &mid, &nu, om - tau);
        charge.add_segment(i, n, &dw, &w, -1.0);
        offset.add_segment(i, n, &dd, &zeros, 0.0);

        if homogeneous && !affine {
            continue;
        }
        if homogeneous {
            mid.fill(0.0);
            nu.fill(0.0);
        } else {
            model.dl0_dy(y, v, &mut dl0_dy);
            model.dl0_dnu(y, v, &mut dl0_dnu);
            for k in 0..m {
                mid[k] = dl0_dy[k] - de0_dy[k];
                nu[k] = dl0_dnu[k] - de0_dnu[k];
            }
        }
        for k in 0..m {
            mid[k] += dd[k] * tau;
        }
        lme.add_segment(i, n, &mid, &nu, model.d_offset(y));
    }
    FirstVariations {
        energy,
        charge,
        offset,
        action_minus_energy: lme,
    }
}

/// Reduces an ambient nodal gradient to the interior spatial nodes of the
/// manifold; entry `k-1` corresponds to node `k`.
pub(crate) fn reduce(
    g: &NodalGradient,
    grads: &[Vec<f64>],
    covs: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let n = grads.len();
    let nf = n as f64;
    // G_i = sum_{k=i}^{N-1} g_t[k], G_N = 0
    let mut tail = vec![0.0; n + 1];
    for i in (1..n).rev() {
        tail[i] = tail[i + 1] + g.t[i];
    }
    let gbar = tail[1..=n].iter().sum::<f64>() / nf;
    let beta: Vec<f64> = (0..=n).map(|i| (tail[i] - gbar) / nf).collect();
    (1..n)
        .map(|k| {
            let (g_k, w_k) = (&grads[k - 1], &covs[k - 1]);
            let (g_n, w_n) = (&grads[k], &covs[k]);
            (0..g.y[k].len())
                .map(|j| {
                    g.y[k][j]
                        + beta[k] * (0.5 * g_k[j] + nf * w_k[j])
                        + beta[k + 1] * (0.5 * g_n[j] - nf * w_n[j])
                })
                .collect()
        })
        .collect()
}

/// Solves `N tridiag(-1, 2, -1) u = r` coordinate-wise (the `H^1_0` Gram
/// matrix of tent functions on the spatial components).
pub(crate) fn h1_riesz(r: &[Vec<f64>], segments: usize) -> Vec<Vec<f64>> {
    let n = r.len();
    if n == 0 {
        return Vec::new();
    }
    let m = r[0].len();
    let scale = segments as f64;
    let mut u = vec![vec![0.0; m]; n];
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    for j in 0..m {
        // Thomas algorithm with a = c = -1, b = 2.
        cp[0] = -0.5;
        dp[0] = r[0][j] / (2.0 * scale);
        for i in 1..n {
            let denom = 2.0 + cp[i - 1];
            cp[i] = -1.0 / denom;
            dp[i] = (r[i][j] / scale + dp[i - 1]) / denom;
        }
        u[n - 1][j] = dp[n - 1];
        for i in (0..n - 1).rev() {
            u[i][j] = dp[i] - cp[i] * u[i + 1][j];
        }
    }
    u
}

pub(crate) fn dual_norm(r: &[Vec<f64>], u: &[Vec<f64>]) -> f64 {
    r.iter()
        .zip(u)
        .map(|(a, b)| dot(a, b))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// True when the critical points of `t_+` and `t_-` on the constant-charge
/// manifold are exactly the fixed-energy solutions: `L0` is 2-homogeneous
/// and the charge offset is constant, so `d(L - E)` and `dD` vanish.
pub fn has_arrival_principle(model: &dyn StationaryModel) -> bool {
    model.is_homogeneous() && model.offset_is_constant()
}

/// Which covector [`local_model`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    /// `dt_pm` of the branch time.
    Time,
    /// The criticality residual in the given form.
    Residual(ResidualForm),
}

/// Everything the solver needs at one iterate.
pub(crate) struct LocalModel {
    pub arrival: ArrivalEvaluation,
    /// `H^1` Riesz representative of the reduced target covector.
    pub riesz: Vec<Vec<f64>>,
    pub norm: f64,
    pub grads: Vec<Vec<f64>>,
    pub covs: Vec<Vec<f64>>,
}

fn branch_gradient(vars: &FirstVariations, ev: &ArrivalEvaluation, branch: Branch) -> NodalGradient {
    let sg = branch.sign();
    NodalGradient::combine(&[
        (1.0 + sg * ev.q_bar / ev.s, &vars.charge),
        (sg / ev.s, &vars.energy),
    ])
}

fn residual_gradient(
    vars: &FirstVariations,
    ev: &ArrivalEvaluation,
    branch: Branch,
    form: ResidualForm,
) -> NodalGradient {
    let dt = branch_gradient(vars, ev, branch);
    let sg = branch.sign();
    let offset_weight = match form {
        ResidualForm::Affine => sg * ev.time(branch) / ev.s,
        ResidualForm::Linear => 0.0,
    };
    NodalGradient::combine(&[
        (1.0, &dt),
        (sg / ev.s, &vars.action_minus_energy),
        (offset_weight, &vars.offset),
    ])
}

fn require_valid(ev: &ArrivalEvaluation) -> Result<()> {
    if ev.branch_valid {
        Ok(())
    } else {
        Err(FermatError::Inadmissible {
            kappa: ev.kappa,
            reason: "Q^2 + 2(E - kappa) vanishes; arrival times are not differentiable".into(),
        })
    }
}

pub(crate) fn local_model(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    kappa: f64,
    branch: Branch,
    target: Target,
) -> Result<LocalModel> {
    let arrival = arrival_times(model, path, kappa)?;
    require_valid(&arrival)?;
    let segs = path.segment_data();
    let vars = first_variations(model, &segs);
    let (grads, covs) = drift_jacobians(model, &segs);
    let g = match target {
        Target::Time => branch_gradient(&vars, &arrival, branch),
        Target::Residual(form) => residual_gradient(&vars, &arrival, branch, form),
    };
    let reduced = reduce(&g, &grads, &covs);
    let riesz = h1_riesz(&reduced, path.segments());
    let norm = dual_norm(&reduced, &riesz);
    Ok(LocalModel {
        arrival,
        riesz,
        norm,
        grads,
        covs,
    })
}

fn directional(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    kappa: f64,
    delta: &TangentField,
    branch: Branch,
) -> Result<f64> {
    if delta.deltas.len() != path.nodes().len() {
        return Err(FermatError::Argument("field and path grids differ".into()));
    }
    let ev = arrival_times(model, path, kappa)?;
    require_valid(&ev)?;
    let vars = first_variations(model, &path.segment_data());
    Ok(branch_gradient(&vars, &ev, branch).apply(delta))
}

/// Directional derivative `dt_+[delta] = dQ + (Q dQ + dE) / S`.
pub fn dt_plus(model: &dyn StationaryModel, path: &DiscretePath, kappa: f64, delta: &TangentField) -> Result<f64> {
    directional(model, path, kappa, delta, Branch::Plus)
}

/// Directional derivative `dt_-[delta] = dQ - (Q dQ + dE) / S`.
pub fn dt_minus(model: &dyn StationaryModel, path: &DiscretePath, kappa: f64, delta: &TangentField) -> Result<f64> {
    directional(model, path, kappa, delta, Branch::Minus)
}

/// `H^1` gradient of the selected arrival time on the manifold's tangent space.
pub fn arrival_gradient(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    kappa: f64,
    branch: Branch,
) -> Result<FunctionalGradient> {
    let lm = local_model(model, path, kappa, branch, Target::Time)?;
    let n = path.segments();
    let m = path.dim();
    let mut dy = vec![vec![0.0; m]; n + 1];
    dy[1..n].clone_from_slice(&lm.riesz);
    let xi_t = slaved_time_variation(&linearized_drift(&lm.grads, &lm.covs, &dy));
    let mut field = TangentField::zeros(n, m);
    for k in 1..n {
        field.deltas[k].nu = dy[k].clone();
        field.deltas[k].tau = xi_t[k];
    }
    Ok(FunctionalGradient { field, norm: lm.norm })
}

/// Which form of the criticality condition to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualForm {
    /// Includes the `t dD` term of the affine-charge condition.
    Affine,
    /// The linear-charge condition `dt = +-(dE - dL) / S`.
    Linear,
}

/// `H^1` dual norm of `dt_pm - rhs`, where for the plus branch
/// `rhs = (dE - dL - t_+ dD) / S` and for the minus branch
/// `rhs = (dL - dE + t_- dD) / S`.
pub fn criticality_residual(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    kappa: f64,
    branch: Branch,
) -> Result<f64> {
    criticality_residual_with(model, path, kappa, branch, ResidualForm::Affine)
}

pub fn criticality_residual_with(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    kappa: f64,
    branch: Branch,
    form: ResidualForm,
) -> Result<f64> {
    Ok(local_model(model, path, kappa, branch, Target::Residual(form))?.norm)
}

/// `J = integral of omega(x') + sqrt(omega(x')^2 + 2 L0(x, x')) ds` over a
/// spatial path given by its nodes.
pub fn randers_arrival(model: &dyn StationaryModel, spatial: &[Vec<f64>]) -> Result<f64> {
    if !model.is_homogeneous() || model.has_offset() {
        return Err(FermatError::Unsupported(
            "the Randers arrival functional needs a 2-homogeneous model with linear charge".into(),
        ));
    }
    let nodes = spatial
        .iter()
        .map(|y| crate::model::Point::new(y.clone(), 0.0))
        .collect();
    let path = DiscretePath::new(nodes, model.topology())?;
    let vals = path
        .segment_data()
        .iter()
        .map(|s| {
            let w = model.omega(&s.mid.y, &s.vel.nu);
            w + (w * w + 2.0 * model.l0(&s.mid.y, &s.vel.nu)).sqrt()
        })
        .collect::<Vec<_>>();
    let j = mean(&vals);
    if j.is_finite() {
        Ok(j)
    } else {
        Err(FermatError::Argument("non-finite Randers integrand".into()))
    }
}
