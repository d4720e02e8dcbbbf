//! Piecewise-linear paths on the uniform grid `s_i = i/N`, midpoint
//! quadrature of the action, energy and charge, and the constant-charge
//! manifold realized by an explicit projection on the `t` components.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::lagrangian::{eval_e, eval_l, eval_n};
use crate::model::{dot, Point, StationaryModel, TangentVector, Topology};

/// Relative tolerance for membership in the constant-charge manifold.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    nodes: Vec<Point>,
    topology: Topology,
}

/// Nodal variation field; both endpoint entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    pub deltas: Vec<TangentVector>,
}

impl TangentField {
    pub fn zeros(segments: usize, dim: usize) -> Self {
        Self {
            deltas: vec![TangentVector::zero(dim); segments + 1],
        }
    }

    /// A field `mu * K`.
    pub fn along_symmetry(mu: &[f64], dim: usize) -> Self {
        Self {
            deltas: mu
                .iter()
                .map(|&m| TangentVector::new(vec![0.0; dim], m))
                .collect(),
        }
    }

    pub fn segments(&self) -> usize {
        self.deltas.len() - 1
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            deltas: self
                .deltas
                .iter()
                .map(|d| TangentVector::new(d.nu.iter().map(|v| a * v).collect::<Vec<_>>(), a * d.tau))
                .collect(),
        }
    }

    fn check_endpoints(&self) -> Result<()> {
        let zero = |d: &TangentVector| d.tau == 0.0 && d.nu.iter().all(|&v| v == 0.0);
        if self.deltas.len() < 2 || !zero(&self.deltas[0]) || !zero(self.deltas.last().unwrap()) {
            return Err(FermatError::Argument(
                "tangent fields must vanish at both endpoints".into(),
            ));
        }
        Ok(())
    }
}

/// Per-segment Noether charge with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherProfile {
    pub values: Vec<f64>,
    pub mean: f64,
    pub max_deviation: f64,
}

impl NoetherProfile {
    pub fn tolerance(&self) -> f64 {
        CONSTRAINT_TOL * (1.0 + self.mean.abs())
    }

    pub fn is_constant(&self) -> bool {
        self.max_deviation <= self.tolerance()
    }
}

/// Midpoint and velocity of one segment.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub mid: Point,
    pub vel: TangentVector,
}

impl DiscretePath {
    pub fn new(nodes: Vec<Point>, topology: Topology) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(FermatError::Argument("a path needs at least one segment".into()));
        }
        let m = topology.dim();
        if nodes.iter().any(|p| p.dim() != m) {
            return Err(FermatError::Argument(format!(
                "every node must have {m} spatial coordinates"
            )));
        }
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(FermatError::Argument("path coordinates must be finite".into()));
        }
        Ok(Self { nodes, topology })
    }

    /// Linear interpolant from `p` to `q` with `segments` segments. Periodic
    /// coordinates are interpolated as given and interior nodes wrapped.
    pub fn straight(p: &Point, q: &Point, segments: usize, topology: Topology) -> Result<Self> {
        Self::interpolate(p, q, &q.y, segments, topology)
    }

    /// Linear interpolant from `p` towards the lifted spatial target
    /// `lifted_y`, ending exactly at `q`.
    pub fn interpolate(
        p: &Point,
        q: &Point,
        lifted_y: &[f64],
        segments: usize,
        topology: Topology,
    ) -> Result<Self> {
        if segments == 0 {
            return Err(FermatError::Argument("segment count must be positive".into()));
        }
        let n = segments as f64;
        let mut nodes = Vec::with_capacity(segments + 1);
        nodes.push(p.clone());
        for i in 1..segments {
            let s = i as f64 / n;
            let y = p
                .y
                .iter()
                .zip(lifted_y)
                .enumerate()
                .map(|(k, (a, b))| topology.wrap(k, a + s * (b - a)))
                .collect::<Vec<_>>();
            nodes.push(Point::new(y, p.t + s * (q.t - p.t)));
        }
        nodes.push(q.clone());
        Self::new(nodes, topology)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.topology.dim()
    }

    pub fn start(&self) -> &Point {
        &self.nodes[0]
    }

    pub fn end(&self) -> &Point {
        &self.nodes[self.segments()]
    }

    /// Grid parameter `s_i = i/N`.
    pub fn s(&self, i: usize) -> f64 {
        i as f64 / self.segments() as f64
    }

    /// Replaces the spatial part of the interior nodes, wrapping periodic axes.
    pub fn set_interior_y(&mut self, k: usize, y: &[f64]) {
        debug_assert!(k > 0 && k < self.segments());
        for (j, v) in y.iter().enumerate() {
            self.nodes[k].y[j] = self.topology.wrap(j, *v);
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.segments() {
            return Err(FermatError::IndexOutOfRange {
                index: i,
                segments: self.segments(),
            });
        }
        Ok(())
    }

    fn spatial_step(&self, i: usize) -> Vec<f64> {
        let (a, b) = (&self.nodes[i - 1], &self.nodes[i]);
        (0..self.dim())
            .map(|k| self.topology.unwrap_diff(k, a.y[k], b.y[k]).0)
            .collect()
    }

    /// `N (x_i - x_{i-1})`, periodic coordinates unwrapped.
    pub fn velocity(&self, i: usize) -> Result<TangentVector> {
        self.check_index(i)?;
        Ok(self.velocity_unchecked(i))
    }

    fn velocity_unchecked(&self, i: usize) -> TangentVector {
        let n = self.segments() as f64;
        TangentVector {
            nu: self.spatial_step(i).into_iter().map(|d| n * d).collect(),
            tau: n * (self.nodes[i].t - self.nodes[i - 1].t),
        }
    }

    /// Coordinate average of the segment endpoints.
    pub fn midpoint(&self, i: usize) -> Result<Point> {
        self.check_index(i)?;
        Ok(self.midpoint_unchecked(i))
    }

    fn midpoint_unchecked(&self, i: usize) -> Point {
        let a = &self.nodes[i - 1];
        let y = a
            .y
            .iter()
            .zip(self.spatial_step(i))
            .map(|(y0, d)| y0 + 0.5 * d)
            .collect::<Vec<_>>();
        Point::new(y, 0.5 * (a.t + self.nodes[i].t))
    }

    pub(crate) fn segment_data(&self) -> Vec<Segment> {
        (1..=self.segments())
            .map(|i| Segment {
                mid: self.midpoint_unchecked(i),
                vel: self.velocity_unchecked(i),
            })
            .collect()
    }

    /// Number of periods traversed along each periodic axis, relative to the
    /// stored endpoint difference.
    pub fn winding(&self) -> Vec<i64> {
        self.topology
            .periodic_axes()
            .into_iter()
            .map(|k| {
                let period = self.topology.period(k).unwrap();
                let travelled: f64 = (1..=self.segments())
                    .map(|i| self.topology.unwrap_diff(k, self.nodes[i - 1].y[k], self.nodes[i].y[k]).0)
                    .sum();
                let direct = self.end().y[k] - self.start().y[k];
                ((travelled - direct) / period).round() as i64
            })
            .collect()
    }

    /// Writes the node table `s, y1..ym, t` with 17 significant digits.
    pub fn write_table<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["s".to_string()];
        header.extend((1..=self.dim()).map(|k| format!("y{k}")));
        header.push("t".to_string());
        w.write_record(&header)?;
        for (i, p) in self.nodes.iter().enumerate() {
            let mut row = vec![fmt17(self.s(i))];
            row.extend(p.y.iter().map(|v| fmt17(*v)));
            row.push(fmt17(p.t));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a node table written by [`DiscretePath::write_table`].
    pub fn read_table<R: Read>(reader: R, topology: Topology) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let m = topology.dim();
        if r.headers()?.len() != m + 2 {
            return Err(FermatError::Parse {
                location: Some("header".into()),
                message: format!("expected {} columns (s, y1..y{m}, t)", m + 2),
            });
        }
        let mut nodes = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| FermatError::Parse {
                    location: Some(format!("row {}", row + 2)),
                    message: e.to_string(),
                })?;
            if vals.len() != m + 2 {
                return Err(FermatError::Parse {
                    location: Some(format!("row {}", row + 2)),
                    message: "wrong number of columns".into(),
                });
            }
            nodes.push(Point::new(vals[1..=m].to_vec(), vals[m + 1]));
        }
        Self::new(nodes, topology)
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

pub fn velocity(path: &DiscretePath, i: usize) -> Result<TangentVector> {
    path.velocity(i)
}

pub fn midpoint(path: &DiscretePath, i: usize) -> Result<Point> {
    path.midpoint(i)
}

/// Midpoint-rule quadrature of `L`.
pub fn action(model: &dyn StationaryModel, path: &DiscretePath) -> Result<f64> {
    let segs = path.segment_data();
    let vals = segs
        .iter()
        .map(|s| eval_l(model, &s.mid, &s.vel))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(vals.into_iter(), path.segments()))
}

/// Midpoint-rule quadrature of `E`.
pub fn energy_integral(model: &dyn StationaryModel, path: &DiscretePath) -> Result<f64> {
    let segs = path.segment_data();
    let vals = segs
        .iter()
        .map(|s| eval_e(model, &s.mid, &s.vel))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(vals.into_iter(), path.segments()))
}

pub fn noether_values(model: &dyn StationaryModel, path: &DiscretePath) -> Result<NoetherProfile> {
    let values = path
        .segment_data()
        .iter()
        .map(|s| eval_n(model, &s.mid, &s.vel))
        .collect::<Result<Vec<_>>>()?;
    let mean = mean(values.iter().copied(), values.len());
    let max_deviation = values.iter().fold(0.0f64, |acc, v| acc.max((v - mean).abs()));
    Ok(NoetherProfile {
        values,
        mean,
        max_deviation,
    })
}

/// Errors unless the path has constant charge within [`CONSTRAINT_TOL`].
pub fn require_constraint(model: &dyn StationaryModel, path: &DiscretePath) -> Result<NoetherProfile> {
    let prof = noether_values(model, path)?;
    if !prof.is_constant() {
        return Err(FermatError::NotInConstraint {
            deviation: prof.max_deviation,
            tolerance: prof.tolerance(),
        });
    }
    Ok(prof)
}

/// Per-segment `omega(ybar, nu) + d(ybar)`.
fn drift_terms(model: &dyn StationaryModel, segs: &[Segment]) -> Vec<f64> {
    segs.iter()
        .map(|s| model.omega(&s.mid.y, &s.vel.nu) + model.d_offset(&s.mid.y))
        .collect()
}

/// Projects onto the constant-charge manifold by recomputing the `t`
/// components: with `a_i = omega_i + d_i`, the charge `a_i - tau_i` is the
/// constant `c = mean(a) - (t_N - t_0)`, and `t` is integrated from `t_0`.
/// Spatial components and both endpoints are preserved bitwise.
pub fn project_to_n(model: &dyn StationaryModel, path: &DiscretePath) -> Result<DiscretePath> {
    let segs = path.segment_data();
    let a = drift_terms(model, &segs);
    if let Some(bad) = a.iter().position(|v| !v.is_finite()) {
        let s = &segs[bad];
        return Err(FermatError::NonFinite {
            y: s.mid.y.clone(),
            t: s.mid.t,
            nu: s.vel.nu.clone(),
            tau: s.vel.tau,
        });
    }
    let n = path.segments();
    let nf = n as f64;
    let t0 = path.start().t;
    let c = mean(a.iter().copied(), n) - (path.end().t - t0);
    let mut out = path.clone();
    let mut acc = 0.0;
    for i in 1..n {
        acc += a[i - 1] - c;
        out.nodes[i].t = t0 + acc / nf;
    }
    Ok(out)
}

/// Per-segment `y`-gradient of `omega_y(nu) + d(y)` at fixed `nu`, and the
/// covector `w(ybar)`.
pub(crate) fn drift_jacobians(model: &dyn StationaryModel, segs: &[Segment]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = model.dim();
    let mut grads = Vec::with_capacity(segs.len());
    let mut covs = Vec::with_capacity(segs.len());
    let mut dd = vec![0.0; m];
    for s in segs {
        let mut g = vec![0.0; m];
        model.domega_dy(&s.mid.y, &s.vel.nu, &mut g);
        model.dd_dy(&s.mid.y, &mut dd);
        for (gk, dk) in g.iter_mut().zip(&dd) {
            *gk += dk;
        }
        let mut w = vec![0.0; m];
        model.omega_covector(&s.mid.y, &mut w);
        grads.push(g);
        covs.push(w);
    }
    (grads, covs)
}

/// Linearized drift `a_i` of a spatial variation `dy` (nodal, endpoints zero).
pub(crate) fn linearized_drift(
    grads: &[Vec<f64>],
    covs: &[Vec<f64>],
    dy: &[Vec<f64>],
) -> Vec<f64> {
    let nf = grads.len() as f64;
    (1..=grads.len())
        .map(|i| {
            let g = &grads[i - 1];
            let w = &covs[i - 1];
            let (a, b) = (&dy[i - 1], &dy[i]);
            let mut v = 0.0;
            for k in 0..g.len() {
                v += g[k] * 0.5 * (a[k] + b[k]) + w[k] * nf * (b[k] - a[k]);
            }
            v
        })
        .collect()
}

/// `t` components of the tangent field to the constant-charge manifold with
/// spatial part `dy`.
pub(crate) fn slaved_time_variation(lin: &[f64]) -> Vec<f64> {
    let n = lin.len();
    let nf = n as f64;
    let abar = mean(lin.iter().copied(), n);
    let mut xi = vec![0.0; n + 1];
    let mut acc = 0.0;
    for i in 1..n {
        acc += lin[i - 1] - abar;
        xi[i] = acc / nf;
    }
    xi
}

/// Splits `delta = xi + mu K` with `xi` tangent to the constant-charge
/// manifold (constant linearized charge) and `mu` vanishing at the endpoints.
pub fn tangent_split(
    model: &dyn StationaryModel,
    path: &DiscretePath,
    delta: &TangentField,
) -> Result<(TangentField, Vec<f64>)> {
    delta.check_endpoints()?;
    if delta.segments() != path.segments() {
        return Err(FermatError::Argument("field and path grids differ".into()));
    }
    require_constraint(model, path)?;
    let segs = path.segment_data();
    let (grads, covs) = drift_jacobians(model, &segs);
    let dy: Vec<Vec<f64>> = delta.deltas.iter().map(|d| d.nu.clone()).collect();
    let xi_t = slaved_time_variation(&linearized_drift(&grads, &covs, &dy));
    let n = path.segments();
    let mut mu = vec![0.0; n + 1];
    let mut xi = delta.clone();
    for k in 1..n {
        xi.deltas[k].tau = xi_t[k];
        mu[k] = delta.deltas[k].tau - xi_t[k];
    }
    Ok((xi, mu))
}

/// Discrete `H^1_0` inner product `sum_i <d1', d2'> / N`.
pub fn h1_inner(path: &DiscretePath, d1: &TangentField, d2: &TangentField) -> f64 {
    debug_assert_eq!(d1.deltas.len(), path.nodes.len());
    let nf = path.segments() as f64;
    (1..=path.segments())
        .map(|i| {
            let (a1, b1) = (&d1.deltas[i - 1], &d1.deltas[i]);
            let (a2, b2) = (&d2.deltas[i - 1], &d2.deltas[i]);
            let spatial: f64 = (0..a1.nu.len())
                .map(|k| (b1.nu[k] - a1.nu[k]) * (b2.nu[k] - a2.nu[k]))
                .sum();
            spatial + (b1.tau - a1.tau) * (b2.tau - a2.tau)
        })
        .sum::<f64>()
        * nf
}

/// `(F^t z)(s) = psi(t s, z(s))`: adds `t s_i` to each `t` coordinate.
pub fn apply_flow(path: &DiscretePath, t: f64) -> DiscretePath {
    let mut out = path.clone();
    let n = path.segments();
    for (i, node) in out.nodes.iter_mut().enumerate() {
        if i == n {
            node.t += t;
        } else {
            node.t += t * (i as f64 / n as f64);
        }
    }
    out
}

/// Lightlike lift of a spatial path: each segment gets
/// `tau_i = omega_i + sqrt(omega_i^2 + 2 L0_i)`, starting at `t0`.
pub fn lightlike_lift(
    model: &dyn StationaryModel,
    spatial: &[Vec<f64>],
    t0: f64,
) -> Result<DiscretePath> {
    if !model.is_homogeneous() {
        return Err(FermatError::Unsupported(
            "lightlike lifts need a 2-homogeneous fiber Lagrangian".into(),
        ));
    }
    let nodes: Vec<Point> = spatial.iter().map(|y| Point::new(y.clone(), t0)).collect();
    let mut path = DiscretePath::new(nodes, model.topology())?;
    let segs = path.segment_data();
    let nf = path.segments() as f64;
    let mut t = t0;
    for (i, s) in segs.iter().enumerate() {
        let w = model.omega(&s.mid.y, &s.vel.nu);
        let tau = w + (w * w + 2.0 * model.l0(&s.mid.y, &s.vel.nu)).sqrt();
        t += tau / nf;
        path.nodes[i + 1].t = t;
    }
    Ok(path)
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
