//! Stationary Lagrangians in adapted coordinates `S x R`, with the symmetry
//! field `K = d/dt`.
//!
//! A model supplies the fiber Lagrangian `L0(y, nu)`, the one-form
//! `omega_y(nu)` and the affine offset `d(y)`; the full Lagrangian is
//! `L0 + (omega + d) tau - tau^2 / 2`. Derivatives fall back to central
//! finite differences when a model does not provide them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::poly::Polynomial;

/// A point `(y, t)` of the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub y: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(y: impl Into<Vec<f64>>, t: f64) -> Self {
        Self { y: y.into(), t }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.y.iter().all(|v| v.is_finite())
    }
}

/// A tangent vector `(nu, tau)`; `K` is `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub nu: Vec<f64>,
    pub tau: f64,
}

impl TangentVector {
    pub fn new(nu: impl Into<Vec<f64>>, tau: f64) -> Self {
        Self { nu: nu.into(), tau }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            nu: vec![0.0; dim],
            tau: 0.0,
        }
    }

    /// The symmetry field in adapted coordinates.
    pub fn symmetry(dim: usize) -> Self {
        Self {
            nu: vec![0.0; dim],
            tau: 1.0,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.nu.iter().map(|v| v * v).sum::<f64>() + self.tau * self.tau).sqrt()
    }
}

/// Periodic identifications of the spatial coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    periods: Vec<Option<f64>>,
}

impl Topology {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            periods: vec![None; dim],
        }
    }

    pub fn with_periods(periods: Vec<Option<f64>>) -> Result<Self> {
        if let Some(p) = periods.iter().flatten().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(FermatError::Argument(format!(
                "period must be positive and finite, got {p}"
            )));
        }
        Ok(Self { periods })
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn period(&self, k: usize) -> Option<f64> {
        self.periods[k]
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn is_periodic(&self) -> bool {
        self.periods.iter().any(Option::is_some)
    }

    /// Indices of the periodic coordinates, in order.
    pub fn periodic_axes(&self) -> Vec<usize> {
        (0..self.periods.len())
            .filter(|&k| self.periods[k].is_some())
            .collect()
    }

    /// Nearest-representative difference `to - from` along axis `k`,
    /// together with the number of periods removed.
    pub fn unwrap_diff(&self, k: usize, from: f64, to: f64) -> (f64, i64) {
        let raw = to - from;
        match self.periods[k] {
            Some(p) => {
                let wraps = (raw / p).round();
                (raw - wraps * p, wraps as i64)
            }
            None => (raw, 0),
        }
    }

    /// Canonical representative in `[0, period)` for periodic axes.
    pub fn wrap(&self, k: usize, x: f64) -> f64 {
        match self.periods[k] {
            Some(p) => x.rem_euclid(p),
            None => x,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_periodic() {
            return write!(f, "euclidean");
        }
        let parts: Vec<String> = self
            .periods
            .iter()
            .map(|p| p.map_or_else(|| "-".to_string(), |p| format!("{p}")))
            .collect();
        write!(f, "cylinder({})", parts.join(", "))
    }
}

/// Central finite-difference helpers used as derivative fallbacks.
pub mod fd {
    /// Relative step `1e-5 * (1 + |x_k|)`.
    pub fn step(xk: f64) -> f64 {
        1e-5 * (1.0 + xk.abs())
    }

    /// Central-difference gradient of `f` at `x`.
    pub fn gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], out: &mut [f64]) {
        let mut xs = x.to_vec();
        for k in 0..x.len() {
            let h = step(x[k]);
            xs[k] = x[k] + h;
            let fp = f(&xs);
            xs[k] = x[k] - h;
            let fm = f(&xs);
            xs[k] = x[k];
            out[k] = (fp - fm) / (2.0 * h);
        }
    }
}

/// Evaluator bundle for a stationary Lagrangian
/// `L((y,t),(nu,tau)) = L0(y,nu) + (omega_y(nu) + d(y)) tau - tau^2/2`.
///
/// Only `l0`, `omega` and the flags are required. A model that overrides
/// `d_offset` must also return `true` from `has_offset`.
pub trait StationaryModel: Send + Sync + fmt::Debug {
    /// Dimension `m` of the spatial slice.
    fn dim(&self) -> usize;

    fn name(&self) -> String {
        "custom".to_string()
    }

    fn l0(&self, y: &[f64], nu: &[f64]) -> f64;

    /// `omega_y(nu)`; must be linear in `nu`.
    fn omega(&self, y: &[f64], nu: &[f64]) -> f64;

    /// True when `L0` is positively 2-homogeneous in `nu`.
    fn is_homogeneous(&self) -> bool;

    fn topology(&self) -> Topology {
        Topology::euclidean(self.dim())
    }

    /// True when the Noether charge is affine, `N = Q + d`.
    fn has_offset(&self) -> bool {
        false
    }

    fn d_offset(&self, _y: &[f64]) -> f64 {
        0.0
    }

    /// True when `d` does not depend on `y`.
    fn offset_is_constant(&self) -> bool {
        !self.has_offset()
    }

    fn dl0_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        fd::gradient(|yy| self.l0(yy, nu), y, out);
    }

    fn dl0_dnu(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        fd::gradient(|vv| self.l0(y, vv), nu, out);
    }

    /// Fiber energy `E0 = dL0/dnu [nu] - L0`.
    fn e0(&self, y: &[f64], nu: &[f64]) -> f64 {
        if self.is_homogeneous() {
            return self.l0(y, nu);
        }
        let mut g = vec![0.0; nu.len()];
        self.dl0_dnu(y, nu, &mut g);
        dot(&g, nu) - self.l0(y, nu)
    }

    fn de0_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        if self.is_homogeneous() {
            self.dl0_dy(y, nu, out);
        } else {
            fd::gradient(|yy| self.e0(yy, nu), y, out);
        }
    }

    fn de0_dnu(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        if self.is_homogeneous() {
            self.dl0_dnu(y, nu, out);
        } else {
            fd::gradient(|vv| self.e0(y, vv), nu, out);
        }
    }

    /// `y`-gradient of `omega_y(nu)` at fixed `nu`.
    fn domega_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        fd::gradient(|yy| self.omega(yy, nu), y, out);
    }

    /// Components `w(y)` with `omega_y(nu) = w(y) . nu`.
    fn omega_covector(&self, y: &[f64], out: &mut [f64]) {
        let mut e = vec![0.0; self.dim()];
        for (j, o) in out.iter_mut().enumerate() {
            e[j] = 1.0;
            *o = self.omega(y, &e);
            e[j] = 0.0;
        }
    }

    fn dd_dy(&self, y: &[f64], out: &mut [f64]) {
        if self.has_offset() {
            fd::gradient(|yy| self.d_offset(yy), y, out);
        } else {
            out.fill(0.0);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A model whose `L0`, `omega` and `d` are polynomials, with exact derivatives.
///
/// `L0` is a polynomial in `2m` variables ordered `(y_1..y_m, nu_1..nu_m)`;
/// `omega` has one polynomial in `y` per component; `d` is a polynomial in `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialModel {
    name: String,
    dim: usize,
    l0: Polynomial,
    e0: Polynomial,
    omega: Vec<Polynomial>,
    d: Polynomial,
    has_offset: bool,
    homogeneous: bool,
    topology: Topology,
}

impl PolynomialModel {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        l0: Polynomial,
        omega: Vec<Polynomial>,
        d: Option<Polynomial>,
        topology: Topology,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(FermatError::Argument("spatial dimension must be positive".into()));
        }
        if l0.nvars() != 2 * dim {
            return Err(FermatError::Argument(format!(
                "L0 must be a polynomial in {} variables (y then nu), got {}",
                2 * dim,
                l0.nvars()
            )));
        }
        if omega.len() != dim || omega.iter().any(|w| w.nvars() != dim) {
            return Err(FermatError::Argument(format!(
                "omega needs {dim} component polynomials in {dim} variables"
            )));
        }
        if topology.dim() != dim {
            return Err(FermatError::Argument("topology dimension mismatch".into()));
        }
        let (d, has_offset) = match d {
            Some(d) if d.nvars() != dim => {
                return Err(FermatError::Argument(format!(
                    "offset d must be a polynomial in {dim} variables"
                )))
            }
            Some(d) => (d, true),
            None => (Polynomial::zero(dim), false),
        };
        let homogeneous = !l0.is_zero() && l0.degrees_in(dim..2 * dim).all(|deg| deg == 2);
        let e0 = l0.map_terms(|m| {
            let deg: u32 = m.exps[dim..].iter().sum();
            f64::from(deg) - 1.0
        });
        Ok(Self {
            name: name.into(),
            dim,
            l0,
            e0,
            omega,
            d,
            has_offset,
            homogeneous,
            topology,
        })
    }

    /// `L0 = |nu|^2 / 2`, `omega = 0`.
    pub fn flat(dim: usize) -> Self {
        Self::new(
            if dim == 2 { "flat".to_string() } else { format!("flat({dim})") },
            dim,
            half_square(dim),
            vec![Polynomial::zero(dim); dim],
            None,
            Topology::euclidean(dim),
        )
        .expect("flat model is well-formed")
    }

    /// Flat fiber with constant drift `omega(nu) = b . nu`.
    pub fn randers_const(b: &[f64]) -> Self {
        let dim = b.len();
        let omega = b.iter().map(|&bj| Polynomial::constant(dim, bj)).collect();
        Self::new(
            format!("randers-const({})", join(b)),
            dim,
            half_square(dim),
            omega,
            None,
            Topology::euclidean(dim),
        )
        .expect("randers-const model is well-formed")
    }

    /// Rotational drift on `R^2`: `omega(nu) = b (-y2 nu1 + y1 nu2)`.
    pub fn randers_rot(b: f64) -> Self {
        let omega = vec![
            Polynomial::from_terms(2, [(-b, vec![0, 1])]),
            Polynomial::from_terms(2, [(b, vec![1, 0])]),
        ];
        Self::new(
            format!("randers-rot({b})"),
            2,
            half_square(2),
            omega,
            None,
            Topology::euclidean(2),
        )
        .expect("randers-rot model is well-formed")
    }

    /// Flat model on `R x S^1` with `y2` periodic of period `2 pi r`.
    pub fn cylinder(r: f64) -> Result<Self> {
        let topology = Topology::with_periods(vec![None, Some(2.0 * PI * r)])?;
        Self::new(
            format!("cylinder({r})"),
            2,
            half_square(2),
            vec![Polynomial::zero(2); 2],
            None,
            topology,
        )
    }

    /// Wraps `base` with the constant offset `d = c0`.
    pub fn affine(base: &Self, c0: f64) -> Self {
        let mut m = base.with_offset(Polynomial::constant(base.dim, c0));
        m.name = format!("affine({}, {c0})", base.name);
        m
    }

    /// Wraps `base` with `d(y) = sum_k coeffs[k] * y1^k`.
    pub fn affine_field(base: &Self, coeffs: &[f64]) -> Self {
        let dim = base.dim;
        let d = Polynomial::from_terms(
            dim,
            coeffs.iter().enumerate().map(|(k, &c)| {
                let mut e = vec![0; dim];
                e[0] = k as u32;
                (c, e)
            }),
        );
        let mut m = base.with_offset(d);
        m.name = format!("affine-field({}, {})", base.name, join(coeffs));
        m
    }

    fn with_offset(&self, d: Polynomial) -> Self {
        let mut m = self.clone();
        m.d = d;
        m.has_offset = true;
        m
    }

    pub fn with_topology(mut self, topology: Topology) -> Result<Self> {
        if topology.dim() != self.dim {
            return Err(FermatError::Argument("topology dimension mismatch".into()));
        }
        self.topology = topology;
        Ok(self)
    }

    /// The same model with the drift one-form negated.
    pub fn reversed_drift(&self) -> Self {
        let mut m = self.clone();
        m.omega = self.omega.iter().map(|w| w.map_terms(|_| -1.0)).collect();
        m.name = format!("reversed({})", self.name);
        m
    }

    pub fn l0_poly(&self) -> &Polynomial {
        &self.l0
    }

    pub fn omega_polys(&self) -> &[Polynomial] {
        &self.omega
    }

    pub fn d_poly(&self) -> &Polynomial {
        &self.d
    }

    fn yv(&self, y: &[f64], nu: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.dim);
        x.extend_from_slice(y);
        x.extend_from_slice(nu);
        x
    }
}

fn half_square(dim: usize) -> Polynomial {
    Polynomial::from_terms(
        2 * dim,
        (0..dim).map(|j| {
            let mut e = vec![0; 2 * dim];
            e[dim + j] = 2;
            (0.5, e)
        }),
    )
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

impl StationaryModel for PolynomialModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn l0(&self, y: &[f64], nu: &[f64]) -> f64 {
        self.l0.eval(&self.yv(y, nu))
    }

    fn omega(&self, y: &[f64], nu: &[f64]) -> f64 {
        self.omega.iter().zip(nu).map(|(w, v)| w.eval(y) * v).sum()
    }

    fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn topology(&self) -> Topology {
        self.topology.clone()
    }

    fn has_offset(&self) -> bool {
        self.has_offset
    }

    fn d_offset(&self, y: &[f64]) -> f64 {
        self.d.eval(y)
    }

    fn offset_is_constant(&self) -> bool {
        self.d.is_constant()
    }

    fn dl0_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        self.l0.gradient_range(&self.yv(y, nu), 0..self.dim, out);
    }

    fn dl0_dnu(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        self.l0
            .gradient_range(&self.yv(y, nu), self.dim..2 * self.dim, out);
    }

    fn e0(&self, y: &[f64], nu: &[f64]) -> f64 {
        if self.homogeneous {
            self.l0(y, nu)
        } else {
            self.e0.eval(&self.yv(y, nu))
        }
    }

    fn de0_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        let poly = if self.homogeneous { &self.l0 } else { &self.e0 };
        poly.gradient_range(&self.yv(y, nu), 0..self.dim, out);
    }

    fn de0_dnu(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        let poly = if self.homogeneous { &self.l0 } else { &self.e0 };
        poly.gradient_range(&self.yv(y, nu), self.dim..2 * self.dim, out);
    }

    fn domega_dy(&self, y: &[f64], nu: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self
                .omega
                .iter()
                .zip(nu)
                .map(|(w, v)| w.partial(y, k) * v)
                .sum();
        }
    }

    fn omega_covector(&self, y: &[f64], out: &mut [f64]) {
        for (o, w) in out.iter_mut().zip(&self.omega) {
            *o = w.eval(y);
        }
    }

    fn dd_dy(&self, y: &[f64], out: &mut [f64]) {
        self.d.gradient_range(y, 0..self.dim, out);
    }
}
