//! Pointwise evaluation of `L`, `E`, the Noether charge and `L_c`, the flow
//! shift of velocities, the causal cone test and sampled assumption checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::model::{dot, Point, StationaryModel, TangentVector};

fn finite(value: f64, x: &Point, v: &TangentVector) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FermatError::NonFinite {
            y: x.y.clone(),
            t: x.t,
            nu: v.nu.clone(),
            tau: v.tau,
        })
    }
}

/// `L = L0(y,nu) + (omega_y(nu) + d(y)) tau - tau^2/2`.
pub fn eval_l(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<f64> {
    let l0 = model.l0(&x.y, &v.nu);
    let w = model.omega(&x.y, &v.nu) + model.d_offset(&x.y);
    finite(l0 + w * v.tau - 0.5 * v.tau * v.tau, x, v)
}

/// `E = E0(y,nu) + omega_y(nu) tau - tau^2/2`; the offset `d` does not enter.
pub fn eval_e(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<f64> {
    let e0 = model.e0(&x.y, &v.nu);
    let w = model.omega(&x.y, &v.nu);
    finite(e0 + w * v.tau - 0.5 * v.tau * v.tau, x, v)
}

/// Linear part of the charge, `Q = omega_y(nu) - tau`.
pub fn eval_q(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<f64> {
    finite(model.omega(&x.y, &v.nu) - v.tau, x, v)
}

/// Full Noether charge `N = Q + d(y)`.
pub fn eval_n(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<f64> {
    let q = eval_q(model, x, v)?;
    finite(q + model.d_offset(&x.y), x, v)
}

/// `L_c = L + Q^2`.
pub fn eval_lc(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<f64> {
    let q = eval_q(model, x, v)?;
    Ok(eval_l(model, x, v)? + q * q)
}

/// `v + t K`.
pub fn shift_by_flow(v: &TangentVector, t: f64) -> TangentVector {
    TangentVector {
        nu: v.nu.clone(),
        tau: v.tau + t,
    }
}

/// Membership in the future causal cone `{L <= 0, Q < 0}`, written as
/// `tau >= omega + sqrt(omega^2 + 2 L0)`.
pub fn is_causal(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<bool> {
    if !model.is_homogeneous() {
        return Err(FermatError::Unsupported(
            "the causal cone is only defined for 2-homogeneous fiber Lagrangians".into(),
        ));
    }
    let w = model.omega(&x.y, &v.nu);
    let l0 = model.l0(&x.y, &v.nu);
    let bound = finite(w + (w * w + 2.0 * l0).sqrt(), x, v)?;
    Ok(v.tau >= bound)
}

/// Fiber derivative `dL/dv = (dL0/dnu + w tau, omega + d - tau)`.
pub(crate) fn dl_dv(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> TangentVector {
    let m = model.dim();
    let mut g = vec![0.0; m];
    let mut w = vec![0.0; m];
    model.dl0_dnu(&x.y, &v.nu, &mut g);
    model.omega_covector(&x.y, &mut w);
    for (gj, wj) in g.iter_mut().zip(&w) {
        *gj += wj * v.tau;
    }
    TangentVector {
        nu: g,
        tau: dot(&w, &v.nu) + model.d_offset(&x.y) - v.tau,
    }
}

/// Position derivative `dL/dx = (dL0/dy + (d omega/dy + dd/dy) tau, 0)`.
pub(crate) fn dl_dx(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> TangentVector {
    let m = model.dim();
    let mut g = vec![0.0; m];
    let mut dw = vec![0.0; m];
    let mut dd = vec![0.0; m];
    model.dl0_dy(&x.y, &v.nu, &mut g);
    model.domega_dy(&x.y, &v.nu, &mut dw);
    model.dd_dy(&x.y, &mut dd);
    for k in 0..m {
        g[k] += (dw[k] + dd[k]) * v.tau;
    }
    TangentVector { nu: g, tau: 0.0 }
}

fn dlc_dv(model: &dyn StationaryModel, x: &Point, v: &TangentVector) -> Result<TangentVector> {
    let mut g = dl_dv(model, x, v);
    let q = eval_q(model, x, v)?;
    let mut w = vec![0.0; model.dim()];
    model.omega_covector(&x.y, &mut w);
    for (gj, wj) in g.nu.iter_mut().zip(&w) {
        *gj += 2.0 * q * wj;
    }
    g.tau -= 2.0 * q;
    Ok(g)
}

/// Axis-aligned box in the spatial slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(FermatError::Argument(format!(
                "region must have {dim} coordinates per corner"
            )));
        }
        if self
            .lo
            .iter()
            .zip(&self.hi)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b))
        {
            return Err(FermatError::Argument("region is empty".into()));
        }
        Ok(())
    }
}

/// Sampled estimates of the structural assumptions on a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub qk_check: bool,
    /// Minimum sampled monotonicity quotient of `dL_c/dv`, an estimate of `inf lambda`.
    pub convexity_margin: f64,
    pub growth_ok: bool,
    /// `E + Q^2/2 >= kappa_admissible_bound` held on every sample.
    pub energy_bound_ok: bool,
    pub sup_l0_at_zero: f64,
    pub kappa_admissible_bound: f64,
    pub cone_samples: usize,
    pub samples: usize,
}

impl ValidationReport {
    pub fn convexity_ok(&self) -> bool {
        self.convexity_margin > 0.0
    }

    pub fn admits(&self, kappa: f64) -> bool {
        kappa <= self.kappa_admissible_bound
    }
}

const VELOCITY_RANGE: f64 = 3.0;

/// Samples `(y, v1, v2)` in `region` and records convexity, growth,
/// the supremum of `L(x, 0)` and causal cone consistency.
pub fn validate_assumptions(
    model: &dyn StationaryModel,
    region: &Region,
    samples: usize,
    rng_seed: u64,
) -> Result<ValidationReport> {
    let m = model.dim();
    region.check(m)?;
    if samples == 0 {
        return Err(FermatError::Argument("at least one sample is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let origin = Point::new(region.lo.clone(), 0.0);
    let qk_check = eval_q(model, &origin, &TangentVector::symmetry(m))? == -1.0;

    let mut margin = f64::INFINITY;
    let mut sup_l0 = f64::NEG_INFINITY;
    let mut growth_ok = true;
    let mut lower = Vec::with_capacity(samples);
    let mut cone_samples = 0;

    for _ in 0..samples {
        let y: Vec<f64> = region
            .lo
            .iter()
            .zip(&region.hi)
            .map(|(&a, &b)| if a < b { rng.gen_range(a..=b) } else { a })
            .collect();
        let x = Point::new(y, 0.0);
        let v1 = random_vector(&mut rng, m);
        let v2 = random_vector(&mut rng, m);

        let g1 = dlc_dv(model, &x, &v1)?;
        let g2 = dlc_dv(model, &x, &v2)?;
        let dv: Vec<f64> = v2.nu.iter().zip(&v1.nu).map(|(a, b)| a - b).collect();
        let dtau = v2.tau - v1.tau;
        let num: f64 = g2.nu.iter().zip(&g1.nu).zip(&dv).map(|((a, b), d)| (a - b) * d).sum::<f64>()
            + (g2.tau - g1.tau) * dtau;
        let den = dot(&dv, &dv) + dtau * dtau;
        if den > 0.0 {
            margin = margin.min(num / den);
        }

        let zero = TangentVector::zero(m);
        sup_l0 = sup_l0.max(eval_l(model, &x, &zero)?);

        for v in [&v1, &v2] {
            let lc = eval_lc(model, &x, v)?;
            let g = dlc_dv(model, &x, v)?;
            growth_ok &= lc.is_finite() && g.nu.iter().all(|c| c.is_finite()) && g.tau.is_finite();
            let q = eval_q(model, &x, v)?;
            lower.push((eval_e(model, &x, v)? + 0.5 * q * q, x.clone()));
        }

        if model.is_homogeneous() {
            cone_samples += cone_tests(model, &x, &v1, &mut rng)?;
        }
    }

    let bound = -sup_l0;
    let energy_bound_ok = lower
        .iter()
        .all(|(val, _)| *val >= bound - 1e-12 * (1.0 + val.abs()));

    Ok(ValidationReport {
        qk_check,
        convexity_margin: margin,
        growth_ok,
        energy_bound_ok,
        sup_l0_at_zero: sup_l0,
        kappa_admissible_bound: bound,
        cone_samples,
        samples,
    })
}

fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> TangentVector {
    TangentVector {
        nu: (0..m).map(|_| rng.gen_range(-VELOCITY_RANGE..VELOCITY_RANGE)).collect(),
        tau: rng.gen_range(-VELOCITY_RANGE..VELOCITY_RANGE),
    }
}

/// Two cone checks per sample: a random vector and a vector pushed onto or
/// inside the cone boundary. Returns how many were consistent.
fn cone_tests(
    model: &dyn StationaryModel,
    x: &Point,
    v: &TangentVector,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let mut passed = 0;
    let w = model.omega(&x.y, &v.nu);
    let boundary = w + (w * w + 2.0 * model.l0(&x.y, &v.nu)).sqrt();
    let inside = TangentVector::new(v.nu.clone(), boundary + rng.gen_range(0.0..1.0));
    for cand in [v, &inside] {
        let consistent = if is_causal(model, x, cand)? {
            eval_l(model, x, cand)? <= 1e-12 * (1.0 + cand.norm().powi(2))
                && eval_q(model, x, cand)? <= 0.0
        } else {
            true
        };
        passed += usize::from(consistent);
    }
    Ok(passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PolynomialModel, Topology};
    use crate::poly::Polynomial;

    fn origin() -> Point {
        Point::new(vec![0.0, 0.0], 0.0)
    }

    fn rc() -> PolynomialModel {
        PolynomialModel::randers_const(&[0.5, 0.0])
    }

    #[test]
    fn lagrangian_examples() {
        let flat = PolynomialModel::flat(2);
        let x = Point::new(vec![7.0, -1.0], 3.0);
        assert_eq!(eval_l(&flat, &x, &TangentVector::new(vec![3.0, 4.0], 0.0)).unwrap(), 12.5);
        assert_eq!(eval_l(&flat, &x, &TangentVector::new(vec![0.0, 0.0], 2.0)).unwrap(), -2.0);
        assert_eq!(eval_l(&rc(), &origin(), &TangentVector::new(vec![1.0, 0.0], 1.0)).unwrap(), 0.5);
    }

    #[test]
    fn energy_examples() {
        let flat = PolynomialModel::flat(2);
        assert_eq!(eval_e(&flat, &origin(), &TangentVector::new(vec![3.0, 4.0], 0.0)).unwrap(), 12.5);

        let l0 = Polynomial::from_terms(4, [(0.5, vec![0, 0, 2, 0]), (0.5, vec![0, 0, 0, 2]), (3.0, vec![0, 0, 0, 0])]);
        let shifted = PolynomialModel::new("s", 2, l0, vec![Polynomial::zero(2); 2], None, Topology::euclidean(2)).unwrap();
        let zero = TangentVector::zero(2);
        assert_eq!(eval_e(&shifted, &origin(), &zero).unwrap(), -3.0);

        let v = TangentVector::new(vec![0.3, -1.2], 0.7);
        let aff = PolynomialModel::affine(&rc(), 7.0);
        assert_eq!(eval_e(&aff, &origin(), &v).unwrap(), eval_e(&rc(), &origin(), &v).unwrap());
    }

    #[test]
    fn charge_examples() {
        let flat = PolynomialModel::flat(2);
        assert_eq!(eval_q(&flat, &origin(), &TangentVector::new(vec![0.0, 0.0], 1.7)).unwrap(), -1.7);
        assert_eq!(eval_q(&rc(), &origin(), &TangentVector::symmetry(2)).unwrap(), -1.0);
        let aff = PolynomialModel::affine(&rc(), 2.0);
        assert_eq!(eval_n(&aff, &origin(), &TangentVector::new(vec![1.0, 0.0], 0.0)).unwrap(), 2.5);
        let v = TangentVector::new(vec![0.2, 0.1], -0.4);
        assert_eq!(eval_n(&rc(), &origin(), &v).unwrap(), eval_q(&rc(), &origin(), &v).unwrap());
    }

    #[test]
    fn lc_examples() {
        let flat = PolynomialModel::flat(2);
        assert_eq!(eval_lc(&flat, &origin(), &TangentVector::new(vec![0.0, 0.0], 1.0)).unwrap(), 0.5);
        assert_eq!(eval_lc(&flat, &origin(), &TangentVector::new(vec![1.0, 0.0], 0.0)).unwrap(), 0.5);
        assert_eq!(eval_lc(&rc(), &origin(), &TangentVector::new(vec![1.0, 0.0], 1.0)).unwrap(), 0.75);
    }

    #[test]
    fn shift_examples() {
        let v = TangentVector::new(vec![1.0, 0.0], 0.25);
        assert_eq!(shift_by_flow(&v, 0.0), v);
        let flat = PolynomialModel::flat(2);
        let s = shift_by_flow(&TangentVector::zero(2), 1.0);
        assert_eq!(eval_e(&flat, &origin(), &s).unwrap(), -0.5);
        let s = shift_by_flow(&TangentVector::new(vec![1.0, 0.0], 0.0), 2.0);
        assert_eq!(eval_l(&rc(), &origin(), &s).unwrap(), -0.5);
    }

    #[test]
    fn cone_examples() {
        let flat = PolynomialModel::flat(2);
        assert!(is_causal(&flat, &origin(), &TangentVector::new(vec![1.0, 0.0], 1.0)).unwrap());
        assert!(!is_causal(&flat, &origin(), &TangentVector::new(vec![1.0, 0.0], 0.5)).unwrap());
        assert!(is_causal(&rc(), &origin(), &TangentVector::new(vec![1.0, 0.0], 2.0)).unwrap());
        let l0 = Polynomial::from_terms(2, [(0.5, vec![0, 2]), (1.0, vec![0, 0])]);
        let nh = PolynomialModel::new("nh", 1, l0, vec![Polynomial::zero(1)], None, Topology::euclidean(1)).unwrap();
        assert!(matches!(
            is_causal(&nh, &Point::new(vec![0.0], 0.0), &TangentVector::zero(1)),
            Err(FermatError::Unsupported(_))
        ));
    }

    #[test]
    fn non_finite_values_are_reported() {
        let flat = PolynomialModel::flat(2);
        let v = TangentVector::new(vec![f64::INFINITY, 0.0], 0.0);
        assert!(matches!(eval_l(&flat, &origin(), &v), Err(FermatError::NonFinite { .. })));
    }

    #[test]
    fn validation_examples() {
        let region = Region::new(vec![-2.0, -2.0], vec![3.0, 4.0]);
        let flat = validate_assumptions(&PolynomialModel::flat(2), &region, 500, 1).unwrap();
        assert!(flat.qk_check);
        assert!(flat.convexity_margin >= 1.0 - 1e-12, "{}", flat.convexity_margin);
        assert_eq!(flat.sup_l0_at_zero, 0.0);
        assert_eq!(flat.kappa_admissible_bound, 0.0);
        assert!(flat.energy_bound_ok && flat.growth_ok);
        assert_eq!(flat.cone_samples, 1000);

        let r = validate_assumptions(&rc(), &region, 500, 2).unwrap();
        assert!(r.convexity_margin > 0.0);

        let l0 = Polynomial::from_terms(4, [(0.5, vec![0, 0, 2, 0]), (0.5, vec![0, 0, 0, 2]), (3.0, vec![0, 0, 0, 0])]);
        let shifted = PolynomialModel::new("s", 2, l0, vec![Polynomial::zero(2); 2], None, Topology::euclidean(2)).unwrap();
        let s = validate_assumptions(&shifted, &region, 100, 3).unwrap();
        assert_eq!(s.kappa_admissible_bound, -3.0);
        assert!(!s.admits(-2.0));
        assert_eq!(s.cone_samples, 0);
    }

    #[test]
    fn validation_rejects_empty_region() {
        let flat = PolynomialModel::flat(2);
        let bad = Region::new(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert!(matches!(validate_assumptions(&flat, &bad, 10, 0), Err(FermatError::Argument(_))));
        let ok = Region::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert!(validate_assumptions(&flat, &ok, 0, 0).is_err());
    }
}
