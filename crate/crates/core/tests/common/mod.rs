#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stationary_fermat::path::project_to_n;
use stationary_fermat::registry::parse_model;
use stationary_fermat::{DiscretePath, Point, PolynomialModel, TangentField, TangentVector};

/// Every builtin family, with parameters chosen so that the causal cone and
/// the arrival times are well defined on moderate paths.
pub const BUILTINS: [&str; 8] = [
    "flat",
    "randers-const(0.5, 0)",
    "randers-const(0.2, -0.3)",
    "randers-rot(0.2)",
    "cylinder(1)",
    "affine(flat, 0.7)",
    "affine(randers-const(0.5, 0), 0.3)",
    "affine-field(randers-rot(0.2), 0.1, 0.2, 0.05)",
];

pub fn builtins() -> Vec<PolynomialModel> {
    BUILTINS.iter().map(|s| parse_model(s).unwrap()).collect()
}

pub fn pt(y: &[f64], t: f64) -> Point {
    Point::new(y.to_vec(), t)
}

/// Endpoints in the unit box around the origin with a spatial separation of at least 0.5.
pub fn random_endpoints(rng: &mut ChaCha8Rng, m: usize) -> (Point, Point) {
    loop {
        let p: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d > 0.5 {
            return (pt(&p, rng.gen_range(-1.0..1.0)), pt(&q, rng.gen_range(-1.0..1.0)));
        }
    }
}

/// Smooth random path: straight line plus low sine modes in every
/// coordinate, not projected.
pub fn random_path(
    model: &PolynomialModel,
    rng: &mut ChaCha8Rng,
    p: &Point,
    q: &Point,
    n: usize,
    amp: f64,
) -> DiscretePath {
    use stationary_fermat::StationaryModel;
    let m = p.dim();
    let coeffs: Vec<Vec<f64>> = (0..3).map(|_| (0..=m).map(|_| rng.gen_range(-amp..amp)).collect()).collect();
    let nodes = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let mut y: Vec<f64> = (0..m).map(|k| p.y[k] + s * (q.y[k] - p.y[k])).collect();
            let mut t = p.t + s * (q.t - p.t);
            if i > 0 && i < n {
                for (j, c) in coeffs.iter().enumerate() {
                    let shape = ((j + 1) as f64 * std::f64::consts::PI * s).sin();
                    for k in 0..m {
                        y[k] += c[k] * shape;
                    }
                    t += c[m] * shape;
                }
            }
            Point::new(y, t)
        })
        .collect();
    DiscretePath::new(nodes, model.topology()).unwrap()
}

/// Random smooth path on the constant-charge manifold.
pub fn random_n_path(
    model: &PolynomialModel,
    rng: &mut ChaCha8Rng,
    n: usize,
    amp: f64,
) -> DiscretePath {
    use stationary_fermat::StationaryModel;
    let (p, q) = random_endpoints(rng, model.dim());
    project_to_n(model, &random_path(model, rng, &p, &q, n, amp)).unwrap()
}

/// Smooth random variation vanishing at both endpoints.
pub fn random_field(rng: &mut ChaCha8Rng, n: usize, m: usize) -> TangentField {
    let coeffs: Vec<Vec<f64>> = (0..3).map(|_| (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut f = TangentField::zeros(n, m);
    for i in 1..n {
        let s = i as f64 / n as f64;
        let mut v = TangentVector::zero(m);
        for (j, c) in coeffs.iter().enumerate() {
            let shape = ((j + 1) as f64 * std::f64::consts::PI * s).sin();
            for k in 0..m {
                v.nu[k] += c[k] * shape;
            }
            v.tau += c[m] * shape;
        }
        f.deltas[i] = v;
    }
    f
}

/// Moves the interior spatial nodes by `h * field` and re-projects.
pub fn perturb(model: &PolynomialModel, z: &DiscretePath, field: &TangentField, h: f64) -> DiscretePath {
    let mut w = z.clone();
    for k in 1..z.segments() {
        let y: Vec<f64> = z.nodes()[k].y.iter().zip(&field.deltas[k].nu).map(|(a, b)| a + h * b).collect();
        w.set_interior_y(k, &y);
    }
    project_to_n(model, &w).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
