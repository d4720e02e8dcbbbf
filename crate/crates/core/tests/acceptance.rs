//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stationary_fermat::path::{action, apply_flow, energy_integral, tangent_split};
use stationary_fermat::registry::parse_model;
use stationary_fermat::solver::{minimize_arrival, multi_start};
use stationary_fermat::variational::{
    arrival_gradient, arrival_times, criticality_residual, criticality_residual_with, d_functional, dt_plus,
    q_functional, randers_arrival, ResidualForm,
};
use stationary_fermat::{Branch, Point, PolynomialModel, SeedSpec, SolutionRecord, SolverOptions, StationaryModel};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts(segments: usize) -> SolverOptions {
    SolverOptions {
        segments,
        ..SolverOptions::default()
    }
}

fn best(model: &PolynomialModel, p: &Point, q: &Point, kappa: f64, seeds: &[SeedSpec], o: &SolverOptions) -> Result<SolutionRecord, String> {
    let run = multi_start(model, p, q, kappa, seeds, o);
    let first = run.converged().next().cloned();
    first.ok_or_else(|| format!("no converged record, failures {:?}", run.failures))
}

fn flat_seeds() -> Vec<SeedSpec> {
    let mut s = vec![SeedSpec::Straight];
    s.extend((0..4).map(SeedSpec::Random));
    s
}

fn flat_lightlike() -> Outcome {
    let start = Instant::now();
    let r = best(&parse_model("flat").map_err(|e| e.to_string())?, &pt(&[0.0, 0.0], 0.0), &pt(&[3.0, 4.0], 0.0), 0.0, &flat_seeds(), &opts(200))?;
    let elapsed = start.elapsed();
    check(
        (r.time() - 5.0).abs() < 1e-6 && r.el_residual < 1e-4 && r.energy_dev < 1e-6 && elapsed < Duration::from_secs(5),
        format!("t+ = {:.10}, el = {:.2e}, energy_dev = {:.2e}, {:.2?}", r.time(), r.el_residual, r.energy_dev, elapsed),
    )
}

fn flat_timelike() -> Outcome {
    let r = best(&parse_model("flat").map_err(|e| e.to_string())?, &pt(&[0.0, 0.0], 0.0), &pt(&[3.0, 4.0], 0.0), -0.5, &flat_seeds(), &opts(200))?;
    let want = 26f64.sqrt();
    check((r.time() - want).abs() < 1e-6, format!("t+ = {:.10}, expected {want:.10}", r.time()))
}

fn randers_asymmetry() -> Outcome {
    let model = parse_model("randers-const(0.5, 0)").map_err(|e| e.to_string())?;
    let origin = pt(&[0.0, 0.0], 0.0);
    let mut times = Vec::new();
    let mut ok = true;
    for (target, want) in [([1.0, 0.0], 0.5 * (1.0 + 5f64.sqrt())), ([-1.0, 0.0], 0.5 * (5f64.sqrt() - 1.0))] {
        let r = best(&model, &origin, &pt(&target, 0.0), 0.0, &flat_seeds(), &opts(200))?;
        let j = randers_arrival(&model, &[vec![0.0, 0.0], target.to_vec()]).map_err(|e| e.to_string())?;
        ok &= (r.time() - want).abs() < 1e-6 && (r.time() - j).abs() < 1e-8;
        times.push(format!("{:.7} (straight {:.7})", r.time(), j));
    }
    check(ok, format!("with/against drift: {}", times.join(", ")))
}

fn cylinder_multiplicity() -> Outcome {
    let model = parse_model("cylinder(1)").map_err(|e| e.to_string())?;
    let seeds: Vec<SeedSpec> = (-2..=2).map(SeedSpec::Winding).collect();
    let run = multi_start(&model, &pt(&[0.0, 0.0], 0.0), &pt(&[1.0, 1.0], 0.0), 0.0, &seeds, &opts(200));
    let conv: Vec<&SolutionRecord> = run.converged().collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let time_of = |k: i64| conv.iter().find(|r| r.winding == [k]).map(|r| r.time());
    let mut ok = conv.len() >= 3;
    let mut parts = Vec::new();
    for k in [0, -1, 1] {
        let want = (1.0 + (1.0 + two_pi * k as f64).powi(2)).sqrt();
        match time_of(k) {
            Some(t) => {
                ok &= (t - want).abs() < 1e-5;
                parts.push(format!("k={k}: {t:.6}"));
            }
            None => {
                ok = false;
                parts.push(format!("k={k}: missing"));
            }
        }
    }
    // past the minimum (k = 0) the time grows with |k| on each side
    for side in [1i64, -1] {
        let ts: Vec<f64> = (0..=2).filter_map(|m| time_of(side * m)).collect();
        ok &= ts.windows(2).all(|w| w[0] < w[1]);
    }
    check(ok, format!("{} converged; {}", conv.len(), parts.join(", ")))
}

/// Relative error, measured against 1 when the reference is smaller.
fn scaled_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let models = builtins();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut roots, mut shifts, mut level) = (0.0f64, 0.0f64, 0.0f64);
    let draws = 1200;
    for i in 0..draws {
        let model = &models[i % models.len()];
        let n = rng.gen_range(4..64);
        let z = random_n_path(model, &mut rng, n, 0.5);
        let t = rng.gen_range(-3.0..3.0);
        let kappa = rng.gen_range(-2.0..0.0);
        let ev = arrival_times(model, &z, kappa).map_err(|e| e.to_string())?;
        roots = roots
            .max(scaled_err(ev.t_plus + ev.t_minus, 2.0 * ev.q_bar))
            .max(scaled_err(ev.t_plus * ev.t_minus, 2.0 * (kappa - ev.e_val)));
        let (l, e, q, d) = (
            action(model, &z).unwrap(),
            energy_integral(model, &z).unwrap(),
            q_functional(model, &z).unwrap(),
            d_functional(model, &z).unwrap(),
        );
        let zt = apply_flow(&z, t);
        shifts = shifts
            .max((action(model, &zt).unwrap() - (l + t * (q + d) - 0.5 * t * t)).abs())
            .max((energy_integral(model, &zt).unwrap() - (e + t * q - 0.5 * t * t)).abs())
            .max((q_functional(model, &zt).unwrap() - (q - t)).abs());
        for tb in [ev.t_plus, ev.t_minus] {
            level = level.max((energy_integral(model, &apply_flow(&z, tb)).unwrap() - kappa).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        roots < 1e-10 && shifts < 1e-9 && level < 1e-8 && elapsed < Duration::from_secs(30),
        format!("{draws} draws: roots {roots:.1e}, shift laws {shifts:.1e}, level {level:.1e}, {elapsed:.2?}"),
    )
}

fn gradient_oracle() -> Outcome {
    let h = 1e-5;
    let kappa = -0.5;
    let mut worst = 0.0f64;
    let mut worst_model = "";
    for (k, spec) in BUILTINS.iter().enumerate() {
        let model = parse_model(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + k as u64);
        for _ in 0..100 {
            let z = random_n_path(&model, &mut rng, 24, 0.3);
            let field = random_field(&mut rng, 24, model.dim());
            let (xi, _) = tangent_split(&model, &z, &field).map_err(|e| e.to_string())?;
            let up = arrival_times(&model, &perturb(&model, &z, &field, h), kappa).unwrap().t_plus;
            let dn = arrival_times(&model, &perturb(&model, &z, &field, -h), kappa).unwrap().t_plus;
            let fd = (up - dn) / (2.0 * h);
            let err = (dt_plus(&model, &z, kappa, &xi).unwrap() - fd).abs() / fd.abs().max(1e-2);
            if err > worst {
                worst = err;
                worst_model = spec;
            }
        }
    }
    check(worst < 1e-5, format!("800 paths, worst relative error {worst:.2e} ({worst_model})"))
}

fn homogeneous_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut count = 0;
    for model in builtins().iter().filter(|m| m.is_homogeneous() && !m.has_offset()) {
        for _ in 0..25 {
            let z = random_n_path(model, &mut rng, 32, 0.4);
            let r = criticality_residual(model, &z, -0.5, Branch::Plus).unwrap();
            let g = arrival_gradient(model, &z, -0.5, Branch::Plus).unwrap().norm;
            worst = worst.max((r - g).abs() / g.max(1.0));
            count += 1;
        }
    }
    check(worst <= 1e-12, format!("{count} paths, max |residual - |dt+|| = {worst:.1e}"))
}

fn affine_consistency() -> Outcome {
    let (p, q) = (pt(&[0.0, 0.0], 0.0), pt(&[1.0, 1.5], 0.2));
    let seeds = [SeedSpec::Straight, SeedSpec::Random(0), SeedSpec::Random(1)];
    let mut table_dev = 0.0f64;
    for base in ["flat", "randers-const(0.5, 0)", "randers-rot(0.2)"] {
        let b = multi_start(&parse_model(base).unwrap(), &p, &q, -0.5, &seeds, &opts(100));
        let a = multi_start(&parse_model(&format!("affine({base}, 0)")).unwrap(), &p, &q, -0.5, &seeds, &opts(100));
        if a.records.len() != b.records.len() {
            return Err(format!("{base}: {} vs {} records", a.records.len(), b.records.len()));
        }
        for (x, y) in a.records.iter().zip(&b.records) {
            table_dev = table_dev
                .max((x.arrival.t_plus - y.arrival.t_plus).abs())
                .max((x.arrival.t_minus - y.arrival.t_minus).abs())
                .max((x.el_residual - y.el_residual).abs())
                .max((x.energy_dev - y.energy_dev).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut form_dev = 0.0f64;
    for spec in ["affine(flat, 0.7)", "affine(randers-const(0.5, 0), 0.3)"] {
        let model = parse_model(spec).unwrap();
        for _ in 0..25 {
            let z = random_n_path(&model, &mut rng, 32, 0.4);
            let a = criticality_residual_with(&model, &z, -0.5, Branch::Plus, ResidualForm::Affine).unwrap();
            let l = criticality_residual_with(&model, &z, -0.5, Branch::Plus, ResidualForm::Linear).unwrap();
            form_dev = form_dev.max((a - l).abs());
        }
    }
    check(
        table_dev <= 1e-9 && form_dev <= 1e-12,
        format!("c0 = 0 table deviation {table_dev:.1e}; constant c0 affine vs linear {form_dev:.1e}"),
    )
}

fn convergence_order() -> Outcome {
    let model = parse_model("randers-rot(0.3)").unwrap();
    let (p, q) = (pt(&[1.0, 0.0], 0.0), pt(&[0.0, 1.5], 0.0));
    let mut el = Vec::new();
    for n in [100, 200] {
        let o = SolverOptions {
            grad_tol: 1e-10,
            ..opts(n)
        };
        let r = minimize_arrival(&model, &p, &q, -0.2, &SeedSpec::Straight, &o).map_err(|e| e.to_string())?;
        if !r.converged {
            return Err(format!("N = {n} did not converge"));
        }
        el.push(r.el_residual);
    }
    let order = (el[0] / el[1]).log2();
    check(order >= 1.9, format!("el {:.3e} -> {:.3e}, order {order:.2}", el[0], el[1]))
}

fn validation_gate() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let file = dir.path().join("hot.toml");
    fs::write(
        &file,
        "model = \"flat\"\nkappa = 0.1\np = { y = [0.0, 0.0] }\nq = { y = [3.0, 4.0] }\n",
    )
    .map_err(|e| e.to_string())?;
    let code = Command::new(env!("CARGO_BIN_EXE_fermat"))
        .arg("solve")
        .arg(&file)
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("--quiet")
        .output()
        .map_err(|e| e.to_string())?
        .status
        .code();
    check(code == Some(3), format!("exit status {code:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("flat lightlike arrival", flat_lightlike),
        ("flat timelike arrival", flat_timelike),
        ("randers asymmetry", randers_asymmetry),
        ("cylinder multiplicity", cylinder_multiplicity),
        ("identity suite", identity_suite),
        ("gradient oracle", gradient_oracle),
        ("homogeneous reduction", homogeneous_reduction),
        ("affine consistency", affine_consistency),
        ("convergence order", convergence_order),
        ("validation gate", validation_gate),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
