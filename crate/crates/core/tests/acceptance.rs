//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

mod common;

use std::time::{Duration, Instant};

use common::{bisection_roots, random_cubic, random_smale, random_well_conditioned, simpson, PolySystem, Premultiplied};
use halley_cert::certificate::{kantorovich_certificate, verify_error_bound, DEFAULT_SEQ_LEN};
use halley_cert::hammerstein::{analytic_bounds, discretize, solve_and_check, table1, HammersteinSpec};
use halley_cert::majorant::{
    cubic_error_constant, l_h, majorizing_sequence, smallest_root, uniqueness_radius, Majorant,
};
use halley_cert::problem::{
    family_step, halley_solve, halley_step, lf_matrix, solve, Method, NonlinearProblem, NonlinearSystem,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn ac1_table1() -> Outcome {
    let start = Instant::now();
    let lambdas = [0.25, 0.5, 0.75, 1.0];
    let existence = [0.0346081, 0.0783777, 0.138260, 0.236068];
    let uniqueness = [4.06814, 2.35026, 1.54454, 1.0];
    let rows = table1(&lambdas);
    let mut worst = 0.0_f64;
    for (i, row) in rows.iter().enumerate() {
        check(row.certified, format!("lambda {} not certified", row.lambda))?;
        let e = row.existence.ok_or("missing existence")?;
        let u = row.uniqueness.ok_or("missing uniqueness")?;
        let rel_e = (e - existence[i]).abs() / existence[i];
        let rel_u = (u - uniqueness[i]).abs() / uniqueness[i];
        worst = worst.max(rel_e).max(rel_u);
        check(rel_e <= 1e-5, format!("lambda {}: existence {e} vs {}", row.lambda, existence[i]))?;
        check(rel_u <= 1e-5, format!("lambda {}: uniqueness {u} vs {}", row.lambda, uniqueness[i]))?;
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn ac2_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let cubic = random_cubic(&mut rng);
        let smale = random_smale(&mut rng);
        let pairs = [
            (smallest_root(&cubic).unwrap(), uniqueness_radius(&cubic).unwrap().rho, bisection_roots(&cubic)),
            (smallest_root(&smale).unwrap(), uniqueness_radius(&smale).unwrap().rho, bisection_roots(&smale)),
        ];
        for (t_star, t_2star, (o1, o2)) in pairs {
            let dev = (t_star - o1).abs().max((t_2star - o2).abs());
            worst = worst.max(dev);
            check(dev <= 1e-12, format!("closed form ({t_star}, {t_2star}) vs bisection ({o1}, {o2})"))?;
        }
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("max abs deviation {worst:.2e}"))
}

fn ac3_l_h_range() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max_seen = 0.0_f64;
    for i in 0..50 {
        let h: Box<dyn Majorant> = if i % 2 == 0 {
            Box::new(random_cubic(&mut rng))
        } else {
            Box::new(random_smale(&mut rng))
        };
        let t_star = smallest_root(&*h).unwrap();
        for k in 0..1000 {
            let t = t_star * k as f64 / 999.0;
            let v = l_h(&*h, t).unwrap();
            max_seen = max_seen.max(v);
            check((0.0..=0.25 + 1e-12).contains(&v), format!("L_h({t}) = {v}"))?;
        }
    }
    Ok(format!("max L_h {max_seen:.6}"))
}

fn ac4_sequences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for i in 0..100 {
        let h: Box<dyn Majorant> = if i % 2 == 0 {
            Box::new(random_cubic(&mut rng))
        } else {
            Box::new(random_smale(&mut rng))
        };
        let seq = majorizing_sequence(&*h, 50, 1e-16).map_err(|e| e.to_string())?;
        let c = cubic_error_constant(&*h).unwrap();
        for w in seq.points.windows(2) {
            check(w[1] > w[0], format!("not increasing: {w:?}"))?;
        }
        check(seq.points.iter().all(|&t| t < seq.t_star), "point reaches t*")?;
        for k in 0..seq.gaps.len() - 1 {
            let (g, next) = (seq.gaps[k], seq.gaps[k + 1]);
            if next < 1e-13 {
                break;
            }
            checked += 1;
            check(next <= c * g.powi(3), format!("gap {next} > C gap³ = {}", c * g.powi(3)))?;
        }
    }
    Ok(format!("{checked} cubic-gap inequalities"))
}

fn ac5_rate_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let cubic = random_cubic(&mut rng);
        let generic = cubic_error_constant(&cubic).unwrap();
        let closed = cubic.rate_constant(smallest_root(&cubic).unwrap());
        let rel = (generic - closed).abs() / closed;
        worst = worst.max(rel);
        check(rel <= 1e-12, format!("cubic: {generic} vs {closed}"))?;

        let smale = random_smale(&mut rng);
        let generic = cubic_error_constant(&smale).unwrap();
        let closed = smale.rate_constant(smallest_root(&smale).unwrap());
        let rel = (generic - closed).abs() / closed;
        worst = worst.max(rel);
        check(rel <= 1e-12, format!("smale: {generic} vs {closed}"))?;
    }
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn sqrt2_problem() -> NonlinearProblem {
    NonlinearProblem::new(
        1,
        |x| DVector::from_element(1, x[0] * x[0] - 2.0),
        |x| DMatrix::from_element(1, 1, 2.0 * x[0]),
        |_, u, v| DVector::from_element(1, 2.0 * u[0] * v[0]),
    )
}

fn ac6_solver_order() -> Outcome {
    let p = sqrt2_problem();
    let x0 = DVector::from_element(1, 1.0);
    let halley = halley_solve(&p, &x0, 1e-12, 20).map_err(|e| e.to_string())?;
    let err = (halley.solution()[0] - 2.0_f64.sqrt()).abs();
    check(err <= 1e-12, format!("|x - sqrt 2| = {err}"))?;
    check(halley.iterations() <= 4, format!("{} iterations", halley.iterations()))?;
    let qh = halley.q_order_estimate.ok_or("no Halley order estimate")?;
    check((2.7..=3.3).contains(&qh), format!("Halley order {qh}"))?;

    let newton = solve(&p, &x0, &Method::newton(), 1e-14, 50).map_err(|e| e.to_string())?;
    let qn = newton.q_order_estimate.ok_or("no Newton order estimate")?;
    check((1.7..=2.3).contains(&qn), format!("Newton order {qn}"))?;
    Ok(format!("{} Halley iterations, order {qh:.3}; Newton order {qn:.3}", halley.iterations()))
}

fn ac7_error_bound() -> Outcome {
    let start = Instant::now();
    let system = discretize(&HammersteinSpec::new(1.0, 32)).map_err(|e| e.to_string())?;
    let x0 = DVector::from_element(32, 1.0);
    let trace = halley_solve(&system, &x0, 1e-14, 50).map_err(|e| e.to_string())?;
    check(trace.stop_reason.converged(), format!("{:?}", trace.stop_reason))?;
    let bounds = analytic_bounds(1.0).unwrap();
    let cert = kantorovich_certificate(&bounds.kantorovich_inputs(), DEFAULT_SEQ_LEN).unwrap();
    let report = verify_error_bound(&trace, &cert).map_err(|e| e.to_string())?;
    for row in &report.rows {
        check(row.within_bound, format!("k={}: error {} > bound {}", row.k, row.error, row.bound))?;
        check(row.cubic_holds, format!("k={}: cubic recursion fails ({:?})", row.k, row.cubic_bound))?;
    }
    check(report.all_pass, "report does not pass")?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("{} iterates checked", report.rows.len()))
}

fn ac8_containment() -> Outcome {
    let mut out = Vec::new();
    for lambda in [0.25, 0.5, 0.75, 1.0] {
        let r = solve_and_check(&HammersteinSpec::new(lambda, 32), 1e-13).map_err(|e| e.to_string())?;
        let t_star = r.certificate.as_ref().and_then(|c| c.t_star).ok_or("no certificate")?;
        check(r.converged, format!("lambda {lambda} did not converge"))?;
        check(
            r.distance_from_start <= t_star,
            format!("lambda {lambda}: |u* - 1| = {} > t* = {t_star}", r.distance_from_start),
        )?;
        out.push(format!("{lambda}: {:.4}/{t_star:.4}", r.distance_from_start));
    }
    Ok(out.join(", "))
}

fn ac9_family() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let coeffs: Vec<f64> = (0..=60).map(|k| 0.5_f64.powi(k)).collect();
    let mut worst = 0.0_f64;
    let mut accepted = 0;
    while accepted < 20 {
        let n = rng.random_range(2..=5);
        let p = PolySystem::random(&mut rng, n, 0.3);
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let Ok(lf) = lf_matrix(&p, &x) else { continue };
        if 2.0 * p.norm_kind().matrix(&lf) > 0.5 {
            continue;
        }
        accepted += 1;
        let halley = halley_step(&p, &x).map_err(|e| e.to_string())?;
        let family = family_step(&p, &x, &coeffs).map_err(|e| e.to_string())?;
        let dev = (halley - family).amax() / x.amax().max(1.0);
        worst = worst.max(dev);
        check(dev <= 1e-13, format!("family vs Halley deviation {dev}"))?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn ac10_affine_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let p = PolySystem::random(&mut rng, n, 0.2);
        let m = random_well_conditioned(&mut rng, n);
        let q = Premultiplied { inner: &p, m };
        let mut x = DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5));
        let mut y = x.clone();
        for _ in 0..3 {
            x = halley_step(&p, &x).map_err(|e| e.to_string())?;
            y = halley_step(&q, &y).map_err(|e| e.to_string())?;
            let rel = (&x - &y).amax() / x.amax().max(1e-300);
            worst = worst.max(rel);
            check(rel <= 1e-10, format!("iterates differ by {rel}"))?;
        }
    }
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn ac11_third_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let h: Box<dyn Majorant> = if i % 2 == 0 {
            Box::new(random_cubic(&mut rng))
        } else {
            Box::new(random_smale(&mut rng))
        };
        let t_star = smallest_root(&*h).unwrap();
        let top = h.domain_bound().min(2.0 * t_star);
        let mut a = rng.random_range(0.0..top);
        let mut b = rng.random_range(0.0..top);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if b - a < 1e-9 {
            continue;
        }
        let increment = h.second(b) - h.second(a);
        let integral = simpson(|s| h.third(s).unwrap(), a, b, 2000);
        let rel = (increment - integral).abs() / increment.abs();
        worst = worst.max(rel);
        check(rel <= 1e-8, format!("[{a}, {b}]: h'' increment {increment} vs integral {integral}"))?;
    }
    Ok(format!("max relative deviation {worst:.2e}"))
}

/// Written to the stderr handle directly so the lines survive output capture.
fn report(line: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("AC1  existence/uniqueness table", ac1_table1),
        ("AC2  closed-form roots vs bisection", ac2_closed_forms),
        ("AC3  L_h in [0, 1/4]", ac3_l_h_range),
        ("AC4  majorizing sequence cubic gaps", ac4_sequences),
        ("AC5  rate constant closed forms", ac5_rate_constants),
        ("AC6  solver order on x^2 - 2", ac6_solver_order),
        ("AC7  a priori error bounds, lambda = 1", ac7_error_bound),
        ("AC8  containment in existence ball", ac8_containment),
        ("AC9  family series vs Halley", ac9_family),
        ("AC10 affine invariance", ac10_affine_invariance),
        ("AC11 h'' increment vs integral of h'''", ac11_third_derivative),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => report(format_args!("PASS  {name}: {detail}")),
            Err(why) => {
                report(format_args!("FAIL  {name}: {why}"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
