//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. All runs use n = 2048, substeps = 2.

use std::f64::consts::PI;
use std::process::ExitCode;

use critset::manifold::monotonicity;
use critset::pruefer::sign_changes;
use critset::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 2048;
const SUBSTEPS: usize = 2;

fn grid() -> Grid {
    Grid::new(N).unwrap()
}

fn canonical() -> Nonlinearity {
    Nonlinearity::softplus(-12.0, 3.0).unwrap()
}

fn swapped() -> Nonlinearity {
    Nonlinearity::softplus(3.0, -12.0).unwrap()
}

fn random_sine(rng: &mut ChaCha8Rng, g: Grid, modes: usize, amp: f64) -> GridFunction {
    let m = rng.gen_range(1..=modes);
    GridFunction::sine_series(g, (0..m).map(|_| rng.gen_range(-amp..=amp)).collect()).unwrap()
}

/// `W(π)` for `v'' + ω v = 0`, `v(0) = 0`, `v'(0) = 1`, from the phase of
/// `(cos sπ, sin(sπ)/s)` counted in completed half periods.
fn oracle_free(omega: f64) -> f64 {
    if omega > 0.0 {
        let s = omega.sqrt();
        let k = s.floor();
        let phi = PI * (s - k);
        if phi == 0.0 {
            k * PI
        } else {
            k * PI + PI / 2.0 - (s * phi.cos() / phi.sin()).atan()
        }
    } else if omega == 0.0 {
        PI.atan()
    } else {
        let s = (-omega).sqrt();
        ((s * PI).tanh() / s).atan()
    }
}

fn w_of(f: &Nonlinearity, u: &GridFunction) -> f64 {
    integrate_argument(f, u, SUBSTEPS).unwrap().w_pi()
}

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac1() -> Outcome {
    let omegas = [-25.0, -3.0, 0.0, 0.5, 1.0, 2.0, 4.0, 9.0, 12.0, 30.0];
    let mut worst = 0.0f64;
    for &w in &omegas {
        let p = integrate_potential(grid(), SUBSTEPS, |_| -w).unwrap();
        worst = worst.max((p.w_pi() - oracle_free(w)).abs());
    }
    // Halving the RK4 step, on grids where the error is well above roundoff.
    let mut min_ratio = f64::INFINITY;
    for &w in &omegas {
        let e = |n: usize| {
            (integrate_potential(Grid::new(n).unwrap(), 1, |_| -w)
                .unwrap()
                .w_pi()
                - oracle_free(w))
            .abs()
        };
        let (coarse, fine) = (e(128), e(256));
        if coarse > 1e-12 {
            min_ratio = min_ratio.min(coarse / fine);
        }
    }
    check(
        worst <= 1e-7 && min_ratio >= 12.0,
        format!("max |W - oracle| = {worst:.2e} (tol 1e-7), min halving ratio = {min_ratio:.2} (need >= 12)"),
    )
}

fn ac2() -> Outcome {
    let f = canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let u = random_sine(&mut rng, grid(), 6, 3.0);
        let phi = random_sine(&mut rng, grid(), 6, 3.0);
        let path = integrate_argument(&f, &u, SUBSTEPS).unwrap();
        let formula = dw_pairing(&f, &u, &phi, &path).unwrap().value;
        let fd = fd_dw(&f, &u, &phi, 1e-5, SUBSTEPS).unwrap();
        worst = worst.max((formula - fd).abs() / fd.abs());
    }
    let mut linear_max = 0.0f64;
    for c in [-4.0, -1.0, 0.0, 3.0] {
        let lin = Nonlinearity::linear(c).unwrap();
        for _ in 0..5 {
            let u = random_sine(&mut rng, grid(), 6, 3.0);
            let phi = random_sine(&mut rng, grid(), 6, 3.0);
            let path = integrate_argument(&lin, &u, SUBSTEPS).unwrap();
            linear_max = linear_max.max(dw_pairing(&lin, &u, &phi, &path).unwrap().value.abs());
        }
    }
    check(
        worst <= 1e-4 && linear_max == 0.0,
        format!("max relative error = {worst:.2e} (tol 1e-4), linear max |value| = {linear_max:e}"),
    )
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = GridFunction::sin(grid());
    let (f, g) = (canonical(), swapped());
    let mut bad = 0;
    for _ in 0..20 {
        let u = random_sine(&mut rng, grid(), 6, 3.0);
        let convex = dw_pairing(&f, &u, &p, &integrate_argument(&f, &u, SUBSTEPS).unwrap())
            .unwrap()
            .value;
        let concave = dw_pairing(&g, &u, &p, &integrate_argument(&g, &u, SUBSTEPS).unwrap())
            .unwrap()
            .value;
        if !(convex < 0.0 && concave > 0.0) {
            bad += 1;
        }
    }
    check(
        bad == 0,
        format!("{bad} of 20 samples violate the sign law"),
    )
}

fn ac4() -> Outcome {
    let line = LineFamily::sine(grid());
    let h = GridFunction::zero(grid());
    let range = ScanRange::new(-100.0, 100.0, 401).unwrap();
    let dec = monotonicity(&lambda_scan(&canonical(), &h, &line, &range, SUBSTEPS).unwrap());
    let inc = monotonicity(&lambda_scan(&swapped(), &h, &line, &range, SUBSTEPS).unwrap());
    let mut detail = format!("convex direction {dec}, concave direction {inc}");
    let mut ok = dec == -1 && inc == 1;

    let f = canonical();
    let w = |l: f64| w_of(&f, &line.compose(&h, l).unwrap());
    let coarse = lambda_scan(
        &f,
        &h,
        &line,
        &ScanRange::new(-100.0, 100.0, 201).unwrap(),
        SUBSTEPS,
    )
    .unwrap();
    for k in 1..=3 {
        let theta = k as f64 * PI;
        let Some(cell) = coarse
            .windows(2)
            .find(|c| (c[0].1 - theta) * (c[1].1 - theta) <= 0.0)
        else {
            return Err(format!("{detail}; no scan bracket for theta = {k} pi"));
        };
        let start = cell[0].0;
        let mut lo = start;
        for i in 1..=100 {
            let l = start + 0.01 * i as f64;
            if (w(l) - theta) * (w(lo) - theta) <= 0.0 {
                break;
            }
            lo = l;
        }
        let hi = lo + 0.01;
        let pt = find_lambda(&f, &h, &line, theta, &SearchOptions::default()).unwrap();
        let inside = pt.lambda_star >= lo - 1e-5 && pt.lambda_star <= hi + 1e-5;
        ok &= inside && pt.residual <= 1e-8;
        detail += &format!(
            "; theta={k}pi lambda*={:.6} in [{lo:.2},{hi:.2}] residual={:.1e}",
            pt.lambda_star, pt.residual
        );
    }
    check(ok, detail)
}

fn ac5() -> Outcome {
    let line = LineFamily::sine(grid());
    let h = GridFunction::zero(grid());
    let opts = SearchOptions::default();
    let f = canonical();
    let criterion: Vec<bool> = (1..=4).map(|k| is_ck_nonempty(&f, k).unwrap()).collect();
    let mut ok = criterion == [true, true, true, false];
    for k in 1..=3 {
        ok &= chart_point(&f, &h, &line, k, &opts)
            .map(|p| p.residual <= 1e-8)
            .unwrap_or(false);
    }
    ok &= matches!(
        chart_point(&f, &h, &line, 4, &opts),
        Err(Error::RangeUnattainable { .. })
    );
    let e = Nonlinearity::exponential();
    let exp_empty = (1..=5).all(|k| !is_ck_nonempty(&e, k).unwrap());
    let q = Nonlinearity::quadratic(1.0).unwrap();
    let quad_ok = (1..=5).all(|k| {
        chart_point(&q, &h, &line, k, &opts)
            .map(|p| p.residual <= 1e-8)
            .unwrap_or(false)
    });
    check(
        ok && exp_empty && quad_ok,
        format!("softplus criterion {criterion:?} with search agreement {ok}, exponential empty {exp_empty}, quadratic k=1..5 found {quad_ok}"),
    )
}

fn ac6() -> Outcome {
    let f = canonical();
    let limits = asymptotic_arguments(&f).unwrap();
    let closed = ((3f64.sqrt() * PI).tanh() / 3f64.sqrt()).atan();
    let plus = (w_of(&f, &GridFunction::sin(grid()).scale(1e3)) - limits.lambda_to_pos_inf).abs();
    let minus = (w_of(&f, &GridFunction::sin(grid()).scale(-1e3)) - limits.lambda_to_neg_inf).abs();
    let limit_ok =
        (limits.lambda_to_pos_inf - closed).abs() <= 1e-12 && (closed - 0.52357).abs() <= 2e-5;
    check(
        plus <= 1e-3 && minus <= 1e-3 && limit_ok,
        format!("|W - limit| at lambda=+1e3: {plus:.2e}, at -1e3: {minus:.2e} (tol 1e-3); +inf limit {:.7}", limits.lambda_to_pos_inf),
    )
}

fn ac7() -> Outcome {
    let f = canonical();
    let r = f.derivative_range();
    let line = LineFamily::sine(grid());
    let h = GridFunction::zero(grid());
    let mut worst = 0.0f64;
    for l in [-50.0, -5.0, 0.0, 5.0, 50.0] {
        for w in [-r.sup, -r.inf] {
            worst = worst.max(
                comparison_identity_residual(&f, &h, &line, l, w, SUBSTEPS)
                    .unwrap()
                    .residual,
            );
        }
    }
    let mut matched = 0.0f64;
    let h2 = GridFunction::sine_series(grid(), vec![0.0, 0.7, -0.2]).unwrap();
    for c in [-2.0, 0.0, 5.0] {
        let lin = Nonlinearity::linear(c).unwrap();
        for l in [-50.0, 0.0, 50.0] {
            matched = matched.max(
                comparison_identity_residual(&lin, &h2, &line, l, -c, SUBSTEPS)
                    .unwrap()
                    .residual,
            );
        }
    }
    check(
        worst <= 1e-6 && matched <= 1e-12,
        format!("max residual {worst:.2e} (tol 1e-6), matched linear {matched:.2e} (tol 1e-12)"),
    )
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut checked, mut skipped, mut bad) = (0, 0, 0);
    for _ in 0..100 {
        let f = match rng.gen_range(0..3) {
            0 => {
                let a = rng.gen_range(-500.0..=100.0);
                let b = rng.gen_range(-500.0..=100.0);
                Nonlinearity::softplus(a, b).unwrap()
            }
            1 => Nonlinearity::linear(rng.gen_range(-500.0..=100.0)).unwrap(),
            _ => Nonlinearity::quadratic(rng.gen_range(-20.0..=20.0)).unwrap(),
        };
        let u = random_sine(&mut rng, grid(), 6, 2.0);
        // Keep |f'(u)| <= 500 on the grid.
        if u.values().iter().any(|&x| f.f1(x).abs() > 500.0) {
            skipped += 1;
            continue;
        }
        let path = integrate_argument(&f, &u, SUBSTEPS).unwrap();
        let w = path.w_pi();
        if (w - (w / PI).round() * PI).abs() <= 1e-6 {
            skipped += 1;
            continue;
        }
        checked += 1;
        if sign_changes(reconstruct_kernel(&path).values()) != (w / PI).floor() as usize {
            bad += 1;
        }
    }
    check(
        bad == 0 && checked >= 80,
        format!("{bad} mismatches among {checked} cases ({skipped} skipped)"),
    )
}

fn ac9() -> Outcome {
    let f = Nonlinearity::softplus(-2.0, 0.0).unwrap();
    let shape = GridFunction::sin(grid());
    let opts = CountOptions::default();
    let count = |tau: f64| {
        count_solutions(&f, &shape.scale(tau), &opts)
            .unwrap()
            .count()
    };
    let (lo, hi) = (count(-40.0), count(40.0));
    let fold = locate_fold(&f, &shape, -40.0, 40.0, &opts, 1e-9).unwrap();
    let (below, above) = (count(fold.tau - 1.0), count(fold.tau + 1.0));
    let sides = {
        let mut s = [below, above];
        s.sort();
        s == [0, 2]
    };
    let ends = {
        let mut s = [lo, hi];
        s.sort();
        s == [0, 2]
    };
    let u_star = fold
        .record
        .as_dirichlet()
        .ok_or("fold trajectory unavailable")?;
    let dev = (w_of(&f, &u_star) - PI).abs();
    check(
        ends && sides && dev <= 1e-3,
        format!(
            "counts tau=-40: {lo}, tau=+40: {hi}; tau*={:.6} with counts {below}/{above} on either side; |W(u*) - pi| = {dev:.2e} (tol 1e-3)",
            fold.tau
        ),
    )
}

fn ac10() -> Outcome {
    let f = canonical();
    let line = LineFamily::sine(grid());
    let opts = SearchOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst_res, mut min_trans, mut worst_rt) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut failures = 0;
    for _ in 0..20 {
        // Uniform in the radius-2 ball of modes 2..=5.
        let dir: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let r = 2.0 * rng.gen_range(0.0f64..=1.0).powf(0.25);
        let mut coeffs = vec![0.0];
        coeffs.extend(dir.iter().map(|x| r * x / norm));
        let h = GridFunction::sine_series(grid(), coeffs).unwrap();
        for k in 1..=3 {
            match chart_point(&f, &h, &line, k, &opts) {
                Ok(pt) => {
                    worst_res = worst_res.max(pt.residual);
                    min_trans = min_trans.min(pt.transversality.abs());
                    let (h_back, l_back) = decompose(&pt.u, line.direction()).unwrap();
                    let dh = h_back
                        .values()
                        .iter()
                        .zip(h.values())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    worst_rt = worst_rt.max(dh).max((l_back - pt.lambda_star).abs());
                }
                Err(_) => failures += 1,
            }
        }
    }
    check(
        failures == 0 && worst_res <= 1e-8 && min_trans > 0.0 && worst_rt <= 1e-12,
        format!(
            "{failures} failures, max residual {worst_res:.2e}, min |transversality| {min_trans:.2e}, round trip {worst_rt:.2e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("constant-potential oracle", ac1),
        ("derivative formula", ac2),
        ("sign law", ac3),
        ("monotone intersection", ac4),
        ("emptiness criterion", ac5),
        ("asymptotics", ac6),
        ("comparison identity", ac7),
        ("zero count", ac8),
        ("fold consistency", ac9),
        ("chart sampling", ac10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(d) => println!("[AC-{}] PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("[AC-{}] FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
