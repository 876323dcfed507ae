//! Acceptance criteria, one test each. Tests hold a shared lock so their
//! wall-clock limits are measured without competing for the CPU.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use bayesel::applications::{normal_toy_model, run_rats, synth_regression, RatConfig, RatData};
use bayesel::diagnostics::heidelberger_welch;
use bayesel::elcore::{solve_el, ConstraintMatrix, SolverOptions};
use bayesel::estimating::{el_at, log_posterior_unnorm, ElModel, FnModel, ThetaSplit};
use bayesel::io::DataMatrix;
use bayesel::mcele::{mcele, MceleOptions};
use bayesel::modelselect::{birth_map, ols, rjmcmc, RegressionData, RjConfig};
use bayesel::sampler::{two_step_mh, Proposal1, Proposal2, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Written straight to stderr so the line shows up under captured output.
fn verdict(criterion: u8, title: &str, pass: bool, detail: &str) {
    let line = format!("{} criterion {criterion} ({title}): {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

// ---------------------------------------------------------------- 1

/// One constraint column: weights `1 / (n (1 + l c_i))` with `l` found by
/// bisection on the open interval keeping every weight positive.
fn bisection_log_el(c: &[f64]) -> Option<f64> {
    let n = c.len() as f64;
    let (lo_c, hi_c) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo_c < 0.0 && hi_c > 0.0) {
        return None;
    }
    let score = |l: f64| c.iter().map(|&v| v / (1.0 + l * v)).sum::<f64>();
    let (mut a, mut b) = (-1.0 / hi_c, -1.0 / lo_c);
    // score decreases from +inf at a to -inf at b
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if score(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let l = 0.5 * (a + b);
    Some(-c.iter().map(|&v| (n * (1.0 + l * v)).ln()).sum::<f64>())
}

#[test]
fn criterion_1_el_solver_exactness() {
    let _g = serial();
    let opts = SolverOptions::default();
    let mut worst_empty = 0.0f64;
    for n in 1..=200 {
        let sol = solve_el(&ConstraintMatrix::unconstrained(n).unwrap(), &opts).unwrap();
        let nf = n as f64;
        worst_empty = worst_empty.max((sol.log_el + nf * nf.ln()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let instances: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            let n = rng.random_range(2..=6);
            let shift = rng.random_range(-1.0..1.0);
            normals(&mut rng, n).into_iter().map(|z| z + shift).collect()
        })
        .collect();
    let matrices: Vec<ConstraintMatrix> = instances.iter().map(|c| ConstraintMatrix::from_column(c).unwrap()).collect();
    let start = Instant::now();
    let solutions: Vec<_> = matrices.iter().map(|m| solve_el(m, &opts).unwrap()).collect();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    let mut feasible = 0;
    for (c, sol) in instances.iter().zip(&solutions) {
        match bisection_log_el(c) {
            Some(oracle) => {
                feasible += 1;
                if !sol.feasible {
                    mismatched += 1;
                } else {
                    worst = worst.max((sol.log_el - oracle).abs());
                }
            }
            None => mismatched += usize::from(sol.feasible),
        }
    }
    let pass = worst_empty <= 1e-12 && worst <= 1e-8 && mismatched == 0 && elapsed < Duration::from_secs(1);
    verdict(
        1,
        "EL solver exactness",
        pass,
        &format!(
            "m=0 max error {worst_empty:.2e}; {feasible}/1000 feasible, max |log_el - oracle| {worst:.2e}, feasibility mismatches {mismatched}; 1000 solves in {:.3} s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 2

const GRID_STEP: f64 = 1e-3;

/// Maximise `log L(theta1, .)` on nested grids: 41 points per axis over the
/// box, then a box four cells wide around the best point, until the spacing
/// would drop below `GRID_STEP`; the final stage is a 41-point grid with
/// exactly that spacing around the best point so far.
fn grid_argmax(model: &dyn ElModel, theta1: &[f64], mut lo: Vec<f64>, hi: Vec<f64>) -> Vec<f64> {
    let q = lo.len();
    let opts = SolverOptions::default();
    let eval = |t2: &[f64]| el_at(model, theta1, t2, &opts).unwrap().log_el;
    let mut step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / 40.0).collect();
    let mut fine = false;
    loop {
        let mut best = (f64::NEG_INFINITY, vec![0.0; q]);
        for idx in 0..41usize.pow(q as u32) {
            let mut r = idx;
            let t2: Vec<f64> = (0..q)
                .map(|k| {
                    let i = r % 41;
                    r /= 41;
                    lo[k] + step[k] * i as f64
                })
                .collect();
            let v = eval(&t2);
            if v > best.0 {
                best = (v, t2);
            }
        }
        if fine {
            return best.1;
        }
        if step.iter().all(|&s| s / 10.0 <= GRID_STEP) {
            fine = true;
            step = vec![GRID_STEP; q];
            lo = best.1.iter().map(|c| c - 20.0 * GRID_STEP).collect();
        } else {
            lo = best.1.iter().zip(&step).map(|(c, s)| c - 2.0 * s).collect();
            step = step.iter().map(|s| s / 10.0).collect();
        }
    }
}

/// Columns `(x, z)`: `theta1` is the mean of `x`, `theta2` the variance of
/// `x` and `asinh` of the mean of `z`, so the second equation is nonlinear.
fn two_statistic_model(rows: &[Vec<f64>]) -> FnModel {
    FnModel::new(DataMatrix::from_rows(rows).unwrap(), 1, 2, 1, 2).g(|x, t1, out| out[0] = x[0] - t1[0]).h(|x, t1, t2, out| {
        out[0] = (x[0] - t1[0]).powi(2) - t2[0];
        out[1] = x[1] - t2[1].sinh();
    })
}

#[test]
fn criterion_2_conditional_maximiser_equals_profile_maximum() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let opts = MceleOptions::default();
    let (mut worst_cell, mut worst_product, mut checked) = (0.0f64, 0.0f64, 0);
    let mut failures = Vec::new();
    for case in 0..200 {
        let q = 1 + case % 2;
        let scale = rng.random_range(0.5..2.0);
        let xs: Vec<f64> = normals(&mut rng, 20).into_iter().map(|z| scale * z).collect();
        let mean = xs.iter().sum::<f64>() / 20.0;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 20.0).sqrt();
        let mu = mean + 0.5 * sd * rng.random_range(-1.0..1.0);
        let zs: Vec<f64> = normals(&mut rng, 20).into_iter().map(|z| 0.5 + scale * z).collect();
        let model: Box<dyn ElModel> = if q == 1 {
            Box::new(normal_toy_model(&xs).unwrap())
        } else {
            let rows: Vec<Vec<f64>> = xs.iter().zip(&zs).map(|(&x, &z)| vec![x, z]).collect();
            Box::new(two_statistic_model(&rows))
        };
        let m = mcele(model.as_ref(), &[mu], &opts).unwrap();
        if !m.feasible {
            failures.push(format!("case {case}: trial problem infeasible"));
            continue;
        }
        // the maximiser lies in the hull of the per-observation solutions
        let stats: Vec<Vec<f64>> = xs
            .iter()
            .zip(&zs)
            .map(|(x, z)| {
                let d = x - mu;
                if q == 1 {
                    vec![d * d]
                } else {
                    vec![d * d, z.asinh()]
                }
            })
            .collect();
        let lo: Vec<f64> = (0..q).map(|k| stats.iter().map(|s| s[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..q).map(|k| stats.iter().map(|s| s[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let grid = grid_argmax(model.as_ref(), &[mu], lo, hi);
        let cell = grid.iter().zip(&m.theta2_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let at_hat = el_at(model.as_ref(), &[mu], &m.theta2_hat, &SolverOptions::default()).unwrap().log_el;
        let product: f64 = m.trial_weights.iter().map(|w| w.ln()).sum();
        worst_cell = worst_cell.max(cell);
        worst_product = worst_product.max((at_hat - product).abs());
        checked += 1;
        if cell > GRID_STEP || (at_hat - product).abs() > 1e-7 {
            failures.push(format!("case {case} (q = {q}): grid distance {cell:.2e}, log-likelihood gap {:.2e}", (at_hat - product).abs()));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && checked == 200 && elapsed < Duration::from_secs(120);
    verdict(
        2,
        "conditional maximiser",
        pass,
        &format!(
            "{checked}/200 instances, max grid distance {worst_cell:.2e} (cell {GRID_STEP:e}), max |log L(a, hat) - sum log nu| {worst_product:.2e}, {:.1} s{}",
            elapsed.as_secs_f64(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    );
}

// ---------------------------------------------------------------- 3

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

#[test]
fn criterion_3_birth_map_has_unit_jacobian() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut attempts = 0;
    while done < 100 && attempts < 1000 {
        attempts += 1;
        let s = rng.random_range(2..=6);
        let n = rng.random_range(30..=80);
        let beta_true: Vec<f64> = (0..s).map(|_| rng.random_range(-1.5..1.5)).collect();
        let data = synth_regression(rng.random(), n, s, &beta_true, rng.random_range(0.3..1.5)).unwrap().standardize().unwrap();
        let j = rng.random_range(0..s);
        let gamma: Vec<bool> = (0..s).map(|i| i != j && rng.random_bool(0.5)).collect();
        let fit = ols(&data, &gamma);
        let beta: Vec<f64> = fit.iter().map(|b| b + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect();
        let u = 0.05 * rng.sample::<f64, _>(StandardNormal);
        let sigma2 = rng.random_range(0.2..1.5);
        let pos = gamma[..j].iter().filter(|&&g| g).count();
        // coordinates in the larger model's order: coefficients with u at the new position, then the variance
        let mut x: Vec<f64> = beta.clone();
        x.insert(pos, u);
        x.push(sigma2);
        let k = beta.len();
        let map = |x: &[f64]| -> Option<Vec<f64>> {
            let mut small = x[..=k].to_vec();
            let u = small.remove(pos);
            birth_map(&data, &gamma, j, &small, u, x[k + 1]).unwrap().map(|(mut b, s2)| {
                b.push(s2);
                b
            })
        };
        if map(&x).is_none() {
            continue;
        }
        let h = 1e-6;
        let dim = x.len();
        let mut jac = vec![vec![0.0; dim]; dim];
        let mut ok = true;
        for c in 0..dim {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[c] += h;
            xm[c] -= h;
            match (map(&xp), map(&xm)) {
                (Some(fp), Some(fm)) => {
                    for r in 0..dim {
                        jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            continue;
        }
        worst = worst.max((determinant(jac) - 1.0).abs());
        done += 1;
    }
    let elapsed = start.elapsed();
    let pass = done == 100 && worst <= 1e-6 && elapsed < Duration::from_secs(30);
    verdict(
        3,
        "unit Jacobian",
        pass,
        &format!("{done} instances ({attempts} drawn), max |det - 1| {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_4_posterior_matches_grid_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let xs = normals(&mut rng, 10);
    let toy = normal_toy_model(&xs).unwrap();
    let ((mu_lo, mu_hi), (s_lo, s_hi)) = toy.feasible_box();
    let cells = 200;
    let (dmu, ds) = ((mu_hi - mu_lo) / cells as f64, (s_hi - s_lo) / cells as f64);
    let mut logp = vec![f64::NEG_INFINITY; cells * cells];
    for a in 0..cells {
        for b in 0..cells {
            let mu = mu_lo + (a as f64 + 0.5) * dmu;
            let s2 = s_lo + (b as f64 + 0.5) * ds;
            logp[a * cells + b] = log_posterior_unnorm(&toy, &ThetaSplit { theta1: vec![mu], theta2: vec![s2] }).unwrap();
        }
    }
    let top = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logp.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let (mut grid_mu, mut grid_s2) = (0.0, 0.0);
    let mut grid_bins = vec![0.0; 400];
    for a in 0..cells {
        for b in 0..cells {
            let p = weights[a * cells + b] / total;
            grid_mu += p * (mu_lo + (a as f64 + 0.5) * dmu);
            grid_s2 += p * (s_lo + (b as f64 + 0.5) * ds);
            grid_bins[(a / 10) * 20 + b / 10] += p;
        }
    }

    let q1 = Proposal1::random_walk(vec![0.4]);
    let q2 = Proposal2::TruncatedNormalAtMcele { scales: vec![0.4], lower_bounds: vec![0.0] };
    let config = RunConfig { length: 100_000, burn_in: 20_000, seed: 4, chain: 0, scan: Default::default() };
    let init = ThetaSplit { theta1: vec![toy.mean()], theta2: vec![toy.variance()] };
    let trace = two_step_mh(&toy, init, &q1, &q2, &config).unwrap();
    let kept = &trace.states[config.burn_in..];
    let m = kept.len() as f64;
    let mc_mu = kept.iter().map(|s| s.theta1[0]).sum::<f64>() / m;
    let mc_s2 = kept.iter().map(|s| s.theta2[0]).sum::<f64>() / m;
    let mut mc_bins = vec![0.0; 400];
    for s in kept {
        let a = (((s.theta1[0] - mu_lo) / (mu_hi - mu_lo) * 20.0) as usize).min(19);
        let b = (((s.theta2[0] - s_lo) / (s_hi - s_lo) * 20.0) as usize).min(19);
        mc_bins[a * 20 + b] += 1.0 / m;
    }
    let tv = 0.5 * grid_bins.iter().zip(&mc_bins).map(|(p, q)| (p - q).abs()).sum::<f64>();
    let elapsed = start.elapsed();
    let pass = (mc_mu - grid_mu).abs() < 0.05 && (mc_s2 - grid_s2).abs() < 0.15 && tv < 0.08 && elapsed < Duration::from_secs(300);
    verdict(
        4,
        "posterior vs grid",
        pass,
        &format!(
            "mean mu {mc_mu:.4} vs {grid_mu:.4}, mean sigma2 {mc_s2:.4} vs {grid_s2:.4}, TV {tv:.4}, acceptance {:.3}, {:.1} s",
            trace.acceptance_rate(),
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 5

struct RatCheck {
    theta0: f64,
    theta2c: f64,
    sigma_e: f64,
    stationary: [bool; 3],
}

fn rat_run(length: usize, burn_in: usize) -> RatCheck {
    let config = RatConfig { length, burn_in, seed: 1, ..Default::default() };
    let trace = run_rats(&RatData::bundled(), &config).unwrap();
    let kept = |name: &str| trace.column_by_name(name).unwrap()[burn_in..].to_vec();
    let (c1, c2, s2) = (kept("theta1c"), kept("theta2c"), kept("theta2_1"));
    let theta0: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a - 22.0 * b).collect();
    let sigma: Vec<f64> = s2.iter().map(|v| v.sqrt()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let hw = |v: &[f64]| heidelberger_welch(v, 0.05, 0.1).unwrap().stationary;
    RatCheck { theta0: mean(&theta0), theta2c: mean(&c2), sigma_e: mean(&sigma), stationary: [hw(&theta0), hw(&c2), hw(&sigma)] }
}

fn rat_verdict(r: &RatCheck, widen: f64, need_stationary: bool, elapsed: Duration, limit: Option<Duration>, label: &str) {
    let within = (r.theta0 - 106.9).abs() <= 1.5 * widen && (r.theta2c - 6.190).abs() <= 0.05 * widen && (r.sigma_e - 4.251).abs() <= 0.30 * widen;
    let stationary = r.stationary.iter().all(|&s| s);
    let timely = limit.is_none_or(|l| elapsed < l);
    verdict(
        5,
        label,
        within && (stationary || !need_stationary) && timely,
        &format!(
            "theta0 {:.3} (106.9 +- {:.2}), theta2c {:.4} (6.190 +- {:.3}), sigma_e {:.3} (4.251 +- {:.2}), stationarity [theta0, theta2c, sigma_e] {:?}, {:.0} s",
            r.theta0,
            1.5 * widen,
            r.theta2c,
            0.05 * widen,
            r.sigma_e,
            0.30 * widen,
            r.stationary,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_growth_curves_smoke() {
    let _g = serial();
    let start = Instant::now();
    let r = rat_run(15_000, 5_000);
    rat_verdict(&r, 3.0, false, start.elapsed(), Some(Duration::from_secs(180)), "growth curves, 15k smoke run");
}

#[test]
#[ignore = "long run: 150k iterations"]
fn criterion_5_growth_curves_full() {
    let _g = serial();
    let start = Instant::now();
    let r = rat_run(150_000, 50_000);
    rat_verdict(&r, 1.0, true, start.elapsed(), None, "growth curves, 150k run");
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_variable_selection_recovers_support() {
    let _g = serial();
    let start = Instant::now();
    let beta = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    // Var(x beta) = 2, noise variance 0.4
    let sigma = 0.4f64.sqrt();
    let mut hits = 0;
    let mut acceptance = Vec::new();
    let mut modes = Vec::new();
    for seed in 1..=20u64 {
        let data: RegressionData = synth_regression(seed, 100, 6, &beta, sigma).unwrap().standardize().unwrap();
        let config = RjConfig { length: 5000, burn_in: 1000, seed, sigma2_scale: 0.02, beta_scale: 0.03, u_sd: 0.05, ..Default::default() };
        let trace = rjmcmc(&data, &config).unwrap();
        let modal = trace.modal_model().unwrap();
        hits += usize::from(modal == "100100");
        acceptance.push(trace.cross_acceptance());
        modes.push(modal);
    }
    let mean_acceptance = acceptance.iter().sum::<f64>() / acceptance.len() as f64;
    let elapsed = start.elapsed();
    let pass = hits >= 18 && mean_acceptance > 0.05 && elapsed < Duration::from_secs(600);
    verdict(
        6,
        "variable selection",
        pass,
        &format!(
            "truth is modal in {hits}/20 seeds, mean cross-model acceptance {mean_acceptance:.4} (range {:.4}..{:.4}), {:.1} s; modes {}",
            acceptance.iter().copied().fold(f64::INFINITY, f64::min),
            acceptance.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            elapsed.as_secs_f64(),
            modes.join(" ")
        ),
    );
}

// ---------------------------------------------------------------- 7

fn cli(config: &Path, out: &Path, args: &[&str]) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_bayesel")).arg("--config").arg(config).arg("--out").arg(out).args(args).output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

#[test]
fn criterion_7_cli_reruns_are_byte_identical() {
    let _g = serial();
    let dir = tempfile::TempDir::new().unwrap();
    let root = dir.path();
    let toy: Vec<f64> = normals(&mut ChaCha8Rng::seed_from_u64(707), 12);
    let toy_model = serde_json::json!({ "kind": "normal_toy", "data": toy });
    let configs = [
        ("solve", serde_json::json!({ "model": toy_model, "theta1": [0.1], "theta2": [0.9] })),
        ("grid", serde_json::json!({ "model": toy_model, "theta1_range": [-1.0, 1.0], "theta2_range": [0.1, 2.0], "resolution": 30 })),
        ("sample", serde_json::json!({
            "model": toy_model, "length": 2000, "burn_in": 400, "seed": 3,
            "q1": { "kind": "gaussian_random_walk", "scales": [0.4] },
            "q2": { "kind": "truncated_normal_at_mcele", "scales": [0.4], "lower_bounds": [0.0] }
        })),
        ("rats", serde_json::json!({ "model": { "kind": "rats" }, "length": 150, "burn_in": 50, "seed": 3 })),
        ("select", serde_json::json!({
            "mode": "regression",
            "data": { "synthetic": "regression", "seed": 7, "n": 60, "beta": [1.0, 0.0, -0.8], "sigma": 0.5 },
            "sampler": { "length": 800, "burn_in": 200, "seed": 3, "sigma2_scale": 0.05 }
        })),
        ("network", serde_json::json!({
            "mode": "dag",
            "data": { "synthetic": "network", "seed": 7, "n": 50, "noise_sd": 0.4 },
            "sampler": { "length": 200, "burn_in": 50, "seed": 3, "sigma2_scale": 0.05 }
        })),
    ];
    for (name, body) in &configs {
        std::fs::write(root.join(format!("{name}.json")), body.to_string()).unwrap();
    }
    std::fs::write(root.join("diagnose.json"), r#"{ "trace": "a_sample/trace.csv", "burn_in": 400 }"#).unwrap();
    let runs: [(&str, &[&str], &[&str]); 8] = [
        ("solve", &["solve-el"], &[]),
        ("grid", &["--no-plot", "grid"], &["grid.csv"]),
        ("sample", &["--no-plot", "sample"], &["trace.csv", "summary.csv", "summary.json"]),
        ("sample", &["--no-plot", "--chains", "3", "--seed", "11", "sample"], &["trace_chain0.csv", "trace_chain2.csv", "summary_chain1.csv"]),
        ("rats", &["--no-plot", "sample"], &["trace.csv", "summary.csv", "summary.json"]),
        ("select", &["select"], &["model_trace.csv", "model_frequencies.json"]),
        ("network", &["select"], &["edges.csv", "graph.dot", "model_trace_g13.csv", "model_frequencies_g9.json"]),
        ("diagnose", &["diagnose"], &["diagnostics.json"]),
    ];
    let mut differing = Vec::new();
    let mut compared = 0;
    for (name, args, files) in runs {
        let config = root.join(format!("{name}.json"));
        let outs: Vec<Vec<u8>> = ["a", "b"].iter().map(|run| cli(&config, &root.join(format!("{run}_{name}")), args)).collect();
        if name == "solve" {
            compared += 1;
            if outs[0] != outs[1] {
                differing.push("solve-el stdout".to_string());
            }
        }
        for f in files {
            let a = std::fs::read(root.join(format!("a_{name}")).join(f)).unwrap();
            let b = std::fs::read(root.join(format!("b_{name}")).join(f)).unwrap();
            compared += 1;
            if a != b || a.is_empty() {
                differing.push(format!("{name}/{f}"));
            }
        }
    }
    verdict(
        7,
        "determinism",
        differing.is_empty(),
        &format!("{compared} outputs from 8 command lines compared across reruns, {} differ {differing:?}", differing.len()),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_stationarity_test_calibration() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    // the post-burn-in length of the growth-curve smoke run
    let len = 10_000;
    let mut iid_pass = 0;
    let mut trend_fail = 0;
    for _ in 0..100 {
        let z = normals(&mut rng, len);
        iid_pass += usize::from(heidelberger_welch(&z, 0.05, 0.1).unwrap().stationary);
        let z = normals(&mut rng, len);
        // the mean drifts by two standard deviations over the series
        let trend: Vec<f64> = z.iter().enumerate().map(|(t, e)| e + 2.0 * t as f64 / len as f64).collect();
        trend_fail += usize::from(!heidelberger_welch(&trend, 0.05, 0.1).unwrap().stationary);
    }
    verdict(
        8,
        "stationarity calibration",
        iid_pass >= 90 && trend_fail >= 99,
        &format!("iid normal passes {iid_pass}/100, linear trend fails {trend_fail}/100 (series length {len})"),
    );
}
