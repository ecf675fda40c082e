//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use weylroof::bounds::{superadditivity_experiment_with, RoofEstimator, StiefelSearch, BOUND_TOL, SUPERADD_TOL};
use weylroof::channel::CHANNEL_TOL;
use weylroof::random::{random_density, random_pure_state, stream};
use weylroof::weyl::{depolarizing_max, fourier_diagonal_unitary, root_of_unity};
use weylroof::{
    bound_rhs, chi_dep_closed_form, choi, compose, conditional_expectation, covariance_defect, depolarizing,
    estimate_chi, estimate_h_hat, h_dep_const, lambda_for_params, mub_family, phase_damping, qc_channel, shift_defect,
    superadditivity_experiment, unbiasedness_defect, verify_bound, weyl_channel, weyl_operator, BoundConfig,
    ChannelSpec, ChoiMatrix, ComplexMatrix, DensityMatrix, OptimizerConfig, QuantumChannel, SuperaddConfig, WeylParams,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn weyl_algebra() -> Check {
    let mut worst_unitary = 0.0f64;
    let mut worst_commute = 0.0f64;
    let mut worst_twirl = 0.0f64;
    for d in [2usize, 3, 5] {
        let ws: Vec<Vec<ComplexMatrix>> = (0..d)
            .map(|m| (0..d).map(|n| weyl_operator(d, m, n).unwrap()).collect())
            .collect();
        for (m, row) in ws.iter().enumerate() {
            for (n, a) in row.iter().enumerate() {
                worst_unitary = worst_unitary.max(a.unitarity_defect());
                for (m2, row2) in ws.iter().enumerate() {
                    for (n2, b) in row2.iter().enumerate() {
                        let k = (m2 * n + d * d - m * n2) % d;
                        let ba = (b * a).scale(root_of_unity(d, k));
                        worst_commute = worst_commute.max((a * b).max_abs_diff(&ba));
                    }
                }
            }
        }
        for i in 0..3u64 {
            let rho = random_density(d, d, &mut stream(d as u64, i)).map_err(err)?;
            let mut sum = ComplexMatrix::zeros(d, d);
            for row in &ws {
                for w in row {
                    sum = &sum + &(&(w * rho.matrix()) * &w.adjoint());
                }
            }
            let target = ComplexMatrix::identity(d).scale((d as f64).into());
            worst_twirl = worst_twirl.max(sum.max_abs_diff(&target));
        }
    }
    ensure(worst_unitary <= 1e-12, || {
        format!("unitarity defect {worst_unitary:.2e}")
    })?;
    ensure(worst_commute <= 1e-12, || {
        format!("commutation defect {worst_commute:.2e}")
    })?;
    ensure(worst_twirl <= 1e-10, || format!("twirl defect {worst_twirl:.2e}"))?;
    Ok(format!(
        "d in {{2,3,5}}: unitarity {worst_unitary:.1e}, commutation {worst_commute:.1e}, twirl {worst_twirl:.1e}"
    ))
}

fn weyl_grid() -> Vec<WeylParams> {
    let mut out = Vec::new();
    for d in [2usize, 3, 5] {
        let df = d as f64;
        let pmax = 1.0 / (df * (df - 1.0));
        for i in 0..=4 {
            let p = pmax * i as f64 / 4.0;
            let rmax = (1.0 - df * (df - 1.0) * p) / (df - 1.0);
            for j in 0..=4 {
                out.push(WeylParams::new(d, rmax * j as f64 / 4.0, p).unwrap());
            }
        }
    }
    out
}

fn channel_validity() -> Check {
    let mut channels: Vec<QuantumChannel> = Vec::new();
    for params in weyl_grid() {
        channels.push(weyl_channel(&params).map_err(err)?);
    }
    for d in [2usize, 3, 5] {
        let df = d as f64;
        for q in [0.0, 0.25, 0.5, 0.75, 1.0, depolarizing_max(d)] {
            channels.push(depolarizing(d, q).map_err(err)?);
        }
        for q in [0.0, 0.25, 0.5, 1.0, df / (df - 1.0)] {
            channels.push(qc_channel(d, q).map_err(err)?);
        }
        for lambda in [0.0, 0.3, 0.5, 1.0] {
            channels.push(phase_damping(d, lambda).map_err(err)?);
        }
        channels.push(conditional_expectation(d).map_err(err)?);
    }
    let tp = channels.iter().map(|c| c.tp_defect()).fold(0.0, f64::max);
    let choi_min = channels
        .iter()
        .map(|c| choi(c).min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    ensure(tp <= CHANNEL_TOL, || format!("tp defect {tp:.2e}"))?;
    ensure(choi_min >= -CHANNEL_TOL, || {
        format!("Choi min eigenvalue {choi_min:.2e}")
    })?;

    let mut mub = 0.0f64;
    let mut shift = 0.0f64;
    for d in [2usize, 3, 5] {
        let fam = mub_family(d).map_err(err)?;
        mub = mub.max(fam.max_defect());
        for b in fam.bases() {
            mub = mub.max(unbiasedness_defect(b, fam.computational()).map_err(err)?);
        }
        for n in 0..d {
            shift = shift.max(shift_defect(d, n).map_err(err)?);
        }
    }
    ensure(mub <= 1e-12, || format!("MUB defect {mub:.2e}"))?;
    ensure(shift <= 1e-12, || format!("shift defect {shift:.2e}"))?;

    let mut cov = 0.0f64;
    for params in weyl_grid() {
        let d = params.dim;
        let ch = weyl_channel(&params).map_err(err)?;
        for s in 0..3u64 {
            let phases: Vec<f64> = (0..d).map(|j| ((j as u64 + 1) * (s + 3)) as f64 * 0.37).collect();
            let u = fourier_diagonal_unitary(&phases).map_err(err)?;
            cov = cov.max(covariance_defect(&ch, &u).map_err(err)?);
        }
    }
    ensure(cov <= 1e-10, || format!("covariance defect {cov:.2e}"))?;
    Ok(format!(
        "{} channels: tp {tp:.1e}, Choi min {choi_min:.1e}; MUB {mub:.1e}, shift {shift:.1e}, covariance {cov:.1e}",
        channels.len()
    ))
}

fn decompositions() -> Check {
    let mut grid = vec![WeylParams::new(2, 0.25, 0.125).unwrap()];
    for d in [2usize, 3, 5] {
        let df = d as f64;
        for p in [0.0, 0.01, 0.2 / (df * df), 0.5 / (df * df)] {
            let hi = (1.0 - df * (df - 1.0) * p) / df;
            for t in [0.0, 0.5, 1.0] {
                grid.push(WeylParams::new(d, p + t * (hi - p), p).unwrap());
            }
        }
    }
    let worked = lambda_for_params(&grid[0]).map_err(err)?;
    ensure((worked - 0.5).abs() <= 1e-12, || {
        format!("lambda at (2, 1/4, 1/8) is {worked}")
    })?;
    let mut worst = 0.0f64;
    for params in &grid {
        let d = params.dim;
        let q = params.depolarizing_parameter();
        let lambda = lambda_for_params(params).map_err(err)?;
        let target = choi(&weyl_channel(params).map_err(err)?);
        let dep = depolarizing(d, q).map_err(err)?;
        let mix = ChoiMatrix::combination(&[
            (lambda, &choi(&dep)),
            (1.0 - lambda, &choi(&qc_channel(d, q).map_err(err)?)),
        ]);
        let chain = compose(&phase_damping(d, lambda).map_err(err)?, &dep).map_err(err)?;
        worst = worst.max(target.distance(&mix)).max(target.distance(&choi(&chain)));
    }
    ensure(grid.len() >= 20, || format!("only {} points", grid.len()))?;
    ensure(worst <= 1e-10, || format!("Choi distance {worst:.2e}"))?;
    Ok(format!(
        "{} points, worst Choi distance {worst:.1e}, lambda(2,1/4,1/8) = {worked}",
        grid.len()
    ))
}

fn chi_dep() -> Check {
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        for q in [0.25, 0.5, 0.75, 1.0] {
            let ch = depolarizing(d, q).map_err(err)?;
            let got = estimate_chi(&ch, &OptimizerConfig::default().with_restarts(8))
                .map_err(err)?
                .value;
            let want = chi_dep_closed_form(d, q).map_err(err)?;
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= 1e-4, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("8 (d, q) points, max deviation {worst:.1e}"))
}

fn hhat_dep() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in [2usize, 3] {
        for q in [0.25, 0.5, 0.75, 1.0] {
            let ch = depolarizing(d, q).map_err(err)?;
            let h = h_dep_const(d, q).map_err(err)?;
            for i in 0..20u64 {
                let mut rng = stream(100 + d as u64, i);
                let sigma = random_density(d, 1 + (i as usize) % d, &mut rng).map_err(err)?;
                let cfg = OptimizerConfig::default().with_restarts(4).with_seed(i);
                let got = estimate_h_hat(&ch, &sigma, &cfg).map_err(err)?.value;
                worst = worst.max((got - h).abs());
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-3, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("{count} states, max deviation from h {worst:.1e}"))
}

fn bound_suite() -> Check {
    let mut min_gap = f64::INFINITY;
    let mut states = 0;
    for d in [2usize, 3] {
        for q in [0.25, 0.5, 0.75, 1.0] {
            for dim_k in [2usize, 3] {
                let report = verify_bound(&BoundConfig::new(d, q, dim_k, 200, 2024)).map_err(err)?;
                min_gap = min_gap.min(report.min_gap);
                states += report.samples.len();
            }
        }
    }
    ensure(min_gap >= -BOUND_TOL, || format!("min gap {min_gap:.3e}"))?;

    let mut tight = 0.0f64;
    for (d, dk) in [(2usize, 2usize), (3, 2), (3, 3)] {
        let fam = mub_family(d).map_err(err)?;
        for seed in 0..5u64 {
            let a = random_pure_state(d, &mut stream(seed, 0)).map_err(err)?;
            let b = random_pure_state(dk, &mut stream(seed, 1)).map_err(err)?;
            let rho = a.tensor(&b);
            for q in [0.25, 0.5, 0.75, 1.0] {
                let lhs = weylroof::bounds::bound_lhs(&rho, d, q).map_err(err)?;
                let rhs = bound_rhs(&rho, q, &fam).map_err(err)?;
                tight = tight.max((lhs - rhs).abs());
            }
        }
    }
    ensure(tight <= 1e-9, || format!("pure product |gap| {tight:.2e}"))?;

    let me = DensityMatrix::maximally_entangled(2);
    let lhs = weylroof::bounds::bound_lhs(&me, 2, 0.5).map_err(err)?;
    let rhs = bound_rhs(&me, 0.5, &mub_family(2).map_err(err)?).map_err(err)?;
    ensure((lhs - 1.548795).abs() <= 1e-6 && (rhs - 0.811278).abs() <= 1e-6, || {
        format!("maximally entangled lhs {lhs}, rhs {rhs}")
    })?;
    Ok(format!(
        "{states} states, min gap {min_gap:.2e}; pure products |gap| <= {tight:.1e}; maximally entangled lhs {lhs:.6} rhs {rhs:.6}"
    ))
}

/// Inflates the roof of the single-system channel until given more restarts
/// than the base run, so that every sample takes the rerun branch.
struct StaleFirstPass {
    base_restarts: usize,
    inflated: AtomicUsize,
}

impl RoofEstimator for StaleFirstPass {
    fn estimate(&self, ch: &QuantumChannel, sigma: &DensityMatrix, cfg: &OptimizerConfig) -> weylroof::Result<f64> {
        let value = StiefelSearch.estimate(ch, sigma, cfg)?;
        if ch.dim_in() == 2 && cfg.restarts <= self.base_restarts {
            self.inflated.fetch_add(1, Ordering::Relaxed);
            return Ok(value + 1.0);
        }
        Ok(value)
    }
}

fn superadditivity() -> Check {
    let params = WeylParams::new(2, 0.125, 0.125).map_err(err)?;
    let optimizer = OptimizerConfig::default().with_restarts(4).with_seed(7);
    let mut parts = Vec::new();
    let mut natural_reruns = 0;
    for psi in [
        ChannelSpec::Identity,
        ChannelSpec::Depolarizing(0.5),
        ChannelSpec::Qc(0.5),
    ] {
        let mut cfg = SuperaddConfig::new(params, psi.clone(), 2, 20, optimizer.clone());
        cfg.product_probe = 4;
        let report = superadditivity_experiment(&cfg).map_err(err)?;
        let residual = report.product_equality_residual.unwrap_or(f64::INFINITY);
        ensure(report.samples.len() == 20, || {
            format!("{psi}: {} samples", report.samples.len())
        })?;
        ensure(report.min_gap >= -SUPERADD_TOL, || {
            format!("{psi}: min gap {:.3e}", report.min_gap)
        })?;
        ensure(residual <= SUPERADD_TOL, || {
            format!("{psi}: product residual {residual:.3e}")
        })?;
        natural_reruns += report.samples.iter().filter(|s| s.rerun).count();
        parts.push(format!("{psi} min gap {:.2e} residual {residual:.1e}", report.min_gap));
    }

    let est = StaleFirstPass {
        base_restarts: optimizer.restarts,
        inflated: AtomicUsize::new(0),
    };
    let mut cfg = SuperaddConfig::new(params, ChannelSpec::Depolarizing(0.5), 2, 3, optimizer);
    cfg.product_probe = 0;
    let report = superadditivity_experiment_with(&est, &cfg).map_err(err)?;
    let reran = report.samples.iter().filter(|s| s.rerun).count();
    ensure(reran == 3 && report.optimizer_failures == 0, || {
        format!("injected rerun: {reran} reruns, {} failures", report.optimizer_failures)
    })?;
    ensure(report.min_gap >= -SUPERADD_TOL, || {
        format!("after rerun min gap {:.3e}", report.min_gap)
    })?;
    Ok(format!(
        "{}; {natural_reruns} natural reruns, injected rerun recovered 3/3",
        parts.join(", ")
    ))
}

fn cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_weylroof"))
        .args(args)
        .env_remove("WEYLROOF_THREADS")
        .output()
        .map_err(err)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn reproducibility() -> Check {
    let run = [
        "hhat",
        "--channel",
        "qc",
        "--q",
        "0.5",
        "--d",
        "3",
        "--seed",
        "13",
        "--restarts",
        "4",
        "--json",
        "-",
    ];
    let (c1, a) = cli(&run)?;
    let (c2, b) = cli(&run)?;
    ensure(c1 == 0 && c2 == 0, || format!("hhat exit codes {c1}, {c2}"))?;
    ensure(!a.is_empty() && a == b, || "hhat JSON differs between runs".into())?;

    let bound = [
        "verify-bound",
        "--d",
        "3",
        "--q",
        "0.5",
        "--samples",
        "50",
        "--seed",
        "42",
        "--json",
        "-",
    ];
    let (_, a) = cli(&bound)?;
    let (_, b) = cli(&bound)?;
    ensure(a == b, || "verify-bound JSON differs between runs".into())?;

    let (ok, _) = cli(&[
        "verify-bound",
        "--d",
        "2",
        "--q",
        "0.5",
        "--samples",
        "20",
        "--seed",
        "42",
    ])?;
    let (bad, _) = cli(&["verify-bound", "--d", "4", "--q", "0.5"])?;
    let (viol, _) = cli(&[
        "verify-bound",
        "--d",
        "2",
        "--q",
        "0.5",
        "--samples",
        "5",
        "--tolerance",
        "-1",
    ])?;
    ensure((ok, bad, viol) == (0, 1, 2), || {
        format!("exit codes {ok}/{bad}/{viol}, expected 0/1/2")
    })?;
    Ok("identical JSON bytes across runs; exit codes 0/1/2".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("weyl algebra", weyl_algebra),
        ("channel validity", channel_validity),
        ("mixture and composition", decompositions),
        ("chi of depolarizing", chi_dep),
        ("roof of depolarizing", hhat_dep),
        ("entropy bound suite", bound_suite),
        ("strong superadditivity", superadditivity),
        ("reproducibility and exit codes", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
