//! Acceptance suite. Run with `cargo test -p torusflow --test acceptance`.
//!
//! Prints one line per criterion and exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use torusflow::check::{check_suite, identity_corpus};
use torusflow::presets::preset;
use torusflow::sweep::{sweep, SweepReport};
use torusflow::{run_scenario, RunManifest};
use torusflow_core::cns::{cns_step, CnsParams, CnsState};
use torusflow_core::diagnostics::{weighted_norm_accumulator, Reduction, TimeSeries};
use torusflow_core::ins::ins_initial_data;
use torusflow_core::linear::{acoustic_eigenvalues, evolve_linear_mode};
use torusflow_core::spectral::{make_grid, ScalarField, VectorField};

const SEED: u64 = 20240607;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

type Criterion<'a> = Box<dyn FnOnce() -> Result<Outcome, String> + 'a>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1() -> Result<Outcome, String> {
    let id = identity_corpus(100, 64, SEED).map_err(err)?;
    let worst = id
        .max_flux_identity
        .max(id.max_elliptic)
        .max(id.max_helmholtz);
    Ok(Outcome::new(
        worst < 1e-10,
        format!(
            "100 states N=64: flux {:.2e}, elliptic {:.2e}, helmholtz {:.2e} (< 1e-10)",
            id.max_flux_identity, id.max_elliptic, id.max_helmholtz
        ),
    ))
}

/// Classical RK4 on `a' = −d`, `d' = P′k²a − νk²d`.
fn rk4_mode(a0: f64, d0: f64, nu: f64, k2: f64, pp: f64, t: f64) -> (f64, f64) {
    let b = nu * k2;
    let c = pp * k2;
    let f = |a: f64, d: f64| (-d, c * a - b * d);
    let steps = ((t * b.max(1.0)) / 0.02).ceil().max(t / 1e-3) as usize;
    let h = t / steps as f64;
    let (mut a, mut d) = (a0, d0);
    for _ in 0..steps {
        let k1 = f(a, d);
        let k2_ = f(a + 0.5 * h * k1.0, d + 0.5 * h * k1.1);
        let k3 = f(a + 0.5 * h * k2_.0, d + 0.5 * h * k2_.1);
        let k4 = f(a + h * k3.0, d + h * k3.1);
        a += h / 6.0 * (k1.0 + 2.0 * k2_.0 + 2.0 * k3.0 + k4.0);
        d += h / 6.0 * (k1.1 + 2.0 * k2_.1 + 2.0 * k3.1 + k4.1);
    }
    (a, d)
}

fn c2() -> Result<Outcome, String> {
    let mut worst_ode = 0.0f64;
    let mut worst_vieta = 0.0f64;
    let mut points = 0;
    for nu in [0.5, 2.0, 10.0, 80.0] {
        for k2 in [1.0, 2.0, 5.0, 13.0] {
            for pp in [1.0, 1.4] {
                points += 1;
                let (lp, lm, _) = acoustic_eigenvalues(nu, k2, pp).map_err(err)?;
                let (b, c) = (nu * k2, pp * k2);
                worst_vieta = worst_vieta
                    .max(((lp + lm).re + b).abs() / b)
                    .max((lp + lm).im.abs() / b);
                worst_vieta = worst_vieta
                    .max(((lp * lm).re - c).abs() / c)
                    .max((lp * lm).im.abs() / c);
                for (a0, d0) in [(1.0, 0.0), (0.0, 1.0)] {
                    for t in [0.5, 2.0] {
                        let (a, d) = evolve_linear_mode(a0, d0, nu, k2, pp, t).map_err(err)?;
                        let (ar, dr) = rk4_mode(a0, d0, nu, k2, pp, t);
                        worst_ode = worst_ode.max((a - ar).abs()).max((d - dr).abs());
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        worst_ode <= 1e-10 && worst_vieta <= 1e-12,
        format!("{points} lattice points incl. confluent nu=2 |k|^2=1: RK4 gap {worst_ode:.2e} (<= 1e-10), Vieta {worst_vieta:.2e} (<= 1e-12)"),
    ))
}

fn c3() -> Result<Outcome, String> {
    let amp = 1e-6;
    let (nu, dt, t_end) = (10.0, 0.05, 5.0f64);
    let grid = make_grid([2.0 * PI, 2.0 * PI], [32, 32]).map_err(err)?;
    let params = CnsParams::with_nu(1.0, nu, 1.0, 1.0).map_err(err)?;
    let rho = ScalarField::from_fn(&grid, |x, _| 1.0 + amp * x.cos());
    let mut state =
        CnsState::from_velocity(rho, VectorField::zeros(&grid), params, 0.0).map_err(err)?;
    let cos_x = ScalarField::from_fn(&grid, |x, _| x.cos());
    let steps = (t_end / dt).round() as usize;
    let mut worst = 0.0f64;
    for n in 1..=steps {
        state = cns_step(&state, dt).map_err(err)?;
        let t = n as f64 * dt;
        let (a, _) = evolve_linear_mode(amp, 0.0, nu, 1.0, 1.0, t).map_err(err)?;
        let expected = cos_x.scale(a);
        let gap = state.rho.zip_map(&expected, |r, e| r - 1.0 - e).l2_norm();
        worst = worst.max(gap / expected.l2_norm());
    }
    Ok(Outcome::new(
        worst <= 0.01,
        format!("A=1e-6 nu=10 N=32 t in [0,5]: worst relative L2 gap {worst:.2e} (<= 1e-2)"),
    ))
}

fn c4() -> Result<Outcome, String> {
    let m = run_scenario(&preset("vacuum-disk").unwrap(), None)
        .map_err(err)?
        .manifest;
    let c = &m.conservation;
    Ok(Outcome::new(
        c.max_mass_drift < 1e-12 && c.momentum_drift_rate < 1e-8 && c.rho_min >= 0.0 && m.vacuum_or_regularized,
        format!(
            "vacuum disk N=128 T=10: mass drift {:.2e} (< 1e-12), momentum drift rate {:.2e} (< 1e-8), min rho {:.3e} (>= 0)",
            c.max_mass_drift, c.momentum_drift_rate, c.rho_min
        ),
    ))
}

fn balance_residual(dt: f64) -> Result<f64, String> {
    let mut cfg = preset("smooth-perturbation").unwrap();
    cfg.dt = Some(dt);
    cfg.diagnostic_interval = dt;
    let m = run_scenario(&cfg, None).map_err(err)?.manifest;
    Ok(m.energy_balance
        .ok_or("no energy balance in manifest")?
        .max_abs_residual)
}

fn c5() -> Result<Outcome, String> {
    let coarse = balance_residual(0.01)?;
    let fine = balance_residual(0.005)?;
    let ratio = coarse / fine;
    Ok(Outcome::new(
        ratio >= 3.5,
        format!("energy balance residual dt=0.01 {coarse:.3e}, dt=0.005 {fine:.3e}: ratio {ratio:.2} (>= 3.5)"),
    ))
}

fn c6() -> Result<Outcome, String> {
    let cfg = preset("ins-smooth").unwrap();
    let rho0 = ins_initial_data(
        &cfg.initial_spec(),
        &cfg.grid().map_err(err)?,
        cfg.params.mu,
    )
    .map_err(err)?
    .rho;
    let v = rho0.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let norm2 = v.iter().map(|r| r * r).sum::<f64>() / v.len() as f64;
    let rho_star = rho0.max();
    let beta_oracle = 2.0 * cfg.params.mu / (rho_star * norm2);
    let data_ok = rho0.min() >= 0.5 && rho_star <= 1.5 && (mean - 1.0).abs() < 1e-12;

    let m = run_scenario(&cfg, None).map_err(err)?.manifest;
    let kb = m
        .ke_bound
        .as_ref()
        .ok_or("no kinetic-energy bound in manifest")?;
    let beta_ok = (kb.beta1 - beta_oracle).abs() <= 1e-12 * beta_oracle;
    Ok(Outcome::new(
        data_ok && beta_ok && kb.worst_ratio <= 1.05,
        format!(
            "rho0 in [{:.3}, {:.3}] mean {mean:.3}, beta1 {:.4} (oracle {beta_oracle:.4}): worst KE/(e^(-beta1 t) KE0) {:.4} (<= 1.05)",
            rho0.min(),
            rho_star,
            kb.beta1,
            kb.worst_ratio
        ),
    ))
}

fn c7(report: &SweepReport) -> Outcome {
    let rates: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}:{:.4}", r.nu, r.rate_ptilde))
        .collect();
    Outcome::new(
        (report.slope_ptilde + 1.0).abs() <= 0.15 && report.spread_grad_pu < 0.2,
        format!(
            "rate(P~) {}: slope {:.4} (-1 +/- 0.15), spread of rate(grad Pu) {:.3} (< 0.2)",
            rates.join(" "),
            report.slope_ptilde,
            report.spread_grad_pu
        ),
    )
}

fn c8() -> Result<(Outcome, RunManifest), String> {
    let cfg = preset("two-level-density").unwrap();
    let m = run_scenario(&cfg, None).map_err(err)?.manifest;
    let c = &m.conservation;
    let levels = cfg.initial.levels;
    let outcome = Outcome::new(
        c.rho_min >= 0.5 * levels[0] && c.rho_max <= 2.0 * levels[1],
        format!(
            "rho0 in [{}, {}] nu=80 T=10: inf rho {:.4} (>= {}), sup rho {:.4} (<= {})",
            levels[0],
            levels[1],
            c.rho_min,
            0.5 * levels[0],
            c.rho_max,
            2.0 * levels[1]
        ),
    );
    Ok((outcome, m))
}

fn c9(m: &RunManifest) -> Outcome {
    let rc = m.rate_comparison.as_ref();
    let g = rc.and_then(|r| r.rate_gtilde);
    let p = rc.and_then(|r| r.rate_ptilde);
    let ratio = rc.and_then(|r| r.ratio);
    let present = [g, p, ratio].iter().all(|v| v.is_some_and(f64::is_finite));
    let show = |v: Option<f64>| v.map_or("missing".to_string(), |v| format!("{v:.4}"));
    Outcome::new(
        present,
        format!(
            "report only: rate(G~) {}, rate(P~) {}, ratio {}",
            show(g),
            show(p),
            show(ratio)
        ),
    )
}

fn c10() -> Result<Outcome, String> {
    let report = check_suite(1000, SEED).map_err(err)?;
    let violations: usize = report.inequalities.iter().map(|r| r.violations).sum();
    let worst_eig = report
        .eigenmode_ratios
        .iter()
        .map(|(_, r)| (r - 1.0).abs())
        .fold(0.0, f64::max);
    let f1_ok = report.f1.iter().all(|f| {
        f.monotone && (f.at_zero - 1.0).abs() < 1e-12 && (f.at_one - f.gamma).abs() < 1e-12
    });
    let eq_ok = report
        .equivalence
        .iter()
        .all(|e| e.holds() && e.c_gamma > 0.0 && e.c_upper.is_finite());
    Ok(Outcome::new(
        report.passed() && violations == 0 && worst_eig <= 1e-8 && f1_ok && eq_ok,
        format!(
            "1000 pairs: {violations} violations, eigenmode |ratio-1| {worst_eig:.1e} (<= 1e-8), F1 {}, energy equivalence {} over {} lattices",
            if f1_ok { "ok" } else { "FAILED" },
            if eq_ok { "ok" } else { "FAILED" },
            report.equivalence.len()
        ),
    ))
}

fn sampled(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> Result<TimeSeries, String> {
    TimeSeries::from_samples(
        "y",
        (0..=n).map(|i| {
            let t = t_end * i as f64 / n as f64;
            (t, f(t))
        }),
    )
    .map_err(err)
}

fn c11(sweep: &SweepReport) -> Result<Outcome, String> {
    let constant =
        weighted_norm_accumulator(&sampled(|_| 1.0, 3.0, 300)?, 0.0, 0.0, Reduction::Integral)
            .map_err(err)?;
    let decay = sampled(|t| (-2.0 * t).exp(), 40.0, 40_000)?;
    let integral = weighted_norm_accumulator(&decay, 1.0, 0.0, Reduction::Integral).map_err(err)?;
    let sup = weighted_norm_accumulator(&decay, 1.0, 1.0, Reduction::Sup).map_err(err)?;
    let analytic_ok = (constant - 3.0).abs() <= 1e-3
        && (integral - 1.0).abs() <= 1e-3
        && (sup - (-1.0f64).exp()).abs() <= 1e-3;
    let entries: usize = sweep.manifests.iter().map(|m| m.weighted.len()).sum();
    let finite = entries > 0
        && sweep
            .manifests
            .iter()
            .all(|m| m.weighted.values().all(|w| w.is_finite()));
    Ok(Outcome::new(
        analytic_ok && finite,
        format!(
            "constant {constant:.6} (3), e^-t integral {integral:.6} (1), sup t e^-t {sup:.6} (1/e), {entries} weighted entries on sweep runs {}",
            if finite { "finite" } else { "NOT finite" }
        ),
    ))
}

fn main() -> ExitCode {
    let mut sweep_report: Option<SweepReport> = None;
    let mut two_level: Option<RunManifest> = None;
    let mut failures = 0;

    let mut report = |name: &str, budget: Duration, f: Criterion| {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{name} {} {detail} [{:.1}s of {}s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };

    report("C1", Duration::from_secs(5), Box::new(c1));
    report("C2", Duration::from_secs(1), Box::new(c2));
    report("C3", Duration::from_secs(30), Box::new(c3));
    report("C4", Duration::from_secs(300), Box::new(c4));
    report("C5", Duration::from_secs(300), Box::new(c5));
    report("C6", Duration::from_secs(300), Box::new(c6));
    report(
        "C7",
        Duration::from_secs(1200),
        Box::new(|| {
            let r = sweep(
                &preset("acoustic-mode").unwrap(),
                &[10.0, 20.0, 40.0, 80.0],
                None,
            )
            .map_err(err)?;
            let o = c7(&r);
            sweep_report = Some(r);
            Ok(o)
        }),
    );
    report(
        "C8",
        Duration::from_secs(600),
        Box::new(|| {
            let (o, m) = c8()?;
            two_level = Some(m);
            Ok(o)
        }),
    );
    report(
        "C9",
        Duration::from_secs(1),
        Box::new(|| {
            two_level
                .as_ref()
                .map(c9)
                .ok_or_else(|| "the nu=80 run did not complete".to_string())
        }),
    );
    report("C10", Duration::from_secs(10), Box::new(c10));
    report(
        "C11",
        Duration::from_secs(60),
        Box::new(|| c11(sweep_report.as_ref().ok_or("the sweep did not complete")?)),
    );

    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
