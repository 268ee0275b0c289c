use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::cns::{generate_initial_data, CnsParams, CnsState, InitialDataKind, InitialDataSpec};
use crate::spectral::{make_grid, ScalarField, TorusGrid, VectorField};

fn grid(n: usize) -> Arc<TorusGrid> {
    make_grid([2.0 * PI, 2.0 * PI], [n, n]).unwrap()
}

fn state(
    g: &Arc<TorusGrid>,
    rho: impl Fn(f64, f64) -> f64,
    u: impl Fn(f64, f64) -> [f64; 2],
    p: CnsParams,
) -> CnsState {
    CnsState::from_velocity(
        ScalarField::from_fn(g, rho),
        VectorField::from_fn(g, u),
        p,
        0.0,
    )
    .unwrap()
}

#[test]
fn energy_examples() {
    let g = grid(32);
    let p1 = CnsParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
    let rest = CnsState::rest(&g, 1.3, p1).unwrap();
    assert_eq!(energy_total(&rest), 0.0);
    assert_eq!(d_functional(&rest, 5.0), 0.0);

    let s = state(&g, |_, _| 1.0, |x, _| [x.sin(), 0.0], p1);
    assert!((energy_total(&s) - 0.25).abs() < 1e-14);
    for nu in [1.0, 10.0, 100.0] {
        assert!((d_functional(&s, nu) - 0.25).abs() < 1e-14);
    }

    let p2 = CnsParams::new(1.0, 0.0, 1.0, 2.0).unwrap();
    let s = state(&g, |x, _| 1.0 + 0.1 * x.cos(), |_, _| [0.0, 0.0], p2);
    assert!((energy_total(&s) - 0.005).abs() < 1e-14);
    assert!((d_functional(&s, 10.0) - 0.0005).abs() < 1e-15);
}

#[test]
fn dissipation_of_a_shear() {
    let g = grid(32);
    let p = CnsParams::new(0.7, 1.0, 1.0, 1.4).unwrap();
    let s = state(&g, |_, _| 1.0, |_, y| [y.sin(), 0.0], p);
    assert!((dissipation(&s) - 0.35).abs() < 1e-14);
    let s = state(&g, |_, _| 1.0, |x, _| [x.sin(), 0.0], p);
    assert!((dissipation(&s) - 0.5 * p.nu()).abs() < 1e-13);
}

#[test]
fn tilde_field_examples() {
    let g = grid(32);
    let p = CnsParams::new(1.0, 0.5, 2.0, 1.4).unwrap();
    let rest = CnsState::rest(&g, 1.5, p).unwrap();
    let t = tilde_fields(&rest);
    let pbar = p.pressure_at(1.5);
    assert!(t.p_tilde.lp_norm(f64::INFINITY) < 1e-14);
    assert!((t.p_bar - pbar).abs() < 1e-14);
    assert!((t.g_bar + pbar).abs() < 1e-14);

    // ν = λ + 2μ = 2 and P ≡ 1.
    let p = CnsParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
    let s = state(&g, |_, _| 1.0, |x, _| [x.sin(), 0.0], p);
    let t = tilde_fields(&s);
    let expect = ScalarField::from_fn(&g, |x, _| 2.0 * x.cos());
    assert!((&t.g_tilde - &expect).lp_norm(f64::INFINITY) < 1e-13);
    assert!((t.g_bar + 1.0).abs() < 1e-14);

    for seed in 0..5 {
        let mut spec = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
        spec.amplitude = 0.3;
        spec.seed = seed;
        let s = generate_initial_data(&spec, &g, &p).unwrap();
        let t = tilde_fields(&s);
        assert!((t.p_bar + t.g_bar).abs() < 1e-13);
    }
}

#[test]
fn identity_branches() {
    let g = grid(32);
    let p = CnsParams::new(1.0, 3.0, 1.0, 1.4).unwrap();
    // Pure gradient: ℙu = 0 apart from the mean.
    let s = state(
        &g,
        |x, y| 1.0 + 0.2 * (x - y).sin(),
        |x, y| [x.cos() * y.sin(), x.sin() * y.cos()],
        p,
    );
    let r = identity_residuals(&s, None);
    assert!(
        r.elliptic_pythagoras < 1e-12
            && r.helmholtz_reconstruction < 1e-12
            && r.flux_identity < 1e-13,
        "{r:?}"
    );
    // Solenoidal with constant pressure: ∇G = 0.
    let s = state(
        &g,
        |_, _| 1.0,
        |x, y| [-(x).cos() * y.sin(), x.sin() * y.cos()],
        p,
    );
    let r = identity_residuals(&s, None);
    assert!(
        r.elliptic_pythagoras < 1e-12
            && r.helmholtz_reconstruction < 1e-12
            && r.flux_identity < 1e-13,
        "{r:?}"
    );
}

#[test]
fn identities_on_random_states() {
    let g = grid(32);
    let p = CnsParams::new(1.0, 8.0, 1.0, 1.4).unwrap();
    for seed in 0..10 {
        let mut spec = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
        spec.amplitude = 0.4;
        spec.seed = seed;
        spec.max_mode = 6;
        let s = generate_initial_data(&spec, &g, &p).unwrap();
        let r = identity_residuals(&s, Some(&s.velocity));
        assert!(r.flux_identity < 1e-10, "{r:?}");
        assert!(r.elliptic_pythagoras < 1e-10, "{r:?}");
        assert!(r.helmholtz_reconstruction < 1e-10, "{r:?}");
        assert!(r.momentum_consistency.unwrap().is_finite());
    }
}

#[test]
fn energy_balance_examples() {
    let frozen: Vec<_> = (0..10)
        .map(|i| EnergySample {
            t: i as f64,
            energy: 0.0,
            dissipation: 0.0,
        })
        .collect();
    assert!(energy_balance_residual(&frozen)
        .unwrap()
        .values()
        .all(|v| v == 0.0));
    let conservative: Vec<_> = (0..10)
        .map(|i| EnergySample {
            t: 0.1 * i as f64,
            energy: 2.5,
            dissipation: 0.0,
        })
        .collect();
    assert!(energy_balance_residual(&conservative)
        .unwrap()
        .values()
        .all(|v| v == 0.0));
    assert!(energy_balance_residual(&frozen[..2]).is_err());

    // E = e^{−2t}/4 with dissipation −dE/dt.
    let series = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let s: Vec<_> = (0..=n)
            .map(|i| {
                let t = i as f64 * dt;
                EnergySample {
                    t,
                    energy: 0.25 * (-2.0 * t).exp(),
                    dissipation: 0.5 * (-2.0 * t).exp(),
                }
            })
            .collect();
        energy_balance_residual(&s)
            .unwrap()
            .values()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let r1 = series(1e-3);
    let r2 = series(5e-4);
    assert!(r1 < 1e-6);
    assert!(r1 / r2 >= 3.5, "{}", r1 / r2);
}

#[test]
fn density_bound_examples() {
    let g = grid(16);
    let one = ScalarField::constant(&g, 1.0);
    assert_eq!(density_bounds([&one, &one]).unwrap(), (1.0, 1.0));
    let two = ScalarField::from_fn(&g, |x, _| if x < PI { 0.5 } else { 2.0 });
    assert_eq!(density_bounds([&two, &two, &two]).unwrap(), (0.5, 2.0));
    assert!(density_bounds(std::iter::empty()).is_err());
}

#[test]
fn diagnostic_row_serializes_spec_columns() {
    let g = grid(16);
    let p = CnsParams::new(1.0, 0.0, 1.0, 1.4).unwrap();
    let row = DiagnosticRow::cns(&CnsState::rest(&g, 1.0, p).unwrap());
    let v = serde_json::to_value(row).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    for c in CSV_COLUMNS {
        assert!(keys.contains(&c), "{c}");
        assert!(row.column(c).is_some());
    }
    assert_eq!(keys.len(), CSV_COLUMNS.len());
}
