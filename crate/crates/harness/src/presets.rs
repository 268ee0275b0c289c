//! Built-in scenarios.

use std::f64::consts::PI;

use torusflow_core::cns::{InitialDataKind, InitialDataSpec};
use torusflow_core::spectral::GridSpec;

use crate::config::{ParamsConfig, RunConfig, System};

pub const PRESET_NAMES: [&str; 7] = [
    "rest",
    "acoustic-mode",
    "smooth-perturbation",
    "vacuum-disk",
    "two-level-density",
    "ins-smooth",
    "ins-vacuum-regularized",
];

fn square(n: usize) -> GridSpec {
    GridSpec {
        lengths: [2.0 * PI, 2.0 * PI],
        resolution: [n, n],
    }
}

fn base(system: System, n: usize, params: ParamsConfig, initial: InitialDataSpec) -> RunConfig {
    RunConfig {
        system,
        t_end: 10.0,
        dt: None,
        cfl: 0.4,
        diagnostic_interval: 0.1,
        seed: 0,
        out: None,
        fit_window: None,
        grid: square(n),
        params,
        initial,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "rest" => {
            let mut c = base(
                System::Cns,
                32,
                ParamsConfig::cns(1.0, 10.0, 1.0, 1.4),
                InitialDataSpec::new(InitialDataKind::SmoothPerturbation),
            );
            c.t_end = 2.0;
            c
        }
        "acoustic-mode" => {
            let mut init = InitialDataSpec::new(InitialDataKind::AcousticMode);
            init.amplitude = 1e-4;
            init.velocity_amplitude = 1e-3;
            let mut c = base(
                System::Cns,
                32,
                ParamsConfig::cns(1.0, 10.0, 1.0, 1.0),
                init,
            );
            c.diagnostic_interval = 0.05;
            c
        }
        "smooth-perturbation" => {
            let mut init = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
            init.amplitude = 0.3;
            let mut c = base(
                System::Cns,
                32,
                ParamsConfig::cns(1.0, 10.0, 1.0, 1.4),
                init,
            );
            c.t_end = 1.0;
            c.dt = Some(0.01);
            c.diagnostic_interval = 0.01;
            c.seed = 3;
            c
        }
        "vacuum-disk" => {
            let mut init = InitialDataSpec::new(InitialDataKind::VacuumPatch);
            init.radius = 1.5;
            init.velocity_amplitude = 0.5;
            base(
                System::Cns,
                128,
                ParamsConfig::cns(1.0, 10.0, 1.0, 1.4),
                init,
            )
        }
        "two-level-density" => {
            let mut init = InitialDataSpec::new(InitialDataKind::DiscontinuousDensity);
            init.radius = 1.5;
            init.levels = [0.5, 2.0];
            init.velocity_amplitude = 0.5;
            base(
                System::Cns,
                64,
                ParamsConfig::cns(1.0, 80.0, 1.0, 1.4),
                init,
            )
        }
        "ins-smooth" => {
            let mut init = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
            init.amplitude = 0.5;
            init.velocity_amplitude = 0.5;
            let mut c = base(System::Ins, 128, ParamsConfig::ins(1.0), init);
            c.t_end = 5.0;
            c.diagnostic_interval = 0.05;
            c.seed = 1;
            c
        }
        "ins-vacuum-regularized" => {
            let mut init = InitialDataSpec::new(InitialDataKind::VacuumPatch);
            init.radius = 1.5;
            init.velocity_amplitude = 0.5;
            let mut c = base(System::Ins, 64, ParamsConfig::ins(1.0), init);
            c.t_end = 2.0;
            c.diagnostic_interval = 0.05;
            c
        }
        _ => return None,
    };
    Some(cfg)
}
