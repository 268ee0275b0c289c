//! Inequality catalog and identity residuals on random corpora.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use torusflow_core::cns::{generate_initial_data, CnsParams, InitialDataKind, InitialDataSpec};
use torusflow_core::diagnostics::{
    check_energy_equivalence, check_inequality, f1, identity_residuals, random_pair,
    EquivalenceReport, InequalityId, InequalityReport,
};
use torusflow_core::spectral::{make_grid, ScalarField};

use crate::error::Result;
use crate::run::IDENTITY_TOL;

/// Lebesgue exponent used for the `L_p` forms.
pub const CHECK_EXPONENT: f64 = 6.0;
/// Tolerance on the eigenmode sharpness witness.
pub const SHARPNESS_TOL: f64 = 1e-8;
/// Number of random states in the identity corpus (capped by the corpus size).
pub const IDENTITY_STATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Check {
    pub gamma: f64,
    pub at_zero: f64,
    pub at_one: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCorpus {
    pub states: usize,
    pub resolution: usize,
    pub max_flux_identity: f64,
    pub max_elliptic: f64,
    pub max_helmholtz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub corpus_size: usize,
    pub seed: u64,
    pub inequalities: Vec<InequalityReport>,
    /// Poincaré ratios on the first Laplacian eigenmode.
    pub eigenmode_ratios: Vec<(InequalityId, f64)>,
    pub f1: Vec<F1Check>,
    pub equivalence: Vec<EquivalenceReport>,
    pub identities: Option<IdentityCorpus>,
    pub hard_failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.hard_failures.is_empty()
    }
}

/// Run the full catalog on `corpus_size` random `(a, z)` pairs, plus the
/// deterministic witnesses and the identity corpus. A size of zero yields an
/// empty report.
pub fn check_suite(corpus_size: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport {
        corpus_size,
        seed,
        inequalities: Vec::new(),
        eigenmode_ratios: Vec::new(),
        f1: Vec::new(),
        equivalence: Vec::new(),
        identities: None,
        hard_failures: Vec::new(),
    };
    if corpus_size == 0 {
        return Ok(report);
    }
    let grid = make_grid([2.0 * PI, 2.0 * PI], [32, 32])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps: Vec<_> = InequalityId::ALL
        .iter()
        .map(|&id| InequalityReport::empty(id))
        .collect();
    for _ in 0..corpus_size {
        let (a, z) = random_pair(&grid, &mut rng);
        for rep in reps.iter_mut() {
            rep.merge(&check_inequality(rep.id, &a, &z, CHECK_EXPONENT)?);
        }
    }
    for rep in &reps {
        if rep.hard_failure() {
            report
                .hard_failures
                .push(format!("{}: {} violations", rep.id.name(), rep.violations));
        }
    }
    report.inequalities = reps;

    let one = ScalarField::constant(&grid, 1.0);
    let mode = ScalarField::from_fn(&grid, |x, _| x.cos());
    for id in [
        InequalityId::WeightedPoincare,
        InequalityId::WeightedMeanFreePoincare,
    ] {
        let r = check_inequality(id, &one, &mode, CHECK_EXPONENT)?.worst_ratio;
        if (r - 1.0).abs() > SHARPNESS_TOL {
            report
                .hard_failures
                .push(format!("{} eigenmode ratio {r}", id.name()));
        }
        report.eigenmode_ratios.push((id, r));
    }

    for gamma in [1.0, 1.4, 5.0 / 3.0, 2.0, 3.0] {
        let at_zero = f1(0.0, gamma)?;
        let at_one = f1(1.0, gamma)?;
        let mut prev = at_zero;
        let mut monotone = true;
        for i in 1..=1000 {
            let v = f1(10.0 * i as f64 / 1000.0, gamma)?;
            monotone &= v >= prev * (1.0 - 1e-12);
            prev = v;
        }
        if (at_zero - 1.0).abs() > 1e-12 || (at_one - gamma).abs() > 1e-12 || !monotone {
            report
                .hard_failures
                .push(format!("F1 checks fail for gamma = {gamma}"));
        }
        report.f1.push(F1Check {
            gamma,
            at_zero,
            at_one,
            monotone,
        });
    }

    for gamma in [1.0, 1.4, 2.0, 3.0] {
        for rho_star in [1.5, 2.0, 4.0] {
            let lattice: Vec<f64> = (0..=400).map(|i| rho_star * i as f64 / 400.0).collect();
            let eq = check_energy_equivalence(&lattice, 1.0, rho_star, gamma)?;
            if !eq.holds() {
                report.hard_failures.push(format!(
                    "energy equivalence fails for gamma = {gamma}, rho* = {rho_star}"
                ));
            }
            report.equivalence.push(eq);
        }
    }

    report.identities = Some(identity_corpus(corpus_size.min(IDENTITY_STATES), 64, seed)?);
    if let Some(id) = &report.identities {
        if id.max_flux_identity >= IDENTITY_TOL
            || id.max_elliptic >= IDENTITY_TOL
            || id.max_helmholtz >= IDENTITY_TOL
        {
            report
                .hard_failures
                .push(format!("identity residuals exceed {IDENTITY_TOL}: {id:?}"));
        }
    }
    Ok(report)
}

/// Identity residuals on `states` random band-limited compressible states on an `n × n` grid.
pub fn identity_corpus(states: usize, n: usize, seed: u64) -> Result<IdentityCorpus> {
    let grid = make_grid([2.0 * PI, 2.0 * PI], [n, n])?;
    let mut out = IdentityCorpus {
        states,
        resolution: n,
        max_flux_identity: 0.0,
        max_elliptic: 0.0,
        max_helmholtz: 0.0,
    };
    for k in 0..states {
        let s = seed.wrapping_add(k as u64);
        let gamma = [1.0, 1.4, 2.0][k % 3];
        let params = CnsParams::with_nu(1.0, 5.0 + (k % 7) as f64 * 10.0, 1.0, gamma)?;
        let mut spec = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
        spec.amplitude = 0.1 + 0.8 * ((s % 97) as f64 / 97.0);
        spec.max_mode = 2 + (k % 8);
        spec.velocity_amplitude = 1.0;
        spec.k_budget = 10.0;
        spec.seed = s;
        let state = generate_initial_data(&spec, &grid, &params)?;
        let r = identity_residuals(&state, None);
        out.max_flux_identity = out.max_flux_identity.max(r.flux_identity);
        out.max_elliptic = out.max_elliptic.max(r.elliptic_pythagoras);
        out.max_helmholtz = out.max_helmholtz.max(r.helmholtz_reconstruction);
    }
    Ok(out)
}
