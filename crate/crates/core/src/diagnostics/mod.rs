//! Energies, identity residuals, decay fits and functional-inequality witnesses.

mod functionals;
mod inequalities;
mod series;

pub use functionals::{
    d_functional, density_bounds, dissipation, energy_balance_residual, energy_total,
    identity_residuals, kinetic_energy, potential_energy, tilde_fields, DiagnosticRow,
    EnergySample, IdentityResiduals, TildeFields, CSV_COLUMNS,
};
pub use inequalities::{
    check_energy_equivalence, check_inequality, f1, random_pair, EquivalenceReport, InequalityId,
    InequalityReport, VIOLATION_TOL,
};
pub use series::{
    default_window, fit_decay, fit_decay_or_zero, weighted_norm_accumulator, DecayFit, Reduction,
    TimeSeries, MIN_FIT_POINTS,
};

#[cfg(test)]
mod tests;
