//! Two-community lower-bound machinery: exact Poisson coupling overlaps and
//! tails, the capped increment sampler used by the lower-bound adversary, the
//! adversary itself on Poisson multigraphs, and a Monte Carlo distinguishing
//! game for the Poisson-pair test.

mod adversary;
mod game;
mod poisson;

use serde::Serialize;

pub use adversary::{
    lb_adversary, lb_adversary_with_report, suggest_rho, LbAdversaryConfig, LbAdversaryReport,
    SideCounts,
};
pub use game::{distinguishing_game, GameReport};
pub use poisson::{
    capped_pmf, coupling_constant_witness, coupling_exponent, coupling_overlap, kappa_cap,
    log_pmf, median_fact_holds, overlap, pmf_table, sample_coupled, sample_kappa_hat,
    shifted_pmf, tail_constant_witness, truncation_for, upper_tail, upper_tail_real,
    CoupledDraw, PoissonPair, TAIL_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::sbm::SbmParams;

/// Right-hand sides of the two impossibility conditions at constant `c`:
/// `c sqrt((a + b) ln(1/delta))` without outliers and `c eps (a + b) / delta`
/// with them. Recovery to error `delta` is ruled out when `a - b` falls below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LbBoundReport {
    pub constant: f64,
    pub gap: f64,
    pub pure_rhs: f64,
    pub outlier_rhs: f64,
    pub pure_ruled_out: bool,
    pub outlier_ruled_out: bool,
}

pub fn lb_bound_values(params: &SbmParams, epsilon: f64, delta: f64) -> Result<LbBoundReport> {
    lb_bound_values_with(params, epsilon, delta, 1.0)
}

pub fn lb_bound_values_with(
    params: &SbmParams,
    epsilon: f64,
    delta: f64,
    constant: f64,
) -> Result<LbBoundReport> {
    params.validate()?;
    if params.k != 2 {
        return Err(Error::Precondition("the lower bounds cover k = 2 only".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need delta in (0, 1] and eps >= 0, got delta = {delta}, eps = {epsilon}"
        )));
    }
    let sum = params.a + params.b;
    let gap = params.a - params.b;
    let pure_rhs = constant * (sum * (1.0 / delta).ln()).sqrt();
    let outlier_rhs = constant * epsilon * sum / delta;
    Ok(LbBoundReport {
        constant,
        gap,
        pure_rhs,
        outlier_rhs,
        pure_ruled_out: gap < pure_rhs,
        outlier_ruled_out: gap < outlier_rhs,
    })
}
