//! Rayon drivers over independent work items. Results are collected in input
//! order before any reduction, so output does not depend on scheduling.

use std::env;

use caseflux_core::density::{line_fourier, point_fourier, DensityProfile, DensitySolver, Method};
use caseflux_core::greens::GreensEvaluator;
use caseflux_core::medium::OpticalMedium;
use caseflux_core::montecarlo::{run_batch, McConfig, McResult, Tally};
use caseflux_core::rotation::Direction;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const THREADS_VAR: &str = "CASEFLUX_THREADS";

/// Cap the global pool at `CASEFLUX_THREADS` if set. Call once, before any
/// parallel work.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Threads(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Threads(e.to_string()))
}

fn profile(zs: &[f64], method: Method, f: impl Fn(f64) -> caseflux_core::Result<(f64, f64)> + Sync) -> Result<DensityProfile> {
    let pairs = zs.par_iter().map(|&z| f(z)).collect::<caseflux_core::Result<Vec<_>>>()?;
    let (values, errors) = pairs.into_iter().unzip();
    Ok(DensityProfile {
        z: zs.to_vec(),
        values,
        errors,
        method,
    })
}

pub fn density_point(zs: &[f64], solver: &DensitySolver) -> Result<DensityProfile> {
    profile(zs, Method::Case, |z| solver.point(z))
}

pub fn density_line(zs: &[f64], solver: &DensitySolver, ell: f64) -> Result<DensityProfile> {
    profile(zs, Method::Case, |z| solver.line(z, ell))
}

pub fn density_point_fourier(zs: &[f64], med: &OpticalMedium) -> Result<DensityProfile> {
    let c = isotropic_albedo(med)?;
    profile(zs, Method::Fourier, |z| point_fourier(z, c))
}

pub fn density_line_fourier(zs: &[f64], med: &OpticalMedium, ell: f64) -> Result<DensityProfile> {
    let c = isotropic_albedo(med)?;
    profile(zs, Method::Fourier, |z| line_fourier(z, c, ell))
}

fn isotropic_albedo(med: &OpticalMedium) -> Result<f64> {
    if med.is_isotropic() {
        Ok(med.albedo())
    } else {
        Err(caseflux_core::Error::NotIsotropic(med.coeff(1)).into())
    }
}

/// `green_3d` with the transverse nodes evaluated in parallel and summed in
/// node order.
pub fn green_3d(eval: &GreensEvaluator, rho: [f64; 2], z: f64, s: &Direction, z0: f64, s0: &Direction) -> Result<f64> {
    let nodes = eval.q_nodes(rho, z - z0, s0.phi)?;
    let terms = nodes
        .par_iter()
        .map(|n| eval.transverse_kernel(n.q, z, s, z0, s0).map(|k| k * n.weight))
        .collect::<caseflux_core::Result<Vec<_>>>()?;
    Ok(terms.into_iter().fold(Complex64::new(0.0, 0.0), |a, t| a + t).re)
}

/// Monte Carlo over batches in parallel. Batch `b` always draws from stream
/// `b` of the seed, and tallies merge in batch order, so the result is
/// bitwise identical to the serial run for any thread count.
pub fn simulate_point(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let tallies: Vec<Tally> = (0..cfg.batches()).into_par_iter().map(|b| run_batch(cfg, b)).collect();
    let mut total = Tally::new(cfg.bins);
    for t in &tallies {
        total.merge(t);
    }
    Ok(McResult::from_tally(cfg, total))
}
