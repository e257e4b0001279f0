//! Disorder-ensemble transport experiments on lattices.
//!
//! For each lattice size the runner solves `R` independent mass-disorder
//! realizations, extracts the two-terminal conductance per contact site,
//! and fits `J ~ N^slope` across sizes. Realizations are independent and
//! run in parallel; each one seeds its own RNG stream from
//! `(master seed, realization index)`, so results are identical regardless
//! of thread count or execution order.

use rayon::prelude::*;

use crate::covariance::Statistics;
use crate::error::{Error, Result};
use crate::heat::{heat_currents, two_terminal_estimate};
use crate::lattice::{build_lattice, contacts_for_lattice, Boundary, LatticeSpec};
use crate::modes::{solve_modes, SolverOptions};
use crate::network::{Cutoff, ReservoirSet};
use crate::pencil::{assemble_cubic, assemble_quadratic};

/// One scaling experiment: a sweep over lattice sizes at fixed coupling.
#[derive(Debug, Clone)]
pub struct ScalingPlan {
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub k0: f64,
    pub mass_mean: f64,
    pub mass_spread: f64,
    pub boundary: Boundary,
    pub gamma0: f64,
    pub t_hot: f64,
    pub t_cold: f64,
    pub cutoff: Cutoff,
    pub statistics: Statistics,
    pub realizations: u64,
    pub seed: u64,
}

impl Default for ScalingPlan {
    fn default() -> Self {
        Self {
            dim: 1,
            sizes: vec![4, 8, 16],
            k0: 10.0,
            mass_mean: 1.0,
            mass_spread: 0.2,
            boundary: Boundary::Fixed,
            gamma0: 0.5,
            // linear-response bias around T = 1
            t_hot: 1.05,
            t_cold: 0.95,
            cutoff: Cutoff::Infinite,
            statistics: Statistics::Classical,
            realizations: 10,
            seed: 0,
        }
    }
}

/// One solved realization.
#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub n: usize,
    pub realization: u64,
    /// `J / dT`: current per contact site per unit temperature bias.
    pub conductance_per_site: f64,
}

#[derive(Debug, Clone)]
pub struct SizeSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub gamma0: f64,
    pub points: Vec<ScalingPoint>,
    pub per_size: Vec<SizeSummary>,
    /// Signed slope of `log J` vs `log N` from the per-size means.
    pub slope: f64,
    pub slope_std_error: f64,
    /// `J ~ N^(-mu)`: the conventional transport exponent, `-slope`.
    pub mu_fit: f64,
}

/// Unweighted least squares on `(log N, log J)`.
///
/// Returns `(slope, intercept, slope standard error)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(
            "power-law fit needs at least three sizes".into(),
        ));
    }
    let mut distinct = points.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidInput(
            "power-law fit needs at least three distinct sizes".into(),
        ));
    }
    for &(n, j) in points {
        if n <= 0.0 || j <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "power-law fit needs positive data, got ({n}, {j})"
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let dof = (xs.len().max(3) - 2) as f64;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let std_error = (ss_res / dof / sxx).sqrt();
    Ok((slope, intercept, std_error))
}

fn solve_one(plan: &ScalingPlan, n: usize, realization: u64) -> Result<ScalingPoint> {
    let spec = LatticeSpec {
        dim: plan.dim,
        n,
        k0: plan.k0,
        mass_mean: plan.mass_mean,
        mass_spread: plan.mass_spread,
        seed: plan.seed,
        boundary: plan.boundary,
    };
    let (network, _) = build_lattice(&spec, realization)?;
    let reservoirs = ReservoirSet::new(
        contacts_for_lattice(&spec),
        vec![plan.t_hot, plan.t_cold],
        plan.gamma0,
        plan.cutoff,
    )?;
    let pencil = match plan.cutoff {
        Cutoff::Finite(_) => assemble_cubic(&network, &reservoirs)?,
        Cutoff::Infinite => assemble_quadratic(&network, &reservoirs)?,
    };
    let modes = solve_modes(&pencil, &SolverOptions::default())?;
    let currents = heat_currents(&modes, &reservoirs, plan.statistics)?;
    let est = two_terminal_estimate(&currents, &reservoirs)?;
    Ok(ScalingPoint {
        n,
        realization,
        conductance_per_site: est.conductance_per_site,
    })
}

/// Runs the full ensemble. Realizations that fail to solve are dropped and
/// counted; more than 20% failures for any size aborts the sweep.
pub fn run_scaling(plan: &ScalingPlan) -> Result<ScalingResult> {
    if plan.sizes.len() < 3 {
        return Err(Error::InvalidInput(
            "scaling sweep needs at least three sizes".into(),
        ));
    }
    if plan.realizations == 0 {
        return Err(Error::InvalidInput("zero realizations requested".into()));
    }

    let cells: Vec<(usize, u64)> = plan
        .sizes
        .iter()
        .flat_map(|&n| (0..plan.realizations).map(move |r| (n, r)))
        .collect();
    let solved: Vec<(usize, u64, Result<ScalingPoint>)> = cells
        .par_iter()
        .map(|&(n, r)| (n, r, solve_one(plan, n, r)))
        .collect();

    let mut points = Vec::new();
    let mut per_size = Vec::new();
    for &n in &plan.sizes {
        let mut vals = Vec::new();
        let mut failures = 0usize;
        for (pn, _, res) in &solved {
            if *pn != n {
                continue;
            }
            match res {
                Ok(p) => {
                    vals.push(p.conductance_per_site);
                    points.push(p.clone());
                }
                Err(_) => failures += 1,
            }
        }
        if failures * 5 > (vals.len() + failures) {
            return Err(Error::InvalidInput(format!(
                "{failures} of {} realizations failed at N = {n}",
                vals.len() + failures
            )));
        }
        let count = vals.len();
        let mean = vals.iter().sum::<f64>() / count as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count.max(2) - 1) as f64;
        per_size.push(SizeSummary {
            n,
            mean,
            std_dev: var.sqrt(),
            count,
            failures,
        });
    }

    let fit_points: Vec<(f64, f64)> = per_size.iter().map(|s| (s.n as f64, s.mean)).collect();
    let (slope, _, std_error) = fit_power_law(&fit_points)?;
    Ok(ScalingResult {
        gamma0: plan.gamma0,
        points,
        per_size,
        slope,
        slope_std_error: std_error,
        mu_fit: -slope,
    })
}
