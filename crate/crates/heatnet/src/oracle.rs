//! Brute-force cross-check of the closed-form results.
//!
//! Every stationary moment is also an integral over real frequencies of a
//! matrix-valued spectral density built from nothing but the resolvent of
//! the damped network, inverted numerically at each node. This module
//! evaluates those integrals with adaptive Gauss-Kronrod quadrature and no
//! shared code with the mode-sum machinery (no pencils, no eigenvectors),
//! so agreement between the two routes is meaningful.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::covariance::Statistics;
use crate::error::{Error, Result};
use crate::modes::closed_modes;
use crate::network::{Cutoff, HarmonicNetwork, ReservoirSet};
use crate::special::{coth_half, coth_half_excess};

/// 15-point Kronrod nodes on `[0, 1]` side (symmetric), embedding the
/// 7-point Gauss rule; the classic QUADPACK constants.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Relative tolerance on every component of the result.
    pub rel_tol: f64,
    /// Cap on adaptive subdivisions per panel.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 20_000,
        }
    }
}

/// Componentwise adaptive GK15 over `[a, b]`, bisecting the interval with
/// the worst embedded-rule error until every component converges.
fn adaptive_gk<F>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    struct Panel {
        a: f64,
        b: f64,
        value: Vec<f64>,
        error: f64,
    }

    let eval_panel = |a: f64, b: f64| -> Result<Panel> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron: Option<Vec<f64>> = None;
        let mut gauss: Option<Vec<f64>> = None;
        for (j, &x) in XGK.iter().enumerate() {
            let pts: &[f64] = if j == 7 {
                &[c]
            } else {
                &[c - h * x, c + h * x]
            };
            for &p in pts {
                let v = f(p)?;
                let kron = kron.get_or_insert_with(|| vec![0.0; v.len()]);
                for (acc, vi) in kron.iter_mut().zip(&v) {
                    *acc += WGK[j] * vi;
                }
                if j % 2 == 1 || j == 7 {
                    // odd Kronrod indices are the embedded Gauss nodes
                    let gauss = gauss.get_or_insert_with(|| vec![0.0; v.len()]);
                    let wg = WG[if j == 7 { 3 } else { j / 2 }];
                    for (acc, vi) in gauss.iter_mut().zip(&v) {
                        *acc += wg * vi;
                    }
                }
            }
        }
        let kron: Vec<f64> = kron.unwrap().into_iter().map(|v| v * h).collect();
        let gauss: Vec<f64> = gauss.unwrap().into_iter().map(|v| v * h).collect();
        let error = kron
            .iter()
            .zip(&gauss)
            .map(|(k, g)| (k - g).abs())
            .fold(0.0, f64::max);
        Ok(Panel {
            a,
            b,
            value: kron,
            error,
        })
    };

    let mut panels = vec![eval_panel(a, b)?];
    for _ in 0..cfg.max_subdivisions {
        let dim = panels[0].value.len();
        let mut out = vec![0.0; dim];
        for p in &panels {
            for (o, v) in out.iter_mut().zip(&p.value) {
                *o += v;
            }
        }
        let total_scale: f64 = out.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let err_total: f64 = panels.iter().map(|p| p.error).sum();
        if err_total <= cfg.rel_tol * total_scale {
            return Ok(out);
        }

        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::QuadratureFailure(format!(
                "interval [{}, {}] cannot be split further",
                p.a, p.b
            )));
        }
        panels.push(eval_panel(p.a, mid)?);
        panels.push(eval_panel(mid, p.b)?);
    }
    Err(Error::QuadratureFailure(format!(
        "no convergence after {} subdivisions",
        cfg.max_subdivisions
    )))
}

/// Stationary moments obtained purely by numerical integration.
#[derive(Debug, Clone)]
pub struct QuadratureMoments {
    pub xx: Mat<f64>,
    pub xv: Mat<f64>,
    /// Absent in the strict Ohmic limit with quantum statistics, where the
    /// velocity variance integral diverges logarithmically at high
    /// frequency.
    pub vv: Option<Mat<f64>>,
}

fn resolvent_columns(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    omega: f64,
) -> Mat<Complex64> {
    let k = network.size();
    let s = Complex64::new(0.0, omega);
    let gamma0 = reservoirs.gamma0();
    let pt = reservoirs.total_projector_diag(k);
    let mut poly = Mat::<Complex64>::zeros(k, k);
    match reservoirs.cutoff() {
        Cutoff::Finite(lambda) => {
            // s^3 M + s^2 Lambda M + s (V + 2 gamma0 Lambda P) + Lambda V
            let s2 = s * s;
            let s3 = s2 * s;
            for j in 0..k {
                for i in 0..k {
                    let m = network.mass()[(i, j)];
                    let v = network.potential()[(i, j)];
                    poly[(i, j)] = s3 * m + s2 * lambda * m + s * v + lambda * v;
                }
                poly[(j, j)] += s * 2.0 * gamma0 * lambda * pt[j];
            }
        }
        Cutoff::Infinite => {
            // s^2 M + V + 2 s gamma0 P
            let s2 = s * s;
            for j in 0..k {
                for i in 0..k {
                    poly[(i, j)] = s2 * network.mass()[(i, j)] + network.potential()[(i, j)];
                }
                poly[(j, j)] += s * 2.0 * gamma0 * pt[j];
            }
        }
    }
    poly.partial_piv_lu()
        .solve(Mat::<Complex64>::identity(k, k))
}

/// Upper integration limits: a core region resolved adaptively, then
/// geometrically growing tail panels until they stop contributing.
///
/// At weak coupling the spectral densities are near-Lorentzian spikes of
/// width `~gamma0 q^T P q` around the closed-mode frequencies; panel edges
/// at a few multiples of that width let the adaptive rule zoom in without
/// burning its subdivision budget on bisection.
fn core_breakpoints(network: &HarmonicNetwork, reservoirs: &ReservoirSet) -> Result<Vec<f64>> {
    let k = network.size();
    let cm = closed_modes(network)?;
    let pt = reservoirs.total_projector_diag(k);
    let mut pts: Vec<f64> = Vec::new();
    for (alpha, &freq) in cm.frequencies.iter().enumerate() {
        pts.push(freq);
        let weight: f64 = (0..k)
            .map(|i| pt[i] * cm.vectors[(i, alpha)] * cm.vectors[(i, alpha)])
            .sum();
        let width = (reservoirs.gamma0() * weight).max(1e-9 * freq);
        for c in [2.0, 16.0, 128.0] {
            if c * width < 0.5 * freq {
                pts.push(freq - c * width);
                pts.push(freq + c * width);
            }
        }
    }
    if let Cutoff::Finite(lambda) = reservoirs.cutoff() {
        pts.push(lambda);
    }
    pts.retain(|&p| p > 0.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs());
    Ok(pts)
}

/// All second moments by quadrature of the spectral density
/// `(2/pi) gamma0 [Lambda^2] omega sum_l coth(omega/2T_l) X P_l X^H` with
/// `X` the inverse of the cubic/quadratic frequency polynomial.
pub fn quadrature_moments(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    stats: Statistics,
    cfg: &QuadratureConfig,
) -> Result<QuadratureMoments> {
    let k = network.size();
    reservoirs.check_sites(k)?;
    let gamma0 = reservoirs.gamma0();
    let strength = match reservoirs.cutoff() {
        Cutoff::Finite(lambda) => gamma0 * lambda * lambda,
        Cutoff::Infinite => gamma0,
    };
    let want_vv = !(reservoirs.cutoff() == Cutoff::Infinite && stats == Statistics::Quantum);
    let temps = reservoirs.temperatures();

    // flattened integrand: [Re B | omega Im B | omega^2 Re B]
    let blocks = if want_vv { 3 } else { 2 };
    let integrand = |omega: f64| -> Result<Vec<f64>> {
        let x = resolvent_columns(network, reservoirs, omega);
        let mut b = Mat::<Complex64>::zeros(k, k);
        for (l, sites) in reservoirs.contacts().iter().enumerate() {
            let occ = match stats {
                Statistics::Quantum => coth_half(omega, temps[l]),
                Statistics::Classical => 2.0 * temps[l] / omega,
            };
            let w = (2.0 / std::f64::consts::PI) * strength * omega * occ;
            for &i in sites {
                for q in 0..k {
                    let xq = x[(q, i)].conj() * w;
                    for p in 0..k {
                        b[(p, q)] += x[(p, i)] * xq;
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(blocks * k * k);
        for j in 0..k {
            for i in 0..k {
                out.push(b[(i, j)].re);
            }
        }
        for j in 0..k {
            for i in 0..k {
                out.push(omega * b[(i, j)].im);
            }
        }
        if want_vv {
            for j in 0..k {
                for i in 0..k {
                    out.push(omega * omega * b[(i, j)].re);
                }
            }
        }
        Ok(out)
    };

    let breaks = core_breakpoints(network, reservoirs)?;
    let w_core = breaks.iter().cloned().fold(1.0_f64, f64::max) * 8.0;
    let mut total = vec![0.0; blocks * k * k];
    let mut lo = 0.0;
    for &b in breaks.iter().chain(std::iter::once(&w_core)) {
        if b <= lo {
            continue;
        }
        for (t, v) in total.iter_mut().zip(adaptive_gk(&integrand, lo, b, cfg)?) {
            *t += v;
        }
        lo = b;
    }
    // geometric tail: stop once a doubling contributes below tolerance
    let mut hi = lo;
    for _ in 0..64 {
        let next = 2.0 * hi;
        let piece = adaptive_gk(&integrand, hi, next, cfg)?;
        let scale = total
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let piece_max = piece.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (t, v) in total.iter_mut().zip(&piece) {
            *t += v;
        }
        hi = next;
        if piece_max < 0.1 * cfg.rel_tol * scale {
            let at = |blk: usize, i: usize, j: usize| total[blk * k * k + j * k + i];
            let xx = Mat::from_fn(k, k, |i, j| at(0, i, j));
            let xv = Mat::from_fn(k, k, |i, j| at(1, i, j));
            let vv = want_vv.then(|| Mat::from_fn(k, k, |i, j| at(2, i, j)));
            return Ok(QuadratureMoments { xx, xv, vv });
        }
    }
    Err(Error::QuadratureFailure(
        "high-frequency tail did not decay".into(),
    ))
}

/// Pointwise spectral density of the current between two reservoirs:
/// `pi * omega * [coth_l - coth_lp] * Tr[I_l G I_lp G^H]` with the
/// cutoff-dependent injection strength `I_l`. Nonnegative whenever
/// `T_l >= T_lp`.
pub fn heat_spectral_density(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    l: usize,
    lp: usize,
    omega: f64,
) -> Result<f64> {
    let temps = reservoirs.temperatures();
    let x = resolvent_columns(network, reservoirs, omega);
    let gamma0 = reservoirs.gamma0();
    // kappa = injection strength, u = |i omega + Lambda|^2 restores the
    // resolvent normalization G = (i omega + Lambda) X in the finite case
    let (kappa, u) = match reservoirs.cutoff() {
        Cutoff::Finite(lambda) => (
            (2.0 / std::f64::consts::PI) * gamma0 * omega * lambda * lambda
                / (omega * omega + lambda * lambda),
            omega * omega + lambda * lambda,
        ),
        Cutoff::Infinite => ((2.0 / std::f64::consts::PI) * gamma0 * omega, 1.0),
    };
    let mut tr = 0.0;
    for &i in &reservoirs.contacts()[l] {
        for &j in &reservoirs.contacts()[lp] {
            tr += x[(i, j)].norm_sqr();
        }
    }
    let dcoth = coth_half_excess(omega, temps[l]) - coth_half_excess(omega, temps[lp]);
    Ok(std::f64::consts::PI * omega * dcoth * kappa * kappa * u * tr)
}

/// Pairwise currents by quadrature of [`heat_spectral_density`]; fully
/// independent of the mode-sum route.
pub fn quadrature_heat(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    cfg: &QuadratureConfig,
) -> Result<Mat<f64>> {
    let nr = reservoirs.len();
    reservoirs.check_sites(network.size())?;
    let pairs: Vec<(usize, usize)> = (0..nr)
        .flat_map(|l| (0..l).map(move |lp| (l, lp)))
        .collect();
    if pairs.is_empty() {
        return Ok(Mat::zeros(nr, nr));
    }
    let integrand = |omega: f64| -> Result<Vec<f64>> {
        pairs
            .iter()
            .map(|&(l, lp)| heat_spectral_density(network, reservoirs, l, lp, omega))
            .collect()
    };
    let breaks = core_breakpoints(network, reservoirs)?;
    let w_core = breaks.iter().cloned().fold(1.0_f64, f64::max) * 8.0;
    let mut total = vec![0.0; pairs.len()];
    let mut lo = 0.0;
    for &b in breaks.iter().chain(std::iter::once(&w_core)) {
        if b <= lo {
            continue;
        }
        for (t, v) in total.iter_mut().zip(adaptive_gk(&integrand, lo, b, cfg)?) {
            *t += v;
        }
        lo = b;
    }
    let mut hi = lo;
    let mut converged = false;
    for _ in 0..64 {
        let next = 2.0 * hi;
        let piece = adaptive_gk(&integrand, hi, next, cfg)?;
        let scale = total
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let piece_max = piece.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (t, v) in total.iter_mut().zip(&piece) {
            *t += v;
        }
        hi = next;
        if piece_max < 0.1 * cfg.rel_tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::QuadratureFailure(
            "heat-current tail did not decay".into(),
        ));
    }
    let mut q = Mat::<f64>::zeros(nr, nr);
    for (&(l, lp), v) in pairs.iter().zip(&total) {
        q[(l, lp)] = *v;
        q[(lp, l)] = -*v;
    }
    Ok(q)
}

/// Net reservoir powers from the quadrature moments via the stationary
/// energy balance `Q_l = sum_{i in l} (V sigma_xv)_ii`.
pub fn quadrature_net_currents(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    stats: Statistics,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let moments = quadrature_moments(network, reservoirs, stats, cfg)?;
    let flux = network.potential() * &moments.xv;
    Ok(reservoirs
        .contacts()
        .iter()
        .map(|sites| sites.iter().map(|&i| flux[(i, i)]).sum())
        .collect())
}

/// Worst relative disagreement between closed forms and quadrature.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub xx_rel: f64,
    pub xv_rel: f64,
    /// `None` when the velocity variance has no convergent integral
    /// (strict Ohmic limit with quantum statistics).
    pub vv_rel: Option<f64>,
    pub current_rel: f64,
}

impl VerificationReport {
    pub fn max_rel(&self) -> f64 {
        self.xx_rel
            .max(self.xv_rel)
            .max(self.vv_rel.unwrap_or(0.0))
            .max(self.current_rel)
    }
}

fn rel_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut scale: f64 = 0.0;
    let mut diff: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            scale = scale.max(a[(i, j)].abs()).max(b[(i, j)].abs());
            diff = diff.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    diff / scale.max(1e-300)
}

/// Runs both routes end to end and reports the largest relative gaps.
pub fn verify(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    stats: Statistics,
    cfg: &QuadratureConfig,
) -> Result<VerificationReport> {
    use crate::covariance::sigma_moment;
    use crate::heat::heat_currents;
    use crate::modes::{solve_modes, SolverOptions};
    use crate::pencil::{assemble_cubic, assemble_quadratic};

    let pencil = match reservoirs.cutoff() {
        Cutoff::Finite(_) => assemble_cubic(network, reservoirs)?,
        Cutoff::Infinite => assemble_quadratic(network, reservoirs)?,
    };
    let modes = solve_modes(&pencil, &SolverOptions::default())?;

    let xx = sigma_moment(&modes, reservoirs, 0, 0, stats)?;
    let xv = sigma_moment(&modes, reservoirs, 0, 1, stats)?;
    let q = quadrature_moments(network, reservoirs, stats, cfg)?;

    let vv_rel = match &q.vv {
        Some(vv_quad) => Some(rel_diff(
            &sigma_moment(&modes, reservoirs, 1, 1, stats)?,
            vv_quad,
        )),
        None => None,
    };

    let closed = heat_currents(&modes, reservoirs, stats)?;
    let mut current_rel: f64 = 0.0;

    // route 1: pairwise Landauer-type quadrature (quantum statistics only;
    // the classical 2T/omega population makes the same integral)
    if stats == Statistics::Quantum {
        let q_pair = quadrature_heat(network, reservoirs, cfg)?;
        current_rel = current_rel.max(rel_diff(&closed.q, &q_pair));
    }

    // route 2: net powers from the stationary energy balance
    let nets = closed.net_currents();
    let flux = network.potential() * &q.xv;
    let scale = nets.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (l, sites) in reservoirs.contacts().iter().enumerate() {
        let quad: f64 = sites.iter().map(|&i| flux[(i, i)]).sum();
        current_rel = current_rel.max((nets[l] - quad).abs() / scale.max(1e-300));
    }

    Ok(VerificationReport {
        xx_rel: rel_diff(&xx, &q.xx),
        xv_rel: rel_diff(&xv, &q.xv),
        vv_rel,
        current_rel,
    })
}
