//! Stationary heat currents between reservoirs.
//!
//! `q[(l, lp)]` is the net power flowing from reservoir `l` to reservoir
//! `lp` through the network; `net_currents()[l]` is the total power the
//! network absorbs from reservoir `l` (positive for a hot reservoir). The
//! closed forms are double sums over pencil modes weighted by
//! `Delta(w) = 2i (T_l - T_lp)/w - (2/pi)[psi_l(w) - psi_lp(w)]`, whose
//! high-temperature limit `2i (T_l - T_lp)/w` gives the classical current.

use faer::Mat;
use num_complex::Complex64;

pub use crate::covariance::Statistics;
use crate::covariance::{sigma_moment, Regime};
use crate::error::{Error, Result};
use crate::modes::{closed_modes, ModeSet};
use crate::network::{HarmonicNetwork, ReservoirSet};
use crate::pencil::PencilKind;
use crate::special::{coth_half, psi_thermal};

/// Pairwise stationary heat currents.
#[derive(Debug, Clone)]
pub struct HeatCurrentMatrix {
    /// Antisymmetric; `q[(l, lp)] > 0` means `l` heats `lp`.
    pub q: Mat<f64>,
    pub regime: Regime,
}

impl HeatCurrentMatrix {
    /// Power absorbed by the network from each reservoir.
    pub fn net_currents(&self) -> Vec<f64> {
        let n = self.q.nrows();
        (0..n)
            .map(|l| (0..n).map(|lp| self.q[(l, lp)]).sum())
            .collect()
    }

    /// Largest violation of `sum_l Q_l = 0`, relative to the current scale.
    pub fn conservation_residual(&self) -> f64 {
        let total: f64 = self.net_currents().iter().sum();
        let scale = self
            .net_currents()
            .iter()
            .map(|q| q.abs())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            total.abs()
        } else {
            total.abs() / scale
        }
    }
}

fn delta_pair(omega: Complex64, t_l: f64, t_lp: f64, stats: Statistics) -> Result<Complex64> {
    let classical = Complex64::new(0.0, 2.0) * (t_l - t_lp) / omega;
    match stats {
        Statistics::Classical => Ok(classical),
        Statistics::Quantum => {
            let quantum = (psi_thermal(omega, t_l)? - psi_thermal(omega, t_lp)?)
                * (2.0 / std::f64::consts::PI);
            Ok(classical - quantum)
        }
    }
}

/// Heat currents from a solved pencil (finite or infinite cutoff).
pub fn heat_currents(
    modes: &ModeSet,
    reservoirs: &ReservoirSet,
    stats: Statistics,
) -> Result<HeatCurrentMatrix> {
    let n = modes.n_modes();
    let nr = reservoirs.len();
    let poles = modes.poles();
    let temps = reservoirs.temperatures();

    // overlap stacks: cubic needs both orderings of left/right, quadratic is
    // bilinear and symmetric in the vector type
    let mut z: Vec<Mat<Complex64>> = Vec::with_capacity(nr);
    for sites in reservoirs.contacts() {
        let mut zl = Mat::<Complex64>::zeros(n, n);
        for &i in sites {
            for a in 0..n {
                let la = match modes.kind {
                    PencilKind::Cubic => modes.left[(i, a)].conj(),
                    PencilKind::Quadratic => modes.right[(i, a)],
                };
                if la == Complex64::default() {
                    continue;
                }
                for b in 0..n {
                    zl[(a, b)] += la * modes.right[(i, b)];
                }
            }
        }
        z.push(zl);
    }

    let mut q = Mat::<f64>::zeros(nr, nr);
    for l in 0..nr {
        for lp in 0..l {
            let mut sum = Complex64::default();
            match modes.kind {
                PencilKind::Cubic => {
                    let lambda = modes.lambda.expect("cubic pencil carries a cutoff");
                    let c = 2.0 * modes.gamma0 * lambda * lambda;
                    for a in 0..n {
                        if modes.lambda_pole_indices.contains(&a) {
                            continue;
                        }
                        let wa = poles[a];
                        let da = delta_pair(wa, temps[l], temps[lp], stats)?;
                        let front = wa.powu(3) * da / (wa * wa + lambda * lambda);
                        for b in 0..n {
                            sum += front * z[lp][(b, a)] * z[l][(a, b)] / (wa + poles[b]);
                        }
                    }
                    sum *= c * c;
                }
                PencilKind::Quadratic => {
                    let g = modes.gamma0;
                    for a in 0..n {
                        let wa = poles[a];
                        let da = delta_pair(wa, temps[l], temps[lp], stats)?;
                        let front = wa.powu(4) * da;
                        for b in 0..n {
                            sum +=
                                front * poles[b] * z[l][(a, b)] * z[lp][(b, a)] / (wa + poles[b]);
                        }
                    }
                    sum *= -4.0 * g * g;
                }
            }
            if sum.im.abs() > 1e-9 * sum.re.abs().max(1e-12) && sum.im.abs() > 1e-13 {
                return Err(Error::InvalidInput(format!(
                    "imaginary residue {:.3e} in heat current ({l}, {lp})",
                    sum.im
                )));
            }
            q[(l, lp)] = sum.re;
            q[(lp, l)] = -sum.re;
        }
    }

    let regime = match modes.kind {
        PencilKind::Cubic => Regime::FiniteCutoff,
        PencilKind::Quadratic => Regime::InfiniteCutoff,
    };
    Ok(HeatCurrentMatrix { q, regime })
}

/// Lowest order in the coupling: each normal mode carries current
/// independently, split among the reservoirs it touches.
pub fn heat_weak_coupling(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
    stats: Statistics,
) -> Result<HeatCurrentMatrix> {
    let k = network.size();
    reservoirs.check_sites(k)?;
    let cm = closed_modes(network)?;
    let pt = reservoirs.total_projector_diag(k);
    let nr = reservoirs.len();
    let temps = reservoirs.temperatures();

    let mut q = Mat::<f64>::zeros(nr, nr);
    for alpha in 0..k {
        let omega = cm.frequencies[alpha];
        let qv = |i: usize| cm.vectors[(i, alpha)];
        let wt: f64 = (0..k).map(|i| pt[i] * qv(i) * qv(i)).sum();
        if wt <= 0.0 {
            return Err(Error::WrongRegime(format!(
                "normal mode {alpha} does not touch any reservoir"
            )));
        }
        let weights: Vec<f64> = reservoirs
            .contacts()
            .iter()
            .map(|sites| sites.iter().map(|&i| qv(i) * qv(i)).sum::<f64>())
            .collect();
        for l in 0..nr {
            for lp in 0..l {
                // energy exchanged per mode: Omega (coth_l - coth_lp), i.e.
                // twice the difference of the single-bath mode energies
                let flow = match stats {
                    Statistics::Classical => 2.0 * (temps[l] - temps[lp]),
                    Statistics::Quantum => {
                        omega * (coth_half(omega, temps[l]) - coth_half(omega, temps[lp]))
                    }
                };
                let val = reservoirs.gamma0() * weights[l] * weights[lp] / wt * flow;
                q[(l, lp)] += val;
                q[(lp, l)] -= val;
            }
        }
    }
    Ok(HeatCurrentMatrix {
        q,
        regime: Regime::WeakCoupling,
    })
}

/// Independent route to the net currents: the stationary continuity relation
/// gives `Q_l = Tr(P_l V_R sigma_xv)` in velocity form.
pub fn net_currents_from_covariance(
    network: &HarmonicNetwork,
    modes: &ModeSet,
    reservoirs: &ReservoirSet,
    stats: Statistics,
) -> Result<Vec<f64>> {
    let xv = sigma_moment(modes, reservoirs, 0, 1, stats)?;
    let v = network.potential();
    let flux = v * &xv; // (V sigma_xv)_ii summed over each contact
    Ok(reservoirs
        .contacts()
        .iter()
        .map(|sites| sites.iter().map(|&i| flux[(i, i)]).sum())
        .collect())
}

/// Spectral transmission between two reservoirs at real frequency `omega`,
/// normalized so that the current is `int_0^inf T(w) [n_l(w) - n_lp(w)] dw`
/// in suitable units; used for diagnostics, not for currents.
pub fn transmission(
    modes: &ModeSet,
    reservoirs: &ReservoirSet,
    l: usize,
    lp: usize,
    omega: f64,
) -> Result<f64> {
    if l >= reservoirs.len() || lp >= reservoirs.len() || l == lp {
        return Err(Error::InvalidInput("invalid reservoir pair".into()));
    }
    let k = modes.k;
    let g = modes.green_spectral(Complex64::new(0.0, omega))?;
    let coupling = |w: f64| -> f64 {
        match modes.lambda {
            Some(lambda) => {
                (2.0 / std::f64::consts::PI) * modes.gamma0 * w * lambda * lambda
                    / (w * w + lambda * lambda)
            }
            None => (2.0 / std::f64::consts::PI) * modes.gamma0 * w,
        }
    };
    let c = coupling(omega);
    let pl = reservoirs.projector_diag(l, k);
    let plp = reservoirs.projector_diag(lp, k);
    // pi * Tr(I_l G I_lp G^dagger) restricted to the contact sites
    let mut tr = 0.0;
    for i in 0..k {
        if pl[i] == 0.0 {
            continue;
        }
        for j in 0..k {
            if plp[j] == 0.0 {
                continue;
            }
            tr += g[(i, j)].norm_sqr();
        }
    }
    Ok(std::f64::consts::PI * c * c * tr)
}

/// Slab-averaged estimate for two-reservoir lattices: the current per
/// contact site and its symmetry defect under swapping the reservoirs.
#[derive(Debug, Clone)]
pub struct CurrentEstimate {
    /// Current into the cold side per unit temperature difference.
    pub conductance: f64,
    /// Current per contact site per unit temperature difference.
    pub conductance_per_site: f64,
    /// Relative mismatch between `Q_hot` and `-Q_cold`.
    pub asymmetry: f64,
}

/// Reduces a two-reservoir current matrix to a scalar conductance.
pub fn two_terminal_estimate(
    currents: &HeatCurrentMatrix,
    reservoirs: &ReservoirSet,
) -> Result<CurrentEstimate> {
    if reservoirs.len() != 2 {
        return Err(Error::InvalidInput(
            "two-terminal estimate needs exactly two reservoirs".into(),
        ));
    }
    let dt = reservoirs.temperatures()[0] - reservoirs.temperatures()[1];
    if dt == 0.0 {
        return Err(Error::InvalidInput(
            "two-terminal estimate needs a temperature bias".into(),
        ));
    }
    let nets = currents.net_currents();
    let j = currents.q[(0, 1)] / dt;
    let scale = nets[0].abs().max(nets[1].abs()).max(1e-300);
    Ok(CurrentEstimate {
        conductance: j,
        conductance_per_site: j / reservoirs.contacts()[0].len() as f64,
        asymmetry: (nets[0] + nets[1]).abs() / scale,
    })
}
