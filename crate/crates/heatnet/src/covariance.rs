//! Stationary covariance matrices from closed-form sums over modes.
//!
//! All formulas are organized around the moment blocks
//! `sigma^(n,m)_ij = <d^n x_i/dt^n d^m x_j/dt^m>` (symmetrized), so `(0,0)`
//! is position-position, `(0,1)` is position-velocity, `(1,1)` is
//! velocity-velocity. Momentum blocks follow by sandwiching with the mass
//! matrix. Each moment splits as
//! `sigma = sigma_H - sigma_L - (-1)^(n+m) sigma_L^T`, where the `H` part
//! carries the classical (high-temperature) contribution and the `L` part
//! the quantum correction built from digamma functions.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{closed_modes, ModeSet};
use crate::network::{HarmonicNetwork, ReservoirSet};
use crate::pencil::PencilKind;
use crate::special::{coth_half, psi_thermal};

/// Which closed form produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    FiniteCutoff,
    InfiniteCutoff,
    WeakCoupling,
}

/// Whether quantum corrections are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistics {
    #[default]
    Quantum,
    /// Keep only the high-temperature part (`coth -> 2T/omega`); exact in
    /// the classical limit and much cheaper for large lattices.
    Classical,
}

/// Stationary second moments in physical variables.
#[derive(Debug, Clone)]
pub struct CovarianceBlocks {
    /// `<x x^T>`.
    pub xx: Mat<f64>,
    /// `<x v^T>` (symmetrized ordering).
    pub xv: Mat<f64>,
    /// `<v v^T>`.
    pub vv: Mat<f64>,
    /// `<x p^T> = <x v^T> M`.
    pub xp: Mat<f64>,
    /// `<p p^T> = M <v v^T> M`.
    pub pp: Mat<f64>,
    pub regime: Regime,
    /// In the strict Ohmic limit the momentum variance keeps a logarithmic
    /// memory of the dropped cutoff once quantum fluctuations dominate.
    /// `false` flags that `pp` (and `vv`) should not be trusted to better
    /// than that log; positions and cross terms are unaffected.
    pub pp_cutoff_safe: bool,
}

/// Relative size of the imaginary residue tolerated when a mode sum is cast
/// to a real matrix. Conjugate-pair symmetry makes the exact value real.
const IM_RESIDUE_TOL: f64 = 1e-9;

fn phase_i(p: i32) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Takes the real part of a mode sum, failing if the imaginary residue is
/// larger than roundoff allows.
fn real_part_checked(m: &Mat<Complex64>, label: &str) -> Result<Mat<f64>> {
    let mut scale: f64 = 0.0;
    let mut im_max: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            scale = scale.max(m[(i, j)].re.abs());
            im_max = im_max.max(m[(i, j)].im.abs());
        }
    }
    if im_max > IM_RESIDUE_TOL * scale.max(1e-300) && im_max > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "imaginary residue {im_max:.3e} (scale {scale:.3e}) in {label}"
        )));
    }
    Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
}

/// Contact overlap matrices `Z^l[(a, b)] = <left_a| P_l |right_b>`, bilinear
/// (`left = right`, transpose) for the quadratic pencil and sesquilinear for
/// the cubic one.
fn contact_overlaps(modes: &ModeSet, reservoirs: &ReservoirSet) -> Vec<Mat<Complex64>> {
    let n = modes.n_modes();
    let k = modes.k;
    reservoirs
        .contacts()
        .iter()
        .map(|sites| {
            let mut z = Mat::<Complex64>::zeros(n, n);
            for &i in sites {
                debug_assert!(i < k);
                for a in 0..n {
                    let la = match modes.kind {
                        PencilKind::Cubic => modes.left[(i, a)].conj(),
                        PencilKind::Quadratic => modes.right[(i, a)],
                    };
                    if la == Complex64::default() {
                        continue;
                    }
                    for b in 0..n {
                        z[(a, b)] += la * modes.right[(i, b)];
                    }
                }
            }
            z
        })
        .collect()
}

/// One moment block `sigma^(n,m)` in velocity form.
pub fn sigma_moment(
    modes: &ModeSet,
    reservoirs: &ReservoirSet,
    n: usize,
    m: usize,
    stats: Statistics,
) -> Result<Mat<f64>> {
    let nn = modes.n_modes();
    let poles = modes.poles();
    let overlaps = contact_overlaps(modes, reservoirs);
    let temps = reservoirs.temperatures();

    // c_H[(a, b)] = <l_a| A_H |r_b> with A_H = sum_l 2 T_l P_l;
    // c_L[(a, b)] = <l_a| A_L(w_a) |r_b>,
    //   A_L(w) = (w / i pi) sum_l P_l psi(1 - i w / 2 pi T_l)
    let mut c_h = Mat::<Complex64>::zeros(nn, nn);
    let mut c_l = Mat::<Complex64>::zeros(nn, nn);
    for (l, z) in overlaps.iter().enumerate() {
        let t = temps[l];
        let mut row_l = vec![Complex64::default(); nn];
        if stats == Statistics::Quantum {
            for a in 0..nn {
                let w = poles[a];
                row_l[a] = w / Complex64::new(0.0, std::f64::consts::PI) * psi_thermal(w, t)?;
            }
        }
        for b in 0..nn {
            for a in 0..nn {
                c_h[(a, b)] += 2.0 * t * z[(a, b)];
                c_l[(a, b)] += row_l[a] * z[(a, b)];
            }
        }
    }

    let (prefactor, ph): (f64, Complex64) = match modes.kind {
        PencilKind::Cubic => {
            let lambda = modes.lambda.expect("cubic pencil carries a cutoff");
            (
                2.0 * modes.gamma0 * lambda * lambda,
                phase_i(n as i32 - m as i32 + 1),
            )
        }
        PencilKind::Quadratic => (2.0 * modes.gamma0, phase_i(n as i32 - m as i32 - 1)),
    };

    // W[(a, b)] = w_a^p (w_b^q) c[(a, b)] / (w_a + w_b)
    let weight = |c: &Mat<Complex64>| -> Mat<Complex64> {
        Mat::from_fn(nn, nn, |a, b| {
            let num = match modes.kind {
                PencilKind::Cubic => poles[a].powu((n + m) as u32),
                PencilKind::Quadratic => poles[a].powu((n + m + 1) as u32) * poles[b],
            };
            num * c[(a, b)] / (poles[a] + poles[b])
        })
    };

    // sigma_X = prefactor * Re[ ph * R W_X L^H ]
    let assemble = |w: Mat<Complex64>| -> Mat<Complex64> {
        let rw = &modes.right * &w;
        let mut out = match modes.kind {
            PencilKind::Cubic => &rw * modes.left.adjoint(),
            PencilKind::Quadratic => &rw * modes.right.transpose(),
        };
        for j in 0..modes.k {
            for i in 0..modes.k {
                out[(i, j)] *= ph * prefactor;
            }
        }
        out
    };

    let sig_h = real_part_checked(&assemble(weight(&c_h)), "sigma_H")?;
    let sig_l_c = assemble(weight(&c_l));
    let sig_l = real_part_checked(&sig_l_c, "sigma_L")?;

    let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(Mat::from_fn(modes.k, modes.k, |i, j| {
        sig_h[(i, j)] - sig_l[(i, j)] - sign * sig_l[(j, i)]
    }))
}

fn symmetrized(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Full set of physical second moments for a solved open network.
pub fn stationary_covariance(
    network: &HarmonicNetwork,
    modes: &ModeSet,
    reservoirs: &ReservoirSet,
    stats: Statistics,
) -> Result<CovarianceBlocks> {
    if network.size() != modes.k {
        return Err(Error::InvalidInput(
            "network and mode set have different sizes".into(),
        ));
    }
    let xx = symmetrized(&sigma_moment(modes, reservoirs, 0, 0, stats)?);
    let xv = sigma_moment(modes, reservoirs, 0, 1, stats)?;
    let vv = symmetrized(&sigma_moment(modes, reservoirs, 1, 1, stats)?);
    let mmat = network.mass();
    let xp = &xv * mmat;
    let pp = mmat * &vv * mmat;

    let regime = match modes.kind {
        PencilKind::Cubic => Regime::FiniteCutoff,
        PencilKind::Quadratic => Regime::InfiniteCutoff,
    };
    let pp_cutoff_safe = match regime {
        Regime::FiniteCutoff => true,
        _ if stats == Statistics::Classical => true,
        // classical fluctuations dominate <p^2> once every reservoir is much
        // hotter than the fastest mode; below that the dropped cutoff leaks
        // into the momentum variance
        _ => {
            let t_min = reservoirs
                .temperatures()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let w_max = modes.poles().iter().map(|w| w.re.abs()).fold(0.0, f64::max);
            t_min >= 10.0 * w_max
        }
    };

    Ok(CovarianceBlocks {
        xx,
        xv,
        vv,
        xp,
        pp,
        regime,
        pp_cutoff_safe,
    })
}

/// Lowest-order covariance in the coupling: each normal mode equilibrates to
/// an effective temperature set by its overlap with the contacts.
pub fn covariance_weak_coupling(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
) -> Result<CovarianceBlocks> {
    let k = network.size();
    reservoirs.check_sites(k)?;
    let cm = closed_modes(network)?;
    let pt = reservoirs.total_projector_diag(k);

    let mut xx = Mat::<f64>::zeros(k, k);
    let mut vv = Mat::<f64>::zeros(k, k);
    for alpha in 0..k {
        let omega = cm.frequencies[alpha];
        let q = |i: usize| cm.vectors[(i, alpha)];
        let wt: f64 = (0..k).map(|i| pt[i] * q(i) * q(i)).sum();
        if wt <= 0.0 {
            return Err(Error::WrongRegime(format!(
                "normal mode {alpha} does not touch any reservoir; its weak-coupling occupation is undefined"
            )));
        }
        // k_a = sum_l w_l coth(Omega_a / 2 T_l), weights w_l normalized over
        // the contacts the mode actually reaches
        let mut occupation = 0.0;
        for (l, sites) in reservoirs.contacts().iter().enumerate() {
            let wl: f64 = sites.iter().map(|&i| q(i) * q(i)).sum();
            occupation += wl / wt * coth_half(omega, reservoirs.temperatures()[l]);
        }
        for i in 0..k {
            for j in 0..k {
                let qq = q(i) * q(j);
                xx[(i, j)] += 0.5 * occupation / omega * qq;
                vv[(i, j)] += 0.5 * occupation * omega * qq;
            }
        }
    }

    let mmat = network.mass();
    let pp = mmat * &vv * mmat;
    Ok(CovarianceBlocks {
        xv: Mat::zeros(k, k),
        xp: Mat::zeros(k, k),
        xx,
        vv,
        pp,
        regime: Regime::WeakCoupling,
        pp_cutoff_safe: true,
    })
}

/// Kinetic local temperatures `T_i = m_i <v_i^2>` (classical equipartition
/// reading of the velocity variance).
pub fn local_temperatures(network: &HarmonicNetwork, blocks: &CovarianceBlocks) -> Vec<f64> {
    let k = network.size();
    (0..k)
        .map(|i| network.mass()[(i, i)] * blocks.vv[(i, i)])
        .collect()
}
