//! Mode solvers: generalized eigenvalues, mode vectors, and the spectral form
//! of the Green's function.
//!
//! The pencil eigenproblem `A z = s B z` is reduced to the standard problem of
//! `B^-1 A`. For the cubic pencil the left eigenvectors come from the
//! transposed problem and are rescaled so that `L^H B R = I`; for the
//! symmetric quadratic pencil left and right coincide and the bilinear
//! normalization `r^T B r = 1` applies.

use faer::linalg::solvers::{Eigen, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::HarmonicNetwork;
use crate::pencil::{LinearPencil, PencilKind};

/// Tolerances for [`solve_modes`], all relative to the spectral radius.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol_stab: f64,
    pub tol_deg: f64,
    pub tol_lambda: f64,
    pub tol_pair: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_stab: 1e-13,
            tol_deg: 1e-9,
            tol_lambda: 1e-8,
            tol_pair: 1e-8,
        }
    }
}

/// Eigenvalues and K-component mode vectors of a solved pencil.
///
/// Poles of the Green's function sit at `omega_alpha = -i s_alpha`, all in
/// the upper half-plane for a stable network.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub kind: PencilKind,
    pub k: usize,
    /// Pencil eigenvalues `s_alpha`, `Re < 0`.
    pub eigenvalues: Vec<Complex64>,
    /// `K x n` matrix whose column `alpha` is the right vector `r_alpha`.
    pub right: Mat<Complex64>,
    /// `K x n` matrix of left vectors; equals `right` for the quadratic kind.
    pub left: Mat<Complex64>,
    /// Indices with `s_alpha = -Lambda` exactly (cubic only).
    pub lambda_pole_indices: Vec<usize>,
    /// `conj_partner[alpha]` is the index with the conjugate eigenvalue.
    pub conj_partner: Vec<usize>,
    pub lambda: Option<f64>,
    pub gamma0: f64,
}

impl ModeSet {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Pole frequencies `omega_alpha = -i s_alpha`.
    pub fn poles(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|s| Complex64::new(0.0, -1.0) * s)
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|s| s.norm())
            .fold(0.0, f64::max)
    }

    /// Green's function from the pole expansion.
    pub fn green_spectral(&self, s: Complex64) -> Result<Mat<Complex64>> {
        let rho = self.spectral_radius();
        let mut out = Mat::<Complex64>::zeros(self.k, self.k);
        for (alpha, &sa) in self.eigenvalues.iter().enumerate() {
            let d = s - sa;
            if d.norm() < 1e-12 * rho {
                return Err(Error::PoleEvaluation(sa));
            }
            let weight = match self.kind {
                PencilKind::Cubic => 1.0 / d,
                PencilKind::Quadratic => sa / d,
            };
            for i in 0..self.k {
                let ri = self.right[(i, alpha)];
                for j in 0..self.k {
                    let lj = match self.kind {
                        PencilKind::Cubic => self.left[(j, alpha)].conj(),
                        PencilKind::Quadratic => self.right[(j, alpha)],
                    };
                    out[(i, j)] += weight * ri * lj;
                }
            }
        }
        if let (PencilKind::Cubic, Some(lambda)) = (self.kind, self.lambda) {
            let scale = s + lambda;
            for j in 0..self.k {
                for i in 0..self.k {
                    out[(i, j)] *= scale;
                }
            }
        }
        Ok(out)
    }

    /// One line per mode: `Re(s) Im(s) r_1 ... r_K` (real and imaginary parts
    /// interleaved), a debug format for diffing runs.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (alpha, ev) in self.eigenvalues.iter().enumerate() {
            s.push_str(&format!("{:+.16e} {:+.16e}", ev.re, ev.im));
            for i in 0..self.k {
                let r = self.right[(i, alpha)];
                s.push_str(&format!(" {:+.16e} {:+.16e}", r.re, r.im));
            }
            s.push('\n');
        }
        s
    }
}

fn to_complex(m: &Mat<f64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Solves the linearized eigenproblem and normalizes the mode vectors.
pub fn solve_modes(pencil: &LinearPencil, opts: &SolverOptions) -> Result<ModeSet> {
    let n = pencil.dim();
    let k = pencil.k;

    let blu = pencil.b.partial_piv_lu();
    let n_mat = blu.solve(&pencil.a);
    let eig = Eigen::new_from_real(n_mat.as_ref()).map_err(|_| Error::EigFailure)?;
    let evals: Vec<Complex64> = (0..n).map(|i| eig.S()[i]).collect();
    let rho = evals.iter().map(|s| s.norm()).fold(0.0, f64::max);

    for &s in &evals {
        if s.re >= -opts.tol_stab * rho {
            return Err(Error::UndampedMode(s.re));
        }
    }

    let r_full = eig.U().to_owned();
    let b_c = to_complex(&pencil.b);

    let (right, left) = match pencil.kind {
        PencilKind::Quadratic => {
            // bilinear normalization z^T B z = 1
            let bz = &b_c * &r_full;
            let mut right = Mat::<Complex64>::zeros(k, n);
            let b_norm = crate::network::mat_norm(&pencil.b);
            for alpha in 0..n {
                let mut gram = Complex64::new(0.0, 0.0);
                let mut z_norm2 = 0.0;
                for i in 0..n {
                    gram += r_full[(i, alpha)] * bz[(i, alpha)];
                    z_norm2 += r_full[(i, alpha)].norm_sqr();
                }
                if gram.norm() < 1e-12 * z_norm2 * b_norm {
                    return Err(Error::DegeneratePencil(format!(
                        "bilinear norm of mode {alpha} vanishes (|r^T B r| = {:.3e})",
                        gram.norm()
                    )));
                }
                let scale = 1.0 / gram.sqrt();
                for i in 0..k {
                    right[(i, alpha)] = r_full[(i, alpha)] * scale;
                }
            }
            (right.clone(), right)
        }
        PencilKind::Cubic => {
            // left vectors from the transposed pencil: A^T u = conj(s) B u
            let at = pencil.a.transpose().to_owned();
            let w_mat = blu.solve(&at);
            let eig_l = Eigen::new_from_real(w_mat.as_ref()).map_err(|_| Error::EigFailure)?;
            let evals_l: Vec<Complex64> = (0..n).map(|i| eig_l.S()[i]).collect();
            let u_full = eig_l.U();

            // match u_j (eigenvalue conj(s_alpha)) to each alpha, uniquely
            let mut used = vec![false; n];
            let mut l_cols: Vec<usize> = Vec::with_capacity(n);
            for &s in &evals {
                let target = s.conj();
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (j, &lj) in evals_l.iter().enumerate() {
                    if used[j] {
                        continue;
                    }
                    let d = (lj - target).norm();
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                if best_d > opts.tol_deg.max(1e-7) * rho {
                    return Err(Error::DegeneratePencil(format!(
                        "left/right eigenvalue mismatch ({best_d:.3e})"
                    )));
                }
                used[best] = true;
                l_cols.push(best);
            }
            let l_raw =
                Mat::<Complex64>::from_fn(n, n, |i, alpha| u_full[(i, l_cols[alpha])].conj());

            // enforce L^H B R = I; also fixes mixing inside degenerate
            // eigenspaces such as the exact -Lambda root
            let gram = l_raw.adjoint() * &b_c * &r_full;
            let glu = gram.partial_piv_lu();
            let lh_new = glu.solve(l_raw.adjoint().to_owned()); // rows are l_alpha^H

            // diagonalization residual guards against defective pencils
            let a_c = to_complex(&pencil.a);
            let lar = &lh_new * &a_c * &r_full;
            let mut resid: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j {
                        evals[i]
                    } else {
                        Complex64::default()
                    };
                    resid = resid.max((lar[(i, j)] - expect).norm());
                }
            }
            if resid > 1e-6 * rho.max(1.0) {
                return Err(Error::DegeneratePencil(format!(
                    "biorthogonalization residual {resid:.3e}"
                )));
            }

            let right = Mat::from_fn(k, n, |i, alpha| r_full[(i, alpha)]);
            // l_alpha is the last K components of the alpha-th column of L
            let left = Mat::from_fn(k, n, |i, alpha| lh_new[(alpha, 2 * k + i)].conj());
            (right, left)
        }
    };

    // conjugate-pair matching
    let mut conj_partner = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for alpha in 0..n {
        if conj_partner[alpha] != usize::MAX {
            continue;
        }
        let target = evals[alpha].conj();
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for beta in 0..n {
            if used[beta] {
                continue;
            }
            let d = (evals[beta] - target).norm();
            if d < best_d {
                best_d = d;
                best = beta;
            }
        }
        if best_d > opts.tol_pair * rho {
            return Err(Error::DegeneratePencil(format!(
                "eigenvalue {} has no conjugate partner (gap {best_d:.3e})",
                evals[alpha]
            )));
        }
        used[best] = true;
        used[alpha] = true;
        conj_partner[alpha] = best;
        conj_partner[best] = alpha;
    }

    let lambda_pole_indices = match (pencil.kind, pencil.lambda) {
        (PencilKind::Cubic, Some(lambda)) => (0..n)
            .filter(|&a| (evals[a] + lambda).norm() <= opts.tol_lambda * lambda)
            .collect(),
        _ => Vec::new(),
    };

    Ok(ModeSet {
        kind: pencil.kind,
        k,
        eigenvalues: evals,
        right,
        left,
        lambda_pole_indices,
        conj_partner,
        lambda: pencil.lambda,
        gamma0: pencil.gamma0(),
    })
}

/// Normal modes of the closed network: `V_R q = Omega^2 M q` with
/// `q^T M q = 1`.
#[derive(Debug, Clone)]
pub struct ClosedModes {
    /// Positive frequencies, ascending.
    pub frequencies: Vec<f64>,
    /// `K x K`; column `alpha` is the M-orthonormal vector `q0_alpha`.
    pub vectors: Mat<f64>,
    /// First-order decay rates `Gamma_alpha = gamma0 q0^T P_T q0`,
    /// populated by [`perturb_modes`].
    pub decay_rates: Option<Vec<f64>>,
}

/// Solves the closed-system generalized symmetric eigenproblem.
pub fn closed_modes(network: &HarmonicNetwork) -> Result<ClosedModes> {
    let k = network.size();
    // M^{-1/2} through the self-adjoint eigendecomposition of M
    let em = network
        .mass()
        .as_ref()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigFailure)?;
    let mvals = em.S();
    for i in 0..k {
        if mvals[i] <= 0.0 {
            return Err(Error::MassNotPositive);
        }
    }
    let u = em.U();
    let m_isqrt = Mat::<f64>::from_fn(k, k, |i, j| {
        (0..k)
            .map(|p| u[(i, p)] * u[(j, p)] / mvals[p].sqrt())
            .sum()
    });
    let c = &m_isqrt * network.potential() * &m_isqrt;
    let ec = c
        .as_ref()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigFailure)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ec.S()[a].partial_cmp(&ec.S()[b]).unwrap());

    let mut frequencies = Vec::with_capacity(k);
    for &p in &order {
        let w2 = ec.S()[p];
        if w2 <= 0.0 {
            return Err(Error::UnstableNetwork(w2));
        }
        frequencies.push(w2.sqrt());
    }
    let y = ec.U();
    let vectors = Mat::<f64>::from_fn(k, k, |i, alpha| {
        (0..k).map(|p| m_isqrt[(i, p)] * y[(p, order[alpha])]).sum()
    });
    Ok(ClosedModes {
        frequencies,
        vectors,
        decay_rates: None,
    })
}

/// First-order (in `gamma0`) decay rates and vector corrections.
pub fn perturb_modes(
    closed: &ClosedModes,
    reservoirs: &crate::network::ReservoirSet,
    k: usize,
) -> Result<ClosedModes> {
    reservoirs.check_sites(k)?;
    let pt = reservoirs.total_projector_diag(k);
    let gamma0 = reservoirs.gamma0();
    let q = &closed.vectors;
    let freqs = &closed.frequencies;

    let mut gaps = f64::INFINITY;
    for a in 0..k {
        for b in 0..a {
            gaps = gaps.min((freqs[a] - freqs[b]).abs());
        }
    }

    let mut rates = Vec::with_capacity(k);
    let mut weight_max: f64 = 0.0;
    for alpha in 0..k {
        let w: f64 = (0..k).map(|i| pt[i] * q[(i, alpha)] * q[(i, alpha)]).sum();
        weight_max = weight_max.max(w);
        rates.push(gamma0 * w);
    }
    if k > 1 && gamma0 * weight_max >= gaps {
        return Err(Error::DegenerateSpectrum(gaps));
    }

    Ok(ClosedModes {
        frequencies: closed.frequencies.clone(),
        vectors: closed.vectors.clone(),
        decay_rates: Some(rates),
    })
}
