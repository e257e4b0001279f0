//! Companion linearizations of the cubic and quadratic matrix polynomials.
//!
//! The finite-cutoff Green's function is `(s + Lambda) g(s)^-1` with
//!
//! ```text
//! g(s) = s^3 M + s^2 Lambda M + s (V + dV) + Lambda (V - dV),
//! ```
//!
//! where `V = V_R + dV` and `dV = gamma0 * Lambda * P_T`. At infinite cutoff
//! the Green's function is the inverse of the quadratic polynomial
//! `s^2 M + V_R + 2 s gamma0 P_T`. Both are linearized to a pencil
//! `(A, B)` whose characteristic polynomial equals that of the matrix
//! polynomial.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{Cutoff, HarmonicNetwork, ReservoirSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilKind {
    Cubic,
    Quadratic,
}

/// A linear pencil `s B - A` equivalent to the matrix polynomial.
#[derive(Debug, Clone)]
pub struct LinearPencil {
    pub a: Mat<f64>,
    pub b: Mat<f64>,
    pub kind: PencilKind,
    pub k: usize,
    /// Cutoff `Lambda` for the cubic pencil.
    pub lambda: Option<f64>,
    pub(crate) network: HarmonicNetwork,
    pub(crate) gamma0: f64,
    pub(crate) p_total: Vec<f64>,
}

impl LinearPencil {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Evaluates the matrix polynomial at a complex point.
    ///
    /// Cubic: `g(s)`. Quadratic: `G^-1(s) = s^2 M + V_R + 2 s gamma0 P_T`.
    pub fn poly_at(&self, s: Complex64) -> Mat<Complex64> {
        let k = self.k;
        let m = self.network.mass();
        let vr = self.network.potential();
        match self.kind {
            PencilKind::Cubic => {
                let lambda = self.lambda.unwrap();
                let dv: Vec<f64> = self
                    .p_total
                    .iter()
                    .map(|p| self.gamma0 * lambda * p)
                    .collect();
                let s2 = s * s;
                let s3 = s2 * s;
                Mat::from_fn(k, k, |i, j| {
                    // V + dV = V_R + 2 dV on the diagonal of contacted sites
                    let vp = vr[(i, j)] + if i == j { 2.0 * dv[i] } else { 0.0 };
                    let vm = vr[(i, j)];
                    (s3 + lambda * s2) * m[(i, j)] + s * vp + lambda * vm
                })
            }
            PencilKind::Quadratic => {
                let s2 = s * s;
                Mat::from_fn(k, k, |i, j| {
                    let damp = if i == j {
                        2.0 * self.gamma0 * self.p_total[i]
                    } else {
                        0.0
                    };
                    s2 * m[(i, j)] + vr[(i, j)] + s * damp
                })
            }
        }
    }

    /// Laplace-transformed Green's function by direct inversion.
    pub fn green_direct(&self, s: Complex64) -> Result<Mat<Complex64>> {
        let g = self.poly_at(s);
        let lu = g.partial_piv_lu();
        let inv = lu.solve(Mat::<Complex64>::identity(self.k, self.k));
        let ginv = match self.kind {
            PencilKind::Cubic => {
                let lambda = self.lambda.unwrap();
                let scale = s + lambda;
                Mat::from_fn(self.k, self.k, |i, j| inv[(i, j)] * scale)
            }
            PencilKind::Quadratic => inv,
        };
        if ginv.as_ref().has_nan() {
            return Err(Error::PoleEvaluation(s));
        }
        Ok(ginv)
    }

    pub(crate) fn gamma0(&self) -> f64 {
        self.gamma0
    }
}

/// Builds the `3K x 3K` companion pencil for a finite cutoff.
pub fn assemble_cubic(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
) -> Result<LinearPencil> {
    let lambda = match reservoirs.cutoff() {
        Cutoff::Finite(l) => l,
        Cutoff::Infinite => {
            return Err(Error::WrongRegime(
                "cubic pencil requires a finite cutoff".into(),
            ))
        }
    };
    let k = network.size();
    reservoirs.check_sites(k)?;
    let pt = reservoirs.total_projector_diag(k);
    let gamma0 = reservoirs.gamma0();
    let m = network.mass();
    let vr = network.potential();

    // A = [0 I 0; 0 0 I; -Lambda V_-  -V_+  -Lambda M],  B = diag(I, I, M)
    // with V_- = V_R and V_+ = V_R + 2 gamma0 Lambda P_T.
    let n = 3 * k;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = Mat::<f64>::zeros(n, n);
    for i in 0..k {
        a[(i, k + i)] = 1.0;
        a[(k + i, 2 * k + i)] = 1.0;
        b[(i, i)] = 1.0;
        b[(k + i, k + i)] = 1.0;
        for j in 0..k {
            a[(2 * k + i, j)] = -lambda * vr[(i, j)];
            a[(2 * k + i, k + j)] = -vr[(i, j)];
            a[(2 * k + i, 2 * k + j)] = -lambda * m[(i, j)];
            b[(2 * k + i, 2 * k + j)] = m[(i, j)];
        }
        a[(2 * k + i, k + i)] -= 2.0 * gamma0 * lambda * pt[i];
    }

    Ok(LinearPencil {
        a,
        b,
        kind: PencilKind::Cubic,
        k,
        lambda: Some(lambda),
        network: network.clone(),
        gamma0,
        p_total: pt,
    })
}

/// Builds the symmetric `2K x 2K` companion pencil for an infinite cutoff.
pub fn assemble_quadratic(
    network: &HarmonicNetwork,
    reservoirs: &ReservoirSet,
) -> Result<LinearPencil> {
    if reservoirs.cutoff().is_finite() {
        return Err(Error::WrongRegime(
            "quadratic pencil requires an infinite cutoff".into(),
        ));
    }
    let k = network.size();
    reservoirs.check_sites(k)?;
    let pt = reservoirs.total_projector_diag(k);
    let gamma0 = reservoirs.gamma0();
    let m = network.mass();
    let vr = network.potential();

    // C = -V_R makes both A and B symmetric:
    // A = [0 -V_R; -V_R -2 gamma0 P_T],  B = diag(-V_R, M).
    let n = 2 * k;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = Mat::<f64>::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            a[(i, k + j)] = -vr[(i, j)];
            a[(k + i, j)] = -vr[(i, j)];
            b[(i, j)] = -vr[(i, j)];
            b[(k + i, k + j)] = m[(i, j)];
        }
        a[(k + i, k + i)] = -2.0 * gamma0 * pt[i];
    }

    Ok(LinearPencil {
        a,
        b,
        kind: PencilKind::Quadratic,
        k,
        lambda: None,
        network: network.clone(),
        gamma0,
        p_total: pt,
    })
}
