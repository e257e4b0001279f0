//! Harmonic networks and their reservoir couplings.
//!
//! A network is a set of `K` coupled oscillators described by a mass matrix
//! `M` and a renormalized potential `V_R`. Reservoirs attach to disjoint site
//! sets through diagonal 0/1 projectors, all sharing the coupling strength
//! `gamma0` and the Lorentz-Drude cutoff.

use faer::Mat;

use crate::error::{Error, Result};

/// High-frequency cutoff of the Ohmic spectral densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl Cutoff {
    pub fn is_finite(&self) -> bool {
        matches!(self, Cutoff::Finite(_))
    }
}

/// A network of `K` harmonic oscillators.
///
/// `potential` is always the renormalized potential `V_R`; the bare potential
/// needed by the finite-cutoff pencil is reconstructed internally as
/// `V = V_R + gamma0 * lambda * P_T`.
#[derive(Debug, Clone)]
pub struct HarmonicNetwork {
    mass: Mat<f64>,
    potential: Mat<f64>,
}

impl HarmonicNetwork {
    pub fn new(mass: Mat<f64>, potential: Mat<f64>) -> Result<Self> {
        let k = mass.nrows();
        if k == 0 || mass.ncols() != k || potential.nrows() != k || potential.ncols() != k {
            return Err(Error::InvalidInput(
                "mass and potential must be square matrices of the same size".into(),
            ));
        }
        if asymmetry(&mass) > 1e-12 * mat_norm(&mass) {
            return Err(Error::InvalidInput("mass matrix is not symmetric".into()));
        }
        if asymmetry(&potential) > 1e-12 * mat_norm(&potential).max(1e-300) {
            return Err(Error::InvalidInput(
                "potential matrix is not symmetric".into(),
            ));
        }
        if mass.as_ref().llt(faer::Side::Lower).is_err() {
            return Err(Error::MassNotPositive);
        }
        Ok(Self { mass, potential })
    }

    /// Diagonal mass shortcut.
    pub fn with_diagonal_mass(masses: &[f64], potential: Mat<f64>) -> Result<Self> {
        let k = masses.len();
        let mass = Mat::from_fn(k, k, |i, j| if i == j { masses[i] } else { 0.0 });
        Self::new(mass, potential)
    }

    pub fn size(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &Mat<f64> {
        &self.mass
    }

    /// The renormalized potential `V_R`.
    pub fn potential(&self) -> &Mat<f64> {
        &self.potential
    }
}

/// A set of `L` thermal reservoirs attached to disjoint site sets.
#[derive(Debug, Clone)]
pub struct ReservoirSet {
    contacts: Vec<Vec<usize>>,
    temperatures: Vec<f64>,
    gamma0: f64,
    cutoff: Cutoff,
}

impl ReservoirSet {
    pub fn new(
        contacts: Vec<Vec<usize>>,
        temperatures: Vec<f64>,
        gamma0: f64,
        cutoff: Cutoff,
    ) -> Result<Self> {
        if contacts.len() != temperatures.len() {
            return Err(Error::InvalidInput(
                "one temperature per contact set is required".into(),
            ));
        }
        if contacts.is_empty() {
            return Err(Error::InvalidInput(
                "at least one reservoir is required".into(),
            ));
        }
        if temperatures.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::InvalidInput(
                "temperatures must be nonnegative".into(),
            ));
        }
        if !(gamma0 > 0.0) {
            return Err(Error::InvalidInput("gamma0 must be positive".into()));
        }
        if let Cutoff::Finite(lambda) = cutoff {
            if !(lambda > 0.0) {
                return Err(Error::InvalidInput("cutoff must be positive".into()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for set in &contacts {
            if set.is_empty() {
                return Err(Error::InvalidInput("empty contact set".into()));
            }
            for &site in set {
                if !seen.insert(site) {
                    return Err(Error::ContactOverlap);
                }
            }
        }
        Ok(Self {
            contacts,
            temperatures,
            gamma0,
            cutoff,
        })
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    pub fn contacts(&self) -> &[Vec<usize>] {
        &self.contacts
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// Checks that every contacted site exists in a `K`-site network.
    pub fn check_sites(&self, k: usize) -> Result<()> {
        for set in &self.contacts {
            if let Some(&site) = set.iter().find(|&&s| s >= k) {
                return Err(Error::InvalidInput(format!(
                    "contact site {site} out of range for K = {k}"
                )));
            }
        }
        Ok(())
    }

    /// Diagonal of the projector `P_l`.
    pub fn projector_diag(&self, l: usize, k: usize) -> Vec<f64> {
        let mut d = vec![0.0; k];
        for &site in &self.contacts[l] {
            d[site] = 1.0;
        }
        d
    }

    /// Diagonal of `P_T = sum_l P_l`.
    pub fn total_projector_diag(&self, k: usize) -> Vec<f64> {
        let mut d = vec![0.0; k];
        for set in &self.contacts {
            for &site in set {
                d[site] = 1.0;
            }
        }
        d
    }

    /// Number of distinct contacted sites, i.e. `rank(P_T)`.
    pub fn total_rank(&self) -> usize {
        self.contacts.iter().map(|s| s.len()).sum()
    }
}

/// Outcome of [`validate`]: a pure report, never an error.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub mass_symmetric: bool,
    pub mass_positive_definite: bool,
    pub potential_symmetric: bool,
    pub potential_positive_definite: bool,
    pub contacts_disjoint: bool,
    pub contacts_in_range: bool,
    /// `K - rank(P_T)`, the predicted multiplicity of the exact `i*Lambda`
    /// pole of the finite-cutoff Green's function.
    pub lambda_pole_multiplicity: usize,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks the structural assumptions behind the stationary-state formulas.
pub fn validate(network: &HarmonicNetwork, reservoirs: &ReservoirSet) -> ValidationReport {
    let k = network.size();
    let mut rep = ValidationReport::default();

    rep.mass_symmetric = asymmetry(network.mass()) <= 1e-12 * mat_norm(network.mass());
    rep.potential_symmetric =
        asymmetry(network.potential()) <= 1e-12 * mat_norm(network.potential()).max(1e-300);
    rep.mass_positive_definite = is_positive_definite(network.mass());
    rep.potential_positive_definite = is_positive_definite(network.potential());
    if !rep.mass_symmetric {
        rep.issues.push("mass matrix is not symmetric".into());
    }
    if !rep.mass_positive_definite {
        rep.issues
            .push("mass matrix is not positive definite".into());
    }
    if !rep.potential_symmetric {
        rep.issues.push("potential matrix is not symmetric".into());
    }
    if !rep.potential_positive_definite {
        rep.issues
            .push("renormalized potential has a nonpositive eigenvalue: network unstable".into());
    }

    let mut seen = std::collections::HashSet::new();
    rep.contacts_disjoint = true;
    rep.contacts_in_range = true;
    for set in reservoirs.contacts() {
        for &site in set {
            if site >= k {
                rep.contacts_in_range = false;
            }
            if !seen.insert(site) {
                rep.contacts_disjoint = false;
            }
        }
    }
    if !rep.contacts_disjoint {
        rep.issues.push("reservoir contact sets overlap".into());
    }
    if !rep.contacts_in_range {
        rep.issues.push("contact site index out of range".into());
    }

    let rank = seen.iter().filter(|&&s| s < k).count();
    rep.lambda_pole_multiplicity = k.saturating_sub(rank);
    rep
}

pub(crate) fn mat_norm(m: &Mat<f64>) -> f64 {
    let mut n: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            n = n.max(m[(i, j)].abs());
        }
    }
    n
}

pub(crate) fn asymmetry(m: &Mat<f64>) -> f64 {
    let mut a: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j {
            a = a.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    a
}

fn is_positive_definite(m: &Mat<f64>) -> bool {
    m.as_ref().llt(faer::Side::Lower).is_ok()
}
