//! Hypercubic lattices with binary mass disorder.
//!
//! Sites are ordered slab-major: the coordinate along the transport direction
//! is the slowest index, so the potential splits into `N` identical diagonal
//! blocks coupled by `-I` super/sub-diagonal blocks.

use faer::Mat;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::network::HarmonicNetwork;

/// Boundary condition applied where the lattice meets the walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Every site sees `2 * dim` springs: missing neighbors are replaced by
    /// rigid walls. All slabs are identical.
    Fixed,
    /// Only springs to actual neighbors; edge sites are softer.
    Free,
}

/// Geometry and disorder parameters of a pinned hypercubic crystal.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub dim: usize,
    pub n: usize,
    pub k0: f64,
    pub mass_mean: f64,
    pub mass_spread: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidInput("dim must be 1, 2 or 3".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput("N must be at least 2".into()));
        }
        if !(self.k0 > 0.0) {
            return Err(Error::InvalidInput("pinning k0 must be positive".into()));
        }
        if self.mass_spread < 0.0 || self.mass_spread >= self.mass_mean {
            return Err(Error::InvalidInput(
                "mass spread must satisfy 0 <= spread < mean".into(),
            ));
        }
        Ok(())
    }

    /// Total number of sites `N^dim`.
    pub fn sites(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Sites per slab, `N^(dim-1)`.
    pub fn slab_size(&self) -> usize {
        self.n.pow(self.dim as u32 - 1)
    }
}

/// One draw of the binary mass disorder.
#[derive(Debug, Clone)]
pub struct DisorderRealization {
    pub masses: Vec<f64>,
    pub realization_index: u64,
    pub parent_seed: u64,
}

/// Builds the disordered lattice network for one realization.
///
/// Exactly `K/2` sites (rounded down) get mass `mean + spread`, the rest get
/// `mean - spread`, with the assignment shuffled by a stream derived from
/// `(seed, realization_index)`. Rebuilding with the same pair is bit-identical.
pub fn build_lattice(
    spec: &LatticeSpec,
    realization_index: u64,
) -> Result<(HarmonicNetwork, DisorderRealization)> {
    spec.validate()?;
    let k = spec.sites();

    let mut masses: Vec<f64> = (0..k)
        .map(|i| {
            if i < k / 2 {
                spec.mass_mean + spec.mass_spread
            } else {
                spec.mass_mean - spec.mass_spread
            }
        })
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(realization_index);
    masses.shuffle(&mut rng);

    let potential = lattice_potential(spec);
    let network = HarmonicNetwork::with_diagonal_mass(&masses, potential)?;
    Ok((
        network,
        DisorderRealization {
            masses,
            realization_index,
            parent_seed: spec.seed,
        },
    ))
}

/// Contact sets for the two face reservoirs: slab 0 and slab N-1.
pub fn contacts_for_lattice(spec: &LatticeSpec) -> Vec<Vec<usize>> {
    let k = spec.sites();
    let slab = spec.slab_size();
    vec![(0..slab).collect(), (k - slab..k).collect()]
}

fn site_coords(index: usize, dim: usize, n: usize) -> [usize; 3] {
    // coordinate 0 is the transport (slab) direction, the slowest index
    let mut c = [0usize; 3];
    let mut rem = index;
    for d in (0..dim).rev() {
        c[d] = rem % n;
        rem /= n;
    }
    c
}

fn site_index(coords: &[usize; 3], dim: usize, n: usize) -> usize {
    let mut idx = 0;
    for d in 0..dim {
        idx = idx * n + coords[d];
    }
    idx
}

fn lattice_potential(spec: &LatticeSpec) -> Mat<f64> {
    let k = spec.sites();
    let (dim, n) = (spec.dim, spec.n);
    let mut v = Mat::<f64>::zeros(k, k);
    for i in 0..k {
        let coords = site_coords(i, dim, n);
        let mut neighbors = 0usize;
        for d in 0..dim {
            for step in [-1isize, 1] {
                let c = coords[d] as isize + step;
                if c < 0 || c >= n as isize {
                    continue;
                }
                let mut nb = coords;
                nb[d] = c as usize;
                let j = site_index(&nb, dim, n);
                v[(i, j)] = -1.0;
                neighbors += 1;
            }
        }
        v[(i, i)] = spec.k0
            + match spec.boundary {
                Boundary::Fixed => 2.0 * dim as f64,
                Boundary::Free => neighbors as f64,
            };
    }
    v
}
