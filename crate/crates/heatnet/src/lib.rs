//! Exact steady states of harmonic networks driven by Ohmic reservoirs.
//!
//! The library computes stationary covariance matrices, local temperatures,
//! and pairwise heat currents for networks of coupled harmonic oscillators,
//! each site optionally attached to its own thermal reservoir. The reservoir
//! spectral density is Ohmic, either with a Lorentz-Drude cutoff (finite
//! `Lambda`) or in the strict Ohmic limit (`Lambda -> infinity`). Everything
//! reduces to generalized eigenproblems of small dense pencils and
//! closed-form sums over the resulting modes, so results are exact up to
//! linear-algebra roundoff — no time integration, no frequency grids.
//!
//! Typical flow: build a [`network::HarmonicNetwork`] and a
//! [`network::ReservoirSet`], assemble a pencil with
//! [`pencil::assemble_cubic`] or [`pencil::assemble_quadratic`], solve it
//! with [`modes::solve_modes`], then feed the [`modes::ModeSet`] to the
//! covariance and heat-current routines. The [`oracle`] module re-derives
//! the same quantities by adaptive numerical quadrature of the exact
//! spectral integrals and is used to cross-check every closed form.

pub mod covariance;
pub mod error;
pub mod experiments;
pub mod heat;
pub mod io;
pub mod lattice;
pub mod modes;
pub mod network;
pub mod oracle;
pub mod pencil;
pub mod special;

pub use faer;

pub use error::{Error, Result};
pub use lattice::{
    build_lattice, contacts_for_lattice, Boundary, DisorderRealization, LatticeSpec,
};
pub use modes::{closed_modes, solve_modes, ClosedModes, ModeSet, SolverOptions};
pub use network::{Cutoff, HarmonicNetwork, ReservoirSet};
pub use pencil::{assemble_cubic, assemble_quadratic, LinearPencil, PencilKind};
