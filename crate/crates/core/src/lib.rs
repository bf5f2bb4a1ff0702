//! Samplers and exact oracles for (oriented) wired uniform spanning forests
//! on finite wired quotients of larger networks.
//!
//! The crate is organised around a small set of building blocks:
//!
//! * [`network`] — weighted multigraphs, wired quotients, exhaustion bookkeeping;
//! * [`potential`] — harmonic solves, effective conductance, capacity,
//!   matrix-tree counts and exact series-parallel reduction;
//! * [`walks`] — conductance-weighted random walks, boundary excursions,
//!   loop erasure and first-entry edges;
//! * [`spanning`] — Aldous-Broder and Wilson tree samplers plus forest queries;
//! * [`interlacement`] — a Poisson process of boundary excursions, the
//!   first-entry forest it induces, the backward Markov update, hitting
//!   statistics and the traversal-order minimal spanning forest;
//! * [`families`] — parametric graph generators (grids, trees, stretched
//!   trees with attached binary trees, ...);
//! * [`stats`] — distribution-comparison utilities shared by the test suites;
//! * [`verify`] — the end-to-end verification suite driven by the CLI and the
//!   acceptance tests.

pub mod families;
pub mod interlacement;
pub mod network;
pub mod potential;
pub mod spanning;
pub mod stats;
pub mod verify;
pub mod walks;

pub use network::{Network, OrientedEdge, WiredQuotient};
pub use spanning::OrientedForest;
pub use walks::{Walk, WalkRng};
