//! Exact simulation of delayed-choice quantum-eraser setups.
//!
//! The crate models a Mach-Zehnder interferometer fed by one photon of a
//! polarization-entangled pair, with the partner ("idler") photon carrying
//! the path information, and a two-slit experiment with a two-state
//! which-way detector. All statistics are exact Born-rule probabilities on
//! small dense state vectors; [`montecarlo`] adds a seeded event sampler and
//! coincidence scans on top of them, and [`cli`] exposes everything as CSV
//! or JSON.
//!
//! ```
//! use qeraser::mz_eraser::{correlation_table, Detector, MzConfig};
//! use qeraser::optics::{mub_pair, BasisFamily, Outcome};
//!
//! let cfg = MzConfig::new(0.0, 1.0).unwrap();
//! let rl = mub_pair(BasisFamily::CircularRL, 0.0).unwrap();
//! let table = correlation_table(&cfg, &rl).unwrap();
//! assert!(table.get(Detector::D1, Outcome::First) < 1e-12);
//! assert!((table.get(Detector::D2, Outcome::First) - 0.5).abs() < 1e-12);
//! ```

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod hilbert;
pub mod montecarlo;
pub mod mz_eraser;
pub mod optics;
pub mod two_slit;
