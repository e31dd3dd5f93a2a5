//! Numerical toolkit for sequences of conformal metrics on surfaces with
//! bounded area and L^2 curvature energy.
//!
//! The crate detects where such a sequence concentrates area and energy,
//! performs the filter-based blow-up renormalization around each
//! concentration point, assembles the resulting bubble tree, and produces
//! the matching thick-thin decomposition, together with mass-accounting
//! reports that check the limit identities numerically.
//!
//! Entry points:
//! - [`families`] generates the built-in metric families with closed-form
//!   oracles;
//! - [`concentration::detect_bubbles`] finds concentration points;
//! - [`renormalize::blowup`] recenters, finds the neck radius and rescales;
//! - [`bubble_tree::build_tree`] runs the full recursion;
//! - [`pipeline::run_scenario`] drives everything from a config file and
//!   writes JSON/CSV artifacts (also exposed by the `bubbletree` binary).

pub mod bubble_tree;
pub mod chart;
pub mod concentration;
pub mod error;
pub mod families;
pub mod field;
pub mod io;
pub mod metric_ops;
pub mod pipeline;
pub mod poisson;
pub mod renormalize;
pub mod scenario;

pub use chart::{ChartKind, DomainChart};
pub use error::{Error, Result};
pub use field::{MetricGrid, MetricSequence, ScalarField};
pub use metric_ops::{Functionals, RadialStats};
