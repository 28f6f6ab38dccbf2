//! Subdifferential estimators: BTC (secant-slope limits), Clarke
//! (generalized directional derivative and gradient), Fréchet and limiting,
//! and the Clarke–BTC comparison.

mod btc;
mod clarke;
mod compare;
mod frechet;
mod quotients;

pub use btc::{btc_directional_slopes, btc_subdifferential_1d, LevelSlopes, SubdiffEstimate1D};
pub(crate) use clarke::clarke_directional_ungated;
pub use clarke::{
    clarke_directional, clarke_grid, clarke_subdifferential, lipschitz_gate, ConvexSetApprox, DirectionalEstimate,
    LipschitzGate,
};
pub use compare::{compare_clarke_btc, ClarkeBtcComparison, DirectionalRange};
pub use frechet::{frechet_member, limiting_subdifferential, FrechetTest, LimitingResult};

/// Slope and endpoint tolerance.
pub const DEFAULT_TOL: f64 = 0.05;
/// Direction count for support-function grids in more than one variable.
pub const DEFAULT_GRID: usize = 64;
