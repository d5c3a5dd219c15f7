//! Seeded simulation of the stochastic drivers: scalar and Q-Wiener
//! processes, Poisson processes with their compensated martingales, and
//! Poisson random measures with finite intensity.
//!
//! Every simulator is a pure function of its arguments and a [`Seed`].

mod poisson;
mod prm;
mod seed;
mod wiener;

pub use poisson::{compensated_path, simulate_poisson, MartingaleDriver};
pub use prm::{simulate_prm, Mark, MarkSpace, PrmRealization};
pub use seed::{PathRng, Seed};
pub use wiener::{simulate_q_wiener, simulate_wiener, QSpec};
