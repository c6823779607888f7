//! Discrete energy on wedge grids and the Lyapunov–Schmidt reduction onto the
//! one-parameter family of edge spikes.

mod discrete;
mod profile2d;
mod solve;

pub use discrete::DiscreteProblem;
pub use profile2d::discrete_cone_profile;
pub use solve::*;
