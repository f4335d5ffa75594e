//! Half-plane intersection and planar convex hulls on the simulated machine.
//!
//! Geometry is exact: coordinates are arbitrary-precision rationals and all
//! predicates are evaluated exactly. Points and half-planes live in host-side
//! tables; the machine moves one-word handles into those tables and compares
//! them through [`pem_primitives::KeyOrder`] closures, so every memory access
//! of an algorithm is charged while the geometric kernels stay pure.
//!
//! The intersection of half-planes around an interior point `O` is computed
//! by sampling a few planes, cutting the plane into sectors at the vertices of
//! the sample's intersection, sending every plane to the sectors it cuts,
//! filtering dominated planes per sector and recursing.

mod arrangement;
mod brute;
mod dual;
mod filter;
mod geom;
mod maxima;
mod polling;
mod recursion;
mod sectors;
mod seqhull;
mod split;
mod util;

use pem_machine::MachineError;
use pem_primitives::PemError;

pub use arrangement::{locate_points, preprocess_arrangement, SlabArrangement};
pub use brute::halfplane_brute;
pub use dual::{dualize, dualize_vertices, undualize_chain};
pub use filter::{filter_all, filter_sector};
pub use geom::{
    angle_cmp, frac, orient, parse_planes, parse_points, parse_q, q, HalfPlane, HullChain, Point2, Sector, Q,
};
pub use maxima::{maxima_par, maxima_seq};
pub use polling::{polling_sample, PollOutcome, PollRule};
pub use recursion::{convex_hull_2d, hull_main, HullConfig, HullOutcome, HullRound, HullStats};
pub use sectors::{expand_by_sector, find_sectors, SectorInterval};
pub use seqhull::{intersect_exact, intersect_seq};
pub use split::split_upper_lower;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HullError {
    #[error(transparent)]
    Pem(#[from] PemError),
    #[error("the intersection is unbounded")]
    Unbounded,
    #[error("the interior point does not strictly satisfy half-plane {0}")]
    Infeasible(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Parse(String),
}

impl From<MachineError> for HullError {
    fn from(e: MachineError) -> Self {
        HullError::Pem(e.into())
    }
}

pub type HullResult<T> = std::result::Result<T, HullError>;
