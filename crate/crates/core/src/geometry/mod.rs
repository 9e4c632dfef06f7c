//! Point-process sampling and the distance laws of the Matern cluster process.
//!
//! Distances are in km throughout. Users of a cluster are ranked by their
//! distance to the cluster's base station; rank 1 is the closest user.

mod distance;
mod params;
mod sampling;

pub use distance::{
    cdf_inner_conditional, cdf_intercluster_distance, cdf_outer_conditional,
    cdf_rank_conditional, cdf_rank_distance, pdf_inner_conditional, pdf_intercluster_distance,
    pdf_outer_conditional, pdf_rank_conditional, pdf_rank_distance,
};
pub use params::{NetworkParams, RankQuery, RateTargets};
pub use sampling::{
    rank_by_distance, populate_clusters, sample_disk_offset, sample_mcp, sample_ppp, ClusterRealization, Point,
};
