//! Vertex-cut graph partitioning over finite projective planes.
//!
//! Vertices are hashed onto the lines of the projective plane PG(2, q) and an
//! edge is placed at the unique point where its endpoints' lines meet. Every
//! vertex is then replicated on at most `q + 1 ≈ √n` of the `n = q² + q + 1`
//! partitions. The grid (`Edge2D`) and torus partitioners are included as
//! baselines, together with exact quality metrics and checkers for the
//! replication bounds.
//!
//! ```
//! use fpppart::{Edge, Method, Partitioner, PartitionerConfig, compute_metrics};
//!
//! let edges: Vec<Edge> = [(0, 1), (0, 3), (1, 5), (1, 4), (2, 0), (2, 3), (3, 4), (6, 4)]
//!     .into_iter()
//!     .map(Edge::from)
//!     .collect();
//! let p = Partitioner::new(PartitionerConfig::new(Method::Dfpp, 7)).unwrap();
//! let report = compute_metrics(&p.partition(&edges), 7).unwrap();
//! assert_eq!((report.replicas, report.vertices), (15, 7));
//! ```

pub mod field;
pub mod graph_io;
pub mod matching;
pub mod metrics;
pub mod par;
pub mod partition;
pub mod plane;

pub use field::{Field, FieldElement, FieldError, FieldSpec};
pub use graph_io::{AssignmentFormat, Edge, EdgeReader, GraphIoError, ReadOptions};
pub use matching::{perfect_matching, LinePointMatching};
pub use metrics::{compute_metrics, MetricsAccumulator, MetricsError, MetricsReport};
pub use partition::{
    EdgeAssignment, Method, PartitionError, Partitioner, PartitionerConfig, SurplusPolicy,
};
pub use plane::{PlaneError, ProjPlane, ProjPoint};
