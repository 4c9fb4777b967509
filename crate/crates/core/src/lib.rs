//! Conic Finsler geometry on a single chart.
//!
//! Metrics are evaluated on truncated Taylor jets, so fundamental tensors,
//! sprays, connections and curvatures come from exact derivatives. A
//! finite-difference mode is kept as an independent cross-check.

pub mod chart;
pub mod description;
pub mod error;
pub mod expand;
pub mod field;
pub mod hypersurface;
pub mod isoparametric;
pub mod jet;
pub mod legendre;
pub mod linalg;
pub mod metric;
pub mod phi;
pub mod spray;
pub mod zoo;

pub use chart::{CovectorField, RiemannianChart, VectorField};
pub use description::{FieldDescription, MetricDescription, SurfaceDescription};
pub use error::{GeometryError, Result};
pub use expand::DerivativeMode;
pub use field::{gradient, laplacians, s_curvature, LaplacianReport, ScalarField, VolumeForm};
pub use hypersurface::{
    finsler_unit_normal, induced_metric, kropina_equivalence_report, shape_operator, umbilic_minimal_flags,
    Immersion, KropinaComparison, Orientation, ShapeOptions, ShapeReport,
};
pub use isoparametric::{
    isoparametric_check, minkowski_dual_check, sample_levels, transnormal_check, IsoparametricVerdict, Sampling,
    SeedBox,
};
pub use jet::{Jet, JetSpace};
pub use legendre::{dual_jacobian, legendre, legendre_inverse, DualJacobian};
pub use metric::{fundamental_tensor, kropina_from_navigation, MetricKind, MetricModel, TensorPack};
pub use phi::{HelicoidModel, PhiFamily};
pub use spray::{flag_curvature, spray, spray_with_curvature, SprayData};
