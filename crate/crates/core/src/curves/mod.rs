//! Complex algebraic curves in `C²` and their rotations to special Lagrangian surfaces.

mod classify;
mod factor;
mod parse;
mod poly;
mod roots;
mod singular;

pub use classify::{
    classify_degree2, curve_to_lagrangian, poly_to_lagrangian, poly_total_curvature, total_curvature, Classification,
    ClassificationResult, ComplexCurve, ConicKind, LinearForm, NormalizedConic, TotalCurvature, REDUCIBLE_THRESHOLD,
};
pub use factor::{blow_down_poly, blow_up_poly, factor_top, points_at_infinity, LinearFactor, PlaneFactorization, ProjPoint};
pub use parse::{parse_poly, EXPONENT_CAP};
pub use poly::{homogeneous_parts, homogenize, rescale_poly, BiPoly, TriPoly};
pub use roots::{cluster, roots, CLUSTER_RADIUS};
pub use singular::{has_singularity_at_infinity, singular_points, SingularPoints, SINGULAR_RESIDUAL};
