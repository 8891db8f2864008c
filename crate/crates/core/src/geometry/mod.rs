//! Intrinsic and extrinsic geometry of the constraint manifold.

pub mod ambient;
pub mod curve;
pub mod embedding;
pub mod scalars;
pub mod spline;

pub use ambient::{AmbientSpace, Riemann};
pub use curve::{
    arclength_reparameterize, frenet_data, ArcWithLeads, Circle, CurveGeometry, CurveSample, Ellipse, FnCurve,
    FrenetData, Helix, Linear, ParametricCurve, SampledCurve, Vec3, KAPPA_MIN,
};
pub use embedding::{
    embedding_geometry, second_fundamental_form, Cylinder, Embedding, EmbeddingGeometry, FlatTorus4, Graph, Graph4,
    Plane, Sphere, Torus,
};
pub use scalars::{curvature_scalars, gauss_equation_residual, CurvatureScalars};
