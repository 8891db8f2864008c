//! Potential frames, the twist tensor and connection curvatures of the normal
//! bundle.

pub mod connection;
pub mod frame;
pub mod twist;

pub use connection::{ds_identity_residual, normal_curvature, normal_curvature_from_connection, NormalCurvature};
pub use frame::{
    ConstantlyRotated, CurveFrameField, CurvePotentialFrame, DefaultNormals, FrameField, RotatingNormals, ThetaProfile,
};
pub use twist::{
    curve_link_twist, curve_potential_twist, curve_profile_twist, curve_twist_decomposition, potential_twist,
    TwistDecomposition, TwistTensor,
};
