//! Brinkmann metrics, their connection and curvature, and vector-field tools.

pub mod connection;
pub mod fields;
pub mod metric;
pub mod oracle;

pub use connection::{christoffel, ricci, sup_norm, ChristoffelTable, Connection};
pub use fields::{
    bracket, causal_character, dv_parallel_defect, is_ricci_flat, killing_defect,
    verify_transversality, CausalCharacter, RicciFlatReport, TransversalityReport, VectorField,
};
pub use metric::{
    identity_gamma, quadratic_form, BrinkmannMetric, DomainBox, GridSpec, Matrix4, Point,
    Tolerances, COORDS, U, V, X, Y,
};
