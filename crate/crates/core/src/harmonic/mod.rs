//! Mean-value tools, the zero radial integral angle, the bounded-energy loop
//! through a boundary point, and quadratic-growth tests for planar functions.

pub mod curve;
pub mod lemma;
pub mod quadratic;

pub use curve::{PiecewiseCurve, Segment};
pub use lemma::{
    build_lemma_curve, find_theta_r, mean_value_defect, radial_integral, verify_curve_properties,
    Branch, CurveReport, LemmaCurve, ThetaR,
};
pub use quadratic::{
    box_samples, fit_samples, quadratic_fit, superquadratic_witnesses, QuadraticModel, Witness,
    WitnessGrid, WitnessSearch,
};
