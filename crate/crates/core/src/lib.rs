//! Flat fronts in hyperbolic 3-space and de Sitter 3-space built from
//! holomorphic Weierstrass data, their singular curves and the invariants of
//! their cuspidal edges.

pub mod data;
pub mod error;
pub mod expr;
pub mod frame;
pub mod front;
pub mod invariants;
pub mod jet;
pub mod locus;
pub mod lorentz;
pub mod mat2;
pub mod oracle;

pub use data::{AlphaBeta, Domain, WeierstrassData};
pub use error::{Error, Result};
pub use frame::{frame_grid, integrate_frame, Frame, FrameGrid, FrameOptions};
pub use expr::{eval_jet, EvalCtx, Expr};
pub use front::{
    field_sample, lambda_jet, surface_jet, surface_jets, Branch, FieldSample, LambdaJet, Surface,
    SurfaceJet,
};
pub use invariants::{
    c_values, classify, classify_curve, closed_form_invariants, cuspidal_arcs, curve_report, special_points,
    swallowtail_condition, torsion_derivative, torsion_from_c, torsion_zeros, ClassificationRecord, ClassifyOptions,
    CurveReport, Estimate, InvariantSet, SingularityClass, SpecialPoint, TorsionZero,
};
pub use jet::Jet;
pub use locus::{
    find_seeds, trace_all, trace_curve, CurveSample, EndReason, SingularCurve, TraceOptions,
};
pub use lorentz::{HermVector, Model, Tag};
pub use mat2::{C64, M2};
pub use oracle::{
    covariant_derivative, definition_invariants, duality_residuals, lemma_suite, numeric_partials,
    signed_area_density, LemmaReport, OracleInvariants, Sampler,
};
