//! Numerical and exact-symbolic verification of the chain of constructions
//! linking Laplace sequences of hyperbolic operators, Euler-Poisson-Darboux
//! seed solutions of the 2-dimensional Toda-Hirota equation, and Gelfand
//! hypergeometric functions on GM(2,N) evaluated by branch-tracked contour
//! integration.
//!
//! Module map:
//!
//! * [`fields`] — coefficient-field arithmetic (exact rational functions of
//!   `s = x - y` and truncated Taylor jets);
//! * [`laplace`] — hyperbolic operators, invariants, gauge conjugation,
//!   Laplace up/down transformations, normal-form sequences;
//! * [`contour`] — complex path quadrature with continuous branch tracking
//!   and Pochhammer double-loop cycles;
//! * [`hgf`] — evaluation of the Gelfand hypergeometric function, analytic
//!   derivatives under the integral sign, and residuals of its
//!   characterizing system;
//! * [`epd`] — EPD and contiguity operators acting on polynomial probes,
//!   with the exact operator identities;
//! * [`toda`] — seed tau functions, contiguity ladders, Backlund
//!   composition, and 2dTHE residual verification;
//! * [`oracle`] — independent reference implementations (Gauss series,
//!   tanh-sinh quadrature, finite differences) used only by tests and
//!   pre-build derivations.

pub mod contour;
pub mod epd;
pub mod fields;
pub mod hgf;
pub mod laplace;
pub mod oracle;
pub mod toda;

pub use contour::{
    build_pochhammer, integrate_multivalued, segment_regularization_factor, ContourError,
    ContourPath, LinFactor, MultivaluedIntegrand, PochhammerCycle, QuadSettings, Segment,
};
pub use fields::{
    field_partial, jet_combine, jet_log, mixed_log_partial, Axis, CRat, CoeffField, CombineKind,
    FieldError, FieldScalar, Jet2, PolyS, RationalS, C64,
};
pub use epd::{ContiguityOperator, EpdError, EpdOperator, RatFunc, TestFunction};
pub use hgf::{AlphaWeights, HgfError, HgfValue, PointConfig, ZMatrix};
pub use laplace::{
    epd_seed_operator, normal_sequence, Gauge, HyperbolicOperator, InvariantPair, LaplaceError,
    OperatorSequence, Provenance,
};
pub use oracle::{fd_mixed, fd_partial, gauss_2f1, segment_tanh_sinh, OracleError, SeriesSettings};
pub use toda::{verify_2dthe, SeedParams, TauEval, TauSequence, TodaError, TwoDtheReport};
