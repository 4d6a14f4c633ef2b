//! Arithmetic of Atkin-Lehner quotients `X_D^(m)` of Shimura curves.
//!
//! The crate is layered bottom-up:
//!
//! * [`arith`]: factorization, primality, Kronecker symbols, discriminants.
//! * [`imagquad`]: imaginary quadratic orders, binary forms, class numbers
//!   and class groups, ideals of maximal orders.
//! * [`classfield`]: finite abelian groups, Smith normal form, ray class
//!   groups of `Q(sqrt -l)` with prime conductor.
//! * [`quatsigma`]: optimal-embedding sums `Sigma_n(D)`, Hecke traces,
//!   genera of `X_D` and of its quotients.
//! * [`pointcount`]: point counts over `F_{p^r}` and Weil-bound checks.
//! * [`local`]: solubility at each place, the adelic criterion for
//!   quotients, local analysis of twists.
//! * [`global`]: rational CM points, ray-class non-surjection, descent,
//!   degree-one divisors.
//!
//! Every routine works in exact integer or rational arithmetic.

pub mod arith;
pub mod classfield;
pub mod error;
pub mod global;
pub mod imagquad;
pub mod local;
pub mod pointcount;
pub mod quatsigma;

pub use classfield::{ray_class_group, surjection_exists, FiniteAbelianGroup};
pub use error::{Error, Result};
pub use global::{
    cm_rational_point, degree_one_divisor, descent_verdict, jordan_empty_over_k, DescentVerdict,
    EvidenceKind, ExternalCertificates, GlobalEvidence,
};
pub use imagquad::{class_group, class_number, QuadOrder, QuadraticForm};
pub use local::{
    adelic_quotient, quotient_local, twist_everywhere_local, twist_local, AdelicReport,
    LocalStatus, LocalVerdict, Place, TwistReport,
};
pub use pointcount::{weil_zeta_check, CountRequest, CurveKind, WeilReport};
pub use quatsigma::{
    genus_curve, genus_quotient, sigma_value, trace_hecke, QuaternionDisc, QuotientGenus,
};
