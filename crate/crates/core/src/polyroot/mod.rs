//! Exact and guaranteed real-root machinery.
//!
//! [`RealPolynomial`] keeps exact rational coefficients; [`isolate`] counts
//! roots with Sturm sequences and refines them inside guaranteed brackets;
//! [`closed_form`] holds the Cardano and Ferrari formulas used as a second,
//! independent route.

pub mod closed_form;
pub mod isolate;
pub mod polynomial;

pub use closed_form::{cardano_real_roots, ferrari_real_roots, QuarticRoots};
pub use isolate::{
    count_roots_between, descartes_sign_changes, has_multiple_root_in, isolate_positive_roots,
    isolate_roots_in, real_roots_in, refine_root, RootBracket, SturmSequence, DEFAULT_REFINE_TOL,
};
pub use polynomial::{rational_from_f64, rational_to_f64, RealPolynomial};
