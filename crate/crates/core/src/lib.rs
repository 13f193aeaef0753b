//! Reference kernel for GRIP, a gradual dependent type theory with
//! internal precision and strict propositions.
//!
//! - [`syntax`]: terms, levels, contexts, substitution
//! - [`surface`]: `.grip` parser and printer
//! - [`eval`]: reduction rules and normalization
//! - [`typeck`]: bidirectional checking and conversion
//! - [`prelude`]: the precision constants
//! - [`precision`]: precision deciders with replayable witnesses
//! - [`grip_up`]: the monotone fragment, its translation and self-precision
//! - [`oracle`]: bounded executable model

pub mod eval;
pub mod grip_up;
pub mod oracle;
pub mod precision;
pub mod prelude;
pub mod surface;
pub mod syntax;
pub mod typeck;

pub use syntax::{Context, Level, Sort, Term, Tm};
