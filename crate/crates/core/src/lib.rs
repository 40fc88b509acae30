//! Multi-norms on weighted `l^p` spaces: evaluation, axiom audits, growth
//! rates, summing constants, matrix laws, decompositions and multi-bounded
//! operators.

pub mod acceptance;
pub mod decompositions;
pub mod error;
pub mod matrix_laws;
pub mod multinorms;
pub mod operators;
pub mod optim;
pub mod spaces;
pub mod summing;

pub use decompositions::{Decomposition, FamilyOfDecompositions, Verdict};
pub use error::{Error, Result};
pub use matrix_laws::{SpecialDecomposition, SpecialKind};
pub use multinorms::{evaluate, AxiomReport, MultiNormSpec};
pub use operators::MBNormResult;
pub use optim::{NormValue, OptimConfig, ValueKind, Witness};
pub use spaces::{Index, Matrix, MatrixOp, ScalarField, SpaceSpec, Tuple, Vector, C64};
