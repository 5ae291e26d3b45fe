//! Formula and specification construction from oracle answers.

pub mod construct;
pub mod finish;
pub mod oracle;
pub mod registry;
pub mod spec;

pub use construct::{
    construct_formula, construct_universal, run, Abort, ConstructError, FormulaConstruction, LogEntry, Mode,
    RunError, Statistics, Step, SynthesisResult,
};
pub use finish::{dnf_of_result, final_formula, minimized_formula, quantify_existential, quantify_universal};
pub use oracle::{Answer, Classification, FnOracle, FormulaOracle, FormulaSpecOracle, Membership, Oracle, SpecOracle};
pub use registry::{register_derived_clause, DerivedRegistry, RegistryError};
pub use spec::{construct_specification, SpecConstruction, SpecError, SpecPhase};
