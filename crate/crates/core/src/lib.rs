//! Many-objective search-based unit test generation with performance-aware
//! secondary heuristics, over a small object-oriented language.

pub mod experiment;
pub mod fitness;
pub mod interp;
pub mod mutation;
pub mod program;
pub mod search;
pub mod subject;
pub mod testcase;

pub use subject::Subject;
