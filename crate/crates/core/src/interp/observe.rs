use serde::Serialize;

use super::FaultKind;

/// A shallow rendering of a value: objects show their fields, and nested
/// references only their class or length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Observation {
    Void,
    Int(i64),
    /// Bit pattern of a float.
    Float(u64),
    Bool(bool),
    Null,
    Object { class: usize, fields: Vec<Observation> },
    Array(Vec<i64>),
    ObjectRef(usize),
    ArrayRef(usize),
}

/// What a regression oracle would assert about one test run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Observations {
    /// Value produced by each test statement that ran.
    pub values: Vec<Observation>,
    pub fault: Option<FaultKind>,
    /// Final state of every object-valued test variable.
    pub final_state: Vec<Observation>,
}
