//! Brute-force reference minima for small instances.
//!
//! Both oracles are independent of the branch-and-bound machinery: they only
//! evaluate the objective and the constraint residuals.

mod grid;
mod vertex;

pub use grid::{box_hint, grid_search, lipschitz_bound};
pub use vertex::vertex_enumerate_box;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::QcqpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    VertexEnum,
}

impl OracleMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleMethod::Grid => "grid",
            OracleMethod::VertexEnum => "vertex_enum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub x: DVector<f64>,
    pub method: OracleMethod,
    /// Grid spacing; 0 for vertex enumeration.
    pub resolution: f64,
    pub guarantee: String,
    /// Bound on `value - true minimum`; 0 when exact.
    pub tolerance: f64,
}

pub trait Oracle {
    /// Name used to select the oracle from the command line.
    fn name(&self) -> &'static str;

    fn run(&self, inst: &QcqpInstance) -> Result<OracleResult>;
}

pub struct GridOracle {
    pub resolution: f64,
}

impl Oracle for GridOracle {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn run(&self, inst: &QcqpInstance) -> Result<OracleResult> {
        grid_search(inst, self.resolution, None)
    }
}

pub struct VertexOracle;

impl Oracle for VertexOracle {
    fn name(&self) -> &'static str {
        "vertex"
    }

    fn run(&self, inst: &QcqpInstance) -> Result<OracleResult> {
        vertex_enumerate_box(inst)
    }
}

#[derive(Default)]
pub struct OracleRegistry {
    entries: Vec<Box<dyn Oracle>>,
}

impl OracleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Grid search at `resolution` plus box-vertex enumeration.
    pub fn standard(resolution: f64) -> Self {
        let mut reg = Self::new();
        reg.register(Box::new(GridOracle { resolution }));
        reg.register(Box::new(VertexOracle));
        reg
    }

    /// Replaces any oracle already registered under the same name.
    pub fn register(&mut self, oracle: Box<dyn Oracle>) {
        self.entries.retain(|o| o.name() != oracle.name());
        self.entries.push(oracle);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Oracle> {
        self.entries
            .iter()
            .find(|o| o.name() == name)
            .map(|o| o.as_ref())
            .ok_or_else(|| Error::UnknownMethod(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|o| o.name()).collect()
    }

    pub fn run(&self, name: &str, inst: &QcqpInstance) -> Result<OracleResult> {
        self.get(name)?.run(inst)
    }
}
