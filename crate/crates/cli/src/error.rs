use serde::Serialize;
use serde_json::{json, Value};

use flatlab::constructions::ConstructionError;
use flatlab::cylinders::CylinderError;
use flatlab::divergence::DivergenceError;
use flatlab::ergodic::ErgodicError;
use flatlab::exactfield::FieldError;
use flatlab::saddles::SaddleError;
use flatlab::surface::io::SurfaceIoError;
use flatlab::SurfaceError;

/// A domain failure, reported on stderr as one JSON object and exit code 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub module: String,
    pub message: String,
    pub context: Value,
}

impl CliError {
    pub fn new(code: &str, module: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.into(),
            module: module.into(),
            message: message.into(),
            context: Value::Object(Default::default()),
        }
    }

    pub fn with_context(mut self, context: Value) -> Self {
        self.context = context;
        self
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::new("Io", "cli", e.to_string()).with_context(json!({ "path": path.display().to_string() }))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.module, self.message)
    }
}

impl std::error::Error for CliError {}

/// Variant name of an error enum, taken from its `Debug` form.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let d = format!("{e:?}");
    d.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or("Error").to_string()
}

/// Innermost variant name for wrapper variants such as `Surface(..)`.
fn leaf_code<E: std::fmt::Debug>(e: &E) -> String {
    let d = format!("{e:?}");
    let mut code = variant(e);
    let mut rest = d.as_str();
    while let Some(i) = rest.find('(') {
        let inner = &rest[i + 1..];
        let name: String = inner.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if name.is_empty() || name == "Error" || !name.starts_with(|c: char| c.is_ascii_uppercase()) {
            break;
        }
        code = name;
        rest = inner;
    }
    code
}

macro_rules! domain_error {
    ($ty:ty, $module:literal) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::new(&leaf_code(&e), $module, e.to_string())
            }
        }
    };
}

domain_error!(FieldError, "exactfield");
domain_error!(SurfaceError, "surface-kernel");
domain_error!(SurfaceIoError, "surface-kernel");
domain_error!(ConstructionError, "constructions");
domain_error!(CylinderError, "cylinders");
domain_error!(SaddleError, "saddles");
domain_error!(DivergenceError, "divergence-lab");
domain_error!(ErgodicError, "ergodic-lab");
