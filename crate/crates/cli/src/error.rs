use hhokit_core::covering::CoveringError;
use hhokit_core::geometry::GeometryError;
use hhokit_core::solver::SolverError;
use hhokit_core::KernelError;

/// Everything here is an input error and maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid problem file: {0}")]
    Toml(String),
    #[error("{what}: parse error at column {column} of '{expr}': {msg}")]
    Parse { what: String, expr: String, column: usize, msg: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl CliError {
    /// Message with the source line of a failing expression when it can be found.
    pub fn render(&self, source: Option<&str>) -> String {
        if let (CliError::Parse { expr, column, .. }, Some(src)) = (self, source) {
            for (k, line) in src.lines().enumerate() {
                if let Some(at) = line.find(&format!("\"{expr}\"")) {
                    let col = line[..at].chars().count() + 1 + column;
                    return format!("line {}, column {col}: {self}", k + 1);
                }
            }
        }
        self.to_string()
    }
}
