use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qer_core::codes::Code;
use qer_core::recovery::Method;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("solver failed at every grid point")]
    AllFailed,
    #[error(transparent)]
    Core(#[from] qer_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::AllFailed | CliError::Core(qer_core::Error::NotConverged { .. }) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(qer_core::Error::Io(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

/// `five-qubit`, `leung4`, or `file:PATH` holding a JSON code description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeArg {
    FiveQubit,
    Leung4,
    File(PathBuf),
}

impl FromStr for CodeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "five-qubit" => Ok(CodeArg::FiveQubit),
            "leung4" => Ok(CodeArg::Leung4),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(CodeArg::File(p.into())),
                _ => Err(format!("unknown code {s:?}; expected five-qubit, leung4 or file:PATH")),
            },
        }
    }
}

impl fmt::Display for CodeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeArg::FiveQubit => f.write_str("five-qubit"),
            CodeArg::Leung4 => f.write_str("leung4"),
            CodeArg::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl CodeArg {
    pub fn load(&self) -> Result<Code, CliError> {
        match self {
            CodeArg::FiveQubit => Ok(Code::five_qubit()?),
            CodeArg::Leung4 => Ok(Code::leung4()),
            CodeArg::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Code::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub code: CodeArg,
    pub gamma_start: f64,
    pub gamma_stop: f64,
    pub steps: usize,
    pub recoveries: Vec<Method>,
    pub tol: f64,
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            code: CodeArg::FiveQubit,
            gamma_start: 0.0,
            gamma_stop: 0.5,
            steps: 26,
            recoveries: vec![Method::Optimal, Method::Qec, Method::None],
            tol: 1e-8,
            jobs: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let (a, b) = (self.gamma_start, self.gamma_stop);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(CliError::Config(format!("gamma range [{a}, {b}] must lie within [0, 1]")));
        }
        if self.steps == 0 {
            return Err(CliError::Config("steps must be at least 1".into()));
        }
        if self.steps == 1 && a != b {
            return Err(CliError::Config("a single step needs gamma-start = gamma-stop".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Config(format!("tolerance {} must lie in (0, 1)", self.tol)));
        }
        if self.recoveries.is_empty() {
            return Err(CliError::Config("no recoveries requested".into()));
        }
        if let Some(m) = self
            .recoveries
            .iter()
            .find(|m| !matches!(m, Method::Optimal | Method::Qec | Method::None))
        {
            return Err(CliError::Config(format!("recovery {m} has no sweep column")));
        }
        Ok(())
    }

    /// Uniform grid with exact endpoints.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.gamma_start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.gamma_stop
                } else {
                    self.gamma_start + (self.gamma_stop - self.gamma_start) * k as f64 / last
                }
            })
            .collect()
    }
}

/// Drops repeated methods, keeping first occurrences.
pub fn dedup_methods(methods: Vec<Method>) -> Vec<Method> {
    let mut out = Vec::with_capacity(methods.len());
    for m in methods {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}
