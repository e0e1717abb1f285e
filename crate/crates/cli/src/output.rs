//! Report files and the mapping from failures to exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use isodeform::Error;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
/// Output could not be written.
pub const EXIT_IO: u8 = 74;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Lib(e) if e.is_validation() => EXIT_VALIDATION,
            Failure::Lib(_) => EXIT_PRECONDITION,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(s) => write!(f, "usage: {s}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(s) => write!(f, "io: {s}"),
        }
    }
}

/// Variant name of a library error, e.g. `Resonance`.
pub fn error_kind(e: &Error) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric()).collect()
}

/// Duplicate exponents are a special case of a genericity failure.
fn error_category(e: &Error) -> &'static str {
    match e {
        Error::DuplicateMu(..) | Error::GenericityFailure { .. } => "GenericityFailure",
        e if e.is_validation() => "Validation",
        _ => "Precondition",
    }
}

pub fn error_json(e: &Error) -> Value {
    json!({
        "kind": error_kind(e),
        "category": error_category(e),
        "message": e.to_string(),
        "detail": format!("{e:?}"),
    })
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let text = isodeform::json::to_canonical_string(value).map_err(|e| Failure::Io(e.to_string()))?;
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use isodeform::algebra::C64;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Failure::Lib(Error::DuplicateMu(0, 1)).exit_code(), EXIT_VALIDATION);
        assert_eq!(Failure::Lib(Error::Resonance { k: 1, a: 0, b: 1 }).exit_code(), EXIT_PRECONDITION);
        assert_eq!(Failure::Usage("x".into()).exit_code(), EXIT_USAGE);
        let g = Error::GenericityFailure { k: 0, k2: 1, root: C64::new(0.0, 0.0) };
        assert_eq!(error_kind(&g), "GenericityFailure");
        assert_eq!(error_json(&Error::DuplicateMu(0, 1))["category"], "GenericityFailure");
    }
}
