use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use navvi_core::world::{load_scene, SceneDescription, SceneError};

#[derive(Debug, Error)]
pub enum LookupError {
    #[error("scene name {0:?} may only use letters, digits, '-' and '_'")]
    BadName(String),
    #[error("no scene {name:?} in {dir}")]
    NotFound { name: String, dir: PathBuf },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: SceneError },
}

/// Loads `<dir>/<name>.json`. Names are bare identifiers so a client can
/// never reach outside the scene directory.
pub fn load_named(dir: &Path, name: &str) -> Result<SceneDescription, LookupError> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !ok {
        return Err(LookupError::BadName(name.into()));
    }
    let path = dir.join(format!("{name}.json"));
    if !path.is_file() {
        return Err(LookupError::NotFound { name: name.into(), dir: dir.to_path_buf() });
    }
    load_path(&path)
}

pub fn load_path(path: &Path) -> Result<SceneDescription, LookupError> {
    let invalid = |source| LookupError::Invalid { path: path.to_path_buf(), source };
    let file = File::open(path).map_err(|e| invalid(SceneError::Io(e)))?;
    load_scene(file).map_err(invalid)
}

/// CLI lookup: an existing file path wins, otherwise the argument is a
/// scene name under `dir`.
pub fn load_arg(dir: &Path, arg: &str) -> Result<SceneDescription, LookupError> {
    let as_path = Path::new(arg);
    if as_path.is_file() {
        load_path(as_path)
    } else {
        load_named(dir, arg.strip_suffix(".json").unwrap_or(arg))
    }
}
