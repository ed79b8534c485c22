//! Trained model bundles on disk.

use std::path::Path;

use loadsynth::format::{decode_bundle, encode_bundle, Provenance};
use loadsynth::Models;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable naming the default bundle path.
pub const BUNDLE_ENV: &str = "LOADSYNTH_BUNDLE";
pub const DEFAULT_BUNDLE: &str = "loadsynth.bundle";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub models: Models,
    pub provenance: Provenance,
}

impl ModelBundle {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Bundle(format!("cannot read bundle {}: {e}", path.display())))?;
        let (models, provenance) =
            decode_bundle(&bytes).map_err(|e| CliError::Bundle(format!("incompatible bundle {}: {e}", path.display())))?;
        models
            .check()
            .map_err(|e| CliError::Bundle(format!("incompatible bundle {}: {e}", path.display())))?;
        Ok(Self { models, provenance })
    }

    /// Writes through a temporary file so a failed write never leaves a
    /// truncated bundle behind.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let bytes = encode_bundle(&self.models, &self.provenance);
        let tmp = path.with_extension("partial");
        std::fs::write(&tmp, &bytes).map_err(|e| CliError::io(format!("cannot write {}", tmp.display()), e))?;
        std::fs::rename(&tmp, path).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
    }
}

/// Lowercase hex SHA-256 of a file.
pub fn fingerprint(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
