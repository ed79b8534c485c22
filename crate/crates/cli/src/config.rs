//! Option files: a TOML table whose keys are the long flag names of a
//! subcommand. Flags given on the command line win over the file.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

pub fn read_options<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Fills every `None` field of `$cli` from `$file`.
macro_rules! fill_from {
    ($cli:expr, $file:expr; $($field:ident),+ $(,)?) => {
        $( if $cli.$field.is_none() { $cli.$field = $file.$field; } )+
    };
}
pub(crate) use fill_from;
