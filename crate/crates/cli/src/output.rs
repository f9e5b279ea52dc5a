use crate::error::CliError;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Files of one run, held in memory until the run has succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn text(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body.into_bytes()));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        body.push('\n');
        self.text(name, body);
        Ok(())
    }

    pub fn toml<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let body = toml::to_string(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.text(name, body);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Stage every file under a temporary name, then rename them all. A
    /// failure removes whatever was staged.
    pub fn commit(self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
        let result = (|| {
            for (name, body) in &self.files {
                let tmp = dir.join(format!(".{name}.partial"));
                fs::write(&tmp, body).map_err(|e| io(&tmp, e))?;
                staged.push((tmp, dir.join(name)));
            }
            for (tmp, fin) in &staged {
                fs::rename(tmp, fin).map_err(|e| io(fin, e))?;
            }
            Ok(())
        })();
        if result.is_err() {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
        }
        result
    }
}
