//! CSV report files with a provenance comment line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Destination directory plus the provenance stamped on every file.
pub struct Reporter {
    dir: PathBuf,
    command: &'static str,
    config_hash: String,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Reporter {
    pub fn new(dir: &Path, command: &'static str, config_hash: String, seed: u64) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            config_hash,
            seed,
            written: Vec::new(),
        })
    }

    pub fn header_line(&self) -> String {
        format!(
            "# reservoir {VERSION} command={} config_sha256={} seed={}\n",
            self.command, self.config_hash, self.seed
        )
    }

    /// Write `name` with the header line, a column row and `rows`.
    pub fn write<R, I>(&mut self, name: &str, columns: &[&str], rows: I) -> CliResult<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut body = csv::Writer::from_writer(Vec::new());
        body.write_record(columns)?;
        for row in rows {
            let fields: Vec<String> = row.into_iter().map(|f| f.as_ref().to_string()).collect();
            body.write_record(&fields)?;
        }
        let body = body.into_inner().map_err(|e| CliError::io(name, e.into_error()))?;
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        file.write_all(self.header_line().as_bytes())
            .and_then(|_| file.write_all(&body))
            .map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}
