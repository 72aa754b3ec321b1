use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::ExperimentError;

/// Where artifacts go and whether they carry a timestamp line.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub timestamp: bool,
}

/// Writes CSV files that open with `# config_hash=<hex>` and, optionally,
/// `# generated_unix=<seconds>`.
#[derive(Debug)]
pub struct ArtifactWriter {
    opts: OutputOptions,
    hash: String,
    written: Vec<PathBuf>,
}

fn io_err(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl ArtifactWriter {
    pub fn new(opts: OutputOptions, hash: String) -> Result<Self, ExperimentError> {
        fs::create_dir_all(&opts.dir).map_err(|e| io_err(&opts.dir, e))?;
        Ok(ArtifactWriter {
            opts,
            hash,
            written: Vec::new(),
        })
    }

    /// Creates `name`, writes the comment preamble plus `extra` comment lines,
    /// then hands the writer to `body`.
    pub fn write<F>(&mut self, name: &str, extra: &[String], body: F) -> Result<PathBuf, ExperimentError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let path = self.opts.dir.join(name);
        let result = (|| {
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "# config_hash={}", self.hash)?;
            if self.opts.timestamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                writeln!(w, "# generated_unix={secs}")?;
            }
            for line in extra {
                writeln!(w, "# {line}")?;
            }
            body(&mut w)?;
            w.flush()
        })();
        result.map_err(|e| io_err(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}

/// Empty for `None`, scientific otherwise.
pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}
