//! CSV writers. Every file starts with `#` comment lines carrying the
//! resolved configuration, followed by a header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub struct CsvOutput {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOutput {
    pub fn create(path: &Path, comments: &[String], header: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut buf = BufWriter::new(file);
        for c in comments {
            for line in c.lines() {
                writeln!(buf, "# {line}").map_err(|e| CliError::io(path, e))?;
            }
        }
        let writer = csv::Writer::from_writer(buf);
        let mut out = Self {
            path: path.to_path_buf(),
            writer,
        };
        out.row(header.iter().map(String::as_str))?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| self.csv_err(e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }

    fn csv_err(&self, e: csv::Error) -> CliError {
        CliError::io(&self.path, std::io::Error::other(e.to_string()))
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
