//! Record sources and atomic sinks.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use taxonomy_forge::pipeline::Executor;
use taxonomy_forge::record::{parse_record, DocumentRecord};
use tempfile::NamedTempFile;

use crate::error::{config, data, CliError, CliResult};

#[derive(Debug, Clone)]
pub enum Source {
    Stdin,
    File(PathBuf),
}

impl Source {
    /// `None` and `-` read standard input. Files must exist.
    pub fn new(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Source::Stdin),
            Some(p) if p == Path::new("-") => Ok(Source::Stdin),
            Some(p) => {
                require_file(p, "input")?;
                Ok(Source::File(p.to_path_buf()))
            }
        }
    }

    pub fn open(&self) -> CliResult<RecordReader> {
        let inner: Box<dyn BufRead> = match self {
            Source::Stdin => Box::new(BufReader::new(io::stdin())),
            Source::File(p) => Box::new(BufReader::new(File::open(p).map_err(|e| data(format!("{}: {e}", p.display())))?)),
        };
        Ok(RecordReader { inner, line: 0 })
    }

    /// Copies standard input to a temporary file so it can be read twice.
    pub fn rereadable(self, dir: &Path) -> CliResult<(Source, Option<NamedTempFile>)> {
        match self {
            Source::File(_) => Ok((self, None)),
            Source::Stdin => {
                let mut spool = NamedTempFile::new_in(dir)
                    .map_err(|e| config(format!("shuffle directory {}: {e}", dir.display())))?;
                io::copy(&mut io::stdin().lock(), spool.as_file_mut())?;
                Ok((Source::File(spool.path().to_path_buf()), Some(spool)))
            }
        }
    }
}

pub fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(config(format!("{what} file {} does not exist", path.display())))
    }
}

/// Newline-delimited JSON records with 1-based line numbers. Blank lines are
/// skipped.
pub struct RecordReader {
    inner: Box<dyn BufRead>,
    line: usize,
}

impl RecordReader {
    /// Next batch of up to `size` records, parsed on the executor's workers.
    /// Returns an empty batch at end of input.
    pub fn next_batch(&mut self, size: usize, exec: &Executor) -> CliResult<Vec<DocumentRecord>> {
        let mut lines = Vec::with_capacity(size);
        let mut buf = Vec::new();
        while lines.len() < size {
            buf.clear();
            if self.inner.read_until(b'\n', &mut buf).map_err(|e| data(format!("line {}: {e}", self.line + 1)))? == 0 {
                break;
            }
            self.line += 1;
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            if buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let text = String::from_utf8(std::mem::take(&mut buf))
                .map_err(|_| data(format!("line {}: invalid UTF-8", self.line)))?;
            lines.push((self.line, text));
        }
        exec.install(|| {
            lines
                .par_iter()
                .map(|(n, l)| parse_record(l, *n).map_err(CliError::from))
                .collect()
        })
    }

    /// Reads every remaining record.
    pub fn read_all(&mut self, exec: &Executor) -> CliResult<Vec<DocumentRecord>> {
        let mut out = Vec::new();
        loop {
            let batch = self.next_batch(4096, exec)?;
            if batch.is_empty() {
                return Ok(out);
            }
            out.extend(batch);
        }
    }
}

/// Standard output, or a temporary file renamed over the target on commit.
/// Dropping an uncommitted file sink deletes the partial output.
pub enum Sink {
    Stdout(BufWriter<io::Stdout>),
    File { writer: BufWriter<NamedTempFile>, path: PathBuf },
}

impl Sink {
    pub fn new(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Sink::Stdout(BufWriter::new(io::stdout()))),
            Some(p) if p == Path::new("-") => Ok(Sink::Stdout(BufWriter::new(io::stdout()))),
            Some(p) => {
                let dir = match p.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d,
                    _ => Path::new("."),
                };
                let tmp = NamedTempFile::new_in(dir)
                    .map_err(|e| config(format!("cannot write {}: {e}", p.display())))?;
                Ok(Sink::File {
                    writer: BufWriter::new(tmp),
                    path: p.to_path_buf(),
                })
            }
        }
    }

    pub fn writer(&mut self) -> &mut dyn Write {
        match self {
            Sink::Stdout(w) => w,
            Sink::File { writer, .. } => writer,
        }
    }

    pub fn write_records(&mut self, records: &[DocumentRecord]) -> CliResult<()> {
        let w = self.writer();
        for r in records {
            w.write_all(r.to_json_line().as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn commit(self) -> CliResult<()> {
        match self {
            Sink::Stdout(mut w) => Ok(w.flush()?),
            Sink::File { writer, path } => {
                let tmp = writer.into_inner().map_err(|e| data(e.error()))?;
                tmp.as_file().sync_all()?;
                tmp.persist(&path)
                    .map_err(|e| data(format!("cannot write {}: {}", path.display(), e.error)))?;
                Ok(())
            }
        }
    }
}

/// Writes `bytes` to `path` through a temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut sink = Sink::new(Some(path))?;
    sink.writer().write_all(bytes)?;
    sink.commit()
}

pub fn read_to_string(path: &Path, what: &str) -> CliResult<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| config(format!("{what} {}: {e}", path.display())))?;
    Ok(s)
}
