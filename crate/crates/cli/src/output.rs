//! Output files: a `#` header echoing the resolved configuration, then CSV
//! rows, then `#` footer lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_VERSION: u32 = 1;

/// Resolved configuration, in the order it is echoed.
#[derive(Debug, Clone, Default)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        let mut h = Self::default();
        h.set("command", command);
        h
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# frogtree {VERSION}")?;
        for (k, v) in &self.entries {
            writeln!(w, "# {k} = {v}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// A CSV table framed by the header and free-form footer lines.
pub struct CsvOut {
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    pub fn create(path: Option<&Path>, header: &Header) -> Result<Self> {
        let mut w = open(path)?;
        header.write_to(&mut w)?;
        Ok(Self {
            writer: csv::Writer::from_writer(w),
        })
    }

    pub fn row(&mut self, row: &impl Serialize) -> Result<()> {
        self.writer.serialize(row)?;
        Ok(())
    }

    pub fn finish(self, footer: &[String]) -> Result<()> {
        let mut w = self.writer.into_inner().map_err(|e| e.into_error())?;
        for line in footer {
            writeln!(w, "# {line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `value` with the schema version and resolved configuration.
pub fn write_json(path: &Path, header: &Header, value: &impl Serialize) -> Result<()> {
    let report = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "version": VERSION,
        "config": header.to_json(),
        "report": value,
    });
    let mut w = open(Some(path))?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
