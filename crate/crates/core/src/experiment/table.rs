//! Schema-tagged CSV files: a `# schema=…` line followed by a headed table.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCHEMA: &str = "illposed-v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Writes the schema line, then whatever `body` emits.
pub fn write_tagged<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = format!("# schema={SCHEMA}\n").into_bytes();
    body(&mut buf)?;
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let schema = first
        .strip_prefix("# schema=")
        .ok_or_else(|| Error::Schema(format!("{} has no schema line", path.display())))?
        .trim()
        .to_string();
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let headers = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok(Table { schema, headers, rows })
}

impl Table {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name}")))
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[j].parse::<f64>()
                    .map_err(|_| Error::Schema(format!("column {name}: not a number: {:?}", r[j])))
            })
            .collect()
    }

    pub fn column_usize(&self, name: &str) -> Result<Vec<usize>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[j].parse::<usize>()
                    .map_err(|_| Error::Schema(format!("column {name}: not an index: {:?}", r[j])))
            })
            .collect()
    }

    /// Value column of a two-column `key,value` table.
    pub fn lookup(&self, key: &str) -> Result<&str> {
        self.rows
            .iter()
            .find(|r| r[0] == key)
            .map(|r| r[1].as_str())
            .ok_or_else(|| Error::Schema(format!("missing summary key {key}")))
    }
}
