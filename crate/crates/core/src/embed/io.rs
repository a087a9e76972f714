use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::datamodel::ActivityId;

use super::EmbeddingTable;

#[derive(Debug, Error)]
pub enum EmbeddingFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn perr(line: usize, message: impl Into<String>) -> EmbeddingFileError {
    EmbeddingFileError::Parse { line, message: message.into() }
}

/// Writes `dim vocab_size` then one `id v1 .. vdim` line per activity. Floats
/// use the shortest representation that parses back to the same value.
pub fn write_embeddings<W: Write>(table: &EmbeddingTable, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {}", table.dim(), table.len())?;
    for (id, v) in table.rows() {
        write!(w, "{id}")?;
        for x in v {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> io::Result<()> {
    write_embeddings(table, BufWriter::new(File::create(path)?))
}

pub fn parse_embeddings<R: BufRead>(r: R) -> Result<EmbeddingTable, EmbeddingFileError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| perr(1, "missing header"))??;
    let mut parts = header.split_whitespace();
    let mut num = |what: &str| -> Result<usize, EmbeddingFileError> {
        parts
            .next()
            .ok_or_else(|| perr(1, format!("header lacks {what}")))?
            .parse()
            .map_err(|e| perr(1, format!("bad {what}: {e}")))
    };
    let dim = num("dim")?;
    let n = num("vocab_size")?;
    if parts.next().is_some() {
        return Err(perr(1, "header has trailing fields"));
    }
    if dim == 0 {
        return Err(perr(1, "dim must be positive"));
    }

    let mut rows = Vec::with_capacity(n.min(1 << 20));
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id = fields.next().expect("non-blank line has a field");
        let id = ActivityId::new(id).map_err(|e| perr(lineno, e.to_string()))?;
        let v: Vec<f32> = fields
            .map(|f| {
                let x: f32 = f.parse().map_err(|e| perr(lineno, format!("bad float `{f}`: {e}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(perr(lineno, format!("non-finite value `{f}`")))
                }
            })
            .collect::<Result<_, _>>()?;
        if v.len() != dim {
            return Err(perr(lineno, format!("expected {dim} values, found {}", v.len())));
        }
        rows.push((id, v));
        if rows.len() > n {
            return Err(perr(lineno, format!("more rows than the declared {n}")));
        }
    }
    if rows.len() != n {
        return Err(perr(rows.len() + 2, format!("declared {n} rows but found {}", rows.len())));
    }
    EmbeddingTable::from_rows(dim, rows).map_err(|e| perr(0, e.to_string()))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingFileError> {
    parse_embeddings(BufReader::new(File::open(path)?))
}
