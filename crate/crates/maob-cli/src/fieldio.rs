//! Text dump of a nodal field. The format is a bit-exact contract:
//!
//! ```text
//! MAOB-FIELD v1
//! <n> <q>
//! <lo> <hi> <res>     (one line per axis)
//! <value or nan>      (one node per line, row-major)
//! ```
//!
//! Values carry 17 significant digits, so a write/read cycle is lossless;
//! nodes outside the computational domain are written as `nan`.

use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use maob::{Grid, ScalarField};

pub const MAGIC: &str = "MAOB-FIELD v1";

#[derive(Debug, Clone)]
pub struct FieldFile {
    pub field: ScalarField,
    pub q: f64,
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_field(path: &Path, field: &ScalarField, q: f64) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "{} {}", field.grid.dim, format_value(q))?;
    for a in 0..field.grid.dim {
        writeln!(
            w,
            "{} {} {}",
            format_value(field.grid.lo[a]),
            format_value(field.grid.hi[a]),
            field.grid.res[a]
        )?;
    }
    for i in 0..field.grid.node_count() {
        if field.mask[i] {
            writeln!(w, "{}", format_value(field.values[i]))?;
        } else {
            writeln!(w, "nan")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let magic = lines.next().ok_or_else(|| anyhow!("empty field file"))?;
    if magic.trim() != MAGIC {
        bail!("not a field file: first line {magic:?}, expected {MAGIC:?}");
    }
    let header = lines.next().ok_or_else(|| anyhow!("missing dimension line"))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .ok_or_else(|| anyhow!("missing n"))?
        .parse()
        .context("dimension")?;
    let q: f64 = it.next().ok_or_else(|| anyhow!("missing q"))?.parse().context("exponent q")?;
    if it.next().is_some() {
        bail!("trailing tokens on the dimension line");
    }
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut res = Vec::with_capacity(n);
    for a in 0..n {
        let line = lines.next().ok_or_else(|| anyhow!("missing axis line {a}"))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            bail!("axis line {a}: expected `lo hi res`, got {line:?}");
        }
        lo.push(parts[0].parse::<f64>().with_context(|| format!("axis {a} lo"))?);
        hi.push(parts[1].parse::<f64>().with_context(|| format!("axis {a} hi"))?);
        res.push(parts[2].parse::<usize>().with_context(|| format!("axis {a} res"))?);
    }
    let grid = Grid::new(lo, hi, res).map_err(|e| anyhow!("bad grid header: {e}"))?;
    let count = grid.node_count();
    let mut values = Vec::with_capacity(count);
    let mut mask = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if i >= count {
            bail!("more than {count} node values");
        }
        if t == "nan" {
            values.push(0.0);
            mask.push(false);
        } else {
            values.push(t.parse::<f64>().with_context(|| format!("node value {i}"))?);
            mask.push(true);
        }
    }
    if values.len() != count {
        bail!("expected {count} node values, found {}", values.len());
    }
    let field = ScalarField::new(grid, values, mask).map_err(|e| anyhow!("bad field: {e}"))?;
    Ok(FieldFile { field, q })
}
