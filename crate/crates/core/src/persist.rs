//! Plain-text height-field files.
//!
//! ```text
//! cmclab-field v1
//! <r> <n_rho> <n_theta>
//! <i> <j> <f>          one line per interior node, i-major
//! <n_rho> <j> <g>      optional boundary ring; omitted means g = 0
//! ```
//!
//! Values are written with 17 significant digits, so a round trip is exact.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::DiskGrid;

pub const FIELD_HEADER: &str = "cmclab-field v1";

pub fn write_field<W: Write>(mut out: W, field: &HeightField, grid: &DiskGrid) -> Result<()> {
    field.ensure_matches(grid)?;
    let (nr, nt) = (grid.n_rho(), grid.n_theta());
    writeln!(out, "{FIELD_HEADER}")?;
    writeln!(out, "{:.16e} {nr} {nt}", grid.radius())?;
    for i in 0..nr {
        for j in 0..nt {
            writeln!(out, "{i} {j} {:.16e}", field.get(i, j))?;
        }
    }
    if field.first_nonzero_boundary().is_some() {
        for (j, g) in field.boundary().iter().enumerate() {
            writeln!(out, "{nr} {j} {g:.16e}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_field(path: impl AsRef<Path>, field: &HeightField, grid: &DiskGrid) -> Result<()> {
    let file = fs::File::create(path)?;
    write_field(BufWriter::new(file), field, grid)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

/// Parses one node line and checks it is node `(i, j)`.
fn node_value(text: &str, line: usize, i: usize, j: usize) -> Result<f64> {
    let mut toks = text.split_whitespace();
    let fi: usize = parse_num(toks.next(), line, "ring index")?;
    let fj: usize = parse_num(toks.next(), line, "angular index")?;
    let v: f64 = parse_num(toks.next(), line, "value")?;
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    if (fi, fj) != (i, j) {
        return Err(parse_err(line, format!("expected node ({i}, {j}), found ({fi}, {fj})")));
    }
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {v}")));
    }
    Ok(v)
}

pub fn read_field<R: BufRead>(input: R) -> Result<(DiskGrid, HeightField)> {
    let mut lines = input.lines().enumerate().map(|(k, l)| (k + 1, l));
    let mut next = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((n, Ok(l))) => Ok(Some((n, l))),
            Some((_, Err(e))) => Err(e.into()),
            None => Ok(None),
        }
    };

    match next()? {
        Some((_, l)) if l.trim_end() == FIELD_HEADER => {}
        Some((n, l)) => return Err(parse_err(n, format!("expected header '{FIELD_HEADER}', found '{l}'"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let (n, dims) = next()?.ok_or_else(|| parse_err(2, "missing dimension line"))?;
    let mut toks = dims.split_whitespace();
    let r: f64 = parse_num(toks.next(), n, "radius")?;
    let nr: usize = parse_num(toks.next(), n, "n_rho")?;
    let nt: usize = parse_num(toks.next(), n, "n_theta")?;
    if toks.next().is_some() {
        return Err(parse_err(n, "trailing tokens"));
    }
    let grid = DiskGrid::new(r, nr, nt)?;

    let mut values = Vec::with_capacity(grid.len());
    for i in 0..nr {
        for j in 0..nt {
            let expected_line = 3 + values.len();
            let (n, l) = next()?
                .ok_or_else(|| parse_err(expected_line, format!("unexpected end of file, expected node ({i}, {j})")))?;
            values.push(node_value(&l, n, i, j)?);
        }
    }
    let mut boundary = vec![0.0; nt];
    if let Some((n, l)) = next()? {
        boundary[0] = node_value(&l, n, nr, 0)?;
        for (j, slot) in boundary.iter_mut().enumerate().skip(1) {
            let expected_line = n + j;
            let (n, l) = next()?
                .ok_or_else(|| parse_err(expected_line, format!("unexpected end of file, expected boundary node {j}")))?;
            *slot = node_value(&l, n, nr, j)?;
        }
        if let Some((n, l)) = next()? {
            if !l.trim().is_empty() {
                return Err(parse_err(n, "unexpected content after the boundary ring"));
            }
        }
    }
    let field = HeightField::from_parts(&grid, values, boundary)?;
    Ok((grid, field))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<(DiskGrid, HeightField)> {
    let file = fs::File::open(path)?;
    read_field(BufReader::new(file))
}
