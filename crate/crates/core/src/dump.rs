//! Plain-text dumps of operators and states.
//!
//! First line `basis=<tag> dim=<d>`. An operator follows as `d` lines, one
//! per matrix row, each holding `d` pairs `re im`. A state follows as `d`
//! lines of a single `re im` pair. Numbers use `{:.17e}` so a dump parses
//! back bit-exactly.

use std::fmt::Write as _;

use faer::Mat;

use crate::error::{Error, Result};
use crate::fock::{Basis, LinearOperator, StateVector};
use crate::C64;

fn header(basis: Basis) -> String {
    format!("basis={basis} dim={}\n", basis.dim())
}

fn push_pair(out: &mut String, z: C64) {
    write!(out, "{:.17e} {:.17e}", z.re, z.im).expect("writing to a String");
}

pub fn dump_operator(op: &LinearOperator) -> String {
    let mut out = header(op.basis());
    let m = op.entries();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            push_pair(&mut out, m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn dump_state(state: &StateVector) -> String {
    let mut out = header(state.basis());
    for &z in state.amplitudes() {
        push_pair(&mut out, z);
        out.push('\n');
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::DumpParse {
        line,
        msg: msg.into(),
    }
}

/// Reads the header and returns the basis plus the remaining numbered lines.
fn parse_header(text: &str) -> Result<(Basis, Vec<(usize, &str)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, first) = lines.next().ok_or_else(|| err(1, "empty dump"))?;
    let mut basis = None;
    let mut dim = None;
    for field in first.split_whitespace() {
        match field.split_once('=') {
            Some(("basis", tag)) => {
                basis = Some(Basis::parse_tag(tag).ok_or_else(|| err(n, "bad basis tag"))?)
            }
            Some(("dim", d)) => {
                dim = Some(d.parse::<usize>().map_err(|_| err(n, "bad dim"))?);
            }
            _ => return Err(err(n, format!("unexpected header field `{field}`"))),
        }
    }
    let basis = basis.ok_or_else(|| err(n, "missing basis"))?;
    let dim = dim.ok_or_else(|| err(n, "missing dim"))?;
    if dim != basis.dim() {
        return Err(err(n, format!("dim {dim} does not match {basis}")));
    }
    let rest: Vec<_> = lines.collect();
    if rest.len() != dim {
        let at = rest.last().map_or(n, |&(l, _)| l);
        return Err(err(
            at,
            format!("expected {dim} rows, found {}", rest.len()),
        ));
    }
    Ok((basis, rest))
}

fn parse_row(line: usize, text: &str, pairs: usize) -> Result<Vec<C64>> {
    let nums = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| err(line, format!("bad number `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if nums.len() != 2 * pairs {
        return Err(err(
            line,
            format!("expected {} numbers, found {}", 2 * pairs, nums.len()),
        ));
    }
    Ok(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

pub fn parse_operator(text: &str) -> Result<LinearOperator> {
    let (basis, rows) = parse_header(text)?;
    let d = basis.dim();
    let mut m = Mat::<C64>::zeros(d, d);
    for (i, (line, row)) in rows.into_iter().enumerate() {
        for (j, z) in parse_row(line, row, d)?.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    LinearOperator::from_mat(basis, m)
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let (basis, rows) = parse_header(text)?;
    let amps = rows
        .into_iter()
        .map(|(line, row)| parse_row(line, row, 1).map(|v| v[0]))
        .collect::<Result<Vec<_>>>()?;
    StateVector::from_amplitudes(basis, amps)
}
