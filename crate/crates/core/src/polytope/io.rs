//! Text formats: coordinate plans (`m n nnz` header, then `row col value`)
//! and marginals (one mass per line).

use std::io::{BufRead, Write};

use ndarray::Array1;

use super::csr::{Csr, Pattern};
use super::marginal::Marginal;
use super::plan::{Plan, Storage};
use crate::error::{Error, Result};

/// 17 significant digits.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_plan(p: &Plan, mut out: impl Write) -> Result<()> {
    let (m, n) = p.shape();
    let entries: Vec<(usize, usize, f64)> = p.entries().filter(|t| t.2 != 0.0).collect();
    writeln!(out, "{m} {n} {}", entries.len())?;
    for (j, k, v) in entries {
        writeln!(out, "{j} {k} {}", fmt_g17(v))?;
    }
    Ok(())
}

/// Reads a coordinate plan into sparse storage with the given targets.
pub fn read_plan(input: impl BufRead, row_target: Marginal, col_target: Marginal) -> Result<Plan> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let head: Vec<usize> = parse_fields(&header?, 1)?;
    if head.len() != 3 {
        return Err(Error::Parse { line: 1, msg: "header must be `m n nnz`".into() });
    }
    let (m, n, nnz) = (head[0], head[1], head[2]);
    let mut triplets = Vec::with_capacity(nnz);
    for (ln, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse { line: ln + 1, msg: format!("bad entry `{line}`") };
        if f.len() != 3 {
            return Err(bad());
        }
        let j: usize = f[0].parse().map_err(|_| bad())?;
        let k: usize = f[1].parse().map_err(|_| bad())?;
        let v: f64 = f[2].parse().map_err(|_| bad())?;
        triplets.push((j, k, v));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse { line: 1, msg: format!("header announces {nnz} entries, found {}", triplets.len()) });
    }
    triplets.sort_by_key(|t| (t.0, t.1));
    let pairs: Vec<(usize, usize)> = triplets.iter().map(|t| (t.0, t.1)).collect();
    let pattern = Pattern::from_pairs(m, n, &pairs)?;
    if pattern.nnz() != triplets.len() {
        return Err(Error::Parse { line: 1, msg: "duplicate index pairs".into() });
    }
    let csr = Csr::new(pattern, triplets.into_iter().map(|t| t.2).collect())?;
    Plan::new(Storage::Sparse(csr), row_target, col_target)
}

pub fn write_marginal(a: &Marginal, mut out: impl Write) -> Result<()> {
    for &x in a.masses() {
        writeln!(out, "{}", fmt_g17(x))?;
    }
    Ok(())
}

pub fn read_marginal(input: impl BufRead) -> Result<Marginal> {
    let mut v = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        v.push(t.parse::<f64>().map_err(|_| Error::Parse { line: ln + 1, msg: format!("bad mass `{t}`") })?);
    }
    Marginal::new(Array1::from(v))
}

fn parse_fields<T: std::str::FromStr>(line: &str, ln: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad field `{s}`") }))
        .collect()
}
