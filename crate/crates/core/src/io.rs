//! Text formats.
//!
//! * Coordinate matrices: header `N nnz`, then `nnz` lines `i j re im`,
//!   1-based indices, entries written in `(i, j)` order.
//! * Edge lists: one `u v` pair per line, 1-based.
//! * Metric tables: `N`, then `N` lines of `N` nonnegative integers.
//!
//! Blank lines and lines starting with `%` or `#` are skipped on input.

use crate::{Complex64, Error, Result, SparseOp};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !(t.is_empty() || t.starts_with('%') || t.starts_with('#'))
        }
        Err(_) => true,
    })
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad {what}") })
}

pub fn write_coordinate<W: Write>(a: &SparseOp, mut w: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{} {}", a.window(), a.nnz()).unwrap();
    for (i, j, z) in a.iter() {
        writeln!(s, "{} {} {:e} {:e}", i + 1, j + 1, z.re, z.im).unwrap();
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn coordinate_string(a: &SparseOp) -> String {
    let mut buf = Vec::new();
    write_coordinate(a, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub fn read_coordinate<R: BufRead>(r: R) -> Result<SparseOp> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let header = header?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_field(toks.next(), hl + 1, "window size")?;
    let nnz: usize = parse_field(toks.next(), hl + 1, "entry count")?;
    let mut triplets = Vec::with_capacity(nnz);
    for (ln, line) in lines {
        let line = line?;
        let ln = ln + 1;
        let mut t = line.split_whitespace();
        let i: usize = parse_field(t.next(), ln, "row index")?;
        let j: usize = parse_field(t.next(), ln, "column index")?;
        let re: f64 = parse_field(t.next(), ln, "real part")?;
        let im: f64 = match t.next() {
            Some(s) => parse_field(Some(s), ln, "imaginary part")?,
            None => 0.0,
        };
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse { line: ln, msg: format!("index ({i}, {j}) outside 1..={n}") });
        }
        triplets.push((i - 1, j - 1, Complex64::new(re, im)));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announced {nnz} entries, found {}", triplets.len()),
        });
    }
    SparseOp::from_triplets(n, triplets)
}

/// Edges as 0-based pairs.
pub fn read_edge_list<R: BufRead>(r: R) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (ln, line) in content_lines(r) {
        let line = line?;
        let mut t = line.split_whitespace();
        let u: usize = parse_field(t.next(), ln + 1, "vertex")?;
        let v: usize = parse_field(t.next(), ln + 1, "vertex")?;
        if u == 0 || v == 0 {
            return Err(Error::Parse { line: ln + 1, msg: "vertices are 1-based".into() });
        }
        edges.push((u - 1, v - 1));
    }
    Ok(edges)
}

pub fn write_edge_list<W: Write>(edges: &[(usize, usize)], mut w: W) -> Result<()> {
    for &(u, v) in edges {
        writeln!(w, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}

pub fn read_metric_table<R: BufRead>(r: R) -> Result<Vec<Vec<u64>>> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let n: usize = parse_field(header?.split_whitespace().next(), hl + 1, "point count")?;
    let mut table = Vec::with_capacity(n);
    for (ln, line) in lines {
        let row = line?
            .split_whitespace()
            .map(|t| parse_field(Some(t), ln + 1, "distance"))
            .collect::<Result<Vec<u64>>>()?;
        if row.len() != n {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {n} distances, found {}", row.len()) });
        }
        table.push(row);
    }
    if table.len() != n {
        return Err(Error::Parse { line: 0, msg: format!("expected {n} rows, found {}", table.len()) });
    }
    Ok(table)
}

pub fn write_metric_table<W: Write>(table: &[Vec<u64>], mut w: W) -> Result<()> {
    writeln!(w, "{}", table.len())?;
    for row in table {
        let line: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
