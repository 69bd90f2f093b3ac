//! Plain-text formats.
//!
//! Edge list: a header line `N E simple|multi` followed by `E` lines
//! `u v` (simple) or `u v mult` (multi), 0-indexed and whitespace separated.
//! `E` counts lines, that is distinct pairs.
//!
//! Partition: one cluster label per line, vertex order.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Graph, Partition};
use crate::error::{Error, Result};

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let kind = if g.is_simple() { "simple" } else { "multi" };
    writeln!(out, "{} {} {}", g.vertex_count(), g.distinct_pair_count(), kind).unwrap();
    for (u, v, m) in g.pairs() {
        if g.is_simple() {
            writeln!(out, "{u} {v}").unwrap();
        } else {
            writeln!(out, "{u} {v} {m}").unwrap();
        }
    }
    out
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    w.write_all(format_edge_list(g).as_bytes())?;
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = loop {
        match lines.next() {
            Some((i, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break (i, l);
                }
            }
            None => return Err(Error::parse(1, "empty edge list")),
        }
    };
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next(), hline, "vertex count")?;
    let e: usize = parse_num(toks.next(), hline, "edge line count")?;
    let simple = match toks.next() {
        Some("simple") => true,
        Some("multi") => false,
        other => {
            return Err(Error::parse(
                hline,
                format!("expected `simple` or `multi`, found {other:?}"),
            ))
        }
    };
    let mut edges = Vec::with_capacity(e);
    let mut seen = 0usize;
    for (i, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let mut toks = l.split_whitespace();
        let u: usize = parse_num(toks.next(), i, "endpoint")?;
        let v: usize = parse_num(toks.next(), i, "endpoint")?;
        let m: u32 = match toks.next() {
            Some(t) => parse_num(Some(t), i, "multiplicity")?,
            None => 1,
        };
        if toks.next().is_some() {
            return Err(Error::parse(i, "trailing tokens"));
        }
        if u >= n || v >= n {
            return Err(Error::parse(i, format!("endpoint out of range 0..{n}")));
        }
        if u == v {
            return Err(Error::parse(i, "self-loop"));
        }
        if simple && m != 1 {
            return Err(Error::parse(i, "multiplicity in a simple graph"));
        }
        edges.push((u, v, m));
        seen += 1;
    }
    if seen != e {
        return Err(Error::parse(
            hline,
            format!("header announces {e} edge lines, found {seen}"),
        ));
    }
    Graph::from_weighted(n, edges, simple).map_err(|err| Error::parse(hline, err.to_string()))
}

pub fn format_partition(p: &Partition) -> String {
    let mut out = String::with_capacity(p.vertex_count() * 3);
    for &l in p.labels() {
        writeln!(out, "{l}").unwrap();
    }
    out
}

pub fn write_partition<W: Write>(p: &Partition, mut w: W) -> Result<()> {
    w.write_all(format_partition(p).as_bytes())?;
    Ok(())
}

/// Reads labels; `k` defaults to one more than the largest label.
pub fn read_partition<R: BufRead>(r: R, k: Option<usize>) -> Result<Partition> {
    let mut labels = Vec::new();
    for (i, l) in r.lines().enumerate() {
        let l = l?;
        let t = l.trim();
        if t.is_empty() {
            continue;
        }
        labels.push(parse_num::<usize>(Some(t), i + 1, "label")?);
    }
    let k = k.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
    Partition::new(labels, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{sample_poisson_sbm, sample_sbm, SbmParams};

    #[test]
    fn edge_list_round_trip() {
        let params = SbmParams::new(20, 2, 5.0, 1.0).unwrap();
        let (g, p) = sample_sbm(&params, 1).unwrap();
        let text = format_edge_list(&g);
        assert!(text.starts_with(&format!("40 {} simple\n", g.edge_count())));
        assert_eq!(read_edge_list(text.as_bytes()).unwrap(), g);
        let q = read_partition(format_partition(&p).as_bytes(), None).unwrap();
        assert_eq!(q, p);

        let (h, _) = sample_poisson_sbm(&SbmParams::new(20, 2, 8.0, 8.0).unwrap(), 2).unwrap();
        assert_eq!(read_edge_list(format_edge_list(&h).as_bytes()).unwrap(), h);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "3 2 simple\n0 1\n1 x\n";
        match read_edge_list(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match read_edge_list("3 1 simple\n0 7\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_edge_list("3 2 simple\n0 1\n".as_bytes()).is_err());
        assert!(read_edge_list("3 1 weird\n0 1\n".as_bytes()).is_err());
        match read_partition("0\n1\nz\n".as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
