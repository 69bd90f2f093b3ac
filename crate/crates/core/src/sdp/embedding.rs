use std::fmt::Write as _;
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sbm::{Graph, Partition, SbmParams};
use crate::scalar::{dist_sq, dot, Scalar};

/// One real vector of a common dimension per vertex, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding<T> {
    data: Vec<T>,
    vertex_count: usize,
    dim: usize,
}

impl<T: Scalar> Embedding<T> {
    pub fn from_flat(vertex_count: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("embedding dimension must be positive".into()));
        }
        if data.len() != vertex_count * dim {
            return Err(Error::Shape(format!(
                "expected {} coordinates for {vertex_count} x {dim}, got {}",
                vertex_count * dim,
                data.len()
            )));
        }
        Ok(Embedding {
            data,
            vertex_count,
            dim,
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows have different lengths".into()));
        }
        let n = rows.len();
        Self::from_flat(n, dim, rows.into_iter().flatten().collect())
    }

    /// The integral solution: vertex `u` maps to the standard basis vector of
    /// its cluster, in dimension `k`.
    pub fn planted(p: &Partition) -> Self {
        let (n, k) = (p.vertex_count(), p.k());
        let mut data = vec![T::zero(); n * k];
        for (u, &l) in p.labels().iter().enumerate() {
            data[u * k + l] = T::one();
        }
        Embedding {
            data,
            vertex_count: n,
            dim: k,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[T] {
        &self.data[u * self.dim..(u + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, u: usize) -> &mut [T] {
        &mut self.data[u * self.dim..(u + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn inner(&self, u: usize, v: usize) -> T {
        dot(self.row(u), self.row(v))
    }

    #[inline]
    pub fn dist_sq(&self, u: usize, v: usize) -> T {
        dist_sq(self.row(u), self.row(v))
    }

    /// Sum of all rows.
    pub fn row_sum(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.dim];
        for r in self.rows() {
            for (a, b) in s.iter_mut().zip(r) {
                *a += *b;
            }
        }
        s
    }

    pub fn normalize_rows(&mut self) {
        for r in self.data.chunks_exact_mut(self.dim) {
            normalize(r);
        }
    }

    /// Converts the scalar type.
    pub fn cast<U: Scalar>(&self) -> Embedding<U> {
        Embedding {
            data: self.data.iter().map(|x| U::of(x.to_f64_lossy())).collect(),
            vertex_count: self.vertex_count,
            dim: self.dim,
        }
    }
}

pub(crate) fn normalize<T: Scalar>(r: &mut [T]) {
    let norm = dot(r, r).sqrt();
    if norm > T::zero() {
        for x in r.iter_mut() {
            *x /= norm;
        }
    }
}

/// Worst violation of each constraint family of the relaxation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport<T> {
    /// max over u of | |u|^2 - 1 |
    pub unit_norm: T,
    pub unit_norm_vertex: Option<usize>,
    /// | sum over ordered pairs of |u - v|^2 / 2  -  N^2 (1 - 1/k) |
    pub spread: T,
    pub spread_value: T,
    pub spread_target: T,
    /// max over pairs of max(0, -<u, v>)
    pub nonneg: T,
    pub nonneg_pair: Option<(usize, usize)>,
    pub tol: T,
    pub passed: bool,
}

impl<T: Scalar> FeasibilityReport<T> {
    pub fn worst(&self) -> T {
        self.unit_norm.max(self.spread).max(self.nonneg)
    }
}

/// Evaluates the unit-norm, spread and nonnegativity constraints.
pub fn check_feasibility<T: Scalar>(
    e: &Embedding<T>,
    params: &SbmParams,
    tol: T,
) -> FeasibilityReport<T> {
    let n = e.vertex_count();
    let mut unit_norm = T::zero();
    let mut unit_norm_vertex = None;
    let mut norm_sum = T::zero();
    for u in 0..n {
        let sq = e.inner(u, u);
        norm_sum += sq;
        let viol = (sq - T::one()).abs();
        if viol > unit_norm {
            unit_norm = viol;
            unit_norm_vertex = Some(u);
        }
    }
    // sum_{u,v} |u - v|^2 / 2 = N sum |u|^2 - |sum u|^2
    let s = e.row_sum();
    let spread_value = T::of_usize(n) * norm_sum - dot(&s, &s);
    let k = params.k.max(1);
    let spread_target = T::of_usize(n * n * (k - 1)) / T::of_usize(k);
    let spread = (spread_value - spread_target).abs();

    let mut nonneg = T::zero();
    let mut nonneg_pair = None;
    for u in 0..n {
        for v in u + 1..n {
            let viol = -e.inner(u, v);
            if viol > nonneg {
                nonneg = viol;
                nonneg_pair = Some((u, v));
            }
        }
    }
    let passed = unit_norm <= tol && spread <= tol && nonneg <= tol;
    FeasibilityReport {
        unit_norm,
        unit_norm_vertex,
        spread,
        spread_value,
        spread_target,
        nonneg,
        nonneg_pair,
        tol,
        passed,
    }
}

/// Sum over edges (with multiplicity) of |u - v|^2 / 2.
pub fn sdp_objective<T: Scalar>(e: &Embedding<T>, g: &Graph) -> T {
    let half = T::of(0.5);
    g.pairs()
        .map(|(u, v, m)| T::of(m as f64) * half * e.dist_sq(u, v))
        .sum()
}

/// Header `N r`, then one line of `r` space-separated coordinates per vertex,
/// each printed in the shortest form that parses back to the same value.
pub fn format_embedding<T: Scalar>(e: &Embedding<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", e.vertex_count(), e.dim()).unwrap();
    for r in e.rows() {
        let mut first = true;
        for x in r {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_embedding<T: Scalar, R: BufRead>(r: R) -> Result<Embedding<T>> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = loop {
        match lines.next() {
            Some((i, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break (i, l);
                }
            }
            None => return Err(Error::parse(1, "empty embedding file")),
        }
    };
    let mut toks = header.split_whitespace();
    let mut header_num = |what: &str| -> Result<usize> {
        toks.next()
            .ok_or_else(|| Error::parse(hline, format!("missing {what}")))?
            .parse()
            .map_err(|_| Error::parse(hline, format!("invalid {what}")))
    };
    let n = header_num("vertex count")?;
    let dim = header_num("dimension")?;
    let mut data = Vec::with_capacity(n * dim);
    let mut rows = 0;
    for (i, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in l.split_whitespace() {
            let x: T = tok
                .parse()
                .map_err(|_| Error::parse(i, format!("invalid coordinate `{tok}`")))?;
            data.push(x);
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                i,
                format!("expected {dim} coordinates, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(hline, format!("header announces {n} rows, found {rows}")));
    }
    Embedding::from_flat(n, dim, data)
}
