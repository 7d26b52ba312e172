//! Exact integer linear algebra: Laplacian, determinants, period vectors,
//! Smith normal form and linear diophantine systems.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{Multigraph, VertexId};

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = IntMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone().into();
            }
        }
        Ok(m)
    }

    pub fn with_labels(mut self, rows: Option<Vec<String>>, cols: Option<Vec<String>>) -> Result<Self> {
        for (labels, n, what) in [(&rows, self.rows, "row"), (&cols, self.cols, "column")] {
            if let Some(l) = labels {
                if l.len() != n {
                    return Err(Error::DimensionMismatch(format!("{} {what} labels for {n} {what}s", l.len())));
                }
                let uniq: BTreeSet<_> = l.iter().collect();
                if uniq.len() != l.len() {
                    return Err(Error::precondition(format!("{what} labels are not unique")));
                }
            }
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = &self[(i, k)];
                if x.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let y = &other[(k, j)];
                    if !y.is_zero() {
                        out[(i, j)] += x * y;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Copy without the listed rows and columns.
    pub fn remove(&self, rows: &BTreeSet<usize>, cols: &BTreeSet<usize>) -> IntMatrix {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !cols.contains(j)).collect();
        self.select(&keep_r, &keep_c)
    }

    /// Submatrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m[(i, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Reads `rows cols` followed by row-major integers.
    pub fn parse(text: &str) -> Result<IntMatrix> {
        let mut tokens = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                tokens.push((ln + 1, tok));
            }
        }
        let mut it = tokens.into_iter();
        let mut dim = |what: &str| -> Result<usize> {
            let (ln, tok) = it.next().ok_or_else(|| Error::parse(1, format!("missing {what} count")))?;
            tok.parse().map_err(|_| Error::parse(ln, format!("bad {what} count `{tok}`")))
        };
        let rows = dim("row")?;
        let cols = dim("column")?;
        let mut m = IntMatrix::zeros(rows, cols);
        let mut filled = 0;
        for (ln, tok) in it {
            if filled == rows * cols {
                return Err(Error::parse(ln, "more entries than rows*cols"));
            }
            m.data[filled] = tok
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad integer `{tok}`")))?;
            filled += 1;
        }
        if filled != rows * cols {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("expected {} entries, found {filled}", rows * cols),
            ));
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Matrix of the Laplacian: entry `(u, v)` is the coefficient of `u` in `Δ(v)`.
pub fn laplacian_matrix(g: &Multigraph) -> IntMatrix {
    let n = g.num_vertices();
    let mut l = IntMatrix::zeros(n, n);
    for a in 0..g.num_arcs() {
        let (t, h) = (g.tail(a), g.head(a));
        if t != h {
            l[(h, t)] += 1;
            l[(t, t)] -= 1;
        }
    }
    let names = g.vertex_names().to_vec();
    l.with_labels(Some(names.clone()), Some(names))
        .expect("vertex names are unique")
}

/// Number of arborescences rooted in `roots`, as |det| of the reduced Laplacian.
pub fn arborescence_count(g: &Multigraph, roots: &BTreeSet<VertexId>) -> Result<BigInt> {
    if let Some(&bad) = roots.iter().find(|&&r| r >= g.num_vertices()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            size: g.num_vertices(),
        });
    }
    Ok(laplacian_matrix(g).remove(roots, roots).determinant()?.abs())
}

/// One primitive period vector per leaf component that is not a sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodBasis {
    pub entries: Vec<(Vec<VertexId>, Config)>,
}

impl PeriodBasis {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

pub fn primitive_period_vectors(g: &Multigraph) -> PeriodBasis {
    let (part, leaves) = g.strong_and_leaf_components();
    let lap = laplacian_matrix(g);
    let mut entries = Vec::new();
    for b in leaves {
        let block = part.blocks()[b].clone();
        if block.len() == 1 && g.is_sink(block[0]) {
            continue;
        }
        let sub = lap.select(&block, &block);
        let kernel = rational_kernel(&sub);
        debug_assert_eq!(kernel.len(), 1, "a strongly connected block has a one-dimensional kernel");
        let mut v = kernel.into_iter().next().expect("nonempty kernel");
        if v.iter().any(|x| x.is_negative()) {
            v.iter_mut().for_each(|x| *x = -x.clone());
        }
        let p = Config::from_pairs(g.vertex_universe(), block.iter().copied().zip(v)).expect("block indices are vertices");
        entries.push((block, p));
    }
    PeriodBasis { entries }
}

/// Integer basis of the rational nullspace, each vector primitive.
fn rational_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| m.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][f].clone();
            }
            let denom = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(denom.clone())).to_integer()).collect();
            let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            ints.into_iter().map(|x| x / &g).collect()
        })
        .collect()
}

/// `S·A·T = D` with `S`, `T` unimodular and `D` diagonal with a divisibility chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub s: IntMatrix,
    pub d: IntMatrix,
    pub t: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (n, m) = (a.rows(), a.cols());
    let mut d = IntMatrix::zeros(n, m);
    d.data.clone_from(&a.data);
    let mut s = IntMatrix::identity(n);
    let mut t = IntMatrix::identity(m);
    for k in 0..n.min(m) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..m {
                    let x = &d[(i, j)];
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(s, d, t);
            };
            swap_rows(&mut d, k, pi);
            swap_rows(&mut s, k, pi);
            swap_cols(&mut d, k, pj);
            swap_cols(&mut t, k, pj);
            let mut clean = true;
            for i in k + 1..n {
                if !d[(i, k)].is_zero() {
                    let q = d[(i, k)].div_floor(&d[(k, k)]);
                    add_row(&mut d, i, k, &-&q);
                    add_row(&mut s, i, k, &-&q);
                    clean &= d[(i, k)].is_zero();
                }
            }
            for j in k + 1..m {
                if !d[(k, j)].is_zero() {
                    let q = d[(k, j)].div_floor(&d[(k, k)]);
                    add_col(&mut d, j, k, &-&q);
                    add_col(&mut t, j, k, &-&q);
                    clean &= d[(k, j)].is_zero();
                }
            }
            if !clean {
                continue;
            }
            // pivot must divide the rest of the trailing block
            let bad = (k + 1..n).find(|&i| (k + 1..m).any(|j| !d[(i, j)].is_multiple_of(&d[(k, k)])));
            match bad {
                Some(i) => {
                    add_row(&mut d, k, i, &BigInt::one());
                    add_row(&mut s, k, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d[(k, k)].is_negative() {
            negate_row(&mut d, k);
            negate_row(&mut s, k);
        }
    }
    finish(s, d, t)
}

fn finish(s: IntMatrix, d: IntMatrix, t: IntMatrix) -> SmithForm {
    SmithForm { s, d, t }
}

fn swap_rows(m: &mut IntMatrix, i: usize, j: usize) {
    if i != j {
        for c in 0..m.cols {
            m.data.swap(i * m.cols + c, j * m.cols + c);
        }
    }
}

fn swap_cols(m: &mut IntMatrix, i: usize, j: usize) {
    if i != j {
        for r in 0..m.rows {
            m.data.swap(r * m.cols + i, r * m.cols + j);
        }
    }
}

/// row[dst] += k * row[src]
fn add_row(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for c in 0..m.cols {
        let v = &m[(src, c)] * k;
        m[(dst, c)] += v;
    }
}

/// col[dst] += k * col[src]
fn add_col(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for r in 0..m.rows {
        let v = &m[(r, src)] * k;
        m[(r, dst)] += v;
    }
}

fn negate_row(m: &mut IntMatrix, i: usize) {
    for c in 0..m.cols {
        let v = -&m[(i, c)];
        m[(i, c)] = v;
    }
}

/// A particular integral solution and a basis of the integral kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantineSolution {
    pub particular: Vec<BigInt>,
    pub kernel: Vec<Vec<BigInt>>,
}

/// Solves `A·x = b` over the integers, or returns `None` if no integral solution exists.
pub fn solve_diophantine(a: &IntMatrix, b: &[BigInt]) -> Result<Option<DiophantineSolution>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows()
        )));
    }
    let sf = smith_normal_form(a);
    Ok(solve_with_smith(&sf, b))
}

pub fn solve_with_smith(sf: &SmithForm, b: &[BigInt]) -> Option<DiophantineSolution> {
    let m = sf.t.rows();
    let c = sf.s.mul_vec(b).expect("S is square over the rows of A");
    let alphas = sf.invariant_factors();
    let r = alphas.len();
    let mut y = vec![BigInt::zero(); m];
    for (i, ci) in c.iter().enumerate() {
        if i < r {
            let (q, rem) = ci.div_rem(&alphas[i]);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ci.is_zero() {
            return None;
        }
    }
    let particular = sf.t.mul_vec(&y).expect("T is square");
    let kernel = (r..m).map(|i| (0..m).map(|row| sf.t[(row, i)].clone()).collect()).collect();
    Some(DiophantineSolution { particular, kernel })
}
