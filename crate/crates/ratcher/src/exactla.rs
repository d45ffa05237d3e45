//! Exact linear algebra over the rationals.
//!
//! Matrices are stored densely or sparsely depending on how many entries are
//! nonzero. Rank and echelon computations never divide rationals during
//! elimination: dense matrices go through Bareiss elimination, sparse ones
//! through integer row elimination with content removal after every step.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar.
pub type Q = BigRational;

/// A sparse vector: `(column, value)` pairs sorted by column, no zero values.
pub type SparseVec = Vec<(usize, Q)>;

/// Density (numerator, denominator) at or below which matrices are stored sparsely.
pub const DEFAULT_SPARSE_DENSITY: (usize, usize) = (5, 100);

/// Shorthand for an integer-valued rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for the rational `n / d`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(Vec<Vec<Q>>),
    Sparse(Vec<SparseVec>),
}

/// A rational matrix with either dense or sparse storage.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

fn choose_sparse(nnz: usize, rows: usize, cols: usize, density: (usize, usize)) -> bool {
    nnz * density.1 <= density.0 * rows * cols
}

impl QMatrix {
    /// The zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, storage: Storage::Sparse(vec![Vec::new(); rows]) }
    }

    /// The `n × n` identity.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| vec![(i, Q::one())]).collect();
        Self::from_sparse_rows(n, rows)
    }

    /// Builds a matrix from dense rows, picking storage by the default density threshold.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Q>>) -> Self {
        Self::from_rows_with_density(cols, rows, DEFAULT_SPARSE_DENSITY)
    }

    /// Builds a matrix from dense rows with an explicit density threshold.
    pub fn from_rows_with_density(cols: usize, rows: Vec<Vec<Q>>, density: (usize, usize)) -> Self {
        let sparse: Vec<SparseVec> = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "row length mismatch");
                r.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Self::from_sparse_rows_with_density(cols, sparse, density)
    }

    /// Builds a matrix from integer rows.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    /// Builds a matrix from sparse rows, picking storage by the default density threshold.
    pub fn from_sparse_rows(cols: usize, rows: Vec<SparseVec>) -> Self {
        Self::from_sparse_rows_with_density(cols, rows, DEFAULT_SPARSE_DENSITY)
    }

    /// Builds a matrix from sparse rows with an explicit density threshold.
    pub fn from_sparse_rows_with_density(
        cols: usize,
        mut rows: Vec<SparseVec>,
        density: (usize, usize),
    ) -> Self {
        for r in rows.iter_mut() {
            r.retain(|(_, v)| !v.is_zero());
            r.sort_by_key(|(c, _)| *c);
            assert!(r.last().is_none_or(|(c, _)| *c < cols), "column index out of range");
        }
        let nrows = rows.len();
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let storage = if choose_sparse(nnz, nrows, cols, density) {
            Storage::Sparse(rows)
        } else {
            Storage::Dense(
                rows.into_iter()
                    .map(|r| {
                        let mut d = vec![Q::zero(); cols];
                        for (c, v) in r {
                            d[c] = v;
                        }
                        d
                    })
                    .collect(),
            )
        };
        QMatrix { rows: nrows, cols, storage }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().map(|r| r.iter().filter(|v| !v.is_zero()).count()).sum(),
            Storage::Sparse(s) => s.iter().map(|r| r.len()).sum(),
        }
    }

    /// Entry at `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Q {
        match &self.storage {
            Storage::Dense(d) => d[i][j].clone(),
            Storage::Sparse(s) => s[i]
                .binary_search_by_key(&j, |(c, _)| *c)
                .map(|k| s[i][k].1.clone())
                .unwrap_or_else(|_| Q::zero()),
        }
    }

    /// Row `i` as a sparse vector.
    pub fn row(&self, i: usize) -> SparseVec {
        match &self.storage {
            Storage::Dense(d) => {
                d[i].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (c, v.clone())).collect()
            }
            Storage::Sparse(s) => s[i].clone(),
        }
    }

    /// All rows as sparse vectors.
    pub fn sparse_rows(&self) -> Vec<SparseVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t: Vec<SparseVec> = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for (c, v) in self.row(i) {
                t[c].push((i, v));
            }
        }
        Self::from_sparse_rows(self.rows, t)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let orows = other.sparse_rows();
        let out = (0..self.rows)
            .map(|i| {
                let mut acc = vec![Q::zero(); other.cols];
                for (k, a) in self.row(i) {
                    for (j, b) in &orows[k] {
                        acc[*j] += &a * b;
                    }
                }
                acc
            })
            .collect();
        QMatrix::from_rows(other.cols, out)
    }

    /// `self − I` for a square matrix.
    pub fn minus_identity(&self) -> QMatrix {
        assert_eq!(self.rows, self.cols);
        let rows = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i);
                match r.binary_search_by_key(&i, |(c, _)| *c) {
                    Ok(k) => r[k].1 -= Q::one(),
                    Err(k) => r.insert(k, (i, -Q::one())),
                }
                r
            })
            .collect();
        QMatrix::from_sparse_rows(self.cols, rows)
    }

    /// Applies the matrix to a dense column vector.
    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(Q::zero(), |acc, (c, x)| acc + x * &v[*c]))
            .collect()
    }
}

/// Clears denominators and removes the content, giving a primitive integer row.
fn primitive_int_row(row: &SparseVec) -> Vec<(usize, BigInt)> {
    if row.is_empty() {
        return Vec::new();
    }
    let l = row.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let mut out: Vec<(usize, BigInt)> =
        row.iter().map(|(c, v)| (*c, v.numer() * (&l / v.denom()))).collect();
    make_primitive(&mut out);
    out
}

fn make_primitive(row: &mut [(usize, BigInt)]) {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `a·x − b·y` on sorted sparse integer rows, dropping zeros.
fn combine(a: &BigInt, x: &[(usize, BigInt)], b: &BigInt, y: &[(usize, BigInt)]) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if take_y {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental row echelon form over the integers.
///
/// Rows are kept primitive; a new row is reduced against the existing pivots
/// by cross-multiplication and content removal, so entries stay integral and
/// small. The pivot of a stored row is its first nonzero column.
#[derive(Clone, Debug, Default)]
pub struct IntEchelon {
    cols: usize,
    /// pivot column -> index into `rows`
    pivot_of: std::collections::BTreeMap<usize, usize>,
    rows: Vec<Vec<(usize, BigInt)>>,
}

impl IntEchelon {
    pub fn new(cols: usize) -> Self {
        IntEchelon { cols, pivot_of: Default::default(), rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current pivots; returns the leading-reduced remainder.
    fn reduce_leading(&self, mut row: Vec<(usize, BigInt)>) -> Vec<(usize, BigInt)> {
        while let Some((lead, _)) = row.first() {
            let Some(&k) = self.pivot_of.get(lead) else { break };
            let piv = &self.rows[k];
            let a = &piv[0].1;
            let b = &row[0].1;
            let g = a.gcd(b);
            let (ma, mb) = (a / &g, b / &g);
            row = combine(&ma, &row, &mb, piv);
            make_primitive(&mut row);
        }
        row
    }

    /// Inserts a rational row; returns true if it increased the rank.
    pub fn insert(&mut self, row: &SparseVec) -> bool {
        self.insert_int(primitive_int_row(row))
    }

    /// Inserts an integer row; returns true if it increased the rank.
    pub fn insert_int(&mut self, row: Vec<(usize, BigInt)>) -> bool {
        debug_assert!(row.last().is_none_or(|(c, _)| *c < self.cols));
        let mut r = self.reduce_leading(row);
        if r.is_empty() {
            return false;
        }
        if r[0].1.is_negative() {
            for (_, v) in r.iter_mut() {
                *v = -v.clone();
            }
        }
        self.pivot_of.insert(r[0].0, self.rows.len());
        self.rows.push(r);
        true
    }

    /// True iff `row` lies in the span of the inserted rows.
    pub fn contains(&self, row: &SparseVec) -> bool {
        self.reduce_leading(primitive_int_row(row)).is_empty()
    }

    /// Converts to reduced row-echelon form over ℚ.
    pub fn into_reduced(self) -> Echelon {
        let cols = self.cols;
        let mut order: Vec<(usize, usize)> = self.pivot_of.iter().map(|(p, k)| (*p, *k)).collect();
        order.sort();
        let mut rows: Vec<SparseVec> = order
            .iter()
            .map(|(_, k)| {
                let r = &self.rows[*k];
                let lead = Q::from_integer(r[0].1.clone());
                r.iter().map(|(c, v)| (*c, Q::from_integer(v.clone()) / &lead)).collect()
            })
            .collect();
        let pivots: Vec<usize> = order.iter().map(|(p, _)| *p).collect();
        // Back substitution: clear each pivot column from the rows above it.
        for i in (0..rows.len()).rev() {
            let p = pivots[i];
            let (above, rest) = rows.split_at_mut(i);
            let prow = &rest[0];
            for r in above.iter_mut() {
                if let Ok(k) = r.binary_search_by_key(&p, |(c, _)| *c) {
                    let f = r[k].1.clone();
                    *r = axpy(r, &(-f), prow);
                }
            }
        }
        Echelon { cols, pivots, rows }
    }
}

/// `x + a·y` on sorted sparse rational vectors.
pub fn axpy(x: &SparseVec, a: &Q, y: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j >= y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i].clone());
            i += 1;
        } else if i >= x.len() || y[j].0 < x[i].0 {
            out.push((y[j].0, a * &y[j].1));
            j += 1;
        } else {
            let v = &x[i].1 + a * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Reduced row-echelon data of a rational matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Echelon {
    pub cols: usize,
    /// Pivot columns in increasing order.
    pub pivots: Vec<usize>,
    /// `rows[i]` has a 1 in column `pivots[i]` and zeros in every other pivot column.
    pub rows: Vec<SparseVec>,
}

impl Echelon {
    pub fn empty(cols: usize) -> Self {
        Echelon { cols, pivots: Vec::new(), rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Index into `rows` of the row with pivot `col`, if `col` is a pivot column.
    pub fn pivot_row(&self, col: usize) -> Option<usize> {
        self.pivots.binary_search(&col).ok()
    }

    /// Remainder of `v` modulo the row space, supported on non-pivot columns.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut out = v.clone();
        for (c, x) in v {
            if let Some(k) = self.pivot_row(*c) {
                out = axpy(&out, &(-x.clone()), &self.rows[k]);
            }
        }
        out
    }

    /// Membership test for the row space.
    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Non-pivot columns: indices of a complement basis made of unit vectors.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cols - self.rank());
        let mut k = 0;
        for c in 0..self.cols {
            if k < self.pivots.len() && self.pivots[k] == c {
                k += 1;
            } else {
                out.push(c);
            }
        }
        out
    }
}

/// Rank by Bareiss fraction-free elimination on a dense integer copy.
fn bareiss_rank(rows: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let mut m = rows;
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in (r + 1)..nrows {
            for j in (c + 1)..cols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Rank over ℚ.
pub fn rank(m: &QMatrix) -> usize {
    match &m.storage {
        Storage::Dense(d) => {
            let rows = d
                .iter()
                .map(|r| {
                    let sv: SparseVec =
                        r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (c, v.clone())).collect();
                    let mut dense = vec![BigInt::zero(); m.cols];
                    for (c, v) in primitive_int_row(&sv) {
                        dense[c] = v;
                    }
                    dense
                })
                .collect();
            bareiss_rank(rows, m.cols)
        }
        Storage::Sparse(s) => rank_of_rows(m.cols, s.iter()),
    }
}

/// Rank of a family of sparse rows.
pub fn rank_of_rows<'a>(cols: usize, rows: impl IntoIterator<Item = &'a SparseVec>) -> usize {
    let mut e = IntEchelon::new(cols);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Reduced row-echelon form. Deterministic for a fixed column order.
pub fn echelonize(m: &QMatrix) -> Echelon {
    echelonize_rows(m.cols, m.sparse_rows().iter())
}

/// Reduced row-echelon form of a family of sparse rows.
pub fn echelonize_rows<'a>(cols: usize, rows: impl IntoIterator<Item = &'a SparseVec>) -> Echelon {
    let mut e = IntEchelon::new(cols);
    for r in rows {
        e.insert(r);
    }
    e.into_reduced()
}

/// Basis of the right kernel `{x : M x = 0}`.
pub fn kernel(m: &QMatrix) -> Vec<Vec<Q>> {
    let e = echelonize(m);
    e.complement()
        .into_iter()
        .map(|f| {
            let mut x = vec![Q::zero(); m.cols];
            x[f] = Q::one();
            for (k, p) in e.pivots.iter().enumerate() {
                if let Ok(i) = e.rows[k].binary_search_by_key(&f, |(c, _)| *c) {
                    x[*p] = -e.rows[k][i].1.clone();
                }
            }
            x
        })
        .collect()
}

/// A solution of `A x = b`, if one exists.
pub fn solve(a: &QMatrix, b: &[Q]) -> Option<Vec<Q>> {
    assert_eq!(a.rows(), b.len());
    let n = a.cols();
    let aug: Vec<SparseVec> = (0..a.rows())
        .map(|i| {
            let mut r = a.row(i);
            if !b[i].is_zero() {
                r.push((n, -b[i].clone()));
            }
            r
        })
        .collect();
    let e = echelonize_rows(n + 1, aug.iter());
    if e.pivots.contains(&n) {
        return None;
    }
    // Set the augmented coordinate to 1 and every other free coordinate to 0.
    let mut x = vec![Q::zero(); n];
    for (k, p) in e.pivots.iter().enumerate() {
        if let Ok(i) = e.rows[k].binary_search_by_key(&n, |(c, _)| *c) {
            x[*p] = -e.rows[k][i].1.clone();
        }
    }
    Some(x)
}

/// Basis of the common fixed space `∩ ker(g − I)` of square matrices acting on `ℚ^dim`.
pub fn fixed_space(generators: &[QMatrix], dim: usize) -> Vec<Vec<Q>> {
    let mut stacked: Vec<SparseVec> = Vec::new();
    for g in generators {
        assert_eq!((g.rows(), g.cols()), (dim, dim), "generator has wrong shape");
        stacked.extend(g.minus_identity().sparse_rows());
    }
    kernel(&QMatrix::from_sparse_rows(dim, stacked))
}
