//! Dense exact linear algebra over the prime field F_p, p odd.
//!
//! All elimination is deterministic: the pivot is always the first nonzero
//! entry in scan order. Echelon forms, kernel bases and eigenspace bases are
//! therefore canonical values that tests can compare exactly.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("modulus {0} must be an odd prime below 2^16")]
    BadModulus(u32),
    #[error("matrix entry {value} is not a residue modulo {p}")]
    EntryOutOfRange { value: u32, p: u32 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix does not square to the identity")]
    NotInvolution,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// True when `p` is an odd prime in the supported range [3, 2^16).
pub fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p >= (1 << 16) || p % 2 == 0 {
        return false;
    }
    let mut d = 3u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of `a` modulo the odd prime `p`; `a` must be nonzero mod p.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatFp {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl MatFp {
    pub fn new(p: u32, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self, FpError> {
        if !is_odd_prime(p) {
            return Err(FpError::BadModulus(p));
        }
        if entries.len() != rows * cols {
            return Err(FpError::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&v| v >= p) {
            return Err(FpError::EntryOutOfRange { value: bad, p });
        }
        Ok(MatFp { p, rows, cols, entries })
    }

    pub fn zero(p: u32, rows: usize, cols: usize) -> Result<Self, FpError> {
        Self::new(p, rows, cols, vec![0; rows * cols])
    }

    pub fn identity(p: u32, n: usize) -> Result<Self, FpError> {
        let mut m = Self::zero(p, n, n)?;
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        Ok(m)
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Result<Self, FpError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(FpError::ShapeMismatch("ragged rows".into()));
        }
        Self::new(p, r, c, rows.concat())
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(v < self.p);
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &MatFp) -> Result<MatFp, FpError> {
        if self.p != other.p || self.cols != other.rows {
            return Err(FpError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p as u64;
        let mut out = MatFp::zero(self.p, self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.entries[i * other.cols + j] as u64;
                    out.entries[i * other.cols + j] =
                        ((cur + a * other.at(k, j) as u64) % p) as u32;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> MatFp {
        let mut out = MatFp {
            p: self.p,
            rows: self.cols,
            cols: self.rows,
            entries: vec![0; self.entries.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.at(r, c);
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|r| (0..self.cols).all(|c| self.at(r, c) == u32::from(r == c)))
    }

    /// Reduced row echelon form plus the pivot column list.
    pub fn rref(&self) -> (MatFp, Vec<usize>) {
        let p = self.p as u64;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // first nonzero entry in column c at or below row r
            let Some(src) = (r..m.rows).find(|&i| m.at(i, c) != 0) else {
                continue;
            };
            if src != r {
                for j in 0..m.cols {
                    m.entries.swap(r * m.cols + j, src * m.cols + j);
                }
            }
            let inv = inv_mod(m.at(r, c), m.p) as u64;
            for j in c..m.cols {
                let v = m.at(r, j) as u64;
                m.entries[r * m.cols + j] = (v * inv % p) as u32;
            }
            for i in 0..m.rows {
                if i == r || m.at(i, c) == 0 {
                    continue;
                }
                let f = m.at(i, c) as u64;
                for j in c..m.cols {
                    let v = m.at(i, j) as u64;
                    let s = m.at(r, j) as u64;
                    m.entries[i * m.cols + j] = ((v + (p - f % p) * s) % p) as u32;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of the right kernel { v : m v = 0 }, one vector per
    /// free column of the reduced echelon form, free columns in ascending
    /// order and the free coordinate set to 1.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let pivot_set: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if pivot_set[f] {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (ri, &pc) in pivots.iter().enumerate() {
                let coef = r.at(ri, f);
                if coef != 0 {
                    v[pc] = self.p - coef;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Matrix inverse when it exists.
    pub fn inverse(&self) -> Option<MatFp> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = MatFp::zero(self.p, n, 2 * n).unwrap();
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.at(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return None;
        }
        let mut out = MatFp::zero(self.p, n, n).unwrap();
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, red.at(r, n + c));
            }
        }
        Some(out)
    }

    /// For an involution m (m^2 = identity, p odd) return the dimensions and
    /// canonical bases of the +1 and -1 eigenspaces, computed from the
    /// projectors (1 +/- m)/2. The two dimensions always add up to n.
    pub fn eigensplit_involution(&self) -> Result<EigenDecomposition, FpError> {
        if self.rows != self.cols {
            return Err(FpError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(EigenDecomposition {
                dim_plus: 0,
                dim_minus: 0,
                basis_plus: vec![],
                basis_minus: vec![],
            });
        }
        if !self.mul(self)?.is_identity() {
            return Err(FpError::NotInvolution);
        }
        let p = self.p as u64;
        let half = inv_mod(2, self.p) as u64;
        let mut plus = MatFp::zero(self.p, n, n)?;
        let mut minus = MatFp::zero(self.p, n, n)?;
        for r in 0..n {
            for c in 0..n {
                let id = u64::from(r == c);
                let m = self.at(r, c) as u64;
                plus.set(r, c, ((id + m) * half % p) as u32);
                minus.set(r, c, ((id + p - m) * half % p) as u32);
            }
        }
        // Column space of each projector, canonicalized as the reduced row
        // space of its transpose.
        let basis_of = |proj: &MatFp| -> Vec<Vec<u32>> {
            let (red, pivots) = proj.transpose().rref();
            (0..pivots.len()).map(|r| red.row(r).to_vec()).collect()
        };
        let basis_plus = basis_of(&plus);
        let basis_minus = basis_of(&minus);
        let (dp, dm) = (basis_plus.len(), basis_minus.len());
        debug_assert_eq!(dp + dm, n);
        Ok(EigenDecomposition { dim_plus: dp, dim_minus: dm, basis_plus, basis_minus })
    }
}

/// Eigenspace decomposition of an involution matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenDecomposition {
    pub dim_plus: usize,
    pub dim_minus: usize,
    pub basis_plus: Vec<Vec<u32>>,
    pub basis_minus: Vec<Vec<u32>>,
}

/// Incrementally maintained reduced row echelon basis of a growing span.
///
/// Rows are stored fully reduced against each other and ordered by pivot
/// column, so the row set is the canonical RREF of everything inserted.
#[derive(Debug, Clone)]
pub struct RowSpace {
    p: u32,
    cols: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(p: u32, cols: usize) -> Self {
        RowSpace { p, cols, rows: Vec::new(), pivots: Vec::new() }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Eliminate every component of `v` lying in the span.
    pub fn reduce(&self, v: &mut [u32]) {
        let p = self.p as u64;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = v[pc] as u64;
            if f == 0 {
                continue;
            }
            let neg = p - f;
            for (vi, ri) in v[pc..].iter_mut().zip(&row[pc..]) {
                if *ri != 0 {
                    *vi = ((*vi as u64 + neg * *ri as u64) % p) as u32;
                }
            }
        }
    }

    /// Insert a vector; returns true when it added a new pivot.
    pub fn insert(&mut self, mut v: Vec<u32>) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        self.reduce(&mut v);
        let Some(pc) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let p = self.p as u64;
        let inv = inv_mod(v[pc], self.p) as u64;
        for x in v[pc..].iter_mut() {
            *x = (*x as u64 * inv % p) as u32;
        }
        // back-substitute into existing rows to keep full reduction
        for row in self.rows.iter_mut() {
            let f = row[pc] as u64;
            if f == 0 {
                continue;
            }
            let neg = p - f;
            for (ri, vi) in row[pc..].iter_mut().zip(&v[pc..]) {
                if *vi != 0 {
                    *ri = ((*ri as u64 + neg * *vi as u64) % p) as u32;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < pc);
        self.pivots.insert(at, pc);
        self.rows.insert(at, v);
        true
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Canonical basis of the solution space of (rows) * v = 0.
    pub fn kernel_of_rows(&self) -> Vec<Vec<u32>> {
        let mut pivot_set = vec![false; self.cols];
        for &c in &self.pivots {
            pivot_set[c] = true;
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if pivot_set[f] {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                if row[f] != 0 {
                    v[pc] = self.p - row[f];
                }
            }
            basis.push(v);
        }
        basis
    }
}
