//! Second cohomology of a finite p-group with trivial F_p coefficients, by
//! direct linear elimination of the 2-cocycle identity, plus the closed-form
//! dimension counts it is checked against, and Tate cohomology of finite
//! modules under a cyclic action.
//!
//! Normalized 2-cocycles f (f(1,.) = f(.,1) = 0) are cut down to their
//! restriction u = f|_(G\1) x S for a generating set S: the cocycle identity
//! with last argument a generator determines every other value of f along a
//! spanning tree of the Cayley graph, and the remaining (non-tree) identities
//! become linear constraints on u. Imposing the identity only for generator
//! last arguments is enough: if E(x,y,z) and E(x,y,zs) denote the identity at
//! those triples, expanding d(df) = 0 shows E(x,y,zw) follows from E(x,y,z),
//! E(x,y,w) and shorter instances, so induction on the word length of the
//! last argument covers every triple. Coboundaries live in the same
//! restricted coordinate space, so dim H^2 = dim Z^2 - dim B^2 there.

use crate::fp_linalg::{inv_mod, FpError, MatFp, RowSpace};
use crate::involution::InvolutionAction;
use crate::pc::{GroupTable, PcError};
use crate::structure::{minimal_generating_set, StructureError};
use serde::Serialize;
use thiserror::Error;

/// Largest group order the cocycle elimination will attempt by default.
pub const DEFAULT_BRUTE_CAP: usize = 256;

/// Largest module size accepted for Tate cohomology.
pub const TATE_MODULE_CAP: u64 = 65536;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("group order {order} exceeds the cocycle elimination cap {cap}")]
    CapExceeded { order: usize, cap: usize },
    #[error("module of size {size} exceeds the cap {cap}")]
    ModuleTooLarge { size: u128, cap: u64 },
    #[error("action entry ({i},{j}) does not define an endomorphism of the stated orders")]
    ActionNotEndomorphism { i: usize, j: usize },
    #[error("action matrix is not invertible over the module")]
    ActionNotBijective,
    #[error("action does not satisfy sigma^{order} = 1")]
    ActionOrderMismatch { order: u32 },
    #[error("action matrix shape does not match the cyclic factor count")]
    ActionShapeMismatch,
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// A dimension split into +1 and -1 eigenspace parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub total: usize,
    pub plus: usize,
    pub minus: usize,
}

impl Dims {
    pub fn new(plus: usize, minus: usize) -> Self {
        Dims { total: plus + minus, plus, minus }
    }
}

// Row echelon accumulator tuned for the elimination hot path: work vectors
// are u64 so the inner loop is a bare multiply-add, with one mod at the end.
// Rows are kept normalized; entries stay below p + rank * p^2 << 2^63.
struct Echelon {
    p: u64,
    cols: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(p: u32, cols: usize) -> Self {
        Echelon { p: p as u64, cols, rows: Vec::new(), pivots: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, v: &[u32]) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        let mut w: Vec<u64> = v.iter().map(|&x| x as u64).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = w[pc] % self.p;
            if f == 0 {
                continue;
            }
            let neg = self.p - f;
            for (wi, &ri) in w.iter_mut().zip(row.iter()) {
                *wi += neg * ri as u64;
            }
        }
        let Some(pc) = w.iter().position(|&x| x % self.p != 0) else {
            return false;
        };
        let inv = inv_mod((w[pc] % self.p) as u32, self.p as u32) as u64;
        let row: Vec<u32> = w.iter().map(|&x| (x % self.p * inv % self.p) as u32).collect();
        self.rows.push(row);
        self.pivots.push(pc);
        true
    }

    /// Fully reduced form: rows sorted by pivot, each pivot column unit.
    fn into_rref(self) -> (Vec<Vec<u32>>, Vec<usize>, usize, u64) {
        let p = self.p;
        let cols = self.cols;
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by_key(|&i| self.pivots[i]);
        let mut rows: Vec<Vec<u64>> = idx
            .iter()
            .map(|&i| self.rows[i].iter().map(|&x| x as u64).collect())
            .collect();
        let pivots: Vec<usize> = idx.iter().map(|&i| self.pivots[i]).collect();
        for k in 0..rows.len() {
            let pc = pivots[k];
            let pivot_row = std::mem::take(&mut rows[k]);
            for (r, row) in rows.iter_mut().enumerate() {
                if r == k || row.is_empty() {
                    continue;
                }
                let f = row[pc] % p;
                if f == 0 {
                    continue;
                }
                let neg = p - f;
                for (ri, &pi) in row.iter_mut().zip(pivot_row.iter()) {
                    *ri += neg * pi;
                }
            }
            rows[k] = pivot_row;
        }
        let rows: Vec<Vec<u32>> =
            rows.into_iter().map(|r| r.into_iter().map(|x| (x % p) as u32).collect()).collect();
        (rows, pivots, cols, p)
    }
}

fn kernel_of_rref(rows: &[Vec<u32>], pivots: &[usize], cols: usize, p: u64) -> Vec<Vec<u32>> {
    let mut pivot_set = vec![false; cols];
    for &c in pivots {
        pivot_set[c] = true;
    }
    let mut basis = Vec::new();
    for f in 0..cols {
        if pivot_set[f] {
            continue;
        }
        let mut v = vec![0u32; cols];
        v[f] = 1;
        for (row, &pc) in rows.iter().zip(pivots) {
            if row[f] != 0 {
                v[pc] = (p - row[f] as u64) as u32;
            }
        }
        basis.push(v);
    }
    basis
}

/// Spanning-tree bookkeeping for the restricted cocycle coordinates.
#[derive(Debug, Clone)]
pub struct CocycleSystem {
    p: u32,
    order: usize,
    gens: Vec<u32>,
    /// visit order of the Cayley-graph BFS; starts at the identity
    bfs: Vec<u32>,
    /// for y != identity: (parent, generator slot) with y = parent * g_s
    parent: Vec<(u32, u32)>,
    /// non-tree edges (source, generator slot)
    nontree: Vec<(u32, u32)>,
}

impl CocycleSystem {
    fn build(t: &GroupTable, gens: Vec<u32>) -> Self {
        let order = t.order();
        let mut parent = vec![(u32::MAX, u32::MAX); order];
        let mut seen = vec![false; order];
        seen[0] = true;
        let mut bfs = vec![0u32];
        let mut nontree = Vec::new();
        let mut head = 0;
        while head < bfs.len() {
            let y = bfs[head];
            head += 1;
            for (s, &g) in gens.iter().enumerate() {
                let y1 = t.mul(y, g);
                if seen[y1 as usize] {
                    nontree.push((y, s as u32));
                } else {
                    seen[y1 as usize] = true;
                    parent[y1 as usize] = (y, s as u32);
                    bfs.push(y1);
                }
            }
        }
        debug_assert_eq!(bfs.len(), order);
        CocycleSystem { p: t.p(), order, gens, bfs, parent, nontree }
    }

    pub fn gens(&self) -> &[u32] {
        &self.gens
    }

    /// Number of restricted coordinates: (order - 1) * |gens|.
    pub fn ucols(&self) -> usize {
        (self.order - 1) * self.gens.len()
    }

    #[inline]
    fn u_index(&self, x: u32, s: u32) -> usize {
        (x as usize - 1) * self.gens.len() + s as usize
    }

    /// Full normalized grid f(x, y) reconstructed from restricted values by
    /// walking the spanning tree.
    pub fn fill_grid(&self, t: &GroupTable, u: &[u32]) -> Vec<u32> {
        let n = self.order;
        let p = self.p;
        let f_unit = |z: u32, s: u32| -> u32 {
            if z == 0 {
                0
            } else {
                u[self.u_index(z, s)]
            }
        };
        let mut grid = vec![0u32; n * n];
        for x in 1..n as u32 {
            for &y1 in &self.bfs[1..] {
                let (y0, s) = self.parent[y1 as usize];
                let xy0 = t.mul(x, y0);
                let v = grid[x as usize * n + y0 as usize] + f_unit(xy0, s) + p
                    - f_unit(y0, s);
                grid[x as usize * n + y1 as usize] = v % p;
            }
        }
        grid
    }

    /// Restriction of a full grid back to the coordinate space.
    pub fn restrict_grid(&self, grid: &[u32]) -> Vec<u32> {
        let n = self.order;
        let mut u = vec![0u32; self.ucols()];
        for x in 1..n as u32 {
            for (s, &g) in self.gens.iter().enumerate() {
                u[self.u_index(x, s as u32)] = grid[x as usize * n + g as usize];
            }
        }
        u
    }

    /// Coboundary of the indicator function of z, restricted.
    fn delta_vector(&self, t: &GroupTable, z: u32) -> Vec<u32> {
        let p = self.p;
        let mut v = vec![0u32; self.ucols()];
        for x in 1..self.order as u32 {
            for (s, &g) in self.gens.iter().enumerate() {
                let mut val = 0u32;
                if x == z {
                    val += 1;
                }
                if g == z {
                    val += 1;
                }
                if t.mul(x, g) == z {
                    val += p - 1;
                }
                v[self.u_index(x, s as u32)] = val % p;
            }
        }
        v
    }
}

/// Outcome of the cocycle elimination.
#[derive(Debug, Clone)]
pub struct H2Computation {
    pub d: usize,
    pub z2: usize,
    pub b2: usize,
    pub h2: usize,
    /// restricted coordinates of a chosen H^2 representative basis
    pub reps: Vec<Vec<u32>>,
    /// echelon basis of the coboundary space in restricted coordinates
    pub b_basis: Vec<Vec<u32>>,
    pub sys: CocycleSystem,
}

/// Eliminate the 2-cocycle identity for G with trivial F_p coefficients.
pub fn h2_compute(t: &GroupTable, cap: usize) -> Result<H2Computation, CohomologyError> {
    let order = t.order();
    if order > cap {
        return Err(CohomologyError::CapExceeded { order, cap });
    }
    let p = t.p();
    let gens = minimal_generating_set(t);
    let d = gens.len();
    let sys = CocycleSystem::build(t, gens);
    let ucols = sys.ucols();
    if order == 1 {
        return Ok(H2Computation { d, z2: 0, b2: 0, h2: 0, reps: vec![], b_basis: vec![], sys });
    }

    // constraint rows from the non-tree Cayley edges, one batch per x:
    // lx[y] carries the linear expression of f(x, y) over the coordinates
    let mut ech = Echelon::new(p, ucols);
    let mut lx = vec![0u32; order * ucols];
    for x in 1..order as u32 {
        for &y1 in &sys.bfs[1..] {
            let (y0, s) = sys.parent[y1 as usize];
            let (src, dst) = (y0 as usize * ucols, y1 as usize * ucols);
            lx.copy_within(src..src + ucols, dst);
            let xy0 = t.mul(x, y0);
            if xy0 != 0 {
                let i = dst + sys.u_index(xy0, s);
                lx[i] = (lx[i] + 1) % p;
            }
            if y0 != 0 {
                let i = dst + sys.u_index(y0, s);
                lx[i] = (lx[i] + p - 1) % p;
            }
        }
        let mut row = vec![0u32; ucols];
        for &(y0, s) in &sys.nontree {
            let y1 = t.mul(y0, sys.gens[s as usize]);
            let (a, b) = (y0 as usize * ucols, y1 as usize * ucols);
            for i in 0..ucols {
                row[i] = (lx[a + i] + p - lx[b + i]) % p;
            }
            let xy0 = t.mul(x, y0);
            if xy0 != 0 {
                let i = sys.u_index(xy0, s);
                row[i] = (row[i] + 1) % p;
            }
            if y0 != 0 {
                let i = sys.u_index(y0, s);
                row[i] = (row[i] + p - 1) % p;
            }
            ech.insert(&row);
        }
    }
    let z2 = ucols - ech.rank();

    // coboundary span inside the coordinate space
    let mut bech = Echelon::new(p, ucols);
    for z in 1..order as u32 {
        bech.insert(&sys.delta_vector(t, z));
    }
    let b2 = bech.rank();
    if b2 != order - 1 - d {
        return Err(CohomologyError::Internal(format!(
            "coboundary rank {b2} disagrees with order - 1 - d = {}",
            order - 1 - d
        )));
    }
    if b2 > z2 {
        return Err(CohomologyError::Internal("coboundaries exceed cocycles".into()));
    }
    let h2 = z2 - b2;

    // representatives: kernel vectors of the constraints that extend the
    // coboundary echelon
    let (rows, pivots, cols, pbig) = ech.into_rref();
    let kernel = kernel_of_rref(&rows, &pivots, cols, pbig);
    if kernel.len() != z2 {
        return Err(CohomologyError::Internal("kernel dimension mismatch".into()));
    }
    let b_basis = bech.rows.clone();
    let mut combined = bech;
    let mut reps = Vec::with_capacity(h2);
    for k in kernel {
        if combined.insert(&k) {
            reps.push(k);
        }
    }
    if reps.len() != h2 {
        return Err(CohomologyError::Internal(format!(
            "found {} independent classes, expected {h2}",
            reps.len()
        )));
    }
    Ok(H2Computation { d, z2, b2, h2, reps, b_basis, sys })
}

/// Split dim H^2 into +/- eigenspaces of an involution: pull each basis
/// cocycle back along sigma, express it in the basis modulo coboundaries,
/// and eigensplit the resulting matrix (which must square to the identity).
pub fn h2_eigensplit(
    t: &GroupTable,
    act: &InvolutionAction,
    comp: &H2Computation,
) -> Result<Dims, CohomologyError> {
    let h2 = comp.h2;
    if h2 == 0 {
        return Ok(Dims::new(0, 0));
    }
    let p = t.p();
    let ucols = comp.sys.ucols();
    // augmented rows [vector | class coordinates] over the coboundary span
    let mut quot = RowSpace::new(p, ucols + h2);
    for b in &comp.b_basis {
        let mut row = b.clone();
        row.resize(ucols + h2, 0);
        quot.insert(row);
    }
    for (i, r) in comp.reps.iter().enumerate() {
        let mut row = r.clone();
        row.resize(ucols + h2, 0);
        row[ucols + i] = 1;
        if !quot.insert(row) {
            return Err(CohomologyError::Internal("representative fell into the span".into()));
        }
    }
    let express = |v: &[u32]| -> Result<Vec<u32>, CohomologyError> {
        let mut w = v.to_vec();
        w.resize(ucols + h2, 0);
        quot.reduce(&mut w);
        if w[..ucols].iter().any(|&x| x != 0) {
            return Err(CohomologyError::Internal(
                "pullback is not a cocycle modulo coboundaries".into(),
            ));
        }
        Ok(w[ucols..].iter().map(|&x| (p - x) % p).collect())
    };
    // matrix of the pullback action in the chosen basis
    let mut cols_out: Vec<Vec<u32>> = Vec::with_capacity(h2);
    for r in &comp.reps {
        let grid = comp.sys.fill_grid(t, r);
        let mut v = vec![0u32; ucols];
        for x in 1..t.order() as u32 {
            for (s, &g) in comp.sys.gens.iter().enumerate() {
                let sx = act.perm[x as usize] as usize;
                let sg = act.perm[g as usize] as usize;
                v[comp.sys.u_index(x, s as u32)] = grid[sx * t.order() + sg];
            }
        }
        cols_out.push(express(&v)?);
    }
    let mut rows = vec![vec![0u32; h2]; h2];
    for (j, col) in cols_out.iter().enumerate() {
        for i in 0..h2 {
            rows[i][j] = col[i];
        }
    }
    let m = MatFp::from_rows(p, &rows)?;
    if !m.mul(&m)?.is_identity() {
        return Err(CohomologyError::Internal(
            "pullback action does not square to the identity".into(),
        ));
    }
    let dec = m.eigensplit_involution()?;
    if dec.dim_plus + dec.dim_minus != h2 {
        return Err(CohomologyError::Internal("eigensplit dimensions do not add up".into()));
    }
    Ok(Dims::new(dec.dim_plus, dec.dim_minus))
}

fn choose2(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Signed dimension count of H^2 for an elementary abelian group from its
/// signed generator ranks: the Bockstein image contributes (d+, d-) and the
/// exterior square contributes pairs by the product of their signs.
pub fn kunneth_h2_split(d_plus: usize, d_minus: usize) -> Dims {
    let plus = d_plus + choose2(d_plus) + choose2(d_minus);
    let minus = d_minus + d_plus * d_minus;
    Dims::new(plus, minus)
}

/// Dimension count for H^2 with divisible coefficients Q_p/Z_p out of the
/// Bockstein long exact sequence: multiplication by p kills the H^1 image,
/// leaving h2 - d in each eigenspace. Negative differences mean the inputs
/// are not a coherent pair.
pub fn h2_qpzp_dims(h2: Dims, d: Dims) -> Result<Dims, CohomologyError> {
    if h2.plus < d.plus || h2.minus < d.minus {
        return Err(CohomologyError::Internal(format!(
            "h2 split ({}, {}) cannot be smaller than the generator split ({}, {})",
            h2.plus, h2.minus, d.plus, d.minus
        )));
    }
    Ok(Dims::new(h2.plus - d.plus, h2.minus - d.minus))
}

/// Finite module with a cyclic action: direct sum of Z/orders[i] with the
/// action matrix applied column-by-generator, entries reduced mod orders[i]
/// in row i.
#[derive(Debug, Clone)]
pub struct TateModule {
    orders: Vec<u64>,
    action: Vec<Vec<u64>>,
    cyclic_order: u32,
    size: usize,
}

/// Finite abelian group as invariant factors d_1 | d_2 | ... (ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteAbelian {
    pub invariant_factors: Vec<u64>,
}

impl FiniteAbelian {
    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    pub fn p_rank(&self, p: u32) -> usize {
        self.invariant_factors.iter().filter(|&&d| d % p as u64 == 0).count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TateReport {
    pub h0: FiniteAbelian,
    pub h_minus1: FiniteAbelian,
    pub h0_order: u64,
    pub h_minus1_order: u64,
    pub p_rank_h0: usize,
}

impl TateModule {
    pub fn new(
        orders: Vec<u64>,
        action: Vec<Vec<u64>>,
        cyclic_order: u32,
    ) -> Result<Self, CohomologyError> {
        if orders.iter().any(|&m| m == 0) || cyclic_order == 0 {
            return Err(CohomologyError::ActionShapeMismatch);
        }
        let size: u128 = orders.iter().map(|&m| m as u128).product();
        if size > TATE_MODULE_CAP as u128 {
            return Err(CohomologyError::ModuleTooLarge { size, cap: TATE_MODULE_CAP });
        }
        let k = orders.len();
        if action.len() != k || action.iter().any(|r| r.len() != k) {
            return Err(CohomologyError::ActionShapeMismatch);
        }
        let action: Vec<Vec<u64>> = action
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&a| a % orders[i]).collect())
            .collect();
        // well-defined: order of e_j must be killed in every coordinate
        for i in 0..k {
            for j in 0..k {
                if (orders[j] as u128 * action[i][j] as u128) % orders[i] as u128 != 0 {
                    return Err(CohomologyError::ActionNotEndomorphism { i, j });
                }
            }
        }
        let m = TateModule { orders, action, cyclic_order, size: size as usize };
        let perm = m.action_permutation()?;
        // sigma^n = identity
        let mut cur: Vec<u32> = (0..m.size as u32).collect();
        for _ in 0..cyclic_order {
            cur = cur.iter().map(|&x| perm[x as usize]).collect();
        }
        if cur.iter().enumerate().any(|(i, &x)| i as u32 != x) {
            return Err(CohomologyError::ActionOrderMismatch { order: cyclic_order });
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn tuple_of(&self, mut idx: usize) -> Vec<u64> {
        let mut t = vec![0u64; self.orders.len()];
        for (i, m) in self.orders.iter().enumerate() {
            t[i] = (idx as u64) % m;
            idx /= *m as usize;
        }
        t
    }

    fn index_of(&self, t: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &m) in self.orders.iter().enumerate().rev() {
            idx = idx * m as usize + (t[i] % m) as usize;
        }
        idx
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (ta, tb) = (self.tuple_of(a), self.tuple_of(b));
        let sum: Vec<u64> =
            ta.iter().zip(&tb).zip(&self.orders).map(|((&x, &y), &m)| (x + y) % m).collect();
        self.index_of(&sum)
    }

    fn scalar_mul(&self, c: u64, a: usize) -> usize {
        let t = self.tuple_of(a);
        let out: Vec<u64> =
            t.iter().zip(&self.orders).map(|(&x, &m)| (x as u128 * c as u128 % m as u128) as u64).collect();
        self.index_of(&out)
    }

    fn apply(&self, a: usize) -> usize {
        let t = self.tuple_of(a);
        let k = self.orders.len();
        let mut out = vec![0u64; k];
        for i in 0..k {
            let mut acc = 0u128;
            for j in 0..k {
                acc += self.action[i][j] as u128 * t[j] as u128;
            }
            out[i] = (acc % self.orders[i] as u128) as u64;
        }
        self.index_of(&out)
    }

    fn action_permutation(&self) -> Result<Vec<u32>, CohomologyError> {
        let mut perm = vec![0u32; self.size];
        let mut seen = vec![false; self.size];
        for x in 0..self.size {
            let y = self.apply(x);
            if seen[y] {
                return Err(CohomologyError::ActionNotBijective);
            }
            seen[y] = true;
            perm[x] = y as u32;
        }
        Ok(perm)
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut q = 2u64;
    while n > 1 {
        if n % q == 0 {
            primes.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
        if q * q > n && n > 1 {
            q = n;
        }
    }
    primes
}

// invariant factors of the quotient sub_a / sub_b by counting, per prime,
// how many elements a of sub_a satisfy q^k a in sub_b
fn quotient_invariants(m: &TateModule, sub_a: &[usize], sub_b: &[usize]) -> FiniteAbelian {
    let size_q = (sub_a.len() / sub_b.len()) as u64;
    if size_q == 1 {
        return FiniteAbelian { invariant_factors: vec![] };
    }
    let in_b = |x: usize| sub_b.binary_search(&x).is_ok();
    let primes = prime_factors(size_q);
    let mut per_prime: Vec<Vec<u32>> = Vec::new();
    for &q in &primes {
        // e_k = log_q |Q[q^k]|; the increment e_k - e_{k-1} counts parts >= k
        let mut parts_ge: Vec<u32> = Vec::new();
        let mut prev = 0u32;
        for k in 1.. {
            let qk = q.pow(k);
            let count = sub_a.iter().filter(|&&a| in_b(m.scalar_mul(qk, a))).count() as u64
                / sub_b.len() as u64;
            let mut e = 0u32;
            let mut c = count;
            while c > 1 {
                c /= q;
                e += 1;
            }
            if e == prev {
                break;
            }
            parts_ge.push(e - prev);
            prev = e;
        }
        // conjugate the counts into a descending partition
        let nparts = parts_ge.first().copied().unwrap_or(0) as usize;
        let mut partition = vec![0u32; nparts];
        for &c in &parts_ge {
            for slot in partition.iter_mut().take(c as usize) {
                *slot += 1;
            }
        }
        per_prime.push(partition);
    }
    let nfactors = per_prime.iter().map(|v| v.len()).max().unwrap_or(0);
    let mut factors = vec![1u64; nfactors];
    for (prime, partition) in primes.iter().zip(&per_prime) {
        for (slot, &e) in factors.iter_mut().zip(partition.iter()) {
            *slot *= prime.pow(e);
        }
    }
    factors.reverse();
    FiniteAbelian { invariant_factors: factors }
}

/// Tate cohomology in degrees 0 and -1 of a finite module under a cyclic
/// group of the given order: H^0 = fixed points / norm image and
/// H^-1 = norm kernel / augmentation image. Their orders always agree.
pub fn tate_h0_h1(m: &TateModule, p: u32) -> Result<TateReport, CohomologyError> {
    let size = m.size;
    let perm = m.action_permutation()?;
    // norm = 1 + sigma + ... + sigma^(n-1)
    let mut norm = vec![0usize; size];
    let mut power: Vec<usize> = (0..size).collect();
    for _ in 0..m.cyclic_order {
        for x in 0..size {
            norm[x] = m.add(norm[x], power[x]);
        }
        for px in power.iter_mut() {
            *px = perm[*px] as usize;
        }
    }
    let mut fixed: Vec<usize> = (0..size).filter(|&x| perm[x] as usize == x).collect();
    let mut norm_image: Vec<usize> = norm.clone();
    norm_image.sort_unstable();
    norm_image.dedup();
    let mut norm_kernel: Vec<usize> = (0..size).filter(|&x| norm[x] == 0).collect();
    let mut aug_image: Vec<usize> =
        (0..size).map(|x| m.add(perm[x] as usize, m.scalar_mul_minus_one(x))).collect();
    aug_image.sort_unstable();
    aug_image.dedup();
    fixed.sort_unstable();
    norm_kernel.sort_unstable();
    // sanity: the norm image sits inside the fixed points, the augmentation
    // image inside the norm kernel
    if !norm_image.iter().all(|&x| fixed.binary_search(&x).is_ok()) {
        return Err(CohomologyError::Internal("norm image escapes the fixed points".into()));
    }
    if !aug_image.iter().all(|&x| norm_kernel.binary_search(&x).is_ok()) {
        return Err(CohomologyError::Internal("augmentation image escapes the norm kernel".into()));
    }
    let h0 = quotient_invariants(m, &fixed, &norm_image);
    let h_minus1 = quotient_invariants(m, &norm_kernel, &aug_image);
    let h0_order = h0.order();
    let h_minus1_order = h_minus1.order();
    let p_rank_h0 = h0.p_rank(p);
    Ok(TateReport { h0, h_minus1, h0_order, h_minus1_order, p_rank_h0 })
}

impl TateModule {
    fn scalar_mul_minus_one(&self, a: usize) -> usize {
        let t = self.tuple_of(a);
        let out: Vec<u64> = t.iter().zip(&self.orders).map(|(&x, &m)| (m - x) % m).collect();
        self.index_of(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involution::{diagonal_images, identity_images, validate_involution};
    use crate::pc::test_groups::{cyclic_p2, extraspecial, metacyclic};
    use crate::pc::{PcPresentation, Word};
    use std::collections::BTreeMap;

    fn elab(p: u32, rank: usize) -> PcPresentation {
        PcPresentation::new(p, rank, vec![Word::identity(); rank], BTreeMap::new()).unwrap()
    }

    fn mixed_3_9() -> PcPresentation {
        // Z/3 x Z/9: g1 order 3, g2 with g2^3 = g3
        PcPresentation::new(
            3,
            3,
            vec![Word::identity(), Word::single(2, 1), Word::identity()],
            BTreeMap::new(),
        )
        .unwrap()
    }

    /// Literal full-grid elimination: one unknown per pair of nontrivial
    /// elements, one equation per triple. Slow; used only as an oracle.
    fn full_grid_dims(t: &GroupTable) -> (usize, usize, usize) {
        let n = t.order();
        let p = t.p();
        let cols = (n - 1) * (n - 1);
        let uidx = |x: u32, y: u32| (x as usize - 1) * (n - 1) + (y as usize - 1);
        let mut ech = Echelon::new(p, cols);
        let mut row = vec![0u32; cols];
        for x in 1..n as u32 {
            for y in 1..n as u32 {
                for z in 1..n as u32 {
                    row.iter_mut().for_each(|v| *v = 0);
                    let mut bump = |a: u32, b: u32, sign_plus: bool| {
                        if a != 0 && b != 0 {
                            let i = uidx(a, b);
                            row[i] = (row[i] + if sign_plus { 1 } else { p - 1 }) % p;
                        }
                    };
                    // f(x,y) + f(xy,z) - f(y,z) - f(x,yz) = 0
                    bump(x, y, true);
                    bump(t.mul(x, y), z, true);
                    bump(y, z, false);
                    bump(x, t.mul(y, z), false);
                    ech.insert(&row);
                }
            }
        }
        let z2 = cols - ech.rank();
        let mut bech = Echelon::new(p, cols);
        let mut v = vec![0u32; cols];
        for z in 1..n as u32 {
            v.iter_mut().for_each(|w| *w = 0);
            for x in 1..n as u32 {
                for y in 1..n as u32 {
                    let mut val = 0u32;
                    if x == z {
                        val += 1;
                    }
                    if y == z {
                        val += 1;
                    }
                    if t.mul(x, y) == z {
                        val += p - 1;
                    }
                    v[uidx(x, y)] = val % p;
                }
            }
            bech.insert(&v);
        }
        let b2 = bech.rank();
        (z2, b2, z2 - b2)
    }

    #[test]
    fn z3_dimensions_by_hand() {
        let t = elab(3, 1).build_table(100).unwrap();
        let c = h2_compute(&t, 256).unwrap();
        assert_eq!((c.d, c.z2, c.b2, c.h2), (1, 2, 1, 1));
    }

    #[test]
    fn abelian_h2_matches_rank_formula() {
        // for a finite abelian p-group, dim H^2 = d + C(d,2)
        let cases: Vec<(PcPresentation, usize)> = vec![
            (elab(3, 1), 1),
            (elab(3, 2), 2),
            (elab(3, 3), 3),
            (elab(5, 2), 2),
            (cyclic_p2(3), 1),
            (mixed_3_9(), 2),
        ];
        for (pres, d) in cases {
            let t = pres.build_table(100_000).unwrap();
            let c = h2_compute(&t, 256).unwrap();
            assert_eq!(c.d, d);
            assert_eq!(c.h2, d + d * (d - 1) / 2, "order {}", t.order());
        }
    }

    #[test]
    fn tree_elimination_agrees_with_full_grid() {
        let tables = vec![
            elab(3, 1).build_table(100).unwrap(),
            elab(3, 2).build_table(100).unwrap(),
            cyclic_p2(3).build_table(100).unwrap(),
            elab(3, 3).build_table(100).unwrap(),
            extraspecial(3).build_table(100).unwrap(),
            mixed_3_9().build_table(100).unwrap(),
            elab(5, 1).build_table(100).unwrap(),
        ];
        for t in tables {
            let c = h2_compute(&t, 256).unwrap();
            let (z2, b2, h2) = full_grid_dims(&t);
            assert_eq!((c.z2, c.b2, c.h2), (z2, b2, h2), "order {}", t.order());
        }
    }

    #[test]
    fn representatives_are_normalized_cocycles() {
        for t in [
            elab(3, 2).build_table(100).unwrap(),
            cyclic_p2(3).build_table(100).unwrap(),
            extraspecial(3).build_table(100).unwrap(),
        ] {
            let n = t.order();
            let p = t.p();
            let c = h2_compute(&t, 256).unwrap();
            for r in &c.reps {
                let grid = c.sys.fill_grid(&t, r);
                for x in 0..n as u32 {
                    assert_eq!(grid[x as usize * n], 0);
                    assert_eq!(grid[x as usize], grid[0]);
                }
                for x in 1..n as u32 {
                    for y in 1..n as u32 {
                        for z in 1..n as u32 {
                            let f = |a: u32, b: u32| grid[a as usize * n + b as usize];
                            let lhs = (f(x, y) + f(t.mul(x, y), z)) % p;
                            let rhs = (f(y, z) + f(x, t.mul(y, z))) % p;
                            assert_eq!(lhs, rhs, "cocycle identity at ({x},{y},{z})");
                        }
                    }
                }
                // grid restricts back to the original coordinates
                assert_eq!(&c.sys.restrict_grid(&grid), r);
            }
        }
    }

    #[test]
    fn eigensplit_cyclic_inversion_is_minus() {
        // inversion acts by -1 on H^2 of a cyclic group
        for pres in [elab(3, 1), cyclic_p2(3)] {
            let t = pres.build_table(100).unwrap();
            let signs = vec![false; pres.ngens()];
            let act = validate_involution(&pres, &diagonal_images(&pres, &signs), &t).unwrap();
            let c = h2_compute(&t, 256).unwrap();
            let split = h2_eigensplit(&t, &act, &c).unwrap();
            assert_eq!((split.plus, split.minus), (0, 1));
        }
    }

    #[test]
    fn eigensplit_identity_is_all_plus() {
        let pres = elab(3, 2);
        let t = pres.build_table(100).unwrap();
        let act = validate_involution(&pres, &identity_images(&pres), &t).unwrap();
        let c = h2_compute(&t, 256).unwrap();
        let split = h2_eigensplit(&t, &act, &c).unwrap();
        assert_eq!((split.plus, split.minus), (3, 0));
    }

    #[test]
    fn eigensplit_matches_kunneth_on_elementary_abelian() {
        // every diagonal sign pattern on (Z/3)^2 and (Z/3)^3
        for rank in [2usize, 3] {
            let pres = elab(3, rank);
            let t = pres.build_table(100).unwrap();
            let c = h2_compute(&t, 256).unwrap();
            for mask in 0..(1u32 << rank) {
                let signs: Vec<bool> = (0..rank).map(|i| mask & (1 << i) == 0).collect();
                let act = validate_involution(&pres, &diagonal_images(&pres, &signs), &t).unwrap();
                let split = h2_eigensplit(&t, &act, &c).unwrap();
                let want = kunneth_h2_split(act.d_plus, act.d_minus);
                assert_eq!(
                    (split.plus, split.minus),
                    (want.plus, want.minus),
                    "rank {rank} mask {mask:b}"
                );
            }
        }
    }

    #[test]
    fn eigensplit_sums_on_nonabelian_groups() {
        let ex = extraspecial(3);
        let t = ex.build_table(100).unwrap();
        let c = h2_compute(&t, 256).unwrap();
        let catalog: Vec<Vec<Word>> = vec![
            vec![Word::single(0, 1), Word::single(1, 2), Word::single(2, 2)],
            vec![Word::single(0, 2), Word::single(1, 2), Word::single(2, 1)],
            identity_images(&ex),
        ];
        for images in catalog {
            let act = validate_involution(&ex, &images, &t).unwrap();
            let split = h2_eigensplit(&t, &act, &c).unwrap();
            assert_eq!(split.plus + split.minus, c.h2);
        }

        let mc = metacyclic(3);
        let t = mc.build_table(100).unwrap();
        let c = h2_compute(&t, 256).unwrap();
        let inv_g1 = mc.element_inverse(&mc.generator_element(0)).to_word();
        let inv_g3 = mc.element_inverse(&mc.generator_element(2)).to_word();
        let images = vec![inv_g1, Word::single(1, 1), inv_g3, Word::single(3, 1)];
        let act = validate_involution(&mc, &images, &t).unwrap();
        let split = h2_eigensplit(&t, &act, &c).unwrap();
        assert_eq!(split.plus + split.minus, c.h2);
    }

    #[test]
    fn kunneth_split_frozen_values() {
        assert_eq!(kunneth_h2_split(1, 1), Dims { total: 3, plus: 1, minus: 2 });
        assert_eq!(kunneth_h2_split(2, 1), Dims { total: 6, plus: 3, minus: 3 });
        assert_eq!(kunneth_h2_split(1, 2), Dims { total: 6, plus: 2, minus: 4 });
        assert_eq!(kunneth_h2_split(0, 2), Dims { total: 3, plus: 1, minus: 2 });
        assert_eq!(kunneth_h2_split(3, 0), Dims { total: 6, plus: 6, minus: 0 });
        assert_eq!(kunneth_h2_split(0, 0), Dims { total: 0, plus: 0, minus: 0 });
    }

    #[test]
    fn qpzp_dims_subtract_and_reject_incoherent_pairs() {
        let h2 = Dims::new(3, 3);
        let d = Dims::new(2, 1);
        let q = h2_qpzp_dims(h2, d).unwrap();
        assert_eq!((q.total, q.plus, q.minus), (3, 1, 2));
        assert!(h2_qpzp_dims(Dims::new(0, 0), Dims::new(1, 0)).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let t = metacyclic(3).build_table(1000).unwrap();
        assert!(matches!(
            h2_compute(&t, 27),
            Err(CohomologyError::CapExceeded { order: 81, cap: 27 })
        ));
    }

    #[test]
    fn tate_trivial_action_of_zp_on_zp() {
        // Z/p acting trivially on Z/p: norm is multiplication by p = 0
        let m = TateModule::new(vec![3], vec![vec![1]], 3).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0.invariant_factors, vec![3]);
        assert_eq!(r.h_minus1.invariant_factors, vec![3]);
        assert_eq!(r.p_rank_h0, 1);
        assert_eq!(r.h0_order, r.h_minus1_order);
    }

    #[test]
    fn tate_inversion_on_odd_cyclic_vanishes() {
        let m = TateModule::new(vec![9], vec![vec![8]], 2).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0_order, 1);
        assert_eq!(r.h_minus1_order, 1);
        assert!(r.h0.invariant_factors.is_empty());
    }

    #[test]
    fn tate_inversion_on_z8() {
        let m = TateModule::new(vec![8], vec![vec![7]], 2).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0.invariant_factors, vec![2]);
        assert_eq!(r.h_minus1.invariant_factors, vec![2]);
        assert_eq!(r.p_rank_h0, 0);
    }

    #[test]
    fn tate_swap_on_z3_squared() {
        let m = TateModule::new(vec![3, 3], vec![vec![0, 1], vec![1, 0]], 2).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0_order, 1);
        assert_eq!(r.h_minus1_order, 1);
    }

    #[test]
    fn tate_trivial_action_on_z9_under_z3() {
        let m = TateModule::new(vec![9], vec![vec![1]], 3).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0.invariant_factors, vec![3]);
        assert_eq!(r.h_minus1.invariant_factors, vec![3]);
    }

    #[test]
    fn tate_module_validation() {
        // swapping Z/2 and Z/4 is not an endomorphism
        assert!(matches!(
            TateModule::new(vec![2, 4], vec![vec![0, 1], vec![1, 0]], 2),
            Err(CohomologyError::ActionNotEndomorphism { .. })
        ));
        // doubling on Z/4 is not invertible
        assert!(matches!(
            TateModule::new(vec![4], vec![vec![2]], 2),
            Err(CohomologyError::ActionNotBijective)
        ));
        // negation has order 2, not 3
        assert!(matches!(
            TateModule::new(vec![5], vec![vec![4]], 3),
            Err(CohomologyError::ActionOrderMismatch { order: 3 })
        ));
        // size cap
        assert!(matches!(
            TateModule::new(vec![65536, 2], vec![vec![1, 0], vec![0, 1]], 1),
            Err(CohomologyError::ModuleTooLarge { .. })
        ));
    }

    #[test]
    fn tate_mixed_module_invariants() {
        // sigma = -1 on Z/4 + Z/2: fixed = {x : 2x = 0} = Z/2 + Z/2,
        // norm = 0, so H^0 = Z/2 + Z/2 with two invariant factors
        let m = TateModule::new(vec![4, 2], vec![vec![3, 0], vec![0, 1]], 2).unwrap();
        let r = tate_h0_h1(&m, 3).unwrap();
        assert_eq!(r.h0.invariant_factors, vec![2, 2]);
        assert_eq!(r.h0_order, 4);
        assert_eq!(r.h_minus1_order, 4);
    }
}
