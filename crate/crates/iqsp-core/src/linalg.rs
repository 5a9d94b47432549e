//! Exact sparse linear algebra over `Q(q)`.
//!
//! One reduced-row-echelon structure drives everything: Serre-ideal quotients,
//! module null spaces, span saturation, kernel computation, and inhomogeneous
//! solves. Rows are sparse, columns are externally-fixed indices, pivots are
//! leftmost, and the echelon is kept fully reduced so that substitution is a
//! single pass.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::scalars::RatFunc;

/// Sparse vector: sorted (column, nonzero coefficient) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    pub entries: Vec<(u32, RatFunc)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec::default()
    }

    pub fn from_entries(mut entries: Vec<(u32, RatFunc)>) -> Self {
        entries.retain(|(_, c)| !c.is_zero());
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u32, RatFunc)> = Vec::with_capacity(entries.len());
        for (col, c) in entries {
            match out.last_mut() {
                Some((lc, acc)) if *lc == col => {
                    *acc = acc.add(&c);
                }
                _ => out.push((col, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        SparseVec { entries: out }
    }

    pub fn unit(col: u32) -> Self {
        SparseVec {
            entries: alloc::vec![(col, RatFunc::one())],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, col: u32) -> Option<&RatFunc> {
        self.entries
            .binary_search_by_key(&col, |e| e.0)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|(col, v)| (*col, v.mul(c)))
                .collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: &RatFunc, other: &SparseVec) -> Self {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.entries.len() || j < other.entries.len() {
            let take_left = match (self.entries.get(i), other.entries.get(j)) {
                (Some(a), Some(b)) => {
                    if a.0 == b.0 {
                        let v = a.1.add(&c.mul(&b.1));
                        if !v.is_zero() {
                            out.push((a.0, v));
                        }
                        i += 1;
                        j += 1;
                        continue;
                    }
                    a.0 < b.0
                }
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_left {
                out.push(self.entries[i].clone());
                i += 1;
            } else {
                let b = &other.entries[j];
                let v = c.mul(&b.1);
                if !v.is_zero() {
                    out.push((b.0, v));
                }
                j += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, other: &SparseVec) -> Self {
        self.axpy(&RatFunc::one(), other)
    }

    pub fn leading_col(&self) -> Option<u32> {
        self.entries.first().map(|e| e.0)
    }
}

/// Row echelon form over an externally fixed column order. Rows are kept
/// forward-reduced only (pivot normalized to 1); `reduce` follows pivot
/// chains, so queries stay exact while insertions stay sparse.
#[derive(Clone, Debug, Default)]
pub struct RowSpace {
    /// pivot column -> row (pivot entry normalized to 1).
    rows: BTreeMap<u32, SparseVec>,
}

impl RowSpace {
    pub fn new() -> Self {
        RowSpace::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, col: u32) -> bool {
        self.rows.contains_key(&col)
    }

    pub fn row_for_pivot(&self, col: u32) -> Option<&SparseVec> {
        self.rows.get(&col)
    }

    /// Substitute all pivot columns out of `v`.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut out = v.clone();
        loop {
            let hit = out
                .entries
                .iter()
                .find(|(col, _)| self.rows.contains_key(col))
                .map(|(col, c)| (*col, c.clone()));
            match hit {
                None => return out,
                Some((col, c)) => {
                    out = out.axpy(&c.neg(), &self.rows[&col]);
                    // the pivot row has a 1 at `col` and nothing else in pivot
                    // columns, so `col` is now eliminated
                }
            }
        }
    }

    /// Insert a row; returns the new pivot column, or `None` if the row was
    /// already in the span.
    pub fn insert(&mut self, v: SparseVec) -> Option<u32> {
        let red = self.reduce(&v);
        let (pivot, lead) = match red.entries.first() {
            None => return None,
            Some((c, l)) => (*c, l.clone()),
        };
        let row = red.scale(&lead.inv());
        self.rows.insert(pivot, row);
        Some(pivot)
    }

    /// Fully back-substituted copy (rows carry no pivot columns but their
    /// own); needed when rows are read off directly, e.g. for kernels.
    pub fn normalized(&self) -> RowSpace {
        let mut out = RowSpace::new();
        for (p, row) in &self.rows {
            // strip the pivot, reduce the remainder, and put the pivot back
            let rest = SparseVec::from_entries(
                row.entries
                    .iter()
                    .filter(|(c, _)| c != p)
                    .cloned()
                    .collect(),
            );
            let mut red = self.reduce(&rest);
            red.entries.push((*p, RatFunc::one()));
            red.entries.sort_by_key(|e| e.0);
            out.rows.insert(*p, red);
        }
        out
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }
}

/// Dense kernel computation: given rows (equations) over `ncols` unknowns,
/// return a basis of the solution space of `A x = 0` as sparse vectors.
pub fn kernel(rows: &[SparseVec], ncols: u32) -> Vec<SparseVec> {
    let mut rs = RowSpace::new();
    for r in rows {
        rs.insert(r.clone());
    }
    kernel_of_rowspace(&rs, ncols)
}

/// Kernel straight from an echelonized row space.
pub fn kernel_of_rowspace(rs: &RowSpace, ncols: u32) -> Vec<SparseVec> {
    let rs = rs.normalized();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if rs.is_pivot(free) {
            continue;
        }
        // x_free = 1, x_pivot = -row[free]
        let mut entries = alloc::vec![(free, RatFunc::one())];
        for (p, row) in &rs.rows {
            if let Some(c) = row.get(free) {
                entries.push((*p, c.neg()));
            }
        }
        basis.push(SparseVec::from_entries(entries));
    }
    basis
}

/// Incremental solver for expressing vectors in the span of inserted ones.
///
/// Vectors live on columns `0..ncols`; each inserted vector is tagged, and
/// `express` returns the tag weights reproducing a query vector exactly.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    ncols: u32,
    ntags: u32,
    rs: RowSpace,
}

impl SpanSolver {
    pub fn new(ncols: u32) -> Self {
        SpanSolver {
            ncols,
            ntags: 0,
            rs: RowSpace::new(),
        }
    }

    /// Insert a spanning vector; the tag is its insertion index. Returns
    /// `false` when the vector was dependent on earlier ones.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let tag = self.ntags;
        self.ntags += 1;
        let mut aug = v.clone();
        aug.entries.push((self.ncols + tag, RatFunc::one()));
        // augmented entries stay sorted: tag columns sit above ncols
        let piv = self.rs.insert(aug);
        match piv {
            Some(p) if p < self.ncols => true,
            // pivot landed in the tag part: original vector was dependent
            _ => false,
        }
    }

    pub fn rank(&self) -> usize {
        self.rs.pivots().filter(|p| *p < self.ncols).count()
    }

    /// Coefficients expressing `v` over inserted vectors, or `None` if `v`
    /// is outside the span. Tags of dependent insertions never appear.
    pub fn express(&self, v: &SparseVec) -> Option<Vec<(u32, RatFunc)>> {
        let red = self.rs.reduce(v);
        let mut coeffs = Vec::new();
        for (col, c) in red.entries {
            if col < self.ncols {
                return None;
            }
            coeffs.push((col - self.ncols, c.neg()));
        }
        Some(coeffs)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.express(v).is_some()
    }
}

/// Solve the inhomogeneous system given by `(row, rhs)` pairs over unknowns
/// `0..ncols`. Returns `Ok(Some(x))` for a unique solution, `Ok(None)` when
/// the system is consistent but underdetermined, `Err(())` when inconsistent.
pub fn solve_unique(
    eqs: &[(SparseVec, RatFunc)],
    ncols: u32,
) -> core::result::Result<Option<Vec<RatFunc>>, ()> {
    let mut rs = RowSpace::new();
    for (row, rhs) in eqs {
        let mut aug = row.clone();
        if !rhs.is_zero() {
            aug.entries.push((ncols, rhs.clone()));
        }
        rs.insert(aug);
    }
    if rs.is_pivot(ncols) {
        return Err(());
    }
    let rs = rs.normalized();
    let mut x = alloc::vec![RatFunc::zero(); ncols as usize];
    let mut pivots = 0;
    for (p, row) in &rs.rows {
        pivots += 1;
        // unique solution requires every non-pivot entry to be the rhs column
        for (col, c) in &row.entries {
            if *col != *p && *col < ncols {
                return Ok(None);
            }
            if *col == ncols {
                x[*p as usize] = c.clone();
            }
        }
    }
    if pivots < ncols as usize {
        return Ok(None);
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(u32, i64)]) -> SparseVec {
        SparseVec::from_entries(
            entries
                .iter()
                .map(|&(c, x)| (c, RatFunc::from_int(x)))
                .collect(),
        )
    }

    #[test]
    fn rowspace_rank_and_membership() {
        let mut rs = RowSpace::new();
        assert_eq!(rs.insert(v(&[(0, 1), (1, 2)])), Some(0));
        assert_eq!(rs.insert(v(&[(0, 2), (1, 4)])), None);
        assert_eq!(rs.insert(v(&[(1, 1), (2, 1)])), Some(1));
        assert_eq!(rs.rank(), 2);
        assert!(rs.contains(&v(&[(0, 1), (1, 2)])));
        assert!(rs.contains(&v(&[(0, 3), (1, 7), (2, 1)])));
        assert!(!rs.contains(&v(&[(2, 1)])));
    }

    #[test]
    fn kernel_dimensions() {
        // x0 + x1 = 0, x1 + x2 = 0 over 3 unknowns -> kernel dim 1
        let rows = alloc::vec![v(&[(0, 1), (1, 1)]), v(&[(1, 1), (2, 1)])];
        let k = kernel(&rows, 3);
        assert_eq!(k.len(), 1);
        // check the kernel vector satisfies the equations
        let kv = &k[0];
        for r in &rows {
            let mut dot = RatFunc::zero();
            for (c, x) in &r.entries {
                if let Some(y) = kv.get(*c) {
                    dot = dot.add(&x.mul(y));
                }
            }
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn span_solver_expresses() {
        let mut ss = SpanSolver::new(3);
        assert!(ss.insert(&v(&[(0, 1), (1, 1)])));
        assert!(ss.insert(&v(&[(1, 1)])));
        assert!(!ss.insert(&v(&[(0, 1)]))); // dependent
        let target = v(&[(0, 2), (1, 5)]);
        let expr = ss.express(&target).unwrap();
        // reconstruct
        let gens = [v(&[(0, 1), (1, 1)]), v(&[(1, 1)]), v(&[(0, 1)])];
        let mut acc = SparseVec::new();
        for (tag, c) in expr {
            acc = acc.axpy(&c, &gens[tag as usize]);
        }
        assert_eq!(acc, target);
        assert!(ss.express(&v(&[(2, 1)])).is_none());
    }

    #[test]
    fn unique_solve() {
        // x0 + x1 = 3, x1 = 1
        let eqs = alloc::vec![
            (v(&[(0, 1), (1, 1)]), RatFunc::from_int(3)),
            (v(&[(1, 1)]), RatFunc::from_int(1)),
        ];
        let x = solve_unique(&eqs, 2).unwrap().unwrap();
        assert_eq!(x[0], RatFunc::from_int(2));
        assert_eq!(x[1], RatFunc::from_int(1));
        // inconsistent
        let eqs2 = alloc::vec![
            (v(&[(0, 1)]), RatFunc::from_int(1)),
            (v(&[(0, 1)]), RatFunc::from_int(2)),
        ];
        assert!(solve_unique(&eqs2, 1).is_err());
        // underdetermined
        let eqs3 = alloc::vec![(v(&[(0, 1), (1, 1)]), RatFunc::from_int(1))];
        assert_eq!(solve_unique(&eqs3, 2).unwrap(), None);
    }
}
