//! Cartan data of finite type and the simply connected root datum.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Element of the weight lattice `X` in fundamental-weight coordinates:
/// `lambda_i = <i, lambda>`.
pub type XWeight = Vec<i64>;

/// Element of the coweight lattice `Y` in simple-coroot coordinates.
pub type YVec = Vec<i64>;

/// A Cartan datum `(I, .)`: the symmetric pairing `i . j` with even positive
/// diagonal, of finite type. Not necessarily irreducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanDatum {
    /// `pairing[i][j] = i . j`.
    pub pairing: Vec<Vec<i64>>,
}

impl CartanDatum {
    pub fn new(pairing: Vec<Vec<i64>>) -> Result<Self> {
        let n = pairing.len();
        for row in &pairing {
            if row.len() != n {
                return Err(Error::Invalid("pairing matrix is not square".into()));
            }
        }
        let d = CartanDatum { pairing };
        for i in 0..n {
            if d.pairing[i][i] <= 0 || d.pairing[i][i] % 2 != 0 {
                return Err(Error::Invalid("diagonal i.i must be even positive".into()));
            }
            for j in 0..n {
                if d.pairing[i][j] != d.pairing[j][i] {
                    return Err(Error::Invalid("pairing must be symmetric".into()));
                }
                if i != j {
                    if d.pairing[i][j] > 0 {
                        return Err(Error::Invalid("off-diagonal i.j must be <= 0".into()));
                    }
                    if (2 * d.pairing[i][j]) % d.pairing[i][i] != 0 {
                        return Err(Error::Invalid("2(i.j)/(i.i) must be an integer".into()));
                    }
                }
            }
        }
        if !d.is_positive_definite() {
            return Err(Error::Invalid(
                "not finite type (pairing not positive definite)".into(),
            ));
        }
        Ok(d)
    }

    /// Standard datum from a family letter and rank, normalized so short roots
    /// have `i.i = 2`. Chains are `1 - 2 - ... - n` (Bourbaki): `B_n` short
    /// node at `n`, `C_n` long node at `n`, `D_n` fork `{n-1, n}` on `n-2`,
    /// `E`-types with node 2 attached to node 4, `F4` long `{1,2}`, `G2` long
    /// `{2}`. Composite labels join with `x`, e.g. `A1xA1`.
    pub fn by_name(name: &str) -> Result<Self> {
        let mut blocks: Vec<Vec<Vec<i64>>> = Vec::new();
        for part in name.split('x') {
            blocks.push(Self::simple_block(part.trim())?);
        }
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let mut pairing = vec![vec![0i64; n]; n];
        let mut off = 0;
        for b in blocks {
            let m = b.len();
            for i in 0..m {
                for j in 0..m {
                    pairing[off + i][off + j] = b[i][j];
                }
            }
            off += m;
        }
        CartanDatum::new(pairing)
    }

    fn simple_block(part: &str) -> Result<Vec<Vec<i64>>> {
        if part.is_empty() {
            return Err(Error::Invalid("empty Cartan type".into()));
        }
        let family = &part[..1];
        let rank: usize = part[1..]
            .parse()
            .map_err(|_| Error::Invalid(alloc::format!("bad Cartan type '{part}'")))?;
        if rank == 0 {
            return Err(Error::Invalid("rank must be positive".into()));
        }
        // norms[i] = i.i, chain edges carry i.j = -min(norms)/... use
        // i.j = -lcm-style values fixed per family below.
        let n = rank;
        let mut p = vec![vec![0i64; n]; n];
        let chain = |p: &mut Vec<Vec<i64>>, a: usize, b: usize, v: i64| {
            p[a][b] = v;
            p[b][a] = v;
        };
        match family {
            "A" => {
                for i in 0..n {
                    p[i][i] = 2;
                }
                for i in 0..n.saturating_sub(1) {
                    chain(&mut p, i, i + 1, -1);
                }
            }
            "B" => {
                // long 1..n-1 (i.i = 4), short n (i.i = 2)
                if n < 2 {
                    return Err(Error::Invalid("B needs rank >= 2".into()));
                }
                for i in 0..n - 1 {
                    p[i][i] = 4;
                }
                p[n - 1][n - 1] = 2;
                for i in 0..n - 2 {
                    chain(&mut p, i, i + 1, -2);
                }
                chain(&mut p, n - 2, n - 1, -2);
            }
            "C" => {
                // short 1..n-1 (i.i = 2), long n (i.i = 4)
                if n < 2 {
                    return Err(Error::Invalid("C needs rank >= 2".into()));
                }
                for i in 0..n - 1 {
                    p[i][i] = 2;
                }
                p[n - 1][n - 1] = 4;
                for i in 0..n - 2 {
                    chain(&mut p, i, i + 1, -1);
                }
                chain(&mut p, n - 2, n - 1, -2);
            }
            "D" => {
                if n < 3 {
                    return Err(Error::Invalid("D needs rank >= 3".into()));
                }
                for i in 0..n {
                    p[i][i] = 2;
                }
                for i in 0..n - 2 {
                    chain(&mut p, i, i + 1, -1);
                }
                chain(&mut p, n - 3, n - 1, -1);
            }
            "E" => {
                if !(6..=8).contains(&n) {
                    return Err(Error::Invalid("E needs rank 6..8".into()));
                }
                for i in 0..n {
                    p[i][i] = 2;
                }
                // Bourbaki: chain 1-3-4-5-...-n, node 2 attached to 4
                chain(&mut p, 0, 2, -1);
                for i in 2..n - 1 {
                    chain(&mut p, i, i + 1, -1);
                }
                chain(&mut p, 1, 3, -1);
            }
            "F" => {
                if n != 4 {
                    return Err(Error::Invalid("F needs rank 4".into()));
                }
                // long 1,2 (i.i = 4), short 3,4 (i.i = 2)
                p[0][0] = 4;
                p[1][1] = 4;
                p[2][2] = 2;
                p[3][3] = 2;
                chain(&mut p, 0, 1, -2);
                chain(&mut p, 1, 2, -2);
                chain(&mut p, 2, 3, -1);
            }
            "G" => {
                if n != 2 {
                    return Err(Error::Invalid("G needs rank 2".into()));
                }
                // short 1 (i.i = 2), long 2 (i.i = 6)
                p[0][0] = 2;
                p[1][1] = 6;
                chain(&mut p, 0, 1, -3);
            }
            _ => return Err(Error::Invalid(alloc::format!("unknown family '{family}'"))),
        }
        Ok(p)
    }

    fn is_positive_definite(&self) -> bool {
        // leading principal minors via fraction-free Bareiss elimination
        let n = self.pairing.len();
        for k in 1..=n {
            let mut m: Vec<Vec<i128>> = (0..k)
                .map(|i| (0..k).map(|j| self.pairing[i][j] as i128).collect())
                .collect();
            let mut prev = 1i128;
            let mut sign = 1i128;
            let mut singular = false;
            for p in 0..k {
                if m[p][p] == 0 {
                    match (p + 1..k).find(|&r| m[r][p] != 0) {
                        None => {
                            singular = true;
                            break;
                        }
                        Some(r) => {
                            m.swap(p, r);
                            sign = -sign;
                        }
                    }
                }
                for r in p + 1..k {
                    for c in p + 1..k {
                        m[r][c] = (m[r][c] * m[p][p] - m[r][p] * m[p][c]) / prev;
                    }
                    m[r][p] = 0;
                }
                prev = m[p][p];
            }
            if singular || sign * m[k - 1][k - 1] <= 0 {
                return false;
            }
        }
        true
    }

    pub fn rank(&self) -> usize {
        self.pairing.len()
    }

    /// `d_i = (i.i)/2`, the power of `q` in `q_i`.
    pub fn d(&self, i: usize) -> i64 {
        self.pairing[i][i] / 2
    }

    /// Cartan matrix entry `a_ij = 2 (i.j) / (i.i)`.
    pub fn cartan(&self, i: usize, j: usize) -> i64 {
        2 * self.pairing[i][j] / self.pairing[i][i]
    }

    /// `i . j`.
    pub fn dot(&self, i: usize, j: usize) -> i64 {
        self.pairing[i][j]
    }

    /// Pairing extended bilinearly to `Z[I]` (simple-root coordinates).
    pub fn dot_vec(&self, a: &[i64], b: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.rank() {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.rank() {
                s += a[i] * self.pairing[i][j] * b[j];
            }
        }
        s
    }
}

/// Simply connected root datum: `X = Z^I` in fundamental-weight coordinates,
/// `Y = Z^I` in simple-coroot coordinates, positive roots enumerated by
/// increasing height.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub cartan: CartanDatum,
    /// Positive roots in simple-root coordinates, sorted by (height, coords).
    pub pos_roots: Vec<Vec<i64>>,
}

impl RootDatum {
    pub fn new(cartan: CartanDatum) -> Self {
        let n = cartan.rank();
        // closure of simple roots under simple reflections, root coordinates
        let mut seen: alloc::collections::BTreeSet<Vec<i64>> = alloc::collections::BTreeSet::new();
        let mut queue: Vec<Vec<i64>> = Vec::new();
        for i in 0..n {
            let mut r = vec![0i64; n];
            r[i] = 1;
            seen.insert(r.clone());
            queue.push(r);
        }
        while let Some(r) = queue.pop() {
            for i in 0..n {
                let s = Self::reflect_root(&cartan, i, &r);
                if s.iter().all(|&c| c >= 0) && !seen.contains(&s) {
                    seen.insert(s.clone());
                    queue.push(s);
                }
            }
        }
        let mut pos_roots: Vec<Vec<i64>> = seen.into_iter().collect();
        pos_roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        RootDatum { cartan, pos_roots }
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    /// `s_i` applied to a vector in simple-root coordinates.
    pub fn reflect_root(cartan: &CartanDatum, i: usize, r: &[i64]) -> Vec<i64> {
        let mut out = r.to_vec();
        let mut c = 0i64;
        for (k, &rk) in r.iter().enumerate() {
            c += cartan.cartan(i, k) * rk;
        }
        out[i] -= c;
        out
    }

    /// Simple root `alpha_i` as an element of `X` (fundamental coordinates):
    /// `(alpha_i)_j = a_ji`.
    pub fn simple_root_x(&self, i: usize) -> XWeight {
        (0..self.rank()).map(|j| self.cartan.cartan(j, i)).collect()
    }

    /// A vector of `Z[I]` converted to `X` coordinates.
    pub fn root_to_x(&self, r: &[i64]) -> XWeight {
        let mut out = vec![0i64; self.rank()];
        for (i, &c) in r.iter().enumerate() {
            if c != 0 {
                let a = self.simple_root_x(i);
                for j in 0..self.rank() {
                    out[j] += c * a[j];
                }
            }
        }
        out
    }

    /// Express an `X`-vector in simple-root coordinates if it lies in the
    /// root lattice.
    pub fn x_to_root(&self, x: &XWeight) -> Option<Vec<i64>> {
        // solve A^T c = x over the integers, A^T invertible (finite type)
        let n = self.rank();
        let m: Vec<Vec<i128>> = (0..n)
            .map(|j| (0..n).map(|i| self.cartan.cartan(j, i) as i128).collect())
            .collect();
        let rhs: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        // fraction-free forward elimination, then exact back substitution over rationals
        // (small n, do simple rational elimination with i128 num/den pairs)
        let mut c = vec![(0i128, 1i128); n];
        // Gaussian elimination with rational arithmetic
        let mut rows: Vec<(Vec<(i128, i128)>, (i128, i128))> = m
            .iter()
            .map(|r| {
                (
                    r.iter().map(|&v| (v, 1i128)).collect::<Vec<_>>(),
                    (0i128, 1i128),
                )
            })
            .collect();
        for (r, row) in rows.iter_mut().enumerate() {
            row.1 = (rhs[r], 1);
        }
        let radd = |a: (i128, i128), b: (i128, i128)| -> (i128, i128) {
            norm_frac((a.0 * b.1 + b.0 * a.1, a.1 * b.1))
        };
        let rmul = |a: (i128, i128), b: (i128, i128)| -> (i128, i128) {
            norm_frac((a.0 * b.0, a.1 * b.1))
        };
        let rneg = |a: (i128, i128)| (-a.0, a.1);
        for p in 0..n {
            let piv = (p..n).find(|&r| rows[r].0[p].0 != 0)?;
            rows.swap(p, piv);
            let pv = rows[p].0[p];
            let pinv = norm_frac((pv.1, pv.0));
            for c2 in 0..n {
                rows[p].0[c2] = rmul(rows[p].0[c2], pinv);
            }
            rows[p].1 = rmul(rows[p].1, pinv);
            for r in 0..n {
                if r != p && rows[r].0[p].0 != 0 {
                    let f = rneg(rows[r].0[p]);
                    for c2 in 0..n {
                        let t = rmul(f, rows[p].0[c2]);
                        rows[r].0[c2] = radd(rows[r].0[c2], t);
                    }
                    let t = rmul(f, rows[p].1);
                    rows[r].1 = radd(rows[r].1, t);
                }
            }
        }
        for p in 0..n {
            c[p] = rows[p].1;
            if c[p].1 != 1 {
                return None;
            }
        }
        Some(c.into_iter().map(|(num, _)| num as i64).collect())
    }

    /// `<mu, lambda>` for `mu` in `Y` (coroot coords) and `lambda` in `X`
    /// (fundamental coords).
    pub fn pair(&self, mu: &YVec, lambda: &XWeight) -> i64 {
        mu.iter().zip(lambda.iter()).map(|(a, b)| a * b).sum()
    }

    /// `rho` in `X`: all fundamental coordinates 1.
    pub fn rho(&self) -> XWeight {
        vec![1; self.rank()]
    }

    /// Height of a root-lattice vector.
    pub fn height(r: &[i64]) -> i64 {
        r.iter().sum()
    }

    /// `2 rho_J` in `X` coordinates (sum of the positive roots of the
    /// parabolic subsystem spanned by `subset`).
    pub fn two_rho_sub_x(&self, subset: &[usize]) -> XWeight {
        let mut acc = vec![0i64; self.rank()];
        for r in self.sub_positive_roots(subset) {
            let x = self.root_to_x(&r);
            for j in 0..self.rank() {
                acc[j] += x[j];
            }
        }
        acc
    }

    /// `2 rho^vee_J` in `Y` coordinates (sum of the positive coroots of the
    /// subsystem spanned by `subset`).
    pub fn two_rho_check_sub_y(&self, subset: &[usize]) -> YVec {
        let mut acc = vec![0i64; self.rank()];
        for r in self.sub_positive_roots(subset) {
            // coroot of r: 2 r / (r.r), in simple-coroot coordinates
            // r^vee = sum_i c_i (alpha_i . alpha_i) / (r.r) alpha_i^vee
            let rr = self.cartan.dot_vec(&r, &r);
            for i in 0..self.rank() {
                if r[i] != 0 {
                    let num = r[i] * self.cartan.dot(i, i);
                    debug_assert!(num % rr == 0, "coroot coordinates must be integral");
                    acc[i] += num / rr;
                }
            }
        }
        acc
    }

    /// Positive roots lying in the span of `subset`.
    pub fn sub_positive_roots(&self, subset: &[usize]) -> Vec<Vec<i64>> {
        let inset: alloc::collections::BTreeSet<usize> = subset.iter().copied().collect();
        self.pos_roots
            .iter()
            .filter(|r| {
                r.iter()
                    .enumerate()
                    .all(|(i, &c)| c == 0 || inset.contains(&i))
            })
            .cloned()
            .collect()
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn norm_frac((n, d): (i128, i128)) -> (i128, i128) {
    if n == 0 {
        return (0, 1);
    }
    let g = gcd_i128(n, d);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    (n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_roots() {
        let rd = RootDatum::new(CartanDatum::by_name("A2").unwrap());
        assert_eq!(rd.pos_roots.len(), 3);
    }

    #[test]
    fn b2_roots() {
        let rd = RootDatum::new(CartanDatum::by_name("B2").unwrap());
        assert_eq!(rd.pos_roots.len(), 4);
    }

    #[test]
    fn root_counts_match_classical() {
        for (name, count) in [
            ("A3", 6),
            ("C3", 9),
            ("D4", 12),
            ("F4", 24),
            ("G2", 6),
            ("A1xA1", 2),
            ("B3", 9),
        ] {
            let rd = RootDatum::new(CartanDatum::by_name(name).unwrap());
            assert_eq!(rd.pos_roots.len(), count, "{name}");
        }
    }

    #[test]
    fn cartan_entries_b2() {
        let d = CartanDatum::by_name("B2").unwrap();
        // node 1 long, node 2 short
        assert_eq!(d.cartan(0, 1), -1);
        assert_eq!(d.cartan(1, 0), -2);
        assert_eq!(d.d(0), 2);
        assert_eq!(d.d(1), 1);
    }

    #[test]
    fn x_root_roundtrip() {
        let rd = RootDatum::new(CartanDatum::by_name("D4").unwrap());
        for r in &rd.pos_roots {
            let x = rd.root_to_x(r);
            assert_eq!(rd.x_to_root(&x).as_deref(), Some(r.as_slice()));
        }
        // a non-root-lattice vector in A2: single fundamental weight
        let rd = RootDatum::new(CartanDatum::by_name("A2").unwrap());
        assert_eq!(rd.x_to_root(&alloc::vec![1, 0]), None);
    }

    #[test]
    fn rejects_non_finite_type() {
        // affine A1 tilde: a_ij = -2 both ways
        let p = alloc::vec![alloc::vec![2, -2], alloc::vec![-2, 2]];
        assert!(CartanDatum::new(p).is_err());
    }
}
