//! Integer lattices: Smith normal form with transforms, echelon bases, and the
//! canonical coset reduction that picks class representatives.

use std::cmp::Ordering;

pub type IntVec = Vec<i64>;

/// Total order on integers used for canonical representatives: 0, 1, -1, 2, -2, ...
///
/// It is a well-order, so every nonempty set of integer vectors compared
/// lexicographically under it has a least element.
pub fn int_key_cmp(a: i64, b: i64) -> Ordering {
    (a.unsigned_abs(), a < 0).cmp(&(b.unsigned_abs(), b < 0))
}

pub fn vec_key_cmp(a: &[i64], b: &[i64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match int_key_cmp(*x, *y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i64>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[IntVec]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        IntMat { rows: r, cols: c, data }
    }

    pub fn from_columns(cols: &[IntVec], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for i in 0..nrows {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> IntVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[i64]) -> IntVec {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                for j in 0..other.cols {
                    out[(i, j)] += self[(i, k)] * other[(k, j)];
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: i64) {
        for j in 0..self.cols {
            let v = self[(src, j)];
            self[(dst, j)] += factor * v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: i64) {
        for i in 0..self.rows {
            let v = self[(i, src)];
            self[(i, dst)] += factor * v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            self[(r, j)] = -self[(r, j)];
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            self[(i, c)] = -self[(i, c)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `diag = u * a * v` with `u`, `v` unimodular; `u_inv` is tracked alongside.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub diag: IntMat,
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
}

impl SmithForm {
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.diag.rows.min(self.diag.cols))
            .map(|i| self.diag[(i, i)])
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().iter().filter(|&&d| d != 0).count()
    }

    /// Some integer `m` with `a * m = b`, if one exists.
    pub fn solve(&self, b: &[i64]) -> Option<IntVec> {
        let ub = self.u.mul_vec(b);
        let mut y = vec![0i64; self.diag.cols];
        for (i, &val) in ub.iter().enumerate() {
            let d = if i < self.diag.cols { self.diag[(i, i)] } else { 0 };
            if d == 0 {
                if val != 0 {
                    return None;
                }
            } else {
                if val % d != 0 {
                    return None;
                }
                y[i] = val / d;
            }
        }
        Some(self.v.mul_vec(&y))
    }
}

pub fn smith_normal_form(a: &IntMat) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntMat::identity(m);
    let mut u_inv = IntMat::identity(m);
    let mut v = IntMat::identity(n);

    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if s[(i, j)] != 0
                        && best.is_none_or(|(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { diag: s, u, u_inv, v };
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = s[(t, t)];
            let mut clean = true;
            for i in (t + 1)..m {
                let f = s[(i, t)].div_euclid(p);
                if f != 0 {
                    s.add_row(i, t, -f);
                    u.add_row(i, t, -f);
                    u_inv.add_col(t, i, f);
                }
                if s[(i, t)] != 0 {
                    clean = false;
                }
            }
            for j in (t + 1)..n {
                let f = s[(t, j)].div_euclid(p);
                if f != 0 {
                    s.add_col(j, t, -f);
                    v.add_col(j, t, -f);
                }
                if s[(t, j)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block
            let offending = ((t + 1)..m).find(|&i| ((t + 1)..n).any(|j| s[(i, j)] % p != 0));
            match offending {
                Some(i) => {
                    s.add_row(t, i, 1);
                    u.add_row(t, i, 1);
                    u_inv.add_col(i, t, -1);
                }
                None => break,
            }
        }
        if s[(t, t)] < 0 {
            s.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
    }
    SmithForm { diag: s, u, u_inv, v }
}

/// A sublattice of `Z^n` held as an echelon basis (pivots strictly increasing, positive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<IntVec>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: &[IntVec]) -> Self {
        let mut rows: Vec<IntVec> = gens
            .iter()
            .filter(|g| g.iter().any(|&x| x != 0))
            .cloned()
            .collect();
        let mut basis = Vec::new();
        let mut pivots = Vec::new();
        for c in 0..dim {
            // gcd-combine all rows with a nonzero entry in column c
            loop {
                let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
                if idx.len() <= 1 {
                    break;
                }
                idx.sort_by_key(|&i| rows[i][c].abs());
                let p = idx[0];
                for &i in &idx[1..] {
                    let f = rows[i][c].div_euclid(rows[p][c]);
                    let pr = rows[p].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pr) {
                        *x -= f * y;
                    }
                }
                rows.retain(|r| r.iter().any(|&x| x != 0));
            }
            if let Some(i) = rows.iter().position(|r| r[c] != 0) {
                let mut r = rows.swap_remove(i);
                if r[c] < 0 {
                    r.iter_mut().for_each(|x| *x = -*x);
                }
                basis.push(r);
                pivots.push(c);
            }
        }
        Lattice { dim, basis, pivots }
    }

    /// Column lattice of an integer matrix.
    pub fn column_span(m: &IntMat) -> Self {
        let cols: Vec<IntVec> = (0..m.cols).map(|j| m.column(j)).collect();
        Self::from_generators(m.rows, &cols)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn basis(&self) -> &[IntVec] {
        &self.basis
    }

    /// Index `[Z^n : L]`, `None` when infinite.
    pub fn index(&self) -> Option<u64> {
        if !self.is_full_rank() {
            return None;
        }
        Some(
            self.basis
                .iter()
                .zip(&self.pivots)
                .map(|(b, &p)| b[p] as u64)
                .product(),
        )
    }

    /// Least element of `v + L` under [`vec_key_cmp`].
    pub fn reduce(&self, v: &[i64]) -> IntVec {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let piv = row[p];
            let r = out[p].rem_euclid(piv);
            let target = if r != 0 && int_key_cmp(r - piv, r) == Ordering::Less {
                r - piv
            } else {
                r
            };
            let f = (out[p] - target) / piv;
            if f != 0 {
                for (x, y) in out.iter_mut().zip(row) {
                    *x -= f * y;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Coset representatives of `Z^n / L` (full rank only), in canonical reduced form.
    pub fn coset_representatives(&self) -> Option<Vec<IntVec>> {
        if !self.is_full_rank() {
            return None;
        }
        // with an echelon basis every coset has a unique member with 0 <= x_p < pivot
        let ranges: Vec<i64> = self.basis.iter().zip(&self.pivots).map(|(b, &p)| b[p]).collect();
        let mut reps = Vec::new();
        let mut cur = vec![0i64; self.dim];
        loop {
            reps.push(self.reduce(&cur));
            let mut i = 0;
            loop {
                if i == self.dim {
                    reps.sort_by(|a, b| vec_key_cmp(a, b));
                    return Some(reps);
                }
                cur[i] += 1;
                if cur[i] < ranges[i] {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }
}

pub fn det_int(m: &IntMat) -> i64 {
    let snf = smith_normal_form(m);
    // |det| from invariant factors, sign from a rational elimination
    let abs: i64 = snf.invariant_factors().iter().product();
    if abs == 0 {
        return 0;
    }
    let q = crate::rational::QMat::from_int_rows(
        &(0..m.rows)
            .map(|i| (0..m.cols).map(|j| m[(i, j)]).collect())
            .collect::<Vec<_>>(),
    );
    let d = q.det();
    if d < crate::rational::q(0) {
        -abs
    } else {
        abs
    }
}
