//! Exact rational scalars, vectors and small dense matrices.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used throughout the exact computation path.
pub type Q = Ratio<i128>;

pub type QVec = Vec<Q>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Parses `"p/q"`, `"p"` or a plain integer string.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<i128>().ok().map(Q::from_integer),
    }
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Closest rational with denominator `2^bits` to `x`.
pub fn dyadic(x: f64, bits: u32) -> Q {
    let scale = (1i128 << bits) as f64;
    Q::new((x * scale).round() as i128, 1i128 << bits)
}

pub fn is_integer_vec(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_integer())
}

pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Dense rational matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn diag(entries: &[Q]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend_from_slice(row);
        }
        QMat { rows: r, cols: c, data }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<Q>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| q(x as i128)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| vec_to_f64(self.row(i))).collect()
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn mul_vec(&self, v: &[Q]) -> QVec {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Q::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Q) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Scales row `i` by `s`; used for multiplication by diagonal sign matrices on the left.
    pub fn scale_rows(&self, signs: &[Q]) -> QMat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] *= signs[i];
            }
        }
        out
    }

    pub fn scale_cols(&self, signs: &[Q]) -> QMat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] *= signs[j];
            }
        }
        out
    }

    pub fn inf_norm(&self) -> Q {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(Q::zero(), |acc, x| acc + x.abs()))
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// Row echelon form by Gaussian elimination; returns the reduced matrix, pivot
    /// columns and the sign of the row permutation.
    fn echelon(&self) -> (QMat, Vec<usize>, i32) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut sign = 1;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
                sign = -sign;
            }
            let piv = m[(r, c)];
            for i in (r + 1)..m.rows {
                let factor = m[(i, c)] / piv;
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let sub = factor * m[(r, j)];
                    m[(i, j)] -= sub;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, sign)
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square(), "determinant of non-square matrix");
        let (m, pivots, sign) = self.echelon();
        if pivots.len() < self.rows {
            return Q::zero();
        }
        let mut d = q(sign as i128);
        for i in 0..self.rows {
            d *= m[(i, i)];
        }
        d
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    /// Solves `self * x = b`. Returns `Ok(Some(x))` for a unique solution, `Ok(None)` when
    /// the system is inconsistent and `Err(rank)` when solutions exist but are not unique.
    pub fn solve(&self, b: &[Q]) -> Result<Option<QVec>, usize> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, self.cols)] = b[i];
        }
        let (m, pivots, _) = aug.echelon();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        if pivots.len() < self.cols {
            return Err(pivots.len());
        }
        let n = self.cols;
        let mut x = vec![Q::zero(); n];
        for i in (0..n).rev() {
            let mut acc = m[(i, n)];
            for j in (i + 1)..n {
                acc -= m[(i, j)] * x[j];
            }
            x[i] = acc / m[(i, i)];
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![Q::zero(); n];
            e[j] = Q::one();
            match self.solve(&e) {
                Ok(Some(x)) => cols.push(x),
                _ => return None,
            }
        }
        let mut inv = QMat::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }

    /// Some solution of `self * x = b` with free variables set to zero.
    pub fn solve_particular(&self, b: &[Q]) -> Option<QVec> {
        let mut aug = QMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, self.cols)] = b[i];
        }
        let (red, pivots) = aug.reduced_echelon();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = red[(r, self.cols)];
        }
        Some(x)
    }

    fn reduced_echelon(&self) -> (QMat, Vec<usize>) {
        let (mut red, pivots, _) = self.echelon();
        for (r, &c) in pivots.iter().enumerate().rev() {
            let piv = red[(r, c)];
            for j in 0..red.cols {
                red[(r, j)] /= piv;
            }
            for i in 0..r {
                let factor = red[(i, c)];
                if factor.is_zero() {
                    continue;
                }
                for j in 0..red.cols {
                    let sub = factor * red[(r, j)];
                    red[(i, j)] -= sub;
                }
            }
        }
        (red, pivots)
    }

    /// Basis of the right null space.
    pub fn null_space(&self) -> Vec<QVec> {
        let (red, pivots) = self.reduced_echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Q::zero(); self.cols];
                v[fc] = Q::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -red[(r, fc)];
                }
                v
            })
            .collect()
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> i128 {
        self.data.iter().fold(1i128, |acc, x| acc.lcm(x.denom()))
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn common_denominator(v: &[Q]) -> i128 {
    v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()))
}

/// Determinant of a small float matrix by partial-pivot elimination.
pub fn det_f64(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for i in (c + 1)..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                m[i][j] -= f * m[c][j];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("1/2"), Some(qr(1, 2)));
        assert_eq!(parse_q(" -3 "), Some(q(-3)));
        assert_eq!(parse_q("4/-8"), Some(qr(-1, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
        assert_eq!(format_q(&qr(6, 4)), "3/2");
        assert_eq!(format_q(&q(-2)), "-2");
    }

    #[test]
    fn det_and_solve() {
        let m = QMat::from_int_rows(&[vec![2, 1], vec![1, 3]]);
        assert_eq!(m.det(), q(5));
        let x = m.solve(&[q(3), q(4)]).unwrap().unwrap();
        assert_eq!(x, vec![q(1), q(1)]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
    }

    #[test]
    fn singular_systems() {
        let m = QMat::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.det(), q(0));
        assert_eq!(m.solve(&[q(1), q(3)]), Ok(None));
        assert_eq!(m.solve(&[q(1), q(2)]), Err(1));
        let ns = m.null_space();
        assert_eq!(ns.len(), 1);
        assert_eq!(m.mul_vec(&ns[0]), vec![q(0), q(0)]);
    }

    #[test]
    fn float_det() {
        assert!((det_f64(&[vec![0.0, 2.0], vec![3.0, 1.0]]) + 6.0).abs() < 1e-12);
    }
}
