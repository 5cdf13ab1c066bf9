//! Exact integer and rational matrix routines: Smith normal form, echelon
//! bases, determinants, inverses and inertia.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<i64>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn transpose(m: &IntMatrix) -> IntMatrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let s: i128 = (0..inner).map(|k| row[k] as i128 * b[k][j] as i128).sum();
                    i64::try_from(s).expect("integer matrix product overflow")
                })
                .collect()
        })
        .collect()
}

/// Result of [`smith_normal_form`]: `u * m * v = d` with `u`, `v` unimodular.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub d: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries d_1 | d_2 | ... (length min(rows, cols)).
    pub fn diagonal(&self) -> Vec<i64> {
        let n = self.d.len().min(self.d.first().map_or(0, Vec::len));
        (0..n).map(|i| self.d[i][i]).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|&&x| x != 0).count()
    }
}

struct Snf {
    a: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    u_inv: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
    v_inv: Vec<Vec<i128>>,
}

impl Snf {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        self.u.swap(i, j);
        for row in self.u_inv.iter_mut() {
            row.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        for row in self.v.iter_mut() {
            row.swap(i, j);
        }
        self.v_inv.swap(i, j);
    }

    /// row_i += c * row_t
    fn add_row(&mut self, i: usize, t: usize, c: i128) {
        if c == 0 {
            return;
        }
        for k in 0..self.a[0].len() {
            self.a[i][k] = self.a[i][k].checked_add(c.checked_mul(self.a[t][k]).expect("SNF overflow")).expect("SNF overflow");
        }
        for k in 0..self.u[0].len() {
            self.u[i][k] += c * self.u[t][k];
        }
        for row in self.u_inv.iter_mut() {
            row[t] -= c * row[i];
        }
    }

    /// col_j += c * col_t
    fn add_col(&mut self, j: usize, t: usize, c: i128) {
        if c == 0 {
            return;
        }
        for row in self.a.iter_mut() {
            row[j] = row[j].checked_add(c.checked_mul(row[t]).expect("SNF overflow")).expect("SNF overflow");
        }
        for row in self.v.iter_mut() {
            row[j] += c * row[t];
        }
        let n = self.v_inv[0].len();
        for k in 0..n {
            let x = self.v_inv[j][k];
            self.v_inv[t][k] -= c * x;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -*x;
        }
        for x in self.u[i].iter_mut() {
            *x = -*x;
        }
        for row in self.u_inv.iter_mut() {
            row[i] = -row[i];
        }
    }
}

fn to_i128(m: &IntMatrix) -> Vec<Vec<i128>> {
    m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn to_i64(m: &[Vec<i128>]) -> IntMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| i64::try_from(x).expect("SNF entry overflow")).collect())
        .collect()
}

fn id128(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

/// Smith normal form of an integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut s = Snf {
        a: to_i128(m),
        u: id128(rows),
        u_inv: id128(rows),
        v: id128(cols),
        v_inv: id128(cols),
    };
    if rows == 0 || cols == 0 {
        return SmithForm {
            u: to_i64(&s.u),
            u_inv: to_i64(&s.u_inv),
            v: to_i64(&s.v),
            v_inv: to_i64(&s.v_inv),
            d: m.clone(),
        };
    }
    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero pivot in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = s.a[i][j];
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < s.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(s);
            };
            s.swap_rows(t, pi);
            s.swap_cols(t, pj);
            let p = s.a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let qv = Integer::div_floor(&s.a[i][t], &p);
                s.add_row(i, t, -qv);
                if s.a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let qv = Integer::div_floor(&s.a[t][j], &p);
                s.add_col(j, t, -qv);
                if s.a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block
            let mut offender = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if s.a[i][j] % p != 0 {
                        offender = Some(i);
                        break 'outer;
                    }
                }
            }
            match offender {
                Some(i) => s.add_row(t, i, 1),
                None => break,
            }
        }
        if s.a[t][t] < 0 {
            s.negate_row(t);
        }
    }
    finish(s)
}

fn finish(mut s: Snf) -> SmithForm {
    let n = s.a.len().min(s.a[0].len());
    for t in 0..n {
        if s.a[t][t] < 0 {
            s.negate_row(t);
        }
    }
    SmithForm {
        u: to_i64(&s.u),
        u_inv: to_i64(&s.u_inv),
        v: to_i64(&s.v),
        v_inv: to_i64(&s.v_inv),
        d: to_i64(&s.a),
    }
}

/// Echelon basis of the row lattice spanned by `rows` (zero rows dropped).
/// Row k of the result has its first nonzero entry at a strictly increasing
/// column, and that entry is positive.
pub fn row_basis(rows: &[Vec<i64>], ncols: usize) -> IntMatrix {
    let mut work: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut basis = Vec::new();
    for col in 0..ncols {
        loop {
            let mut idx: Vec<usize> = (0..work.len()).filter(|&i| work[i][col] != 0).collect();
            if idx.len() <= 1 {
                if let Some(&i) = idx.first() {
                    let mut row = work.swap_remove(i);
                    if row[col] < 0 {
                        row.iter_mut().for_each(|x| *x = -*x);
                    }
                    basis.push(row);
                }
                break;
            }
            idx.sort_by_key(|&i| work[i][col].abs());
            let p = idx[0];
            for &i in &idx[1..] {
                let qv = Integer::div_floor(&work[i][col], &work[p][col]);
                for k in 0..ncols {
                    work[i][k] -= qv * work[p][k];
                }
            }
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
    }
    to_i64(&basis)
}

/// Solves `c * basis = v` for an echelon basis from [`row_basis`];
/// `None` if `v` is not in the row lattice.
pub fn solve_echelon(basis: &IntMatrix, v: &[i64]) -> Option<Vec<i64>> {
    let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut c = Vec::with_capacity(basis.len());
    for row in basis {
        let col = row.iter().position(|&x| x != 0)?;
        let p = row[col] as i128;
        if rest[col] % p != 0 {
            return None;
        }
        let k = rest[col] / p;
        for (r, &b) in rest.iter_mut().zip(row) {
            *r -= k * b as i128;
        }
        c.push(i64::try_from(k).ok()?);
    }
    if rest.iter().any(|&x| x != 0) {
        return None;
    }
    Some(c)
}

pub fn to_rational(m: &IntMatrix) -> RatMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect()
}

/// Exact determinant (Bareiss fraction-free elimination).
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = val / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Inverse over the rationals, or `None` when singular.
pub fn inverse(m: &IntMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut a = to_rational(m);
    let mut inv = to_rational(&identity(n));
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[i][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[i][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

/// (positive, negative, zero) counts of a symmetric matrix, by exact
/// congruence diagonalization.
pub fn inertia(m: &IntMatrix) -> (usize, usize, usize) {
    let n = m.len();
    let mut a = to_rational(m);
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        let piv = (k..n).find(|&i| !a[i][i].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => {
                let pair = (k..n).flat_map(|i| (k..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero());
                match pair {
                    None => break,
                    Some((i, j)) => {
                        // row/col i += row/col j
                        for c in 0..n {
                            let t = a[j][c].clone();
                            a[i][c] += t;
                        }
                        for r in 0..n {
                            let t = a[r][j].clone();
                            a[r][i] += t;
                        }
                        i
                    }
                }
            }
        };
        a.swap(piv, k);
        for row in a.iter_mut() {
            row.swap(piv, k);
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
        for j in k + 1..n {
            a[k][j] = BigRational::zero();
        }
        for i in k + 1..n {
            a[i][k] = BigRational::zero();
        }
        k += 1;
    }
    (pos, neg, n - pos - neg)
}

/// Basis of the left kernel {x in Z^r : x * m = 0}; saturated in Z^r.
pub fn left_kernel(m: &IntMatrix, rows: usize) -> IntMatrix {
    if m.is_empty() || m[0].is_empty() {
        return identity(rows);
    }
    let snf = smith_normal_form(m);
    let r = snf.rank();
    snf.u[r..].to_vec()
}

pub fn rat_to_i64(x: &BigRational) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}
