//! The Weil representation on the group algebra of a finite quadratic module,
//! and words in the generators S, T of SL2(Z).
//!
//! A word in {S, T, T^-1} is used directly as the metaplectic element it
//! defines: S carries the branch sqrt(tau) and T the constant 1.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fqm::FqModule;
use crate::rational::{e, q, Q};

pub type Sl2 = [[i64; 2]; 2];

pub const S_MAT: Sl2 = [[0, -1], [1, 0]];
pub const T_MAT: Sl2 = [[1, 1], [0, 1]];
pub const T_INV_MAT: Sl2 = [[1, -1], [0, 1]];
pub const ID_MAT: Sl2 = [[1, 0], [0, 1]];

pub fn sl2_mul(a: &Sl2, b: &Sl2) -> Sl2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn sl2_inv(a: &Sl2) -> Sl2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

/// Moebius action on the upper half plane.
pub fn mobius(m: &Sl2, tau: Complex64) -> Complex64 {
    (tau * m[0][0] as f64 + m[0][1] as f64) / (tau * m[1][0] as f64 + m[1][1] as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl Letter {
    pub fn matrix(self) -> Sl2 {
        match self {
            Letter::S => S_MAT,
            Letter::T => T_MAT,
            Letter::TInv => T_INV_MAT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupWord {
    letters: Vec<Letter>,
    matrix: Sl2,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        let matrix = letters.iter().fold(ID_MAT, |acc, l| sl2_mul(&acc, &l.matrix()));
        Self { letters, matrix }
    }

    pub fn identity() -> Self {
        Self::new(vec![])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn matrix(&self) -> Sl2 {
        self.matrix
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord::new(letters)
    }

    /// The branch of sqrt(c tau + d) attached to this word, built from the
    /// cocycle (M1, f1)(M2, f2) = (M1 M2, f1(M2 tau) f2(tau)).
    pub fn metaplectic_sqrt(&self, tau: Complex64) -> Complex64 {
        let mut phi = Complex64::new(1.0, 0.0);
        let mut t = tau;
        for l in self.letters.iter().rev() {
            if *l == Letter::S {
                phi *= t.sqrt();
            }
            t = mobius(&l.matrix(), t);
        }
        phi
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            let s = match l {
                Letter::S => "S",
                Letter::T => "T",
                Letter::TInv => "t",
            };
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

fn push_t_power(letters: &mut Vec<Letter>, n: i64) {
    let l = if n >= 0 { Letter::T } else { Letter::TInv };
    letters.extend(std::iter::repeat_n(l, n.unsigned_abs() as usize));
}

/// Writes `m` as a word in S, T, T^-1 by nearest-integer Euclid on the
/// first column: `m = T^n S m'` with `|a - n c| <= |c|/2`.
pub fn word_decompose(m: &Sl2) -> Result<GroupWord> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 {
        return Err(Error::NotSl2(det));
    }
    let mut letters = Vec::new();
    let mut cur = *m;
    while cur[1][0] != 0 {
        let (a, c) = (cur[0][0], cur[1][0]);
        let n = (a as f64 / c as f64).round() as i64;
        push_t_power(&mut letters, n);
        letters.push(Letter::S);
        // cur <- S^-1 T^-n cur
        let r = [[a - n * c, cur[0][1] - n * cur[1][1]], [c, cur[1][1]]];
        cur = [[r[1][0], r[1][1]], [-r[0][0], -r[0][1]]];
    }
    if cur[0][0] == 1 {
        push_t_power(&mut letters, cur[0][1]);
    } else {
        // -T^-b = S^2 T^-b
        letters.push(Letter::S);
        letters.push(Letter::S);
        push_t_power(&mut letters, -cur[0][1]);
    }
    let w = GroupWord::new(letters);
    debug_assert_eq!(w.matrix, *m);
    Ok(w)
}

/// Dense complex matrix indexed by module elements, `entry(row, col)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeilMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl WeilMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.data[r * n + c] = f(r, c);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn mul(&self, other: &WeilMatrix) -> WeilMatrix {
        let n = self.n;
        let mut out = WeilMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> WeilMatrix {
        WeilMatrix::from_fn(self.n, |r, c| self.entry(c, r).conj())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.entry(r, c) * v[c]).sum()).collect()
    }

    pub fn max_dist(&self, other: &WeilMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// max |(M M^*)_{rc} - delta_{rc}|.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_dist(&WeilMatrix::identity(self.n))
    }
}

/// rho_A(T) and rho_A(S) for a fixed module, with words evaluated on demand.
#[derive(Clone, Debug)]
pub struct WeilRep {
    module: FqModule,
    sigma: u8,
    t: WeilMatrix,
    t_inv: WeilMatrix,
    s: WeilMatrix,
    s_inv: WeilMatrix,
}

impl WeilRep {
    pub fn new(module: &FqModule) -> Result<Self> {
        let sigma = module.signature_mod8()?;
        let n = module.order();
        let elems: Vec<_> = module.elements().collect();
        let t = WeilMatrix::from_fn(n, |r, c| {
            if r == c {
                e(module.q_value(&elems[r]))
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let scale = e(q(-(sigma as i64), 8)) / (n as f64).sqrt();
        let s = WeilMatrix::from_fn(n, |r, c| scale * e(-module.bilinear(&elems[c], &elems[r])));
        Ok(Self { module: module.clone(), sigma, t_inv: t.adjoint(), s_inv: s.adjoint(), t, s })
    }

    pub fn module(&self) -> &FqModule {
        &self.module
    }

    pub fn sigma(&self) -> u8 {
        self.sigma
    }

    pub fn rho_t(&self) -> &WeilMatrix {
        &self.t
    }

    pub fn rho_s(&self) -> &WeilMatrix {
        &self.s
    }

    pub fn letter(&self, l: Letter) -> &WeilMatrix {
        match l {
            Letter::S => &self.s,
            Letter::T => &self.t,
            Letter::TInv => &self.t_inv,
        }
    }

    fn letter_inv(&self, l: Letter) -> &WeilMatrix {
        match l {
            Letter::S => &self.s_inv,
            Letter::T => &self.t_inv,
            Letter::TInv => &self.t,
        }
    }

    /// rho(w) as the product of letter matrices in word order.
    pub fn rho(&self, w: &GroupWord) -> WeilMatrix {
        w.letters().iter().fold(WeilMatrix::identity(self.module.order()), |acc, l| acc.mul(self.letter(*l)))
    }

    pub fn apply(&self, w: &GroupWord, v: &[Complex64]) -> Vec<Complex64> {
        w.letters().iter().rev().fold(v.to_vec(), |acc, l| self.letter(*l).apply(&acc))
    }

    /// rho(w)^-1 v.
    pub fn apply_inverse(&self, w: &GroupWord, v: &[Complex64]) -> Vec<Complex64> {
        w.letters().iter().fold(v.to_vec(), |acc, l| self.letter_inv(*l).apply(&acc))
    }
}

/// Weight factor exponent helper: e(-sigma/8).
pub fn sigma_phase(sigma: u8) -> Complex64 {
    e(Q::new(-(sigma as i64), 8))
}
