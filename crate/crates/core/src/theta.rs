//! Short vectors of positive-definite lattice cosets and theta series.
//!
//! Enumeration is Fincke-Pohst over an exact rational LDL^T decomposition;
//! floating point is only used to bracket integer ranges, which are widened
//! and then checked exactly.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fqm::FqElement;
use crate::lattice::{DiscriminantForm, EvenLattice};
use crate::qexp::{ScalarQSeries, VVForm};
use crate::rational::{big_int, small, Q};

type R = Ratio<i128>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortVector {
    pub coords: Vec<Q>,
    /// (v, v)
    pub norm: Q,
}

fn to_q(x: R) -> Q {
    Q::new(x.numer().to_i64().expect("coordinate overflow"), x.denom().to_i64().expect("coordinate overflow"))
}

fn r_of(x: Q) -> R {
    R::new(*x.numer() as i128, *x.denom() as i128)
}

fn to_f(x: R) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `(q_ii, q_ij)` with `(x, x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
fn decompose(g: &[Vec<i64>]) -> Result<Vec<Vec<R>>> {
    let n = g.len();
    let mut q: Vec<Vec<R>> = g.iter().map(|r| r.iter().map(|&x| R::from_integer(x as i128)).collect()).collect();
    for i in 0..n {
        if q[i][i] <= R::zero() {
            return Err(Error::NotPositiveDefinite);
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] = q[i][j] / q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] = q[k][l] - q[k][i] * q[i][l];
            }
        }
    }
    Ok(q)
}

/// All `v = c + x` (`x` integral) with `(v, v) <= bound`, sorted by coordinates.
pub fn short_vectors(k: &EvenLattice, coset: &[Q], bound: Q) -> Result<Vec<ShortVector>> {
    if !k.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let n = k.rank();
    if coset.len() != n {
        return Err(Error::InvalidLattice("coset vector has wrong length".into()));
    }
    let q = decompose(k.gram())?;
    let c: Vec<R> = coset.iter().map(|&x| r_of(x)).collect();
    if bound < Q::zero() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut y = vec![R::zero(); n];
    recurse(&q, &c, n, r_of(bound), &mut y, &mut out);
    let mut vecs: Vec<ShortVector> = out
        .into_iter()
        .map(|(v, norm)| ShortVector { coords: v.into_iter().map(to_q).collect(), norm: to_q(norm) })
        .collect();
    vecs.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(vecs)
}

fn recurse(q: &[Vec<R>], c: &[R], level: usize, remaining: R, y: &mut Vec<R>, out: &mut Vec<(Vec<R>, R)>) {
    let n = q.len();
    if level == 0 {
        out.push((y.clone(), total(q, y)));
        return;
    }
    let i = level - 1;
    let s: R = (i + 1..n).fold(R::zero(), |acc, j| acc + q[i][j] * y[j]);
    let r = (to_f(remaining) / to_f(q[i][i])).max(0.0).sqrt();
    let centre = -to_f(s) - to_f(c[i]);
    let lo = (centre - r).floor() as i128 - 1;
    let hi = (centre + r).ceil() as i128 + 1;
    for x in lo..=hi {
        let yi = c[i] + R::from_integer(x);
        let t = yi + s;
        let used = q[i][i] * t * t;
        if used <= remaining {
            y[i] = yi;
            recurse(q, c, i, remaining - used, y, out);
        }
    }
    y[i] = R::zero();
}

fn total(q: &[Vec<R>], y: &[R]) -> R {
    let n = q.len();
    (0..n).fold(R::zero(), |acc, i| {
        let t = (i + 1..n).fold(y[i], |a, j| a + q[i][j] * y[j]);
        acc + q[i][i] * t * t
    })
}

/// Canonical representative of a class: the lift reduced into `[0, 1)^n`.
pub fn coset_representative(a: &DiscriminantForm, x: &FqElement) -> Vec<Q> {
    a.lift(x)
        .iter()
        .map(|v| {
            let f = v - v.floor();
            small(&f).expect("small coset denominator")
        })
        .collect()
}

/// `theta_{K+lambda}` up to `q^{n_max}`.
pub fn theta_coset(k: &EvenLattice, a: &DiscriminantForm, x: &FqElement, n_max: Q) -> Result<ScalarQSeries> {
    let c = coset_representative(a, x);
    let mut s = ScalarQSeries::new(n_max);
    for v in short_vectors(k, &c, n_max * 2)? {
        s.add_term(v.norm / 2, big_int(1));
    }
    Ok(s)
}

/// `Theta_K = sum_lambda theta_{K+lambda} e_lambda` over `A_K`, weight rk/2.
pub fn theta_vv(k: &EvenLattice, n_max: Q) -> Result<VVForm> {
    if !k.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let a = k.discriminant();
    let mut f = VVForm::zero(&a.module, Q::new(k.rank() as i64, 2), n_max);
    for (i, x) in a.module.elements().enumerate() {
        f.set_component(i, &theta_coset(k, &a, &x, n_max)?)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{a1, e8};
    use crate::rational::q;

    #[test]
    fn rank_one_scan() {
        let k = a1();
        let v = short_vectors(&k, &[Q::zero()], q(8, 1)).unwrap();
        let coords: Vec<Q> = v.iter().map(|s| s.coords[0]).collect();
        assert_eq!(coords, vec![q(-2, 1), q(-1, 1), Q::zero(), q(1, 1), q(2, 1)]);
        let v = short_vectors(&k, &[q(1, 2)], q(9, 2)).unwrap();
        let coords: Vec<Q> = v.iter().map(|s| s.coords[0]).collect();
        assert_eq!(coords, vec![q(-3, 2), q(-1, 2), q(1, 2), q(3, 2)]);
    }

    #[test]
    fn e8_roots() {
        assert_eq!(short_vectors(&e8(), &[Q::zero(); 8], q(2, 1)).unwrap().len(), 241);
    }

    #[test]
    fn theta_a1() {
        let th = theta_vv(&a1(), q(9, 4)).unwrap();
        assert_eq!(th.weight(), q(1, 2));
        assert_eq!(th.coeff(0, q(1, 1)), big_int(2));
        assert_eq!(th.coeff(0, q(2, 1)), big_int(0));
        assert_eq!(th.coeff(1, q(1, 4)), big_int(2));
        assert_eq!(th.coeff(1, q(9, 4)), big_int(2));
    }

    #[test]
    fn rank_zero() {
        let th = theta_vv(&EvenLattice::zero(), q(3, 1)).unwrap();
        assert_eq!(th.module().order(), 1);
        assert_eq!(th.num_terms(), 1);
        assert_eq!(th.weight(), Q::zero());
    }

    #[test]
    fn indefinite_rejected() {
        assert!(theta_vv(&crate::lattice::hyperbolic_plane(), q(1, 1)).is_err());
    }
}
