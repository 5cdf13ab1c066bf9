//! Induction of scalar forms to vector-valued forms: eta quotients, slash
//! actions with the eta multiplier, coset representatives of Gamma_0(d) and
//! the sum over them against the Weil representation.
//!
//! The character of the input is never computed. Instead the induced sum is
//! evaluated over two transversals and compared; a mismatch means the input
//! does not transform with the character the construction needs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fqm::{FqElement, FqModule};
use crate::lattice::EvenLattice;
use crate::qexp::{ScalarQSeries, VVForm};
use crate::rational::{e, fmt_q, mod1, rationalize, to_f64, Q};
use crate::theta::theta_coset;
use crate::weil::{sl2_mul, word_decompose, GroupWord, Sl2, WeilRep};

pub const INDUCTION_TOL: f64 = 1e-7;

/// `prod_delta eta(delta tau)^{r_delta}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EtaQuotient {
    pub exponents: BTreeMap<u64, i64>,
}

impl EtaQuotient {
    pub fn new(pairs: &[(u64, i64)]) -> Self {
        let mut exponents = BTreeMap::new();
        for &(d, r) in pairs {
            if r != 0 {
                *exponents.entry(d).or_insert(0) += r;
            }
        }
        exponents.retain(|_, r| *r != 0);
        Self { exponents }
    }

    pub fn weight(&self) -> Q {
        Q::new(self.exponents.values().sum(), 2)
    }

    /// `(1/24) sum delta r_delta`.
    pub fn leading_exponent(&self) -> Q {
        Q::new(self.exponents.iter().map(|(&d, &r)| d as i64 * r).sum(), 24)
    }
}

/// Coefficients of `prod_{n >= 1} (1 - x^n)^r` up to `x^len-1`.
pub fn euler_power(r: i64, len: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); len];
    if len == 0 {
        return c;
    }
    c[0] = BigInt::from(1);
    for n in 1..len {
        for _ in 0..r.unsigned_abs() {
            if r > 0 {
                for i in (n..len).rev() {
                    let t = c[i - n].clone();
                    c[i] -= t;
                }
            } else {
                for i in n..len {
                    let t = c[i - n].clone();
                    c[i] += t;
                }
            }
        }
    }
    c
}

/// Exact expansion of an eta quotient up to `q^{n_max}`.
pub fn eta_expand(e: &EtaQuotient, n_max: Q) -> ScalarQSeries {
    let mut s = ScalarQSeries::one(n_max - e.leading_exponent());
    for (&d, &r) in &e.exponents {
        let room = n_max - e.leading_exponent();
        let len = if room < Q::zero() { 0 } else { (room / d as i64).floor().to_integer() as usize + 1 };
        let p = euler_power(r, len);
        let mut f = ScalarQSeries::new(room);
        for (j, c) in p.into_iter().enumerate() {
            f.add_term(Q::from_integer(j as i64 * d as i64), BigRational::from_integer(c));
        }
        s = s.mul(&f);
    }
    s.shift(e.leading_exponent()).truncate(n_max)
}

/// Representatives of `Gamma_0(d) \ SL2(Z)`, one per point of `P^1(Z/d)`,
/// sorted by bottom row.
pub fn coset_reps_gamma0(d: i64) -> Vec<Sl2> {
    assert!(d >= 1);
    let units: Vec<i64> = (1..=d).filter(|&u| u.gcd(&d) == 1).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    for c in 0..d {
        for dd in 0..d {
            if c.gcd(&dd).gcd(&d) != 1 {
                continue;
            }
            let key = units.iter().map(|u| ((u * c) % d, (u * dd) % d)).min().unwrap();
            if !seen.insert(key) {
                continue;
            }
            reps.push(lift_bottom_row(c, dd, d));
        }
    }
    reps.sort_by_key(|m| (m[1][0], m[1][1]));
    reps
}

fn lift_bottom_row(c: i64, dd: i64, d: i64) -> Sl2 {
    if c % d == 0 {
        // (0 : u) is the class of (0 : 1)
        return [[1, 0], [0, 1]];
    }
    let mut dl = if dd == 0 { d } else { dd };
    while c.gcd(&dl) != 1 {
        dl += d;
    }
    let g = num_integer::Integer::extended_gcd(&dl, &c);
    // g.x dl + g.y c = 1  =>  a = g.x, b = -g.y
    [[g.x, -g.y], [c, dl]]
}

pub fn gamma0_index(d: i64) -> usize {
    let mut n = d;
    let mut idx = Q::from_integer(d);
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            idx *= Q::new(p + 1, p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        idx *= Q::new(n + 1, n);
    }
    idx.to_integer() as usize
}

/// Dedekind sum `s(h, k)` for `k > 0`.
pub fn dedekind_sum(h: i64, k: i64) -> Q {
    let saw = |x: Q| if x.is_integer() { Q::zero() } else { x - x.floor() - Q::new(1, 2) };
    (1..k).map(|r| saw(Q::new(r, k)) * saw(Q::new(h * r, k))).sum()
}

/// Complex series in fractional powers of `q`, known up to `trunc`.
#[derive(Clone, Debug)]
pub struct SlashedSlice {
    pub coeffs: BTreeMap<Q, Complex64>,
    pub trunc: Q,
}

impl SlashedSlice {
    pub fn new(trunc: Q) -> Self {
        Self { coeffs: BTreeMap::new(), trunc }
    }

    pub fn from_exact(s: &ScalarQSeries) -> Self {
        Self {
            coeffs: s.coeffs().iter().map(|(n, c)| (*n, Complex64::new(to_f64(c), 0.0))).collect(),
            trunc: s.trunc(),
        }
    }

    pub fn constant(c: Complex64, trunc: Q) -> Self {
        let mut s = Self::new(trunc);
        s.add_term(Q::zero(), c);
        s
    }

    pub fn add_term(&mut self, n: Q, c: Complex64) {
        if n <= self.trunc {
            *self.coeffs.entry(n).or_insert(Complex64::zero()) += c;
        }
    }

    pub fn vmin(&self) -> Q {
        self.coeffs.keys().next().map_or(self.trunc, |&k| k.min(self.trunc))
    }

    /// Common denominator of the stored exponents.
    pub fn denom(&self) -> i64 {
        self.coeffs.keys().fold(1, |acc, k| acc.lcm(k.denom()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(n, v)| (*n, v * c)).collect(), trunc: self.trunc }
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::new(trunc);
        for (n, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.add_term(*n, *c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = (self.trunc + other.vmin()).min(other.trunc + self.vmin());
        let mut out = Self::new(trunc);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                if *a + *b > trunc {
                    break;
                }
                out.add_term(*a + *b, x * y);
            }
        }
        out
    }

    pub fn truncate(&self, t: Q) -> Self {
        let t = t.min(self.trunc);
        Self { coeffs: self.coeffs.range(..=t).map(|(k, v)| (*k, *v)).collect(), trunc: t }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&Q> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .filter(|k| **k <= self.trunc.min(other.trunc))
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or_default();
                let b = other.coeffs.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        self.coeffs
            .iter()
            .map(|(n, c)| c * (two_pi_i * tau * (*n.numer() as f64 / *n.denom() as f64)).exp())
            .sum()
    }
}

/// A factor `theta_{K+lambda}^power`.
#[derive(Clone, Debug)]
pub struct ThetaFactor {
    pub lattice: EvenLattice,
    pub coset: FqElement,
    pub power: u32,
}

/// Scalar input `eta quotient * prod theta_{K+lambda}^p`.
#[derive(Clone, Debug, Default)]
pub struct ScalarForm {
    pub eta: EtaQuotient,
    pub thetas: Vec<ThetaFactor>,
}

impl ScalarForm {
    pub fn eta(eta: EtaQuotient) -> Self {
        Self { eta, thetas: vec![] }
    }

    pub fn times_theta(mut self, lattice: &EvenLattice, coset: FqElement, power: u32) -> Self {
        self.thetas.push(ThetaFactor { lattice: lattice.clone(), coset, power });
        self
    }

    pub fn weight(&self) -> Q {
        self.thetas
            .iter()
            .fold(self.eta.weight(), |w, t| w + Q::new(t.lattice.rank() as i64 * t.power as i64, 2))
    }

    pub fn leading_exponent_bound(&self) -> Q {
        self.eta.leading_exponent()
    }

    /// Exact expansion (identity slash).
    pub fn expand(&self, n_max: Q) -> Result<ScalarQSeries> {
        let lb = self.eta.leading_exponent().min(Q::zero());
        let room = n_max - lb;
        let mut s = eta_expand(&self.eta, room);
        for t in &self.thetas {
            let a = t.lattice.discriminant();
            let th = theta_coset(&t.lattice, &a, &t.coset, room)?;
            for _ in 0..t.power {
                s = s.mul(&th);
            }
        }
        Ok(s.truncate(n_max))
    }

    /// `phi |_k gamma` for the metaplectic element given by the word.
    pub fn slash(&self, w: &GroupWord, n_max: Q) -> Result<SlashedSlice> {
        let tau0 = Complex64::new(0.0, 1.0);
        let m = w.matrix();
        // factors of the eta part and their exact leading exponents
        let mut factors: Vec<(EtaPiece, Q)> = Vec::new();
        for (&delta, &r) in &self.eta.exponents {
            let piece = EtaPiece::new(delta as i64, r, &m);
            let lb = piece.leading();
            factors.push((piece, lb));
        }
        let lbs: Q = factors.iter().map(|(_, l)| (*l).min(Q::zero())).sum();
        // None stands for the exact constant 1
        let mut out: Option<SlashedSlice> = None;
        let mul = |o: Option<SlashedSlice>, s: &SlashedSlice| Some(o.map_or_else(|| s.clone(), |x| x.mul(s)));
        let mut constant = w.metaplectic_sqrt(tau0).powi(-(self.eta.weight() * 2).to_integer() as i32);
        for (piece, lb) in &factors {
            let room = n_max - (lbs - (*lb).min(Q::zero()));
            out = mul(out, &piece.series(room));
            constant *= piece.automorphy(tau0);
        }
        for t in &self.thetas {
            let room = n_max - lbs;
            let s = slash_theta_coset(&t.lattice, &t.coset, w, room)?;
            for _ in 0..t.power {
                out = mul(out, &s);
            }
        }
        let out = out.unwrap_or_else(|| SlashedSlice::constant(Complex64::new(1.0, 0.0), n_max));
        Ok(out.scale(constant).truncate(n_max))
    }
}

/// `eta(delta gamma tau)^r = [eps (-i(c' tau' + d'))^{1/2}]^r eta(tau')^r`
/// with `[[delta,0],[0,1]] gamma = gamma' [[A,B],[0,D]]` and
/// `tau' = (A tau + B) / D`.
struct EtaPiece {
    r: i64,
    a_: i64,
    b_: i64,
    d_: i64,
    gp: Sl2,
}

impl EtaPiece {
    fn new(delta: i64, r: i64, m: &Sl2) -> Self {
        let (top, c) = (delta * m[0][0], m[1][0]);
        let g = top.gcd(&c);
        let (p, s) = (top / g, c / g);
        let eg = Integer::extended_gcd(&p, &s);
        // gamma' = [[p, -y], [s, x]] with p x + s y = 1
        let mut gp: Sl2 = [[p, -eg.y], [s, eg.x]];
        let inv = [[gp[1][1], -gp[0][1]], [-gp[1][0], gp[0][0]]];
        let tri = sl2_mul(&inv, &[[delta * m[0][0], delta * m[0][1]], [m[1][0], m[1][1]]]);
        debug_assert_eq!(tri[1][0], 0);
        let (a_, mut b_, d_) = (tri[0][0], tri[0][1], tri[1][1]);
        let (a_, d_) = if d_ < 0 {
            gp = [[-gp[0][0], -gp[0][1]], [-gp[1][0], -gp[1][1]]];
            b_ = -b_;
            (-a_, -d_)
        } else {
            (a_, d_)
        };
        let k = b_.div_euclid(d_);
        // gamma' T^k [[A, B - kD], [0, D]]
        gp = sl2_mul(&gp, &[[1, k], [0, 1]]);
        b_ -= k * d_;
        Self { r, a_, b_, d_, gp }
    }

    fn leading(&self) -> Q {
        Q::new(self.r * self.a_, 24 * self.d_)
    }

    /// `eta(tau')^r` as a series in `q`.
    fn series(&self, trunc: Q) -> SlashedSlice {
        let mut s = SlashedSlice::new(trunc);
        let step = Q::new(self.a_, self.d_);
        let lead = self.leading();
        if trunc < lead {
            return s;
        }
        let len = ((trunc - lead) / step).floor().to_integer() as usize + 1;
        let p = euler_power(self.r, len);
        for (j, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let phase = e(Q::new(self.r * self.b_, 24 * self.d_) + Q::new(j as i64 * self.b_, self.d_));
            s.add_term(lead + step * j as i64, phase * c.to_f64().unwrap_or(f64::NAN));
        }
        s
    }

    /// `[eps(gamma') (-i(c' tau' + d'))^{1/2}]^r` at `tau`.
    fn automorphy(&self, tau: Complex64) -> Complex64 {
        let [[a, b], [c, d]] = self.gp;
        if c == 0 {
            // gamma' tau' = tau' + b d
            return e(Q::new(b * d * self.r, 24));
        }
        let (a, c, d) = if c < 0 { (-a, -c, -d) } else { (a, c, d) };
        let eps = e((Q::new(a + d, 12 * c) - dedekind_sum(d, c)) / 2);
        let tp = (tau * self.a_ as f64 + self.b_ as f64) / self.d_ as f64;
        let h = (Complex64::new(0.0, -1.0) * (tp * c as f64 + d as f64)).sqrt();
        (eps * h).powi(self.r as i32)
    }
}

/// `theta_{K+lambda} |_{rk/2} gamma = sum_nu rho_K(gamma)[lambda][nu] theta_{K+nu}`.
pub fn slash_theta_coset(k: &EvenLattice, lambda: &FqElement, w: &GroupWord, n_max: Q) -> Result<SlashedSlice> {
    let a = k.discriminant();
    let rep = WeilRep::new(&a.module)?;
    let row = a.module.index_of(lambda);
    // row lambda of rho(w): conjugate of (rho(w)^* e_lambda)
    let mut basis = vec![Complex64::zero(); a.module.order()];
    basis[row] = Complex64::new(1.0, 0.0);
    let conj_row = rep.apply_inverse(w, &basis);
    let mut out = SlashedSlice::new(n_max);
    for (nu, c) in conj_row.iter().enumerate() {
        let coef = c.conj();
        if coef.norm() < 1e-14 {
            continue;
        }
        let th = theta_coset(k, &a, &a.module.element_at(nu), n_max)?;
        out = out.add(&SlashedSlice::from_exact(&th).scale(coef));
    }
    Ok(out)
}

/// Transversal of `Gamma_0(d) \ SL2(Z)` as words.
pub fn standard_transversal(d: i64) -> Vec<GroupWord> {
    coset_reps_gamma0(d).iter().map(|m| word_decompose(m).expect("SL2 matrix")).collect()
}

/// Replaces each representative `gamma` by `h gamma` for a random `h` in
/// `Gamma_0(d)` (a short product of `T^a` and `[[1,0],[d b,1]]`).
pub fn random_transversal(d: i64, seed: u64) -> Vec<GroupWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    standard_transversal(d)
        .into_iter()
        .map(|g| {
            let mut h = GroupWord::identity();
            for _ in 0..rng.gen_range(1..=3) {
                let a = rng.gen_range(-3..=3);
                let b = rng.gen_range(-2..=2);
                h = h.concat(&word_decompose(&[[1, a], [0, 1]]).unwrap());
                h = h.concat(&word_decompose(&[[1, 0], [d * b, 1]]).unwrap());
            }
            if rng.gen_bool(0.5) {
                // the central element S^2 = -1 lies in Gamma_0(d)
                h = h.concat(&word_decompose(&[[-1, 0], [0, -1]]).unwrap());
            }
            h.concat(&g)
        })
        .collect()
}

/// `sum_i (psi | gamma_i) rho_A(gamma_i)^-1 v`, per component, before
/// rationalization.
pub fn induce_raw(
    a: &FqModule,
    v: &[Complex64],
    psi: &ScalarForm,
    reps: &[GroupWord],
    n_max: Q,
) -> Result<Vec<SlashedSlice>> {
    let rep = WeilRep::new(a)?;
    let mut comps = vec![SlashedSlice::new(n_max); a.order()];
    for g in reps {
        let slice = psi.slash(g, n_max)?;
        let coeff = rep.apply_inverse(g, v);
        for (i, c) in coeff.iter().enumerate() {
            if c.norm() < 1e-14 {
                continue;
            }
            comps[i] = comps[i].add(&slice.scale(*c));
        }
    }
    Ok(comps)
}

pub fn max_dependence(x: &[SlashedSlice], y: &[SlashedSlice]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
}

/// Rational reconstruction of raw induced components. Returns the form and
/// the largest residual (distance to the chosen rationals, or size of a
/// dropped off-support entry).
pub fn rationalize_components(
    a: &FqModule,
    weight: Q,
    comps: &[SlashedSlice],
    max_den: i64,
    n_max: Q,
) -> Result<(VVForm, f64)> {
    let mut f = VVForm::zero(a, weight, n_max);
    let mut residual: f64 = 0.0;
    for (i, s) in comps.iter().enumerate() {
        let x = a.element_at(i);
        let qx = a.q_value(&x);
        for (n, c) in s.coeffs.range(..=n_max) {
            let scale = c.norm().max(1.0);
            if mod1(*n - qx) != Q::zero() {
                if c.norm() > INDUCTION_TOL * scale.max(1.0) {
                    return Err(Error::Support(x.0.clone(), fmt_q(n)));
                }
                residual = residual.max(c.norm());
                continue;
            }
            if c.im.abs() > INDUCTION_TOL * scale {
                return Err(Error::Rationalization(format!("imaginary part at {x}, q^{}", fmt_q(n)), c.im));
            }
            let r = rationalize(c.re, max_den)
                .ok_or_else(|| Error::Rationalization(format!("{x}, q^{}", fmt_q(n)), c.re))?;
            let err = (c.re - *r.numer() as f64 / *r.denom() as f64).abs();
            if err > INDUCTION_TOL * scale {
                return Err(Error::Rationalization(format!("{x}, q^{}", fmt_q(n)), c.re));
            }
            residual = residual.max(err.max(c.im.abs()));
            f.add_coeff(i, *n, crate::rational::big(r))?;
        }
    }
    Ok((f, residual))
}

#[derive(Clone, Debug)]
pub struct Induced {
    pub form: VVForm,
    /// Largest rationalization residual.
    pub residual: f64,
    /// Largest coefficient difference between the two transversals.
    pub dependence: f64,
    pub raw: Vec<SlashedSlice>,
}

/// `ind_A^I(phi)` at level `d`, checked against a second random transversal
/// and rationalized with denominators up to `24 d |A|`.
pub fn induce(a: &FqModule, iso: &[FqElement], phi: &ScalarForm, d: i64, n_max: Q, seed: u64) -> Result<Induced> {
    if d % a.level() != 0 {
        return Err(Error::Hypothesis(format!("d = {d} is not divisible by the level {}", a.level())));
    }
    let mut v = vec![Complex64::zero(); a.order()];
    for x in iso {
        v[a.index_of(x)] += Complex64::new(1.0, 0.0);
    }
    let raw = induce_raw(a, &v, phi, &standard_transversal(d), n_max)?;
    let other = induce_raw(a, &v, phi, &random_transversal(d, seed), n_max)?;
    let dependence = max_dependence(&raw, &other);
    let scale = raw.iter().flat_map(|s| s.coeffs.values()).map(|c| c.norm()).fold(1.0, f64::max);
    if dependence > INDUCTION_TOL * scale {
        return Err(Error::RepresentativeDependence(dependence));
    }
    let (form, residual) = rationalize_components(a, phi.weight(), &raw, 24 * d * a.order() as i64, n_max)?;
    Ok(Induced { form, residual, dependence, raw })
}

/// `ind^mu_M(psi) = sum_i (psi | gamma_i) rho_M(gamma_i)^-1 e_mu` for the
/// given representatives, unrationalized.
pub fn induce_mu(m: &FqModule, mu: &FqElement, psi: &ScalarForm, reps: &[GroupWord], n_max: Q) -> Result<Vec<SlashedSlice>> {
    let mut v = vec![Complex64::zero(); m.order()];
    v[m.index_of(mu)] = Complex64::new(1.0, 0.0);
    induce_raw(m, &v, psi, reps, n_max)
}

/// Numerical `eta(tau)` from the product, for tests and diagnostics.
pub fn eta_numeric(tau: Complex64) -> Complex64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let q = (two_pi_i * tau).exp();
    let mut p = (two_pi_i * tau / 24.0).exp();
    let mut qn = q;
    for _ in 0..2000 {
        p *= Complex64::new(1.0, 0.0) - qn;
        qn *= q;
        if qn.norm() < 1e-18 {
            break;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::a1;
    use crate::rational::{big_int, q};
    use crate::weil::mobius;

    #[test]
    fn eta_expansions() {
        let inv = eta_expand(&EtaQuotient::new(&[(1, -24)]), q(2, 1));
        let want = [(-1, 1), (0, 24), (1, 324), (2, 3200)];
        for (n, c) in want {
            assert_eq!(inv.coeff(q(n, 1)), big_int(c));
        }
        let delta = eta_expand(&EtaQuotient::new(&[(1, 24)]), q(3, 1));
        assert_eq!(delta.coeff(q(1, 1)), big_int(1));
        assert_eq!(delta.coeff(q(2, 1)), big_int(-24));
        assert_eq!(delta.coeff(q(3, 1)), big_int(252));
        let e = EtaQuotient::new(&[(1, -8), (2, 8), (4, -8)]);
        assert_eq!(e.leading_exponent(), q(-1, 1));
        assert_eq!(eta_expand(&e, q(1, 1)).vmin(), q(-1, 1));
    }

    #[test]
    fn coset_counts() {
        assert_eq!(coset_reps_gamma0(1), vec![[[1, 0], [0, 1]]]);
        for d in 1..=12 {
            let reps = coset_reps_gamma0(d);
            assert_eq!(reps.len(), gamma0_index(d), "d = {d}");
            for (i, x) in reps.iter().enumerate() {
                assert_eq!(x[0][0] * x[1][1] - x[0][1] * x[1][0], 1);
                for y in &reps[..i] {
                    // x y^-1 not in Gamma_0(d)
                    let yi = [[y[1][1], -y[0][1]], [-y[1][0], y[0][0]]];
                    assert_ne!(sl2_mul(x, &yi)[1][0] % d, 0);
                }
            }
        }
        assert_eq!(gamma0_index(2), 3);
        assert_eq!(gamma0_index(4), 6);
    }

    #[test]
    fn eta_multiplier_matches_product() {
        let tau = Complex64::new(0.13, 0.9);
        for m in [[[0, -1], [1, 0]], [[1, 0], [1, 1]], [[2, 1], [3, 2]], [[-1, 0], [-4, -1]], [[1, 1], [2, 3]], [[5, 2], [7, 3]]] {
            for delta in [1, 2, 4] {
                let piece = EtaPiece::new(delta, 1, &m);
                let tp = (tau * piece.a_ as f64 + piece.b_ as f64) / piece.d_ as f64;
                let lhs = eta_numeric(Complex64::new(delta as f64, 0.0) * mobius(&m, tau));
                let rhs = piece.automorphy(tau) * eta_numeric(tp);
                assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "m={m:?} delta={delta}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn slash_matches_direct_evaluation() {
        let tau = Complex64::new(0.21, 1.4);
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, -24)]));
        for m in [[[0, -1], [1, 0]], [[1, 0], [2, 1]], [[3, 1], [5, 2]]] {
            let w = word_decompose(&m).unwrap();
            let slice = phi.slash(&w, q(12, 1)).unwrap();
            let j = w.metaplectic_sqrt(tau);
            let direct = j.powi(24) * eta_numeric(mobius(&m, tau)).powi(-24);
            let got = slice.eval(tau);
            assert!((got - direct).norm() < 1e-6 * direct.norm().max(1.0), "{m:?}: {got} vs {direct}");
        }
    }

    #[test]
    fn slash_identity_and_t() {
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, -24)]));
        let id = phi.slash(&GroupWord::identity(), q(2, 1)).unwrap();
        let exact = SlashedSlice::from_exact(&phi.expand(q(2, 1)).unwrap());
        assert!(id.max_abs_diff(&exact) < 1e-9);
        let th = slash_theta_coset(&a1(), &FqElement(vec![1]), &word_decompose(&[[1, 1], [0, 1]]).unwrap(), q(3, 1)).unwrap();
        assert!((th.coeffs[&q(1, 4)] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn theta_s_transform() {
        let s = word_decompose(&[[0, -1], [1, 0]]).unwrap();
        let th = slash_theta_coset(&a1(), &FqElement(vec![0]), &s, q(3, 1)).unwrap();
        let f = e(q(-1, 8)) / 2f64.sqrt();
        assert!((th.coeffs[&Q::zero()] - f).norm() < 1e-12);
        assert!((th.coeffs[&q(1, 4)] - f * 2.0).norm() < 1e-12);
    }

    #[test]
    fn trivial_induction_is_identity() {
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, -24)]));
        let t = FqModule::trivial();
        let ind = induce(&t, &[t.zero()], &phi, 1, q(3, 1), 7).unwrap();
        assert_eq!(ind.form.component(0), phi.expand(q(3, 1)).unwrap());
    }

    #[test]
    fn wrong_character_detected() {
        let t = FqModule::trivial();
        let phi = ScalarForm::default().times_theta(&a1(), FqElement(vec![0]), 1);
        let err = induce(&t, &[t.zero()], &phi, 4, q(3, 1), 11).unwrap_err();
        assert!(matches!(err, Error::RepresentativeDependence(_)));
    }
}
