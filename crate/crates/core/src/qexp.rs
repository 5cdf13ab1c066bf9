//! Truncated q-expansions with exact rational coefficients, scalar and
//! vector valued.
//!
//! Every series carries the bound `trunc`: coefficients are known for all
//! exponents `<= trunc` and absent entries there are zero. Products compute
//! the bound they can guarantee from the operands.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fqm::{FqElement, FqModule};
use crate::rational::{big_int, fmt_q, mod1, parse_q, to_f64, Q};

pub type Coeffs = BTreeMap<Q, BigRational>;

fn add_into(map: &mut Coeffs, n: Q, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let entry = map.entry(n).or_insert_with(BigRational::zero);
    *entry += c;
    if entry.is_zero() {
        map.remove(&n);
    }
}

fn min_exponent(map: &Coeffs, trunc: Q) -> Q {
    map.keys().next().map_or(trunc, |&k| k.min(trunc))
}

/// Cauchy product restricted to exponents `<= bound`.
fn cauchy(a: &Coeffs, b: &Coeffs, bound: Q) -> Coeffs {
    let mut out = Coeffs::new();
    for (&na, ca) in a {
        for (&nb, cb) in b {
            let n = na + nb;
            if n > bound {
                break;
            }
            add_into(&mut out, n, ca * cb);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarQSeries {
    coeffs: Coeffs,
    trunc: Q,
}

impl ScalarQSeries {
    pub fn new(trunc: Q) -> Self {
        Self { coeffs: Coeffs::new(), trunc }
    }

    pub fn one(trunc: Q) -> Self {
        let mut s = Self::new(trunc);
        s.add_term(Q::zero(), big_int(1));
        s
    }

    pub fn from_terms(trunc: Q, terms: &[(Q, i64)]) -> Self {
        let mut s = Self::new(trunc);
        for &(n, c) in terms {
            s.add_term(n, big_int(c));
        }
        s
    }

    /// Adds `c q^n`; terms above the truncation are discarded.
    pub fn add_term(&mut self, n: Q, c: BigRational) {
        if n <= self.trunc {
            add_into(&mut self.coeffs, n, c);
        }
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn trunc(&self) -> Q {
        self.trunc
    }

    pub fn coeff(&self, n: Q) -> BigRational {
        self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Lowest stored exponent, or `trunc` for a series known to vanish.
    pub fn vmin(&self) -> Q {
        min_exponent(&self.coeffs, self.trunc)
    }

    /// Common denominator N of the stored exponents.
    pub fn denom(&self) -> i64 {
        self.coeffs.keys().fold(1, |acc, k| crate::rational::lcm(acc, *k.denom()))
    }

    pub fn truncate(&self, t: Q) -> Self {
        let t = t.min(self.trunc);
        Self { coeffs: self.coeffs.range(..=t).map(|(k, v)| (*k, v.clone())).collect(), trunc: t }
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = self.truncate(trunc);
        for (n, c) in other.coeffs.range(..=trunc) {
            add_into(&mut out.coeffs, *n, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::new(self.trunc);
        for (n, v) in &self.coeffs {
            add_into(&mut out.coeffs, *n, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = (self.trunc + other.vmin()).min(other.trunc + self.vmin());
        Self { coeffs: cauchy(&self.coeffs, &other.coeffs, trunc), trunc }
    }

    pub fn shift(&self, n: Q) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, v)| (*k + n, v.clone())).collect(), trunc: self.trunc + n }
    }

    /// Numerical value of the stored partial sum at `tau`.
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        self.coeffs
            .iter()
            .map(|(n, c)| (two_pi_i * tau * (*n.numer() as f64 / *n.denom() as f64)).exp() * to_f64(c))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VVForm {
    module: FqModule,
    weight: Q,
    comps: Vec<Coeffs>,
    trunc: Q,
}

pub type PrincipalTerm = (FqElement, Q, BigRational);

impl VVForm {
    pub fn zero(module: &FqModule, weight: Q, trunc: Q) -> Self {
        Self { module: module.clone(), weight, comps: vec![Coeffs::new(); module.order()], trunc }
    }

    /// A form on the trivial module from a scalar series.
    pub fn from_scalar(s: &ScalarQSeries, weight: Q) -> Self {
        let mut f = Self::zero(&FqModule::trivial(), weight, s.trunc);
        f.comps[0] = s.coeffs.clone();
        f
    }

    pub fn module(&self) -> &FqModule {
        &self.module
    }

    pub fn weight(&self) -> Q {
        self.weight
    }

    pub fn trunc(&self) -> Q {
        self.trunc
    }

    pub fn with_weight(mut self, weight: Q) -> Self {
        self.weight = weight;
        self
    }

    pub fn component(&self, idx: usize) -> ScalarQSeries {
        ScalarQSeries { coeffs: self.comps[idx].clone(), trunc: self.trunc }
    }

    pub fn component_coeffs(&self, idx: usize) -> &Coeffs {
        &self.comps[idx]
    }

    fn check_support(&self, idx: usize, n: Q) -> Result<()> {
        let x = self.module.element_at(idx);
        if mod1(n - self.module.q_value(&x)) != Q::zero() {
            return Err(Error::Support(x.0, fmt_q(&n)));
        }
        Ok(())
    }

    /// Adds `c q^n e_lambda`, enforcing `n in q(lambda) + Z`. Terms above the
    /// truncation are discarded.
    pub fn add_coeff(&mut self, idx: usize, n: Q, c: BigRational) -> Result<()> {
        self.check_support(idx, n)?;
        if n <= self.trunc {
            add_into(&mut self.comps[idx], n, c);
        }
        Ok(())
    }

    /// Replaces a component; the series is cut at this form's truncation.
    pub fn set_component(&mut self, idx: usize, s: &ScalarQSeries) -> Result<()> {
        let mut c = Coeffs::new();
        for (n, v) in s.coeffs.range(..=self.trunc) {
            self.check_support(idx, *n)?;
            c.insert(*n, v.clone());
        }
        self.comps[idx] = c;
        Ok(())
    }

    pub fn coeff(&self, idx: usize, n: Q) -> BigRational {
        self.comps[idx].get(&n).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff_of(&self, x: &FqElement, n: Q) -> BigRational {
        self.coeff(self.module.index_of(x), n)
    }

    pub fn vmin(&self) -> Q {
        self.comps.iter().map(|c| min_exponent(c, self.trunc)).min().unwrap_or(self.trunc)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, Q, &BigRational)> + '_ {
        self.comps.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |(n, v)| (i, *n, v)))
    }

    pub fn num_terms(&self) -> usize {
        self.comps.iter().map(BTreeMap::len).sum()
    }

    pub fn truncate(&self, t: Q) -> Self {
        let t = t.min(self.trunc);
        Self {
            module: self.module.clone(),
            weight: self.weight,
            comps: self.comps.iter().map(|c| c.range(..=t).map(|(k, v)| (*k, v.clone())).collect()).collect(),
            trunc: t,
        }
    }

    /// Fails with a truncation underflow unless coefficients are known up to `n`.
    pub fn require_trunc(&self, n: Q, what: &str) -> Result<()> {
        if self.trunc < n {
            return Err(Error::TruncationUnderflow(format!(
                "{what}: known up to {} but {} is needed",
                fmt_q(&self.trunc),
                fmt_q(&n)
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.module != other.module {
            return Err(Error::ModuleMismatch("forms live on different modules".into()));
        }
        if self.weight != other.weight {
            return Err(Error::WeightMismatch(fmt_q(&self.weight), fmt_q(&other.weight)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = self.truncate(trunc);
        for (i, c) in other.comps.iter().enumerate() {
            for (n, v) in c.range(..=trunc) {
                add_into(&mut out.comps[i], *n, v.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&big_int(-1)))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(&self.module, self.weight, self.trunc);
        for (i, comp) in self.comps.iter().enumerate() {
            for (n, v) in comp {
                add_into(&mut out.comps[i], *n, v * c);
            }
        }
        out
    }

    /// Componentwise product with a scalar series.
    pub fn mul_scalar_series(&self, s: &ScalarQSeries, weight_shift: Q) -> Result<Self> {
        let trunc = (self.trunc + s.vmin()).min(s.trunc + self.vmin());
        if trunc < self.vmin() + s.vmin() {
            return Err(Error::TruncationUnderflow("product bound below lowest exponent".into()));
        }
        let mut out = Self::zero(&self.module, self.weight + weight_shift, trunc);
        for (i, comp) in self.comps.iter().enumerate() {
            out.comps[i] = cauchy(comp, &s.coeffs, trunc);
            for n in out.comps[i].keys() {
                out.check_support(i, *n)?;
            }
        }
        Ok(out)
    }

    /// `f (x) g` on `A_1 + A_2`: `c_{(x,y)}(n) = sum_{a+b=n} c_x(a) c_y(b)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let trunc = (self.trunc + other.vmin()).min(other.trunc + self.vmin());
        if trunc < self.vmin() + other.vmin() {
            return Err(Error::TruncationUnderflow("tensor bound below lowest exponent".into()));
        }
        let module = self.module.direct_sum(&other.module);
        let mut out = Self::zero(&module, self.weight + other.weight, trunc);
        let m = other.module.order();
        for (i, a) in self.comps.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (j, b) in other.comps.iter().enumerate() {
                out.comps[i * m + j] = cauchy(a, b, trunc);
            }
        }
        Ok(out)
    }

    fn require_nonneg_trunc(&self) -> Result<()> {
        if self.trunc < Q::zero() {
            return Err(Error::TruncationUnderflow("principal part needs trunc >= 0".into()));
        }
        Ok(())
    }

    /// All terms with `n <= 0`, in element-index then exponent order.
    pub fn principal_part(&self) -> Result<Vec<PrincipalTerm>> {
        self.require_nonneg_trunc()?;
        Ok(self
            .terms()
            .filter(|(_, n, _)| *n <= Q::zero())
            .map(|(i, n, c)| (self.module.element_at(i), n, c.clone()))
            .collect())
    }

    pub fn is_integral_principal_part(&self) -> Result<bool> {
        Ok(self.principal_part()?.iter().all(|(_, _, c)| c.is_integer()))
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(0, Q::zero())
    }

    pub fn constant_term_even(&self) -> Result<bool> {
        self.require_nonneg_trunc()?;
        let c = self.constant_term();
        Ok(c.is_integer() && (c.to_integer() % BigInt::from(2)).is_zero())
    }

    /// `c_lambda(n) = c_{-lambda}(n)` for every stored entry. Defined only
    /// when `sigma(A) = 2k mod 8`, the weight case of Borcherds inputs.
    pub fn check_minus_symmetry(&self) -> Result<bool> {
        let two_k = self.weight * 2;
        let sigma = self.module.signature_mod8()? as i64;
        if !two_k.is_integer() || (two_k.to_integer() - sigma).rem_euclid(8) != 0 {
            return Err(Error::SymmetryOutsideScope);
        }
        for (i, comp) in self.comps.iter().enumerate() {
            let x = self.module.element_at(i);
            let j = self.module.index_of(&self.module.neg(&x));
            if *comp != self.comps[j] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Re-checks `n in q(lambda) + Z` on every stored entry.
    pub fn support_ok(&self) -> bool {
        self.terms().all(|(i, n, _)| self.check_support(i, n).is_ok())
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .terms()
            .map(|(i, n, c)| {
                json!([
                    self.module.element_at(i).0,
                    *n.numer(),
                    *n.denom(),
                    int_json(c.numer()),
                    int_json(c.denom())
                ])
            })
            .collect();
        json!({
            "module": self.module.to_json(),
            "weight": fmt_q(&self.weight),
            "trunc": fmt_q(&self.trunc),
            "entries": entries,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("series: {what}"));
        let module = FqModule::from_json(&v["module"])?;
        let weight = parse_q(&json_str(&v["weight"]).ok_or_else(|| bad("weight"))?)?;
        let trunc = parse_q(&json_str(&v["trunc"]).ok_or_else(|| bad("trunc"))?)?;
        let mut f = Self::zero(&module, weight, trunc);
        for e in v["entries"].as_array().ok_or_else(|| bad("entries"))? {
            let a = e.as_array().filter(|a| a.len() == 5).ok_or_else(|| bad("entry shape"))?;
            let coords: Vec<i64> = a[0]
                .as_array()
                .ok_or_else(|| bad("coords"))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| bad("coords")))
                .collect::<Result<_>>()?;
            let x = module.element(&coords)?;
            if x.0 != coords {
                return Err(Error::BadElement(coords));
            }
            let nn = a[1].as_i64().ok_or_else(|| bad("n_num"))?;
            let nd = a[2].as_i64().filter(|&d| d != 0).ok_or_else(|| bad("n_den"))?;
            let cn = json_int(&a[3]).ok_or_else(|| bad("c_num"))?;
            let cd = json_int(&a[4]).filter(|d| !d.is_zero()).ok_or_else(|| bad("c_den"))?;
            let n = Q::new(nn, nd);
            if n > trunc {
                return Err(bad("exponent above trunc"));
            }
            f.add_coeff(module.index_of(&x), n, BigRational::new(cn, cd))?;
        }
        Ok(f)
    }
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(x) => json!(x),
        None => json!(n.to_string()),
    }
}

fn json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn json_str(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
