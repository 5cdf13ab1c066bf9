//! Weight and Heegner-divisor data of Borcherds lifts, orders `r(l)` along
//! the divisors containing a sub-domain, and the check that the quasi-pullback
//! is the lift of `<f up, Theta_K>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fqm::{FqElement, FqModule};
use crate::lattice::EmbeddingData;
use crate::qexp::VVForm;
use crate::rational::{big, fmt_big, fmt_q, mod1, parse_big, parse_q, Q};
use crate::theta::{coset_representative, short_vectors, theta_vv};
use crate::transfer::{theta_contract, Transfer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorcherdsDescriptor {
    pub signature: (usize, usize),
    pub module: FqModule,
    pub weight: Q,
    /// `(min(idx lambda, idx -lambda), n) -> c_lambda(n)` for `n < 0`.
    pub divisor: BTreeMap<(usize, Q), BigInt>,
    pub source_trunc: Q,
}

impl BorcherdsDescriptor {
    pub fn multiplicity(&self, x: &FqElement, n: Q) -> BigInt {
        let key = self.key(x);
        self.divisor.get(&(key, n)).cloned().unwrap_or_default()
    }

    fn key(&self, x: &FqElement) -> usize {
        self.module.index_of(x).min(self.module.index_of(&self.module.neg(x)))
    }
}

/// Weight and divisor table of `Psi_L(f)` for `L` of signature `(2, b)`.
pub fn descriptor(f: &VVForm, signature: (usize, usize)) -> Result<BorcherdsDescriptor> {
    if signature.0 != 2 {
        return Err(Error::Hypothesis(format!("signature ({}, {}) is not (2, b)", signature.0, signature.1)));
    }
    let expected = Q::from_integer(1) - Q::new(signature.1 as i64, 2);
    if f.weight() != expected {
        return Err(Error::WeightMismatch(fmt_q(&f.weight()), fmt_q(&expected)));
    }
    if !f.is_integral_principal_part()? {
        return Err(Error::Hypothesis("principal part is not integral".into()));
    }
    if !f.constant_term_even()? {
        return Err(Error::Hypothesis(format!("c_0(0) = {} is not even", fmt_big(&f.constant_term()))));
    }
    if !f.check_minus_symmetry()? {
        return Err(Error::Hypothesis("c_lambda(n) != c_-lambda(n)".into()));
    }
    let module = f.module().clone();
    let mut divisor = BTreeMap::new();
    for (i, n, c) in f.terms() {
        if n >= Q::zero() {
            continue;
        }
        let x = module.element_at(i);
        let key = i.min(module.index_of(&module.neg(&x)));
        divisor.insert((key, n), c.to_integer());
    }
    Ok(BorcherdsDescriptor {
        signature,
        module,
        weight: crate::rational::small(&(f.constant_term() / big(Q::from_integer(2)))).expect("small weight"),
        divisor,
        source_trunc: f.trunc(),
    })
}

/// Checks `Z(lambda, n)_L = sum_{mu in p^-1(lambda)} Z(mu, n)_L'` on tables:
/// every fibre of `p` carries `|I|` copies of the multiplicity of `lambda`,
/// and nothing lives off `I^perp`.
pub fn divisor_refines(base: &BorcherdsDescriptor, up: &BorcherdsDescriptor, t: &Transfer) -> bool {
    let big_m = t.big();
    let mut regrouped: BTreeMap<(usize, Q), Vec<BigInt>> = BTreeMap::new();
    for mu in big_m.elements() {
        let ns: Vec<Q> = up
            .divisor
            .keys()
            .filter(|(k, _)| *k == up.key(&mu))
            .map(|(_, n)| *n)
            .collect();
        for n in ns {
            let c = up.multiplicity(&mu, n);
            match t.projection(&mu) {
                Some(lam) => regrouped.entry((base.key(&lam), n)).or_default().push(c),
                None => {
                    if !c.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    for ((key, n), mut cs) in regrouped {
        let lam = base.module.element_at(key);
        let orbit = if base.module.neg(&lam) == lam { 1 } else { 2 };
        let expected = vec![base.multiplicity(&lam, n); t.isotropic().order() * orbit];
        cs.sort();
        if cs != expected {
            return false;
        }
    }
    base.divisor.iter().all(|((key, n), c)| {
        c.is_zero() || {
            let lam = base.module.element_at(*key);
            big_m.elements().any(|mu| t.projection(&mu).as_ref() == Some(&lam) && up.multiplicity(&mu, *n) == *c)
        }
    })
}

fn ambient_vector(emb: &EmbeddingData, l: &[i64]) -> Result<Vec<i64>> {
    if l.len() != emb.k_neg.rank() {
        return Err(Error::Hypothesis("vector is not in K(-1) coordinates".into()));
    }
    if l.iter().all(|&x| x == 0) || l.iter().fold(0i64, |g, &x| g.gcd(&x)) != 1 {
        return Err(Error::Hypothesis(format!("{l:?} is not primitive in K(-1)")));
    }
    Ok(emb.k_neg.to_ambient(l))
}

/// Order of `Psi_L(f)` along `l^perp` for a primitive `l` of `K(-1)` (given in
/// `K(-1)` coordinates): the sum of `c_{w+L}(q(w))` over `w in Ql cap L^dual`,
/// `w != 0` modulo sign.
pub fn r_order(f: &VVForm, emb: &EmbeddingData, l: &[i64]) -> Result<BigInt> {
    let v = ambient_vector(emb, l)?;
    let lat = &emb.lattice;
    let gv: Vec<i64> = lat.gram().iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
    let g = gv.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    let qv = Q::new(lat.pair(&v, &v), 2);
    let vmin = f.vmin();
    let mut r = BigInt::zero();
    for k in 1i64.. {
        let qw = qv * k * k / (g * g);
        if qw < vmin {
            break;
        }
        let y: Vec<i64> = gv.iter().map(|&x| x / g * k).collect();
        let cls = emb.a_l.class_of_dual(&y);
        let c = f.coeff_of(&cls, qw);
        if !c.is_integer() {
            return Err(Error::Hypothesis("non-integral principal part".into()));
        }
        r += c.to_integer();
    }
    Ok(r)
}

fn check_input(f: &VVForm, emb: &EmbeddingData) -> Result<()> {
    if f.module() != &emb.a_l.module {
        return Err(Error::ModuleMismatch("f does not live on A_L".into()));
    }
    Ok(())
}

/// Weight of the quasi-pullback, computed over nonzero `v in K(-1)^dual` and
/// again grouped by primitive directions; the two sums must agree.
pub fn predicted_qp_weight(f: &VVForm, emb: &EmbeddingData) -> Result<Q> {
    check_input(f, emb)?;
    let desc = descriptor(f, emb.lattice.signature())?;
    let (sum_a, sum_b) = weight_routes(f, emb)?;
    if sum_a != sum_b {
        return Err(Error::InternalMismatch(sum_a.to_string(), sum_b.to_string()));
    }
    Ok(desc.weight + Q::from_integer(sum_a.to_i64().expect("weight fits")))
}

/// The weight increment two ways: half the sum of `c_{v+L}(q(v))` over
/// nonzero `v`, and the sum of `r(l)` over primitive `l` modulo sign.
pub fn weight_routes(f: &VVForm, emb: &EmbeddingData) -> Result<(BigInt, BigInt)> {
    check_input(f, emb)?;
    let depth = -f.vmin();
    if depth <= Q::zero() {
        return Ok((BigInt::zero(), BigInt::zero()));
    }
    let t = Transfer::from_embedding(emb)?;
    let up = t.pull_up(f)?;
    let a_k = emb.a_k();
    let k = &emb.k_lattice;
    // route A
    let mut sum_a = BigInt::zero();
    for lam in a_k.module.elements() {
        let x = FqModule::join(&emb.a_m.module.zero(), &lam);
        if !emb.glue.is_perp(&x) {
            continue;
        }
        let c = coset_representative(&a_k, &lam);
        for sv in short_vectors(k, &c, depth * 2)? {
            if sv.norm.is_zero() {
                continue;
            }
            let coeff = up.coeff_of(&x, -sv.norm / 2);
            sum_a += coeff.to_integer();
        }
    }
    if sum_a.is_odd() {
        return Err(Error::InternalMismatch("odd sum over +-v".into(), sum_a.to_string()));
    }
    let sum_a: BigInt = sum_a / 2;
    // route B
    let exponent = a_k.module.exponent();
    let bound = depth * exponent * exponent;
    let mut sum_b = BigInt::zero();
    for sv in short_vectors(k, &vec![Q::zero(); k.rank()], bound * 2)? {
        let l: Vec<i64> = sv.coords.iter().map(|c| c.to_integer()).collect();
        let first = l.iter().find(|&&x| x != 0);
        if first.is_none_or(|&x| x < 0) || l.iter().fold(0i64, |g, &x| g.gcd(&x)) != 1 {
            continue;
        }
        sum_b += r_order(f, emb, &l)?;
    }
    Ok((sum_a, sum_b))
}

/// `g = <f up, Theta_K>` on `A_M`, known up to `q^{n_max}`.
pub fn quasi_pullback_form(f: &VVForm, emb: &EmbeddingData, n_max: Q) -> Result<VVForm> {
    check_input(f, emb)?;
    f.require_trunc(n_max, "input form")?;
    let f = f.truncate(n_max);
    let theta = theta_vv(&emb.k_lattice, n_max - f.vmin())?;
    let up = Transfer::from_embedding(emb)?.pull_up(&f)?;
    theta_contract(&up, &emb.a_m.module, &theta)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientCheck {
    pub mu: FqElement,
    pub l: Q,
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPReport {
    pub embedding: Value,
    pub predicted_weight: Option<Q>,
    pub lifted_weight: Option<Q>,
    pub g: VVForm,
    pub checks: Vec<CoefficientCheck>,
    pub notes: Vec<String>,
    pub verdict: bool,
}

fn embedding_summary(emb: &EmbeddingData) -> Value {
    json!({
        "signature": [emb.lattice.signature().0, emb.lattice.signature().1],
        "rank_k": emb.k_neg.rank(),
        "index": emb.index,
        "order_a_l": emb.a_l.module.order(),
        "order_a_m": emb.a_m.module.order(),
        "order_g_m": emb.graph.g_left.len(),
        "witt_asserted": emb.witt_asserted,
    })
}

/// Checks a candidate `g` against the data of `f`: the weight of `Psi_M(g)`
/// against the predicted quasi-pullback weight, and every coefficient of `g`
/// up to `n_max` against `sum_v c^{L'}_{(mu, v)}(l + q(v))` from `f up` and
/// enumerated vectors `v in K(-1)^dual`.
pub fn verify_candidate(f: &VVForm, emb: &EmbeddingData, g: &VVForm, n_max: Q) -> QPReport {
    let mut notes = Vec::new();
    let predicted = match predicted_qp_weight(f, emb) {
        Ok(w) => Some(w),
        Err(e) => {
            notes.push(format!("predicted weight: {e}"));
            None
        }
    };
    let m_sig = emb.m_lattice.signature();
    let lifted = match descriptor(g, m_sig) {
        Ok(d) => Some(d.weight),
        Err(e) => {
            notes.push(format!("descriptor of g: {e}"));
            None
        }
    };
    let checks = match coefficient_checks(f, emb, g, n_max) {
        Ok(c) => c,
        Err(e) => {
            notes.push(format!("coefficient checks: {e}"));
            vec![]
        }
    };
    let weights_ok = predicted.is_some() && predicted == lifted;
    if predicted.is_some() && lifted.is_some() && !weights_ok {
        notes.push("weight mismatch".into());
    }
    let verdict = weights_ok && !checks.is_empty() && checks.iter().all(|c| c.pass) && notes.is_empty();
    QPReport {
        embedding: embedding_summary(emb),
        predicted_weight: predicted,
        lifted_weight: lifted,
        g: g.clone(),
        checks,
        notes,
        verdict,
    }
}

fn coefficient_checks(f: &VVForm, emb: &EmbeddingData, g: &VVForm, n_max: Q) -> Result<Vec<CoefficientCheck>> {
    check_input(f, emb)?;
    f.require_trunc(n_max, "input form")?;
    g.require_trunc(n_max, "candidate")?;
    if g.module() != &emb.a_m.module {
        return Err(Error::ModuleMismatch("g does not live on A_M".into()));
    }
    let t = Transfer::from_embedding(emb)?;
    let up = t.pull_up(f)?;
    let a_k = emb.a_k();
    let a_m = &emb.a_m.module;
    let vmin = f.vmin();
    let depth = n_max - vmin;
    // norms q_K(v) of v in K + lambda, with multiplicity
    let mut counts: Vec<BTreeMap<Q, u64>> = Vec::new();
    for lam in a_k.module.elements() {
        let c = coset_representative(&a_k, &lam);
        let mut m = BTreeMap::new();
        for sv in short_vectors(&emb.k_lattice, &c, depth * 2)? {
            *m.entry(sv.norm / 2).or_insert(0u64) += 1;
        }
        counts.push(m);
    }
    let mut checks = Vec::new();
    for mu in a_m.elements() {
        let qm = a_m.q_value(&mu);
        // smallest l >= vmin with l in q(mu) + Z
        let mut l = vmin + mod1(qm - vmin);
        while l <= n_max {
            let mut rhs = BigRational::zero();
            for (li, lam) in a_k.module.elements().enumerate() {
                let x = FqModule::join(&mu, &lam);
                for (&qk, &cnt) in &counts[li] {
                    if l - qk < vmin {
                        break;
                    }
                    let c = up.coeff_of(&x, l - qk);
                    if !c.is_zero() {
                        rhs += c * BigRational::from_integer(BigInt::from(cnt));
                    }
                }
            }
            let lhs = g.coeff_of(&mu, l);
            let pass = lhs == rhs;
            checks.push(CoefficientCheck { mu: mu.clone(), l, lhs, rhs, pass });
            l += Q::from_integer(1);
        }
    }
    Ok(checks)
}

/// Computes `g` from `f` and verifies it.
pub fn verify_main_theorem(f: &VVForm, emb: &EmbeddingData, n_max: Q) -> QPReport {
    match quasi_pullback_form(f, emb, n_max) {
        Ok(g) => verify_candidate(f, emb, &g, n_max),
        Err(e) => QPReport {
            embedding: embedding_summary(emb),
            predicted_weight: None,
            lifted_weight: None,
            g: VVForm::zero(&emb.a_m.module, Q::zero(), n_max),
            checks: vec![],
            notes: vec![format!("quasi-pullback form: {e}")],
            verdict: false,
        },
    }
}

fn opt_q(x: &Option<Q>) -> Value {
    x.as_ref().map_or(Value::Null, |w| json!(fmt_q(w)))
}

impl QPReport {
    pub fn failures(&self) -> impl Iterator<Item = &CoefficientCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "embedding": self.embedding,
            "predicted_weight": opt_q(&self.predicted_weight),
            "lifted_weight": opt_q(&self.lifted_weight),
            "g": self.g.to_json(),
            "checks": self.checks.iter().map(|c| json!({
                "mu": c.mu.0,
                "l": fmt_q(&c.l),
                "lhs": fmt_big(&c.lhs),
                "rhs": fmt_big(&c.rhs),
                "pass": c.pass,
            })).collect::<Vec<_>>(),
            "notes": self.notes,
            "verdict": if self.verdict { "pass" } else { "fail" },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |w: &str| Error::Parse(format!("report: {w}"));
        let weight = |key: &str| -> Result<Option<Q>> {
            match &v[key] {
                Value::Null => Ok(None),
                Value::String(s) => Ok(Some(parse_q(s)?)),
                _ => Err(bad(key)),
            }
        };
        let checks = v["checks"]
            .as_array()
            .ok_or_else(|| bad("checks"))?
            .iter()
            .map(|c| {
                let mu = c["mu"]
                    .as_array()
                    .ok_or_else(|| bad("mu"))?
                    .iter()
                    .map(|x| x.as_i64().ok_or_else(|| bad("mu")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CoefficientCheck {
                    mu: FqElement(mu),
                    l: parse_q(c["l"].as_str().ok_or_else(|| bad("l"))?)?,
                    lhs: parse_big(c["lhs"].as_str().ok_or_else(|| bad("lhs"))?)?,
                    rhs: parse_big(c["rhs"].as_str().ok_or_else(|| bad("rhs"))?)?,
                    pass: c["pass"].as_bool().ok_or_else(|| bad("pass"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            embedding: v["embedding"].clone(),
            predicted_weight: weight("predicted_weight")?,
            lifted_weight: weight("lifted_weight")?,
            g: VVForm::from_json(&v["g"])?,
            checks,
            notes: v["notes"]
                .as_array()
                .ok_or_else(|| bad("notes"))?
                .iter()
                .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("notes")))
                .collect::<Result<_>>()?,
            verdict: match v["verdict"].as_str() {
                Some("pass") => true,
                Some("fail") => false,
                _ => return Err(bad("verdict")),
            },
        })
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let w = |x: &Option<Q>| x.as_ref().map_or("-".to_string(), fmt_q);
        let _ = writeln!(s, "embedding        {}", self.embedding);
        let _ = writeln!(s, "predicted weight {}", w(&self.predicted_weight));
        let _ = writeln!(s, "lifted weight    {}", w(&self.lifted_weight));
        let _ = writeln!(s, "{:<12} {:>8} {:>16} {:>16}  ok", "mu", "l", "lhs", "rhs");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<12} {:>8} {:>16} {:>16}  {}",
                c.mu.to_string(),
                fmt_q(&c.l),
                fmt_big(&c.lhs),
                fmt_big(&c.rhs),
                if c.pass { "yes" } else { "NO" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "verdict: {}", if self.verdict { "pass" } else { "fail" });
        s
    }
}

/// Adds `delta` to `c_lambda(n)` (and to `c_{-lambda}(n)` when different, so
/// the result is still a valid input).
pub fn perturb(f: &VVForm, lambda: &FqElement, n: Q, delta: i64) -> Result<VVForm> {
    let m = f.module();
    let mut out = f.clone();
    let d = BigRational::from_integer(BigInt::from(delta));
    out.add_coeff(m.index_of(lambda), n, d.clone())?;
    let neg = m.neg(lambda);
    if neg != *lambda {
        out.add_coeff(m.index_of(&neg), n, d)?;
    }
    Ok(out)
}

pub fn abs_max_mismatch(report: &QPReport) -> BigRational {
    report.failures().map(|c| (&c.lhs - &c.rhs).abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ii_2_26;
    use crate::qexp::ScalarQSeries;
    use crate::rational::{big_int, q};

    fn inv_delta(n: i64) -> VVForm {
        let coeffs = [1i64, 24, 324, 3200, 25650, 176256, 1073720];
        let terms: Vec<(Q, i64)> = (0..=(n + 1) as usize).map(|i| (q(i as i64 - 1, 1), coeffs[i])).collect();
        VVForm::from_scalar(&ScalarQSeries::from_terms(q(n, 1), &terms), q(-12, 1))
    }

    fn root_embedding() -> EmbeddingData {
        EmbeddingData::build(&ii_2_26(), vec![(0..28).map(|j| i64::from(j == 4)).collect()], false).unwrap()
    }

    #[test]
    fn descriptor_of_inverse_delta() {
        let d = descriptor(&inv_delta(2), (2, 26)).unwrap();
        assert_eq!(d.weight, q(12, 1));
        assert_eq!(d.divisor.len(), 1);
        assert_eq!(d.divisor[&(0, q(-1, 1))], BigInt::from(1));
    }

    #[test]
    fn descriptor_rejects_odd_constant() {
        let mut f = inv_delta(2);
        f.add_coeff(0, Q::zero(), big_int(-21)).unwrap();
        assert!(matches!(descriptor(&f, (2, 26)), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn root_case_weights() {
        let emb = root_embedding();
        let f = inv_delta(3);
        assert_eq!(r_order(&f, &emb, &[1]).unwrap(), BigInt::from(1));
        assert_eq!(predicted_qp_weight(&f, &emb).unwrap(), q(13, 1));
        let g = quasi_pullback_form(&f, &emb, q(3, 1)).unwrap();
        assert_eq!(g.coeff(0, Q::zero()), big_int(26));
        assert_eq!(g.coeff(1, q(-3, 4)), big_int(2));
        let rep = verify_main_theorem(&f, &emb, q(3, 1));
        assert!(rep.verdict, "{}", rep.to_table());
        assert_eq!(rep.lifted_weight, Some(q(13, 1)));
    }

    #[test]
    fn perturbed_input_fails() {
        let emb = root_embedding();
        let f = inv_delta(3);
        let g = quasi_pullback_form(&f, &emb, q(3, 1)).unwrap();
        let bad = perturb(&f, &FqElement(vec![]), q(-1, 1), 1).unwrap();
        let rep = verify_candidate(&bad, &emb, &g, q(3, 1));
        assert!(!rep.verdict);
        assert!(rep.failures().any(|c| c.l == q(-1, 1)));
    }

    #[test]
    fn report_roundtrip() {
        let rep = verify_main_theorem(&inv_delta(2), &root_embedding(), q(2, 1));
        let back = QPReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }
}
