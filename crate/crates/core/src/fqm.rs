//! Finite quadratic modules: finite abelian groups with a nondegenerate
//! Q/Z-valued quadratic form.
//!
//! A module is stored as cyclic factors `Z/d_1 + ... + Z/d_r` together with
//! `q` on the generators and the bilinear Gram matrix mod 1; `q` of a general
//! element is recovered by polarization. Elements are enumerated
//! lexicographically with the first coordinate most significant, so the
//! index of `(x, y)` in a direct sum `A + B` is `idx_A(x) * |B| + idx_B(y)`.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{row_basis, smith_normal_form, solve_echelon};
use crate::rational::{e, fmt_q, lcm, mod1, parse_q, Q};

const NONDEGENERACY_CHECK_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElement(pub Vec<i64>);

impl FqElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct FqModule {
    orders: Vec<i64>,
    q_gen: Vec<Q>,
    gram: Vec<Vec<Q>>,
    source_signature: Option<(usize, usize)>,
}

/// Equality of the quadratic structure; the recorded source signature is
/// metadata and does not take part.
impl PartialEq for FqModule {
    fn eq(&self, other: &Self) -> bool {
        self.orders == other.orders && self.q_gen == other.q_gen && self.gram == other.gram
    }
}

impl Eq for FqModule {}

impl FqModule {
    pub fn new(orders: Vec<i64>, q_gen: Vec<Q>, gram: Vec<Vec<Q>>) -> Result<Self> {
        let m = Self::from_parts(orders, q_gen, gram)?;
        if m.order() <= NONDEGENERACY_CHECK_LIMIT && !m.is_nondegenerate() {
            return Err(Error::InvalidModule("bilinear form is degenerate".into()));
        }
        Ok(m)
    }

    /// Validates the polarization data but skips the nondegeneracy scan.
    pub(crate) fn from_parts(orders: Vec<i64>, q_gen: Vec<Q>, gram: Vec<Vec<Q>>) -> Result<Self> {
        let r = orders.len();
        if q_gen.len() != r || gram.len() != r || gram.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidModule("shape mismatch".into()));
        }
        if orders.iter().any(|&d| d < 2) {
            return Err(Error::InvalidModule("cyclic orders must be >= 2".into()));
        }
        let q_gen: Vec<Q> = q_gen.into_iter().map(mod1).collect();
        let gram: Vec<Vec<Q>> = gram.into_iter().map(|row| row.into_iter().map(mod1).collect()).collect();
        for i in 0..r {
            if gram[i][i] != mod1(q_gen[i] * 2) {
                return Err(Error::InvalidModule(format!("b(g{i},g{i}) != 2 q(g{i})")));
            }
            let d = Q::from_integer(orders[i]);
            if !(q_gen[i] * d * d).is_integer() {
                return Err(Error::InvalidModule(format!("q(d g{i}) != 0")));
            }
            for j in 0..r {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidModule("Gram matrix not symmetric".into()));
                }
                if !(gram[i][j] * d).is_integer() {
                    return Err(Error::InvalidModule(format!("d_{i} b(g{i},g{j}) != 0")));
                }
            }
        }
        Ok(Self { orders, q_gen, gram, source_signature: None })
    }

    pub fn trivial() -> Self {
        Self { orders: vec![], q_gen: vec![], gram: vec![], source_signature: Some((0, 0)) }
    }

    /// Cyclic module `Z/n` with `q(1) = value`.
    pub fn cyclic(n: i64, value: Q) -> Result<Self> {
        Self::new(vec![n], vec![value], vec![vec![value * 2]])
    }

    pub fn with_signature(mut self, sig: (usize, usize)) -> Self {
        self.source_signature = Some(sig);
        self
    }

    pub fn source_signature(&self) -> Option<(usize, usize)> {
        self.source_signature
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn q_gen(&self) -> &[Q] {
        &self.q_gen
    }

    pub fn gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> usize {
        self.orders.iter().map(|&d| d as usize).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    /// Exponent of the group (lcm of cyclic orders).
    pub fn exponent(&self) -> i64 {
        self.orders.iter().fold(1, |acc, &d| lcm(acc, d))
    }

    pub fn zero(&self) -> FqElement {
        FqElement(vec![0; self.rank()])
    }

    pub fn element(&self, coords: &[i64]) -> Result<FqElement> {
        if coords.len() != self.rank() {
            return Err(Error::BadElement(coords.to_vec()));
        }
        Ok(FqElement(coords.iter().zip(&self.orders).map(|(&c, &d)| c.rem_euclid(d)).collect()))
    }

    fn check(&self, x: &FqElement) -> Result<()> {
        if x.0.len() != self.rank() || x.0.iter().zip(&self.orders).any(|(&c, &d)| c < 0 || c >= d) {
            return Err(Error::BadElement(x.0.clone()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &FqElement) -> bool {
        self.check(x).is_ok()
    }

    pub fn index_of(&self, x: &FqElement) -> usize {
        x.0.iter().zip(&self.orders).fold(0usize, |acc, (&c, &d)| acc * d as usize + c as usize)
    }

    pub fn element_at(&self, mut idx: usize) -> FqElement {
        let mut coords = vec![0i64; self.rank()];
        for i in (0..self.rank()).rev() {
            let d = self.orders[i] as usize;
            coords[i] = (idx % d) as i64;
            idx /= d;
        }
        FqElement(coords)
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElement> + '_ {
        (0..self.order()).map(move |i| self.element_at(i))
    }

    pub fn add(&self, x: &FqElement, y: &FqElement) -> FqElement {
        FqElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.orders)
                .map(|((&a, &b), &d)| (a + b).rem_euclid(d))
                .collect(),
        )
    }

    pub fn neg(&self, x: &FqElement) -> FqElement {
        FqElement(x.0.iter().zip(&self.orders).map(|(&a, &d)| (-a).rem_euclid(d)).collect())
    }

    pub fn sub(&self, x: &FqElement, y: &FqElement) -> FqElement {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, k: i64, x: &FqElement) -> FqElement {
        FqElement(x.0.iter().zip(&self.orders).map(|(&a, &d)| (k * a).rem_euclid(d)).collect())
    }

    /// q(x) in [0, 1).
    pub fn q_value(&self, x: &FqElement) -> Q {
        let c = &x.0;
        let mut s = Q::zero();
        for i in 0..self.rank() {
            if c[i] == 0 {
                continue;
            }
            s += self.q_gen[i] * (c[i] * c[i]);
            for j in i + 1..self.rank() {
                s += self.gram[i][j] * (c[i] * c[j]);
            }
        }
        mod1(s)
    }

    /// b(x, y) = q(x+y) - q(x) - q(y) in [0, 1).
    pub fn bilinear(&self, x: &FqElement, y: &FqElement) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rank() {
            if x.0[i] == 0 {
                continue;
            }
            for j in 0..self.rank() {
                s += self.gram[i][j] * (x.0[i] * y.0[j]);
            }
        }
        mod1(s)
    }

    /// The order of `x` in the group.
    pub fn element_order(&self, x: &FqElement) -> i64 {
        x.0.iter()
            .zip(&self.orders)
            .fold(1, |acc, (&c, &d)| lcm(acc, d / num_integer::gcd(c, d)))
    }

    pub fn is_nondegenerate(&self) -> bool {
        let gens: Vec<FqElement> = (0..self.rank())
            .map(|i| {
                let mut c = vec![0; self.rank()];
                c[i] = 1;
                FqElement(c)
            })
            .collect();
        self.elements()
            .skip(1)
            .all(|x| gens.iter().any(|g| !self.bilinear(&x, g).is_zero()))
    }

    pub fn gauss_sum(&self) -> Complex64 {
        self.elements().map(|x| e(self.q_value(&x))).sum()
    }

    /// sigma(A) in Z/8 from the Gauss-Milgram relation, by rounding the
    /// argument of the Gauss sum to the nearest eighth.
    pub fn signature_mod8(&self) -> Result<u8> {
        let g = self.gauss_sum();
        let expected = (self.order() as f64).sqrt();
        if (g.norm() - expected).abs() > 1e-8 {
            return Err(Error::GaussSum { found: g.norm(), expected });
        }
        let eighths = g.arg() / (2.0 * std::f64::consts::PI) * 8.0;
        Ok((eighths.round() as i64).rem_euclid(8) as u8)
    }

    /// Gauss-sum magnitude error | |sum| - sqrt|A| |.
    pub fn gauss_sum_error(&self) -> f64 {
        (self.gauss_sum().norm() - (self.order() as f64).sqrt()).abs()
    }

    /// Smallest d >= 1 with d q(x) = 0 for all x.
    pub fn level(&self) -> i64 {
        let mut l = 1;
        for i in 0..self.rank() {
            l = lcm(l, *self.q_gen[i].denom());
            for j in 0..self.rank() {
                l = lcm(l, *self.gram[i][j].denom());
            }
        }
        l
    }

    /// The same group with the form multiplied by -1.
    pub fn negated(&self) -> Self {
        Self {
            orders: self.orders.clone(),
            q_gen: self.q_gen.iter().map(|&x| mod1(-x)).collect(),
            gram: self.gram.iter().map(|r| r.iter().map(|&x| mod1(-x)).collect()).collect(),
            source_signature: self.source_signature.map(|(p, n)| (n, p)),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let r = self.rank() + other.rank();
        let mut gram = vec![vec![Q::zero(); r]; r];
        for i in 0..self.rank() {
            gram[i][..self.rank()].copy_from_slice(&self.gram[i]);
        }
        for i in 0..other.rank() {
            gram[self.rank() + i][self.rank()..].copy_from_slice(&other.gram[i]);
        }
        let mut q_gen = self.q_gen.clone();
        q_gen.extend_from_slice(&other.q_gen);
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        let source_signature = match (self.source_signature, other.source_signature) {
            (Some((a, b)), Some((c, d))) => Some((a + c, b + d)),
            _ => None,
        };
        Self { orders, q_gen, gram, source_signature }
    }

    /// Splits an element of `self = left + right` into its two components.
    pub fn split(&self, x: &FqElement, left_rank: usize) -> (FqElement, FqElement) {
        (FqElement(x.0[..left_rank].to_vec()), FqElement(x.0[left_rank..].to_vec()))
    }

    pub fn join(x: &FqElement, y: &FqElement) -> FqElement {
        let mut c = x.0.clone();
        c.extend_from_slice(&y.0);
        FqElement(c)
    }

    /// Subgroup generated by `gens`, sorted by element index.
    pub fn span(&self, gens: &[FqElement]) -> Vec<FqElement> {
        let mut seen = BTreeSet::new();
        seen.insert(self.index_of(&self.zero()));
        let mut frontier = vec![self.zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(self.index_of(&y)) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().map(|i| self.element_at(i)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "orders": self.orders,
            "gram_mod1": self.gram.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "q_gen": self.q_gen.iter().map(fmt_q).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("module: {what}"));
        let orders: Vec<i64> = v["orders"]
            .as_array()
            .ok_or_else(|| bad("orders"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| bad("orders")))
            .collect::<Result<_>>()?;
        let q_gen: Vec<Q> = v["q_gen"]
            .as_array()
            .ok_or_else(|| bad("q_gen"))?
            .iter()
            .map(|x| parse_q(x.as_str().ok_or_else(|| bad("q_gen"))?))
            .collect::<Result<_>>()?;
        let gram: Vec<Vec<Q>> = v["gram_mod1"]
            .as_array()
            .ok_or_else(|| bad("gram_mod1"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("gram_mod1"))?
                    .iter()
                    .map(|x| parse_q(x.as_str().ok_or_else(|| bad("gram_mod1"))?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::new(orders, q_gen, gram)
    }
}

/// An isotropic subgroup, kept together with its full element list.
#[derive(Clone, Debug)]
pub struct IsotropicSubgroup {
    parent: FqModule,
    generators: Vec<FqElement>,
    elements: Vec<FqElement>,
}

impl IsotropicSubgroup {
    pub fn new(parent: &FqModule, generators: Vec<FqElement>) -> Result<Self> {
        for g in &generators {
            parent.check(g)?;
        }
        let elements = parent.span(&generators);
        for x in &elements {
            let v = parent.q_value(x);
            if !v.is_zero() {
                return Err(Error::NotIsotropic(x.0.clone(), fmt_q(&v)));
            }
        }
        Ok(Self { parent: parent.clone(), generators, elements })
    }

    pub fn trivial(parent: &FqModule) -> Self {
        Self { parent: parent.clone(), generators: vec![], elements: vec![parent.zero()] }
    }

    pub fn parent(&self) -> &FqModule {
        &self.parent
    }

    pub fn generators(&self) -> &[FqElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[FqElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &FqElement) -> bool {
        self.elements.binary_search_by_key(&self.parent.index_of(x), |y| self.parent.index_of(y)).is_ok()
    }

    pub fn is_perp(&self, x: &FqElement) -> bool {
        self.generators.iter().all(|g| self.parent.bilinear(x, g).is_zero())
    }

    /// Elements of I^perp in index order.
    pub fn perp(&self) -> Vec<FqElement> {
        self.parent.elements().filter(|x| self.is_perp(x)).collect()
    }
}

/// `A = I^perp / I` with the projection `p: I^perp -> A`.
#[derive(Clone, Debug)]
pub struct PerpQuotient {
    pub module: FqModule,
    /// Indexed by element index of the parent; `None` off `I^perp`.
    pub projection: Vec<Option<usize>>,
}

/// Quotient `I^perp / I`, presented by Smith normal form of the relation
/// lattice of `I` inside the lattice of `I^perp`.
pub fn perp_quotient(parent: &FqModule, iso: &IsotropicSubgroup) -> Result<PerpQuotient> {
    if iso.parent() != parent {
        return Err(Error::ModuleMismatch("isotropic subgroup lives in another module".into()));
    }
    let r = parent.rank();
    let torsion: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            let mut v = vec![0; r];
            v[i] = parent.orders()[i];
            v
        })
        .collect();
    let perp = iso.perp();
    let mut perp_rows: Vec<Vec<i64>> = perp.iter().map(|x| x.0.clone()).collect();
    perp_rows.extend(torsion.iter().cloned());
    let basis = row_basis(&perp_rows, r);
    let mut rel_rows: Vec<Vec<i64>> = iso.elements().iter().map(|x| x.0.clone()).collect();
    rel_rows.extend(torsion);
    let relations: Vec<Vec<i64>> = rel_rows
        .iter()
        .map(|v| solve_echelon(&basis, v).ok_or_else(|| Error::QuotientMismatch("I not inside I^perp".into())))
        .collect::<Result<_>>()?;
    let snf = smith_normal_form(&relations);
    let diag = snf.diagonal();
    let keep: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] != 1).collect();
    if keep.iter().any(|&i| diag[i] == 0) {
        return Err(Error::QuotientMismatch("infinite quotient".into()));
    }
    let orders: Vec<i64> = keep.iter().map(|&i| diag[i]).collect();
    // generator i lifts to (row i of v_inv) * basis
    let lifts: Vec<FqElement> = keep
        .iter()
        .map(|&i| {
            let c = &snf.v_inv[i];
            let v: Vec<i64> = (0..r).map(|k| (0..basis.len()).map(|j| c[j] * basis[j][k]).sum()).collect();
            parent.element(&v)
        })
        .collect::<Result<_>>()?;
    let q_gen: Vec<Q> = lifts.iter().map(|x| parent.q_value(x)).collect();
    let gram: Vec<Vec<Q>> = lifts
        .iter()
        .map(|x| lifts.iter().map(|y| parent.bilinear(x, y)).collect())
        .collect();
    let mut module = FqModule::from_parts(orders.clone(), q_gen, gram)?;
    module.source_signature = parent.source_signature;
    let mut projection = vec![None; parent.order()];
    for x in &perp {
        let c = solve_echelon(&basis, &x.0).ok_or_else(|| Error::QuotientMismatch("perp element".into()))?;
        let coords: Vec<i64> = keep
            .iter()
            .map(|&i| (0..c.len()).map(|j| c[j] as i128 * snf.v[j][i] as i128).sum::<i128>() as i64)
            .collect();
        let y = module.element(&coords)?;
        projection[parent.index_of(x)] = Some(module.index_of(&y));
    }
    Ok(PerpQuotient { module, projection })
}

/// Projections of a subgroup `I` of `left + right` and the isomorphism
/// `G_left -> G_right` whose graph is `I`.
#[derive(Clone, Debug)]
pub struct GraphData {
    pub g_left: Vec<FqElement>,
    pub g_right: Vec<FqElement>,
    pub iota: Vec<(FqElement, FqElement)>,
}

pub fn graph_of(sum: &FqModule, left_rank: usize, subgroup: &[FqElement]) -> Result<GraphData> {
    let mut iota: Vec<(FqElement, FqElement)> = subgroup.iter().map(|x| sum.split(x, left_rank)).collect();
    iota.sort();
    let lefts: BTreeSet<_> = iota.iter().map(|(a, _)| a.clone()).collect();
    let rights: BTreeSet<_> = iota.iter().map(|(_, b)| b.clone()).collect();
    if lefts.len() != iota.len() || rights.len() != iota.len() {
        return Err(Error::NonInjectiveProjection);
    }
    Ok(GraphData { g_left: lefts.into_iter().collect(), g_right: rights.into_iter().collect(), iota })
}
