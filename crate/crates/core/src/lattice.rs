//! Even integral lattices given by Gram matrices, their discriminant forms,
//! sublattices, orthogonal complements and embedding data.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fqm::{graph_of, FqElement, FqModule, GraphData, IsotropicSubgroup};
use crate::linalg::{
    determinant, inertia, inverse, left_kernel, mat_mul, rat_to_i64, smith_normal_form, transpose, IntMatrix, RatMatrix,
};
use crate::rational::{big_int, mod1, small, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvenLattice {
    gram: IntMatrix,
    signature: (usize, usize),
}

impl EvenLattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidLattice("Gram matrix is not square".into()));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!("odd diagonal entry at {i}")));
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice("Gram matrix is not symmetric".into()));
                }
            }
        }
        let (p, m, z) = inertia(&gram);
        if z != 0 {
            return Err(Error::InvalidLattice("Gram matrix is degenerate".into()));
        }
        Ok(Self { gram, signature: (p, m) })
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn det(&self) -> BigInt {
        if self.rank() == 0 {
            return BigInt::from(1);
        }
        determinant(&self.gram)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature.1 == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature.0 == 0
    }

    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0i128;
        for i in 0..self.rank() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.rank() {
                s += x[i] as i128 * self.gram[i][j] as i128 * y[j] as i128;
            }
        }
        s as i64
    }

    /// (x, y) for rational coordinate vectors.
    pub fn pair_rat(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for i in 0..self.rank() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.rank() {
                if self.gram[i][j] != 0 {
                    s += &x[i] * &y[j] * big_int(self.gram[i][j]);
                }
            }
        }
        s
    }

    pub fn scale(&self, k: i64) -> Result<Self> {
        Self::new(self.gram.iter().map(|r| r.iter().map(|&x| x * k).collect()).collect())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.rank() + other.rank();
        let mut gram = vec![vec![0; n]; n];
        for i in 0..self.rank() {
            gram[i][..self.rank()].copy_from_slice(&self.gram[i]);
        }
        for i in 0..other.rank() {
            gram[self.rank() + i][self.rank()..].copy_from_slice(&other.gram[i]);
        }
        Self {
            gram,
            signature: (self.signature.0 + other.signature.0, self.signature.1 + other.signature.1),
        }
    }

    pub fn sum(parts: &[EvenLattice]) -> Self {
        parts.iter().fold(Self::zero(), |acc, p| acc.direct_sum(p))
    }

    pub fn zero() -> Self {
        Self { gram: vec![], signature: (0, 0) }
    }

    pub fn discriminant(&self) -> DiscriminantForm {
        DiscriminantForm::new(self)
    }
}

/// `A_L = L^dual / L` in Smith coordinates, together with the class map on
/// dual vectors.
///
/// With `U G V = D`, a dual vector `x` (rational coordinates, `Gx` integral)
/// has class coordinates `(U G x)_i mod d_i` over the factors with `d_i > 1`.
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    pub module: FqModule,
    lattice: EvenLattice,
    /// Rows of `U` for the nontrivial factors.
    class_rows: IntMatrix,
    /// Generator lifts `G^-1 U^-1 e_i` in lattice coordinates.
    lifts: RatMatrix,
    negated: bool,
}

impl DiscriminantForm {
    fn new(l: &EvenLattice) -> Self {
        let n = l.rank();
        if n == 0 {
            return Self {
                module: FqModule::trivial(),
                lattice: l.clone(),
                class_rows: vec![],
                lifts: vec![],
                negated: false,
            };
        }
        let snf = smith_normal_form(&l.gram);
        let diag = snf.diagonal();
        let ginv = inverse(&l.gram).expect("nondegenerate");
        let keep: Vec<usize> = (0..n).filter(|&i| diag[i].abs() != 1).collect();
        let orders: Vec<i64> = keep.iter().map(|&i| diag[i].abs()).collect();
        let class_rows: IntMatrix = keep.iter().map(|&i| snf.u[i].clone()).collect();
        let lifts: RatMatrix = keep
            .iter()
            .map(|&i| {
                // column i of U^-1
                let y: Vec<BigRational> = (0..n).map(|k| big_int(snf.u_inv[k][i])).collect();
                (0..n).map(|r| (0..n).map(|k| &ginv[r][k] * &y[k]).sum()).collect()
            })
            .collect();
        let q_gen: Vec<Q> = lifts.iter().map(|x| rat_mod1(&(l.pair_rat(x, x) / big_int(2)))).collect();
        let gram: Vec<Vec<Q>> = lifts
            .iter()
            .map(|x| lifts.iter().map(|y| rat_mod1(&l.pair_rat(x, y))).collect())
            .collect();
        let module = FqModule::from_parts(orders, q_gen, gram)
            .expect("discriminant form data is consistent")
            .with_signature(l.signature());
        Self { module, lattice: l.clone(), class_rows, lifts, negated: false }
    }

    pub fn lattice(&self) -> &EvenLattice {
        &self.lattice
    }

    /// The same coordinates and class map with the form multiplied by -1;
    /// this is the identification `A_{K(-1)} = A_K`.
    pub fn negated(&self) -> Self {
        Self {
            module: self.module.negated(),
            lattice: self.lattice.scale(-1).expect("scaling keeps validity"),
            class_rows: self.class_rows.clone(),
            lifts: self.lifts.clone(),
            negated: !self.negated,
        }
    }

    /// Class of an integral "dual coordinate" vector `y = G x`.
    pub fn class_of_dual(&self, y: &[i64]) -> FqElement {
        let sign = if self.negated { -1 } else { 1 };
        let coords: Vec<i64> = self
            .class_rows
            .iter()
            .zip(self.module.orders())
            .map(|(row, &d)| {
                let s: i128 = row.iter().zip(y).map(|(&a, &b)| a as i128 * b as i128).sum();
                ((sign as i128 * s).rem_euclid(d as i128)) as i64
            })
            .collect();
        FqElement(coords)
    }

    /// Class of a dual vector given in rational lattice coordinates.
    pub fn class_of(&self, x: &[BigRational]) -> Result<FqElement> {
        let n = self.lattice.rank();
        let g = self.lattice.gram();
        let y: Vec<i64> = (0..n)
            .map(|i| {
                let s: BigRational = (0..n).filter(|&j| g[i][j] != 0).map(|j| &x[j] * big_int(g[i][j])).sum();
                rat_to_i64(&s).ok_or(Error::NotInDual)
            })
            .collect::<Result<_>>()?;
        Ok(self.class_of_dual(&y))
    }

    /// Canonical rational representative of a class.
    pub fn lift(&self, a: &FqElement) -> Vec<BigRational> {
        let n = self.lattice.rank();
        let mut x = vec![BigRational::zero(); n];
        for (c, l) in a.0.iter().zip(&self.lifts) {
            if *c == 0 {
                continue;
            }
            for k in 0..n {
                x[k] += &l[k] * big_int(*c);
            }
        }
        x
    }
}

fn rat_mod1(x: &BigRational) -> Q {
    mod1(small(&(x - x.floor())).expect("small denominator"))
}

/// A sublattice given by integer coordinate rows in the ambient basis.
#[derive(Clone, Debug)]
pub struct Sublattice {
    ambient: EvenLattice,
    basis: IntMatrix,
}

impl Sublattice {
    pub fn new(ambient: &EvenLattice, basis: IntMatrix) -> Result<Self> {
        if basis.iter().any(|r| r.len() != ambient.rank()) {
            return Err(Error::InvalidSublattice("row length differs from ambient rank".into()));
        }
        if !basis.is_empty() && smith_normal_form(&basis).rank() != basis.len() {
            return Err(Error::InvalidSublattice("rows are linearly dependent".into()));
        }
        Ok(Self { ambient: ambient.clone(), basis })
    }

    pub fn ambient(&self) -> &EvenLattice {
        &self.ambient
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn induced_gram(&self) -> IntMatrix {
        if self.basis.is_empty() {
            return vec![];
        }
        mat_mul(&mat_mul(&self.basis, self.ambient.gram()), &transpose(&self.basis))
    }

    pub fn lattice(&self) -> Result<EvenLattice> {
        EvenLattice::new(self.induced_gram()).map_err(|_| Error::DegenerateSublattice)
    }

    pub fn elementary_divisors(&self) -> Vec<i64> {
        if self.basis.is_empty() {
            return vec![];
        }
        smith_normal_form(&self.basis).diagonal()
    }

    pub fn is_primitive(&self) -> bool {
        self.elementary_divisors().iter().all(|&d| d.abs() == 1)
    }

    /// `(Q S) cap Z^n`, spanned by the first rows of `V^-1` in `U S V = D`.
    pub fn saturation(&self) -> Sublattice {
        if self.basis.is_empty() {
            return self.clone();
        }
        let snf = smith_normal_form(&self.basis);
        Sublattice { ambient: self.ambient.clone(), basis: snf.v_inv[..self.rank()].to_vec() }
    }

    /// Ambient coordinates of `sum c_i b_i`.
    pub fn to_ambient(&self, c: &[i64]) -> Vec<i64> {
        (0..self.ambient.rank()).map(|k| c.iter().zip(&self.basis).map(|(&a, r)| a * r[k]).sum()).collect()
    }

    /// True when both span the same subgroup of Z^n.
    pub fn same_span(&self, other: &Sublattice) -> bool {
        let h1 = crate::linalg::row_basis(&self.basis, self.ambient.rank());
        let h2 = crate::linalg::row_basis(&other.basis, self.ambient.rank());
        h1 == h2
    }
}

/// `S^perp cap L`, saturated, of rank `rank(L) - rank(S)`.
pub fn orthogonal_complement(l: &EvenLattice, s: &Sublattice) -> Result<Sublattice> {
    if s.rank() > 0 && s.lattice().is_err() {
        return Err(Error::DegenerateSublattice);
    }
    if s.rank() == 0 {
        return Sublattice::new(l, crate::linalg::identity(l.rank()));
    }
    // x G S^T = 0
    let gs = mat_mul(l.gram(), &transpose(s.basis()));
    Sublattice::new(l, left_kernel(&gs, l.rank()))
}

/// A primitive negative-definite `K(-1)` in `L` with the derived lattices and
/// glue data.
#[derive(Clone, Debug)]
pub struct EmbeddingData {
    pub lattice: EvenLattice,
    pub k_neg: Sublattice,
    pub m: Sublattice,
    pub m_lattice: EvenLattice,
    /// `K(-1)` as an abstract lattice (negative definite).
    pub k_neg_lattice: EvenLattice,
    /// `K`, positive definite.
    pub k_lattice: EvenLattice,
    pub l_prime: EvenLattice,
    pub index: u64,
    pub a_l: DiscriminantForm,
    pub a_m: DiscriminantForm,
    /// `A_{K(-1)}`; `A_K` is `a_k_neg.negated()`.
    pub a_k_neg: DiscriminantForm,
    /// `A_{L'} = A_M + A_{K(-1)}`.
    pub a_l_prime: FqModule,
    pub glue: IsotropicSubgroup,
    pub graph: GraphData,
    /// `p: I^perp -> A_L` computed on lattice vectors, indexed by `A_{L'}` index.
    pub perp_to_a_l: Vec<Option<usize>>,
    pub witt_asserted: bool,
}

impl EmbeddingData {
    pub fn build(l: &EvenLattice, k_basis: IntMatrix, assert_witt: bool) -> Result<Self> {
        let k_neg = Sublattice::new(l, k_basis)?;
        let divisors = k_neg.elementary_divisors();
        if !k_neg.is_primitive() {
            return Err(Error::NotPrimitive(divisors));
        }
        let k_neg_lattice = k_neg.lattice()?;
        if !k_neg_lattice.is_negative_definite() {
            return Err(Error::NotNegativeDefinite);
        }
        let m = orthogonal_complement(l, &k_neg)?;
        let m_lattice = m.lattice()?;
        if m.rank() <= 4 {
            if !assert_witt {
                return Err(Error::WittUnverified(m.rank()));
            }
            log::warn!("rank(M) = {} <= 4: Witt index condition taken as asserted", m.rank());
        }
        let k_lattice = k_neg_lattice.scale(-1)?;
        let l_prime = m_lattice.direct_sum(&k_neg_lattice);
        let a_l = l.discriminant();
        let a_m = m_lattice.discriminant();
        let a_k_neg = k_neg_lattice.discriminant();
        let a_l_prime = a_m.module.direct_sum(&a_k_neg.module);

        let stacked: IntMatrix = m.basis().iter().chain(k_neg.basis()).cloned().collect();
        let det = determinant(&stacked);
        let index = det.abs().to_u64().ok_or_else(|| Error::Embedding("index overflow".into()))?;
        if index == 0 {
            return Err(Error::Embedding("M + K(-1) has lower rank".into()));
        }
        let expected = a_l.module.order() as u128 * (index as u128) * (index as u128);
        if a_l_prime.order() as u128 != expected {
            return Err(Error::Embedding(format!("|A_L'| = {} but |A_L| index^2 = {expected}", a_l_prime.order())));
        }
        let p = inverse(&stacked).expect("full rank");
        let mr = m.rank();
        // e_j = sum_i P[j][i] row_i: its components in M and K(-1) coordinates
        let mut gens = Vec::new();
        for row in &p {
            let xm = &row[..mr];
            let xk = &row[mr..];
            let cm = a_m.class_of(xm)?;
            let ck = a_k_neg.class_of(xk)?;
            gens.push(FqModule::join(&cm, &ck));
        }
        let glue = IsotropicSubgroup::new(&a_l_prime, gens)?;
        if glue.order() as u64 != index {
            return Err(Error::Embedding(format!("|I| = {} differs from index {index}", glue.order())));
        }
        let graph = graph_of(&a_l_prime, a_m.module.rank(), glue.elements())?;
        for (mu, nu) in &graph.iota {
            if !mod1(a_m.module.q_value(mu) + a_k_neg.module.q_value(nu)).is_zero() {
                return Err(Error::Embedding("iota does not reverse q".into()));
            }
        }
        let mut perp_to_a_l = vec![None; a_l_prime.order()];
        for x in glue.perp() {
            let (mu, nu) = a_l_prime.split(&x, a_m.module.rank());
            let xm = a_m.lift(&mu);
            let xk = a_k_neg.lift(&nu);
            let v: Vec<BigRational> = (0..l.rank())
                .map(|c| {
                    let s1: BigRational = (0..mr).map(|i| &xm[i] * big_int(m.basis()[i][c])).sum();
                    let s2: BigRational = (0..k_neg.rank()).map(|i| &xk[i] * big_int(k_neg.basis()[i][c])).sum();
                    s1 + s2
                })
                .collect();
            let cls = a_l.class_of(&v)?;
            perp_to_a_l[a_l_prime.index_of(&x)] = Some(a_l.module.index_of(&cls));
        }
        Ok(Self {
            lattice: l.clone(),
            k_neg,
            m,
            m_lattice,
            k_neg_lattice,
            k_lattice,
            l_prime,
            index,
            a_l,
            a_m,
            a_k_neg,
            a_l_prime,
            glue,
            graph,
            perp_to_a_l,
            witt_asserted: assert_witt,
        })
    }

    pub fn a_k(&self) -> DiscriminantForm {
        self.a_k_neg.negated()
    }

    pub fn is_split(&self) -> bool {
        self.index == 1
    }
}

// ---- built-in lattices and the lattice description format ----

fn cartan(n: usize, edges: &[(usize, usize)]) -> IntMatrix {
    let mut g = vec![vec![0; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in edges {
        g[a - 1][b - 1] = -1;
        g[b - 1][a - 1] = -1;
    }
    g
}

pub fn hyperbolic_plane() -> EvenLattice {
    EvenLattice::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
}

/// E8 root lattice, Bourbaki labeling.
pub fn e8() -> EvenLattice {
    EvenLattice::new(cartan(8, &[(1, 3), (3, 4), (2, 4), (4, 5), (5, 6), (6, 7), (7, 8)])).unwrap()
}

pub fn e7() -> EvenLattice {
    EvenLattice::new(cartan(7, &[(1, 3), (3, 4), (2, 4), (4, 5), (5, 6), (6, 7)])).unwrap()
}

pub fn a1() -> EvenLattice {
    EvenLattice::new(vec![vec![2]]).unwrap()
}

/// `U + U + E8(-1)^3`; the first `E8(-1)` occupies coordinates 4..12.
pub fn ii_2_26() -> EvenLattice {
    let e8n = e8().scale(-1).unwrap();
    EvenLattice::sum(&[hyperbolic_plane(), hyperbolic_plane(), e8n.clone(), e8n.clone(), e8n])
}

pub fn builtin(name: &str) -> Option<EvenLattice> {
    match name {
        "U" => Some(hyperbolic_plane()),
        "E8" => Some(e8()),
        "E7" => Some(e7()),
        "A1" => Some(a1()),
        "II_2_26" => Some(ii_2_26()),
        _ => None,
    }
}

/// Named lattices and sublattices available to expressions.
#[derive(Clone, Debug, Default)]
pub struct LatticeLibrary {
    lattices: BTreeMap<String, EvenLattice>,
    sublattices: BTreeMap<String, BTreeMap<String, IntMatrix>>,
}

impl LatticeLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, l: EvenLattice) {
        self.lattices.insert(name.to_string(), l);
    }

    pub fn sublattice(&self, lattice: &str, name: &str) -> Option<&IntMatrix> {
        self.sublattices.get(lattice)?.get(name)
    }

    /// Loads one lattice description `{name, gram | expr, sublattices}`.
    pub fn load_json(&mut self, v: &Value) -> Result<String> {
        let name = v["name"].as_str().ok_or_else(|| Error::Parse("lattice needs a name".into()))?.to_string();
        let l = if let Some(g) = v.get("gram") {
            EvenLattice::new(parse_int_matrix(g)?)?
        } else if let Some(e) = v.get("expr").and_then(Value::as_str) {
            self.eval(e)?
        } else {
            return Err(Error::Parse(format!("lattice {name}: needs gram or expr")));
        };
        if let Some(subs) = v.get("sublattices").and_then(Value::as_object) {
            let entry = self.sublattices.entry(name.clone()).or_default();
            for (k, m) in subs {
                entry.insert(k.clone(), parse_int_matrix(m)?);
            }
        }
        self.lattices.insert(name.clone(), l);
        Ok(name)
    }

    /// Evaluates `NAME`, `scale(expr, k)`, `sum(expr, ...)` or `diag(a, ...)`.
    pub fn eval(&self, expr: &str) -> Result<EvenLattice> {
        let expr = expr.trim();
        if let Some(l) = self.lattices.get(expr) {
            return Ok(l.clone());
        }
        if let Some(l) = builtin(expr) {
            return Ok(l);
        }
        let (head, args) = split_call(expr).ok_or_else(|| Error::Parse(format!("unknown lattice '{expr}'")))?;
        match head {
            "scale" => {
                if args.len() != 2 {
                    return Err(Error::Parse("scale takes two arguments".into()));
                }
                let k: i64 = args[1].trim().parse().map_err(|_| Error::Parse(format!("bad factor '{}'", args[1])))?;
                self.eval(args[0])?.scale(k)
            }
            "sum" => Ok(EvenLattice::sum(&args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>>>()?)),
            "diag" => {
                let d: Vec<i64> = args
                    .iter()
                    .map(|a| a.trim().parse().map_err(|_| Error::Parse(format!("bad entry '{a}'"))))
                    .collect::<Result<_>>()?;
                let n = d.len();
                EvenLattice::new((0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0 }).collect()).collect())
            }
            _ => Err(Error::Parse(format!("unknown constructor '{head}'"))),
        }
    }
}

/// Splits `head(a, b(c, d), e)` into the head and top-level arguments.
fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let head = s[..open].trim();
    let inner = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !inner.trim().is_empty() {
        args.push(inner[start..].trim());
    }
    Some((head, args))
}

pub fn parse_int_matrix(v: &Value) -> Result<IntMatrix> {
    let bad = || Error::Parse("expected an array of integer arrays".into());
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|r| r.as_array().ok_or_else(bad)?.iter().map(|x| x.as_i64().ok_or_else(bad)).collect())
        .collect()
}
