//! Pullback and pushforward along `A = I^perp / I`, theta contraction, and
//! the projection formula for glue groups with nondegenerate `G_K`.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fqm::{perp_quotient, FqElement, FqModule, IsotropicSubgroup};
use crate::lattice::EmbeddingData;
use crate::qexp::{ScalarQSeries, VVForm};
use crate::rational::{mod1, Q};

/// `A' -> A` data: the isotropic subgroup and `p: I^perp -> A`.
#[derive(Clone, Debug)]
pub struct Transfer {
    big: FqModule,
    small: FqModule,
    iso: IsotropicSubgroup,
    proj: Vec<Option<usize>>,
}

impl Transfer {
    pub fn from_perp_quotient(big: &FqModule, iso: &IsotropicSubgroup) -> Result<Self> {
        let pq = perp_quotient(big, iso)?;
        Ok(Self { big: big.clone(), small: pq.module, iso: iso.clone(), proj: pq.projection })
    }

    /// Uses a projection computed elsewhere (e.g. on lattice vectors); it must
    /// be defined exactly on `I^perp`, preserve `q` and have fibres of size `|I|`.
    pub fn new(big: &FqModule, iso: &IsotropicSubgroup, small: &FqModule, proj: Vec<Option<usize>>) -> Result<Self> {
        if proj.len() != big.order() || iso.parent() != big {
            return Err(Error::QuotientMismatch("projection table has the wrong size".into()));
        }
        if big.order() != small.order() * iso.order() * iso.order() {
            return Err(Error::QuotientMismatch("|A'| != |A| |I|^2".into()));
        }
        let mut fibre = vec![0usize; small.order()];
        for (i, p) in proj.iter().enumerate() {
            let x = big.element_at(i);
            match (*p, iso.is_perp(&x)) {
                (Some(j), true) => {
                    if big.q_value(&x) != small.q_value(&small.element_at(j)) {
                        return Err(Error::QuotientMismatch(format!("q not preserved at {x}")));
                    }
                    fibre[j] += 1;
                }
                (None, false) => {}
                _ => return Err(Error::QuotientMismatch(format!("projection domain differs from I^perp at {x}"))),
            }
        }
        if fibre.iter().any(|&c| c != iso.order()) {
            return Err(Error::QuotientMismatch("fibres are not cosets of I".into()));
        }
        Ok(Self { big: big.clone(), small: small.clone(), iso: iso.clone(), proj })
    }

    /// The transfer `A_L' -> A_L` of an embedding, with `p` from lattice vectors.
    pub fn from_embedding(emb: &EmbeddingData) -> Result<Self> {
        Self::new(&emb.a_l_prime, &emb.glue, &emb.a_l.module, emb.perp_to_a_l.clone())
    }

    pub fn big(&self) -> &FqModule {
        &self.big
    }

    pub fn small(&self) -> &FqModule {
        &self.small
    }

    pub fn isotropic(&self) -> &IsotropicSubgroup {
        &self.iso
    }

    pub fn projection(&self, x: &FqElement) -> Option<FqElement> {
        self.proj[self.big.index_of(x)].map(|j| self.small.element_at(j))
    }

    pub fn projection_table(&self) -> &[Option<usize>] {
        &self.proj
    }

    /// `f up`: component `mu in I^perp` is `f_{p(mu)}`, other components vanish.
    pub fn pull_up(&self, f: &VVForm) -> Result<VVForm> {
        if f.module() != &self.small {
            return Err(Error::QuotientMismatch("form does not live on I^perp / I".into()));
        }
        let mut out = VVForm::zero(&self.big, f.weight(), f.trunc());
        for (i, p) in self.proj.iter().enumerate() {
            if let Some(j) = p {
                out.set_component(i, &f.component(*j))?;
            }
        }
        Ok(out)
    }

    /// `g down`: component `lambda` is the sum of `g_mu` over `p^-1(lambda)`.
    pub fn push_down(&self, g: &VVForm) -> Result<VVForm> {
        if g.module() != &self.big {
            return Err(Error::QuotientMismatch("form does not live on A'".into()));
        }
        let mut sums = vec![ScalarQSeries::new(g.trunc()); self.small.order()];
        for (i, p) in self.proj.iter().enumerate() {
            if let Some(j) = p {
                sums[*j] = sums[*j].add(&g.component(i));
            }
        }
        let mut out = VVForm::zero(&self.small, g.weight(), g.trunc());
        for (j, s) in sums.iter().enumerate() {
            out.set_component(j, s)?;
        }
        Ok(out)
    }

    pub fn up_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.proj.iter().map(|p| p.map_or(Complex64::zero(), |j| v[j])).collect()
    }

    pub fn down_vec(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.small.order()];
        for (i, p) in self.proj.iter().enumerate() {
            if let Some(j) = p {
                out[*j] += w[i];
            }
        }
        out
    }
}

fn contracted_trunc(f: &VVForm, theta: &VVForm) -> Q {
    (f.trunc() + theta.vmin()).min(theta.trunc() + f.vmin())
}

/// `<f, Theta_K> = sum_lambda f_{(mu, lambda)} theta_{K+lambda}` for `f` on
/// `A_M + A_{K(-1)}` (same coordinates on `A_{K(-1)}` and `A_K`).
pub fn theta_contract(f: &VVForm, m_module: &FqModule, theta: &VVForm) -> Result<VVForm> {
    let expected = m_module.direct_sum(&theta.module().negated());
    if f.module() != &expected {
        return Err(Error::ContractionShape("form module is not A_M + A_K(-1)".into()));
    }
    let trunc = contracted_trunc(f, theta);
    let nk = theta.module().order();
    let mut out = VVForm::zero(m_module, f.weight() + theta.weight(), trunc);
    for mu in 0..m_module.order() {
        let mut acc = ScalarQSeries::new(trunc);
        for lam in 0..nk {
            let fc = f.component(mu * nk + lam);
            if fc.coeffs().is_empty() {
                continue;
            }
            acc = acc.add(&fc.mul(&theta.component(lam)).truncate(trunc));
        }
        out.set_component(mu, &acc)?;
    }
    Ok(out)
}

/// The same contraction as the pairing `(C A_K)^dual (x) C A_K -> C` applied to
/// `f (x) Theta_K` on `A_M + A_K(-1) + A_K`.
pub fn theta_contract_tensor(f: &VVForm, m_module: &FqModule, theta: &VVForm) -> Result<VVForm> {
    let expected = m_module.direct_sum(&theta.module().negated());
    if f.module() != &expected {
        return Err(Error::ContractionShape("form module is not A_M + A_K(-1)".into()));
    }
    let t = f.tensor(theta)?;
    let nk = theta.module().order();
    let mut out = VVForm::zero(m_module, t.weight(), t.trunc());
    for mu in 0..m_module.order() {
        let mut acc = ScalarQSeries::new(t.trunc());
        for lam in 0..nk {
            acc = acc.add(&t.component((mu * nk + lam) * nk + lam));
        }
        out.set_component(mu, &acc)?;
    }
    Ok(out)
}

/// `<f up, Theta_K>` through `A_K = G_K + G_K^perp`:
/// `sum_lambda theta_{K+lambda} f_{pi(lambda)} (x) e_{iota^-1 pi'(lambda)}`.
pub fn contract_projection_path(f: &VVForm, emb: &EmbeddingData, theta: &VVForm) -> Result<VVForm> {
    let a_l = &emb.a_l.module;
    let a_m = &emb.a_m.module;
    let a_k = emb.a_k().module;
    if f.module() != a_l {
        return Err(Error::ContractionShape("form does not live on A_L".into()));
    }
    if theta.module() != &a_k {
        return Err(Error::ContractionShape("theta does not live on A_K".into()));
    }
    let g_k = &emb.graph.g_right;
    let g_m = &emb.graph.g_left;
    // nondegeneracy of b on G_K
    for x in g_k.iter().filter(|x| **x != a_k.zero()) {
        if g_k.iter().all(|y| a_k.bilinear(x, y).is_zero()) {
            return Err(Error::DegenerateGlue);
        }
    }
    let perp_k = |x: &FqElement| g_k.iter().all(|y| a_k.bilinear(x, y).is_zero());
    let perp_m = |x: &FqElement| g_m.iter().all(|y| a_m.bilinear(x, y).is_zero());
    let iota_inv = |y: &FqElement| emb.graph.iota.iter().find(|(_, b)| b == y).map(|(a, _)| a.clone());
    let g_m_perp: Vec<FqElement> = a_m.elements().filter(|x| perp_m(x)).collect();

    let trunc = contracted_trunc(f, theta);
    let mut comps = vec![ScalarQSeries::new(trunc); a_m.order()];
    for lam in a_k.elements() {
        let th = theta.component(a_k.index_of(&lam));
        // lambda = pi(lambda) + pi'(lambda) with pi'(lambda) in G_K
        let pi2 = g_k
            .iter()
            .find(|g| perp_k(&a_k.sub(&lam, g)))
            .cloned()
            .ok_or_else(|| Error::InternalMismatch("G_K decomposition".into(), lam.to_string()))?;
        let pi1 = a_k.sub(&lam, &pi2);
        let mu0 = iota_inv(&pi2).ok_or_else(|| Error::InternalMismatch("iota".into(), pi2.to_string()))?;
        for alpha in &g_m_perp {
            // (alpha, pi(lambda)) lies in I^perp; its class in A_L
            let x = FqModule::join(alpha, &pi1);
            let cls = emb.perp_to_a_l[emb.a_l_prime.index_of(&x)]
                .ok_or_else(|| Error::InternalMismatch("I^perp".into(), x.to_string()))?;
            let fc = f.component(cls);
            if fc.coeffs().is_empty() {
                continue;
            }
            let target = a_m.index_of(&a_m.add(alpha, &mu0));
            comps[target] = comps[target].add(&fc.mul(&th).truncate(trunc));
        }
    }
    let mut out = VVForm::zero(a_m, f.weight() + theta.weight(), trunc);
    for (i, c) in comps.iter().enumerate() {
        out.set_component(i, c)?;
    }
    Ok(out)
}

/// Sanity check used by callers: `q` of `(mu, lambda)` in `A_M + A_K(-1)`.
pub fn glue_q(emb: &EmbeddingData, mu: &FqElement, nu: &FqElement) -> Q {
    mod1(emb.a_m.module.q_value(mu) + emb.a_k_neg.module.q_value(nu))
}
