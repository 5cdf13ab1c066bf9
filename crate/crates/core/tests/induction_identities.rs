use qpullback::fqm::{FqElement, FqModule, IsotropicSubgroup};
use qpullback::induction::{induce, EtaQuotient, ScalarForm};
use qpullback::lattice::a1;
use qpullback::rational::q;
use qpullback::transfer::Transfer;

fn a1_module() -> FqModule {
    a1().discriminant().module
}

fn check_transfer(big: &FqModule, gen: Vec<i64>, phi: &ScalarForm, d: i64) {
    let iso = IsotropicSubgroup::new(big, vec![FqElement(gen)]).unwrap();
    let t = Transfer::from_perp_quotient(big, &iso).unwrap();
    let n = q(3, 1);
    let small = t.small().clone();
    let ind_small = induce(&small, &[small.zero()], phi, d, n, 1).unwrap();
    let ind_big = induce(big, &[big.zero()], phi, d, n, 2).unwrap();
    let ind_big_i = induce(big, iso.elements(), phi, d, n, 3).unwrap();
    assert!(ind_small.residual < 1e-7 && ind_big.residual < 1e-7);
    assert_eq!(t.push_down(&ind_big.form).unwrap(), ind_small.form);
    assert_eq!(t.pull_up(&ind_small.form).unwrap(), ind_big_i.form);
}

#[test]
fn theta_through_a1_sum() {
    let a = a1_module();
    let big = a.direct_sum(&a).direct_sum(&a.negated());
    let phi = ScalarForm::default().times_theta(&a1(), FqElement(vec![0]), 1);
    check_transfer(&big, vec![0, 1, 1], &phi, 4);
}

#[test]
fn level_one_form_to_trivial() {
    let a = a1_module();
    let big = a.direct_sum(&a.negated());
    let phi = ScalarForm::eta(EtaQuotient::new(&[(1, -24)]));
    check_transfer(&big, vec![1, 1], &phi, 4);
}

#[test]
fn inverse_theta_through_negative_sum() {
    let a = a1_module().negated();
    let big = a.direct_sum(&a).direct_sum(&a.negated());
    let phi = ScalarForm::eta(EtaQuotient::new(&[(1, 2), (2, -5), (4, 2)]));
    check_transfer(&big, vec![0, 1, 1], &phi, 4);
}

#[test]
fn induced_theta_is_multiple_of_vector_theta() {
    let a = a1_module();
    let phi = ScalarForm::default().times_theta(&a1(), FqElement(vec![0]), 1);
    let ind = induce(&a, &[a.zero()], &phi, 4, q(3, 1), 5).unwrap();
    let theta = qpullback::theta::theta_vv(&a1(), q(3, 1)).unwrap();
    let c = ind.form.coeff(0, q(0, 1));
    eprintln!("{:?}", ind.form.terms().map(|(i, n, c)| (i, n, c.clone())).collect::<Vec<_>>());
    assert_eq!(ind.form, theta.scale(&c));
}

mod contraction {
    use num_complex::Complex64;
    use qpullback::fqm::FqElement;
    use qpullback::induction::{induce, induce_mu, standard_transversal, EtaQuotient, ScalarForm, SlashedSlice};
    use qpullback::lattice::{EmbeddingData, EvenLattice};
    use qpullback::rational::{q, to_f64};
    use qpullback::theta::theta_vv;
    use qpullback::transfer::contract_projection_path;

    fn u_sum(extra: &[i64], planes: usize) -> EvenLattice {
        let n = 2 * planes + extra.len();
        let mut g = vec![vec![0; n]; n];
        for p in 0..planes {
            g[2 * p][2 * p + 1] = 1;
            g[2 * p + 1][2 * p] = 1;
        }
        for (i, &x) in extra.iter().enumerate() {
            g[2 * planes + i][2 * planes + i] = x;
        }
        EvenLattice::new(g).unwrap()
    }

    /// Max difference between `<ind_L(phi) up, Theta_K>` and
    /// `sum_{mu in G_M} ind^mu_M(phi theta_{K + iota(mu)})`.
    fn glued_gap(emb: &EmbeddingData, phi: &ScalarForm, d: i64) -> f64 {
        let n = q(2, 1);
        let a_l = &emb.a_l.module;
        let ind = induce(a_l, &[a_l.zero()], phi, d, n, 9).unwrap();
        let theta = theta_vv(&emb.k_lattice, n + 2).unwrap();
        let lhs = contract_projection_path(&ind.form, emb, &theta).unwrap();
        assert_eq!(lhs.weight(), phi.weight() + q(emb.k_lattice.rank() as i64, 2));
        assert!(lhs.num_terms() > 2);
        let a_m = &emb.a_m.module;
        let reps = standard_transversal(d);
        let mut rhs = vec![SlashedSlice::new(n); a_m.order()];
        for (mu, nu) in &emb.graph.iota {
            let psi = phi.clone().times_theta(&emb.k_lattice, FqElement(nu.0.clone()), 1);
            let part = induce_mu(a_m, mu, &psi, &reps, n).unwrap();
            for (r, p) in rhs.iter_mut().zip(&part) {
                *r = r.add(p);
            }
        }
        let mut gap: f64 = 0.0;
        for (i, r) in rhs.iter().enumerate() {
            let mut exact = SlashedSlice::new(n);
            for (k, c) in lhs.component(i).coeffs() {
                exact.add_term(*k, Complex64::new(to_f64(c), 0.0));
            }
            gap = gap.max(exact.max_abs_diff(&r.truncate(n)));
        }
        gap
    }

    #[test]
    fn split_case() {
        let l = u_sum(&[-2, -2], 1);
        let emb = EmbeddingData::build(&l, vec![vec![0, 0, 0, 1]], true).unwrap();
        assert!(emb.is_split());
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, 4), (2, -10), (4, 4)]));
        assert!(glued_gap(&emb, &phi, 4) < 1e-7);
    }

    #[test]
    fn glued_case() {
        let l = u_sum(&[-2], 2);
        let emb = EmbeddingData::build(&l, vec![vec![1, -1, 0, 0, 0]], true).unwrap();
        assert_eq!(emb.index, 2);
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, 2), (2, -5), (4, 2)]));
        assert!(glued_gap(&emb, &phi, 4) < 1e-7);
    }
}

#[test]
fn two_elementary_inputs_are_integral() {
    for a in 1..=3usize {
        let m = a1_module().negated();
        let mut big = FqModule::trivial();
        for _ in 0..a {
            big = big.direct_sum(&m);
        }
        let phi = ScalarForm::eta(EtaQuotient::new(&[(1, -8), (2, 8), (4, -8)]))
            .times_theta(&a1(), FqElement(vec![0]), 8 - a as u32);
        let ind = induce(&big, &[big.zero()], &phi, 4, q(1, 1), 4).unwrap();
        assert_eq!(ind.form.weight(), q(-(a as i64), 2));
        assert!(ind.form.is_integral_principal_part().unwrap());
        assert_eq!(ind.form.coeff(0, q(-1, 1)), qpullback::rational::big_int(1));
        assert_eq!(ind.form.constant_term(), qpullback::rational::big_int(120 - 10 * a as i64));
    }
}
