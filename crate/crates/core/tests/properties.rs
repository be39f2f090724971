use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qmc_core::codes::{basis_change, corrupt, encode_frm, encode_qmult, CodeParams, Codeword};
use qmc_core::linsys::{mul_polyz, nullspace_k};
use qmc_core::poly::{graded_lex_exp, graded_lex_index, random_poly, ExpVec};
use qmc_core::qcalc::{q_derive_multi, q_taylor_coeffs, q_taylor_reconstruct, BasisDirection};
use qmc_core::{FieldTower, KElem, MultiPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t4() -> &'static FieldTower {
    static T: OnceLock<FieldTower> = OnceLock::new();
    T.get_or_init(|| FieldTower::build(2, 2).unwrap())
}

fn t13() -> &'static Arc<FieldTower> {
    static T: OnceLock<Arc<FieldTower>> = OnceLock::new();
    T.get_or_init(|| Arc::new(FieldTower::build(13, 1).unwrap()))
}

fn elem(t: &FieldTower) -> impl Strategy<Value = KElem> {
    (0..t.size()).prop_map(KElem)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in elem(t4()), b in elem(t4()), c in elem(t4())) {
        let t = t4();
        prop_assert_eq!(t.add(a, b), t.add(b, a));
        prop_assert_eq!(t.mul(a, t.add(b, c)), t.add(t.mul(a, b), t.mul(a, c)));
        prop_assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
        prop_assert_eq!(t.sub(t.add(a, b), b), a);
        if !b.is_zero() {
            prop_assert_eq!(t.mul(t.div(a, b).unwrap(), b), a);
        }
    }

    #[test]
    fn ring_laws(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), m in 1usize..=3) {
        let t = t4();
        let (f, g, h) = (random_poly(t, m, 4, s1), random_poly(t, m, 4, s2), random_poly(t, m, 3, s3));
        prop_assert_eq!(f.mul(t, &g).unwrap().mul(t, &h).unwrap(), f.mul(t, &g.mul(t, &h).unwrap()).unwrap());
        prop_assert_eq!(
            f.mul(t, &g.add(t, &h).unwrap()).unwrap(),
            f.mul(t, &g).unwrap().add(t, &f.mul(t, &h).unwrap()).unwrap()
        );
        if !f.is_zero() && !g.is_zero() {
            let d = |p: &MultiPoly| p.total_degree().finite().unwrap();
            prop_assert_eq!(d(&f.mul(t, &g).unwrap()), d(&f) + d(&g));
        }
    }

    #[test]
    fn scale_vars_composes(seed in any::<u64>(), c in prop::collection::vec(1u32..64, 2), c2 in prop::collection::vec(1u32..64, 2)) {
        let t = t4();
        let f = random_poly(t, 2, 5, seed);
        let (c, c2): (Vec<KElem>, Vec<KElem>) = (c.into_iter().map(KElem).collect(), c2.into_iter().map(KElem).collect());
        let both: Vec<KElem> = c.iter().zip(&c2).map(|(&a, &b)| t.mul(a, b)).collect();
        prop_assert_eq!(
            f.scale_vars(t, &c).unwrap().scale_vars(t, &c2).unwrap(),
            f.scale_vars(t, &both).unwrap()
        );
    }

    #[test]
    fn graded_lex_bijection(m in 1usize..=4, s in 1u32..=6, pick in any::<u64>()) {
        let count = qmc_core::poly::count_below(m, s);
        let i = (pick % count as u64) as usize;
        let e = graded_lex_exp(m, s, i).unwrap();
        prop_assert_eq!(graded_lex_index(&e, s).unwrap(), i);
    }

    #[test]
    fn taylor_round_trip(seed in any::<u64>(), b0 in 0u32..10, b1 in 0u32..10) {
        let t = t13();
        let f = random_poly(t, 2, 8, seed);
        let beta = ExpVec::new(&[b0, b1]);
        let back = q_taylor_reconstruct(t, &q_taylor_coeffs(t, &f, &beta).unwrap(), &beta).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn derivatives_commute(seed in any::<u64>(), a in 0u32..4, b in 0u32..4) {
        let t = t13();
        let f = random_poly(t, 2, 7, seed);
        let x = ExpVec::new(&[a, 0]);
        let y = ExpVec::new(&[0, b]);
        prop_assert_eq!(
            q_derive_multi(t, &q_derive_multi(t, &f, &x), &y),
            q_derive_multi(t, &q_derive_multi(t, &f, &y), &x)
        );
        prop_assert_eq!(q_derive_multi(t, &f, &ExpVec::new(&[a, b])), q_derive_multi(t, &q_derive_multi(t, &f, &x), &y));
    }

    #[test]
    fn encoders_are_linear_and_related(s1 in any::<u64>(), s2 in any::<u64>(), c in 0u32..2197) {
        let t = t13();
        let p = CodeParams::with_default_set(t.clone(), 2, 3, 4, 3).unwrap();
        let f = random_poly(t, 2, 4, s1);
        let g = random_poly(t, 2, 4, s2);
        let c = KElem(c);
        let lhs = encode_qmult(&p, &f.add(t, &g.scale(t, c)).unwrap()).unwrap();
        let rhs = encode_qmult(&p, &f).unwrap().add(t, &encode_qmult(&p, &g).unwrap().scale(t, c));
        prop_assert_eq!(&lhs, &rhs);
        let frm = encode_frm(&p, &f).unwrap();
        let q = basis_change(&p, &frm, BasisDirection::Nu).unwrap();
        prop_assert_eq!(&q, &encode_qmult(&p, &f).unwrap());
        prop_assert_eq!(basis_change(&p, &q, BasisDirection::Xi).unwrap(), frm);
    }

    #[test]
    fn corruption_touches_exactly_e_blocks(seed in any::<u64>(), e in 0usize..=9) {
        let t = t13();
        let p = CodeParams::with_default_set(t.clone(), 2, 2, 3, 3).unwrap();
        let cw = encode_qmult(&p, &random_poly(t, 2, 3, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = corrupt(&p, &cw, e, &mut rng).unwrap();
        let diff = cw.blocks.iter().zip(&w.blocks).filter(|(a, b)| a != b).count();
        prop_assert_eq!(diff, e);
    }

    #[test]
    fn text_round_trips(seed in any::<u64>()) {
        let t = t13();
        let f = random_poly(t, 2, 5, seed);
        prop_assert_eq!(MultiPoly::parse(t, &f.to_string()).unwrap(), f.clone());
        let p = CodeParams::with_default_set(t.clone(), 2, 2, 3, 3).unwrap();
        let cw = encode_qmult(&p, &f.truncate_degree(3)).unwrap();
        let (p2, cw2) = Codeword::parse(&cw.to_text(&p)).unwrap();
        prop_assert_eq!(p2.params_line(), p.params_line());
        prop_assert_eq!(cw2, cw);
    }

    #[test]
    fn constant_nullspace_multiplies_back(seed in any::<u64>(), rows in 1usize..8, extra in 1usize..4) {
        let t = t4();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = rows + extra;
        let m: Vec<Vec<KElem>> = (0..rows)
            .map(|_| (0..cols).map(|_| KElem(rng.gen_range(0..t.size()))).collect())
            .collect();
        let v = nullspace_k(t, &m, cols).unwrap();
        prop_assert!(v.iter().any(|x| !x.is_zero()));
        let mz: Vec<Vec<MultiPoly>> = m.iter().map(|r| r.iter().map(|&x| MultiPoly::constant(1, x)).collect()).collect();
        let vz: Vec<MultiPoly> = v.iter().map(|&x| MultiPoly::constant(1, x)).collect();
        prop_assert!(mul_polyz(t, &mz, &vz, 1).iter().all(|p| p.is_zero()));
    }
}

trait Truncate {
    fn truncate_degree(&self, k: u32) -> MultiPoly;
}

impl Truncate for MultiPoly {
    fn truncate_degree(&self, k: u32) -> MultiPoly {
        MultiPoly::from_terms(
            t13(),
            self.arity(),
            self.terms().filter(|(e, _)| e.weight() < k).map(|(e, c)| (*e, *c)),
        )
    }
}
