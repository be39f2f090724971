//! Quick invariant checks across every layer, run by `qmc selftest`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::{
    corrupt, dimension, encode_frm, encode_qmult, basis_change, monomial_basis, agreement,
    CodeParams,
};
use crate::decode::{list_decode, DEFAULT_CAP};
use crate::error::Result;
use crate::gf::{FieldTower, KElem};
use crate::linsys::rank_k;
use crate::poly::{random_poly_with, ExpVec, MultiPoly};
use crate::qcalc::{
    nu_matrix, q_derive_multi, q_taylor_coeffs, q_taylor_reconstruct, xi_matrix, BasisDirection,
};
use crate::qmult::{grid_multiplicity_report, grobner_generators, q_multiplicity};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from(name: &'static str, r: Result<(bool, String)>) -> Check {
        match r {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

fn rand_k<R: Rng>(t: &FieldTower, rng: &mut R) -> KElem {
    KElem(rng.gen_range(0..t.size()))
}

fn rand_nonzero<R: Rng>(t: &FieldTower, rng: &mut R) -> KElem {
    KElem(rng.gen_range(1..t.size()))
}

fn field_axioms(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    for (p, e) in [(2, 2), (13, 1), (5, 1)] {
        let t = FieldTower::build(p, e)?;
        for _ in 0..200 {
            let (a, b, c) = (rand_k(&t, rng), rand_k(&t, rng), rand_k(&t, rng));
            ok &= t.mul(a, t.add(b, c)) == t.add(t.mul(a, b), t.mul(a, c));
            ok &= t.mul(t.mul(a, b), c) == t.mul(a, t.mul(b, c));
            if !a.is_zero() {
                ok &= t.mul(a, t.inv(a)?) == KElem::ONE;
            }
        }
        ok &= t.pow(t.q_gen(), t.order() as u64) == KElem::ONE;
    }
    Ok((ok, "distributivity, associativity, inverses, generator order".into()))
}

fn ring_laws(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = FieldTower::build(2, 2)?;
    let mut ok = true;
    for _ in 0..30 {
        let f = random_poly_with(&t, 2, 4, rng);
        let g = random_poly_with(&t, 2, 4, rng);
        let h = random_poly_with(&t, 2, 3, rng);
        ok &= f.mul(&t, &g.add(&t, &h)?)? == f.mul(&t, &g)?.add(&t, &f.mul(&t, &h)?)?;
        if !f.is_zero() && !g.is_zero() {
            let d = |p: &MultiPoly| p.total_degree().finite().unwrap();
            ok &= d(&f.mul(&t, &g)?) == d(&f) + d(&g);
        }
    }
    Ok((ok, "distributivity and degree additivity".into()))
}

fn taylor_and_product(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = FieldTower::build(13, 1)?;
    let mut ok = true;
    for _ in 0..20 {
        let f = random_poly_with(&t, 2, 8, rng);
        let g = random_poly_with(&t, 2, 5, rng);
        let beta = ExpVec::new(&[rng.gen_range(0..6), rng.gen_range(0..6)]);
        ok &= q_taylor_reconstruct(&t, &q_taylor_coeffs(&t, &f, &beta)?, &beta)? == f;
        // D_1(fg) = f(QX_1, X_2) D_1 g + g D_1 f
        let e1 = ExpVec::unit(2, 0);
        let lhs = q_derive_multi(&t, &f.mul(&t, &g)?, &e1);
        let fq = f.scale_vars(&t, &[t.q_gen(), KElem::ONE])?;
        let rhs = fq
            .mul(&t, &q_derive_multi(&t, &g, &e1))?
            .add(&t, &g.mul(&t, &q_derive_multi(&t, &f, &e1))?)?;
        ok &= lhs == rhs;
    }
    Ok((ok, "Taylor round trip and product rule".into()))
}

fn change_of_basis(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = Arc::new(FieldTower::build(13, 1)?);
    let mut ok = true;
    for m in 1..=2 {
        let a: Vec<KElem> = (0..m).map(|_| rand_nonzero(&t, rng)).collect();
        let nu = nu_matrix(&t, &a, 4)?;
        let xi = xi_matrix(&t, &a, 4)?;
        let prod = nu.mul(&t, &xi);
        for (i, row) in prod.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let want = if i == j { KElem::ONE } else { KElem::ZERO };
                ok &= v == want;
            }
        }
    }
    let p = CodeParams::with_default_set(t.clone(), 2, 3, 4, 3)?;
    let f = random_poly_with(&t, 2, 4, rng);
    let q = encode_qmult(&p, &f)?;
    ok &= basis_change(&p, &encode_frm(&p, &f)?, BasisDirection::Nu)? == q;
    Ok((ok, "ν·ξ = I and FRM → Qmult".into()))
}

fn zero_counting(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = FieldTower::build(13, 1)?;
    let a = crate::codes::default_eval_set(&t, 4)?;
    let mut ok = true;
    for _ in 0..10 {
        let f = random_poly_with(&t, 2, 6, rng);
        if f.is_zero() {
            continue;
        }
        let r = grid_multiplicity_report(&t, &f, &a, 2)?;
        ok &= r.total_bound_holds() && r.count_bound_holds();
    }
    let gens = grobner_generators(&t, &a[..2], 2, 2)?;
    for g in &gens {
        for x in &a[..2] {
            for y in &a[..2] {
                let pt = [t.embed(*x), t.embed(*y)];
                ok &= q_multiplicity(&t, g, &pt)? >= 2;
            }
        }
    }
    Ok((ok, "multiplicity bounds and grid generators".into()))
}

fn code_dimension() -> Result<(bool, String)> {
    let t = Arc::new(FieldTower::build(2, 2)?);
    let mut ok = true;
    for (m, s, k, n) in [(1, 2, 2, 3), (2, 2, 3, 3)] {
        let p = CodeParams::with_default_set(t.clone(), m, s, k, n)?;
        let rows: Vec<Vec<KElem>> = monomial_basis(&p)
            .iter()
            .map(|e| {
                encode_qmult(&p, &MultiPoly::monomial(*e, KElem::ONE))
                    .map(|c| c.blocks.concat())
            })
            .collect::<Result<_>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        ok &= rank_k(&t, &rows, cols) as u64 == dimension(&p);
    }
    Ok((ok, "monomial basis rank equals dimension".into()))
}

fn decoders(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = Arc::new(FieldTower::build(13, 1)?);
    let mut ok = true;
    let uni = CodeParams::with_default_set(t.clone(), 1, 6, 12, 12)?;
    for _ in 0..3 {
        let f = random_poly_with(&t, 1, 12, rng);
        let w = corrupt(&uni, &encode_qmult(&uni, &f)?, 5, rng)?;
        let out = list_decode(&uni, &w, 2, DEFAULT_CAP)?;
        ok &= out.listed().is_some_and(|l| l.iter().any(|(g, _)| *g == f));
    }
    let multi = CodeParams::with_default_set(t.clone(), 2, 6, 4, 4)?;
    let f = random_poly_with(&t, 2, 4, rng);
    let cw = encode_qmult(&multi, &f)?;
    let w = corrupt(&multi, &cw, 4, rng)?;
    let out = list_decode(&multi, &w, 2, DEFAULT_CAP)?;
    ok &= out.listed().is_some_and(|l| l.iter().any(|(g, _)| *g == f));
    ok &= out.solution.paths_agree == Some(true);
    ok &= agreement(&w, &cw)? >= out.config.t_min as usize;
    Ok((ok, format!("deg_Z={}", out.interpolation.z_degree)))
}

/// Runs every check with a fixed seed.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        Check::from("gf.field_axioms", field_axioms(&mut rng)),
        Check::from("poly.ring_laws", ring_laws(&mut rng)),
        Check::from("qcalc.taylor_product", taylor_and_product(&mut rng)),
        Check::from("qcalc.change_of_basis", change_of_basis(&mut rng)),
        Check::from("qmult.zero_counting", zero_counting(&mut rng)),
        Check::from("codes.dimension", code_dimension()),
        Check::from("decode.pipelines", decoders(&mut rng)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all(7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
