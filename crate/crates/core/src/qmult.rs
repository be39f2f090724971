//! Q-multiplicity, zero counting on grids, and the grid vanishing-ideal
//! generators.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::{FieldTower, FqElem, KElem};
use crate::poly::{exps_of_weight, ExpVec, MultiPoly};
use crate::qcalc::{q_derive_at, q_derive_multi};

/// `μ_Q(f, a)`: the least `|γ|` with `D^γ f(a) ≠ 0`.
pub fn q_multiplicity(tower: &FieldTower, f: &MultiPoly, a: &[KElem]) -> Result<u32> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if a.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: a.len(),
        });
    }
    let deg = f.total_degree().finite().expect("nonzero");
    for w in 0..=deg {
        for gamma in exps_of_weight(f.arity(), w) {
            if !q_derive_at(tower, f, &gamma, a).is_zero() {
                return Ok(w);
            }
        }
    }
    // only possible when some [n]_Q vanishes, i.e. deg f >= q^3 - 1
    Err(Error::DegreeTooLarge {
        degree: deg as usize,
        bound: tower.order() as usize - 1,
    })
}

/// Per-point multiplicities of a polynomial over a grid `A^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityReport {
    /// Grid points in row-major order with their multiplicities.
    pub points: Vec<(Vec<FqElem>, u32)>,
    pub total: u64,
    pub s: u32,
    pub at_least_s: u64,
    pub degree: u32,
    /// `deg f · |A|^{m-1}`.
    pub total_bound: u64,
    /// `⌊deg f · |A|^{m-1} / s⌋`.
    pub count_bound: u64,
}

impl MultiplicityReport {
    pub fn total_bound_holds(&self) -> bool {
        self.total <= self.total_bound
    }

    pub fn count_bound_holds(&self) -> bool {
        self.at_least_s <= self.count_bound
    }

    /// `point,multiplicity` rows plus a `#` summary line. Coordinates of a
    /// point are separated by spaces.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,multiplicity\n");
        for (pt, mu) in &self.points {
            let coords: Vec<String> = pt.iter().map(|c| c.0.to_string()).collect();
            let _ = writeln!(out, "{},{}", coords.join(" "), mu);
        }
        let _ = writeln!(
            out,
            "# total={} total_bound={} at_least_s={} count_bound={} s={} degree={} holds={}",
            self.total,
            self.total_bound,
            self.at_least_s,
            self.count_bound,
            self.s,
            self.degree,
            self.total_bound_holds() && self.count_bound_holds()
        );
        out
    }
}

/// Checks that `A` is nonempty, distinct and inside `F_q^×`.
pub fn validate_grid_set(tower: &FieldTower, a: &[FqElem]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Regime("the evaluation set A is empty".into()));
    }
    for (i, x) in a.iter().enumerate() {
        if x.0 == 0 || x.0 >= tower.q() {
            return Err(Error::Regime(format!(
                "A must lie in F_q^x, got {}",
                x.0
            )));
        }
        if a[..i].contains(x) {
            return Err(Error::Regime(format!("A has a repeated element {}", x.0)));
        }
    }
    Ok(())
}

/// All points of `A^m` in row-major order (last coordinate fastest).
pub fn grid_points(a: &[FqElem], m: usize) -> Vec<Vec<FqElem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|pt| {
                a.iter().map(move |&x| {
                    let mut p = pt.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn grid_multiplicity_report(
    tower: &FieldTower,
    f: &MultiPoly,
    a: &[FqElem],
    s: u32,
) -> Result<MultiplicityReport> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    validate_grid_set(tower, a)?;
    let degree = f.total_degree().finite().expect("nonzero");
    if degree as u64 >= tower.bracket3() {
        return Err(Error::DegreeTooLarge {
            degree: degree as usize,
            bound: tower.bracket3() as usize - 1,
        });
    }
    if s == 0 {
        return Err(Error::Regime("s must be at least 1".into()));
    }
    let m = f.arity();
    let mut points = Vec::new();
    let mut total = 0u64;
    let mut at_least_s = 0u64;
    for pt in grid_points(a, m) {
        let x: Vec<KElem> = pt.iter().map(|&c| tower.embed(c)).collect();
        let mu = q_multiplicity(tower, f, &x)?;
        total += mu as u64;
        if mu >= s {
            at_least_s += 1;
        }
        points.push((pt, mu));
    }
    let total_bound = degree as u64 * (a.len() as u64).pow(m.saturating_sub(1) as u32);
    Ok(MultiplicityReport {
        points,
        total,
        s,
        at_least_s,
        degree,
        total_bound,
        count_bound: total_bound / s as u64,
    })
}

/// `{Π_i Π_{t<γ_i} Π_{a∈A} (X_i - Q^t a) : |γ| = s}`, one generator per `γ`
/// in lex order.
pub fn grobner_generators(
    tower: &FieldTower,
    a: &[FqElem],
    m: usize,
    s: u32,
) -> Result<Vec<MultiPoly>> {
    validate_grid_set(tower, a)?;
    if s == 0 {
        return Err(Error::Regime("s must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Regime("m must be at least 1".into()));
    }
    // factor[i][t] = Π_a (X_i - Q^t a)
    let factor = |i: usize, t: u32| {
        let mut out = MultiPoly::one(m);
        for &x in a {
            let root = tower.mul(tower.q_power(t as i64), tower.embed(x));
            let lin = MultiPoly::var(m, i)
                .sub(tower, &MultiPoly::constant(m, root))
                .expect("same arity");
            out = out.mul(tower, &lin).expect("same arity");
        }
        out
    };
    let cache: Vec<Vec<MultiPoly>> = (0..m)
        .map(|i| (0..s).map(|t| factor(i, t)).collect())
        .collect();
    let gens = exps_of_weight(m, s)
        .iter()
        .map(|gamma| {
            let mut g = MultiPoly::one(m);
            for (i, chain) in cache.iter().enumerate() {
                for f in chain.iter().take(gamma.get(i) as usize) {
                    g = g.mul(tower, f).expect("same arity");
                }
            }
            g
        })
        .collect();
    Ok(gens)
}

/// Outcome of the two multiplicity inequalities for one `(f, a, γ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingCheck {
    pub derivative_bound: bool,
    pub restriction_bound: bool,
    pub detail: String,
}

impl VanishingCheck {
    pub fn holds(&self) -> bool {
        self.derivative_bound && self.restriction_bound
    }
}

/// Checks (a) `μ(D^γ f, a) >= μ(f, a) - |γ|` and (b)
/// `μ(D^γ f, a) <= μ(D^γ f(a_1, .., a_{m-1}, X_m), a_m)`.
///
/// Each inequality holds vacuously when the polynomial it involves is zero.
pub fn multiplicity_lemma_checks(
    tower: &FieldTower,
    f: &MultiPoly,
    a: &[KElem],
    gamma: &ExpVec,
) -> Result<VanishingCheck> {
    let mu_f = q_multiplicity(tower, f, a)?;
    let dg = q_derive_multi(tower, f, gamma);
    if dg.is_zero() {
        return Ok(VanishingCheck {
            derivative_bound: true,
            restriction_bound: true,
            detail: "derivative vanishes identically".into(),
        });
    }
    let mu_dg = q_multiplicity(tower, &dg, a)?;
    let derivative_bound = mu_dg as i64 >= mu_f as i64 - gamma.weight() as i64;
    let m = f.arity();
    let restricted = dg.eval_partial(tower, &a[..m - 1]);
    let (restriction_bound, mu_r) = if restricted.is_zero() {
        (true, None)
    } else {
        let mu_r = q_multiplicity(tower, &restricted, &a[m - 1..])?;
        (mu_dg <= mu_r, Some(mu_r))
    };
    Ok(VanishingCheck {
        derivative_bound,
        restriction_bound,
        detail: format!(
            "mu(f)={mu_f} |gamma|={} mu(D f)={mu_dg} mu(restricted)={:?}",
            gamma.weight(),
            mu_r
        ),
    })
}
