//! Q-brackets, Gaussian binomials, Q-derivatives, Q-Pochhammer products,
//! Q-Taylor expansions and the evaluation/derivative change of basis.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::{FieldTower, KElem};
use crate::poly::{count_below, exps_below, ExpVec, MultiPoly, UniPoly};

/// Cached `[n]_Q`, `[n]_Q!` and `1/[n]_Q!` for `n <= n_max`.
#[derive(Clone, Debug)]
pub struct BracketTable {
    bracket: Vec<KElem>,
    fact: Vec<KElem>,
    inv_fact: Vec<KElem>,
}

impl BracketTable {
    pub fn build(tower: &FieldTower) -> Self {
        let order = tower.order() as u64;
        let n_max = (2 * tower.bracket3()).max(64).min(order - 1) as usize;
        let q = tower.q_gen();
        let mut bracket = Vec::with_capacity(n_max + 1);
        let mut acc = KElem::ZERO;
        let mut qpow = KElem::ONE;
        for _ in 0..=n_max {
            bracket.push(acc);
            acc = tower.add(acc, qpow);
            qpow = tower.mul(qpow, q);
        }
        let mut fact = Vec::with_capacity(n_max + 1);
        fact.push(KElem::ONE);
        for n in 1..=n_max {
            fact.push(tower.mul(fact[n - 1], bracket[n]));
        }
        // every factorial below the group order is nonzero
        let mut inv_fact = vec![KElem::ZERO; n_max + 1];
        inv_fact[n_max] = tower.inv(fact[n_max]).expect("nonzero factorial");
        for n in (1..=n_max).rev() {
            inv_fact[n - 1] = tower.mul(inv_fact[n], bracket[n]);
        }
        BracketTable {
            bracket,
            fact,
            inv_fact,
        }
    }

    /// Largest `n` held in the cache.
    pub fn n_max(&self) -> usize {
        self.bracket.len() - 1
    }
}

/// `[n]_Q = 1 + Q + .. + Q^{n-1}`.
pub fn q_bracket(tower: &FieldTower, n: u64) -> KElem {
    let table = tower.brackets();
    if (n as usize) <= table.n_max() {
        return table.bracket[n as usize];
    }
    let q = tower.q_gen();
    let num = tower.sub(tower.pow(q, n), KElem::ONE);
    tower
        .div(num, tower.sub(q, KElem::ONE))
        .expect("Q differs from 1")
}

/// `[n]_Q!`, with `[n]_Q! = 0` for negative `n`.
pub fn q_factorial(tower: &FieldTower, n: i64) -> Result<KElem> {
    if n < 0 {
        return Ok(KElem::ZERO);
    }
    let order = tower.order() as i64;
    if n >= order {
        return Err(Error::DegreeTooLarge {
            degree: n as usize,
            bound: order as usize - 1,
        });
    }
    let table = tower.brackets();
    if (n as usize) <= table.n_max() {
        return Ok(table.fact[n as usize]);
    }
    let mut acc = table.fact[table.n_max()];
    for j in table.n_max() as u64 + 1..=n as u64 {
        acc = tower.mul(acc, q_bracket(tower, j));
    }
    Ok(acc)
}

/// `1 / [n]_Q!` for `0 <= n < q^3 - 1`.
pub fn q_factorial_inv(tower: &FieldTower, n: u64) -> Result<KElem> {
    let table = tower.brackets();
    if (n as usize) <= table.n_max() {
        return Ok(table.inv_fact[n as usize]);
    }
    tower.inv(q_factorial(tower, n as i64)?)
}

/// Gaussian binomial `[n choose k]_Q`, zero when `k > n`.
pub fn q_binom(tower: &FieldTower, n: u64, k: u64) -> KElem {
    if k > n {
        return KElem::ZERO;
    }
    if k == 0 || k == n {
        return KElem::ONE;
    }
    let table = tower.brackets();
    if (n as usize) <= table.n_max() {
        let n = n as usize;
        let k = k as usize;
        return tower.mul(
            table.fact[n],
            tower.mul(table.inv_fact[k], table.inv_fact[n - k]),
        );
    }
    // the falling product avoids the large factorials
    let num = q_falling(tower, n, k);
    tower.mul(num, q_factorial_inv(tower, k).expect("k below the group order"))
}

/// Multi-index Gaussian binomial `Π_i [α_i choose β_i]_Q`.
pub fn q_binom_multi(tower: &FieldTower, alpha: &ExpVec, beta: &ExpVec) -> KElem {
    let mut acc = KElem::ONE;
    for i in 0..alpha.len() {
        acc = tower.mul(acc, q_binom(tower, alpha.get(i) as u64, beta.get(i) as u64));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// `[n]_Q [n-1]_Q .. [n-k+1]_Q`, zero when `k > n`.
pub fn q_falling(tower: &FieldTower, n: u64, k: u64) -> KElem {
    if k > n {
        return KElem::ZERO;
    }
    let table = tower.brackets();
    if (n as usize) <= table.n_max() {
        return tower.mul(table.fact[n as usize], table.inv_fact[(n - k) as usize]);
    }
    let mut acc = KElem::ONE;
    for j in 0..k {
        acc = tower.mul(acc, q_bracket(tower, n - j));
    }
    acc
}

/// `Π_i q_falling(e_i, α_i)`: the factor `D^α X^e = ff(e, α) X^{e-α}`.
pub fn q_falling_multi(tower: &FieldTower, e: &ExpVec, alpha: &ExpVec) -> KElem {
    let mut acc = KElem::ONE;
    for i in 0..e.len() {
        acc = tower.mul(acc, q_falling(tower, e.get(i) as u64, alpha.get(i) as u64));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// `D_Q f`.
pub fn q_derive_uni(tower: &FieldTower, f: &UniPoly) -> UniPoly {
    q_derive_uni_iter(tower, f, 1)
}

/// `D_Q^t f`; the coefficient of `X^{k-t}` is `[k]..[k-t+1]` times that of `X^k`.
pub fn q_derive_uni_iter(tower: &FieldTower, f: &UniPoly, t: u32) -> UniPoly {
    let c = f.coeffs();
    let t = t as usize;
    if c.len() <= t {
        return UniPoly::zero();
    }
    UniPoly::new(
        (t..c.len())
            .map(|k| tower.mul(c[k], q_falling(tower, k as u64, t as u64)))
            .collect(),
    )
}

/// `D_{Q,X_i}^times f`.
pub fn q_derive_var(tower: &FieldTower, f: &MultiPoly, var: usize, times: u32) -> MultiPoly {
    let mut alpha = ExpVec::zero(f.arity());
    alpha.set(var, times);
    q_derive_multi(tower, f, &alpha)
}

/// `D^α f` for a multi-index `α`.
pub fn q_derive_multi(tower: &FieldTower, f: &MultiPoly, alpha: &ExpVec) -> MultiPoly {
    assert_eq!(f.arity(), alpha.len(), "arity mismatch");
    let mut out = MultiPoly::zero(f.arity());
    for (e, c) in f.terms() {
        if let Some(rest) = e.checked_sub(alpha) {
            out.add_term(tower, rest, tower.mul(*c, q_falling_multi(tower, e, alpha)));
        }
    }
    out
}

/// `D^α f(x)` without building the derivative polynomial.
pub fn q_derive_at(tower: &FieldTower, f: &MultiPoly, alpha: &ExpVec, x: &[KElem]) -> KElem {
    debug_assert_eq!(f.arity(), x.len());
    let mut acc = KElem::ZERO;
    for (e, c) in f.terms() {
        let Some(rest) = e.checked_sub(alpha) else {
            continue;
        };
        let mut v = tower.mul(*c, q_falling_multi(tower, e, alpha));
        for (i, &xi) in x.iter().enumerate() {
            if v.is_zero() {
                break;
            }
            v = tower.mul(v, tower.pow(xi, rest.get(i) as u64));
        }
        acc = tower.add(acc, v);
    }
    acc
}

/// `(X - c)(X - Qc)..(X - Q^{k-1}c)`.
pub fn uni_pochhammer(tower: &FieldTower, c: KElem, k: u32) -> UniPoly {
    let mut out = UniPoly::new(vec![KElem::ONE]);
    let mut root = c;
    for _ in 0..k {
        out = out.mul(tower, &UniPoly::new(vec![tower.neg(root), KElem::ONE]));
        root = tower.mul(root, tower.q_gen());
    }
    out
}

/// `(X - c)_Q^{(α)} = Π_i (X_i - c_i)_Q^{(α_i)}`.
pub fn q_pochhammer(tower: &FieldTower, center: &[KElem], alpha: &ExpVec) -> MultiPoly {
    assert_eq!(center.len(), alpha.len(), "arity mismatch");
    let m = center.len();
    let mut out = MultiPoly::one(m);
    for i in 0..m {
        let u = uni_pochhammer(tower, center[i], alpha.get(i));
        out = out
            .mul(tower, &embed_uni(&u, m, i))
            .expect("same arity");
    }
    out
}

/// Lifts a univariate polynomial into variable `var` of an arity-`m` ring.
fn embed_uni(u: &UniPoly, m: usize, var: usize) -> MultiPoly {
    let mut out = MultiPoly::zero(m);
    for (j, &c) in u.coeffs().iter().enumerate() {
        let mut e = ExpVec::zero(m);
        e.set(var, j as u32);
        out.insert_fresh(e, c);
    }
    out
}

/// The point `Q^β = (Q^{β_1}, .., Q^{β_m})`.
pub fn q_point(tower: &FieldTower, beta: &ExpVec) -> Vec<KElem> {
    beta.iter().map(|b| tower.q_power(b as i64)).collect()
}

fn check_taylor_degree(tower: &FieldTower, f: &MultiPoly) -> Result<()> {
    let bound = tower.bracket3() as usize - 1;
    if let Some(d) = f.total_degree().finite() {
        if d as usize > bound {
            return Err(Error::DegreeTooLarge {
                degree: d as usize,
                bound,
            });
        }
    }
    Ok(())
}

/// Q-Taylor coefficients `α -> D^α f(Q^β)`; zero entries are omitted.
pub fn q_taylor_coeffs(
    tower: &FieldTower,
    f: &MultiPoly,
    beta: &ExpVec,
) -> Result<BTreeMap<ExpVec, KElem>> {
    q_taylor_coeffs_at(tower, f, &q_point(tower, beta))
}

/// Q-Taylor coefficients `α -> D^α f(center)`.
pub fn q_taylor_coeffs_at(
    tower: &FieldTower,
    f: &MultiPoly,
    center: &[KElem],
) -> Result<BTreeMap<ExpVec, KElem>> {
    if center.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: center.len(),
        });
    }
    check_taylor_degree(tower, f)?;
    let mut out: BTreeMap<ExpVec, KElem> = BTreeMap::new();
    for (e, c) in f.terms() {
        for alpha in e.sub_vectors() {
            let rest = e.checked_sub(&alpha).expect("alpha below e");
            let mut v = tower.mul(*c, q_falling_multi(tower, e, &alpha));
            for (i, &x) in center.iter().enumerate() {
                v = tower.mul(v, tower.pow(x, rest.get(i) as u64));
            }
            let slot = out.entry(alpha).or_insert(KElem::ZERO);
            *slot = tower.add(*slot, v);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// `Σ_α coeffs[α] / [α]_Q! · (X - Q^β)_Q^{(α)}`.
pub fn q_taylor_reconstruct(
    tower: &FieldTower,
    coeffs: &BTreeMap<ExpVec, KElem>,
    beta: &ExpVec,
) -> Result<MultiPoly> {
    q_taylor_reconstruct_at(tower, coeffs, &q_point(tower, beta))
}

/// Inverse of [`q_taylor_coeffs_at`].
pub fn q_taylor_reconstruct_at(
    tower: &FieldTower,
    coeffs: &BTreeMap<ExpVec, KElem>,
    center: &[KElem],
) -> Result<MultiPoly> {
    let m = center.len();
    let bound = tower.bracket3() as usize - 1;
    let mut max_deg = vec![0u32; m];
    for alpha in coeffs.keys() {
        if alpha.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                got: alpha.len(),
            });
        }
        if alpha.weight() as usize > bound {
            return Err(Error::DegreeTooLarge {
                degree: alpha.weight() as usize,
                bound,
            });
        }
        for (i, slot) in max_deg.iter_mut().enumerate() {
            *slot = (*slot).max(alpha.get(i));
        }
    }
    // per-variable Pochhammer chains scaled by 1/[j]_Q!
    let chains: Vec<Vec<UniPoly>> = (0..m)
        .map(|i| {
            let mut chain = Vec::with_capacity(max_deg[i] as usize + 1);
            let mut cur = UniPoly::new(vec![KElem::ONE]);
            let mut root = center[i];
            for j in 0..=max_deg[i] {
                let inv = q_factorial_inv(tower, j as u64).expect("degree checked");
                chain.push(UniPoly::new(
                    cur.coeffs().iter().map(|&c| tower.mul(c, inv)).collect(),
                ));
                cur = cur.mul(tower, &UniPoly::new(vec![tower.neg(root), KElem::ONE]));
                root = tower.mul(root, tower.q_gen());
            }
            chain
        })
        .collect();
    let mut out = MultiPoly::zero(m);
    for (alpha, &c) in coeffs {
        if c.is_zero() {
            continue;
        }
        let mut term = MultiPoly::constant(m, c);
        for (i, chain) in chains.iter().enumerate() {
            term = term
                .mul(tower, &embed_uni(&chain[alpha.get(i) as usize], m, i))
                .expect("same arity");
        }
        out.add_assign(tower, &term);
    }
    Ok(out)
}

/// Which way a [`NuXiMatrix`] maps a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisDirection {
    /// Evaluations `f(Q^γ a)` to derivatives `D^γ f(a)`.
    Nu,
    /// Derivatives to evaluations.
    Xi,
}

/// Lower-triangular change-of-basis matrix indexed by `{γ : |γ| < s}` in
/// graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuXiMatrix {
    m: usize,
    s: u32,
    point: Vec<KElem>,
    direction: BasisDirection,
    rows: Vec<Vec<KElem>>,
}

impl NuXiMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn point(&self) -> &[KElem] {
        &self.point
    }

    pub fn direction(&self) -> BasisDirection {
        self.direction
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<KElem>] {
        &self.rows
    }

    pub fn entry(&self, row: usize, col: usize) -> KElem {
        self.rows[row][col]
    }

    /// Matrix-vector product.
    pub fn apply(&self, tower: &FieldTower, v: &[KElem]) -> Result<Vec<KElem>> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "block of length {} for a {}x{} matrix",
                v.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| tower.sum((0..=i).map(|j| tower.mul(row[j], v[j]))))
            .collect())
    }

    /// Plain matrix product `self · other`.
    pub fn mul(&self, tower: &FieldTower, other: &NuXiMatrix) -> Vec<Vec<KElem>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| tower.sum((0..n).map(|l| tower.mul(self.rows[i][l], other.rows[l][j]))))
                    .collect()
            })
            .collect()
    }
}

/// Univariate table: `rows[k][t]` is the coefficient of `f(Q^t a)` in
/// `D_Q^k f(a)`, for `k, t < s`.
fn nu_uni(tower: &FieldTower, a: KElem, s: u32) -> Result<Vec<Vec<KElem>>> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let s = s as usize;
    let q_minus_one = tower.sub(tower.q_gen(), KElem::ONE);
    // cur[i][t]: coefficient of f(Q^t a) in D^k f(Q^i a)
    let mut cur: Vec<Vec<KElem>> = (0..s)
        .map(|i| {
            let mut r = vec![KElem::ZERO; s];
            r[i] = KElem::ONE;
            r
        })
        .collect();
    let mut rows = vec![cur[0].clone()];
    for k in 1..s {
        let next: Vec<Vec<KElem>> = (0..s - k)
            .map(|i| {
                let denom = tower.mul(q_minus_one, tower.mul(tower.q_power(i as i64), a));
                let inv = tower.inv(denom).expect("nonzero denominator");
                (0..s)
                    .map(|t| tower.mul(tower.sub(cur[i + 1][t], cur[i][t]), inv))
                    .collect()
            })
            .collect();
        cur = next;
        rows.push(cur[0].clone());
    }
    Ok(rows)
}

/// `ν(a)`: maps `[f(Q^γ a)]_{|γ|<s}` to `[D^γ f(a)]_{|γ|<s}`.
pub fn nu_matrix(tower: &FieldTower, a: &[KElem], s: u32) -> Result<NuXiMatrix> {
    if s == 0 {
        return Err(Error::Regime("s must be at least 1".into()));
    }
    let m = a.len();
    let per_var: Vec<Vec<Vec<KElem>>> = a
        .iter()
        .map(|&ai| nu_uni(tower, ai, s))
        .collect::<Result<_>>()?;
    let idx = exps_below(m, s);
    let rows = idx
        .iter()
        .map(|alpha| {
            idx.iter()
                .map(|beta| {
                    if !beta.divides(alpha) {
                        return KElem::ZERO;
                    }
                    (0..m).fold(KElem::ONE, |acc, i| {
                        tower.mul(acc, per_var[i][alpha.get(i) as usize][beta.get(i) as usize])
                    })
                })
                .collect()
        })
        .collect();
    Ok(NuXiMatrix {
        m,
        s,
        point: a.to_vec(),
        direction: BasisDirection::Nu,
        rows,
    })
}

/// `ξ(a) = ν(a)^{-1}`, by forward substitution; `ν·ξ = I` is checked.
pub fn xi_matrix(tower: &FieldTower, a: &[KElem], s: u32) -> Result<NuXiMatrix> {
    let nu = nu_matrix(tower, a, s)?;
    let n = nu.dim();
    let mut inv = vec![vec![KElem::ZERO; n]; n];
    for col in 0..n {
        for i in col..n {
            let mut acc = if i == col { KElem::ONE } else { KElem::ZERO };
            for j in col..i {
                acc = tower.sub(acc, tower.mul(nu.rows[i][j], inv[j][col]));
            }
            inv[i][col] = tower.div(acc, nu.rows[i][i])?;
        }
    }
    let xi = NuXiMatrix {
        m: nu.m,
        s,
        point: a.to_vec(),
        direction: BasisDirection::Xi,
        rows: inv,
    };
    let prod = nu.mul(tower, &xi);
    for (i, row) in prod.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let expect = if i == j { KElem::ONE } else { KElem::ZERO };
            if v != expect {
                return Err(Error::Internal(format!(
                    "nu * xi differs from the identity at ({i}, {j})"
                )));
            }
        }
    }
    debug_assert_eq!(n, count_below(a.len(), s));
    Ok(xi)
}

/// Change-of-basis matrix in the requested direction.
pub fn basis_matrix(
    tower: &FieldTower,
    a: &[KElem],
    s: u32,
    direction: BasisDirection,
) -> Result<NuXiMatrix> {
    match direction {
        BasisDirection::Nu => nu_matrix(tower, a, s),
        BasisDirection::Xi => xi_matrix(tower, a, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t4() -> FieldTower {
        FieldTower::build(2, 2).unwrap()
    }

    fn rand_nonzero(t: &FieldTower, rng: &mut ChaCha8Rng) -> KElem {
        KElem(rng.gen_range(1..t.size()))
    }

    fn pascal(t: &FieldTower, n: u64, k: u64) -> KElem {
        // [n,k] = [n-1,k-1] + Q^k [n-1,k]
        let mut row = vec![KElem::ONE];
        for i in 1..=n as usize {
            let mut next = vec![KElem::ONE; i + 1];
            for j in 1..i {
                next[j] = t.add(row[j - 1], t.mul(t.q_power(j as i64), row[j]));
            }
            row = next;
        }
        row.get(k as usize).copied().unwrap_or(KElem::ZERO)
    }

    #[test]
    fn bracket_small_values() {
        let t = t4();
        let q = t.q_gen();
        assert_eq!(q_bracket(&t, 0), KElem::ZERO);
        assert_eq!(q_bracket(&t, 1), KElem::ONE);
        assert_eq!(q_bracket(&t, 2), t.add(KElem::ONE, q));
        assert_eq!(q_factorial(&t, 0).unwrap(), KElem::ONE);
        assert_eq!(q_factorial(&t, -3).unwrap(), KElem::ZERO);
        assert!(q_factorial(&t, 63).is_err());
        for n in 1..=62 {
            assert!(!q_bracket(&t, n).is_zero());
        }
        assert!(q_bracket(&t, 63).is_zero());
    }

    #[test]
    fn gaussian_binomials_match_pascal() {
        for t in [t4(), FieldTower::build(13, 1).unwrap()] {
            for n in 0..=12 {
                assert_eq!(q_binom(&t, n, 0), KElem::ONE);
                for k in 0..=n + 1 {
                    assert_eq!(q_binom(&t, n, k), pascal(&t, n, k), "n={n} k={k}");
                }
            }
        }
        let t = t4();
        let expect = t
            .div(
                t.mul(q_bracket(&t, 4), q_bracket(&t, 3)),
                t.mul(q_bracket(&t, 2), q_bracket(&t, 1)),
            )
            .unwrap();
        assert_eq!(q_binom(&t, 4, 2), expect);
    }

    #[test]
    fn falling_beyond_cache_matches_products() {
        let t = t4();
        let n = t.brackets().n_max() as u64;
        assert_eq!(
            q_falling(&t, n, 3),
            t.mul(
                q_bracket(&t, n),
                t.mul(q_bracket(&t, n - 1), q_bracket(&t, n - 2))
            )
        );
    }

    #[test]
    fn derivative_small_examples() {
        let t = t4();
        let c = UniPoly::new(vec![KElem(7)]);
        assert!(q_derive_uni(&t, &c).is_zero());
        let x2 = UniPoly::new(vec![KElem::ZERO, KElem::ZERO, KElem::ONE]);
        assert_eq!(
            q_derive_uni(&t, &x2),
            UniPoly::new(vec![KElem::ZERO, t.add(KElem::ONE, t.q_gen())])
        );
        let x1x2 = MultiPoly::monomial(ExpVec::new(&[1, 1]), KElem::ONE);
        assert_eq!(
            q_derive_multi(&t, &x1x2, &ExpVec::new(&[1, 1])),
            MultiPoly::one(2)
        );
        let f = crate::poly::random_poly(&t, 2, 5, 1);
        assert_eq!(q_derive_multi(&t, &f, &ExpVec::zero(2)), f);
    }

    #[test]
    fn iterated_derivative_matches_difference_quotient() {
        let t = t4();
        let q = t.q_gen();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=8u32 {
            let mut c = vec![KElem::ZERO; k as usize + 1];
            c[k as usize] = KElem::ONE;
            let xk = UniPoly::new(c);
            for tt in 0..=k {
                let d = q_derive_uni_iter(&t, &xk, tt);
                let mut expect = vec![KElem::ZERO; (k - tt) as usize + 1];
                expect[(k - tt) as usize] = q_falling(&t, k as u64, tt as u64);
                assert_eq!(d, UniPoly::new(expect));
                for _ in 0..30 {
                    let x = rand_nonzero(&t, &mut rng);
                    // literal difference quotient of the (t-1)-th derivative
                    if tt == 0 {
                        continue;
                    }
                    let prev = q_derive_uni_iter(&t, &xk, tt - 1);
                    let num = t.sub(prev.eval(&t, t.mul(q, x)), prev.eval(&t, x));
                    let den = t.mul(t.sub(q, KElem::ONE), x);
                    assert_eq!(d.eval(&t, x), t.div(num, den).unwrap());
                }
            }
        }
    }

    #[test]
    fn variable_order_does_not_matter() {
        let t = t4();
        for seed in 0..10 {
            let f = crate::poly::random_poly(&t, 2, 6, seed);
            let a = q_derive_var(&t, &q_derive_var(&t, &f, 0, 2), 1, 1);
            let b = q_derive_var(&t, &q_derive_var(&t, &f, 1, 1), 0, 2);
            assert_eq!(a, b);
            assert_eq!(a, q_derive_multi(&t, &f, &ExpVec::new(&[2, 1])));
        }
    }

    #[test]
    fn derive_at_agrees_with_symbolic() {
        let t = t4();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = crate::poly::random_poly(&t, 2, 7, 3);
        for alpha in exps_below(2, 5) {
            let x = [KElem(rng.gen_range(0..64)), KElem(rng.gen_range(0..64))];
            assert_eq!(
                q_derive_at(&t, &f, &alpha, &x),
                q_derive_multi(&t, &f, &alpha).eval(&t, &x).unwrap()
            );
        }
    }

    #[test]
    fn pochhammer_examples() {
        let t = t4();
        let q = t.q_gen();
        assert_eq!(q_pochhammer(&t, &[KElem(5), KElem(9)], &ExpVec::zero(2)), MultiPoly::one(2));
        let a = KElem(11);
        let p = q_pochhammer(&t, &[a], &ExpVec::new(&[2]));
        let expect = UniPoly::new(vec![
            t.mul(q, t.mul(a, a)),
            t.neg(t.mul(t.add(KElem::ONE, q), a)),
            KElem::ONE,
        ]);
        assert_eq!(UniPoly::from_multi(&p).unwrap(), expect);
        let center = [KElem(3), KElem(20)];
        let alpha = ExpVec::new(&[2, 3]);
        let p = q_pochhammer(&t, &center, &alpha);
        for b0 in 0..2 {
            for b1 in 0..3 {
                let pt = [
                    t.mul(t.q_power(b0), center[0]),
                    t.mul(t.q_power(b1), center[1]),
                ];
                assert!(p.eval(&t, &pt).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn taylor_examples() {
        let t = t4();
        let x = MultiPoly::var(1, 0);
        let c = q_taylor_coeffs(&t, &x, &ExpVec::zero(1)).unwrap();
        let expect: BTreeMap<_, _> = [
            (ExpVec::new(&[0]), KElem::ONE),
            (ExpVec::new(&[1]), KElem::ONE),
        ]
        .into_iter()
        .collect();
        assert_eq!(c, expect);
        assert_eq!(q_taylor_reconstruct(&t, &c, &ExpVec::zero(1)).unwrap(), x);
        let k = MultiPoly::constant(2, KElem(17));
        let c = q_taylor_coeffs(&t, &k, &ExpVec::new(&[3, 1])).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&ExpVec::zero(2)], KElem(17));
        let big = MultiPoly::monomial(ExpVec::new(&[21]), KElem::ONE);
        assert!(matches!(
            q_taylor_coeffs(&t, &big, &ExpVec::zero(1)),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn nu_and_xi_for_s_two() {
        let t = t4();
        let a = KElem(13);
        let qa = t.mul(t.sub(t.q_gen(), KElem::ONE), a);
        let inv = t.inv(qa).unwrap();
        let nu = nu_matrix(&t, &[a], 2).unwrap();
        assert_eq!(nu.rows(), &[vec![KElem::ONE, KElem::ZERO], vec![t.neg(inv), inv]]);
        let xi = xi_matrix(&t, &[a], 2).unwrap();
        assert_eq!(xi.rows(), &[vec![KElem::ONE, KElem::ZERO], vec![KElem::ONE, qa]]);
        assert_eq!(nu_matrix(&t, &[KElem::ZERO], 2), Err(Error::DivisionByZero));
    }

    /// `D^k f(x) = (Q-1)^{-k} x^{-k} Q^{-C(k,2)} Σ_t (-1)^{k-t} Q^{C(k-t,2)} [k,t] f(Q^t x)`.
    #[test]
    fn nu_matches_q_binomial_closed_form() {
        let t = FieldTower::build(13, 1).unwrap();
        let a = KElem(1234);
        let s = 6u32;
        let nu = nu_matrix(&t, &[a], s).unwrap();
        let qm1 = t.sub(t.q_gen(), KElem::ONE);
        for k in 0..s as i64 {
            for tt in 0..=k {
                let mut v = q_binom(&t, k as u64, tt as u64);
                v = t.mul(v, t.q_power((k - tt) * (k - tt - 1) / 2 - k * (k - 1) / 2));
                v = t.div(v, t.pow(t.mul(qm1, a), k as u64)).unwrap();
                if (k - tt) % 2 == 1 {
                    v = t.neg(v);
                }
                assert_eq!(nu.entry(k as usize, tt as usize), v, "k={k} t={tt}");
            }
        }
    }

    #[test]
    fn nu_maps_evaluations_to_derivatives() {
        let t = FieldTower::build(13, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in 1..=2usize {
            for s in 1..=5u32 {
                let f = crate::poly::random_poly(&t, m, 8, rng.gen());
                let a: Vec<KElem> = (0..m).map(|_| rand_nonzero(&t, &mut rng)).collect();
                let nu = nu_matrix(&t, &a, s).unwrap();
                let evals: Vec<KElem> = exps_below(m, s)
                    .iter()
                    .map(|g| {
                        let pt: Vec<KElem> = (0..m)
                            .map(|i| t.mul(t.q_power(g.get(i) as i64), a[i]))
                            .collect();
                        f.eval(&t, &pt).unwrap()
                    })
                    .collect();
                let derivs: Vec<KElem> = exps_below(m, s)
                    .iter()
                    .map(|g| q_derive_at(&t, &f, g, &a))
                    .collect();
                assert_eq!(nu.apply(&t, &evals).unwrap(), derivs);
                let xi = xi_matrix(&t, &a, s).unwrap();
                assert_eq!(xi.apply(&t, &derivs).unwrap(), evals);
            }
        }
    }

    #[test]
    fn hasse_consistency_at_zero() {
        let t = t4();
        let f = crate::poly::random_poly(&t, 1, 10, 4);
        let u = UniPoly::from_multi(&f).unwrap();
        for k in 0..10u32 {
            let d = q_derive_uni_iter(&t, &u, k).eval(&t, KElem::ZERO);
            let expect = t.mul(q_factorial(&t, k as i64).unwrap(), u.coeff(k as usize));
            assert_eq!(d, expect);
        }
    }
}
