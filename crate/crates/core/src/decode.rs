//! List decoding of Q-multiplicity codes: interpolation of a polynomial
//! `P(X, Y)` capturing every close message, then solving `P^{[f]} = 0` for
//! an affine space of candidates.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::codes::{agreement, encode_qmult, CodeParams, Codeword};
use crate::error::{Error, Result};
use crate::gf::{FieldTower, KElem};
use crate::linsys::{nullspace_k, nullspace_polyz, solve_affine_k, PolyZ};
use crate::poly::{
    binomial, count_below, exps_below, graded_lex_index, ExpVec, MultiPoly,
};
use crate::qcalc::{
    q_binom_multi, q_derive_multi, q_falling_multi, q_point, q_taylor_reconstruct,
};

/// `P = P̃ + Σ_δ C_δ Y_δ` over `{δ : |δ| < s}`.
///
/// Polynomials have arity `m + z_arity`: the `X` variables come first, the
/// gluing variables `Z` (none for the univariate decoder) after them. An
/// interpolated polynomial has `C_δ = P_{|δ|} Z^δ`; applying `Δ^{(α)}`
/// leaves that shape, so the general form is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpPoly {
    m: usize,
    z_arity: usize,
    s: u32,
    tilde: MultiPoly,
    coeffs: Vec<MultiPoly>,
}

impl InterpPoly {
    pub fn zero(m: usize, z_arity: usize, s: u32) -> Self {
        let n = m + z_arity;
        InterpPoly {
            m,
            z_arity,
            s,
            tilde: MultiPoly::zero(n),
            coeffs: vec![MultiPoly::zero(n); count_below(m, s)],
        }
    }

    /// `P̃ + Σ_j P_j Σ_{|δ|=j} Y_δ Z^δ`, or `P̃ + Σ_j P_j Y_j` without gluing
    /// variables.
    pub fn from_parts(
        m: usize,
        z_arity: usize,
        s: u32,
        tilde: MultiPoly,
        parts: &[MultiPoly],
    ) -> Result<Self> {
        if z_arity != 0 && z_arity != m {
            return Err(Error::ShapeMismatch("z_arity must be 0 or m".into()));
        }
        if z_arity == 0 && m != 1 {
            return Err(Error::ShapeMismatch(
                "gluing variables are required for m > 1".into(),
            ));
        }
        if parts.len() > s as usize {
            return Err(Error::ShapeMismatch(format!(
                "{} parts for a window of {s}",
                parts.len()
            )));
        }
        let n = m + z_arity;
        if tilde.arity() != n || parts.iter().any(|p| p.arity() != n) {
            return Err(Error::ArityMismatch {
                expected: n,
                got: tilde.arity(),
            });
        }
        let mut out = InterpPoly::zero(m, z_arity, s);
        out.tilde = tilde;
        for (j, p) in parts.iter().enumerate() {
            for delta in crate::poly::exps_of_weight(m, j as u32) {
                let idx = graded_lex_index(&delta, s)?;
                out.coeffs[idx] = if z_arity == 0 {
                    p.clone()
                } else {
                    let zmono = ExpVec::zero(m).concat(&delta);
                    p.mul_monomial_exp(&zmono)
                };
            }
        }
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn z_arity(&self) -> usize {
        self.z_arity
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn tilde(&self) -> &MultiPoly {
        &self.tilde
    }

    /// `C_δ`.
    pub fn coeff(&self, delta: &ExpVec) -> &MultiPoly {
        &self.coeffs[graded_lex_index(delta, self.s).expect("|δ| < s")]
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (ExpVec, &MultiPoly)> {
        exps_below(self.m, self.s).into_iter().zip(self.coeffs.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.tilde.is_zero() && self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `1 + max |δ|` over nonzero `C_δ`, or 0 when every `C_δ` vanishes.
    pub fn y_window(&self) -> u32 {
        self.coeffs()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, _)| d.weight() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Total degree in `X` of `P̃` and of the `C_δ`.
    pub fn x_degrees(&self) -> (Option<u32>, Option<u32>) {
        let xd = |p: &MultiPoly| p.degree_in(0..self.m).finite();
        (
            xd(&self.tilde),
            self.coeffs.iter().filter_map(xd).max(),
        )
    }

    /// Total degree in `Z` over all coefficients.
    pub fn z_degree(&self) -> u32 {
        let n = self.m + self.z_arity;
        std::iter::once(&self.tilde)
            .chain(self.coeffs.iter())
            .filter_map(|p| p.degree_in(self.m..n).finite())
            .max()
            .unwrap_or(0)
    }

    /// `P^{[f]} = P̃ + Σ_δ C_δ · D^δ f`, a polynomial in `(X, Z)`.
    pub fn substitute(&self, tower: &FieldTower, f: &MultiPoly) -> Result<MultiPoly> {
        if f.arity() != self.m {
            return Err(Error::ArityMismatch {
                expected: self.m,
                got: f.arity(),
            });
        }
        let mut out = self.tilde.clone();
        for (delta, c) in self.coeffs() {
            if c.is_zero() {
                continue;
            }
            let d = q_derive_multi(tower, f, &delta).extend_arity(self.z_arity);
            out.add_assign(tower, &c.mul(tower, &d)?);
        }
        Ok(out)
    }

    /// `Δ^{(α)} P`.
    pub fn delta(&self, tower: &FieldTower, alpha: &ExpVec) -> Result<InterpPoly> {
        if alpha.len() != self.m {
            return Err(Error::ArityMismatch {
                expected: self.m,
                got: alpha.len(),
            });
        }
        let full = alpha.concat(&ExpVec::zero(self.z_arity));
        let mut out = InterpPoly::zero(self.m, self.z_arity, self.s);
        out.tilde = q_derive_multi(tower, &self.tilde, &full);
        let mut scale = vec![KElem::ONE; self.m + self.z_arity];
        for (delta, c) in self.coeffs() {
            if c.is_zero() {
                continue;
            }
            for beta in alpha.sub_vectors() {
                let target = beta.add(&delta);
                if target.weight() >= self.s {
                    continue;
                }
                let rest = alpha.checked_sub(&beta).expect("β ≤ α");
                let d = q_derive_multi(tower, c, &rest.concat(&ExpVec::zero(self.z_arity)));
                for (i, slot) in scale.iter_mut().enumerate().take(self.m) {
                    *slot = tower.q_power(beta.get(i) as i64);
                }
                let shifted = d.scale_vars_unchecked(tower, &scale);
                let idx = graded_lex_index(&target, self.s)?;
                out.coeffs[idx].add_scaled_assign(
                    tower,
                    q_binom_multi(tower, alpha, &beta),
                    &shifted,
                );
            }
        }
        if self.y_window() > 0 && out.y_window() > self.y_window() + alpha.weight() {
            return Err(Error::Internal("Δ widened the Y-window too far".into()));
        }
        Ok(out)
    }

    /// `P(a, w)` as a polynomial in `Z`.
    pub fn eval_at(&self, tower: &FieldTower, a: &[KElem], w: &[KElem]) -> Result<PolyZ> {
        if a.len() != self.m || w.len() != self.coeffs.len() {
            return Err(Error::ShapeMismatch("point or block has the wrong size".into()));
        }
        let mut out = self.tilde.eval_partial(tower, a);
        for (c, &wv) in self.coeffs.iter().zip(w) {
            if !c.is_zero() && !wv.is_zero() {
                out.add_scaled_assign(tower, wv, &c.eval_partial(tower, a));
            }
        }
        Ok(out)
    }

    /// The `(Δ^{(α)} P)(a, w_a)` residuals over every grid point and every
    /// `|α| <= s - r`; all are zero for an interpolated polynomial.
    pub fn residuals(
        &self,
        params: &CodeParams,
        w: &Codeword,
        r: u32,
    ) -> Result<Vec<PolyZ>> {
        let t = params.tower();
        let mut out = Vec::new();
        let deltas: Vec<InterpPoly> = exps_below(self.m, params.s() - r + 1)
            .iter()
            .map(|alpha| self.delta(t, alpha))
            .collect::<Result<_>>()?;
        for (a, block) in params.grid_k().iter().zip(&w.blocks) {
            for d in &deltas {
                out.push(d.eval_at(t, a, block)?);
            }
        }
        Ok(out)
    }

    /// One line per nonzero part in the polynomial text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("interp m={} z={} s={}\n", self.m, self.z_arity, self.s);
        let _ = writeln!(out, "tilde: {}", self.tilde);
        for (delta, c) in self.coeffs() {
            if !c.is_zero() {
                let _ = writeln!(out, "C{:?}: {}", delta.as_vec(), c);
            }
        }
        out
    }
}

impl MultiPoly {
    fn mul_monomial_exp(&self, exp: &ExpVec) -> MultiPoly {
        let mut out = MultiPoly::zero(self.arity());
        for (e, c) in self.terms() {
            out.insert_fresh(e.add(exp), *c);
        }
        out
    }
}

/// `Δ` for `m = 1`.
pub fn delta_uni(tower: &FieldTower, p: &InterpPoly) -> Result<InterpPoly> {
    if p.m() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: p.m(),
        });
    }
    p.delta(tower, &ExpVec::new(&[1]))
}

/// `Δ^{(α)}`.
pub fn delta_multi(tower: &FieldTower, p: &InterpPoly, alpha: &ExpVec) -> Result<InterpPoly> {
    p.delta(tower, alpha)
}

/// Interpolation degree, agreement threshold, and enumeration cap.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeConfig {
    pub r: u32,
    pub d: u32,
    /// Least agreement count `T` with `T(s-r+1) > (d+k-1)|A|^{m-1}`.
    pub t_min: u64,
    /// The agreement count the stated radius asks for.
    pub t_stated: u64,
    /// The closed-form interpolation degree of the multivariate statement.
    pub d_closed_form: Option<u64>,
    pub cap: u64,
}

pub const DEFAULT_CAP: u64 = 1 << 20;

fn check_r_k(s: u32, r: u32, k: u32, n: u64) -> Result<()> {
    if r == 0 || r > s {
        return Err(Error::Regime(format!("1 <= r <= s required (r={r}, s={s})")));
    }
    if k == 0 || k as u64 > s as u64 * n {
        return Err(Error::Regime(format!("k must lie in 1..={}", s as u64 * n)));
    }
    Ok(())
}

fn check_degree_regime(d: u32, k: u32, bracket3: u64) -> Result<()> {
    if (d + k - 1) as u64 >= bracket3 {
        return Err(Error::Regime(format!(
            "d+k-1 < [3]_q required (d={d}, k={k}, [3]_q={bracket3})"
        )));
    }
    Ok(())
}

/// `d = max(1, ⌈(n(s-r+1) - (r+k) + 1)/(r+1)⌉)`.
pub fn choose_config_uni(n: u64, s: u32, r: u32, k: u32, bracket3: u64) -> Result<DecodeConfig> {
    check_r_k(s, r, k, n)?;
    let w = (s - r + 1) as i64;
    let num = n as i64 * w - (r + k) as i64 + 1;
    let den = (r + 1) as i64;
    let d = num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0);
    let d = d.max(1) as u32;
    check_degree_regime(d, k, bracket3)?;
    let t_min = (d + k - 1) as u64 / w as u64 + 1;
    // ν > n/(r+1) + k/(s-r+1)
    let bound = Ratio::new(n, (r + 1) as u64) + Ratio::new(k as u64, w as u64);
    let t_stated = bound.floor().to_integer() + 1;
    Ok(DecodeConfig {
        r,
        d,
        t_min,
        t_stated,
        d_closed_form: None,
        cap: DEFAULT_CAP,
    })
}

/// Least `d >= 1` with `C(m+d+k-1, m) + r·C(m+d, m) > |A|^m · C(m+s-r, m)`.
pub fn choose_config_multi(
    m: usize,
    a_size: u64,
    s: u32,
    r: u32,
    k: u32,
    bracket3: u64,
) -> Result<DecodeConfig> {
    check_r_k(s, r, k, a_size)?;
    let m64 = m as u64;
    let constraints = a_size.pow(m as u32) * binomial(m64 + (s - r) as u64, m64);
    let unknowns =
        |d: u64| binomial(m64 + d + k as u64 - 1, m64) + r as u64 * binomial(m64 + d, m64);
    let mut d = 1u64;
    while unknowns(d) <= constraints {
        d += 1;
        if d + k as u64 > bracket3 {
            break;
        }
    }
    let d = d as u32;
    check_degree_regime(d, k, bracket3)?;
    let w = (s - r + 1) as u64;
    let spread = a_size.pow(m as u32 - 1);
    let t_min = (d + k - 1) as u64 * spread / w + 1;
    let lead = 5.0 * (1.0 / (r as f64 + 1.0)).powf(1.0 / m as f64);
    let d_closed_form = (lead * w as f64 * a_size as f64).ceil() as u64;
    let t_stated = (lead * spread as f64 + k as f64 / w as f64).ceil() as u64;
    Ok(DecodeConfig {
        r,
        d,
        t_min,
        t_stated,
        d_closed_form: Some(d_closed_form),
        cap: DEFAULT_CAP,
    })
}

/// The configuration matching the code's arity.
pub fn choose_config(params: &CodeParams, r: u32) -> Result<DecodeConfig> {
    let b3 = params.tower().bracket3();
    let n = params.eval_set().len() as u64;
    if params.m() == 1 {
        choose_config_uni(n, params.s(), r, params.k(), b3)
    } else {
        choose_config_multi(params.m(), n, params.s(), r, params.k(), b3)
    }
}

fn check_word(params: &CodeParams, w: &Codeword) -> Result<()> {
    if w.blocks.len() != params.n_blocks()
        || w.blocks.iter().any(|b| b.len() != params.block_size())
    {
        return Err(Error::ShapeMismatch(format!(
            "received word must have {} blocks of length {}",
            params.n_blocks(),
            params.block_size()
        )));
    }
    Ok(())
}

/// Interpolation output with the measured `Z`-degree of the solution.
#[derive(Clone, Debug)]
pub struct Interpolation {
    pub poly: InterpPoly,
    pub z_degree: u32,
    pub rows: usize,
    pub cols: usize,
}

/// Value of the constraint `(Δ^{(α)} X^e ·(coefficient of Y_δ))` pieces:
/// `Σ_{β ≤ α, |β+δ|<s} [α,β] · ff(e, α-β) · (Q^β a)^{e-(α-β)} · w[β+δ]`.
fn part_entry(
    tower: &FieldTower,
    s: u32,
    e: &ExpVec,
    alpha: &ExpVec,
    delta: &ExpVec,
    a: &[KElem],
    w: &[KElem],
) -> KElem {
    let mut acc = KElem::ZERO;
    for beta in alpha.sub_vectors() {
        let target = beta.add(delta);
        if target.weight() >= s {
            continue;
        }
        let wv = w[graded_lex_index(&target, s).expect("weight checked")];
        if wv.is_zero() {
            continue;
        }
        let rest = alpha.checked_sub(&beta).expect("β ≤ α");
        let Some(pow) = e.checked_sub(&rest) else {
            continue;
        };
        let mut v = tower.mul(q_binom_multi(tower, alpha, &beta), q_falling_multi(tower, e, &rest));
        for i in 0..a.len() {
            let x = tower.mul(tower.q_power(beta.get(i) as i64), a[i]);
            v = tower.mul(v, tower.pow(x, pow.get(i) as u64));
        }
        acc = tower.add(acc, tower.mul(v, wv));
    }
    acc
}

fn tilde_entry(tower: &FieldTower, e: &ExpVec, alpha: &ExpVec, a: &[KElem]) -> KElem {
    let Some(pow) = e.checked_sub(alpha) else {
        return KElem::ZERO;
    };
    let mut v = q_falling_multi(tower, e, alpha);
    for i in 0..a.len() {
        v = tower.mul(v, tower.pow(a[i], pow.get(i) as u64));
    }
    v
}

/// Univariate interpolation: a nonzero `P` with `deg P̃ <= d+k-1`,
/// `deg P_j <= d` and `(Δ^j P)(a, w_a) = 0` for `j <= s-r`.
pub fn interpolate_uni(params: &CodeParams, w: &Codeword, cfg: &DecodeConfig) -> Result<Interpolation> {
    if params.m() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: params.m(),
        });
    }
    check_word(params, w)?;
    let t = params.tower();
    let (s, r, k, d) = (params.s(), cfg.r, params.k(), cfg.d);
    let tilde_exps = exps_below(1, d + k);
    let part_exps = exps_below(1, d + 1);
    let cols = tilde_exps.len() + r as usize * part_exps.len();
    let mut rows = Vec::new();
    for (a, block) in params.grid_k().iter().zip(&w.blocks) {
        for j in 0..=s - r {
            let alpha = ExpVec::new(&[j]);
            let mut row = Vec::with_capacity(cols);
            row.extend(tilde_exps.iter().map(|e| tilde_entry(t, e, &alpha, a)));
            for i in 0..r {
                let delta = ExpVec::new(&[i]);
                row.extend(
                    part_exps
                        .iter()
                        .map(|e| part_entry(t, s, e, &alpha, &delta, a, block)),
                );
            }
            rows.push(row);
        }
    }
    let v = nullspace_k(t, &rows, cols).ok_or_else(|| {
        Error::Internal("interpolation system has only the zero solution".into())
    })?;
    let mut it = v.into_iter();
    let tilde = MultiPoly::from_terms(t, 1, tilde_exps.iter().map(|e| (*e, it.next().unwrap())));
    let parts: Vec<MultiPoly> = (0..r)
        .map(|_| MultiPoly::from_terms(t, 1, part_exps.iter().map(|e| (*e, it.next().unwrap()))))
        .collect();
    Ok(Interpolation {
        poly: InterpPoly::from_parts(1, 0, s, tilde, &parts)?,
        z_degree: 0,
        rows: rows.len(),
        cols,
    })
}

/// Multivariate interpolation over `K[Z]`: `P̃ + Σ_j P_j Σ_{|δ|=j} Y_δ Z^δ`
/// with `(Δ^{(α)} P)(a, w_a) = 0` identically in `Z` for `|α| <= s-r`.
pub fn interpolate_multi(params: &CodeParams, w: &Codeword, cfg: &DecodeConfig) -> Result<Interpolation> {
    check_word(params, w)?;
    let t = params.tower();
    let m = params.m();
    let (s, r, k, d) = (params.s(), cfg.r, params.k(), cfg.d);
    let tilde_exps = exps_below(m, d + k);
    let part_exps = exps_below(m, d + 1);
    let cols = tilde_exps.len() + r as usize * part_exps.len();
    let alphas = exps_below(m, s - r + 1);
    let mut rows: Vec<Vec<PolyZ>> = Vec::new();
    for (a, block) in params.grid_k().iter().zip(&w.blocks) {
        for alpha in &alphas {
            let mut row = Vec::with_capacity(cols);
            row.extend(
                tilde_exps
                    .iter()
                    .map(|e| PolyZ::constant(m, tilde_entry(t, e, alpha, a))),
            );
            for j in 0..r {
                let deltas = crate::poly::exps_of_weight(m, j);
                for e in &part_exps {
                    let mut entry = PolyZ::zero(m);
                    for delta in &deltas {
                        let v = part_entry(t, s, e, alpha, delta, a, block);
                        entry.add_term(t, *delta, v);
                    }
                    row.push(entry);
                }
            }
            rows.push(row);
        }
    }
    let sol = nullspace_polyz(t, &rows, cols, m)?.ok_or_else(|| {
        Error::Internal("interpolation system has only the zero solution".into())
    })?;
    let lift = |e: &ExpVec, c: &PolyZ| -> Vec<(ExpVec, KElem)> {
        c.terms().map(|(z, v)| (e.concat(z), *v)).collect()
    };
    let mut it = sol.vector.iter();
    let tilde = MultiPoly::from_terms(
        t,
        2 * m,
        tilde_exps.iter().flat_map(|e| lift(e, it.next().unwrap())),
    );
    let parts: Vec<MultiPoly> = (0..r)
        .map(|_| {
            MultiPoly::from_terms(
                t,
                2 * m,
                part_exps.iter().flat_map(|e| lift(e, it.next().unwrap())),
            )
        })
        .collect();
    Ok(Interpolation {
        poly: InterpPoly::from_parts(m, m, s, tilde, &parts)?,
        z_degree: sol.z_degree,
        rows: rows.len(),
        cols,
    })
}

/// `{base + Σ c_i basis_i : c_i ∈ K}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    pub base: MultiPoly,
    pub basis: Vec<MultiPoly>,
}

impl AffineSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn member(&self, tower: &FieldTower, c: &[KElem]) -> MultiPoly {
        let mut out = self.base.clone();
        for (b, &ci) in self.basis.iter().zip(c) {
            out.add_scaled_assign(tower, ci, b);
        }
        out
    }

    /// Whether `f` lies in the space.
    pub fn contains(&self, tower: &FieldTower, f: &MultiPoly) -> bool {
        let diff = f.sub(tower, &self.base).expect("same arity");
        let mut exps: Vec<ExpVec> = diff.terms().map(|(e, _)| *e).collect();
        for b in &self.basis {
            exps.extend(b.terms().map(|(e, _)| *e));
        }
        exps.sort();
        exps.dedup();
        let rows: Vec<Vec<KElem>> = exps
            .iter()
            .map(|e| self.basis.iter().map(|b| b.coeff(e)).collect())
            .collect();
        let rhs: Vec<KElem> = exps.iter().map(|e| diff.coeff(e)).collect();
        solve_affine_k(tower, &rows, &rhs, self.basis.len()).is_some()
    }
}

/// Result of the solving step.
#[derive(Clone, Debug)]
pub struct Solution {
    /// `None` when no polynomial of degree `< k` satisfies `P^{[f]} = 0`.
    pub space: Option<AffineSpace>,
    /// Taylor center exponent: the center is `Q^β`.
    pub beta: ExpVec,
    pub y_window: u32,
    /// Whether the hitting-set recovery agreed with monomial extraction;
    /// `None` when there are no gluing variables.
    pub paths_agree: Option<bool>,
    /// Side of the hitting grid `S^m`.
    pub grid_side: usize,
}

type Affine = Vec<KElem>;

fn aff_add_scaled(tower: &FieldTower, acc: &mut Affine, c: KElem, x: &Affine) {
    if c.is_zero() {
        return;
    }
    for (a, &b) in acc.iter_mut().zip(x) {
        if !b.is_zero() {
            *a = tower.add(*a, tower.mul(c, b));
        }
    }
}

fn aff_is_zero(x: &Affine) -> bool {
    x.iter().all(|v| v.is_zero())
}

/// Solves `Σ_j rows[i][j] x_j = rhs[i]` for affine unknowns `x`. Every
/// column must be a pivot; rows left over give constraints `residual = 0`.
fn solve_block(
    tower: &FieldTower,
    mut rows: Vec<(Vec<KElem>, Affine)>,
    ncols: usize,
) -> Result<(Vec<Affine>, Vec<Affine>)> {
    let mut pivots = Vec::with_capacity(ncols);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
            return Err(Error::Internal(
                "the leading coefficients do not determine the Newton coefficients".into(),
            ));
        };
        rows.swap(r, p);
        let inv = tower.inv(rows[r].0[c])?;
        for v in rows[r].0.iter_mut() {
            *v = tower.mul(*v, inv);
        }
        for v in rows[r].1.iter_mut() {
            *v = tower.mul(*v, inv);
        }
        let (pr, pa) = rows[r].clone();
        for (i, (row, aff)) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = tower.neg(row[c]);
            for (x, &y) in row.iter_mut().zip(&pr) {
                *x = tower.add(*x, tower.mul(f, y));
            }
            aff_add_scaled(tower, aff, f, &pa);
        }
        pivots.push(c);
        r += 1;
    }
    let values = (0..ncols).map(|c| rows[c].1.clone()).collect();
    let leftovers = rows[ncols..]
        .iter()
        .map(|(_, a)| a.clone())
        .filter(|a| !aff_is_zero(a))
        .collect();
    Ok((values, leftovers))
}

/// `D^η C(Q^{θ+β}, Z)` for every needed `(θ, η)`, memoized.
struct TaylorTable<'a> {
    tower: &'a FieldTower,
    m: usize,
    poly: &'a MultiPoly,
    x_deg: u32,
    beta: ExpVec,
    cache: HashMap<(ExpVec, ExpVec), PolyZ>,
}

impl<'a> TaylorTable<'a> {
    fn new(tower: &'a FieldTower, m: usize, poly: &'a MultiPoly, beta: ExpVec) -> Self {
        TaylorTable {
            tower,
            m,
            poly,
            x_deg: poly.degree_in(0..m).finite().unwrap_or(0),
            beta,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, eta: &ExpVec, theta: &ExpVec) -> PolyZ {
        let z = self.poly.arity() - self.m;
        if self.poly.is_zero() || eta.weight() > self.x_deg {
            return PolyZ::zero(z);
        }
        let key = (*eta, *theta);
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let t = self.tower;
        let point = q_point(t, &theta.add(&self.beta));
        let mut out = PolyZ::zero(z);
        for (e, c) in self.poly.terms() {
            let (ex, ez) = e.split(self.m);
            let Some(pow) = ex.checked_sub(eta) else {
                continue;
            };
            let mut v = tower_mul_falling(t, *c, &ex, eta);
            for (i, &x) in point.iter().enumerate() {
                if v.is_zero() {
                    break;
                }
                v = t.mul(v, t.pow(x, pow.get(i) as u64));
            }
            out.add_term(t, ez, v);
        }
        self.cache.insert(key, out.clone());
        out
    }
}

fn tower_mul_falling(t: &FieldTower, c: KElem, e: &ExpVec, eta: &ExpVec) -> KElem {
    t.mul(c, q_falling_multi(t, e, eta))
}

/// Solves `P^{[f]} = 0` over polynomials of degree `< k`.
///
/// Newton coefficients `f_γ = D^γ f(Q^β)` with `|γ| <= r'-2` are free
/// parameters; the Taylor coefficient of `P^{[f]}` at each `α` (graded-lex
/// ascending) determines the `f_{α+δ}` with `|δ| = r'-1` from the ones
/// already known. Leftover equations, repeated determinations and
/// coefficients of weight `>= k` become affine constraints on the
/// parameters.
pub fn solve(params: &CodeParams, p: &InterpPoly) -> Result<Solution> {
    let t = params.tower();
    let m = p.m();
    if m != params.m() || p.s() != params.s() {
        return Err(Error::ShapeMismatch("interpolation polynomial does not match the code".into()));
    }
    let k = params.k();
    let zn = p.z_arity();
    let rp = p.y_window();
    if rp == 0 {
        // P^{[f]} = P̃ for every f
        let space = if p.tilde().is_zero() {
            return Err(Error::Internal("zero interpolation polynomial".into()));
        } else {
            None
        };
        return Ok(Solution {
            space,
            beta: ExpVec::zero(m),
            y_window: 0,
            paths_agree: None,
            grid_side: 0,
        });
    }
    let (dt, dc) = p.x_degrees();
    let x_deg = dt.unwrap_or(0).max(dc.unwrap_or(0) + k - 1);
    if x_deg as u64 >= t.bracket3() {
        return Err(Error::DegreeTooLarge {
            degree: x_deg as usize,
            bound: t.bracket3() as usize - 1,
        });
    }
    let alphas = exps_below(m, x_deg + 1);
    let lead: Vec<ExpVec> = crate::poly::exps_of_weight(m, rp - 1);
    let lower: Vec<(ExpVec, &MultiPoly)> = p.coeffs().filter(|(_, c)| !c.is_zero()).collect();

    // Taylor center: the first β (graded-lex) where the leading coefficients
    // are K-independent as Z-polynomials at every Q^{α+β}
    let beta = find_center(t, m, p, &lead, &alphas)?;

    // free parameters
    let free: Vec<ExpVec> = exps_below(m, rp - 1);
    let np = free.len();
    let unit = |i: Option<usize>| {
        let mut v = vec![KElem::ZERO; np + 1];
        match i {
            None => {}
            Some(i) => v[i + 1] = KElem::ONE,
        }
        v
    };
    let mut known: BTreeMap<ExpVec, Affine> = BTreeMap::new();
    let mut constraints: Vec<Affine> = Vec::new();
    for (i, g) in free.iter().enumerate() {
        if g.weight() >= k {
            constraints.push(unit(Some(i)));
        } else {
            known.insert(*g, unit(Some(i)));
        }
    }
    let value_of = |known: &BTreeMap<ExpVec, Affine>, g: &ExpVec| -> Option<Affine> {
        if g.weight() >= k {
            Some(unit(None))
        } else {
            known.get(g).cloned()
        }
    };

    let mut tilde_tab = TaylorTable::new(t, m, p.tilde(), beta);
    let mut tabs: Vec<TaylorTable> = lower
        .iter()
        .map(|(_, c)| TaylorTable::new(t, m, c, beta))
        .collect();
    let lead_pos: Vec<usize> = lead
        .iter()
        .map(|d| lower.iter().position(|(x, _)| x == d))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Internal("a leading coefficient vanishes".into()))?;

    let grid_side = if zn == 0 { 0 } else { p.z_degree() as usize + 1 };
    let mut hitting: Vec<(ExpVec, Vec<Affine>)> = Vec::new();

    for alpha in &alphas {
        // right side N(Z) with affine coefficients: P̃_{α,β} + lower terms
        let mut rhs: BTreeMap<ExpVec, Affine> = BTreeMap::new();
        let add_poly = |rhs: &mut BTreeMap<ExpVec, Affine>, poly: &PolyZ, coef: KElem, val: &Affine| {
            for (z, c) in poly.terms() {
                let slot = rhs.entry(*z).or_insert_with(|| vec![KElem::ZERO; np + 1]);
                aff_add_scaled(t, slot, t.mul(coef, *c), val);
            }
        };
        let tp = tilde_tab.get(alpha, &ExpVec::zero(m));
        let mut one = unit(None);
        one[0] = KElem::ONE;
        add_poly(&mut rhs, &tp, KElem::ONE, &one);
        for theta in alpha.sub_vectors() {
            let eta = alpha.checked_sub(&theta).expect("θ ≤ α");
            let qb = q_binom_multi(t, alpha, &theta);
            for (li, (delta, _)) in lower.iter().enumerate() {
                if theta == *alpha && delta.weight() == rp - 1 {
                    continue;
                }
                let g = theta.add(delta);
                if g.weight() >= k {
                    continue;
                }
                let val = value_of(&known, &g).ok_or_else(|| {
                    Error::Internal(format!("Newton coefficient {g:?} used before it is known"))
                })?;
                let c = tabs[li].get(&eta, &theta);
                add_poly(&mut rhs, &c, qb, &val);
            }
        }
        // leading terms: Σ_δ E_δ(Z) f_{α+δ}
        let e_polys: Vec<PolyZ> = lead_pos.iter().map(|&li| tabs[li].get(&ExpVec::zero(m), alpha)).collect();
        let mut unknown_cols = Vec::new();
        for (i, delta) in lead.iter().enumerate() {
            let g = alpha.add(delta);
            match value_of(&known, &g) {
                Some(v) => add_poly(&mut rhs, &e_polys[i], KElem::ONE, &v),
                None => unknown_cols.push(i),
            }
        }
        // monomial extraction: one equation per Z-monomial
        let mut monos: Vec<ExpVec> = rhs.keys().copied().collect();
        for &i in &unknown_cols {
            monos.extend(e_polys[i].terms().map(|(z, _)| *z));
        }
        monos.sort();
        monos.dedup();
        let rows: Vec<(Vec<KElem>, Affine)> = monos
            .iter()
            .map(|z| {
                let coefs = unknown_cols.iter().map(|&i| e_polys[i].coeff(z)).collect();
                let r = rhs
                    .get(z)
                    .map(|a| a.iter().map(|&v| t.neg(v)).collect())
                    .unwrap_or_else(|| vec![KElem::ZERO; np + 1]);
                (coefs, r)
            })
            .collect();
        let (values, leftovers) = solve_block(t, rows, unknown_cols.len())?;
        constraints.extend(leftovers);

        if zn > 0 && !unknown_cols.is_empty() {
            let grid = hitting_values(t, zn, grid_side, &unknown_cols, &e_polys, &rhs, np)?;
            let new: Vec<ExpVec> = unknown_cols.iter().map(|&i| alpha.add(&lead[i])).collect();
            for (g, v) in new.iter().zip(grid) {
                hitting.push((*g, vec![v]));
            }
        }
        for (&i, v) in unknown_cols.iter().zip(values) {
            known.insert(alpha.add(&lead[i]), v);
        }
    }

    // parameters satisfying every constraint
    let cmat: Vec<Vec<KElem>> = constraints.iter().map(|c| c[1..].to_vec()).collect();
    let crhs: Vec<KElem> = constraints.iter().map(|c| t.neg(c[0])).collect();
    let Some(sol) = solve_affine_k(t, &cmat, &crhs, np) else {
        return Ok(Solution {
            space: None,
            beta,
            y_window: rp,
            paths_agree: if zn > 0 { Some(true) } else { None },
            grid_side,
        });
    };
    let eval_aff = |a: &Affine, x: &[KElem], with_const: bool| {
        let mut v = if with_const { a[0] } else { KElem::ZERO };
        for (c, &xi) in a[1..].iter().zip(x) {
            v = t.add(v, t.mul(*c, xi));
        }
        v
    };
    let coeff_map = |x: &[KElem], with_const: bool| -> BTreeMap<ExpVec, KElem> {
        known
            .iter()
            .map(|(g, a)| (*g, eval_aff(a, x, with_const)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    };
    let base = q_taylor_reconstruct(t, &coeff_map(&sol.particular, true), &beta)?;
    let basis = sol
        .kernel
        .iter()
        .map(|kv| q_taylor_reconstruct(t, &coeff_map(kv, false), &beta))
        .collect::<Result<Vec<_>>>()?;

    let paths_agree = if zn > 0 {
        let mut ok = true;
        for (g, vals) in &hitting {
            let primary = &known[g];
            for v in vals {
                ok &= eval_aff(v, &sol.particular, true) == eval_aff(primary, &sol.particular, true);
                for kv in &sol.kernel {
                    ok &= eval_aff(v, kv, false) == eval_aff(primary, kv, false);
                }
            }
        }
        Some(ok)
    } else {
        None
    };
    Ok(Solution {
        space: Some(AffineSpace { base, basis }),
        beta,
        y_window: rp,
        paths_agree,
        grid_side,
    })
}

/// Re-derives the leading Newton coefficients from evaluations on the grid
/// `S^m`, `S` the first `side` elements of `K`, skipping points where the
/// leading coefficients all vanish.
fn hitting_values(
    tower: &FieldTower,
    zn: usize,
    side: usize,
    cols: &[usize],
    e_polys: &[PolyZ],
    rhs: &BTreeMap<ExpVec, Affine>,
    np: usize,
) -> Result<Vec<Affine>> {
    let mut rows: Vec<(Vec<KElem>, Affine)> = Vec::new();
    let mut idx = vec![0usize; zn];
    let mut rank_rows: Vec<Vec<KElem>> = Vec::new();
    loop {
        let z: Vec<KElem> = idx.iter().map(|&i| KElem(i as u32)).collect();
        let coefs: Vec<KElem> = cols
            .iter()
            .map(|&i| e_polys[i].eval(tower, &z).expect("arity"))
            .collect();
        if coefs.iter().any(|c| !c.is_zero()) {
            let mut val = vec![KElem::ZERO; np + 1];
            for (mono, a) in rhs {
                let mut zv = KElem::ONE;
                for (i, &zi) in z.iter().enumerate() {
                    zv = tower.mul(zv, tower.pow(zi, mono.get(i) as u64));
                }
                aff_add_scaled(tower, &mut val, tower.neg(zv), a);
            }
            rank_rows.push(coefs.clone());
            rows.push((coefs, val));
            if crate::linsys::rank_k(tower, &rank_rows, cols.len()) == cols.len() {
                break;
            }
            if rank_rows.len() > cols.len() {
                // keep only independent rows
                let r = crate::linsys::rank_k(tower, &rank_rows, cols.len());
                if r < rank_rows.len() {
                    rank_rows.pop();
                    rows.pop();
                }
            }
        }
        // next grid point
        let mut i = 0;
        loop {
            if i == zn {
                return Err(Error::Internal(
                    "hitting grid too small to recover the Newton coefficients".into(),
                ));
            }
            idx[i] += 1;
            if idx[i] < side.max(1) {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
    let (values, _) = solve_block(tower, rows, cols.len())?;
    Ok(values)
}

fn find_center(
    tower: &FieldTower,
    m: usize,
    p: &InterpPoly,
    lead: &[ExpVec],
    alphas: &[ExpVec],
) -> Result<ExpVec> {
    let order = tower.order() as u64;
    let max_weight = (order - 1).min(u16::MAX as u64) as u32;
    let lead_polys: Vec<&MultiPoly> = lead.iter().map(|d| p.coeff(d)).collect();
    let mut tried = 0u64;
    for w in 0..=max_weight {
        for beta in crate::poly::exps_of_weight(m, w) {
            tried += 1;
            if tried > 1 << 16 {
                return Err(Error::Regime("no Taylor center found".into()));
            }
            let ok = alphas.iter().all(|alpha| {
                let point = q_point(tower, &alpha.add(&beta));
                let evals: Vec<PolyZ> = lead_polys
                    .iter()
                    .map(|c| c.eval_partial(tower, &point))
                    .collect();
                independent(tower, &evals)
            });
            if ok {
                return Ok(beta);
            }
        }
    }
    Err(Error::Regime("no Taylor center found".into()))
}

/// K-linear independence of polynomials.
fn independent(tower: &FieldTower, polys: &[PolyZ]) -> bool {
    if polys.iter().any(|p| p.is_zero()) {
        return false;
    }
    if polys.len() == 1 {
        return true;
    }
    let mut monos: Vec<ExpVec> = polys.iter().flat_map(|p| p.terms().map(|(e, _)| *e)).collect();
    monos.sort();
    monos.dedup();
    let rows: Vec<Vec<KElem>> = monos
        .iter()
        .map(|z| polys.iter().map(|p| p.coeff(z)).collect())
        .collect();
    crate::linsys::rank_k(tower, &rows, polys.len()) == polys.len()
}

/// Univariate solving.
pub fn solve_uni(params: &CodeParams, p: &InterpPoly) -> Result<Solution> {
    if p.m() != 1 || p.z_arity() != 0 {
        return Err(Error::ShapeMismatch("univariate solving needs m = 1".into()));
    }
    solve(params, p)
}

/// Multivariate solving with the hitting-set cross-check.
pub fn solve_multi(params: &CodeParams, p: &InterpPoly) -> Result<Solution> {
    solve(params, p)
}

/// Explicit candidate list, or a marker that the space was too large.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidates {
    Listed(Vec<(MultiPoly, usize)>),
    NotEnumerated,
}

/// Everything a decode run produces.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub config: DecodeConfig,
    pub interpolation: Interpolation,
    pub solution: Solution,
    pub candidates: Candidates,
}

impl DecodeOutcome {
    pub fn space(&self) -> Option<&AffineSpace> {
        self.solution.space.as_ref()
    }

    pub fn listed(&self) -> Option<&[(MultiPoly, usize)]> {
        match &self.candidates {
            Candidates::Listed(v) => Some(v),
            Candidates::NotEnumerated => None,
        }
    }

    /// `dim=` line, base and basis polynomials, then the candidates.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.space() {
            None => out.push_str("dim=empty\n"),
            Some(sp) => {
                let _ = writeln!(out, "dim={}", sp.dim());
                let _ = writeln!(out, "base: {}", sp.base);
                for b in &sp.basis {
                    let _ = writeln!(out, "basis: {}", b);
                }
            }
        }
        match &self.candidates {
            Candidates::NotEnumerated => out.push_str("candidates: not-enumerated\n"),
            Candidates::Listed(list) => {
                let _ = writeln!(out, "candidates: {}", list.len());
                for (f, agree) in list {
                    let _ = writeln!(out, "{agree}: {f}");
                }
            }
        }
        out
    }
}

/// Members of the space (degree `< k`) agreeing with `w` on at least
/// `t_min` blocks, when `q^{3·dim} <= cap`.
pub fn enumerate_candidates(
    params: &CodeParams,
    space: &AffineSpace,
    w: &Codeword,
    t_min: u64,
    cap: u64,
) -> Result<Candidates> {
    let t = params.tower();
    let size = t.size() as u64;
    let total = (0..space.dim()).try_fold(1u64, |acc, _| acc.checked_mul(size));
    let Some(total) = total.filter(|&n| n <= cap) else {
        return Ok(Candidates::NotEnumerated);
    };
    let k = params.k();
    let low = |f: &MultiPoly| f.total_degree().finite().map_or(true, |d| d < k);
    if !low(&space.base) || !space.basis.iter().all(low) {
        // members of degree >= k cannot be messages; the decoder never
        // produces them, but a hand-built space might
        return Err(Error::DegreeTooLarge {
            degree: space.base.total_degree().finite().unwrap_or(0) as usize,
            bound: k as usize - 1,
        });
    }
    let base = encode_qmult(params, &space.base)?;
    let basis: Vec<Codeword> = space
        .basis
        .iter()
        .map(|b| encode_qmult(params, b))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut c = vec![0u32; space.dim()];
    for _ in 0..total {
        let coeffs: Vec<KElem> = c.iter().map(|&x| KElem(x)).collect();
        let mut cw = base.clone();
        for (b, &ci) in basis.iter().zip(&coeffs) {
            if !ci.is_zero() {
                cw = cw.add(t, &b.scale(t, ci));
            }
        }
        let agree = agreement(&cw, w)?;
        if agree as u64 >= t_min {
            out.push((space.member(t, &coeffs), agree));
        }
        for x in c.iter_mut() {
            *x += 1;
            if *x < size as u32 {
                break;
            }
            *x = 0;
        }
    }
    Ok(Candidates::Listed(out))
}

/// Configuration, interpolation, solving, and the filtered list.
pub fn list_decode(params: &CodeParams, w: &Codeword, r: u32, cap: u64) -> Result<DecodeOutcome> {
    let mut config = choose_config(params, r)?;
    config.cap = cap;
    let interpolation = if params.m() == 1 {
        interpolate_uni(params, w, &config)?
    } else {
        interpolate_multi(params, w, &config)?
    };
    let solution = solve(params, &interpolation.poly)?;
    let candidates = match &solution.space {
        None => Candidates::Listed(Vec::new()),
        Some(sp) => enumerate_candidates(params, sp, w, config.t_min, cap)?,
    };
    Ok(DecodeOutcome {
        config,
        interpolation,
        solution,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::random_poly;
    use std::sync::Arc;

    fn params(p: u32, m: usize, s: u32, k: u32, a: usize) -> CodeParams {
        let t = Arc::new(FieldTower::build(p, 1).unwrap_or_else(|_| FieldTower::build(2, 2).unwrap()));
        CodeParams::with_default_set(t, m, s, k, a).unwrap()
    }

    fn q4(m: usize, s: u32, k: u32, a: usize) -> CodeParams {
        let t = Arc::new(FieldTower::build(2, 2).unwrap());
        CodeParams::with_default_set(t, m, s, k, a).unwrap()
    }

    #[test]
    fn config_examples() {
        let c = choose_config_uni(12, 6, 2, 12, 183).unwrap();
        assert_eq!((c.d, c.t_min, c.t_stated), (16, 6, 7));
        let c = choose_config_uni(5, 3, 3, 5, 183).unwrap();
        assert_eq!(c.d, 1);
        let c = choose_config_multi(2, 4, 6, 2, 4, 183).unwrap();
        assert_eq!((c.d, c.t_min), (11, 12));
        assert!(choose_config_uni(12, 6, 7, 12, 183).is_err());
        assert!(choose_config_uni(12, 6, 2, 12, 20).is_err());
    }

    #[test]
    fn delta_examples() {
        let t = FieldTower::build(2, 2).unwrap();
        let y0 = InterpPoly::from_parts(1, 0, 3, MultiPoly::zero(1), &[MultiPoly::one(1)]).unwrap();
        let y1 = InterpPoly::from_parts(
            1,
            0,
            3,
            MultiPoly::zero(1),
            &[MultiPoly::zero(1), MultiPoly::one(1)],
        )
        .unwrap();
        assert_eq!(delta_uni(&t, &y0).unwrap(), y1);
        let f = random_poly(&t, 1, 5, 1);
        let pt = InterpPoly::from_parts(1, 0, 3, f.clone(), &[]).unwrap();
        let d = delta_uni(&t, &pt).unwrap();
        assert_eq!(d.tilde(), &q_derive_multi(&t, &f, &ExpVec::new(&[1])));
        assert_eq!(d.y_window(), 0);
        assert_eq!(pt.delta(&t, &ExpVec::zero(1)).unwrap(), pt);
    }

    #[test]
    fn solve_trivial_polynomials() {
        let p = q4(1, 3, 3, 3);
        let y0 = InterpPoly::from_parts(1, 0, 3, MultiPoly::zero(1), &[MultiPoly::one(1)]).unwrap();
        let sol = solve_uni(&p, &y0).unwrap();
        let sp = sol.space.unwrap();
        assert_eq!(sp.dim(), 0);
        assert!(sp.base.is_zero());
        let y1 = InterpPoly::from_parts(
            1,
            0,
            3,
            MultiPoly::zero(1),
            &[MultiPoly::zero(1), MultiPoly::one(1)],
        )
        .unwrap();
        let sp = solve_uni(&p, &y1).unwrap().space.unwrap();
        assert_eq!(sp.dim(), 1);
        assert!(sp.base.is_zero());
        assert_eq!(sp.basis[0].total_degree().finite(), Some(0));
        // P̃ only: no solutions
        let tl = InterpPoly::from_parts(1, 0, 3, MultiPoly::one(1), &[]).unwrap();
        assert!(solve_uni(&p, &tl).unwrap().space.is_none());
    }

    #[test]
    fn error_free_univariate_pipeline() {
        let p = params(13, 1, 6, 12, 12);
        let f = random_poly(p.tower(), 1, 12, 9);
        let cw = encode_qmult(&p, &f).unwrap();
        let out = list_decode(&p, &cw, 2, DEFAULT_CAP).unwrap();
        let sub = out.interpolation.poly.substitute(p.tower(), &f).unwrap();
        assert!(sub.is_zero());
        assert!(out
            .interpolation
            .poly
            .residuals(&p, &cw, 2)
            .unwrap()
            .iter()
            .all(|r| r.is_zero()));
        let sp = out.space().unwrap();
        assert!(sp.dim() <= 1);
        assert!(sp.contains(p.tower(), &f));
        let listed = out.listed().unwrap();
        assert!(listed.iter().any(|(g, a)| *g == f && *a == 12));
    }

    #[test]
    fn small_multivariate_pipeline() {
        let p = params(13, 2, 3, 2, 3);
        let f = random_poly(p.tower(), 2, 2, 4);
        let cw = encode_qmult(&p, &f).unwrap();
        let out = list_decode(&p, &cw, 2, DEFAULT_CAP).unwrap();
        assert!(out.interpolation.poly.substitute(p.tower(), &f).unwrap().is_zero());
        assert!(out
            .interpolation
            .poly
            .residuals(&p, &cw, 2)
            .unwrap()
            .iter()
            .all(|r| r.is_zero()));
        assert_eq!(out.solution.paths_agree, Some(true));
        let sp = out.space().unwrap();
        assert!(sp.dim() <= 1);
        assert!(sp.contains(p.tower(), &f));
    }

    #[test]
    fn outcome_text() {
        let p = q4(1, 2, 2, 3);
        let f = random_poly(p.tower(), 1, 2, 2);
        let cw = encode_qmult(&p, &f).unwrap();
        let out = list_decode(&p, &cw, 2, DEFAULT_CAP).unwrap();
        let text = out.to_text();
        assert!(text.starts_with("dim="));
        assert!(text.contains("candidates:"));
    }
}
