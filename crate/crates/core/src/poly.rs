//! Exact polynomial arithmetic over `K`.
//!
//! [`MultiPoly`] is a sparse map from exponent vectors to nonzero
//! coefficients. Exponent vectors are ordered graded-lexicographically:
//! ascending total weight, ties broken lexicographically on `(e_1, .., e_m)`.
//! That order is used for iteration, serialization, and leading terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{FieldTower, KElem};

/// Maximum number of variables an [`ExpVec`] can carry.
pub const MAX_VARS: usize = 8;

/// An exponent vector `(e_1, .., e_m)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExpVec {
    len: u8,
    e: [u16; MAX_VARS],
}

impl ExpVec {
    pub fn zero(m: usize) -> Self {
        assert!(m <= MAX_VARS, "at most {MAX_VARS} variables supported");
        ExpVec {
            len: m as u8,
            e: [0; MAX_VARS],
        }
    }

    pub fn new(exps: &[u32]) -> Self {
        let mut v = ExpVec::zero(exps.len());
        for (slot, &x) in v.e.iter_mut().zip(exps) {
            *slot = u16::try_from(x).expect("exponent too large");
        }
        v
    }

    /// The `i`-th unit vector.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = ExpVec::zero(m);
        v.e[i] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.e[i] as u32
    }

    pub fn set(&mut self, i: usize, v: u32) {
        self.e[i] = u16::try_from(v).expect("exponent too large");
    }

    pub fn as_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.e[..self.len()].iter().map(|&x| x as u32)
    }

    /// Total weight `|e|`.
    pub fn weight(&self) -> u32 {
        self.iter().sum()
    }

    pub fn add(&self, other: &ExpVec) -> ExpVec {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for i in 0..self.len() {
            out.e[i] += other.e[i];
        }
        out
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &ExpVec) -> Option<ExpVec> {
        let mut out = *self;
        for i in 0..self.len() {
            out.e[i] = self.e[i].checked_sub(other.e[i])?;
        }
        Some(out)
    }

    /// Componentwise partial order.
    pub fn divides(&self, other: &ExpVec) -> bool {
        (0..self.len()).all(|i| self.e[i] <= other.e[i])
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &ExpVec) -> ExpVec {
        let mut out = ExpVec::zero(self.len() + other.len());
        out.e[..self.len()].copy_from_slice(&self.e[..self.len()]);
        out.e[self.len()..self.len() + other.len()].copy_from_slice(&other.e[..other.len()]);
        out
    }

    /// Splits into the first `k` components and the rest.
    pub fn split(&self, k: usize) -> (ExpVec, ExpVec) {
        let mut a = ExpVec::zero(k);
        let mut b = ExpVec::zero(self.len() - k);
        a.e[..k].copy_from_slice(&self.e[..k]);
        b.e[..self.len() - k].copy_from_slice(&self.e[k..self.len()]);
        (a, b)
    }

    /// All vectors `b` with `b <= self` componentwise, in graded-lex order.
    pub fn sub_vectors(&self) -> Vec<ExpVec> {
        let mut out = vec![ExpVec::zero(self.len())];
        for i in 0..self.len() {
            let mut next = Vec::with_capacity(out.len() * (self.e[i] as usize + 1));
            for v in &out {
                for x in 0..=self.e[i] {
                    let mut w = *v;
                    w.e[i] = x;
                    next.push(w);
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl Ord for ExpVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.e[..self.len()].cmp(&other.e[..other.len()]))
    }
}

impl PartialOrd for ExpVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ExpVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_vec())
    }
}

/// `C(n, k)` as `u64`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// All exponent vectors in `m` variables with weight exactly `w`, in lex order.
pub fn exps_of_weight(m: usize, w: u32) -> Vec<ExpVec> {
    fn rec(m: usize, i: usize, left: u32, cur: &mut ExpVec, out: &mut Vec<ExpVec>) {
        if i + 1 == m {
            cur.e[i] = left as u16;
            out.push(*cur);
            return;
        }
        for x in 0..=left {
            cur.e[i] = x as u16;
            rec(m, i + 1, left - x, cur, out);
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        if w == 0 {
            out.push(ExpVec::zero(0));
        }
        return out;
    }
    rec(m, 0, w, &mut ExpVec::zero(m), &mut out);
    out
}

/// All exponent vectors with weight `< bound`, in graded-lex order.
pub fn exps_below(m: usize, bound: u32) -> Vec<ExpVec> {
    (0..bound).flat_map(|w| exps_of_weight(m, w)).collect()
}

/// Number of exponent vectors in `m` variables with weight `< s`: `C(m+s-1, m)`.
pub fn count_below(m: usize, s: u32) -> usize {
    if s == 0 {
        return 0;
    }
    binomial(m as u64 + s as u64 - 1, m as u64) as usize
}

/// Position of `alpha` in the graded-lex enumeration of `{γ : |γ| < s}`.
pub fn graded_lex_index(alpha: &ExpVec, s: u32) -> Result<usize> {
    let w = alpha.weight();
    if w >= s {
        return Err(Error::ShapeMismatch(format!(
            "weight {w} is not below the bound {s}"
        )));
    }
    let m = alpha.len();
    let mut idx = count_below(m, w);
    // rank among weight-w vectors in lex order
    let mut left = w;
    for i in 0..m.saturating_sub(1) {
        let rest = (m - i - 1) as u64;
        for c in 0..alpha.get(i) {
            // vectors with this prefix and component i = c
            idx += binomial((left - c) as u64 + rest - 1, rest - 1) as usize;
        }
        left -= alpha.get(i);
    }
    Ok(idx)
}

/// Inverse of [`graded_lex_index`].
pub fn graded_lex_exp(m: usize, s: u32, index: usize) -> Result<ExpVec> {
    if index >= count_below(m, s) {
        return Err(Error::ShapeMismatch(format!(
            "index {index} out of range for m={m}, s={s}"
        )));
    }
    let mut w = 0;
    while count_below(m, w + 1) <= index {
        w += 1;
    }
    let mut rank = index - count_below(m, w);
    let mut out = ExpVec::zero(m);
    let mut left = w;
    for i in 0..m.saturating_sub(1) {
        let rest = (m - i - 1) as u64;
        let mut c = 0;
        loop {
            let block = binomial((left - c) as u64 + rest - 1, rest - 1) as usize;
            if rank < block {
                break;
            }
            rank -= block;
            c += 1;
        }
        out.set(i, c);
        left -= c;
    }
    if m > 0 {
        out.set(m - 1, left);
    }
    Ok(out)
}

/// Total degree, with `-∞` for the zero polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInf,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInf => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// A sparse polynomial in `arity` variables over `K`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    arity: usize,
    terms: BTreeMap<ExpVec, KElem>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl MultiPoly {
    pub fn zero(arity: usize) -> Self {
        assert!(arity <= MAX_VARS, "at most {MAX_VARS} variables supported");
        MultiPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: KElem) -> Self {
        MultiPoly::monomial(ExpVec::zero(arity), c)
    }

    pub fn one(arity: usize) -> Self {
        MultiPoly::constant(arity, KElem::ONE)
    }

    pub fn monomial(exp: ExpVec, c: KElem) -> Self {
        let mut p = MultiPoly::zero(exp.len());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// The variable `X_i`.
    pub fn var(arity: usize, i: usize) -> Self {
        MultiPoly::monomial(ExpVec::unit(arity, i), KElem::ONE)
    }

    /// Builds a polynomial from terms, summing repeated exponents.
    pub fn from_terms<I>(tower: &FieldTower, arity: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExpVec, KElem)>,
    {
        let mut p = MultiPoly::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity);
            p.add_term(tower, e, c);
        }
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExpVec, &KElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &ExpVec) -> KElem {
        self.terms.get(exp).copied().unwrap_or(KElem::ZERO)
    }

    /// Leading term in graded-lex order.
    pub fn leading_term(&self) -> Option<(ExpVec, KElem)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, *c))
    }

    /// Adds `c·X^exp` in place.
    pub fn add_term(&mut self, tower: &FieldTower, exp: ExpVec, c: KElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = tower.add(*o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Inserts a term at an exponent not yet present; zero is ignored.
    pub(crate) fn insert_fresh(&mut self, exp: ExpVec, c: KElem) {
        if !c.is_zero() {
            let prev = self.terms.insert(exp, c);
            debug_assert!(prev.is_none());
        }
    }

    fn check_arity(&self, other: &MultiPoly) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }

    pub fn total_degree(&self) -> Degree {
        // graded-lex puts the heaviest term last
        match self.terms.keys().next_back() {
            None => Degree::NegInf,
            Some(e) => Degree::Finite(e.weight()),
        }
    }

    /// Degree in the variables with index in `vars`.
    pub fn degree_in(&self, vars: std::ops::Range<usize>) -> Degree {
        self.terms
            .keys()
            .map(|e| Degree::Finite(vars.clone().map(|i| e.get(i)).sum()))
            .max()
            .unwrap_or(Degree::NegInf)
    }

    pub fn add(&self, tower: &FieldTower, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        out.add_assign(tower, other);
        Ok(out)
    }

    /// `self += other`; arities must agree.
    pub fn add_assign(&mut self, tower: &FieldTower, other: &MultiPoly) {
        debug_assert_eq!(self.arity, other.arity);
        for (e, c) in &other.terms {
            self.add_term(tower, *e, *c);
        }
    }

    /// `self += c·other`.
    pub fn add_scaled_assign(&mut self, tower: &FieldTower, c: KElem, other: &MultiPoly) {
        debug_assert_eq!(self.arity, other.arity);
        if c.is_zero() {
            return;
        }
        for (e, x) in &other.terms {
            self.add_term(tower, *e, tower.mul(c, *x));
        }
    }

    pub fn neg(&self, tower: &FieldTower) -> MultiPoly {
        MultiPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, tower.neg(*c)))
                .collect(),
        }
    }

    pub fn sub(&self, tower: &FieldTower, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(tower, *e, tower.neg(*c));
        }
        Ok(out)
    }

    pub fn scale(&self, tower: &FieldTower, c: KElem) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.arity);
        }
        MultiPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (*e, tower.mul(c, *x)))
                .collect(),
        }
    }

    pub fn mul(&self, tower: &FieldTower, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_arity(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(MultiPoly::zero(self.arity));
        }
        let mut acc: HashMap<ExpVec, KElem> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let prod = tower.mul(*ca, *cb);
                let slot = acc.entry(ea.add(eb)).or_insert(KElem::ZERO);
                *slot = tower.add(*slot, prod);
            }
        }
        Ok(MultiPoly {
            arity: self.arity,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Multiplies by the monomial `c·X^exp`.
    pub fn mul_monomial(&self, tower: &FieldTower, exp: &ExpVec, c: KElem) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.arity);
        }
        MultiPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.add(exp), tower.mul(*x, c)))
                .collect(),
        }
    }

    pub fn pow(&self, tower: &FieldTower, n: u32) -> MultiPoly {
        let mut out = MultiPoly::one(self.arity);
        for _ in 0..n {
            out = out.mul(tower, self).expect("same arity");
        }
        out
    }

    /// Exact division: returns `self / divisor` when the division leaves no
    /// remainder, `None` otherwise.
    pub fn exact_div(&self, tower: &FieldTower, divisor: &MultiPoly) -> Option<MultiPoly> {
        let (lead_e, lead_c) = divisor.leading_term()?;
        let lead_inv = tower.inv(lead_c).ok()?;
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(self.arity);
        while let Some((e, c)) = rem.leading_term() {
            let shift = e.checked_sub(&lead_e)?;
            let qc = tower.mul(c, lead_inv);
            quot.add_term(tower, shift, qc);
            let neg_qc = tower.neg(qc);
            for (de, dc) in &divisor.terms {
                rem.add_term(tower, de.add(&shift), tower.mul(neg_qc, *dc));
            }
        }
        Some(quot)
    }

    /// Evaluates at a point of `K^arity`.
    pub fn eval(&self, tower: &FieldTower, point: &[KElem]) -> Result<KElem> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        Ok(tower.sum(self.terms.iter().map(|(e, c)| {
            let mut v = *c;
            for (i, &x) in point.iter().enumerate() {
                v = tower.mul(v, tower.pow(x, e.get(i) as u64));
            }
            v
        })))
    }

    /// Substitutes the first `point.len()` variables, returning a polynomial
    /// in the remaining ones.
    pub fn eval_partial(&self, tower: &FieldTower, point: &[KElem]) -> MultiPoly {
        let k = point.len();
        assert!(k <= self.arity);
        let mut out = MultiPoly::zero(self.arity - k);
        for (e, c) in &self.terms {
            let (head, tail) = e.split(k);
            let mut v = *c;
            for (i, &x) in point.iter().enumerate() {
                v = tower.mul(v, tower.pow(x, head.get(i) as u64));
            }
            out.add_term(tower, tail, v);
        }
        out
    }

    /// `f(c_1 X_1, .., c_m X_m)`; every `c_i` must be nonzero.
    pub fn scale_vars(&self, tower: &FieldTower, c: &[KElem]) -> Result<MultiPoly> {
        if c.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: c.len(),
            });
        }
        if c.iter().any(|x| x.is_zero()) {
            return Err(Error::Regime("scale_vars needs nonzero scale factors".into()));
        }
        Ok(self.scale_vars_unchecked(tower, c))
    }

    pub(crate) fn scale_vars_unchecked(&self, tower: &FieldTower, c: &[KElem]) -> MultiPoly {
        MultiPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| {
                    let mut v = *x;
                    for (i, &ci) in c.iter().enumerate() {
                        v = tower.mul(v, tower.pow(ci, e.get(i) as u64));
                    }
                    (*e, v)
                })
                .collect(),
        }
    }

    /// Appends `extra` inert variables after the existing ones.
    pub fn extend_arity(&self, extra: usize) -> MultiPoly {
        let pad = ExpVec::zero(extra);
        MultiPoly {
            arity: self.arity + extra,
            terms: self.terms.iter().map(|(e, c)| (e.concat(&pad), *c)).collect(),
        }
    }

    /// Drops trailing variables that do not occur.
    pub fn truncate_arity(&self, arity: usize) -> Result<MultiPoly> {
        let mut out = MultiPoly::zero(arity);
        for (e, c) in &self.terms {
            let (head, tail) = e.split(arity);
            if tail.weight() != 0 {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: self.arity,
                });
            }
            out.terms.insert(head, *c);
        }
        Ok(out)
    }

    /// Groups terms by the trailing `self.arity - k` exponents: returns the
    /// map `tail exponent -> polynomial in the first k variables`.
    pub fn split_vars(&self, k: usize) -> BTreeMap<ExpVec, MultiPoly> {
        let mut out: BTreeMap<ExpVec, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let (head, tail) = e.split(k);
            out.entry(tail)
                .or_insert_with(|| MultiPoly::zero(k))
                .terms
                .insert(head, *c);
        }
        out
    }

    /// Parses `m=<m>; <coeff>@<e1,..,em>; ...`.
    pub fn parse(tower: &FieldTower, text: &str) -> Result<MultiPoly> {
        let mut parts = text.trim().split(';').map(str::trim);
        let head = parts.next().unwrap_or("");
        let arity: usize = head
            .strip_prefix("m=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Malformed(format!("expected `m=<arity>`, got {head:?}")))?;
        if arity > MAX_VARS {
            return Err(Error::Malformed(format!("arity {arity} too large")));
        }
        let mut p = MultiPoly::zero(arity);
        for part in parts.filter(|s| !s.is_empty()) {
            let (c, e) = part
                .split_once('@')
                .ok_or_else(|| Error::Malformed(format!("bad term {part:?}")))?;
            let c: u32 = c
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("bad coefficient in {part:?}")))?;
            let c = tower.k_elem(c)?;
            let exps: Vec<u32> = if arity == 0 {
                Vec::new()
            } else {
                e.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u32>()
                            .ok()
                            .filter(|&v| v <= u16::MAX as u32)
                            .ok_or_else(|| Error::Malformed(format!("bad exponent in {part:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            if exps.len() != arity {
                return Err(Error::Malformed(format!(
                    "term {part:?} has {} exponents, expected {arity}",
                    exps.len()
                )));
            }
            p.add_term(tower, ExpVec::new(&exps), c);
        }
        Ok(p)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={};", self.arity)?;
        let mut first = true;
        for (e, c) in &self.terms {
            let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            write!(f, "{}{}@{}", if first { " " } else { "; " }, c, exps.join(","))?;
            first = false;
        }
        Ok(())
    }
}

/// Uniformly random coefficients on every `α` with `|α| < k`.
pub fn random_poly_with<R: Rng>(tower: &FieldTower, m: usize, k: u32, rng: &mut R) -> MultiPoly {
    let mut p = MultiPoly::zero(m);
    for e in exps_below(m, k) {
        let c = KElem(rng.gen_range(0..tower.size()));
        p.add_term(tower, e, c);
    }
    p
}

/// Deterministic [`random_poly_with`] seeded by `seed`.
pub fn random_poly(tower: &FieldTower, m: usize, k: u32, seed: u64) -> MultiPoly {
    random_poly_with(tower, m, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A dense univariate polynomial, low degree first, without trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<KElem>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<KElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[KElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> KElem {
        self.coeffs.get(i).copied().unwrap_or(KElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInf,
            n => Degree::Finite(n as u32 - 1),
        }
    }

    pub fn add(&self, tower: &FieldTower, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|i| tower.add(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn mul(&self, tower: &FieldTower, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![KElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = tower.add(out[i + j], tower.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, tower: &FieldTower, x: KElem) -> KElem {
        self.coeffs
            .iter()
            .rev()
            .fold(KElem::ZERO, |acc, &c| tower.add(tower.mul(acc, x), c))
    }

    pub fn to_multi(&self) -> MultiPoly {
        let mut p = MultiPoly::zero(1);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.terms.insert(ExpVec::new(&[i as u32]), c);
            }
        }
        p
    }

    pub fn from_multi(p: &MultiPoly) -> Result<UniPoly> {
        if p.arity() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: p.arity(),
            });
        }
        let n = p.total_degree().finite().map_or(0, |d| d as usize + 1);
        let mut coeffs = vec![KElem::ZERO; n];
        for (e, c) in p.terms() {
            coeffs[e.get(0) as usize] = *c;
        }
        Ok(UniPoly::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower() -> FieldTower {
        FieldTower::build(2, 2).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let t = tower();
        let x1 = MultiPoly::var(2, 0);
        let x2 = MultiPoly::var(2, 1);
        let lhs = x1
            .add(&t, &x2)
            .unwrap()
            .mul(&t, &x1.sub(&t, &x2).unwrap())
            .unwrap();
        let rhs = x1
            .mul(&t, &x1)
            .unwrap()
            .sub(&t, &x2.mul(&t, &x2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn zero_polynomial_has_negative_infinite_degree() {
        assert_eq!(MultiPoly::zero(3).total_degree(), Degree::NegInf);
        assert!(Degree::NegInf < Degree::Finite(0));
        assert_eq!(UniPoly::zero().degree(), Degree::NegInf);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let t = tower();
        let a = MultiPoly::var(2, 0);
        let b = MultiPoly::var(3, 0);
        assert!(matches!(
            a.add(&t, &b),
            Err(Error::ArityMismatch { expected: 2, got: 3 })
        ));
        assert!(a.eval(&t, &[KElem::ONE]).is_err());
    }

    #[test]
    fn eval_matches_substitution() {
        let t = tower();
        let f = MultiPoly::monomial(ExpVec::new(&[2, 1]), KElem::ONE);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = KElem(rng.gen_range(0..64));
            let b = KElem(rng.gen_range(0..64));
            let expect = t.mul(t.mul(a, a), b);
            assert_eq!(f.eval(&t, &[a, b]).unwrap(), expect);
        }
    }

    #[test]
    fn scale_vars_examples() {
        let t = tower();
        let f = random_poly(&t, 2, 4, 1);
        assert_eq!(f.scale_vars(&t, &[KElem::ONE, KElem::ONE]).unwrap(), f);
        let x1x2 = MultiPoly::monomial(ExpVec::new(&[1, 1]), KElem::ONE);
        let scaled = x1x2
            .scale_vars(&t, &[t.q_power(1), t.q_power(2)])
            .unwrap();
        assert_eq!(
            scaled,
            MultiPoly::monomial(ExpVec::new(&[1, 1]), t.q_power(3))
        );
        assert!(matches!(
            f.scale_vars(&t, &[KElem::ZERO, KElem::ONE]),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn graded_lex_small_cases() {
        let order: Vec<Vec<u32>> = exps_below(2, 2).iter().map(|e| e.as_vec()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        for (i, e) in exps_below(2, 2).iter().enumerate() {
            assert_eq!(graded_lex_index(e, 2).unwrap(), i);
        }
        assert_eq!(count_below(2, 3), 6);
        assert!(graded_lex_index(&ExpVec::new(&[1, 1]), 2).is_err());
    }

    #[test]
    fn graded_lex_round_trip_exhaustive() {
        for m in 1..=3 {
            for s in 1..=6 {
                let all = exps_below(m, s);
                assert_eq!(all.len(), count_below(m, s));
                for (i, e) in all.iter().enumerate() {
                    assert_eq!(graded_lex_index(e, s).unwrap(), i);
                    assert_eq!(graded_lex_exp(m, s, i).unwrap(), *e);
                }
                let mut sorted = all.clone();
                sorted.sort();
                assert_eq!(sorted, all, "Ord agrees with the enumeration");
            }
        }
    }

    #[test]
    fn random_poly_is_deterministic() {
        let t = tower();
        assert_eq!(random_poly(&t, 2, 5, 42), random_poly(&t, 2, 5, 42));
        assert!(random_poly(&t, 3, 1, 7).total_degree() <= Degree::Finite(0));
    }

    #[test]
    fn random_coefficients_are_roughly_uniform() {
        let t = tower();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hist = [0u32; 64];
        let draws = 10_000;
        for _ in 0..draws {
            let p = random_poly_with(&t, 1, 1, &mut rng);
            hist[p.coeff(&ExpVec::zero(1)).0 as usize] += 1;
        }
        let expected = draws as f64 / 64.0;
        let chi2: f64 = hist
            .iter()
            .map(|&h| (h as f64 - expected).powi(2) / expected)
            .sum();
        // 63 degrees of freedom; 0.999 quantile is about 104
        assert!(chi2 < 104.0, "chi-square {chi2}");
    }

    #[test]
    fn text_round_trip() {
        let t = tower();
        let f = random_poly(&t, 2, 3, 11);
        let text = f.to_string();
        assert!(text.starts_with("m=2;"));
        assert_eq!(MultiPoly::parse(&t, &text).unwrap(), f);
        assert_eq!(MultiPoly::parse(&t, "m=2;").unwrap(), MultiPoly::zero(2));
        assert!(MultiPoly::parse(&t, "m=2; 5@1").is_err());
        assert!(MultiPoly::parse(&t, "m=1; 99@1").is_err());
    }

    #[test]
    fn exact_division() {
        let t = tower();
        let a = random_poly(&t, 2, 3, 5);
        let b = random_poly(&t, 2, 4, 6);
        let prod = a.mul(&t, &b).unwrap();
        assert_eq!(prod.exact_div(&t, &b).unwrap(), a);
        let x = MultiPoly::var(2, 0);
        let one_plus_y = MultiPoly::one(2).add(&t, &MultiPoly::var(2, 1)).unwrap();
        assert!(x.exact_div(&t, &one_plus_y).is_none());
    }

    #[test]
    fn partial_evaluation_splits_variables() {
        let t = tower();
        let f = random_poly(&t, 3, 4, 8);
        let part = f.eval_partial(&t, &[KElem(3), KElem(7)]);
        assert_eq!(part.arity(), 1);
        for z in [KElem(0), KElem(9), KElem(40)] {
            assert_eq!(
                part.eval(&t, &[z]).unwrap(),
                f.eval(&t, &[KElem(3), KElem(7), z]).unwrap()
            );
        }
    }

    #[test]
    fn unipoly_agrees_with_multipoly() {
        let t = tower();
        let f = random_poly(&t, 1, 6, 2);
        let u = UniPoly::from_multi(&f).unwrap();
        assert_eq!(u.to_multi(), f);
        for x in t.elements().step_by(5) {
            assert_eq!(u.eval(&t, x), f.eval(&t, &[x]).unwrap());
        }
    }
}
