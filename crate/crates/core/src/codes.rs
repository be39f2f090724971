//! Q-multiplicity codes and folded Reed-Muller codes.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{FieldTower, FqElem, KElem};
use crate::poly::{binomial, count_below, exps_below, ExpVec, MultiPoly, MAX_VARS};
use crate::qcalc::{basis_matrix, q_derive_at, BasisDirection};
use crate::qmult::{grid_points, validate_grid_set};

/// Parameters `(m, s, k, A)` of a code over a field tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    tower: Arc<FieldTower>,
    m: usize,
    s: u32,
    k: u32,
    a: Vec<FqElem>,
}

/// The first `size` nonzero elements of `F_q` by encoding.
pub fn default_eval_set(tower: &FieldTower, size: usize) -> Result<Vec<FqElem>> {
    if size == 0 || size as u32 >= tower.q() {
        return Err(Error::Regime(format!(
            "|A| must lie in 1..={}, got {size}",
            tower.q() - 1
        )));
    }
    Ok(tower.fq_nonzero().take(size).collect())
}

impl CodeParams {
    pub fn new(tower: Arc<FieldTower>, m: usize, s: u32, k: u32, a: Vec<FqElem>) -> Result<Self> {
        if m == 0 || m > MAX_VARS {
            return Err(Error::Regime(format!("m must lie in 1..={MAX_VARS}, got {m}")));
        }
        validate_grid_set(&tower, &a)?;
        let q = tower.q();
        if s == 0 {
            return Err(Error::Regime("s must be at least 1".into()));
        }
        if s > q {
            return Err(Error::Regime(format!("s <= q required (s={s}, q={q})")));
        }
        if s as u64 * q as u64 - 1 >= tower.bracket3() {
            return Err(Error::Regime(format!(
                "s*q - 1 < [3]_q required (s={s}, q={q}, [3]_q={})",
                tower.bracket3()
            )));
        }
        if k == 0 || k as u64 > s as u64 * a.len() as u64 {
            return Err(Error::Regime(format!(
                "1 <= k <= s*|A| required (k={k}, s={s}, |A|={})",
                a.len()
            )));
        }
        // coordinates are distinct iff the per-coordinate points Q^t a are
        let mut seen = HashSet::new();
        for &x in &a {
            for t in 0..s {
                if !seen.insert(tower.mul(tower.q_power(t as i64), tower.embed(x))) {
                    return Err(Error::Regime(
                        "the evaluation points Q^t a are not distinct".into(),
                    ));
                }
            }
        }
        Ok(CodeParams { tower, m, s, k, a })
    }

    /// Parameters with `A` the first `a_size` nonzero elements of `F_q`.
    pub fn with_default_set(
        tower: Arc<FieldTower>,
        m: usize,
        s: u32,
        k: u32,
        a_size: usize,
    ) -> Result<Self> {
        let a = default_eval_set(&tower, a_size)?;
        CodeParams::new(tower, m, s, k, a)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn tower_arc(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eval_set(&self) -> &[FqElem] {
        &self.a
    }

    /// `N = |A|^m`.
    pub fn n_blocks(&self) -> usize {
        self.a.len().pow(self.m as u32)
    }

    /// `C(m+s-1, m)`.
    pub fn block_size(&self) -> usize {
        count_below(self.m, self.s)
    }

    /// Derivative orders `{γ : |γ| < s}` in block order.
    pub fn orders(&self) -> Vec<ExpVec> {
        exps_below(self.m, self.s)
    }

    /// Grid points `A^m` in row-major order.
    pub fn grid(&self) -> Vec<Vec<FqElem>> {
        grid_points(&self.a, self.m)
    }

    /// Grid points embedded in `K`.
    pub fn grid_k(&self) -> Vec<Vec<KElem>> {
        self.grid()
            .into_iter()
            .map(|p| p.into_iter().map(|c| self.tower.embed(c)).collect())
            .collect()
    }

    /// `params m=<m> s=<s> k=<k> A=<csv>`.
    pub fn params_line(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|x| x.0.to_string()).collect();
        format!("params m={} s={} k={} A={}", self.m, self.s, self.k, a.join(","))
    }

    pub fn parse_params_line(tower: Arc<FieldTower>, line: &str) -> Result<Self> {
        let rest = line
            .trim()
            .strip_prefix("params")
            .ok_or_else(|| Error::Malformed(format!("expected a params line, got {line:?}")))?;
        let (mut m, mut s, mut k, mut a) = (None, None, None, None);
        for field in rest.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Malformed(format!("bad field {field:?}")))?;
            let num = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| Error::Malformed(format!("bad number in {field:?}")))
            };
            match key {
                "m" => m = Some(num(val)? as usize),
                "s" => s = Some(num(val)?),
                "k" => k = Some(num(val)?),
                "A" => {
                    a = Some(
                        val.split(',')
                            .map(|x| num(x).and_then(|v| tower.fq_elem(v)))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                _ => return Err(Error::Malformed(format!("unknown field {key:?}"))),
            }
        }
        let missing = |n: &str| Error::Malformed(format!("params line lacks {n}"));
        CodeParams::new(
            tower,
            m.ok_or_else(|| missing("m"))?,
            s.ok_or_else(|| missing("s"))?,
            k.ok_or_else(|| missing("k"))?,
            a.ok_or_else(|| missing("A"))?,
        )
    }

    fn check_message(&self, f: &MultiPoly) -> Result<()> {
        if f.arity() != self.m {
            return Err(Error::ArityMismatch {
                expected: self.m,
                got: f.arity(),
            });
        }
        if let Some(d) = f.total_degree().finite() {
            if d >= self.k {
                return Err(Error::DegreeTooLarge {
                    degree: d as usize,
                    bound: self.k as usize - 1,
                });
            }
        }
        Ok(())
    }

    fn check_shape(&self, cw: &Codeword) -> Result<()> {
        if cw.blocks.len() != self.n_blocks()
            || cw.blocks.iter().any(|b| b.len() != self.block_size())
        {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks of length {}",
                self.n_blocks(),
                self.block_size()
            )));
        }
        Ok(())
    }
}

/// Blocks over the grid in row-major order; each block is indexed by the
/// derivative orders in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub blocks: Vec<Vec<KElem>>,
}

impl Codeword {
    pub fn zero(params: &CodeParams) -> Self {
        Codeword {
            blocks: vec![vec![KElem::ZERO; params.block_size()]; params.n_blocks()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|x| x.is_zero())
    }

    /// Number of nonzero blocks.
    pub fn weight(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.iter().any(|x| !x.is_zero()))
            .count()
    }

    pub fn add(&self, tower: &FieldTower, other: &Codeword) -> Codeword {
        Codeword {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| tower.add(x, y)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, tower: &FieldTower, c: KElem) -> Codeword {
        Codeword {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|&x| tower.mul(c, x)).collect())
                .collect(),
        }
    }

    /// Tower header, params line, then `<index>: <csv>` per block.
    pub fn to_text(&self, params: &CodeParams) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", params.tower().header());
        let _ = writeln!(out, "{}", params.params_line());
        for (i, b) in self.blocks.iter().enumerate() {
            let vals: Vec<String> = b.iter().map(|x| x.0.to_string()).collect();
            let _ = writeln!(out, "{}: {}", i, vals.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<(CodeParams, Codeword)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Malformed("empty codeword file".into()))?;
        let tower = Arc::new(FieldTower::from_header(header)?);
        let params_line = lines
            .next()
            .ok_or_else(|| Error::Malformed("missing params line".into()))?;
        let params = CodeParams::parse_params_line(tower, params_line)?;
        let mut blocks = Vec::with_capacity(params.n_blocks());
        for (expect, line) in lines.enumerate() {
            let (idx, vals) = line
                .split_once(':')
                .ok_or_else(|| Error::Malformed(format!("bad block line {line:?}")))?;
            if idx.trim().parse::<usize>().ok() != Some(expect) {
                return Err(Error::Malformed(format!(
                    "block index {:?}, expected {expect}",
                    idx.trim()
                )));
            }
            let block = vals
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Malformed(format!("bad value in {line:?}")))
                        .and_then(|x| params.tower().k_elem(x))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let cw = Codeword { blocks };
        params.check_shape(&cw).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok((params, cw))
    }
}

/// Block at `a` is `[D^γ f(a)]_{|γ|<s}`.
pub fn encode_qmult(params: &CodeParams, f: &MultiPoly) -> Result<Codeword> {
    params.check_message(f)?;
    let t = params.tower();
    let orders = params.orders();
    Ok(Codeword {
        blocks: params
            .grid_k()
            .iter()
            .map(|a| orders.iter().map(|g| q_derive_at(t, f, g, a)).collect())
            .collect(),
    })
}

/// Block at `a` is `[f(Q^γ a)]_{|γ|<s}`.
pub fn encode_frm(params: &CodeParams, f: &MultiPoly) -> Result<Codeword> {
    params.check_message(f)?;
    let t = params.tower();
    let orders = params.orders();
    let blocks = params
        .grid_k()
        .iter()
        .map(|a| {
            orders
                .iter()
                .map(|g| {
                    let pt: Vec<KElem> = a
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| t.mul(t.q_power(g.get(i) as i64), x))
                        .collect();
                    f.eval(t, &pt).expect("arity checked")
                })
                .collect()
        })
        .collect();
    Ok(Codeword { blocks })
}

/// Applies `ν(a)` (FRM to Q-multiplicity) or `ξ(a)` (the reverse) per block.
pub fn basis_change(
    params: &CodeParams,
    cw: &Codeword,
    direction: BasisDirection,
) -> Result<Codeword> {
    params.check_shape(cw)?;
    let t = params.tower();
    let blocks = params
        .grid_k()
        .iter()
        .zip(&cw.blocks)
        .map(|(a, b)| basis_matrix(t, a, params.s(), direction)?.apply(t, b))
        .collect::<Result<_>>()?;
    Ok(Codeword { blocks })
}

/// Exponents `α` with `|α| < k` and `Σ ⌊α_i/|A|⌋ <= s-1`.
pub fn monomial_basis(params: &CodeParams) -> Vec<ExpVec> {
    let n = params.eval_set().len() as u32;
    exps_below(params.m(), params.k())
        .into_iter()
        .filter(|e| e.iter().map(|x| x / n).sum::<u32>() < params.s())
        .collect()
}

/// Size of [`monomial_basis`].
pub fn dimension(params: &CodeParams) -> u64 {
    monomial_basis(params).len() as u64
}

/// `C(m+k-1, m)`: the message-space dimension, assuming every `|α| < k`
/// lies in the triangle set.
pub fn dimension_closed_form(params: &CodeParams) -> u64 {
    binomial(params.m() as u64 + params.k() as u64 - 1, params.m() as u64)
}

/// `dimension / (block_size · N)`.
pub fn rate(params: &CodeParams) -> Ratio<u64> {
    Ratio::new(
        dimension(params),
        params.block_size() as u64 * params.n_blocks() as u64,
    )
}

pub fn rate_closed_form(params: &CodeParams) -> Ratio<u64> {
    Ratio::new(
        dimension_closed_form(params),
        params.block_size() as u64 * params.n_blocks() as u64,
    )
}

/// `1 - (k-1)/(s|A|)`.
pub fn distance_lb(params: &CodeParams) -> Ratio<u64> {
    let den = params.s() as u64 * params.eval_set().len() as u64;
    Ratio::new(den - (params.k() as u64 - 1), den)
}

/// Number of grid points where the blocks agree.
pub fn agreement(u: &Codeword, v: &Codeword) -> Result<usize> {
    if u.blocks.len() != v.blocks.len()
        || u.blocks.iter().zip(&v.blocks).any(|(a, b)| a.len() != b.len())
    {
        return Err(Error::ShapeMismatch("codewords differ in shape".into()));
    }
    Ok(u.blocks.iter().zip(&v.blocks).filter(|(a, b)| a == b).count())
}

/// Fraction of grid points where the blocks differ.
pub fn block_distance(u: &Codeword, v: &Codeword) -> Result<Ratio<u64>> {
    let agree = agreement(u, v)?;
    let n = u.blocks.len() as u64;
    if n == 0 {
        return Ok(Ratio::from_integer(0));
    }
    Ok(Ratio::new(n - agree as u64, n))
}

/// Replaces `errors` distinct uniformly chosen blocks with uniformly random
/// blocks that differ from the originals.
pub fn corrupt<R: Rng>(
    params: &CodeParams,
    cw: &Codeword,
    errors: usize,
    rng: &mut R,
) -> Result<Codeword> {
    params.check_shape(cw)?;
    if errors > params.n_blocks() {
        return Err(Error::Regime(format!(
            "cannot corrupt {errors} of {} blocks",
            params.n_blocks()
        )));
    }
    let size = params.tower().size();
    let mut out = cw.clone();
    let mut idx = sample(rng, params.n_blocks(), errors).into_vec();
    idx.sort_unstable();
    for i in idx {
        loop {
            let b: Vec<KElem> = (0..params.block_size())
                .map(|_| KElem(rng.gen_range(0..size)))
                .collect();
            if b != cw.blocks[i] {
                out.blocks[i] = b;
                break;
            }
        }
    }
    Ok(out)
}

/// Every message polynomial of degree `< k`, given as coefficient vectors
/// over [`exps_below`]`(m, k)`; only practical for tiny parameters.
pub fn message_from_coeffs(params: &CodeParams, coeffs: &[KElem]) -> MultiPoly {
    let exps = exps_below(params.m(), params.k());
    assert_eq!(exps.len(), coeffs.len());
    MultiPoly::from_terms(
        params.tower(),
        params.m(),
        exps.into_iter().zip(coeffs.iter().copied()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::random_poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(p: u32, e: u32, m: usize, s: u32, k: u32, a: usize) -> CodeParams {
        let t = Arc::new(FieldTower::build(p, e).unwrap());
        CodeParams::with_default_set(t, m, s, k, a).unwrap()
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let p = params(2, 2, 2, 2, 3, 3);
        assert!(encode_qmult(&p, &MultiPoly::zero(2)).unwrap().is_zero());
        assert!(encode_frm(&p, &MultiPoly::zero(2)).unwrap().is_zero());
    }

    #[test]
    fn identity_message_blocks() {
        let p = params(2, 2, 1, 2, 2, 3);
        let t = p.tower();
        let x = MultiPoly::var(1, 0);
        let qm = encode_qmult(&p, &x).unwrap();
        let frm = encode_frm(&p, &x).unwrap();
        for (i, a) in p.grid_k().iter().enumerate() {
            assert_eq!(qm.blocks[i], vec![a[0], KElem::ONE]);
            assert_eq!(frm.blocks[i], vec![a[0], t.mul(t.q_gen(), a[0])]);
        }
        let c = MultiPoly::constant(1, KElem(9));
        assert!(encode_frm(&p, &c)
            .unwrap()
            .blocks
            .iter()
            .all(|b| b.iter().all(|&x| x == KElem(9))));
    }

    #[test]
    fn encoders_related_by_nu() {
        let p = params(13, 1, 2, 3, 5, 3);
        for seed in 0..5 {
            let f = random_poly(p.tower(), 2, 5, seed);
            let frm = encode_frm(&p, &f).unwrap();
            let qm = encode_qmult(&p, &f).unwrap();
            assert_eq!(basis_change(&p, &frm, BasisDirection::Nu).unwrap(), qm);
            assert_eq!(basis_change(&p, &qm, BasisDirection::Xi).unwrap(), frm);
        }
    }

    #[test]
    fn degree_violation_is_rejected() {
        let p = params(2, 2, 1, 2, 2, 3);
        let x2 = MultiPoly::monomial(ExpVec::new(&[2]), KElem::ONE);
        assert!(matches!(
            encode_qmult(&p, &x2),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn rate_and_distance_examples() {
        let p = params(13, 1, 1, 1, 3, 5);
        assert_eq!(dimension(&p), 3);
        assert_eq!(rate(&p), Ratio::new(3, 5));
        let p = params(13, 1, 2, 6, 4, 4);
        assert_eq!(dimension(&p), 10);
        assert_eq!(p.block_size(), 21);
        assert_eq!(rate(&p), Ratio::new(10, 336));
        assert_eq!(rate(&p), rate_closed_form(&p));
        let p = params(2, 2, 1, 3, 3, 3);
        assert_eq!(distance_lb(&p), Ratio::new(7, 9));
    }

    #[test]
    fn parameter_regime() {
        let t = Arc::new(FieldTower::build(2, 2).unwrap());
        assert!(CodeParams::with_default_set(t.clone(), 1, 5, 3, 3).is_err());
        assert!(CodeParams::with_default_set(t.clone(), 1, 2, 7, 3).is_err());
        assert!(CodeParams::with_default_set(t.clone(), 1, 2, 0, 3).is_err());
        assert!(CodeParams::with_default_set(t.clone(), 1, 2, 2, 4).is_err());
        assert!(CodeParams::new(t, 1, 2, 2, vec![FqElem(1), FqElem(1)]).is_err());
    }

    #[test]
    fn distances() {
        let p = params(2, 2, 1, 2, 2, 3);
        let f = random_poly(p.tower(), 1, 2, 3);
        let u = encode_qmult(&p, &f).unwrap();
        assert_eq!(block_distance(&u, &u).unwrap(), Ratio::from_integer(0));
        let mut v = u.clone();
        v.blocks[1][0] = p.tower().add(v.blocks[1][0], KElem::ONE);
        assert_eq!(block_distance(&u, &v).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn corruption_hits_exactly_the_requested_blocks() {
        let p = params(13, 1, 1, 6, 12, 12);
        let f = random_poly(p.tower(), 1, 12, 1);
        let cw = encode_qmult(&p, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(corrupt(&p, &cw, 0, &mut rng).unwrap(), cw);
        let bad = corrupt(&p, &cw, 5, &mut rng).unwrap();
        assert_eq!(agreement(&cw, &bad).unwrap(), 7);
    }

    #[test]
    fn text_round_trip() {
        let p = params(2, 2, 2, 2, 3, 3);
        let f = random_poly(p.tower(), 2, 3, 4);
        let cw = encode_qmult(&p, &f).unwrap();
        let text = cw.to_text(&p);
        let (p2, cw2) = Codeword::parse(&text).unwrap();
        assert_eq!(p2, p);
        assert_eq!(cw2, cw);
        assert_eq!(cw2.to_text(&p2), text);
        let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(Codeword::parse(&truncated), Err(Error::Malformed(_))));
    }
}
