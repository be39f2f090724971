//! The field tower `F_q ⊂ K = F_{q^3}` with a canonical generator `Q` of `K^×`.
//!
//! Elements are stored in their canonical integer encoding. An `F_q` element
//! `a` has base-`p` digits equal to its coefficients in the polynomial basis
//! of `F_q` over `F_p`; a `K` element has base-`q` digits equal to its
//! coefficients (themselves `F_q` encodings) in the polynomial basis of `K`
//! over `F_q`. Consequently `F_q` sits inside `K` as the encodings below `q`.
//!
//! Construction is slow-path polynomial arithmetic; once the generator is
//! known, multiplication and addition run through discrete-log and Zech
//! tables.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::qcalc::BracketTable;

/// Largest supported `|K| = q^3`.
pub const MAX_FIELD_SIZE: u64 = 1 << 21;

const NO_LOG: u32 = u32::MAX;

/// An element of the base field `F_q` in canonical encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqElem(pub u32);

/// An element of `K = F_{q^3}` in canonical encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KElem(pub u32);

impl KElem {
    pub const ZERO: KElem = KElem(0);
    pub const ONE: KElem = KElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The tower `F_q ⊂ K = F_{q^3}` together with its arithmetic tables.
///
/// Immutable after construction; share it behind an `Arc`.
#[derive(Clone)]
pub struct FieldTower {
    p: u32,
    e: u32,
    q: u32,
    fq_modulus: Vec<u32>,
    k_modulus: Vec<u32>,
    q_gen: KElem,
    /// `q^3 - 1`, the order of `K^×`.
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg: Vec<u32>,
    brackets: OnceLock<BracketTable>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.e == other.e
            && self.fq_modulus == other.fq_modulus
            && self.k_modulus == other.k_modulus
            && self.q_gen == other.q_gen
    }
}

impl Eq for FieldTower {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`, by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn to_digits(mut x: u32, base: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = x % base;
        x /= base;
    }
    out
}

fn from_digits(digits: &[u32], base: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * base + d)
}

/// Slow-path arithmetic used only while the tower is being built.
struct SlowArith {
    p: u32,
    e: u32,
    q: u32,
    fq_modulus: Vec<u32>,
    k_modulus: Vec<u32>,
}

impl SlowArith {
    /// Digit-wise base-`p` addition; valid for both `F_q` and `K` encodings.
    fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    fn neg(&self, a: u32) -> u32 {
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    fn fq_mul(&self, a: u32, b: u32) -> u32 {
        let e = self.e as usize;
        let p = self.p as u64;
        let da = to_digits(a, self.p, e);
        let db = to_digits(b, self.p, e);
        let mut prod = vec![0u64; 2 * e];
        for i in 0..e {
            for j in 0..e {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        // reduce by the monic modulus of degree e
        for deg in (e..2 * e).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.fq_modulus.iter().enumerate().take(e) {
                let idx = deg - e + i;
                prod[idx] = (prod[idx] + p - (c * m as u64) % p) % p;
            }
            prod[deg] = 0;
        }
        let digits: Vec<u32> = prod[..e].iter().map(|&x| x as u32).collect();
        from_digits(&digits, self.p)
    }

    fn k_mul(&self, a: u32, b: u32) -> u32 {
        let da = to_digits(a, self.q, 3);
        let db = to_digits(b, self.q, 3);
        let mut prod = [0u32; 5];
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] = self.add(prod[i + j], self.fq_mul(da[i], db[j]));
            }
        }
        for deg in (3..5).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for i in 0..3 {
                let t = self.fq_mul(c, self.k_modulus[i]);
                prod[deg - 3 + i] = self.add(prod[deg - 3 + i], self.neg(t));
            }
            prod[deg] = 0;
        }
        from_digits(&prod[..3], self.q)
    }

    fn k_pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut result = 1;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.k_mul(result, b);
            }
            b = self.k_mul(b, b);
            exp >>= 1;
        }
        result
    }
}

/// Remainder of `num` modulo the monic `den`, coefficients in `F_p`.
fn fp_poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let mut r: Vec<u64> = num.iter().map(|&x| x as u64).collect();
    let dd = den.len() - 1;
    while r.len() > dd {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if c != 0 {
            for (i, &m) in den.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p64 - (c * m as u64) % p64) % p64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|x| x as u32).collect()
}

fn fp_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = to_digits(low as u32, p, d);
            divisor.push(1);
            if fp_poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldTower {
    /// Builds the canonical tower for `q = p^e`.
    ///
    /// Both moduli are the lowest-encoding monic irreducibles found by an
    /// ascending scan, and `Q` is the smallest encoding of multiplicative
    /// order `q^3 - 1`.
    pub fn build(p: u32, e: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::Regime(format!("p = {p} is not prime")));
        }
        if e == 0 {
            return Err(Error::Regime("e must be positive".into()));
        }
        let q64 = (p as u64)
            .checked_pow(e)
            .ok_or_else(|| Error::Regime("q = p^e overflows".into()))?;
        if q64 < 4 {
            return Err(Error::Regime(format!("q = {q64} must be at least 4")));
        }
        if q64.saturating_pow(3) > MAX_FIELD_SIZE {
            return Err(Error::Regime(format!(
                "q^3 = {} exceeds the supported field size {MAX_FIELD_SIZE}",
                q64.saturating_pow(3)
            )));
        }
        let q = q64 as u32;

        let fq_modulus = if e == 1 {
            vec![0, 1]
        } else {
            (0..q)
                .map(|low| {
                    let mut poly = to_digits(low, p, e as usize);
                    poly.push(1);
                    poly
                })
                .find(|poly| fp_irreducible(poly, p))
                .ok_or_else(|| Error::Internal("no irreducible modulus for F_q".into()))?
        };

        let mut slow = SlowArith {
            p,
            e,
            q,
            fq_modulus: fq_modulus.clone(),
            k_modulus: Vec::new(),
        };

        let size = q * q * q;
        let mut k_modulus = None;
        for low in 0..size {
            let mut poly = to_digits(low, q, 3);
            poly.push(1);
            // a cubic is irreducible iff it has no root in the base field
            let has_root = (0..q).any(|x| {
                let mut acc = 0;
                for &c in poly.iter().rev() {
                    acc = slow.add(slow.fq_mul(acc, x), c);
                }
                acc == 0
            });
            if !has_root {
                k_modulus = Some(poly);
                break;
            }
        }
        let k_modulus =
            k_modulus.ok_or_else(|| Error::Internal("no irreducible cubic over F_q".into()))?;
        slow.k_modulus = k_modulus.clone();

        let order = size - 1;
        let factors = prime_factors(order as u64);
        let q_gen = (2..size)
            .find(|&x| {
                factors
                    .iter()
                    .all(|&r| slow.k_pow(x, order as u64 / r) != 1)
            })
            .ok_or_else(|| Error::Internal("no generator of K^x found".into()))?;

        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![NO_LOG; size as usize];
        let mut cur = 1u32;
        for i in 0..order as usize {
            if log[cur as usize] != NO_LOG {
                return Err(Error::Internal("generator order check failed".into()));
            }
            exp[i] = cur;
            exp[i + order as usize] = cur;
            log[cur as usize] = i as u32;
            cur = slow.k_mul(cur, q_gen);
        }
        if cur != 1 {
            return Err(Error::Internal("generator order check failed".into()));
        }

        let zech = (0..order as usize)
            .map(|n| {
                let s = slow.add(1, exp[n]);
                if s == 0 {
                    NO_LOG
                } else {
                    log[s as usize]
                }
            })
            .collect();
        let neg = (0..size).map(|a| slow.neg(a)).collect();

        Ok(FieldTower {
            p,
            e,
            q,
            fq_modulus,
            k_modulus,
            q_gen: KElem(q_gen),
            order,
            exp,
            log,
            zech,
            neg,
            brackets: OnceLock::new(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `|K| = q^3`.
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    /// `q^3 - 1`, the multiplicative order of `Q`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `[3]_q = 1 + q + q^2`.
    pub fn bracket3(&self) -> u64 {
        let q = self.q as u64;
        1 + q + q * q
    }

    /// Coefficients of the `F_q` modulus over `F_p`, low degree first.
    pub fn fq_modulus(&self) -> &[u32] {
        &self.fq_modulus
    }

    /// Coefficients (as `F_q` encodings) of the cubic `K` modulus, low degree first.
    pub fn k_modulus(&self) -> &[u32] {
        &self.k_modulus
    }

    /// The canonical generator `Q` of `K^×`.
    pub fn q_gen(&self) -> KElem {
        self.q_gen
    }

    pub fn k_elem(&self, enc: u32) -> Result<KElem> {
        if enc >= self.size() {
            return Err(Error::Malformed(format!(
                "{enc} is not a valid element encoding for a field of size {}",
                self.size()
            )));
        }
        Ok(KElem(enc))
    }

    pub fn fq_elem(&self, enc: u32) -> Result<FqElem> {
        if enc >= self.q {
            return Err(Error::Malformed(format!(
                "{enc} is not a valid F_{} encoding",
                self.q
            )));
        }
        Ok(FqElem(enc))
    }

    /// All elements of `K` in ascending encoding.
    pub fn elements(&self) -> impl Iterator<Item = KElem> {
        (0..self.size()).map(KElem)
    }

    /// Nonzero elements of `F_q` in ascending encoding.
    pub fn fq_nonzero(&self) -> impl Iterator<Item = FqElem> {
        (1..self.q).map(FqElem)
    }

    #[inline]
    pub fn add(&self, a: KElem, b: KElem) -> KElem {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let diff = if lb >= la { lb - la } else { lb + self.order - la };
        let z = self.zech[diff as usize];
        if z == NO_LOG {
            KElem::ZERO
        } else {
            KElem(self.exp[(la + z) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: KElem) -> KElem {
        KElem(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: KElem, b: KElem) -> KElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: KElem, b: KElem) -> KElem {
        if a.0 == 0 || b.0 == 0 {
            return KElem::ZERO;
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        KElem(self.exp[s as usize])
    }

    pub fn inv(&self, a: KElem) -> Result<KElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[a.0 as usize];
        Ok(KElem(self.exp[((self.order - l) % self.order) as usize]))
    }

    pub fn div(&self, a: KElem, b: KElem) -> Result<KElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n` for a nonnegative exponent; `0^0 = 1`.
    #[inline]
    pub fn pow(&self, a: KElem, n: u64) -> KElem {
        if n == 0 {
            return KElem::ONE;
        }
        if a.0 == 0 {
            return KElem::ZERO;
        }
        let l = self.log[a.0 as usize] as u64;
        KElem(self.exp[((l * (n % self.order as u64)) % self.order as u64) as usize])
    }

    /// Discrete logarithm base `Q`, `None` for zero.
    pub fn log(&self, a: KElem) -> Option<u32> {
        match self.log[a.0 as usize] {
            NO_LOG => None,
            l => Some(l),
        }
    }

    /// `Q^t` for any integer `t`, reduced modulo `q^3 - 1`.
    #[inline]
    pub fn q_power(&self, t: i64) -> KElem {
        let n = self.order as i64;
        KElem(self.exp[t.rem_euclid(n) as usize])
    }

    pub fn embed(&self, a: FqElem) -> KElem {
        KElem(a.0)
    }

    /// Whether `x` lies in `F_q`, tested as `x^q = x`.
    pub fn in_subfield(&self, x: KElem) -> bool {
        self.pow(x, self.q as u64) == x
    }

    pub fn fq_add(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.add(KElem(a.0), KElem(b.0)).0)
    }

    pub fn fq_sub(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.sub(KElem(a.0), KElem(b.0)).0)
    }

    pub fn fq_mul(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.mul(KElem(a.0), KElem(b.0)).0)
    }

    pub fn fq_inv(&self, a: FqElem) -> Result<FqElem> {
        Ok(FqElem(self.inv(KElem(a.0))?.0))
    }

    /// Sum of a sequence of elements.
    pub fn sum<I: IntoIterator<Item = KElem>>(&self, it: I) -> KElem {
        it.into_iter().fold(KElem::ZERO, |acc, x| self.add(acc, x))
    }

    /// The cached bracket/factorial table for this tower.
    pub fn brackets(&self) -> &BracketTable {
        self.brackets.get_or_init(|| BracketTable::build(self))
    }

    /// `QMC1 p=<p> e=<e> fqmod=<..> kmod=<..> Q=<int>`.
    pub fn header(&self) -> String {
        let join = |v: &[u32]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "QMC1 p={} e={} fqmod={} kmod={} Q={}",
            self.p,
            self.e,
            join(&self.fq_modulus),
            join(&self.k_modulus),
            self.q_gen.0
        )
    }

    /// Rebuilds a tower from its header line and checks that the stored
    /// moduli and generator match the canonical construction.
    pub fn from_header(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        if parts.next() != Some("QMC1") {
            return Err(Error::Malformed(format!("bad tower header: {line:?}")));
        }
        let mut p = None;
        let mut e = None;
        let mut fqmod = None;
        let mut kmod = None;
        let mut qg = None;
        let parse_list = |v: &str| -> Result<Vec<u32>> {
            v.split(',')
                .map(|x| {
                    x.parse::<u32>()
                        .map_err(|_| Error::Malformed(format!("bad integer {x:?} in header")))
                })
                .collect()
        };
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Malformed(format!("bad header field {part:?}")))?;
            let num = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| Error::Malformed(format!("bad integer {v:?} in header")))
            };
            match key {
                "p" => p = Some(num(value)?),
                "e" => e = Some(num(value)?),
                "fqmod" => fqmod = Some(parse_list(value)?),
                "kmod" => kmod = Some(parse_list(value)?),
                "Q" => qg = Some(num(value)?),
                _ => return Err(Error::Malformed(format!("unknown header field {key:?}"))),
            }
        }
        let missing = || Error::Malformed(format!("incomplete tower header: {line:?}"));
        let tower = FieldTower::build(p.ok_or_else(missing)?, e.ok_or_else(missing)?)?;
        if Some(tower.fq_modulus.clone()) != fqmod
            || Some(tower.k_modulus.clone()) != kmod
            || Some(tower.q_gen.0) != qg
        {
            return Err(Error::Malformed(
                "tower header does not match the canonical construction".into(),
            ));
        }
        Ok(tower)
    }
}
