//! Exact linear algebra over `K` and fraction-free elimination over `K[Z]`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::{FieldTower, KElem};
use crate::poly::{Degree, ExpVec, MultiPoly};

/// A polynomial in the auxiliary variables `Z`.
pub type PolyZ = MultiPoly;

/// Dense matrix over `K`, row-major.
pub type KMatrix = Vec<Vec<KElem>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(tower: &FieldTower, m: &mut [Vec<KElem>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = tower.inv(m[r][c]).expect("nonzero pivot");
        for x in m[r][c..].iter_mut() {
            *x = tower.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = tower.neg(row[c]);
            for j in c..cols {
                if !pivot_row[j].is_zero() {
                    row[j] = tower.add(row[j], tower.mul(f, pivot_row[j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_k(tower: &FieldTower, m: &[Vec<KElem>], cols: usize) -> usize {
    let mut work = m.to_vec();
    rref(tower, &mut work, cols).len()
}

/// A nonzero `v` with `Mv = 0`, or `None` when the kernel is trivial.
///
/// The first non-pivot column is set to 1 and every other free column to 0.
pub fn nullspace_k(tower: &FieldTower, m: &[Vec<KElem>], cols: usize) -> Option<Vec<KElem>> {
    let mut work = m.to_vec();
    let pivots = rref(tower, &mut work, cols);
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![KElem::ZERO; cols];
    v[free] = KElem::ONE;
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = tower.neg(work[r][free]);
    }
    Some(v)
}

/// Solution set `particular + span(kernel)` of an affine system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<KElem>,
    pub kernel: Vec<Vec<KElem>>,
}

/// Solves `M x = rhs`; `None` when inconsistent.
pub fn solve_affine_k(
    tower: &FieldTower,
    m: &[Vec<KElem>],
    rhs: &[KElem],
    cols: usize,
) -> Option<AffineSolution> {
    let mut work: Vec<Vec<KElem>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let pivots = rref(tower, &mut work, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut particular = vec![KElem::ZERO; cols];
    for (r, &pc) in pivots.iter().enumerate() {
        particular[pc] = work[r][cols];
    }
    let kernel = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![KElem::ZERO; cols];
            v[f] = KElem::ONE;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = tower.neg(work[r][f]);
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, kernel })
}

/// A polynomial kernel vector and its total `Z`-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyZSolution {
    pub vector: Vec<PolyZ>,
    pub z_degree: u32,
}

/// `M v` for a matrix and vector over `K[Z]`.
pub fn mul_polyz(tower: &FieldTower, m: &[Vec<PolyZ>], v: &[PolyZ], z_arity: usize) -> Vec<PolyZ> {
    m.iter()
        .map(|row| {
            let mut acc = PolyZ::zero(z_arity);
            for (a, x) in row.iter().zip(v) {
                if !a.is_zero() && !x.is_zero() {
                    acc.add_assign(tower, &a.mul(tower, x).expect("same arity"));
                }
            }
            acc
        })
        .collect()
}

/// A nonzero polynomial vector `v` with `Mv = 0` identically in `Z`, or
/// `None` when the kernel over `K(Z)` is trivial.
///
/// Columns with only constant entries are eliminated first with ordinary
/// Gaussian steps (all `Z`-monomial layers share the same row operations). The remaining block
/// is reduced with Bareiss fraction-free elimination, pivoting on the entry
/// of least total degree, then least column, then least row. The result is
/// scaled so the leading coefficient of its first nonzero entry is 1.
pub fn nullspace_polyz(
    tower: &FieldTower,
    m: &[Vec<PolyZ>],
    cols: usize,
    z_arity: usize,
) -> Result<Option<PolyZSolution>> {
    let rows = m.len();
    for row in m {
        if row.len() != cols {
            return Err(Error::ShapeMismatch(format!(
                "row of length {} in a matrix with {cols} columns",
                row.len()
            )));
        }
        for e in row {
            if e.arity() != z_arity {
                return Err(Error::ArityMismatch {
                    expected: z_arity,
                    got: e.arity(),
                });
            }
        }
    }

    // layer l holds the coefficient of monomials[l]; layer 0 is the constant
    let mut layer_of: BTreeMap<ExpVec, usize> = BTreeMap::new();
    layer_of.insert(ExpVec::zero(z_arity), 0);
    for row in m {
        for e in row {
            for (mono, _) in e.terms() {
                let next = layer_of.len();
                layer_of.entry(*mono).or_insert(next);
            }
        }
    }
    let mut monomials = vec![ExpVec::zero(z_arity); layer_of.len()];
    for (mono, &l) in &layer_of {
        monomials[l] = *mono;
    }
    let nl = monomials.len();
    // layers[l][i * cols + j]
    let mut layers = vec![vec![KElem::ZERO; rows * cols]; nl];
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            for (mono, c) in e.terms() {
                layers[layer_of[mono]][i * cols + j] = *c;
            }
        }
    }
    let column_is_constant = |layers: &[Vec<KElem>], j: usize| {
        layers[1..]
            .iter()
            .all(|l| (0..rows).all(|i| l[i * cols + j].is_zero()))
    };

    // phase 1: Gauss-Jordan on columns whose entries are all constant, so
    // every row operation has a constant multiplier
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut const_pivots: Vec<(usize, usize)> = Vec::new();
    loop {
        let mut found = None;
        for j in 0..cols {
            if col_used[j] || !column_is_constant(&layers, j) {
                continue;
            }
            if let Some(i) = (0..rows).find(|&i| !row_used[i] && !layers[0][i * cols + j].is_zero()) {
                found = Some((i, j));
                break;
            }
        }
        let Some((pi, pj)) = found else { break };
        let inv = tower.inv(layers[0][pi * cols + pj])?;
        let active: Vec<usize> = (0..cols)
            .filter(|&j| (0..nl).any(|l| !layers[l][pi * cols + j].is_zero()))
            .collect();
        for layer in layers.iter_mut() {
            for &j in &active {
                layer[pi * cols + j] = tower.mul(layer[pi * cols + j], inv);
            }
        }
        for i in 0..rows {
            if i == pi {
                continue;
            }
            let f = layers[0][i * cols + pj];
            if f.is_zero() {
                continue;
            }
            let nf = tower.neg(f);
            for layer in layers.iter_mut() {
                for &j in &active {
                    let p = layer[pi * cols + j];
                    if !p.is_zero() {
                        let slot = &mut layer[i * cols + j];
                        *slot = tower.add(*slot, tower.mul(nf, p));
                    }
                }
            }
        }
        row_used[pi] = true;
        col_used[pj] = true;
        const_pivots.push((pi, pj));
    }

    let entry = |layers: &[Vec<KElem>], i: usize, j: usize| {
        let mut p = PolyZ::zero(z_arity);
        for (l, mono) in monomials.iter().enumerate() {
            p.insert_fresh(*mono, layers[l][i * cols + j]);
        }
        p
    };

    // phase 2: Bareiss on the remaining block
    let rest_rows: Vec<usize> = (0..rows).filter(|&i| !row_used[i]).collect();
    let mut rest_cols: Vec<usize> = (0..cols).filter(|&j| !col_used[j]).collect();
    if rest_cols.is_empty() {
        return Ok(None);
    }
    let mut a: Vec<Vec<PolyZ>> = rest_rows
        .iter()
        .map(|&i| rest_cols.iter().map(|&j| entry(&layers, i, j)).collect())
        .collect();
    let nr = a.len();
    let nc = rest_cols.len();
    let mut prev = PolyZ::one(z_arity);
    let mut rank = 0;
    while rank < nr.min(nc) {
        let k = rank;
        let mut best: Option<(Degree, usize, usize)> = None;
        for j in k..nc {
            for (i, row) in a.iter().enumerate().skip(k) {
                if row[j].is_zero() {
                    continue;
                }
                let key = (row[j].total_degree(), rest_cols[j], i);
                let better = match best {
                    None => true,
                    Some((d, c, r)) => (key.0, key.1, key.2) < (d, rest_cols[c], r),
                };
                if better {
                    best = Some((key.0, j, i));
                }
            }
        }
        let Some((_, pj, pi)) = best else { break };
        a.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            rest_cols.swap(k, pj);
        }
        let pivot = a[k][k].clone();
        for i in k + 1..nr {
            let lead = a[i][k].clone();
            for j in k + 1..nc {
                let mut v = pivot.mul(tower, &a[i][j]).expect("same arity");
                if !lead.is_zero() && !a[k][j].is_zero() {
                    let cross = lead.mul(tower, &a[k][j]).expect("same arity");
                    v = v.sub(tower, &cross).expect("same arity");
                }
                a[i][j] = v.exact_div(tower, &prev).ok_or_else(|| {
                    Error::Internal("fraction-free elimination lost exactness".into())
                })?;
            }
            a[i][k] = PolyZ::zero(z_arity);
        }
        prev = pivot;
        rank += 1;
    }

    // free column: the first remaining non-pivot column by original index
    let free_pos = (rank..nc)
        .min_by_key(|&j| rest_cols[j])
        .expect("a non-pivot column remains");
    let mut x: BTreeMap<usize, PolyZ> = BTreeMap::new();
    let x_free = prev.clone();
    x.insert(rest_cols[free_pos], x_free.clone());
    let mut piv_vals = vec![PolyZ::zero(z_arity); rank];
    for i in (0..rank).rev() {
        let mut acc = a[i][free_pos].mul(tower, &x_free).expect("same arity");
        for j in i + 1..rank {
            if !a[i][j].is_zero() {
                acc.add_assign(tower, &a[i][j].mul(tower, &piv_vals[j]).expect("same arity"));
            }
        }
        let q = acc.neg(tower).exact_div(tower, &a[i][i]).ok_or_else(|| {
            Error::Internal("back substitution division was not exact".into())
        })?;
        piv_vals[i] = q;
    }
    for (i, v) in piv_vals.into_iter().enumerate() {
        x.insert(rest_cols[i], v);
    }

    let mut vector = vec![PolyZ::zero(z_arity); cols];
    for (&j, v) in &x {
        vector[j] = v.clone();
    }
    // phase-1 pivot variables: x_p = -Σ_{j remaining} U[p][j] x_j
    for &(pi, pj) in &const_pivots {
        let mut acc = PolyZ::zero(z_arity);
        for (&j, v) in &x {
            let e = entry(&layers, pi, j);
            if !e.is_zero() && !v.is_zero() {
                acc.add_assign(tower, &e.mul(tower, v).expect("same arity"));
            }
        }
        vector[pj] = acc.neg(tower);
    }

    let first = vector
        .iter()
        .find(|v| !v.is_zero())
        .ok_or_else(|| Error::Internal("kernel vector vanished".into()))?;
    let (_, lc) = first.leading_term().expect("nonzero");
    let scale = tower.inv(lc)?;
    let vector: Vec<PolyZ> = vector.iter().map(|v| v.scale(tower, scale)).collect();
    let z_degree = vector
        .iter()
        .filter_map(|v| v.total_degree().finite())
        .max()
        .unwrap_or(0);
    Ok(Some(PolyZSolution { vector, z_degree }))
}
