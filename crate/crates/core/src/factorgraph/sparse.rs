//! Sparse symmetric linear algebra for the normal equations: CSC storage,
//! elimination tree, up-looking Cholesky, and a greedy minimum-degree
//! ordering. Follows the algorithms in Davis, "Direct Methods for Sparse
//! Linear Systems" (ch. 4).

use std::collections::BTreeSet;

use nalgebra::DVector;

use crate::scalar::Real;

/// Upper triangle of a symmetric matrix in compressed sparse column form.
/// Row indices within each column are strictly increasing, with the diagonal
/// entry present in every column.
pub struct CscUpper<S> {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<S>,
}

impl<S: Real> CscUpper<S> {
    /// Builds from (row, col, value) triplets with row <= col; duplicate
    /// entries are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, S)>) -> Self {
        debug_assert!(triplets.iter().all(|&(r, c, _)| r <= c && c < n));
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<S> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        CscUpper { n, col_ptr, row_idx, values }
    }
}

/// Lower-triangular Cholesky factor in CSC form; the first entry of each
/// column is its diagonal.
pub struct SparseCholesky<S> {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite;

/// Elimination tree of the symmetric matrix with upper pattern `a`.
fn etree<S>(a: &CscUpper<S>) -> Vec<isize> {
    let n = a.n;
    let mut parent = vec![-1isize; n];
    let mut ancestor = vec![-1isize; n];
    for k in 0..n {
        for p in a.col_ptr[k]..a.col_ptr[k + 1] {
            let mut i = a.row_idx[p] as isize;
            while i != -1 && (i as usize) < k {
                let next = ancestor[i as usize];
                ancestor[i as usize] = k as isize;
                if next == -1 {
                    parent[i as usize] = k as isize;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row k of L (excluding the diagonal), topologically ordered
/// along the elimination tree. Returns `top`; the pattern is `s[top..n]`.
fn ereach<S>(
    a: &CscUpper<S>,
    k: usize,
    parent: &[isize],
    w: &mut [usize],
    s: &mut [usize],
    path: &mut [usize],
) -> usize {
    let n = a.n;
    let mut top = n;
    w[k] = k + 1;
    for p in a.col_ptr[k]..a.col_ptr[k + 1] {
        let mut i = a.row_idx[p];
        if i >= k {
            continue;
        }
        let mut len = 0;
        while w[i] != k + 1 {
            path[len] = i;
            len += 1;
            w[i] = k + 1;
            i = parent[i] as usize;
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            s[top] = path[len];
        }
    }
    top
}

impl<S: Real> SparseCholesky<S> {
    /// Up-looking Cholesky `A = L L^T` of the symmetric matrix with upper
    /// triangle `a`. Fails if a pivot is non-positive or non-finite.
    pub fn factor(a: &CscUpper<S>) -> Result<Self, NotPositiveDefinite> {
        Self::factor_with_tolerance(a, S::zero())
    }

    /// Like [`SparseCholesky::factor`], but also rejects squared pivots at or
    /// below `rel_tol` times the largest diagonal entry of `a`. A singular
    /// positive semidefinite matrix rounds to tiny positive pivots instead of
    /// failing outright, so rank deficiency needs this relative test.
    pub fn factor_with_tolerance(
        a: &CscUpper<S>,
        rel_tol: S,
    ) -> Result<Self, NotPositiveDefinite> {
        let mut scale = S::zero();
        for k in 0..a.n {
            for p in a.col_ptr[k]..a.col_ptr[k + 1] {
                if a.row_idx[p] == k {
                    scale = scale.max(a.values[p].abs());
                }
            }
        }
        Self::factor_inner(a, rel_tol * scale)
    }

    fn factor_inner(a: &CscUpper<S>, pivot_floor: S) -> Result<Self, NotPositiveDefinite> {
        let n = a.n;
        let parent = etree(a);
        let mut w = vec![0usize; n];
        let mut s = vec![0usize; n];
        let mut path = vec![0usize; n];

        // symbolic pass: column counts of L
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(a, k, &parent, &mut w, &mut s, &mut path);
            for &j in &s[top..n] {
                counts[j] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![S::zero(); nnz];
        let mut lnext = col_ptr[..n].to_vec();

        // numeric pass
        let mut x = vec![S::zero(); n];
        w.iter_mut().for_each(|wi| *wi = 0);
        for k in 0..n {
            let top = ereach(a, k, &parent, &mut w, &mut s, &mut path);
            let mut d = S::zero();
            for p in a.col_ptr[k]..a.col_ptr[k + 1] {
                let i = a.row_idx[p];
                if i < k {
                    x[i] = a.values[p];
                } else if i == k {
                    d = a.values[p];
                }
            }
            for &j in &s[top..n] {
                let lkj = x[j] / values[col_ptr[j]];
                x[j] = S::zero();
                for p in col_ptr[j] + 1..lnext[j] {
                    x[row_idx[p]] -= values[p] * lkj;
                }
                d -= lkj * lkj;
                let p = lnext[j];
                lnext[j] += 1;
                row_idx[p] = k;
                values[p] = lkj;
            }
            if !(d > pivot_floor) || !d.is_finite() {
                return Err(NotPositiveDefinite);
            }
            let p = lnext[k];
            lnext[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }
        Ok(SparseCholesky { n, col_ptr, row_idx, values })
    }

    /// Solves `A x = b` given the factorization.
    pub fn solve(&self, b: &DVector<S>) -> DVector<S> {
        let mut x = b.clone();
        // forward: L y = b
        for j in 0..self.n {
            let xj = x[j] / self.values[self.col_ptr[j]];
            x[j] = xj;
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                x[self.row_idx[p]] -= self.values[p] * xj;
            }
        }
        // backward: L^T x = y
        for j in (0..self.n).rev() {
            let mut xj = x[j];
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                xj -= self.values[p] * x[self.row_idx[p]];
            }
            x[j] = xj / self.values[self.col_ptr[j]];
        }
        x
    }
}

/// Greedy minimum-degree ordering on an undirected adjacency structure;
/// returns the elimination order (original indices). Ties break on the
/// smaller index so the result is deterministic.
pub fn min_degree_order(adjacency: &[BTreeSet<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut adj: Vec<BTreeSet<usize>> = adjacency.to_vec();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| !eliminated[i])
            .min_by_key(|&i| (adj[i].len(), i))
            .expect("nodes remain");
        eliminated[v] = true;
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            let set = &mut adj[u];
            set.remove(&v);
            for &wn in &nbrs {
                if wn != u {
                    set.insert(wn);
                }
            }
        }
        adj[v].clear();
        order.push(v);
    }
    order
}
