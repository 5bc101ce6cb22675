//! Floating-point linear algebra behind the deflation decisions: numerical
//! rank, choice of the column and row sets, approximate inverses and
//! minimum-norm least squares. Nothing here is rigorous; the interval layer
//! re-checks everything that matters.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("rank threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("no valid {what} selection of size {size} within the candidate pool")]
    NoValidSelection { what: &'static str, size: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Result of [`numerical_rank`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
}

impl RankInfo {
    pub fn sigma_min(&self) -> Option<f64> {
        self.singular_values.last().copied()
    }
}

fn check_finite<T: Scalar>(a: &DMatrix<T>) -> Result<(), LinalgError> {
    if a.iter().all(Scalar::is_finite_value) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Singular values of `a`, descending.
pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> Result<Vec<f64>, LinalgError> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Number of singular values `>= eps`.
pub fn numerical_rank<T: Scalar>(a: &DMatrix<T>, eps: f64) -> Result<RankInfo, LinalgError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(LinalgError::BadThreshold(eps));
    }
    let singular_values = singular_values(a)?;
    let rank = singular_values.iter().take_while(|&&s| s >= eps).count();
    Ok(RankInfo { rank, singular_values })
}

/// How the column set `C` and row set `K` are chosen among valid candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Lexicographically smallest valid subset of the pool; falls back to
    /// [`SelectionRule::PivotedQr`] when the pool has too many subsets.
    #[default]
    Lexicographic,
    /// Greedy column-pivoted Gram-Schmidt, ties broken towards small indices.
    PivotedQr,
}

const MAX_COMBINATIONS: u64 = 50_000;

/// Column set `C` and row set `K` chosen at one deflation order.
///
/// Indices are stored 0-based. `columns` index the original unknowns `x`;
/// `rows` index the equations of the last `n`-row block of the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSets {
    pub order: usize,
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
}

impl SelectionSets {
    pub fn columns_one_based(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c + 1).collect()
    }

    pub fn rows_one_based(&self) -> Vec<usize> {
        self.rows.iter().map(|k| k + 1).collect()
    }

    pub fn corank(&self) -> usize {
        self.columns.len()
    }

    /// True when both sets are contained in the corresponding sets of `outer`.
    pub fn nested_in(&self, outer: &SelectionSets) -> bool {
        self.columns.iter().all(|c| outer.columns.contains(c)) && self.rows.iter().all(|k| outer.rows.contains(k))
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    r
}

/// Calls `f` on every `k`-subset of `pool` in lexicographic order until it
/// returns true; returns that subset.
fn first_combination(pool: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
    if k > pool.len() {
        return None;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut subset = vec![0; k];
    loop {
        for (s, &i) in subset.iter_mut().zip(&idx) {
            *s = pool[i];
        }
        if f(&subset) {
            return Some(subset);
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == pool.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        i -= 1;
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn without_columns<T: Scalar>(a: &DMatrix<T>, removed: &[usize]) -> DMatrix<T> {
    let keep: Vec<usize> = (0..a.ncols()).filter(|j| !removed.contains(j)).collect();
    a.select_columns(&keep)
}

fn with_unit_columns<T: Scalar>(b: &DMatrix<T>, rows: &[usize]) -> DMatrix<T> {
    let m = b.nrows();
    let mut out = DMatrix::zeros(m, b.ncols() + rows.len());
    out.columns_mut(0, b.ncols()).copy_from(b);
    for (i, &k) in rows.iter().enumerate() {
        out[(k, b.ncols() + i)] = T::one();
    }
    out
}

fn min_sv<T: Scalar>(a: &DMatrix<T>, count: usize) -> f64 {
    if count == 0 {
        return f64::INFINITY;
    }
    match singular_values(a) {
        Ok(sv) if sv.len() >= count => sv[count - 1],
        _ => 0.0,
    }
}

/// Greedy pivoted Gram-Schmidt: after projecting out `forced`, picks `count`
/// of `candidates` with the largest residual norms. Ties go to the earlier
/// candidate.
fn greedy_pick<T: Scalar>(forced: &[DVector<T>], candidates: &[DVector<T>], count: usize) -> Vec<usize> {
    let mut basis: Vec<DVector<T>> = Vec::new();
    let scale = forced
        .iter()
        .chain(candidates)
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let push = |basis: &mut Vec<DVector<T>>, v: &DVector<T>| {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in basis.iter() {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        let nr = r.norm();
        if nr > 1e-13 * scale {
            basis.push(r.unscale(nr));
        }
    };
    for v in forced {
        push(&mut basis, v);
    }
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in candidates.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = v.clone();
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dotc(&r);
                    r -= q * c;
                }
            }
            let nr = r.norm();
            if best.is_none_or(|(_, b)| nr > b) {
                best = Some((i, nr));
            }
        }
        match best {
            Some((i, _)) => {
                chosen.push(i);
                push(&mut basis, &candidates[i]);
            }
            None => break,
        }
    }
    chosen
}

/// Chooses `d` columns `C ⊆ pool` such that deleting them from `jac` leaves
/// full numerical column rank, i.e. `σ_{ncols-d} >= eps`.
pub fn select_columns<T: Scalar>(
    jac: &DMatrix<T>,
    d: usize,
    pool: &[usize],
    eps: f64,
    rule: SelectionRule,
) -> Result<Vec<usize>, LinalgError> {
    check_finite(jac)?;
    let n = jac.ncols();
    if d > n || pool.iter().any(|&c| c >= n) {
        return Err(LinalgError::NoValidSelection {
            what: "column",
            size: d,
        });
    }
    let valid = |c: &[usize]| min_sv(&without_columns(jac, c), n - d) >= eps;
    let lex = rule == SelectionRule::Lexicographic && binomial(pool.len(), d) <= MAX_COMBINATIONS;
    let found = if lex {
        first_combination(pool, d, valid)
    } else {
        let forced: Vec<DVector<T>> = (0..n)
            .filter(|j| !pool.contains(j))
            .map(|j| jac.column(j).into_owned())
            .collect();
        let cands: Vec<DVector<T>> = pool.iter().map(|&j| jac.column(j).into_owned()).collect();
        let keep_count = (n - d).checked_sub(forced.len());
        keep_count.and_then(|kc| {
            let kept = greedy_pick(&forced, &cands, kc);
            let mut c: Vec<usize> = pool
                .iter()
                .enumerate()
                .filter(|(i, _)| !kept.contains(i))
                .map(|(_, &j)| j)
                .collect();
            c.sort_unstable();
            (c.len() == d && valid(&c)).then_some(c)
        })
    };
    found.ok_or(LinalgError::NoValidSelection {
        what: "column",
        size: d,
    })
}

/// Chooses `d` rows `K ⊆ pool` such that `[reduced | I_K]` is square with
/// smallest singular value `>= eps`.
pub fn select_rows<T: Scalar>(
    reduced: &DMatrix<T>,
    d: usize,
    pool: &[usize],
    eps: f64,
    rule: SelectionRule,
) -> Result<Vec<usize>, LinalgError> {
    check_finite(reduced)?;
    let m = reduced.nrows();
    if reduced.ncols() + d != m {
        return Err(LinalgError::DimensionMismatch {
            expected: m,
            found: reduced.ncols() + d,
        });
    }
    if pool.iter().any(|&k| k >= m) {
        return Err(LinalgError::NoValidSelection { what: "row", size: d });
    }
    let valid = |k: &[usize]| min_sv(&with_unit_columns(reduced, k), m) >= eps;
    let lex = rule == SelectionRule::Lexicographic && binomial(pool.len(), d) <= MAX_COMBINATIONS;
    let found = if lex {
        first_combination(pool, d, valid)
    } else {
        let forced: Vec<DVector<T>> = reduced.column_iter().map(|c| c.into_owned()).collect();
        let cands: Vec<DVector<T>> = pool
            .iter()
            .map(|&k| {
                let mut e = DVector::zeros(m);
                e[k] = T::one();
                e
            })
            .collect();
        let picked = greedy_pick(&forced, &cands, d);
        let mut k: Vec<usize> = picked.iter().map(|&i| pool[i]).collect();
        k.sort_unstable();
        (k.len() == d && valid(&k)).then_some(k)
    };
    found.ok_or(LinalgError::NoValidSelection { what: "row", size: d })
}

/// Removes the listed columns, keeping the order of the rest.
pub fn delete_columns<T: Scalar>(a: &DMatrix<T>, removed: &[usize]) -> DMatrix<T> {
    without_columns(a, removed)
}

/// Appends unit columns `e_k`, `k ∈ rows`, to `b`.
pub fn append_unit_columns<T: Scalar>(b: &DMatrix<T>, rows: &[usize]) -> DMatrix<T> {
    with_unit_columns(b, rows)
}

/// Approximate inverse by LU with partial pivoting.
pub fn approximate_inverse<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    check_finite(a)?;
    let inv = a.clone().lu().try_inverse().ok_or(LinalgError::Singular)?;
    check_finite(&inv).map_err(|_| LinalgError::Singular)?;
    Ok(inv)
}

/// Minimum-norm least-squares solution of `a · x ≈ rhs` via the SVD.
pub fn least_squares<T: Scalar>(a: &DMatrix<T>, rhs: &DVector<T>) -> Result<DVector<T>, LinalgError> {
    if rhs.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            found: rhs.len(),
        });
    }
    check_finite(a)?;
    if !rhs.iter().all(Scalar::is_finite_value) {
        return Err(LinalgError::NonFinite);
    }
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    if a.nrows() == 0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = a.nrows().max(a.ncols()) as f64 * smax * f64::EPSILON;
    if smax == 0.0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    svd.solve(rhs, tol).map_err(|_| LinalgError::Singular)
}
