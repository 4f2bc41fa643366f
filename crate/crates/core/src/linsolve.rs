//! Dense direct solvers: Cholesky for symmetric positive-definite systems and
//! rank-revealing least squares with minimum-norm solutions.
//!
//! Factorizations run single-threaded inside faer so results are identical
//! for every thread count; parallelism lives at the assembly and harness
//! levels instead.

use std::sync::Once;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder::{
    apply_block_householder_sequence_transpose_on_the_left_in_place_scratch,
    apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj,
};
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Conj, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::assembly::{AssembledSystem, Scheme};
use crate::error::{Error, Result};
use crate::scalar::Real;

static SEQUENTIAL: Once = Once::new();

fn sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Spd,
    LeastSquares,
}

impl SolverPath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverPath::Spd => "spd",
            SolverPath::LeastSquares => "least_squares",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstsqReport<T> {
    pub solution: Vec<T>,
    /// `‖A U - L‖₂` over every row of the system.
    pub residual_norm: T,
    pub effective_rank: usize,
    pub rcond_used: T,
    pub method: SolverPath,
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

fn dense_residual<T: Real>(a: MatRef<'_, T>, x: &[T], b: &[T]) -> T {
    let r: Vec<T> = (0..a.nrows())
        .map(|i| (0..a.ncols()).fold(T::zero(), |s, j| s + a[(i, j)] * x[j]) - b[i])
        .collect();
    norm2(&r)
}

fn check_finite<T: Real>(a: MatRef<'_, T>, b: &[T]) -> Result<()> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::invalid("empty system"));
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::invalid(format!("non-finite matrix entry at ({i}, {j})")));
            }
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite right-hand side"));
    }
    Ok(())
}

/// Default pivot-ratio tolerance for [`solve_spd`].
pub fn default_spd_tol<T: Real>(n: usize) -> T {
    T::epsilon() * T::from_usize_lossy(n.max(1))
}

/// Cholesky solve. Fails with [`Error::NotPositiveDefinite`] when the
/// factorization breaks down, and with [`Error::IllConditioned`] when
/// `min L_ii² / max L_ii²` falls below the default tolerance.
pub fn solve_spd<T: Real>(a: MatRef<'_, T>, l: &[T]) -> Result<LstsqReport<T>> {
    solve_spd_with_tol(a, l, default_spd_tol(a.nrows()))
}

pub fn solve_spd_with_tol<T: Real>(a: MatRef<'_, T>, l: &[T], tol: T) -> Result<LstsqReport<T>> {
    sequential();
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    check_finite(a, l)?;
    let llt = a.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    let factor = llt.L();
    let n = a.nrows();
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    for i in 0..n {
        let d = factor[(i, i)] * factor[(i, i)];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let ratio = lo / hi;
    if !(ratio >= tol) {
        return Err(Error::IllConditioned {
            ratio: ratio.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        });
    }
    let mut x = Mat::from_fn(n, 1, |i, _| l[i]);
    solve_lower_triangular_in_place(factor, x.as_mut(), Par::Seq);
    solve_upper_triangular_in_place(factor.transpose(), x.as_mut(), Par::Seq);
    let solution: Vec<T> = (0..n).map(|i| x[(i, 0)]).collect();
    Ok(LstsqReport {
        residual_norm: dense_residual(a, &solution, l),
        solution,
        effective_rank: n,
        rcond_used: tol,
        method: SolverPath::Spd,
    })
}

/// Default rank cutoff `eps * max(rows, cols)`.
pub fn default_rcond<T: Real>(rows: usize, cols: usize) -> T {
    T::epsilon() * T::from_usize_lossy(rows.max(cols))
}

/// Applies `Qᵀ` of a Householder factorization to `rhs` in place.
fn apply_qt<T: Real>(basis: MatRef<'_, T>, coeff: MatRef<'_, T>, rhs: &mut Mat<T>) {
    let req = apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<T>(
        basis.nrows(),
        coeff.nrows(),
        rhs.ncols(),
    );
    let mut buf = MemBuffer::new(req);
    apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
        basis,
        coeff,
        Conj::No,
        rhs.as_mut(),
        Par::Seq,
        MemStack::new(&mut buf),
    );
}

/// Pivoted factorization of a block in rank-revealing form.
struct Pivoted<T> {
    /// Upper-trapezoidal `min(m, n) x n` factor.
    r: Mat<T>,
    /// `perm[j]` is the original column placed at position `j`.
    perm: Vec<usize>,
}

/// Column-pivoted QR, preceded by an unpivoted QR when the matrix is tall so
/// that pivoting only touches a square factor.
fn pivoted_qr<T: Real>(a: MatRef<'_, T>) -> Pivoted<T> {
    sequential();
    let pre;
    let work = if a.nrows() > a.ncols() {
        pre = a.qr().thin_R().to_owned();
        pre.as_ref()
    } else {
        a
    };
    let cp = work.col_piv_qr();
    Pivoted {
        r: cp.thin_R().to_owned(),
        perm: cp.P().arrays().0.to_vec(),
    }
}

/// Minimum-norm least squares through the SVD: `U` minimizes `‖A U - L‖₂`
/// and has minimum norm among minimizers; singular values at or below
/// `rcond * sigma_max` are treated as zero. Tall matrices are first reduced
/// to their square `R` factor. `rcond = None` uses `eps * max(rows, cols)`.
pub fn solve_lstsq<T: Real>(a: MatRef<'_, T>, l: &[T], rcond: Option<T>) -> Result<LstsqReport<T>> {
    check_finite(a, l)?;
    let rcond = rcond.unwrap_or_else(|| default_rcond(a.nrows(), a.ncols()));
    if !(rcond >= T::zero()) {
        return Err(Error::invalid(format!("rcond must be non-negative, got {rcond}")));
    }
    sequential();
    let (m, n) = (a.nrows(), a.ncols());
    let (core, c) = if m > n {
        let qr = a.qr();
        let mut rhs = Mat::from_fn(m, 1, |i, _| l[i]);
        apply_qt(qr.Q_basis(), qr.Q_coeff(), &mut rhs);
        (qr.thin_R().to_owned(), (0..n).map(|i| rhs[(i, 0)]).collect::<Vec<_>>())
    } else {
        (a.to_owned(), l.to_vec())
    };
    let svd = core
        .thin_svd()
        .map_err(|e| Error::invalid(format!("singular value decomposition failed: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).fold(T::zero(), |acc, k| acc.max(s[k]));
    let cutoff = rcond * smax;
    let mut solution = vec![T::zero(); n];
    let mut rank = 0;
    for k in 0..s.nrows() {
        if !(s[k] > cutoff) {
            continue;
        }
        rank += 1;
        let coef = (0..c.len()).fold(T::zero(), |acc, i| acc + u[(i, k)] * c[i]) / s[k];
        for (j, x) in solution.iter_mut().enumerate() {
            *x = *x + coef * v[(j, k)];
        }
    }
    Ok(LstsqReport {
        residual_norm: dense_residual(a, &solution, l),
        solution,
        effective_rank: rank,
        rcond_used: rcond,
        method: SolverPath::LeastSquares,
    })
}

/// How [`solve_system`] treats an assembled system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T> {
    /// `None` selects `eps * max(rows, cols)` of the full stacked system.
    pub rcond: Option<T>,
    /// Try Cholesky first on symmetric square systems.
    pub try_spd: bool,
    /// Largest system handed to the dense Cholesky path.
    pub spd_max_dofs: usize,
    /// Systems with at most this many unknowns are solved by a dense SVD;
    /// larger ones are compressed per element first.
    pub dense_max_dofs: usize,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            rcond: None,
            try_spd: true,
            spd_max_dofs: 6000,
            dense_max_dofs: 2600,
        }
    }
}

/// Per-element column selection feeding the global solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Compression {
    /// Kept local column indices of every element, in pivot order.
    pub kept: Vec<Vec<usize>>,
}

impl Compression {
    pub fn total(&self) -> usize {
        self.kept.iter().map(Vec::len).sum()
    }
}

/// Rows of `sys` touching column block `k`, as a dense matrix.
fn column_block<T: Real>(sys: &AssembledSystem<T>, k: usize, a2_rows: &[usize]) -> Mat<T> {
    let m = sys.m;
    let blocks: Vec<&Mat<T>> = sys
        .a1
        .iter()
        .filter(|((_, c), _)| *c == k)
        .map(|(_, b)| b)
        .collect();
    let rows = blocks.len() * m + a2_rows.len();
    let mut out = Mat::zeros(rows, m);
    for (bi, b) in blocks.iter().enumerate() {
        out.as_mut().submatrix_mut(bi * m, 0, m, m).copy_from(*b);
    }
    for (ri, &row) in a2_rows.iter().enumerate() {
        for (e, vals) in &sys.a2[row].entries {
            if *e == k {
                for (j, &v) in vals.iter().enumerate() {
                    out[(blocks.len() * m + ri, j)] = out[(blocks.len() * m + ri, j)] + v;
                }
            }
        }
    }
    out
}

/// Selects, per element, the leading pivoted columns whose `|R_jj|` exceeds
/// `rcond` times the largest leading pivot over all elements.
pub fn compress_columns<T: Real>(sys: &AssembledSystem<T>, rcond: T) -> Compression {
    use rayon::prelude::*;
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); sys.n_elements];
    for (i, row) in sys.a2.iter().enumerate() {
        for (e, _) in &row.entries {
            if touching[*e].last() != Some(&i) {
                touching[*e].push(i);
            }
        }
    }
    let factored: Vec<(Vec<T>, Vec<usize>)> = (0..sys.n_elements)
        .into_par_iter()
        .map(|k| {
            let block = column_block(sys, k, &touching[k]);
            let piv = pivoted_qr(block.as_ref());
            let kk = piv.r.nrows().min(piv.r.ncols());
            ((0..kk).map(|i| piv.r[(i, i)].abs()).collect(), piv.perm)
        })
        .collect();
    let scale = factored
        .iter()
        .filter_map(|(d, _)| d.first().copied())
        .fold(T::zero(), |a, b| a.max(b));
    let cutoff = rcond * scale;
    Compression {
        kept: factored
            .into_iter()
            .map(|(diag, perm)| {
                let r = diag.iter().take_while(|&&d| d > cutoff).count();
                perm[..r].to_vec()
            })
            .collect(),
    }
}

/// Least squares on the columns kept by `compression`; an unpivoted QR
/// handles the well-posed case and the rank-revealing path covers the rest.
fn reduced_lstsq<T: Real>(sys: &AssembledSystem<T>, compression: &Compression, rcond: T) -> (Vec<T>, usize) {
    let m = sys.m;
    let n_dofs = sys.n_dofs();
    let mut offsets = Vec::with_capacity(sys.n_elements);
    let mut acc = 0;
    for kept in &compression.kept {
        offsets.push(acc);
        acc += kept.len();
    }
    let cols = acc;
    let rows = sys.n_rows();
    let mut a = Mat::<T>::zeros(rows, cols);
    for (&(r, c), b) in &sys.a1 {
        for (jj, &j) in compression.kept[c].iter().enumerate() {
            for i in 0..m {
                a[(r * m + i, offsets[c] + jj)] = a[(r * m + i, offsets[c] + jj)] + b[(i, j)];
            }
        }
    }
    for (ri, row) in sys.a2.iter().enumerate() {
        for (e, vals) in &row.entries {
            for (jj, &j) in compression.kept[*e].iter().enumerate() {
                a[(n_dofs + ri, offsets[*e] + jj)] = a[(n_dofs + ri, offsets[*e] + jj)] + vals[j];
            }
        }
    }
    let mut b = sys.l1.clone();
    b.extend(sys.l2());
    let mut solution = vec![T::zero(); n_dofs];
    if cols == 0 {
        return (solution, 0);
    }

    let (y, rank) = if rows >= cols {
        sequential();
        let qr = a.qr();
        let mut rhs = Mat::from_fn(rows, 1, |i, _| b[i]);
        apply_qt(qr.Q_basis(), qr.Q_coeff(), &mut rhs);
        let r = qr.thin_R();
        let (lo, hi) = (0..cols).fold((T::infinity(), T::zero()), |(lo, hi), i| {
            let d = r[(i, i)].abs();
            (lo.min(d), hi.max(d))
        });
        if lo > rcond * hi {
            let mut w = rhs.as_ref().submatrix(0, 0, cols, 1).to_owned();
            solve_upper_triangular_in_place(r, w.as_mut(), Par::Seq);
            ((0..cols).map(|i| w[(i, 0)]).collect::<Vec<_>>(), cols)
        } else {
            let c: Vec<T> = (0..cols).map(|i| rhs[(i, 0)]).collect();
            let rep = solve_lstsq(r, &c, Some(rcond)).expect("finite triangular factor");
            (rep.solution, rep.effective_rank)
        }
    } else {
        let rep = solve_lstsq(a.as_ref(), &b, Some(rcond)).expect("finite reduced system");
        (rep.solution, rep.effective_rank)
    };
    for (k, kept) in compression.kept.iter().enumerate() {
        for (jj, &j) in kept.iter().enumerate() {
            solution[k * m + j] = y[offsets[k] + jj];
        }
    }
    (solution, rank)
}

fn check_system<T: Real>(sys: &AssembledSystem<T>) -> Result<()> {
    let bad = sys.a1.values().any(|b| {
        (0..b.ncols()).any(|j| (0..b.nrows()).any(|i| !b[(i, j)].is_finite()))
    }) || sys.l1.iter().any(|v| !v.is_finite())
        || sys
            .a2
            .iter()
            .any(|r| !r.rhs.is_finite() || r.entries.iter().any(|(_, v)| v.iter().any(|x| !x.is_finite())));
    if bad {
        return Err(Error::invalid("assembled system has non-finite entries"));
    }
    Ok(())
}

/// Solves an assembled system. Symmetric square systems try Cholesky first
/// and fall back to least squares. Least squares runs as one dense SVD for
/// moderate sizes, and as column compression per element followed by a
/// global solve otherwise.
pub fn solve_system<T: Real>(sys: &AssembledSystem<T>, opts: &SolveOptions<T>) -> Result<LstsqReport<T>> {
    check_system(sys)?;
    let n = sys.n_dofs();
    let rcond = opts.rcond.unwrap_or_else(|| default_rcond(sys.n_rows(), n));
    let symmetric = sys.scheme == Scheme::Dg && !sys.space_time && sys.a2.is_empty();
    if opts.try_spd && symmetric && n <= opts.spd_max_dofs {
        let a = sys.a1_dense();
        match solve_spd(a.as_ref(), &sys.l1) {
            Ok(rep) => return Ok(rep),
            Err(e @ (Error::NotPositiveDefinite | Error::IllConditioned { .. })) => {
                log::debug!("cholesky rejected ({e}); falling back to least squares");
            }
            Err(e) => return Err(e),
        }
    }
    if n <= opts.dense_max_dofs {
        let (a, l) = sys.stacked_dense();
        return solve_lstsq(a.as_ref(), &l, Some(rcond));
    }
    let compression = compress_columns(sys, rcond);
    let (solution, rank) = reduced_lstsq(sys, &compression, rcond);
    Ok(LstsqReport {
        residual_norm: norm2(&sys.residual(&solution)),
        solution,
        effective_rank: rank,
        rcond_used: rcond,
        method: SolverPath::LeastSquares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn spd_identity_and_singular() {
        let a = Mat::<f64>::identity(3, 3);
        let r = solve_spd(a.as_ref(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.solution, vec![1.0, 2.0, 3.0]);
        assert_eq!(r.method, SolverPath::Spd);
        let d = mat(&[&[1.0, 0.0, 0.0], &[0.0, 1e-20, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(matches!(
            solve_spd(d.as_ref(), &[1.0, 1.0, 1.0]),
            Err(Error::IllConditioned { .. } | Error::NotPositiveDefinite)
        ));
        let neg = mat(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(solve_spd(neg.as_ref(), &[1.0, 1.0]), Err(Error::NotPositiveDefinite)));
        assert!(matches!(
            solve_spd(Mat::<f64>::zeros(2, 3).as_ref(), &[1.0, 1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn scalar_mean() {
        let a = mat(&[&[1.0], &[1.0]]);
        let r = solve_lstsq(a.as_ref(), &[0.0, 2.0], None).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-15);
        assert!((r.residual_norm - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.effective_rank, 1);
    }

    #[test]
    fn wide_minimum_norm() {
        let a = mat(&[&[1.0, 1.0]]);
        let r = solve_lstsq(a.as_ref(), &[2.0], None).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-15 && (r.solution[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let a = mat(&[&[1.0, f64::NAN]]);
        assert!(matches!(solve_lstsq(a.as_ref(), &[1.0], None), Err(Error::InvalidArgument(_))));
        let b = mat(&[&[1.0, 1.0]]);
        assert!(solve_lstsq(b.as_ref(), &[f64::INFINITY], None).is_err());
    }
}
