//! Global systems for the stationary and space-time schemes.
//!
//! The Galerkin block `A1` is stored by element blocks: entry `(K, K')` holds
//! the `M x M` matrix of `a(phi_j^{K'}, phi_i^K)` with test index `i` along
//! the rows. Constraint rows are sparse over elements.

mod elliptic;
mod spacetime;

use std::collections::BTreeMap;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{FeatureTable, LocalBasis};
use crate::error::{Error, Result};
use crate::geometry::{Face, Partition, Side};
use crate::quadrature::{face_rule, map_to_element, tensor_rule, PhysicalRule, QuadRule};
use crate::scalar::{Point, Real};

pub use elliptic::{assemble_lrnn_c0dg, assemble_lrnn_c1dg, assemble_lrnn_c1dg_with, assemble_lrnn_dg};
pub use spacetime::{assemble_st_lrnn_c0dg, assemble_st_lrnn_c1dg, assemble_st_lrnn_dg, TracePolicy};

/// The three gluing strategies; the C0 variant comes in two flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Dg,
    C0dg,
    C0dgNonsym,
    C1dg,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Dg => "dg",
            Scheme::C0dg => "c0dg",
            Scheme::C0dgNonsym => "c0dg_nonsym",
            Scheme::C1dg => "c1dg",
        }
    }

    pub const ALL: [Scheme; 4] = [Scheme::Dg, Scheme::C0dg, Scheme::C0dgNonsym, Scheme::C1dg];
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gauss points per axis for element integrals and per edge for face integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadSpec {
    pub per_axis: usize,
    pub face: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { per_axis: 70, face: 70 }
    }
}

impl QuadSpec {
    pub fn uniform(n: usize) -> Self {
        Self { per_axis: n, face: n }
    }
}

/// `η = eta_e / h_f` on every face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltySpec<T> {
    pub eta_e: T,
}

impl<T: Real> PenaltySpec<T> {
    pub fn new(eta_e: T) -> Result<Self> {
        if !(eta_e > T::zero()) || !eta_e.is_finite() {
            return Err(Error::invalid(format!("penalty eta_e must be positive, got {eta_e}")));
        }
        Ok(Self { eta_e })
    }

    pub fn eta(&self, face: &Face<T>) -> T {
        self.eta_e / face.h_f
    }
}

/// Collocation points per face, indexed by face id.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet<T> {
    pub points: Vec<Vec<Point<T>>>,
}

impl<T: Real> CollocationSet<T> {
    /// `n` equally spaced points in the open interior of every edge; point
    /// faces of a 1-d grid always carry their single point.
    pub fn uniform(partition: &Partition<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("collocation needs at least one point per face"));
        }
        let dim = partition.dim();
        let points = partition
            .faces()
            .iter()
            .map(|f| {
                if dim == 1 {
                    return vec![f.lower];
                }
                let t = 1 - f.axis;
                let (lo, hi) = (f.lower[t], f.upper[t]);
                let denom = T::from_usize_lossy(n + 1);
                (0..n)
                    .map(|k| {
                        let mut p = f.lower;
                        p[t] = lo + (hi - lo) * T::from_usize_lossy(k + 1) / denom;
                        p
                    })
                    .collect()
            })
            .collect();
        Ok(Self { points })
    }

    pub fn on(&self, face: usize) -> &[Point<T>] {
        self.points.get(face).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count_where(&self, partition: &Partition<T>, pred: impl Fn(&Face<T>) -> bool) -> usize {
        partition
            .faces()
            .iter()
            .filter(|f| pred(f))
            .map(|f| self.on(f.id).len())
            .sum()
    }

    /// `N_∂`: points on boundary faces.
    pub fn n_boundary(&self, partition: &Partition<T>) -> usize {
        self.count_where(partition, |f| !f.is_interior())
    }

    /// `N_in`: points on interior faces.
    pub fn n_interior(&self, partition: &Partition<T>) -> usize {
        self.count_where(partition, |f| f.is_interior())
    }

    fn require(&self, partition: &Partition<T>, pred: impl Fn(&Face<T>) -> bool) -> Result<()> {
        if self.points.len() != partition.faces().len() {
            return Err(Error::DimensionMismatch(format!(
                "collocation set covers {} faces, partition has {}",
                self.points.len(),
                partition.faces().len()
            )));
        }
        for f in partition.faces().iter().filter(|f| pred(f)) {
            if self.on(f.id).is_empty() {
                return Err(Error::invalid(format!("face {} has no collocation points", f.id)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Dirichlet,
    Initial,
    C0Jump,
    FluxJump,
    TangentialJump,
}

/// Where a constraint row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowLabel {
    pub face: usize,
    pub point: usize,
    pub kind: RowKind,
}

/// One pointwise linear condition: `sum_K entries[K] . u^K = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow<T> {
    pub entries: Vec<(usize, Vec<T>)>,
    pub rhs: T,
}

/// `[A1; A2] U = [L1; L2]` with `A2` possibly empty.
#[derive(Clone, Debug)]
pub struct AssembledSystem<T> {
    pub scheme: Scheme,
    pub space_time: bool,
    pub n_elements: usize,
    /// Features per element.
    pub m: usize,
    pub a1: BTreeMap<(usize, usize), Mat<T>>,
    pub l1: Vec<T>,
    pub a2: Vec<ConstraintRow<T>>,
    pub row_labels: Vec<RowLabel>,
}

impl<T: Real> AssembledSystem<T> {
    pub fn n_dofs(&self) -> usize {
        self.n_elements * self.m
    }

    pub fn n_rows(&self) -> usize {
        self.n_dofs() + self.a2.len()
    }

    pub fn l2(&self) -> Vec<T> {
        self.a2.iter().map(|r| r.rhs).collect()
    }

    pub fn a1_dense(&self) -> Mat<T> {
        let m = self.m;
        let n = self.n_dofs();
        let mut a = Mat::zeros(n, n);
        for (&(r, c), b) in &self.a1 {
            a.as_mut().submatrix_mut(r * m, c * m, m, m).copy_from(b);
        }
        a
    }

    pub fn a2_dense(&self) -> Mat<T> {
        let mut a = Mat::zeros(self.a2.len(), self.n_dofs());
        for (i, row) in self.a2.iter().enumerate() {
            for (k, vals) in &row.entries {
                for (j, &v) in vals.iter().enumerate() {
                    a[(i, k * self.m + j)] = a[(i, k * self.m + j)] + v;
                }
            }
        }
        a
    }

    /// Dense `[A1; A2]` and `[L1; L2]`.
    pub fn stacked_dense(&self) -> (Mat<T>, Vec<T>) {
        let n = self.n_dofs();
        let mut a = Mat::zeros(self.n_rows(), n);
        a.as_mut().submatrix_mut(0, 0, n, n).copy_from(self.a1_dense());
        if !self.a2.is_empty() {
            a.as_mut()
                .submatrix_mut(n, 0, self.a2.len(), n)
                .copy_from(self.a2_dense());
        }
        let mut l = self.l1.clone();
        l.extend(self.l2());
        (a, l)
    }

    pub fn apply_a1(&self, u: &[T]) -> Vec<T> {
        let m = self.m;
        let mut out = vec![T::zero(); self.n_dofs()];
        for (&(r, c), b) in &self.a1 {
            for i in 0..m {
                let mut s = T::zero();
                for j in 0..m {
                    s = s + b[(i, j)] * u[c * m + j];
                }
                out[r * m + i] = out[r * m + i] + s;
            }
        }
        out
    }

    pub fn apply_a2(&self, u: &[T]) -> Vec<T> {
        self.a2
            .iter()
            .map(|row| {
                row.entries.iter().fold(T::zero(), |acc, (k, vals)| {
                    acc + vals
                        .iter()
                        .enumerate()
                        .fold(T::zero(), |s, (j, &v)| s + v * u[k * self.m + j])
                })
            })
            .collect()
    }

    /// Stacked residual `[A1; A2] u - [L1; L2]`.
    pub fn residual(&self, u: &[T]) -> Vec<T> {
        let mut r: Vec<T> = self
            .apply_a1(u)
            .into_iter()
            .zip(&self.l1)
            .map(|(a, &l)| a - l)
            .collect();
        r.extend(self.apply_a2(u).into_iter().zip(&self.a2).map(|(a, row)| a - row.rhs));
        r
    }

    /// `(max |A1 - A1^T|, max |A1|)`.
    pub fn a1_symmetry_defect(&self) -> (T, T) {
        let mut defect = T::zero();
        let mut scale = T::zero();
        for (&(r, c), b) in &self.a1 {
            let tr = self.a1.get(&(c, r));
            for i in 0..self.m {
                for j in 0..self.m {
                    scale = scale.max(b[(i, j)].abs());
                    let other = tr.map(|t| t[(j, i)]).unwrap_or(T::zero());
                    defect = defect.max((b[(i, j)] - other).abs());
                }
            }
        }
        (defect, scale)
    }

    /// Multiplies every constraint row and its right-hand side by `s`.
    pub fn scale_constraints(&mut self, s: T) {
        for row in &mut self.a2 {
            row.rhs = row.rhs * s;
            for (_, vals) in &mut row.entries {
                vals.iter_mut().for_each(|v| *v = *v * s);
            }
        }
    }
}

/// `aᵀ diag(w) b`.
pub(crate) fn weighted_gram<T: Real>(a: MatRef<'_, T>, w: &[T], b: MatRef<'_, T>) -> Mat<T> {
    let mut out = Mat::zeros(a.ncols(), b.ncols());
    weighted_gram_add(&mut out, T::one(), a, w, b);
    out
}

/// `dst += alpha aᵀ diag(w) b`.
pub(crate) fn weighted_gram_add<T: Real>(dst: &mut Mat<T>, alpha: T, a: MatRef<'_, T>, w: &[T], b: MatRef<'_, T>) {
    let wb = Mat::from_fn(b.nrows(), b.ncols(), |i, j| w[i] * b[(i, j)]);
    matmul(dst.as_mut(), Accum::Add, a.transpose(), wb.as_ref(), alpha, Par::Seq);
}

/// `aᵀ diag(w) g`.
pub(crate) fn weighted_project<T: Real>(a: MatRef<'_, T>, w: &[T], g: &[T]) -> Vec<T> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).fold(T::zero(), |s, q| s + a[(q, j)] * w[q] * g[q]))
        .collect()
}

pub(crate) fn scaled<T: Real>(m: MatRef<'_, T>, s: T) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| s * m[(i, j)])
}

pub(crate) fn check_bases<T: Real>(partition: &Partition<T>, bases: &[LocalBasis<T>]) -> Result<usize> {
    if bases.len() != partition.n_elements() {
        return Err(Error::invalid(format!(
            "{} bases for {} elements",
            bases.len(),
            partition.n_elements()
        )));
    }
    let m = bases.first().map(LocalBasis::len).unwrap_or(0);
    if m == 0 {
        return Err(Error::invalid("empty basis"));
    }
    for (i, b) in bases.iter().enumerate() {
        if b.element_id() != i {
            return Err(Error::invalid(format!("basis {i} belongs to element {}", b.element_id())));
        }
        if b.len() != m {
            return Err(Error::invalid(format!("basis {i} has {} features, expected {m}", b.len())));
        }
        if b.dim() != partition.dim() {
            return Err(Error::invalid(format!(
                "basis {i} is {}-dimensional on a {}-dimensional partition",
                b.dim(),
                partition.dim()
            )));
        }
    }
    Ok(m)
}

/// Reference volume rule shared by all elements.
pub(crate) fn reference_rule<T: Real>(partition: &Partition<T>, quad: &QuadSpec, m: usize) -> Result<QuadRule<T>> {
    let points = quad.per_axis.pow(partition.dim() as u32);
    if m > 2 * points {
        log::warn!(
            "{m} features per element exceed twice the {points} volume quadrature points; \
             element Gram matrices are quadrature-rank-limited"
        );
    }
    tensor_rule(&vec![quad.per_axis; partition.dim()])
}

/// Quadrature rule and feature table for one element.
pub(crate) struct VolumeData<T> {
    pub rule: PhysicalRule<T>,
    pub table: FeatureTable<T>,
}

pub(crate) fn volume_data<T: Real>(
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    reference: &QuadRule<T>,
    element: usize,
) -> VolumeData<T> {
    let rule = map_to_element(reference, &partition.elements()[element]);
    let table = bases[element].table(&rule.points);
    VolumeData { rule, table }
}

/// Features of one side of a face evaluated at the face points.
pub(crate) struct Trace<T> {
    pub element: usize,
    /// `+1` on the plus side, `-1` on the minus side.
    pub sign: T,
    pub values: Mat<T>,
    /// Derivative along `n⁺`.
    pub dn: Mat<T>,
    pub table: FeatureTable<T>,
}

pub(crate) fn traces<T: Real>(
    face: &Face<T>,
    bases: &[LocalBasis<T>],
    points: &[Point<T>],
) -> Vec<Trace<T>> {
    let nplus = face.normal_plus[face.axis];
    [Side::Plus, Side::Minus]
        .into_iter()
        .filter_map(|side| face.element(side).map(|e| (side, e)))
        .map(|(side, e)| {
            let table = bases[e].table(points);
            let dn = scaled(table.grads[face.axis].as_ref(), nplus);
            Trace {
                element: e,
                sign: if side == Side::Plus { T::one() } else { -T::one() },
                values: table.values.clone(),
                dn,
                table,
            }
        })
        .collect()
}

pub(crate) fn face_quadrature<T: Real>(face: &Face<T>, dim: usize, quad: &QuadSpec) -> Result<PhysicalRule<T>> {
    face_rule(face, dim, quad.face)
}

/// Block and right-hand-side pieces produced by one element or face.
pub(crate) struct Contribution<T> {
    pub blocks: Vec<((usize, usize), Mat<T>)>,
    pub rhs: Vec<(usize, Vec<T>)>,
}

impl<T> Default for Contribution<T> {
    fn default() -> Self {
        Self { blocks: Vec::new(), rhs: Vec::new() }
    }
}

/// Computes per-item contributions in parallel and sums them into the
/// system in item order, so the result does not depend on the thread count.
pub(crate) fn accumulate<T, I, F>(sys: &mut AssembledSystem<T>, items: &[I], f: F) -> Result<()>
where
    T: Real,
    I: Sync,
    F: Fn(&I) -> Result<Contribution<T>> + Sync,
{
    let chunk = (2 * rayon::current_num_threads()).max(1);
    let m = sys.m;
    for group in items.chunks(chunk) {
        let parts: Vec<Result<Contribution<T>>> = group.par_iter().map(&f).collect();
        for part in parts {
            let part = part?;
            for (key, block) in part.blocks {
                match sys.a1.get_mut(&key) {
                    Some(existing) => {
                        for j in 0..block.ncols() {
                            for i in 0..block.nrows() {
                                existing[(i, j)] = existing[(i, j)] + block[(i, j)];
                            }
                        }
                    }
                    None => {
                        sys.a1.insert(key, block);
                    }
                }
            }
            for (e, vals) in part.rhs {
                for (i, v) in vals.into_iter().enumerate() {
                    sys.l1[e * m + i] = sys.l1[e * m + i] + v;
                }
            }
        }
    }
    Ok(())
}

impl<T: Real> AssembledSystem<T> {
    pub(crate) fn empty(scheme: Scheme, space_time: bool, n_elements: usize, m: usize) -> Self {
        Self {
            scheme,
            space_time,
            n_elements,
            m,
            a1: BTreeMap::new(),
            l1: vec![T::zero(); n_elements * m],
            a2: Vec::new(),
            row_labels: Vec::new(),
        }
    }
}

/// `C0` jump rows `[phi⁺, -phi⁻]` at the given points of an interior face.
pub(crate) fn jump_rows<T: Real>(
    face: &Face<T>,
    bases: &[LocalBasis<T>],
    points: &[Point<T>],
    kind: RowKind,
    rows: &mut Vec<ConstraintRow<T>>,
    labels: &mut Vec<RowLabel>,
) {
    let tr = traces(face, bases, points);
    let tangent = face.tangent_axis(2);
    for q in 0..points.len() {
        let entries = tr
            .iter()
            .map(|s| {
                let src = match kind {
                    RowKind::FluxJump => &s.dn,
                    RowKind::TangentialJump => &s.table.grads[tangent.unwrap_or(0)],
                    _ => &s.values,
                };
                (s.element, (0..src.ncols()).map(|j| s.sign * src[(q, j)]).collect())
            })
            .collect();
        rows.push(ConstraintRow { entries, rhs: T::zero() });
        labels.push(RowLabel { face: face.id, point: q, kind });
    }
}

/// Value rows `u(x) = data(x)` on one side of a boundary face.
pub(crate) fn value_rows<T: Real>(
    face: &Face<T>,
    bases: &[LocalBasis<T>],
    points: &[Point<T>],
    data: &(dyn Fn(&Point<T>) -> T + Send + Sync),
    kind: RowKind,
    rows: &mut Vec<ConstraintRow<T>>,
    labels: &mut Vec<RowLabel>,
) {
    let table = bases[face.plus].table(points);
    for (q, x) in points.iter().enumerate() {
        let vals = (0..table.values.ncols()).map(|j| table.values[(q, j)]).collect();
        rows.push(ConstraintRow {
            entries: vec![(face.plus, vals)],
            rhs: data(x),
        });
        labels.push(RowLabel { face: face.id, point: q, kind });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_partition, Domain};

    #[test]
    fn collocation_counts_and_placement() {
        let d = Domain::<f64>::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let p = build_partition(&d, &[2, 2]).unwrap();
        let c = CollocationSet::uniform(&p, 3).unwrap();
        assert_eq!(c.n_boundary(&p), 8 * 3);
        assert_eq!(c.n_interior(&p), 4 * 3);
        for f in p.faces() {
            for x in c.on(f.id) {
                assert_eq!(x[f.axis], f.lower[f.axis]);
                let t = 1 - f.axis;
                assert!(x[t] > f.lower[t] && x[t] < f.upper[t]);
            }
        }
        let d1 = Domain::<f64>::interval(0.0, 1.0).unwrap();
        let p1 = build_partition(&d1, &[4]).unwrap();
        let c1 = CollocationSet::uniform(&p1, 70).unwrap();
        assert_eq!(c1.n_interior(&p1), 3);
        assert_eq!(c1.n_boundary(&p1), 2);
        assert!(CollocationSet::uniform(&p1, 0).is_err());
    }

    #[test]
    fn penalty_validation() {
        assert!(PenaltySpec::new(0.0f64).is_err());
        assert!(PenaltySpec::new(-1.0f64).is_err());
        assert!(PenaltySpec::new(2.0f64).is_ok());
    }

    #[test]
    fn weighted_gram_matches_loops() {
        let a = Mat::from_fn(4, 2, |i, j| (i * 3 + j) as f64 * 0.1);
        let b = Mat::from_fn(4, 3, |i, j| (i + 2 * j) as f64 - 1.0);
        let w = [0.5, 1.0, 2.0, 0.25];
        let g = weighted_gram(a.as_ref(), &w, b.as_ref());
        for i in 0..2 {
            for j in 0..3 {
                let s: f64 = (0..4).map(|q| a[(q, i)] * w[q] * b[(q, j)]).sum();
                assert!((g[(i, j)] - s).abs() < 1e-14);
            }
        }
    }
}
