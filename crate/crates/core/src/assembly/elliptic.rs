//! Stationary schemes for `-Δu + c u = F`.

use faer::Mat;

use super::{
    accumulate, check_bases, face_quadrature, jump_rows, reference_rule, traces, value_rows, volume_data,
    weighted_gram, weighted_gram_add, weighted_project, AssembledSystem, CollocationSet, Contribution,
    PenaltySpec, QuadSpec, RowKind, Scheme, Trace,
};
use crate::basis::LocalBasis;
use crate::error::Result;
use crate::geometry::{Face, Partition};
use crate::problem::EllipticProblem;
use crate::scalar::Real;

/// Interior-penalty face blocks. With `diff` the diffusion coefficient:
/// `-∫{diff ∇u}·⟦v⟧`, plus `-∫⟦u⟧·{diff ∇v}` when `symmetric`, plus
/// `η∫⟦u⟧·⟦v⟧` when a penalty is given.
pub(super) fn sip_face_blocks<T: Real>(
    face: &Face<T>,
    tr: &[Trace<T>],
    w: &[T],
    diff: T,
    eta: Option<T>,
    symmetric: bool,
) -> Contribution<T> {
    let avg = if face.is_interior() { T::lit(0.5) } else { T::one() };
    let mut out = Contribution::default();
    for a in tr {
        for b in tr {
            let m = a.values.ncols();
            let mut block = Mat::zeros(m, m);
            weighted_gram_add(&mut block, -diff * a.sign * avg, a.values.as_ref(), w, b.dn.as_ref());
            if symmetric {
                weighted_gram_add(&mut block, -diff * b.sign * avg, a.dn.as_ref(), w, b.values.as_ref());
            }
            if let Some(eta) = eta {
                weighted_gram_add(&mut block, eta * a.sign * b.sign, a.values.as_ref(), w, b.values.as_ref());
            }
            out.blocks.push(((a.element, b.element), block));
        }
    }
    out
}

/// Boundary load `-∫ g diff ∂_n v` (when `symmetric`) `+ η∫ g v` (when penalized).
pub(super) fn sip_boundary_rhs<T: Real>(
    tr: &Trace<T>,
    w: &[T],
    g: &[T],
    diff: T,
    eta: Option<T>,
    symmetric: bool,
) -> Vec<T> {
    let m = tr.values.ncols();
    let mut out = vec![T::zero(); m];
    if symmetric {
        for (o, v) in out.iter_mut().zip(weighted_project(tr.dn.as_ref(), w, g)) {
            *o = *o - diff * v;
        }
    }
    if let Some(eta) = eta {
        for (o, v) in out.iter_mut().zip(weighted_project(tr.values.as_ref(), w, g)) {
            *o = *o + eta * v;
        }
    }
    out
}

/// Element stiffness plus reaction mass and the source load.
fn volume_terms<T: Real>(
    sys: &mut AssembledSystem<T>,
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    quad: &QuadSpec,
) -> Result<()> {
    let reference = reference_rule(partition, quad, sys.m)?;
    let ids: Vec<usize> = (0..partition.n_elements()).collect();
    let c = problem.reaction;
    accumulate(sys, &ids, |&e| {
        let vd = volume_data(partition, bases, &reference, e);
        let w = &vd.rule.weights;
        let mut block = Mat::zeros(vd.table.values.ncols(), vd.table.values.ncols());
        for g in &vd.table.grads {
            weighted_gram_add(&mut block, T::one(), g.as_ref(), w, g.as_ref());
        }
        if c != T::zero() {
            weighted_gram_add(&mut block, c, vd.table.values.as_ref(), w, vd.table.values.as_ref());
        }
        let f: Vec<T> = vd.rule.points.iter().map(|x| (problem.source)(x)).collect();
        Ok(Contribution {
            blocks: vec![((e, e), block)],
            rhs: vec![(e, weighted_project(vd.table.values.as_ref(), w, &f))],
        })
    })
}

/// Interior-penalty style face terms on every face.
fn face_terms<T: Real>(
    sys: &mut AssembledSystem<T>,
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    quad: &QuadSpec,
    penalty: Option<&PenaltySpec<T>>,
    symmetric: bool,
) -> Result<()> {
    let dim = partition.dim();
    accumulate(sys, partition.faces(), |face| {
        let rule = face_quadrature(face, dim, quad)?;
        let tr = traces(face, bases, &rule.points);
        let eta = penalty.map(|p| p.eta(face));
        let mut part = sip_face_blocks(face, &tr, &rule.weights, T::one(), eta, symmetric);
        if !face.is_interior() && (symmetric || eta.is_some()) {
            let g: Vec<T> = rule.points.iter().map(|x| (problem.dirichlet)(x)).collect();
            part.rhs
                .push((face.plus, sip_boundary_rhs(&tr[0], &rule.weights, &g, T::one(), eta, symmetric)));
        }
        Ok(part)
    })
}

/// Interior-penalty DG: square, symmetric `A1` and no constraints.
pub fn assemble_lrnn_dg<T: Real>(
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    penalty: &PenaltySpec<T>,
    quad: &QuadSpec,
) -> Result<AssembledSystem<T>> {
    let m = check_bases(partition, bases)?;
    let mut sys = AssembledSystem::empty(Scheme::Dg, false, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    face_terms(&mut sys, problem, partition, bases, quad, Some(penalty), true)?;
    Ok(sys)
}

/// DG form without penalty, glued by pointwise continuity and Dirichlet rows.
/// `symmetric = false` drops `-∫⟦u⟧·{∇v}` together with its boundary load.
pub fn assemble_lrnn_c0dg<T: Real>(
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    quad: &QuadSpec,
    symmetric: bool,
) -> Result<AssembledSystem<T>> {
    let m = check_bases(partition, bases)?;
    colloc.require(partition, |_| true)?;
    let scheme = if symmetric { Scheme::C0dg } else { Scheme::C0dgNonsym };
    let mut sys = AssembledSystem::empty(scheme, false, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    face_terms(&mut sys, problem, partition, bases, quad, None, symmetric)?;
    for face in partition.faces() {
        let pts = colloc.on(face.id);
        if face.is_interior() {
            jump_rows(face, bases, pts, RowKind::C0Jump, &mut sys.a2, &mut sys.row_labels);
        } else {
            value_rows(face, bases, pts, &*problem.dirichlet, RowKind::Dirichlet, &mut sys.a2, &mut sys.row_labels);
        }
    }
    Ok(sys)
}

/// Element-local forms glued by value, normal-flux and Dirichlet rows.
pub fn assemble_lrnn_c1dg<T: Real>(
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    quad: &QuadSpec,
) -> Result<AssembledSystem<T>> {
    assemble_lrnn_c1dg_with(problem, partition, bases, colloc, quad, false)
}

/// As [`assemble_lrnn_c1dg`]; `tangential` adds rows matching the tangential
/// derivative across interior edges.
pub fn assemble_lrnn_c1dg_with<T: Real>(
    problem: &EllipticProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    quad: &QuadSpec,
    tangential: bool,
) -> Result<AssembledSystem<T>> {
    let m = check_bases(partition, bases)?;
    colloc.require(partition, |_| true)?;
    let dim = partition.dim();
    let mut sys = AssembledSystem::empty(Scheme::C1dg, false, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    accumulate(&mut sys, partition.faces(), |face| {
        let rule = face_quadrature(face, dim, quad)?;
        Ok(Contribution {
            blocks: own_trace_blocks(&traces(face, bases, &rule.points), &rule.weights, T::one()),
            rhs: Vec::new(),
        })
    })?;
    for face in partition.faces() {
        let pts = colloc.on(face.id);
        if face.is_interior() {
            jump_rows(face, bases, pts, RowKind::C0Jump, &mut sys.a2, &mut sys.row_labels);
            jump_rows(face, bases, pts, RowKind::FluxJump, &mut sys.a2, &mut sys.row_labels);
            if tangential && dim == 2 {
                jump_rows(face, bases, pts, RowKind::TangentialJump, &mut sys.a2, &mut sys.row_labels);
            }
        } else {
            value_rows(face, bases, pts, &*problem.dirichlet, RowKind::Dirichlet, &mut sys.a2, &mut sys.row_labels);
        }
    }
    Ok(sys)
}

/// `-diff ∫_{∂K} (∂_{n_K} u) v` using each element's own trace.
pub(super) fn own_trace_blocks<T: Real>(tr: &[Trace<T>], w: &[T], diff: T) -> Vec<((usize, usize), Mat<T>)> {
    tr.iter()
        .map(|s| {
            let mut blk = weighted_gram(s.values.as_ref(), w, s.dn.as_ref());
            let k = -diff * s.sign;
            for j in 0..blk.ncols() {
                for i in 0..blk.nrows() {
                    blk[(i, j)] = k * blk[(i, j)];
                }
            }
            ((s.element, s.element), blk)
        })
        .collect()
}
