//! Space-time schemes for `u_t - λ u_xx = f` on slabs `I_i x K`; points are
//! `[t, x]` and the plus side of a temporal face is the earlier slab.

use faer::Mat;

use super::elliptic::{own_trace_blocks, sip_boundary_rhs, sip_face_blocks};
use super::{
    accumulate, check_bases, face_quadrature, jump_rows, reference_rule, traces, value_rows, volume_data,
    weighted_gram_add, weighted_project, AssembledSystem, CollocationSet, Contribution, PenaltySpec, QuadSpec,
    RowKind, Scheme,
};
use crate::basis::LocalBasis;
use crate::error::{Error, Result};
use crate::geometry::{FaceClass, Partition};
use crate::problem::HeatProblem;
use crate::scalar::Real;

/// Traces on the four face classes. Spatial faces use `û = {u}`,
/// `p̂ = {∇u} - η⟦u⟧` (`û = g` on the boundary); the initial face uses
/// `ũ = u₀`; the final face uses `ũ = u`. Interior temporal faces use
/// `ũ = {u} - η⟦u⟧`, which after substitution gives the penalty
/// `σ η ∫⟦u⟧⟦v⟧` with `σ = temporal_penalty_sign`. The default `σ = -1`
/// is that substitution as written; `+1` flips it to the dissipative sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TracePolicy {
    temporal_penalty_sign: i8,
}

impl Default for TracePolicy {
    fn default() -> Self {
        Self { temporal_penalty_sign: -1 }
    }
}

impl TracePolicy {
    pub fn new(temporal_penalty_sign: i8) -> Result<Self> {
        match temporal_penalty_sign {
            1 | -1 => Ok(Self { temporal_penalty_sign }),
            s => Err(Error::invalid(format!("temporal_penalty_sign must be +1 or -1, got {s}"))),
        }
    }

    pub fn temporal_penalty_sign(&self) -> i8 {
        self.temporal_penalty_sign
    }
}

fn check_slab<T: Real>(partition: &Partition<T>) -> Result<()> {
    if !partition.is_space_time() {
        return Err(Error::invalid("space-time assembly needs a space-time slab partition"));
    }
    Ok(())
}

/// `∫ u_t v + λ ∫ u_x v_x` and `∫ f v` per slab element.
fn volume_terms<T: Real>(
    sys: &mut AssembledSystem<T>,
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    quad: &QuadSpec,
) -> Result<()> {
    let reference = reference_rule(partition, quad, sys.m)?;
    let ids: Vec<usize> = (0..partition.n_elements()).collect();
    let lambda = problem.diffusivity;
    accumulate(sys, &ids, |&e| {
        let vd = volume_data(partition, bases, &reference, e);
        let w = &vd.rule.weights;
        let (phi, dt, dx) = (vd.table.values.as_ref(), vd.table.grads[0].as_ref(), vd.table.grads[1].as_ref());
        let mut block = Mat::zeros(phi.ncols(), phi.ncols());
        weighted_gram_add(&mut block, T::one(), phi, w, dt);
        weighted_gram_add(&mut block, lambda, dx, w, dx);
        let f: Vec<T> = vd.rule.points.iter().map(|x| (problem.source)(x)).collect();
        Ok(Contribution {
            blocks: vec![((e, e), block)],
            rhs: vec![(e, weighted_project(phi, w, &f))],
        })
    })
}

/// Symmetric or nonsymmetric interior-penalty terms on spatial faces.
fn spatial_face_terms<T: Real>(
    sys: &mut AssembledSystem<T>,
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    quad: &QuadSpec,
    penalty: Option<&PenaltySpec<T>>,
    symmetric: bool,
) -> Result<()> {
    let lambda = problem.diffusivity;
    let faces: Vec<_> = partition.faces().iter().filter(|f| f.class == FaceClass::Spatial).collect();
    accumulate(sys, &faces, |face| {
        let rule = face_quadrature(face, 2, quad)?;
        let tr = traces(face, bases, &rule.points);
        let eta = penalty.map(|p| p.eta(face));
        let mut part = sip_face_blocks(face, &tr, &rule.weights, lambda, eta, symmetric);
        if !face.is_interior() && (symmetric || eta.is_some()) {
            let g: Vec<T> = rule.points.iter().map(|x| (problem.boundary)(x)).collect();
            part.rhs
                .push((face.plus, sip_boundary_rhs(&tr[0], &rule.weights, &g, lambda, eta, symmetric)));
        }
        Ok(part)
    })
}

/// Space-time interior-penalty DG: a square system, no constraints.
pub fn assemble_st_lrnn_dg<T: Real>(
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    penalty: &PenaltySpec<T>,
    quad: &QuadSpec,
    policy: &TracePolicy,
) -> Result<AssembledSystem<T>> {
    check_slab(partition)?;
    let m = check_bases(partition, bases)?;
    let mut sys = AssembledSystem::empty(Scheme::Dg, true, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    spatial_face_terms(&mut sys, problem, partition, bases, quad, Some(penalty), true)?;
    let sigma = T::lit(f64::from(policy.temporal_penalty_sign));
    let half = T::lit(0.5);
    let faces: Vec<_> = partition
        .faces()
        .iter()
        .filter(|f| matches!(f.class, FaceClass::Temporal | FaceClass::Initial))
        .collect();
    accumulate(&mut sys, &faces, |face| {
        let rule = face_quadrature(face, 2, quad)?;
        let w = &rule.weights;
        let tr = traces(face, bases, &rule.points);
        let mut part = Contribution::default();
        if face.class == FaceClass::Initial {
            let s = &tr[0];
            let mut block = Mat::zeros(m, m);
            weighted_gram_add(&mut block, T::one(), s.values.as_ref(), w, s.values.as_ref());
            part.blocks.push(((s.element, s.element), block));
            let u0: Vec<T> = rule.points.iter().map(|x| (problem.initial)(x)).collect();
            part.rhs.push((s.element, weighted_project(s.values.as_ref(), w, &u0)));
            return Ok(part);
        }
        // -⟦u⟧{v} + σ η ⟦u⟧⟦v⟧ with ⟦u⟧ = u⁺ - u⁻.
        let eta = penalty.eta(face);
        for a in &tr {
            for b in &tr {
                let coef = -half * b.sign + sigma * eta * a.sign * b.sign;
                let mut block = Mat::zeros(m, m);
                weighted_gram_add(&mut block, coef, a.values.as_ref(), w, b.values.as_ref());
                part.blocks.push(((a.element, b.element), block));
            }
        }
        Ok(part)
    })?;
    Ok(sys)
}

fn constraint_rows<T: Real>(
    sys: &mut AssembledSystem<T>,
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    flux: bool,
) {
    for face in partition.faces() {
        let pts = colloc.on(face.id);
        match (face.class, face.is_interior()) {
            (FaceClass::Final, _) => {}
            (FaceClass::Initial, _) => {
                value_rows(face, bases, pts, &*problem.initial, RowKind::Initial, &mut sys.a2, &mut sys.row_labels)
            }
            (FaceClass::Spatial, false) => value_rows(
                face,
                bases,
                pts,
                &*problem.boundary,
                RowKind::Dirichlet,
                &mut sys.a2,
                &mut sys.row_labels,
            ),
            (class, true) => {
                jump_rows(face, bases, pts, RowKind::C0Jump, &mut sys.a2, &mut sys.row_labels);
                if flux && class == FaceClass::Spatial {
                    jump_rows(face, bases, pts, RowKind::FluxJump, &mut sys.a2, &mut sys.row_labels);
                }
            }
            (FaceClass::Temporal, false) => {}
        }
    }
}

fn needs_points<T: Real>(f: &crate::geometry::Face<T>) -> bool {
    f.class != FaceClass::Final
}

/// Time derivative plus the spatial DG form without penalties, glued by
/// boundary, initial and continuity rows. `symmetric = false` drops
/// `-∫⟦u⟧·{λ∇v}` and its boundary load.
pub fn assemble_st_lrnn_c0dg<T: Real>(
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    quad: &QuadSpec,
    symmetric: bool,
) -> Result<AssembledSystem<T>> {
    check_slab(partition)?;
    let m = check_bases(partition, bases)?;
    colloc.require(partition, needs_points)?;
    let scheme = if symmetric { Scheme::C0dg } else { Scheme::C0dgNonsym };
    let mut sys = AssembledSystem::empty(scheme, true, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    spatial_face_terms(&mut sys, problem, partition, bases, quad, None, symmetric)?;
    constraint_rows(&mut sys, problem, partition, bases, colloc, false);
    Ok(sys)
}

/// Slab-local forms `∫u_t v + λ∫u_x v_x - λ∫(u_x n)v` glued by boundary,
/// initial, continuity and spatial flux rows.
pub fn assemble_st_lrnn_c1dg<T: Real>(
    problem: &HeatProblem<T>,
    partition: &Partition<T>,
    bases: &[LocalBasis<T>],
    colloc: &CollocationSet<T>,
    quad: &QuadSpec,
) -> Result<AssembledSystem<T>> {
    check_slab(partition)?;
    let m = check_bases(partition, bases)?;
    colloc.require(partition, needs_points)?;
    let mut sys = AssembledSystem::empty(Scheme::C1dg, true, partition.n_elements(), m);
    volume_terms(&mut sys, problem, partition, bases, quad)?;
    let lambda = problem.diffusivity;
    let faces: Vec<_> = partition.faces().iter().filter(|f| f.class == FaceClass::Spatial).collect();
    accumulate(&mut sys, &faces, |face| {
        let rule = face_quadrature(face, 2, quad)?;
        Ok(Contribution {
            blocks: own_trace_blocks(&traces(face, bases, &rule.points), &rule.weights, lambda),
            rhs: Vec::new(),
        })
    })?;
    constraint_rows(&mut sys, problem, partition, bases, colloc, true);
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::polynomial_bases;
    use crate::geometry::{build_partition, Domain};
    use crate::problem::{scalar_fn, vector_fn};

    fn slab(n: usize) -> (HeatProblem<f64>, Partition<f64>) {
        let d = Domain::space_time((0.0, 1.0), (0.0, 1.0)).unwrap();
        let p = build_partition(&d, &[n, n]).unwrap();
        let one = scalar_fn(|_: &[f64; 2]| 1.0);
        let prob = HeatProblem::manufactured(
            d,
            0.7,
            one,
            vector_fn(|_: &[f64; 2]| [0.0, 0.0]),
            scalar_fn(|_: &[f64; 2]| 0.0),
        )
        .unwrap();
        (prob, p)
    }

    #[test]
    fn constants_are_consistent() {
        let (prob, p) = slab(2);
        let bases = polynomial_bases(&p, 0);
        let u = vec![1.0; p.n_elements()];
        for sign in [-1, 1] {
            let sys = assemble_st_lrnn_dg(
                &prob,
                &p,
                &bases,
                &PenaltySpec::new(5.0).unwrap(),
                &QuadSpec::uniform(4),
                &TracePolicy::new(sign).unwrap(),
            )
            .unwrap();
            let r = sys.residual(&u);
            let scale = sys.l1.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(r.iter().all(|v| v.abs() <= 1e-10 * scale), "{r:?}");
        }
    }

    #[test]
    fn row_shapes() {
        let (prob, p) = slab(2);
        let bases = polynomial_bases(&p, 1);
        let colloc = CollocationSet::uniform(&p, 3).unwrap();
        let c0 = assemble_st_lrnn_c0dg(&prob, &p, &bases, &colloc, &QuadSpec::uniform(3), true).unwrap();
        // 4 spatial boundary + 2 initial + 2 spatial interior + 2 temporal interior faces.
        assert_eq!(c0.a2.len(), (4 + 2 + 2 + 2) * 3);
        let c1 = assemble_st_lrnn_c1dg(&prob, &p, &bases, &colloc, &QuadSpec::uniform(3)).unwrap();
        assert_eq!(c1.a2.len(), (4 + 2 + 2 + 2 + 2) * 3);
        assert!(c1.a1.keys().all(|(r, c)| r == c));
        assert!(TracePolicy::new(0).is_err());

        let init = c0
            .a2
            .iter()
            .zip(&c0.row_labels)
            .find(|(_, l)| l.kind == RowKind::Initial)
            .unwrap()
            .0;
        assert_eq!(init.rhs, 1.0);
        let d = Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let flat = build_partition(&d, &[2, 2]).unwrap();
        assert!(assemble_st_lrnn_c1dg(&prob, &flat, &bases, &colloc, &QuadSpec::uniform(3)).is_err());
    }
}
