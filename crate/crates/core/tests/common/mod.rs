#![allow(dead_code)]

use lrnn_dg::assembly::{
    assemble_lrnn_c0dg, assemble_lrnn_c1dg, assemble_lrnn_dg, assemble_st_lrnn_c0dg, assemble_st_lrnn_c1dg,
    assemble_st_lrnn_dg, CollocationSet,
};
use lrnn_dg::basis::polynomial_bases;
use lrnn_dg::linsolve::solve_lstsq;
use lrnn_dg::problem::{scalar_fn, vector_fn};
use lrnn_dg::*;
use faer::Mat;

pub const QUAD: usize = 12;
pub const COLLOC: usize = 6;

/// Elliptic problem with exact solution `u` on the unit interval or square.
pub fn elliptic(dim: usize, reaction: f64) -> Elliptic64 {
    let domain = if dim == 1 {
        Domain::interval(0.0, 1.0).unwrap()
    } else {
        Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap()
    };
    let (u, du, lap): (fn(&Point64) -> f64, fn(&Point64) -> Point64, f64) = if dim == 1 {
        (|x| x[0] * (1.0 - x[0]), |x| [1.0 - 2.0 * x[0], 0.0], -2.0)
    } else {
        (
            |x| 1.0 + x[0] - x[1] * x[1] + x[0] * x[1],
            |x| [1.0 + x[1], -2.0 * x[1] + x[0]],
            -2.0,
        )
    };
    EllipticProblem::manufactured(
        domain,
        reaction,
        scalar_fn(u),
        vector_fn(du),
        scalar_fn(move |x: &Point64| -lap + reaction * u(x)),
    )
    .unwrap()
}

/// Total degree 2: `u = t + x (1 - x) + t x`, points stored as `[t, x]`.
pub fn heat(lambda: f64) -> Heat64 {
    HeatProblem::manufactured(
        Domain::space_time((0.0, 1.0), (0.0, 1.0)).unwrap(),
        lambda,
        scalar_fn(|p: &Point64| p[0] + p[1] * (1.0 - p[1]) + p[0] * p[1]),
        vector_fn(|p: &Point64| [1.0 + p[1], 1.0 - 2.0 * p[1] + p[0]]),
        scalar_fn(move |p: &Point64| 1.0 + p[1] + 2.0 * lambda),
    )
    .unwrap()
}

/// Total degree 3: `u = (1 + t) x (1 - x)`.
pub fn heat_cubic(lambda: f64) -> Heat64 {
    HeatProblem::manufactured(
        Domain::space_time((0.0, 1.0), (0.0, 1.0)).unwrap(),
        lambda,
        scalar_fn(|p: &Point64| (1.0 + p[0]) * p[1] * (1.0 - p[1])),
        vector_fn(|p: &Point64| [p[1] * (1.0 - p[1]), (1.0 + p[0]) * (1.0 - 2.0 * p[1])]),
        scalar_fn(move |p: &Point64| p[1] * (1.0 - p[1]) + 2.0 * lambda * (1.0 + p[0])),
    )
    .unwrap()
}

pub fn partition(dim: usize, n: usize) -> Partition64 {
    let domain = if dim == 1 {
        Domain::interval(0.0, 1.0).unwrap()
    } else {
        Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap()
    };
    build_partition(&domain, &vec![n; dim]).unwrap()
}

pub fn st_partition(n: usize) -> Partition64 {
    build_partition(&Domain::space_time((0.0, 1.0), (0.0, 1.0)).unwrap(), &[n, n]).unwrap()
}

pub fn assemble_elliptic(
    scheme: Scheme,
    problem: &Elliptic64,
    part: &Partition64,
    bases: &[Basis64],
    eta_e: f64,
) -> System64 {
    let quad = QuadSpec::uniform(QUAD);
    let colloc = CollocationSet::uniform(part, COLLOC).unwrap();
    match scheme {
        Scheme::Dg => assemble_lrnn_dg(problem, part, bases, &PenaltySpec::new(eta_e).unwrap(), &quad),
        Scheme::C0dg => assemble_lrnn_c0dg(problem, part, bases, &colloc, &quad, true),
        Scheme::C0dgNonsym => assemble_lrnn_c0dg(problem, part, bases, &colloc, &quad, false),
        Scheme::C1dg => assemble_lrnn_c1dg(problem, part, bases, &colloc, &quad),
    }
    .unwrap()
}

pub fn assemble_heat(
    scheme: Scheme,
    problem: &Heat64,
    part: &Partition64,
    bases: &[Basis64],
    eta_e: f64,
    sign: i8,
) -> System64 {
    let quad = QuadSpec::uniform(QUAD);
    let colloc = CollocationSet::uniform(part, COLLOC).unwrap();
    match scheme {
        Scheme::Dg => assemble_st_lrnn_dg(
            problem,
            part,
            bases,
            &PenaltySpec::new(eta_e).unwrap(),
            &quad,
            &TracePolicy::new(sign).unwrap(),
        ),
        Scheme::C0dg => assemble_st_lrnn_c0dg(problem, part, bases, &colloc, &quad, true),
        Scheme::C0dgNonsym => assemble_st_lrnn_c0dg(problem, part, bases, &colloc, &quad, false),
        Scheme::C1dg => assemble_st_lrnn_c1dg(problem, part, bases, &colloc, &quad),
    }
    .unwrap()
}

/// Coefficients of `u` in `bases`, fitted element by element on interior
/// sample points. Exact whenever `u` lies in the span.
pub fn exact_coefficients(part: &Partition64, bases: &[Basis64], u: &dyn Fn(&Point64) -> f64) -> Vec<f64> {
    let dim = part.dim();
    let mut out = Vec::new();
    for (e, b) in part.elements().iter().zip(bases) {
        let k = 7;
        let mut pts = Vec::new();
        for i in 0..k {
            for j in 0..(if dim == 1 { 1 } else { k }) {
                let s = (i as f64 + 0.5) / k as f64;
                let r = (j as f64 + 0.5) / k as f64;
                let mut p = [e.lower[0] + s * e.width(0), 0.0];
                if dim == 2 {
                    p[1] = e.lower[1] + r * e.width(1);
                }
                pts.push(p);
            }
        }
        let a: Mat<f64> = b.table(&pts).values;
        let rhs: Vec<f64> = pts.iter().map(u).collect();
        out.extend(solve_lstsq(a.as_ref(), &rhs, None).unwrap().solution);
    }
    out
}

pub fn poly_bases(part: &Partition64, degree: u32) -> Vec<Basis64> {
    polynomial_bases(part, degree)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
