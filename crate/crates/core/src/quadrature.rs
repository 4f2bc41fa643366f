//! Gauss–Legendre rules on `[-1, 1]^d` and their affine images.

use crate::error::{Error, Result};
use crate::geometry::{Element, Face};
use crate::scalar::{Point, Real};

/// A rule on the reference cell `[-1, 1]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule<T> {
    pub dim: usize,
    pub nodes: Vec<Point<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integral over the reference cell of `f`.
    pub fn integrate(&self, f: impl Fn(&Point<T>) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights mapped onto a physical element or face.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalRule<T> {
    pub points: Vec<Point<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> PhysicalRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point<T>) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Classical nodes (ascending) and weights, computed in double precision.
fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi's initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        if n % 2 == 1 && i == m - 1 {
            x = 0.0;
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One-dimensional `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadRule<T>> {
    if n == 0 {
        return Err(Error::invalid("quadrature needs at least one point"));
    }
    let (x, w) = gauss_legendre_f64(n);
    Ok(QuadRule {
        dim: 1,
        nodes: x.iter().map(|&xi| [T::lit(xi), T::zero()]).collect(),
        weights: w.iter().map(|&wi| T::lit(wi)).collect(),
    })
}

/// Tensor product of `n_per_axis[a]`-point rules; axis 0 varies slowest.
pub fn tensor_rule<T: Real>(n_per_axis: &[usize]) -> Result<QuadRule<T>> {
    match n_per_axis {
        [n] => gauss_legendre(*n),
        [n0, n1] => {
            let r0 = gauss_legendre::<T>(*n0)?;
            let r1 = gauss_legendre::<T>(*n1)?;
            let mut nodes = Vec::with_capacity(n0 * n1);
            let mut weights = Vec::with_capacity(n0 * n1);
            for (x0, &w0) in r0.nodes.iter().zip(&r0.weights) {
                for (x1, &w1) in r1.nodes.iter().zip(&r1.weights) {
                    nodes.push([x0[0], x1[0]]);
                    weights.push(w0 * w1);
                }
            }
            Ok(QuadRule { dim: 2, nodes, weights })
        }
        _ => Err(Error::invalid(format!(
            "tensor rule supports 1 or 2 axes, got {}",
            n_per_axis.len()
        ))),
    }
}

fn affine<T: Real>(xi: T, lo: T, hi: T) -> T {
    let half = T::lit(0.5);
    lo + (xi + T::one()) * half * (hi - lo)
}

/// Affine image of a reference rule on `element`; weights scaled by `|K| / 2^d`.
pub fn map_to_element<T: Real>(rule: &QuadRule<T>, element: &Element<T>) -> PhysicalRule<T> {
    let dim = rule.dim;
    let scale = element.volume(dim) / T::lit(2f64.powi(dim as i32));
    let points = rule
        .nodes
        .iter()
        .map(|xi| {
            let mut p = [T::zero(); 2];
            for a in 0..dim {
                p[a] = affine(xi[a], element.lower[a], element.upper[a]);
            }
            p
        })
        .collect();
    let weights = rule.weights.iter().map(|&w| w * scale).collect();
    PhysicalRule { points, weights }
}

/// Rule on a face: the single point with weight 1 for 1-d point faces, a
/// mapped `n`-point rule along the edge otherwise.
pub fn face_rule<T: Real>(face: &Face<T>, dim: usize, n: usize) -> Result<PhysicalRule<T>> {
    if dim == 1 {
        return Ok(PhysicalRule {
            points: vec![face.lower],
            weights: vec![T::one()],
        });
    }
    let base = gauss_legendre::<T>(n)?;
    let t = 1 - face.axis;
    let (lo, hi) = (face.lower[t], face.upper[t]);
    let scale = (hi - lo) * T::lit(0.5);
    let points = base
        .nodes
        .iter()
        .map(|xi| {
            let mut p = face.lower;
            p[t] = affine(xi[0], lo, hi);
            p
        })
        .collect();
    let weights = base.weights.iter().map(|&w| w * scale).collect();
    Ok(PhysicalRule { points, weights })
}
