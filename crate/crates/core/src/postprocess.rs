//! Evaluation of solved coefficient vectors and the reported error metrics.

use std::collections::BTreeMap;

use crate::assembly::Scheme;
use crate::basis::LocalBasis;
use crate::error::{Error, Result};
use crate::geometry::{Face, Partition};
use crate::linsolve::LstsqReport;
use crate::quadrature::{face_rule, gauss_legendre, map_to_element, tensor_rule};
use crate::scalar::{Point, Real};

/// `u_h|_K = sum_j u_j^K phi_j^K`.
#[derive(Clone, Debug)]
pub struct Solution<'a, T> {
    pub partition: &'a Partition<T>,
    pub bases: &'a [LocalBasis<T>],
    pub coefficients: Vec<T>,
    pub scheme: Scheme,
    pub report: Option<LstsqReport<T>>,
}

impl<'a, T: Real> Solution<'a, T> {
    pub fn new(
        partition: &'a Partition<T>,
        bases: &'a [LocalBasis<T>],
        coefficients: Vec<T>,
        scheme: Scheme,
    ) -> Result<Self> {
        let m = bases.first().map(LocalBasis::len).unwrap_or(0);
        if bases.len() != partition.n_elements() || coefficients.len() != bases.len() * m {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} elements with {} features",
                coefficients.len(),
                partition.n_elements(),
                m
            )));
        }
        Ok(Self {
            partition,
            bases,
            coefficients,
            scheme,
            report: None,
        })
    }

    pub fn from_report(
        partition: &'a Partition<T>,
        bases: &'a [LocalBasis<T>],
        scheme: Scheme,
        report: LstsqReport<T>,
    ) -> Result<Self> {
        let mut s = Self::new(partition, bases, report.solution.clone(), scheme)?;
        s.report = Some(report);
        Ok(s)
    }

    fn m(&self) -> usize {
        self.bases[0].len()
    }

    /// Value and gradient of `u_h|_K` at points given in the closure of `K`.
    pub fn eval_on(&self, element: usize, points: &[Point<T>]) -> Result<Vec<(T, Point<T>)>> {
        let basis = self
            .bases
            .get(element)
            .ok_or_else(|| Error::invalid(format!("element {element} out of range")))?;
        let m = self.m();
        let coef = &self.coefficients[element * m..(element + 1) * m];
        Ok(basis
            .eval(points)
            .into_iter()
            .map(|ev| {
                let mut v = T::zero();
                let mut g = [T::zero(); 2];
                for j in 0..m {
                    v = v + coef[j] * ev.values[j];
                    g[0] = g[0] + coef[j] * ev.gradients[j][0];
                    g[1] = g[1] + coef[j] * ev.gradients[j][1];
                }
                (v, g)
            })
            .collect())
    }
}

/// `u_h` and `∇u_h` (space-time: `[∂_t, ∂_x]`) at `(element, point)` pairs.
pub fn evaluate<T: Real>(solution: &Solution<'_, T>, points: &[(usize, Point<T>)]) -> Result<Vec<(T, Point<T>)>> {
    points
        .iter()
        .map(|(e, p)| Ok(solution.eval_on(*e, std::slice::from_ref(p))?[0]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms<T> {
    pub l2: T,
    pub h1_semi: T,
}

/// `L²` error and `H¹` seminorm error, element by element. Space-time
/// solutions are measured on the final-time slice with the spatial gradient
/// only.
pub fn error_norms<T: Real>(
    solution: &Solution<'_, T>,
    exact: &dyn Fn(&Point<T>) -> T,
    exact_grad: &dyn Fn(&Point<T>) -> Point<T>,
    n_quad: usize,
) -> Result<ErrorNorms<T>> {
    let p = solution.partition;
    if p.is_space_time() {
        return final_slice_norms(solution, exact, exact_grad, n_quad);
    }
    volume_norms(solution, exact, exact_grad, n_quad)
}

/// Norms over the whole domain; for space-time this is the full `(t, x)`
/// seminorm over the slab.
pub fn volume_norms<T: Real>(
    solution: &Solution<'_, T>,
    exact: &dyn Fn(&Point<T>) -> T,
    exact_grad: &dyn Fn(&Point<T>) -> Point<T>,
    n_quad: usize,
) -> Result<ErrorNorms<T>> {
    let p = solution.partition;
    let dim = p.dim();
    let reference = tensor_rule::<T>(&vec![n_quad; dim])?;
    let (mut l2, mut h1) = (T::zero(), T::zero());
    for e in p.elements() {
        let rule = map_to_element(&reference, e);
        let vals = solution.eval_on(e.id, &rule.points)?;
        for ((x, &w), (v, g)) in rule.points.iter().zip(&rule.weights).zip(vals) {
            let d = exact(x) - v;
            let ge = exact_grad(x);
            l2 = l2 + w * d * d;
            for a in 0..dim {
                let dg = ge[a] - g[a];
                h1 = h1 + w * dg * dg;
            }
        }
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1_semi: h1.sqrt() })
}

fn final_slice_norms<T: Real>(
    solution: &Solution<'_, T>,
    exact: &dyn Fn(&Point<T>) -> T,
    exact_grad: &dyn Fn(&Point<T>) -> Point<T>,
    n_quad: usize,
) -> Result<ErrorNorms<T>> {
    let p = solution.partition;
    let (nt, _) = p.slab_counts().expect("space-time partition");
    let t_end = p.domain().bounds()[0].1;
    let rule = gauss_legendre::<T>(n_quad)?;
    let half = T::lit(0.5);
    let (mut l2, mut h1) = (T::zero(), T::zero());
    for e in p.elements().iter().filter(|e| e.cell[0] == nt - 1) {
        let (lo, hi) = (e.lower[1], e.upper[1]);
        let pts: Vec<Point<T>> = rule
            .nodes
            .iter()
            .map(|xi| [t_end, lo + (xi[0] + T::one()) * half * (hi - lo)])
            .collect();
        let vals = solution.eval_on(e.id, &pts)?;
        for ((x, &w), (v, g)) in pts.iter().zip(&rule.weights).zip(vals) {
            let w = w * half * (hi - lo);
            let d = exact(x) - v;
            let dg = exact_grad(x)[1] - g[1];
            l2 = l2 + w * d * d;
            h1 = h1 + w * dg * dg;
        }
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1_semi: h1.sqrt() })
}

/// `(‖⟦u_h⟧‖_{0,f}, ‖[∇u_h]‖_{0,f})` on an interior face; point faces give
/// absolute values.
pub fn jump_norms<T: Real>(solution: &Solution<'_, T>, face: &Face<T>, n_quad: usize) -> Result<(T, T)> {
    let minus = face
        .minus
        .ok_or_else(|| Error::invalid(format!("face {} is a boundary face", face.id)))?;
    let rule = face_rule(face, solution.partition.dim(), n_quad)?;
    let up = solution.eval_on(face.plus, &rule.points)?;
    let um = solution.eval_on(minus, &rule.points)?;
    let n = face.normal_plus;
    let (mut j, mut fj) = (T::zero(), T::zero());
    for ((w, a), b) in rule.weights.iter().zip(&up).zip(&um) {
        let d = a.0 - b.0;
        let dn = (a.1[0] - b.1[0]) * n[0] + (a.1[1] - b.1[1]) * n[1];
        j = j + *w * d * d;
        fj = fj + *w * dn * dn;
    }
    Ok((j.sqrt(), fj.sqrt()))
}

/// `‖u_h - g‖_{0,f}` on a boundary face.
pub fn boundary_mismatch<T: Real>(
    solution: &Solution<'_, T>,
    face: &Face<T>,
    g: &dyn Fn(&Point<T>) -> T,
    n_quad: usize,
) -> Result<T> {
    if face.is_interior() {
        return Err(Error::invalid(format!("face {} is an interior face", face.id)));
    }
    let rule = face_rule(face, solution.partition.dim(), n_quad)?;
    let u = solution.eval_on(face.plus, &rule.points)?;
    let s = rule
        .weights
        .iter()
        .zip(&rule.points)
        .zip(&u)
        .fold(T::zero(), |acc, ((w, x), (v, _))| {
            let d = *v - g(x);
            acc + *w * d * d
        });
    Ok(s.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport<T> {
    pub l2: T,
    pub h1_semi: T,
    pub per_face_jump_l2: BTreeMap<usize, T>,
    pub per_face_flux_jump_l2: BTreeMap<usize, T>,
    pub boundary_mismatch_l2: BTreeMap<usize, T>,
    pub effective_rank: Option<usize>,
    pub residual_norm: Option<T>,
}

/// Every metric at once. `dirichlet` is the boundary datum compared on
/// boundary faces (for space-time, on spatial boundary faces).
pub fn error_report<T: Real>(
    solution: &Solution<'_, T>,
    exact: &dyn Fn(&Point<T>) -> T,
    exact_grad: &dyn Fn(&Point<T>) -> Point<T>,
    dirichlet: &dyn Fn(&Point<T>) -> T,
    n_quad: usize,
) -> Result<ErrorReport<T>> {
    let norms = error_norms(solution, exact, exact_grad, n_quad)?;
    let mut rep = ErrorReport {
        l2: norms.l2,
        h1_semi: norms.h1_semi,
        per_face_jump_l2: BTreeMap::new(),
        per_face_flux_jump_l2: BTreeMap::new(),
        boundary_mismatch_l2: BTreeMap::new(),
        effective_rank: solution.report.as_ref().map(|r| r.effective_rank),
        residual_norm: solution.report.as_ref().map(|r| r.residual_norm),
    };
    for f in solution.partition.faces() {
        if f.is_interior() {
            let (j, fj) = jump_norms(solution, f, n_quad)?;
            rep.per_face_jump_l2.insert(f.id, j);
            rep.per_face_flux_jump_l2.insert(f.id, fj);
        } else if f.class == crate::geometry::FaceClass::Spatial {
            rep.boundary_mismatch_l2
                .insert(f.id, boundary_mismatch(solution, f, dirichlet, n_quad)?);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Activation, FeatureBasis};
    use crate::geometry::{build_partition, Domain};

    #[test]
    fn zero_and_scaled_sine() {
        let d = Domain::<f64>::interval(0.0, 1.0).unwrap();
        let p = build_partition(&d, &[1]).unwrap();
        let b = vec![LocalBasis::Random(
            FeatureBasis::from_parameters(0, 1, vec![[1.0, 0.0]], vec![0.0], Activation::Sin).unwrap(),
        )];
        let zero = Solution::new(&p, &b, vec![0.0], Scheme::Dg).unwrap();
        assert_eq!(evaluate(&zero, &[(0, [0.3, 0.0])]).unwrap()[0].0, 0.0);
        let two = Solution::new(&p, &b, vec![2.0], Scheme::Dg).unwrap();
        let v = evaluate(&two, &[(0, [0.3, 0.0])]).unwrap()[0];
        assert!((v.0 - 2.0 * 0.3f64.sin()).abs() < 1e-15);
        assert!((v.1[0] - 2.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!(evaluate(&two, &[(1, [0.3, 0.0])]).is_err());

        let pi = std::f64::consts::PI;
        let n = error_norms(&zero, &|x| (pi * x[0]).sin(), &|x| [pi * (pi * x[0]).cos(), 0.0], 30).unwrap();
        assert!((n.l2 - 0.5f64.sqrt()).abs() < 1e-10);
        assert!((n.h1_semi - pi * 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn point_face_jump_between_constants() {
        let d = Domain::<f64>::interval(0.0, 1.0).unwrap();
        let p = build_partition(&d, &[2]).unwrap();
        let b = crate::basis::polynomial_bases(&p, 0);
        let s = Solution::new(&p, &b, vec![0.0, 1.0], Scheme::Dg).unwrap();
        let f = p.faces().iter().find(|f| f.is_interior()).unwrap();
        assert_eq!(jump_norms(&s, f, 5).unwrap(), (1.0, 0.0));
        let bf = p.faces().iter().find(|f| !f.is_interior()).unwrap();
        assert!(jump_norms(&s, bf, 5).is_err());
        assert!(boundary_mismatch(&s, f, &|_| 0.0, 5).is_err());
    }
}
