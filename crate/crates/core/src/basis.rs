//! Local feature maps: fixed random single-hidden-layer networks and a
//! polynomial map used as a testing oracle.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Element, Partition};
use crate::scalar::{Point, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Sin,
}

impl Activation {
    /// `(sigma(z), sigma'(z))`.
    #[inline]
    pub fn value_and_derivative<T: Real>(self, z: T) -> (T, T) {
        match self {
            Activation::Tanh => {
                let s = z.tanh();
                (s, T::one() - s * s)
            }
            Activation::Sin => (z.sin(), z.cos()),
        }
    }
}

/// Affine map from an element onto `[-1, 1]^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LocalFrame<T> {
    center: Point<T>,
    inv_half: Point<T>,
}

impl<T: Real> LocalFrame<T> {
    fn of(element: &Element<T>, dim: usize) -> Self {
        let mut center = [T::zero(); 2];
        let mut inv_half = [T::one(); 2];
        let half = T::lit(0.5);
        for a in 0..dim {
            center[a] = (element.lower[a] + element.upper[a]) * half;
            inv_half[a] = T::one() / ((element.upper[a] - element.lower[a]) * half);
        }
        Self { center, inv_half }
    }

    #[inline]
    fn apply(&self, p: &Point<T>) -> Point<T> {
        [
            (p[0] - self.center[0]) * self.inv_half[0],
            (p[1] - self.center[1]) * self.inv_half[1],
        ]
    }
}

/// `phi_j(x) = sigma(w_j . x + b_j)` with `W`, `b` drawn once and kept fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBasis<T> {
    pub element_id: usize,
    pub dim: usize,
    /// Row `j` holds `w_j` (second entry unused in 1-d).
    pub weights: Vec<Point<T>>,
    pub biases: Vec<T>,
    pub activation: Activation,
    pub w0: T,
    pub seed: u64,
    frame: Option<LocalFrame<T>>,
}

/// Monomials of total degree `<= degree` in element-local coordinates on `[-1, 1]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialBasis<T> {
    pub element_id: usize,
    pub dim: usize,
    pub degree: u32,
    pub exponents: Vec<[u32; 2]>,
    frame: LocalFrame<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LocalBasis<T> {
    Random(FeatureBasis<T>),
    Polynomial(PolynomialBasis<T>),
}


/// Values and gradients of all `M` features at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureEval<T> {
    pub values: Vec<T>,
    pub gradients: Vec<Point<T>>,
}

/// Features sampled at a batch of points: `values[(q, j)] = phi_j(x_q)` and
/// `grads[a][(q, j)] = d phi_j / d x_a (x_q)`.
#[derive(Clone, Debug)]
pub struct FeatureTable<T> {
    pub values: Mat<T>,
    pub grads: Vec<Mat<T>>,
}

impl<T: Real> FeatureTable<T> {
    /// Directional derivative `sum_a n_a d_a phi` along a fixed vector.
    pub fn directional(&self, n: &Point<T>) -> Mat<T> {
        let (r, c) = (self.values.nrows(), self.values.ncols());
        Mat::from_fn(r, c, |i, j| {
            self.grads
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (a, g)| acc + n[a] * g[(i, j)])
        })
    }
}

/// Draws `M` features for one element: `M * d` weights followed by `M`
/// biases, uniform on `[-w0, w0]`, from a ChaCha20 stream selected by the
/// element id. The result depends only on `(global_seed, element_id)`.
pub fn sample_basis<T: Real>(
    global_seed: u64,
    element: &Element<T>,
    dim: usize,
    m: usize,
    w0: T,
    activation: Activation,
) -> Result<FeatureBasis<T>> {
    if m == 0 {
        return Err(Error::invalid("a basis needs at least one feature"));
    }
    if !(w0 > T::zero()) || !w0.is_finite() {
        return Err(Error::invalid(format!("w0 must be positive and finite, got {w0}")));
    }
    if !(1..=2).contains(&dim) {
        return Err(Error::invalid(format!("basis dimension must be 1 or 2, got {dim}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(global_seed);
    rng.set_stream(element.id as u64);
    let half = w0.to_f64_lossy();
    let mut draw = || T::lit(rng.random_range(-half..=half));
    let mut weights = vec![[T::zero(); 2]; m];
    for w in weights.iter_mut() {
        for wa in w.iter_mut().take(dim) {
            *wa = draw();
        }
    }
    let biases = (0..m).map(|_| draw()).collect();
    Ok(FeatureBasis {
        element_id: element.id,
        dim,
        weights,
        biases,
        activation,
        w0,
        seed: global_seed,
        frame: None,
    })
}

impl<T: Real> FeatureBasis<T> {
    /// Builds a basis from explicit parameters (raw physical inputs).
    pub fn from_parameters(
        element_id: usize,
        dim: usize,
        weights: Vec<Point<T>>,
        biases: Vec<T>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weight rows but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        let w0 = weights
            .iter()
            .flat_map(|w| w.iter().copied())
            .chain(biases.iter().copied())
            .fold(T::zero(), |a, b| a.max(b.abs()));
        Ok(Self {
            element_id,
            dim,
            weights,
            biases,
            activation,
            w0,
            seed: 0,
            frame: None,
        })
    }

    /// Feed element-local coordinates in `[-1, 1]^d` to the network instead of
    /// raw physical coordinates.
    pub fn with_local_inputs(mut self, element: &Element<T>) -> Self {
        self.frame = Some(LocalFrame::of(element, self.dim));
        self
    }

    pub fn len(&self) -> usize {
        self.biases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.biases.is_empty()
    }
}

/// Polynomial oracle features for `element`.
pub fn polynomial_features<T: Real>(element: &Element<T>, dim: usize, degree: u32) -> PolynomialBasis<T> {
    let mut exponents = Vec::new();
    for total in 0..=degree {
        if dim == 1 {
            exponents.push([total, 0]);
        } else {
            for k in (0..=total).rev() {
                exponents.push([k, total - k]);
            }
        }
    }
    PolynomialBasis {
        element_id: element.id,
        dim,
        degree,
        exponents,
        frame: LocalFrame::of(element, dim),
    }
}

impl<T: Real> PolynomialBasis<T> {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// `(xi^k, k xi^(k-1))`.
#[inline]
fn power<T: Real>(xi: T, k: u32) -> (T, T) {
    if k == 0 {
        (T::one(), T::zero())
    } else {
        let pm1 = xi.powi(k as i32 - 1);
        (pm1 * xi, T::from_usize_lossy(k as usize) * pm1)
    }
}

impl<T: Real> LocalBasis<T> {
    pub fn len(&self) -> usize {
        match self {
            LocalBasis::Random(b) => b.len(),
            LocalBasis::Polynomial(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            LocalBasis::Random(b) => b.dim,
            LocalBasis::Polynomial(b) => b.dim,
        }
    }

    pub fn element_id(&self) -> usize {
        match self {
            LocalBasis::Random(b) => b.element_id,
            LocalBasis::Polynomial(b) => b.element_id,
        }
    }

    /// Writes `phi_j(x)` into `val[j]` and `grad phi_j(x)` into `grad[a][j]`.
    fn eval_into(&self, x: &Point<T>, mut emit: impl FnMut(usize, T, Point<T>)) {
        match self {
            LocalBasis::Random(b) => {
                let (xin, scale) = match &b.frame {
                    Some(f) => (f.apply(x), f.inv_half),
                    None => (*x, [T::one(); 2]),
                };
                for (j, (w, &bj)) in b.weights.iter().zip(&b.biases).enumerate() {
                    let mut z = bj + w[0] * xin[0];
                    if b.dim == 2 {
                        z = z + w[1] * xin[1];
                    }
                    let (s, ds) = b.activation.value_and_derivative(z);
                    let g = [ds * w[0] * scale[0], if b.dim == 2 { ds * w[1] * scale[1] } else { T::zero() }];
                    emit(j, s, g);
                }
            }
            LocalBasis::Polynomial(b) => {
                let xi = b.frame.apply(x);
                for (j, e) in b.exponents.iter().enumerate() {
                    let (p0, d0) = power(xi[0], e[0]);
                    if b.dim == 1 {
                        emit(j, p0, [d0 * b.frame.inv_half[0], T::zero()]);
                    } else {
                        let (p1, d1) = power(xi[1], e[1]);
                        emit(
                            j,
                            p0 * p1,
                            [d0 * p1 * b.frame.inv_half[0], p0 * d1 * b.frame.inv_half[1]],
                        );
                    }
                }
            }
        }
    }

    /// Values and gradients at each point.
    pub fn eval(&self, points: &[Point<T>]) -> Vec<FeatureEval<T>> {
        let m = self.len();
        points
            .iter()
            .map(|x| {
                let mut out = FeatureEval {
                    values: vec![T::zero(); m],
                    gradients: vec![[T::zero(); 2]; m],
                };
                self.eval_into(x, |j, v, g| {
                    out.values[j] = v;
                    out.gradients[j] = g;
                });
                out
            })
            .collect()
    }

    /// Batched evaluation laid out for matrix products.
    pub fn table(&self, points: &[Point<T>]) -> FeatureTable<T> {
        let (n, m, d) = (points.len(), self.len(), self.dim());
        let mut values = Mat::zeros(n, m);
        let mut grads: Vec<Mat<T>> = (0..d).map(|_| Mat::zeros(n, m)).collect();
        for (q, x) in points.iter().enumerate() {
            self.eval_into(x, |j, v, g| {
                values[(q, j)] = v;
                for (a, ga) in grads.iter_mut().enumerate() {
                    ga[(q, j)] = g[a];
                }
            });
        }
        FeatureTable { values, grads }
    }
}

/// One random basis per element of `partition`.
pub fn sample_bases<T: Real>(
    global_seed: u64,
    partition: &Partition<T>,
    m: usize,
    w0: T,
    activation: Activation,
    local_inputs: bool,
) -> Result<Vec<LocalBasis<T>>> {
    let dim = partition.dim();
    partition
        .elements()
        .iter()
        .map(|e| {
            let b = sample_basis(global_seed, e, dim, m, w0, activation)?;
            Ok(LocalBasis::Random(if local_inputs { b.with_local_inputs(e) } else { b }))
        })
        .collect()
}

/// One polynomial basis of total degree `<= degree` per element.
pub fn polynomial_bases<T: Real>(partition: &Partition<T>, degree: u32) -> Vec<LocalBasis<T>> {
    let dim = partition.dim();
    partition
        .elements()
        .iter()
        .map(|e| LocalBasis::Polynomial(polynomial_features(e, dim, degree)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_partition, Domain};

    fn unit_element(dim: usize) -> Element<f64> {
        let d = if dim == 1 {
            Domain::interval(0.0, 1.0).unwrap()
        } else {
            Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap()
        };
        build_partition(&d, &vec![1; dim]).unwrap().elements()[0].clone()
    }

    #[test]
    fn sampling_is_deterministic_per_element() {
        let d = Domain::<f64>::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let p = build_partition(&d, &[2, 2]).unwrap();
        let a = sample_basis(7, &p.elements()[1], 2, 50, 1.0, Activation::Tanh).unwrap();
        let b = sample_basis(7, &p.elements()[1], 2, 50, 1.0, Activation::Tanh).unwrap();
        assert_eq!(a, b);
        let c = sample_basis(7, &p.elements()[2], 2, 50, 1.0, Activation::Tanh).unwrap();
        assert_ne!(a.weights, c.weights);
        assert!(sample_basis(7, &p.elements()[0], 2, 0, 1.0, Activation::Tanh).is_err());
        assert!(sample_basis(7, &p.elements()[0], 2, 3, 0.0, Activation::Tanh).is_err());
    }

    #[test]
    fn sampled_range_fills_the_interval() {
        let e = unit_element(2);
        let b = sample_basis(1, &e, 2, 1000, 5.5, Activation::Tanh).unwrap();
        let all: Vec<f64> = b
            .weights
            .iter()
            .flat_map(|w| w.iter().copied())
            .chain(b.biases.iter().copied())
            .collect();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((-5.5..=-5.49).contains(&lo), "min {lo}");
        assert!((5.49..=5.5).contains(&hi), "max {hi}");
    }

    #[test]
    fn closed_form_values() {
        let sin = FeatureBasis::from_parameters(0, 2, vec![[1.0, 0.0]], vec![0.0], Activation::Sin).unwrap();
        let ev = &LocalBasis::Random(sin).eval(&[[std::f64::consts::FRAC_PI_2, 3.0]])[0];
        assert!((ev.values[0] - 1.0).abs() < 1e-15);
        assert!(ev.gradients[0][0].abs() < 1e-15 && ev.gradients[0][1] == 0.0);

        let th = LocalBasis::Random(
            FeatureBasis::from_parameters(0, 2, vec![[0.0, 0.0]], vec![0.5], Activation::Tanh).unwrap(),
        );
        for ev in th.eval(&[[0.0, 0.0], [0.3, -2.0]]) {
            assert_eq!(ev.values[0], 0.5f64.tanh());
            assert_eq!(ev.gradients[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn polynomial_features_layout() {
        let e = unit_element(1);
        let p = LocalBasis::Polynomial(polynomial_features(&e, 1, 1));
        for x in [0.0, 0.3, 1.0] {
            let ev = &p.eval(&[[x, 0.0]])[0];
            assert_eq!(ev.values, vec![1.0, 2.0 * x - 1.0]);
            assert_eq!(ev.gradients[1][0], 2.0);
        }
        let e2 = unit_element(2);
        let p2 = polynomial_features(&e2, 2, 2);
        assert_eq!(p2.len(), 6);
        let k = p2.exponents.iter().position(|e| *e == [1, 1]).unwrap();
        let ev = &LocalBasis::Polynomial(p2).eval(&[[0.5, 0.5]])[0];
        assert_eq!(ev.gradients[k], [0.0, 0.0]);
    }

    #[test]
    fn table_matches_pointwise_eval() {
        let e = unit_element(2);
        let b = LocalBasis::Random(sample_basis(3, &e, 2, 7, 2.0, Activation::Sin).unwrap());
        let pts = [[0.1, 0.2], [0.7, 0.4], [1.0, 0.0]];
        let t = b.table(&pts);
        let ev = b.eval(&pts);
        for q in 0..pts.len() {
            for j in 0..7 {
                assert_eq!(t.values[(q, j)], ev[q].values[j]);
                assert_eq!(t.grads[1][(q, j)], ev[q].gradients[j][1]);
            }
        }
        let dn = t.directional(&[0.0, -1.0]);
        assert_eq!(dn[(1, 3)], -ev[1].gradients[3][1]);
    }

    #[test]
    fn local_inputs_chain_rule() {
        let d = Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let p = build_partition(&d, &[2, 2]).unwrap();
        let e = &p.elements()[3];
        let b = LocalBasis::Random(sample_basis(3, e, 2, 5, 1.0, Activation::Tanh).unwrap().with_local_inputs(e));
        let x: Point<f64> = [0.61, 0.77];
        let h = 1e-6;
        let ev = &b.eval(&[x])[0];
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (vp, vm) = (&b.eval(&[xp])[0], &b.eval(&[xm])[0]);
            for j in 0..5 {
                let fd = (vp.values[j] - vm.values[j]) / (2.0 * h);
                assert!((fd - ev.gradients[j][a]).abs() < 1e-7);
            }
        }
    }
}
