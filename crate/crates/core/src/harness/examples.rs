//! Manufactured benchmark problems with hand-derived source terms.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Domain;
use crate::problem::{scalar_fn, vector_fn, EllipticProblem, HeatProblem};
use crate::scalar::{Point, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    Helmholtz1d,
    Poisson2d,
    Heat1d,
}

impl ExampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExampleKind::Helmholtz1d => "helmholtz1d",
            ExampleKind::Poisson2d => "poisson2d",
            ExampleKind::Heat1d => "heat1d",
        }
    }

    pub fn is_space_time(self) -> bool {
        self == ExampleKind::Heat1d
    }

    /// Spatial (or space-time) dimension of the partition.
    pub fn dim(self) -> usize {
        match self {
            ExampleKind::Helmholtz1d => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `u = sin(4π(x+0.1)) cos(4π(x+0.1)) = ½ sin θ`, `θ = 8π(x+0.1)`.
pub mod helmholtz {
    use super::*;

    fn theta<T: Real>(x: T) -> T {
        T::lit(8.0 * std::f64::consts::PI) * (x + T::lit(0.1))
    }

    pub fn u<T: Real>(x: &Point<T>) -> T {
        T::lit(0.5) * theta(x[0]).sin()
    }

    pub fn du<T: Real>(x: &Point<T>) -> Point<T> {
        [T::lit(4.0 * std::f64::consts::PI) * theta(x[0]).cos(), T::zero()]
    }

    /// `F = -u'' + λu` for the operator `-u'' + λu`.
    pub fn source<T: Real>(lambda: T, x: &Point<T>) -> T {
        let pi2 = T::lit(std::f64::consts::PI * std::f64::consts::PI);
        let s = theta(x[0]).sin();
        T::lit(32.0) * pi2 * s + lambda * T::lit(0.5) * s
    }
}

/// `u = e^{x+y} sin(3πx + π/2) cos(πy + π/5)`.
pub mod poisson {
    use super::*;
    use std::f64::consts::PI;

    fn parts<T: Real>(x: &Point<T>) -> (T, T, T, T, T) {
        let e = (x[0] + x[1]).exp();
        let a = T::lit(3.0 * PI) * x[0] + T::lit(0.5 * PI);
        let b = T::lit(PI) * x[1] + T::lit(0.2 * PI);
        (e, a.sin(), a.cos(), b.sin(), b.cos())
    }

    pub fn u<T: Real>(x: &Point<T>) -> T {
        let (e, sa, _, _, cb) = parts(x);
        e * sa * cb
    }

    pub fn du<T: Real>(x: &Point<T>) -> Point<T> {
        let (e, sa, ca, sb, cb) = parts(x);
        let pi = T::lit(PI);
        [
            e * (sa + T::lit(3.0) * pi * ca) * cb,
            e * sa * (cb - pi * sb),
        ]
    }

    /// `F = -Δu`.
    pub fn source<T: Real>(x: &Point<T>) -> T {
        let (e, sa, ca, sb, cb) = parts(x);
        let pi = T::lit(PI);
        let pi2 = pi * pi;
        let uxx = e * cb * ((T::one() - T::lit(9.0) * pi2) * sa + T::lit(6.0) * pi * ca);
        let uyy = e * sa * ((T::one() - pi2) * cb - T::lit(2.0) * pi * sb);
        -(uxx + uyy)
    }
}

/// `u = -exp(cos(πx + 3π) + t²)` with points `[t, x]`.
pub mod heat {
    use super::*;
    use std::f64::consts::PI;

    fn parts<T: Real>(p: &Point<T>) -> (T, T, T) {
        let z = T::lit(PI) * p[1] + T::lit(3.0 * PI);
        let (s, c) = (z.sin(), z.cos());
        ((c + p[0] * p[0]).exp(), s, c)
    }

    pub fn u<T: Real>(p: &Point<T>) -> T {
        -parts(p).0
    }

    /// `[u_t, u_x]`.
    pub fn du<T: Real>(p: &Point<T>) -> Point<T> {
        let (e, s, _) = parts(p);
        [-T::lit(2.0) * p[0] * e, T::lit(PI) * s * e]
    }

    pub fn uxx<T: Real>(p: &Point<T>) -> T {
        let (e, s, c) = parts(p);
        T::lit(PI * PI) * e * (c - s * s)
    }

    /// `f = u_t - λ u_xx`.
    pub fn source<T: Real>(lambda: T, p: &Point<T>) -> T {
        du(p)[0] - lambda * uxx(p)
    }
}

/// `u'' - λu = f` on `[0, 1]`, posed as `-u'' + λu = -f`.
pub fn helmholtz1d<T: Real>(lambda: T) -> Result<EllipticProblem<T>> {
    EllipticProblem::manufactured(
        Domain::interval(T::zero(), T::one())?,
        lambda,
        scalar_fn(helmholtz::u::<T>),
        vector_fn(helmholtz::du::<T>),
        scalar_fn(move |x: &Point<T>| helmholtz::source(lambda, x)),
    )
}

/// `-Δu = f` on `[0, 1]²`.
pub fn poisson2d<T: Real>() -> Result<EllipticProblem<T>> {
    EllipticProblem::manufactured(
        Domain::rectangle((T::zero(), T::one()), (T::zero(), T::one()))?,
        T::zero(),
        scalar_fn(poisson::u::<T>),
        vector_fn(poisson::du::<T>),
        scalar_fn(poisson::source::<T>),
    )
}

/// `u_t - λu_xx = f` on `[0, 1] x [0, 1]`.
pub fn heat1d<T: Real>(lambda: T) -> Result<HeatProblem<T>> {
    HeatProblem::manufactured(
        Domain::space_time((T::zero(), T::one()), (T::zero(), T::one()))?,
        lambda,
        scalar_fn(heat::u::<T>),
        vector_fn(heat::du::<T>),
        scalar_fn(move |p: &Point<T>| heat::source(lambda, p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    fn shifted(x: &[f64; 2], a: usize, d: f64) -> [f64; 2] {
        let mut p = *x;
        p[a] += d;
        p
    }

    // Fourth-order central stencils.
    fn d1(f: &dyn Fn(&[f64; 2]) -> f64, x: &[f64; 2], a: usize) -> f64 {
        let h = 1e-3;
        let s = |k: f64| f(&shifted(x, a, k * h));
        (-s(2.0) + 8.0 * s(1.0) - 8.0 * s(-1.0) + s(-2.0)) / (12.0 * h)
    }

    fn d2(f: &dyn Fn(&[f64; 2]) -> f64, x: &[f64; 2], a: usize) -> f64 {
        let h = 1e-3;
        let s = |k: f64| f(&shifted(x, a, k * h));
        (-s(2.0) + 16.0 * s(1.0) - 30.0 * s(0.0) + 16.0 * s(-1.0) - s(-2.0)) / (12.0 * h * h)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-6 * b.abs().max(1.0)
    }

    #[test]
    fn helmholtz_matches_finite_differences() {
        let lambda = 10.0;
        for x in points(20, 1) {
            let x = [x[0], 0.0];
            assert!(close(d1(&helmholtz::u, &x, 0), helmholtz::du(&x)[0]));
            let f = -d2(&helmholtz::u, &x, 0) + lambda * helmholtz::u(&x);
            assert!(close(f, helmholtz::source(lambda, &x)));
        }
        let p = helmholtz1d::<f64>(1.0).unwrap();
        let g0 = (p.dirichlet)(&[0.0, 0.0]);
        let expect = (0.4 * std::f64::consts::PI).sin() * (0.4 * std::f64::consts::PI).cos();
        assert!((g0 - expect).abs() < 1e-15);
    }

    #[test]
    fn poisson_matches_finite_differences() {
        for x in points(20, 2) {
            let g = poisson::du(&x);
            for a in 0..2 {
                assert!(close(d1(&poisson::u, &x, a), g[a]));
            }
            let lap = d2(&poisson::u, &x, 0) + d2(&poisson::u, &x, 1);
            assert!(close(-lap, poisson::source(&x)));
        }
    }

    #[test]
    fn heat_matches_finite_differences() {
        for lambda in [0.001, 1.0] {
            for x in points(20, 3) {
                let g = heat::du(&x);
                for a in 0..2 {
                    assert!(close(d1(&heat::u, &x, a), g[a]));
                }
                let f = d1(&heat::u, &x, 0) - lambda * d2(&heat::u, &x, 1);
                assert!(close(f, heat::source(lambda, &x)));
            }
        }
    }
}
