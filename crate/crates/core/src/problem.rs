//! Model problems: `-Δu + c u = F` with Dirichlet data, and the heat equation
//! `u_t - λ u_xx = f` on a space-time slab.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scalar::{Point, Real};

pub type ScalarFn<T> = Arc<dyn Fn(&Point<T>) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(&Point<T>) -> Point<T> + Send + Sync>;

/// Wraps a closure as a shareable [`ScalarFn`].
pub fn scalar_fn<T, F>(f: F) -> ScalarFn<T>
where
    F: Fn(&Point<T>) -> T + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Wraps a closure as a shareable [`VectorFn`].
pub fn vector_fn<T, F>(f: F) -> VectorFn<T>
where
    F: Fn(&Point<T>) -> Point<T> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// `-Δu + c u = F` in `Ω`, `u = g` on `∂Ω`.
///
/// A problem stated as `u'' - λu = f` maps to `c = λ`, `F = -f`.
#[derive(Clone)]
pub struct EllipticProblem<T> {
    pub domain: Domain<T>,
    pub reaction: T,
    pub source: ScalarFn<T>,
    pub dirichlet: ScalarFn<T>,
    pub exact: Option<ScalarFn<T>>,
    pub exact_grad: Option<VectorFn<T>>,
}

impl<T: Real> EllipticProblem<T> {
    pub fn new(domain: Domain<T>, reaction: T, source: ScalarFn<T>, dirichlet: ScalarFn<T>) -> Result<Self> {
        if domain.is_temporal() {
            return Err(Error::invalid("elliptic problems need a purely spatial domain"));
        }
        if !(reaction >= T::zero()) {
            return Err(Error::invalid(format!("reaction must be non-negative, got {reaction}")));
        }
        Ok(Self {
            domain,
            reaction,
            source,
            dirichlet,
            exact: None,
            exact_grad: None,
        })
    }

    /// Problem whose data are generated from a known solution `u` with
    /// `F = -Δu + c u` supplied by the caller.
    pub fn manufactured(
        domain: Domain<T>,
        reaction: T,
        exact: ScalarFn<T>,
        exact_grad: VectorFn<T>,
        source: ScalarFn<T>,
    ) -> Result<Self> {
        let mut p = Self::new(domain, reaction, source, exact.clone())?;
        p.exact = Some(exact);
        p.exact_grad = Some(exact_grad);
        Ok(p)
    }
}

impl<T: Real> fmt::Debug for EllipticProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("domain", &self.domain)
            .field("reaction", &self.reaction)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// `u_t - λ u_xx = f` on `I x Ω`. Every callable takes `[t, x]`; the
/// initial datum ignores `t`.
#[derive(Clone)]
pub struct HeatProblem<T> {
    pub domain: Domain<T>,
    pub diffusivity: T,
    pub source: ScalarFn<T>,
    pub initial: ScalarFn<T>,
    pub boundary: ScalarFn<T>,
    pub exact: Option<ScalarFn<T>>,
    /// `[u_t, u_x]`.
    pub exact_grad: Option<VectorFn<T>>,
}

impl<T: Real> HeatProblem<T> {
    pub fn new(
        domain: Domain<T>,
        diffusivity: T,
        source: ScalarFn<T>,
        initial: ScalarFn<T>,
        boundary: ScalarFn<T>,
    ) -> Result<Self> {
        if !domain.is_temporal() {
            return Err(Error::invalid("heat problems need a space-time domain"));
        }
        if !(diffusivity > T::zero()) {
            return Err(Error::invalid(format!("diffusivity must be positive, got {diffusivity}")));
        }
        Ok(Self {
            domain,
            diffusivity,
            source,
            initial,
            boundary,
            exact: None,
            exact_grad: None,
        })
    }

    pub fn manufactured(
        domain: Domain<T>,
        diffusivity: T,
        exact: ScalarFn<T>,
        exact_grad: VectorFn<T>,
        source: ScalarFn<T>,
    ) -> Result<Self> {
        let mut p = Self::new(domain, diffusivity, source, exact.clone(), exact.clone())?;
        p.exact = Some(exact);
        p.exact_grad = Some(exact_grad);
        Ok(p)
    }

    /// Final time `T`.
    pub fn final_time(&self) -> T {
        self.domain.bounds()[0].1
    }
}

impl<T: Real> fmt::Debug for HeatProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeatProblem")
            .field("domain", &self.domain)
            .field("diffusivity", &self.diffusivity)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}
