//! Uniform Cartesian partitions of intervals, rectangles and space-time slabs.
//!
//! Elements are numbered row-major with the last axis fastest, so along every
//! axis the element with the smaller index sits at the smaller coordinate.
//! Interior faces take the smaller-index element as the `plus` side and
//! `normal_plus` therefore always points along `+e_axis`. Boundary faces carry
//! only a plus element and an outward normal.

use crate::error::{Error, Result};
use crate::scalar::{Point, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Domain<T> {
    bounds: Vec<(T, T)>,
    temporal: bool,
}

impl<T: Real> Domain<T> {
    pub fn new(bounds: Vec<(T, T)>, temporal: bool) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::invalid(format!(
                "domain dimension must be 1 or 2, got {}",
                bounds.len()
            )));
        }
        for (axis, (lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::invalid(format!(
                    "axis {axis}: lower bound {lo} must be below upper bound {hi}"
                )));
            }
        }
        if temporal && bounds.len() != 2 {
            return Err(Error::invalid("a space-time domain must be two-dimensional"));
        }
        Ok(Self { bounds, temporal })
    }

    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::new(vec![(a, b)], false)
    }

    pub fn rectangle(x: (T, T), y: (T, T)) -> Result<Self> {
        Self::new(vec![x, y], false)
    }

    /// `I x Omega` with axis 0 the time interval and axis 1 the spatial interval.
    pub fn space_time(time: (T, T), space: (T, T)) -> Result<Self> {
        Self::new(vec![time, space], true)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }

    pub fn is_temporal(&self) -> bool {
        self.temporal
    }

    pub fn volume(&self) -> T {
        self.bounds
            .iter()
            .fold(T::one(), |acc, &(lo, hi)| acc * (hi - lo))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element<T> {
    pub id: usize,
    /// Grid coordinates of the cell (second entry is zero in 1-d).
    pub cell: [usize; 2],
    pub lower: Point<T>,
    pub upper: Point<T>,
    pub diameter: T,
}

impl<T: Real> Element<T> {
    pub fn width(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self, dim: usize) -> T {
        (0..dim).fold(T::one(), |acc, a| acc * self.width(a))
    }

    pub fn center(&self) -> Point<T> {
        let half = T::lit(0.5);
        [
            (self.lower[0] + self.upper[0]) * half,
            (self.lower[1] + self.upper[1]) * half,
        ]
    }

    pub fn contains(&self, p: &Point<T>, dim: usize, tol: T) -> bool {
        (0..dim).all(|a| p[a] >= self.lower[a] - tol && p[a] <= self.upper[a] + tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceKind {
    Interior,
    Boundary,
}

/// Classification of faces in the space-time setting. Purely spatial
/// partitions label every face `Spatial`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceClass {
    /// Normal along a spatial axis.
    Spatial,
    /// Interior face with normal along the time axis (`t = t_i`, `0 < i < N_t`).
    Temporal,
    /// `t = t_0`.
    Initial,
    /// `t = T`.
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face<T> {
    pub id: usize,
    pub kind: FaceKind,
    /// Axis the face normal is aligned with.
    pub axis: usize,
    pub plus: usize,
    pub minus: Option<usize>,
    /// Unit normal of the plus side; outward on boundary faces.
    pub normal_plus: Point<T>,
    /// Bounding box of the face; `lower[axis] == upper[axis]`.
    pub lower: Point<T>,
    pub upper: Point<T>,
    /// Length of an edge, or 1 for the point faces of a 1-d grid.
    pub measure: T,
    /// Length scale entering the penalty `eta_e / h_f`.
    pub h_f: T,
    pub class: FaceClass,
}

impl<T: Real> Face<T> {
    pub fn is_interior(&self) -> bool {
        self.kind == FaceKind::Interior
    }

    pub fn element(&self, side: Side) -> Option<usize> {
        match side {
            Side::Plus => Some(self.plus),
            Side::Minus => self.minus,
        }
    }

    /// Outward normal of the element on `side`.
    pub fn normal(&self, side: Side) -> Point<T> {
        match side {
            Side::Plus => self.normal_plus,
            Side::Minus => [-self.normal_plus[0], -self.normal_plus[1]],
        }
    }

    /// The tangential axis of an edge in 2-d. `None` for point faces.
    pub fn tangent_axis(&self, dim: usize) -> Option<usize> {
        (dim == 2).then_some(1 - self.axis)
    }
}

#[derive(Clone, Debug)]
pub struct Partition<T> {
    domain: Domain<T>,
    cells: [usize; 2],
    elements: Vec<Element<T>>,
    faces: Vec<Face<T>>,
    incidence: Vec<Vec<(usize, Side)>>,
    h: T,
}

impl<T: Real> Partition<T> {
    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> Result<&Element<T>> {
        self.elements
            .get(id)
            .ok_or_else(|| Error::invalid(format!("element {id} out of range")))
    }

    pub fn faces(&self) -> &[Face<T>] {
        &self.faces
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Cells per axis (second entry is 1 in 1-d).
    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    /// Max element diameter.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn is_space_time(&self) -> bool {
        self.domain.is_temporal()
    }

    /// `(N_t, N_s)` for space-time slabs.
    pub fn slab_counts(&self) -> Option<(usize, usize)> {
        self.is_space_time().then_some((self.cells[0], self.cells[1]))
    }

    pub fn element_at(&self, cell: [usize; 2]) -> usize {
        cell[0] * self.cells[1] + cell[1]
    }

    /// Faces bounding `element_id` together with the element's side on each.
    pub fn faces_of(&self, element_id: usize) -> Result<Vec<(&Face<T>, Side)>> {
        let inc = self
            .incidence
            .get(element_id)
            .ok_or_else(|| Error::invalid(format!("element {element_id} out of range")))?;
        Ok(inc.iter().map(|&(f, s)| (&self.faces[f], s)).collect())
    }

    /// Element containing `p`, preferring the lowest index on shared closures.
    pub fn locate(&self, p: &Point<T>) -> Option<usize> {
        let dim = self.dim();
        let mut cell = [0usize; 2];
        for a in 0..dim {
            let (lo, hi) = self.domain.bounds[a];
            if p[a] < lo || p[a] > hi {
                return None;
            }
            let n = self.cells[a];
            let frac = (p[a] - lo) / (hi - lo) * T::from_usize_lossy(n);
            let idx = frac.floor().to_usize().unwrap_or(0);
            cell[a] = idx.min(n - 1);
        }
        Some(self.element_at(cell))
    }
}

/// Builds a uniform grid with `cells_per_axis[a]` cells along axis `a`.
pub fn build_partition<T: Real>(domain: &Domain<T>, cells_per_axis: &[usize]) -> Result<Partition<T>> {
    let dim = domain.dim();
    if cells_per_axis.len() != dim {
        return Err(Error::invalid(format!(
            "expected {dim} cell counts, got {}",
            cells_per_axis.len()
        )));
    }
    if let Some(a) = cells_per_axis.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!("axis {a} has zero cells")));
    }
    let cells = [cells_per_axis[0], if dim == 2 { cells_per_axis[1] } else { 1 }];
    let bounds = domain.bounds();
    let coord = |axis: usize, i: usize| -> T {
        let (lo, hi) = bounds[axis];
        if i == cells[axis] {
            hi
        } else {
            lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(cells[axis])
        }
    };

    let mut elements = Vec::with_capacity(cells[0] * cells[1]);
    for i0 in 0..cells[0] {
        for i1 in 0..cells[1] {
            let lower = [coord(0, i0), if dim == 2 { coord(1, i1) } else { T::zero() }];
            let upper = [coord(0, i0 + 1), if dim == 2 { coord(1, i1 + 1) } else { T::zero() }];
            let diameter = (0..dim)
                .map(|a| (upper[a] - lower[a]) * (upper[a] - lower[a]))
                .sum::<T>()
                .sqrt();
            elements.push(Element {
                id: elements.len(),
                cell: [i0, i1],
                lower,
                upper,
                diameter,
            });
        }
    }
    let index = |c0: usize, c1: usize| c0 * cells[1] + c1;

    let mut faces: Vec<Face<T>> = Vec::new();
    let temporal = domain.is_temporal();
    let classify = |axis: usize, pos: usize, n: usize| -> FaceClass {
        if temporal && axis == 0 {
            if pos == 0 {
                FaceClass::Initial
            } else if pos == n {
                FaceClass::Final
            } else {
                FaceClass::Temporal
            }
        } else {
            FaceClass::Spatial
        }
    };

    for axis in 0..dim {
        let other = 1 - axis;
        let n_axis = cells[axis];
        let n_other = if dim == 2 { cells[other] } else { 1 };
        for pos in 0..=n_axis {
            for j in 0..n_other {
                // Cell coordinates of the elements on either side.
                let cell_at = |k: usize| -> [usize; 2] {
                    let mut c = [0usize; 2];
                    c[axis] = k;
                    if dim == 2 {
                        c[other] = j;
                    }
                    c
                };
                let face_coord = coord(axis, pos);
                let mut lower = [T::zero(); 2];
                let mut upper = [T::zero(); 2];
                lower[axis] = face_coord;
                upper[axis] = face_coord;
                if dim == 2 {
                    lower[other] = coord(other, j);
                    upper[other] = coord(other, j + 1);
                }
                let measure = if dim == 2 { upper[other] - lower[other] } else { T::one() };
                let mut normal = [T::zero(); 2];
                let (kind, plus, minus) = if pos == 0 {
                    normal[axis] = -T::one();
                    let c = cell_at(0);
                    (FaceKind::Boundary, index(c[0], c[1]), None)
                } else if pos == n_axis {
                    normal[axis] = T::one();
                    let c = cell_at(n_axis - 1);
                    (FaceKind::Boundary, index(c[0], c[1]), None)
                } else {
                    normal[axis] = T::one();
                    let lo = cell_at(pos - 1);
                    let hi = cell_at(pos);
                    (FaceKind::Interior, index(lo[0], lo[1]), Some(index(hi[0], hi[1])))
                };
                let h_f = if dim == 2 {
                    measure
                } else {
                    match minus {
                        Some(m) => (elements[plus].diameter + elements[m].diameter) * T::lit(0.5),
                        None => elements[plus].diameter,
                    }
                };
                faces.push(Face {
                    id: faces.len(),
                    kind,
                    axis,
                    plus,
                    minus,
                    normal_plus: normal,
                    lower,
                    upper,
                    measure,
                    h_f,
                    class: classify(axis, pos, n_axis),
                });
            }
        }
    }

    let mut incidence = vec![Vec::with_capacity(2 * dim); elements.len()];
    for f in &faces {
        incidence[f.plus].push((f.id, Side::Plus));
        if let Some(m) = f.minus {
            incidence[m].push((f.id, Side::Minus));
        }
    }
    let h = elements
        .iter()
        .map(|e| e.diameter)
        .fold(T::zero(), |a, b| a.max(b));

    Ok(Partition {
        domain: domain.clone(),
        cells,
        elements,
        faces,
        incidence,
        h,
    })
}
