//! Axis-aligned boxes under the infinity norm.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{from_count, lit, Scalar};

/// Axis-aligned hyperrectangle stored as center and half-widths.
///
/// Closed infinity-norm balls `B(c, r)` are the special case where every
/// half-width equals `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox<T> {
    center: Vec<T>,
    half_widths: Vec<T>,
}

impl<T: Scalar> Hyperbox<T> {
    pub fn new(center: Vec<T>, half_widths: Vec<T>) -> Result<Self> {
        if center.len() != half_widths.len() {
            return Err(Error::DimensionMismatch {
                what: "box half-widths",
                expected: center.len(),
                actual: half_widths.len(),
            });
        }
        if half_widths.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "half_widths",
                reason: "must be finite and non-negative".into(),
            });
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: "must be finite".into(),
            });
        }
        Ok(Self { center, half_widths })
    }

    /// Box `[lower_i, upper_i]` per axis.
    pub fn from_bounds(lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "box bounds",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        let two = lit::<T>(2.0);
        let center = lower.iter().zip(upper).map(|(l, u)| (*l + *u) / two).collect();
        let half = lower.iter().zip(upper).map(|(l, u)| (*u - *l) / two).collect();
        Self::new(center, half)
    }

    /// Infinity-norm ball `B(center, radius)`.
    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        let half = vec![radius; center.len()];
        Self::new(center, half)
    }

    /// The single point `{0}` in `dim` dimensions.
    pub fn origin(dim: usize) -> Self {
        Self {
            center: vec![T::zero(); dim],
            half_widths: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn half_widths(&self) -> &[T] {
        &self.half_widths
    }

    pub fn lower(&self) -> Vec<T> {
        self.center
            .iter()
            .zip(&self.half_widths)
            .map(|(c, w)| *c - *w)
            .collect()
    }

    pub fn upper(&self) -> Vec<T> {
        self.center
            .iter()
            .zip(&self.half_widths)
            .map(|(c, w)| *c + *w)
            .collect()
    }

    pub fn max_half_width(&self) -> T {
        self.half_widths.iter().fold(T::zero(), |a, w| a.max(*w))
    }

    /// Smallest infinity-norm ball with the same center that contains the box.
    pub fn hypercube_hull(&self) -> Self {
        let r = self.max_half_width();
        Self {
            center: self.center.clone(),
            half_widths: vec![r; self.dim()],
        }
    }

    /// `max_i |x_i - c_i| <= w_i`, evaluated against the rounded bounds
    /// `c_i - w_i` and `c_i + w_i` so that [`Hyperbox::clamp`] and grid
    /// vertices always test as members.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.center)
                .zip(&self.half_widths)
                .all(|((x, c), w)| *x >= *c - *w && *x <= *c + *w)
    }

    /// Largest componentwise excess of `x` over the box (non-positive when inside).
    pub fn excess(&self, x: &[T]) -> T {
        x.iter()
            .zip(&self.center)
            .zip(&self.half_widths)
            .map(|((x, c), w)| (*x - *c).abs() - *w)
            .fold(T::neg_infinity(), T::max)
    }

    /// Nearest point of the box to `x` (componentwise clamp).
    pub fn clamp(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(&self.center)
            .zip(&self.half_widths)
            .map(|((x, c), w)| x.max(*c - *w).min(*c + *w))
            .collect()
    }

    pub fn volume(&self) -> T {
        let two = lit::<T>(2.0);
        self.half_widths.iter().fold(T::one(), |v, w| v * two * *w)
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.center
            .iter()
            .zip(&self.half_widths)
            .map(|(c, w)| {
                let u: f64 = rng.gen_range(-1.0..=1.0);
                (*c + *w * lit::<T>(u)).max(*c - *w).min(*c + *w)
            })
            .collect()
    }

    /// Uniform grid with `density` points per axis, vertices included.
    ///
    /// A density of one yields the center alone. Degenerate axes contribute
    /// a single coordinate.
    pub fn grid(&self, density: usize) -> GridPoints<T> {
        let density = density.max(1);
        let counts: Vec<usize> = self
            .half_widths
            .iter()
            .map(|w| if *w == T::zero() { 1 } else { density })
            .collect();
        let total = counts.iter().product();
        GridPoints {
            lower: self.lower(),
            upper: self.upper(),
            center: self.center.clone(),
            counts,
            next: 0,
            total,
        }
    }
}

/// Iterator over the points of [`Hyperbox::grid`].
#[derive(Debug, Clone)]
pub struct GridPoints<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    center: Vec<T>,
    counts: Vec<usize>,
    next: usize,
    total: usize,
}

impl<T: Scalar> Iterator for GridPoints<T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.next >= self.total {
            return None;
        }
        let mut rem = self.next;
        let mut point = vec![T::zero(); self.counts.len()];
        for axis in (0..self.counts.len()).rev() {
            let count = self.counts[axis];
            let i = rem % count;
            rem /= count;
            point[axis] = if count == 1 {
                self.center[axis]
            } else if i + 1 == count {
                self.upper[axis]
            } else {
                let frac = from_count::<T>(i) / from_count::<T>(count - 1);
                self.lower[axis] + (self.upper[axis] - self.lower[axis]) * frac
            };
        }
        self.next += 1;
        Some(point)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

impl<T: Scalar> ExactSizeIterator for GridPoints<T> {}
