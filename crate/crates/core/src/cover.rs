//! Grid delta-covers of boxes under the infinity norm.
//!
//! A cover of a box with radius `delta` uses `ceil(width_i / (2 delta))`
//! cells per axis (at least one) and places a point at each cell midpoint,
//! so every point of the box is within half a cell, hence within `delta`,
//! of a cover point. Points are never materialised: a flat row-major index
//! maps to a point and back.

use crate::error::{Error, Result};
use crate::region::Hyperbox;
use crate::scalar::{lit, Scalar};

/// Default cap on cover cardinality.
pub const DEFAULT_CARDINALITY_CAP: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Cover<T> {
    region: Hyperbox<T>,
    delta: T,
    counts: Vec<u64>,
    strides: Vec<u64>,
    cardinality: u64,
    lower: Vec<T>,
    cell_widths: Vec<T>,
}

fn axis_counts<T: Scalar>(region: &Hyperbox<T>, delta: T) -> Result<Vec<f64>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "cover radius must be positive and finite".into(),
        });
    }
    let two = lit::<T>(2.0);
    Ok(region
        .half_widths()
        .iter()
        .map(|w| {
            let ratio = (two * *w) / (two * delta);
            ratio.ceil().to_f64().unwrap_or(f64::INFINITY).max(1.0)
        })
        .collect())
}

fn capped_product(counts: &[f64], cap: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for &c in counts {
        let exact = if c.is_finite() && c <= u64::MAX as f64 {
            Some(c as u64)
        } else {
            None
        };
        total = match exact.and_then(|c| total.checked_mul(c)) {
            Some(t) if t <= cap => t,
            _ => {
                return Err(Error::CoverTooFine {
                    cardinality: counts.iter().product(),
                    cap,
                })
            }
        };
    }
    Ok(total)
}

/// `prod_i max(1, ceil(width_i / (2 delta)))`, an upper bound on the minimal
/// number of `delta`-balls covering the box.
pub fn covering_number<T: Scalar>(region: &Hyperbox<T>, delta: T) -> Result<u64> {
    covering_number_capped(region, delta, DEFAULT_CARDINALITY_CAP)
}

pub fn covering_number_capped<T: Scalar>(region: &Hyperbox<T>, delta: T, cap: u64) -> Result<u64> {
    capped_product(&axis_counts(region, delta)?, cap)
}

/// Midpoint grid cover of `region` with radius `delta`.
pub fn grid_cover<T: Scalar>(region: &Hyperbox<T>, delta: T) -> Result<Cover<T>> {
    grid_cover_capped(region, delta, DEFAULT_CARDINALITY_CAP)
}

pub fn grid_cover_capped<T: Scalar>(region: &Hyperbox<T>, delta: T, cap: u64) -> Result<Cover<T>> {
    let counts_f = axis_counts(region, delta)?;
    let cardinality = capped_product(&counts_f, cap)?;
    let counts: Vec<u64> = counts_f.iter().map(|c| *c as u64).collect();
    let mut strides = vec![1u64; counts.len()];
    for axis in (0..counts.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * counts[axis + 1];
    }
    let two = lit::<T>(2.0);
    let cell_widths = region
        .half_widths()
        .iter()
        .zip(&counts)
        .map(|(w, c)| two * *w / T::from_u64(*c).expect("count fits scalar"))
        .collect();
    Ok(Cover {
        lower: region.lower(),
        region: region.clone(),
        delta,
        counts,
        strides,
        cardinality,
        cell_widths,
    })
}

impl<T: Scalar> Cover<T> {
    pub fn region(&self) -> &Hyperbox<T> {
        &self.region
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn per_axis_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of cover points `N`.
    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    fn axis_coordinate(&self, axis: usize, cell: u64) -> T {
        if self.counts[axis] == 1 {
            return self.region.center()[axis];
        }
        let mid = T::from_u64(cell).expect("cell fits scalar") + lit(0.5);
        self.lower[axis] + mid * self.cell_widths[axis]
    }

    /// Point with flat row-major index `index`.
    pub fn point(&self, index: u64) -> Result<Vec<T>> {
        if index >= self.cardinality {
            return Err(Error::CorruptMessage {
                index,
                cardinality: self.cardinality,
            });
        }
        let mut rem = index;
        Ok((0..self.dim())
            .map(|axis| {
                let cell = rem / self.strides[axis];
                rem %= self.strides[axis];
                self.axis_coordinate(axis, cell)
            })
            .collect())
    }

    fn nearest_cell(&self, axis: usize, x: T) -> u64 {
        let count = self.counts[axis];
        if count == 1 {
            return 0;
        }
        // Cell i spans [lower + i w, lower + (i + 1) w]; a point on a shared
        // boundary goes to the lower cell.
        let u = (x - self.lower[axis]) / self.cell_widths[axis];
        let cell = u.ceil() - T::one();
        if !(cell > T::zero()) {
            0
        } else {
            cell.to_u64().unwrap_or(u64::MAX).min(count - 1)
        }
    }

    /// Index of the cover point nearest to `x` in the infinity norm, and its
    /// distance. Points outside the box map to the nearest boundary cell.
    pub fn nearest_index(&self, x: &[T]) -> Result<(u64, T)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "cover query",
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let mut index = 0u64;
        let mut dist = T::zero();
        for (axis, xi) in x.iter().enumerate() {
            let cell = self.nearest_cell(axis, *xi);
            index += cell * self.strides[axis];
            dist = dist.max((*xi - self.axis_coordinate(axis, cell)).abs());
        }
        Ok((index, dist))
    }

    /// All points in index order; intended for small covers and tests.
    pub fn points(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        (0..self.cardinality).map(move |i| self.point(i).expect("index in range"))
    }

    /// Largest half cell width, i.e. the realised covering radius.
    pub fn realised_radius(&self) -> T {
        let two = lit::<T>(2.0);
        self.cell_widths.iter().fold(T::zero(), |m, w| m.max(*w / two))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Hyperbox<f64> {
        Hyperbox::from_bounds(&vec![0.0; n], &vec![1.0; n]).unwrap()
    }

    #[test]
    fn coarse_cover_is_single_center() {
        let c = grid_cover(&unit(2), 0.5).unwrap();
        assert_eq!(c.cardinality(), 1);
        assert_eq!(c.point(0).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn quarter_cover_has_four_points() {
        let c = grid_cover(&unit(2), 0.25).unwrap();
        assert_eq!(c.per_axis_counts(), &[2, 2]);
        let pts: Vec<_> = c.points().collect();
        assert_eq!(
            pts,
            vec![vec![0.25, 0.25], vec![0.25, 0.75], vec![0.75, 0.25], vec![0.75, 0.75]]
        );
    }

    #[test]
    fn degenerate_axis_uses_center() {
        let b = Hyperbox::new(vec![0.5, 3.0], vec![0.5, 0.0]).unwrap();
        let c = grid_cover(&b, 0.25).unwrap();
        assert_eq!(c.per_axis_counts(), &[2, 1]);
        assert!(c.points().all(|p| p[1] == 3.0));
    }

    #[test]
    fn nearest_on_exact_point_and_tie() {
        let c = grid_cover(&unit(2), 0.25).unwrap();
        assert_eq!(c.nearest_index(&[0.75, 0.25]).unwrap(), (2, 0.0));
        let line = grid_cover(&unit(1), 0.25).unwrap();
        let (idx, dist) = line.nearest_index(&[0.5]).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(dist, 0.25);
    }

    #[test]
    fn outside_points_clamp_to_boundary_cells() {
        let c = grid_cover(&unit(1), 0.1).unwrap();
        assert_eq!(c.nearest_index(&[-3.0]).unwrap().0, 0);
        assert_eq!(c.nearest_index(&[3.0]).unwrap().0, 4);
    }

    #[test]
    fn covering_number_examples() {
        assert_eq!(covering_number(&unit(3), 0.5).unwrap(), 1);
        assert_eq!(covering_number(&unit(3), 0.05).unwrap(), 1000);
        let b = Hyperbox::new(vec![1.0, -2.0], vec![0.3, 0.7]).unwrap();
        assert_eq!(covering_number(&b, 0.7).unwrap(), 1);
    }

    #[test]
    fn invalid_radius_and_cap() {
        assert!(grid_cover(&unit(1), 0.0).is_err());
        assert!(grid_cover(&unit(1), -1.0).is_err());
        assert!(matches!(grid_cover(&unit(3), 1e-6), Err(Error::CoverTooFine { .. })));
        assert!(matches!(
            covering_number_capped(&unit(2), 0.01, 100),
            Err(Error::CoverTooFine { .. })
        ));
        assert_eq!(covering_number_capped(&unit(2), 0.05, 100).unwrap(), 100);
    }

    #[test]
    fn point_rejects_out_of_range_index() {
        let c = grid_cover(&unit(2), 0.25).unwrap();
        assert!(matches!(
            c.point(4),
            Err(Error::CorruptMessage {
                index: 4,
                cardinality: 4
            })
        ));
    }

    #[test]
    fn realised_radius_within_delta() {
        let b = Hyperbox::new(vec![0.0, 0.0], vec![1.0, 0.3]).unwrap();
        let c = grid_cover(&b, 0.4).unwrap();
        assert!(c.realised_radius() <= 0.4);
    }
}
