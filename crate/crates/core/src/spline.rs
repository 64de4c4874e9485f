//! Multi-spline piecewise-linear approximation of `e^x` and the offsets it
//! induces on the GMP constraint.
//!
//! Spline `j` is the tangent line of `e^x` at `Q_j`. The tuning point `T_1` is
//! where the first tangent crosses zero and `T_j` (j >= 2) is where tangents
//! `j - 1` and `j` intersect. Folding the common slope weight into the
//! constraint turns `sum_i e^{(x_i - h)/C} = 1` into
//! `sum_i sum_j [x_i + O_j - h]_+ = C'` with `O_j = -C T_j`.
//!
//! Tangent points follow the geometric rule `e^{Q_j} = 2^{j-2}`, under which
//! every weight `e^{Q_j} - sum_{k<j} e^{Q_k}` equals one half and `C' = 2C`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct SplineSet {
    /// Hyper-parameter the offsets were scaled by.
    pub c: f64,
    pub tangent_points: Vec<f64>,
    pub tuning_points: Vec<f64>,
    /// `O_j = -C * T_j`, in input units.
    pub offsets: Vec<f64>,
    /// Per-spline slope weights `e^{Q_j} - sum_{k<j} e^{Q_k}`.
    pub weights: Vec<f64>,
    /// Common slope weight (all weights coincide under the geometric rule).
    pub coefficient: f64,
    /// Effective constraint `C' = C / coefficient`.
    pub c_prime: f64,
}

/// Builds the spline data for `spline_count` splines and hyper-parameter `c`.
pub fn make_spline_set(spline_count: usize, c: f64) -> Result<SplineSet> {
    if spline_count == 0 {
        return Err(invalid("spline count must be at least 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("spline hyper-parameter C must be positive and finite"));
    }
    let slopes: Vec<f64> = (0..spline_count)
        .map(|j| libm::pow(2.0, j as f64 - 1.0))
        .collect();
    let tangent_points: Vec<f64> = slopes.iter().map(|&s| math::ln(s)).collect();

    let mut tuning_points = Vec::with_capacity(spline_count);
    tuning_points.push(tangent_points[0] - 1.0);
    for j in 1..spline_count {
        let (qa, qb) = (tangent_points[j - 1], tangent_points[j]);
        let (ea, eb) = (slopes[j - 1], slopes[j]);
        tuning_points.push((qb * eb - qa * ea) / (eb - ea) - 1.0);
    }

    let mut weights = Vec::with_capacity(spline_count);
    let mut running = 0.0;
    for &s in &slopes {
        weights.push(s - running);
        running += s;
    }
    let coefficient = weights[0];
    let offsets = tuning_points.iter().map(|&t| -c * t).collect();

    Ok(SplineSet {
        c,
        tangent_points,
        tuning_points,
        offsets,
        weights,
        coefficient,
        c_prime: c / coefficient,
    })
}

impl SplineSet {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Piecewise-linear reconstruction `sum_j w_j [x - T_j]_+` of `e^x`
    /// (dimensionless argument).
    pub fn reconstruct(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.tuning_points)
            .map(|(w, t)| w * math::pos(x - t))
            .sum()
    }

    /// Largest gap between [`reconstruct`](Self::reconstruct) and `e^x` on
    /// `[T_1, T_S + 1]`, relative to `e^(T_S + 1)`.
    pub fn full_scale_error(&self) -> f64 {
        let lo = self.tuning_points[0];
        let hi = self.tuning_points[self.len() - 1] + 1.0;
        let n = 2000;
        let worst = (0..=n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / n as f64;
                (self.reconstruct(x) - math::exp(x)).abs()
            })
            .fold(0.0, f64::max);
        worst / math::exp(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = core::f64::consts::LN_2;

    #[test]
    fn three_splines_reproduce_closed_form() {
        let s = make_spline_set(3, 1.0).unwrap();
        let o = [1.0 + LN2, 1.0 - LN2, 1.0 - 2.0 * LN2];
        let t = [-LN2 - 1.0, LN2 - 1.0, 2.0 * LN2 - 1.0];
        for j in 0..3 {
            assert!((s.offsets[j] - o[j]).abs() <= 1e-12);
            assert!((s.tuning_points[j] - t[j]).abs() <= 1e-12);
            assert!((s.weights[j] - 0.5).abs() <= 1e-15);
        }
        assert_eq!(s.c_prime, 2.0);
        assert!((s.tangent_points[0] - libm::log(0.5)).abs() < 1e-15);
        assert_eq!(s.tangent_points[1], 0.0);
    }

    #[test]
    fn offsets_scale_with_c() {
        let s = make_spline_set(3, 2.5).unwrap();
        for (o, t) in s.offsets.iter().zip(&s.tuning_points) {
            assert_eq!(*o, -2.5 * t);
        }
        assert_eq!(s.c_prime, 5.0);
    }

    #[test]
    fn single_spline() {
        let s = make_spline_set(1, 5.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.tuning_points[0], s.tangent_points[0] - 1.0);
        assert_eq!(s.offsets[0], -5.0 * s.tuning_points[0]);
        assert_eq!(s.c_prime, 10.0);
    }

    #[test]
    fn tuning_points_are_tangent_intersections() {
        let s = make_spline_set(6, 1.0).unwrap();
        let line = |j: usize, x: f64| {
            let q = s.tangent_points[j];
            math::exp(q) * (x + 1.0 - q)
        };
        assert!(line(0, s.tuning_points[0]).abs() < 1e-14);
        for j in 1..6 {
            let t = s.tuning_points[j];
            assert!((line(j - 1, t) - line(j, t)).abs() < 1e-12);
        }
        assert!(s.tangent_points.windows(2).all(|w| w[0] < w[1]));
        assert!(s.tuning_points.windows(2).all(|w| w[0] < w[1]));
        assert!(s.weights.iter().all(|&w| (w - 0.5).abs() < 1e-15));
    }

    #[test]
    fn reconstruction_is_a_lower_bound() {
        for n in 1..=6 {
            let s = make_spline_set(n, 1.0).unwrap();
            // Equal weights keep the slope at (j + 1) / 2 past T_j, so only
            // the first two tangents are met.
            for &q in s.tangent_points.iter().take(2) {
                assert!((s.reconstruct(q) - math::exp(q)).abs() < 1e-12);
            }
            for i in 0..=200 {
                let x = -4.0 + 8.0 * i as f64 / 200.0;
                assert!(s.reconstruct(x) <= math::exp(x) + 1e-12);
            }
        }
        let e3 = make_spline_set(3, 1.0).unwrap().full_scale_error();
        assert!((e3 - 0.2784).abs() < 1e-3, "{e3}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_spline_set(0, 1.0).is_err());
        assert!(make_spline_set(3, 0.0).is_err());
        assert!(make_spline_set(3, -1.0).is_err());
        assert!(make_spline_set(3, f64::NAN).is_err());
    }
}
