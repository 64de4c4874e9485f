//! Solvers for the generalized margin-propagation constraint
//! `sum_k g(z_k - h) = C`.
//!
//! [`solve_rectifier`] is the exact reverse water-filling solution for
//! `g = [.]_+`. [`solve_generic`] handles any monotone family by bracketing
//! followed by safeguarded Newton-bisection, and reports the implicit gradient
//! `dh/dz_k = g'(z_k - h) / sum_m g'(z_m - h)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::family::ShapeFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct GmpSolution {
    pub h: f64,
    /// Number of terms with non-zero gradient (the winner count `M` for the
    /// rectifier).
    pub active_count: usize,
    /// `sum_k g(z_k - h) - C` at the returned `h`.
    pub residual: f64,
    /// `dh/dz_k` for every expanded term.
    pub gradient: Vec<f64>,
}

/// Termination and safety limits for the iterative solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute residual accepted as converged.
    pub residual: f64,
    /// Bracket width accepted as converged, relative to `max(1, |h|)`.
    pub width: f64,
    /// Maximum distance the bracket may be expanded from `max(z)`.
    pub span: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            width: 1e-12,
            span: 1e6,
            max_iter: 400,
        }
    }
}

impl Tolerance {
    /// Default limits with the residual scaled to `1e-9 * max(C, 1)`.
    pub fn for_constraint(c: f64) -> Self {
        Self {
            residual: 1e-9 * c.max(1.0),
            ..Self::default()
        }
    }

    pub fn with_residual(residual: f64) -> Self {
        Self {
            residual,
            ..Self::default()
        }
    }
}

fn check_inputs(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(invalid("GMP instance needs at least one input"));
    }
    if let Some(k) = z.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("input {k} is not finite")));
    }
    Ok(())
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = k;
        }
    }
    best
}

fn max_selection(z: &[f64]) -> GmpSolution {
    let k = argmax(z);
    let mut gradient = vec![0.0; z.len()];
    gradient[k] = 1.0;
    GmpSolution {
        h: z[k],
        active_count: 1,
        residual: 0.0,
        gradient,
    }
}

/// Exact solution of `sum_k [z_k - h]_+ = C`.
///
/// Terms with `z_k == h` are inactive. `C = 0` selects the maximum, with the
/// gradient on the first maximal entry.
pub fn solve_rectifier(z: &[f64], c: f64) -> Result<GmpSolution> {
    check_inputs(z)?;
    if !(c >= 0.0) || !c.is_finite() {
        return Err(invalid("constraint C must be non-negative and finite"));
    }
    if c == 0.0 {
        return Ok(max_selection(z));
    }

    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));

    // Largest prefix m with z_(m) > (sum_{k<=m} z_(k) - C) / m.
    let mut prefix = 0.0;
    let mut h = z[order[0]] - c;
    let mut m = 1;
    for (i, &k) in order.iter().enumerate() {
        prefix += z[k];
        let candidate = (prefix - c) / (i + 1) as f64;
        if z[k] > candidate {
            h = candidate;
            m = i + 1;
        } else {
            break;
        }
    }

    let mut gradient = vec![0.0; z.len()];
    let mut active = 0;
    for &k in &order[..m] {
        if z[k] > h {
            active += 1;
        }
    }
    let share = 1.0 / active.max(1) as f64;
    for &k in &order[..m] {
        if z[k] > h {
            gradient[k] = share;
        }
    }
    let residual = z.iter().map(|&v| (v - h).max(0.0)).sum::<f64>() - c;
    Ok(GmpSolution {
        h,
        active_count: active,
        residual,
        gradient,
    })
}

/// Solves `sum_k g(z_k - h) = C` for a single shape family shared by every
/// term.
pub fn solve_generic(
    z: &[f64],
    c: f64,
    shape: &ShapeFamily,
    tol: Tolerance,
) -> Result<GmpSolution> {
    solve_with(z, c, tol, |_, u| shape.value_and_derivative(u))
}

/// Solves the constraint with one shape family per term (mismatched branches).
pub fn solve_branches(
    z: &[f64],
    c: f64,
    shapes: &[ShapeFamily],
    tol: Tolerance,
) -> Result<GmpSolution> {
    if shapes.len() != z.len() {
        return Err(invalid(format!(
            "{} branch families for {} terms",
            shapes.len(),
            z.len()
        )));
    }
    solve_with(z, c, tol, |k, u| shapes[k].value_and_derivative(u))
}

/// Bracketing solver over an arbitrary per-term `g` returning
/// `(g(u), g'(u))`.
pub fn solve_with<G>(z: &[f64], c: f64, tol: Tolerance, g: G) -> Result<GmpSolution>
where
    G: Fn(usize, f64) -> (f64, f64),
{
    check_inputs(z)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("constraint C must be positive and finite"));
    }
    if !(tol.residual > 0.0) || !(tol.width > 0.0) {
        return Err(invalid("solver tolerances must be positive"));
    }

    let eval = |h: f64| -> (f64, f64) {
        let mut r = -c;
        let mut d = 0.0;
        for (k, &zk) in z.iter().enumerate() {
            let (v, dv) = g(k, zk - h);
            r += v;
            d += dv;
        }
        // dr/dh = -sum g'
        (r, d)
    };

    let top = z[argmax(z)];
    let no_solution = |reason: &str| Error::NoSolution {
        span: tol.span,
        reason: reason.into(),
    };

    // Upper bracket: residual <= 0.
    let mut step = 1.0;
    let mut hi = top;
    let (mut r_hi, _) = eval(hi);
    while r_hi > 0.0 {
        if step > tol.span {
            return Err(no_solution("residual stays positive above max(z)"));
        }
        hi = top + step;
        step *= 2.0;
        r_hi = eval(hi).0;
    }
    // Lower bracket: residual >= 0.
    step = 1.0;
    let mut lo = top - step;
    let (mut r_lo, _) = eval(lo);
    while r_lo < 0.0 {
        step *= 2.0;
        if step > tol.span {
            return Err(no_solution("residual stays negative below max(z)"));
        }
        lo = top - step;
        r_lo = eval(lo).0;
    }

    let mut h = if r_hi == 0.0 { hi } else { 0.5 * (lo + hi) };
    let (mut r, mut d) = eval(h);
    for _ in 0..tol.max_iter {
        if r.abs() <= tol.residual || hi - lo <= tol.width * h.abs().max(1.0) {
            break;
        }
        if r > 0.0 {
            lo = h;
        } else {
            hi = h;
        }
        // Newton step on r(h), kept only if it lands strictly inside the
        // bracket.
        let newton = if d > 0.0 { h + r / d } else { f64::NAN };
        h = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        (r, d) = eval(h);
    }
    if !h.is_finite() {
        return Err(no_solution("iteration left the finite range"));
    }

    let mut gradient: Vec<f64> = z.iter().enumerate().map(|(k, &zk)| g(k, zk - h).1).collect();
    let total: f64 = gradient.iter().sum();
    let active_count;
    if total > 0.0 {
        gradient.iter_mut().for_each(|v| *v /= total);
        active_count = gradient.iter().filter(|&&v| v > 0.0).count();
    } else {
        gradient.iter_mut().for_each(|v| *v = 0.0);
        gradient[argmax(z)] = 1.0;
        active_count = 1;
    }
    Ok(GmpSolution {
        h,
        active_count,
        residual: r,
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::ShapeKind;

    /// Dense scan of `h` for the residual sign change.
    fn scan_rectifier(z: &[f64], c: f64) -> f64 {
        let r = |h: f64| z.iter().map(|&v| (v - h).max(0.0)).sum::<f64>() - c;
        let lo = z.iter().cloned().fold(f64::INFINITY, f64::min) - c - 1.0;
        let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let n = 2_000_000;
        let step = (hi - lo) / n as f64;
        for i in 0..n {
            let (a, b) = (lo + i as f64 * step, lo + (i + 1) as f64 * step);
            if r(a) >= 0.0 && r(b) <= 0.0 {
                // linear inside one grid cell
                return a + step * r(a) / (r(a) - r(b));
            }
        }
        panic!("no sign change")
    }

    #[test]
    fn rectifier_examples() {
        let s = solve_rectifier(&[3.0, 1.0], 1.0).unwrap();
        assert!((s.h - scan_rectifier(&[3.0, 1.0], 1.0)).abs() < 1e-9);
        assert_eq!(s.h, 2.0);
        assert_eq!(s.active_count, 1);
        assert_eq!(s.gradient, vec![1.0, 0.0]);

        let s = solve_rectifier(&[3.0, 1.0], 3.0).unwrap();
        assert!((s.h - scan_rectifier(&[3.0, 1.0], 3.0)).abs() < 1e-9);
        assert_eq!(s.h, 0.5);
        assert_eq!(s.active_count, 2);
        assert_eq!(s.gradient, vec![0.5, 0.5]);

        assert_eq!(solve_rectifier(&[5.0], 0.0).unwrap().h, 5.0);

        let s = solve_rectifier(&[3.0, 0.0], 1.0).unwrap();
        assert_eq!(s.h, 2.0);
        assert_eq!(s.gradient, vec![1.0, 0.0]);

        let s = solve_rectifier(&[5.0, 4.0, 3.0, 2.0, 1.0], 3.0).unwrap();
        assert_eq!(s.h, 3.0);
        assert_eq!(s.active_count, 2);
        assert_eq!(s.gradient, vec![0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_budget_breaks_ties_low() {
        let s = solve_rectifier(&[1.0, 4.0, 4.0], 0.0).unwrap();
        assert_eq!(s.h, 4.0);
        assert_eq!(s.gradient, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_rectifier(&[], 1.0).is_err());
        assert!(solve_rectifier(&[f64::NAN], 1.0).is_err());
        assert!(solve_rectifier(&[1.0, f64::INFINITY], 1.0).is_err());
        assert!(solve_rectifier(&[1.0], -1.0).is_err());
        let rect = ShapeFamily::rectifier();
        assert!(solve_generic(&[1.0], 1.0, &rect, Tolerance::with_residual(0.0)).is_err());
        assert!(solve_generic(&[1.0], 0.0, &rect, Tolerance::default()).is_err());
    }

    #[test]
    fn weak_inversion_is_log_sum_exp() {
        let wi = ShapeFamily::new(ShapeKind::WeakInversion, 1.0, 1.0).unwrap();
        let tol = Tolerance::with_residual(1e-13);
        let s = solve_generic(&[0.0, 0.0], 2.0, &wi, tol).unwrap();
        assert!(s.h.abs() < 1e-12);
        for x in [-7.5, 0.0, 3.25, 40.0] {
            let s = solve_generic(&[x], 1.0, &wi, tol).unwrap();
            assert!((s.h - x).abs() < 1e-12);
        }
        let z = [0.3, -1.2, 2.0];
        let lse = libm::log(z.iter().map(|&v| libm::exp(v)).sum::<f64>());
        let s = solve_generic(&z, 0.5, &wi, tol).unwrap();
        assert!((s.h - (lse - libm::log(0.5))).abs() < 1e-11);
    }

    #[test]
    fn square_law_single_input() {
        let si = ShapeFamily::new(ShapeKind::StrongInversion, 1.0, 1.0).unwrap();
        let s = solve_generic(&[2.0], 1.0, &si, Tolerance::with_residual(1e-14)).unwrap();
        assert!((s.h - 1.0).abs() < 1e-12);
        assert_eq!(s.gradient, vec![1.0]);
    }

    #[test]
    fn broken_shape_reports_no_solution() {
        // constant g never satisfies the constraint
        let r = solve_with(&[0.0], 1.0, Tolerance::default(), |_, _| (0.5, 0.0));
        assert!(matches!(r, Err(Error::NoSolution { .. })));
    }

    #[test]
    fn mismatched_branch_count_is_rejected() {
        let f = [ShapeFamily::rectifier()];
        assert!(solve_branches(&[1.0, 2.0], 1.0, &f, Tolerance::default()).is_err());
    }
}
