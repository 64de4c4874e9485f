//! Computational primitives synthesized from proto-shape evaluations.
//!
//! Every block is a fixed combination of S-AC unit outputs: mirrored pairs
//! for `cosh`/`sinh`, a cascaded inversion and max selector for ReLU, a pair
//! of two-input units for the compressive (sigmoid-like) response, the
//! reference floor for soft-plus, the raw constraint for winner-take-all and
//! four shifted evaluations for the multiplier.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::linspace;
use crate::error::{invalid, Result};
use crate::family::ShapeFamily;
use crate::math;
use crate::solver::{self, Tolerance};
use crate::table::PwlTable;
use crate::unit::{Polarity, SacUnit};

/// Side length of the grid used to fit the multiplier scale.
pub const MULTIPLIER_GRID: usize = 101;

/// Half-width, in units of `C`, of the window the cosh offset is fitted on.
pub const COSH_WINDOW: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    unit: SacUnit,
    /// Constant current `K` of the compressive block.
    pub constant_k: f64,
    /// `[a]`: the cosh/sinh branch shift, evaluated as `h(+-x - a)`.
    pub calibration_offsets: Vec<f64>,
    /// Least-squares gain mapping the raw four-term combination to `x * w`.
    pub multiplier_scale: f64,
    floor_level: f64,
    table: Option<PwlTable>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtaResult {
    /// Branch currents `g(x_i - h)`; they sum to `C`.
    pub outputs: Vec<f64>,
    pub h: f64,
    pub winner_count: usize,
    pub winner_index: usize,
}

impl WtaResult {
    /// Outputs divided by `C`: a sparse probability vector.
    pub fn probabilities(&self, c: f64) -> Vec<f64> {
        if c > 0.0 {
            self.outputs.iter().map(|o| o / c).collect()
        } else {
            let mut p = vec![0.0; self.outputs.len()];
            p[self.winner_index] = 1.0;
            p
        }
    }
}

impl BlockParams {
    /// Builds and calibrates parameters for `unit` with `K = C / 2`.
    pub fn new(unit: SacUnit) -> Result<Self> {
        let k = 0.5 * unit.c();
        Self::with_k(unit, k)
    }

    pub fn with_k(unit: SacUnit, constant_k: f64) -> Result<Self> {
        if !(constant_k >= 0.0) || !constant_k.is_finite() {
            return Err(invalid("K must be finite and >= 0"));
        }
        if !(unit.c() > 0.0) {
            return Err(invalid("block units need C > 0"));
        }
        let unit = unit.with_polarity(Polarity::NType);
        let mut p = Self {
            unit,
            constant_k,
            calibration_offsets: vec![0.0],
            multiplier_scale: 1.0,
            floor_level: f64::NAN,
            table: None,
        };
        if p.unit.include_zero_reference {
            p.floor_level = p.unit.solve(&[])?.h;
        }
        p.rebuild_table();
        p.calibration_offsets = vec![p.fit_cosh_offset()?];
        p.multiplier_scale = p.fit_multiplier_scale(MULTIPLIER_GRID)?;
        Ok(p)
    }

    pub fn unit(&self) -> &SacUnit {
        &self.unit
    }

    pub fn c(&self) -> f64 {
        self.unit.c()
    }

    /// Installs per-branch families on the underlying unit, keeping the
    /// nominal calibration.
    pub fn with_branches(&self, branches: Vec<ShapeFamily>) -> Result<Self> {
        let mut p = self.clone();
        if branches.len() == p.unit.term_count(1) && branches.iter().all(|b| *b == p.unit.shape) {
            return Ok(p);
        }
        p.unit.set_branches(1, branches)?;
        p.table = None;
        Ok(p)
    }

    /// Replaces the unit's family and recalibrates.
    pub fn with_unit(&self, unit: SacUnit) -> Result<Self> {
        Self::with_k(unit, self.constant_k)
    }

    fn rebuild_table(&mut self) {
        self.table = None;
        let u = &self.unit;
        let nominal = u.shape.is_rectifier()
            && u.shape.branch_gain_error == 1.0
            && u.shape.branch_offset_error == 0.0
            && u.branches.is_none();
        if !nominal {
            return;
        }
        let o = &u.splines().offsets;
        let spread = o.iter().fold(f64::MIN, |a, &b| a.max(b)) - o.iter().fold(f64::MAX, |a, &b| a.min(b));
        let reach = 4.0 * (spread + u.c_prime()) + 1.0;
        let unit = u.clone();
        self.table = Some(PwlTable::build(-reach, reach, |v| {
            unit.solve(&[v]).map(|s| s.h).unwrap_or(f64::NAN)
        }));
        if self.table.as_ref().is_some_and(|t| t.knots().iter().any(|k| !k.is_finite())) {
            self.table = None;
        }
    }

    /// Single-input N-type proto-shape `p(v)` and its slope.
    pub fn proto(&self, v: f64) -> Result<(f64, f64)> {
        if let Some(t) = &self.table {
            return Ok(t.eval(v));
        }
        let (h, g) = self.unit.proto_with_gradient(&[v])?;
        Ok((h, g[0]))
    }

    fn proto_value(&self, v: f64) -> Result<f64> {
        Ok(self.proto(v)?.0)
    }

    /// Proto-shape level with only the reference branch active.
    pub fn floor(&self) -> Result<f64> {
        if self.floor_level.is_nan() {
            return Err(invalid("soft-plus needs the zero reference branch"));
        }
        Ok(self.floor_level)
    }

    /// Shift `a` minimising the worst full-scale deviation of
    /// `p(x - a) + p(-x - a)` from a scaled `cosh` over `[-2C, 2C]`.
    fn fit_cosh_offset(&self) -> Result<f64> {
        let c = self.c();
        let grid: Vec<f64> = (0..=200).map(|i| c * COSH_WINDOW * (i as f64 / 100.0 - 1.0)).collect();
        let reference: Vec<f64> = grid.iter().map(|&x| math::cosh(x / c)).collect();
        let cost = |a: f64| -> Result<f64> {
            let y = grid
                .iter()
                .map(|&x| Ok(self.proto_value(x - a)? + self.proto_value(-x - a)?))
                .collect::<Result<Vec<f64>>>()?;
            Ok(fit_deviation(&y, &reference))
        };
        let (lo, hi) = (-2.0 * c, 4.0 * c);
        let steps = 60;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=steps {
            let a = lo + (hi - lo) * i as f64 / steps as f64;
            let v = cost(a)?;
            if v < best.0 {
                best = (v, a);
            }
        }
        // Golden-section refinement inside the winning cell.
        let cell = (hi - lo) / steps as f64;
        let (mut a, mut b) = (best.1 - cell, best.1 + cell);
        let r = 0.5 * (libm::sqrt(5.0) - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (cost(x1)?, cost(x2)?);
        for _ in 0..40 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = cost(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = cost(x2)?;
            }
        }
        let (fa, xa) = if f1 <= f2 { (f1, x1) } else { (f2, x2) };
        Ok(if fa <= best.0 { xa } else { best.1 })
    }

    fn fit_multiplier_scale(&self, grid_n: usize) -> Result<f64> {
        let c = self.c();
        let axis = linspace(-c, c, grid_n);
        let (mut num, mut den) = (0.0, 0.0);
        for &x in &axis {
            for &w in &axis {
                let y = multiplier_raw(x, w, self)?;
                num += y * x * w;
                den += (x * w) * (x * w);
            }
        }
        let k = num / den;
        if !k.is_finite() || k == 0.0 {
            return Err(invalid("multiplier scale calibration degenerate"));
        }
        Ok(k)
    }
}

/// Deviation of `y` from its least-squares fit `alpha * r`, relative to the
/// fitted full scale.
pub(crate) fn fit_deviation(y: &[f64], r: &[f64]) -> f64 {
    let alpha = y.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / r.iter().map(|b| b * b).sum::<f64>();
    if !(alpha > 0.0) {
        return f64::INFINITY;
    }
    let full = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) * alpha;
    y.iter()
        .zip(r)
        .map(|(a, b)| (a - alpha * b).abs())
        .fold(0.0, f64::max)
        / full
}

fn check(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid("block input is not finite"))
    }
}

/// `p(x - a) + p(-x - a)`.
pub fn cosh_block(x: f64, p: &BlockParams) -> Result<f64> {
    check(x)?;
    let a = p.calibration_offsets[0];
    Ok(p.proto_value(x - a)? + p.proto_value(-x - a)?)
}

/// N-type branch `p(x - a)` plus P-type branch `-p(-x - a)`.
pub fn sinh_block(x: f64, p: &BlockParams) -> Result<f64> {
    check(x)?;
    let a = p.calibration_offsets[0];
    Ok(p.proto_value(x - a)? - p.proto_value(-x - a)?)
}

/// `max(0, x)` for `c == 0`, else `max(0, c - x)`.
///
/// The first stage forms the difference current `c - x`; the second is a
/// max selector over `{d, 0}` whose budget is the family's value at zero,
/// which makes it exact for the rectifier and square law.
pub fn relu_block(x: f64, c: f64, p: &BlockParams) -> Result<f64> {
    Ok(relu_with_slope(x, c, p)?.0)
}

pub(crate) fn relu_with_slope(x: f64, c: f64, p: &BlockParams) -> Result<(f64, f64)> {
    check(x)?;
    if !(c >= 0.0) || !c.is_finite() {
        return Err(invalid("ReLU threshold must be finite and >= 0"));
    }
    let (d, dd) = if c == 0.0 { (x, 1.0) } else { (c - x, -1.0) };
    let family = p.unit.shape.nominal();
    let budget = family.value(0.0);
    // With mismatch installed, the selector's two branches take the families
    // of the first input copy and of the reference.
    let pair = p.unit.branches.as_ref().and_then(|b| {
        let s = p.unit.spline_count();
        (b.len() == p.unit.term_count(1)).then(|| [b[0], b[s]])
    });
    let sol = match pair {
        Some([a, r]) if budget == 0.0 => {
            let z = [d + a.branch_offset_error, r.branch_offset_error];
            solver::solve_rectifier(&z, 0.0)?
        }
        Some(pair) => solver::solve_branches(&[d, 0.0], budget, &pair, Tolerance::for_constraint(budget))?,
        None if budget > 0.0 => {
            solver::solve_generic(&[d, 0.0], budget, &family, Tolerance::for_constraint(budget))?
        }
        None => solver::solve_rectifier(&[d, 0.0], 0.0)?,
    };
    Ok((sol.h, sol.gradient[0] * dd))
}

fn pair_unit(p: &BlockParams) -> SacUnit {
    p.unit.clone().with_reference(false)
}

/// `(phi1, phi2)` with `phi1 = h(0, x + K) - h(x, K)` and `phi2 = phi1 + K`.
pub fn compressive_block(x: f64, k: f64, p: &BlockParams) -> Result<(f64, f64)> {
    let (phi1, _) = compressive_with_slope(x, k, p)?;
    Ok((phi1, phi1 + k))
}

pub(crate) fn compressive_with_slope(x: f64, k: f64, p: &BlockParams) -> Result<(f64, f64)> {
    check(x)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("K must be positive"));
    }
    let u = pair_unit(p);
    let (a, ga) = u.proto_with_gradient(&[0.0, x + k])?;
    let (b, gb) = u.proto_with_gradient(&[x, k])?;
    Ok((a - b, ga[1] - gb[0]))
}

/// `p(x)` shifted so the reference-only floor sits at zero.
pub fn softplus_block(x: f64, p: &BlockParams) -> Result<f64> {
    Ok(softplus_with_slope(x, p)?.0)
}

pub(crate) fn softplus_with_slope(x: f64, p: &BlockParams) -> Result<(f64, f64)> {
    check(x)?;
    let (v, d) = p.proto(x)?;
    Ok((v - p.floor()?, d))
}

/// Winner-take-all over the raw inputs with budget `c`, using the unit's
/// family for the branch currents.
pub fn wta(x: &[f64], c: f64, p: &BlockParams) -> Result<WtaResult> {
    if x.is_empty() {
        return Err(invalid("wta needs at least one input"));
    }
    let family = p.unit.shape.nominal();
    let sol = if family.is_rectifier() || c == 0.0 {
        solver::solve_rectifier(x, c / family.gain)?
    } else {
        solver::solve_generic(x, c, &family, Tolerance::for_constraint(c))?
    };
    let winner_index = x
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > x[best] { i } else { best });
    let outputs: Vec<f64> = if c == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|&v| family.value(v - sol.h)).collect()
    };
    let winners = x.iter().filter(|&&v| v > sol.h).count();
    Ok(WtaResult {
        outputs,
        h: sol.h,
        winner_count: if c == 0.0 { 1 } else { winners },
        winner_index,
    })
}

/// The alternative readout `[x_i - C]_+`, valid where `h` is close to `C`.
pub fn wta_threshold_readout(x: &[f64], c: f64) -> Vec<f64> {
    x.iter().map(|&v| math::pos(v - c)).collect()
}

/// Uncalibrated four-term combination
/// `p(2C + w + x) - p(2C + w - x) + p(2C - w - x) - p(2C - w + x)`.
pub fn multiplier_raw(x: f64, w: f64, p: &BlockParams) -> Result<f64> {
    check(x)?;
    check(w)?;
    let c2 = 2.0 * p.c();
    let plus = p.proto_value(c2 + w + x)? + p.proto_value(c2 - w - x)?;
    let minus = p.proto_value(c2 + w - x)? + p.proto_value(c2 - w + x)?;
    Ok(plus - minus)
}

/// Calibrated product estimate of `x * w`.
pub fn multiplier(x: f64, w: f64, p: &BlockParams) -> Result<f64> {
    Ok(multiplier_raw(x, w, p)? / p.multiplier_scale)
}

/// Calibrated product together with its partial derivatives in `x` and `w`.
pub fn multiplier_with_gradient(x: f64, w: f64, p: &BlockParams) -> Result<(f64, f64, f64)> {
    check(x)?;
    check(w)?;
    let c2 = 2.0 * p.c();
    let (a, da) = p.proto(c2 + w + x)?;
    let (b, db) = p.proto(c2 + w - x)?;
    let (e, de) = p.proto(c2 - w - x)?;
    let (f, df) = p.proto(c2 - w + x)?;
    let s = p.multiplier_scale;
    // Grouped so that negating either argument negates the sum exactly.
    Ok((
        ((a + e) - (b + f)) / s,
        (da + db - de - df) / s,
        (da - db - de + df) / s,
    ))
}
