//! One S-AC evaluator: spline expansion of the inputs, an optional zero
//! reference branch, and a GMP solve against the folded constraint `C'`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::family::{family_at_temperature, thermal_voltage, ShapeFamily, ShapeKind, ROOM_CELSIUS};
use crate::solver::{self, GmpSolution, Tolerance};
use crate::spline::{make_spline_set, SplineSet};

/// Knee width of the smooth families relative to `C` at room temperature.
pub const KNEE_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    NType,
    /// Odd mirror of the N-type response: `-h(-x)`.
    PType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SacUnit {
    splines: SplineSet,
    pub shape: ShapeFamily,
    pub polarity: Polarity,
    /// Adds a zero-valued input, expanded like any other input.
    pub include_zero_reference: bool,
    /// Per-branch families (mismatch). Used only when the length matches the
    /// expanded term count of an evaluation.
    pub branches: Option<Vec<ShapeFamily>>,
    pub tol: Tolerance,
}

impl SacUnit {
    /// N-type unit with a zero reference branch.
    pub fn new(spline_count: usize, c: f64, shape: ShapeFamily) -> Result<Self> {
        let splines = make_spline_set(spline_count, c)?;
        Ok(Self {
            tol: Tolerance::for_constraint(splines.c_prime),
            splines,
            shape,
            polarity: Polarity::NType,
            include_zero_reference: true,
            branches: None,
        })
    }

    pub fn rectifier(spline_count: usize, c: f64) -> Result<Self> {
        Self::new(spline_count, c, ShapeFamily::rectifier())
    }

    /// Unit whose family gain is calibrated so that the reference-only
    /// operating point coincides with the rectifier unit's. By translation
    /// equivariance the two then share both asymptotes of the proto-shape.
    pub fn matched(spline_count: usize, c: f64, kind: ShapeKind, thermal_scale: f64) -> Result<Self> {
        let base = ShapeFamily::new(kind, thermal_scale, 1.0)?;
        let mut unit = Self::new(spline_count, c, base)?;
        unit.shape = unit.matched_family(base)?;
        Ok(unit)
    }

    /// Matched unit of `kind` at `celsius`. The thermal voltage is carried
    /// into input units as `KNEE_RATIO * C * U_T(T) / U_T(25 C)`, halved for
    /// EKV whose knee spans `2U`.
    pub fn for_regime(spline_count: usize, c: f64, kind: ShapeKind, celsius: f64) -> Result<Self> {
        family_at_temperature(kind, celsius)?;
        if kind == ShapeKind::Rectifier {
            return Self::rectifier(spline_count, c);
        }
        if !(c > 0.0) {
            return Err(invalid("C must be positive"));
        }
        let knee = if kind == ShapeKind::ModerateInversionEkv { 2.0 } else { 1.0 };
        let scale = KNEE_RATIO * c * thermal_voltage(celsius) / thermal_voltage(ROOM_CELSIUS) / knee;
        Self::matched(spline_count, c, kind, scale)
    }

    /// Returns `family` with its gain rescaled to this unit's anchor.
    pub fn matched_family(&self, family: ShapeFamily) -> Result<ShapeFamily> {
        if family.kind == ShapeKind::Rectifier {
            return Ok(family.with_gain(1.0));
        }
        let anchor = self.anchor();
        let target = solver::solve_rectifier(&anchor, self.splines.c_prime)?.h;
        let unit_gain = family.with_gain(1.0);
        let total: f64 = anchor.iter().map(|&z| unit_gain.value(z - target)).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid("cannot calibrate family gain at the anchor point"));
        }
        Ok(family.with_gain(self.splines.c_prime / total))
    }

    /// Expanded terms of a single zero input.
    fn anchor(&self) -> Vec<f64> {
        self.splines.offsets.clone()
    }

    pub fn splines(&self) -> &SplineSet {
        &self.splines
    }

    pub fn spline_count(&self) -> usize {
        self.splines.len()
    }

    pub fn c(&self) -> f64 {
        self.splines.c
    }

    pub fn c_prime(&self) -> f64 {
        self.splines.c_prime
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn with_reference(mut self, include: bool) -> Self {
        self.include_zero_reference = include;
        self
    }

    pub fn with_shape(mut self, shape: ShapeFamily) -> Self {
        self.shape = shape;
        self
    }

    /// Same unit with its hyper-parameter changed (offsets are rescaled).
    pub fn with_c(&self, c: f64) -> Result<Self> {
        let mut u = self.clone();
        u.splines = make_spline_set(self.splines.len(), c)?;
        u.tol = Tolerance::for_constraint(u.splines.c_prime);
        Ok(u)
    }

    /// Same unit at hyper-parameter `c` with the family's thermal scale
    /// carried along proportionally and its gain re-matched.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        let mut u = self.with_c(c)?;
        if self.shape.kind != ShapeKind::Rectifier {
            let ratio = c / self.c();
            let shape = ShapeFamily { thermal_scale: self.shape.thermal_scale * ratio, ..self.shape };
            u.shape = u.matched_family(shape)?;
        }
        u.branches = None;
        Ok(u)
    }

    /// Number of expanded terms for `arity` inputs.
    pub fn term_count(&self, arity: usize) -> usize {
        (arity + usize::from(self.include_zero_reference)) * self.splines.len()
    }

    /// `z_(i,j) = x_i + O_j`, input-major, reference branch last.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let offsets = &self.splines.offsets;
        let mut z = Vec::with_capacity(self.term_count(x.len()));
        for &xi in x {
            z.extend(offsets.iter().map(|o| xi + o));
        }
        if self.include_zero_reference {
            z.extend_from_slice(offsets);
        }
        z
    }

    /// Raw N-type solve on the expanded inputs.
    pub fn solve(&self, x: &[f64]) -> Result<GmpSolution> {
        if x.is_empty() && !self.include_zero_reference {
            return Err(invalid("S-AC unit evaluated with no inputs"));
        }
        let z = self.expand(x);
        let c = self.splines.c_prime;
        if let Some(branches) = &self.branches {
            if branches.len() == z.len() {
                return solver::solve_branches(&z, c, branches, self.tol);
            }
        }
        match self.shape.kind {
            ShapeKind::Rectifier
                if self.shape.branch_gain_error == 1.0 && self.shape.branch_offset_error == 0.0 =>
            {
                solver::solve_rectifier(&z, c / self.shape.gain)
            }
            _ => solver::solve_generic(&z, c, &self.shape, self.tol),
        }
    }

    /// Proto-shape output `h(x)` oriented by polarity.
    pub fn proto_shape(&self, x: &[f64]) -> Result<f64> {
        match self.polarity {
            Polarity::NType => Ok(self.solve(x)?.h),
            Polarity::PType => {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                Ok(-self.solve(&neg)?.h)
            }
        }
    }

    /// Current readout: the proto-shape clamped to `[h]_+`.
    pub fn proto_current(&self, x: &[f64]) -> Result<f64> {
        Ok(self.proto_shape(x)?.max(0.0))
    }

    /// `(h, dh/dx_i)` with the per-input gradient summed over that input's
    /// spline copies.
    pub fn proto_with_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = self.splines.len();
        let fold = |sol: &GmpSolution| -> Vec<f64> {
            (0..x.len())
                .map(|i| sol.gradient[i * s..(i + 1) * s].iter().sum())
                .collect()
        };
        match self.polarity {
            Polarity::NType => {
                let sol = self.solve(x)?;
                Ok((sol.h, fold(&sol)))
            }
            Polarity::PType => {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let sol = self.solve(&neg)?;
                Ok((-sol.h, fold(&sol)))
            }
        }
    }

    pub fn gmp_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.proto_with_gradient(x)?.1)
    }

    /// Gradient share carried by the reference branch (zero when disabled).
    pub fn reference_gradient(&self, x: &[f64]) -> Result<f64> {
        if !self.include_zero_reference {
            return Ok(0.0);
        }
        let input = if self.polarity == Polarity::PType {
            x.iter().map(|v| -v).collect()
        } else {
            x.to_vec()
        };
        let sol = self.solve(&input)?;
        let s = self.splines.len();
        Ok(sol.gradient[x.len() * s..].iter().sum())
    }

    /// Installs per-branch families; `branches.len()` must equal the
    /// expanded term count for `arity` inputs.
    pub fn set_branches(&mut self, arity: usize, branches: Vec<ShapeFamily>) -> Result<()> {
        let need = self.term_count(arity);
        if branches.len() != need {
            return Err(invalid(format!(
                "expected {need} branch families, got {}",
                branches.len()
            )));
        }
        self.branches = Some(branches);
        Ok(())
    }
}
