//! Exact piecewise-linear tabulation of convex piecewise-linear curves.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PwlTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PwlTable {
    /// Tabulates a convex piecewise-linear `f` whose kinks all lie in
    /// `[lo, hi]`. For a convex function, agreement with the chord at the
    /// midpoint of an interval means the function is affine on it, so
    /// recursive bisection recovers every kink to round-off.
    pub(crate) fn build<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> Self {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let pieces = 16;
        let step = (hi - lo) / pieces as f64;
        let mut x0 = lo;
        let mut y0 = f(lo);
        xs.push(x0);
        ys.push(y0);
        for p in 1..=pieces {
            let x1 = if p == pieces { hi } else { lo + step * p as f64 };
            let y1 = f(x1);
            refine(&mut f, x0, y0, x1, y1, 0, &mut xs, &mut ys);
            xs.push(x1);
            ys.push(y1);
            x0 = x1;
            y0 = y1;
        }
        let n = xs.len();
        let left_slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        let right_slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        let mut t = Self { xs, ys, left_slope, right_slope };
        t.prune();
        t
    }

    /// Drops interior nodes that sit on the chord of their neighbours.
    fn prune(&mut self) {
        let mut xs = Vec::with_capacity(self.xs.len());
        let mut ys = Vec::with_capacity(self.ys.len());
        xs.push(self.xs[0]);
        ys.push(self.ys[0]);
        for i in 1..self.xs.len() - 1 {
            let (xa, ya) = (*xs.last().unwrap(), *ys.last().unwrap());
            let (xb, yb) = (self.xs[i + 1], self.ys[i + 1]);
            let chord = ya + (yb - ya) * (self.xs[i] - xa) / (xb - xa);
            if (chord - self.ys[i]).abs() > tolerance(self.ys[i]) {
                xs.push(self.xs[i]);
                ys.push(self.ys[i]);
            }
        }
        xs.push(*self.xs.last().unwrap());
        ys.push(*self.ys.last().unwrap());
        self.xs = xs;
        self.ys = ys;
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.xs
    }

    /// Value and right-hand slope at `x`.
    pub(crate) fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if x < self.xs[0] {
            return (self.ys[0] + self.left_slope * (x - self.xs[0]), self.left_slope);
        }
        if x >= self.xs[n - 1] {
            return (self.ys[n - 1] + self.right_slope * (x - self.xs[n - 1]), self.right_slope);
        }
        // Index of the last knot <= x.
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let slope = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        (self.ys[i] + slope * (x - self.xs[i]), slope)
    }
}

fn tolerance(y: f64) -> f64 {
    1e-11 * y.abs().max(1.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    depth: usize,
    xs: &mut Vec<f64>,
    ys: &mut Vec<f64>,
) {
    let xm = 0.5 * (x0 + x1);
    let ym = f(xm);
    if (ym - 0.5 * (y0 + y1)).abs() <= tolerance(ym) || depth >= 52 {
        return;
    }
    refine(f, x0, y0, xm, ym, depth + 1, xs, ys);
    xs.push(xm);
    ys.push(ym);
    refine(f, xm, ym, x1, y1, depth + 1, xs, ys);
}
