//! Experiment harnesses: regime and temperature sweeps, multiplier error
//! statistics, the parallel-block SNR Monte Carlo, mismatch Monte Carlo and
//! classifier evaluation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::blocks::{self, BlockParams};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::family::{ShapeKind, ROOM_CELSIUS};
use crate::mismatch::{sample_mismatch, MismatchSpec};
use crate::network::{self, Mode, SacNetwork, ACTIVATION_SPAN};
use crate::unit::SacUnit;

/// Blocks that can be swept over a scalar input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockId {
    Proto,
    Cosh,
    Sinh,
    Relu,
    Phi1,
    Phi2,
    Softplus,
    /// `multiplier(x, w)` at the setup's fixed `w`.
    Multiplier,
}

impl BlockId {
    pub const ALL: [BlockId; 8] = [
        BlockId::Proto,
        BlockId::Cosh,
        BlockId::Sinh,
        BlockId::Relu,
        BlockId::Phi1,
        BlockId::Phi2,
        BlockId::Softplus,
        BlockId::Multiplier,
    ];

    /// The activation blocks a network layer can use, plus cosh and sinh.
    pub const ACTIVATIONS: [BlockId; 6] = [
        BlockId::Cosh,
        BlockId::Sinh,
        BlockId::Relu,
        BlockId::Phi1,
        BlockId::Phi2,
        BlockId::Softplus,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BlockId::Proto => "proto",
            BlockId::Cosh => "cosh",
            BlockId::Sinh => "sinh",
            BlockId::Relu => "relu",
            BlockId::Phi1 => "phi1",
            BlockId::Phi2 => "phi2",
            BlockId::Softplus => "softplus",
            BlockId::Multiplier => "mul",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.id() == s)
            .ok_or_else(|| invalid(format!("unknown block `{s}`")))
    }
}

/// Unit and block constants shared by a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSetup {
    pub spline_count: usize,
    pub c: f64,
    /// Compressive constant `K`.
    pub k: f64,
    /// Fixed second operand of [`BlockId::Multiplier`].
    pub weight: f64,
    /// ReLU threshold (`0` selects `max(0, x)`).
    pub relu_threshold: f64,
}

impl Default for SweepSetup {
    fn default() -> Self {
        Self { spline_count: 3, c: 1.0, k: ACTIVATION_SPAN, weight: 0.5, relu_threshold: 0.0 }
    }
}

impl SweepSetup {
    /// Calibrated block parameters for `kind` at `celsius`.
    pub fn params(&self, kind: ShapeKind, celsius: f64) -> Result<BlockParams> {
        let unit = SacUnit::for_regime(self.spline_count, self.c, kind, celsius)?;
        BlockParams::with_k(unit, self.k)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Evaluates `block` at `x`.
pub fn eval_block(block: BlockId, x: f64, p: &BlockParams, setup: &SweepSetup) -> Result<f64> {
    match block {
        BlockId::Proto => p.unit().proto_shape(&[x]),
        BlockId::Cosh => blocks::cosh_block(x, p),
        BlockId::Sinh => blocks::sinh_block(x, p),
        BlockId::Relu => blocks::relu_block(x, setup.relu_threshold, p),
        BlockId::Phi1 => Ok(blocks::compressive_block(x, setup.k, p)?.0),
        BlockId::Phi2 => Ok(blocks::compressive_block(x, setup.k, p)?.1),
        BlockId::Softplus => blocks::softplus_block(x, p),
        BlockId::Multiplier => blocks::multiplier(x, setup.weight, p),
    }
}

fn curve(block: BlockId, grid: &[f64], p: &BlockParams, setup: &SweepSetup) -> Result<Vec<f64>> {
    grid.iter().map(|&x| eval_block(block, x, p, setup)).collect()
}

fn full_scale(values: &[f64]) -> f64 {
    let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub block: BlockId,
    pub family: ShapeKind,
    pub celsius: f64,
    pub values: Vec<f64>,
    /// Normalization divisor: the largest `|value|` over the sweep.
    pub scale: f64,
}

impl Series {
    pub fn name(&self) -> String {
        format!("{}_{}_{}C", self.block.id(), self.family.id(), self.celsius)
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.scale).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: Vec<f64>,
    pub series: Vec<Series>,
}

/// Largest pointwise gap between two equally long curves.
pub fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl SweepResult {
    /// Largest pointwise gap between any two normalized series.
    pub fn max_pairwise_deviation(&self) -> f64 {
        let norm: Vec<Vec<f64>> = self.series.iter().map(Series::normalized).collect();
        let mut worst = 0.0f64;
        for i in 0..norm.len() {
            for j in i + 1..norm.len() {
                worst = worst.max(max_deviation(&norm[i], &norm[j]));
            }
        }
        worst
    }
}

/// Sweeps `block` over `grid` for every `(family, temperature)` pair,
/// family-major.
pub fn regime_sweep(
    block: BlockId,
    grid: &[f64],
    families: &[ShapeKind],
    temperatures: &[f64],
    setup: &SweepSetup,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(invalid("sweep grid is empty"));
    }
    if families.is_empty() || temperatures.is_empty() {
        return Err(invalid("sweep needs at least one family and one temperature"));
    }
    let mut series = Vec::with_capacity(families.len() * temperatures.len());
    for &family in families {
        for &celsius in temperatures {
            let p = setup.params(family, celsius)?;
            let values = curve(block, grid, &p, setup)?;
            let scale = full_scale(&values);
            series.push(Series { block, family, celsius, values, scale });
        }
    }
    Ok(SweepResult { variable: grid.to_vec(), series })
}

/// Multiplier error summary, all in percent of the full-scale product `C^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub spline_count: usize,
    pub c: f64,
    pub grid_n: usize,
    pub max_error_pct: f64,
    pub avg_abs_error_pct: f64,
    pub error_bias_pct: f64,
    pub std_dev_pct: f64,
}

/// Error statistics of `product` against `x * w` over the grid `xs x ws`.
pub fn error_stats<F>(xs: &[f64], ws: &[f64], c: f64, spline_count: usize, mut product: F) -> Result<ErrorStats>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if xs.is_empty() || ws.is_empty() {
        return Err(invalid("error grid is empty"));
    }
    let full = c * c;
    let mut errs = Vec::with_capacity(xs.len() * ws.len());
    for &x in xs {
        for &w in ws {
            errs.push(100.0 * (product(x, w)? - x * w) / full);
        }
    }
    let n = errs.len() as f64;
    let bias = errs.iter().sum::<f64>() / n;
    let avg_abs = errs.iter().map(|e| e.abs()).sum::<f64>() / n;
    let max = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let var = errs.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>() / n;
    Ok(ErrorStats {
        spline_count,
        c,
        grid_n: xs.len().max(ws.len()),
        max_error_pct: max,
        avg_abs_error_pct: avg_abs,
        error_bias_pct: bias,
        std_dev_pct: libm::sqrt(var),
    })
}

/// One [`ErrorStats`] row per spline count, over `x, w` in `[-C, C]` on a
/// `grid_n x grid_n` grid. The multiplier scale is calibrated per row.
pub fn multiplier_error_table(
    spline_counts: &[usize],
    c: f64,
    family: ShapeKind,
    grid_n: usize,
) -> Result<Vec<ErrorStats>> {
    if grid_n < 11 || grid_n.is_multiple_of(2) {
        return Err(invalid("grid_n must be odd and >= 11"));
    }
    let axis = linspace(-c, c, grid_n);
    spline_counts
        .iter()
        .map(|&s| {
            let unit = SacUnit::for_regime(s, c, family, ROOM_CELSIUS)?;
            let p = BlockParams::new(unit)?;
            error_stats(&axis, &axis, c, s, |x, w| blocks::multiplier(x, w, &p))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub snr_single: f64,
    pub snr_parallel: f64,
    /// `snr_parallel / snr_single`.
    pub ratio: f64,
    pub trials: usize,
    pub n_in_sigma: f64,
    pub n_ckt_sigma: f64,
    pub gain: f64,
    pub amplitude: f64,
}

/// Period, in samples, of the test tone.
const TONE_PERIOD: f64 = 64.0;

/// Monte Carlo comparison of one block `G (x + n_in) + n_ckt` against two
/// parallel blocks sharing the signal and the input noise but with
/// independent circuit noise, summed. SNRs are mean signal power over mean
/// noise power.
pub fn snr_experiment(
    amplitude: f64,
    gain: f64,
    n_in_sigma: f64,
    n_ckt_sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<SnrReport> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    if !(amplitude.is_finite() && gain.is_finite() && amplitude != 0.0 && gain != 0.0) {
        return Err(invalid("amplitude and gain must be finite and non-zero"));
    }
    if !(n_in_sigma >= 0.0 && n_in_sigma.is_finite() && n_ckt_sigma >= 0.0 && n_ckt_sigma.is_finite()) {
        return Err(invalid("noise sigmas must be finite and >= 0"));
    }
    let n_in = Normal::new(0.0, n_in_sigma).map_err(|_| invalid("bad n_in sigma"))?;
    let n_ckt = Normal::new(0.0, n_ckt_sigma).map_err(|_| invalid("bad n_ckt sigma"))?;
    if n_in_sigma == 0.0 && n_ckt_sigma == 0.0 {
        return Err(Error::UndefinedSnr(String::from("every noise source is zero")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sig1, mut noise1, mut sig2, mut noise2) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..trials {
        let x = amplitude * libm::sin(core::f64::consts::TAU * t as f64 / TONE_PERIOD);
        let ni = n_in.sample(&mut rng);
        let (c1, c2) = (n_ckt.sample(&mut rng), n_ckt.sample(&mut rng));
        let single = gain * ni + c1;
        let parallel = 2.0 * gain * ni + c1 + c2;
        sig1 += (gain * x) * (gain * x);
        noise1 += single * single;
        sig2 += (2.0 * gain * x) * (2.0 * gain * x);
        noise2 += parallel * parallel;
    }
    if noise1 == 0.0 || noise2 == 0.0 {
        return Err(Error::UndefinedSnr(String::from("sampled noise power is zero")));
    }
    let snr_single = sig1 / noise1;
    let snr_parallel = sig2 / noise2;
    Ok(SnrReport {
        snr_single,
        snr_parallel,
        ratio: snr_parallel / snr_single,
        trials,
        n_in_sigma,
        n_ckt_sigma,
        gain,
        amplitude,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MismatchStats {
    pub block: BlockId,
    pub trials: usize,
    /// Worst per-trial deviation, percent of the nominal full scale.
    pub max_deviation_pct: f64,
    pub mean_deviation_pct: f64,
    pub per_trial_pct: Vec<f64>,
}

/// Seed of trial `t`, fixed in advance so trials can run in any order.
fn trial_seed(base: u64, t: usize) -> u64 {
    base.wrapping_add((t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Per-trial worst deviation of `block` under freshly sampled branch
/// mismatch, relative to the unperturbed curve's full scale.
pub fn mismatch_mc(
    block: BlockId,
    spec: MismatchSpec,
    trials: usize,
    grid: &[f64],
    family: ShapeKind,
    setup: &SweepSetup,
) -> Result<MismatchStats> {
    spec.validate()?;
    if trials < 100 {
        return Err(invalid("mismatch Monte Carlo needs >= 100 trials"));
    }
    if grid.is_empty() {
        return Err(invalid("sweep grid is empty"));
    }
    let p = setup.params(family, ROOM_CELSIUS)?;
    let nominal = curve(block, grid, &p, setup)?;
    let scale = full_scale(&nominal);
    let run = |t: usize| -> Result<f64> {
        let spec_t = spec.with_seed(trial_seed(spec.seed, t));
        let branches = sample_mismatch(p.unit().shape, spec_t, p.unit().term_count(1))?;
        let perturbed = curve(block, grid, &p.with_branches(branches)?, setup)?;
        Ok(100.0 * max_deviation(&perturbed, &nominal) / scale)
    };
    let per_trial = run_trials(trials, run)?;
    let max = per_trial.iter().fold(0.0f64, |m, &v| m.max(v));
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    Ok(MismatchStats { block, trials, max_deviation_pct: max, mean_deviation_pct: mean, per_trial_pct: per_trial })
}

#[cfg(feature = "parallel")]
fn run_trials<F>(trials: usize, run: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(run).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_trials<F>(trials: usize, run: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64>,
{
    (0..trials).map(run).collect()
}

/// Accuracy and confusion counts of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Family id, or `oracle`.
    pub label: String,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

fn check_classes(net: &SacNetwork, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data(String::from("evaluation set is empty")));
    }
    if net.class_count() != data.class_count {
        return Err(Error::Data(format!(
            "network reads out {} classes, dataset has {}",
            net.class_count(),
            data.class_count
        )));
    }
    if let Some(i) = data.labels.iter().position(|&l| l >= data.class_count) {
        return Err(Error::Data(format!("label {} at row {i} out of range", data.labels[i])));
    }
    Ok(())
}

fn evaluate(net: &SacNetwork, data: &Dataset, mode: Mode, label: String) -> Result<Evaluation> {
    let preds = network::predictions(net, data, mode)?;
    let mut confusion = vec![vec![0; data.class_count]; data.class_count];
    let mut hits = 0;
    for (&p, &l) in preds.iter().zip(&data.labels) {
        confusion[l][p] += 1;
        hits += usize::from(p == l);
    }
    Ok(Evaluation { label, accuracy: hits as f64 / data.len() as f64, confusion })
}

/// Evaluates `net` re-targeted to each family at room temperature, without
/// retraining.
pub fn evaluate_classifier(net: &SacNetwork, data: &Dataset, families: &[ShapeKind]) -> Result<Vec<Evaluation>> {
    check_classes(net, data)?;
    families
        .iter()
        .map(|&kind| {
            let n = net.with_family(kind, ROOM_CELSIUS)?;
            evaluate(&n, data, Mode::Shape, String::from(kind.id()))
        })
        .collect()
}

/// Evaluation with exact products and ideal activations.
pub fn evaluate_oracle(net: &SacNetwork, data: &Dataset) -> Result<Evaluation> {
    check_classes(net, data)?;
    evaluate(net, data, Mode::Oracle, String::from("oracle"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectifier_sweeps_ignore_temperature() {
        let grid = linspace(-4.0, 4.0, 41);
        let r = regime_sweep(BlockId::Proto, &grid, &[ShapeKind::Rectifier], &[-45.0, 25.0, 125.0], &SweepSetup::default())
            .unwrap();
        assert_eq!(r.series.len(), 3);
        assert_eq!(r.series[0].values, r.series[1].values);
        assert_eq!(r.series[1].values, r.series[2].values);
        assert_eq!(r.max_pairwise_deviation(), 0.0);
    }

    #[test]
    fn cosh_sweep_is_even() {
        let grid = linspace(-3.0, 3.0, 61);
        let r = regime_sweep(BlockId::Cosh, &grid, &ShapeKind::ALL, &[25.0], &SweepSetup::default()).unwrap();
        for s in &r.series {
            let n = s.values.len();
            for i in 0..n {
                assert!((s.values[i] - s.values[n - 1 - i]).abs() < 1e-9, "{}", s.name());
            }
            assert!(s.normalized().iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn unknown_block_rejected() {
        assert!(matches!(BlockId::parse("tanh"), Err(Error::InvalidParameter(_))));
        for b in BlockId::ALL {
            assert_eq!(BlockId::parse(b.id()).unwrap(), b);
        }
    }

    #[test]
    fn exact_product_has_zero_error() {
        let axis = linspace(-1.0, 1.0, 101);
        let e = error_stats(&axis, &axis, 1.0, 3, |x, w| Ok(x * w)).unwrap();
        assert_eq!(
            (e.max_error_pct, e.avg_abs_error_pct, e.error_bias_pct, e.std_dev_pct),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn zero_axis_has_zero_error() {
        let p = BlockParams::new(SacUnit::rectifier(3, 1.0).unwrap()).unwrap();
        let axis = linspace(-1.0, 1.0, 11);
        let e = error_stats(&[0.0], &axis, 1.0, 3, |x, w| blocks::multiplier(x, w, &p)).unwrap();
        assert_eq!(e.max_error_pct, 0.0);
        let e = error_stats(&axis, &[0.0], 1.0, 3, |x, w| blocks::multiplier(x, w, &p)).unwrap();
        assert_eq!(e.max_error_pct, 0.0);
    }

    #[test]
    fn error_table_rejects_even_grid() {
        assert!(multiplier_error_table(&[1], 1.0, ShapeKind::Rectifier, 10).is_err());
        assert!(multiplier_error_table(&[1], 1.0, ShapeKind::Rectifier, 9).is_err());
    }

    #[test]
    fn error_stats_ordering() {
        let rows = multiplier_error_table(&[1, 2, 3], 1.0, ShapeKind::Rectifier, 41).unwrap();
        for r in rows {
            assert!(r.max_error_pct >= r.avg_abs_error_pct && r.avg_abs_error_pct >= 0.0);
            assert!(r.error_bias_pct.abs() <= r.avg_abs_error_pct + 1e-12);
        }
    }

    #[test]
    fn snr_zero_noise_is_undefined() {
        assert!(matches!(snr_experiment(1.0, 1.0, 0.0, 0.0, 10, 0), Err(Error::UndefinedSnr(_))));
        assert!(snr_experiment(1.0, 1.0, -1.0, 0.1, 10, 0).is_err());
        assert!(snr_experiment(1.0, 1.0, 0.0, 0.1, 0, 0).is_err());
    }

    #[test]
    fn snr_scales_with_amplitude_squared() {
        let a = snr_experiment(1.0, 2.0, 0.05, 0.1, 2000, 8).unwrap();
        let b = snr_experiment(2.0, 2.0, 0.05, 0.1, 2000, 8).unwrap();
        assert!((b.snr_single / a.snr_single - 4.0).abs() < 0.2);
        assert_eq!(a, snr_experiment(1.0, 2.0, 0.05, 0.1, 2000, 8).unwrap());
    }

    #[test]
    fn mismatch_zero_sigma_is_exact() {
        let spec = MismatchSpec::new(0.0, 0.0, 1).unwrap();
        let grid = linspace(-4.0, 4.0, 41);
        let s = mismatch_mc(BlockId::Proto, spec, 100, &grid, ShapeKind::Rectifier, &SweepSetup::default()).unwrap();
        assert_eq!(s.max_deviation_pct, 0.0);
        assert!(mismatch_mc(BlockId::Proto, spec, 99, &grid, ShapeKind::Rectifier, &SweepSetup::default()).is_err());
    }

    #[test]
    fn confusion_rows_match_class_counts() {
        let p = BlockParams::new(SacUnit::rectifier(1, 1.0).unwrap()).unwrap();
        let net = SacNetwork::random(&[2, 3, 1], network::Activation::Phi1, &[p.clone(), p], 2).unwrap();
        let data = Dataset::xor(1.0).jittered(0.1, 5, 3).unwrap();
        let ev = evaluate_classifier(&net, &data, &[ShapeKind::Rectifier, ShapeKind::WeakInversion]).unwrap();
        let counts = data.class_counts();
        for e in &ev {
            for (row, &n) in e.confusion.iter().zip(&counts) {
                assert_eq!(row.iter().sum::<usize>(), n);
            }
        }
        let bad = Dataset { class_count: 3, ..data };
        assert!(matches!(evaluate_classifier(&net, &bad, &[ShapeKind::Rectifier]), Err(Error::Data(_))));
    }
}
