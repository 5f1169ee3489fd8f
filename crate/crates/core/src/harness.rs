//! Monte-Carlo error experiments, conditioning tables and matrix dumps
//! behind the `winograd` CLI.
//!
//! Every trial draws its input and weights from its own ChaCha8 stream:
//! the generator is seeded with the experiment seed and switched to stream
//! number `trial`. Per-trial results are gathered in trial order before any
//! statistic is computed, so serial and parallel runs give identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{condition_number, Norm};
use crate::construct::{build_plan, plan_to_float, FloatPlan, InterpolationPoints, WinogradPlan};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::{conv2d_winograd, BaseMode, Stage};
use crate::quantization::{conv2d_direct_quantized, conv2d_winograd_quantized, QuantConfig};
use crate::rational::{to_f64, Rational};
use crate::reference::conv2d_direct;
use crate::tensor::{max_abs_error, rel_l2_error, Tensor};

pub const CSV_HEADER: &str = "mode,qconfig,metric,mean,std,median,max,trials,seed";

/// Convolution algorithm measured in a report row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Canonical,
    Legendre,
    Direct,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Canonical => "canonical",
            Algorithm::Legendre => "legendre",
            Algorithm::Direct => "direct",
        }
    }

    fn base_mode(self) -> Option<BaseMode> {
        match self {
            Algorithm::Canonical => Some(BaseMode::Canonical),
            Algorithm::Legendre => Some(BaseMode::Legendre),
            Algorithm::Direct => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Float,
    Quantized(QuantConfig),
}

impl Precision {
    /// `float`, `<n>b` (all stages at `n` bits) or `<n>b+<h>b` (Hadamard at `h`).
    pub fn parse_name(name: &str) -> Result<Self> {
        if name == "float" {
            return Ok(Precision::Float);
        }
        let bits = |s: &str| -> Result<u32> {
            s.strip_suffix('b')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Config(format!("unknown precision {name:?}")))
        };
        let cfg = match name.split_once('+') {
            Some((all, had)) => QuantConfig::uniform(bits(all)?).with_hadamard_bits(bits(had)?),
            None => QuantConfig::uniform(bits(name)?),
        };
        cfg.validate()?;
        Ok(Precision::Quantized(cfg))
    }
}

/// A precision entry of an experiment config: a preset name or explicit widths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecisionSpec {
    Named(String),
    Custom {
        name: String,
        #[serde(flatten)]
        config: QuantConfig,
    },
}

impl PrecisionSpec {
    pub fn name(&self) -> &str {
        match self {
            PrecisionSpec::Named(n) | PrecisionSpec::Custom { name: n, .. } => n,
        }
    }

    pub fn resolve(&self) -> Result<Precision> {
        match self {
            PrecisionSpec::Named(n) => Precision::parse_name(n),
            PrecisionSpec::Custom { config, .. } => {
                config.validate()?;
                Ok(Precision::Quantized(*config))
            }
        }
    }
}

impl From<&str> for PrecisionSpec {
    fn from(s: &str) -> Self {
        PrecisionSpec::Named(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distribution {
    #[serde(rename = "standard-normal")]
    StandardNormal,
    #[serde(rename = "uniform")]
    Uniform,
}

impl Distribution {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Distribution::StandardNormal => rng.sample(StandardNormal),
            Distribution::Uniform => rng.random_range(-1.0..1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub o: usize,
    pub k: usize,
    /// Comma-separated points (`inf` for infinity) or `"default"`.
    pub points: String,
    pub modes: Vec<Algorithm>,
    pub qconfigs: Vec<PrecisionSpec>,
    pub trials: usize,
    pub seed: u64,
    pub input_distribution: Distribution,
    /// `(c_in, c_out)`.
    pub channels: (usize, usize),
    /// `(H, W)`.
    pub spatial: (usize, usize),
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            o: 4,
            k: 3,
            points: "default".into(),
            modes: vec![Algorithm::Canonical, Algorithm::Legendre, Algorithm::Direct],
            qconfigs: vec!["float".into(), "8b".into(), "8b+9b".into()],
            trials: 1000,
            seed: 0,
            input_distribution: Distribution::StandardNormal,
            channels: (4, 4),
            spatial: (12, 12),
            parallel: true,
        }
    }
}

pub fn parse_points(spec: &str, m: usize) -> Result<InterpolationPoints> {
    if spec.trim() == "default" {
        Ok(InterpolationPoints::default_for(m))
    } else {
        spec.parse()
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.o == 0 || self.k == 0 {
            return Err(Error::Config("o and k must be >= 1".into()));
        }
        if self.modes.is_empty() || self.qconfigs.is_empty() {
            return Err(Error::Config("modes and qconfigs must be non-empty".into()));
        }
        let (c_in, c_out) = self.channels;
        if c_in == 0 || c_out == 0 {
            return Err(Error::Config("channel counts must be >= 1".into()));
        }
        if self.spatial.0 < self.k || self.spatial.1 < self.k {
            return Err(Error::Config(format!(
                "spatial {:?} smaller than kernel {}",
                self.spatial, self.k
            )));
        }
        let mut names: Vec<&str> = self.qconfigs.iter().map(PrecisionSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate qconfig names".into()));
        }
        let mut modes = self.modes.clone();
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate modes".into()));
        }
        for q in &self.qconfigs {
            q.resolve()?;
        }
        Ok(())
    }

    pub fn plan(&self) -> Result<WinogradPlan> {
        let m = self.o + self.k - 1;
        let pts = parse_points(&self.points, m).map_err(to_config)?;
        build_plan(self.o, self.k, pts, true).map_err(to_config)
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Dimension(msg) => Error::Config(msg),
        other => other,
    }
}

/// Input and weights of one trial, drawn from stream `trial` of `seed`.
pub fn draw_trial(config: &ExperimentConfig, trial: u64) -> (Tensor<f64>, Tensor<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let (c_in, c_out) = config.channels;
    let (h, w) = config.spatial;
    let k = config.k;
    let dist = config.input_distribution;
    let input = Tensor::from_fn(vec![c_in, h, w], |_| dist.sample(&mut rng));
    let weights = Tensor::from_fn(vec![c_out, c_in, k, k], |_| dist.sample(&mut rng));
    (input, weights)
}

#[derive(Clone, Debug)]
struct Cell {
    max_abs_err: f64,
    rel_l2_err: f64,
    stages: Vec<(Stage, u32, f64, f64)>,
}

fn run_cell(
    algo: Algorithm,
    precision: &Precision,
    plan: &FloatPlan,
    input: &Tensor<f64>,
    weights: &Tensor<f64>,
    reference: &Tensor<f64>,
) -> Result<Cell> {
    let (out, stages) = match (algo.base_mode(), precision) {
        (None, Precision::Float) => (reference.clone(), Vec::new()),
        (None, Precision::Quantized(q)) => (conv2d_direct_quantized(input, weights, q)?, Vec::new()),
        (Some(mode), Precision::Float) => (conv2d_winograd(input, weights, plan, mode)?, Vec::new()),
        (Some(mode), Precision::Quantized(q)) => {
            let r = conv2d_winograd_quantized(input, weights, plan, mode, q)?;
            let stages = r
                .stages
                .iter()
                .map(|s| (s.stage, s.bits, s.max_abs, s.scale))
                .collect();
            (r.output, stages)
        }
    };
    Ok(Cell {
        max_abs_err: max_abs_error(out.data(), reference.data()),
        rel_l2_err: rel_l2_error(out.data(), reference.data()),
        stages,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); 0 for a single trial.
    pub std: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "summary of empty sample");
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let max = sorted[n - 1];
        Self {
            mean,
            std,
            median,
            max,
        }
    }

    fn is_finite(&self) -> bool {
        [self.mean, self.std, self.median, self.max]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MaxAbsErr,
    RelL2Err,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::MaxAbsErr => "max_abs_err",
            Metric::RelL2Err => "rel_l2_err",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mode: Algorithm,
    pub qconfig: String,
    pub metric: Metric,
    #[serde(flatten)]
    pub summary: Summary,
    pub trials: usize,
    pub seed: u64,
}

/// Mean calibrated range and scale of one cast across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub mode: Algorithm,
    pub qconfig: String,
    pub stage: Stage,
    pub bits: u32,
    pub mean_max_abs: f64,
    pub mean_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondRow {
    pub base: BaseMode,
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub two_norm: f64,
    pub frobenius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub stages: Vec<StageRow>,
    pub condition: Vec<CondRow>,
}

impl ErrorReport {
    pub fn row(&self, mode: Algorithm, qconfig: &str, metric: Metric) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && r.qconfig == qconfig && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = &r.summary;
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{:e},{},{}",
                r.mode.name(),
                r.qconfig,
                r.metric.name(),
                s.mean,
                s.std,
                s.median,
                s.max,
                r.trials,
                r.seed
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every (mode, qconfig) pair on `trials` seeded draws and summarizes
/// the error against float direct convolution.
pub fn run_bench(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    let exact = config.plan()?;
    let plan = plan_to_float(&exact);
    let precisions: Vec<(String, Precision)> = config
        .qconfigs
        .iter()
        .map(|q| Ok((q.name().to_string(), q.resolve()?)))
        .collect::<Result<_>>()?;

    let trial = |t: usize| -> Result<Vec<Cell>> {
        let (input, weights) = draw_trial(config, t as u64);
        let reference = conv2d_direct(&input, &weights)?;
        let mut cells = Vec::with_capacity(config.modes.len() * precisions.len());
        for &algo in &config.modes {
            for (_, p) in &precisions {
                cells.push(run_cell(algo, p, &plan, &input, &weights, &reference)?);
            }
        }
        Ok(cells)
    };
    let per_trial: Vec<Vec<Cell>> = if config.parallel {
        (0..config.trials).into_par_iter().map(trial).collect::<Result<_>>()?
    } else {
        (0..config.trials).map(trial).collect::<Result<_>>()?
    };

    let mut rows = Vec::new();
    let mut stages = Vec::new();
    let mut idx = 0;
    for &algo in &config.modes {
        for (name, _) in &precisions {
            let cells: Vec<&Cell> = per_trial.iter().map(|t| &t[idx]).collect();
            idx += 1;
            for metric in [Metric::MaxAbsErr, Metric::RelL2Err] {
                let values: Vec<f64> = cells
                    .iter()
                    .map(|c| match metric {
                        Metric::MaxAbsErr => c.max_abs_err,
                        Metric::RelL2Err => c.rel_l2_err,
                    })
                    .collect();
                let summary = Summary::of(&values);
                if !summary.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite {} for {}/{name}",
                        metric.name(),
                        algo.name()
                    )));
                }
                rows.push(ReportRow {
                    mode: algo,
                    qconfig: name.clone(),
                    metric,
                    summary,
                    trials: config.trials,
                    seed: config.seed,
                });
            }
            let mut acc: BTreeMap<Stage, (u32, f64, f64)> = BTreeMap::new();
            for c in &cells {
                for &(stage, bits, max_abs, scale) in &c.stages {
                    let e = acc.entry(stage).or_insert((bits, 0.0, 0.0));
                    e.1 += max_abs;
                    e.2 += scale;
                }
            }
            let n = config.trials as f64;
            stages.extend(acc.into_iter().map(|(stage, (bits, m, s))| StageRow {
                mode: algo,
                qconfig: name.clone(),
                stage,
                bits,
                mean_max_abs: m / n,
                mean_scale: s / n,
            }));
        }
    }

    Ok(ErrorReport {
        config: config.clone(),
        rows,
        stages,
        condition: condition_table(&exact),
    })
}

/// The matrices a plan applies, named as they appear in the dataflow
/// (`Bᵀ`, `Aᵀ`, … written `B^T`, `A^T`).
pub fn named_matrices(plan: &WinogradPlan, base: BaseMode) -> Vec<(String, Matrix<Rational>)> {
    let t = plan.transforms();
    let mut out = vec![
        ("G".to_string(), t.g.clone()),
        ("B^T".to_string(), t.b.transpose()),
        ("A^T".to_string(), t.a.transpose()),
    ];
    if base == BaseMode::Legendre {
        if let Some(bt) = &t.base {
            out.extend([
                ("P^T".to_string(), bt.p.transpose()),
                ("P^-T".to_string(), bt.p_inv.transpose()),
                ("G_P".to_string(), bt.g_p.clone()),
                ("B_P^T".to_string(), bt.b_p.transpose()),
                ("A_P^T".to_string(), bt.a_p.transpose()),
            ]);
        }
    }
    out
}

/// Condition numbers of every canonical and (when present) Legendre-stage
/// factor of a plan.
pub fn condition_table(plan: &WinogradPlan) -> Vec<CondRow> {
    let mut rows: Vec<CondRow> = Vec::new();
    for base in [BaseMode::Canonical, BaseMode::Legendre] {
        let mats = named_matrices(plan, base);
        let skip = if base == BaseMode::Legendre { 3 } else { 0 };
        if base == BaseMode::Legendre && mats.len() == 3 {
            continue;
        }
        for (name, m) in mats.into_iter().skip(skip) {
            let f = m.map(to_f64);
            rows.push(CondRow {
                base,
                matrix: name,
                rows: f.rows(),
                cols: f.cols(),
                two_norm: condition_number(&f, Norm::Two),
                frobenius: condition_number(&f, Norm::Frobenius),
            });
        }
    }
    rows
}

pub fn render_condition_table(rows: &[CondRow]) -> String {
    let mut out = String::from("base       matrix  shape   cond_2          cond_F\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:<7} {:<7} {:<15.6e} {:.6e}",
            r.base.name(),
            r.matrix,
            format!("{}x{}", r.rows, r.cols),
            r.two_norm,
            r.frobenius
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Exact,
    Float,
}

#[derive(Serialize)]
struct MatrixDump<'a> {
    o: usize,
    k: usize,
    points: String,
    base: BaseMode,
    matrices: Vec<NamedMatrixDump<'a>>,
}

#[derive(Serialize)]
struct NamedMatrixDump<'a> {
    name: &'a str,
    rows: usize,
    cols: usize,
    data: Vec<serde_json::Value>,
}

/// Text or JSON dump of a plan's matrices.
pub fn render_matrices(plan: &WinogradPlan, base: BaseMode, format: MatrixFormat, json: bool) -> String {
    let mats = named_matrices(plan, base);
    if json {
        let dump = MatrixDump {
            o: plan.o(),
            k: plan.k(),
            points: plan.points().to_string(),
            base,
            matrices: mats
                .iter()
                .map(|(name, m)| NamedMatrixDump {
                    name,
                    rows: m.rows(),
                    cols: m.cols(),
                    data: m
                        .data()
                        .iter()
                        .map(|v| match format {
                            MatrixFormat::Exact => serde_json::Value::String(v.to_string()),
                            MatrixFormat::Float => serde_json::json!(to_f64(v)),
                        })
                        .collect(),
                })
                .collect(),
        };
        return serde_json::to_string_pretty(&dump).expect("dump serializes");
    }
    let mut out = format!(
        "F({}, {}) m = {} points = {}\n",
        plan.o(),
        plan.k(),
        plan.m(),
        plan.points()
    );
    for (name, m) in &mats {
        let _ = writeln!(out, "\n{name} ({}x{}):", m.rows(), m.cols());
        match format {
            MatrixFormat::Exact => out.push_str(&m.to_string()),
            MatrixFormat::Float => out.push_str(&m.map(to_f64).to_string()),
        }
    }
    out
}
