//! Reproducible Monte Carlo experiments over every coding scheme.
//!
//! An [`ExperimentSpec`] fully determines its [`ExperimentReport`] apart from
//! `runtime_s`: trial `i` draws from its own stream derived from
//! `(seed, "trial", i)`, so results do not depend on worker count or on how
//! many other trials run.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaining::{plug_combination, ChainParams, ErrorCounts};
use crate::dmc::{capacity, conditional_entropy, mutual_information, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::gallager::{approximate, build_mapper, mi_perturbation_bounds, GallagerCode};
use crate::polar::{is_power_of_two, PolarContext, Selection, DEFAULT_SAMPLES};
use crate::seed;
use crate::sparse::{self, DecimationSchedule, IntegratedConfig, IntegratedLdpc};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "ASYMCAP_WORKERS";

/// A preset string such as `bac(0.02,0.2)` or an explicit matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Preset(String),
    Matrix(Dmc),
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<Dmc> {
        match self {
            ChannelSpec::Preset(s) => s.parse(),
            ChannelSpec::Matrix(d) => Ok(d.clone()),
        }
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "approach", rename_all = "kebab-case")]
pub enum Approach {
    /// Binary Gallager mapping with one polar code per level.
    Gallager { delta: f64, backoff: f64 },
    /// Polar code with non-uniform prior; information rate `info_fraction · I`.
    IntegratedPolar { info_fraction: f64, lossless_delta: f64 },
    /// Stacked sparse checks with decimation encoding.
    IntegratedLdpc {
        var_degree: usize,
        info_margin: f64,
        shared_margin: f64,
        iters_per_round: usize,
        decimation_fraction: f64,
        decode_iterations: usize,
    },
    /// Biased words sent uncoded, decoded from their `(l, r)` syndrome.
    SyndromeLdpc { l: usize, r: usize, alpha: Option<f64>, iterations: usize },
    Chaining { k: usize, source: String, code: String, backoff: f64, shaping_tolerance: f64, alpha: Option<f64> },
}

impl Approach {
    pub fn name(&self) -> &'static str {
        match self {
            Approach::Gallager { .. } => "gallager",
            Approach::IntegratedPolar { .. } => "integrated-polar",
            Approach::IntegratedLdpc { .. } => "integrated-ldpc",
            Approach::SyndromeLdpc { .. } => "syndrome-ldpc",
            Approach::Chaining { .. } => "chaining",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub channel: ChannelSpec,
    pub blocklen: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(flatten)]
    pub approach: Approach,
}

impl ExperimentSpec {
    /// Every problem with the spec, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.channel.resolve() {
            out.push(format!("channel: {e}"));
        }
        if self.trials == 0 {
            out.push("trials: must be at least 1".into());
        }
        if self.blocklen < 2 {
            out.push("blocklen: must be at least 2".into());
        }
        if self.samples < 100 {
            out.push("samples: at least 100 Monte Carlo samples are required".into());
        }
        let needs_pow2 = !matches!(self.approach, Approach::IntegratedLdpc { .. } | Approach::SyndromeLdpc { .. });
        if needs_pow2 && !is_power_of_two(self.blocklen) {
            out.push(format!("blocklen: {} is not a power of two", self.blocklen));
        }
        let fraction = |name: &str, v: f64, out: &mut Vec<String>| {
            if !(v > 0.0 && v <= 1.0) {
                out.push(format!("{name}: {v} is not in (0, 1]"));
            }
        };
        match &self.approach {
            Approach::Gallager { delta, backoff } => {
                if !(*delta > 0.0 && *delta < 0.125) {
                    out.push(format!("delta: {delta} is not in (0, 1/8)"));
                }
                fraction("backoff", *backoff, &mut out);
            }
            Approach::IntegratedPolar { info_fraction, lossless_delta } => {
                fraction("info_fraction", *info_fraction, &mut out);
                if !(*lossless_delta > 0.0 && *lossless_delta < 0.5) {
                    out.push(format!("lossless_delta: {lossless_delta} is not in (0, 1/2)"));
                }
            }
            Approach::IntegratedLdpc { var_degree, decimation_fraction, iters_per_round, .. } => {
                if *var_degree == 0 {
                    out.push("var_degree: must be positive".into());
                }
                if *iters_per_round == 0 {
                    out.push("iters_per_round: must be positive".into());
                }
                fraction("decimation_fraction", *decimation_fraction, &mut out);
            }
            Approach::SyndromeLdpc { l, r, alpha, .. } => {
                if *r == 0 || !(self.blocklen * l).is_multiple_of(*r) {
                    out.push(format!("l, r: blocklen·l = {} is not divisible by r = {r}", self.blocklen * l));
                }
                if let Some(a) = alpha {
                    if !(*a > 0.0 && *a < 1.0) {
                        out.push(format!("alpha: {a} is not in (0, 1)"));
                    }
                }
            }
            Approach::Chaining { k, source, code, backoff, .. } => {
                if *k < 2 {
                    out.push(format!("k: a chain needs at least 2 blocks, got {k}"));
                }
                if source.parse::<crate::chaining::SourceKind>().is_err() {
                    out.push(format!("source: unknown source map `{source}`"));
                }
                if code.parse::<crate::chaining::ChannelKind>().is_err() {
                    out.push(format!("code: unknown channel code `{code}`"));
                }
                fraction("backoff", *backoff, &mut out);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson_interval(errors: usize, trials: usize) -> Interval {
    if trials == 0 {
        return Interval { lower: 0.0, upper: 1.0 };
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lower = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let upper = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    Interval { lower, upper }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub approach: String,
    /// Information bits per channel use actually carried.
    pub rate: f64,
    pub capacity: f64,
    pub symmetric_capacity: f64,
    pub gap_to_capacity: f64,
    pub trials: usize,
    pub block_errors: usize,
    pub empirical_bler: f64,
    pub bler_interval: Interval,
    pub per_error_type_counts: BTreeMap<String, usize>,
    /// Approach-specific figures, inlined at the top level of the JSON.
    #[serde(flatten)]
    pub metrics: BTreeMap<String, f64>,
    pub spec: ExperimentSpec,
    pub runtime_s: f64,
}

impl ExperimentReport {
    /// JSON without `runtime_s`, the part that must replay byte for byte.
    pub fn body_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime_s");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: ExperimentReport = serde_json::from_str(s)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: r.schema_version, expected: REPORT_SCHEMA_VERSION });
        }
        Ok(r)
    }
}

/// Outcome of one trial, reduced by summation.
#[derive(Clone, Debug, Default)]
struct Trial {
    block_error: bool,
    errors: BTreeMap<String, usize>,
    sums: BTreeMap<String, f64>,
}

impl Trial {
    fn count(&mut self, key: &str, v: usize) {
        *self.errors.entry(key.to_string()).or_default() += v;
    }

    fn sum(&mut self, key: &str, v: f64) {
        *self.sums.entry(key.to_string()).or_default() += v;
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn run_trials<F>(trials: usize, seed_value: u64, f: F) -> Result<Vec<Trial>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> Result<Trial> + Sync,
{
    worker_pool()?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stream(seed_value, "trial", t as u64);
                f(&mut rng, seed::derive(seed_value, "shared", t as u64))
            })
            .collect()
    })
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}

fn ones_fraction(x: &[u8]) -> f64 {
    x.iter().filter(|&&b| b == 1).count() as f64 / x.len() as f64
}

struct Prepared {
    rate: f64,
    metrics: BTreeMap<String, f64>,
    error_keys: Vec<&'static str>,
    trials: Vec<Trial>,
}

/// Run one experiment.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let ch = spec.channel.resolve()?;
    let info = capacity(&ch, crate::dmc::DEFAULT_CAPACITY_TOL)?;
    let n = spec.blocklen;
    let prepared = match &spec.approach {
        Approach::Gallager { delta, backoff } => {
            let ra = approximate(&info.optimal_input, *delta, true)?;
            let mapper = build_mapper(&ra)?;
            let bounds = mi_perturbation_bounds(&ch, &info.optimal_input, &ra.approx)?;
            let code = GallagerCode::build(&ch, &mapper, n, *backoff, spec.samples, seed::derive(spec.seed, "construct", 0))?;
            let trials = run_trials(spec.trials, spec.seed, |rng, shared| {
                let msg = random_bits(rng, code.message_len());
                let x = code.encode(&msg, shared)?;
                let y = ch.transmit(&x, rng)?;
                let mut t = Trial { block_error: code.decode(&y, shared)? != msg, ..Trial::default() };
                t.count("decoder", usize::from(t.block_error));
                Ok(t)
            })?;
            let mut metrics = BTreeMap::new();
            metrics.insert("bound_y".into(), bounds.bound_y);
            metrics.insert("bound_x".into(), bounds.bound_x);
            metrics.insert("approximation_gap".into(), bounds.actual_gap);
            metrics.insert("tv_distance".into(), ra.tv_distance);
            metrics.insert("levels".into(), code.levels.len() as f64);
            metrics.insert("mapper_size".into(), mapper.extended_size() as f64);
            metrics.insert("approx_mutual_information".into(), mutual_information(&ch, &ra.approx)?);
            Prepared { rate: code.rate(), metrics, error_keys: vec!["decoder"], trials }
        }
        Approach::IntegratedPolar { info_fraction, lossless_delta } => {
            binary(&ch)?;
            let alpha = info.optimal_input[1];
            let sel = Selection::RateTargeted { info_rate: info_fraction * info.capacity, lossless_delta: *lossless_delta };
            let ctx = PolarContext::build(&ch, alpha, n, spec.samples, seed::derive(spec.seed, "construct", 0), sel)?;
            let trials = run_trials(spec.trials, spec.seed, |rng, shared| {
                let msg = random_bits(rng, ctx.info_set.len());
                let x = ctx.encode(&msg, shared)?;
                let y = ch.transmit_bits(&x, rng)?;
                let mut t = Trial { block_error: ctx.decode(&y, shared)?.0 != msg, ..Trial::default() };
                t.count("decoder", usize::from(t.block_error));
                t.sum("ones_fraction", ones_fraction(&x));
                Ok(t)
            })?;
            let mut metrics = BTreeMap::new();
            metrics.insert("alpha".into(), alpha);
            metrics.insert("error_bound".into(), ctx.error_bound());
            metrics.insert("info_bits".into(), ctx.info_set.len() as f64);
            metrics.insert("random_frozen_bits".into(), ctx.f_r.len() as f64);
            metrics.insert("deterministic_bits".into(), ctx.f_d.len() as f64);
            Prepared { rate: ctx.rate(), metrics, error_keys: vec!["decoder"], trials }
        }
        Approach::IntegratedLdpc { var_degree, info_margin, shared_margin, iters_per_round, decimation_fraction, decode_iterations } => {
            binary(&ch)?;
            let alpha = info.optimal_input[1];
            let cfg = IntegratedConfig {
                n,
                var_degree: *var_degree,
                info_margin: *info_margin,
                shared_margin: *shared_margin,
                schedule: DecimationSchedule { iters_per_round: *iters_per_round, fraction: *decimation_fraction },
                decode_iterations: *decode_iterations,
            };
            let code = IntegratedLdpc::build(&ch, alpha, info.capacity, info.conditional_entropy_x_given_y, cfg, seed::derive(spec.seed, "construct", 0))?;
            let trials = run_trials(spec.trials, spec.seed, |rng, shared| {
                let msg = random_bits(rng, code.message_len());
                let enc = code.encode(&msg, shared, rng)?;
                let y = ch.transmit_bits(&enc.x, rng)?;
                let dec = code.decode(&y, shared)?;
                let mut t = Trial { block_error: dec.message != msg, ..Trial::default() };
                t.count("encoder_shaping", usize::from(enc.unfulfilled > 0));
                t.count("decoder", usize::from(dec.x != enc.x));
                t.sum("ones_fraction", ones_fraction(&enc.x));
                t.sum("unfulfilled_fraction", enc.unfulfilled as f64 / code.stacked.checks() as f64);
                Ok(t)
            })?;
            let mut metrics = BTreeMap::new();
            metrics.insert("alpha".into(), alpha);
            metrics.insert("message_checks".into(), code.p1.checks() as f64);
            metrics.insert("shared_checks".into(), code.p2.checks() as f64);
            Prepared { rate: code.message_len() as f64 / n as f64, metrics, error_keys: vec!["encoder_shaping", "decoder"], trials }
        }
        Approach::SyndromeLdpc { l, r, alpha, iterations } => {
            binary(&ch)?;
            let alpha = alpha.unwrap_or(info.optimal_input[1]);
            let input = InputDist::bernoulli(alpha)?;
            let g = sparse::build_regular_graph(n, *l, *r, seed::derive(spec.seed, "construct", 0))?;
            let trials = run_trials(spec.trials, spec.seed, |rng, _| {
                let x: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < alpha)).collect();
                let s = sparse::syndrome(&g, &x)?;
                let y = ch.transmit_bits(&x, rng)?;
                let out = sparse::bp_decode_biased(&g, &ch, alpha, &y, &s, *iterations)?;
                let bit_errors = out.x.iter().zip(&x).filter(|(a, b)| a != b).count();
                let mut t = Trial { block_error: bit_errors > 0, ..Trial::default() };
                t.count("decoder", usize::from(t.block_error));
                t.count("unsatisfied", usize::from(!out.satisfied));
                t.sum("bit_error_rate", bit_errors as f64 / n as f64);
                Ok(t)
            })?;
            let mut metrics = BTreeMap::new();
            metrics.insert("alpha".into(), alpha);
            metrics.insert("checks".into(), g.checks() as f64);
            metrics.insert("cond_entropy".into(), conditional_entropy(&ch, &input)?);
            // Net information: biased source entropy minus the shared syndrome.
            let rate = (crate::info::h2(alpha) - g.checks() as f64 / n as f64).max(0.0);
            Prepared { rate, metrics, error_keys: vec!["decoder", "unsatisfied"], trials }
        }
        Approach::Chaining { k, source, code, backoff, shaping_tolerance, alpha } => {
            let mut params = ChainParams::new(ch.clone(), *k, n);
            params.backoff = *backoff;
            params.samples = spec.samples;
            params.seed = seed::derive(spec.seed, "construct", 0);
            params.shaping_tolerance = *shaping_tolerance;
            params.alpha = *alpha;
            let session = plug_combination(source, code, params)?;
            let cfg = &session.cfg;
            let trials = run_trials(spec.trials, spec.seed, |rng, shared| {
                let msg = random_bits(rng, cfg.message_len());
                let enc = session.encode(&msg, shared)?;
                let received: Vec<Vec<usize>> =
                    enc.channel_inputs().iter().map(|b| ch.transmit_bits(b, rng)).collect::<Result<_>>()?;
                let (dec, transcript) = session.decode(&received, shared)?;
                let counts: ErrorCounts = session.classify(&enc, &transcript, session.terminal_ok(&enc, &transcript));
                let mut t = Trial { block_error: dec != msg, ..Trial::default() };
                t.count("shaping", counts.shaping);
                t.count("block", counts.block);
                t.count("terminal", counts.terminal);
                t.count("payload", counts.payload);
                let ones: f64 = enc.blocks.iter().map(|b| ones_fraction(&b.codeword)).sum();
                t.sum("ones_fraction", ones / enc.blocks.len() as f64);
                Ok(t)
            })?;
            let mut metrics = BTreeMap::new();
            metrics.insert("alpha".into(), cfg.alpha);
            metrics.insert("realized_rate".into(), cfg.realized_rate());
            metrics.insert("formula_rate".into(), cfg.formula_rate());
            metrics.insert("rate_from_sizes".into(), cfg.rate_from_sizes());
            metrics.insert("channel_uses".into(), cfg.channel_uses() as f64);
            metrics.insert("payload_bits".into(), cfg.payload_len as f64);
            metrics.insert("info_bits_per_block".into(), cfg.info_per_block as f64);
            metrics.insert("syndrome_bits".into(), cfg.syndrome_len as f64);
            metrics.insert("terminal_blocklen".into(), cfg.terminal_n as f64);
            Prepared {
                rate: cfg.realized_rate(),
                metrics,
                error_keys: vec!["shaping", "block", "terminal", "payload"],
                trials,
            }
        }
    };
    Ok(finish(spec, &info, prepared, start))
}

fn binary(ch: &Dmc) -> Result<()> {
    if ch.is_binary() {
        Ok(())
    } else {
        Err(Error::NotBinary(ch.input_size()))
    }
}

fn finish(spec: &ExperimentSpec, info: &crate::dmc::InfoReport, p: Prepared, start: Instant) -> ExperimentReport {
    let trials = p.trials.len();
    let block_errors = p.trials.iter().filter(|t| t.block_error).count();
    let mut per_error_type_counts: BTreeMap<String, usize> = p.error_keys.iter().map(|k| (k.to_string(), 0)).collect();
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for t in &p.trials {
        for (k, v) in &t.errors {
            *per_error_type_counts.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &t.sums {
            *sums.entry(k.clone()).or_default() += v;
        }
    }
    let mut metrics = p.metrics;
    for (k, v) in sums {
        metrics.insert(format!("mean_{k}"), v / trials as f64);
    }
    ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        approach: spec.approach.name().into(),
        rate: p.rate,
        capacity: info.capacity,
        symmetric_capacity: info.symmetric_capacity,
        gap_to_capacity: info.capacity - p.rate,
        trials,
        block_errors,
        empirical_bler: block_errors as f64 / trials as f64,
        bler_interval: wilson_interval(block_errors, trials),
        per_error_type_counts,
        metrics,
        spec: spec.clone(),
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

/// Chaining reports for each `k`, with every other knob taken from `spec`.
pub fn sweep_chain_k(spec: &ExperimentSpec, ks: &[usize]) -> Result<Vec<ExperimentReport>> {
    ks.iter()
        .map(|&k| {
            let mut s = spec.clone();
            match &mut s.approach {
                Approach::Chaining { k: slot, .. } => *slot = k,
                _ => return Err(Error::Config("a k sweep needs a chaining spec".into())),
            }
            run(&s)
        })
        .collect()
}

/// `k,realized_rate,formula_rate,empirical_bler` rows.
pub fn write_sweep_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "realized_rate", "formula_rate", "empirical_bler"]).map_err(csv_err)?;
    for r in reports {
        let k = match &r.spec.approach {
            Approach::Chaining { k, .. } => *k,
            _ => 0,
        };
        let metric = |name: &str| r.metrics.get(name).copied().unwrap_or(f64::NAN);
        w.write_record([
            k.to_string(),
            metric("realized_rate").to_string(),
            metric("formula_rate").to_string(),
            r.empirical_bler.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub approach: String,
    pub rate: f64,
    pub gap_to_capacity: f64,
    pub empirical_bler: f64,
    pub trials: usize,
    /// Rough operation count per transmitted block.
    pub complexity_proxy: f64,
    pub note: String,
}

/// Every applicable approach at block length `blocklen`, each given about
/// `budget` channel uses worth of trials.
pub fn compare_approaches(channel: &ChannelSpec, blocklen: usize, budget: usize, seed_value: u64, samples: usize) -> Result<Vec<ComparisonRow>> {
    let ch = channel.resolve()?;
    let n = blocklen as f64;
    let log_n = n.log2().max(1.0);
    let trials_for = |uses: f64| ((budget as f64 / uses).floor() as usize).max(1);
    let mut candidates: Vec<(Approach, f64)> = vec![(Approach::Gallager { delta: 0.02, backoff: 0.75 }, n)];
    if ch.is_binary() {
        candidates.push((Approach::IntegratedPolar { info_fraction: 0.75, lossless_delta: 1e-3 }, n));
        candidates.push((
            Approach::Chaining {
                k: 5,
                source: "polar".into(),
                code: "polar".into(),
                backoff: 0.75,
                shaping_tolerance: 0.05,
                alpha: None,
            },
            // Four data blocks plus a terminal block of up to twice the length.
            6.0 * n,
        ));
    }
    let mut rows = Vec::new();
    for (approach, uses) in candidates {
        let spec = ExperimentSpec {
            channel: ChannelSpec::Matrix(ch.clone()),
            blocklen,
            trials: trials_for(uses),
            seed: seed_value,
            samples,
            approach,
        };
        let r = run(&spec)?;
        let (complexity_proxy, note) = match &spec.approach {
            Approach::Gallager { .. } => {
                let levels = r.metrics["levels"];
                let note = if r.metrics["mapper_size"] == 2.0 && ch.is_binary() && ch.input_size() == 2 {
                    "uniform input is optimal: the mapper is the identity".to_string()
                } else {
                    format!("{} levels, mapper size {}", levels, r.metrics["mapper_size"])
                };
                (levels * n * log_n, note)
            }
            Approach::IntegratedPolar { .. } => (2.0 * n * log_n, format!("alpha {:.4}", r.metrics["alpha"])),
            Approach::Chaining { .. } => {
                let nt = r.metrics["terminal_blocklen"];
                (4.0 * 2.0 * n * log_n + nt * nt.log2(), format!("formula rate {:.4}", r.metrics["formula_rate"]))
            }
            _ => (0.0, String::new()),
        };
        rows.push(ComparisonRow {
            approach: r.approach.clone(),
            rate: r.rate,
            gap_to_capacity: r.gap_to_capacity,
            empirical_bler: r.empirical_bler,
            trials: r.trials,
            complexity_proxy,
            note,
        });
    }
    Ok(rows)
}
