//! Monte-Carlo logical error rate estimation under depolarizing noise.
//!
//! Trials are grouped into fixed chunks of [`CHUNK_TRIALS`] consecutive trial
//! indices. Chunks run in parallel waves and are folded in index order; the
//! point stops at the first chunk whose running total reaches the error
//! target, and anything computed past it is dropped. The result therefore
//! depends only on the seed, never on the worker count.

use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp4::{Bp4Config, Schedule, DEFAULT_CLAMP};
use crate::channel::{derive_stream, sample_depolarizing, DepolarizingParams, SeedPlan};
use crate::codes::{CodeSpec, StabilizerCode};
use crate::degeneracy::{classify, OutcomeKind};
use crate::ensemble::{build_ensemble, Ensemble, EnsembleConfig, EnsembleDecoder, EnsembleFile, OvercompleteParams};
use crate::error::{Error, Result};

/// Trials per work unit.
pub const CHUNK_TRIALS: u64 = 256;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959964;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderVariant {
    Bp4,
    Obp4,
    Bp4Asced,
    Obp4Asced,
}

impl DecoderVariant {
    pub fn overcomplete(self) -> bool {
        matches!(self, DecoderVariant::Obp4 | DecoderVariant::Obp4Asced)
    }

    pub fn ensemble(self) -> bool {
        matches!(self, DecoderVariant::Bp4Asced | DecoderVariant::Obp4Asced)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(rename = "L", default = "one")]
    pub l_batches: usize,
    #[serde(default)]
    pub delta: usize,
    #[serde(default = "default_splitter_weight")]
    pub splitter_weight: usize,
    #[serde(default = "default_max_overlap")]
    pub max_overlap: Option<usize>,
    #[serde(default)]
    pub moc: Option<usize>,
    #[serde(default)]
    pub max_row_weight: Option<usize>,
    #[serde(default = "default_search_budget")]
    pub search_budget: usize,
    #[serde(default)]
    pub per_component: bool,
    #[serde(default)]
    pub plain_path: bool,
}

fn one() -> usize {
    1
}

fn default_splitter_weight() -> usize {
    4
}

fn default_max_overlap() -> Option<usize> {
    Some(1)
}

fn default_search_budget() -> usize {
    10_000
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            l_batches: 1,
            delta: 0,
            splitter_weight: default_splitter_weight(),
            max_overlap: default_max_overlap(),
            moc: None,
            max_row_weight: None,
            search_budget: default_search_budget(),
            per_component: false,
            plain_path: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bp4Section {
    /// Prior error probability; the channel `p` of each point when absent.
    #[serde(default)]
    pub p0: Option<f64>,
    pub i_max: usize,
    #[serde(default = "default_clamp")]
    pub clamp: f64,
    #[serde(default)]
    pub schedule: Schedule,
}

fn default_clamp() -> f64 {
    DEFAULT_CLAMP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub p_list: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    pub seed: u64,
}

fn default_max_trials() -> u64 {
    1_000_000
}

fn default_target_errors() -> u64 {
    400
}

/// One experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub decoder: DecoderVariant,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    pub bp4: Bp4Section,
    pub channel: ChannelSection,
    pub mc: McSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc.target_errors == 0 {
            return Err(Error::InvalidParameter("target_errors must be at least 1".into()));
        }
        if self.mc.max_trials == 0 {
            return Err(Error::InvalidParameter("max_trials must be at least 1".into()));
        }
        for &p in &self.channel.p_list {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
            }
            if self.bp4.p0.is_none() && p >= 0.75 {
                return Err(Error::InvalidParameter(format!("p = {p} cannot serve as prior p0")));
            }
        }
        if self.decoder.overcomplete() && self.ensemble.moc.is_none() {
            return Err(Error::InvalidParameter(
                "overcomplete decoders need ensemble.moc".into(),
            ));
        }
        if self.decoder.ensemble() && self.ensemble.delta == 0 {
            return Err(Error::InvalidParameter("ensemble decoders need delta >= 2".into()));
        }
        self.bp4_config(self.bp4.p0.unwrap_or(0.1)).validate()
    }

    pub fn bp4_config(&self, p0: f64) -> Bp4Config {
        Bp4Config {
            p0,
            i_max: self.bp4.i_max,
            clamp: self.bp4.clamp,
            schedule: self.bp4.schedule,
        }
    }

    fn overcomplete_params(&self, code: &StabilizerCode) -> Option<OvercompleteParams> {
        let e = &self.ensemble;
        let m_oc = e.moc.filter(|_| self.decoder.overcomplete())?;
        Some(OvercompleteParams {
            m_oc,
            max_row_weight: e.max_row_weight.unwrap_or(code.n()),
            search_budget: e.search_budget,
            per_component: e.per_component,
        })
    }

    /// Ensemble settings for a given prior.
    pub fn ensemble_config(&self, code: &StabilizerCode, p0: f64) -> EnsembleConfig {
        let oc = self.overcomplete_params(code);
        if !self.decoder.ensemble() {
            return EnsembleConfig::standalone(self.bp4_config(p0), oc);
        }
        let e = &self.ensemble;
        EnsembleConfig {
            l_batches: e.l_batches,
            delta: e.delta,
            splitter_weight: e.splitter_weight,
            max_overlap: e.max_overlap,
            overcomplete: oc,
            decoder: self.bp4_config(p0),
            plain_path: e.plain_path,
        }
    }

    /// Number of decoding paths per trial.
    pub fn num_paths(&self) -> usize {
        if self.decoder.ensemble() {
            self.ensemble.l_batches * (1 << self.ensemble.delta) + usize::from(self.ensemble.plain_path)
        } else {
            1
        }
    }
}

/// Code and ensemble shared by every point of an experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub code: StabilizerCode,
    pub ensemble: Ensemble,
}

impl Experiment {
    /// Builds the code and the ensemble once from the master seed.
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code.build()?;
        let p0 = config.bp4.p0.unwrap_or(0.1);
        let ensemble = build_ensemble(&code, &config.ensemble_config(&code, p0), config.mc.seed)?;
        Ok(Self { config, code, ensemble })
    }

    /// Reuses a stored ensemble instead of building one.
    pub fn with_ensemble(config: ExperimentConfig, file: &EnsembleFile) -> Result<Self> {
        config.validate()?;
        let code = config.code.build()?;
        let ensemble = file.restore(&code)?;
        Ok(Self { config, code, ensemble })
    }

    pub fn ensemble_file(&self) -> EnsembleFile {
        let p0 = self.config.bp4.p0.unwrap_or(0.1);
        EnsembleFile::new(
            self.config.code.clone(),
            self.config.ensemble_config(&self.code, p0),
            self.config.mc.seed,
            &self.ensemble,
        )
    }

    fn decoder(&self, p: f64) -> Result<EnsembleDecoder> {
        let cfg = self.config.bp4_config(self.config.bp4.p0.unwrap_or(p));
        EnsembleDecoder::new(&self.code, &self.ensemble, &cfg)
    }
}

/// Outcome counters for one error probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub p: f64,
    pub trials: u64,
    pub type1_success: u64,
    pub type2_success: u64,
    pub type1_fail: u64,
    pub type2_fail: u64,
    pub ler: f64,
    pub ler_ci: (f64, f64),
    pub type1_fail_fraction: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    t1s: u64,
    t2s: u64,
    t1f: u64,
    t2f: u64,
}

impl Counts {
    fn failures(&self) -> u64 {
        self.t1f + self.t2f
    }

    fn add(&mut self, o: &Counts) {
        self.trials += o.trials;
        self.t1s += o.t1s;
        self.t2s += o.t2s;
        self.t1f += o.t1f;
        self.t2f += o.t2f;
    }
}

impl PointStats {
    fn from_counts(p: f64, c: Counts, wall_seconds: f64) -> Self {
        let failures = c.failures();
        Self {
            p,
            trials: c.trials,
            type1_success: c.t1s,
            type2_success: c.t2s,
            type1_fail: c.t1f,
            type2_fail: c.t2f,
            ler: if c.trials == 0 {
                0.0
            } else {
                failures as f64 / c.trials as f64
            },
            ler_ci: if c.trials == 0 {
                (0.0, 1.0)
            } else {
                wilson_interval(failures, c.trials)
            },
            type1_fail_fraction: (failures > 0).then(|| c.t1f as f64 / failures as f64),
            wall_seconds,
        }
    }

    /// Logical failures of either type.
    pub fn failures(&self) -> u64 {
        self.type1_fail + self.type2_fail
    }

    /// Same statistics, timing ignored.
    pub fn same_counts(&self, other: &PointStats) -> bool {
        PointStats {
            wall_seconds: 0.0,
            ..self.clone()
        } == PointStats {
            wall_seconds: 0.0,
            ..other.clone()
        }
    }

    /// CSV row matching [`CSV_HEADER`]; `seconds` is written as 0 when
    /// timing is off so reruns compare byte for byte.
    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.trials,
            self.type1_success,
            self.type2_success,
            self.type1_fail,
            self.type2_fail,
            self.ler,
            self.ler_ci.0,
            self.ler_ci.1,
            self.type1_fail_fraction.map_or(String::new(), |f| f.to_string()),
            if timing {
                format!("{:.3}", self.wall_seconds)
            } else {
                "0".into()
            },
        )
    }
}

pub const CSV_HEADER: &str = "p,trials,t1s,t2s,t1f,t2f,ler,ci_low,ci_high,t1f_fraction,seconds";

/// 95% Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    assert!(
        trials >= 1 && failures <= trials,
        "need 0 <= failures <= trials, trials >= 1"
    );
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if failures == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

fn run_chunk(
    exp: &Experiment,
    decoder: &EnsembleDecoder,
    params: DepolarizingParams,
    start: u64,
    end: u64,
) -> Result<Counts> {
    let mut ws = decoder.workspace();
    let mut c = Counts::default();
    let h = exp.code.check_matrix();
    for t in start..end {
        let mut stream = derive_stream(SeedPlan::new(exp.config.mc.seed, t), 0);
        let e = sample_depolarizing(exp.code.n(), params, &mut stream);
        let z = h.mul_vec(&e.swapped())?;
        let r = decoder.decode_with(&z, &mut ws)?;
        let outcome = classify(&exp.code, &e, r.estimate, r.winning_path)?;
        c.trials += 1;
        match outcome.kind {
            OutcomeKind::TypeISuccess => c.t1s += 1,
            OutcomeKind::TypeIISuccess => c.t2s += 1,
            OutcomeKind::TypeIFailure => c.t1f += 1,
            OutcomeKind::TypeIIFailure => c.t2f += 1,
        }
    }
    Ok(c)
}

/// Runs trials at error probability `p` until the error target or the trial
/// cap is reached, on the current rayon pool.
pub fn run_point(exp: &Experiment, p: f64) -> Result<PointStats> {
    let params = DepolarizingParams::new(p)?;
    let decoder = exp.decoder(p)?;
    let mc = exp.config.mc;
    let started = Instant::now();
    let total_chunks = mc.max_trials.div_ceil(CHUNK_TRIALS);
    let wave = (rayon::current_num_threads() as u64 * 2).max(1);
    let mut acc = Counts::default();
    let mut next = 0u64;
    'outer: while next < total_chunks {
        let last = (next + wave).min(total_chunks);
        let results: Vec<Result<Counts>> = (next..last)
            .into_par_iter()
            .map(|ch| {
                let start = ch * CHUNK_TRIALS;
                let end = (start + CHUNK_TRIALS).min(mc.max_trials);
                run_chunk(exp, &decoder, params, start, end)
            })
            .collect();
        for r in results {
            acc.add(&r?);
            if acc.failures() >= mc.target_errors {
                break 'outer;
            }
        }
        next = last;
    }
    let stats = PointStats::from_counts(p, acc, started.elapsed().as_secs_f64());
    info!(
        "p={} trials={} failures={} ler={:.3e} ({:.1}s)",
        p,
        stats.trials,
        stats.failures(),
        stats.ler,
        stats.wall_seconds
    );
    Ok(stats)
}

/// Runs every point of the experiment in `p_list` order, handing each
/// result to `on_point` as soon as it is ready.
pub fn run_sweep(exp: &Experiment, mut on_point: impl FnMut(&PointStats) -> Result<()>) -> Result<Vec<PointStats>> {
    let mut out = Vec::with_capacity(exp.config.channel.p_list.len());
    for &p in &exp.config.channel.p_list {
        let stats = run_point(exp, p)?;
        on_point(&stats)?;
        out.push(stats);
    }
    Ok(out)
}

/// Runs `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
