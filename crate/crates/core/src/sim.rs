//! AWGN channel and Monte-Carlo BLER campaigns.
//!
//! Randomness: every trial owns a ChaCha8 stream. The key is
//! `seed_from_u64(splitmix64(seed ^ splitmix64(eb_n0_db.to_bits())))` and the
//! stream id is the trial index, so a trial's payload and noise depend only on
//! `(seed, Eb/N0, trial)`. Payload bits are drawn first, then the `M` noise
//! samples with the `rand_distr` Ziggurat `StandardNormal` sampler.
//!
//! Trials run in batches of `batch` on a rayon pool of `workers` threads and are
//! reduced in trial order; a point stops at the first trial index where
//! `min_errors` block errors or `max_trials` trials are reached. The result is
//! therefore the same for every worker count and batch size.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::random_bits;
use crate::ca_boss::{crc_append, list_decode, ListConfig};
use crate::code_params::ValidatedParams;
use crate::decoder::Stage1;
use crate::encoder::{Code, Codeword};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-sided 97.5% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Noise level of the channel, either given directly or derived from `Eb/N0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelParams {
    NoiseVariance(f64),
    EbN0Db(f64),
}

impl ChannelParams {
    /// `σ²`. An infinite `Eb/N0` gives the noiseless channel, `σ² = 0`.
    pub fn noise_variance(&self, params: &ValidatedParams) -> f64 {
        match *self {
            ChannelParams::NoiseVariance(v) => v,
            ChannelParams::EbN0Db(db) if db == f64::INFINITY => 0.0,
            ChannelParams::EbN0Db(db) => params.noise_variance(db),
        }
    }
}

/// `y = c + v`, `v ~ N(0, σ² I)`. `σ² = 0` returns `c` unchanged.
pub fn add_awgn<T: Real, R: rand::Rng + ?Sized>(
    c: &Codeword<T>,
    noise_var: f64,
    rng: &mut R,
) -> Vec<T> {
    assert!(noise_var >= 0.0, "noise variance must be non-negative");
    if noise_var == 0.0 {
        return c.samples.clone();
    }
    let sigma = noise_var.sqrt();
    c.samples
        .iter()
        .map(|&s| {
            let v: f64 = StandardNormal.sample(rng);
            s + T::from_f64_lossy(sigma * v)
        })
        .collect()
}

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp rounding so the interval always contains p
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// One simulated point. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerPoint {
    pub eb_n0_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Wrong payload delivered without the failure flag.
    pub undetected_errors: u64,
    pub seed: u64,
}

impl BlerPoint {
    fn from_counts(
        eb_n0_db: f64,
        trials: u64,
        block_errors: u64,
        undetected_errors: u64,
        seed: u64,
    ) -> Self {
        let (ci_low, ci_high) = wilson_interval(block_errors, trials);
        BlerPoint {
            eb_n0_db,
            trials,
            block_errors,
            bler: if trials == 0 {
                0.0
            } else {
                block_errors as f64 / trials as f64
            },
            ci_low,
            ci_high,
            undetected_errors,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderChoice {
    Map,
    Os,
    List,
}

/// A BLER sweep.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub params: ValidatedParams,
    pub decoder: DecoderChoice,
    /// Required for [`DecoderChoice::List`].
    pub list: Option<ListConfig>,
    pub eb_n0_db: Vec<f64>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub batch: usize,
}

impl CampaignConfig {
    pub const DEFAULT_MIN_ERRORS: u64 = 200;
    pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
    pub const DEFAULT_BATCH: usize = 512;

    pub fn new(params: ValidatedParams, decoder: DecoderChoice, eb_n0_db: Vec<f64>) -> Self {
        CampaignConfig {
            params,
            decoder,
            list: None,
            eb_n0_db,
            min_errors: Self::DEFAULT_MIN_ERRORS,
            max_trials: Self::DEFAULT_MAX_TRIALS,
            seed: 0,
            out: None,
            workers: 0,
            batch: Self::DEFAULT_BATCH,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG of trial `trial` at `eb_n0_db` under campaign seed `seed`.
pub fn trial_rng(seed: u64, eb_n0_db: f64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(eb_n0_db.to_bits())));
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    error: bool,
    undetected: bool,
}

/// Prepared simulator for one campaign.
pub struct Simulator {
    code: Code<f64>,
    cfg: CampaignConfig,
    pool: rayon::ThreadPool,
}

impl Simulator {
    pub fn new(cfg: CampaignConfig) -> Result<Self> {
        if cfg.batch == 0 {
            return Err(Error::InvalidArgument("batch must be at least 1".into()));
        }
        match (cfg.decoder, &cfg.list) {
            (DecoderChoice::List, None) => {
                return Err(Error::InvalidArgument(
                    "list decoding needs list sizes".into(),
                ))
            }
            (DecoderChoice::List, Some(l)) if l.sizes.len() != cfg.params.layers().len() => {
                return Err(Error::ListConfig {
                    expected: cfg.params.layers().len(),
                    actual: l.sizes.len(),
                })
            }
            (DecoderChoice::Os, _) => crate::decoder::os_eligible(&cfg.params)?,
            _ => {}
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        let code = Code::new(cfg.params.clone())?;
        Ok(Simulator { code, cfg, pool })
    }

    pub fn code(&self) -> &Code<f64> {
        &self.code
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.cfg
    }

    fn trial(&self, eb_n0_db: f64, noise_var: f64, index: u64) -> Result<TrialOutcome> {
        let params = self.code.params();
        let mut rng = trial_rng(self.cfg.seed, eb_n0_db, index);
        let payload = random_bits(&mut rng, params.payload_bits());
        let bits = match params.crc() {
            Some(crc) => crc_append(crc, &payload),
            None => payload.clone(),
        };
        let (_, cw) = self.code.encode(&bits)?;
        let y = add_awgn(&cw, noise_var, &mut rng);
        let out = match self.cfg.decoder {
            DecoderChoice::Map => self.code.decode(&y, noise_var, Stage1::Map)?,
            DecoderChoice::Os => self.code.decode(&y, noise_var, Stage1::OrderedStatistics)?,
            DecoderChoice::List => {
                let list = self.cfg.list.as_ref().expect("checked in new");
                list_decode(&self.code, &y, noise_var, list)?
            }
        };
        let wrong = out
            .bits
            .as_ref()
            .is_none_or(|b| b[..payload.len()] != payload[..]);
        Ok(TrialOutcome {
            error: wrong || out.failure,
            undetected: wrong && !out.failure,
        })
    }

    /// Simulates one `Eb/N0` point.
    pub fn run_point(&self, eb_n0_db: f64) -> Result<BlerPoint> {
        let noise_var = ChannelParams::EbN0Db(eb_n0_db).noise_variance(self.code.params());
        let (min_errors, max_trials) = (self.cfg.min_errors, self.cfg.max_trials);
        let (mut trials, mut errors, mut undetected) = (0u64, 0u64, 0u64);
        let target_met = |errors: u64| min_errors > 0 && errors >= min_errors;
        while trials < max_trials && !target_met(errors) {
            let end = (trials + self.cfg.batch as u64).min(max_trials);
            let batch: Vec<TrialOutcome> = self.pool.install(|| {
                (trials..end)
                    .into_par_iter()
                    .map(|i| self.trial(eb_n0_db, noise_var, i))
                    .collect::<Result<_>>()
            })?;
            for t in batch {
                trials += 1;
                errors += t.error as u64;
                undetected += t.undetected as u64;
                if target_met(errors) {
                    break;
                }
            }
        }
        Ok(BlerPoint::from_counts(
            eb_n0_db,
            trials,
            errors,
            undetected,
            self.cfg.seed,
        ))
    }

    /// Runs the grid in order, streaming one CSV row per completed point to the
    /// configured output (if any) and calling `progress` after each point.
    pub fn run_campaign(
        &self,
        mut progress: impl FnMut(&BlerPoint),
    ) -> std::io::Result<Vec<BlerPoint>> {
        let mut writer = match &self.cfg.out {
            Some(path) => Some(
                csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(File::create(path)?),
            ),
            None => None,
        };
        if let Some(w) = writer.as_mut() {
            w.write_record(CSV_HEADER)?;
            w.flush()?;
        }
        let mut points = Vec::with_capacity(self.cfg.eb_n0_db.len());
        for &db in &self.cfg.eb_n0_db {
            let p = self.run_point(db).map_err(std::io::Error::other)?;
            if let Some(w) = writer.as_mut() {
                w.serialize(p)?;
                w.flush()?;
            }
            progress(&p);
            points.push(p);
        }
        Ok(points)
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "eb_n0_db",
    "trials",
    "block_errors",
    "bler",
    "ci_low",
    "ci_high",
    "undetected_errors",
    "seed",
];

/// Writes points as CSV with the standard header.
pub fn write_csv<W: Write>(out: W, points: &[BlerPoint]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()
}

/// Convenience wrapper: builds a [`Simulator`] and runs one point.
pub fn run_point(cfg: &CampaignConfig, eb_n0_db: f64) -> Result<BlerPoint> {
    Simulator::new(cfg.clone())?.run_point(eb_n0_db)
}

/// Convenience wrapper: builds a [`Simulator`] and runs the whole grid.
pub fn run_campaign(cfg: &CampaignConfig) -> std::io::Result<Vec<BlerPoint>> {
    Simulator::new(cfg.clone())
        .map_err(std::io::Error::other)?
        .run_campaign(|_| {})
}
