//! Two-stage approximate MAP decoder.
//!
//! Stage 1 runs independently under every block hypothesis `g`: the received
//! vector is taken to the block's transform domain, `y_g = U_gᵀ y`, and each
//! layer's support is estimated as the `K_ℓ` indices with the highest
//! a-posteriori membership probability among the indices not claimed by earlier
//! layers (successive support cancellation). Levels are then detected by
//! nearest alphabet point. Stage 2 picks the hypothesis whose re-encoded
//! codeword is closest to `y`.
//!
//! Ties are broken toward the lowest index, both when ranking and in the
//! stage-2 argmin. A winning hypothesis whose support cannot be produced by the
//! encoder is reported as a failure.

use std::cmp::Ordering;
use std::io::Write;

use crate::code_params::ValidatedParams;
use crate::dictionary::BaseTransform;
use crate::encoder::{Code, LayerMessage, SparseMessage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `ln(1 + e^z)` without overflow or premature underflow.
fn softplus<T: Real>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// `ln Σ e^{v_i}`.
fn log_sum_exp<T: Real>(vals: impl Iterator<Item = T> + Clone) -> T {
    let peak = vals.clone().fold(T::neg_infinity(), T::max);
    if peak == T::neg_infinity() {
        return peak;
    }
    peak + vals.map(|v| (v - peak).exp()).sum::<T>().ln()
}

/// Log-posterior that an index belongs to a layer's support given its transformed
/// sample `y`, for noise variance `noise_var > 0` and prior `prior = K_ℓ / |𝓜^(ℓ)|`:
///
/// `ln [ p·(1/J)Σ_j φ(y−α_j) / ( p·(1/J)Σ_j φ(y−α_j) + (1−p)·φ(y) ) ]`
///
/// evaluated as `−softplus(b − a)` with both branches in the log domain.
pub fn map_metric<T: Real>(y: T, noise_var: T, prior: T, alphabet: &[T]) -> T {
    LayerMetric::new(alphabet.to_vec(), noise_var, prior).eval(y)
}

/// [`map_metric`] with the per-layer constants hoisted.
#[derive(Debug, Clone)]
pub struct LayerMetric<T: Real> {
    alphabet: Vec<T>,
    log_on: T,
    log_off: T,
    inv_two_var: T,
    noiseless: bool,
}

impl<T: Real> LayerMetric<T> {
    /// With `noise_var == 0` the metric is replaced by its vanishing-noise ranking
    /// limit `max_j (2yα_j − α_j²)`, which orders indices identically.
    pub fn new(alphabet: Vec<T>, noise_var: T, prior: T) -> Self {
        let j = T::from_usize(alphabet.len()).expect("alphabet size");
        let two = T::one() + T::one();
        LayerMetric {
            log_on: prior.ln() - j.ln(),
            log_off: (T::one() - prior).ln(),
            inv_two_var: T::one() / (two * noise_var),
            noiseless: noise_var == T::zero(),
            alphabet,
        }
    }

    pub fn eval(&self, y: T) -> T {
        if self.noiseless {
            let two = T::one() + T::one();
            return self
                .alphabet
                .iter()
                .map(|&a| two * y * a - a * a)
                .fold(T::neg_infinity(), T::max);
        }
        let a = self.log_on
            + log_sum_exp(
                self.alphabet
                    .iter()
                    .map(|&al| -(y - al) * (y - al) * self.inv_two_var),
            );
        let b = self.log_off - y * y * self.inv_two_var;
        -softplus(b - a)
    }

    /// Index of the nearest alphabet point (lowest index on ties).
    pub fn detect(&self, y: T) -> usize {
        nearest_level(&self.alphabet, y)
    }
}

fn nearest_level<T: Real>(alphabet: &[T], y: T) -> usize {
    let mut best = 0;
    for (j, &a) in alphabet.iter().enumerate().skip(1) {
        if (y - a).abs() < (y - alphabet[best]).abs() {
            best = j;
        }
    }
    best
}

/// Ranking order: higher score first, then lower index.
fn by_score_desc<T: Real>(a: &(T, usize), b: &(T, usize)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// The `k` best indices of `scores` not marked in `excluded`, best first.
pub(crate) fn top_k<T: Real>(scores: &[T], excluded: &[bool], k: usize) -> Vec<usize> {
    if k == 1 {
        let mut best: Option<(T, usize)> = None;
        for (i, &s) in scores.iter().enumerate() {
            if excluded[i] {
                continue;
            }
            match best {
                Some(b) if by_score_desc(&b, &(s, i)) != Ordering::Greater => {}
                _ => best = Some((s, i)),
            }
        }
        return best.into_iter().map(|b| b.1).collect();
    }
    let mut pool: Vec<(T, usize)> = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded[*i])
        .map(|(i, &s)| (s, i))
        .collect();
    let k = k.min(pool.len());
    if k < pool.len() && k > 0 {
        pool.select_nth_unstable_by(k - 1, by_score_desc);
        pool.truncate(k);
    }
    pool.sort_by(by_score_desc);
    pool.into_iter().map(|p| p.1).collect()
}

/// Per-layer metric evaluators for a code and noise variance.
pub fn layer_metrics<T: Real>(params: &ValidatedParams, noise_var: T) -> Vec<LayerMetric<T>> {
    params
        .layers()
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            LayerMetric::new(
                layer
                    .alphabet
                    .iter()
                    .map(|&a| T::from_f64_lossy(a))
                    .collect(),
                noise_var,
                T::from_f64_lossy(params.layer_prior(l)),
            )
        })
        .collect()
}

/// Assembles a layer message from an estimated support (any order), detecting
/// levels; the result is sorted by index.
pub(crate) fn detect_layer<T: Real>(
    y_g: &[T],
    metric: &LayerMetric<T>,
    support: &[usize],
) -> LayerMessage {
    let mut support = support.to_vec();
    support.sort_unstable();
    let levels = support.iter().map(|&i| metric.detect(y_g[i])).collect();
    LayerMessage { support, levels }
}

/// Stage 1 under one hypothesis: successive support cancellation over the layers.
pub fn recover_layers<T: Real>(
    y_g: &[T],
    params: &ValidatedParams,
    noise_var: T,
) -> Vec<LayerMessage> {
    recover_with(y_g, params, &layer_metrics(params, noise_var))
}

fn recover_with<T: Real>(
    y_g: &[T],
    params: &ValidatedParams,
    metrics: &[LayerMetric<T>],
) -> Vec<LayerMessage> {
    let mut excluded = vec![false; y_g.len()];
    let mut scores = vec![T::zero(); y_g.len()];
    let mut out = Vec::with_capacity(metrics.len());
    for (layer, metric) in params.layers().iter().zip(metrics) {
        for (i, s) in scores.iter_mut().enumerate() {
            if !excluded[i] {
                *s = metric.eval(y_g[i]);
            }
        }
        let support = top_k(&scores, &excluded, layer.sparsity);
        for &i in &support {
            excluded[i] = true;
        }
        out.push(detect_layer(y_g, metric, &support));
    }
    out
}

/// Whether every layer uses a single level, so ranking by the MAP metric reduces
/// to ranking by `sign(α)·y` (ordered statistics).
pub fn os_eligible(params: &ValidatedParams) -> Result<()> {
    for (l, layer) in params.layers().iter().enumerate() {
        if layer.alphabet.len() != 1 {
            return Err(Error::ConfigNotOSEligible(format!(
                "layer {l} has {} levels, ordered statistics needs one",
                layer.alphabet.len()
            )));
        }
    }
    Ok(())
}

/// Ordered-statistics stage 1: per layer, the `K_ℓ` largest entries of `y_g` for a
/// positive level or the `K_ℓ` smallest for a negative one, skipping indices taken
/// by earlier layers. For `A = [{1}, {−1}]` this is "largest `K_1`, then smallest
/// `K_2` of the rest".
pub fn os_recover<T: Real>(y_g: &[T], params: &ValidatedParams) -> Result<Vec<LayerMessage>> {
    os_eligible(params)?;
    let mut excluded = vec![false; y_g.len()];
    let mut scores = vec![T::zero(); y_g.len()];
    let mut out = Vec::with_capacity(params.layers().len());
    for layer in params.layers() {
        let positive = layer.alphabet[0] > 0.0;
        for (s, &y) in scores.iter_mut().zip(y_g) {
            *s = if positive { y } else { -y };
        }
        let mut support = top_k(&scores, &excluded, layer.sparsity);
        for &i in &support {
            excluded[i] = true;
        }
        support.sort_unstable();
        let levels = vec![0; support.len()];
        out.push(LayerMessage { support, levels });
    }
    Ok(out)
}

/// Stage-1 algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage1 {
    /// Rank by the MAP metric.
    Map,
    /// Rank by ordered statistics (single-level layers only).
    OrderedStatistics,
}

/// Stage-1 result under one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisResult<T: Real> {
    pub message: SparseMessage,
    /// `‖y − ĉ_g‖²`
    pub distance_sq: T,
    /// Bits of the message, `None` when it is unreachable by the encoder.
    pub bits: Option<Vec<bool>>,
}

impl<T: Real> HypothesisResult<T> {
    pub fn block(&self) -> usize {
        self.message.block
    }

    pub fn valid(&self) -> bool {
        self.bits.is_some()
    }
}

/// Counters filled by the list decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ListStats {
    /// Cross-product candidates formed over all hypotheses.
    pub candidates: usize,
    /// Candidates dropped because an index was reused across layers.
    pub structurally_invalid: usize,
    /// Candidates whose supports the encoder cannot produce.
    pub unreachable: usize,
    pub crc_failed: usize,
    pub survivors: usize,
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome<T: Real> {
    /// Recovered bits (best effort when `failure` is set, `None` if nothing valid).
    pub bits: Option<Vec<bool>>,
    /// Message the bits were read from.
    pub message: Option<SparseMessage>,
    /// Hypothesis with the smallest distance overall.
    pub closest_block: usize,
    pub failure: bool,
    /// Stage-1 results, indexed by block (MAP/OS decoding only).
    pub hypotheses: Vec<HypothesisResult<T>>,
    pub list: Option<ListStats>,
}

impl<T: Real> DecodeOutcome<T> {
    /// Block the bits were taken from.
    pub fn chosen_block(&self) -> Option<usize> {
        self.message.as_ref().map(|m| m.block)
    }

    /// Writes per-hypothesis diagnostics as CSV
    /// (`block,distance_sq,valid,supports,levels`, layers separated by `|`).
    pub fn write_diagnostics_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["block", "distance_sq", "valid", "supports", "levels"])?;
        for h in &self.hypotheses {
            let join = |f: &dyn Fn(&LayerMessage) -> &Vec<usize>| {
                h.message
                    .layers
                    .iter()
                    .map(|l| {
                        f(l).iter()
                            .map(usize::to_string)
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect::<Vec<_>>()
                    .join("|")
            };
            w.write_record([
                h.block().to_string(),
                format!("{:e}", h.distance_sq),
                h.valid().to_string(),
                join(&|l| &l.support),
                join(&|l| &l.levels),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn norm_sq<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

impl<T: Real, B: BaseTransform<T>> Code<T, B> {
    /// Stage 1 under hypothesis `g`, with the stage-2 distance computed in the
    /// transform domain: `‖y‖² − 2⟨y_g, x̂_g⟩ + ‖x̂_g‖²`. One base transform.
    pub fn hypothesis(
        &self,
        y: &[T],
        g: usize,
        noise_var: T,
        stage1: Stage1,
    ) -> Result<HypothesisResult<T>> {
        let metrics = match stage1 {
            Stage1::Map => Some(layer_metrics(self.params(), noise_var)),
            Stage1::OrderedStatistics => {
                os_eligible(self.params())?;
                None
            }
        };
        self.hypothesis_with(y, norm_sq(y), g, metrics.as_deref())
    }

    fn hypothesis_with(
        &self,
        y: &[T],
        y_norm_sq: T,
        g: usize,
        metrics: Option<&[LayerMetric<T>]>,
    ) -> Result<HypothesisResult<T>> {
        let y_g = self.dictionary().analyze(g, y)?;
        let layers = match metrics {
            Some(m) => recover_with(&y_g, self.params(), m),
            None => os_recover(&y_g, self.params())?,
        };
        let message = SparseMessage { block: g, layers };
        let distance_sq = self.transform_domain_distance(y_norm_sq, &y_g, &message);
        let bits = self.message_to_bits(&message).ok();
        Ok(HypothesisResult {
            message,
            distance_sq,
            bits,
        })
    }

    /// `‖y − U_g x‖²` from `‖y‖²` and `y_g = U_gᵀ y`, with `x` sparse.
    pub fn transform_domain_distance(&self, y_norm_sq: T, y_g: &[T], msg: &SparseMessage) -> T {
        let two = T::one() + T::one();
        let (dot, energy) = msg
            .entries::<T>(self.params())
            .iter()
            .fold((T::zero(), T::zero()), |(d, e), &(i, v)| {
                (d + y_g[i] * v, e + v * v)
            });
        y_norm_sq - two * dot + energy
    }

    /// `‖y − ĉ‖²` by explicit re-synthesis (one extra transform).
    pub fn direct_distance(&self, y: &[T], msg: &SparseMessage) -> Result<T> {
        let c = self.synthesize(msg)?;
        Ok(y.iter()
            .zip(&c.samples)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum())
    }

    /// Two-stage decoding of `y` with genie noise variance `noise_var`.
    /// Exactly `G` base transforms.
    pub fn decode(&self, y: &[T], noise_var: T, stage1: Stage1) -> Result<DecodeOutcome<T>> {
        if y.len() != self.params().blocklength() {
            return Err(Error::LengthMismatch {
                expected: self.params().blocklength(),
                actual: y.len(),
            });
        }
        let metrics = match stage1 {
            Stage1::Map => Some(layer_metrics(self.params(), noise_var)),
            Stage1::OrderedStatistics => {
                os_eligible(self.params())?;
                None
            }
        };
        let y_norm_sq = norm_sq(y);
        let hypotheses = (0..self.params().blocks())
            .map(|g| self.hypothesis_with(y, y_norm_sq, g, metrics.as_deref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(select_hypothesis(hypotheses))
    }
}

/// Stage 2: closest hypothesis wins (lowest block on ties). If it is invalid the
/// outcome is a failure carrying the bits of the closest valid hypothesis.
///
/// The result does not depend on the order of `hypotheses`.
pub fn select_hypothesis<T: Real>(mut hypotheses: Vec<HypothesisResult<T>>) -> DecodeOutcome<T> {
    hypotheses.sort_by_key(HypothesisResult::block);
    let order = |a: &&HypothesisResult<T>, b: &&HypothesisResult<T>| {
        a.distance_sq
            .partial_cmp(&b.distance_sq)
            .unwrap_or(Ordering::Equal)
            .then(a.block().cmp(&b.block()))
    };
    let closest = hypotheses
        .iter()
        .min_by(order)
        .expect("at least one hypothesis");
    let closest_block = closest.block();
    let failure = !closest.valid();
    let best_valid = hypotheses.iter().filter(|h| h.valid()).min_by(order);
    let (bits, message) = match best_valid {
        Some(h) => (h.bits.clone(), Some(h.message.clone())),
        None => (None, None),
    };
    DecodeOutcome {
        bits,
        message,
        closest_block,
        failure,
        hypotheses,
        list: None,
    }
}
