use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::crc::crc_check;
use crate::decoder::{
    detect_layer, layer_metrics, top_k, DecodeOutcome, HypothesisResult, LayerMetric, ListStats,
};
use crate::dictionary::BaseTransform;
use crate::encoder::{Code, LayerMessage, SparseMessage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-layer list sizes `q[ℓ] ≥ 1`; `Q = Π q[ℓ]` candidates per hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListConfig {
    pub sizes: Vec<usize>,
}

impl ListConfig {
    pub fn new(sizes: impl Into<Vec<usize>>) -> Self {
        ListConfig {
            sizes: sizes.into(),
        }
    }

    /// Same size `q` for each of `layers` layers.
    pub fn uniform(q: usize, layers: usize) -> Self {
        ListConfig::new(vec![q; layers])
    }

    pub fn candidates_per_hypothesis(&self) -> usize {
        self.sizes.iter().product()
    }
}

/// Alternative supports for one layer, best first. The first is the top `K`
/// indices; alternative `j` keeps the top `K − 1` and takes the `(K − 1 + j)`-th
/// ranked index as the last member.
fn layer_alternatives<T: Real>(
    scores: &[T],
    excluded: &[bool],
    sparsity: usize,
    q: usize,
) -> Vec<Vec<usize>> {
    let ranked = top_k(scores, excluded, sparsity - 1 + q);
    if ranked.len() < sparsity {
        return Vec::new();
    }
    let head = &ranked[..sparsity - 1];
    ranked[sparsity - 1..]
        .iter()
        .map(|&tail| {
            let mut s = head.to_vec();
            s.push(tail);
            s
        })
        .collect()
}

/// Per-layer alternatives along the primary (first-choice) cancellation path.
fn alternatives_for_hypothesis<T: Real>(
    y_g: &[T],
    sparsities: &[usize],
    metrics: &[LayerMetric<T>],
    cfg: &ListConfig,
) -> Vec<Vec<Vec<usize>>> {
    let mut excluded = vec![false; y_g.len()];
    let mut scores = vec![T::zero(); y_g.len()];
    let mut out = Vec::with_capacity(metrics.len());
    for ((metric, &k), &q) in metrics.iter().zip(sparsities).zip(&cfg.sizes) {
        for (i, s) in scores.iter_mut().enumerate() {
            if !excluded[i] {
                *s = metric.eval(y_g[i]);
            }
        }
        let alts = layer_alternatives(&scores, &excluded, k, q);
        if let Some(primary) = alts.first() {
            for &i in primary {
                excluded[i] = true;
            }
        }
        out.push(alts);
    }
    out
}

/// MAP-list decoding of a CRC-aided code.
///
/// Under every hypothesis the `q[ℓ]` best supports of each layer (ranked along
/// the first-choice cancellation path) are combined into `Q` candidates.
/// Candidates that reuse an index across layers are dropped, the rest are
/// inverse-mapped to bits, and those failing the CRC (when the code has one) or
/// not producible by the encoder are discarded. The surviving candidate closest
/// to `y` over all hypotheses is returned; ties go to the lower block, then to
/// the earlier candidate in cross-product order.
pub fn list_decode<T: Real, B: BaseTransform<T>>(
    code: &Code<T, B>,
    y: &[T],
    noise_var: T,
    cfg: &ListConfig,
) -> Result<DecodeOutcome<T>> {
    let params = code.params();
    let layers = params.layers();
    if cfg.sizes.len() != layers.len() {
        return Err(Error::ListConfig {
            expected: layers.len(),
            actual: cfg.sizes.len(),
        });
    }
    if cfg.sizes.contains(&0) {
        return Err(Error::InvalidArgument(
            "list sizes must be at least 1".into(),
        ));
    }
    if y.len() != params.blocklength() {
        return Err(Error::LengthMismatch {
            expected: params.blocklength(),
            actual: y.len(),
        });
    }
    let metrics = layer_metrics(params, noise_var);
    let sparsities: Vec<usize> = layers.iter().map(|l| l.sparsity).collect();
    let y_norm_sq: T = y.iter().map(|&v| v * v).sum();
    let mut stats = ListStats::default();
    // (distance, block, candidate ordinal, result)
    let mut best: Option<(T, usize, usize, HypothesisResult<T>)> = None;
    let mut closest: Option<(T, usize)> = None;

    for g in 0..params.blocks() {
        let y_g = code.dictionary().analyze(g, y)?;
        let alts = alternatives_for_hypothesis(&y_g, &sparsities, &metrics, cfg);
        let total: usize = alts.iter().map(Vec::len).product();
        for ordinal in 0..total {
            stats.candidates += 1;
            // mixed-radix walk, last layer fastest
            let mut rem = ordinal;
            let mut pick = vec![0usize; alts.len()];
            for l in (0..alts.len()).rev() {
                pick[l] = rem % alts[l].len();
                rem /= alts[l].len();
            }
            let mut used = vec![false; y.len()];
            let mut overlap = false;
            let mut msg_layers: Vec<LayerMessage> = Vec::with_capacity(alts.len());
            for (l, &p) in pick.iter().enumerate() {
                let support = &alts[l][p];
                for &i in support {
                    overlap |= std::mem::replace(&mut used[i], true);
                }
                msg_layers.push(detect_layer(&y_g, &metrics[l], support));
            }
            if overlap {
                stats.structurally_invalid += 1;
                continue;
            }
            let message = SparseMessage {
                block: g,
                layers: msg_layers,
            };
            let distance_sq = code.transform_domain_distance(y_norm_sq, &y_g, &message);
            if closest.is_none_or(|(d, _)| distance_sq < d) {
                closest = Some((distance_sq, g));
            }
            let bits = match code.message_to_bits(&message) {
                Ok(b) => b,
                Err(_) => {
                    stats.unreachable += 1;
                    continue;
                }
            };
            if let Some(crc) = params.crc() {
                if !crc_check(crc, &bits) {
                    stats.crc_failed += 1;
                    continue;
                }
            }
            stats.survivors += 1;
            let better = match &best {
                None => true,
                Some((d, bg, bo, _)) => {
                    distance_sq
                        .partial_cmp(d)
                        .unwrap_or(Ordering::Equal)
                        .then(g.cmp(bg))
                        .then(ordinal.cmp(bo))
                        == Ordering::Less
                }
            };
            if better {
                best = Some((
                    distance_sq,
                    g,
                    ordinal,
                    HypothesisResult {
                        message,
                        distance_sq,
                        bits: Some(bits),
                    },
                ));
            }
        }
    }

    let closest_block = closest.map_or(0, |c| c.1);
    Ok(match best {
        Some((_, _, _, h)) => DecodeOutcome {
            bits: h.bits.clone(),
            message: Some(h.message.clone()),
            closest_block,
            failure: false,
            hypotheses: vec![h],
            list: Some(stats),
        },
        None => DecodeOutcome {
            bits: None,
            message: None,
            closest_block,
            failure: true,
            hypotheses: Vec::new(),
            list: Some(stats),
        },
    })
}
