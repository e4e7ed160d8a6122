//! Sequential encoder: bits → block index → layered sparse sub-vectors → codeword.
//!
//! Bit layout (big-endian within each field): `B0` block-index bits, then for each
//! layer its position bits followed by its level bits.

use crate::bits::{push_uint, read_uint};
use crate::code_params::ValidatedParams;
use crate::dictionary::{BaseTransform, Dictionary, Hadamard};
use crate::error::{Error, Result};
use crate::index_map::{remaining_candidates, LayerMapping};
use crate::scalar::Real;

/// Support and level choices of one layer. `levels[i]` indexes the layer alphabet
/// and belongs to `support[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayerMessage {
    pub support: Vec<usize>,
    pub levels: Vec<usize>,
}

/// Sparse message: block index plus one [`LayerMessage`] per layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseMessage {
    pub block: usize,
    pub layers: Vec<LayerMessage>,
}

impl SparseMessage {
    /// Nonzero entries of `x_g` as `(index, value)` pairs.
    pub fn entries<T: Real>(&self, params: &ValidatedParams) -> Vec<(usize, T)> {
        self.layers
            .iter()
            .zip(params.layers())
            .flat_map(|(lm, layer)| {
                lm.support
                    .iter()
                    .zip(&lm.levels)
                    .map(|(&i, &j)| (i, T::from_f64_lossy(layer.alphabet[j])))
            })
            .collect()
    }

    /// `Σ` of squared level values, equal to `‖c‖²`.
    pub fn energy(&self, params: &ValidatedParams) -> f64 {
        self.entries::<f64>(params).iter().map(|(_, v)| v * v).sum()
    }

    /// Ascending union of all layer supports.
    pub fn supports_union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.layers.iter().flat_map(|l| l.support.clone()).collect();
        all.sort_unstable();
        all
    }
}

/// Length-`M` real codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword<T: Real> {
    pub samples: Vec<T>,
}

impl<T: Real> Codeword<T> {
    pub fn energy(&self) -> T {
        self.samples.iter().map(|&v| v * v).sum()
    }
}

/// A code instance: validated parameters plus the dictionary built from them.
#[derive(Debug, Clone)]
pub struct Code<T: Real, B: BaseTransform<T> = Hadamard> {
    params: ValidatedParams,
    dict: Dictionary<T, B>,
}

impl<T: Real> Code<T, Hadamard> {
    pub fn new(params: ValidatedParams) -> Result<Self> {
        let dict = Dictionary::build(&params)?;
        Ok(Code { params, dict })
    }
}

impl<T: Real, B: BaseTransform<T>> Code<T, B> {
    pub fn from_parts(params: ValidatedParams, dict: Dictionary<T, B>) -> Result<Self> {
        if dict.blocklength() != params.blocklength() || dict.blocks() != params.blocks() {
            return Err(Error::InvalidArgument(
                "dictionary does not match the code parameters".into(),
            ));
        }
        Ok(Code { params, dict })
    }

    pub fn params(&self) -> &ValidatedParams {
        &self.params
    }

    pub fn dictionary(&self) -> &Dictionary<T, B> {
        &self.dict
    }

    /// Codeword length in bits, `B_total`.
    pub fn message_bits(&self) -> usize {
        self.params.bit_budget().total
    }

    /// Mapping of layer `layer` given the supports already chosen in earlier layers.
    pub fn layer_mapping(&self, layer: usize, used: &[usize]) -> LayerMapping {
        let budget = &self.params.bit_budget().layers[layer];
        LayerMapping::new(
            remaining_candidates(self.params.blocklength(), used),
            self.params.layers()[layer].sparsity,
            self.params.layers()[layer].levels(),
            budget.position_bits,
            budget.level_bits,
        )
    }

    /// Maps `B_total` bits to the sparse message.
    pub fn bits_to_message(&self, bits: &[bool]) -> Result<SparseMessage> {
        let total = self.message_bits();
        if bits.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: bits.len(),
            });
        }
        let budget = self.params.bit_budget();
        let block = read_uint(&bits[..budget.block_bits]) as usize;
        let mut offset = budget.block_bits;
        let mut used = Vec::new();
        let mut layers = Vec::with_capacity(budget.layers.len());
        for l in 0..budget.layers.len() {
            let map = self.layer_mapping(l, &used);
            let (support, levels) = map.bits_to_layer(&bits[offset..offset + map.bits()])?;
            offset += map.bits();
            used.extend_from_slice(&support);
            layers.push(LayerMessage { support, levels });
        }
        Ok(SparseMessage { block, layers })
    }

    /// Encodes `B_total` bits. One base transform and one permutation per codeword.
    pub fn encode(&self, bits: &[bool]) -> Result<(SparseMessage, Codeword<T>)> {
        let msg = self.bits_to_message(bits)?;
        let cw = self.synthesize(&msg)?;
        Ok((msg, cw))
    }

    pub fn synthesize(&self, msg: &SparseMessage) -> Result<Codeword<T>> {
        let samples = self
            .dict
            .synthesize_sparse(msg.block, &msg.entries::<T>(&self.params))?;
        Ok(Codeword { samples })
    }

    /// Inverse of [`bits_to_message`](Self::bits_to_message). Fails when a layer's
    /// support or level tuple is unreachable, when supports overlap, or when the
    /// message shape does not match the code.
    pub fn message_to_bits(&self, msg: &SparseMessage) -> Result<Vec<bool>> {
        let budget = self.params.bit_budget();
        if msg.block >= self.params.blocks() {
            return Err(Error::BlockIndexOutOfRange {
                index: msg.block,
                blocks: self.params.blocks(),
            });
        }
        if msg.layers.len() != budget.layers.len() {
            return Err(Error::LengthMismatch {
                expected: budget.layers.len(),
                actual: msg.layers.len(),
            });
        }
        let mut out = Vec::with_capacity(budget.total);
        push_uint(&mut out, msg.block as u128, budget.block_bits);
        let mut used = Vec::new();
        for (l, lm) in msg.layers.iter().enumerate() {
            let map = self.layer_mapping(l, &used);
            out.extend(map.layer_to_bits(&lm.support, &lm.levels)?);
            used.extend_from_slice(&lm.support);
        }
        Ok(out)
    }
}
