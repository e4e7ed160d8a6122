//! Code configuration, validation and bit accounting.

use serde::{Deserialize, Serialize};

use crate::ca_boss::CrcConfig;
use crate::error::{Error, Result};
use crate::index_map::{binomial, floor_log2};

/// One superposition layer: `sparsity` nonzeros drawn from `alphabet`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub sparsity: usize,
    pub alphabet: Vec<f64>,
}

impl Layer {
    pub fn new(sparsity: usize, alphabet: impl Into<Vec<f64>>) -> Self {
        Layer {
            sparsity,
            alphabet: alphabet.into(),
        }
    }

    /// Alphabet size `J`.
    pub fn levels(&self) -> usize {
        self.alphabet.len()
    }

    /// Mean squared level, `Σ α² / J`.
    pub fn mean_energy(&self) -> f64 {
        self.alphabet.iter().map(|a| a * a).sum::<f64>() / self.alphabet.len() as f64
    }
}

/// Unvalidated code description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Blocklength `M` (channel uses).
    pub blocklength: usize,
    /// Number of unitary blocks `G`.
    pub blocks: usize,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub permutation_seed: u64,
    /// Random row signs on blocks `2..G` (`U_g = P_g D_g U_1`). With `false` the
    /// blocks are plain row permutations, which all share the all-ones column.
    #[serde(default = "default_row_signs")]
    pub row_signs: bool,
    #[serde(default)]
    pub crc: Option<CrcConfig>,
}

fn default_row_signs() -> bool {
    true
}

impl CodeParams {
    pub fn new(blocklength: usize, blocks: usize, layers: Vec<Layer>) -> Self {
        CodeParams {
            blocklength,
            blocks,
            layers,
            permutation_seed: 0,
            row_signs: true,
            crc: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.permutation_seed = seed;
        self
    }

    pub fn with_row_signs(mut self, row_signs: bool) -> Self {
        self.row_signs = row_signs;
        self
    }

    pub fn with_crc(mut self, crc: CrcConfig) -> Self {
        self.crc = Some(crc);
        self
    }

    /// Two-layer code with `A = [{1}, {-1}]`, the configuration used throughout the
    /// ordered-statistics experiments.
    pub fn antipodal_two_layer(blocklength: usize, blocks: usize, k1: usize, k2: usize) -> Self {
        CodeParams::new(
            blocklength,
            blocks,
            vec![Layer::new(k1, [1.0]), Layer::new(k2, [-1.0])],
        )
    }

    /// Single-layer `K = 1`, `A = {1}` code (the analytically tractable case).
    pub fn single_layer_unit(blocklength: usize, blocks: usize) -> Self {
        CodeParams::new(blocklength, blocks, vec![Layer::new(1, [1.0])])
    }

    pub fn validate(self) -> Result<ValidatedParams> {
        ValidatedParams::new(self)
    }
}

/// Bits carried by one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerBits {
    /// `|𝓜^(ℓ)|`, the number of indices still available at this layer.
    pub candidate_size: usize,
    /// `⌊log2 C(|𝓜|, K)⌋`
    pub position_bits: usize,
    /// `⌊K log2 J⌋`
    pub level_bits: usize,
}

impl LayerBits {
    pub fn total(&self) -> usize {
        self.position_bits + self.level_bits
    }
}

/// Bit budget of a code. All counts are exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBudget {
    /// Block-index bits `B0 = log2 G`.
    pub block_bits: usize,
    pub layers: Vec<LayerBits>,
    /// `B_total = B0 + Σ B[ℓ]`.
    pub total: usize,
    pub blocklength: usize,
}

impl BitBudget {
    /// Rate in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.total as f64 / self.blocklength as f64
    }

    /// Capacity left unused by flooring `K log2 J` per layer, in bits.
    pub fn unused_level_capacity(&self, params: &CodeParams) -> f64 {
        params
            .layers
            .iter()
            .zip(&self.layers)
            .map(|(l, b)| l.sparsity as f64 * (l.levels() as f64).log2() - b.level_bits as f64)
            .sum()
    }
}

/// Parameters that passed validation, together with their bit budget.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    params: CodeParams,
    budget: BitBudget,
}

impl ValidatedParams {
    fn new(params: CodeParams) -> Result<Self> {
        let m = params.blocklength;
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::NonPowerOfTwoM(m));
        }
        if params.blocks == 0 || !params.blocks.is_power_of_two() {
            return Err(Error::NonPowerOfTwoG(params.blocks));
        }
        if params.layers.is_empty() {
            return Err(Error::NoLayers);
        }
        for (l, layer) in params.layers.iter().enumerate() {
            if layer.sparsity == 0 {
                return Err(Error::ZeroSparsity { layer: l });
            }
            if layer.alphabet.is_empty() {
                return Err(Error::EmptyAlphabet { layer: l });
            }
            for (i, &a) in layer.alphabet.iter().enumerate() {
                if !a.is_finite() {
                    return Err(Error::NonFiniteLevel { layer: l });
                }
                if a == 0.0 {
                    return Err(Error::ZeroInAlphabet { layer: l });
                }
                if layer.alphabet[..i].contains(&a) {
                    return Err(Error::DuplicateLevel { layer: l, level: a });
                }
            }
        }
        for (j, a) in params.layers.iter().enumerate() {
            for (k, b) in params.layers.iter().enumerate().skip(j + 1) {
                if let Some(&level) = a.alphabet.iter().find(|x| b.alphabet.contains(x)) {
                    return Err(Error::OverlappingAlphabets {
                        first: j,
                        second: k,
                        level,
                    });
                }
            }
        }
        let total_sparsity: usize = params.layers.iter().map(|l| l.sparsity).sum();
        if total_sparsity > m {
            return Err(Error::SparsityExceedsBlocklength {
                total: total_sparsity,
                blocklength: m,
            });
        }

        let budget = compute_budget(&params)?;
        if let Some(crc) = &params.crc {
            if crc.width == 0 || crc.width > 64 || crc.width as usize > budget.total {
                return Err(Error::InvalidCrcWidth {
                    width: crc.width,
                    budget: budget.total,
                });
            }
        }
        Ok(ValidatedParams { params, budget })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn blocklength(&self) -> usize {
        self.params.blocklength
    }

    pub fn blocks(&self) -> usize {
        self.params.blocks
    }

    pub fn layers(&self) -> &[Layer] {
        &self.params.layers
    }

    pub fn crc(&self) -> Option<&CrcConfig> {
        self.params.crc.as_ref()
    }

    pub fn bit_budget(&self) -> &BitBudget {
        &self.budget
    }

    /// Information bits per codeword: `B_total` less the CRC width, if any.
    pub fn payload_bits(&self) -> usize {
        self.budget.total - self.params.crc.as_ref().map_or(0, |c| c.width as usize)
    }

    /// Average energy per channel use,
    /// `E_s = Σ_ℓ K_ℓ (Σ_j α²_{ℓ,j} / J_ℓ) / M`.
    pub fn average_power(&self) -> f64 {
        self.codeword_energy() / self.params.blocklength as f64
    }

    /// Mean codeword energy `E_s · M`.
    pub fn codeword_energy(&self) -> f64 {
        self.params
            .layers
            .iter()
            .map(|l| l.sparsity as f64 * l.mean_energy())
            .sum()
    }

    /// Noise variance for a given `Eb/N0` in dB, with `Eb` counted over payload bits:
    /// `σ² = (E_s M / B_payload) / (2 Eb/N0)`.
    pub fn noise_variance(&self, eb_n0_db: f64) -> f64 {
        let eb_n0 = 10f64.powf(eb_n0_db / 10.0);
        self.codeword_energy() / self.payload_bits() as f64 / (2.0 * eb_n0)
    }

    /// Prior probability that an index in the layer-`ℓ` candidate set is nonzero.
    pub fn layer_prior(&self, layer: usize) -> f64 {
        let b = &self.budget.layers[layer];
        self.params.layers[layer].sparsity as f64 / b.candidate_size as f64
    }
}

fn compute_budget(params: &CodeParams) -> Result<BitBudget> {
    let m = params.blocklength;
    let block_bits = params.blocks.trailing_zeros() as usize;
    let mut used = 0usize;
    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let candidate_size = m - used;
        let count = binomial(candidate_size, layer.sparsity).ok_or_else(|| {
            Error::CountOverflow(format!("C({candidate_size}, {})", layer.sparsity))
        })?;
        let position_bits = floor_log2(count) as usize;
        let level_bits = level_bits(layer.levels(), layer.sparsity)?;
        layers.push(LayerBits {
            candidate_size,
            position_bits,
            level_bits,
        });
        used += layer.sparsity;
    }
    let total = block_bits + layers.iter().map(LayerBits::total).sum::<usize>();
    Ok(BitBudget {
        block_bits,
        layers,
        total,
        blocklength: m,
    })
}

/// `⌊K log2 J⌋`, computed as the largest `b` with `2^b ≤ J^K`.
fn level_bits(levels: usize, sparsity: usize) -> Result<usize> {
    let combos = (levels as u128)
        .checked_pow(sparsity as u32)
        .ok_or_else(|| Error::CountOverflow(format!("{levels}^{sparsity}")))?;
    Ok(floor_log2(combos) as usize)
}
