//! Block orthogonal sparse superposition (BOSS) codes for the AWGN channel.
//!
//! A codeword is `c = U_g x_g`, where `U_g = P_g D_g H` is a row-permuted,
//! row-signed normalized Walsh–Hadamard block selected by the leading message
//! bits (`D_g` a seeded ±1 diagonal, `D_1 = P_1 = I`) and `x_g` is a
//! sparse vector built layer by layer from the remaining bits. Decoding runs a
//! per-block stage-1 detector (successive MAP or ordered statistics) and picks
//! the block whose reconstruction is closest to the received vector.
//!
//! ```
//! use boss::{Code64, CodeParams, Stage1};
//!
//! let params = CodeParams::antipodal_two_layer(64, 8, 1, 1).validate().unwrap();
//! assert_eq!(params.bit_budget().total, 14);
//! let code = Code64::new(params).unwrap();
//! let bits = boss::bits::parse("10100001100001").unwrap();
//! let (_, cw) = code.encode(&bits).unwrap();
//! let out = code.decode(&cw.samples, 0.0, Stage1::Map).unwrap();
//! assert_eq!(out.bits.unwrap(), bits);
//! ```

pub mod analysis;
pub mod bits;
pub mod ca_boss;
pub mod code_params;
pub mod config;
pub mod decoder;
pub mod dictionary;
pub mod encoder;
pub mod error;
pub mod golden;
pub mod index_map;
pub mod scalar;
pub mod sim;

pub use ca_boss::{crc_append, crc_check, list_decode, CrcConfig, ListConfig};
pub use code_params::{BitBudget, CodeParams, Layer, LayerBits, ValidatedParams};
pub use decoder::{
    map_metric, os_eligible, os_recover, recover_layers, DecodeOutcome, HypothesisResult,
    ListStats, Stage1,
};
pub use dictionary::{BaseTransform, Dictionary, Hadamard};
pub use encoder::{Code, Codeword, LayerMessage, SparseMessage};
pub use error::{Error, Result};
pub use scalar::Real;
pub use sim::{add_awgn, BlerPoint, CampaignConfig, ChannelParams, DecoderChoice, Simulator};

pub type Code64 = Code<f64>;
pub type Code32 = Code<f32>;
pub type Dictionary64 = Dictionary<f64>;
pub type Dictionary32 = Dictionary<f32>;
pub type Codeword64 = Codeword<f64>;
pub type Codeword32 = Codeword<f32>;
