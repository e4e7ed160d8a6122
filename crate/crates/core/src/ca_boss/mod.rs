//! CRC-aided codes: the outer CRC and the list decoder that exploits it.
//!
//! The CRC is appended to the payload before the sequential mapping, so the
//! `B_total` mapped bits are `[payload | crc]` and the block index is taken
//! from the leading payload bits.

mod crc;
mod list;

pub use crc::{crc_append, crc_check, CrcConfig};
pub use list::{list_decode, ListConfig};
