use serde::{Deserialize, Serialize};

/// CRC over a bit string. `polynomial` is in normal form with the leading `x^width`
/// term implicit. With `reflect` the final register is bit-reversed before it is
/// emitted. The CRC is emitted most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcConfig {
    pub width: u32,
    pub polynomial: u64,
    #[serde(default)]
    pub init: u64,
    #[serde(default)]
    pub reflect: bool,
}

impl Default for CrcConfig {
    /// CRC-8 with polynomial `x^8 + x^2 + x + 1` (0x07), zero init, not reflected.
    fn default() -> Self {
        CrcConfig {
            width: 8,
            polynomial: 0x07,
            init: 0,
            reflect: false,
        }
    }
}

impl CrcConfig {
    pub fn with_width(width: u32, polynomial: u64) -> Self {
        CrcConfig {
            width,
            polynomial,
            ..CrcConfig::default()
        }
    }

    fn mask(&self) -> u64 {
        if self.width >= 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// CRC register after shifting in `data`.
    pub fn checksum(&self, data: &[bool]) -> u64 {
        assert!((1..=64).contains(&self.width), "CRC width must be 1..=64");
        let mask = self.mask();
        let top = self.width - 1;
        let poly = self.polynomial & mask;
        let mut reg = self.init & mask;
        for &b in data {
            let feedback = ((reg >> top) & 1 == 1) ^ b;
            reg = (reg << 1) & mask;
            if feedback {
                reg ^= poly;
            }
        }
        if self.reflect {
            reg = reg.reverse_bits() >> (64 - self.width);
        }
        reg
    }

    fn checksum_bits(&self, data: &[bool]) -> impl Iterator<Item = bool> {
        let crc = self.checksum(data);
        (0..self.width).rev().map(move |i| (crc >> i) & 1 == 1)
    }
}

/// `data` followed by its CRC.
pub fn crc_append(cfg: &CrcConfig, data: &[bool]) -> Vec<bool> {
    let mut out = data.to_vec();
    out.extend(cfg.checksum_bits(data));
    out
}

/// Whether the trailing `width` bits of `bits` are the CRC of the rest.
pub fn crc_check(cfg: &CrcConfig, bits: &[bool]) -> bool {
    let w = cfg.width as usize;
    if bits.len() < w {
        return false;
    }
    let (data, tail) = bits.split_at(bits.len() - w);
    cfg.checksum_bits(data).eq(tail.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{parse, push_uint, to_string};

    /// Remainder of `data(x)·x^w` modulo `x^w + poly(x)` by schoolbook long division
    /// (zero init, no reflection).
    fn long_division(data: &[bool], width: u32, poly: u64) -> Vec<bool> {
        let w = width as usize;
        let mut divisor = vec![true];
        divisor.extend((0..w).rev().map(|i| (poly >> i) & 1 == 1));
        let mut rem: Vec<bool> = data.to_vec();
        rem.extend(std::iter::repeat_n(false, w));
        for i in 0..data.len() {
            if rem[i] {
                for (j, &d) in divisor.iter().enumerate() {
                    rem[i + j] ^= d;
                }
            }
        }
        rem[data.len()..].to_vec()
    }

    #[test]
    fn zero_data_zero_crc() {
        let cfg = CrcConfig::default();
        let out = crc_append(&cfg, &[false; 9]);
        assert_eq!(out, vec![false; 17]);
        assert!(crc_check(&cfg, &out));
    }

    #[test]
    fn matches_long_division() {
        for (width, poly) in [(8u32, 0x07u64), (4, 0x3), (5, 0x15), (16, 0x1021), (1, 0x1)] {
            let cfg = CrcConfig::with_width(width, poly);
            for len in 0..=20usize {
                for v in (0u32..1 << len).step_by(((1usize << len) / 97).max(1)) {
                    let mut d = Vec::new();
                    push_uint(&mut d, v as u128, len);
                    let got: Vec<bool> = crc_append(&cfg, &d)[len..].to_vec();
                    assert_eq!(got, long_division(&d, width, poly), "w={width} len={len}");
                }
            }
        }
    }

    #[test]
    fn default_reference_vectors() {
        let cfg = CrcConfig::default();
        // ASCII "123456789" -> CRC-8/SMBUS check value 0xF4
        let mut msg = Vec::new();
        for byte in b"123456789" {
            push_uint(&mut msg, *byte as u128, 8);
        }
        assert_eq!(cfg.checksum(&msg), 0xF4);
        let d = parse("100000000").unwrap();
        assert_eq!(to_string(&crc_append(&cfg, &d)[9..]), "00010101");
    }

    #[test]
    fn reflect_reverses_register() {
        let plain = CrcConfig::default();
        let refl = CrcConfig {
            reflect: true,
            ..plain
        };
        let d = parse("1011001110").unwrap();
        assert_eq!(
            refl.checksum(&d),
            (plain.checksum(&d) as u8).reverse_bits() as u64
        );
        assert!(crc_check(&refl, &crc_append(&refl, &d)));
    }

    #[test]
    fn single_flips_detected() {
        for (width, poly) in [(4u32, 0x3u64), (8, 0x07)] {
            let cfg = CrcConfig::with_width(width, poly);
            for len in [1usize, 9, 33, 64] {
                let mut d = Vec::new();
                for i in 0..len {
                    d.push(i % 3 == 1);
                }
                let good = crc_append(&cfg, &d);
                assert!(crc_check(&cfg, &good));
                for i in 0..good.len() {
                    let mut bad = good.clone();
                    bad[i] = !bad[i];
                    assert!(!crc_check(&cfg, &bad), "flip {i} undetected");
                }
            }
        }
    }

    #[test]
    fn nonzero_init() {
        let cfg = CrcConfig {
            init: 0xFF,
            ..CrcConfig::default()
        };
        let out = crc_append(&cfg, &[false; 9]);
        assert!(out[9..].iter().any(|&b| b));
        assert!(crc_check(&cfg, &out));
    }
}
