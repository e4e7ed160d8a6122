//! Big-endian bit-field helpers. Bits are `bool`s, most significant first.

use rand::Rng;

/// Reads `bits` as a big-endian unsigned integer. Panics above 128 bits.
pub fn read_uint(bits: &[bool]) -> u128 {
    assert!(bits.len() <= 128, "field wider than 128 bits");
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

/// Appends the low `width` bits of `value`, most significant first.
pub fn push_uint(out: &mut Vec<bool>, value: u128, width: usize) {
    assert!(width <= 128, "field wider than 128 bits");
    debug_assert!(width == 128 || value >> width == 0, "value does not fit");
    out.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

/// Renders bits as a `0`/`1` string.
pub fn to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a `0`/`1` string.
pub fn parse(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}
