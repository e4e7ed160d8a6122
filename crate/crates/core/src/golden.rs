//! Conformance vectors: encoder input/output pairs, CRC values, and permutation
//! and sign tables for a fixed set of codes, written to and checked against CSV
//! files.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{parse, random_bits, to_string};
use crate::ca_boss::{crc_append, CrcConfig};
use crate::code_params::{CodeParams, Layer};
use crate::encoder::Code;
use crate::error::{Error, Result};

/// Vectors per code set.
pub const VECTORS_PER_SET: usize = 32;
/// Seed of the random messages.
pub const VECTOR_SEED: u64 = 2024;
/// Codeword tolerance used by [`check`].
pub const CODEWORD_TOLERANCE: f64 = 1e-12;

/// Named code sets covered by the vectors.
pub fn standard_sets() -> Vec<(&'static str, CodeParams)> {
    vec![
        ("m16_g2_unit", CodeParams::single_layer_unit(16, 2)),
        (
            "m64_g8_antipodal",
            CodeParams::antipodal_two_layer(64, 8, 1, 1),
        ),
        (
            "m128_g16_antipodal_crc8",
            CodeParams::antipodal_two_layer(128, 16, 1, 1).with_crc(CrcConfig::default()),
        ),
        (
            "m32_g4_multilevel",
            CodeParams::new(
                32,
                4,
                vec![Layer::new(2, [1.0, 2.0]), Layer::new(1, [-1.0, -3.0, -0.5])],
            )
            .with_seed(7),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderVector {
    pub bits: String,
    pub block: usize,
    /// Layer supports, `|`-separated, indices space-separated.
    pub supports: String,
    pub levels: String,
    /// Space-separated samples.
    pub codeword: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcVector {
    pub width: u32,
    pub polynomial: u64,
    pub data: String,
    pub crc: String,
}

fn join_layers(layers: impl Iterator<Item = Vec<usize>>) -> String {
    layers
        .map(|v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}

pub fn encoder_vectors(params: &CodeParams) -> Result<Vec<EncoderVector>> {
    let code: Code<f64> = Code::new(params.clone().validate()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(VECTOR_SEED);
    let payload = code.params().payload_bits();
    (0..VECTORS_PER_SET)
        .map(|_| {
            let data = random_bits(&mut rng, payload);
            let bits = match code.params().crc() {
                Some(c) => crc_append(c, &data),
                None => data,
            };
            let (msg, cw) = code.encode(&bits)?;
            Ok(EncoderVector {
                bits: to_string(&bits),
                block: msg.block,
                supports: join_layers(msg.layers.iter().map(|l| l.support.clone())),
                levels: join_layers(msg.layers.iter().map(|l| l.levels.clone())),
                codeword: cw
                    .samples
                    .iter()
                    .map(|v| format!("{v:e}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            })
        })
        .collect()
}

pub fn crc_vectors() -> Vec<CrcVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(VECTOR_SEED);
    let configs = [
        CrcConfig::default(),
        CrcConfig::with_width(4, 0x3),
        CrcConfig::with_width(16, 0x1021),
    ];
    let mut out = Vec::new();
    for cfg in configs {
        for len in [1usize, 9, 17, 40] {
            let data = random_bits(&mut rng, len);
            let full = crc_append(&cfg, &data);
            out.push(CrcVector {
                width: cfg.width,
                polynomial: cfg.polynomial,
                data: to_string(&data),
                crc: to_string(&full[len..]),
            });
        }
    }
    out
}

/// Rows `g, π_g(0), …, π_g(M−1)`.
pub fn permutation_table(params: &CodeParams) -> Result<Vec<Vec<usize>>> {
    let code: Code<f64> = Code::new(params.clone().validate()?)?;
    (0..params.blocks)
        .map(|g| {
            let mut row = vec![g];
            row.extend_from_slice(code.dictionary().permutation(g)?);
            Ok(row)
        })
        .collect()
}

/// Rows `g, d_g(0), …, d_g(M−1)` with `d = ±1` indexed by source row.
pub fn sign_table(params: &CodeParams) -> Result<Vec<Vec<i64>>> {
    let code: Code<f64> = Code::new(params.clone().validate()?)?;
    (0..params.blocks)
        .map(|g| {
            let mut row = vec![g as i64];
            row.extend(code.dictionary().signs(g)?.iter().map(|&s| s as i64));
            Ok(row)
        })
        .collect()
}

fn write_table<S: Serialize>(path: &Path, rows: &[Vec<S>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_table<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<Vec<S>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn write_rows<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_rows<S: for<'de> Deserialize<'de>>(path: &Path, headers: bool) -> Result<Vec<S>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(headers)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| io_err(path, e))
}

/// Writes `encoder_<set>.csv`, `permutations_<set>.csv`, `signs_<set>.csv` and
/// `crc.csv` into `dir`.
pub fn emit(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    for (name, params) in standard_sets() {
        let p = dir.join(format!("encoder_{name}.csv"));
        write_rows(&p, &encoder_vectors(&params)?)?;
        written.push(p);
        let p = dir.join(format!("permutations_{name}.csv"));
        write_table(&p, &permutation_table(&params)?)?;
        written.push(p);
        let p = dir.join(format!("signs_{name}.csv"));
        write_table(&p, &sign_table(&params)?)?;
        written.push(p);
    }
    let p = dir.join("crc.csv");
    write_rows(&p, &crc_vectors())?;
    written.push(p);
    Ok(written)
}

fn codewords_match(a: &str, b: &str) -> bool {
    let parse = |s: &str| -> Option<Vec<f64>> { s.split(' ').map(|t| t.parse().ok()).collect() };
    match (parse(a), parse(b)) {
        (Some(x), Some(y)) => {
            x.len() == y.len()
                && x.iter()
                    .zip(&y)
                    .all(|(p, q)| (p - q).abs() <= CODEWORD_TOLERANCE)
        }
        _ => false,
    }
}

/// Recomputes every vector and compares with the files in `dir`. Returns one
/// message per mismatch; an empty list means conformance.
pub fn check(dir: &Path) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    for (name, params) in standard_sets() {
        let stored: Vec<EncoderVector> = read_rows(&dir.join(format!("encoder_{name}.csv")), true)?;
        let fresh = encoder_vectors(&params)?;
        if stored.len() != fresh.len() {
            problems.push(format!(
                "{name}: {} vectors, expected {}",
                stored.len(),
                fresh.len()
            ));
        }
        // decode stored bits independently of the stored codeword
        let code: Code<f64> = Code::new(params.clone().validate()?)?;
        for (i, (s, f)) in stored.iter().zip(&fresh).enumerate() {
            let same = s.bits == f.bits
                && s.block == f.block
                && s.supports == f.supports
                && s.levels == f.levels
                && codewords_match(&s.codeword, &f.codeword);
            let reencoded = parse(&s.bits)
                .and_then(|b| code.encode(&b).ok())
                .map(|(_, cw)| {
                    codewords_match(
                        &s.codeword,
                        &cw.samples
                            .iter()
                            .map(|v| format!("{v:e}"))
                            .collect::<Vec<_>>()
                            .join(" "),
                    )
                })
                .unwrap_or(false);
            if !same || !reencoded {
                problems.push(format!("{name}: vector {i} differs"));
            }
        }
        let stored: Vec<Vec<usize>> = read_table(&dir.join(format!("permutations_{name}.csv")))?;
        if stored != permutation_table(&params)? {
            problems.push(format!("{name}: permutation table differs"));
        }
        let stored: Vec<Vec<i64>> = read_table(&dir.join(format!("signs_{name}.csv")))?;
        if stored != sign_table(&params)? {
            problems.push(format!("{name}: sign table differs"));
        }
    }
    let stored: Vec<CrcVector> = read_rows(&dir.join("crc.csv"), true)?;
    for (i, v) in stored.iter().enumerate() {
        let cfg = CrcConfig::with_width(v.width, v.polynomial);
        let ok = parse(&v.data)
            .map(|d| to_string(&crc_append(&cfg, &d)[d.len()..]) == v.crc)
            .unwrap_or(false);
        if !ok {
            problems.push(format!("crc vector {i} differs"));
        }
    }
    if stored != crc_vectors() {
        problems.push("crc vector set differs".into());
    }
    Ok(problems)
}
