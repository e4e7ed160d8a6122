//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Criterion numbers given on the command line restrict the run,
//! e.g. `cargo test --test acceptance -- 1 4 9`.
//!
//! The CA-BOSS curve of criterion 8 is pinned in `tests/data/ca_boss_curve.csv`;
//! set `BOSS_PIN_CURVES=1` to rewrite it.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::time::Instant;

use boss::analysis::quadrature::{integrate, QuadOptions};
use boss::analysis::special::q_function;
use boss::analysis::{overlap_pdf, p_bler, p_stage1, p_stage2_given};
use boss::bits::random_bits;
use boss::sim::write_csv;
use boss::{
    add_awgn, crc_append, os_recover, recover_layers, BlerPoint, CampaignConfig, Code64,
    CodeParams, CrcConfig, DecoderChoice, Layer, ListConfig, Simulator, Stage1, ValidatedParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criterion 3 tolerance on orthogonality and norm preservation.
const STRUCTURE_TOL: f64 = 1e-12;
/// Criterion 5 ceiling on the multi-layer disagreement rate.
const MULTI_LAYER_MISMATCH_MAX: f64 = 0.01;
/// Criterion 6: points with a simulated BLER below this are not compared.
const BLER_FLOOR: f64 = 1e-5;
/// Criterion 6: relative error allowed against the high-precision reference.
const REFERENCE_REL_TOL: f64 = 1e-10;
/// Criterion 7 tolerances.
const NORMALIZATION_TOL: f64 = 1e-10;
const UNIFORM_TOL: f64 = 1e-12;
const TWO_COLUMN_TOL: f64 = 1e-10;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn code(p: CodeParams) -> Code64 {
    Code64::new(p.validate().expect("valid parameters")).expect("dictionary")
}

fn draw_bits(code: &Code64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let payload = random_bits(rng, code.params().payload_bits());
    match code.params().crc() {
        Some(c) => crc_append(c, &payload),
        None => payload,
    }
}

// 1 ---------------------------------------------------------------------------

fn bit_budgets() -> Verdict {
    let a = CodeParams::antipodal_two_layer(64, 8, 1, 1)
        .validate()
        .unwrap();
    let b = CodeParams::antipodal_two_layer(128, 16, 1, 1)
        .validate()
        .unwrap();
    let got = (
        a.bit_budget().total,
        a.bit_budget().rate(),
        a.average_power(),
        b.bit_budget().total,
        b.bit_budget().rate(),
    );
    let pass = got.0 == 14
        && got.1 == 0.21875
        && got.2 == 1.0 / 32.0
        && got.3 == 17
        && got.4 == 17.0 / 128.0;
    verdict(
        pass,
        format!(
            "M=64,G=8: {} bits, R={}, E_s={}; M=128,G=16: {} bits, R={}",
            got.0, got.1, got.2, got.3, got.4
        ),
    )
}

// 2, 3 ------------------------------------------------------------------------

fn roundtrip_sets() -> Vec<(&'static str, CodeParams)> {
    vec![
        ("M16 G1 L1", CodeParams::single_layer_unit(16, 1)),
        ("M16 G2 L2 ±1", CodeParams::antipodal_two_layer(16, 2, 1, 1)),
        ("M64 G16 L1", CodeParams::single_layer_unit(64, 16)),
        (
            "M64 G2 L2 multilevel",
            CodeParams::new(
                64,
                2,
                vec![Layer::new(2, [1.0, 2.0]), Layer::new(1, [-1.0])],
            ),
        ),
        (
            "M128 G16 L2 ±1",
            CodeParams::antipodal_two_layer(128, 16, 1, 1),
        ),
        (
            "M256 G16 L2 ±1 K=2",
            CodeParams::antipodal_two_layer(256, 16, 2, 2),
        ),
        (
            "M256 G1 L1 K=3 4-level",
            CodeParams::new(256, 1, vec![Layer::new(3, [1.0, -1.0, 2.0, -2.0])]),
        ),
    ]
}

fn roundtrip() -> Verdict {
    const MESSAGES: usize = 100_000;
    let mut errors = Vec::new();
    for (i, (name, p)) in roundtrip_sets().into_iter().enumerate() {
        let code = code(p);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let mut wrong = 0usize;
        for _ in 0..MESSAGES {
            let bits = draw_bits(&code, &mut rng);
            let (_, cw) = code.encode(&bits).unwrap();
            let out = code.decode(&cw.samples, 0.0, Stage1::Map).unwrap();
            if out.failure || out.bits.as_deref() != Some(&bits[..]) {
                wrong += 1;
            }
        }
        errors.push(format!("{name}: {wrong}"));
    }
    let pass = errors.iter().all(|e| e.ends_with(": 0"));
    verdict(
        pass,
        format!(
            "{MESSAGES} messages per set, errors [{}]",
            errors.join(", ")
        ),
    )
}

fn structure() -> Verdict {
    const MESSAGES: usize = 10_000;
    let (mut worst_dot, mut worst_rip) = (0.0f64, 0.0f64);
    let codes: Vec<Code64> = roundtrip_sets().into_iter().map(|(_, p)| code(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    for k in 0..MESSAGES {
        let code = &codes[k % codes.len()];
        let (msg, cw) = code.encode(&draw_bits(code, &mut rng)).unwrap();
        let subs: Vec<Vec<f64>> = msg
            .layers
            .iter()
            .zip(code.params().layers())
            .map(|(lm, layer)| {
                let entries: Vec<(usize, f64)> = lm
                    .support
                    .iter()
                    .zip(&lm.levels)
                    .map(|(&i, &j)| (i, layer.alphabet[j]))
                    .collect();
                code.dictionary()
                    .synthesize_sparse(msg.block, &entries)
                    .unwrap()
            })
            .collect();
        for a in 0..subs.len() {
            for b in a + 1..subs.len() {
                let dot: f64 = subs[a].iter().zip(&subs[b]).map(|(x, y)| x * y).sum();
                worst_dot = worst_dot.max(dot.abs());
            }
        }
        let x_norm = msg.energy(code.params()).sqrt();
        worst_rip = worst_rip.max((cw.energy().sqrt() - x_norm).abs());
    }
    verdict(
        worst_dot <= STRUCTURE_TOL && worst_rip <= STRUCTURE_TOL,
        format!("{MESSAGES} messages, max |<c_j,c_k>| = {worst_dot:.2e}, max | ||Ax|| - ||x|| | = {worst_rip:.2e}"),
    )
}

// 4 ---------------------------------------------------------------------------

fn os_equals_map() -> Verdict {
    const RECEPTIONS: usize = 10_000;
    let code = code(CodeParams::antipodal_two_layer(128, 16, 1, 1));
    let params = code.params();
    let mut report = Vec::new();
    let mut total_mismatch = 0usize;
    for db in [0.0, 3.0, 6.0] {
        let var = params.noise_variance(db);
        let mut rng = ChaCha8Rng::seed_from_u64(400 + db as u64);
        let mut mismatch = 0usize;
        for _ in 0..RECEPTIONS {
            let (_, cw) = code.encode(&draw_bits(&code, &mut rng)).unwrap();
            let y = add_awgn(&cw, var, &mut rng);
            for g in 0..params.blocks() {
                let y_g = code.dictionary().analyze(g, &y).unwrap();
                let os = os_recover(&y_g, params).unwrap();
                let map = recover_layers(&y_g, params, var);
                let same = os.iter().zip(&map).all(|(a, b)| a.support == b.support);
                if !same {
                    mismatch += 1;
                }
            }
        }
        total_mismatch += mismatch;
        report.push(format!("{db} dB: {mismatch}"));
    }
    verdict(
        total_mismatch == 0,
        format!(
            "{RECEPTIONS} receptions x 16 hypotheses per point, support mismatches [{}]",
            report.join(", ")
        ),
    )
}

// 5 ---------------------------------------------------------------------------

fn ln_gauss(x: f64, var: f64) -> f64 {
    -x * x / (2.0 * var)
}

/// Per-index log-likelihood ratio of "in the layer" vs "zero", levels averaged
/// with equal weight. Normalizing constants cancel.
fn ln_ratio(y: f64, var: f64, alphabet: &[f64]) -> f64 {
    let terms: Vec<f64> = alphabet.iter().map(|&a| ln_gauss(y - a, var)).collect();
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let avg =
        peak + (terms.iter().map(|t| (t - peak).exp()).sum::<f64>() / alphabet.len() as f64).ln();
    avg - ln_gauss(y, var)
}

fn combinations(n: usize, k: usize, excluded: &[bool]) -> Vec<Vec<usize>> {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        ex: &[bool],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if !ex[i] {
                cur.push(i);
                rec(i + 1, n, k, ex, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, excluded, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive joint MAP over disjoint layer supports with a uniform prior.
fn joint_map(y_g: &[f64], var: f64, layers: &[Layer]) -> Vec<Vec<usize>> {
    #[allow(clippy::too_many_arguments)]
    fn search(
        l: usize,
        y: &[f64],
        ratios: &[Vec<f64>],
        layers: &[Layer],
        used: &mut Vec<bool>,
        cur: &mut Vec<Vec<usize>>,
        score: f64,
        best: &mut (f64, Vec<Vec<usize>>),
    ) {
        if l == layers.len() {
            if score > best.0 {
                *best = (score, cur.clone());
            }
            return;
        }
        for s in combinations(y.len(), layers[l].sparsity, used) {
            let add: f64 = s.iter().map(|&i| ratios[l][i]).sum();
            for &i in &s {
                used[i] = true;
            }
            cur.push(s.clone());
            search(l + 1, y, ratios, layers, used, cur, score + add, best);
            cur.pop();
            for &i in &s {
                used[i] = false;
            }
        }
    }
    let ratios: Vec<Vec<f64>> = layers
        .iter()
        .map(|layer| {
            y_g.iter()
                .map(|&v| ln_ratio(v, var, &layer.alphabet))
                .collect()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    search(
        0,
        y_g,
        &ratios,
        layers,
        &mut vec![false; y_g.len()],
        &mut Vec::new(),
        0.0,
        &mut best,
    );
    best.1
}

fn oracle_equivalence() -> Verdict {
    const TRIALS_PER_POINT: usize = 1_000;
    let sets: Vec<(&str, CodeParams)> = vec![
        ("M16 G2 L1 K1", CodeParams::single_layer_unit(16, 2)),
        (
            "M16 G2 L1 K2 ±1",
            CodeParams::new(16, 2, vec![Layer::new(2, [1.0, -1.0])]),
        ),
        (
            "M8 G1 L1 K3 4-level",
            CodeParams::new(8, 1, vec![Layer::new(3, [1.0, -1.0, 2.0, -2.0])]),
        ),
        ("M16 G2 L2 ±1", CodeParams::antipodal_two_layer(16, 2, 1, 1)),
        (
            "M16 G1 L2 multilevel",
            CodeParams::new(
                16,
                1,
                vec![Layer::new(2, [1.0, 2.0]), Layer::new(1, [-1.0])],
            ),
        ),
        (
            "M16 G2 L2 K=2,1",
            CodeParams::antipodal_two_layer(16, 2, 2, 1),
        ),
    ];
    let mut pass = true;
    let mut report = Vec::new();
    for (s, (name, p)) in sets.into_iter().enumerate() {
        let code = code(p);
        let params: &ValidatedParams = code.params();
        let (mut compared, mut mismatch) = (0usize, 0usize);
        for db in [0.0, 3.0] {
            let var = params.noise_variance(db);
            let mut rng = ChaCha8Rng::seed_from_u64(500 + 10 * s as u64 + db as u64);
            for _ in 0..TRIALS_PER_POINT {
                let (_, cw) = code.encode(&draw_bits(&code, &mut rng)).unwrap();
                let y = add_awgn(&cw, var, &mut rng);
                for g in 0..params.blocks() {
                    let y_g = code.dictionary().analyze(g, &y).unwrap();
                    let greedy: Vec<Vec<usize>> = recover_layers(&y_g, params, var)
                        .into_iter()
                        .map(|l| l.support)
                        .collect();
                    compared += 1;
                    if greedy != joint_map(&y_g, var, params.layers()) {
                        mismatch += 1;
                    }
                }
            }
        }
        let rate = mismatch as f64 / compared as f64;
        let ok = if params.layers().len() == 1 {
            mismatch == 0
        } else {
            rate < MULTI_LAYER_MISMATCH_MAX
        };
        pass &= ok;
        report.push(format!("{name}: {mismatch}/{compared}"));
    }
    verdict(pass, format!("disagreements [{}]", report.join(", ")))
}

// 6 ---------------------------------------------------------------------------

fn reference_rows() -> Vec<(usize, usize, f64, f64)> {
    let mut r =
        csv::Reader::from_path(data_dir().join("bler_reference.csv")).expect("reference file");
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (
                rec[0].parse().unwrap(),
                rec[1].parse().unwrap(),
                rec[2].parse().unwrap(),
                rec[5].parse().unwrap(),
            )
        })
        .collect()
}

fn analysis_vs_simulation() -> Verdict {
    const GRID: [f64; 5] = [0.0, 1.0, 2.0, 3.0, 4.0];
    const MIN_ERRORS: u64 = 200;
    const MAX_TRIALS: u64 = 1_000_000;
    let mut outside = Vec::new();
    let mut compared = 0usize;
    for g in [2usize, 16, 64] {
        let params = CodeParams::single_layer_unit(256, g).validate().unwrap();
        let mut cfg = CampaignConfig::new(params, DecoderChoice::Os, GRID.to_vec());
        cfg.min_errors = MIN_ERRORS;
        cfg.max_trials = MAX_TRIALS;
        cfg.seed = 6;
        let sim = Simulator::new(cfg).unwrap();
        for db in GRID {
            let p = sim.run_point(db).unwrap();
            let a = p_bler(256, g, db).unwrap().p_bler;
            println!(
                "    G={g:<2} {db} dB  analysis {a:.4e}  sim {:.4e} [{:.4e}, {:.4e}]  ({} errors / {} trials)",
                p.bler, p.ci_low, p.ci_high, p.block_errors, p.trials
            );
            if p.bler >= BLER_FLOOR {
                compared += 1;
                if a < p.ci_low || a > p.ci_high {
                    outside.push(format!("G={g}@{db}dB"));
                }
            }
        }
    }
    let mut worst_rel = 0.0f64;
    for (m, g, db, want) in reference_rows() {
        let got = p_bler(m, g, db).unwrap().p_bler;
        worst_rel = worst_rel.max((got - want).abs() / want);
    }
    let precise = worst_rel <= REFERENCE_REL_TOL;
    verdict(
        outside.is_empty() && compared > 0 && precise,
        format!(
            "{}/{compared} points outside the 95% CI [{}]; max rel. error vs 40-digit reference {worst_rel:.1e}",
            outside.len(),
            outside.join(", ")
        ),
    )
}

// 7 ---------------------------------------------------------------------------

fn analytical_self_tests() -> Verdict {
    let mut worst_norm = 0.0f64;
    for k in 1..=9 {
        let m = 1usize << k;
        let r = integrate(
            |t: f64| overlap_pdf(t.sin(), m) * t.cos(),
            -FRAC_PI_2,
            FRAC_PI_2,
            &QuadOptions {
                initial_pieces: 64,
                ..QuadOptions::default()
            },
        )
        .unwrap();
        worst_norm = worst_norm.max((r.value - 1.0).abs());
    }
    let worst_uniform = (0..=20)
        .map(|i| (overlap_pdf(-1.0 + 0.1 * i as f64, 3) - 0.5).abs())
        .fold(0.0, f64::max);
    let single_block = p_stage2_given(256, 1, 0.05).unwrap();
    let worst_two = [0.02, 0.1, 0.5, 1.0, 4.0]
        .iter()
        .map(|&var: &f64| (p_stage1(2, var).unwrap() - q_function(1.0 / (2.0 * var).sqrt())).abs())
        .fold(0.0, f64::max);
    verdict(
        worst_norm <= NORMALIZATION_TOL
            && worst_uniform <= UNIFORM_TOL
            && single_block == 0.0
            && worst_two <= TWO_COLUMN_TOL,
        format!(
            "normalization {worst_norm:.1e} (M<=512), M=3 uniform {worst_uniform:.1e}, G=1 stage 2 = {single_block}, M=2 closed form {worst_two:.1e}"
        ),
    )
}

// 8 ---------------------------------------------------------------------------

fn curve_csv(map: &[BlerPoint], list: &[BlerPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "decoder",
        "eb_n0_db",
        "trials",
        "block_errors",
        "undetected_errors",
        "seed",
    ])
    .unwrap();
    for (name, pts) in [("map", map), ("list", list)] {
        for p in pts {
            w.write_record([
                name.to_string(),
                p.eb_n0_db.to_string(),
                p.trials.to_string(),
                p.block_errors.to_string(),
                p.undetected_errors.to_string(),
                p.seed.to_string(),
            ])
            .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn ca_boss_gain() -> Verdict {
    const GRID: [f64; 5] = [0.0, 1.0, 2.0, 3.0, 4.0];
    const TRIALS: u64 = 100_000;
    let params = CodeParams::antipodal_two_layer(128, 16, 1, 1)
        .with_crc(CrcConfig::default())
        .validate()
        .unwrap();
    let run = |decoder: DecoderChoice| {
        let mut cfg = CampaignConfig::new(params.clone(), decoder, GRID.to_vec());
        cfg.list = Some(ListConfig::new([2, 2]));
        cfg.min_errors = 0;
        cfg.max_trials = TRIALS;
        cfg.seed = 8;
        Simulator::new(cfg).unwrap().run_campaign(|_| {}).unwrap()
    };
    let map = run(DecoderChoice::Map);
    let list = run(DecoderChoice::List);
    let mut violations = Vec::new();
    for (m, l) in map.iter().zip(&list) {
        println!(
            "    {} dB  map {:.4e} [{:.4e}, {:.4e}]  list {:.4e} [{:.4e}, {:.4e}]",
            m.eb_n0_db, m.bler, m.ci_low, m.ci_high, l.bler, l.ci_low, l.ci_high
        );
        if l.bler > m.ci_high {
            violations.push(format!("{} dB", m.eb_n0_db));
        }
    }
    let csv = curve_csv(&map, &list);
    let pin = data_dir().join("ca_boss_curve.csv");
    let pinned = if std::env::var_os("BOSS_PIN_CURVES").is_some() {
        std::fs::write(&pin, &csv).unwrap();
        "rewritten"
    } else {
        match std::fs::read_to_string(&pin) {
            Ok(stored) if stored == csv => "matches",
            Ok(_) => "differs",
            Err(_) => "missing",
        }
    };
    verdict(
        violations.is_empty() && pinned != "differs" && pinned != "missing",
        format!(
            "{TRIALS} trials per point, list above map CI at [{}]; pinned curve {pinned}",
            violations.join(", ")
        ),
    )
}

// 9 ---------------------------------------------------------------------------

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, CodeParams, DecoderChoice)> = vec![
        (
            "map",
            CodeParams::antipodal_two_layer(64, 8, 1, 1),
            DecoderChoice::Map,
        ),
        (
            "os",
            CodeParams::single_layer_unit(256, 16),
            DecoderChoice::Os,
        ),
        (
            "list",
            CodeParams::antipodal_two_layer(128, 16, 1, 1).with_crc(CrcConfig::default()),
            DecoderChoice::List,
        ),
    ];
    let mut differing = Vec::new();
    for (name, p, decoder) in cases {
        let files: Vec<Vec<u8>> = [1usize, 4]
            .iter()
            .map(|&workers| {
                let mut cfg = CampaignConfig::new(
                    p.clone().validate().unwrap(),
                    decoder,
                    vec![0.0, 2.0, 4.0],
                );
                cfg.list = Some(ListConfig::new(vec![2; p.layers.len()]));
                cfg.min_errors = 50;
                cfg.max_trials = 20_000;
                cfg.seed = 9;
                cfg.workers = workers;
                cfg.batch = 64;
                let path = dir.path().join(format!("{name}_{workers}.csv"));
                cfg.out = Some(path.clone());
                let points = Simulator::new(cfg).unwrap().run_campaign(|_| {}).unwrap();
                let mut again = Vec::new();
                write_csv(&mut again, &points).unwrap();
                let on_disk = std::fs::read(&path).unwrap();
                assert_eq!(on_disk, again, "streamed and batch CSV differ");
                on_disk
            })
            .collect();
        if files[0] != files[1] {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "1 vs 4 workers, map/os/list campaigns; differing [{}]",
            differing.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("bit-budget conformance", bit_budgets),
        ("noiseless roundtrip", roundtrip),
        ("structural invariants", structure),
        ("OS equals MAP stage 1", os_equals_map),
        ("exhaustive joint-MAP oracle", oracle_equivalence),
        ("analysis vs simulation", analysis_vs_simulation),
        ("analytical self-tests", analytical_self_tests),
        ("CA-BOSS gain", ca_boss_gain),
        ("determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate().map(|(i, c)| (i + 1, c)) {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} {name}: {status} ({}; {:.1} s)",
            v.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
