//! Slow but obviously correct reference computations.

mod common;

use asymcap::dmc::{capacity, mutual_information, DEFAULT_CAPACITY_TOL};
use asymcap::harness::{ExperimentReport, REPORT_SCHEMA_VERSION};
use asymcap::info::h2;
use asymcap::polar::{polar_transform, sc_bit_distribution, PolarContext, Selection, CONTEXT_SCHEMA_VERSION};
use asymcap::seed;
use asymcap::sparse::{self, SparseGraph};
use asymcap::{Dmc, Error, InputDist};
use common::{bits, random_binary_dmc};
use rand::Rng;

/// Dense row-echelon solve of `H x = s` over GF(2); free variables set to 0.
fn gf2_solve(rows: &[Vec<u8>], s: &[u8]) -> Option<Vec<u8>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<u8>> = rows.iter().zip(s).map(|(r, &b)| r.iter().copied().chain([b]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).find(|&r| m[r][col] == 1) else { continue };
        m.swap(row, p);
        for r in 0..m.len() {
            if r != row && m[r][col] == 1 {
                let pivot = m[row].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[n] == 1) {
        return None;
    }
    let mut x = vec![0u8; n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][n];
    }
    Some(x)
}

fn dense(g: &SparseGraph) -> Vec<Vec<u8>> {
    (0..g.checks())
        .map(|c| {
            let mut r = vec![0u8; g.n()];
            for &v in g.check_vars(c) {
                r[v] ^= 1;
            }
            r
        })
        .collect()
}

#[test]
fn sparse_syndrome_matches_dense_product() {
    let mut rng = seed::stream(1, "oracle", 0);
    for i in 0..20 {
        let g = sparse::build_regular_graph(48, 3, 6, i).unwrap();
        let h = dense(&g);
        let x = bits(&mut rng, 48, 0.3);
        let expected: Vec<u8> = h.iter().map(|r| r.iter().zip(&x).fold(0, |acc, (a, b)| acc ^ (a & b))).collect();
        assert_eq!(sparse::syndrome(&g, &x).unwrap(), expected);
    }
}

#[test]
fn gaussian_solutions_have_the_requested_syndrome() {
    let mut rng = seed::stream(2, "oracle", 0);
    for i in 0..20 {
        let g = sparse::build_regular_graph(60, 3, 6, 100 + i).unwrap();
        // A syndrome of a real word is always feasible.
        let s = sparse::syndrome(&g, &bits(&mut rng, 60, 0.5)).unwrap();
        let x = gf2_solve(&dense(&g), &s).expect("feasible");
        assert_eq!(sparse::syndrome(&g, &x).unwrap(), s);
    }
}

#[test]
fn decimation_reports_dense_violations() {
    // At alpha = 1/2 the prior is flat, so every system is feasible by
    // elimination but decimation gets no guidance; its own count of violated
    // checks must still agree with the dense product.
    let mut rng = seed::stream(3, "oracle", 0);
    for (i, alpha) in [0.5, 0.5, 0.2, 0.11].into_iter().enumerate() {
        let g = sparse::build_regular_graph(120, 3, 6, 200 + i as u64).unwrap();
        let h = dense(&g);
        let s = sparse::syndrome(&g, &bits(&mut rng, 120, 0.5)).unwrap();
        assert!(gf2_solve(&h, &s).is_some());
        let out = sparse::bp_decimate_encode(&g, &s, alpha, Default::default(), &mut rng).unwrap();
        let violated = h
            .iter()
            .zip(&s)
            .filter(|(r, &b)| r.iter().zip(&out.x).fold(0, |acc, (a, x)| acc ^ (a & x)) != b)
            .count();
        assert_eq!(out.unfulfilled, violated);
    }
}

/// `P(u_i = 0 | u^{i−1}, y)` by summing over every `u`.
fn brute_force_bit(alpha: f64, lik: &[[f64; 2]], prefix: &[u8]) -> f64 {
    let n = lik.len();
    let i = prefix.len();
    let mut mass = [0.0; 2];
    for word in 0..(1usize << n) {
        let u: Vec<u8> = (0..n).map(|j| ((word >> j) & 1) as u8).collect();
        if u[..i] != *prefix {
            continue;
        }
        let x = polar_transform(&u).unwrap();
        let p: f64 =
            x.iter().zip(lik).map(|(&b, l)| if b == 0 { (1.0 - alpha) * l[0] } else { alpha * l[1] }).product();
        mass[u[i] as usize] += p;
    }
    mass[0] / (mass[0] + mass[1])
}

#[test]
fn successive_cancellation_matches_enumeration() {
    let mut rng = seed::stream(4, "oracle", 0);
    for _ in 0..30 {
        let n = [2, 4, 8][rng.random_range(0..3)];
        let alpha = rng.random_range(0.05..0.95);
        let lik: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)]).collect();
        let u = bits(&mut rng, n, 0.5);
        for i in 0..n {
            let sc = sc_bit_distribution(alpha, n, Some(&lik), &u[..i]).unwrap().prob_zero;
            let exact = brute_force_bit(alpha, &lik, &u[..i]);
            assert!((sc - exact).abs() < 1e-9, "n={n} i={i}: {sc} vs {exact}");
        }
        let ones = vec![[1.0, 1.0]; n];
        let sc = sc_bit_distribution(alpha, n, None, &u[..n - 1]).unwrap().prob_zero;
        assert!((sc - brute_force_bit(alpha, &ones, &u[..n - 1])).abs() < 1e-9);
    }
}

#[test]
fn closed_form_capacities() {
    // Z-channel: C = log2(1 + (1 − q) q^{q/(1−q)}).
    for q in [0.1f64, 0.3, 0.5] {
        let expected = (1.0 + (1.0 - q) * q.powf(q / (1.0 - q))).log2();
        let r = capacity(&Dmc::zchannel(q).unwrap(), 1e-12).unwrap();
        assert!((r.capacity - expected).abs() < 1e-9, "q={q}");
    }
    for eps in [0.0, 0.25, 0.7] {
        let r = capacity(&Dmc::bec(eps).unwrap(), 1e-12).unwrap();
        assert!((r.capacity - (1.0 - eps)).abs() < 1e-9);
    }
    let r = capacity(&Dmc::bsc(0.11).unwrap(), 1e-12).unwrap();
    assert!((r.capacity - (1.0 - h2(0.11))).abs() < 1e-12);
}

#[test]
fn binary_capacity_matches_grid_search() {
    let mut rng = seed::stream(5, "oracle", 0);
    for _ in 0..50 {
        let ch = random_binary_dmc(&mut rng);
        let r = capacity(&ch, DEFAULT_CAPACITY_TOL).unwrap();
        let grid = (1..20_000)
            .map(|k| mutual_information(&ch, &InputDist::bernoulli(k as f64 / 20_000.0).unwrap()).unwrap())
            .fold(0.0, f64::max);
        assert!(r.capacity >= grid - 1e-9);
        assert!(r.capacity - grid < 1e-6);
    }
}

#[test]
fn noiseless_polar_round_trips() {
    let ch = Dmc::identity(2).unwrap();
    let ctx = PolarContext::build(&ch, 0.2, 256, 2_000, 6, Selection::RateTargeted { info_rate: 0.6, lossless_delta: 1e-3 })
        .unwrap();
    let mut rng = seed::stream(6, "oracle", 0);
    for t in 0..20 {
        let msg = bits(&mut rng, ctx.info_set.len(), 0.5);
        let x = ctx.encode(&msg, t).unwrap();
        let y: Vec<usize> = x.iter().map(|&b| b as usize).collect();
        assert_eq!(ctx.decode(&y, t).unwrap().0, msg);
    }
}

#[test]
fn source_map_round_trips_typical_words() {
    let ch = Dmc::identity(2).unwrap();
    let ctx = PolarContext::build(&ch, 0.11, 1024, 10_000, 7, Selection::Threshold { delta: 1e-3 }).unwrap();
    let mut rng = seed::stream(7, "oracle", 0);
    let mut failures = 0;
    for _ in 0..50 {
        let x = bits(&mut rng, 1024, 0.11);
        let c = ctx.source_compress(&x).unwrap();
        assert_eq!(c.len(), ctx.compressed_len());
        failures += usize::from(ctx.source_decompress(&c).unwrap() != x);
    }
    assert!(failures <= 5, "{failures}/50 words not recovered");
}

#[test]
fn stored_artifacts_check_their_schema() {
    let ch = Dmc::bsc(0.1).unwrap();
    let ctx = PolarContext::build(&ch, 0.5, 16, 200, 8, Selection::Threshold { delta: 0.1 }).unwrap();
    let text = ctx.to_json().unwrap();
    assert_eq!(PolarContext::from_json(&text).unwrap(), ctx);
    let bumped = text.replacen(
        &format!("\"schema_version\": {CONTEXT_SCHEMA_VERSION}"),
        &format!("\"schema_version\": {}", CONTEXT_SCHEMA_VERSION + 1),
        1,
    );
    assert!(matches!(PolarContext::from_json(&bumped), Err(Error::SchemaVersion { .. })));

    let g = sparse::build_regular_graph(12, 3, 6, 9).unwrap();
    assert_eq!(SparseGraph::from_json(&g.to_json().unwrap()).unwrap(), g);

    let report = r#"{"schema_version": 99, "approach": "gallager", "rate": 0.1, "capacity": 0.2,
        "symmetric_capacity": 0.2, "gap_to_capacity": 0.1, "trials": 1, "block_errors": 0,
        "empirical_bler": 0.0, "bler_interval": {"lower": 0.0, "upper": 0.9},
        "per_error_type_counts": {}, "spec": {"channel": "bsc(0.1)", "blocklen": 16, "trials": 1,
        "seed": 1, "approach": "gallager", "delta": 0.05, "backoff": 0.5}, "runtime_s": 0.0}"#;
    match ExperimentReport::from_json(report) {
        Err(Error::SchemaVersion { found, expected }) => assert_eq!((found, expected), (99, REPORT_SCHEMA_VERSION)),
        other => panic!("expected a schema error, got {other:?}"),
    }
}
