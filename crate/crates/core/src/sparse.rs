//! Sparse parity-check codes: syndrome-constrained belief propagation,
//! the source/channel duality between syndrome decoding tasks, and
//! BP-guided decimation for producing biased words with prescribed
//! parity checks.
//!
//! LLRs are `ln P(bit = 0) / P(bit = 1)`. A check with syndrome bit 1
//! flips the sign of every message it emits.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dmc::Dmc;
use crate::error::{Error, Result};
use crate::seed;

pub const GRAPH_SCHEMA_VERSION: u32 = 1;
/// Magnitude cap on finite messages.
pub const LLR_SATURATION: f64 = 30.0;
const MAX_SWAP_ATTEMPTS: usize = 1_000_000;

pub type Syndrome = Vec<u8>;

/// Bipartite graph stored twice in compressed form: edges are numbered
/// check by check, and every variable keeps the ids of its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseGraph {
    n: usize,
    var_degree: usize,
    seed: u64,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    schema_version: u32,
    n: usize,
    var_degree: usize,
    seed: u64,
    check_neighbors: Vec<Vec<usize>>,
}

impl SparseGraph {
    /// Build from the variable list of every check.
    pub fn from_checks(n: usize, check_neighbors: &[Vec<usize>], seed: u64) -> Result<Self> {
        let mut check_start = Vec::with_capacity(check_neighbors.len() + 1);
        let mut edge_var = Vec::new();
        check_start.push(0);
        for (c, vars) in check_neighbors.iter().enumerate() {
            let mut sorted = vars.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::arg(format!("check {c} has a parallel edge")));
            }
            if let Some(&v) = sorted.last().filter(|&&v| v >= n) {
                return Err(Error::SymbolOutOfRange { symbol: v, size: n });
            }
            edge_var.extend_from_slice(vars);
            check_start.push(edge_var.len());
        }
        let mut degree = vec![0usize; n];
        edge_var.iter().for_each(|&v| degree[v] += 1);
        let mut var_start = vec![0usize; n + 1];
        for v in 0..n {
            var_start[v + 1] = var_start[v] + degree[v];
        }
        let mut fill = var_start[..n].to_vec();
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        let var_degree = degree.iter().copied().max().unwrap_or(0);
        Ok(SparseGraph { n, var_degree, seed, check_start, edge_var, var_start, var_edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn var_degree(&self) -> usize {
        self.var_degree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn check_vars(&self, c: usize) -> &[usize] {
        &self.edge_var[self.check_start[c]..self.check_start[c + 1]]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_start[c + 1] - self.check_start[c]
    }

    pub fn var_degree_of(&self, v: usize) -> usize {
        self.var_start[v + 1] - self.var_start[v]
    }

    /// Checks touching variable `v`.
    pub fn var_checks(&self, v: usize) -> Vec<usize> {
        self.var_edges[self.var_start[v]..self.var_start[v + 1]]
            .iter()
            .map(|&e| self.check_start.partition_point(|&s| s <= e) - 1)
            .collect()
    }

    pub fn check_neighbors(&self) -> Vec<Vec<usize>> {
        (0..self.checks()).map(|c| self.check_vars(c).to_vec()).collect()
    }

    /// `[self; other]`: the checks of `other` follow those of `self`.
    pub fn stack(&self, other: &SparseGraph) -> Result<SparseGraph> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut rows = self.check_neighbors();
        rows.extend(other.check_neighbors());
        SparseGraph::from_checks(self.n, &rows, self.seed ^ other.seed.rotate_left(1))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphJson {
            schema_version: GRAPH_SCHEMA_VERSION,
            n: self.n,
            var_degree: self.var_degree,
            seed: self.seed,
            check_neighbors: self.check_neighbors(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(s)?;
        if raw.schema_version != GRAPH_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: raw.schema_version, expected: GRAPH_SCHEMA_VERSION });
        }
        SparseGraph::from_checks(raw.n, &raw.check_neighbors, raw.seed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        SparseGraph::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Random graph with every variable of degree `l` and `checks` checks whose
/// degrees differ by at most one. When `checks` does not divide `n·l`, the
/// first `n·l mod checks` checks (the remainder group) get one extra edge.
pub fn build_left_regular(n: usize, l: usize, checks: usize, seed_value: u64) -> Result<SparseGraph> {
    if n == 0 || l == 0 || checks == 0 {
        return Err(Error::arg("n, l and the check count must be positive"));
    }
    if checks < l {
        return Err(Error::arg(format!("{checks} checks cannot give {l} distinct neighbours per variable")));
    }
    let total = n * l;
    let (base, extra) = (total / checks, total % checks);
    if base + usize::from(extra > 0) > n {
        return Err(Error::arg("check degree would exceed the number of variables"));
    }
    let mut bounds = Vec::with_capacity(checks + 1);
    bounds.push(0);
    for c in 0..checks {
        bounds.push(bounds[c] + base + usize::from(c < extra));
    }
    let mut rng = seed::stream(seed_value, "ldpc-graph", 0);
    let mut sockets: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, l)).collect();
    sockets.shuffle(&mut rng);
    let check_of = |slot: usize| bounds.partition_point(|&b| b <= slot) - 1;
    let contains = |sockets: &[usize], c: usize, v: usize| sockets[bounds[c]..bounds[c + 1]].contains(&v);

    let mut attempts = 0;
    for c in 0..checks {
        let mut i = bounds[c];
        while i < bounds[c + 1] {
            let v = sockets[i];
            let duplicated = sockets[bounds[c]..i].contains(&v);
            if !duplicated {
                i += 1;
                continue;
            }
            // Swap with a slot of another check that creates no new parallel edge.
            loop {
                attempts += 1;
                if attempts > MAX_SWAP_ATTEMPTS {
                    return Err(Error::arg("could not remove parallel edges"));
                }
                let j = rng.random_range(0..total);
                let cj = check_of(j);
                if cj == c || contains(&sockets, c, sockets[j]) || contains(&sockets, cj, v) {
                    continue;
                }
                sockets.swap(i, j);
                break;
            }
            i += 1;
        }
    }
    let rows: Vec<Vec<usize>> = (0..checks).map(|c| sockets[bounds[c]..bounds[c + 1]].to_vec()).collect();
    let mut g = SparseGraph::from_checks(n, &rows, seed_value)?;
    g.var_degree = l;
    Ok(g)
}

/// `(l, r)`-regular graph with `n·l/r` checks.
pub fn build_regular_graph(n: usize, l: usize, r: usize, seed_value: u64) -> Result<SparseGraph> {
    if r == 0 || !(n * l).is_multiple_of(r) {
        return Err(Error::arg(format!("n·l = {} is not divisible by r = {r}", n * l)));
    }
    build_left_regular(n, l, n * l / r, seed_value)
}

/// `P x` over GF(2).
pub fn syndrome(g: &SparseGraph, x: &[u8]) -> Result<Syndrome> {
    if x.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: x.len() });
    }
    Ok((0..g.checks()).map(|c| g.check_vars(c).iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1))).collect())
}

fn unfulfilled(g: &SparseGraph, x: &[u8], s: &[u8]) -> usize {
    (0..g.checks())
        .filter(|&c| g.check_vars(c).iter().fold(0u8, |acc, &v| acc ^ x[v]) != s[c])
        .count()
}

#[inline]
fn saturate(v: f64) -> f64 {
    v.clamp(-LLR_SATURATION, LLR_SATURATION)
}

/// `ln(ᾱ/α)`, the prior LLR of a Bernoulli(`alpha`) bit.
pub fn prior_llr(alpha: f64) -> f64 {
    saturate(((1.0 - alpha) / alpha).ln())
}

/// Per-position `ln W(y|0)/W(y|1) + ln(ᾱ/α)`.
pub fn posterior_llrs(ch: &Dmc, alpha: f64, y: &[usize]) -> Result<Vec<f64>> {
    if !ch.is_binary() {
        return Err(Error::NotBinary(ch.input_size()));
    }
    let prior = prior_llr(alpha);
    y.iter()
        .map(|&yi| {
            if yi >= ch.output_size() {
                return Err(Error::SymbolOutOfRange { symbol: yi, size: ch.output_size() });
            }
            let [w0, w1] = ch.likelihoods(yi);
            Ok(saturate((w0 / w1).ln() + prior))
        })
        .collect()
}

#[inline]
fn hard(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Message arrays after one flood iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct BpSnapshot {
    pub check_to_var: Vec<f64>,
    pub var_to_check: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpOutcome {
    pub x: Vec<u8>,
    pub iterations: usize,
    pub satisfied: bool,
    /// Total LLR per variable after the last iteration.
    pub llr: Vec<f64>,
    pub trace: Option<Vec<BpSnapshot>>,
}

/// Flood-schedule sum-product working state.
struct Bp<'g> {
    g: &'g SparseGraph,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g> Bp<'g> {
    fn new(g: &'g SparseGraph, llr: &[f64], fixed: &[Option<u8>]) -> Self {
        let mut v2c = vec![0.0; g.edges()];
        for v in 0..g.n {
            let value = fixed_llr(fixed, v).unwrap_or(llr[v]);
            for &e in &g.var_edges[g.var_start[v]..g.var_start[v + 1]] {
                v2c[e] = value;
            }
        }
        Bp { g, v2c, c2v: vec![0.0; g.edges()], scratch: Vec::new() }
    }

    fn check_update(&mut self, s: &[u8]) {
        let g = self.g;
        for c in 0..g.checks() {
            let (lo, hi) = (g.check_start[c], g.check_start[c + 1]);
            // tanh and atanh act on magnitudes so that flipping an input's sign
            // flips the output bit for bit; `f64::atanh` itself is not odd.
            let t: Vec<f64> = self.v2c[lo..hi].iter().map(|&m| (0.5 * m.abs()).tanh().copysign(m)).collect();
            // Leave-one-out products from prefix and suffix products.
            self.scratch.clear();
            self.scratch.resize(t.len(), 1.0);
            let mut acc = 1.0;
            for (k, &tk) in t.iter().enumerate() {
                self.scratch[k] = acc;
                acc *= tk;
            }
            acc = 1.0;
            let sign = if s[c] == 1 { -1.0 } else { 1.0 };
            for k in (0..t.len()).rev() {
                let prod = self.scratch[k] * acc;
                self.c2v[lo + k] = sign * saturate(2.0 * prod.abs().atanh()).copysign(prod);
                acc *= t[k];
            }
        }
    }

    fn variable_update(&mut self, llr: &[f64], fixed: &[Option<u8>]) -> Vec<f64> {
        let g = self.g;
        let mut totals = vec![0.0; g.n];
        for v in 0..g.n {
            let edges = &g.var_edges[g.var_start[v]..g.var_start[v + 1]];
            if let Some(inf) = fixed_llr(fixed, v) {
                edges.iter().for_each(|&e| self.v2c[e] = inf);
                totals[v] = inf;
                continue;
            }
            let total = llr[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            for &e in edges {
                self.v2c[e] = saturate(total - self.c2v[e]);
            }
            totals[v] = total;
        }
        totals
    }

    fn snapshot(&self) -> BpSnapshot {
        BpSnapshot { check_to_var: self.c2v.clone(), var_to_check: self.v2c.clone() }
    }
}

#[inline]
fn fixed_llr(fixed: &[Option<u8>], v: usize) -> Option<f64> {
    fixed.get(v).copied().flatten().map(|b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BpOptions {
    pub max_iterations: usize,
    /// Stop as soon as the hard decision satisfies every check.
    pub early_exit: bool,
    pub record_trace: bool,
}

impl BpOptions {
    pub fn new(max_iterations: usize) -> Self {
        BpOptions { max_iterations, early_exit: true, record_trace: false }
    }
}

/// Sum-product decoding of `x` from per-variable LLRs subject to `P x = s`.
pub fn bp_run(g: &SparseGraph, llr: &[f64], s: &[u8], opts: BpOptions) -> Result<BpOutcome> {
    if llr.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: llr.len() });
    }
    if s.len() != g.checks() {
        return Err(Error::DimensionMismatch { expected: g.checks(), got: s.len() });
    }
    let mut bp = Bp::new(g, llr, &[]);
    let mut trace = opts.record_trace.then(Vec::new);
    let mut totals = llr.to_vec();
    let mut x: Vec<u8> = totals.iter().map(|&t| hard(t)).collect();
    let mut satisfied = unfulfilled(g, &x, s) == 0;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        bp.check_update(s);
        totals = bp.variable_update(llr, &[]);
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(bp.snapshot());
        }
        x = totals.iter().map(|&t| hard(t)).collect();
        satisfied = unfulfilled(g, &x, s) == 0;
        if satisfied && opts.early_exit {
            break;
        }
    }
    Ok(BpOutcome { x, iterations, satisfied, llr: totals, trace })
}

/// Recover a biased word from its channel output and its syndrome.
pub fn bp_decode_biased(g: &SparseGraph, ch: &Dmc, alpha: f64, y: &[usize], s: &[u8], iters: usize) -> Result<BpOutcome> {
    let llr = posterior_llrs(ch, alpha, y)?;
    bp_run(g, &llr, s, BpOptions::new(iters))
}

/// Source decoding: recover a Bernoulli(`alpha`) word from its syndrome.
pub fn task_source_decode(g: &SparseGraph, s: &[u8], alpha: f64, opts: BpOptions) -> Result<BpOutcome> {
    bp_run(g, &vec![prior_llr(alpha); g.n], s, opts)
}

/// Error-pattern decoding on a BSC(`alpha`): recover `e` from `P y`.
pub fn task_error_decode(g: &SparseGraph, y: &[u8], alpha: f64, opts: BpOptions) -> Result<BpOutcome> {
    task_source_decode(g, &syndrome(g, y)?, alpha, opts)
}

/// Codeword decoding on a BSC(`alpha`): recover `c` from `y` with `P c = 0`.
pub fn task_codeword_decode(g: &SparseGraph, y: &[u8], alpha: f64, opts: BpOptions) -> Result<BpOutcome> {
    if y.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: y.len() });
    }
    let l = prior_llr(alpha);
    let llr: Vec<f64> = y.iter().map(|&b| if b == 0 { l } else { -l }).collect();
    bp_run(g, &llr, &vec![0; g.checks()], opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub consistent: bool,
    pub error_task_success: bool,
    pub codeword_task_success: bool,
    /// Positions skipped because the total LLR was exactly zero.
    pub ties: usize,
}

/// Run error-pattern and codeword decoding on `y = c ⊕ e` for a fixed number
/// of iterations and check `ĉ = y ⊕ ê` wherever the decision is not a tie,
/// and that the two tasks succeed together.
pub fn task_equivalence_check(g: &SparseGraph, c: &[u8], e: &[u8], alpha: f64, iters: usize) -> Result<EquivalenceReport> {
    if syndrome(g, c)?.iter().any(|&b| b != 0) {
        return Err(Error::arg("c is not a codeword"));
    }
    if e.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: e.len() });
    }
    let y: Vec<u8> = c.iter().zip(e).map(|(a, b)| a ^ b).collect();
    let opts = BpOptions { max_iterations: iters, early_exit: false, record_trace: false };
    let err = task_error_decode(g, &y, alpha, opts)?;
    let cw = task_codeword_decode(g, &y, alpha, opts)?;
    let mut ties = 0;
    let mut consistent = true;
    for v in 0..g.n {
        if err.llr[v] == 0.0 || cw.llr[v] == 0.0 {
            ties += 1;
            continue;
        }
        consistent &= cw.x[v] == y[v] ^ err.x[v];
    }
    let error_task_success = err.x == e;
    let codeword_task_success = cw.x == c;
    consistent &= ties > 0 || error_task_success == codeword_task_success;
    Ok(EquivalenceReport { consistent, error_task_success, codeword_task_success, ties })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecimationSchedule {
    /// BP iterations between decimation steps.
    pub iters_per_round: usize,
    /// Fraction of the still-free variables fixed per step (at least one).
    pub fraction: f64,
}

impl Default for DecimationSchedule {
    fn default() -> Self {
        DecimationSchedule { iters_per_round: 10, fraction: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecimationOutcome {
    pub x: Vec<u8>,
    pub unfulfilled: usize,
    pub rounds: usize,
}

/// Find a Bernoulli(`alpha`)-looking `x` with `P x = s` by BP-guided
/// decimation. Violated checks are counted, not repaired.
pub fn bp_decimate_encode<R: Rng + ?Sized>(
    g: &SparseGraph,
    s: &[u8],
    alpha: f64,
    schedule: DecimationSchedule,
    rng: &mut R,
) -> Result<DecimationOutcome> {
    if s.len() != g.checks() {
        return Err(Error::DimensionMismatch { expected: g.checks(), got: s.len() });
    }
    if !(schedule.fraction > 0.0 && schedule.fraction <= 1.0) || schedule.iters_per_round == 0 {
        return Err(Error::arg("decimation needs a fraction in (0, 1] and at least one iteration per round"));
    }
    let llr = vec![prior_llr(alpha); g.n];
    let mut fixed: Vec<Option<u8>> = vec![None; g.n];
    let mut free: Vec<usize> = (0..g.n).collect();
    let mut bp = Bp::new(g, &llr, &fixed);
    let mut rounds = 0;
    while !free.is_empty() {
        let mut totals = Vec::new();
        for _ in 0..schedule.iters_per_round {
            bp.check_update(s);
            totals = bp.variable_update(&llr, &fixed);
        }
        rounds += 1;
        let count = ((schedule.fraction * free.len() as f64).ceil() as usize).clamp(1, free.len());
        // Random order first so the stable sort breaks magnitude ties at random.
        free.shuffle(rng);
        free.sort_by(|&a, &b| totals[b].abs().total_cmp(&totals[a].abs()));
        for &v in &free[..count] {
            debug_assert!(fixed[v].is_none(), "a decimated variable is never revisited");
            let bit = if totals[v] == 0.0 { u8::from(rng.random::<bool>()) } else { hard(totals[v]) };
            fixed[v] = Some(bit);
        }
        free.drain(..count);
    }
    let x: Vec<u8> = fixed.into_iter().map(|b| b.expect("every variable decimated")).collect();
    let unfulfilled = unfulfilled(g, &x, s);
    Ok(DecimationOutcome { x, unfulfilled, rounds })
}

/// Integrated scheme: `P1` carries the message, `P2` carries shared random
/// checks that the receiver uses as its syndrome.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratedLdpc {
    pub p1: SparseGraph,
    pub p2: SparseGraph,
    pub stacked: SparseGraph,
    pub alpha: f64,
    pub channel: Dmc,
    pub schedule: DecimationSchedule,
    pub decode_iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratedConfig {
    pub n: usize,
    pub var_degree: usize,
    /// Message checks `⌊n (I(W) − info_margin)⌋`.
    pub info_margin: f64,
    /// Shared checks `⌈n (H(X|Y) + shared_margin)⌉`.
    pub shared_margin: f64,
    pub schedule: DecimationSchedule,
    pub decode_iterations: usize,
}

impl Default for IntegratedConfig {
    fn default() -> Self {
        IntegratedConfig {
            n: 4096,
            var_degree: 3,
            info_margin: 0.15,
            shared_margin: 0.1,
            schedule: DecimationSchedule::default(),
            decode_iterations: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratedDecode {
    pub message: Vec<u8>,
    pub x: Vec<u8>,
    pub satisfied: bool,
}

impl IntegratedLdpc {
    /// `mutual_info` and `cond_entropy` are `I(X;Y)` and `H(X|Y)` at the
    /// input law Bernoulli(`alpha`).
    pub fn build(ch: &Dmc, alpha: f64, mutual_info: f64, cond_entropy: f64, cfg: IntegratedConfig, seed_value: u64) -> Result<Self> {
        if !ch.is_binary() {
            return Err(Error::NotBinary(ch.input_size()));
        }
        let n = cfg.n as f64;
        let m1 = (n * (mutual_info - cfg.info_margin)).floor().max(0.0) as usize;
        let m2 = (n * (cond_entropy + cfg.shared_margin)).ceil() as usize;
        if m1 == 0 {
            return Err(Error::Config("information margin leaves no message checks".into()));
        }
        let p1 = build_left_regular(cfg.n, cfg.var_degree, m1, seed::derive(seed_value, "ldpc-p1", 0))?;
        let p2 = build_left_regular(cfg.n, cfg.var_degree, m2, seed::derive(seed_value, "ldpc-p2", 0))?;
        let stacked = p1.stack(&p2)?;
        Ok(IntegratedLdpc {
            p1,
            p2,
            stacked,
            alpha,
            channel: ch.clone(),
            schedule: cfg.schedule,
            decode_iterations: cfg.decode_iterations,
        })
    }

    pub fn message_len(&self) -> usize {
        self.p1.checks()
    }

    pub fn n(&self) -> usize {
        self.p1.n()
    }

    pub fn shared_checks(&self, shared_seed: u64) -> Syndrome {
        let mut rng = seed::stream(shared_seed, "ldpc-shared", 0);
        (0..self.p2.checks()).map(|_| u8::from(rng.random::<bool>())).collect()
    }

    /// Returns the channel word and the number of checks it leaves violated.
    pub fn encode<R: Rng + ?Sized>(&self, message: &[u8], shared_seed: u64, rng: &mut R) -> Result<DecimationOutcome> {
        if message.len() != self.message_len() {
            return Err(Error::DimensionMismatch { expected: self.message_len(), got: message.len() });
        }
        let mut s = message.to_vec();
        s.extend(self.shared_checks(shared_seed));
        bp_decimate_encode(&self.stacked, &s, self.alpha, self.schedule, rng)
    }

    /// Decode with the shared checks only, then read the message as `P1 x̂`.
    pub fn decode(&self, y: &[usize], shared_seed: u64) -> Result<IntegratedDecode> {
        let out = bp_decode_biased(&self.p2, &self.channel, self.alpha, y, &self.shared_checks(shared_seed), self.decode_iterations)?;
        Ok(IntegratedDecode { message: syndrome(&self.p1, &out.x)?, x: out.x, satisfied: out.satisfied })
    }
}
