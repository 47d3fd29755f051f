//! Polar codes with a non-uniform input prior.
//!
//! `U = X G_n` with `G_n = [[1, 0], [1, 1]]^{⊗m}` (no bit reversal). Index sets
//! are estimated by Monte Carlo on the Bhattacharyya parameters
//! `Z(U_i | U^{1:i−1})` (source side) and `Z(U_i | U^{1:i−1}, Y^{1:n})`
//! (channel side). The same successive-cancellation recursion drives
//! construction, shaping encoders, channel decoders and source
//! compression; only the per-index decision rule changes.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc::Dmc;
use crate::error::{Error, Result};
use crate::seed;

pub const CONTEXT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 10_000;
const PROB_FLOOR: f64 = 1e-300;
const CHUNK: usize = 32;

/// Probability pair `(P(bit = 0), P(bit = 1))`, normalized.
pub type Pair = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitDistribution {
    pub prob_zero: f64,
}

impl BitDistribution {
    /// Most likely bit, ties to 0.
    pub fn argmax(&self) -> u8 {
        u8::from(self.prob_zero < 0.5)
    }
}

pub fn is_power_of_two(n: usize) -> bool {
    n >= 1 && n & (n - 1) == 0
}

/// `u G_n` over GF(2) in place. `G_n` is its own inverse.
pub fn polar_transform_in_place(u: &mut [u8]) {
    let n = u.len();
    debug_assert!(is_power_of_two(n));
    let mut half = n / 2;
    while half >= 1 {
        for block in u.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x ^= *y;
            }
        }
        half /= 2;
    }
}

pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    if !is_power_of_two(u.len()) {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x);
    Ok(x)
}

#[inline]
fn normalize(p: Pair) -> Pair {
    let s = p[0] + p[1];
    if !(s > 0.0) || !s.is_finite() {
        return [0.5, 0.5];
    }
    [(p[0] / s).max(PROB_FLOOR), (p[1] / s).max(PROB_FLOOR)]
}

/// Law of `a ⊕ b` for independent bits.
#[inline]
fn check_node(a: Pair, b: Pair) -> Pair {
    normalize([a[0] * b[0] + a[1] * b[1], a[0] * b[1] + a[1] * b[0]])
}

/// Law of `x_b` given its own evidence and `x_a = c ⊕ x_b`.
#[inline]
fn bit_node(own: Pair, partner: Pair, c: u8) -> Pair {
    if c == 0 {
        normalize([own[0] * partner[0], own[1] * partner[1]])
    } else {
        normalize([own[0] * partner[1], own[1] * partner[0]])
    }
}

/// Successive cancellation over `K` trees that share one decision path.
///
/// Lane `k` of every leaf is the (unnormalized) joint law of `x_i` and the
/// evidence seen by that tree. `decide(i, dists)` receives the conditional
/// law of `u_i` in every lane and returns the bit to commit.
pub struct ScWalker<const K: usize> {
    n: usize,
    pairs: Vec<Vec<[Pair; K]>>,
    bits: Vec<Vec<u8>>,
    u: Vec<u8>,
}

impl<const K: usize> ScWalker<K> {
    pub fn new(n: usize) -> Result<Self> {
        if !is_power_of_two(n) {
            return Err(Error::NotPowerOfTwo(n));
        }
        let levels = n.trailing_zeros() as usize + 1;
        Ok(ScWalker {
            n,
            pairs: (0..levels).map(|l| vec![[[0.5; 2]; K]; n >> l]).collect(),
            bits: (0..levels).map(|l| vec![0; n >> l]).collect(),
            u: vec![0; n],
        })
    }

    /// Decode one block. Returns `(u, x)` with `x = u G_n`.
    pub fn run<F>(&mut self, leaves: &[[Pair; K]], mut decide: F) -> (Vec<u8>, Vec<u8>)
    where
        F: FnMut(usize, &[Pair; K]) -> u8,
    {
        assert_eq!(leaves.len(), self.n, "leaf count must equal the block length");
        for (dst, src) in self.pairs[0].iter_mut().zip(leaves) {
            for k in 0..K {
                dst[k] = normalize(src[k]);
            }
        }
        self.node(0, 0, &mut decide);
        (self.u.clone(), self.bits[0].clone())
    }

    fn node<F>(&mut self, level: usize, start: usize, decide: &mut F)
    where
        F: FnMut(usize, &[Pair; K]) -> u8,
    {
        let size = self.n >> level;
        if size == 1 {
            let b = decide(start, &self.pairs[level][0]) & 1;
            self.bits[level][0] = b;
            self.u[start] = b;
            return;
        }
        let half = size / 2;
        {
            let (upper, lower) = self.pairs.split_at_mut(level + 1);
            let (src, dst) = (&upper[level], &mut lower[0]);
            for i in 0..half {
                for k in 0..K {
                    dst[i][k] = check_node(src[i][k], src[i + half][k]);
                }
            }
        }
        self.node(level + 1, start, decide);
        {
            let (upper, lower) = self.bits.split_at_mut(level + 1);
            upper[level][..half].copy_from_slice(&lower[0][..half]);
        }
        {
            let (upper, lower) = self.pairs.split_at_mut(level + 1);
            let (src, dst) = (&upper[level], &mut lower[0]);
            let partial = &self.bits[level];
            for i in 0..half {
                for k in 0..K {
                    dst[i][k] = bit_node(src[i + half][k], src[i][k], partial[i]);
                }
            }
        }
        self.node(level + 1, start + half, decide);
        let (upper, lower) = self.bits.split_at_mut(level + 1);
        for i in 0..half {
            let cb = lower[0][i];
            upper[level][i] ^= cb;
            upper[level][i + half] = cb;
        }
    }
}

#[inline]
fn argmax(p: &Pair) -> u8 {
    u8::from(p[1] > p[0])
}

#[inline]
fn bhattacharyya(p: &Pair) -> f64 {
    2.0 * (p[0] * p[1]).sqrt()
}

fn prior_pair(alpha: f64) -> Pair {
    [1.0 - alpha, alpha]
}

fn joint_pair(alpha: f64, lik: Pair) -> Pair {
    [(1.0 - alpha) * lik[0], alpha * lik[1]]
}

/// `P(U_i | U^{1:i−1})` (no evidence) or `P(U_i | U^{1:i−1}, Y)` (per-position
/// likelihood pairs `(W(y|0), W(y|1))`) where `X` is i.i.d. Bernoulli(`alpha`)
/// and `i = previous.len()` (0-based).
pub fn sc_bit_distribution(alpha: f64, n: usize, evidence: Option<&[Pair]>, previous: &[u8]) -> Result<BitDistribution> {
    if previous.len() >= n {
        return Err(Error::arg(format!("index {} out of range for n = {n}", previous.len())));
    }
    let leaves: Vec<[Pair; 1]> = match evidence {
        None => vec![[prior_pair(alpha)]; n],
        Some(lik) => {
            if lik.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: lik.len() });
            }
            lik.iter().map(|&l| [joint_pair(alpha, l)]).collect()
        }
    };
    let target = previous.len();
    let mut walker = ScWalker::<1>::new(n)?;
    let mut out = 0.5;
    walker.run(&leaves, |i, d| {
        if i < target {
            previous[i]
        } else {
            if i == target {
                out = d[0][0];
            }
            0
        }
    });
    Ok(BitDistribution { prob_zero: out })
}

/// How index sets are cut from the estimated Bhattacharyya parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Selection {
    /// `H = {Z ≥ 1 − δ}`, `L = {Z ≤ δ}` on both sides.
    Threshold { delta: f64 },
    /// Finite-length rule. `H_X = {Z_src ≥ 1/2}`, `L_X = {Z_src ≤ lossless_delta}`,
    /// `H_{X|Y} = H_X ∩ {Z_ch ≥ 1/2}`, and `L_{X|Y}` is the smallest prefix of
    /// indices sorted by `Z_ch` holding `⌊info_rate · n⌋` members of `H_X`.
    RateTargeted { info_rate: f64, lossless_delta: f64 },
}

impl Default for Selection {
    fn default() -> Self {
        Selection::RateTargeted { info_rate: 0.5, lossless_delta: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Info,
    /// Frozen, filled from shared randomness.
    Random,
    /// Frozen, set by the source-side argmax.
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarContext {
    pub schema_version: u32,
    pub n: usize,
    pub m: u32,
    pub alpha: f64,
    pub channel: Dmc,
    pub samples: usize,
    pub seed: u64,
    pub selection: Selection,
    pub z_source: Vec<f64>,
    pub z_channel: Vec<f64>,
    pub h_x: Vec<usize>,
    pub l_x: Vec<usize>,
    pub h_xy: Vec<usize>,
    pub l_xy: Vec<usize>,
    pub info_set: Vec<usize>,
    pub f_r: Vec<usize>,
    pub f_d: Vec<usize>,
}

/// Monte Carlo estimate of both Bhattacharyya profiles.
fn estimate_z(ch: &Dmc, alpha: f64, n: usize, samples: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::stream(seed, "polar-construct", c as u64);
            let mut walker = ScWalker::<2>::new(n)?;
            let mut zs = vec![0.0; n];
            let mut zc = vec![0.0; n];
            let count = CHUNK.min(samples - c * CHUNK);
            let mut leaves = vec![[[0.0; 2]; 2]; n];
            let mut u = vec![0u8; n];
            for _ in 0..count {
                for (leaf, ui) in leaves.iter_mut().zip(u.iter_mut()) {
                    let x = u8::from(rng.random::<f64>() < alpha);
                    let y = ch.sample(usize::from(x), &mut rng)?;
                    *leaf = [prior_pair(alpha), joint_pair(alpha, ch.likelihoods(y))];
                    *ui = x;
                }
                polar_transform_in_place(&mut u);
                walker.run(&leaves, |i, d| {
                    zs[i] += bhattacharyya(&d[0]);
                    zc[i] += bhattacharyya(&d[1]);
                    u[i]
                });
            }
            Ok((zs, zc))
        })
        .collect();
    let mut z_source = vec![0.0; n];
    let mut z_channel = vec![0.0; n];
    for part in partials {
        let (zs, zc) = part?;
        for i in 0..n {
            z_source[i] += zs[i];
            z_channel[i] += zc[i];
        }
    }
    let scale = 1.0 / samples as f64;
    z_source.iter_mut().for_each(|z| *z = (*z * scale).min(1.0));
    z_channel.iter_mut().for_each(|z| *z = (*z * scale).min(1.0));
    Ok((z_source, z_channel))
}

fn complement(set: &[usize], n: usize) -> Vec<usize> {
    let mut mark = vec![false; n];
    set.iter().for_each(|&i| mark[i] = true);
    (0..n).filter(|&i| !mark[i]).collect()
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect()
}

/// Indices sorted by ascending `z`, ties by index.
pub fn ranked(z: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    idx
}

impl PolarContext {
    /// Estimate both Bhattacharyya profiles with `samples` draws of
    /// `(X^{1:n}, Y^{1:n})` and classify indices with `selection`.
    pub fn build(ch: &Dmc, alpha: f64, n: usize, samples: usize, seed: u64, selection: Selection) -> Result<Self> {
        if !ch.is_binary() {
            return Err(Error::NotBinary(ch.input_size()));
        }
        if !is_power_of_two(n) {
            return Err(Error::NotPowerOfTwo(n));
        }
        if samples < 100 {
            return Err(Error::arg(format!("at least 100 Monte Carlo samples required, got {samples}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let (z_source, z_channel) = estimate_z(ch, alpha, n, samples, seed)?;
        let mut ctx = PolarContext {
            schema_version: CONTEXT_SCHEMA_VERSION,
            n,
            m: n.trailing_zeros(),
            alpha,
            channel: ch.clone(),
            samples,
            seed,
            selection,
            z_source,
            z_channel,
            h_x: vec![],
            l_x: vec![],
            h_xy: vec![],
            l_xy: vec![],
            info_set: vec![],
            f_r: vec![],
            f_d: vec![],
        };
        ctx.classify(selection)?;
        Ok(ctx)
    }

    /// Same Monte Carlo estimates, different cut.
    pub fn with_selection(&self, selection: Selection) -> Result<Self> {
        let mut ctx = self.clone();
        ctx.classify(selection)?;
        Ok(ctx)
    }

    fn classify(&mut self, selection: Selection) -> Result<()> {
        let n = self.n;
        let above = |z: &[f64], t: f64| -> Vec<usize> { (0..n).filter(|&i| z[i] >= t).collect() };
        let below = |z: &[f64], t: f64| -> Vec<usize> { (0..n).filter(|&i| z[i] <= t).collect() };
        match selection {
            Selection::Threshold { delta } => {
                if !(delta > 0.0 && delta <= 0.5) {
                    return Err(Error::arg(format!("threshold must lie in (0, 1/2], got {delta}")));
                }
                self.h_x = above(&self.z_source, 1.0 - delta);
                self.l_x = below(&self.z_source, delta);
                self.h_xy = intersect(&above(&self.z_channel, 1.0 - delta), &self.h_x);
                self.l_xy = below(&self.z_channel, delta);
            }
            Selection::RateTargeted { info_rate, lossless_delta } => {
                if !(0.0..=1.0).contains(&info_rate) || !(lossless_delta > 0.0 && lossless_delta < 0.5) {
                    return Err(Error::arg("info_rate must lie in [0, 1] and lossless_delta in (0, 1/2)"));
                }
                self.h_x = above(&self.z_source, 0.5);
                self.l_x = below(&self.z_source, lossless_delta);
                self.h_xy = intersect(&above(&self.z_channel, 0.5), &self.h_x);
                let target = (info_rate * n as f64).floor() as usize;
                if target > self.h_x.len() {
                    return Err(Error::Config(format!(
                        "requested {target} information bits but only {} indices are uniform on the source side",
                        self.h_x.len()
                    )));
                }
                let mut in_hx = vec![false; n];
                self.h_x.iter().for_each(|&i| in_hx[i] = true);
                let mut l_xy = Vec::new();
                let mut count = 0;
                for i in ranked(&self.z_channel) {
                    if count == target {
                        break;
                    }
                    l_xy.push(i);
                    count += usize::from(in_hx[i]);
                }
                l_xy.sort_unstable();
                self.l_xy = l_xy;
            }
        }
        self.selection = selection;
        self.info_set = intersect(&self.h_x, &self.l_xy);
        let l_xy_c = complement(&self.l_xy, n);
        self.f_r = intersect(&self.h_x, &l_xy_c);
        self.f_d = complement(&self.h_x, n);
        Ok(())
    }

    /// Rate-targeted cut holding exactly `info_size` information bits.
    pub fn with_info_size(&self, info_size: usize, lossless_delta: f64) -> Result<Self> {
        let info_rate = (info_size as f64 + 0.5) / self.n as f64;
        self.with_selection(Selection::RateTargeted { info_rate: info_rate.min(1.0), lossless_delta })
    }

    pub fn roles(&self) -> Vec<Role> {
        let mut roles = vec![Role::Deterministic; self.n];
        self.info_set.iter().for_each(|&i| roles[i] = Role::Info);
        self.f_r.iter().for_each(|&i| roles[i] = Role::Random);
        roles
    }

    pub fn rate(&self) -> f64 {
        self.info_set.len() as f64 / self.n as f64
    }

    /// `Σ_{i ∈ I} Z(U_i | U^{1:i−1}, Y)`, the union bound on block error.
    pub fn error_bound(&self) -> f64 {
        self.info_set.iter().map(|&i| self.z_channel[i]).sum()
    }

    /// Shared random bits for the `F_r` positions.
    pub fn shared_bits(&self, shared_seed: u64) -> Vec<u8> {
        let mut rng = seed::stream(shared_seed, "polar-frozen", 0);
        (0..self.f_r.len()).map(|_| u8::from(rng.random::<bool>())).collect()
    }

    fn prior_leaves(&self) -> Vec<[Pair; 1]> {
        vec![[prior_pair(self.alpha)]; self.n]
    }

    /// Shaping encoder. Returns the channel word `x = u G_n`.
    pub fn encode(&self, message: &[u8], shared_seed: u64) -> Result<Vec<u8>> {
        Ok(self.encode_full(message, shared_seed)?.1)
    }

    /// Shaping encoder returning `(u, x)`.
    pub fn encode_full(&self, message: &[u8], shared_seed: u64) -> Result<(Vec<u8>, Vec<u8>)> {
        if message.len() != self.info_set.len() {
            return Err(Error::DimensionMismatch { expected: self.info_set.len(), got: message.len() });
        }
        let roles = self.roles();
        let shared = self.shared_bits(shared_seed);
        let (mut next_msg, mut next_shared) = (message.iter(), shared.iter());
        let mut walker = ScWalker::<1>::new(self.n)?;
        Ok(walker.run(&self.prior_leaves(), |i, d| match roles[i] {
            Role::Info => *next_msg.next().expect("message length checked"),
            Role::Random => *next_shared.next().expect("one shared bit per F_r index"),
            Role::Deterministic => argmax(&d[0]),
        }))
    }

    /// Per-position likelihood pairs of a received word.
    pub fn likelihoods(&self, y: &[usize]) -> Result<Vec<Pair>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: y.len() });
        }
        y.iter()
            .map(|&yi| {
                if yi < self.channel.output_size() {
                    Ok(self.channel.likelihoods(yi))
                } else {
                    Err(Error::SymbolOutOfRange { symbol: yi, size: self.channel.output_size() })
                }
            })
            .collect()
    }

    /// Decode a received word. Returns `(message, u)`.
    pub fn decode(&self, y: &[usize], shared_seed: u64) -> Result<(Vec<u8>, Vec<u8>)> {
        let lik = self.likelihoods(y)?;
        self.decode_likelihoods(&lik, shared_seed)
    }

    /// Decode from per-position likelihood pairs `(P(e|x=0), P(e|x=1))`.
    ///
    /// `F_r` comes from shared randomness, `F_d` from the source-side argmax
    /// (which never looks at the channel output, so it matches the encoder
    /// whenever the past does) and `I` from the channel-side argmax.
    pub fn decode_likelihoods(&self, lik: &[Pair], shared_seed: u64) -> Result<(Vec<u8>, Vec<u8>)> {
        if lik.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: lik.len() });
        }
        let roles = self.roles();
        let shared = self.shared_bits(shared_seed);
        let mut next_shared = shared.iter();
        let prior = prior_pair(self.alpha);
        let leaves: Vec<[Pair; 2]> = lik.iter().map(|&l| [prior, joint_pair(self.alpha, l)]).collect();
        let mut message = Vec::with_capacity(self.info_set.len());
        let mut walker = ScWalker::<2>::new(self.n)?;
        let (u, _) = walker.run(&leaves, |i, d| match roles[i] {
            Role::Random => *next_shared.next().expect("one shared bit per F_r index"),
            Role::Deterministic => argmax(&d[0]),
            Role::Info => {
                let b = argmax(&d[1]);
                message.push(b);
                b
            }
        });
        Ok((message, u))
    }

    /// SC decoding where `known[i]` pins `u_i`; the other positions take the
    /// channel-side argmax. Returns `(u, x)`.
    pub fn decode_known(&self, lik: &[Pair], known: &[Option<u8>]) -> Result<(Vec<u8>, Vec<u8>)> {
        if lik.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: lik.len() });
        }
        if known.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: known.len() });
        }
        let leaves: Vec<[Pair; 1]> = lik.iter().map(|&l| [joint_pair(self.alpha, l)]).collect();
        let mut walker = ScWalker::<1>::new(self.n)?;
        Ok(walker.run(&leaves, |i, d| known[i].unwrap_or_else(|| argmax(&d[0]))))
    }

    /// `{u_i : i ∉ L_X}` for `u = x G_n`.
    pub fn source_compress(&self, x: &[u8]) -> Result<Vec<u8>> {
        let u = polar_transform(x)?;
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.len() });
        }
        Ok(complement(&self.l_x, self.n).into_iter().map(|i| u[i]).collect())
    }

    /// Number of bits kept by [`PolarContext::source_compress`].
    pub fn compressed_len(&self) -> usize {
        self.n - self.l_x.len()
    }

    /// Inverse of [`PolarContext::source_compress`]: the `L_X` positions are
    /// rebuilt by the source-side argmax. On uniform input bits this is the
    /// shaping map from `compressed_len()` fair bits to a biased word.
    pub fn source_decompress(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.compressed_len() {
            return Err(Error::DimensionMismatch { expected: self.compressed_len(), got: bits.len() });
        }
        let mut in_lx = vec![false; self.n];
        self.l_x.iter().for_each(|&i| in_lx[i] = true);
        let mut next = bits.iter();
        let mut walker = ScWalker::<1>::new(self.n)?;
        let (_, x) = walker.run(&self.prior_leaves(), |i, d| {
            if in_lx[i] {
                argmax(&d[0])
            } else {
                *next.next().expect("bit count checked")
            }
        });
        Ok(x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ctx: PolarContext = serde_json::from_str(s)?;
        if ctx.schema_version != CONTEXT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: ctx.schema_version, expected: CONTEXT_SCHEMA_VERSION });
        }
        if !is_power_of_two(ctx.n) || ctx.z_source.len() != ctx.n || ctx.z_channel.len() != ctx.n {
            return Err(Error::arg("inconsistent polar context file"));
        }
        // Sets are re-derived so a hand-edited file cannot break the partition.
        ctx.with_selection(ctx.selection)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        PolarContext::from_json(&std::fs::read_to_string(path)?)
    }
}
