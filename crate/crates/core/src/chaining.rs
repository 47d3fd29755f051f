//! Chaining: independent shaping and syndrome codes bound together by
//! carrying each block's syndrome inside the payload of the next block.
//!
//! Blocks `1..k−1` are biased words of length `n` produced by the shaping
//! map `g` (polar source decompression). Block 1 carries `m` fresh bits,
//! blocks `2..k−1` carry the previous syndrome followed by `b` fresh bits,
//! and block `k` sends the last syndrome with a uniform-input polar code of
//! length `n_t`. The receiver decodes from block `k` backwards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dmc::{capacity, conditional_entropy, mutual_information, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::info::h2;
use crate::polar::{ranked, PolarContext, Selection};
use crate::seed;
use crate::sparse::{self, SparseGraph};

/// `(h2(α) + (k−2) I) / ((k−1) + H(X|Y) / I_s)`, all per channel use.
pub fn chain_rate(h2_alpha: f64, mutual_info: f64, cond_entropy: f64, sym_capacity: f64, k: usize) -> f64 {
    let k = k as f64;
    (h2_alpha + (k - 2.0) * mutual_info) / ((k - 1.0) + cond_entropy / sym_capacity)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Polar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Share `u_i` outside the most reliable synthetic channels.
    PolarSyndrome,
    /// Share `P x` for a left-regular sparse `P`.
    LdpcSyndrome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalKind {
    PolarUniform,
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polar" => Ok(SourceKind::Polar),
            _ => Err(Error::Unregistered { kind: "source map", name: s.into() }),
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polar" | "polar-syndrome" => Ok(ChannelKind::PolarSyndrome),
            "ldpc" | "ldpc-syndrome" => Ok(ChannelKind::LdpcSyndrome),
            _ => Err(Error::Unregistered { kind: "channel code", name: s.into() }),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::PolarSyndrome => "polar-syndrome",
            ChannelKind::LdpcSyndrome => "ldpc-syndrome",
        })
    }
}

/// User-facing knobs; everything else is derived in [`ChainSession::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub k: usize,
    pub n: usize,
    pub channel: Dmc,
    /// Fraction of the ideal per-block information `n I(W)` actually sent,
    /// and of `I_s(W)` used by the terminal code.
    pub backoff: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest tolerated `|ones/n − α|` before a block counts as a shaping failure.
    pub shaping_tolerance: f64,
    pub ldpc_var_degree: usize,
    pub ldpc_iterations: usize,
    /// Input bias; the capacity-achieving one when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl ChainParams {
    pub fn new(channel: Dmc, k: usize, n: usize) -> Self {
        ChainParams {
            k,
            n,
            channel,
            backoff: 0.75,
            samples: crate::polar::DEFAULT_SAMPLES,
            seed: 0,
            shaping_tolerance: 0.05,
            ldpc_var_degree: 3,
            ldpc_iterations: 100,
            alpha: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub params: ChainParams,
    pub source: SourceKind,
    pub code: ChannelKind,
    pub terminal: TerminalKind,
    pub alpha: f64,
    pub mutual_info: f64,
    pub cond_entropy: f64,
    pub sym_capacity: f64,
    /// Payload bits per block, `n − |L_X|`.
    pub payload_len: usize,
    /// Fresh information bits in blocks `2..k−1`.
    pub info_per_block: usize,
    /// Syndrome bits per block, `payload_len − info_per_block`.
    pub syndrome_len: usize,
    pub terminal_n: usize,
}

impl ChainConfig {
    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn message_len(&self) -> usize {
        self.payload_len + (self.k() - 2) * self.info_per_block
    }

    pub fn channel_uses(&self) -> usize {
        self.n() * (self.k() - 1) + self.terminal_n
    }

    pub fn realized_rate(&self) -> f64 {
        self.message_len() as f64 / self.channel_uses() as f64
    }

    /// Rate formula evaluated at the configured sizes.
    pub fn rate_from_sizes(&self) -> f64 {
        let n = self.n() as f64;
        chain_rate(
            self.payload_len as f64 / n,
            self.info_per_block as f64 / n,
            self.terminal_n as f64 / n,
            1.0,
            self.k(),
        )
    }

    /// Rate formula evaluated at the information quantities of the channel.
    pub fn formula_rate(&self) -> f64 {
        chain_rate(h2(self.alpha), self.mutual_info, self.cond_entropy, self.sym_capacity, self.k())
    }
}

/// Assemble a configuration from registered component names.
pub fn plug_combination(source_kind: &str, channel_kind: &str, params: ChainParams) -> Result<ChainSession> {
    let source: SourceKind = source_kind.parse()?;
    let code: ChannelKind = channel_kind.parse()?;
    ChainSession::new(params, source, code)
}

/// Per-block record kept by the encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedBlock {
    pub payload: Vec<u8>,
    pub codeword: Vec<u8>,
    pub syndrome: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainEncoding {
    /// Blocks `1..k−1`.
    pub blocks: Vec<EncodedBlock>,
    pub terminal_codeword: Vec<u8>,
}

impl ChainEncoding {
    /// Channel inputs in transmission order, terminal block last.
    pub fn channel_inputs(&self) -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = self.blocks.iter().map(|b| b.codeword.clone()).collect();
        out.push(self.terminal_codeword.clone());
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    /// Block `j < k` whose ones fraction misses `α` by more than the tolerance.
    pub shaping: usize,
    /// Block `j < k` decoded to the wrong word.
    pub block: usize,
    /// Terminal block decoded wrongly.
    pub terminal: usize,
    /// Block `j < k` decoded correctly whose payload still came out wrong.
    pub payload: usize,
}

impl ErrorCounts {
    pub fn add(&mut self, other: &ErrorCounts) {
        self.shaping += other.shaping;
        self.block += other.block;
        self.terminal += other.terminal;
        self.payload += other.payload;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTranscript {
    /// Decoded words of blocks `1..k−1`.
    pub codewords: Vec<Vec<u8>>,
    pub payloads: Vec<Vec<u8>>,
    /// Syndromes recovered for blocks `1..k−1`.
    pub syndromes: Vec<Vec<u8>>,
    /// Block indices (1-based) in the order they were decoded.
    pub decode_order: Vec<usize>,
}

/// Built components for one chain configuration.
#[derive(Clone, Debug)]
pub struct ChainSession {
    pub cfg: ChainConfig,
    source_ctx: PolarContext,
    /// Positions of `u` shared as the polar syndrome, sorted.
    syndrome_positions: Vec<usize>,
    ldpc: Option<SparseGraph>,
    terminal: PolarContext,
}

impl ChainSession {
    pub fn new(params: ChainParams, source: SourceKind, code: ChannelKind) -> Result<Self> {
        if params.k < 2 {
            return Err(Error::Config(format!("a chain needs at least 2 blocks, got {}", params.k)));
        }
        if !(params.backoff > 0.0 && params.backoff <= 1.0) {
            return Err(Error::Config(format!("backoff must lie in (0, 1], got {}", params.backoff)));
        }
        let ch = &params.channel;
        if !ch.is_binary() {
            return Err(Error::NotBinary(ch.input_size()));
        }
        let report = capacity(ch, crate::dmc::DEFAULT_CAPACITY_TOL)?;
        let alpha = params.alpha.unwrap_or(report.optimal_input[1]);
        let input = InputDist::bernoulli(alpha)?;
        let mutual_info = mutual_information(ch, &input)?;
        let cond_entropy = conditional_entropy(ch, &input)?;
        let n = params.n;
        let source_ctx = PolarContext::build(
            ch,
            alpha,
            n,
            params.samples,
            seed::derive(params.seed, "chain-construct", 0),
            Selection::Threshold { delta: 0.5 },
        )?;
        let payload_len = source_ctx.compressed_len();
        let info_per_block = (params.backoff * n as f64 * mutual_info).floor() as usize;
        if info_per_block == 0 || info_per_block > payload_len {
            return Err(Error::Config(format!(
                "{info_per_block} information bits per block do not fit a payload of {payload_len}"
            )));
        }
        let syndrome_len = payload_len - info_per_block;
        let sym = report.symmetric_capacity;
        if !(sym > 0.0) {
            return Err(Error::Config("channel has zero symmetric capacity".into()));
        }
        let mut terminal_n = 1usize;
        while (terminal_n as f64) * params.backoff * sym < syndrome_len as f64 {
            terminal_n *= 2;
        }
        // The guard below keeps the terminal rate at or under the backed-off
        // symmetric capacity.
        debug_assert!(syndrome_len as f64 <= terminal_n as f64 * params.backoff * sym);
        let terminal_base = PolarContext::build(
            ch,
            0.5,
            terminal_n.max(2),
            params.samples,
            seed::derive(params.seed, "chain-terminal", 0),
            Selection::Threshold { delta: 0.5 },
        )?;
        let terminal = terminal_base.with_info_size(syndrome_len, 1e-3)?;
        let terminal_n = terminal.n;

        let mut syndrome_positions: Vec<usize> = ranked(&source_ctx.z_channel)[n - syndrome_len..].to_vec();
        syndrome_positions.sort_unstable();
        let ldpc = match code {
            ChannelKind::PolarSyndrome => None,
            ChannelKind::LdpcSyndrome => Some(sparse::build_left_regular(
                n,
                params.ldpc_var_degree,
                syndrome_len,
                seed::derive(params.seed, "chain-ldpc", 0),
            )?),
        };
        let cfg = ChainConfig {
            params,
            source,
            code,
            terminal: TerminalKind::PolarUniform,
            alpha,
            mutual_info,
            cond_entropy,
            sym_capacity: sym,
            payload_len,
            info_per_block,
            syndrome_len,
            terminal_n,
        };
        Ok(ChainSession { cfg, source_ctx, syndrome_positions, ldpc, terminal })
    }

    pub fn source_context(&self) -> &PolarContext {
        &self.source_ctx
    }

    pub fn terminal_context(&self) -> &PolarContext {
        &self.terminal
    }

    fn syndrome_of(&self, x: &[u8]) -> Result<Vec<u8>> {
        match &self.ldpc {
            Some(g) => sparse::syndrome(g, x),
            None => {
                let u = crate::polar::polar_transform(x)?;
                Ok(self.syndrome_positions.iter().map(|&i| u[i]).collect())
            }
        }
    }

    fn terminal_seed(shared_seed: u64) -> u64 {
        seed::derive(shared_seed, "chain-terminal-shared", 0)
    }

    pub fn encode(&self, message: &[u8], shared_seed: u64) -> Result<ChainEncoding> {
        let cfg = &self.cfg;
        if message.len() != cfg.message_len() {
            return Err(Error::DimensionMismatch { expected: cfg.message_len(), got: message.len() });
        }
        let mut blocks: Vec<EncodedBlock> = Vec::with_capacity(cfg.k() - 1);
        let mut rest = message;
        for j in 0..cfg.k() - 1 {
            let payload: Vec<u8> = if j == 0 {
                let (head, tail) = rest.split_at(cfg.payload_len);
                rest = tail;
                head.to_vec()
            } else {
                let (head, tail) = rest.split_at(cfg.info_per_block);
                rest = tail;
                let mut p = blocks[j - 1].syndrome.clone();
                p.extend_from_slice(head);
                p
            };
            let codeword = self.source_ctx.source_decompress(&payload)?;
            let syndrome = self.syndrome_of(&codeword)?;
            blocks.push(EncodedBlock { payload, codeword, syndrome });
        }
        let last = &blocks.last().expect("k ≥ 2 leaves at least one block").syndrome;
        let terminal_codeword = self.terminal.encode(last, Self::terminal_seed(shared_seed))?;
        Ok(ChainEncoding { blocks, terminal_codeword })
    }

    fn decode_block(&self, y: &[usize], syndrome: &[u8]) -> Result<Vec<u8>> {
        let lik = self.source_ctx.likelihoods(y)?;
        match &self.ldpc {
            Some(g) => {
                let llr = sparse::posterior_llrs(&self.cfg.params.channel, self.cfg.alpha, y)?;
                Ok(sparse::bp_run(g, &llr, syndrome, sparse::BpOptions::new(self.cfg.params.ldpc_iterations))?.x)
            }
            None => {
                let mut known = vec![None; self.cfg.n()];
                for (&i, &b) in self.syndrome_positions.iter().zip(syndrome) {
                    known[i] = Some(b);
                }
                Ok(self.source_ctx.decode_known(&lik, &known)?.1)
            }
        }
    }

    /// Backward decoding. A wrong syndrome recovered from block `j+1` is
    /// used as is for block `j`, so errors propagate.
    pub fn decode(&self, received: &[Vec<usize>], shared_seed: u64) -> Result<(Vec<u8>, ChainTranscript)> {
        let cfg = &self.cfg;
        let k = cfg.k();
        if received.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: received.len() });
        }
        let (terminal_msg, _) = self.terminal.decode(&received[k - 1], Self::terminal_seed(shared_seed))?;
        let mut decode_order = vec![k];
        let mut codewords = vec![Vec::new(); k - 1];
        let mut payloads = vec![Vec::new(); k - 1];
        let mut syndromes = vec![Vec::new(); k - 1];
        syndromes[k - 2] = terminal_msg;
        let mut fresh: Vec<Vec<u8>> = vec![Vec::new(); k - 1];
        for j in (0..k - 1).rev() {
            decode_order.push(j + 1);
            let x = self.decode_block(&received[j], &syndromes[j])?;
            let payload = self.source_ctx.source_compress(&x)?;
            if j > 0 {
                syndromes[j - 1] = payload[..cfg.syndrome_len].to_vec();
                fresh[j] = payload[cfg.syndrome_len..].to_vec();
            } else {
                fresh[0] = payload.clone();
            }
            codewords[j] = x;
            payloads[j] = payload;
        }
        let message: Vec<u8> = fresh.concat();
        Ok((message, ChainTranscript { codewords, payloads, syndromes, decode_order }))
    }

    /// Attribute the failures of one transmission to the four error types.
    pub fn classify(&self, enc: &ChainEncoding, dec: &ChainTranscript, terminal_ok: bool) -> ErrorCounts {
        let mut counts = ErrorCounts::default();
        let n = self.cfg.n() as f64;
        for (j, block) in enc.blocks.iter().enumerate() {
            let ones = block.codeword.iter().filter(|&&b| b == 1).count() as f64 / n;
            if (ones - self.cfg.alpha).abs() > self.cfg.params.shaping_tolerance {
                counts.shaping += 1;
            }
            if dec.codewords[j] != block.codeword {
                counts.block += 1;
            } else if dec.payloads[j] != block.payload {
                counts.payload += 1;
            }
        }
        if !terminal_ok {
            counts.terminal += 1;
        }
        counts
    }

    /// Whether the terminal block delivered the last syndrome intact.
    pub fn terminal_ok(&self, enc: &ChainEncoding, dec: &ChainTranscript) -> bool {
        enc.blocks.last().map(|b| &b.syndrome) == dec.syndromes.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_formula_examples() {
        let r = chain_rate(0.5, 0.3, 0.2, 0.28, 10);
        assert!((r - 2.9 / (9.0 + 0.2 / 0.28)).abs() < 1e-12);
        assert!((r - 0.29853).abs() < 1e-5);
        assert!((chain_rate(0.5, 0.3, 0.2, 0.28, 10_000) - 0.3).abs() < 1e-3);
        assert!((chain_rate(0.5, 0.3, 0.2, 0.28, 2) - 0.5 / (1.0 + 0.2 / 0.28)).abs() < 1e-15);
    }

    #[test]
    fn unregistered_kinds() {
        let params = ChainParams::new(Dmc::bsc(0.1).unwrap(), 3, 64);
        assert!(matches!(plug_combination("huffman", "polar", params.clone()), Err(Error::Unregistered { .. })));
        assert!(matches!(plug_combination("polar", "turbo", params), Err(Error::Unregistered { .. })));
    }

    #[test]
    fn noiseless_chain() {
        let mut params = ChainParams::new(Dmc::zchannel(0.0).unwrap(), 3, 64);
        params.samples = 200;
        let session = plug_combination("polar", "polar", params).unwrap();
        let cfg = &session.cfg;
        let msg: Vec<u8> = (0..cfg.message_len()).map(|i| (i % 5 == 1) as u8).collect();
        let enc = session.encode(&msg, 3).unwrap();
        assert_eq!(enc.blocks.len(), 2);
        assert_eq!(enc.blocks[1].payload[..cfg.syndrome_len], enc.blocks[0].syndrome[..]);
        let y: Vec<Vec<usize>> = enc.channel_inputs().iter().map(|b| b.iter().map(|&v| v as usize).collect()).collect();
        let (dec, tr) = session.decode(&y, 3).unwrap();
        assert_eq!(dec, msg);
        assert_eq!(tr.decode_order, vec![3, 2, 1]);
        let counts = session.classify(&enc, &tr, session.terminal_ok(&enc, &tr));
        assert_eq!((counts.block, counts.terminal, counts.payload), (0, 0, 0));
    }
}
