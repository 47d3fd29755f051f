//! Finite discrete memoryless channels.
//!
//! A [`Dmc`] is a row-stochastic matrix `W(y|x)`. Output symbols that no
//! input can reach are dropped at construction so that every downstream
//! density has strictly positive support; the original index of each kept
//! output is retained in [`Dmc::kept_outputs`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{entropy, xlog2x};

const ROW_SUM_TOL: f64 = 1e-12;
const BA_MAX_ITERATIONS: usize = 1_000_000;
/// Capacity gap used by the harness and CLI; tighter targets can stall when
/// the optimal input puts no mass on some symbol.
pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmcJson", into = "DmcJson")]
pub struct Dmc {
    input_size: usize,
    output_size: usize,
    w: Vec<Vec<f64>>,
    kept_outputs: Vec<usize>,
}

/// Wire format: `{"input_size": n, "output_size": m, "w": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
struct DmcJson {
    input_size: usize,
    output_size: usize,
    w: Vec<Vec<f64>>,
}

impl TryFrom<DmcJson> for Dmc {
    type Error = Error;

    fn try_from(raw: DmcJson) -> Result<Self> {
        if raw.w.len() != raw.input_size {
            return Err(Error::DimensionMismatch { expected: raw.input_size, got: raw.w.len() });
        }
        if let Some(row) = raw.w.iter().find(|r| r.len() != raw.output_size) {
            return Err(Error::DimensionMismatch { expected: raw.output_size, got: row.len() });
        }
        Dmc::new(raw.w)
    }
}

impl From<Dmc> for DmcJson {
    fn from(ch: Dmc) -> Self {
        DmcJson { input_size: ch.input_size, output_size: ch.output_size, w: ch.w }
    }
}

impl Dmc {
    /// Build a channel from its transition rows `w[x][y] = W(y|x)`.
    pub fn new(w: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = w.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("empty input alphabet".into()));
        }
        let raw_outputs = w[0].len();
        if raw_outputs == 0 {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        for (x, row) in w.iter().enumerate() {
            if row.len() != raw_outputs {
                return Err(Error::DimensionMismatch { expected: raw_outputs, got: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
                return Err(Error::InvalidChannel(format!("entry {v} in row {x} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {sum}")));
            }
        }
        let kept_outputs: Vec<usize> =
            (0..raw_outputs).filter(|&y| w.iter().any(|row| row[y] > 0.0)).collect();
        let w: Vec<Vec<f64>> =
            w.iter().map(|row| kept_outputs.iter().map(|&y| row[y]).collect()).collect();
        Ok(Dmc { input_size, output_size: kept_outputs.len(), w, kept_outputs })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_prob(p)?;
        Dmc::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel. Outputs are `0, 1, ?` in that order.
    pub fn bec(eps: f64) -> Result<Self> {
        check_prob(eps)?;
        Dmc::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    /// Z-channel: `0` is noiseless, `1` is received as `0` with probability `q`.
    pub fn zchannel(q: f64) -> Result<Self> {
        check_prob(q)?;
        Dmc::new(vec![vec![1.0, 0.0], vec![q, 1.0 - q]])
    }

    /// Binary asymmetric channel with `P(1|0) = p0` and `P(0|1) = p1`.
    pub fn bac(p0: f64, p1: f64) -> Result<Self> {
        check_prob(p0)?;
        check_prob(p1)?;
        Dmc::new(vec![vec![1.0 - p0, p0], vec![p1, 1.0 - p1]])
    }

    /// Noiseless channel on `size` symbols.
    pub fn identity(size: usize) -> Result<Self> {
        Dmc::new((0..size).map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn is_binary(&self) -> bool {
        self.input_size == 2
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.w[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Original output index of each kept output symbol.
    pub fn kept_outputs(&self) -> &[usize] {
        &self.kept_outputs
    }

    /// Map an original output index to its index after pruning.
    pub fn remap_output(&self, original: usize) -> Option<usize> {
        self.kept_outputs.binary_search(&original).ok()
    }

    /// `(W(y|0), W(y|1))` for a binary-input channel.
    #[inline]
    pub fn likelihoods(&self, y: usize) -> [f64; 2] {
        [self.w[0][y], self.w[1][y]]
    }

    /// Output law `q(y) = Σ_x p(x) W(y|x)`.
    pub fn output_distribution(&self, p: &InputDist) -> Result<Vec<f64>> {
        self.check_input(p)?;
        let mut q = vec![0.0; self.output_size];
        for (row, &px) in self.w.iter().zip(p.as_slice()) {
            for (qy, &wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
        Ok(q)
    }

    /// Draw an output symbol for input `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize> {
        let row = self.w.get(x).ok_or(Error::SymbolOutOfRange { symbol: x, size: self.input_size })?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (y, &wy) in row.iter().enumerate() {
            acc += wy;
            if u < acc {
                return Ok(y);
            }
        }
        // Rounding left `u` above the last partial sum; return the last reachable output.
        Ok(row.iter().rposition(|&wy| wy > 0.0).unwrap_or(0))
    }

    /// Pass a whole word through the channel.
    pub fn transmit<R: Rng + ?Sized>(&self, xs: &[usize], rng: &mut R) -> Result<Vec<usize>> {
        xs.iter().map(|&x| self.sample(x, rng)).collect()
    }

    /// Same as [`Dmc::transmit`] for bit vectors on a binary-input channel.
    pub fn transmit_bits<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Result<Vec<usize>> {
        bits.iter().map(|&b| self.sample(usize::from(b), rng)).collect()
    }

    fn check_input(&self, p: &InputDist) -> Result<()> {
        if p.len() != self.input_size {
            return Err(Error::DimensionMismatch { expected: self.input_size, got: p.len() });
        }
        Ok(())
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidChannel(format!("parameter {p} outside [0, 1]")))
    }
}

impl fmt::Display for Dmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dmc({}x{})", self.input_size, self.output_size)
    }
}

/// Channel descriptions accepted on the command line: `bsc(p)`, `bec(e)`,
/// `zchannel(q)` (alias `z(q)`), `bac(p0,p1)`, `identity(n)`, or inline JSON.
impl FromStr for Dmc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let bad = || Error::InvalidChannel(format!("cannot parse channel spec `{s}`"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.as_str(), args.as_slice()) {
            ("bsc", [p]) => Dmc::bsc(*p),
            ("bec", [e]) => Dmc::bec(*e),
            ("z" | "zchannel", [q]) => Dmc::zchannel(*q),
            ("bac", [p0, p1]) => Dmc::bac(*p0, *p1),
            ("identity", [n]) if n.fract() == 0.0 && *n >= 1.0 => Dmc::identity(*n as usize),
            _ => Err(bad()),
        }
    }
}

/// A probability vector over the input alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDist(Vec<f64>);

impl InputDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidDistribution(format!("entry {v} outside [0, 1]")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(InputDist(p))
    }

    /// Normalize nonnegative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || w.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidDistribution("weights must be nonnegative with positive sum".into()));
        }
        InputDist::new(w.iter().map(|v| v / sum).collect())
    }

    pub fn uniform(size: usize) -> Self {
        InputDist(vec![1.0 / size as f64; size])
    }

    pub fn point(size: usize, x: usize) -> Result<Self> {
        if x >= size {
            return Err(Error::SymbolOutOfRange { symbol: x, size });
        }
        let mut p = vec![0.0; size];
        p[x] = 1.0;
        Ok(InputDist(p))
    }

    /// `(1 − α, α)`: probability `α` on bit 1.
    pub fn bernoulli(alpha: f64) -> Result<Self> {
        InputDist::new(vec![1.0 - alpha, alpha])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }
}

impl TryFrom<Vec<f64>> for InputDist {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        InputDist::new(v)
    }
}

impl From<InputDist> for Vec<f64> {
    fn from(p: InputDist) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for InputDist {
    type Output = f64;
    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    /// `I(X;Y)` at [`InfoReport::optimal_input`].
    pub mutual_information: f64,
    pub capacity: f64,
    /// Certified upper end of the capacity bracket.
    pub capacity_upper_bound: f64,
    pub symmetric_capacity: f64,
    pub optimal_input: InputDist,
    /// `H(X|Y)` at the optimal input.
    pub conditional_entropy_x_given_y: f64,
    pub iterations: usize,
}

/// `I(X;Y) = H(Y) − H(Y|X)` in bits.
pub fn mutual_information(ch: &Dmc, p: &InputDist) -> Result<f64> {
    let q = ch.output_distribution(p)?;
    let h_y_given_x: f64 =
        ch.w.iter().zip(p.as_slice()).map(|(row, &px)| px * entropy(row)).sum();
    Ok((entropy(&q) - h_y_given_x).max(0.0))
}

/// `H(X|Y)` evaluated directly on the joint law `p(x) W(y|x)`.
pub fn conditional_entropy(ch: &Dmc, p: &InputDist) -> Result<f64> {
    let q = ch.output_distribution(p)?;
    let mut h = 0.0;
    for (row, &px) in ch.w.iter().zip(p.as_slice()) {
        for (&wy, &qy) in row.iter().zip(&q) {
            let joint = px * wy;
            if joint > 0.0 {
                h -= joint * (joint / qy).log2();
            }
        }
    }
    Ok(h.max(0.0))
}

/// Per-input divergences `D(W(·|x) || q)` in bits.
fn divergences(ch: &Dmc, q: &[f64]) -> Vec<f64> {
    ch.w
        .iter()
        .map(|row| {
            row.iter()
                .zip(q)
                .map(|(&wy, &qy)| if wy > 0.0 { xlog2x(wy) - wy * qy.log2() } else { 0.0 })
                .sum()
        })
        .collect()
}

/// Blahut–Arimoto from the uniform input.
///
/// Stops once `max_x D(W(·|x)||q) − I(p) < tol`, which brackets the capacity
/// between the two. Iterates never decrease `I(p)`, so the reported capacity
/// is at least the symmetric capacity.
pub fn capacity(ch: &Dmc, tol: f64) -> Result<InfoReport> {
    if !(tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    let n = ch.input_size;
    let uniform = InputDist::uniform(n);
    let symmetric_capacity = mutual_information(ch, &uniform)?;
    let mut p = uniform.0.clone();
    let mut gap = f64::INFINITY;
    for iteration in 0..BA_MAX_ITERATIONS {
        let dist = InputDist(p.clone());
        let q = ch.output_distribution(&dist)?;
        let d = divergences(ch, &q);
        let info: f64 = p.iter().zip(&d).map(|(px, dx)| px * dx).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = upper - info;
        if gap < tol {
            let capacity = mutual_information(ch, &dist)?;
            return Ok(InfoReport {
                mutual_information: capacity,
                capacity,
                capacity_upper_bound: upper,
                symmetric_capacity,
                conditional_entropy_x_given_y: conditional_entropy(ch, &dist)?,
                optimal_input: dist,
                iterations: iteration,
            });
        }
        // Shift by the max exponent before exponentiating.
        let weights: Vec<f64> = p.iter().zip(&d).map(|(px, dx)| px * (dx - upper).exp2()).collect();
        let z: f64 = weights.iter().sum();
        p = weights.into_iter().map(|v| v / z).collect();
    }
    Err(Error::NoConvergence { tol, iterations: BA_MAX_ITERATIONS, gap })
}
