//! Gallager's mapping: a many-to-one map from a uniform extended alphabet
//! onto `X` that induces a rational approximation of the optimal input law.
//!
//! In the binary form the extended symbol is a `t`-bit string `u_1..u_t`
//! (with `u_1` the most significant bit of the table index), each bit is
//! carried by its own uniform-input polar code, and the receiver decodes
//! the levels in order, feeding re-encoded decisions of earlier levels into
//! the synthetic channel of the next.

use serde::{Deserialize, Serialize};

use crate::dmc::{mutual_information, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::info::{h2, total_variation};
use crate::polar::{is_power_of_two, Pair, PolarContext, Selection};
use crate::seed;

const MAX_DENOMINATOR: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub target: InputDist,
    pub approx: InputDist,
    /// `approx[x] = numerators[x] / d_lcd`.
    pub numerators: Vec<u64>,
    pub d_lcd: u64,
    /// `log2(d_lcd)` when a dyadic denominator was requested.
    pub t: Option<u32>,
    pub tv_distance: f64,
}

fn round_to(p: &[f64], d: u64) -> Option<Vec<u64>> {
    let largest = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a)))?;
    let mut num: Vec<u64> = p.iter().map(|&v| (v * d as f64).round() as u64).collect();
    let others: u64 = num.iter().enumerate().filter(|&(x, _)| x != largest).map(|(_, &v)| v).sum();
    num[largest] = d.checked_sub(others)?;
    Some(num)
}

/// Smallest denominator (any integer, or a power of two when `binary`) whose
/// rounding of `p_star` lies within total variation `delta`. The rounding
/// residue goes to the largest-mass symbol.
pub fn approximate(p_star: &InputDist, delta: f64, binary: bool) -> Result<RationalApprox> {
    if !(delta > 0.0 && delta < 0.125) {
        return Err(Error::arg(format!("delta must lie in (0, 1/8), got {delta}")));
    }
    let p = p_star.as_slice();
    let mut d: u64 = if binary { 2 } else { 1 };
    while d <= MAX_DENOMINATOR {
        if let Some(num) = round_to(p, d) {
            let approx: Vec<f64> = num.iter().map(|&v| v as f64 / d as f64).collect();
            let tv = total_variation(p, &approx);
            if tv < delta {
                return Ok(RationalApprox {
                    target: p_star.clone(),
                    approx: InputDist::new(approx)?,
                    numerators: num,
                    d_lcd: d,
                    t: binary.then(|| d.trailing_zeros()),
                    tv_distance: tv,
                });
            }
        }
        d = if binary { d * 2 } else { d + 1 };
    }
    Err(Error::arg(format!("no denominator up to {MAX_DENOMINATOR} reaches total variation {delta}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapperKind {
    Qary,
    Binary { t: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapper {
    pub kind: MapperKind,
    /// `table[v]` is the input symbol sent for extended symbol `v`.
    pub table: Vec<usize>,
    pub input_size: usize,
}

impl Mapper {
    pub fn extended_size(&self) -> usize {
        self.table.len()
    }

    pub fn preimage_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.input_size];
        self.table.iter().for_each(|&x| sizes[x] += 1);
        sizes
    }

    /// Law of `f(V)` for uniform `V`.
    pub fn induced_distribution(&self) -> InputDist {
        let n = self.table.len() as f64;
        InputDist::new(self.preimage_sizes().into_iter().map(|c| c as f64 / n).collect())
            .expect("preimage counts sum to the table size")
    }

    /// Number of binary levels `t` with `2^t = |V|`, if `|V|` is a power of two.
    pub fn levels(&self) -> Option<u32> {
        is_power_of_two(self.table.len()).then(|| self.table.len().trailing_zeros())
    }

    /// Input symbol for the level bits `u_1..u_t` (`u_1` most significant).
    pub fn map_bits(&self, bits: &[u8]) -> usize {
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        self.table[idx]
    }
}

/// Canonical table: symbols of `V` assigned to `x` in consecutive blocks,
/// ordered by `x`.
pub fn build_mapper(ra: &RationalApprox) -> Result<Mapper> {
    let table: Vec<usize> =
        ra.numerators.iter().enumerate().flat_map(|(x, &c)| std::iter::repeat_n(x, c as usize)).collect();
    if table.len() as u64 != ra.d_lcd {
        return Err(Error::arg("numerators do not sum to the common denominator"));
    }
    let kind = match ra.t {
        Some(t) => MapperKind::Binary { t },
        None => MapperKind::Qary,
    };
    Ok(Mapper { kind, table, input_size: ra.numerators.len() })
}

fn check_alphabet(ch: &Dmc, m: &Mapper) -> Result<()> {
    if ch.input_size() != m.input_size {
        return Err(Error::DimensionMismatch { expected: ch.input_size(), got: m.input_size });
    }
    Ok(())
}

/// `W'(y|v) = W(y|f(v))`.
pub fn induced_channel(ch: &Dmc, m: &Mapper) -> Result<Dmc> {
    check_alphabet(ch, m)?;
    Dmc::new(m.table.iter().map(|&x| ch.rows()[x].clone()).collect())
}

/// `W''_j(y, u_{1:j−1} | u_j)` for `u_j` given a decided prefix, summed over
/// the undecided suffix and scaled by `2^{−(t−1)}`.
fn level_likelihood(ch: &Dmc, m: &Mapper, t: u32, j: u32, prefix: usize, y: usize) -> Pair {
    let suffix_bits = t - j - 1;
    let scale = 0.5f64.powi(t as i32 - 1);
    let mut out = [0.0; 2];
    for (b, slot) in out.iter_mut().enumerate() {
        let base = ((prefix << 1) | b) << suffix_bits;
        *slot = scale * (0..1usize << suffix_bits).map(|s| ch.prob(y, m.table[base | s])).sum::<f64>();
    }
    out
}

/// `W''_1 .. W''_t`. Output `(y, u_{1:j−1})` of level `j` (1-based) has index
/// `prefix · |Y| + y` before unreachable outputs are pruned.
pub fn synthetic_channels(ch: &Dmc, m: &Mapper) -> Result<Vec<Dmc>> {
    check_alphabet(ch, m)?;
    let t = match m.kind {
        MapperKind::Binary { t } => t,
        MapperKind::Qary => return Err(Error::arg("synthetic channels need a binary mapper")),
    };
    let ny = ch.output_size();
    (0..t)
        .map(|j| {
            let prefixes = 1usize << j;
            let mut w = vec![vec![0.0; prefixes * ny]; 2];
            for prefix in 0..prefixes {
                for y in 0..ny {
                    let lik = level_likelihood(ch, m, t, j, prefix, y);
                    w[0][prefix * ny + y] = lik[0];
                    w[1][prefix * ny + y] = lik[1];
                }
            }
            // Row sums can drift by a few ulps after the 2^t-term sums.
            for row in &mut w {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            Dmc::new(w)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBounds {
    pub delta: f64,
    pub actual_gap: f64,
    /// `3δ log2|Y| + h2(δ)`.
    pub bound_y: f64,
    /// `7δ log2|X| + h2(δ) + h2(4δ)`.
    pub bound_x: f64,
}

impl PerturbationBounds {
    pub fn min_bound(&self) -> f64 {
        self.bound_y.min(self.bound_x)
    }

    /// Strict inequality, except that `δ = 0` only needs a zero gap.
    pub fn holds(&self) -> bool {
        self.actual_gap < self.min_bound() || (self.delta == 0.0 && self.actual_gap <= 1e-12)
    }
}

/// Gap `|I(p*) − I(p)|` against the two total-variation bounds.
pub fn mi_perturbation_bounds(ch: &Dmc, p_star: &InputDist, p: &InputDist) -> Result<PerturbationBounds> {
    if p_star.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p_star.len(), got: p.len() });
    }
    let delta = total_variation(p_star.as_slice(), p.as_slice());
    if delta >= 0.125 {
        return Err(Error::arg(format!("total variation {delta} is not below 1/8")));
    }
    let actual_gap = (mutual_information(ch, p_star)? - mutual_information(ch, p)?).abs();
    Ok(PerturbationBounds {
        delta,
        actual_gap,
        bound_y: 3.0 * delta * (ch.output_size() as f64).log2() + h2(delta),
        bound_x: 7.0 * delta * (ch.input_size() as f64).log2() + h2(delta) + h2(4.0 * delta),
    })
}

/// `(|H(p) − H(q)|, δ log2(|X|−1) + h2(δ))`.
pub fn entropy_diff_bound(p: &InputDist, q: &InputDist) -> Result<(f64, f64)> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let delta = total_variation(p.as_slice(), q.as_slice());
    if delta > 0.5 + 1e-12 {
        return Err(Error::arg(format!("total variation {delta} exceeds 1/2")));
    }
    let actual = (p.entropy() - q.entropy()).abs();
    let log_term = if p.len() > 1 { ((p.len() - 1) as f64).log2() } else { 0.0 };
    Ok((actual, delta * log_term + h2(delta)))
}

/// One uniform-input polar code per mapper level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GallagerCode {
    pub channel: Dmc,
    pub mapper: Mapper,
    pub n: usize,
    pub levels: Vec<PolarContext>,
    /// `I_s(W''_j)` per level.
    pub level_capacities: Vec<f64>,
}

impl GallagerCode {
    /// Build the level codes at information rate `backoff · I_s(W''_j)`.
    ///
    /// A q-ary table of size `2^r` is treated as `r` binary levels.
    pub fn build(ch: &Dmc, mapper: &Mapper, n: usize, backoff: f64, samples: usize, seed_value: u64) -> Result<Self> {
        check_alphabet(ch, mapper)?;
        if !(backoff > 0.0 && backoff <= 1.0) {
            return Err(Error::Config(format!(
                "backoff {backoff} would put a level code above its symmetric capacity"
            )));
        }
        let t = mapper.levels().ok_or(Error::NotPowerOfTwo(mapper.extended_size()))?;
        let binary = Mapper { kind: MapperKind::Binary { t }, ..mapper.clone() };
        let synthetic = synthetic_channels(ch, &binary)?;
        let mut levels = Vec::with_capacity(synthetic.len());
        let mut level_capacities = Vec::with_capacity(synthetic.len());
        for (j, wj) in synthetic.iter().enumerate() {
            let cap = mutual_information(wj, &InputDist::uniform(2))?;
            let sel = Selection::RateTargeted { info_rate: backoff * cap, lossless_delta: 1e-3 };
            levels.push(PolarContext::build(wj, 0.5, n, samples, seed::derive(seed_value, "gallager-level", j as u64), sel)?);
            level_capacities.push(cap);
        }
        Ok(GallagerCode { channel: ch.clone(), mapper: binary, n, levels, level_capacities })
    }

    pub fn message_len(&self) -> usize {
        self.levels.iter().map(|c| c.info_set.len()).sum()
    }

    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.n as f64
    }

    fn level_seed(shared_seed: u64, j: usize) -> u64 {
        seed::derive(shared_seed, "gallager-shared", j as u64)
    }

    /// Message bits are consumed level by level. Returns the channel word.
    pub fn encode(&self, message: &[u8], shared_seed: u64) -> Result<Vec<usize>> {
        if message.len() != self.message_len() {
            return Err(Error::DimensionMismatch { expected: self.message_len(), got: message.len() });
        }
        let mut offset = 0;
        let mut words = Vec::with_capacity(self.levels.len());
        for (j, ctx) in self.levels.iter().enumerate() {
            let k = ctx.info_set.len();
            words.push(ctx.encode(&message[offset..offset + k], Self::level_seed(shared_seed, j))?);
            offset += k;
        }
        Ok((0..self.n)
            .map(|i| {
                let bits: Vec<u8> = words.iter().map(|w| w[i]).collect();
                self.mapper.map_bits(&bits)
            })
            .collect())
    }

    /// Successive decoding; level `j` sees `y` and the re-encoded decisions
    /// of levels `1..j−1`. Errors at a level propagate to the next.
    pub fn decode(&self, y: &[usize], shared_seed: u64) -> Result<Vec<u8>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: y.len() });
        }
        if let Some(&bad) = y.iter().find(|&&s| s >= self.channel.output_size()) {
            return Err(Error::SymbolOutOfRange { symbol: bad, size: self.channel.output_size() });
        }
        let t = self.levels.len() as u32;
        let mut prefix = vec![0usize; self.n];
        let mut message = Vec::with_capacity(self.message_len());
        for (j, ctx) in self.levels.iter().enumerate() {
            let lik: Vec<Pair> = (0..self.n)
                .map(|i| level_likelihood(&self.channel, &self.mapper, t, j as u32, prefix[i], y[i]))
                .collect();
            let (msg, u) = ctx.decode_likelihoods(&lik, Self::level_seed(shared_seed, j))?;
            message.extend(msg);
            let word = crate::polar::polar_transform(&u)?;
            prefix.iter_mut().zip(&word).for_each(|(p, &b)| *p = (*p << 1) | usize::from(b));
        }
        Ok(message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> InputDist {
        InputDist::new(p.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_is_exact() {
        let ra = approximate(&dist(&[0.375, 0.375, 0.25]), 1e-6, false).unwrap();
        assert_eq!(ra.d_lcd, 8);
        assert_eq!(ra.numerators, vec![3, 3, 2]);
        assert_eq!(ra.tv_distance, 0.0);
        let rb = approximate(&dist(&[0.375, 0.375, 0.25]), 1e-6, true).unwrap();
        assert_eq!(rb.t, Some(3));
        let m = build_mapper(&rb).unwrap();
        assert_eq!(m.preimage_sizes(), vec![3, 3, 2]);
        assert_eq!(m.table, vec![0, 0, 0, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn one_third_needs_six_bits() {
        let ra = approximate(&dist(&[1.0 / 3.0, 2.0 / 3.0]), 0.01, true).unwrap();
        assert_eq!(ra.t, Some(6));
        assert_eq!(ra.numerators, vec![21, 43]);
        assert!((ra.tv_distance - 1.0 / 192.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_binary_is_identity() {
        let ra = approximate(&InputDist::uniform(2), 0.05, true).unwrap();
        assert_eq!(ra.t, Some(1));
        let m = build_mapper(&ra).unwrap();
        assert_eq!(m.table, vec![0, 1]);
        let ch = Dmc::bsc(0.2).unwrap();
        assert_eq!(induced_channel(&ch, &m).unwrap(), ch);
        let syn = synthetic_channels(&ch, &m).unwrap();
        assert_eq!(syn.len(), 1);
        assert_eq!(syn[0], ch);
    }

    #[test]
    fn delta_out_of_range() {
        let p = InputDist::uniform(2);
        assert!(approximate(&p, 0.0, false).is_err());
        assert!(approximate(&p, 0.125, false).is_err());
    }

    #[test]
    fn synthetic_output_sizes_and_chain_rule() {
        let ch = Dmc::new(vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.8, 0.1], vec![0.2, 0.2, 0.6]]).unwrap();
        let ra = approximate(&dist(&[0.375, 0.375, 0.25]), 1e-6, true).unwrap();
        let m = build_mapper(&ra).unwrap();
        let syn = synthetic_channels(&ch, &m).unwrap();
        let sizes: Vec<usize> = syn.iter().map(|w| w.output_size()).collect();
        assert_eq!(sizes, vec![3, 6, 12]);
        let total: f64 = syn.iter().map(|w| mutual_information(w, &InputDist::uniform(2)).unwrap()).sum();
        let direct = mutual_information(&ch, &ra.approx).unwrap();
        assert!((total - direct).abs() < 1e-9);
        let wprime = induced_channel(&ch, &m).unwrap();
        assert!((mutual_information(&wprime, &InputDist::uniform(8)).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn bounds_examples() {
        let ch = Dmc::bsc(0.11).unwrap();
        let b = mi_perturbation_bounds(&ch, &InputDist::uniform(2), &dist(&[0.45, 0.55])).unwrap();
        assert!((b.delta - 0.05).abs() < 1e-15);
        assert!((b.bound_y - (0.15 + h2(0.05))).abs() < 1e-12);
        assert!((b.bound_y - 0.4364).abs() < 1e-4);
        assert!(b.holds());
        let same = mi_perturbation_bounds(&ch, &InputDist::uniform(2), &InputDist::uniform(2)).unwrap();
        assert_eq!((same.actual_gap, same.bound_y), (0.0, 0.0));
        assert!(same.holds());
        assert!(mi_perturbation_bounds(&ch, &InputDist::uniform(2), &dist(&[0.3, 0.7])).is_err());

        let (actual, bound) = entropy_diff_bound(&dist(&[1.0, 0.0]), &InputDist::uniform(2)).unwrap();
        assert_eq!((actual, bound), (1.0, 1.0));
        assert_eq!(entropy_diff_bound(&InputDist::uniform(3), &InputDist::uniform(3)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn noiseless_round_trip() {
        let ch = Dmc::identity(3).unwrap();
        let ra = approximate(&dist(&[0.375, 0.375, 0.25]), 1e-6, true).unwrap();
        // The levels stay noisy on a noiseless channel because each one
        // averages over the bits below it, so the rate is kept well back.
        let code = GallagerCode::build(&ch, &build_mapper(&ra).unwrap(), 256, 0.5, 1000, 1).unwrap();
        assert!(code.message_len() > 0);
        for shift in 0..5 {
            let msg: Vec<u8> = (0..code.message_len()).map(|i| ((i + shift) % 3 == 0) as u8).collect();
            let x = code.encode(&msg, 5).unwrap();
            assert_eq!(code.decode(&x, 5).unwrap(), msg);
        }
    }

    #[test]
    fn rejects_rate_above_capacity() {
        let ch = Dmc::bsc(0.1).unwrap();
        let m = build_mapper(&approximate(&InputDist::uniform(2), 0.05, true).unwrap()).unwrap();
        assert!(matches!(GallagerCode::build(&ch, &m, 64, 1.2, 200, 0), Err(Error::Config(_))));
    }
}
