//! Discrete L-densities of binary-input channels.
//!
//! Bit `0` is the `+1` symbol and bit `1` is `−1`. A density is a finite list
//! of `(llr, mass)` atoms; `±∞` are ordinary atom positions, used when an
//! output is reachable from one input only.
//!
//! The prior density of a channel is the law of `ln W(y|+1)/W(y|−1)` given
//! the transmitted symbol; the posterior density adds the input prior,
//! `ln p(+1|y)/p(−1|y)`. Mixing the `+1` density with the reflected `−1`
//! density gives a symmetric density, `a(y) = e^y a(−y)`, whose capacity
//! functional is the symmetric capacity (prior case) and whose entropy
//! functional is `H(X|Y)` (posterior case).

use serde::{Deserialize, Serialize};

use crate::dmc::{Dmc, InputDist};
use crate::error::{Error, Result};
use crate::info::log2_one_plus_exp_neg;

/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Functionals reject densities that fail [`check_symmetry`] at this tolerance.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub llr: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Prior,
    /// Posterior density under input law `(1 − alpha, alpha)`.
    Posterior { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLDensity {
    atoms: Vec<Atom>,
    kind: DensityKind,
}

fn same_llr(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a == b
    } else {
        (a - b).abs() <= MERGE_TOL * (1.0 + a.abs().max(b.abs()))
    }
}

impl DiscreteLDensity {
    /// Sort, merge equal positions and drop zero-mass atoms.
    pub fn from_atoms(mut atoms: Vec<Atom>, kind: DensityKind) -> Result<Self> {
        if atoms.iter().any(|a| a.llr.is_nan() || !(a.mass >= 0.0)) {
            return Err(Error::arg("atoms need a non-NaN position and nonnegative mass"));
        }
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|a, b| a.llr.total_cmp(&b.llr));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if same_llr(last.llr, a.llr) => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let total: f64 = merged.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("L-density mass sums to {total}")));
        }
        Ok(DiscreteLDensity { atoms: merged, kind })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    /// Mass at position `llr` (0 if there is no atom there).
    pub fn mass_at(&self, llr: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.llr < llr && !same_llr(a.llr, llr));
        match self.atoms.get(idx) {
            Some(a) if same_llr(a.llr, llr) => a.mass,
            _ => 0.0,
        }
    }

    /// `Σ mass · log2(1 + e^{−llr})`, without any symmetry requirement.
    pub fn entropy_integral(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * log2_one_plus_exp_neg(a.llr)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }
}

fn require_binary(ch: &Dmc) -> Result<()> {
    if ch.is_binary() {
        Ok(())
    } else {
        Err(Error::NotBinary(ch.input_size()))
    }
}

/// LLR of one output with an additive prior offset.
fn llr(w_plus: f64, w_minus: f64, offset: f64) -> f64 {
    match (w_plus > 0.0, w_minus > 0.0) {
        (true, true) => (w_plus / w_minus).ln() + offset,
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => unreachable!("pruned output"),
    }
}

fn conditional_densities(ch: &Dmc, offset: f64, kind: DensityKind) -> Result<(DiscreteLDensity, DiscreteLDensity)> {
    require_binary(ch)?;
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for y in 0..ch.output_size() {
        let [w_plus, w_minus] = ch.likelihoods(y);
        let l = llr(w_plus, w_minus, offset);
        plus.push(Atom { llr: l, mass: w_plus });
        minus.push(Atom { llr: l, mass: w_minus });
    }
    Ok((DiscreteLDensity::from_atoms(plus, kind)?, DiscreteLDensity::from_atoms(minus, kind)?))
}

/// Densities of `L(Y) = ln W(y|+1)/W(y|−1)` given `X = +1` and `X = −1`.
pub fn prior_ldensities(ch: &Dmc) -> Result<(DiscreteLDensity, DiscreteLDensity)> {
    conditional_densities(ch, 0.0, DensityKind::Prior)
}

/// Densities of the posterior LLR `ln p(+1|y)/p(−1|y)` given each input.
///
/// `p[0]` is the probability of bit 0 (the `+1` symbol), so every prior atom
/// moves by `ln(p[0]/p[1])`.
pub fn posterior_ldensities(ch: &Dmc, p: &InputDist) -> Result<(DiscreteLDensity, DiscreteLDensity)> {
    require_binary(ch)?;
    if p.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
    }
    if p[0] <= 0.0 || p[1] <= 0.0 {
        return Err(Error::InvalidDistribution("posterior densities need a nondegenerate prior".into()));
    }
    let offset = (p[0] / p[1]).ln();
    conditional_densities(ch, offset, DensityKind::Posterior { alpha: p[1] })
}

fn mix_reflected(plus: &DiscreteLDensity, minus: &DiscreteLDensity, w_plus: f64, w_minus: f64, kind: DensityKind) -> Result<DiscreteLDensity> {
    let atoms = plus
        .atoms
        .iter()
        .map(|a| Atom { llr: a.llr, mass: w_plus * a.mass })
        .chain(minus.atoms.iter().map(|a| Atom { llr: -a.llr, mass: w_minus * a.mass }))
        .collect();
    DiscreteLDensity::from_atoms(atoms, kind)
}

/// `a^s(y) = ½ (a⁻(−y) + a⁺(y))`.
pub fn symmetrize_prior(aplus: &DiscreteLDensity, aminus: &DiscreteLDensity) -> Result<DiscreteLDensity> {
    if aplus.kind != DensityKind::Prior || aminus.kind != DensityKind::Prior {
        return Err(Error::arg("symmetrize_prior expects prior densities"));
    }
    mix_reflected(aplus, aminus, 0.5, 0.5, DensityKind::Prior)
}

/// `a_p^s(y) = α a_p⁻(−y) + (1 − α) a_p⁺(y)` with `α = p[1]`.
pub fn symmetrize_posterior(apnplus: &DiscreteLDensity, apminus: &DiscreteLDensity, p: &InputDist) -> Result<DiscreteLDensity> {
    if p.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
    }
    let alpha = p[1];
    for d in [apnplus, apminus] {
        match d.kind {
            DensityKind::Posterior { alpha: a } if (a - alpha).abs() <= 1e-12 => {}
            DensityKind::Posterior { alpha: a } => {
                return Err(Error::arg(format!("density built for alpha = {a}, symmetrized with alpha = {alpha}")))
            }
            DensityKind::Prior => return Err(Error::arg("symmetrize_posterior expects posterior densities")),
        }
    }
    mix_reflected(apnplus, apminus, 1.0 - alpha, alpha, DensityKind::Posterior { alpha })
}

/// `a(y) = e^y a(−y)` atom by atom, within `tol` on masses.
///
/// An atom at `+∞` pairs with zero mass at `−∞`; any mass at `−∞` is a
/// violation.
pub fn check_symmetry(d: &DiscreteLDensity, tol: f64) -> bool {
    d.atoms.iter().all(|a| {
        if a.llr == f64::INFINITY {
            true
        } else if a.llr == f64::NEG_INFINITY {
            a.mass <= tol
        } else {
            (d.mass_at(-a.llr) - a.mass * (-a.llr).exp()).abs() <= tol
        }
    })
}

/// `w_plus · plus(y) = e^y · w_minus · minus(y)` at every atom position.
///
/// With unit weights this is the prior identity `a⁺(y) = e^y a⁻(y)`; with
/// `(1 − α, α)` it is the posterior identity.
pub fn check_tilt(plus: &DiscreteLDensity, minus: &DiscreteLDensity, w_plus: f64, w_minus: f64, tol: f64) -> bool {
    let positions = plus.atoms.iter().chain(&minus.atoms).map(|a| a.llr);
    positions.into_iter().all(|y| {
        let lhs = w_plus * plus.mass_at(y);
        let rhs_mass = w_minus * minus.mass_at(y);
        if y == f64::INFINITY {
            rhs_mass <= tol
        } else if y == f64::NEG_INFINITY {
            lhs <= tol
        } else {
            (lhs - y.exp() * rhs_mass).abs() <= tol * (1.0 + y.exp())
        }
    })
}

fn require_symmetric(d: &DiscreteLDensity) -> Result<()> {
    if check_symmetry(d, SYMMETRY_TOL) {
        Ok(())
    } else {
        Err(Error::AsymmetricDensity(SYMMETRY_TOL))
    }
}

/// `Σ mass · (1 − log2(1 + e^{−llr}))`: the capacity of the symmetric channel
/// with density `d`.
pub fn capacity_functional(d: &DiscreteLDensity) -> Result<f64> {
    require_symmetric(d)?;
    Ok(d.total_mass() - d.entropy_integral())
}

/// `Σ mass · log2(1 + e^{−llr})` on a symmetrized posterior density.
pub fn conditional_entropy_functional(d: &DiscreteLDensity) -> Result<f64> {
    if d.kind == DensityKind::Prior {
        return Err(Error::arg("conditional entropy functional expects a posterior density"));
    }
    require_symmetric(d)?;
    Ok(d.entropy_integral())
}
