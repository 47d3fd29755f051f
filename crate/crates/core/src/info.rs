//! Entropy helpers. All quantities are in bits and use `0 log 0 = 0`.

/// `x log2 x` extended continuously to `x = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// Binary entropy function.
pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -xlog2x(x) - xlog2x(1.0 - x)
    }
}

/// Total variation distance `½ Σ |p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `log2(1 + e^{-y})`, stable for large `|y|` and defined at `±∞`.
pub fn log2_one_plus_exp_neg(y: f64) -> f64 {
    if y == f64::INFINITY {
        0.0
    } else if y == f64::NEG_INFINITY {
        f64::INFINITY
    } else if y >= 0.0 {
        (-y).exp().ln_1p() / std::f64::consts::LN_2
    } else {
        (-y + y.exp().ln_1p()) / std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(h2(0.0), 0.0);
        assert_eq!(h2(1.0), 0.0);
        assert!((h2(0.5) - 1.0).abs() < 1e-15);
        // -0.11 log2 0.11 - 0.89 log2 0.89
        assert!((h2(0.11) - 0.499_915_958_164_528).abs() < 1e-12);
    }

    #[test]
    fn softplus_matches_naive() {
        for &y in &[-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 40.0] {
            let naive = (1.0 + (-y as f64).exp()).log2();
            assert!((log2_one_plus_exp_neg(y) - naive).abs() < 1e-12, "y = {y}");
        }
        assert_eq!(log2_one_plus_exp_neg(f64::INFINITY), 0.0);
    }
}
