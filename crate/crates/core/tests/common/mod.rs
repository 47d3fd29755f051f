#![allow(dead_code)]

use asymcap::{Dmc, InputDist};
use rand::Rng;

/// Random row-stochastic matrix; about one entry in five is forced to zero.
pub fn random_dmc<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Dmc {
    loop {
        let w: Vec<Vec<f64>> = (0..inputs)
            .map(|_| {
                let raw: Vec<f64> =
                    (0..outputs).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() }).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            })
            .filter(|r: &Vec<f64>| r.iter().all(|v| v.is_finite()))
            .collect();
        if w.len() == inputs {
            if let Ok(ch) = Dmc::new(w) {
                return ch;
            }
        }
    }
}

pub fn random_binary_dmc<R: Rng>(rng: &mut R) -> Dmc {
    let outputs = rng.random_range(2..=8);
    random_dmc(rng, 2, outputs)
}

/// Random distribution with every mass at least `floor`.
pub fn random_dist<R: Rng>(rng: &mut R, size: usize, floor: f64) -> InputDist {
    let raw: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let spare = 1.0 - floor * size as f64;
    InputDist::new(raw.iter().map(|v| floor + spare * v / s).collect()).unwrap()
}

/// Move mass between random pairs of symbols until the total variation from
/// `p` reaches about `target`.
pub fn perturb<R: Rng>(rng: &mut R, p: &InputDist, target: f64) -> InputDist {
    let mut q = p.as_slice().to_vec();
    let mut moved = 0.0;
    for _ in 0..16 {
        let from = rng.random_range(0..q.len());
        let to = rng.random_range(0..q.len());
        if from == to {
            continue;
        }
        let amount = (target - moved).min(q[from]) * rng.random::<f64>();
        q[from] -= amount;
        q[to] += amount;
        moved += amount;
    }
    InputDist::new(q).unwrap()
}

pub fn bits<R: Rng>(rng: &mut R, n: usize, p_one: f64) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<f64>() < p_one)).collect()
}
