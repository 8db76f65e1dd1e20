//! Random alphabets and kernels for the randomized audits.

use rand::Rng;

use crate::measures::{AlphabetSpec, BackwardKernel, ForwardKernel};

/// A flat Dirichlet(1) draw of length `k`. With probability `sparsity` each
/// entry is zeroed; at least one entry always survives.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, k: usize, sparsity: f64) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..k)
            .map(|_| {
                if sparsity > 0.0 && rng.random_bool(sparsity) {
                    0.0
                } else {
                    // -ln(U) with U in (0, 1]
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|v| *v /= total);
            return w;
        }
    }
}

/// Horizon in `0..=max_horizon`, each alphabet size in `1..=max_size`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, max_horizon: usize, max_size: usize) -> AlphabetSpec {
    let steps = rng.random_range(0..=max_horizon) + 1;
    let xs = (0..steps).map(|_| rng.random_range(1..=max_size)).collect();
    let ys = (0..steps).map(|_| rng.random_range(1..=max_size)).collect();
    AlphabetSpec::new(xs, ys).expect("small random alphabet")
}

fn random_steps<R: Rng + ?Sized>(
    rng: &mut R,
    histories: impl Fn(usize) -> usize,
    widths: &[usize],
    sparsity: f64,
) -> Vec<Vec<f64>> {
    widths
        .iter()
        .enumerate()
        .map(|(i, &w)| (0..histories(i)).flat_map(|_| random_pmf(rng, w, sparsity)).collect())
        .collect()
}

pub fn random_backward<R: Rng + ?Sized>(rng: &mut R, spec: &AlphabetSpec, sparsity: f64) -> BackwardKernel {
    let steps = random_steps(rng, |i| spec.backward_histories(i), spec.x_sizes(), sparsity);
    BackwardKernel::new(spec.clone(), steps).expect("normalized rows")
}

pub fn random_forward<R: Rng + ?Sized>(rng: &mut R, spec: &AlphabetSpec, sparsity: f64) -> ForwardKernel {
    let steps = random_steps(rng, |i| spec.forward_histories(i), spec.y_sizes(), sparsity);
    ForwardKernel::new(spec.clone(), steps).expect("normalized rows")
}

/// An input kernel whose rows depend on past inputs only.
pub fn random_no_feedback<R: Rng + ?Sized>(rng: &mut R, spec: &AlphabetSpec, sparsity: f64) -> BackwardKernel {
    // one row per x^{i-1}, then broadcast across output histories
    let rows: Vec<Vec<Vec<f64>>> = (0..spec.steps())
        .map(|i| {
            let count: usize = spec.x_sizes()[..i].iter().product();
            (0..count).map(|_| random_pmf(rng, spec.x_size(i), sparsity)).collect()
        })
        .collect();
    BackwardKernel::without_feedback(spec, |i, xs| {
        let h = crate::measures::encode_path(&spec.x_sizes()[..i], xs);
        rows[i][h].clone()
    })
    .expect("normalized rows")
}

/// A channel whose every row is a point mass.
pub fn random_deterministic_forward<R: Rng + ?Sized>(rng: &mut R, spec: &AlphabetSpec) -> ForwardKernel {
    let steps = (0..spec.steps())
        .map(|i| {
            let w = spec.y_size(i);
            (0..spec.forward_histories(i))
                .flat_map(|_| {
                    let mut row = vec![0.0; w];
                    row[rng.random_range(0..w)] = 1.0;
                    row
                })
                .collect()
        })
        .collect();
    ForwardKernel::new(spec.clone(), steps).expect("point masses")
}
