//! Reference computations written against the kernel accessors only.

#![allow(dead_code)]

use std::collections::HashMap;

use dirinfo_core::measures::{decode_path, AlphabetSpec, BackwardKernel, ForwardKernel};

/// Every `(x^n, y^n)` pair as digit vectors.
pub fn all_paths(spec: &AlphabetSpec) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for xp in 0..spec.x_paths() {
        for yp in 0..spec.y_paths() {
            out.push((decode_path(spec.x_sizes(), xp), decode_path(spec.y_sizes(), yp)));
        }
    }
    out
}

/// `prod_i p_i(x_i | x^{i-1}, y^{i-1}) q_i(y_i | y^{i-1}, x^i)` evaluated term by term.
pub fn product_formula(p: &BackwardKernel, q: &ForwardKernel, xs: &[usize], ys: &[usize]) -> f64 {
    (0..xs.len())
        .map(|i| p.prob(i, &xs[..i], &ys[..i], xs[i]) * q.prob(i, &xs[..=i], &ys[..i], ys[i]))
        .product()
}

pub fn input_factor(p: &BackwardKernel, xs: &[usize], ys: &[usize]) -> f64 {
    (0..xs.len()).map(|i| p.prob(i, &xs[..i], &ys[..i], xs[i])).product()
}

pub fn channel_factor(q: &ForwardKernel, xs: &[usize], ys: &[usize]) -> f64 {
    (0..xs.len()).map(|i| q.prob(i, &xs[..=i], &ys[..i], ys[i])).product()
}

pub type Joint = HashMap<(Vec<usize>, Vec<usize>), f64>;

pub fn oracle_joint(p: &BackwardKernel, q: &ForwardKernel) -> Joint {
    all_paths(p.spec())
        .into_iter()
        .map(|(xs, ys)| {
            let w = product_formula(p, q, &xs, &ys);
            ((xs, ys), w)
        })
        .collect()
}

fn entropy_of<K: std::hash::Hash + Eq>(j: &Joint, key: impl Fn(&[usize], &[usize]) -> K) -> f64 {
    let mut m: HashMap<K, f64> = HashMap::new();
    for ((xs, ys), &w) in j {
        *m.entry(key(xs, ys)).or_default() += w;
    }
    m.values().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}

/// `sum_i [H(Y^i) - H(Y^{i-1}) - H(X^i, Y^i) + H(X^i, Y^{i-1})]`, the chain
/// of conditional mutual informations written with joint entropies.
pub fn oracle_directed_information(p: &BackwardKernel, q: &ForwardKernel) -> f64 {
    let j = oracle_joint(p, q);
    (0..p.spec().steps())
        .map(|i| {
            entropy_of(&j, |_, ys| ys[..=i].to_vec()) - entropy_of(&j, |_, ys| ys[..i].to_vec())
                - entropy_of(&j, |xs, ys| (xs[..=i].to_vec(), ys[..=i].to_vec()))
                + entropy_of(&j, |xs, ys| (xs[..=i].to_vec(), ys[..i].to_vec()))
        })
        .sum()
}

/// `H(X^n) + H(Y^n) - H(X^n, Y^n)`.
pub fn oracle_mutual_information(p: &BackwardKernel, q: &ForwardKernel) -> f64 {
    let j = oracle_joint(p, q);
    entropy_of(&j, |xs, _| xs.to_vec()) + entropy_of(&j, |_, ys| ys.to_vec())
        - entropy_of(&j, |xs, ys| (xs.to_vec(), ys.to_vec()))
}
