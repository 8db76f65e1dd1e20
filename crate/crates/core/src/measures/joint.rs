//! Joint measures on `X_{0,n} x Y_{0,n}` and the constructions built from
//! the two kernel families: the joint law, its marginals, the product
//! measures against a marginal, and the inverse (kernel extraction).

use super::alphabet::AlphabetSpec;
use super::kernel::{BackwardKernel, ForwardKernel};
use super::pmf::{check_probability_row, total_variation, Pmf, PMF_TOLERANCE};
use crate::error::{Error, Result};

/// A probability table over the interleaved cells `(x_0, y_0, ..., x_n, y_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMeasure {
    spec: AlphabetSpec,
    weights: Vec<f64>,
}

impl JointMeasure {
    pub fn new(spec: AlphabetSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != spec.cells() {
            return Err(Error::SpecMismatch(format!(
                "joint table has {} cells, alphabet has {}",
                weights.len(),
                spec.cells()
            )));
        }
        check_probability_row(&weights, PMF_TOLERANCE)?;
        Ok(Self { spec, weights })
    }

    pub(crate) fn from_weights_unchecked(spec: AlphabetSpec, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), spec.cells());
        Self { spec, weights }
    }

    pub fn spec(&self) -> &AlphabetSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x_path: usize, y_path: usize) -> f64 {
        self.weights[self.spec.cell_of_paths(x_path, y_path)]
    }

    pub fn to_pmf(&self) -> Pmf {
        Pmf::from_sums(self.weights.clone())
    }

    pub fn total_variation(&self, other: &JointMeasure) -> Result<f64> {
        ensure_same_spec(&self.spec, &other.spec)?;
        Ok(total_variation(&self.weights, &other.weights))
    }

    /// Masses of every `k`-digit prefix, for `k = 0..=2(n+1)`.
    pub(crate) fn prefix_marginals(&self) -> Vec<Vec<f64>> {
        prefix_marginals(&self.spec, &self.weights)
    }
}

pub(crate) fn ensure_same_spec(a: &AlphabetSpec, b: &AlphabetSpec) -> Result<()> {
    if a != b {
        return Err(Error::SpecMismatch(format!(
            "alphabets differ: X {:?} / Y {:?} vs X {:?} / Y {:?}",
            a.x_sizes(),
            a.y_sizes(),
            b.x_sizes(),
            b.y_sizes()
        )));
    }
    Ok(())
}

/// `out[k][h]` is the total weight of cells whose first `k` digits encode `h`.
pub(crate) fn prefix_marginals(spec: &AlphabetSpec, weights: &[f64]) -> Vec<Vec<f64>> {
    let digits = spec.digits();
    let mut out = vec![Vec::new(); digits + 1];
    out[digits] = weights.to_vec();
    for k in (0..digits).rev() {
        let r = spec.radix(k);
        out[k] = out[k + 1].chunks(r).map(|c| c.iter().sum()).collect();
    }
    out
}

/// Product of the per-step factors along every cell; a missing family
/// contributes factor one.
pub(crate) fn causal_product(
    spec: &AlphabetSpec,
    p: Option<&BackwardKernel>,
    q: Option<&ForwardKernel>,
) -> Vec<f64> {
    let mut level = vec![1.0];
    for k in 0..spec.digits() {
        let r = spec.radix(k);
        let i = k / 2;
        let table: Option<&[f64]> = if k % 2 == 0 {
            p.map(|p| p.step(i))
        } else {
            q.map(|q| q.step(i))
        };
        let mut next = Vec::with_capacity(level.len() * r);
        match table {
            Some(t) => {
                for (h, &w) in level.iter().enumerate() {
                    next.extend(t[h * r..(h + 1) * r].iter().map(|&f| w * f));
                }
            }
            None => {
                for &w in &level {
                    next.extend(std::iter::repeat_n(w, r));
                }
            }
        }
        level = next;
    }
    level
}

/// The joint law of `(X^n, Y^n)` generated by running the input kernel and
/// the channel alternately:
/// `weight(x^n, y^n) = prod_i p_i(x_i | x^{i-1}, y^{i-1}) q_i(y_i | y^{i-1}, x^i)`.
pub fn build_joint(p: &BackwardKernel, q: &ForwardKernel) -> Result<JointMeasure> {
    ensure_same_spec(p.spec(), q.spec())?;
    let weights = causal_product(p.spec(), Some(p), Some(q));
    Ok(JointMeasure::from_weights_unchecked(p.spec().clone(), weights))
}

/// Input-path marginal `mu(x^n)`, indexed by x path.
pub fn marginal_x(j: &JointMeasure) -> Pmf {
    let spec = j.spec();
    let mut mu = vec![0.0; spec.x_paths()];
    for (cell, &w) in j.weights().iter().enumerate() {
        mu[spec.x_path(cell)] += w;
    }
    Pmf::from_sums(mu)
}

/// Output-path marginal `nu(y^n)`, indexed by y path.
pub fn marginal_y(j: &JointMeasure) -> Pmf {
    let spec = j.spec();
    let mut nu = vec![0.0; spec.y_paths()];
    for (cell, &w) in j.weights().iter().enumerate() {
        nu[spec.y_path(cell)] += w;
    }
    Pmf::from_sums(nu)
}

/// The measure `nu(y^n) * prod_i p_i(x_i | x^{i-1}, y^{i-1})`: the input
/// kernel run against outputs drawn from `nu` independently of the inputs.
pub fn product_pi_forward(p: &BackwardKernel, nu: &Pmf) -> Result<JointMeasure> {
    let spec = p.spec();
    if nu.len() != spec.y_paths() {
        return Err(Error::SpecMismatch(format!(
            "output marginal has {} atoms, Y paths number {}",
            nu.len(),
            spec.y_paths()
        )));
    }
    let mut weights = causal_product(spec, Some(p), None);
    for (cell, w) in weights.iter_mut().enumerate() {
        *w *= nu[spec.y_path(cell)];
    }
    Ok(JointMeasure::from_weights_unchecked(spec.clone(), weights))
}

/// The measure `mu(x^n) * prod_i q_i(y_i | y^{i-1}, x^i)`.
pub fn product_pi_backward(mu: &Pmf, q: &ForwardKernel) -> Result<JointMeasure> {
    let spec = q.spec();
    if mu.len() != spec.x_paths() {
        return Err(Error::SpecMismatch(format!(
            "input marginal has {} atoms, X paths number {}",
            mu.len(),
            spec.x_paths()
        )));
    }
    let mut weights = causal_product(spec, None, Some(q));
    for (cell, w) in weights.iter_mut().enumerate() {
        *w *= mu[spec.x_path(cell)];
    }
    Ok(JointMeasure::from_weights_unchecked(spec.clone(), weights))
}

/// Successive conditionals of a prefix-mass table. Row `h` of digit `k` is
/// `masses[k+1][h*r..] / masses[k][h]`, uniform where `masses[k][h] = 0`.
fn conditional_rows(spec: &AlphabetSpec, masses: &[Vec<f64>], k: usize) -> Vec<f64> {
    let r = spec.radix(k);
    let mut table = Vec::with_capacity(masses[k + 1].len());
    for (h, &total) in masses[k].iter().enumerate() {
        let children = &masses[k + 1][h * r..(h + 1) * r];
        if total > 0.0 {
            table.extend(children.iter().map(|&c| c / total));
        } else {
            table.extend(std::iter::repeat_n(1.0 / r as f64, r));
        }
    }
    table
}

/// Recovers `q_i(y_i | y^{i-1}, x^i)` from a joint; uniform on null histories.
pub fn extract_forward_family(j: &JointMeasure) -> ForwardKernel {
    let spec = j.spec();
    let masses = j.prefix_marginals();
    let steps = (0..spec.steps())
        .map(|i| conditional_rows(spec, &masses, 2 * i + 1))
        .collect();
    ForwardKernel::from_steps_unchecked(spec.clone(), steps)
}

/// Recovers `p_i(x_i | x^{i-1}, y^{i-1})` from a joint; uniform on null histories.
pub fn extract_backward_family(j: &JointMeasure) -> BackwardKernel {
    let spec = j.spec();
    let masses = j.prefix_marginals();
    let steps = (0..spec.steps())
        .map(|i| conditional_rows(spec, &masses, 2 * i))
        .collect();
    BackwardKernel::from_steps_unchecked(spec.clone(), steps)
}

/// Product measure `mu x nu` laid out on the interleaved cells.
pub fn independent_product(spec: &AlphabetSpec, mu: &Pmf, nu: &Pmf) -> Result<JointMeasure> {
    if mu.len() != spec.x_paths() || nu.len() != spec.y_paths() {
        return Err(Error::SpecMismatch("marginals do not match the alphabet".into()));
    }
    let weights = (0..spec.cells())
        .map(|cell| mu[spec.x_path(cell)] * nu[spec.y_path(cell)])
        .collect();
    Ok(JointMeasure::from_weights_unchecked(spec.clone(), weights))
}
