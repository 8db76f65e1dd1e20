//! Directed information `I(X^n -> Y^n)` and the executable property suites.
//!
//! Two independent routes are provided. The sum route adds the conditional
//! mutual informations `I(X^i; Y_i | Y^{i-1})`, each evaluated by explicit
//! summation over prefix marginals of the joint law. The divergence route
//! evaluates `D(P (x) Q || P (x) nu)`: the relative entropy of the joint law
//! from the input kernel run against the output marginal. The routes share
//! only [`build_joint`].

pub mod audit;
mod properties;

pub use properties::{
    check_concavity_in_p, check_convexity_in_q, check_lower_semicontinuity, lsc_modulus,
    InequalityAudit, SemicontinuityAudit, LSC_TV_THRESHOLD, PROPERTY_TOLERANCE,
};

use crate::error::Result;
use crate::measures::{
    build_joint, independent_product, kl_divergence, marginal_x, marginal_y, prefix_marginals,
    product_pi_forward, BackwardKernel, ForwardKernel, InfoValue, JointMeasure,
};

/// Largest tolerated disagreement between the two routes.
pub const DUAL_FORMULA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedInfoReport {
    /// Sum of the per-step conditional mutual informations.
    pub sum_form: InfoValue,
    /// Relative entropy of the joint law from the input kernel times the output marginal.
    pub divergence_form: InfoValue,
    /// `I(X^i; Y_i | Y^{i-1})` for `i = 0..=n`.
    pub per_step_terms: Vec<InfoValue>,
    /// `sum_form / (n + 1)`, when finite.
    pub normalized: Option<f64>,
}

impl DirectedInfoReport {
    /// Absolute gap between the two routes; zero when both are infinite.
    pub fn formula_gap(&self) -> f64 {
        match (self.sum_form.is_finite(), self.divergence_form.is_finite()) {
            (true, true) => (self.sum_form.nats() - self.divergence_form.nats()).abs(),
            (false, false) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// Evaluates both routes and the per-step decomposition.
pub fn directed_information_sum(p: &BackwardKernel, q: &ForwardKernel) -> Result<DirectedInfoReport> {
    let joint = build_joint(p, q)?;
    let per_step_terms = conditional_mi_terms(&joint);
    let sum_form: InfoValue = per_step_terms.iter().copied().sum();
    let divergence_form = divergence_from_joint(p, &joint)?;
    let steps = p.spec().steps() as f64;
    Ok(DirectedInfoReport {
        sum_form,
        divergence_form,
        normalized: sum_form.is_finite().then(|| sum_form.nats() / steps),
        per_step_terms,
    })
}

/// `D(P (x) Q || P (x) nu)` with `nu` the output marginal of the joint law.
pub fn directed_information_divergence(p: &BackwardKernel, q: &ForwardKernel) -> Result<InfoValue> {
    let joint = build_joint(p, q)?;
    divergence_from_joint(p, &joint)
}

fn divergence_from_joint(p: &BackwardKernel, joint: &JointMeasure) -> Result<InfoValue> {
    let pi = product_pi_forward(p, &marginal_y(joint))?;
    kl_divergence(&joint.to_pmf(), &pi.to_pmf())
}

/// `I(X^n; Y^n)`: divergence of the joint from the product of its marginals.
pub fn mutual_information(j: &JointMeasure) -> InfoValue {
    let product = independent_product(j.spec(), &marginal_x(j), &marginal_y(j))
        .expect("marginals of a joint match its alphabet");
    kl_divergence(&j.to_pmf(), &product.to_pmf()).expect("same cell count")
}

/// `I(X^i; Y_i | Y^{i-1})` for every step, from prefix marginals of the joint:
///
/// `sum P(x^i, y^i) log [P(x^i, y^i) P(y^{i-1}) / (P(x^i, y^{i-1}) P(y^i))]`.
pub fn conditional_mi_terms(j: &JointMeasure) -> Vec<InfoValue> {
    let spec = j.spec();
    let masses = prefix_marginals(spec, j.weights());
    let mut y_prev = vec![1.0];
    let mut terms = Vec::with_capacity(spec.steps());
    for i in 0..spec.steps() {
        let k = 2 * i + 2;
        let ry = spec.radix(k - 1);
        // output marginal of y^i
        let mut y_cur = vec![0.0; y_prev.len() * ry];
        let y_index: Vec<usize> = (0..masses[k].len()).map(|h| spec.prefix_y_path(k, h)).collect();
        for (h, &m) in masses[k].iter().enumerate() {
            y_cur[y_index[h]] += m;
        }
        let mut acc = 0.0;
        for (h, &m) in masses[k].iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let parent = masses[k - 1][h / ry];
            let yi = y_index[h];
            acc += m * ((m * y_prev[yi / ry]) / (parent * y_cur[yi])).ln();
        }
        terms.push(InfoValue::from_nats(acc));
        y_prev = y_cur;
    }
    terms
}
