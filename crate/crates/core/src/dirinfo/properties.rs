//! Convexity, concavity and lower semicontinuity of directed information as
//! executable checks.

use super::directed_information_divergence;
use crate::error::{Error, Result};
use crate::measures::{
    build_joint, condition_backward, condition_forward, ensure_same_spec, mix_conditioned,
    refactor_to_backward_kernel, refactor_to_forward_kernel, BackwardKernel, ForwardKernel,
};

/// Slack allowed on every audited inequality.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// Path-level total variation below which a kernel sequence counts as converged.
pub const LSC_TV_THRESHOLD: f64 = 1e-6;

/// Values of directed information along a segment of kernels against the
/// chord between its endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityAudit {
    pub lambdas: Vec<f64>,
    /// Directed information at the path-level mixture for each weight.
    pub mixed: Vec<f64>,
    /// `lambda * DI(first) + (1 - lambda) * DI(second)`.
    pub chord: Vec<f64>,
    /// Largest signed violation of the audited inequality; negative is slack.
    pub max_violation: f64,
}

impl InequalityAudit {
    pub fn passed(&self) -> bool {
        self.max_violation <= PROPERTY_TOLERANCE
    }
}

fn di(p: &BackwardKernel, q: &ForwardKernel) -> Result<f64> {
    Ok(directed_information_divergence(p, q)?.nats())
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::Domain(format!("mixing weight {l} outside [0, 1]")));
    }
    Ok(())
}

/// `DI(P, lambda Q1 + (1 - lambda) Q2) <= lambda DI(P, Q1) + (1 - lambda) DI(P, Q2)`
/// with the mixture formed over whole-path conditional measures.
pub fn check_convexity_in_q(
    p: &BackwardKernel,
    q1: &ForwardKernel,
    q2: &ForwardKernel,
    lambdas: &[f64],
) -> Result<InequalityAudit> {
    ensure_same_spec(p.spec(), q1.spec())?;
    ensure_same_spec(p.spec(), q2.spec())?;
    check_lambdas(lambdas)?;
    let (d1, d2) = (di(p, q1)?, di(p, q2)?);
    let (c1, c2) = (condition_forward(q1), condition_forward(q2));
    let mut audit = InequalityAudit {
        lambdas: lambdas.to_vec(),
        mixed: Vec::with_capacity(lambdas.len()),
        chord: Vec::with_capacity(lambdas.len()),
        max_violation: f64::NEG_INFINITY,
    };
    for &l in lambdas {
        let q = refactor_to_forward_kernel(&mix_conditioned(&c1, &c2, l)?)?;
        let mixed = di(p, &q)?;
        let chord = l * d1 + (1.0 - l) * d2;
        audit.max_violation = audit.max_violation.max(mixed - chord);
        audit.mixed.push(mixed);
        audit.chord.push(chord);
    }
    Ok(audit)
}

/// `DI(lambda P1 + (1 - lambda) P2, Q) >= lambda DI(P1, Q) + (1 - lambda) DI(P2, Q)`
/// with the mixture formed over `P(. || y^{n-1})`.
pub fn check_concavity_in_p(
    q: &ForwardKernel,
    p1: &BackwardKernel,
    p2: &BackwardKernel,
    lambdas: &[f64],
) -> Result<InequalityAudit> {
    ensure_same_spec(q.spec(), p1.spec())?;
    ensure_same_spec(q.spec(), p2.spec())?;
    check_lambdas(lambdas)?;
    let (d1, d2) = (di(p1, q)?, di(p2, q)?);
    let (c1, c2) = (condition_backward(p1), condition_backward(p2));
    let mut audit = InequalityAudit {
        lambdas: lambdas.to_vec(),
        mixed: Vec::with_capacity(lambdas.len()),
        chord: Vec::with_capacity(lambdas.len()),
        max_violation: f64::NEG_INFINITY,
    };
    for &l in lambdas {
        let p = refactor_to_backward_kernel(&mix_conditioned(&c1, &c2, l)?)?;
        let mixed = di(&p, q)?;
        let chord = l * d1 + (1.0 - l) * d2;
        audit.max_violation = audit.max_violation.max(chord - mixed);
        audit.mixed.push(mixed);
        audit.chord.push(chord);
    }
    Ok(audit)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityAudit {
    pub limit_value: f64,
    pub values: Vec<f64>,
    /// Largest row-wise total variation between `Q_alpha(. || x^n)` and the limit.
    pub path_tv: Vec<f64>,
    /// Total variation between the joint laws.
    pub joint_tv: Vec<f64>,
    /// Continuity modulus evaluated at each `joint_tv`.
    pub modulus: Vec<f64>,
    /// Smallest value over the second half of the sequence.
    pub tail_min: f64,
    /// `max_alpha [DI(limit) - DI(alpha) - modulus(alpha)]`.
    pub max_violation: f64,
}

impl SemicontinuityAudit {
    pub fn passed(&self) -> bool {
        self.max_violation <= PROPERTY_TOLERANCE
    }
}

/// Audits `DI(P, Q_limit) <= liminf DI(P, Q_alpha)` along a sequence whose
/// path-level conditional measures converge to the limit in total variation.
///
/// A finite sequence has no liminf, so each term is held to
/// `DI(limit) <= DI(alpha) + w(t_alpha) + tol`, where `t_alpha` is the joint
/// total variation and `w` is an explicit modulus vanishing at zero (see
/// [`lsc_modulus`]). Together with `t_alpha -> 0` this certifies the liminf
/// inequality, including for limits on the boundary of the simplex.
pub fn check_lower_semicontinuity(
    p: &BackwardKernel,
    q_limit: &ForwardKernel,
    q_sequence: &[ForwardKernel],
) -> Result<SemicontinuityAudit> {
    ensure_same_spec(p.spec(), q_limit.spec())?;
    if q_sequence.is_empty() {
        return Err(Error::NonConvergentSequence {
            final_tv: f64::INFINITY,
            threshold: LSC_TV_THRESHOLD,
        });
    }
    let limit_path = condition_forward(q_limit);
    let limit_joint = build_joint(p, q_limit)?;
    let limit_value = di(p, q_limit)?;
    let mut path_tv = Vec::with_capacity(q_sequence.len());
    for q in q_sequence {
        ensure_same_spec(p.spec(), q.spec())?;
        path_tv.push(condition_forward(q).max_total_variation(&limit_path)?);
    }
    let final_tv = *path_tv.last().expect("nonempty");
    let monotone = path_tv.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    if !monotone || final_tv >= LSC_TV_THRESHOLD {
        return Err(Error::NonConvergentSequence {
            final_tv,
            threshold: LSC_TV_THRESHOLD,
        });
    }

    let mut audit = SemicontinuityAudit {
        limit_value,
        values: Vec::with_capacity(q_sequence.len()),
        path_tv,
        joint_tv: Vec::with_capacity(q_sequence.len()),
        modulus: Vec::with_capacity(q_sequence.len()),
        tail_min: f64::INFINITY,
        max_violation: f64::NEG_INFINITY,
    };
    for q in q_sequence {
        let joint = build_joint(p, q)?;
        let t = joint.total_variation(&limit_joint)?;
        let w = lsc_modulus(p, t);
        let v = di(p, q)?;
        audit.max_violation = audit.max_violation.max(limit_value - v - w);
        audit.values.push(v);
        audit.joint_tv.push(t);
        audit.modulus.push(w);
    }
    let half = audit.values.len() / 2;
    audit.tail_min = audit.values[half..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(audit)
}

/// Bound on `|DI(P, Q) - DI(P, Q')|` in terms of the total variation `t`
/// between the two joint laws built with the same input kernel `P`.
///
/// Writing `DI = H(nu) - H(J) - E_J[log P(x^n || y^{n-1})]`, each entropy moves
/// by at most `t log(d - 1) + h(min(t, 1/2))` on a space of `d` atoms, and the
/// last term by at most `2 t max |log P|` over the cells where `P > 0`.
pub fn lsc_modulus(p: &BackwardKernel, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let spec = p.spec();
    let entropy_shift = |atoms: usize| {
        let tt = t.min(0.5);
        let h = -(tt * tt.ln()) - if tt < 1.0 { (1.0 - tt) * (1.0 - tt).ln() } else { 0.0 };
        t * ((atoms.max(2) - 1) as f64).ln() + h
    };
    let path_input = crate::measures::causal_product(spec, Some(p), None);
    let log_range = path_input
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| -w.ln())
        .fold(0.0, f64::max);
    entropy_shift(spec.y_paths()) + entropy_shift(spec.cells()) + 2.0 * t * log_range
}
