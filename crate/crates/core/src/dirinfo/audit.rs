//! Seeded randomized audits of the directed-information properties.
//!
//! Instances are drawn sequentially from a ChaCha stream, then scored in
//! parallel; results are joined in draw order, so a seed fixes the outcome.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    check_concavity_in_p, check_convexity_in_q, check_lower_semicontinuity, directed_information_sum,
    mutual_information, DUAL_FORMULA_TOLERANCE, PROPERTY_TOLERANCE,
};
use crate::error::Result;
use crate::measures::{
    build_joint, condition_forward, mix_conditioned, refactor_to_forward_kernel, AlphabetSpec,
    BackwardKernel, ForwardKernel,
};
use crate::random::{
    random_backward, random_deterministic_forward, random_forward, random_no_feedback, random_spec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    DualFormula,
    Convexity,
    Concavity,
    LowerSemicontinuity,
    NoFeedback,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::DualFormula,
        Property::Convexity,
        Property::Concavity,
        Property::LowerSemicontinuity,
        Property::NoFeedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::DualFormula => "dual-formula",
            Property::Convexity => "convexity",
            Property::Concavity => "concavity",
            Property::LowerSemicontinuity => "lsc",
            Property::NoFeedback => "no-feedback",
        }
    }

    pub fn parse(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }

    fn threshold(self) -> f64 {
        match self {
            Property::DualFormula => DUAL_FORMULA_TOLERANCE,
            _ => PROPERTY_TOLERANCE,
        }
    }

    fn salt(self) -> u64 {
        match self {
            Property::DualFormula => 0x9e37_79b9_7f4a_7c15,
            Property::Convexity => 0xbf58_476d_1ce4_e5b9,
            Property::Concavity => 0x94d0_49bb_1331_11eb,
            Property::LowerSemicontinuity => 0x2545_f491_4f6c_dd1d,
            Property::NoFeedback => 0x1405_7b7e_f767_814f,
        }
    }
}

/// Instance counts of each audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditPlan {
    pub seed: u64,
    pub dual_formula_pairs: usize,
    pub triples: usize,
    pub lambda_points: usize,
    pub lsc_sequences: usize,
    /// Drawn once without feedback and once with feedback.
    pub no_feedback_instances: usize,
    /// Replaces the per-property violation threshold when set.
    pub threshold: Option<f64>,
}

impl AuditPlan {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let m = self.lambda_points.max(2) - 1;
        (0..=m).map(|k| k as f64 / m as f64).collect()
    }
}

impl Default for AuditPlan {
    fn default() -> Self {
        Self {
            seed: 0,
            dual_formula_pairs: 200,
            triples: 50,
            lambda_points: 11,
            lsc_sequences: 20,
            no_feedback_instances: 50,
            threshold: None,
        }
    }
}

/// The kernels of one audited instance. For the semicontinuity audit the
/// first forward kernel is the limit and the rest the sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub label: String,
    pub backward: Vec<BackwardKernel>,
    pub forward: Vec<ForwardKernel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditOutcome {
    pub property: Property,
    pub instances: usize,
    /// Largest violation measure seen; see [`run_audit`].
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
    /// The worst instance, kept only when the audit fails.
    pub counterexample: Option<Instance>,
}

/// Runs one audit. Violation measures:
///
/// * dual-formula: `|sum form - divergence form|`;
/// * convexity / concavity: largest signed chord violation over the lambda grid;
/// * lsc: largest `DI(limit) - DI(alpha) - modulus(alpha)`;
/// * no-feedback: `|DI - MI|` for feedback-free inputs, `DI - MI` otherwise.
///
/// `extra`, when given, is audited first as a degenerate instance
/// (identical endpoints, constant sequence).
pub fn run_audit(
    property: Property,
    plan: &AuditPlan,
    extra: Option<(&BackwardKernel, &ForwardKernel)>,
) -> Result<AuditOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ property.salt());
    let mut instances = Vec::new();
    if let Some((p, q)) = extra {
        instances.push(degenerate_instance(property, p, q));
    }
    instances.extend(draw_instances(property, plan, &mut rng)?);

    let lambdas = plan.lambdas();
    let scores = instances
        .par_iter()
        .map(|inst| score(property, inst, &lambdas))
        .collect::<Result<Vec<f64>>>()?;

    let (worst_at, worst) = scores
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let threshold = plan.threshold.unwrap_or(property.threshold());
    let passed = worst <= threshold;
    Ok(AuditOutcome {
        property,
        instances: instances.len(),
        worst,
        threshold,
        passed,
        counterexample: (!passed).then(|| instances[worst_at].clone()),
    })
}

fn degenerate_instance(property: Property, p: &BackwardKernel, q: &ForwardKernel) -> Instance {
    let (backward, forward) = match property {
        Property::Convexity => (vec![p.clone()], vec![q.clone(), q.clone()]),
        Property::Concavity => (vec![p.clone(), p.clone()], vec![q.clone()]),
        Property::LowerSemicontinuity => (vec![p.clone()], vec![q.clone(); 4]),
        _ => (vec![p.clone()], vec![q.clone()]),
    };
    Instance {
        label: "supplied".into(),
        backward,
        forward,
    }
}

fn score(property: Property, inst: &Instance, lambdas: &[f64]) -> Result<f64> {
    let p = &inst.backward[0];
    match property {
        Property::DualFormula => Ok(directed_information_sum(p, &inst.forward[0])?.formula_gap()),
        Property::Convexity => {
            Ok(check_convexity_in_q(p, &inst.forward[0], &inst.forward[1], lambdas)?.max_violation)
        }
        Property::Concavity => {
            Ok(check_concavity_in_p(&inst.forward[0], p, &inst.backward[1], lambdas)?.max_violation)
        }
        Property::LowerSemicontinuity => {
            Ok(check_lower_semicontinuity(p, &inst.forward[0], &inst.forward[1..])?.max_violation)
        }
        Property::NoFeedback => {
            let q = &inst.forward[0];
            let di = directed_information_sum(p, q)?.sum_form.nats();
            let mi = mutual_information(&build_joint(p, q)?).nats();
            Ok(if p.is_feedback_free(0.0) {
                (di - mi).abs()
            } else {
                di - mi
            })
        }
    }
}

fn draw_instances(property: Property, plan: &AuditPlan, rng: &mut ChaCha8Rng) -> Result<Vec<Instance>> {
    let binary = AlphabetSpec::uniform(1, 2, 2)?;
    let mut out = Vec::new();
    match property {
        Property::DualFormula => {
            for k in 0..plan.dual_formula_pairs {
                let spec = random_spec(rng, 2, 3);
                let sparsity = if k % 3 == 0 { 0.3 } else { 0.0 };
                out.push(Instance {
                    label: format!("pair {k}"),
                    backward: vec![random_backward(rng, &spec, sparsity)],
                    forward: vec![random_forward(rng, &spec, sparsity)],
                });
            }
        }
        Property::Convexity => {
            for k in 0..plan.triples {
                let sparsity = if k % 5 == 0 { 0.25 } else { 0.0 };
                out.push(Instance {
                    label: format!("triple {k}"),
                    backward: vec![random_backward(rng, &binary, sparsity)],
                    forward: vec![
                        random_forward(rng, &binary, sparsity),
                        random_forward(rng, &binary, sparsity),
                    ],
                });
            }
        }
        Property::Concavity => {
            for k in 0..plan.triples {
                let sparsity = if k % 5 == 0 { 0.25 } else { 0.0 };
                out.push(Instance {
                    label: format!("triple {k}"),
                    backward: vec![
                        random_backward(rng, &binary, sparsity),
                        random_backward(rng, &binary, sparsity),
                    ],
                    forward: vec![random_forward(rng, &binary, sparsity)],
                });
            }
        }
        Property::LowerSemicontinuity => {
            for k in 0..plan.lsc_sequences {
                out.push(lsc_sequence(k, rng)?);
            }
        }
        Property::NoFeedback => {
            for k in 0..plan.no_feedback_instances {
                let spec = random_spec(rng, 2, 3);
                out.push(Instance {
                    label: format!("no-feedback {k}"),
                    backward: vec![random_no_feedback(rng, &spec, 0.0)],
                    forward: vec![random_forward(rng, &spec, 0.0)],
                });
            }
            for k in 0..plan.no_feedback_instances {
                let spec = random_spec(rng, 2, 3);
                out.push(Instance {
                    label: format!("feedback {k}"),
                    backward: vec![random_backward(rng, &spec, 0.0)],
                    forward: vec![random_forward(rng, &spec, 0.0)],
                });
            }
        }
    }
    Ok(out)
}

/// Four families, cycled: mixing toward uniform with weight `2^-k`, a
/// deterministic (support-shrinking) limit approached from full support, a
/// constant sequence, and mixing toward a random channel.
fn lsc_sequence(k: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let spec = random_spec(rng, 1, 3);
    let p = random_backward(rng, &spec, 0.0);
    let (label, limit, seq) = match k % 4 {
        0 => {
            let limit = random_forward(rng, &spec, 0.0);
            let seq = path_mixtures(&limit, &ForwardKernel::uniform(&spec), 0..=24)?;
            ("toward uniform", limit, seq)
        }
        1 => {
            let limit = random_deterministic_forward(rng, &spec);
            let seq = path_mixtures(&limit, &random_forward(rng, &spec, 0.0), 1..=30)?;
            ("support-shrinking limit", limit, seq)
        }
        2 => {
            let limit = random_forward(rng, &spec, 0.3);
            ("constant", limit.clone(), vec![limit; 5])
        }
        _ => {
            let limit = random_forward(rng, &spec, 0.3);
            let seq = path_mixtures(&limit, &random_forward(rng, &spec, 0.0), 0..=26)?;
            ("toward random channel", limit, seq)
        }
    };
    let mut forward = vec![limit];
    forward.extend(seq);
    Ok(Instance {
        label: format!("sequence {k} ({label})"),
        backward: vec![p],
        forward,
    })
}

/// `(1 - 2^-e) limit + 2^-e other` at the whole-path level for each exponent.
fn path_mixtures(
    limit: &ForwardKernel,
    other: &ForwardKernel,
    exponents: std::ops::RangeInclusive<i32>,
) -> Result<Vec<ForwardKernel>> {
    let (a, b) = (condition_forward(limit), condition_forward(other));
    exponents
        .map(|e| refactor_to_forward_kernel(&mix_conditioned(&a, &b, 1.0 - 0.5f64.powi(e))?))
        .collect()
}
