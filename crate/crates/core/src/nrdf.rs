//! Finite-horizon non-anticipative rate distortion: minimize
//! `I(X^n -> Y^n)` over causal reconstruction kernels for a fixed source,
//! subject to a budget on the expected distortion.
//!
//! For a multiplier `s` the Lagrangian `DI + s * distortion` is minimized by
//! alternating two exact steps:
//!
//! * replace the reference output law `omega` by the output marginal of the
//!   current joint law;
//! * replace the kernel by the minimizer of
//!   `E[ln Q(y^n||x^n) - ln omega(y^n)] + s E[d]` over causal kernels.
//!
//! The second step is a backward induction: the kernel at step `i` is
//! `omega_i(y_i | y^{i-1}) exp(-T_i)` normalized, where `T_i` is the tilted
//! cost-to-go of choosing `y_i`. It applies to any distortion table, additive
//! or not, since the table simply enters as the terminal cost.

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{search_max, CellIndex};
use crate::measures::{
    condition_forward, ensure_same_spec, marginal_x, mix_conditioned, product_pi_backward, refactor_to_forward_kernel,
    AlphabetSpec, BackwardKernel, ForwardKernel, InfoValue, Pmf,
};

const BUDGET_SLACK: f64 = 1e-12;

/// A distortion `d(x^n, y^n)` per joint cell and a budget on its expectation.
/// `+inf` entries forbid the corresponding reconstructions.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionConstraint {
    spec: AlphabetSpec,
    table: Vec<f64>,
    budget: f64,
}

impl DistortionConstraint {
    /// `table` is laid out like a joint measure.
    pub fn new(spec: AlphabetSpec, table: Vec<f64>, budget: f64) -> Result<Self> {
        if table.len() != spec.cells() {
            return Err(Error::SpecMismatch(format!(
                "distortion table has {} entries, expected {}",
                table.len(),
                spec.cells()
            )));
        }
        if let Some(d) = table.iter().find(|d| d.is_nan() || **d < 0.0) {
            return Err(Error::Domain(format!("distortions must be nonnegative, got {d}")));
        }
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(Error::Domain(format!("budget must be finite and nonnegative, got {budget}")));
        }
        Ok(Self { spec, table, budget })
    }

    pub fn from_fn<F: Fn(&[usize], &[usize]) -> f64>(spec: &AlphabetSpec, f: F, budget: f64) -> Result<Self> {
        let k = spec.digits();
        let table = (0..spec.cells())
            .map(|c| {
                let (xs, ys) = spec.split_prefix(k, c);
                f(&xs, &ys)
            })
            .collect();
        Self::new(spec.clone(), table, budget)
    }

    /// `d = sum_i f(i, x_i, y_i)`.
    pub fn per_letter<F: Fn(usize, usize, usize) -> f64>(spec: &AlphabetSpec, f: F, budget: f64) -> Result<Self> {
        Self::from_fn(
            spec,
            |xs, ys| xs.iter().zip(ys).enumerate().map(|(i, (&x, &y))| f(i, x, y)).sum(),
            budget,
        )
    }

    /// Number of mismatched letters.
    pub fn hamming(spec: &AlphabetSpec, budget: f64) -> Result<Self> {
        Self::per_letter(spec, |_, x, y| if x == y { 0.0 } else { 1.0 }, budget)
    }

    pub fn spec(&self) -> &AlphabetSpec {
        &self.spec
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        Self::new(self.spec.clone(), self.table.clone(), budget)
    }
}

/// A source `P(x_i | x^{i-1})`, stored as an input kernel that ignores the
/// output history.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    kernel: BackwardKernel,
}

impl SourceSpec {
    /// Rejects kernels whose rows differ across output histories.
    pub fn new(kernel: BackwardKernel) -> Result<Self> {
        if !kernel.is_feedback_free(1e-12) {
            return Err(Error::Domain("source rows must not depend on the output history".into()));
        }
        Ok(Self { kernel })
    }

    /// `f(i, x^{i-1})` gives the law of `x_i`.
    pub fn from_markov<F: FnMut(usize, &[usize]) -> Vec<f64>>(spec: &AlphabetSpec, f: F) -> Result<Self> {
        Ok(Self {
            kernel: BackwardKernel::without_feedback(spec, f)?,
        })
    }

    /// Independent letters, `laws[i]` the law of `x_i`.
    pub fn memoryless(spec: &AlphabetSpec, laws: &[Vec<f64>]) -> Result<Self> {
        if laws.len() != spec.steps() {
            return Err(Error::SpecMismatch(format!("{} laws for {} steps", laws.len(), spec.steps())));
        }
        Self::from_markov(spec, |i, _| laws[i].clone())
    }

    pub fn kernel(&self) -> &BackwardKernel {
        &self.kernel
    }

    pub fn spec(&self) -> &AlphabetSpec {
        self.kernel.spec()
    }

    /// Law of the whole source path.
    pub fn mu(&self) -> Pmf {
        let spec = self.spec();
        let q = ForwardKernel::uniform(spec);
        marginal_x(&crate::measures::build_joint(&self.kernel, &q).expect("same alphabet"))
    }
}

/// Expected distortion under the source law run through `q`.
pub fn expected_distortion(src: &SourceSpec, q: &ForwardKernel, d: &DistortionConstraint) -> Result<f64> {
    ensure_same_spec(src.spec(), d.spec())?;
    let joint = product_pi_backward(&src.mu(), q)?;
    Ok(joint
        .weights()
        .iter()
        .zip(d.table())
        .filter(|(j, _)| **j > 0.0)
        .map(|(j, d)| j * d)
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NrdfResult {
    pub value: InfoValue,
    pub argmin: ForwardKernel,
    /// Alternating iterations summed over every inner solve.
    pub iterations: usize,
    /// `budget - expected distortion` of the argmin.
    pub distortion_slack: f64,
    /// Final Lagrange multiplier, when the budget was active.
    pub multiplier: Option<f64>,
    pub converged: bool,
    /// Lagrangian after each iteration of the last inner solve.
    pub trace: Vec<f64>,
}

impl NrdfResult {
    pub fn normalized(&self) -> f64 {
        self.value.nats() / self.argmin.spec().steps() as f64
    }
}

pub fn solve_nrdf(src: &SourceSpec, d: &DistortionConstraint, cfg: &SolverConfig) -> Result<NrdfResult> {
    cfg.validate()?;
    let mut problem = Problem::new(src, d)?;
    let budget = d.budget();
    if problem.min_distortion > budget + 1e-9 {
        return Err(Error::InfeasibleConstraint {
            minimum: problem.min_distortion,
            budget,
        });
    }
    if budget <= problem.min_distortion + 1e-9 {
        problem.allowed = problem.cheapest.clone();
        let run = problem.minimize(problem.initial(), 0.0, cfg);
        return Ok(problem.finish(run, budget, None));
    }

    let free = problem.minimize(problem.initial(), 0.0, cfg);
    let mut spent = free.iterations;
    if free.distortion <= budget + BUDGET_SLACK {
        return Ok(problem.finish(free, budget, None));
    }

    // bracket: `lo` overspends, `hi` is feasible
    let (mut s_lo, mut lo) = (0.0, free);
    let mut s_hi = 1.0;
    let mut hi = None;
    for _ in 0..64 {
        let run = problem.minimize(lo.steps.clone(), s_hi, cfg);
        spent += run.iterations;
        if run.distortion <= budget + BUDGET_SLACK {
            hi = Some(run);
            break;
        }
        (s_lo, lo) = (s_hi, run);
        s_hi *= 2.0;
    }
    let Some(mut hi) = hi else {
        problem.allowed = problem.cheapest.clone();
        let mut run = problem.minimize(problem.initial(), 0.0, cfg);
        run.iterations += spent;
        return Ok(problem.finish(run, budget, None));
    };

    for _ in 0..200 {
        if budget - hi.distortion <= cfg.multiplier_tol || s_hi - s_lo <= 1e-12 * s_hi {
            break;
        }
        let s = 0.5 * (s_lo + s_hi);
        let run = problem.minimize(hi.steps.clone(), s, cfg);
        spent += run.iterations;
        if run.distortion <= budget + BUDGET_SLACK {
            (s_hi, hi) = (s, run);
        } else {
            (s_lo, lo) = (s, run);
        }
    }
    // spend the remaining budget; by convexity the mixture is never worse than `hi`
    if budget - hi.distortion > BUDGET_SLACK {
        hi = problem.time_share(&lo, &hi, budget)?;
    }
    hi.iterations = spent;
    Ok(problem.finish(hi, budget, Some(s_hi)))
}

/// Least directed information over reconstruction kernels whose rows are
/// multiples of `1 / resolution` and which meet the budget.
pub fn brute_force_nrdf(src: &SourceSpec, d: &DistortionConstraint, resolution: usize) -> Result<InfoValue> {
    let problem = Problem::new(src, d)?;
    let spec = &problem.spec;
    let widths: Vec<usize> = (0..spec.steps())
        .flat_map(|i| std::iter::repeat_n(spec.y_size(i), spec.forward_histories(i)))
        .collect();
    let budget = d.budget();
    let cells = spec.cells();
    let best = search_max(
        resolution,
        &widths,
        || (problem.initial(), vec![0.0; cells], Vec::new()),
        |(steps, qp, nu), rows| {
            let mut rows = rows.iter();
            for (i, table) in steps.iter_mut().enumerate() {
                for chunk in table.chunks_mut(spec.y_size(i)) {
                    chunk.copy_from_slice(rows.next().expect("one row per history"));
                }
            }
            problem.index.forward_paths(steps, qp);
            let (di, dist) = problem.index.evaluate(&problem.pp, qp, Some(&problem.weights), nu);
            (dist <= budget + BUDGET_SLACK).then_some(-di)
        },
    )?;
    match best {
        Some(b) => Ok(InfoValue::from_nats(-b.value)),
        None => Err(Error::InfeasibleConstraint {
            minimum: problem.min_distortion,
            budget,
        }),
    }
}

/// One point of a rate distortion curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub budget: f64,
    pub result: NrdfResult,
}

/// Solves at every budget of an ascending grid, in parallel.
pub fn rd_curve(
    src: &SourceSpec,
    d: &DistortionConstraint,
    budgets: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<CurvePoint>> {
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("distortion budgets must be ascending".into()));
    }
    budgets
        .par_iter()
        .map(|&budget| {
            let result = solve_nrdf(src, &d.with_budget(budget)?, cfg)?;
            Ok(CurvePoint { budget, result })
        })
        .collect()
}

/// Largest increase between consecutive points, and largest excess of a
/// point over the chord of its neighbours.
pub fn curve_shape_violations(points: &[(f64, f64)]) -> (f64, f64) {
    let increase = points
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(0.0, f64::max);
    let excess = points
        .windows(3)
        .map(|w| {
            let t = (w[1].0 - w[0].0) / (w[2].0 - w[0].0);
            w[1].1 - ((1.0 - t) * w[0].1 + t * w[2].1)
        })
        .fold(0.0, f64::max);
    (increase, excess)
}

struct Run {
    steps: Vec<Vec<f64>>,
    di: f64,
    distortion: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

struct Problem {
    spec: AlphabetSpec,
    source: BackwardKernel,
    index: CellIndex,
    /// Source path probability of each cell.
    pp: Vec<f64>,
    weights: Vec<f64>,
    /// Output-history index `y^{i-1}` of every forward history at step `i`.
    y_history: Vec<Vec<usize>>,
    allowed: Vec<Vec<bool>>,
    cheapest: Vec<Vec<bool>>,
    min_distortion: f64,
}

impl Problem {
    fn new(src: &SourceSpec, d: &DistortionConstraint) -> Result<Self> {
        let spec = src.spec().clone();
        ensure_same_spec(&spec, d.spec())?;
        let index = CellIndex::new(&spec);
        let mut pp = vec![0.0; spec.cells()];
        index.backward_paths(src.kernel().steps(), &mut pp);
        let y_history = (0..spec.steps())
            .map(|i| {
                (0..spec.forward_histories(i))
                    .map(|h| spec.prefix_y_path(2 * i + 1, h))
                    .collect()
            })
            .collect();
        let (allowed, cheapest, min_distortion) = least_distortion(&spec, src.kernel(), d.table());
        Ok(Self {
            spec,
            source: src.kernel().clone(),
            index,
            pp,
            weights: d.table().to_vec(),
            y_history,
            allowed,
            cheapest,
            min_distortion,
        })
    }

    fn initial(&self) -> Vec<Vec<f64>> {
        self.allowed
            .iter()
            .enumerate()
            .map(|(i, mask)| {
                let w = self.spec.y_size(i);
                mask.chunks(w).flat_map(uniform_on).collect()
            })
            .collect()
    }

    fn evaluate(&self, steps: &[Vec<f64>], qp: &mut [f64], nu: &mut Vec<f64>) -> (f64, f64) {
        self.index.forward_paths(steps, qp);
        self.index.evaluate(&self.pp, qp, Some(&self.weights), nu)
    }

    /// `ln omega_i(y_i | y^{i-1})` from the output law `nu` of whole paths.
    fn log_reference(&self, nu: &[f64]) -> Vec<Vec<f64>> {
        let steps = self.spec.steps();
        let mut levels = vec![Vec::new(); steps + 1];
        levels[steps] = nu.to_vec();
        for i in (0..steps).rev() {
            levels[i] = levels[i + 1].chunks(self.spec.y_size(i)).map(|c| c.iter().sum()).collect();
        }
        (0..steps)
            .map(|i| {
                let w = self.spec.y_size(i);
                levels[i + 1]
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| {
                        let parent = levels[i][k / w];
                        if parent > 0.0 {
                            (m / parent).max(f64::MIN_POSITIVE).ln()
                        } else {
                            -(w as f64).ln()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// The causal kernel minimizing `E ln(Q / omega) + s E d`, by backward
    /// induction over forward histories.
    fn tilt(&self, log_omega: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
        let n = self.spec.horizon();
        let mut steps: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        // to_go[(h, y_i)]: tilted cost after emitting y_i at forward history h
        let mut to_go: Vec<f64> = self.weights.iter().map(|&d| if s == 0.0 { 0.0 } else { s * d }).collect();
        for i in (0..=n).rev() {
            let w = self.spec.y_size(i);
            let mut table = vec![0.0; to_go.len()];
            let mut value = vec![0.0; to_go.len() / w];
            for (h, (out, cost)) in table.chunks_mut(w).zip(to_go.chunks(w)).enumerate() {
                let base = self.y_history[i][h] * w;
                let logits: Vec<f64> = (0..w)
                    .map(|y| {
                        if self.allowed[i][h * w + y] && cost[y].is_finite() {
                            log_omega[i][base + y] - cost[y]
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    out.copy_from_slice(&uniform_on(&vec![true; w]));
                    value[h] = f64::INFINITY;
                    continue;
                }
                let total: f64 = logits.iter().map(|l| (l - top).exp()).sum();
                for (o, l) in out.iter_mut().zip(&logits) {
                    *o = (l - top).exp() / total;
                }
                value[h] = -(top + total.ln());
            }
            steps[i] = table;
            if i > 0 {
                // average over the next source letter
                let wx = self.spec.x_size(i);
                let src = self.source.step(i);
                to_go = src
                    .chunks(wx)
                    .zip(value.chunks(wx))
                    .map(|(p, v)| p.iter().zip(v).filter(|(p, _)| **p > 0.0).map(|(p, v)| p * v).sum())
                    .collect();
            }
        }
        steps
    }

    fn minimize(&self, mut steps: Vec<Vec<f64>>, s: f64, cfg: &SolverConfig) -> Run {
        let (mut qp, mut nu) = (vec![0.0; self.index.cells()], Vec::new());
        let (mut di, mut distortion) = self.evaluate(&steps, &mut qp, &mut nu);
        let mut obj = lagrangian(di, distortion, s);
        let mut trace = vec![obj];
        let mut converged = false;
        let mut iterations = 0;
        let mut prev_drop = 0.0;
        while iterations < cfg.max_iters {
            iterations += 1;
            let next = self.tilt(&self.log_reference(&nu), s);
            let (d_next, dist_next) = self.evaluate(&next, &mut qp, &mut nu);
            let value = lagrangian(d_next, dist_next, s);
            let drop = obj - value;
            (steps, di, distortion, obj) = (next, d_next, dist_next, value);
            trace.push(obj);
            // geometric tail of the remaining decrease under linear convergence
            let ratio = if prev_drop > 0.0 { (drop / prev_drop).clamp(0.0, 0.999) } else { 0.0 };
            let remaining = drop.max(0.0) / (1.0 - ratio);
            prev_drop = drop;
            if remaining <= cfg.tol * obj.abs().max(1.0) || drop.abs() <= 1e-14 * obj.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        Run {
            steps,
            di,
            distortion,
            iterations,
            converged,
            trace,
        }
    }

    /// Path-level mixture of the bracketing solutions spending exactly the
    /// budget. Distortion is linear in the path-level kernel and directed
    /// information convex in it.
    fn time_share(&self, lo: &Run, hi: &Run, budget: f64) -> Result<Run> {
        let lambda = ((budget - hi.distortion) / (lo.distortion - hi.distortion)).clamp(0.0, 1.0);
        let to_kernel = |steps: &[Vec<f64>]| ForwardKernel::from_steps_unchecked(self.spec.clone(), steps.to_vec());
        let mixed = mix_conditioned(
            &condition_forward(&to_kernel(&lo.steps)),
            &condition_forward(&to_kernel(&hi.steps)),
            lambda,
        )?;
        let steps = refactor_to_forward_kernel(&mixed)?.into_steps();
        let (mut qp, mut nu) = (vec![0.0; self.index.cells()], Vec::new());
        let (di, distortion) = self.evaluate(&steps, &mut qp, &mut nu);
        Ok(Run {
            steps,
            di,
            distortion,
            iterations: 0,
            converged: hi.converged,
            trace: hi.trace.clone(),
        })
    }

    fn finish(&self, run: Run, budget: f64, multiplier: Option<f64>) -> NrdfResult {
        NrdfResult {
            value: InfoValue::from_nats(run.di),
            argmin: ForwardKernel::from_steps_unchecked(self.spec.clone(), run.steps),
            iterations: run.iterations,
            distortion_slack: budget - run.distortion,
            multiplier,
            converged: run.converged,
            trace: run.trace,
        }
    }
}

fn lagrangian(di: f64, distortion: f64, s: f64) -> f64 {
    if s == 0.0 {
        di
    } else {
        di + s * distortion
    }
}

fn uniform_on(allowed: &[bool]) -> Vec<f64> {
    let k = allowed.iter().filter(|a| **a).count();
    if k == 0 {
        return vec![1.0 / allowed.len() as f64; allowed.len()];
    }
    allowed.iter().map(|&a| if a { 1.0 / k as f64 } else { 0.0 }).collect()
}

/// Least expected distortion over causal kernels, by backward induction.
/// Returns the entries with finite cost-to-go, those with minimal cost-to-go,
/// and the minimum itself.
fn least_distortion(spec: &AlphabetSpec, source: &BackwardKernel, table: &[f64]) -> (Vec<Vec<bool>>, Vec<Vec<bool>>, f64) {
    let n = spec.horizon();
    let mut allowed = vec![Vec::new(); n + 1];
    let mut cheapest = vec![Vec::new(); n + 1];
    let mut entry: Vec<f64> = table.to_vec();
    for i in (0..=n).rev() {
        let w = spec.y_size(i);
        let best: Vec<f64> = entry
            .chunks(w)
            .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        allowed[i] = entry.iter().map(|v| v.is_finite()).collect();
        cheapest[i] = entry
            .iter()
            .enumerate()
            .map(|(e, &v)| v.is_finite() && v <= best[e / w] + 1e-12 * best[e / w].abs().max(1.0))
            .collect();
        // expectation over x_i given the output history before it
        let wx = spec.x_size(i);
        entry = source
            .step(i)
            .chunks(wx)
            .zip(best.chunks(wx))
            .map(|(p, b)| p.iter().zip(b).filter(|(p, _)| **p > 0.0).map(|(p, b)| p * b).sum())
            .collect();
    }
    (allowed, cheapest, entry[0])
}
