//! Finite-horizon feedback capacity: maximize `I(X^n -> Y^n)` over input
//! kernels for a fixed channel, optionally under an average power budget.
//!
//! The solver runs entropic mirror ascent on one simplex per input history.
//! Each step multiplies a row by `exp(eta * g)`, where `g` is the partial
//! derivative of the objective divided by the probability of the history;
//! at `n = 0` and `eta = 1` this is the Blahut-Arimoto update. A step is
//! accepted only if the objective does not drop, otherwise `eta` is halved.
//! A power budget is handled through the Lagrangian `DI - s * cost` with
//! bisection on `s`, and time sharing between the bracketing solutions when
//! the achieved cost jumps over the budget.

use crate::config::{KernelClass, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{search_max, CellIndex};
use crate::measures::{
    build_joint, condition_backward, ensure_same_spec, mix_conditioned, refactor_to_backward_kernel, AlphabetSpec,
    BackwardKernel, ForwardKernel, InfoValue,
};

/// Slack allowed when comparing an achieved cost against a budget.
const BUDGET_SLACK: f64 = 1e-12;

/// A cost `g(x^n, y^{n-1})` per input path and output path before the last
/// step, and a budget on its expectation. `+inf` entries forbid the inputs
/// that lead to them.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerConstraint {
    spec: AlphabetSpec,
    costs: Vec<f64>,
    budget: f64,
}

impl PowerConstraint {
    /// `costs` is indexed by the first `2n + 1` interleaved digits
    /// `(x_0, y_0, ..., y_{n-1}, x_n)`.
    pub fn new(spec: AlphabetSpec, costs: Vec<f64>, budget: f64) -> Result<Self> {
        let expected = spec.prefix_count(2 * spec.horizon() + 1);
        if costs.len() != expected {
            return Err(Error::SpecMismatch(format!(
                "cost table has {} entries, expected {expected}",
                costs.len()
            )));
        }
        if let Some(c) = costs.iter().find(|c| c.is_nan() || **c < 0.0) {
            return Err(Error::Domain(format!("costs must be nonnegative, got {c}")));
        }
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(Error::Domain(format!("budget must be finite and nonnegative, got {budget}")));
        }
        Ok(Self { spec, costs, budget })
    }

    /// `g = sum_i f(i, x_i)`.
    pub fn per_letter<F: Fn(usize, usize) -> f64>(spec: &AlphabetSpec, f: F, budget: f64) -> Result<Self> {
        Self::from_fn(spec, |xs, _| xs.iter().enumerate().map(|(i, &x)| f(i, x)).sum(), budget)
    }

    /// `g(x^n, y^{n-1}) = f(xs, ys)` with `ys` of length `n`.
    pub fn from_fn<F: Fn(&[usize], &[usize]) -> f64>(spec: &AlphabetSpec, f: F, budget: f64) -> Result<Self> {
        let k = 2 * spec.horizon() + 1;
        let costs = (0..spec.prefix_count(k))
            .map(|h| {
                let (xs, ys) = spec.split_prefix(k, h);
                f(&xs, &ys)
            })
            .collect();
        Self::new(spec.clone(), costs, budget)
    }

    pub fn spec(&self) -> &AlphabetSpec {
        &self.spec
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Same costs, another budget.
    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        Self::new(self.spec.clone(), self.costs.clone(), budget)
    }

    fn cell_weights(&self) -> Vec<f64> {
        let k = 2 * self.spec.horizon() + 1;
        (0..self.spec.cells()).map(|c| self.costs[self.spec.prefix(c, k)]).collect()
    }
}

/// Expected cost under the joint law of `p` and `q`.
pub fn expected_cost(p: &BackwardKernel, q: &ForwardKernel, c: &PowerConstraint) -> Result<f64> {
    ensure_same_spec(p.spec(), c.spec())?;
    let joint = build_joint(p, q)?;
    Ok(joint
        .weights()
        .iter()
        .zip(c.cell_weights())
        .filter(|(j, _)| **j > 0.0)
        .map(|(j, g)| j * g)
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    pub value: InfoValue,
    pub argmax: BackwardKernel,
    /// Mirror-ascent iterations summed over every inner solve.
    pub iterations: usize,
    /// `budget - expected cost` of the argmax, when constrained.
    pub constraint_slack: Option<f64>,
    /// Final Lagrange multiplier, when the budget was active.
    pub multiplier: Option<f64>,
    pub converged: bool,
    /// Objective after each accepted step of the last inner solve.
    pub trace: Vec<f64>,
}

impl CapacityResult {
    pub fn normalized(&self) -> f64 {
        self.value.nats() / self.argmax.spec().steps() as f64
    }
}

pub fn solve_capacity(q: &ForwardKernel, c: Option<&PowerConstraint>, cfg: &SolverConfig) -> Result<CapacityResult> {
    solve_capacity_with(q, c, cfg, KernelClass::Feedback)
}

pub fn solve_capacity_with(
    q: &ForwardKernel,
    c: Option<&PowerConstraint>,
    cfg: &SolverConfig,
    class: KernelClass,
) -> Result<CapacityResult> {
    cfg.validate()?;
    let mut problem = Problem::new(q, c, class)?;
    let Some(c) = c else {
        let run = problem.ascend(problem.initial(), 0.0, cfg);
        return Ok(problem.finish(run, None, None, 0));
    };
    let budget = c.budget();
    if problem.min_cost > budget + 1e-9 {
        return Err(Error::InfeasibleConstraint {
            minimum: problem.min_cost,
            budget,
        });
    }
    if budget <= problem.min_cost + 1e-9 {
        return Ok(problem.solve_on_cheapest_support(cfg, budget));
    }

    let free = problem.ascend(problem.initial(), 0.0, cfg);
    let mut spent = free.iterations;
    if free.cost <= budget + BUDGET_SLACK {
        return Ok(problem.finish(free, Some(budget), None, 0));
    }

    // bracket: `lo` overspends, `hi` is feasible
    let (mut s_lo, mut lo) = (0.0, free);
    let mut s_hi = 1.0;
    let mut hi = None;
    for _ in 0..64 {
        let run = problem.ascend(problem.warm(&lo.steps), s_hi, cfg);
        spent += run.iterations;
        if run.cost <= budget + BUDGET_SLACK {
            hi = Some(run);
            break;
        }
        (s_lo, lo) = (s_hi, run);
        s_hi *= 2.0;
    }
    let Some(mut hi) = hi else {
        let mut out = problem.solve_on_cheapest_support(cfg, budget);
        out.iterations += spent;
        return Ok(out);
    };

    for _ in 0..200 {
        if budget - hi.cost <= cfg.multiplier_tol || s_hi - s_lo <= 1e-12 * s_hi {
            break;
        }
        let s = 0.5 * (s_lo + s_hi);
        let run = problem.ascend(problem.warm(&hi.steps), s, cfg);
        spent += run.iterations;
        if run.cost <= budget + BUDGET_SLACK {
            (s_hi, hi) = (s, run);
        } else {
            (s_lo, lo) = (s, run);
        }
    }
    // spend the remaining budget; the mixture is never worse than `hi`
    if budget - hi.cost > BUDGET_SLACK {
        let converged = hi.converged;
        hi = problem.time_share(&lo, &hi, budget)?;
        hi.converged = converged;
    }
    hi.iterations = spent;
    Ok(problem.finish(hi, Some(budget), Some(s_hi), 0))
}

/// Best directed information over input kernels whose rows are multiples of
/// `1 / resolution` and which meet the budget.
pub fn brute_force_capacity(q: &ForwardKernel, c: Option<&PowerConstraint>, resolution: usize) -> Result<InfoValue> {
    brute_force_capacity_with(q, c, resolution, KernelClass::Feedback)
}

pub fn brute_force_capacity_with(
    q: &ForwardKernel,
    c: Option<&PowerConstraint>,
    resolution: usize,
    class: KernelClass,
) -> Result<InfoValue> {
    let problem = Problem::new(q, c, class)?;
    let widths: Vec<usize> = problem.rows.iter().map(|r| r.width).collect();
    let budget = c.map(|c| c.budget());
    let cells = problem.index.cells();
    let best = search_max(
        resolution,
        &widths,
        || (problem.initial(), vec![0.0; cells], Vec::new()),
        |(steps, pp, nu), rows| {
            for (row, values) in problem.rows.iter().zip(rows) {
                row.write(&mut steps[row.step], values);
            }
            problem.index.backward_paths(steps, pp);
            let (di, cost) = problem.index.evaluate(pp, &problem.qp, problem.weights.as_deref(), nu);
            match budget {
                Some(b) if cost > b + BUDGET_SLACK => None,
                _ => Some(di),
            }
        },
    )?;
    match best {
        Some(b) => Ok(InfoValue::from_nats(b.value)),
        None => Err(Error::InfeasibleConstraint {
            minimum: problem.min_cost,
            budget: budget.unwrap_or(f64::INFINITY),
        }),
    }
}

/// One free simplex of the parameterization: the shared row of every member
/// history at a step.
#[derive(Clone, Debug)]
struct Row {
    step: usize,
    width: usize,
    members: Vec<usize>,
    allowed: Vec<bool>,
    cheapest: Vec<bool>,
}

impl Row {
    fn write(&self, table: &mut [f64], values: &[f64]) {
        for &h in &self.members {
            table[h * self.width..(h + 1) * self.width].copy_from_slice(values);
        }
    }

    fn read<'a>(&self, table: &'a [f64]) -> &'a [f64] {
        let h = self.members[0];
        &table[h * self.width..(h + 1) * self.width]
    }
}

struct Run {
    steps: Vec<Vec<f64>>,
    di: f64,
    cost: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

struct Problem {
    spec: AlphabetSpec,
    index: CellIndex,
    qp: Vec<f64>,
    weights: Option<Vec<f64>>,
    rows: Vec<Row>,
    min_cost: f64,
}

impl Problem {
    fn new(q: &ForwardKernel, c: Option<&PowerConstraint>, class: KernelClass) -> Result<Self> {
        let spec = q.spec().clone();
        if let Some(c) = c {
            ensure_same_spec(&spec, c.spec())?;
        }
        let index = CellIndex::new(&spec);
        let mut qp = vec![0.0; spec.cells()];
        index.forward_paths(q.steps(), &mut qp);
        let weights = c.map(PowerConstraint::cell_weights);
        let mut rows = layout(&spec, class);
        let min_cost = match c {
            None => 0.0,
            Some(c) => match class {
                KernelClass::Feedback => feedback_costs(&spec, q, c, &mut rows),
                KernelClass::NoFeedback => open_loop_costs(&spec, &qp, weights.as_deref().unwrap(), &mut rows),
            },
        };
        Ok(Self {
            spec,
            index,
            qp,
            weights,
            rows,
            min_cost,
        })
    }

    /// Uniform over the allowed entries of every row.
    fn initial(&self) -> Vec<Vec<f64>> {
        let mut steps: Vec<Vec<f64>> = (0..self.spec.steps())
            .map(|i| vec![0.0; self.spec.backward_histories(i) * self.spec.x_size(i)])
            .collect();
        for row in &self.rows {
            row.write(&mut steps[row.step], &uniform_on(&row.allowed));
        }
        steps
    }

    /// A previous iterate pulled slightly toward the initial point, so that
    /// entries driven close to zero can recover.
    fn warm(&self, from: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut steps = self.initial();
        for (t, f) in steps.iter_mut().zip(from) {
            for (a, b) in t.iter_mut().zip(f) {
                *a = 1e-3 * *a + (1.0 - 1e-3) * b;
            }
        }
        steps
    }

    fn evaluate(&self, steps: &[Vec<f64>], pp: &mut [f64], nu: &mut Vec<f64>) -> (f64, f64) {
        self.index.backward_paths(steps, pp);
        self.index.evaluate(pp, &self.qp, self.weights.as_deref(), nu)
    }

    /// Partial derivatives of `DI - s * cost` and the history masses, both
    /// laid out like the kernel tables.
    fn gradient(&self, steps: &[Vec<f64>], s: f64, nu: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut grad: Vec<Vec<f64>> = steps.iter().map(|t| vec![0.0; t.len()]).collect();
        let mut mass = grad.clone();
        let n_steps = steps.len();
        let mut factors = vec![0.0; n_steps];
        let mut before = vec![0.0; n_steps + 1];
        for c in 0..self.index.cells() {
            let qp = self.qp[c];
            if qp == 0.0 {
                continue;
            }
            before[0] = 1.0;
            for i in 0..n_steps {
                factors[i] = steps[i][self.index.x_entry[i][c]];
                before[i + 1] = before[i] * factors[i];
            }
            let mut after = 1.0;
            for i in (0..n_steps).rev() {
                let excl = before[i] * after;
                after *= factors[i];
                if excl == 0.0 || factors[i] == 0.0 {
                    continue;
                }
                let e = self.index.x_entry[i][c];
                let mut local = (qp / nu[self.index.y_path[c]]).ln();
                if let Some(w) = &self.weights {
                    local -= s * w[c];
                }
                grad[i][e] += excl * qp * local;
                mass[i][e] += excl * qp;
            }
        }
        (grad, mass)
    }

    /// First-order gain available from moving each row onto its best
    /// letter. Zero exactly at a stationary point of the row-wise problem.
    fn kkt_residual(&self, steps: &[Vec<f64>], grad: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for row in &self.rows {
            let w = row.width;
            let current = row.read(&steps[row.step]);
            let mut g = vec![0.0; w];
            for &h in &row.members {
                for (a, v) in g.iter_mut().enumerate() {
                    *v += grad[row.step][h * w + a];
                }
            }
            let best = (0..w)
                .filter(|&a| current[a] > 0.0)
                .map(|a| g[a])
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                let mean: f64 = (0..w).filter(|&a| current[a] > 0.0).map(|a| current[a] * g[a]).sum();
                total += (best - mean).max(0.0);
            }
        }
        total
    }

    fn step(&self, steps: &[Vec<f64>], grad: &[Vec<f64>], mass: &[Vec<f64>], eta: f64) -> Vec<Vec<f64>> {
        let mut out = steps.to_vec();
        for row in &self.rows {
            let w = row.width;
            let current = row.read(&steps[row.step]);
            let mut g = vec![0.0; w];
            let mut m = 0.0;
            for &h in &row.members {
                for a in 0..w {
                    let e = h * w + a;
                    g[a] += grad[row.step][e];
                    m += current[a] * mass[row.step][e];
                }
            }
            if m <= 0.0 {
                continue;
            }
            let top = (0..w)
                .filter(|&a| current[a] > 0.0)
                .map(|a| g[a] / m)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut next: Vec<f64> = (0..w)
                .map(|a| {
                    if current[a] > 0.0 {
                        current[a] * (eta * (g[a] / m - top)).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = next.iter().sum();
            for (a, v) in next.iter_mut().enumerate() {
                *v /= total;
                if current[a] > 0.0 && *v < f64::MIN_POSITIVE {
                    *v = f64::MIN_POSITIVE;
                }
            }
            row.write(&mut out[row.step], &next);
        }
        out
    }

    fn ascend(&self, mut steps: Vec<Vec<f64>>, s: f64, cfg: &SolverConfig) -> Run {
        let cells = self.index.cells();
        let (mut pp, mut nu) = (vec![0.0; cells], Vec::new());
        let (mut di, mut cost) = self.evaluate(&steps, &mut pp, &mut nu);
        let mut obj = lagrangian(di, cost, s);
        let mut trace = vec![obj];
        let mut eta = 1.0;
        let mut converged = false;
        let mut iterations = 0;
        let mut prev_gain = 0.0;
        while iterations < cfg.max_iters {
            iterations += 1;
            let (grad, mass) = self.gradient(&steps, s, &nu);
            let scale = obj.abs().max(1.0);
            let residual = self.kkt_residual(&steps, &grad);
            let accepted = loop {
                let trial = self.step(&steps, &grad, &mass, eta);
                let (d, c) = self.evaluate(&trial, &mut pp, &mut nu);
                let value = lagrangian(d, c, s);
                if value >= obj - 1e-15 * scale {
                    break Some((trial, d, c, value));
                }
                eta *= 0.5;
                if eta < 1e-12 {
                    break None;
                }
            };
            let Some((trial, d, c, value)) = accepted else {
                // no ascent direction left at floating-point resolution
                converged = true;
                break;
            };
            let gain = value - obj;
            let full_step = eta >= 0.25;
            (steps, di, cost, obj) = (trial, d, c, value);
            trace.push(obj);
            // geometric tail of the remaining gains under linear convergence
            let ratio = if prev_gain > 0.0 { (gain / prev_gain).clamp(0.0, 0.999) } else { 0.0 };
            let remaining = gain.max(0.0) / (1.0 - ratio);
            prev_gain = gain;
            // the residual is first order in the distance to the optimum while
            // the objective gap is second order, hence the square root
            let settled = remaining <= cfg.tol * scale || gain.abs() <= 1e-14 * scale;
            if settled && residual <= cfg.tol.sqrt() * scale && full_step {
                converged = true;
                break;
            }
            eta = (eta * 2.0).min(4.0);
        }
        Run {
            steps,
            di,
            cost,
            iterations,
            converged,
            trace,
        }
    }

    /// Budget equal to the minimum cost: only the cheapest inputs may be used.
    fn solve_on_cheapest_support(&mut self, cfg: &SolverConfig, budget: f64) -> CapacityResult {
        for row in &mut self.rows {
            row.allowed = row.cheapest.clone();
        }
        let run = self.ascend(self.initial(), 0.0, cfg);
        self.finish(run, Some(budget), None, 0)
    }

    /// Path-level mixture of the two bracketing solutions spending exactly
    /// the budget. Cost is linear in the path-level input law and directed
    /// information concave in it, so the mixture is feasible and at least
    /// as good as the chord.
    fn time_share(&self, lo: &Run, hi: &Run, budget: f64) -> Result<Run> {
        let lambda = ((budget - hi.cost) / (lo.cost - hi.cost)).clamp(0.0, 1.0);
        let to_kernel = |steps: &[Vec<f64>]| BackwardKernel::from_steps_unchecked(self.spec.clone(), steps.to_vec());
        let mixed = mix_conditioned(
            &condition_backward(&to_kernel(&lo.steps)),
            &condition_backward(&to_kernel(&hi.steps)),
            lambda,
        )?;
        let steps = refactor_to_backward_kernel(&mixed)?.into_steps();
        let (mut pp, mut nu) = (vec![0.0; self.index.cells()], Vec::new());
        let (di, cost) = self.evaluate(&steps, &mut pp, &mut nu);
        Ok(Run {
            steps,
            di,
            cost,
            iterations: 0,
            converged: hi.converged,
            trace: hi.trace.clone(),
        })
    }

    fn finish(&self, run: Run, budget: Option<f64>, multiplier: Option<f64>, extra: usize) -> CapacityResult {
        CapacityResult {
            value: InfoValue::from_nats(run.di),
            argmax: BackwardKernel::from_steps_unchecked(self.spec.clone(), run.steps),
            iterations: run.iterations + extra,
            constraint_slack: budget.map(|b| b - run.cost),
            multiplier,
            converged: run.converged,
            trace: run.trace,
        }
    }
}

fn lagrangian(di: f64, cost: f64, s: f64) -> f64 {
    if s == 0.0 {
        di
    } else {
        di - s * cost
    }
}

fn uniform_on(allowed: &[bool]) -> Vec<f64> {
    let k = allowed.iter().filter(|a| **a).count();
    if k == 0 {
        return vec![1.0 / allowed.len() as f64; allowed.len()];
    }
    allowed.iter().map(|&a| if a { 1.0 / k as f64 } else { 0.0 }).collect()
}

fn layout(spec: &AlphabetSpec, class: KernelClass) -> Vec<Row> {
    let mut rows = Vec::new();
    for i in 0..spec.steps() {
        let width = spec.x_size(i);
        let histories = spec.backward_histories(i);
        let groups: Vec<Vec<usize>> = match class {
            KernelClass::Feedback => (0..histories).map(|h| vec![h]).collect(),
            KernelClass::NoFeedback => {
                let mut groups = vec![Vec::new(); spec.x_sizes()[..i].iter().product()];
                for h in 0..histories {
                    groups[spec.prefix_x_path(2 * i, h)].push(h);
                }
                groups
            }
        };
        rows.extend(groups.into_iter().map(|members| Row {
            step: i,
            width,
            members,
            allowed: vec![true; width],
            cheapest: vec![true; width],
        }));
    }
    rows
}

fn near_min(value: f64, min: f64) -> bool {
    value <= min + 1e-12 * min.abs().max(1.0)
}

/// Minimum expected cost over feedback kernels by backward induction over
/// input histories; marks the entries with finite and with minimal cost-to-go.
fn feedback_costs(spec: &AlphabetSpec, q: &ForwardKernel, c: &PowerConstraint, rows: &mut [Row]) -> f64 {
    let n = spec.horizon();
    // entry[i][(h, x_i)] = expected cost-to-go after choosing x_i at history h
    let mut entry: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    entry[n] = c.costs().to_vec();
    let row_min = |table: &[f64], w: usize| -> Vec<f64> {
        table.chunks(w).map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect()
    };
    for i in (0..n).rev() {
        let next_min = row_min(&entry[i + 1], spec.x_size(i + 1));
        let wy = spec.y_size(i);
        entry[i] = q
            .step(i)
            .chunks(wy)
            .zip(next_min.chunks(wy))
            .map(|(qrow, cost)| {
                qrow.iter()
                    .zip(cost)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, c)| p * c)
                    .sum()
            })
            .collect();
    }
    for row in rows.iter_mut() {
        let h = row.members[0];
        let values = &entry[row.step][h * row.width..(h + 1) * row.width];
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        row.allowed = values.iter().map(|v| v.is_finite()).collect();
        row.cheapest = values.iter().map(|&v| v.is_finite() && near_min(v, min)).collect();
    }
    row_min(&entry[0], spec.x_size(0))[0]
}

/// Minimum expected cost over open-loop inputs: the cheapest input path,
/// found by backward induction over input prefixes.
fn open_loop_costs(spec: &AlphabetSpec, qp: &[f64], weights: &[f64], rows: &mut [Row]) -> f64 {
    let n = spec.horizon();
    let mut path_cost = vec![0.0; spec.x_paths()];
    for c in 0..spec.cells() {
        if qp[c] > 0.0 {
            path_cost[spec.x_path(c)] += qp[c] * weights[c];
        }
    }
    // to_go[i][x^i] = cheapest completion of the input prefix x^i
    let mut to_go: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    to_go[n] = path_cost;
    for i in (0..n).rev() {
        let w = spec.x_size(i + 1);
        to_go[i] = to_go[i + 1]
            .chunks(w)
            .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
    }
    let mut k_of_row = vec![0usize; spec.steps()];
    for row in rows.iter_mut() {
        // rows of a step are laid out in input-prefix order
        let k = k_of_row[row.step];
        k_of_row[row.step] += 1;
        let values = &to_go[row.step][k * row.width..(k + 1) * row.width];
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        row.allowed = values.iter().map(|v| v.is_finite()).collect();
        row.cheapest = values.iter().map(|&v| v.is_finite() && near_min(v, min)).collect();
    }
    to_go[0].iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirinfo::directed_information_sum;
    use crate::measures::{binary_entropy, bsc_row};
    use std::f64::consts::LN_2;

    fn bsc(spec: &AlphabetSpec, eps: f64) -> ForwardKernel {
        ForwardKernel::memoryless(spec, |_, x| bsc_row(x, eps)).unwrap()
    }

    #[test]
    fn expected_cost_anchors() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let p = BackwardKernel::uniform(&spec);
        let q = bsc(&spec, 0.1);
        let zero = PowerConstraint::per_letter(&spec, |_, _| 0.0, 1.0).unwrap();
        assert_eq!(expected_cost(&p, &q, &zero).unwrap(), 0.0);
        let flat = PowerConstraint::per_letter(&spec, |_, _| 2.5, 1.0).unwrap();
        assert!((expected_cost(&p, &q, &flat).unwrap() - 2.5).abs() < 1e-15);
        let linear = PowerConstraint::per_letter(&spec, |_, x| x as f64, 1.0).unwrap();
        assert!((expected_cost(&p, &q, &linear).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infinite_cost_without_mass_is_free() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let c = PowerConstraint::new(spec.clone(), vec![0.0, f64::INFINITY], 1.0).unwrap();
        let p = BackwardKernel::new(spec.clone(), vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(expected_cost(&p, &bsc(&spec, 0.1), &c).unwrap(), 0.0);
        let u = BackwardKernel::uniform(&spec);
        assert_eq!(expected_cost(&u, &bsc(&spec, 0.1), &c).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_malformed_constraints() {
        let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
        assert!(PowerConstraint::new(spec.clone(), vec![0.0; 3], 1.0).is_err());
        assert!(PowerConstraint::new(spec.clone(), vec![-1.0; 8], 1.0).is_err());
        assert!(PowerConstraint::new(spec.clone(), vec![0.0; 8], f64::NAN).is_err());
        assert!(PowerConstraint::new(spec, vec![0.0; 8], 1.0).is_ok());
    }

    #[test]
    fn identity_channel_capacity_is_one_bit() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let r = solve_capacity(&bsc(&spec, 0.0), None, &SolverConfig::default()).unwrap();
        assert!((r.value.nats() - LN_2).abs() < 1e-9);
        assert!((r.argmax.step(0)[0] - 0.5).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn bsc_capacity_matches_closed_form() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let r = solve_capacity(&bsc(&spec, 0.1), None, &SolverConfig::default()).unwrap();
        assert!((r.value.nats() - (LN_2 - binary_entropy(0.1))).abs() < 1e-9);
        let grid = brute_force_capacity(&bsc(&spec, 0.1), None, 100).unwrap();
        assert!((grid.nats() - (LN_2 - binary_entropy(0.1))).abs() < 1e-12);
    }

    #[test]
    fn input_blind_channel_has_zero_capacity() {
        let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
        let q = ForwardKernel::from_fn(&spec, |_, _, ys| if ys.is_empty() { vec![0.3, 0.7] } else { vec![0.6, 0.4] })
            .unwrap();
        let r = solve_capacity(&q, None, &SolverConfig::default()).unwrap();
        assert!(r.value.nats() < 1e-12);
        assert!(brute_force_capacity(&q, None, 4).unwrap().nats() < 1e-12);
    }

    #[test]
    fn trace_never_decreases() {
        let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
        let q = ForwardKernel::from_fn(&spec, |i, xs, ys| {
            let e = if i == 1 && ys[0] != xs[0] { 0.35 } else { 0.08 };
            bsc_row(xs[i], e)
        })
        .unwrap();
        let r = solve_capacity(&q, None, &SolverConfig::default()).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let check = directed_information_sum(&r.argmax, &q).unwrap().sum_form.nats();
        assert!((check - r.value.nats()).abs() < 1e-12);
    }

    #[test]
    fn constrained_capacity_respects_budget() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let c = PowerConstraint::per_letter(&spec, |_, x| x as f64, 0.3).unwrap();
        let r = solve_capacity(&bsc(&spec, 0.1), Some(&c), &SolverConfig::default()).unwrap();
        let slack = r.constraint_slack.unwrap();
        assert!((-1e-9..=1e-6).contains(&slack));
        assert!((r.argmax.step(0)[1] - 0.3).abs() < 1e-5);
        let grid = brute_force_capacity(&bsc(&spec, 0.1), Some(&c), 200).unwrap();
        assert!(r.value.nats() >= grid.nats() - 1e-9);
    }

    #[test]
    fn infeasible_and_boundary_budgets() {
        let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
        let c = PowerConstraint::per_letter(&spec, |_, x| 1.0 + x as f64, 0.5).unwrap();
        let err = solve_capacity(&bsc(&spec, 0.1), Some(&c), &SolverConfig::default()).unwrap_err();
        assert_eq!(err, Error::InfeasibleConstraint { minimum: 1.0, budget: 0.5 });
        let tight = c.with_budget(1.0).unwrap();
        let r = solve_capacity(&bsc(&spec, 0.1), Some(&tight), &SolverConfig::default()).unwrap();
        assert_eq!(r.value, InfoValue::ZERO);
        assert_eq!(r.argmax.step(0), &[1.0, 0.0]);
    }

    #[test]
    fn forbidden_inputs_are_never_used() {
        let spec = AlphabetSpec::uniform(0, 3, 3).unwrap();
        let q = ForwardKernel::memoryless(&spec, |_, x| {
            let mut row = vec![0.05; 3];
            row[x] = 0.9;
            row
        })
        .unwrap();
        let c = PowerConstraint::new(spec.clone(), vec![0.0, 1.0, f64::INFINITY], 0.4).unwrap();
        let r = solve_capacity(&q, Some(&c), &SolverConfig::default()).unwrap();
        assert_eq!(r.argmax.step(0)[2], 0.0);
        let grid = brute_force_capacity(&q, Some(&c), 100).unwrap();
        assert!(r.value.nats() >= grid.nats() - 1e-9);
        assert!(r.value.nats() <= grid.nats() + 1e-3);
    }

    #[test]
    fn open_loop_never_beats_feedback() {
        let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
        let q = ForwardKernel::from_fn(&spec, |i, xs, ys| {
            let e = if i == 1 && ys[0] == 1 { 0.3 } else { 0.1 };
            bsc_row(xs[i], e)
        })
        .unwrap();
        let cfg = SolverConfig::default();
        let fb = solve_capacity_with(&q, None, &cfg, KernelClass::Feedback).unwrap();
        let nf = solve_capacity_with(&q, None, &cfg, KernelClass::NoFeedback).unwrap();
        assert!(nf.argmax.is_feedback_free(0.0));
        assert!(fb.value.nats() >= nf.value.nats() - 1e-9);
    }
}
