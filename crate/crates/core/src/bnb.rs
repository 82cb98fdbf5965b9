//! Outcome-space simplicial branch-and-bound.
//!
//! The search runs over simplices covering the box of attainable `Cx`
//! values. Every vertex `v` of every simplex carries the optimal value of the
//! support problem in direction `v`; those values never change and are handed
//! down to children, so each iteration solves exactly one new convex program
//! (at the midpoint of the split edge) and two relaxation LPs (one per child).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use nalgebra::DVector;

use crate::convex::{compute_outcome_bounds, find_interior_point, solve_cp, SupportPoint};
use crate::dc::{decompose, DcDecomposition, OutcomePoint};
use crate::error::{Error, Result};
use crate::instance::{validate_instance, BoundednessCheck, QcqpInstance};
use crate::relaxation::lower_bound;
use crate::simplex::{bisect, initial_simplex, Simplex};

/// Outcome widths at or below this (relative) are treated as zero.
const ZERO_WIDTH_TOL: f64 = 1e-9;
/// Zero-width directions are padded to this fraction of the widest direction
/// so that the initial cover stays full-dimensional.
const ZERO_WIDTH_PAD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub epsilon: f64,
    pub max_iters: Option<u64>,
    pub time_limit_seconds: Option<f64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iters: None,
            time_limit_seconds: None,
        }
    }
}

impl SolverParams {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode {
    pub simplex: Simplex,
    /// Support value of each vertex, in vertex order.
    pub mu: DVector<f64>,
    pub lb: f64,
    pub id: u64,
}

/// Heap entry ordered so that `BinaryHeap` pops the least bound, oldest first.
#[derive(Debug)]
struct Queued(BnbNode);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .lb
            .total_cmp(&self.0.lb)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub x_star: DVector<f64>,
    pub y_star: OutcomePoint,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Support problems, `r + 1` at start plus one per iteration.
    pub cp_solves: u64,
    /// Relaxation evaluations, one at start plus two per iteration.
    pub lp_solves: u64,
    /// Outcome bound problems (`2r`).
    pub bound_solves: u64,
    pub phase_one_solves: u64,
}

/// State of one iteration at the moment its node was selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: u64,
    /// Bound of the selected node, equal to the global lower bound then.
    pub lb: f64,
    pub ub: f64,
    pub node_diameter: f64,
    pub gap_bound: f64,
}

/// Direction and optimal value of one solved support problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportRecord {
    pub lambda: DVector<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    EpsOptimal,
    IterLimit,
    TimeLimit,
    Infeasible,
    UnboundedSet,
    AlreadyConvex,
    NumericFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::EpsOptimal => "eps_optimal",
            SolveStatus::IterLimit => "iter_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::UnboundedSet => "unbounded_set",
            SolveStatus::AlreadyConvex => "already_convex",
            SolveStatus::NumericFailure => "numeric_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x_star: Option<DVector<f64>>,
    pub y_star: Option<OutcomePoint>,
    pub ub: f64,
    pub lb: f64,
    pub gap: f64,
    pub epsilon: f64,
    pub iterations: u64,
    pub counters: Counters,
    pub wall_time_seconds: f64,
    pub trace: Vec<IterationRecord>,
    /// `(lo, hi)` of each `C_i x` over the feasible set, when computed.
    pub outcome_bounds: Option<(DVector<f64>, DVector<f64>)>,
    pub supports: Vec<SupportRecord>,
    /// Message of the error behind a non-optimal terminal status.
    pub message: Option<String>,
}

impl SolveReport {
    pub fn value(&self) -> Option<f64> {
        self.x_star.as_ref().map(|_| self.ub)
    }

    fn failed(status: SolveStatus, epsilon: f64, message: String, started: Instant) -> Self {
        Self {
            status,
            x_star: None,
            y_star: None,
            ub: f64::INFINITY,
            lb: f64::NEG_INFINITY,
            gap: f64::INFINITY,
            epsilon,
            iterations: 0,
            counters: Counters::default(),
            wall_time_seconds: started.elapsed().as_secs_f64(),
            trace: Vec::new(),
            outcome_bounds: None,
            supports: Vec::new(),
            message: Some(message),
        }
    }
}

/// Search state after initialization; advance it with [`BnbState::iterate`].
#[derive(Debug)]
pub struct BnbState {
    inst: QcqpInstance,
    dc: DcDecomposition,
    interior: DVector<f64>,
    params: SolverParams,
    outcome_lo: DVector<f64>,
    outcome_hi: DVector<f64>,
    nodes: BinaryHeap<Queued>,
    incumbent: Incumbent,
    /// Certified global lower bound, see [`BnbState::lower_bound`].
    lower: f64,
    /// Least bound among pruned children; each was within epsilon of the
    /// incumbent value when pruned.
    pruned_floor: f64,
    iteration: u64,
    next_id: u64,
    counters: Counters,
    trace: Vec<IterationRecord>,
    supports: Vec<SupportRecord>,
    /// Set once the node set has been exhausted.
    exhausted: bool,
}

impl BnbState {
    pub fn incumbent(&self) -> &Incumbent {
        &self.incumbent
    }

    pub fn upper_bound(&self) -> f64 {
        self.incumbent.ub
    }

    /// `min(least open bound, least pruned bound, UB)`: a bound on the global
    /// minimum that never exceeds the incumbent value. The least open bound
    /// alone can rise above UB once the incumbent improves past nodes that
    /// were queued earlier.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn trace(&self) -> &[IterationRecord] {
        &self.trace
    }

    pub fn supports(&self) -> &[SupportRecord] {
        &self.supports
    }

    pub fn decomposition(&self) -> &DcDecomposition {
        &self.dc
    }

    pub fn outcome_bounds(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.outcome_lo, &self.outcome_hi)
    }

    pub fn open_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// The node the next iteration will branch on.
    pub fn peek(&self) -> Option<&BnbNode> {
        self.nodes.peek().map(|q| &q.0)
    }

    /// `UB - LB <= epsilon`, or no open node is left.
    pub fn is_converged(&self) -> bool {
        self.exhausted || self.incumbent.ub - self.lower <= self.params.epsilon
    }

    fn support(&mut self, lambda: &DVector<f64>) -> Result<SupportPoint> {
        let sp = solve_cp(&self.dc, &self.inst, lambda, &self.interior)?;
        self.counters.cp_solves += 1;
        self.supports.push(SupportRecord {
            lambda: lambda.clone(),
            mu: sp.mu,
        });
        Ok(sp)
    }

    fn offer(&mut self, sp: &SupportPoint) {
        let value = sp.y.nu();
        if value < self.incumbent.ub {
            self.incumbent = Incumbent {
                x_star: sp.x.clone(),
                y_star: sp.y.clone(),
                ub: value,
            };
        }
    }

    fn push(&mut self, simplex: Simplex, mu: DVector<f64>, lb: f64) {
        let id = self.next_id;
        self.next_id += 1;
        self.nodes.push(Queued(BnbNode {
            simplex,
            mu,
            lb,
            id,
        }));
    }

    /// One pass of branch, bound, prune, and select on the least-bound node.
    pub fn iterate(&mut self) -> Result<()> {
        let Some(Queued(node)) = self.nodes.pop() else {
            self.exhausted = true;
            return Ok(());
        };
        let diameter = node.simplex.diameter();
        self.trace.push(IterationRecord {
            iter: self.iteration,
            lb: node.lb,
            ub: self.incumbent.ub,
            node_diameter: diameter,
            gap_bound: gap_bound(&node.simplex),
        });

        let split = bisect(&node.simplex);
        let sp = self.support(&split.midpoint)?;
        self.offer(&sp);

        let (i, j) = split.edge;
        let mut mu_first = node.mu.clone();
        mu_first[j] = sp.mu;
        let mut mu_second = node.mu.clone();
        mu_second[i] = sp.mu;

        let first = lower_bound(&split.first, &mu_first)?;
        let second = lower_bound(&split.second, &mu_second)?;
        self.counters.lp_solves += 2;

        let eps = self.params.epsilon;
        for (simplex, mu, lb) in [
            (split.first, mu_first, first.lb),
            (split.second, mu_second, second.lb),
        ] {
            if self.incumbent.ub - lb > eps {
                self.push(simplex, mu, lb);
            } else {
                self.pruned_floor = self.pruned_floor.min(lb);
            }
        }
        // every region is fathomed within epsilon once the queue runs dry
        self.exhausted = self.nodes.is_empty();
        self.refresh_lower();
        self.iteration += 1;
        Ok(())
    }

    /// Open nodes bound the regions still searched, pruned nodes the rest;
    /// neither can certify more than the incumbent value itself.
    fn refresh_lower(&mut self) {
        let open = self.nodes.peek().map_or(f64::INFINITY, |q| q.0.lb);
        self.lower = open.min(self.pruned_floor).min(self.incumbent.ub);
    }

    fn report(&self, status: SolveStatus, started: Instant, message: Option<String>) -> SolveReport {
        SolveReport {
            status,
            x_star: Some(self.incumbent.x_star.clone()),
            y_star: Some(self.incumbent.y_star.clone()),
            ub: self.incumbent.ub,
            lb: self.lower,
            gap: self.incumbent.ub - self.lower,
            epsilon: self.params.epsilon,
            iterations: self.iteration,
            counters: self.counters,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            trace: self.trace.clone(),
            outcome_bounds: Some((self.outcome_lo.clone(), self.outcome_hi.clone())),
            supports: self.supports.clone(),
            message,
        }
    }
}

/// Builds the initial cover, solves the `r + 1` vertex support problems, and
/// bounds the root.
pub fn initialize(inst: &QcqpInstance, params: SolverParams) -> Result<BnbState> {
    if !(params.epsilon > 0.0) {
        return Err(Error::Numeric("epsilon must be positive".into()));
    }
    let report = validate_instance(inst);
    if !report.valid {
        return Err(Error::Validation(report.violations));
    }
    let dc = decompose(inst)?;
    let interior = find_interior_point(inst)?;
    let (lo, hi) = compute_outcome_bounds(&dc, inst, &interior)?;
    let r = lo.len() as u64;
    let (lo, hi) = pad_zero_widths(lo, hi);
    let mut state = BnbState {
        inst: inst.clone(),
        dc,
        interior,
        params,
        outcome_hi: hi.clone().unwrap_or_else(|| lo.clone()),
        outcome_lo: lo.clone(),
        nodes: BinaryHeap::new(),
        incumbent: Incumbent {
            x_star: DVector::zeros(inst.n()),
            y_star: OutcomePoint::new(f64::INFINITY, DVector::zeros(0)),
            ub: f64::INFINITY,
        },
        lower: f64::NEG_INFINITY,
        pruned_floor: f64::INFINITY,
        iteration: 0,
        next_id: 0,
        counters: Counters {
            phase_one_solves: 1,
            bound_solves: 2 * r,
            ..Counters::default()
        },
        trace: Vec::new(),
        supports: Vec::new(),
        exhausted: false,
    };
    seed(&mut state, &lo, hi.as_ref())?;
    Ok(state)
}

/// Pads zero-width directions; `None` in place of `hi` when every direction
/// has zero width.
fn pad_zero_widths(lo: DVector<f64>, hi: DVector<f64>) -> (DVector<f64>, Option<DVector<f64>>) {
    let scale = 1.0 + lo.iter().chain(hi.iter()).fold(0.0_f64, |a, b| a.max(b.abs()));
    let tol = ZERO_WIDTH_TOL * scale;
    let widths = &hi - &lo;
    let widest = widths.max();
    if widest <= tol {
        return (lo, None);
    }
    let mut hi = hi;
    for i in 0..hi.len() {
        if widths[i] <= tol {
            hi[i] = lo[i] + (ZERO_WIDTH_PAD * widest).max(tol);
        }
    }
    (lo, Some(hi))
}

fn seed(state: &mut BnbState, lo: &DVector<f64>, hi: Option<&DVector<f64>>) -> Result<()> {
    let Some(hi) = hi else {
        // C x is constant over the feasible set, so the support problem at
        // that constant minimizes the objective exactly.
        let sp = state.support(lo)?;
        state.offer(&sp);
        state.lower = state.incumbent.ub;
        state.exhausted = true;
        return Ok(());
    };
    let root = initial_simplex(lo, hi)?;
    let mut mu = DVector::zeros(root.vertices().len());
    for (j, v) in root.vertices().iter().enumerate() {
        let sp = state.support(v)?;
        state.offer(&sp);
        mu[j] = sp.mu;
    }
    let lb = lower_bound(&root, &mu)?;
    state.counters.lp_solves += 1;
    state.push(root, mu, lb.lb);
    state.refresh_lower();
    Ok(())
}

/// Runs the search to epsilon-optimality or a limit.
///
/// Expected algorithmic outcomes (convex objective, empty interior, unbounded
/// feasible set, numerical breakdown) are reported through the status;
/// malformed input is an error.
pub fn solve(inst: &QcqpInstance, params: SolverParams) -> Result<SolveReport> {
    let started = Instant::now();
    let mut state = match initialize(inst, params) {
        Ok(state) => state,
        Err(e) => {
            let status = match &e {
                Error::AlreadyConvex => SolveStatus::AlreadyConvex,
                Error::SlaterViolated { .. } => SolveStatus::Infeasible,
                Error::UnboundedFeasibleSet(_) => SolveStatus::UnboundedSet,
                Error::Numeric(_) => SolveStatus::NumericFailure,
                _ => return Err(e),
            };
            return Ok(SolveReport::failed(status, params.epsilon, e.to_string(), started));
        }
    };
    loop {
        if state.is_converged() {
            return Ok(state.report(SolveStatus::EpsOptimal, started, None));
        }
        if params.max_iters.is_some_and(|cap| state.iteration >= cap) {
            return Ok(state.report(SolveStatus::IterLimit, started, None));
        }
        if params
            .time_limit_seconds
            .is_some_and(|limit| started.elapsed().as_secs_f64() >= limit)
        {
            return Ok(state.report(SolveStatus::TimeLimit, started, None));
        }
        if let Err(e) = state.iterate() {
            return Ok(state.report(SolveStatus::NumericFailure, started, Some(e.to_string())));
        }
    }
}

/// `Verified` once the outcome bound problems all have finite optima, which is
/// the only boundedness evidence the solver relies on.
pub fn check_boundedness(inst: &QcqpInstance) -> Result<BoundednessCheck> {
    let dc = decompose(inst)?;
    let interior = find_interior_point(inst)?;
    compute_outcome_bounds(&dc, inst, &interior)?;
    Ok(BoundednessCheck::Verified)
}

/// `4 * max_j |v_j| * diameter`: once this is at most epsilon for the
/// selected simplex, the gap is closed.
pub fn gap_bound(s: &Simplex) -> f64 {
    4.0 * s.max_vertex_norm() * s.diameter()
}

/// Worst-case iteration count
/// `floor( prod(hi - lo) / sqrt(r+1) * (8 sqrt(2) r dbar / eps)^r )`, where
/// `dbar` is the largest vertex norm of the initial cover. Returns `u64::MAX`
/// when the value is not representable.
pub fn iteration_cap(lo: &DVector<f64>, hi: &DVector<f64>, epsilon: f64) -> u64 {
    let r = lo.len();
    let rf = r as f64;
    let lo_sq: f64 = lo.iter().map(|x| x * x).sum();
    let dbar = (0..r)
        .map(|s| {
            let far = lo[s] + rf * (hi[s] - lo[s]);
            (lo_sq - lo[s] * lo[s] + far * far).sqrt()
        })
        .fold(0.0, f64::max);
    let volume: f64 = hi.iter().zip(lo.iter()).map(|(h, l)| h - l).product();
    let base = 8.0 * std::f64::consts::SQRT_2 * rf * dbar / epsilon;
    let value = volume / (rf + 1.0).sqrt() * base.powi(r as i32);
    if !value.is_finite() || value >= u64::MAX as f64 {
        return u64::MAX;
    }
    // absorb the last-ulp error of the closed form before flooring
    (value * (1.0 + 1e-12)).floor() as u64
}
