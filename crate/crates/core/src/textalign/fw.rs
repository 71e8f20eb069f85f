//! Frank-Wolfe on the convex hull of monotone remappings.
//!
//! The relaxed objective is `F(U) = sum_{n<m} <U_n, P_nm U_m>` with
//! `P_nm = Y_n C Y_m^T`. Its gradient with respect to `U_n` is
//! `sum_{m != n} P_nm U_m`, computed through the vocabulary: with
//! `Q = sum_m Y_m^T U_m` (D x L), row `s` of the gradient is
//! `C[tok(s)] Q - (P_nn U_n)[s]`. `F` is homogeneous of degree two, so
//! `F(U) = <U, grad F(U)> / 2`.
//!
//! Every oracle output is an integer alignment; the solution is the best
//! of these corners, after the most promising ones are refined by
//! block-coordinate steps.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alignment::{encoded_sum_of_pairs, msa_linear_oracle, remapping_score, GlobalAlignment};
use super::progressive::progressive_encoded;
use super::token::{TokenCostMatrix, TokenSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MsaInit {
    /// Start from the progressive alignment corner; restarts fold the
    /// sequences in seeded random orders.
    Progressive,
    /// Start from uniformly random monotone corners drawn from the seed.
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MsaOptions {
    /// Template length; defaults to twice the longest sequence, widened if
    /// needed to hold the progressive starting corners.
    pub num_slots: Option<usize>,
    pub max_iters: usize,
    /// Stop when the relaxed objective changes by less than this, relatively.
    pub tolerance: f64,
    /// Exact line search on the quadratic instead of `2 / (t + 2)`.
    pub line_search: bool,
    pub init: MsaInit,
    /// Additional runs from seeded starting corners.
    pub restarts: usize,
    /// Number of best distinct corners of each run refined by
    /// block-coordinate steps. Zero keeps the raw best corner.
    pub polish_candidates: usize,
    pub seed: u64,
}

impl Default for MsaOptions {
    fn default() -> Self {
        MsaOptions {
            num_slots: None,
            max_iters: 300,
            tolerance: 1e-7,
            line_search: false,
            init: MsaInit::Progressive,
            restarts: 8,
            polish_candidates: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MsaHistory {
    /// Relaxed objective at each iterate of the first run.
    pub relaxed_objective: Vec<f64>,
    /// Sum-of-pairs cost of the oracle corner returned at each iterate.
    pub corner_objective: Vec<f64>,
    /// Running minimum over all corners visited so far, start included.
    pub best_objective: Vec<f64>,
    /// Frank-Wolfe duality gap at each iterate.
    pub duality_gap: Vec<f64>,
    /// Cost of the first run's starting corner.
    pub initial_objective: f64,
    /// Final cost reached by each run, first run included.
    pub run_objectives: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MsaSolution {
    pub alignment: GlobalAlignment,
    pub objective: f64,
    pub history: MsaHistory,
}

pub fn fw_msa(
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
    options: &MsaOptions,
) -> Result<MsaSolution> {
    if options.max_iters < 1 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if sequences.is_empty() {
        return Err(Error::EmptyInput("no sequences to align".into()));
    }
    let ids = cost.encode(sequences)?;
    let starts = starting_corners(&ids, cost, options)?;
    let num_slots = starts[0].num_slots;
    let problem = Problem::new(&ids, cost, num_slots);

    let mut history = MsaHistory::default();
    let mut best: Option<(f64, GlobalAlignment)> = None;
    for (run, start) in starts.into_iter().enumerate() {
        let (mut visited, trace) = run_frank_wolfe(&problem, start, options)?;
        visited.sort_by(|a, b| a.0.total_cmp(&b.0));
        visited.dedup_by(|a, b| a.1 == b.1);
        let mut run_best = visited[0].clone();
        for (value, corner) in visited.into_iter().take(options.polish_candidates) {
            let refined = block_coordinate_polish(&problem, corner, value)?;
            if refined.0 < run_best.0 {
                run_best = refined;
            }
        }
        if run == 0 {
            history = trace;
        }
        history.run_objectives.push(run_best.0);
        if best.as_ref().is_none_or(|b| run_best.0 < b.0) {
            best = Some(run_best);
        }
    }

    let (objective, alignment) = best.expect("at least one run");
    Ok(MsaSolution {
        alignment,
        objective,
        history,
    })
}

fn starting_corners(
    ids: &[Vec<usize>],
    cost: &TokenCostMatrix,
    options: &MsaOptions,
) -> Result<Vec<GlobalAlignment>> {
    let longest = ids.iter().map(Vec::len).max().unwrap_or(0);
    let requested = options.num_slots.unwrap_or(2 * longest).max(1);
    if requested < longest {
        return Err(Error::TooFewSlots {
            len: longest,
            slots: requested,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let runs = options.restarts + 1;

    let mut starts: Vec<GlobalAlignment> = Vec::with_capacity(runs);
    if options.init == MsaInit::Progressive {
        let mut order: Vec<usize> = (0..ids.len()).collect();
        for run in 0..runs {
            if run > 0 {
                order.shuffle(&mut rng);
            }
            let permuted: Vec<Vec<usize>> = order.iter().map(|&n| ids[n].clone()).collect();
            let folded = progressive_encoded(&permuted, cost);
            let mut slots = vec![Vec::new(); ids.len()];
            for (row, &n) in folded.slots.into_iter().zip(&order) {
                slots[n] = row;
            }
            starts.push(GlobalAlignment {
                num_slots: folded.num_slots,
                slots,
            });
        }
    }

    let num_slots = match options.num_slots {
        Some(fixed) => {
            starts.retain(|a| a.num_slots <= fixed);
            fixed
        }
        None => starts.iter().map(|a| a.num_slots).fold(requested, usize::max),
    };
    for a in &mut starts {
        a.num_slots = num_slots;
    }
    if starts.is_empty() {
        if options.init == MsaInit::Progressive {
            log::debug!("no progressive start fits into {num_slots} slots; using random corners");
        }
        for _ in 0..runs {
            let slots = ids
                .iter()
                .map(|seq| {
                    let mut picked = sample(&mut rng, num_slots, seq.len()).into_vec();
                    picked.sort_unstable();
                    picked
                })
                .collect();
            starts.push(GlobalAlignment { num_slots, slots });
        }
    }
    Ok(starts)
}

/// One Frank-Wolfe run from an integer corner. Returns every corner seen
/// (start included) with its exact cost, and the iteration trace.
fn run_frank_wolfe(
    problem: &Problem<'_>,
    start: GlobalAlignment,
    options: &MsaOptions,
) -> Result<(Vec<(f64, GlobalAlignment)>, MsaHistory)> {
    let n_seq = problem.ids.len();
    let mut iterate: Vec<DMatrix<f64>> = (0..n_seq).map(|n| start.remapping_matrix(n)).collect();
    let start_value = problem.corner_cost(&start);
    let mut best_value = start_value;
    let mut trace = MsaHistory {
        initial_objective: start_value,
        ..MsaHistory::default()
    };
    let mut visited = vec![(start_value, start)];

    let mut previous: Option<f64> = None;
    for t in 0..options.max_iters {
        let grad = problem.gradient(&iterate);
        let relaxed = 0.5 * inner(&iterate, &grad);

        let corner = GlobalAlignment {
            num_slots: problem.num_slots,
            slots: grad
                .par_iter()
                .map(msa_linear_oracle)
                .collect::<Result<Vec<_>>>()?,
        };
        let corner_value = problem.corner_cost(&corner);
        let direction: Vec<DMatrix<f64>> = (0..n_seq)
            .map(|n| corner.remapping_matrix(n) - &iterate[n])
            .collect();
        let gap = -inner(&grad, &direction);

        best_value = best_value.min(corner_value);
        trace.relaxed_objective.push(relaxed);
        trace.corner_objective.push(corner_value);
        trace.best_objective.push(best_value);
        trace.duality_gap.push(gap);
        visited.push((corner_value, corner));

        if direction.iter().all(|d| d.amax() <= 1e-12) {
            break;
        }
        if let Some(prev) = previous {
            if (relaxed - prev).abs() <= options.tolerance * prev.abs().max(1.0) {
                break;
            }
        }
        previous = Some(relaxed);

        let step = if options.line_search {
            // F(U + gD) = F(U) + g <grad, D> + g^2 F(D)
            let curvature = 0.5 * inner(&direction, &problem.gradient(&direction));
            if curvature <= 0.0 {
                1.0
            } else {
                (gap / (2.0 * curvature)).clamp(0.0, 1.0)
            }
        } else {
            2.0 / (t as f64 + 2.0)
        };
        for (u, d) in iterate.iter_mut().zip(&direction) {
            *u += d * step;
        }
    }
    Ok((visited, trace))
}

/// Block-coordinate Frank-Wolfe passes from an integer corner. The
/// objective is linear in each block `U_n` once the others are fixed, so an
/// exact line search always takes the full step to the block's oracle
/// corner and iterates stay integer. Passes repeat until no block moves.
fn block_coordinate_polish(
    problem: &Problem<'_>,
    mut current: GlobalAlignment,
    mut value: f64,
) -> Result<(f64, GlobalAlignment)> {
    let cost = problem.cost;
    // spread[(a, l)] = sum of C[a, b] over every token b placed in slot l.
    let mut spread = DMatrix::<f64>::zeros(cost.len(), problem.num_slots);
    for (row, seq) in current.slots.iter().zip(problem.ids) {
        for (&l, &b) in row.iter().zip(seq) {
            let mut col = spread.column_mut(l);
            col += cost.matrix().column(b);
        }
    }
    let tol = 1e-9 * value.abs().max(1.0);
    loop {
        let mut moved = false;
        for (n, seq) in problem.ids.iter().enumerate() {
            let own = &current.slots[n];
            let mut grad = DMatrix::from_fn(seq.len(), problem.num_slots, |s, l| spread[(seq[s], l)]);
            for (&l, &b) in own.iter().zip(seq) {
                for (s, &a) in seq.iter().enumerate() {
                    grad[(s, l)] -= cost.cost(a, b);
                }
            }
            let corner = msa_linear_oracle(&grad)?;
            if remapping_score(&grad, own) - remapping_score(&grad, &corner) > tol {
                for (&l, &b) in own.iter().zip(seq) {
                    let mut col = spread.column_mut(l);
                    col -= cost.matrix().column(b);
                }
                for (&l, &b) in corner.iter().zip(seq) {
                    let mut col = spread.column_mut(l);
                    col += cost.matrix().column(b);
                }
                current.slots[n] = corner;
                moved = true;
            }
        }
        let new_value = problem.corner_cost(&current);
        if !moved || new_value >= value {
            value = value.min(new_value);
            break;
        }
        value = new_value;
    }
    Ok((value, current))
}

/// Relaxed sum-of-pairs objective at a fractional point, one `S_n x L`
/// block per sequence.
pub fn relaxed_msa_objective(
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
    point: &[DMatrix<f64>],
) -> Result<f64> {
    let ids = cost.encode(sequences)?;
    if point.len() != ids.len() {
        return Err(Error::Inconsistent("one block per sequence is required".into()));
    }
    let num_slots = point.first().map(|u| u.ncols()).unwrap_or(0);
    for (u, seq) in point.iter().zip(&ids) {
        if u.nrows() != seq.len() || u.ncols() != num_slots {
            return Err(Error::Inconsistent("fractional remapping has the wrong shape".into()));
        }
    }
    let problem = Problem::new(&ids, cost, num_slots);
    Ok(0.5 * inner(point, &problem.gradient(point)))
}

struct Problem<'a> {
    ids: &'a [Vec<usize>],
    cost: &'a TokenCostMatrix,
    num_slots: usize,
    self_blocks: Vec<DMatrix<f64>>,
}

impl<'a> Problem<'a> {
    fn new(ids: &'a [Vec<usize>], cost: &'a TokenCostMatrix, num_slots: usize) -> Self {
        let self_blocks = ids
            .iter()
            .map(|seq| DMatrix::from_fn(seq.len(), seq.len(), |a, b| cost.cost(seq[a], seq[b])))
            .collect();
        Problem {
            ids,
            cost,
            num_slots,
            self_blocks,
        }
    }

    fn corner_cost(&self, corner: &GlobalAlignment) -> f64 {
        encoded_sum_of_pairs(corner, self.ids, self.cost)
    }

    fn gradient(&self, point: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let mut totals = DMatrix::<f64>::zeros(self.cost.len(), self.num_slots);
        for (u, seq) in point.iter().zip(self.ids) {
            for (s, &id) in seq.iter().enumerate() {
                let mut row = totals.row_mut(id);
                row += u.row(s);
            }
        }
        let spread = self.cost.matrix() * totals;
        point
            .par_iter()
            .zip(self.ids.par_iter())
            .zip(self.self_blocks.par_iter())
            .map(|((u, seq), block)| {
                let mut g = block * u;
                g.neg_mut();
                for (s, &id) in seq.iter().enumerate() {
                    let mut row = g.row_mut(s);
                    row += spread.row(id);
                }
                g
            })
            .collect()
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}
