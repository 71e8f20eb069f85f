//! Frank-Wolfe on the convex hull of ordered placements.
//!
//! The oracle decomposes per item. Each iterate is rounded to an integer
//! placement through its ridge classifier, and the rounded placement with
//! the lowest clustering cost is returned.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureStream;
use super::kernel::{stack_features, ResidualKernel};
use super::localize::StepLocalization;
use super::oracle::{ordered_oracle, placement_matrix, StepWindow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizeOptions {
    /// Ridge regularization; defaults to `1 / (N K)`.
    pub lambda: Option<f64>,
    pub max_iters: usize,
    /// Stop when the duality gap falls below this fraction of the objective.
    pub tolerance: f64,
    /// Exact line search on the quadratic instead of `2 / (t + 2)`.
    pub line_search: bool,
    /// Number of lowest-cost distinct candidates refined by single-step
    /// moves after the iterations; zero disables refinement.
    pub polish_candidates: usize,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        LocalizeOptions {
            lambda: None,
            max_iters: 200,
            tolerance: 1e-6,
            line_search: false,
            polish_candidates: 16,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LocalizeHistory {
    /// Relaxed clustering cost at each iterate.
    pub relaxed_objective: Vec<f64>,
    /// Frank-Wolfe duality gap at each iterate.
    pub duality_gap: Vec<f64>,
    /// Integer candidates in visit order: the starting placement, then the
    /// rounding of each iterate.
    pub candidates: Vec<Vec<Vec<usize>>>,
    /// Clustering cost of each candidate.
    pub candidate_objective: Vec<f64>,
    /// Running minimum of `candidate_objective`.
    pub best_objective: Vec<f64>,
    /// Index of the lowest-cost candidate before refinement.
    pub best_index: usize,
    /// Cost of the returned placement, after refinement.
    pub polished_objective: f64,
}

impl LocalizeHistory {
    /// The best candidate and every candidate visited after it.
    pub fn after_best(&self) -> &[Vec<Vec<usize>>] {
        &self.candidates[self.best_index..]
    }
}

#[derive(Debug, Clone)]
pub struct LocalizeSolution {
    pub placements: Vec<Vec<usize>>,
    pub objective: f64,
    pub lambda: f64,
    /// Ridge classifier fit to the returned placements.
    pub classifier: DMatrix<f64>,
    pub history: LocalizeHistory,
}

impl LocalizeSolution {
    pub fn to_localization(&self, streams: &[FeatureStream], warnings: Vec<String>) -> Result<StepLocalization> {
        let mut loc = StepLocalization::from_placements(streams, &self.placements, self.classifier.ncols())?;
        loc.lambda = Some(self.lambda);
        loc.objective = Some(self.objective);
        loc.warnings = warnings;
        loc.classifier = Some(self.classifier.clone());
        Ok(loc)
    }
}

/// Places `num_steps` ordered steps in every stream. `windows` holds one
/// list of step windows per stream (an empty list leaves the item
/// unconstrained), or is empty to leave every item unconstrained.
pub fn fw_localize(
    streams: &[FeatureStream],
    windows: &[Vec<StepWindow>],
    num_steps: usize,
    options: &LocalizeOptions,
) -> Result<LocalizeSolution> {
    if num_steps < 1 {
        return Err(Error::InvalidParameter("at least one step is required".into()));
    }
    if options.max_iters < 1 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if !windows.is_empty() && windows.len() != streams.len() {
        return Err(Error::Inconsistent(format!(
            "{} window lists for {} items",
            windows.len(),
            streams.len()
        )));
    }
    let lambda = options
        .lambda
        .unwrap_or(1.0 / (streams.len() * num_steps) as f64);
    let kernel = ResidualKernel::new(stack_features(streams)?, lambda)?;
    let problem = Problem {
        streams,
        windows,
        kernel: &kernel,
        offsets: offsets(streams),
        num_steps,
    };

    let start = problem.initial_placement()?;
    let mut z = problem.stack(&start);
    let mut history = LocalizeHistory::default();
    let mut best = (problem.cost(&z), start.clone());
    history.candidates.push(start);
    history.candidate_objective.push(best.0);
    history.best_objective.push(best.0);

    let total = kernel.num_intervals() as f64;
    let mut corners: Vec<Vec<Vec<usize>>> = Vec::new();
    for t in 0..options.max_iters {
        let bz = kernel.apply(&z);
        let grad = &bz / total;
        let relaxed = z.dot(&bz) / (2.0 * total);

        let rounded = problem.round(&z)?;
        let rounded_value = problem.cost(&problem.stack(&rounded));
        if rounded_value < best.0 {
            best = (rounded_value, rounded.clone());
            history.best_index = history.candidates.len();
        }
        history.candidates.push(rounded);
        history.candidate_objective.push(rounded_value);
        history.best_objective.push(best.0);

        let corner = problem.solve_linear(&grad)?;
        if options.polish_candidates > 0 && !corners.contains(&corner) {
            corners.push(corner.clone());
        }
        let direction = problem.stack(&corner) - &z;
        let gap = -grad.dot(&direction);
        history.relaxed_objective.push(relaxed);
        history.duality_gap.push(gap);
        if direction.amax() <= 1e-12 || gap <= options.tolerance * relaxed.abs().max(f64::MIN_POSITIVE) {
            break;
        }

        let step = if options.line_search {
            let curvature = direction.dot(&kernel.apply(&direction)) / total;
            if curvature <= 0.0 {
                1.0
            } else {
                (gap / curvature).clamp(0.0, 1.0)
            }
        } else {
            2.0 / (t as f64 + 2.0)
        };
        z += direction * step;
    }

    if options.polish_candidates > 0 {
        let whitened = kernel.whitened();
        let mut pool: Vec<(f64, &Vec<Vec<usize>>)> = history
            .candidate_objective
            .iter()
            .copied()
            .zip(&history.candidates)
            .chain(corners.iter().map(|c| (problem.cost(&problem.stack(c)), c)))
            .collect();
        pool.sort_by(|a, b| a.0.total_cmp(&b.0));
        pool.dedup_by(|a, b| a.1 == b.1);
        let refined: Vec<(f64, Vec<Vec<usize>>)> = pool
            .iter()
            .take(options.polish_candidates)
            .map(|(_, c)| {
                let r = problem.polish(&whitened, (*c).clone());
                (problem.cost(&problem.stack(&r)), r)
            })
            .collect();
        for (value, r) in refined {
            if value < best.0 {
                best = (value, r);
            }
        }
    }
    history.polished_objective = best.0;

    let (objective, placements) = best;
    let classifier = kernel.classifier(&problem.stack(&placements));
    Ok(LocalizeSolution {
        placements,
        objective,
        lambda,
        classifier,
        history,
    })
}

/// Rounds a fractional labeling to the integer placement closest to the
/// predictions of its ridge classifier `W*`: per item, the ordered
/// placement minimizing `|Z_n - X_n W*|^2`, which is the linear problem
/// with costs `-2 X_n W*` since `|Z_n|^2` is fixed.
pub fn round_solution(
    relaxed: &DMatrix<f64>,
    streams: &[FeatureStream],
    windows: &[Vec<StepWindow>],
    lambda: f64,
) -> Result<Vec<Vec<usize>>> {
    let kernel = ResidualKernel::new(stack_features(streams)?, lambda)?;
    if relaxed.nrows() != kernel.num_intervals() {
        return Err(Error::Inconsistent(format!(
            "labels have {} rows, streams have {} intervals",
            relaxed.nrows(),
            kernel.num_intervals()
        )));
    }
    let problem = Problem {
        streams,
        windows,
        kernel: &kernel,
        offsets: offsets(streams),
        num_steps: relaxed.ncols(),
    };
    problem.round(relaxed)
}

fn offsets(streams: &[FeatureStream]) -> Vec<usize> {
    let mut acc = 0;
    streams
        .iter()
        .map(|s| {
            let o = acc;
            acc += s.num_intervals();
            o
        })
        .collect()
}

struct Problem<'a> {
    streams: &'a [FeatureStream],
    windows: &'a [Vec<StepWindow>],
    kernel: &'a ResidualKernel,
    offsets: Vec<usize>,
    num_steps: usize,
}

impl Problem<'_> {
    fn windows_of(&self, n: usize) -> &[StepWindow] {
        self.windows.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Per-item oracle on row blocks of `costs`, in item order.
    fn solve_linear(&self, costs: &DMatrix<f64>) -> Result<Vec<Vec<usize>>> {
        self.streams
            .par_iter()
            .enumerate()
            .map(|(n, s)| {
                let block = costs.rows(self.offsets[n], s.num_intervals()).into_owned();
                ordered_oracle(&block, self.windows_of(n)).map_err(|e| e.for_item(&s.item_id))
            })
            .collect()
    }

    /// The feasible placement closest to spreading steps evenly.
    fn initial_placement(&self) -> Result<Vec<Vec<usize>>> {
        let k = self.num_steps as f64;
        let total: usize = self.streams.iter().map(FeatureStream::num_intervals).sum();
        let mut costs = DMatrix::zeros(total, self.num_steps);
        for (n, s) in self.streams.iter().enumerate() {
            let len = s.num_intervals() as f64;
            for j in 0..self.num_steps {
                let target = ((j as f64 + 0.5) * len / k).floor();
                for t in 0..s.num_intervals() {
                    costs[(self.offsets[n] + t, j)] = (t as f64 - target).powi(2);
                }
            }
        }
        self.solve_linear(&costs)
    }

    fn round(&self, z: &DMatrix<f64>) -> Result<Vec<Vec<usize>>> {
        let w = self.kernel.classifier(z);
        let scores = self.kernel.features() * w;
        self.solve_linear(&(scores * -2.0))
    }

    /// Moves single steps within their ordering slack while the cost
    /// decreases, taking the best move per step. The change of `h` for
    /// moving step `k` from row `a` to row `b` is
    /// `(2 (G[b,k] - G[a,k]) + B[a,a] + B[b,b] - 2 B[a,b]) / 2T` with `G = B Z`.
    fn polish(&self, whitened: &DMatrix<f64>, mut placements: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        let mut g = self.kernel.apply(&self.stack(&placements));
        let diag: Vec<f64> = whitened.column_iter().map(|v| 1.0 - v.norm_squared()).collect();
        const MAX_PASSES: usize = 100;
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for (n, p) in placements.iter_mut().enumerate() {
                let len = self.streams[n].num_intervals();
                let off = self.offsets[n];
                let windows = self.windows_of(n);
                for k in 0..p.len() {
                    let lo = if k == 0 { 0 } else { p[k - 1] + 1 };
                    let hi = if k + 1 == p.len() { len } else { p[k + 1] };
                    let a = off + p[k];
                    let va = whitened.column(a);
                    let mut choice: Option<(f64, usize)> = None;
                    for tb in lo..hi {
                        if tb == p[k] || windows.get(k).and_then(Option::as_ref).is_some_and(|w| !w[tb]) {
                            continue;
                        }
                        let b = off + tb;
                        let cross = -va.dot(&whitened.column(b));
                        let delta = 2.0 * (g[(b, k)] - g[(a, k)]) + diag[a] + diag[b] - 2.0 * cross;
                        if delta < -1e-12 && choice.is_none_or(|(d, _)| delta < d) {
                            choice = Some((delta, tb));
                        }
                    }
                    if let Some((_, tb)) = choice {
                        let b = off + tb;
                        let shift = whitened.tr_mul(&(whitened.column(b) - whitened.column(a)));
                        let mut col = g.column_mut(k);
                        col -= shift;
                        col[b] += 1.0;
                        col[a] -= 1.0;
                        p[k] = tb;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        placements
    }

    fn stack(&self, placements: &[Vec<usize>]) -> DMatrix<f64> {
        let total = self.kernel.num_intervals();
        let mut z = DMatrix::zeros(total, self.num_steps);
        for (n, (s, p)) in self.streams.iter().zip(placements).enumerate() {
            z.rows_mut(self.offsets[n], s.num_intervals())
                .copy_from(&placement_matrix(s.num_intervals(), p));
        }
        z
    }

    fn cost(&self, z: &DMatrix<f64>) -> f64 {
        z.dot(&self.kernel.apply(z)) / (2.0 * self.kernel.num_intervals() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vidcluster::oracle::is_valid_placement;

    /// Each item shows the step on one interval whose features equal a
    /// fixed center; every other interval is orthogonal to it.
    fn separable(positions: &[usize], len: usize) -> Vec<FeatureStream> {
        positions
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let x = DMatrix::from_fn(len, 4, |t, j| {
                    if t == p {
                        (j == 0) as u8 as f64 * 3.0
                    } else {
                        // Distinct orthogonal directions per interval.
                        ((j == 1 + (t + n) % 3) as u8 as f64) * 0.3
                    }
                });
                FeatureStream::new(format!("v{n}"), x, 1.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn separable_single_step_is_recovered() {
        let positions = [3, 7, 1, 5];
        let streams = separable(&positions, 9);
        let sol = fw_localize(&streams, &[], 1, &LocalizeOptions::default()).unwrap();
        let got: Vec<usize> = sol.placements.iter().map(|p| p[0]).collect();
        assert_eq!(got, positions);
    }

    #[test]
    fn singleton_feasible_set_is_returned() {
        let streams = separable(&[2, 2], 6);
        let only = |t: usize| {
            let mut w = vec![false; 6];
            w[t] = true;
            Some(w)
        };
        let windows = vec![vec![only(0), only(4)], vec![only(1), only(5)]];
        let sol = fw_localize(&streams, &windows, 2, &LocalizeOptions::default()).unwrap();
        assert_eq!(sol.placements, vec![vec![0, 4], vec![1, 5]]);
    }

    #[test]
    fn best_is_running_minimum_and_valid() {
        let streams = separable(&[1, 4, 6], 8);
        for line_search in [false, true] {
            let opts = LocalizeOptions {
                line_search,
                ..LocalizeOptions::default()
            };
            let sol = fw_localize(&streams, &[], 3, &opts).unwrap();
            let h = &sol.history;
            assert!(h.best_objective.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(h.candidate_objective[h.best_index], sol.objective);
            assert!(h.relaxed_objective.iter().all(|v| v.is_finite()));
            for (s, p) in streams.iter().zip(&sol.placements) {
                assert!(is_valid_placement(s.num_intervals(), p, &[]));
            }
        }
    }

    #[test]
    fn infeasible_item_is_named() {
        let streams = separable(&[1, 1], 4);
        let windows = vec![vec![], vec![Some(vec![false; 4])]];
        match fw_localize(&streams, &windows, 1, &LocalizeOptions::default()) {
            Err(Error::Infeasible { item, step }) => {
                assert_eq!(item, "v1");
                assert_eq!(step, 0);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn rounding_keeps_integer_separable_solution() {
        let positions = [3, 0, 5];
        let streams = separable(&positions, 7);
        let placements: Vec<Vec<usize>> = positions.iter().map(|&p| vec![p]).collect();
        let mut z = DMatrix::zeros(21, 1);
        for (n, &p) in positions.iter().enumerate() {
            z[(7 * n + p, 0)] = 1.0;
        }
        assert_eq!(round_solution(&z, &streams, &[], 0.01).unwrap(), placements);
        let uniform = DMatrix::from_element(21, 1, 1.0 / 7.0);
        for (s, p) in streams.iter().zip(round_solution(&uniform, &streams, &[], 0.01).unwrap()) {
            assert!(is_valid_placement(s.num_intervals(), &p, &[]));
        }
    }
}
