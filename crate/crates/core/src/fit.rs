//! The maximum-depth (deepest) fit.
//!
//! For simple regression the directional depth is piecewise constant on the
//! arrangement of dual lines and upper semicontinuous, so its maximum is
//! attained at a line through two observations. [`fit_exact_p2`] enumerates
//! all such lines with a rotational sweep and averages the tie set.
//! [`fit_search`] handles any p with a multi-start simplex search and never
//! claims exactness.

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::depth::{rd_from_residuals, rd_normalized, CovariateGroups, DirectionBudget};
use crate::error::{DepthError, Result};
use crate::linalg;
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::seeding::{derive_seed, rng};
use crate::sweep;
use crate::types::{extend_w, DepthValue, ObservationSet, ParamVector};

/// Candidate fits closer than this (per coordinate) are the same line.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    ExactP2,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_hat: ParamVector,
    pub depth: DepthValue,
    pub tie_set_size: usize,
    pub method: FitMethod,
    pub evaluations: u64,
    /// Largest depth among the candidate lines. Equals `depth.normalized`
    /// unless averaging a tie set leaves the deepest region.
    pub candidate_depth: f64,
}

/// Sorts lexicographically and merges candidates within [`TIE_TOLERANCE`].
pub(crate) fn dedup_ties(mut lines: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    lines.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for l in lines {
        let dup = kept
            .iter()
            .any(|k| k.iter().zip(&l).all(|(a, b)| (a - b).abs() <= TIE_TOLERANCE));
        if !dup {
            kept.push(l);
        }
    }
    kept
}

fn average(lines: &[Vec<f64>]) -> Vec<f64> {
    let p = lines[0].len();
    (0..p)
        .map(|j| lines.iter().map(|l| l[j]).sum::<f64>() / lines.len() as f64)
        .collect()
}

/// Every line through two observations with distinct covariates.
pub fn pairwise_lines(set: &ObservationSet) -> Result<Vec<ParamVector>> {
    if set.p() != 2 {
        return Err(DepthError::Unsupported("pairwise lines require p = 2".into()));
    }
    let (x, y) = (set.xs(), set.ys());
    let mut out = Vec::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[i] != x[j] {
                let t = (y[j] - y[i]) / (x[j] - x[i]);
                out.push(ParamVector::new(vec![y[i] - t * x[i], t])?);
            }
        }
    }
    Ok(out)
}

fn n_f64(set: &ObservationSet) -> f64 {
    set.len() as f64
}

/// Residuals of the line through observations `i` and `j`, scaled by
/// `|x_j - x_i|`. Both defining observations get an exact zero.
pub(crate) fn pair_residuals(x: &[f64], y: &[f64], i: usize, j: usize) -> Vec<f64> {
    let (dx, dy) = (x[j] - x[i], y[j] - y[i]);
    (0..x.len())
        .map(|k| ((y[k] - y[i]) * dx - dy * (x[k] - x[i])) * dx.signum())
        .collect()
}

/// Exact deepest line for simple regression.
pub fn fit_exact_p2(set: &ObservationSet) -> Result<FitResult> {
    if set.p() != 2 {
        return Err(DepthError::Unsupported(format!(
            "exact fit requires p = 2, got p = {}",
            set.p()
        )));
    }
    let (x, y) = (set.xs(), set.ys());
    if x.iter().all(|&v| v == x[0]) {
        return Err(DepthError::Degenerate(
            "all covariate values are identical; no non-vertical line through two observations".into(),
        ));
    }
    let outcome = sweep::deepest_lines(&x, &y);
    let ties = dedup_ties(outcome.tie_lines.iter().map(|l| l.to_vec()).collect());
    let beta_hat = ParamVector::new(average(&ties))?;
    let depth = if ties.len() == 1 {
        // the rounded line misses its two defining observations by an ulp;
        // their residuals are zero by construction
        let (i, j) = outcome.tie_pairs[0];
        let groups = CovariateGroups::new(&x);
        let (count, k, right) = groups.directional_count(&pair_residuals(&x, &y, i, j));
        DepthValue {
            normalized: count as f64 / n_f64(set),
            count: Some(count as f64),
            exact: true,
            witness_direction: Some(groups.cut_direction(k, right)),
        }
    } else {
        rd_normalized(set, &beta_hat, None)?
    };
    Ok(FitResult {
        beta_hat,
        depth,
        tie_set_size: ties.len(),
        method: FitMethod::ExactP2,
        evaluations: outcome.evaluations,
        candidate_depth: outcome.best_count as f64 / n_f64(set),
    })
}

/// Directions used per depth evaluation inside [`fit_search`] for p >= 3.
pub const SEARCH_DIRECTIONS: usize = 512;
const ELEMENTAL_DRAWS_PER_DIM: usize = 20;
const PIVOT_PASSES: usize = 8;
const PIVOT_CANDIDATES: usize = 64;

/// Multi-start simplex search for the deepest fit in any dimension.
///
/// Restart 0 starts from least squares; every further restart starts from
/// the deepest of a batch of seeded elemental fits (hyperplanes through p
/// random observations), improved by swapping defining observations while
/// that deepens the fit. Elemental fits are scored with their defining
/// residuals at exact zero. Deterministic given `seed`.
pub fn fit_search(set: &ObservationSet, restarts: usize, seed: u64) -> Result<FitResult> {
    if restarts < 1 {
        return Err(DepthError::InvalidArgument("restarts must be >= 1".into()));
    }
    let p = set.p();
    let n = set.len();
    let rows: Vec<Vec<f64>> = set.iter().map(extend_w).collect();
    let ys = set.ys();
    let budget = DirectionBudget {
        dirs: SEARCH_DIRECTIONS,
        seed,
    };
    let mut evaluations = 0u64;
    let depth_of = |b: &[f64], evaluations: &mut u64| -> f64 {
        *evaluations += 1;
        match ParamVector::new(b.to_vec()) {
            Ok(beta) => rd_normalized(set, &beta, Some(budget)).map(|d| d.normalized).unwrap_or(0.0),
            Err(_) => 0.0,
        }
    };

    let ls = linalg::least_squares(&rows, &ys).unwrap_or_else(|_| vec![0.0; p]);
    let scale = {
        let mut abs_res: Vec<f64> = rows
            .iter()
            .zip(&ys)
            .map(|(w, y)| (y - w.iter().zip(&ls).map(|(a, b)| a * b).sum::<f64>()).abs())
            .collect();
        abs_res.sort_by(f64::total_cmp);
        abs_res[abs_res.len() / 2].max(1e-3)
    };

    // depth of the hyperplane through the observations `idx`, whose
    // residuals are pinned at exact zero
    let elemental = |idx: &[usize], evaluations: &mut u64| -> Option<(f64, Vec<f64>)> {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        let b = linalg::solve(&m, &rhs).ok()?;
        if !b.iter().all(|v| v.is_finite()) {
            return None;
        }
        *evaluations += 1;
        let r = pinned_residuals(&rows, &ys, &b, idx);
        let d = rd_from_residuals(set, &r, Some(budget)).ok()?;
        Some((d.normalized, b))
    };

    let mut best: Option<(f64, Vec<f64>, Option<Vec<usize>>)> = None;
    for restart in 0..restarts {
        let mut g = rng(derive_seed(seed, "fit-search", restart as u64));
        let (start, start_depth, pinned) = if restart == 0 || n < p {
            let d = depth_of(&ls, &mut evaluations);
            (ls.clone(), d, None)
        } else {
            let mut deepest: Option<(f64, Vec<f64>, Vec<usize>)> = None;
            for _ in 0..ELEMENTAL_DRAWS_PER_DIM * p {
                let idx = sample(&mut g, n, p).into_vec();
                if let Some((d, b)) = elemental(&idx, &mut evaluations) {
                    if deepest.as_ref().map_or(true, |(bd, ..)| d > *bd) {
                        deepest = Some((d, b, idx));
                    }
                }
            }
            match deepest {
                Some((mut d, mut b, mut idx)) => {
                    // swap one defining observation at a time while that deepens the fit
                    for _ in 0..PIVOT_PASSES {
                        let mut improved = false;
                        for slot in 0..p {
                            let pool: Vec<usize> = if n <= PIVOT_CANDIDATES {
                                (0..n).collect()
                            } else {
                                sample(&mut g, n, PIVOT_CANDIDATES).into_vec()
                            };
                            for k in pool {
                                if idx.contains(&k) {
                                    continue;
                                }
                                let mut trial = idx.clone();
                                trial[slot] = k;
                                if let Some((dt, bt)) = elemental(&trial, &mut evaluations) {
                                    if dt > d {
                                        (d, b, idx) = (dt, bt, trial);
                                        improved = true;
                                    }
                                }
                            }
                        }
                        if !improved {
                            break;
                        }
                    }
                    (b, d, Some(idx))
                }
                None => {
                    let noise = Normal::new(0.0, scale).expect("positive scale");
                    let b: Vec<f64> = ls.iter().map(|v| v + noise.sample(&mut g)).collect();
                    let d = depth_of(&b, &mut evaluations);
                    (b, d, None)
                }
            }
        };
        let mut local_evals = 0u64;
        let res = nelder_mead::minimize(
            |b| -depth_of(b, &mut local_evals),
            &start,
            NelderMeadOptions {
                initial_step: scale,
                max_evaluations: 150 * p,
                f_tolerance: 0.0,
                x_tolerance: 1e-7,
            },
        );
        evaluations += local_evals;
        // the simplex may wander off a zero-residual start; keep the start then
        let (val, b, pinned) = if -res.value > start_depth {
            (-res.value, res.x, None)
        } else {
            (start_depth, start, pinned)
        };
        let better = match &best {
            None => true,
            Some((bv, bb, _)) => val > *bv || (val == *bv && lex_less(&b, bb)),
        };
        if better {
            best = Some((val, b, pinned));
        }
    }
    let (_, b, pinned) = best.expect("at least one restart");
    let depth = match &pinned {
        Some(idx) => rd_from_residuals(set, &pinned_residuals(&rows, &ys, &b, idx), Some(budget))?,
        None => rd_normalized(set, &ParamVector::new(b.clone())?, Some(budget))?,
    };
    let beta_hat = ParamVector::new(b)?;
    let candidate_depth = depth.normalized;
    Ok(FitResult {
        beta_hat,
        depth,
        tie_set_size: 1,
        method: FitMethod::Search,
        evaluations,
        candidate_depth,
    })
}

fn pinned_residuals(rows: &[Vec<f64>], ys: &[f64], b: &[f64], idx: &[usize]) -> Vec<f64> {
    let mut r: Vec<f64> = rows
        .iter()
        .zip(ys)
        .map(|(w, y)| y - w.iter().zip(b).map(|(a, c)| a * c).sum::<f64>())
        .collect();
    for &i in idx {
        r[i] = 0.0;
    }
    r
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .map_or(false, |o| o.is_lt())
}
