//! Empirical regression depth of a candidate fit.
//!
//! The primary formulation is the directional one: the depth of `beta` is the
//! minimum over unit directions `v` of the fraction of observations with
//! `r_i(beta) * v'w_i >= 0`. For simple regression the sphere is a circle and
//! the sign pattern of `v'w_i` only changes at the finitely many angles where
//! `v` is orthogonal to some `w_i`, so the minimum is computed exactly over one
//! representative per open cell. Directions on a cell boundary never lower
//! this objective (a zero product satisfies `>= 0`).
//!
//! Two count-based alternatives are provided as well: a cut formulation with
//! strict inequalities (`rd_count_bh99`) and a sign-sum formulation
//! (`rd_sign_bh992`), for which boundary directions do matter because
//! `sgn(0) = 0`.

use std::f64::consts::TAU;

use crate::directions::{fibonacci_sphere, SphereSequence};
use crate::error::{DepthError, Result};
use crate::types::{extend_w, DepthValue, ObservationSet, ParamVector, ResidualSign, UnitDirection};

/// Number of sampled directions used when no budget is given (p >= 3).
pub const DEFAULT_DIRECTIONS: usize = 2048;
const REFINE_BASE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionBudget {
    pub dirs: usize,
    pub seed: u64,
}

impl Default for DirectionBudget {
    fn default() -> Self {
        Self {
            dirs: DEFAULT_DIRECTIONS,
            seed: 0,
        }
    }
}

impl DirectionBudget {
    pub fn new(dirs: usize) -> Self {
        Self { dirs, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCellDecomposition {
    pub critical_angles: Vec<f64>,
    pub cell_midpoints: Vec<UnitDirection>,
    pub boundary_directions: Vec<UnitDirection>,
}

fn require_p2(set: &ObservationSet, what: &str) -> Result<()> {
    if set.p() != 2 {
        return Err(DepthError::Unsupported(format!(
            "{what} requires p = 2, got p = {}",
            set.p()
        )));
    }
    Ok(())
}

fn sorted_distinct(values: &[f64]) -> Vec<f64> {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn wrap_angle(a: f64) -> f64 {
    let a = a.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

pub fn decompose_directions_p2(set: &ObservationSet) -> Result<DirectionCellDecomposition> {
    require_p2(set, "direction decomposition")?;
    let xs = sorted_distinct(&set.xs());
    // v is orthogonal to w = (1, x) along (-x, 1) and (x, -1)
    let mut angles: Vec<f64> = xs
        .iter()
        .flat_map(|&x| [wrap_angle(1f64.atan2(-x)), wrap_angle((-1f64).atan2(x))])
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let m = angles.len();
    let cell_midpoints = (0..m)
        .map(|i| {
            let a = angles[i];
            let b = if i + 1 < m { angles[i + 1] } else { angles[0] + TAU };
            UnitDirection::from_angle(0.5 * (a + b))
        })
        .collect();
    let boundary_directions = angles.iter().map(|&a| UnitDirection::from_angle(a)).collect();
    Ok(DirectionCellDecomposition {
        critical_angles: angles,
        cell_midpoints,
        boundary_directions,
    })
}

/// Observations of a simple regression grouped by distinct covariate value.
///
/// Cut index `k` in `0..=groups` puts groups `< k` on the left of the cut.
#[derive(Debug, Clone)]
pub struct CovariateGroups {
    xs: Vec<f64>,
    group_of: Vec<usize>,
}

impl CovariateGroups {
    pub fn new(x: &[f64]) -> Self {
        let xs = sorted_distinct(x);
        let group_of = x
            .iter()
            .map(|v| xs.binary_search_by(|p| p.total_cmp(v)).expect("value present"))
            .collect();
        Self { xs, group_of }
    }

    pub fn groups(&self) -> usize {
        self.xs.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.xs
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// Midpoint of the gap in front of group `k` (only for `0 < k < groups`).
    pub fn cut_value(&self, k: usize) -> f64 {
        0.5 * (self.xs[k - 1] + self.xs[k])
    }

    /// Unit direction whose sign pattern realizes cut `k` with the given
    /// orientation (`true`: `v'w > 0` right of the cut).
    pub fn cut_direction(&self, k: usize, right_positive: bool) -> UnitDirection {
        let g = self.groups();
        let v = if k == 0 || k == g {
            // every point on one side: the horizontal directions
            let all_positive = (k == 0) == right_positive;
            vec![if all_positive { 1.0 } else { -1.0 }, 0.0]
        } else {
            let c = self.cut_value(k);
            if right_positive {
                vec![-c, 1.0]
            } else {
                vec![c, -1.0]
            }
        };
        UnitDirection::new(v).expect("non-zero direction")
    }

    /// Exact directional depth count for the given residuals.
    ///
    /// Returns `(count, cut, right_positive)` of a minimizing cell.
    pub fn directional_count(&self, residuals: &[f64]) -> (usize, usize, bool) {
        let g = self.groups();
        let mut ge = vec![0i64; g];
        let mut le = vec![0i64; g];
        let mut zeros = 0i64;
        for (&grp, &r) in self.group_of.iter().zip(residuals) {
            if r >= 0.0 {
                ge[grp] += 1;
            }
            if r <= 0.0 {
                le[grp] += 1;
            }
            if r == 0.0 {
                zeros += 1;
            }
        }
        let n = residuals.len() as i64;
        // D1(k): left points need r <= 0, right points r >= 0.
        // D2(k) = n + zeros - D1(k) is the opposite orientation.
        let mut d1: i64 = ge.iter().sum();
        let mut best = (i64::MAX, 0usize, true);
        for k in 0..=g {
            let d2 = n + zeros - d1;
            if d1 < best.0 {
                best = (d1, k, true);
            }
            if d2 < best.0 {
                best = (d2, k, false);
            }
            if k < g {
                d1 += le[k] - ge[k];
            }
        }
        (best.0 as usize, best.1, best.2)
    }
}

fn check(set: &ObservationSet, beta: &ParamVector) -> Result<Vec<f64>> {
    set.check_beta(beta)?;
    set.residuals(beta)
}

/// Directional depth `min_v (1/n) #{i : r_i v'w_i >= 0}`.
///
/// Exact for p = 2; for p >= 3 the minimum is taken over `budget.dirs`
/// quasi-uniform directions plus local refinement, flagged `exact = false`.
pub fn rd_normalized(
    set: &ObservationSet,
    beta: &ParamVector,
    budget: Option<DirectionBudget>,
) -> Result<DepthValue> {
    let r = check(set, beta)?;
    rd_from_residuals(set, &r, budget)
}

/// [`rd_normalized`] for residuals computed by the caller, e.g. with the
/// residuals of an elemental fit's defining points set to exact zero.
pub(crate) fn rd_from_residuals(
    set: &ObservationSet,
    r: &[f64],
    budget: Option<DirectionBudget>,
) -> Result<DepthValue> {
    let n = set.len() as f64;
    if set.p() == 2 {
        let groups = CovariateGroups::new(&set.xs());
        let (count, k, right) = groups.directional_count(r);
        return Ok(DepthValue {
            normalized: count as f64 / n,
            count: Some(count as f64),
            exact: true,
            witness_direction: Some(groups.cut_direction(k, right)),
        });
    }
    let ws: Vec<Vec<f64>> = set.iter().map(extend_w).collect();
    let objective = |v: &[f64]| -> f64 {
        ws.iter()
            .zip(r)
            .filter(|(w, &ri)| ri * dot(v, w) >= 0.0)
            .count() as f64
    };
    let (count, v) = sphere_minimum(set.p(), budget.unwrap_or_default(), objective);
    Ok(DepthValue {
        normalized: count / n,
        count: Some(count),
        exact: false,
        witness_direction: Some(UnitDirection::new(v)?),
    })
}

/// Directional depth evaluated literally at every cell midpoint of the
/// circle decomposition (p = 2). Quadratic; an independent route to
/// `rd_normalized`.
pub fn rd_over_cells(set: &ObservationSet, beta: &ParamVector) -> Result<DepthValue> {
    require_p2(set, "cell evaluation")?;
    let r = check(set, beta)?;
    let dec = decompose_directions_p2(set)?;
    let ws: Vec<Vec<f64>> = set.iter().map(extend_w).collect();
    let mut best: Option<(usize, &UnitDirection)> = None;
    for v in &dec.cell_midpoints {
        let c = ws.iter().zip(&r).filter(|(w, &ri)| ri * v.dot(w) >= 0.0).count();
        if best.map_or(true, |(b, _)| c < b) {
            best = Some((c, v));
        }
    }
    let (count, v) = best.expect("at least two cells");
    Ok(DepthValue {
        normalized: count as f64 / set.len() as f64,
        count: Some(count as f64),
        exact: true,
        witness_direction: Some(v.clone()),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
}

/// Pattern search on the sphere from `start`; strictly improving moves only.
fn refine_on_sphere<F: Fn(&[f64]) -> f64>(start: &[f64], start_val: f64, f: &F) -> (f64, Vec<f64>) {
    let dim = start.len();
    let mut best = start.to_vec();
    let mut best_val = start_val;
    let mut step = 0.5;
    while step > 1.0 / 512.0 {
        let mut improved = false;
        for j in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut cand = best.clone();
                cand[j] += sgn * step;
                if cand.iter().all(|c| *c == 0.0) {
                    continue;
                }
                normalize(&mut cand);
                let val = f(&cand);
                if val < best_val {
                    best_val = val;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best_val, best)
}

/// Minimum of `f` over a quasi-uniform direction prefix of length
/// `budget.dirs`, refined from the best direction of every dyadic prefix
/// (64, 128, ...) that fits in the budget. Because both the raw prefix and
/// the set of refinement starts grow with the budget, the result is
/// non-increasing in `dirs`.
fn sphere_minimum<F: Fn(&[f64]) -> f64>(dim: usize, budget: DirectionBudget, f: F) -> (f64, Vec<f64>) {
    let seq = SphereSequence::new(dim, budget.seed);
    let dirs = budget.dirs.max(1);
    let mut best_val = f64::INFINITY;
    let mut best_dir = seq.point(0);
    let mut prefix_best = (f64::INFINITY, best_dir.clone());
    let mut level = REFINE_BASE;
    let mut overall = (f64::INFINITY, best_dir.clone());
    for k in 0..dirs {
        let v = seq.point(k);
        let val = f(&v);
        if val < prefix_best.0 {
            prefix_best = (val, v);
        }
        if k + 1 == level {
            let (rv, rd) = refine_on_sphere(&prefix_best.1, prefix_best.0, &f);
            if rv < overall.0 {
                overall = (rv, rd);
            }
            level *= 2;
        }
    }
    if prefix_best.0 < best_val {
        best_val = prefix_best.0;
        best_dir = prefix_best.1;
    }
    if overall.0 < best_val {
        best_val = overall.0;
        best_dir = overall.1;
    }
    (best_val, best_dir)
}

/// Strict-inequality cut counts on a one-dimensional projection.
///
/// Returns the minimum over cuts (each distinct value, each gap midpoint and
/// both ends) of `min(#{r (t - c) > 0}, #{r (t - c) < 0})`, and the cut.
fn cut_count_1d(t: &[f64], r: &[f64]) -> (usize, f64) {
    let groups = CovariateGroups::new(t);
    let g = groups.groups();
    let mut pos = vec![0usize; g];
    let mut neg = vec![0usize; g];
    for (&grp, &ri) in groups.group_of().iter().zip(r) {
        match ResidualSign::of(ri) {
            ResidualSign::Positive => pos[grp] += 1,
            ResidualSign::Negative => neg[grp] += 1,
            ResidualSign::Zero => {}
        }
    }
    let total_pos: usize = pos.iter().sum();
    let total_neg: usize = neg.iter().sum();
    let mut left_pos = 0usize;
    let mut left_neg = 0usize;
    let xs = groups.values();
    let mut best = (usize::MAX, 0.0);
    for k in 0..=g {
        // gap cut: groups < k on the left
        let right_pos = total_pos - left_pos;
        let right_neg = total_neg - left_neg;
        let above = right_pos + left_neg;
        let below = left_pos + right_neg;
        let c = if k == 0 {
            xs[0] - 1.0
        } else if k == g {
            xs[g - 1] + 1.0
        } else {
            groups.cut_value(k)
        };
        if above.min(below) < best.0 {
            best = (above.min(below), c);
        }
        if k < g {
            // cut exactly at the group value: group k contributes nothing
            let right_pos = total_pos - left_pos - pos[k];
            let right_neg = total_neg - left_neg - neg[k];
            let above = right_pos + left_neg;
            let below = left_pos + right_neg;
            if above.min(below) < best.0 {
                best = (above.min(below), xs[k]);
            }
            left_pos += pos[k];
            left_neg += neg[k];
        }
    }
    best
}

/// Cut-count depth with strict inequalities, exact for p = 2.
///
/// The orientation `u = -1` swaps the two counts, so it does not change the
/// minimum, but both are covered by the symmetric `min`.
pub fn rd_count_bh99(set: &ObservationSet, beta: &ParamVector) -> Result<DepthValue> {
    require_p2(set, "exact cut-count depth")?;
    let r = check(set, beta)?;
    let (count, cut) = cut_count_1d(&set.xs(), &r);
    Ok(DepthValue {
        normalized: count as f64 / set.len() as f64,
        count: Some(count as f64),
        exact: true,
        witness_direction: Some(UnitDirection::new(vec![-cut, 1.0])?),
    })
}

/// Cut-count depth for any p, minimizing over sampled covariate directions
/// `u` and, per direction, exactly over the cut position. Inexact for p >= 3.
pub fn rd_count_bh99_sampled(
    set: &ObservationSet,
    beta: &ParamVector,
    budget: DirectionBudget,
) -> Result<DepthValue> {
    if set.p() == 2 {
        return rd_count_bh99(set, beta);
    }
    let r = check(set, beta)?;
    let q = set.p() - 1;
    let objective = |u: &[f64]| -> f64 {
        let t: Vec<f64> = set.iter().map(|o| dot(u, o.x())).collect();
        cut_count_1d(&t, &r).0 as f64
    };
    let (count, _) = sphere_minimum(q, budget, objective);
    Ok(DepthValue {
        normalized: count / set.len() as f64,
        count: Some(count),
        exact: false,
        witness_direction: None,
    })
}

/// Sign-sum depth `n/2 + (1/2) min_gamma sum_i sgn(r_i) sgn(w_i' gamma)`.
///
/// For p = 2 the minimum covers every open cell and every boundary
/// direction. For p >= 3 it is taken over sampled directions (inexact).
pub fn rd_sign_bh992(
    set: &ObservationSet,
    beta: &ParamVector,
    budget: Option<DirectionBudget>,
) -> Result<DepthValue> {
    let r = check(set, beta)?;
    let n = set.len() as f64;
    let signs: Vec<i64> = r.iter().map(|&v| ResidualSign::of(v).value() as i64).collect();
    if set.p() == 2 {
        let groups = CovariateGroups::new(&set.xs());
        let g = groups.groups();
        let mut s = vec![0i64; g];
        for (&grp, &sg) in groups.group_of().iter().zip(&signs) {
            s[grp] += sg;
        }
        let total: i64 = s.iter().sum();
        // sum over right minus sum over left, for gaps and for boundaries
        let mut left = 0i64;
        let mut best = (i64::MIN, UnitDirection::from_angle(0.0));
        for k in 0..=g {
            let gap = (total - left) - left;
            // the minimizing orientation turns the sum into -|gap|
            if gap.abs() > best.0 {
                best = (gap.abs(), groups.cut_direction(k, gap <= 0));
            }
            if k < g {
                let on = (total - left - s[k]) - left;
                if on.abs() > best.0 {
                    let x = groups.values()[k];
                    let v = if on <= 0 { vec![-x, 1.0] } else { vec![x, -1.0] };
                    best = (on.abs(), UnitDirection::new(v)?);
                }
                left += s[k];
            }
        }
        let count = n / 2.0 - best.0 as f64 / 2.0;
        return Ok(DepthValue {
            normalized: count / n,
            count: Some(count),
            exact: true,
            witness_direction: Some(best.1),
        });
    }
    let ws: Vec<Vec<f64>> = set.iter().map(extend_w).collect();
    let objective = |v: &[f64]| -> f64 {
        ws.iter()
            .zip(&signs)
            .map(|(w, &sg)| (sg * ResidualSign::of(dot(v, w)).value() as i64) as f64)
            .sum()
    };
    let (sum, v) = sphere_minimum(set.p(), budget.unwrap_or_default(), objective);
    let count = n / 2.0 + sum / 2.0;
    Ok(DepthValue {
        normalized: count / n,
        count: Some(count),
        exact: false,
        witness_direction: Some(UnitDirection::new(v)?),
    })
}

/// Dense deterministic grid minimum of the directional objective, for
/// p in {2, 3}. Test oracle only: it can over-estimate the infimum when a
/// cell is thinner than the grid spacing.
pub fn rd_bruteforce_oracle(set: &ObservationSet, beta: &ParamVector, grid: usize) -> Result<DepthValue> {
    if grid < 1000 {
        return Err(DepthError::InvalidArgument(format!("grid must be >= 1000, got {grid}")));
    }
    let dirs: Vec<Vec<f64>> = match set.p() {
        2 => (0..grid)
            .map(|k| {
                // irrational offset keeps grid points off cell boundaries
                let t = TAU * (k as f64 + 0.5 + 0.123_456_789) / grid as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(grid),
        p => {
            return Err(DepthError::Unsupported(format!(
                "brute-force oracle supports p in {{2, 3}}, got {p}"
            )))
        }
    };
    let r = check(set, beta)?;
    let ws: Vec<Vec<f64>> = set.iter().map(extend_w).collect();
    let mut best = (usize::MAX, 0usize);
    for (idx, v) in dirs.iter().enumerate() {
        let c = ws.iter().zip(&r).filter(|(w, &ri)| ri * dot(v, w) >= 0.0).count();
        if c < best.0 {
            best = (c, idx);
        }
    }
    Ok(DepthValue {
        normalized: best.0 as f64 / set.len() as f64,
        count: Some(best.0 as f64),
        exact: false,
        witness_direction: Some(UnitDirection::new(dirs[best.1].clone())?),
    })
}
