//! Exact enumeration of the deepest lines through pairs of observations.
//!
//! For a pivot observation `i`, the lines through `i` are parameterized by
//! their slope `t`. Rotating `t` upward, the residual of observation `j`
//! changes sign exactly once, at the slope of the line through `i` and `j`.
//! The directional depth count of the current line is
//! `min(min_k D1(k), n + z - max_k D1(k))`, where `D1(k)` counts, for the cut
//! in front of covariate group `k`, left observations with `r <= 0` and right
//! observations with `r >= 0`, and `z` is the number of zero residuals. A sign
//! change of one observation adds a constant to a prefix and a suffix of
//! `D1`, so a range-add segment tree keeps the depth current in `O(log n)`.
//!
//! For large samples the slope range swept around each pivot is restricted
//! to a window that provably contains every line at least as deep as a known
//! lower bound (see [`SlopeWindows`]).

use crate::depth::CovariateGroups;
use crate::linalg;

struct MinMaxTree {
    size: usize,
    mn: Vec<i32>,
    mx: Vec<i32>,
    tag: Vec<i32>,
}

impl MinMaxTree {
    fn new(values: &[i32]) -> Self {
        let size = values.len().next_power_of_two();
        let mut mn = vec![i32::MAX / 2; 2 * size];
        let mut mx = vec![i32::MIN / 2; 2 * size];
        for (i, &v) in values.iter().enumerate() {
            mn[size + i] = v;
            mx[size + i] = v;
        }
        for i in (1..size).rev() {
            mn[i] = mn[2 * i].min(mn[2 * i + 1]);
            mx[i] = mx[2 * i].max(mx[2 * i + 1]);
        }
        Self {
            size,
            mn,
            mx,
            tag: vec![0; size],
        }
    }

    fn apply(&mut self, i: usize, v: i32) {
        self.mn[i] += v;
        self.mx[i] += v;
        if i < self.size {
            self.tag[i] += v;
        }
    }

    fn pull(&mut self, mut i: usize) {
        i >>= 1;
        while i > 0 {
            self.mn[i] = self.mn[2 * i].min(self.mn[2 * i + 1]) + self.tag[i];
            self.mx[i] = self.mx[2 * i].max(self.mx[2 * i + 1]) + self.tag[i];
            i >>= 1;
        }
    }

    /// Adds `v` on leaves `[l, r)`.
    fn add(&mut self, l: usize, r: usize, v: i32) {
        if l >= r || v == 0 {
            return;
        }
        let (l0, r0) = (l + self.size, r - 1 + self.size);
        let (mut l, mut r) = (l + self.size, r + self.size);
        while l < r {
            if l & 1 == 1 {
                self.apply(l, v);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                self.apply(r, v);
            }
            l >>= 1;
            r >>= 1;
        }
        self.pull(l0);
        self.pull(r0);
    }

    fn min(&self) -> i32 {
        self.mn[1]
    }

    fn max(&self) -> i32 {
        self.mx[1]
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct SweepOutcome {
    pub best_count: usize,
    /// (intercept, slope) of every candidate line at `best_count`.
    pub tie_lines: Vec<[f64; 2]>,
    /// Two observations on each tie line, in the same order.
    pub tie_pairs: Vec<(usize, usize)>,
    pub evaluations: u64,
    /// An event involved three or more collinear observations.
    pub saw_collinear: bool,
}

impl SweepOutcome {
    fn record(&mut self, count: usize, line: [f64; 2], pair: (usize, usize)) {
        if count > self.best_count || self.tie_lines.is_empty() {
            self.best_count = count;
            self.tie_lines.clear();
            self.tie_pairs.clear();
        }
        if count == self.best_count {
            self.tie_lines.push(line);
            self.tie_pairs.push(pair);
        }
    }

    fn merge(&mut self, other: SweepOutcome) {
        self.evaluations += other.evaluations;
        self.saw_collinear |= other.saw_collinear;
        if other.tie_lines.is_empty() {
            return;
        }
        if self.tie_lines.is_empty() || other.best_count > self.best_count {
            self.best_count = other.best_count;
            self.tie_lines = other.tie_lines;
            self.tie_pairs = other.tie_pairs;
        } else if other.best_count == self.best_count {
            self.tie_lines.extend(other.tie_lines);
            self.tie_pairs.extend(other.tie_pairs);
        }
    }
}

#[inline]
fn ge(s: i8) -> i32 {
    (s >= 0) as i32
}

#[inline]
fn le(s: i8) -> i32 {
    (s <= 0) as i32
}

struct Sweeper<'a> {
    x: &'a [f64],
    y: &'a [f64],
    groups: &'a CovariateGroups,
}

impl Sweeper<'_> {
    /// Sweeps the lines through `pivot` with slopes in `[lo, hi]`.
    fn sweep_pivot(&self, pivot: usize, lo: f64, hi: f64, out: &mut SweepOutcome) {
        let n = self.x.len();
        let group_of = self.groups.group_of();
        let g = self.groups.groups();
        let (xi, yi) = (self.x[pivot], self.y[pivot]);

        let mut state = vec![0i8; n];
        let mut events: Vec<(f64, u32)> = Vec::new();
        for j in 0..n {
            if j == pivot {
                continue;
            }
            let dx = self.x[j] - xi;
            let dy = self.y[j] - yi;
            if dx == 0.0 {
                state[j] = if dy > 0.0 {
                    1
                } else if dy < 0.0 {
                    -1
                } else {
                    0
                };
                continue;
            }
            let s = dy / dx;
            // before its event, j is above the line iff it lies to the right
            let pre: i8 = if dx > 0.0 { 1 } else { -1 };
            if s < lo {
                state[j] = -pre;
            } else {
                state[j] = pre;
                if s <= hi {
                    events.push((s, j as u32));
                }
            }
        }
        if events.is_empty() {
            return;
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut d1 = vec![0i32; g + 1];
        let mut ge_g = vec![0i32; g];
        let mut le_g = vec![0i32; g];
        let mut zeros = 0i32;
        for j in 0..n {
            ge_g[group_of[j]] += ge(state[j]);
            le_g[group_of[j]] += le(state[j]);
            zeros += (state[j] == 0) as i32;
        }
        d1[0] = ge_g.iter().sum();
        for k in 0..g {
            d1[k + 1] = d1[k] + le_g[k] - ge_g[k];
        }
        let mut tree = MinMaxTree::new(&d1);
        let n32 = n as i32;

        let change = |tree: &mut MinMaxTree, state: &mut [i8], zeros: &mut i32, j: usize, new: i8| {
            let old = state[j];
            let grp = group_of[j];
            tree.add(0, grp + 1, ge(new) - ge(old));
            tree.add(grp + 1, g + 1, le(new) - le(old));
            *zeros += (new == 0) as i32 - (old == 0) as i32;
            state[j] = new;
        };

        let mut a = 0;
        while a < events.len() {
            let t = events[a].0;
            let mut b = a;
            while b < events.len() && events[b].0 == t {
                change(&mut tree, &mut state, &mut zeros, events[b].1 as usize, 0);
                b += 1;
            }
            if b - a > 1 {
                out.saw_collinear = true;
            }
            let count = tree.min().min(n32 + zeros - tree.max());
            out.evaluations += 1;
            out.record(count as usize, [yi - t * xi, t], (pivot, events[a].1 as usize));
            for e in &events[a..b] {
                let j = e.1 as usize;
                let post: i8 = if self.x[j] > xi { -1 } else { 1 };
                change(&mut tree, &mut state, &mut zeros, j, post);
            }
            a = b;
        }
    }
}

/// Slope windows around each pivot that contain every line whose depth
/// count is at least `target`.
///
/// For a cut at `c` splitting the sample into `L` (left) and `R` (right), a
/// line of depth count `>= d` with at most two zero residuals has at least
/// `d - 2 - floor(|L|/2)` observations of `R` strictly above it and as many
/// strictly below (and symmetrically for `L`). Writing the line as
/// `alpha + t (x - c)`, these order-statistic constraints confine `t` to an
/// interval and `alpha` to a band, which in turn bounds the slope of every
/// qualifying line through a given pivot.
struct CutBox {
    c: f64,
    t_lo: f64,
    t_hi: f64,
    a_lo: f64,
    a_hi: f64,
}

fn pad_down(v: f64) -> f64 {
    v - 1e-9 * (1.0 + v.abs())
}

fn pad_up(v: f64) -> f64 {
    v + 1e-9 * (1.0 + v.abs())
}

struct Side {
    xs: Vec<f64>,
    ys: Vec<f64>,
    q: usize,
    scratch: Vec<f64>,
}

impl Side {
    /// (q-th smallest, q-th largest) of `y - t x`.
    fn bounds(&mut self, t: f64) -> (f64, f64) {
        self.scratch.clear();
        self.scratch
            .extend(self.xs.iter().zip(&self.ys).map(|(x, y)| y - t * x));
        let m = self.scratch.len();
        let lo = *self.scratch.select_nth_unstable_by(self.q - 1, f64::total_cmp).1;
        let hi = *self.scratch.select_nth_unstable_by(m - self.q, f64::total_cmp).1;
        (lo, hi)
    }
}

/// Root bracket of a monotone function: returns `(a, b)` with
/// `f(a) >= 0 > f(b)` after bisection, for `f` decreasing.
fn bracket_decreasing<F: FnMut(f64) -> f64>(mut f: F) -> Option<(f64, f64)> {
    let (mut a, mut b) = (-1.0, 1.0);
    let mut iter = 0;
    while f(a) < 0.0 {
        a *= 2.0;
        iter += 1;
        if iter > 60 {
            return None;
        }
    }
    while f(b) >= 0.0 {
        b *= 2.0;
        iter += 1;
        if iter > 120 {
            return None;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some((a, b))
}

fn cut_box(x: &[f64], y: &[f64], c: f64, target: usize) -> Option<CutBox> {
    let (mut lx, mut ly, mut rx, mut ry) = (vec![], vec![], vec![], vec![]);
    for (&xi, &yi) in x.iter().zip(y) {
        if xi < c {
            lx.push(xi - c);
            ly.push(yi);
        } else {
            rx.push(xi - c);
            ry.push(yi);
        }
    }
    let (nl, nr) = (lx.len(), rx.len());
    let need = |other: usize| (target as i64) - 2 - (other / 2) as i64;
    let (ql, qr) = (need(nr), need(nl));
    if ql < 1 || qr < 1 || ql as usize > nl || qr as usize > nr {
        return None;
    }
    let mut left = Side { xs: lx, ys: ly, q: ql as usize, scratch: vec![] };
    let mut right = Side { xs: rx, ys: ry, q: qr as usize, scratch: vec![] };
    // lo_R - hi_L decreases in t; feasible lines need it negative
    let (t_lo, _) = bracket_decreasing(|t| right.bounds(t).0 - left.bounds(t).1)?;
    // hi_R - lo_L decreases in t; feasible lines need it positive
    let (_, t_hi) = bracket_decreasing(|t| right.bounds(t).1 - left.bounds(t).0)?;
    let (t_lo, t_hi) = (pad_down(t_lo), pad_up(t_hi));
    if t_lo > t_hi {
        return None;
    }
    let (ll1, _) = left.bounds(t_lo);
    let (_, lh2) = left.bounds(t_hi);
    let (_, rh1) = right.bounds(t_lo);
    let (rl2, _) = right.bounds(t_hi);
    // lo_L increases and lo_R decreases in t (hi_* likewise)
    let a_lo = pad_down(ll1.max(rl2));
    let a_hi = pad_up(lh2.min(rh1));
    Some(CutBox { c, t_lo, t_hi, a_lo, a_hi })
}

struct SlopeWindows {
    boxes: Vec<CutBox>,
}

impl SlopeWindows {
    fn new(x: &[f64], y: &[f64], groups: &CovariateGroups, target: usize) -> Self {
        let n = x.len();
        let g = groups.groups();
        let mut counts = vec![0usize; g];
        for &grp in groups.group_of() {
            counts[grp] += 1;
        }
        let mut boxes = Vec::new();
        for frac in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let mut acc = 0;
            let mut k = 0;
            while k < g && (acc as f64) < frac * n as f64 {
                acc += counts[k];
                k += 1;
            }
            if k == 0 || k >= g {
                continue;
            }
            if let Some(b) = cut_box(x, y, groups.cut_value(k), target) {
                boxes.push(b);
            }
        }
        Self { boxes }
    }

    fn window(&self, xi: f64, yi: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for b in &self.boxes {
            let d = xi - b.c;
            let (u, v) = ((yi - b.a_hi) / d, (yi - b.a_lo) / d);
            let (w_lo, w_hi) = if d > 0.0 { (u, v) } else { (v, u) };
            lo = lo.max(b.t_lo).max(pad_down(w_lo));
            hi = hi.min(b.t_hi).min(pad_up(w_hi));
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Pruning only pays off (and its general-position guard only makes sense)
/// for larger samples.
const PRUNE_MIN_N: usize = 200;

fn depth_count(groups: &CovariateGroups, x: &[f64], y: &[f64], line: [f64; 2]) -> usize {
    let r: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (line[0] + line[1] * a)).collect();
    groups.directional_count(&r).0
}

/// Cheap deep-ish lines: least squares and a paired-slope median line.
fn lower_bound(groups: &CovariateGroups, x: &[f64], y: &[f64]) -> usize {
    let mut guesses = Vec::new();
    let rows: Vec<Vec<f64>> = x.iter().map(|&a| vec![1.0, a]).collect();
    if let Ok(b) = linalg::least_squares(&rows, y) {
        guesses.push([b[0], b[1]]);
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let half = x.len() / 2;
    let mut slopes: Vec<f64> = (0..half)
        .filter_map(|k| {
            let (i, j) = (order[k], order[k + half]);
            let dx = x[j] - x[i];
            (dx != 0.0).then(|| (y[j] - y[i]) / dx)
        })
        .collect();
    if !slopes.is_empty() {
        let mid = slopes.len() / 2;
        let t = *slopes.select_nth_unstable_by(mid, f64::total_cmp).1;
        let mut res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - t * a).collect();
        let m = res.len() / 2;
        let a0 = *res.select_nth_unstable_by(m, f64::total_cmp).1;
        guesses.push([a0, t]);
    }
    guesses
        .into_iter()
        .filter(|l| l[0].is_finite() && l[1].is_finite())
        .map(|l| depth_count(groups, x, y, l))
        .max()
        .unwrap_or(0)
}

fn has_duplicate_points(x: &[f64], y: &[f64]) -> bool {
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2).any(|w| w[0] == w[1])
}

fn full_sweep(sweeper: &Sweeper<'_>, n: usize) -> SweepOutcome {
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = SweepOutcome::default();
            sweeper.sweep_pivot(i, f64::NEG_INFINITY, f64::INFINITY, &mut out);
            out
        })
        .reduce(SweepOutcome::default, |mut a, b| {
            a.merge(b);
            a
        })
}

/// All lines through two observations (with distinct covariates) that attain
/// the maximal directional depth count, with their count.
pub(crate) fn deepest_lines(x: &[f64], y: &[f64]) -> SweepOutcome {
    use rayon::prelude::*;
    let n = x.len();
    let groups = CovariateGroups::new(x);
    let sweeper = Sweeper { x, y, groups: &groups };
    if n < PRUNE_MIN_N || has_duplicate_points(x, y) {
        return full_sweep(&sweeper, n);
    }
    let target = lower_bound(&groups, x, y);
    let windows = SlopeWindows::new(x, y, &groups, target);
    if windows.boxes.is_empty() {
        return full_sweep(&sweeper, n);
    }
    let pruned = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = SweepOutcome::default();
            if let Some((lo, hi)) = windows.window(x[i], y[i]) {
                sweeper.sweep_pivot(i, lo, hi, &mut out);
            }
            out
        })
        .reduce(SweepOutcome::default, |mut a, b| {
            a.merge(b);
            a
        });
    // The windows assume no three observations are collinear; fall back to
    // the unrestricted sweep whenever that is contradicted.
    if pruned.saw_collinear || pruned.tie_lines.is_empty() || pruned.best_count < target {
        return full_sweep(&sweeper, n);
    }
    pruned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn brute(x: &[f64], y: &[f64]) -> usize {
        let groups = CovariateGroups::new(x);
        let mut best = 0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if x[i] == x[j] {
                    continue;
                }
                // signs from cross products, exact for small integers
                let (dx, dy) = (x[j] - x[i], y[j] - y[i]);
                let r: Vec<f64> = (0..x.len())
                    .map(|k| ((y[k] - y[i]) * dx - dy * (x[k] - x[i])) * dx.signum())
                    .collect();
                best = best.max(groups.directional_count(&r).0);
            }
        }
        best
    }

    #[test]
    fn tree_range_add() {
        let mut t = MinMaxTree::new(&[3, 1, 4, 1, 5]);
        assert_eq!((t.min(), t.max()), (1, 5));
        t.add(0, 2, 10);
        assert_eq!((t.min(), t.max()), (1, 13));
        t.add(2, 5, -2);
        assert_eq!((t.min(), t.max()), (-1, 13));
        t.add(1, 2, -20);
        assert_eq!(t.min(), -9);
    }

    #[test]
    fn sweep_matches_brute_force_small() {
        let mut g = rng(1);
        for _ in 0..200 {
            let n = g.gen_range(2..14);
            let x: Vec<f64> = (0..n).map(|_| g.gen_range(-3..4) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| g.gen_range(-3..4) as f64).collect();
            if x.iter().all(|v| *v == x[0]) {
                continue;
            }
            let out = deepest_lines(&x, &y);
            assert_eq!(out.best_count, brute(&x, &y), "x={x:?} y={y:?}");
        }
    }

    #[test]
    fn pruned_sweep_matches_full_sweep() {
        for seed in 0..6 {
            let mut g = rng(100 + seed);
            let n = 300 + 50 * seed as usize;
            let x: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..n).map(|_| g.sample::<f64, _>(StandardNormal) + 0.5 * x[0]).collect();
            let pruned = deepest_lines(&x, &y);
            let groups = CovariateGroups::new(&x);
            let full = full_sweep(&Sweeper { x: &x, y: &y, groups: &groups }, n);
            assert_eq!(pruned.best_count, full.best_count);
            let mut a = pruned.tie_lines.clone();
            let mut b = full.tie_lines.clone();
            a.sort_by(|p, q| p[1].total_cmp(&q[1]));
            b.sort_by(|p, q| p[1].total_cmp(&q[1]));
            assert_eq!(a.len(), b.len());
            assert!(pruned.evaluations < full.evaluations);
        }
    }
}
