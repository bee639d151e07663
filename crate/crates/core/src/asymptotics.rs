//! Monte Carlo experiments: consistency and the root-n rate of the deepest
//! fit, uniform convergence of the empirical depth, diagnostics for the
//! assumptions behind the limit law, and a simulator for that law.
//!
//! Every replicate draws its data from `derive_seed(master_seed, tag, index)`
//! and results are collected in replicate order, so reports do not depend on
//! the thread schedule.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::rd_normalized;
use crate::error::{DepthError, Result};
use crate::fit::fit_exact_p2;
use crate::population::{rd_population_numeric, sample, LimitIngredients, PopulationModel, QuadConfig};
use crate::seeding::{derive_seed, rng};
use crate::stats::{median, ols_slope, quantile};
use crate::types::{ObservationSet, ParamVector};

/// Bounding box `[-half_width, half_width]^2` for the limit-law argmax,
/// scanned on `resolution` points per axis before refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    pub half_width: f64,
    pub resolution: usize,
}

impl SGrid {
    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.resolution - 1) as f64
    }

    fn point(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    /// Fits at which uniform convergence is measured.
    pub beta_grid: Vec<ParamVector>,
    pub s_grid: SGrid,
    /// Ring radii for the well-separation diagnostic.
    pub delta_grid: Vec<f64>,
    pub quad: QuadConfig,
    pub fd_step: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut beta_grid = Vec::new();
        for i in -2..=2 {
            for j in -2..=2 {
                beta_grid.push(ParamVector::new(vec![0.5 * i as f64, 0.5 * j as f64]).expect("finite"));
            }
        }
        Self {
            n_grid: vec![100, 200, 400, 800, 1600, 3200, 6400],
            reps: 100,
            master_seed: 0,
            beta_grid,
            s_grid: SGrid {
                half_width: 8.0,
                resolution: 81,
            },
            delta_grid: vec![0.1, 0.25, 0.5, 1.0],
            quad: QuadConfig::default(),
            fd_step: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DepthError::InvalidArgument(m.into()));
        if self.n_grid.is_empty() || self.n_grid[0] < 2 {
            return bad("n_grid must be non-empty with n >= 2");
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_grid must be strictly increasing");
        }
        if self.reps < 30 {
            return bad("reps must be >= 30");
        }
        if !(self.s_grid.half_width > 0.0) || self.s_grid.resolution < 3 {
            return bad("s_grid needs half_width > 0 and resolution >= 3");
        }
        if self.delta_grid.iter().any(|d| !(*d > 0.0)) {
            return bad("delta_grid entries must be > 0");
        }
        self.quad.validate()
    }
}

const MAX_REGENERATIONS: u64 = 16;

/// A sample with at least two distinct covariate values. Returns the set and
/// how many draws were discarded.
fn nondegenerate_sample(model: &PopulationModel, n: usize, seed: u64) -> Result<(ObservationSet, u64)> {
    for attempt in 0..=MAX_REGENERATIONS {
        let s = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, "regenerate", attempt)
        };
        let set = sample(model, n, s)?;
        let xs = set.xs();
        if xs.iter().any(|&x| x != xs[0]) {
            return Ok((set, attempt));
        }
    }
    Err(DepthError::Degenerate(format!(
        "{MAX_REGENERATIONS} regenerations all had identical covariates"
    )))
}

fn beta_star(model: &PopulationModel) -> Result<ParamVector> {
    model.beta_star().ok_or_else(|| {
        DepthError::Unsupported(format!("deepest population fit of model '{}' is not known", model.name()))
    })
}

fn distance(a: &ParamVector, b: &ParamVector) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub fit_failures: usize,
    pub regenerated: u64,
    /// `||beta_hat - beta_star||` per replicate; `None` marks a failed fit.
    pub errors: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub model: PopulationModel,
    pub rows: Vec<ConsistencyRow>,
    /// Least-squares slope of log(median error) on log n.
    pub loglog_slope: f64,
    pub slope_stderr: f64,
}

impl ConsistencyReport {
    /// One row per replicate: `n,rep,error`.
    pub fn replicates_csv(&self) -> String {
        let mut s = String::from("n,rep,error\n");
        for row in &self.rows {
            for (k, e) in row.errors.iter().enumerate() {
                let e = e.map_or_else(|| "NA".to_string(), |v| v.to_string());
                s.push_str(&format!("{},{},{}\n", row.n, k, e));
            }
        }
        s
    }

    /// One row per sample size: `logn,logerr`.
    pub fn loglog_csv(&self) -> String {
        let mut s = String::from("logn,logerr\n");
        for row in &self.rows {
            s.push_str(&format!("{},{}\n", (row.n as f64).ln(), row.median.ln()));
        }
        s
    }
}

pub fn run_consistency(model: &PopulationModel, cfg: &ExperimentConfig) -> Result<ConsistencyReport> {
    cfg.validate()?;
    let star = beta_star(model)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let outcomes: Vec<Result<(f64, u64)>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(cfg.master_seed, &format!("consistency/n={n}"), rep as u64);
                let (set, regen) = nondegenerate_sample(model, n, seed)?;
                let fit = fit_exact_p2(&set)?;
                Ok((distance(&fit.beta_hat, &star), regen))
            })
            .collect();
        let mut errors = Vec::with_capacity(cfg.reps);
        let (mut failures, mut regenerated) = (0, 0);
        for o in outcomes {
            match o {
                Ok((e, r)) => {
                    errors.push(Some(e));
                    regenerated += r;
                }
                Err(_) => {
                    errors.push(None);
                    failures += 1;
                }
            }
        }
        let ok: Vec<f64> = errors.iter().flatten().copied().collect();
        if ok.is_empty() {
            return Err(DepthError::Degenerate(format!("every fit failed at n = {n}")));
        }
        rows.push(ConsistencyRow {
            n,
            median: median(&ok),
            q1: quantile(&ok, 0.25),
            q3: quantile(&ok, 0.75),
            fit_failures: failures,
            regenerated,
            errors,
        });
    }
    let (slope, stderr) = if rows.len() >= 2 {
        let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.median.ln()).collect();
        ols_slope(&lx, &ly)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ConsistencyReport {
        model: model.clone(),
        rows,
        loglog_slope: slope,
        slope_stderr: stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformRow {
    pub n: usize,
    /// Median over replicates of the largest error over the fit grid.
    pub median_sup_error: f64,
    pub scaled_median: f64,
    /// Median error at the deepest population fit, when it is on the grid.
    pub median_error_at_star: Option<f64>,
    pub sup_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformReport {
    pub model: PopulationModel,
    pub population_depths: Vec<f64>,
    pub rows: Vec<UniformRow>,
    /// At every replicate of the largest n, the error at the deepest fit is at
    /// most the grid supremum.
    pub star_within_sup: bool,
}

impl UniformReport {
    pub fn replicates_csv(&self) -> String {
        let mut s = String::from("n,rep,sup_error\n");
        for row in &self.rows {
            for (k, e) in row.sup_errors.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", row.n, k, e));
            }
        }
        s
    }
}

pub fn run_uniform_convergence(model: &PopulationModel, cfg: &ExperimentConfig) -> Result<UniformReport> {
    cfg.validate()?;
    if cfg.beta_grid.is_empty() {
        return Err(DepthError::InvalidArgument("beta_grid is empty".into()));
    }
    let population: Vec<f64> = cfg
        .beta_grid
        .par_iter()
        .map(|b| rd_population_numeric(model, b, &cfg.quad))
        .collect::<Result<_>>()?;
    let star_index = model
        .beta_star()
        .and_then(|s| cfg.beta_grid.iter().position(|b| *b == s));
    let mut rows = Vec::new();
    let mut star_within_sup = true;
    for (idx, &n) in cfg.n_grid.iter().enumerate() {
        let per_rep: Vec<(f64, Option<f64>)> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(cfg.master_seed, &format!("uniform/n={n}"), rep as u64);
                let (set, _) = nondegenerate_sample(model, n, seed)?;
                let errs: Vec<f64> = cfg
                    .beta_grid
                    .iter()
                    .zip(&population)
                    .map(|(b, pop)| Ok((rd_normalized(&set, b, None)?.normalized - pop).abs()))
                    .collect::<Result<_>>()?;
                let sup = errs.iter().copied().fold(0.0, f64::max);
                Ok((sup, star_index.map(|i| errs[i])))
            })
            .collect::<Result<_>>()?;
        let sups: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
        let stars: Vec<f64> = per_rep.iter().filter_map(|r| r.1).collect();
        if idx + 1 == cfg.n_grid.len() {
            star_within_sup = per_rep.iter().all(|(sup, star)| star.map_or(true, |s| s <= *sup));
        }
        let m = median(&sups);
        rows.push(UniformRow {
            n,
            median_sup_error: m,
            scaled_median: (n as f64).sqrt() * m,
            median_error_at_star: (!stars.is_empty()).then(|| median(&stars)),
            sup_errors: sups,
        });
    }
    Ok(UniformReport {
        model: model.clone(),
        population_depths: population,
        rows,
        star_within_sup,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheckReport {
    /// `max - min` of `h(0, v)` over the direction grid.
    pub a2_spread: f64,
    /// `sup_v ||g(v)||`.
    pub a3_g_sup: f64,
    /// Largest change of `g` between adjacent grid directions.
    pub a3_modulus: f64,
    /// `max_v ||g(v) + g(-v)||`.
    pub g_oddness_defect: f64,
    pub c2prime_kappa_hat: f64,
    /// `(delta, alpha_star - sup depth on the ring ||beta - beta_star|| = delta)`.
    pub c2prime_deltas: Vec<(f64, f64)>,
}

/// Ring points used for each radius of the separation diagnostic.
pub const RING_POINTS: usize = 64;

pub fn check_assumptions(
    model: &PopulationModel,
    ingredients: &LimitIngredients,
    cfg: &ExperimentConfig,
) -> Result<AssumptionCheckReport> {
    cfg.validate()?;
    let star = beta_star(model)?;
    let m = ingredients.len();
    let norm = |a: [f64; 2]| (a[0] * a[0] + a[1] * a[1]).sqrt();
    let (lo, hi) = ingredients
        .h0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let g = &ingredients.g_table;
    let a3_g_sup = g.iter().map(|&v| norm(v)).fold(0.0, f64::max);
    let a3_modulus = (0..m)
        .map(|k| {
            let (u, v) = (g[k], g[(k + 1) % m]);
            norm([u[0] - v[0], u[1] - v[1]])
        })
        .fold(0.0, f64::max);
    // antipodes are half a turn apart on an even grid
    let g_oddness_defect = if m % 2 == 0 {
        (0..m)
            .map(|k| {
                let (u, v) = (g[k], g[(k + m / 2) % m]);
                norm([u[0] + v[0], u[1] + v[1]])
            })
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };

    let c2prime_deltas: Vec<(f64, f64)> = cfg
        .delta_grid
        .iter()
        .map(|&delta| {
            let sup = (0..RING_POINTS)
                .into_par_iter()
                .map(|k| {
                    let phi = std::f64::consts::TAU * k as f64 / RING_POINTS as f64;
                    let b = ParamVector::new(vec![
                        star.as_slice()[0] + delta * phi.cos(),
                        star.as_slice()[1] + delta * phi.sin(),
                    ])?;
                    rd_population_numeric(model, &b, &cfg.quad)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((delta, (ingredients.alpha_star - sup).max(0.0)))
        })
        .collect::<Result<_>>()?;
    let c2prime_kappa_hat = c2prime_deltas
        .iter()
        .map(|(d, gap)| gap / d)
        .fold(f64::INFINITY, f64::min);
    Ok(AssumptionCheckReport {
        a2_spread: hi - lo,
        a3_g_sup,
        a3_modulus,
        g_oddness_defect,
        c2prime_kappa_hat,
        c2prime_deltas,
    })
}

/// Lower Cholesky factor of the covariance, with diagonal jitter `1e-8`
/// escalated tenfold until the factorization succeeds (at most `1e-4`).
pub fn bridge_factor(ingredients: &LimitIngredients) -> Result<(DMatrix<f64>, f64)> {
    let m = ingredients.len();
    let cov = DMatrix::from_row_slice(m, m, &ingredients.cov_matrix);
    let mut jitter = 1e-8;
    while jitter <= 1e-4 * (1.0 + 1e-9) {
        let mut a = cov.clone();
        for i in 0..m {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            return Ok((ch.l(), jitter));
        }
        jitter *= 10.0;
    }
    Err(DepthError::Factorization(
        "covariance is not positive semidefinite even with 1e-4 jitter".into(),
    ))
}

/// Draws of the Gaussian process `W ~ N(0, cov_matrix)` on the direction grid.
pub fn sample_bridge(ingredients: &LimitIngredients, n_draws: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (l, _) = bridge_factor(ingredients)?;
    let m = ingredients.len();
    Ok((0..n_draws)
        .into_par_iter()
        .map(|d| {
            let mut g = rng(derive_seed(seed, "bridge", d as u64));
            let z = DVector::from_iterator(m, (0..m).map(|_| g.sample::<f64, _>(StandardNormal)));
            (&l * z).iter().copied().collect()
        })
        .collect())
}

/// `M(s) = min_v (W(v) + g(v) s)`.
pub fn path_value(w: &[f64], g: &[[f64; 2]], s: [f64; 2]) -> f64 {
    w.iter()
        .zip(g)
        .map(|(wv, gv)| wv + gv[0] * s[0] + gv[1] * s[1])
        .fold(f64::INFINITY, f64::min)
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMaximum {
    pub s_hat: [f64; 2],
    pub m_value: f64,
    /// No coarse grid point more than one step from the best one comes
    /// within 1e-9 of its value.
    pub unique_ok: bool,
    /// The argmax lies within one coarse step of the box boundary.
    pub on_boundary: bool,
}

/// Maximizes `M` over the box: coarse scan, then nested golden-section
/// search in the cell around the best grid point. `M` is concave, so the
/// nested search converges to the maximum of the cell.
pub fn maximize_path(w: &[f64], g: &[[f64; 2]], grid: &SGrid) -> PathMaximum {
    let r = grid.resolution;
    let step = grid.step();
    let mut values = vec![0.0; r * r];
    let (mut best_k, mut best_v) = (0, f64::NEG_INFINITY);
    for i in 0..r {
        for j in 0..r {
            let v = path_value(w, g, [grid.point(i), grid.point(j)]);
            values[i * r + j] = v;
            if v > best_v {
                best_v = v;
                best_k = i * r + j;
            }
        }
    }
    let (bi, bj) = (best_k / r, best_k % r);
    let unique_ok = !(0..r * r).any(|k| {
        let (i, j) = (k / r, k % r);
        let far = i.abs_diff(bi) > 1 || j.abs_diff(bj) > 1;
        far && values[k] >= best_v - 1e-9
    });
    let (c0, c1) = (grid.point(bi), grid.point(bj));
    let hw = grid.half_width;
    let (a0, b0) = ((c0 - step).max(-hw), (c0 + step).min(hw));
    let (a1, b1) = ((c1 - step).max(-hw), (c1 + step).min(hw));
    let tol = 1e-10 * (1.0 + hw);
    let (s0, _) = golden_max(|s0| golden_max(|s1| path_value(w, g, [s0, s1]), a1, b1, tol).1, a0, b0, tol);
    let (s1, v_refined) = golden_max(|s1| path_value(w, g, [s0, s1]), a1, b1, tol);
    let (s_hat, m_value) = if v_refined >= best_v {
        ([s0, s1], v_refined)
    } else {
        ([c0, c1], best_v)
    };
    let on_boundary = s_hat.iter().any(|s| s.abs() > hw - step);
    PathMaximum {
        s_hat,
        m_value,
        unique_ok,
        on_boundary,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLawSample {
    pub s_hat: Vec<f64>,
    pub m_value: f64,
    pub concavity_ok: bool,
    pub unique_ok: bool,
    /// `M` at every box corner is below `M(s_hat)`.
    pub boundary_decay_ok: bool,
    /// The argmax is near the box boundary; the draw is flagged, not clipped.
    pub on_boundary: bool,
}

const CONCAVITY_SEGMENTS: usize = 16;

pub fn simulate_limit_law(
    ingredients: &LimitIngredients,
    cfg: &ExperimentConfig,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<LimitLawSample>> {
    let draws = sample_bridge(ingredients, n_draws, seed)?;
    let g = &ingredients.g_table;
    let grid = cfg.s_grid;
    let hw = grid.half_width;
    Ok(draws
        .par_iter()
        .enumerate()
        .map(|(d, w)| {
            let best = maximize_path(w, g, &grid);
            let mut check = rng(derive_seed(seed, "concavity", d as u64));
            let concavity_ok = (0..CONCAVITY_SEGMENTS).all(|_| {
                let a = [check.gen_range(-hw..hw), check.gen_range(-hw..hw)];
                let b = [check.gen_range(-hw..hw), check.gen_range(-hw..hw)];
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                path_value(w, g, mid) >= 0.5 * (path_value(w, g, a) + path_value(w, g, b)) - 1e-9
            });
            let boundary_decay_ok = [[-hw, -hw], [-hw, hw], [hw, -hw], [hw, hw]]
                .iter()
                .all(|&c| path_value(w, g, c) < best.m_value);
            LimitLawSample {
                s_hat: best.s_hat.to_vec(),
                m_value: best.m_value,
                concavity_ok,
                unique_ok: best.unique_ok,
                boundary_decay_ok,
                on_boundary: best.on_boundary,
            }
        })
        .collect())
}

/// `sqrt(n) (beta_hat - beta_star)` over `reps` independent samples.
pub fn empirical_limit_samples(model: &PopulationModel, n: usize, reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let star = beta_star(model)?;
    let root = (n as f64).sqrt();
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (set, _) = nondegenerate_sample(model, n, derive_seed(seed, &format!("empirical/n={n}"), rep as u64))?;
            let fit = fit_exact_p2(&set)?;
            Ok(fit
                .beta_hat
                .as_slice()
                .iter()
                .zip(star.as_slice())
                .map(|(b, s)| root * (b - s))
                .collect())
        })
        .collect()
}

/// `s1,s2,...` rows for a cloud of vectors.
pub fn cloud_csv(points: &[Vec<f64>]) -> String {
    let dim = points.first().map_or(2, |p| p.len());
    let header: Vec<String> = (1..=dim).map(|j| format!("s{j}")).collect();
    let mut s = header.join(",") + "\n";
    for p in points {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn parse_cloud_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| DepthError::Parse {
                    line: k + 1,
                    message: format!("'{f}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::compute_limit_ingredients;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n_grid: vec![50, 100],
            reps: 30,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let mut c = small_cfg();
        c.reps = 29;
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.n_grid = vec![100, 100];
        assert!(c.validate().is_err());
    }

    #[test]
    fn consistency_is_reproducible() {
        let cfg = small_cfg();
        let m = PopulationModel::BivariateNormalStd;
        let a = run_consistency(&m, &cfg).unwrap();
        let b = run_consistency(&m, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.rows.len(), 2);
        assert!(a.loglog_slope.is_finite());
        assert!(a.rows.iter().all(|r| r.errors.len() == 30 && r.q1 <= r.median && r.median <= r.q3));
        assert!(a.replicates_csv().lines().count() == 61);
        assert!(run_consistency(&PopulationModel::from_name("contaminated").unwrap(), &cfg).is_err());
    }

    #[test]
    fn path_maximum_scales_inversely_with_g() {
        let w: Vec<f64> = (0..64).map(|k| ((k * 37 % 64) as f64 / 64.0 - 0.5) * 0.3).collect();
        let g: Vec<[f64; 2]> = (0..64)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 64.0;
                [-t.cos(), -t.sin()]
            })
            .collect();
        let grid = SGrid { half_width: 4.0, resolution: 81 };
        let base = maximize_path(&w, &g, &grid);
        let g2: Vec<[f64; 2]> = g.iter().map(|v| [2.0 * v[0], 2.0 * v[1]]).collect();
        let scaled = maximize_path(&w, &g2, &grid);
        for j in 0..2 {
            assert!((scaled.s_hat[j] - base.s_hat[j] / 2.0).abs() < 1e-6);
        }
        assert!((scaled.m_value - base.m_value).abs() < 1e-9);
        let zero = maximize_path(&vec![0.0; 64], &g, &grid);
        assert!(zero.s_hat.iter().all(|s| s.abs() < 1e-6));
        assert!(zero.m_value.abs() < 1e-9);
        let fine = maximize_path(&w, &g, &SGrid { half_width: 4.0, resolution: 161 });
        for j in 0..2 {
            assert!((fine.s_hat[j] - base.s_hat[j]).abs() <= grid.step());
        }
    }

    #[test]
    fn bridge_covariance_matches() {
        let quad = QuadConfig { v_grid: 64, ..Default::default() };
        let ing = compute_limit_ingredients(&PopulationModel::BivariateNormalStd, &quad, 1e-3).unwrap();
        let draws = sample_bridge(&ing, 2000, 5).unwrap();
        let m = ing.len();
        let tol = 4.0 / (draws.len() as f64).sqrt();
        for (i, j) in [(0, 0), (0, 1), (0, 16), (5, 37), (10, 42)] {
            let c = draws.iter().map(|w| w[i] * w[j]).sum::<f64>() / draws.len() as f64;
            assert!((c - ing.cov_at(i, j)).abs() < tol, "({i},{j}) {c} vs {}", ing.cov_at(i, j));
        }
        assert_eq!(draws[0].len(), m);
    }

    #[test]
    fn cloud_round_trip() {
        let pts = vec![vec![1.5, -2.0], vec![0.1, 3.0]];
        assert_eq!(parse_cloud_csv(&cloud_csv(&pts)).unwrap(), pts);
        assert!(parse_cloud_csv("s1,s2\n1,x\n").is_err());
    }
}
