//! Generative models and population regression depth.
//!
//! The population depth of `beta` is `inf_v h(beta, v)` with
//! `h(beta, v) = P(r(beta) v'w >= 0)`. For simple regression with `v = (v1, v2)`
//! and `v2 != 0`, the sign of `v'w` flips at the covariate cut `c = -v1/v2`, so
//! `h` reduces to one-dimensional integrals over `x` of the conditional
//! probabilities `P(y >= beta0 + beta1 x | x)` on either side of the cut. That
//! reduction is the definitional route ([`rd_population_numeric`]); the
//! closed forms ([`rd_normal_closed`], [`rd_disk_closed`]) are checked
//! against it.
//!
//! Closed forms follow the definition exactly: the normal horizontal-line
//! case is `1 - Phi(|beta0|)`, the constant of the normal two-region case is
//! `1 - Phi(-beta0/beta1)`, and the disk region integrals are areas divided
//! by `pi`.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rand_distr::{Cauchy, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};
use crate::quadrature::{adaptive, norm_cdf, GaussLegendre};
use crate::depth::rd_normalized;
use crate::seeding::{derive_seed, rng};
use crate::types::{Observation, ObservationSet, ParamVector, UnitDirection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PopulationModel {
    /// (x, y) ~ N2(0, I2).
    BivariateNormalStd,
    /// (x, y) uniform on the closed unit disk.
    UniformUnitDisk,
    /// x ~ standard Cauchy, y = beta0 + beta1 x + N(0, error_scale^2).
    CauchyDesign { beta_true: [f64; 2], error_scale: f64 },
    /// (1 - epsilon) N2(0, I2) + epsilon point mass at (shift, -shift).
    ContaminatedNormal { epsilon: f64, shift: f64 },
}

impl PopulationModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PopulationModel::CauchyDesign { beta_true, error_scale } => {
                if !(error_scale > 0.0) || !error_scale.is_finite() {
                    return Err(DepthError::InvalidArgument("error_scale must be > 0".into()));
                }
                if beta_true.iter().any(|b| !b.is_finite()) {
                    return Err(DepthError::NonFinite("beta_true"));
                }
            }
            PopulationModel::ContaminatedNormal { epsilon, shift } => {
                if !(0.0..0.5).contains(&epsilon) {
                    return Err(DepthError::InvalidArgument("epsilon must be in [0, 0.5)".into()));
                }
                if !shift.is_finite() {
                    return Err(DepthError::NonFinite("shift"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Short name used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            PopulationModel::BivariateNormalStd => "normal",
            PopulationModel::UniformUnitDisk => "disk",
            PopulationModel::CauchyDesign { .. } => "cauchy",
            PopulationModel::ContaminatedNormal { .. } => "contaminated",
        }
    }

    /// Parses `normal`, `disk`, `cauchy` (beta_true = (1, 2), unit error
    /// scale) and `contaminated` (epsilon = 0.1, shift = 5).
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "normal" => Ok(PopulationModel::BivariateNormalStd),
            "disk" => Ok(PopulationModel::UniformUnitDisk),
            "cauchy" => Ok(PopulationModel::CauchyDesign {
                beta_true: [1.0, 2.0],
                error_scale: 1.0,
            }),
            "contaminated" => Ok(PopulationModel::ContaminatedNormal {
                epsilon: 0.1,
                shift: 5.0,
            }),
            other => Err(DepthError::InvalidArgument(format!(
                "unknown model '{other}' (expected normal, disk, cauchy or contaminated)"
            ))),
        }
    }

    /// The deepest population fit, where it is known.
    pub fn beta_star(&self) -> Option<ParamVector> {
        match self {
            PopulationModel::BivariateNormalStd | PopulationModel::UniformUnitDisk => Some(ParamVector::zeros(2)),
            PopulationModel::CauchyDesign { beta_true, .. } => ParamVector::new(beta_true.to_vec()).ok(),
            PopulationModel::ContaminatedNormal { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub nodes: usize,
    pub v_grid: usize,
    pub mc_fallback: usize,
    pub seed: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            nodes: 256,
            v_grid: 256,
            mc_fallback: 200_000,
            seed: 0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 32 {
            return Err(DepthError::InvalidArgument("nodes must be >= 32".into()));
        }
        if self.v_grid < 64 {
            return Err(DepthError::InvalidArgument("v_grid must be >= 64".into()));
        }
        Ok(())
    }
}

/// Draws `n` i.i.d. observations; deterministic given `seed`.
pub fn sample(model: &PopulationModel, n: usize, seed: u64) -> Result<ObservationSet> {
    if n < 1 {
        return Err(DepthError::InvalidArgument("n must be >= 1".into()));
    }
    model.validate()?;
    let mut g = rng(seed);
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = match *model {
            PopulationModel::BivariateNormalStd => (g.sample(StandardNormal), g.sample(StandardNormal)),
            PopulationModel::UniformUnitDisk => {
                let r = g.gen::<f64>().sqrt();
                let t = TAU * g.gen::<f64>();
                (r * t.cos(), r * t.sin())
            }
            PopulationModel::CauchyDesign { beta_true, error_scale } => {
                let x: f64 = Cauchy::new(0.0, 1.0).expect("unit cauchy").sample(&mut g);
                let e = Normal::new(0.0, error_scale).expect("validated").sample(&mut g);
                (x, beta_true[0] + beta_true[1] * x + e)
            }
            PopulationModel::ContaminatedNormal { epsilon, shift } => {
                if g.gen::<f64>() < epsilon {
                    (shift, -shift)
                } else {
                    (g.sample(StandardNormal), g.sample(StandardNormal))
                }
            }
        };
        obs.push(Observation::new(vec![x], y)?);
    }
    ObservationSet::new(obs)
}

const NORMAL_RANGE: f64 = 12.0;

/// Conditional-probability integrator for the two models with a
/// one-dimensional reduction.
pub(crate) struct Reducer {
    model: Smooth,
    rule: GaussLegendre,
}

#[derive(Clone, Copy)]
enum Smooth {
    Normal,
    Disk,
}

impl Reducer {
    pub(crate) fn new(model: &PopulationModel, nodes: usize) -> Result<Self> {
        let model = match model {
            PopulationModel::BivariateNormalStd => Smooth::Normal,
            PopulationModel::UniformUnitDisk => Smooth::Disk,
            other => {
                return Err(DepthError::Unsupported(format!(
                    "no one-dimensional reduction for model '{}'",
                    other.name()
                )))
            }
        };
        Ok(Self {
            model,
            rule: GaussLegendre::new(nodes),
        })
    }

    /// `P(a < x < b, y >= m(x))` (or `y <= m(x)` when `above` is false),
    /// with `m(x) = beta0 + beta1 x`.
    pub(crate) fn mass(&self, beta: [f64; 2], a: f64, b: f64, above: bool) -> f64 {
        let [b0, b1] = beta;
        match self.model {
            Smooth::Normal => {
                let (a, b) = (a.max(-NORMAL_RANGE), b.min(NORMAL_RANGE));
                let sign = if above { -1.0 } else { 1.0 };
                self.rule.integrate(
                    |x| norm_cdf(sign * (b0 + b1 * x)) * crate::quadrature::norm_pdf(x),
                    a,
                    b,
                )
            }
            Smooth::Disk => {
                let (a, b) = (a.max(-1.0), b.min(1.0));
                if b <= a {
                    return 0.0;
                }
                // x = sin u; the conditional law of y is uniform on [-cos u, cos u]
                let (ua, ub) = (a.asin(), b.asin());
                let mut cuts = vec![ua, ub];
                for root in chord_roots(b0, b1) {
                    let u = root.asin();
                    if u > ua && u < ub {
                        cuts.push(u);
                    }
                }
                cuts.sort_by(f64::total_cmp);
                let f = |u: f64| {
                    let s = u.cos();
                    let m = b0 + b1 * u.sin();
                    let p_above = ((s - m) / (2.0 * s)).clamp(0.0, 1.0);
                    let p = if above { p_above } else { 1.0 - p_above };
                    p * 2.0 / PI * s * s
                };
                cuts.windows(2).map(|w| self.rule.integrate(f, w[0], w[1])).sum()
            }
        }
    }

    /// `h(beta, v) = P(r(beta) v'w >= 0)` for `v = (cos theta, sin theta)`.
    pub(crate) fn h(&self, beta: [f64; 2], theta: f64) -> f64 {
        let (v1, v2) = (theta.cos(), theta.sin());
        let inf = f64::INFINITY;
        if v2.abs() < 1e-300 {
            return if v1 > 0.0 {
                self.mass(beta, -inf, inf, true)
            } else {
                self.mass(beta, -inf, inf, false)
            };
        }
        let c = -v1 / v2;
        if v2 > 0.0 {
            self.mass(beta, c, inf, true) + self.mass(beta, -inf, c, false)
        } else {
            self.mass(beta, -inf, c, true) + self.mass(beta, c, inf, false)
        }
    }
}

/// x-coordinates where the line `y = beta0 + beta1 x` meets the unit circle.
fn chord_roots(b0: f64, b1: f64) -> Vec<f64> {
    let delta = 1.0 + b1 * b1 - b0 * b0;
    if delta <= 0.0 {
        return vec![];
    }
    let s = delta.sqrt();
    let d = 1.0 + b1 * b1;
    vec![(-b0 * b1 - s) / d, (-b0 * b1 + s) / d]
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
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
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn beta2(beta: &ParamVector) -> Result<[f64; 2]> {
    if beta.dim() != 2 {
        return Err(DepthError::DimensionMismatch {
            expected: 2,
            found: beta.dim(),
        });
    }
    Ok([beta.intercept(), beta.slopes()[0]])
}

/// Population depth by the definition: minimum of `h(beta, v)` over an angle
/// grid, refined by golden-section search on the arc around the best angle.
///
/// Models without a one-dimensional reduction fall back to the exact depth
/// of `beta` in a seeded sample of size `cfg.mc_fallback`.
pub fn rd_population_numeric(model: &PopulationModel, beta: &ParamVector, cfg: &QuadConfig) -> Result<f64> {
    cfg.validate()?;
    let b = beta2(beta)?;
    match Reducer::new(model, cfg.nodes) {
        Ok(red) => Ok(population_minimum(&red, b, cfg.v_grid).1),
        Err(DepthError::Unsupported(_)) => {
            let big = sample(model, cfg.mc_fallback.max(1), derive_seed(cfg.seed, "population-mc", 0))?;
            Ok(rd_normalized(&big, beta, None)?.normalized)
        }
        Err(e) => Err(e),
    }
}

/// (argmin angle, minimum) of `h(beta, .)`.
pub(crate) fn population_minimum(red: &Reducer, b: [f64; 2], v_grid: usize) -> (f64, f64) {
    let step = TAU / v_grid as f64;
    let (mut k_best, mut best) = (0, f64::INFINITY);
    for k in 0..v_grid {
        let v = red.h(b, k as f64 * step);
        if v < best {
            best = v;
            k_best = k;
        }
    }
    let center = k_best as f64 * step;
    let (t, refined) = golden_min(|t| red.h(b, t), center - step, center + step, 60);
    if refined < best {
        (t, refined)
    } else {
        (center, best)
    }
}

/// Closed-form population depth for (x, y) ~ N2(0, I2).
pub fn rd_normal_closed(beta: &ParamVector) -> Result<f64> {
    let [b0, b1] = beta2(beta)?;
    // y -> -y and x -> -x reduce every sign quadrant to b0, b1 >= 0
    let (b0, b1) = (b0.abs(), b1.abs());
    let tol = 1e-13;
    let pdf = crate::quadrature::norm_pdf;
    if b1 == 0.0 {
        return Ok(1.0 - norm_cdf(b0));
    }
    let line = move |x: f64| norm_cdf(b0 + b1 * x) * pdf(x);
    if b0 == 0.0 {
        let upper = adaptive(&line, 0.0, NORMAL_RANGE, tol);
        return Ok(1.0 - 2.0 * upper);
    }
    let c = -b0 / b1;
    let left = adaptive(&line, -NORMAL_RANGE, c.max(-NORMAL_RANGE), tol);
    let right = adaptive(&line, c.max(-NORMAL_RANGE), NORMAL_RANGE, tol);
    Ok(1.0 - norm_cdf(c) + left - right)
}

/// Closed-form population depth for (x, y) uniform on the unit disk.
pub fn rd_disk_closed(beta: &ParamVector) -> Result<f64> {
    let [b0, b1] = beta2(beta)?;
    let (b0, b1) = (b0.abs(), b1.abs());
    if b0 == 0.0 {
        return Ok(0.5 - b1.atan() / PI);
    }
    let delta = 1.0 + b1 * b1 - b0 * b0;
    if delta <= 0.0 {
        return Ok(0.0);
    }
    let g1 = |x: f64| 0.5 * (x * (1.0 - x * x).max(0.0).sqrt() + x.asin());
    let g2 = |x: f64| b0 * x + 0.5 * b1 * x * x;
    let g = |x: f64| g1(x) - g2(x);
    let roots = chord_roots(b0, b1);
    let (xm, xp) = (roots[0], roots[1]);
    let area = if b0 + b1 * xm >= 0.0 {
        // both intersections above the x-axis: the cap above the line
        g(xp) - g(xm)
    } else {
        let c = -b0 / b1;
        g(xp) - g(xm) + 2.0 * g2(c) - 2.0 * g2(xm)
    };
    Ok((area / PI).clamp(0.0, 1.0))
}

/// Dispatches to the closed form of a model.
pub fn rd_closed(model: &PopulationModel, beta: &ParamVector) -> Result<f64> {
    match model {
        PopulationModel::BivariateNormalStd => rd_normal_closed(beta),
        PopulationModel::UniformUnitDisk => rd_disk_closed(beta),
        other => Err(DepthError::Unsupported(format!(
            "no closed form for model '{}'",
            other.name()
        ))),
    }
}

/// Everything the limiting distribution of the deepest fit needs, on a
/// uniform angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitIngredients {
    pub model: PopulationModel,
    pub alpha_star: f64,
    /// Grid angles in radians.
    pub v_grid: Vec<f64>,
    /// `h(0, v)` on the grid; constant under the symmetry assumption.
    pub h0: Vec<f64>,
    /// Gradient of `h(beta, v)` in `beta` at `beta = 0`.
    pub g_table: Vec<[f64; 2]>,
    /// `Cov(1{A_u}, 1{A_v})` row-major, `A_v = {y v'w >= 0}`.
    pub cov_matrix: Vec<f64>,
    pub fd_step: f64,
}

/// Largest tolerated `max - min` of `h(0, v)` over the grid.
pub const A2_TOLERANCE: f64 = 5e-3;

impl LimitIngredients {
    pub fn len(&self) -> usize {
        self.v_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_grid.is_empty()
    }

    pub fn cov_at(&self, i: usize, j: usize) -> f64 {
        self.cov_matrix[i * self.len() + j]
    }

    pub fn directions(&self) -> Vec<UnitDirection> {
        self.v_grid.iter().map(|&t| UnitDirection::from_angle(t)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| DepthError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// x-interval where `v'w >= 0` (`positive`) or `<= 0`.
fn halfline(theta: f64, positive: bool) -> (f64, f64) {
    let (v1, v2) = (theta.cos(), theta.sin());
    let inf = f64::INFINITY;
    let s = if positive { 1.0 } else { -1.0 };
    let (v1, v2) = (s * v1, s * v2);
    if v2.abs() < 1e-300 {
        return if v1 >= 0.0 { (-inf, inf) } else { (0.0, 0.0) };
    }
    let c = -v1 / v2;
    if v2 > 0.0 {
        (c, inf)
    } else {
        (-inf, c)
    }
}

pub fn compute_limit_ingredients(model: &PopulationModel, cfg: &QuadConfig, fd_step: f64) -> Result<LimitIngredients> {
    cfg.validate()?;
    if !(fd_step > 0.0) {
        return Err(DepthError::InvalidArgument("fd_step must be > 0".into()));
    }
    let red = Reducer::new(model, cfg.nodes)?;
    let m = cfg.v_grid;
    let angles: Vec<f64> = (0..m).map(|k| TAU * k as f64 / m as f64).collect();
    let zero = [0.0, 0.0];
    let h0: Vec<f64> = angles.iter().map(|&t| red.h(zero, t)).collect();
    let (lo, hi) = h0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo > A2_TOLERANCE {
        let worst: Vec<String> = angles
            .iter()
            .zip(&h0)
            .filter(|(_, &v)| (v - lo).abs() < 1e-12 || (v - hi).abs() < 1e-12)
            .map(|(t, v)| format!("theta={t:.4} h={v:.5}"))
            .collect();
        return Err(DepthError::AssumptionViolated(format!(
            "h(0, v) is not constant over directions (spread {:.3e}): {}",
            hi - lo,
            worst.join(", ")
        )));
    }
    let alpha_star = h0.iter().sum::<f64>() / m as f64;
    let g: Vec<[f64; 2]> = angles
        .iter()
        .map(|&t| {
            let d0 = (red.h([fd_step, 0.0], t) - red.h([-fd_step, 0.0], t)) / (2.0 * fd_step);
            let d1 = (red.h([0.0, fd_step], t) - red.h([0.0, -fd_step], t)) / (2.0 * fd_step);
            [d0, d1]
        })
        .collect();

    // P(A_u and A_v) = P(y >= 0, u'w >= 0, v'w >= 0) + P(y <= 0, u'w <= 0, v'w <= 0)
    let mut cov = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let mut joint = 0.0;
            for positive in [true, false] {
                let (a1, b1) = halfline(angles[i], positive);
                let (a2, b2) = halfline(angles[j], positive);
                let (a, b) = (a1.max(a2), b1.min(b2));
                if a < b {
                    joint += red.mass(zero, a, b, positive);
                }
            }
            let c = joint - alpha_star * alpha_star;
            cov[i * m + j] = c;
            cov[j * m + i] = c;
        }
    }
    Ok(LimitIngredients {
        model: model.clone(),
        alpha_star,
        v_grid: angles,
        h0,
        g_table: g,
        cov_matrix: cov,
        fd_step,
    })
}

/// `h(beta, v)` on the default quadrature, exposed for diagnostics.
pub fn directional_probability(model: &PopulationModel, beta: &ParamVector, theta: f64, cfg: &QuadConfig) -> Result<f64> {
    let red = Reducer::new(model, cfg.nodes)?;
    Ok(red.h(beta2(beta)?, theta))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::norm_pdf;

    fn b(b0: f64, b1: f64) -> ParamVector {
        ParamVector::new(vec![b0, b1]).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        for m in ["normal", "disk", "cauchy", "contaminated"] {
            let model = PopulationModel::from_name(m).unwrap();
            assert_eq!(sample(&model, 5, 3).unwrap(), sample(&model, 5, 3).unwrap());
            assert_ne!(sample(&model, 5, 3).unwrap(), sample(&model, 5, 4).unwrap());
        }
        assert!(sample(&PopulationModel::BivariateNormalStd, 0, 1).is_err());
    }

    #[test]
    fn normal_sample_moments() {
        let s = sample(&PopulationModel::BivariateNormalStd, 100_000, 17).unwrap();
        for v in [s.xs(), s.ys()] {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / v.len() as f64;
            assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn disk_sample_area_law() {
        let s = sample(&PopulationModel::UniformUnitDisk, 100_000, 18).unwrap();
        let r2: Vec<f64> = s.iter().map(|o| o.x()[0].powi(2) + o.y().powi(2)).collect();
        assert!(r2.iter().all(|&v| v <= 1.0 + 1e-15));
        let frac = r2.iter().filter(|&&v| v <= 0.5).count() as f64 / r2.len() as f64;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn invalid_models() {
        let bad = PopulationModel::ContaminatedNormal { epsilon: 0.5, shift: 1.0 };
        assert!(bad.validate().is_err());
        let bad = PopulationModel::CauchyDesign { beta_true: [0.0, 0.0], error_scale: 0.0 };
        assert!(bad.validate().is_err());
        assert!(PopulationModel::from_name("laplace").is_err());
        let cfg = QuadConfig::default();
        let m = PopulationModel::from_name("cauchy").unwrap();
        assert!(matches!(rd_closed(&m, &b(0.0, 0.0)), Err(DepthError::Unsupported(_))));
        let three = ParamVector::new(vec![0.0; 3]).unwrap();
        assert!(rd_population_numeric(&PopulationModel::UniformUnitDisk, &three, &cfg).is_err());
    }

    #[test]
    fn monte_carlo_fallback_for_cauchy_design() {
        // the true line is the deepest fit of a regression-symmetric model
        let cfg = QuadConfig { mc_fallback: 20_000, ..Default::default() };
        let m = PopulationModel::from_name("cauchy").unwrap();
        let at_truth = rd_population_numeric(&m, &b(1.0, 2.0), &cfg).unwrap();
        assert!((at_truth - 0.5).abs() < 0.02, "{at_truth}");
        let off = rd_population_numeric(&m, &b(3.0, 2.0), &cfg).unwrap();
        assert!(off < 0.2, "{off}");
    }

    #[test]
    fn numeric_spot_values() {
        let cfg = QuadConfig::default();
        let normal = PopulationModel::BivariateNormalStd;
        let disk = PopulationModel::UniformUnitDisk;
        assert!((rd_population_numeric(&normal, &b(0.0, 0.0), &cfg).unwrap() - 0.5).abs() < 1e-4);
        assert!((rd_population_numeric(&disk, &b(0.0, 0.0), &cfg).unwrap() - 0.5).abs() < 1e-4);
        let v = rd_population_numeric(&normal, &b(1.0, 0.0), &cfg).unwrap();
        assert!((v - (1.0 - norm_cdf(1.0))).abs() < 1e-3, "{v}");
    }

    #[test]
    fn closed_form_spot_values() {
        assert_eq!(rd_normal_closed(&b(0.0, 0.0)).unwrap(), 0.5);
        assert!((rd_normal_closed(&b(0.0, 1.0)).unwrap() - 0.25).abs() < 1e-12);
        assert!((rd_normal_closed(&b(1.0, 0.0)).unwrap() - 0.158_655_253_931_457).abs() < 1e-12);
        assert!((rd_disk_closed(&b(0.0, 1.0)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(rd_disk_closed(&b(3.0, 0.0)).unwrap(), 0.0);
        assert_eq!(rd_disk_closed(&b(0.0, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn disk_closed_form_matches_definition() {
        let cfg = QuadConfig::default();
        let disk = PopulationModel::UniformUnitDisk;
        for (b0, b1) in [(0.3, 0.5), (-0.8, 0.2), (0.9, -1.5), (1.2, 1.0), (0.5, 0.0)] {
            let closed = rd_disk_closed(&b(b0, b1)).unwrap();
            let num = rd_population_numeric(&disk, &b(b0, b1), &cfg).unwrap();
            assert!((closed - num).abs() < 2e-3, "beta=({b0},{b1}) closed={closed} numeric={num}");
        }
    }

    #[test]
    fn normal_gradient_matches_analytic_derivative() {
        // for v2 > 0 with cut c: g(v) = phi(0) (2 Phi(c) - 1, -2 phi(c))
        let cfg = QuadConfig { v_grid: 64, ..Default::default() };
        let ing = compute_limit_ingredients(&PopulationModel::BivariateNormalStd, &cfg, 1e-3).unwrap();
        for (k, &t) in ing.v_grid.iter().enumerate() {
            let (v1, v2) = (t.cos(), t.sin());
            if v2.abs() < 1e-9 {
                continue;
            }
            let c = -v1 / v2;
            let s = v2.signum();
            let expect = [s * norm_pdf(0.0) * (2.0 * norm_cdf(c) - 1.0), -s * 2.0 * norm_pdf(0.0) * norm_pdf(c)];
            for j in 0..2 {
                assert!((ing.g_table[k][j] - expect[j]).abs() < 1e-6, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn covariance_structure() {
        let cfg = QuadConfig { v_grid: 64, ..Default::default() };
        for model in [PopulationModel::BivariateNormalStd, PopulationModel::UniformUnitDisk] {
            let ing = compute_limit_ingredients(&model, &cfg, 1e-3).unwrap();
            let m = ing.len();
            for i in 0..m {
                assert!((ing.cov_at(i, i) - 0.25).abs() < 2e-3);
                assert!((ing.cov_at(i, (i + m / 2) % m) + 0.25).abs() < 2e-3);
                let anti = (i + m / 2) % m;
                for j in 0..2 {
                    assert!((ing.g_table[i][j] + ing.g_table[anti][j]).abs() < 2.0 * ing.fd_step);
                }
            }
            let back = LimitIngredients::from_json(&ing.to_json()).unwrap();
            assert_eq!(back, ing);
        }
    }
}
