//! Maximum likelihood for the Poisson log-linear model.
//!
//! Fitting is Newton-Raphson on the log-likelihood (identical to IRLS for
//! the canonical log link) with step halving. Interaction or main-effect
//! columns whose cells all have zero counts are sent to `-inf` before the
//! iteration starts and their cells dropped; this is the extended MLE in
//! closed form. Any remaining drift is caught after the iteration by the
//! rule "coefficient below -10 and every loaded cell fitted below 1e-6".
//!
//! The log-likelihood omits the `Σ log N_A!` constant, so AIC and BIC
//! values differ from software that keeps it by a table-level constant.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::design::{build_design, Column, DesignMatrix, ModelSpec};
use crate::error::{MseError, Result};
use crate::tables::{CellTable, Subset};

pub const MAX_ITERATIONS: usize = 100;
pub const DEVIANCE_TOLERANCE: f64 = 1e-10;
const DIVERGED_COEF: f64 = -10.0;
const DIVERGED_FITTED: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub spec_id: String,
    pub col_labels: Vec<String>,
    /// Log-scale coefficients; `-inf` for columns removed as structurally
    /// zero (serialized as `null`).
    pub coefficients: Vec<f64>,
    /// Inverse observed information; `NaN` rows for diverged columns.
    pub covariance: Vec<Vec<f64>>,
    pub fitted: Vec<f64>,
    #[serde(skip)]
    pub subsets: Vec<Subset>,
    pub deviance: f64,
    pub loglik: f64,
    pub n_params: usize,
    pub n_cells: usize,
    pub bic_n: f64,
    pub aic: f64,
    pub bic: f64,
    pub dark_figure: f64,
    pub total_observed: f64,
    pub total_estimate: f64,
    /// Total in thousands rounded to one decimal, for display.
    pub total_estimate_k: f64,
    pub diverged: Vec<String>,
    #[serde(skip)]
    pub diverged_cols: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// Recompute BIC with a different sample size.
    pub fn with_bic_n(mut self, n: f64) -> Self {
        let (aic, bic) = information_criteria(&self, n);
        self.aic = aic;
        self.bic = bic;
        self.bic_n = n;
        self
    }

    /// Fitted mean of one cell, if the cell was part of the fit.
    pub fn fitted_for(&self, subset: Subset) -> Option<f64> {
        self.subsets.iter().position(|&s| s == subset).map(|i| self.fitted[i])
    }
}

pub fn round_k(total: f64) -> f64 {
    (total / 100.0).round() / 10.0
}

/// Output of the Newton iteration on a reduced design.
pub(crate) struct NewtonFit {
    pub theta: DVector<f64>,
    pub eta: DVector<f64>,
    /// Hessian of the negative (penalized) log-likelihood at `theta`.
    pub hessian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn poisson_loglik(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &ei)| if yi > 0.0 { yi * ei } else { 0.0 } - ei.exp())
        .sum()
}

fn poisson_score(x: &DMatrix<f64>, y: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
    x.transpose() * (y - eta.map(f64::exp))
}

/// Poisson log-likelihood of the design at `theta`, without the factorial
/// constant.
pub fn loglik_at(design: &DesignMatrix, theta: &[f64]) -> f64 {
    let eta = &design.x * DVector::from_column_slice(theta);
    poisson_loglik(&design.counts, &eta)
}

/// Gradient of [`loglik_at`] with respect to `theta`: `Xᵀ(y − exp(Xθ))`.
pub fn score_at(design: &DesignMatrix, theta: &[f64]) -> Vec<f64> {
    let eta = &design.x * DVector::from_column_slice(theta);
    poisson_score(&design.x, &design.counts, &eta).as_slice().to_vec()
}

fn saturated_loglik(y: &DVector<f64>) -> f64 {
    y.iter().map(|&v| if v > 0.0 { v * v.ln() - v } else { 0.0 }).sum()
}

fn penalty(theta: &DVector<f64>, precision: Option<&DVector<f64>>) -> f64 {
    precision.map_or(0.0, |p| 0.5 * theta.iter().zip(p.iter()).map(|(t, q)| q * t * t).sum::<f64>())
}

/// Maximize `Σ(yη − e^η) − ½ Σ precision·θ²` by damped Newton steps.
pub(crate) fn maximize(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    precision: Option<&DVector<f64>>,
    start: Option<&DVector<f64>>,
    max_iter: usize,
) -> Result<NewtonFit> {
    let p = x.ncols();
    let objective = |theta: &DVector<f64>| {
        let eta = x * theta;
        (poisson_loglik(y, &eta) - penalty(theta, precision), eta)
    };
    let mut theta = match start {
        Some(s) => s.clone(),
        None => {
            let target = y.map(|v| (v + 0.5).ln());
            least_squares(x, &target)?
        }
    };
    let sat = saturated_loglik(y);
    let (mut obj, mut eta) = objective(&theta);
    let mut converged = false;
    let mut iterations = 0;
    let mut hessian;
    while iterations < max_iter {
        iterations += 1;
        let lambda = eta.map(f64::exp);
        let mut grad = poisson_score(x, y, &eta);
        hessian = weighted_gram(x, &lambda);
        if let Some(prec) = precision {
            grad -= prec.component_mul(&theta);
            for i in 0..p {
                hessian[(i, i)] += prec[i];
            }
        }
        let step = solve_spd(&hessian, &grad)?;
        let decrement = grad.dot(&step);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &theta + &step * scale;
            let (cand_obj, cand_eta) = objective(&cand);
            if cand_obj.is_finite() && cand_obj >= obj - 1e-12 * obj.abs().max(1.0) {
                accepted = Some((cand, cand_obj, cand_eta));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, cand_obj, cand_eta)) = accepted else {
            // No ascent possible along the Newton direction: at the optimum
            // to machine precision.
            converged = true;
            break;
        };
        let dev_old = 2.0 * (sat - obj);
        let dev_new = 2.0 * (sat - cand_obj);
        theta = cand;
        obj = cand_obj;
        eta = cand_eta;
        // The decrement test catches deviances that stall at rounding noise.
        if (dev_old - dev_new).abs() / (dev_new.abs() + 0.1) < DEVIANCE_TOLERANCE || decrement < 1e-20 * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
    }
    let lambda = eta.map(f64::exp);
    hessian = weighted_gram(x, &lambda);
    if let Some(prec) = precision {
        for i in 0..p {
            hessian[(i, i)] += prec[i];
        }
    }
    Ok(NewtonFit {
        theta,
        eta,
        hessian,
        iterations,
        converged,
    })
}

/// `Xᵀ diag(w) X`.
pub(crate) fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    x.transpose() * xw
}

pub(crate) fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Ok(ch.solve(g));
    }
    let ridge = 1e-10 * h.diagonal().amax().max(1e-300);
    let mut reg = h.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += ridge;
    }
    reg.cholesky()
        .map(|ch| ch.solve(g))
        .ok_or_else(|| MseError::Numerical("information matrix is not positive definite".into()))
}

pub(crate) fn invert_spd(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    h.clone().cholesky().map(|c| c.inverse())
}

fn least_squares(x: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    x.clone()
        .svd(true, true)
        .solve(target, 1e-12)
        .map_err(|e| MseError::Numerical(e.to_string()))
}

/// Columns (other than the intercept) whose every remaining cell has a zero
/// count go to `-inf`; their cells are removed and the search repeats.
pub(crate) fn structural_zeros(design: &DesignMatrix) -> (Vec<bool>, Vec<bool>) {
    let (n, p) = (design.n_rows(), design.n_params());
    let mut row_active = vec![true; n];
    let mut col_diverged = vec![false; p];
    loop {
        let mut changed = false;
        for c in 0..p {
            if col_diverged[c] || design.columns[c] == Column::Intercept {
                continue;
            }
            let empty = (0..n)
                .filter(|&r| row_active[r] && design.x[(r, c)] != 0.0)
                .all(|r| design.counts[r] == 0.0);
            if empty {
                col_diverged[c] = true;
                for (r, active) in row_active.iter_mut().enumerate() {
                    if design.x[(r, c)] != 0.0 {
                        *active = false;
                    }
                }
                changed = true;
            }
        }
        if !changed {
            return (row_active, col_diverged);
        }
    }
}

fn submatrix(x: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| x[(rows[r], cols[c])])
}

/// Fit the model by maximum likelihood. BIC uses the observed total as its
/// sample size; see [`FitResult::with_bic_n`].
pub fn fit_mle(design: &DesignMatrix) -> Result<FitResult> {
    fit_with_start(design, None).map(|(fit, _)| fit)
}

pub fn fit_model(table: &CellTable, spec: &ModelSpec) -> Result<FitResult> {
    fit_mle(&build_design(table, spec)?)
}

/// Fit with an optional warm start for the reduced parameter vector; returns
/// the reduced parameter vector alongside the result.
pub(crate) fn fit_with_start(
    design: &DesignMatrix,
    start: Option<&DVector<f64>>,
) -> Result<(FitResult, DVector<f64>)> {
    let (n, p) = (design.n_rows(), design.n_params());
    let total = design.total();
    if total <= 0.0 {
        return Err(MseError::NoObservations);
    }
    let rank = crate::design::matrix_rank(&design.x);
    if rank < p {
        return Err(MseError::RankDeficient { rank, params: p });
    }
    let (row_active, col_diverged) = structural_zeros(design);
    let rows: Vec<usize> = (0..n).filter(|&r| row_active[r]).collect();
    let cols: Vec<usize> = (0..p).filter(|&c| !col_diverged[c]).collect();
    let xr = submatrix(&design.x, &rows, &cols);
    let yr = DVector::from_iterator(rows.len(), rows.iter().map(|&r| design.counts[r]));
    let rank_r = crate::design::matrix_rank(&xr);
    if rank_r < cols.len() {
        return Err(MseError::RankDeficient {
            rank: rank_r,
            params: cols.len(),
        });
    }
    let start = start.filter(|s| s.len() == cols.len());
    let newton = maximize(&xr, &yr, None, start, MAX_ITERATIONS)?;

    let mut coefficients = vec![f64::NEG_INFINITY; p];
    for (k, &c) in cols.iter().enumerate() {
        coefficients[c] = newton.theta[k];
    }
    let mut fitted = vec![0.0; n];
    for (k, &r) in rows.iter().enumerate() {
        fitted[r] = newton.eta[k].exp();
    }

    let mut diverged_cols: Vec<usize> = (0..p).filter(|&c| col_diverged[c]).collect();
    for &c in &cols {
        if design.columns[c] == Column::Intercept || coefficients[c] >= DIVERGED_COEF {
            continue;
        }
        let vanishing = (0..n)
            .filter(|&r| design.x[(r, c)] != 0.0)
            .all(|r| fitted[r] < DIVERGED_FITTED);
        if vanishing {
            diverged_cols.push(c);
        }
    }
    diverged_cols.sort_unstable();
    if !newton.converged && diverged_cols.is_empty() {
        return Err(MseError::NoConvergence {
            iterations: newton.iterations,
        });
    }

    let mut covariance = vec![vec![f64::NAN; p]; p];
    if let Some(inv) = invert_spd(&newton.hessian) {
        for (a, &ca) in cols.iter().enumerate() {
            for (b, &cb) in cols.iter().enumerate() {
                covariance[ca][cb] = inv[(a, b)];
            }
        }
    }

    let loglik = poisson_loglik(&yr, &newton.eta);
    let deviance = (2.0 * (saturated_loglik(&design.counts) - loglik)).max(0.0);
    let intercept = design
        .columns
        .iter()
        .position(|c| *c == Column::Intercept)
        .expect("design has an intercept");
    let dark_figure = coefficients[intercept].exp();
    let mut fit = FitResult {
        spec: design.spec.clone(),
        spec_id: design.spec.id(&design.names),
        col_labels: design.col_labels.clone(),
        coefficients,
        covariance,
        fitted,
        subsets: design.subsets.clone(),
        deviance,
        loglik,
        n_params: p,
        n_cells: n,
        bic_n: total,
        aic: 0.0,
        bic: 0.0,
        dark_figure,
        total_observed: total,
        total_estimate: total + dark_figure,
        total_estimate_k: round_k(total + dark_figure),
        diverged: diverged_cols.iter().map(|&c| design.col_labels[c].clone()).collect(),
        diverged_cols,
        converged: newton.converged,
        iterations: newton.iterations,
    };
    let (aic, bic) = information_criteria(&fit, total);
    fit.aic = aic;
    fit.bic = bic;
    Ok((fit, newton.theta))
}

/// `(AIC, BIC)` with `AIC = −2ℓ + 2p` and `BIC = −2ℓ + p log n`.
pub fn information_criteria(fit: &FitResult, n_for_bic: f64) -> (f64, f64) {
    let p = fit.n_params as f64;
    (-2.0 * fit.loglik + 2.0 * p, -2.0 * fit.loglik + p * n_for_bic.ln())
}

/// Upper tail of χ² with `df` degrees of freedom.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("positive degrees of freedom").sf(stat)
}

pub fn chi2_quantile(prob: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("positive degrees of freedom").inverse_cdf(prob)
}

/// Likelihood-ratio test of `small` against the larger nested `big`.
pub fn lrt_pvalue(small: &FitResult, big: &FitResult) -> Result<f64> {
    if !small.spec.is_subset_of(&big.spec) || small.n_cells != big.n_cells {
        return Err(MseError::InvalidArgument("models are not nested".into()));
    }
    let df = big.n_params as f64 - small.n_params as f64;
    let drop = small.deviance - big.deviance;
    if df == 0.0 {
        return Ok(1.0);
    }
    if drop < -1e-6 * (1.0 + small.deviance.abs()) {
        return Err(MseError::Numerical(format!(
            "larger model fits worse (deviance drop {drop})"
        )));
    }
    Ok(chi2_sf(drop.max(0.0), df))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileInterval {
    pub level: f64,
    pub point: f64,
    pub lower: f64,
    /// `+inf` (serialized as `null`) when the profile never crosses the cut.
    pub upper: f64,
    pub upper_unbounded: bool,
    pub point_k: f64,
    pub lower_k: f64,
    pub upper_k: Option<f64>,
}

/// Profile log-likelihood of the multinomial model as a function of the
/// dark figure `d`, treated as continuous.
pub struct ProfileLikelihood {
    design: DesignMatrix,
    observed: f64,
    warm: Option<DVector<f64>>,
}

impl ProfileLikelihood {
    pub fn new(table: &CellTable, spec: &ModelSpec) -> Result<Self> {
        let base = build_design(table, spec)?;
        let (n, p) = (base.n_rows(), base.n_params());
        let mut x = DMatrix::zeros(n + 1, p);
        x.view_mut((0, 0), (n, p)).copy_from(&base.x);
        x[(n, 0)] = 1.0;
        let mut counts = DVector::zeros(n + 1);
        counts.rows_mut(0, n).copy_from(&base.counts);
        let mut subsets = base.subsets.clone();
        subsets.push(0);
        let observed = base.total();
        Ok(Self {
            design: DesignMatrix {
                subsets,
                x,
                counts,
                ..base
            },
            observed,
            warm: None,
        })
    }

    pub fn observed(&self) -> f64 {
        self.observed
    }

    /// `log N! − log d! + Σ n_A log(λ̂_A/N) + d log(λ̂_∅/N)` with `N = n + d`,
    /// dropping the `Σ log n_A!` constant.
    pub fn loglik(&mut self, dark: f64) -> Result<f64> {
        let last = self.design.n_rows() - 1;
        self.design.counts[last] = dark.max(0.0);
        let (fit, theta) = fit_with_start(&self.design, self.warm.as_ref())?;
        self.warm = Some(theta);
        let big_n = self.observed + dark;
        let mut ll = ln_gamma(big_n + 1.0) - ln_gamma(dark + 1.0);
        for (r, &y) in self.design.counts.iter().enumerate() {
            if y > 0.0 {
                ll += y * (fit.fitted[r] / big_n).ln();
            }
        }
        Ok(ll)
    }
}

const MAX_DARK: f64 = 1e12;

/// Profile-likelihood intervals for the total population at each level.
pub fn profile_ci(table: &CellTable, spec: &ModelSpec, levels: &[f64]) -> Result<Vec<ProfileInterval>> {
    for &l in levels {
        if !(0.0 < l && l < 1.0) {
            return Err(MseError::InvalidArgument(format!("confidence level {l} not in (0, 1)")));
        }
    }
    let fit = fit_model(table, spec)?;
    if !fit.dark_figure.is_finite() {
        return Err(MseError::Numerical("dark figure estimate is not finite".into()));
    }
    let mut prof = ProfileLikelihood::new(table, spec)?;
    let point_dark = fit.dark_figure;
    let (d_max, l_max) = maximize_profile(&mut prof, point_dark)?;
    let observed = prof.observed();

    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let cut = chi2_quantile(level, 1.0);
        let mut excess = |d: f64, prof: &mut ProfileLikelihood| -> Result<f64> {
            Ok(2.0 * (l_max - prof.loglik(d)?) - cut)
        };
        let lower = if excess(0.0, &mut prof)? <= 0.0 {
            0.0
        } else {
            bisect(&mut prof, &mut excess, 0.0, d_max)?
        };
        let mut hi = d_max * 1.5 + 10.0;
        let mut unbounded = false;
        while excess(hi, &mut prof)? <= 0.0 {
            hi *= 2.0;
            if hi > MAX_DARK {
                unbounded = true;
                break;
            }
        }
        let upper = if unbounded {
            log::warn!("profile likelihood does not reach the {level} cut: upper bound unbounded");
            f64::INFINITY
        } else {
            bisect(&mut prof, &mut excess, d_max, hi)?
        };
        let (lo_t, hi_t, pt) = (observed + lower, observed + upper, observed + point_dark);
        out.push(ProfileInterval {
            level,
            point: pt,
            lower: lo_t.min(pt),
            upper: hi_t.max(pt),
            upper_unbounded: unbounded,
            point_k: round_k(pt),
            lower_k: round_k(lo_t.min(pt)),
            upper_k: (!unbounded).then(|| round_k(hi_t.max(pt))),
        });
    }
    Ok(out)
}

/// Golden-section search for the maximizing dark figure near the Poisson
/// point estimate.
fn maximize_profile(prof: &mut ProfileLikelihood, guess: f64) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = (guess * 2.0).max(guess + 10.0);
    while prof.loglik(hi)? > prof.loglik(hi / 1.5)? {
        lo = hi / 1.5;
        hi *= 2.0;
        if hi > MAX_DARK {
            return Err(MseError::Numerical("profile likelihood has no maximum".into()));
        }
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = prof.loglik(a)?;
    let mut fb = prof.loglik(b)?;
    for _ in 0..200 {
        if hi - lo < 1e-7 * (1.0 + hi) {
            break;
        }
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = prof.loglik(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = prof.loglik(b)?;
        }
    }
    let d = 0.5 * (lo + hi);
    let at_zero = prof.loglik(0.0)?;
    let at_d = prof.loglik(d)?;
    Ok(if at_zero > at_d { (0.0, at_zero) } else { (d, at_d) })
}

/// Root of `f` between `lo` and `hi`, where `f` changes sign.
fn bisect<F>(prof: &mut ProfileLikelihood, f: &mut F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: FnMut(f64, &mut ProfileLikelihood) -> Result<f64>,
{
    let f_lo = f(lo, prof)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid, prof)?;
        if fm.abs() < 1e-7 || hi - lo < 1e-9 * (1.0 + hi) {
            return Ok(mid);
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
