//! Bayesian fitting with shrinkage priors on the interactions, followed by
//! thresholding and a second-stage refit.
//!
//! The sampler is random-walk Metropolis. The proposal starts from the
//! inverse Hessian at the posterior mode scaled by `2.38² / p`; during
//! burn-in the covariance is re-estimated from the chain at three
//! checkpoints and a global scale is tuned towards 23% acceptance. After
//! burn-in the kernel is fixed.
//!
//! With `lambda = 0` every parameter has a flat prior. Pairs of lists that
//! share no case then have an interaction whose posterior is an atom at
//! `-inf`; [`remove_empty_overlaps`] records those pairs and drops the cells
//! they would load.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{build_design, matrix_rank, pairs, Column, ModelSpec, Pair};
use crate::error::{MseError, Result};
use crate::poisfit::{invert_spd, maximize, MAX_ITERATIONS};
use crate::stats::{effective_size, mean, quantile_sorted, split_rhat, variance};
use crate::tables::{CellTable, ListSystem};

pub const DEFAULT_MAIN_EFFECT_VARIANCE: f64 = 1e4;
/// Levels reported for the total population.
pub const TOTAL_PROBS: [f64; 5] = [0.025, 0.1, 0.5, 0.9, 0.975];
pub const RHAT_WARNING: f64 = 1.05;
pub const ACCEPTANCE_RANGE: (f64, f64) = (0.05, 0.7);
const TARGET_ACCEPTANCE: f64 = 0.234;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorConfig {
    /// Precision of the Gaussian prior on interactions; 0 means flat.
    pub lambda: f64,
    /// Prior variance of intercept and main effects when `lambda > 0`.
    pub main_effect_variance: f64,
}

impl PriorConfig {
    pub fn uniform() -> Self {
        Self {
            lambda: 0.0,
            main_effect_variance: DEFAULT_MAIN_EFFECT_VARIANCE,
        }
    }

    pub fn with_variance(variance: f64) -> Result<Self> {
        if !(variance > 0.0) || variance.is_infinite() {
            return Err(MseError::InvalidArgument(format!("prior variance {variance} must be positive and finite")));
        }
        Self::with_lambda(1.0 / variance)
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        let prior = Self {
            lambda,
            ..Self::uniform()
        };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || self.lambda.is_infinite() {
            return Err(MseError::InvalidArgument(format!("lambda {} must be finite and >= 0", self.lambda)));
        }
        if !(self.main_effect_variance > 0.0) {
            return Err(MseError::InvalidArgument("main effect variance must be positive".into()));
        }
        Ok(())
    }

    pub fn is_improper(&self) -> bool {
        self.lambda == 0.0
    }

    /// "Uniform" or "Variance v".
    pub fn label(&self) -> String {
        if self.is_improper() {
            "Uniform".into()
        } else {
            format!("Variance {}", 1.0 / self.lambda)
        }
    }

    fn precision(&self, columns: &[Column]) -> Option<DVector<f64>> {
        if self.is_improper() {
            return None;
        }
        Some(DVector::from_iterator(
            columns.len(),
            columns.iter().map(|c| match c {
                Column::Interaction(_) => self.lambda,
                _ => 1.0 / self.main_effect_variance,
            }),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McmcSettings {
    pub burn_in: usize,
    pub kept_samples: usize,
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
    pub adapt: bool,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            burn_in: 100_000,
            kept_samples: 10_000,
            thinning: 100,
            chains: 4,
            seed: 20_190_101,
            adapt: true,
        }
    }
}

impl McmcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.kept_samples < 4 || self.thinning == 0 || self.chains == 0 {
            return Err(MseError::InvalidArgument(
                "kept samples >= 4, thinning >= 1 and chains >= 1 are required".into(),
            ));
        }
        Ok(())
    }

    /// Settings for the refit: same lengths, seed derived from this one.
    pub fn stage_two(&self) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX);
        Self {
            seed: rng.next_u64(),
            ..*self
        }
    }
}

/// Thinned draws from every chain.
#[derive(Debug, Clone)]
pub struct Chains {
    pub names: Vec<String>,
    pub spec: ModelSpec,
    pub labels: Vec<String>,
    /// Per chain, row-major `kept × p`.
    pub draws: Vec<Vec<f64>>,
    pub acceptance: Vec<f64>,
    pub n_cells: usize,
    pub observed_total: f64,
}

impl Chains {
    pub fn n_params(&self) -> usize {
        self.labels.len()
    }

    pub fn kept(&self) -> usize {
        self.draws.first().map_or(0, |d| d.len() / self.n_params())
    }

    /// Trace of parameter `j` in chain `c`.
    pub fn trace(&self, c: usize, j: usize) -> Vec<f64> {
        self.draws[c].iter().skip(j).step_by(self.n_params()).copied().collect()
    }

    /// Total population per draw, chain by chain.
    pub fn total_traces(&self) -> Vec<Vec<f64>> {
        (0..self.draws.len())
            .map(|c| self.trace(c, 0).into_iter().map(|mu| self.observed_total + mu.exp()).collect())
            .collect()
    }

    /// One row per kept draw: chain, draw, every parameter, total.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("chain,draw");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push_str(",total\n");
        let p = self.n_params();
        for (c, d) in self.draws.iter().enumerate() {
            for (i, row) in d.chunks(p).enumerate() {
                out.push_str(&format!("{c},{i}"));
                for v in row {
                    out.push_str(&format!(",{v}"));
                }
                out.push_str(&format!(",{}\n", self.observed_total + row[0].exp()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParameterSummary {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    /// At [`TOTAL_PROBS`].
    pub quantiles: Vec<f64>,
    pub rhat: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantile {
    pub prob: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosteriorSummary {
    pub prior: Option<PriorConfig>,
    pub tau: Option<f64>,
    pub stage: u8,
    pub n_cells: usize,
    pub observed_total: f64,
    pub total_mean: f64,
    pub total_quantiles: Vec<Quantile>,
    pub total_rhat: f64,
    pub total_ess: f64,
    pub parameters: Vec<ParameterSummary>,
    pub selected_interactions: Vec<String>,
    pub neg_infinity_pairs: Vec<String>,
    /// `|mean / sd|` of each interaction in the first stage.
    pub stage_one_ratios: Vec<(String, f64)>,
    pub acceptance: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PosteriorSummary {
    pub fn total_quantile(&self, prob: f64) -> Option<f64> {
        self.total_quantiles.iter().find(|q| (q.prob - prob).abs() < 1e-12).map(|q| q.value)
    }

    /// Total quantiles in thousands, rounded to one decimal.
    pub fn row_k(&self) -> Vec<f64> {
        self.total_quantiles.iter().map(|q| crate::poisfit::round_k(q.value)).collect()
    }

    pub fn max_rhat(&self) -> f64 {
        self.parameters.iter().map(|p| p.rhat).fold(f64::NAN, f64::max)
    }
}

/// Pairs with no case in common, and the table with every cell loading
/// any of them removed. Zero counts are kept for the surviving cells.
pub fn remove_empty_overlaps(system: &ListSystem) -> (CellTable, Vec<Pair>) {
    let mut table = system.zero_fill();
    let mut removed: Vec<Pair> = Vec::new();
    loop {
        let empty: Vec<Pair> = pairs(table.k())
            .filter(|p| !removed.contains(p))
            .filter(|p| table.rows().iter().any(|c| c.subset & p.mask() == p.mask()))
            .filter(|p| table.pair_overlap(p.0, p.1) == 0)
            .collect();
        if empty.is_empty() {
            break;
        }
        for p in empty {
            table = table.filter(|c| c.subset & p.mask() != p.mask());
            removed.push(p);
        }
    }
    removed.sort();
    (table, removed)
}

struct Target<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    precision: Option<&'a DVector<f64>>,
}

impl Target<'_> {
    fn log_density(&self, theta: &DVector<f64>, eta: &DVector<f64>) -> f64 {
        let ll: f64 = self.y.iter().zip(eta.iter()).map(|(y, e)| y * e - e.exp()).sum();
        let pen = self
            .precision
            .map_or(0.0, |p| 0.5 * p.iter().zip(theta.iter()).map(|(q, t)| q * t * t).sum::<f64>());
        ll - pen
    }
}

/// Posterior draws for a fixed model. With a flat prior the table must not
/// contain a pair of the spec with zero overlap.
pub fn mcmc_sample(table: &CellTable, spec: &ModelSpec, prior: &PriorConfig, settings: &McmcSettings) -> Result<Chains> {
    prior.validate()?;
    settings.validate()?;
    let design = build_design(table, spec)?;
    let p = design.n_params();
    let rank = matrix_rank(&design.x);
    if rank < p {
        return Err(MseError::RankDeficient { rank, params: p });
    }
    if prior.is_improper() {
        if let Some(pair) = spec.interactions().find(|q| table.pair_overlap(q.0, q.1) == 0) {
            return Err(MseError::InvalidArgument(format!(
                "interaction {} has no observed overlap; remove empty overlaps first",
                pair.label(table.names())
            )));
        }
    }
    let precision = prior.precision(&design.columns);
    let (mode, cov) = proposal_start(&design.x, &design.counts, precision.as_ref())?;
    let target = Target {
        x: &design.x,
        y: &design.counts,
        precision: precision.as_ref(),
    };
    let runs: Vec<Result<(Vec<f64>, f64)>> = (0..settings.chains)
        .into_par_iter()
        .map(|c| run_chain(&target, &mode, &cov, settings, c as u64))
        .collect();
    let mut draws = Vec::with_capacity(runs.len());
    let mut acceptance = Vec::with_capacity(runs.len());
    for r in runs {
        let (d, a) = r?;
        draws.push(d);
        acceptance.push(a);
    }
    Ok(Chains {
        names: table.names().to_vec(),
        spec: spec.clone(),
        labels: design.col_labels.clone(),
        draws,
        acceptance,
        n_cells: table.len(),
        observed_total: table.total() as f64,
    })
}

/// Posterior mode and inverse Hessian there. If the mode runs off (flat
/// prior, extended MLE) a small ridge keeps the proposal finite.
fn proposal_start(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    precision: Option<&DVector<f64>>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let attempt = |prec: Option<&DVector<f64>>| -> Option<(DVector<f64>, DMatrix<f64>)> {
        let fit = maximize(x, y, prec, None, 2 * MAX_ITERATIONS).ok()?;
        let sane = fit.converged && fit.theta.iter().all(|t| t.is_finite() && t.abs() < 30.0);
        if !sane {
            return None;
        }
        Some((fit.theta, invert_spd(&fit.hessian)?))
    };
    if let Some(found) = attempt(precision) {
        return Ok(found);
    }
    log::warn!("posterior mode not finite; proposal built from a ridge-stabilized mode");
    let ridge = DVector::from_element(x.ncols(), 1e-2);
    let ridge = match precision {
        Some(p) => p + ridge,
        None => ridge,
    };
    attempt(Some(&ridge)).ok_or_else(|| MseError::Numerical("no usable proposal covariance".into()))
}

fn run_chain(
    target: &Target,
    mode: &DVector<f64>,
    cov: &DMatrix<f64>,
    settings: &McmcSettings,
    stream: u64,
) -> Result<(Vec<f64>, f64)> {
    let p = mode.len();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(stream);
    let base = cholesky_lower(cov).ok_or_else(|| MseError::Numerical("proposal covariance not positive definite".into()))?;
    let mut z = DVector::<f64>::zeros(p);
    let fill = |z: &mut DVector<f64>, rng: &mut ChaCha8Rng| {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
    };
    fill(&mut z, &mut rng);
    let mut theta = mode + &base * &z;
    let mut eta = target.x * &theta;
    let mut lp = target.log_density(&theta, &eta);
    if !lp.is_finite() {
        theta = mode.clone();
        eta = target.x * &theta;
        lp = target.log_density(&theta, &eta);
    }

    let scale0 = 2.38 / (p as f64).sqrt();
    let mut chol = &base * scale0;
    let mut xl = target.x * &chol;
    let mut log_scale = 0.0f64;
    let mut step = DVector::<f64>::zeros(p);
    let mut eta_step = DVector::<f64>::zeros(eta.len());
    let mut theta_new = theta.clone();
    let mut eta_new = eta.clone();

    let checkpoints = [settings.burn_in / 4, settings.burn_in / 2, 3 * settings.burn_in / 4];
    let mut window = Welford::new(p);
    let mut rm_t = 0usize;

    let total = settings.burn_in + settings.kept_samples * settings.thinning;
    let mut draws = Vec::with_capacity(settings.kept_samples * p);
    let mut accepted_after = 0usize;
    for it in 0..total {
        let burning = it < settings.burn_in;
        fill(&mut z, &mut rng);
        let s = log_scale.exp();
        step.gemv(s, &chol, &z, 0.0);
        eta_step.gemv(s, &xl, &z, 0.0);
        theta_new.copy_from(&theta);
        theta_new += &step;
        eta_new.copy_from(&eta);
        eta_new += &eta_step;
        let lp_new = target.log_density(&theta_new, &eta_new);
        let u: f64 = rand::Rng::random(&mut rng);
        let accept = lp_new.is_finite() && u.ln() < lp_new - lp;
        if accept {
            std::mem::swap(&mut theta, &mut theta_new);
            std::mem::swap(&mut eta, &mut eta_new);
            lp = lp_new;
        }
        if burning {
            if settings.adapt {
                rm_t += 1;
                let gain = (1.0 + rm_t as f64 / 100.0).powf(-0.6);
                log_scale += gain * (if accept { 1.0 } else { 0.0 } - TARGET_ACCEPTANCE);
                log_scale = log_scale.clamp(-10.0, 5.0);
                if it % 5 == 0 {
                    window.push(&theta);
                }
                if checkpoints.contains(&(it + 1)) {
                    if let Some(emp) = window.covariance().filter(|_| window.n >= 10 * p) {
                        if let Some(l) = cholesky_lower(&(emp * (scale0 * scale0))) {
                            chol = l;
                            xl = target.x * &chol;
                            log_scale = 0.0;
                            rm_t = 0;
                        }
                    }
                    window = Welford::new(p);
                }
            }
        } else {
            if accept {
                accepted_after += 1;
            }
            if (it - settings.burn_in + 1) % settings.thinning == 0 {
                draws.extend(theta.iter());
            }
        }
    }
    let rate = accepted_after as f64 / (settings.kept_samples * settings.thinning) as f64;
    Ok((draws, rate))
}

fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    sym.cholesky().map(|c| c.l())
}

struct Welford {
    n: usize,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
}

impl Welford {
    fn new(p: usize) -> Self {
        Self {
            n: 0,
            mean: DVector::zeros(p),
            m2: DMatrix::zeros(p, p),
        }
    }

    fn push(&mut self, x: &DVector<f64>) {
        self.n += 1;
        let delta = x - &self.mean;
        self.mean += &delta / self.n as f64;
        let delta2 = x - &self.mean;
        self.m2.ger(1.0, &delta, &delta2, 1.0);
    }

    fn covariance(&self) -> Option<DMatrix<f64>> {
        (self.n > 1).then(|| &self.m2 / (self.n - 1) as f64)
    }
}

/// Pooled summaries, diagnostics and warnings. The total is
/// `observed_total + exp(intercept)` per draw.
pub fn summarize(chains: &Chains, observed_total: f64) -> PosteriorSummary {
    let p = chains.n_params();
    let m = chains.draws.len();
    let parameters = (0..p)
        .map(|j| {
            let traces: Vec<Vec<f64>> = (0..m).map(|c| chains.trace(c, j)).collect();
            let (mean_j, sd, quantiles, rhat, ess) = describe(&traces);
            ParameterSummary {
                label: chains.labels[j].clone(),
                mean: mean_j,
                sd,
                quantiles,
                rhat,
                ess,
            }
        })
        .collect::<Vec<_>>();
    let totals: Vec<Vec<f64>> = (0..m)
        .map(|c| chains.trace(c, 0).into_iter().map(|mu| observed_total + mu.exp()).collect())
        .collect();
    let (total_mean, _, tq, total_rhat, total_ess) = describe(&totals);
    let mut warnings = Vec::new();
    for (c, a) in chains.acceptance.iter().enumerate() {
        if *a < ACCEPTANCE_RANGE.0 || *a > ACCEPTANCE_RANGE.1 {
            warnings.push(format!("chain {c} acceptance rate {a:.3} outside [{}, {}]", ACCEPTANCE_RANGE.0, ACCEPTANCE_RANGE.1));
        }
    }
    let bad: Vec<&str> = parameters
        .iter()
        .filter(|s| s.rhat > RHAT_WARNING || s.rhat.is_nan() && m > 1)
        .map(|s| s.label.as_str())
        .collect();
    if !bad.is_empty() {
        warnings.push(format!("R-hat above {RHAT_WARNING} for {}", bad.join(", ")));
    }
    PosteriorSummary {
        prior: None,
        tau: None,
        stage: 1,
        n_cells: chains.n_cells,
        observed_total,
        total_mean,
        total_quantiles: TOTAL_PROBS
            .iter()
            .zip(tq)
            .map(|(&prob, value)| Quantile { prob, value })
            .collect(),
        total_rhat,
        total_ess,
        parameters,
        selected_interactions: chains.spec.labels(&chains.names),
        neg_infinity_pairs: Vec::new(),
        stage_one_ratios: Vec::new(),
        acceptance: chains.acceptance.clone(),
        warnings,
    }
}

fn describe(traces: &[Vec<f64>]) -> (f64, f64, Vec<f64>, f64, f64) {
    let mut pooled: Vec<f64> = traces.iter().flatten().copied().collect();
    let mu = mean(&pooled);
    let sd = if pooled.len() > 1 { variance(&pooled).sqrt() } else { 0.0 };
    pooled.sort_by(f64::total_cmp);
    let q = TOTAL_PROBS.iter().map(|&pr| quantile_sorted(&pooled, pr)).collect();
    let refs: Vec<&[f64]> = traces.iter().map(|t| t.as_slice()).collect();
    (mu, sd, q, split_rhat(&refs), effective_size(&refs))
}

/// First stage of the threshold method, reusable across thresholds.
#[derive(Debug, Clone)]
pub struct StageOne {
    pub system: ListSystem,
    pub prior: PriorConfig,
    pub settings: McmcSettings,
    /// Table the first stage was fitted to (reduced when the prior is flat).
    pub table: CellTable,
    pub neg_infinity_pairs: Vec<Pair>,
    pub spec: ModelSpec,
    pub chains: Chains,
    pub summary: PosteriorSummary,
    /// `|mean / sd|` per interaction of `spec`, in spec order.
    pub ratios: Vec<(Pair, f64)>,
}

/// Fit every available interaction under the prior.
pub fn stage_one(system: &ListSystem, prior: &PriorConfig, settings: &McmcSettings) -> Result<StageOne> {
    prior.validate()?;
    let (table, neg_inf) = if prior.is_improper() {
        remove_empty_overlaps(system)
    } else {
        (system.zero_fill(), Vec::new())
    };
    let spec = ModelSpec::new(system.k(), pairs(system.k()).filter(|p| !neg_inf.contains(p)))?;
    let chains = mcmc_sample(&table, &spec, prior, settings)?;
    let observed = system.total_observed() as f64;
    let mut summary = summarize(&chains, observed);
    let ratios: Vec<(Pair, f64)> = spec
        .interactions()
        .map(|pair| {
            let label = pair.label(system.names());
            let s = summary.parameters.iter().find(|s| s.label == label).expect("interaction column");
            (pair, (s.mean / s.sd).abs())
        })
        .collect();
    summary.prior = Some(*prior);
    summary.tau = Some(0.0);
    summary.neg_infinity_pairs = neg_inf.iter().map(|p| p.label(system.names())).collect();
    summary.stage_one_ratios = ratios.iter().map(|(p, r)| (p.label(system.names()), *r)).collect();
    Ok(StageOne {
        system: system.clone(),
        prior: *prior,
        settings: *settings,
        table,
        neg_infinity_pairs: neg_inf,
        spec,
        chains,
        summary,
        ratios,
    })
}

impl StageOne {
    /// Interactions with `|mean / sd| >= tau`.
    pub fn selected(&self, tau: f64) -> ModelSpec {
        let keep = self.ratios.iter().filter(|(_, r)| !(*r < tau)).map(|(p, _)| *p);
        ModelSpec::new(self.system.k(), keep).expect("pairs come from a valid spec")
    }

    pub fn refit(&self, tau: f64) -> Result<PosteriorSummary> {
        self.refit_with_chains(tau).map(|(s, _)| s)
    }

    /// Second stage with the chains it drew. `tau = 0` returns the first
    /// stage unchanged.
    pub fn refit_with_chains(&self, tau: f64) -> Result<(PosteriorSummary, Chains)> {
        if !(tau >= 0.0) {
            return Err(MseError::InvalidArgument(format!("threshold {tau} must be >= 0")));
        }
        if tau == 0.0 {
            return Ok((self.summary.clone(), self.chains.clone()));
        }
        let spec = self.selected(tau);
        let chains = mcmc_sample(&self.table, &spec, &self.prior, &self.settings.stage_two())?;
        let mut summary = summarize(&chains, self.summary.observed_total);
        summary.prior = Some(self.prior);
        summary.tau = Some(tau);
        summary.stage = 2;
        summary.neg_infinity_pairs = self.summary.neg_infinity_pairs.clone();
        summary.stage_one_ratios = self.summary.stage_one_ratios.clone();
        Ok((summary, chains))
    }
}

/// Two-stage fit: all interactions, then only those passing `tau`.
pub fn threshold_refit(system: &ListSystem, prior: &PriorConfig, tau: f64, settings: &McmcSettings) -> Result<PosteriorSummary> {
    if !(tau >= 0.0) {
        return Err(MseError::InvalidArgument(format!("threshold {tau} must be >= 0")));
    }
    stage_one(system, prior, settings)?.refit(tau)
}

/// Main effects only on the full table, drawn with the second-stage seed so
/// that it coincides with a refit that drops every interaction.
pub fn main_effects_posterior(system: &ListSystem, prior: &PriorConfig, settings: &McmcSettings) -> Result<(PosteriorSummary, Chains)> {
    let table = system.zero_fill();
    let spec = ModelSpec::main_effects(system.k());
    let chains = mcmc_sample(&table, &spec, prior, &settings.stage_two())?;
    let mut summary = summarize(&chains, system.total_observed() as f64);
    summary.prior = Some(*prior);
    Ok((summary, chains))
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram of the pooled totals.
pub fn total_histogram(chains: &Chains, bins: usize) -> Vec<HistogramBin> {
    let totals: Vec<f64> = chains.total_traces().into_iter().flatten().filter(|t| t.is_finite()).collect();
    if totals.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for t in totals {
        let b = (((t - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: lo + i as f64 * width,
            hi: lo + (i + 1) as f64 * width,
            count,
        })
        .collect()
}
