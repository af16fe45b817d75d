//! Model selection over pairwise interactions: forward stepwise AIC with a
//! significance stopping rule, and exhaustive search over every subset of
//! interactions ranked by BIC.

use rayon::prelude::*;
use serde::Serialize;

use crate::design::{build_design, diagnose, pairs, ModelSpec, Pair};
use crate::error::{MseError, Result};
use crate::poisfit::{chi2_sf, fit_mle, lrt_pvalue, FitResult};
use crate::tables::CellTable;

/// How significance of an added interaction is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceTest {
    /// Two-sided z-test on the added coefficient; a coefficient sent to
    /// `-inf` has no finite standard error and gets p = 1.
    #[default]
    Wald,
    /// χ²₁ test on the deviance drop.
    LikelihoodRatio,
}

impl SignificanceTest {
    pub fn p_value(self, current: &FitResult, candidate: &FitResult, added: &str) -> Result<f64> {
        match self {
            SignificanceTest::LikelihoodRatio => lrt_pvalue(current, candidate),
            SignificanceTest::Wald => {
                let col = candidate
                    .col_labels
                    .iter()
                    .position(|l| l == added)
                    .ok_or_else(|| MseError::InvalidArgument(format!("no column {added}")))?;
                let coef = candidate.coefficients[col];
                let var = candidate.covariance[col][col];
                if candidate.diverged_cols.contains(&col) || !coef.is_finite() || !(var > 0.0) {
                    return Ok(1.0);
                }
                Ok(chi2_sf(coef * coef / var, 1.0))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub added: String,
    pub p_value: f64,
    pub aic: f64,
    pub total_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stepwise {
    pub spec: ModelSpec,
    pub fit: FitResult,
    /// Starts with the main-effects model (empty `added`).
    pub trace: Vec<StepRecord>,
}

/// Forward selection from the main-effects model. Each step fits every
/// single-pair addition and takes the lowest AIC (ties go to the
/// lexicographically smallest pair); it stops when no addition lowers the
/// AIC or the chosen addition's p-value (Wald by default) exceeds
/// `p_threshold`.
pub fn stepwise_aic(table: &CellTable, p_threshold: f64) -> Result<Stepwise> {
    stepwise_aic_with(table, p_threshold, SignificanceTest::default())
}

pub fn stepwise_aic_with(table: &CellTable, p_threshold: f64, test: SignificanceTest) -> Result<Stepwise> {
    if !(p_threshold > 0.0 && p_threshold <= 1.0) {
        return Err(MseError::InvalidArgument(format!(
            "p-value threshold {p_threshold} not in (0, 1]"
        )));
    }
    let k = table.k();
    let mut spec = ModelSpec::main_effects(k);
    let mut current = fit_mle(&build_design(table, &spec)?)?;
    let mut trace = vec![StepRecord {
        added: String::new(),
        p_value: f64::NAN,
        aic: current.aic,
        total_estimate: current.total_estimate,
    }];
    loop {
        let candidates: Vec<Pair> = pairs(k).filter(|p| !spec.contains(*p)).collect();
        if candidates.is_empty() {
            break;
        }
        let fits: Vec<(Pair, Result<FitResult>)> = candidates
            .par_iter()
            .map(|&p| {
                let cand = spec.with(p);
                (p, build_design(table, &cand).and_then(|d| fit_mle(&d)))
            })
            .collect();
        let mut best: Option<(Pair, FitResult)> = None;
        for (pair, fit) in fits {
            match fit {
                Ok(fit) => {
                    if best.as_ref().is_none_or(|(_, b)| fit.aic < b.aic) {
                        best = Some((pair, fit));
                    }
                }
                Err(e) => log::warn!("skipping {}: {e}", pair.label(table.names())),
            }
        }
        let Some((pair, fit)) = best else { break };
        if fit.aic >= current.aic {
            break;
        }
        let p_value = test.p_value(&current, &fit, &pair.label(table.names()))?;
        if p_value > p_threshold {
            break;
        }
        spec = spec.with(pair);
        trace.push(StepRecord {
            added: pair.label(table.names()),
            p_value,
            aic: fit.aic,
            total_estimate: fit.total_estimate,
        });
        current = fit;
    }
    Ok(Stepwise {
        spec,
        fit: current,
        trace,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchEntry {
    pub spec: ModelSpec,
    pub spec_id: String,
    pub n_params: usize,
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub total_estimate: f64,
    pub diverged: bool,
    pub existence_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    /// Sorted by BIC ascending.
    pub entries: Vec<SearchEntry>,
    pub best_aic: Option<usize>,
    pub best_bic: Option<usize>,
    pub bic_n: f64,
}

pub const DEFAULT_K_LIMIT: usize = 5;

/// Fit every subset of the pairwise interactions. `bic_n` defaults to the
/// observed total.
pub fn exhaustive_search(table: &CellTable, k_limit: usize, bic_n: Option<f64>) -> Result<SearchResult> {
    let k = table.k();
    if k > k_limit {
        return Err(MseError::TooManyLists { k, limit: k_limit });
    }
    let all: Vec<Pair> = pairs(k).collect();
    let n_models = 1usize << all.len();
    let bic_n = bic_n.unwrap_or(table.total() as f64);
    let entries: Vec<Result<Option<SearchEntry>>> = (0..n_models)
        .into_par_iter()
        .map(|mask| {
            let spec = ModelSpec::new(k, all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p))?;
            fit_entry(table, &spec, bic_n)
        })
        .collect();
    let mut out = Vec::with_capacity(n_models);
    for e in entries {
        if let Some(entry) = e? {
            out.push(entry);
        }
    }
    // Stable sort keeps enumeration order among exact ties.
    out.sort_by(|a, b| a.bic.total_cmp(&b.bic));
    let best_by = |key: fn(&SearchEntry) -> f64| {
        out.iter()
            .enumerate()
            .filter(|(_, e)| e.existence_ok)
            .min_by(|a, b| key(a.1).total_cmp(&key(b.1)))
            .map(|(i, _)| i)
    };
    let best_aic = best_by(|e| e.aic);
    let best_bic = best_by(|e| e.bic);
    Ok(SearchResult {
        entries: out,
        best_aic,
        best_bic,
        bic_n,
    })
}

fn fit_entry(table: &CellTable, spec: &ModelSpec, bic_n: f64) -> Result<Option<SearchEntry>> {
    let design = build_design(table, spec)?;
    let report = diagnose(&design);
    let fit = match fit_mle(&design) {
        Ok(f) => f.with_bic_n(bic_n),
        Err(e) => {
            log::warn!("model {} not fitted: {e}", spec.id(table.names()));
            return Ok(None);
        }
    };
    Ok(Some(SearchEntry {
        spec_id: spec.id(table.names()),
        spec: spec.clone(),
        n_params: fit.n_params,
        deviance: fit.deviance,
        aic: fit.aic,
        bic: fit.bic,
        total_estimate: fit.total_estimate,
        diverged: !fit.diverged.is_empty(),
        existence_ok: report.existence_ok,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterRow {
    pub neg_bic: f64,
    pub total_estimate: f64,
    pub spec_id: String,
    pub diverged: bool,
    pub existence_ok: bool,
    pub outlier: bool,
}

/// Totals above `Q3 + FENCE_IQR · IQR` are outliers for plotting.
pub const FENCE_IQR: f64 = 3.0;

/// Plot rows `(−BIC, total)`; with `omit_outliers`, rows beyond the fence
/// are dropped.
pub fn export_scatter(result: &SearchResult, omit_outliers: bool) -> Vec<ScatterRow> {
    let fence = outlier_fence(result.entries.iter().map(|e| e.total_estimate));
    result
        .entries
        .iter()
        .map(|e| ScatterRow {
            neg_bic: -e.bic,
            total_estimate: e.total_estimate,
            spec_id: e.spec_id.clone(),
            diverged: e.diverged,
            existence_ok: e.existence_ok,
            outlier: e.total_estimate > fence,
        })
        .filter(|r| !(omit_outliers && r.outlier))
        .collect()
}

pub fn outlier_fence(totals: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = totals.filter(|t| t.is_finite()).collect();
    if v.is_empty() {
        return f64::INFINITY;
    }
    v.sort_by(f64::total_cmp);
    let q1 = crate::stats::quantile_sorted(&v, 0.25);
    let q3 = crate::stats::quantile_sorted(&v, 0.75);
    q3 + FENCE_IQR * (q3 - q1)
}

pub fn scatter_csv(rows: &[ScatterRow]) -> String {
    let mut out = String::from("neg_bic,total_estimate,spec_id,diverged,existence_ok,outlier\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.neg_bic, r.total_estimate, r.spec_id, r.diverged, r.existence_ok, r.outlier
        ));
    }
    out
}
