//! Property checks shared by the proptest suite and the acceptance report.
//! Each returns `Err(description)` on the first violation.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mse_core::bayes::{main_effects_posterior, threshold_refit, McmcSettings, PriorConfig};
use mse_core::design::{build_design, pairs, ModelSpec};
use mse_core::poisfit::{chi2_quantile, fit_model, loglik_at, profile_ci, score_at, ProfileLikelihood};
use mse_core::select::{exhaustive_search, stepwise_aic};
use mse_core::tables::ListSystem;

pub type Check = Result<(), String>;

pub fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// `counts[s - 1]` is the count on subset `s`.
pub fn system(k: usize, counts: &[u64]) -> ListSystem {
    assert_eq!(counts.len(), (1 << k) - 1);
    ListSystem::new(names(k), counts.iter().enumerate().map(|(i, &c)| ((i + 1) as u32, c))).unwrap()
}

/// Spec from a bitmask over `pairs(k)`.
pub fn spec_from_mask(k: usize, mask: u64) -> ModelSpec {
    ModelSpec::new(k, pairs(k).enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Interaction labels as unordered name pairs.
pub fn pair_set(labels: &[String]) -> BTreeSet<(String, String)> {
    labels
        .iter()
        .map(|l| {
            let (a, b) = l.split_once(':').unwrap();
            if a < b {
                (a.to_string(), b.to_string())
            } else {
                (b.to_string(), a.to_string())
            }
        })
        .collect()
}

/// Two lists, main effects: dark figure `ab/c`, total `(a+c)(b+c)/c`.
pub fn lincoln_petersen(a: u64, b: u64, c: u64) -> Check {
    let sys = ListSystem::new(["x", "y"], [(1, a), (2, b), (3, c)]).unwrap();
    let fit = fit_model(&sys.zero_fill(), &ModelSpec::main_effects(2)).map_err(|e| e.to_string())?;
    let (a, b, c) = (a as f64, b as f64, c as f64);
    let expected = (a + c) * (b + c) / c;
    if rel(fit.total_estimate, expected) > 1e-8 {
        return Err(format!("two-list ({a},{b},{c}): total {} vs {expected}", fit.total_estimate));
    }
    Ok(())
}

/// Three lists, all pairs: dark figure `n111 n100 n010 n001 / (n110 n101 n011)`.
pub fn saturated_three(counts: &[u64; 7]) -> Check {
    let sys = system(3, counts);
    let fit = fit_model(&sys.zero_fill(), &ModelSpec::all_pairs(3)).map_err(|e| e.to_string())?;
    let n = |s: usize| counts[s - 1] as f64;
    let expected = n(0b111) * n(0b001) * n(0b010) * n(0b100) / (n(0b011) * n(0b101) * n(0b110));
    if rel(fit.dark_figure, expected) > 1e-8 {
        return Err(format!("{counts:?}: dark figure {} vs {expected}", fit.dark_figure));
    }
    Ok(())
}

/// `Xᵀ(y − λ̂)` vanishes at the MLE.
pub fn score_vanishes(sys: &ListSystem, spec: &ModelSpec) -> Check {
    let table = sys.zero_fill();
    let fit = fit_model(&table, spec).map_err(|e| e.to_string())?;
    if !fit.diverged.is_empty() {
        return Ok(());
    }
    let design = build_design(&table, spec).map_err(|e| e.to_string())?;
    let worst = score_at(&design, &fit.coefficients).iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if worst >= 1e-6 {
        return Err(format!("score residual {worst:e} for {}", fit.spec_id));
    }
    Ok(())
}

/// Analytic score against fourth-order central differences of the
/// log-likelihood, at the MLE and at `offset` away from it.
pub fn gradient_matches(sys: &ListSystem, spec: &ModelSpec, offset: &[f64]) -> Check {
    let table = sys.zero_fill();
    let fit = fit_model(&table, spec).map_err(|e| e.to_string())?;
    if !fit.diverged.is_empty() {
        return Ok(());
    }
    let design = build_design(&table, spec).map_err(|e| e.to_string())?;
    let p = design.n_params();
    let away: Vec<f64> = (0..p).map(|j| fit.coefficients[j] + offset[j % offset.len()]).collect();
    for theta in [fit.coefficients.clone(), away] {
        let g = score_at(&design, &theta);
        for j in 0..p {
            let h = 1e-3;
            let at = |step: f64| {
                let mut t = theta.clone();
                t[j] += step * h;
                loglik_at(&design, &t)
            };
            let fd = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
            let err = (fd - g[j]).abs() / g[j].abs().max(1.0);
            if err >= 1e-6 {
                return Err(format!("{} column {j}: analytic {} vs fd {fd} (rel {err:e})", fit.spec_id, g[j]));
            }
        }
    }
    Ok(())
}

fn profile_max(prof: &mut ProfileLikelihood, guess: f64) -> f64 {
    let mut f = |d: f64| prof.loglik(d).unwrap();
    let (mut lo, mut hi) = (0.0, guess * 4.0 + 50.0);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

/// `2(ℓmax − ℓ(d)) = χ²₁(level)` at every finite, non-clamped endpoint.
pub fn profile_endpoints(sys: &ListSystem, spec: &ModelSpec) -> Check {
    let table = sys.zero_fill();
    let fit = fit_model(&table, spec).map_err(|e| e.to_string())?;
    if !fit.diverged.is_empty() || !fit.dark_figure.is_finite() {
        return Ok(());
    }
    let levels = [0.8, 0.95];
    let ci = profile_ci(&table, spec, &levels).map_err(|e| e.to_string())?;
    let mut prof = ProfileLikelihood::new(&table, spec).map_err(|e| e.to_string())?;
    let observed = prof.observed();
    let l_max = profile_max(&mut prof, fit.dark_figure);
    for iv in &ci {
        if !(iv.lower <= iv.point && iv.point <= iv.upper) {
            return Err(format!("{}: interval does not bracket the point", fit.spec_id));
        }
        let cut = chi2_quantile(iv.level, 1.0);
        let mut ends = vec![];
        if iv.lower - observed > 1e-9 && iv.lower < iv.point {
            ends.push(iv.lower);
        }
        if iv.upper.is_finite() && iv.upper > iv.point {
            ends.push(iv.upper);
        }
        for end in ends {
            let dev = 2.0 * (l_max - prof.loglik(end - observed).unwrap());
            if (dev - cut).abs() >= 1e-3 {
                return Err(format!("{} level {}: deviance {dev} at {end}, cut {cut}", fit.spec_id, iv.level));
            }
        }
    }
    if ci[0].lower < ci[1].lower - 1e-9 || ci[0].upper > ci[1].upper + 1e-9 {
        return Err(format!("{}: 80% interval not inside 95%", fit.spec_id));
    }
    Ok(())
}

/// Exhaustive search agrees with fitting each of the eight 3-list models.
pub fn exhaustive_is_brute_force(sys: &ListSystem) -> Check {
    let table = sys.zero_fill();
    let result = exhaustive_search(&table, 5, None).map_err(|e| e.to_string())?;
    if result.entries.len() != 8 {
        return Err(format!("{} models instead of 8", result.entries.len()));
    }
    let mut best: Option<(f64, String)> = None;
    for mask in 0..8 {
        let spec = spec_from_mask(3, mask);
        let fit = fit_model(&table, &spec).map_err(|e| e.to_string())?;
        let entry = result
            .entries
            .iter()
            .find(|e| e.spec == spec)
            .ok_or_else(|| format!("model {} missing", fit.spec_id))?;
        if rel(entry.total_estimate, fit.total_estimate) > 1e-8 || rel(entry.bic, fit.bic) > 1e-10 || rel(entry.aic, fit.aic) > 1e-10 {
            return Err(format!("model {}: search and direct fit disagree", fit.spec_id));
        }
        if best.as_ref().is_none_or(|(b, _)| fit.bic < *b) {
            best = Some((fit.bic, fit.spec_id.clone()));
        }
    }
    let chosen = &result.entries[result.best_bic.unwrap()].spec_id;
    if *chosen != best.unwrap().1 {
        return Err(format!("best BIC {chosen} differs from brute force"));
    }
    Ok(())
}

/// Relabelling the lists leaves fits, intervals and selections unchanged up
/// to the relabelling.
pub fn permutation_equivariant(sys: &ListSystem, spec: &ModelSpec, order: &[usize]) -> Check {
    let perm = sys.permute(order).map_err(|e| e.to_string())?;
    let spec_p = spec.permuted(order);
    let (t, tp) = (sys.zero_fill(), perm.zero_fill());
    let fit = fit_model(&t, spec).map_err(|e| e.to_string())?;
    let fit_p = fit_model(&tp, &spec_p).map_err(|e| e.to_string())?;
    if rel(fit.total_estimate, fit_p.total_estimate) > 1e-8 || rel(fit.deviance, fit_p.deviance) > 1e-6 {
        return Err(format!("fit {} changed under relabelling", fit.spec_id));
    }
    if fit.diverged.is_empty() && fit.dark_figure.is_finite() {
        let ci = profile_ci(&t, spec, &[0.95]).map_err(|e| e.to_string())?;
        let ci_p = profile_ci(&tp, &spec_p, &[0.95]).map_err(|e| e.to_string())?;
        if rel(ci[0].lower, ci_p[0].lower) > 1e-6 || rel(ci[0].upper, ci_p[0].upper) > 1e-6 {
            return Err("profile interval changed under relabelling".into());
        }
    }
    let step = stepwise_aic(&t, 0.05).map_err(|e| e.to_string())?;
    let step_p = stepwise_aic(&tp, 0.05).map_err(|e| e.to_string())?;
    if pair_set(&step.spec.labels(sys.names())) != pair_set(&step_p.spec.labels(perm.names())) {
        return Err("stepwise selection changed under relabelling".into());
    }
    let s = exhaustive_search(&t, 5, None).map_err(|e| e.to_string())?;
    let sp = exhaustive_search(&tp, 5, None).map_err(|e| e.to_string())?;
    let best = |r: &mse_core::select::SearchResult, names: &[String]| pair_set(&r.entries[r.best_bic.unwrap()].spec.labels(names));
    if best(&s, sys.names()) != best(&sp, perm.names()) {
        return Err("best-BIC model changed under relabelling".into());
    }
    Ok(())
}

pub fn stepwise_trace_decreasing(sys: &ListSystem, p: f64) -> Check {
    let step = stepwise_aic(&sys.zero_fill(), p).map_err(|e| e.to_string())?;
    for w in step.trace.windows(2) {
        if !(w[1].aic < w[0].aic) {
            return Err(format!("AIC {} then {} after adding {}", w[0].aic, w[1].aic, w[1].added));
        }
    }
    Ok(())
}

/// `tau = ∞` drops every interaction: the refit is the main-effects posterior
/// drawn from the same seed.
pub fn tau_infinity_is_main_effects(sys: &ListSystem, prior: &PriorConfig, settings: &McmcSettings) -> Check {
    let refit = threshold_refit(sys, prior, f64::INFINITY, settings).map_err(|e| e.to_string())?;
    let (main, _) = main_effects_posterior(sys, prior, settings).map_err(|e| e.to_string())?;
    if !refit.selected_interactions.is_empty() {
        return Err(format!("kept {:?}", refit.selected_interactions));
    }
    let a: Vec<f64> = refit.total_quantiles.iter().map(|q| q.value).collect();
    let b: Vec<f64> = main.total_quantiles.iter().map(|q| q.value).collect();
    if a != b {
        return Err(format!("quantiles {a:?} vs main effects {b:?}"));
    }
    Ok(())
}
