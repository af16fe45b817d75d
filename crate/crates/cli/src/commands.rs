use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use mse_core::bayes::{self, Chains, McmcSettings, PosteriorSummary, PriorConfig};
use mse_core::design::{check_existence, pairs, DiagnosticReport, ModelSpec};
use mse_core::poisfit::{fit_model, profile_ci, round_k, FitResult, ProfileInterval};
use mse_core::select::{self, SearchEntry, SignificanceTest};
use mse_core::tables::{builtin, ListSystem, BUILTIN_NAMES};
use mse_core::MseError;

use crate::{svg, Context, Format, Global};

type Result<T> = std::result::Result<T, MseError>;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Pairwise interactions, e.g. `LA:NG,PF:GP`. Default: main effects only.
    #[arg(long)]
    pub interactions: Option<String>,
    /// Confidence levels for the profile intervals.
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.8])]
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Wald,
    Lrt,
}

#[derive(Debug, Args)]
pub struct StepwiseArgs {
    /// Significance threshold for adding an interaction.
    #[arg(long = "p", default_value_t = 0.05)]
    pub p_threshold: f64,
    #[arg(long, value_enum, default_value_t = TestKind::Wald)]
    pub test: TestKind,
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.8])]
    pub levels: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Refuse systems with more lists than this.
    #[arg(long, default_value_t = select::DEFAULT_K_LIMIT)]
    pub k_limit: usize,
    /// Sample size in the BIC penalty. Default: observed total.
    #[arg(long)]
    pub bic_n: Option<f64>,
    /// Models shown in table output.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Keep outlying totals in the scatter data.
    #[arg(long)]
    pub include_outliers: bool,
    /// Write the (-BIC, total) scatter data as CSV.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// Flat prior on every parameter.
    #[arg(long, conflicts_with_all = ["variance", "lambda"])]
    pub uniform: bool,
    /// Prior variance of the interactions.
    #[arg(long, conflicts_with = "lambda")]
    pub variance: Option<f64>,
    /// Prior precision of the interactions (0 = flat).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Thresholds on |mean/sd|; several share one first stage.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0])]
    pub tau: Vec<f64>,
    /// Also report the main-effects-only posterior.
    #[arg(long)]
    pub main_effects: bool,
    #[arg(long, default_value_t = 100_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 100)]
    pub thin: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long)]
    pub no_adapt: bool,
    /// Raw draws of the last threshold as CSV.
    #[arg(long)]
    pub chains_csv: Option<PathBuf>,
    /// Histogram of the total for the last threshold as CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, conflicts_with = "all_models")]
    pub interactions: Option<String>,
    /// Check every subset of pairwise interactions.
    #[arg(long)]
    pub all_models: bool,
    #[arg(long, default_value_t = select::DEFAULT_K_LIMIT)]
    pub k_limit: usize,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// List the built-in datasets.
    #[arg(long)]
    pub list: bool,
}

fn spec_from(ctx: &Context, interactions: &Option<String>) -> Result<ModelSpec> {
    match interactions {
        Some(text) => ModelSpec::parse(text, ctx.system.names()),
        None => Ok(ModelSpec::main_effects(ctx.system.k())),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn header(ctx: &Context) -> String {
    format!(
        "dataset {} ({} lists: {}; {} observed)\n",
        ctx.dataset,
        ctx.system.k(),
        ctx.system.names().join(", "),
        ctx.system.total_observed()
    )
}

fn fmt_k(v: f64) -> String {
    if v.is_finite() {
        format!("{:.1}", round_k(v))
    } else {
        "inf".into()
    }
}

/// 2.5%, 10%, point, 90%, 97.5% in thousands when the 95% and 80% levels
/// are both present.
fn paper_row(intervals: &[ProfileInterval]) -> Option<String> {
    let at = |l: f64| intervals.iter().find(|i| (i.level - l).abs() < 1e-9);
    let (a, b) = (at(0.95)?, at(0.8)?);
    Some(format!(
        "{} {} {} {} {}",
        fmt_k(a.lower),
        fmt_k(b.lower),
        fmt_k(a.point),
        fmt_k(b.upper),
        fmt_k(a.upper)
    ))
}

fn interval_lines(out: &mut String, intervals: &[ProfileInterval]) {
    for i in intervals {
        let _ = writeln!(
            out,
            "{:>4.0}% interval  {}K - {}K{}",
            i.level * 100.0,
            fmt_k(i.lower),
            fmt_k(i.upper),
            if i.upper_unbounded { "  (upper bound unbounded)" } else { "" }
        );
    }
    if let Some(row) = paper_row(intervals) {
        let _ = writeln!(out, "2.5/10/est/90/97.5  {row}");
    }
}

fn interval_csv(intervals: &[ProfileInterval]) -> String {
    let mut out = String::from("level,lower,point,upper,upper_unbounded\n");
    for i in intervals {
        let _ = writeln!(out, "{},{},{},{},{}", i.level, i.lower, i.point, i.upper, i.upper_unbounded);
    }
    out
}

fn fit_warnings(ctx: &mut Context, fit: &FitResult, intervals: &[ProfileInterval]) {
    if !fit.converged {
        ctx.warn(format!("fit did not converge in {} iterations", fit.iterations));
    }
    if !fit.diverged.is_empty() {
        ctx.warn(format!("coefficients at -inf: {}", fit.diverged.join(", ")));
    }
    for i in intervals.iter().filter(|i| i.upper_unbounded) {
        ctx.warn(format!("{:.0}% profile interval has no finite upper bound", i.level * 100.0));
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    dataset: &'a str,
    lists: &'a [String],
    fit: &'a FitResult,
    intervals: &'a [ProfileInterval],
    diagnostics: &'a DiagnosticReport,
    warnings: &'a [String],
}

fn fit_text(ctx: &Context, fit: &FitResult, intervals: &[ProfileInterval], diag: &DiagnosticReport) -> String {
    let mut out = header(ctx);
    let model = if fit.spec.is_empty() { "main effects".to_string() } else { fit.spec_id.clone() };
    let _ = writeln!(out, "model           {model}");
    let _ = writeln!(out, "estimate        {}K (dark figure {:.1})", fmt_k(fit.total_estimate), fit.dark_figure);
    interval_lines(&mut out, intervals);
    let _ = writeln!(out, "deviance        {:.3} on {} df", fit.deviance, fit.n_cells - fit.n_params);
    let _ = writeln!(out, "AIC / BIC       {:.3} / {:.3} (n = {})", fit.aic, fit.bic, fit.bic_n);
    let _ = writeln!(
        out,
        "checks          rank {}/{}, existence {}",
        diag.rank,
        diag.n_params,
        if diag.existence_ok { "ok" } else { "fails" }
    );
    if !fit.diverged.is_empty() {
        let _ = writeln!(out, "at -inf         {}", fit.diverged.join(", "));
    }
    out
}

pub fn fit(ctx: &mut Context, args: &FitArgs) -> Result<()> {
    let table = ctx.system.zero_fill();
    let spec = spec_from(ctx, &args.interactions)?;
    let diag = check_existence(&table, &spec)?;
    let fit = fit_model(&table, &spec)?;
    let intervals = profile_ci(&table, &spec, &args.levels)?;
    fit_warnings(ctx, &fit, &intervals);
    let text = match ctx.global.format {
        Format::Json => json(&FitReport {
            dataset: &ctx.dataset,
            lists: ctx.system.names(),
            fit: &fit,
            intervals: &intervals,
            diagnostics: &diag,
            warnings: &ctx.warnings,
        })?,
        Format::Csv => interval_csv(&intervals),
        Format::Table => fit_text(ctx, &fit, &intervals, &diag),
    };
    ctx.emit(&text)
}

#[derive(Serialize)]
struct StepwiseReport<'a> {
    dataset: &'a str,
    lists: &'a [String],
    p_threshold: f64,
    test: SignificanceTest,
    trace: &'a [select::StepRecord],
    fit: &'a FitResult,
    intervals: &'a [ProfileInterval],
    warnings: &'a [String],
}

pub fn stepwise(ctx: &mut Context, args: &StepwiseArgs) -> Result<()> {
    let table = ctx.system.zero_fill();
    let test = match args.test {
        TestKind::Wald => SignificanceTest::Wald,
        TestKind::Lrt => SignificanceTest::LikelihoodRatio,
    };
    let sw = select::stepwise_aic_with(&table, args.p_threshold, test)?;
    let intervals = profile_ci(&table, &sw.spec, &args.levels)?;
    fit_warnings(ctx, &sw.fit, &intervals);
    let text = match ctx.global.format {
        Format::Json => json(&StepwiseReport {
            dataset: &ctx.dataset,
            lists: ctx.system.names(),
            p_threshold: args.p_threshold,
            test,
            trace: &sw.trace,
            fit: &sw.fit,
            intervals: &intervals,
            warnings: &ctx.warnings,
        })?,
        Format::Csv => {
            let mut out = String::from("step,added,p_value,aic,total_estimate\n");
            for (i, s) in sw.trace.iter().enumerate() {
                let _ = writeln!(out, "{i},{},{},{},{}", s.added, s.p_value, s.aic, s.total_estimate);
            }
            out
        }
        Format::Table => {
            let mut out = header(ctx);
            let _ = writeln!(out, "{:<6}{:<16}{:>12}{:>14}{:>10}", "step", "added", "p-value", "AIC", "total");
            for (i, s) in sw.trace.iter().enumerate() {
                let added = if s.added.is_empty() { "(main)" } else { &s.added };
                let p = if s.p_value.is_nan() { "-".to_string() } else { format!("{:.2e}", s.p_value) };
                let _ = writeln!(out, "{i:<6}{added:<16}{p:>12}{:>14.3}{:>9}K", s.aic, fmt_k(s.total_estimate));
            }
            let diag = check_existence(&table, &sw.spec)?;
            out.push('\n');
            out.push_str(&fit_text(ctx, &sw.fit, &intervals, &diag)[header(ctx).len()..]);
            out
        }
    };
    ctx.emit(&text)
}

#[derive(Serialize)]
struct SearchReport<'a> {
    dataset: &'a str,
    lists: &'a [String],
    bic_n: f64,
    n_models: usize,
    outlier_fence: f64,
    best_aic: Option<&'a SearchEntry>,
    best_bic: Option<&'a SearchEntry>,
    entries: &'a [SearchEntry],
}

pub fn search(ctx: &mut Context, args: &SearchArgs) -> Result<()> {
    let table = ctx.system.zero_fill();
    let res = select::exhaustive_search(&table, args.k_limit, args.bic_n)?;
    let rows = select::export_scatter(&res, !args.include_outliers);
    let fence = select::outlier_fence(res.entries.iter().map(|e| e.total_estimate));
    let failing = res.entries.iter().filter(|e| !e.existence_ok).count();
    if failing > 0 {
        ctx.warn(format!("{failing} models fail the existence check"));
    }
    if let Some(path) = &args.scatter {
        std::fs::write(path, select::scatter_csv(&rows))?;
    }
    if let Some(path) = &args.svg {
        let points: Vec<(f64, f64, bool)> = rows.iter().map(|r| (r.neg_bic, r.total_estimate, r.diverged)).collect();
        let title = format!("{}: estimate against BIC", ctx.dataset);
        std::fs::write(path, svg::scatter(&points, "-BIC", "estimated total", &title))?;
    }
    let text = match ctx.global.format {
        Format::Json => json(&SearchReport {
            dataset: &ctx.dataset,
            lists: ctx.system.names(),
            bic_n: res.bic_n,
            n_models: res.entries.len(),
            outlier_fence: fence,
            best_aic: res.best_aic.map(|i| &res.entries[i]),
            best_bic: res.best_bic.map(|i| &res.entries[i]),
            entries: &res.entries,
        })?,
        Format::Csv => select::scatter_csv(&rows),
        Format::Table => {
            let mut out = header(ctx);
            let _ = writeln!(out, "{} models, BIC n = {}, outlier fence {}K", res.entries.len(), res.bic_n, fmt_k(fence));
            let _ = writeln!(out, "{:<6}{:>12}{:>12}{:>10}  model", "rank", "BIC", "AIC", "total");
            for (i, e) in res.entries.iter().take(args.top).enumerate() {
                let flag = if e.diverged { " [-inf]" } else { "" };
                let _ = writeln!(
                    out,
                    "{:<6}{:>12.3}{:>12.3}{:>9}K  {}{flag}",
                    i + 1,
                    e.bic,
                    e.aic,
                    fmt_k(e.total_estimate),
                    e.spec_id
                );
            }
            if let Some(i) = res.best_aic {
                let e = &res.entries[i];
                let _ = writeln!(out, "best AIC: {} ({}K)", e.spec_id, fmt_k(e.total_estimate));
            }
            out
        }
    };
    ctx.emit(&text)
}

#[derive(Serialize)]
struct BayesRow<'a> {
    label: String,
    summary: &'a PosteriorSummary,
}

fn prior_from(args: &BayesArgs) -> Result<PriorConfig> {
    if args.uniform {
        return Ok(PriorConfig::uniform());
    }
    match (args.variance, args.lambda) {
        (Some(v), _) => PriorConfig::with_variance(v),
        (None, Some(l)) => PriorConfig::with_lambda(l),
        (None, None) => PriorConfig::with_variance(1.0),
    }
}

fn bayes_table(ctx: &Context, rows: &[BayesRow]) -> String {
    let mut out = header(ctx);
    let _ = writeln!(
        out,
        "{:<22}{:>10}{:>8}{:>8}{:>8}{:>8}{:>8}",
        "Prior", "Threshold", "2.5%", "10%", "50%", "90%", "97.5%"
    );
    for r in rows {
        let (prior, tau) = match (&r.summary.tau, &r.summary.prior) {
            (Some(t), Some(p)) => (p.label(), format!("{t}")),
            _ => (r.label.clone(), String::new()),
        };
        let q: Vec<String> = r.summary.total_quantiles.iter().map(|q| fmt_k(q.value)).collect();
        let _ = writeln!(
            out,
            "{prior:<22}{tau:>10}{:>8}{:>8}{:>8}{:>8}{:>8}",
            q[0], q[1], q[2], q[3], q[4]
        );
    }
    for r in rows.iter().filter(|r| r.summary.tau.is_some()) {
        let s = r.summary;
        let sel = if s.selected_interactions.is_empty() { "none".into() } else { s.selected_interactions.join(", ") };
        let _ = writeln!(out, "\n{} (stage {}): interactions {sel}", r.label, s.stage);
        if !s.neg_infinity_pairs.is_empty() {
            let _ = writeln!(out, "  at -inf: {}", s.neg_infinity_pairs.join(", "));
        }
        let acc: Vec<String> = s.acceptance.iter().map(|a| format!("{a:.2}")).collect();
        let _ = writeln!(
            out,
            "  max R-hat {:.3}, total ESS {:.0}, acceptance {}",
            s.max_rhat(),
            s.total_ess,
            acc.join(" ")
        );
    }
    out
}

pub fn bayes(ctx: &mut Context, args: &BayesArgs) -> Result<()> {
    let prior = prior_from(args)?;
    let settings = McmcSettings {
        burn_in: args.burn_in,
        kept_samples: args.samples,
        thinning: args.thin,
        chains: args.chains,
        seed: ctx.global.seed,
        adapt: !args.no_adapt,
    };
    if args.tau.iter().any(|t| !(*t >= 0.0)) {
        return Err(MseError::InvalidArgument("thresholds must be >= 0".into()));
    }
    let mut summaries: Vec<(String, PosteriorSummary)> = Vec::new();
    let mut last_chains: Option<Chains> = None;
    if args.main_effects {
        let (s, c) = bayes::main_effects_posterior(&ctx.system, &prior, &settings)?;
        summaries.push(("Main effects only".into(), s));
        last_chains = Some(c);
    }
    if !args.tau.is_empty() {
        let one = bayes::stage_one(&ctx.system, &prior, &settings)?;
        for &tau in &args.tau {
            let (s, c) = one.refit_with_chains(tau)?;
            summaries.push((format!("{} threshold {tau}", prior.label()), s));
            last_chains = Some(c);
        }
    }
    let warnings: Vec<String> = summaries
        .iter()
        .flat_map(|(l, s)| s.warnings.iter().map(move |w| format!("{l}: {w}")))
        .collect();
    for w in warnings {
        ctx.warn(w);
    }
    if let Some(chains) = &last_chains {
        if let Some(path) = &args.chains_csv {
            std::fs::write(path, chains.to_csv())?;
        }
        let hist = bayes::total_histogram(chains, args.bins);
        if let Some(path) = &args.histogram {
            let mut out = String::from("lo,hi,count\n");
            for b in &hist {
                let _ = writeln!(out, "{},{},{}", b.lo, b.hi, b.count);
            }
            std::fs::write(path, out)?;
        }
        if let Some(path) = &args.svg {
            let title = format!("{}: posterior of the total", ctx.dataset);
            std::fs::write(path, svg::histogram(&hist, "total population", &title))?;
        }
    }
    let rows: Vec<BayesRow> = summaries
        .iter()
        .map(|(label, summary)| BayesRow {
            label: label.clone(),
            summary,
        })
        .collect();
    let text = match ctx.global.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut out = String::from("label,stage,q2.5,q10,q50,q90,q97.5,selected\n");
            for r in &rows {
                let q: Vec<String> = r.summary.total_quantiles.iter().map(|q| q.value.to_string()).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.label,
                    r.summary.stage,
                    q.join(","),
                    r.summary.selected_interactions.join(" ")
                );
            }
            out
        }
        Format::Table => bayes_table(ctx, &rows),
    };
    ctx.emit(&text)
}

#[derive(Serialize)]
struct ModelCheck {
    model: String,
    report: DiagnosticReport,
}

#[derive(Serialize)]
struct CheckReport {
    dataset: String,
    n_models: usize,
    identifiable: usize,
    existence_ok: usize,
    extended_mle: usize,
    failures: Vec<ModelCheck>,
    verdict: String,
}

pub fn check(ctx: &mut Context, args: &CheckArgs) -> Result<()> {
    let table = ctx.system.zero_fill();
    let k = ctx.system.k();
    let specs: Vec<ModelSpec> = if args.all_models {
        if k > args.k_limit {
            return Err(MseError::TooManyLists { k, limit: args.k_limit });
        }
        let all: Vec<_> = pairs(k).collect();
        (0..1usize << all.len())
            .map(|mask| ModelSpec::new(k, all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p)))
            .collect::<Result<_>>()?
    } else {
        vec![spec_from(ctx, &args.interactions)?]
    };
    let reports: Vec<Result<DiagnosticReport>> = specs.par_iter().map(|s| check_existence(&table, s)).collect();
    let mut checks = Vec::with_capacity(specs.len());
    for (spec, r) in specs.iter().zip(reports) {
        checks.push(ModelCheck {
            model: spec.id(ctx.system.names()),
            report: r?,
        });
    }
    let identifiable = checks.iter().filter(|c| c.report.full_rank).count();
    let existence_ok = checks.iter().filter(|c| c.report.existence_ok).count();
    let extended = checks.iter().filter(|c| c.report.extended_mle).count();
    let n = checks.len();
    let verdict = if identifiable == n && existence_ok == n {
        if n == 1 {
            "model identifiable; extended MLE exists".to_string()
        } else {
            "all models identifiable; extended MLE exists".to_string()
        }
    } else {
        format!(
            "{} of {n} models not identifiable; {} of {n} fail the existence check",
            n - identifiable,
            n - existence_ok
        )
    };
    if identifiable < n || existence_ok < n {
        ctx.warn(verdict.clone());
    }
    let failures: Vec<ModelCheck> = checks
        .into_iter()
        .filter(|c| !c.report.full_rank || !c.report.existence_ok || (n == 1))
        .collect();
    let report = CheckReport {
        dataset: ctx.dataset.clone(),
        n_models: n,
        identifiable,
        existence_ok,
        extended_mle: extended,
        failures,
        verdict,
    };
    let text = match ctx.global.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut out = String::from("model,rank,n_params,full_rank,existence_ok,extended_mle\n");
            for c in &report.failures {
                let r = &c.report;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.model, r.rank, r.n_params, r.full_rank, r.existence_ok, r.extended_mle
                );
            }
            out
        }
        Format::Table => {
            let mut out = header(ctx);
            let _ = writeln!(
                out,
                "{n} model(s): {identifiable} identifiable, {existence_ok} with finite estimate, {extended} on the boundary (extended MLE)"
            );
            for c in report.failures.iter().filter(|c| !c.report.full_rank || !c.report.existence_ok) {
                let r = &c.report;
                let _ = write!(out, "  {}: rank {}/{}", c.model, r.rank, r.n_params);
                if !r.deficient_columns.is_empty() {
                    let _ = write!(out, " (aliased: {})", r.deficient_columns.join(", "));
                }
                let _ = writeln!(out, ", existence {:?}", r.existence);
            }
            let _ = writeln!(out, "{}", report.verdict);
            out
        }
    };
    ctx.emit(&text)
}

pub fn data(ctx: &mut Context, _args: &DataArgs) -> Result<()> {
    let text = match ctx.global.format {
        Format::Json => json(&ctx.system.to_json())?,
        Format::Csv => {
            let mut buf = Vec::new();
            ctx.system.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| MseError::InvalidArgument(e.to_string()))?
        }
        Format::Table => {
            let mut out = header(ctx);
            for (subset, count) in ctx.system.cells() {
                let _ = writeln!(out, "{:>8}  {}", count, ctx.system.subset_names(subset).join(" "));
            }
            out
        }
    };
    ctx.emit(&text)
}

#[derive(Serialize)]
struct BuiltinInfo {
    name: &'static str,
    lists: Vec<String>,
    observed: u64,
    nonzero_cells: usize,
}

pub fn list_builtins(global: &Global) -> Result<()> {
    let infos: Vec<BuiltinInfo> = BUILTIN_NAMES
        .iter()
        .map(|&name| {
            let s: ListSystem = builtin(name)?;
            Ok(BuiltinInfo {
                name,
                lists: s.names().to_vec(),
                observed: s.total_observed(),
                nonzero_cells: s.nonzero_cells(),
            })
        })
        .collect::<Result<_>>()?;
    let text = match global.format {
        Format::Json => json(&infos)?,
        Format::Csv => {
            let mut out = String::from("name,lists,observed,nonzero_cells\n");
            for i in &infos {
                let _ = writeln!(out, "{},{},{},{}", i.name, i.lists.join(" "), i.observed, i.nonzero_cells);
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            for i in &infos {
                let _ = writeln!(out, "{:<8}{:>6} cases  {}", i.name, i.observed, i.lists.join(", "));
            }
            out
        }
    };
    crate::emit(global, &text)
}
