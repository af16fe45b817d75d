//! Model specifications and design matrices for the log-linear model
//! `log λ_A = μ + Σ_{i∈A} α_i + Σ_{i<j∈A} β_ij`, plus identifiability and
//! existence diagnostics.
//!
//! # Existence check
//!
//! For a design `X` with rows split into positive-count cells `X₊` and
//! zero-count cells `X₀`, the likelihood never decreases along a parameter
//! direction `δ` with `X₊δ = 0` and `X₀δ ≤ 0`. The dark figure `exp(μ)` is
//! unbounded over the (extended) maximum-likelihood set exactly when such a
//! direction has `δ_μ > 0`. The check solves
//!
//! ```text
//! maximise δ_μ  subject to  X₊δ = 0,  X₀δ ≤ 0,  -1 ≤ δ ≤ 1
//! ```
//!
//! and reports non-existence when the optimum is positive. A second LP,
//! maximising `Σ t_A` over zero cells with `X₀δ + t ≤ 0`, `0 ≤ t ≤ 1`,
//! reports whether the maximum is only attained as an extended MLE (some
//! fitted cell means are exactly zero).

use std::collections::BTreeSet;
use std::fmt;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{MseError, Result};
use crate::tables::{CellTable, Subset};

/// Unordered pair of list indices, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(pub usize, pub usize);

impl Pair {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            Pair(a, b)
        } else {
            Pair(b, a)
        }
    }

    pub fn mask(self) -> Subset {
        (1 << self.0) | (1 << self.1)
    }

    pub fn label(self, names: &[String]) -> String {
        format!("{}:{}", names[self.0], names[self.1])
    }

    /// Parse `A:B` against list names.
    pub fn parse(text: &str, names: &[String]) -> Result<Self> {
        let (a, b) = text
            .split_once(':')
            .ok_or_else(|| MseError::InvalidArgument(format!("interaction `{text}` is not of the form A:B")))?;
        let find = |n: &str| {
            names
                .iter()
                .position(|x| x == n.trim())
                .ok_or_else(|| MseError::UnknownList(n.trim().to_string()))
        };
        let (i, j) = (find(a)?, find(b)?);
        if i == j {
            return Err(MseError::InvalidArgument(format!("interaction `{text}` repeats a list")));
        }
        Ok(Pair::new(i, j))
    }
}

/// Which pairwise interactions accompany the intercept and main effects.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    k: usize,
    interactions: BTreeSet<Pair>,
}

impl ModelSpec {
    pub fn main_effects(k: usize) -> Self {
        Self {
            k,
            interactions: BTreeSet::new(),
        }
    }

    pub fn all_pairs(k: usize) -> Self {
        Self {
            k,
            interactions: pairs(k).collect(),
        }
    }

    pub fn new(k: usize, interactions: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for p in interactions {
            if p.0 >= p.1 || p.1 >= k {
                return Err(MseError::InvalidArgument(format!(
                    "interaction ({}, {}) invalid for {k} lists",
                    p.0, p.1
                )));
            }
            if !set.insert(p) {
                return Err(MseError::InvalidArgument(format!(
                    "interaction ({}, {}) repeated",
                    p.0, p.1
                )));
            }
        }
        Ok(Self { k, interactions: set })
    }

    /// Parse a comma-separated `A:B,C:D` list.
    pub fn parse(text: &str, names: &[String]) -> Result<Self> {
        let pairs = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Pair::parse(s, names))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names.len(), pairs)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn interactions(&self) -> impl Iterator<Item = Pair> + '_ {
        self.interactions.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.interactions.contains(&p)
    }

    pub fn with(&self, p: Pair) -> Self {
        let mut next = self.clone();
        next.interactions.insert(p);
        next
    }

    pub fn without(&self, p: Pair) -> Self {
        let mut next = self.clone();
        next.interactions.remove(&p);
        next
    }

    pub fn is_subset_of(&self, other: &ModelSpec) -> bool {
        self.k == other.k && self.interactions.is_subset(&other.interactions)
    }

    /// Number of model parameters: intercept, main effects, interactions.
    pub fn n_params(&self) -> usize {
        1 + self.k + self.interactions.len()
    }

    /// Pair labels joined by `+`, or `main` for no interactions.
    pub fn id(&self, names: &[String]) -> String {
        if self.interactions.is_empty() {
            "main".to_string()
        } else {
            self.labels(names).join("+")
        }
    }

    pub fn labels(&self, names: &[String]) -> Vec<String> {
        self.interactions.iter().map(|p| p.label(names)).collect()
    }

    /// The spec after relabelling lists: old list `order[i]` becomes list `i`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        Self {
            k: self.k,
            interactions: self
                .interactions
                .iter()
                .map(|p| Pair::new(inverse[p.0], inverse[p.1]))
                .collect(),
        }
    }
}

/// All pairs `(i, j)` with `i < j < k`, lexicographic.
pub fn pairs(k: usize) -> impl Iterator<Item = Pair> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| Pair(i, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Intercept,
    Main(usize),
    Interaction(Pair),
}

impl Column {
    pub fn loads(self, subset: Subset) -> bool {
        match self {
            Column::Intercept => true,
            Column::Main(i) => subset & (1 << i) != 0,
            Column::Interaction(p) => subset & p.mask() == p.mask(),
        }
    }

    pub fn label(self, names: &[String]) -> String {
        match self {
            Column::Intercept => "(Intercept)".to_string(),
            Column::Main(i) => names[i].clone(),
            Column::Interaction(p) => p.label(names),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Intercept => write!(f, "mu"),
            Column::Main(i) => write!(f, "alpha{i}"),
            Column::Interaction(p) => write!(f, "beta{}_{}", p.0, p.1),
        }
    }
}

/// Binary model matrix over the retained cells.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub subsets: Vec<Subset>,
    pub x: DMatrix<f64>,
    pub counts: DVector<f64>,
    pub columns: Vec<Column>,
    pub col_labels: Vec<String>,
    pub spec: ModelSpec,
    pub names: Vec<String>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.x.ncols()
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }
}

/// Column order: intercept, main effects in list order, interactions in
/// lexicographic pair order.
pub fn columns_for(spec: &ModelSpec) -> Vec<Column> {
    std::iter::once(Column::Intercept)
        .chain((0..spec.k()).map(Column::Main))
        .chain(spec.interactions().map(Column::Interaction))
        .collect()
}

pub fn build_design(table: &CellTable, spec: &ModelSpec) -> Result<DesignMatrix> {
    if spec.k() != table.k() {
        return Err(MseError::DimensionMismatch {
            spec_k: spec.k(),
            table_k: table.k(),
        });
    }
    if table.k() < 2 {
        return Err(MseError::InvalidSystem("a model needs at least two lists".into()));
    }
    let columns = columns_for(spec);
    let rows = table.rows();
    let x = DMatrix::from_fn(rows.len(), columns.len(), |r, c| {
        if columns[c].loads(rows[r].subset) {
            1.0
        } else {
            0.0
        }
    });
    Ok(DesignMatrix {
        subsets: rows.iter().map(|r| r.subset).collect(),
        counts: DVector::from_iterator(rows.len(), rows.iter().map(|r| r.count as f64)),
        col_labels: columns.iter().map(|c| c.label(table.names())).collect(),
        columns,
        x,
        spec: spec.clone(),
        names: table.names().to_vec(),
    })
}

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Outcome of the existence LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    /// The dark-figure estimate is finite.
    Exists,
    /// Some likelihood-preserving direction sends the dark figure to infinity.
    DarkFigureUnbounded,
    /// The design is rank deficient, so existence was not examined.
    NotChecked,
    /// The LP solver failed; treated as not existing.
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticReport {
    pub n_rows: usize,
    pub n_params: usize,
    pub rank: usize,
    pub full_rank: bool,
    pub deficient_columns: Vec<String>,
    pub existence: Existence,
    pub existence_ok: bool,
    /// The maximum is attained only with some fitted cell means at zero.
    pub extended_mle: bool,
}

pub fn matrix_rank(x: &DMatrix<f64>) -> usize {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0;
    }
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// Rank of the design and, when deficient, the columns a column-pivoted QR
/// pushes past the rank.
pub fn check_identifiability(table: &CellTable, spec: &ModelSpec) -> Result<DiagnosticReport> {
    let design = build_design(table, spec)?;
    Ok(identifiability_of(&design))
}

pub(crate) fn identifiability_of(design: &DesignMatrix) -> DiagnosticReport {
    let p = design.n_params();
    let rank = matrix_rank(&design.x);
    let mut deficient = Vec::new();
    if rank < p {
        deficient = deficient_columns(&design.x, rank)
            .into_iter()
            .map(|c| design.col_labels[c].clone())
            .collect();
    }
    DiagnosticReport {
        n_rows: design.n_rows(),
        n_params: p,
        rank,
        full_rank: rank == p,
        deficient_columns: deficient,
        existence: Existence::NotChecked,
        existence_ok: false,
        extended_mle: false,
    }
}

fn deficient_columns(x: &DMatrix<f64>, rank: usize) -> Vec<usize> {
    let p = x.ncols();
    // Pad short matrices with zero rows so the pivoted QR sees every column.
    let padded = if x.nrows() < p {
        let mut m = DMatrix::zeros(p, p);
        m.view_mut((0, 0), (x.nrows(), p)).copy_from(x);
        m
    } else {
        x.clone()
    };
    let qr = padded.col_piv_qr();
    // Applying the pivots to a row of indices recovers the pivoted order.
    let mut idx = DMatrix::from_fn(1, p, |_, c| c as f64);
    qr.p().permute_columns(&mut idx);
    let mut out: Vec<usize> = idx.iter().skip(rank).map(|&c| c as usize).collect();
    out.sort_unstable();
    out
}

/// Rank check followed by the existence LP (see the module docs).
pub fn check_existence(table: &CellTable, spec: &ModelSpec) -> Result<DiagnosticReport> {
    let design = build_design(table, spec)?;
    Ok(diagnose(&design))
}

pub fn diagnose(design: &DesignMatrix) -> DiagnosticReport {
    let mut report = identifiability_of(design);
    if !report.full_rank {
        return report;
    }
    match dark_figure_unbounded(design) {
        Some(false) => {
            report.existence = Existence::Exists;
            report.existence_ok = true;
        }
        Some(true) => report.existence = Existence::DarkFigureUnbounded,
        None => report.existence = Existence::Indeterminate,
    }
    report.extended_mle = extended_cells(design).map(|c| !c.is_empty()).unwrap_or(false);
    report
}

const LP_EPS: f64 = 1e-9;

fn add_row_constraint(
    problem: &mut Problem,
    vars: &[microlp::Variable],
    row: nalgebra::DVectorView<'_, f64>,
    extra: Option<(microlp::Variable, f64)>,
    op: ComparisonOp,
) {
    let mut expr = LinearExpr::empty();
    for (c, v) in vars.iter().enumerate() {
        if row[c] != 0.0 {
            expr.add(*v, row[c]);
        }
    }
    if let Some((v, coef)) = extra {
        expr.add(v, coef);
    }
    problem.add_constraint(expr, op, 0.0);
}

/// `Some(true)` when some direction preserving the likelihood raises μ.
fn dark_figure_unbounded(design: &DesignMatrix) -> Option<bool> {
    let p = design.n_params();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..p)
        .map(|c| problem.add_var(if design.columns[c] == Column::Intercept { 1.0 } else { 0.0 }, (-1.0, 1.0)))
        .collect();
    for r in 0..design.n_rows() {
        let row = design.x.row(r).transpose();
        let op = if design.counts[r] > 0.0 { ComparisonOp::Eq } else { ComparisonOp::Le };
        add_row_constraint(&mut problem, &vars, row.as_view(), None, op);
    }
    match problem.solve() {
        Ok(sol) => Some(sol.objective() > LP_EPS),
        Err(e) => {
            log::warn!("existence LP failed: {e}");
            None
        }
    }
}

/// Zero-count rows whose fitted mean is zero at the extended MLE.
pub(crate) fn extended_cells(design: &DesignMatrix) -> Option<Vec<usize>> {
    let zero_rows: Vec<usize> = (0..design.n_rows()).filter(|&r| design.counts[r] == 0.0).collect();
    if zero_rows.is_empty() {
        return Some(Vec::new());
    }
    let p = design.n_params();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..p).map(|_| problem.add_var(0.0, (-1.0, 1.0))).collect();
    for r in 0..design.n_rows() {
        if design.counts[r] > 0.0 {
            let row = design.x.row(r).transpose();
            add_row_constraint(&mut problem, &vars, row.as_view(), None, ComparisonOp::Eq);
        }
    }
    let slack: Vec<_> = zero_rows
        .iter()
        .map(|&r| {
            let t = problem.add_var(1.0, (0.0, 1.0));
            let row = design.x.row(r).transpose();
            add_row_constraint(&mut problem, &vars, row.as_view(), Some((t, 1.0)), ComparisonOp::Le);
            t
        })
        .collect();
    match problem.solve() {
        Ok(sol) => Some(
            zero_rows
                .iter()
                .zip(&slack)
                .filter(|(_, t)| *sol.var_value(**t) > 1e-7)
                .map(|(r, _)| *r)
                .collect(),
        ),
        Err(e) => {
            log::warn!("facial-set LP failed: {e}");
            None
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ModelSpec", 2)?;
        st.serialize_field("k", &self.k)?;
        let pairs: Vec<[usize; 2]> = self.interactions.iter().map(|p| [p.0, p.1]).collect();
        st.serialize_field("interactions", &pairs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{builtin, ListSystem};

    #[test]
    fn six_list_saturated_pairwise_shape() {
        let table = builtin("uk6").unwrap().zero_fill();
        let d = build_design(&table, &ModelSpec::all_pairs(6)).unwrap();
        assert_eq!((d.n_rows(), d.n_params()), (63, 22));
        assert_eq!(d.col_labels[0], "(Intercept)");
        assert_eq!(d.col_labels[7], "LA:NG");
        assert_eq!(d.col_labels[21], "GP:NCA");
    }

    #[test]
    fn three_list_main_effects_rows() {
        let sys = ListSystem::new(["a", "b", "c"], [(0b111, 1)]).unwrap();
        let d = build_design(&sys.zero_fill(), &ModelSpec::main_effects(3)).unwrap();
        assert_eq!((d.n_rows(), d.n_params()), (7, 4));
        let last: Vec<f64> = d.x.row(6).iter().copied().collect();
        assert_eq!(last, vec![1.0, 1.0, 1.0, 1.0]);
        let first: Vec<f64> = d.x.row(0).iter().copied().collect();
        assert_eq!(first, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn entries_follow_membership() {
        let table = builtin("kosovo").unwrap().zero_fill();
        let d = build_design(&table, &ModelSpec::all_pairs(4)).unwrap();
        for (r, &s) in d.subsets.iter().enumerate() {
            for (c, col) in d.columns.iter().enumerate() {
                let expected = match col {
                    Column::Intercept => true,
                    Column::Main(i) => s >> i & 1 == 1,
                    Column::Interaction(Pair(i, j)) => s >> i & 1 == 1 && s >> j & 1 == 1,
                };
                assert_eq!(d.x[(r, c)] == 1.0, expected);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let table = builtin("kosovo").unwrap().zero_fill();
        assert!(matches!(
            build_design(&table, &ModelSpec::main_effects(5)),
            Err(MseError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nested_specs_nest_columns() {
        let table = builtin("uk5").unwrap().zero_fill();
        let small = ModelSpec::new(5, [Pair(0, 1)]).unwrap();
        let big = small.with(Pair(2, 4));
        let ds = build_design(&table, &small).unwrap();
        let db = build_design(&table, &big).unwrap();
        for label in &ds.col_labels {
            let cs = ds.col_labels.iter().position(|l| l == label).unwrap();
            let cb = db.col_labels.iter().position(|l| l == label).unwrap();
            assert_eq!(ds.x.column(cs), db.x.column(cb));
        }
    }

    #[test]
    fn two_lists_with_interaction_is_deficient() {
        let sys = ListSystem::new(["a", "b"], [(1, 10), (2, 10), (3, 10)]).unwrap();
        let rep = check_identifiability(&sys.zero_fill(), &ModelSpec::all_pairs(2)).unwrap();
        assert_eq!(rep.n_params, 4);
        assert_eq!(rep.rank, 3);
        assert!(!rep.full_rank);
        assert_eq!(rep.deficient_columns.len(), 1);
    }

    #[test]
    fn three_list_main_effects_full_rank() {
        let sys = ListSystem::new(["a", "b", "c"], [(1, 1)]).unwrap();
        let rep = check_identifiability(&sys.zero_fill(), &ModelSpec::main_effects(3)).unwrap();
        assert!(rep.full_rank);
        assert_eq!(rep.rank, 4);
        assert!(rep.deficient_columns.is_empty());
    }

    #[test]
    fn zero_overlap_independence_does_not_exist() {
        let sys = ListSystem::new(["a", "b"], [(1, 12), (2, 30)]).unwrap();
        let rep = check_existence(&sys.zero_fill(), &ModelSpec::main_effects(2)).unwrap();
        assert!(rep.full_rank);
        assert_eq!(rep.existence, Existence::DarkFigureUnbounded);
        assert!(!rep.existence_ok);
    }

    #[test]
    fn positive_saturated_three_lists_exists() {
        let counts = (1..8).map(|s| (s, 5 + s as u64));
        let sys = ListSystem::new(["a", "b", "c"], counts).unwrap();
        let rep = check_existence(&sys.zero_fill(), &ModelSpec::all_pairs(3)).unwrap();
        assert!(rep.existence_ok);
        assert!(!rep.extended_mle);
    }

    #[test]
    fn empty_overlap_interaction_is_extended() {
        let table = builtin("uk6").unwrap().zero_fill();
        let names = table.names().to_vec();
        let spec = ModelSpec::parse("LA:GP", &names).unwrap();
        let rep = check_existence(&table, &spec).unwrap();
        assert!(rep.existence_ok);
        assert!(rep.extended_mle);
        let main = check_existence(&table, &ModelSpec::main_effects(6)).unwrap();
        assert!(main.existence_ok && !main.extended_mle);
    }

    #[test]
    fn rank_ignores_counts() {
        let table = builtin("uk5").unwrap().zero_fill();
        let spec = ModelSpec::all_pairs(5);
        let a = check_identifiability(&table, &spec).unwrap();
        let b = check_identifiability(&table.scaled(7), &spec).unwrap();
        assert_eq!(a.rank, b.rank);
    }

    #[test]
    fn spec_parsing_and_ids() {
        let names: Vec<String> = ["LA", "NG", "PF"].iter().map(|s| s.to_string()).collect();
        let spec = ModelSpec::parse("PF:LA, LA:NG", &names).unwrap();
        assert_eq!(spec.id(&names), "LA:NG+LA:PF");
        assert_eq!(ModelSpec::main_effects(3).id(&names), "main");
        assert!(ModelSpec::parse("LA:LA", &names).is_err());
        assert!(ModelSpec::parse("LA:XX", &names).is_err());
        assert!(ModelSpec::parse("LA:NG,NG:LA", &names).is_err());
        assert!(ModelSpec::new(3, [Pair(1, 3)]).is_err());
    }
}
