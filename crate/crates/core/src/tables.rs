//! Capture-history tables: the observed counts of cases on each combination
//! of lists, list transforms, the embedded datasets, and CSV/JSON I/O.
//!
//! A combination of lists is a bitmask with list `i` on bit `i`. The empty
//! combination (the dark figure) is never stored.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MseError, Result};

/// Bitmask over list indices.
pub type Subset = u32;

pub const MAX_LISTS: usize = 16;

/// Named lists plus the observed count on every nonempty combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListSystem {
    names: Vec<String>,
    counts: BTreeMap<Subset, u64>,
}

impl ListSystem {
    /// Zero counts are dropped; they are implicit.
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        counts: impl IntoIterator<Item = (Subset, u64)>,
    ) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        validate_names(&names)?;
        let full = full_mask(names.len());
        let mut map = BTreeMap::new();
        for (subset, count) in counts {
            if subset == 0 || subset & !full != 0 {
                return Err(MseError::InvalidSystem(format!(
                    "combination {subset:#b} is not a nonempty subset of {} lists",
                    names.len()
                )));
            }
            if map.insert(subset, count).is_some() {
                return Err(MseError::InvalidSystem(format!(
                    "combination {subset:#b} given twice"
                )));
            }
        }
        map.retain(|_, c| *c > 0);
        Ok(Self { names, counts: map })
    }

    /// Build from `(lists, count)` pairs where `lists` holds list names.
    pub fn from_named<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        cells: &[(&[&str], u64)],
    ) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut counts = Vec::with_capacity(cells.len());
        for (members, count) in cells {
            let mut subset = 0;
            for m in members.iter() {
                let idx = names
                    .iter()
                    .position(|n| n == m)
                    .ok_or_else(|| MseError::UnknownList(m.to_string()))?;
                subset |= 1 << idx;
            }
            counts.push((subset, *count));
        }
        Self::new(names, counts)
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| MseError::UnknownList(name.to_string()))
    }

    pub fn count(&self, subset: Subset) -> u64 {
        self.counts.get(&subset).copied().unwrap_or(0)
    }

    /// Nonzero cells in ascending bitmask order.
    pub fn cells(&self) -> impl Iterator<Item = (Subset, u64)> + '_ {
        self.counts.iter().map(|(s, c)| (*s, *c))
    }

    pub fn nonzero_cells(&self) -> usize {
        self.counts.len()
    }

    pub fn total_observed(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of cases observed on list `i`, in any combination.
    pub fn list_total(&self, i: usize) -> u64 {
        self.cells()
            .filter(|(s, _)| s & (1 << i) != 0)
            .map(|(_, c)| c)
            .sum()
    }

    /// Number of cases observed on both lists `i` and `j`.
    pub fn overlap(&self, i: usize, j: usize) -> u64 {
        let pair = (1 << i) | (1 << j);
        self.cells()
            .filter(|(s, _)| s & pair == pair)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn subset_names(&self, subset: Subset) -> Vec<String> {
        members(subset, self.k())
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// Every nonempty combination, zero counts reinstated, ascending bitmask.
    pub fn zero_fill(&self) -> CellTable {
        let rows = (1..=full_mask(self.k()))
            .map(|s| Cell {
                subset: s,
                count: self.count(s),
            })
            .collect();
        CellTable {
            names: self.names.clone(),
            rows,
        }
    }

    /// Merge the lists in `group` into one list called `new_name`, placed at
    /// the position of the group's first member.
    pub fn consolidate(&self, group: &[&str], new_name: &str) -> Result<Self> {
        let mut group_idx = BTreeSet::new();
        for g in group {
            group_idx.insert(self.index_of(g)?);
        }
        if group_idx.len() < 2 {
            return Err(MseError::InvalidArgument(
                "consolidation needs at least two distinct lists".into(),
            ));
        }
        let first = *group_idx.iter().next().unwrap();
        let mut new_names = Vec::with_capacity(self.k() - group_idx.len() + 1);
        let mut target = vec![0usize; self.k()];
        for (i, name) in self.names.iter().enumerate() {
            if group_idx.contains(&i) && i != first {
                continue;
            }
            target[i] = new_names.len();
            new_names.push(if i == first {
                new_name.to_string()
            } else {
                name.clone()
            });
        }
        for &i in &group_idx {
            target[i] = target[first];
        }
        let mut counts: BTreeMap<Subset, u64> = BTreeMap::new();
        for (s, c) in self.cells() {
            let mapped = members(s, self.k()).fold(0, |acc, i| acc | (1 << target[i]));
            *counts.entry(mapped).or_default() += c;
        }
        Self::new(new_names, counts)
    }

    /// Drop list `name`. Cases seen only on that list disappear.
    pub fn omit_list(&self, name: &str) -> Result<Self> {
        let idx = self.index_of(name)?;
        if self.k() < 3 {
            return Err(MseError::InvalidArgument(
                "omitting a list needs at least three lists".into(),
            ));
        }
        let names = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, n)| n.clone())
            .collect::<Vec<_>>();
        let low = (1 << idx) - 1;
        let mut counts: BTreeMap<Subset, u64> = BTreeMap::new();
        for (s, c) in self.cells() {
            let mapped = (s & low) | ((s >> (idx + 1)) << idx);
            if mapped != 0 {
                *counts.entry(mapped).or_default() += c;
            }
        }
        Self::new(names, counts)
    }

    /// Reorder lists: new list `i` is old list `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        if order.len() != k || order.iter().any(|&o| o >= k || std::mem::replace(&mut seen[o], true)) {
            return Err(MseError::InvalidArgument("not a permutation".into()));
        }
        let names = order.iter().map(|&o| self.names[o].clone()).collect::<Vec<_>>();
        let counts = self.cells().map(|(s, c)| {
            let mapped = (0..k).filter(|&i| s & (1 << order[i]) != 0).fold(0, |a, i| a | (1 << i));
            (mapped, c)
        });
        Self::new(names, counts)
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            lists: self.names.clone(),
            cells: self
                .cells()
                .map(|(s, c)| CellJson {
                    sets: self.subset_names(s),
                    count: c,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &SystemJson) -> Result<Self> {
        let cells: Vec<(Vec<&str>, u64)> = json
            .cells
            .iter()
            .map(|c| (c.sets.iter().map(String::as_str).collect(), c.count))
            .collect();
        let borrowed: Vec<(&[&str], u64)> = cells.iter().map(|(m, c)| (m.as_slice(), *c)).collect();
        Self::from_named(json.lists.clone(), &borrowed)
    }

    pub fn load_csv(path: impl AsRef<Path>, aggregate: bool) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, aggregate)
    }

    /// Parse the capture-history CSV: one column per list holding 0/1 and a
    /// final `count` column. Duplicate combinations are rejected unless
    /// `aggregate` is set, in which case they are summed.
    pub fn read_csv<R: Read>(reader: R, aggregate: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| MseError::Csv { line: 1, msg: e.to_string() })?
            .clone();
        if headers.len() < 2 || !headers[headers.len() - 1].eq_ignore_ascii_case("count") {
            return Err(MseError::Csv {
                line: 1,
                msg: "header must list the list labels followed by `count`".into(),
            });
        }
        let names: Vec<String> = headers.iter().take(headers.len() - 1).map(str::to_string).collect();
        validate_names(&names).map_err(|e| MseError::Csv { line: 1, msg: e.to_string() })?;
        let k = names.len();

        let mut counts: BTreeMap<Subset, u64> = BTreeMap::new();
        for (row_no, record) in rdr.records().enumerate() {
            let line = row_no + 2;
            let record = record.map_err(|e| MseError::Csv { line, msg: e.to_string() })?;
            if record.len() != k + 1 {
                return Err(MseError::Csv {
                    line,
                    msg: format!("expected {} fields, found {}", k + 1, record.len()),
                });
            }
            let mut subset: Subset = 0;
            for (i, field) in record.iter().take(k).enumerate() {
                match field {
                    "0" => {}
                    "1" => subset |= 1 << i,
                    other => {
                        return Err(MseError::Csv {
                            line,
                            msg: format!("membership for `{}` must be 0 or 1, got `{other}`", names[i]),
                        })
                    }
                }
            }
            if subset == 0 {
                return Err(MseError::Csv {
                    line,
                    msg: "row is on no list".into(),
                });
            }
            let raw = &record[k];
            let count: u64 = raw.parse().map_err(|_| MseError::Csv {
                line,
                msg: format!("count must be a nonnegative integer, got `{raw}`"),
            })?;
            match counts.get_mut(&subset) {
                Some(existing) if aggregate => *existing += count,
                Some(_) => {
                    return Err(MseError::Csv {
                        line,
                        msg: "duplicate list combination (use aggregation to sum duplicates)".into(),
                    })
                }
                None => {
                    counts.insert(subset, count);
                }
            }
        }
        if counts.is_empty() {
            return Err(MseError::NoObservations);
        }
        Self::new(names, counts)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = self.names.clone();
        header.push("count".into());
        let to_io = |e: csv::Error| MseError::Io(std::io::Error::other(e));
        wtr.write_record(&header).map_err(to_io)?;
        for (s, c) in self.cells() {
            let mut row: Vec<String> = (0..self.k())
                .map(|i| if s & (1 << i) != 0 { "1" } else { "0" }.to_string())
                .collect();
            row.push(c.to_string());
            wtr.write_record(&row).map_err(to_io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellJson {
    pub sets: Vec<String>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemJson {
    pub lists: Vec<String>,
    pub cells: Vec<CellJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub subset: Subset,
    pub count: u64,
}

/// The observable cells that enter a fit, zero counts included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellTable {
    names: Vec<String>,
    rows: Vec<Cell>,
}

impl CellTable {
    pub fn new(names: Vec<String>, rows: Vec<Cell>) -> Result<Self> {
        validate_names(&names)?;
        let full = full_mask(names.len());
        let mut seen = BTreeSet::new();
        for r in &rows {
            if r.subset == 0 || r.subset & !full != 0 || !seen.insert(r.subset) {
                return Err(MseError::InvalidSystem(format!(
                    "bad or repeated cell {:#b}",
                    r.subset
                )));
            }
        }
        Ok(Self { names, rows })
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Cell] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    /// Total count on cells containing both lists of the pair.
    pub fn pair_overlap(&self, i: usize, j: usize) -> u64 {
        let pair = (1 << i) | (1 << j);
        self.rows
            .iter()
            .filter(|r| r.subset & pair == pair)
            .map(|r| r.count)
            .sum()
    }

    /// Keep only rows satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Cell) -> bool) -> CellTable {
        CellTable {
            names: self.names.clone(),
            rows: self.rows.iter().copied().filter(|r| keep(r)).collect(),
        }
    }

    /// Same table with the cell counts multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> CellTable {
        CellTable {
            names: self.names.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| Cell {
                    subset: r.subset,
                    count: r.count * factor,
                })
                .collect(),
        }
    }
}

pub fn full_mask(k: usize) -> Subset {
    ((1u64 << k) - 1) as Subset
}

/// List indices contained in `subset`, ascending.
pub fn members(subset: Subset, k: usize) -> impl Iterator<Item = usize> {
    (0..k).filter(move |i| subset & (1 << i) != 0)
}

fn validate_names(names: &[String]) -> Result<()> {
    if names.is_empty() || names.len() > MAX_LISTS {
        return Err(MseError::InvalidSystem(format!(
            "need between 1 and {MAX_LISTS} lists, got {}",
            names.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if n.is_empty() {
            return Err(MseError::InvalidSystem("empty list name".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(MseError::InvalidSystem(format!("duplicate list name `{n}`")));
        }
    }
    Ok(())
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 8] = ["uk6", "uk5", "uk4", "ned6", "ned5", "no8", "no5", "kosovo"];

/// The embedded datasets and their standard reductions.
pub fn builtin(name: &str) -> Result<ListSystem> {
    match name {
        "uk6" => uk6(),
        "uk5" => uk6()?.consolidate(&["PF", "NCA"], "PFNCA"),
        "uk4" => builtin("uk5")?.omit_list("GP"),
        "ned6" => ned6(),
        "ned5" => ned6()?.consolidate(&["I", "O"], "IO"),
        "no8" => no8(),
        "no5" => no8()?.consolidate(&["B", "E", "F", "G"], "BEFG"),
        "kosovo" => kosovo(),
        other => Err(MseError::UnknownDataset(other.to_string())),
    }
}

// Potential victims of trafficking in the UK, 2013.
fn uk6() -> Result<ListSystem> {
    ListSystem::from_named(
        ["LA", "NG", "PF", "GO", "GP", "NCA"],
        &[
            (&["LA"], 54),
            (&["NG"], 463),
            (&["PF"], 907),
            (&["GO"], 695),
            (&["GP"], 316),
            (&["NCA"], 57),
            (&["LA", "NG"], 15),
            (&["LA", "PF"], 19),
            (&["LA", "GO"], 3),
            (&["NG", "PF"], 56),
            (&["NG", "GO"], 19),
            (&["NG", "GP"], 1),
            (&["NG", "NCA"], 3),
            (&["PF", "GO"], 69),
            (&["PF", "GP"], 10),
            (&["PF", "NCA"], 31),
            (&["GO", "GP"], 8),
            (&["GO", "NCA"], 6),
            (&["GP", "NCA"], 1),
            (&["LA", "NG", "PF"], 1),
            (&["LA", "NG", "GO"], 1),
            (&["NG", "PF", "GO"], 4),
            (&["NG", "PF", "NCA"], 3),
            (&["PF", "GO", "NCA"], 1),
            (&["LA", "NG", "PF", "GO"], 1),
        ],
    )
}

// Victims of trafficking in the Netherlands, 2010-2015.
fn ned6() -> Result<ListSystem> {
    ListSystem::from_named(
        ["I", "K", "O", "P", "R", "Z"],
        &[
            (&["I"], 352),
            (&["K"], 1299),
            (&["O"], 403),
            (&["P"], 4466),
            (&["R"], 650),
            (&["Z"], 632),
            (&["I", "O"], 1),
            (&["I", "P"], 18),
            (&["I", "R"], 3),
            (&["I", "Z"], 16),
            (&["K", "O"], 1),
            (&["K", "P"], 44),
            (&["K", "Z"], 4),
            (&["O", "P"], 59),
            (&["O", "R"], 2),
            (&["O", "Z"], 57),
            (&["P", "R"], 82),
            (&["P", "Z"], 125),
            (&["R", "Z"], 2),
            (&["I", "O", "P"], 4),
            (&["I", "P", "Z"], 4),
            (&["O", "P", "R"], 2),
            (&["O", "P", "Z"], 7),
            (&["P", "R", "Z"], 1),
        ],
    )
}

// Greater New Orleans, 2016; list identities withheld.
fn no8() -> Result<ListSystem> {
    ListSystem::from_named(
        ["A", "B", "C", "D", "E", "F", "G", "H"],
        &[
            (&["A"], 25),
            (&["B"], 5),
            (&["C"], 70),
            (&["D"], 33),
            (&["E"], 6),
            (&["F"], 6),
            (&["G"], 6),
            (&["H"], 21),
            (&["A", "C"], 1),
            (&["A", "D"], 2),
            (&["A", "E"], 1),
            (&["B", "F"], 1),
            (&["C", "D"], 1),
            (&["C", "E"], 1),
            (&["C", "G"], 1),
            (&["D", "E"], 2),
            (&["E", "H"], 1),
            (&["A", "C", "G"], 1),
            (&["A", "D", "E"], 1),
        ],
    )
}

// Killings in Kosovo, 20 March to 22 June 1999.
fn kosovo() -> Result<ListSystem> {
    ListSystem::from_named(
        ["EXH", "ABA", "OSCE", "HRW"],
        &[
            (&["EXH"], 1131),
            (&["ABA"], 845),
            (&["OSCE"], 936),
            (&["HRW"], 306),
            (&["EXH", "ABA"], 177),
            (&["EXH", "OSCE"], 228),
            (&["EXH", "HRW"], 106),
            (&["ABA", "OSCE"], 217),
            (&["ABA", "HRW"], 31),
            (&["OSCE", "HRW"], 123),
            (&["EXH", "ABA", "OSCE"], 181),
            (&["EXH", "ABA", "HRW"], 18),
            (&["EXH", "OSCE", "HRW"], 42),
            (&["ABA", "OSCE", "HRW"], 32),
            (&["EXH", "ABA", "OSCE", "HRW"], 27),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_totals() {
        let expected = [
            ("uk6", 2744),
            ("uk5", 2744),
            ("uk4", 2428),
            ("ned6", 8234),
            ("ned5", 8234),
            ("no8", 185),
            ("no5", 185),
            ("kosovo", 4400),
        ];
        for (name, total) in expected {
            assert_eq!(builtin(name).unwrap().total_observed(), total, "{name}");
        }
        assert!(matches!(builtin("atlantis"), Err(MseError::UnknownDataset(_))));
    }

    #[test]
    fn builtin_list_counts() {
        assert_eq!(builtin("uk6").unwrap().k(), 6);
        assert_eq!(builtin("uk5").unwrap().names(), ["LA", "NG", "PFNCA", "GO", "GP"]);
        assert_eq!(builtin("uk4").unwrap().names(), ["LA", "NG", "PFNCA", "GO"]);
        assert_eq!(builtin("ned5").unwrap().names(), ["IO", "K", "P", "R", "Z"]);
        assert_eq!(builtin("no5").unwrap().names(), ["A", "BEFG", "C", "D", "H"]);
    }

    #[test]
    fn zero_fill_reinstates_every_cell() {
        let uk = builtin("uk6").unwrap();
        let table = uk.zero_fill();
        assert_eq!(table.len(), 63);
        assert_eq!(table.total(), 2744);
        assert!(table.rows().windows(2).all(|w| w[0].subset < w[1].subset));

        let kosovo = builtin("kosovo").unwrap().zero_fill();
        assert_eq!(kosovo.len(), 15);
        assert!(kosovo.rows().iter().all(|r| r.count > 0));

        let two = ListSystem::new(["a", "b"], [(0b01, 7)]).unwrap();
        let rows: Vec<u64> = two.zero_fill().rows().iter().map(|r| r.count).collect();
        assert_eq!(rows, vec![7, 0, 0]);
    }

    #[test]
    fn consolidate_merges_membership() {
        let uk = builtin("uk6").unwrap();
        let all = uk.consolidate(&["LA", "NG", "PF", "GO", "GP", "NCA"], "ALL").unwrap();
        assert_eq!(all.k(), 1);
        assert_eq!(all.count(1), 2744);

        let three = ListSystem::new(["a", "b", "c"], [(0b001, 3), (0b011, 2), (0b110, 4), (0b100, 1)]).unwrap();
        let merged = three.consolidate(&["a", "b"], "ab").unwrap();
        assert_eq!(merged.names(), ["ab", "c"]);
        assert_eq!(merged.count(0b01), 5);
        assert_eq!(merged.count(0b11), 4);
        assert_eq!(merged.count(0b10), 1);
        assert_eq!(merged.total_observed(), three.total_observed());

        assert!(matches!(uk.consolidate(&["PF", "XX"], "Y"), Err(MseError::UnknownList(_))));
        assert!(uk.consolidate(&["PF"], "Y").is_err());
    }

    #[test]
    fn new_orleans_merge_keeps_total() {
        let no5 = builtin("no5").unwrap();
        assert_eq!(no5.k(), 5);
        assert_eq!(no5.total_observed(), 185);
        assert_eq!(no5.list_total(1), 5 + 6 + 6 + 6 + 1 + 1 + 1 + 1 + 2 + 1 + 1 + 1);
    }

    #[test]
    fn omit_list_drops_exclusive_cases() {
        let uk5 = builtin("uk5").unwrap();
        let uk4 = uk5.omit_list("GP").unwrap();
        assert_eq!(uk4.total_observed(), 2428);
        assert!(matches!(uk5.omit_list("ZZ"), Err(MseError::UnknownList(_))));

        let sys = ListSystem::new(["a", "b", "c"], [(0b100, 9)]).unwrap();
        let dropped = sys.omit_list("c").unwrap();
        assert_eq!(dropped.total_observed(), 0);
        assert!(dropped.zero_fill().total() == 0);

        let two = ListSystem::new(["a", "b"], [(0b01, 9)]).unwrap();
        assert!(two.omit_list("a").is_err());
    }

    #[test]
    fn omit_empty_list_keeps_totals() {
        let sys = ListSystem::new(["a", "b", "c"], [(0b001, 4), (0b011, 2), (0b010, 5)]).unwrap();
        let omitted = sys.omit_list("c").unwrap();
        assert_eq!(omitted.total_observed(), sys.total_observed());
    }

    #[test]
    fn uk4_is_a_composition() {
        let composed = builtin("uk6")
            .unwrap()
            .consolidate(&["PF", "NCA"], "PFNCA")
            .unwrap()
            .omit_list("GP")
            .unwrap();
        assert_eq!(composed, builtin("uk4").unwrap());
    }

    #[test]
    fn csv_parsing() {
        let text = "a,b,count\n1,0,5\n0,1,3\r\n1,1,2\n";
        let sys = ListSystem::read_csv(text.as_bytes(), false).unwrap();
        assert_eq!(sys.total_observed(), 10);
        assert_eq!(sys.count(0b11), 2);

        let empty = "a,b,count\n";
        assert!(matches!(ListSystem::read_csv(empty.as_bytes(), false), Err(MseError::NoObservations)));

        let dup = "a,b,count\n1,0,5\n1,0,4\n";
        assert!(ListSystem::read_csv(dup.as_bytes(), false).is_err());
        let summed = ListSystem::read_csv(dup.as_bytes(), true).unwrap();
        assert_eq!(summed.count(0b01), 9);

        for bad in [
            "a,b,total\n1,0,5\n",
            "a,b,count\n2,0,5\n",
            "a,b,count\n1,0,-5\n",
            "a,b,count\n0,0,5\n",
            "a,a,count\n1,0,5\n",
            "a,b,count\n1,0\n",
        ] {
            assert!(ListSystem::read_csv(bad.as_bytes(), false).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn json_export_shape() {
        let sys = ListSystem::new(["LA", "NG"], [(0b11, 15), (0b01, 54)]).unwrap();
        let json = serde_json::to_string(&sys.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"lists":["LA","NG"],"cells":[{"sets":["LA"],"count":54},{"sets":["LA","NG"],"count":15}]}"#
        );
        assert_eq!(ListSystem::from_json(&sys.to_json()).unwrap(), sys);
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(ListSystem::new(Vec::<String>::new(), [(1, 1)]).is_err());
        assert!(ListSystem::new(["a", "a"], [(1, 1)]).is_err());
        assert!(ListSystem::new(["a", ""], [(1, 1)]).is_err());
        assert!(ListSystem::new(["a", "b"], [(0, 1)]).is_err());
        assert!(ListSystem::new(["a", "b"], [(4, 1)]).is_err());
    }
}
