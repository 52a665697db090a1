//! Inter-category redundancy: normalized mutual information of primary labels.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::record::DocumentRecord;
use crate::taxonomy::Category;

/// Joint counts of two categories' primary labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    rows: Vec<String>,
    cols: Vec<String>,
    counts: Vec<Vec<u64>>,
    total: u64,
}

impl ContingencyTable {
    /// Table from a dense count matrix; labels are generated as `r{i}`/`c{j}`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let width = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != width) {
            return Err(Error::Param("ragged contingency table".into()));
        }
        let rows = (0..counts.len()).map(|i| format!("r{i}")).collect();
        let cols = (0..width).map(|j| format!("c{j}")).collect();
        Self::with_labels(rows, cols, counts)
    }

    pub fn with_labels(rows: Vec<String>, cols: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != rows.len() || counts.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Param("contingency table shape does not match its labels".into()));
        }
        let total = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Empty("contingency table has no counts"));
        }
        Ok(Self {
            rows,
            cols,
            counts,
            total,
        })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols.len()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.cols.len())
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        Self {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            counts,
            total: self.total,
        }
    }
}

/// Accumulates joint label counts for one category pair. Builders over
/// disjoint shards merge by cellwise addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableBuilder {
    cells: BTreeMap<(String, String), u64>,
    skipped: u64,
}

impl TableBuilder {
    pub fn add(&mut self, x: Option<&str>, y: Option<&str>) {
        match (x, y) {
            (Some(x), Some(y)) => *self.cells.entry((x.to_owned(), y.to_owned())).or_default() += 1,
            _ => self.skipped += 1,
        }
    }

    pub fn add_record(&mut self, record: &DocumentRecord, a: Category, b: Category) {
        let primary = |c: Category| {
            record
                .annotation(c.field())
                .map(|ann| c.project(&ann.primary).into_owned())
        };
        self.add(primary(a).as_deref(), primary(b).as_deref());
    }

    pub fn merge(&mut self, other: &TableBuilder) {
        for (k, n) in &other.cells {
            *self.cells.entry(k.clone()).or_default() += n;
        }
        self.skipped += other.skipped;
    }

    /// Documents lacking a primary label in either category.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn build(&self) -> Result<ContingencyTable> {
        if self.cells.is_empty() {
            return Err(Error::Empty("no documents carry primary labels in both categories"));
        }
        let rows: BTreeSet<&String> = self.cells.keys().map(|(x, _)| x).collect();
        let cols: BTreeSet<&String> = self.cells.keys().map(|(_, y)| y).collect();
        let counts = rows
            .iter()
            .map(|x| {
                cols.iter()
                    .map(|y| self.cells.get(&((*x).clone(), (*y).clone())).copied().unwrap_or(0))
                    .collect()
            })
            .collect();
        ContingencyTable::with_labels(
            rows.into_iter().cloned().collect(),
            cols.into_iter().cloned().collect(),
            counts,
        )
    }
}

/// Contingency table of `a`'s and `b`'s primary labels over `records`.
pub fn joint_counts<'a, I>(records: I, a: Category, b: Category) -> Result<(ContingencyTable, u64)>
where
    I: IntoIterator<Item = &'a DocumentRecord>,
{
    let mut builder = TableBuilder::default();
    for r in records {
        builder.add_record(r, a, b);
    }
    Ok((builder.build()?, builder.skipped()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nmi {
    pub value: f64,
    /// Both categories constant (zero entropy); `value` is then 0.
    pub degenerate: bool,
}

/// 2 I(X;Y) / (H(X) + H(Y)) with natural logarithms and 0·log 0 = 0.
pub fn nmi(table: &ContingencyTable) -> Nmi {
    let n = table.total as f64;
    let entropy = |sums: &[u64]| -> f64 {
        sums.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let rows = table.row_sums();
    let cols = table.col_sums();
    let hx = entropy(&rows);
    let hy = entropy(&cols);
    if hx + hy <= 0.0 {
        return Nmi {
            value: 0.0,
            degenerate: true,
        };
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            // p_xy ln(p_xy / (p_x p_y)) = (c/n) ln(c n / (r_i c_j)), in counts.
            let num = c as f64 * n;
            let den = rows[i] as f64 * cols[j] as f64;
            mi += c as f64 / n * (num / den).ln();
        }
    }
    Nmi {
        // Rounding can leave an independent table a hair below zero.
        value: (2.0 * mi.max(0.0)) / (hx + hy),
        degenerate: false,
    }
}

/// Categories left out of the average by default: the second document-type
/// category and the two coarser FDC levels.
pub fn default_exclusions() -> BTreeSet<Category> {
    [Category::DocTypeV2, Category::FdcLevel1, Category::FdcLevel2].into()
}

/// Mean NMI over unordered category pairs that avoid `exclusions`.
pub fn mean_nmi(
    tables: &BTreeMap<(Category, Category), ContingencyTable>,
    exclusions: &BTreeSet<Category>,
) -> Result<f64> {
    let mut seen = BTreeSet::new();
    let mut sum = 0.0;
    for (&(a, b), table) in tables {
        if a == b || exclusions.contains(&a) || exclusions.contains(&b) {
            continue;
        }
        if !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        sum += nmi(table).value;
    }
    if seen.is_empty() {
        return Err(Error::Empty("every category pair is excluded"));
    }
    Ok(sum / seen.len() as f64)
}

/// Symmetric NMI matrix over a fixed category order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmiMatrix {
    pub categories: Vec<Category>,
    pub matrix: Vec<Vec<Option<f64>>>,
    pub documents: Vec<Vec<u64>>,
    pub mean: Option<f64>,
    pub excluded: Vec<Category>,
}

/// Computes every pairwise table in one pass over `records`. Pairs with no
/// usable documents are `None`.
pub fn nmi_matrix(
    records: &[DocumentRecord],
    categories: &[Category],
    exclusions: &BTreeSet<Category>,
) -> NmiMatrix {
    let k = categories.len();
    let mut builders = vec![TableBuilder::default(); k * k];
    for r in records {
        for i in 0..k {
            for j in i..k {
                builders[i * k + j].add_record(r, categories[i], categories[j]);
            }
        }
    }
    let mut matrix = vec![vec![None; k]; k];
    let mut documents = vec![vec![0; k]; k];
    let mut tables = BTreeMap::new();
    for i in 0..k {
        for j in i..k {
            if let Ok(table) = builders[i * k + j].build() {
                let v = nmi(&table).value;
                matrix[i][j] = Some(v);
                matrix[j][i] = Some(v);
                documents[i][j] = table.total();
                documents[j][i] = table.total();
                if i != j {
                    tables.insert((categories[i], categories[j]), table);
                }
            }
        }
    }
    NmiMatrix {
        categories: categories.to_vec(),
        matrix,
        documents,
        mean: mean_nmi(&tables, exclusions).ok(),
        excluded: exclusions.iter().copied().collect(),
    }
}
