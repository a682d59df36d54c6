//! Samples, active coordinate sets and the coordinate-wise dominance order.
//!
//! Indices are 0-based in the API. Files and user-facing text are 1-based;
//! the conversion happens at the I/O boundary only.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bitset::BitMatrix;
use crate::error::{arg, Error, Result};

/// Which of the two observation models generated the labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `Y = f(X) + W`; labels are real.
    NoisyOutput,
    /// `Y = f(X + W)`; labels are binary.
    NoisyInput,
}

impl NoiseModel {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "output" | "noisy-output" | "noisy_output" => Ok(Self::NoisyOutput),
            "input" | "noisy-input" | "noisy_input" => Ok(Self::NoisyInput),
            other => arg(format!("unknown noise model '{other}' (expected 'output' or 'input')")),
        }
    }
}

/// `n` samples of `d` features with one label each.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    noise_model: NoiseModel,
    sparsity_hint: Option<usize>,
}

impl Dataset {
    /// Build a dataset from row vectors, validating labels against the noise model:
    /// binary labels for `NoisyInput`, labels in `[0, 1]` for `NoisyOutput`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>, noise_model: NoiseModel) -> Result<Self> {
        let ds = Self::from_rows(rows, labels, noise_model)?;
        ds.check_label_range()?;
        Ok(ds)
    }

    /// Like [`Dataset::new`] but lets `NoisyOutput` labels leave `[0, 1]`.
    ///
    /// The synthetic anchor generator adds unclipped Gaussian noise to a binary
    /// signal, so its labels routinely fall outside the unit interval.
    pub fn new_unbounded(rows: Vec<Vec<f64>>, labels: Vec<f64>, noise_model: NoiseModel) -> Result<Self> {
        let ds = Self::from_rows(rows, labels, noise_model)?;
        if noise_model == NoiseModel::NoisyInput {
            ds.check_label_range()?;
        }
        Ok(ds)
    }

    fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<f64>, noise_model: NoiseModel) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return arg("dataset must contain at least one sample");
        }
        let d = rows[0].len();
        if d == 0 {
            return arg("dataset must have at least one feature");
        }
        if labels.len() != n {
            return arg(format!("{} label(s) for {n} sample(s)", labels.len()));
        }
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return arg(format!("sample {} has {} features, expected {d}", i + 1, row.len()));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return arg(format!("sample {} has a non-finite feature {v}", i + 1));
            }
            features.extend(row);
        }
        if let Some(i) = labels.iter().position(|y| !y.is_finite()) {
            return arg(format!("label of sample {} is not finite", i + 1));
        }
        Ok(Self { n, d, features, labels, noise_model, sparsity_hint: None })
    }

    fn check_label_range(&self) -> Result<()> {
        for (i, &y) in self.labels.iter().enumerate() {
            let ok = match self.noise_model {
                NoiseModel::NoisyInput => y == 0.0 || y == 1.0,
                NoiseModel::NoisyOutput => (0.0..=1.0).contains(&y),
            };
            if !ok {
                let want = match self.noise_model {
                    NoiseModel::NoisyInput => "0 or 1 under the noisy-input model",
                    NoiseModel::NoisyOutput => "in [0, 1] under the noisy-output model",
                };
                return arg(format!("label {y} of sample {} must be {want}", i + 1));
            }
        }
        Ok(())
    }

    pub fn with_sparsity_hint(mut self, s: usize) -> Self {
        self.sparsity_hint = Some(s);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Row-major `n x d` feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.noise_model
    }

    pub fn sparsity_hint(&self) -> Option<usize> {
        self.sparsity_hint
    }

    pub(crate) fn require_model(&self, model: NoiseModel, what: &str) -> Result<()> {
        if self.noise_model != model {
            return Err(Error::Contract(format!("{what} requires {model:?} data, got {:?}", self.noise_model)));
        }
        Ok(())
    }

    /// The samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return arg("cannot select an empty sample set");
        }
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n {
                return arg(format!("sample index {i} out of range"));
            }
            features.extend_from_slice(self.x(i));
            labels.push(self.labels[i]);
        }
        Ok(Self { n: indices.len(), features, labels, ..self.clone() })
    }

    /// The features at `cols`, in that order, with the same labels.
    pub fn columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return arg("cannot select an empty column set");
        }
        if let Some(&k) = cols.iter().find(|&&k| k >= self.d) {
            return arg(format!("column {} out of range (d = {})", k + 1, self.d));
        }
        let features = (0..self.n).flat_map(|i| cols.iter().map(move |&k| self.features[i * self.d + k])).collect();
        Ok(Self { d: cols.len(), features, ..self.clone() })
    }

    /// Parse a CSV with header `x1,...,xd,y`.
    pub fn read_csv<R: Read>(reader: R, noise_model: NoiseModel) -> Result<Self> {
        let (header, rows) = read_numeric_csv(reader)?;
        let cols = header.len();
        if cols < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "need at least one feature column and a label column".into(),
            });
        }
        for (k, name) in header[..cols - 1].iter().enumerate() {
            if name != &format!("x{}", k + 1) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("column {} must be named x{}, found '{name}'", k + 1, k + 1),
                });
            }
        }
        if header[cols - 1] != "y" {
            return Err(Error::Parse {
                line: 1,
                message: format!("last column must be named y, found '{}'", header[cols - 1]),
            });
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 2, message: "no samples".into() });
        }
        let mut xs = Vec::with_capacity(rows.len());
        let mut ys = Vec::with_capacity(rows.len());
        for (line, mut row) in rows {
            let y = row.pop().expect("row width checked");
            let ok = match noise_model {
                NoiseModel::NoisyInput => y == 0.0 || y == 1.0,
                NoiseModel::NoisyOutput => (0.0..=1.0).contains(&y),
            };
            if !ok {
                return Err(Error::Parse { line, message: format!("label {y} not allowed under {noise_model:?}") });
            }
            xs.push(row);
            ys.push(y);
        }
        Self::new(xs, ys, noise_model)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.d).map(|k| format!("x{k}")).chain(["y".to_string()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n {
            let row: Vec<String> = self.x(i).iter().chain([&self.labels[i]]).map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Rows of a numeric CSV, each tagged with its 1-based line number.
pub type NumericRows = Vec<(usize, Vec<f64>)>;

/// Read a header plus numeric rows; every record must match the header width.
pub fn read_numeric_csv<R: Read>(reader: R) -> Result<(Vec<String>, NumericRows)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let mut row = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 =
                field.parse().map_err(|_| Error::Parse { line, message: format!("'{field}' is not a number") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("'{field}' is not finite") });
            }
            row.push(v);
        }
        rows.push((line, row));
    }
    Ok((header, rows))
}

/// A non-empty sorted set of distinct coordinate indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ActiveSet(Vec<usize>);

impl ActiveSet {
    /// Validate 0-based coordinate indices against dimension `d`.
    pub fn new(mut indices: Vec<usize>, d: usize) -> Result<Self> {
        if indices.is_empty() {
            return arg("active set must contain at least one coordinate (s >= 1)");
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return arg("active set contains a repeated coordinate");
        }
        if let Some(&k) = indices.last().filter(|&&k| k >= d) {
            return arg(format!("coordinate {} out of range 1..={d}", k + 1));
        }
        Ok(Self(indices))
    }

    /// Build from 1-based indices as they appear in files and on the command line.
    pub fn from_one_based(indices: &[usize], d: usize) -> Result<Self> {
        if indices.contains(&0) {
            return arg("coordinate indices are 1-based");
        }
        Self::new(indices.iter().map(|k| k - 1).collect(), d)
    }

    pub fn full(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        match self.0.last() {
            Some(&k) if k >= d => arg(format!("active coordinate {} exceeds dimension {d}", k + 1)),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for ActiveSet {
    type Error = String;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, String> {
        Self::new(v, usize::MAX).map_err(|e| e.to_string())
    }
}

impl From<ActiveSet> for Vec<usize> {
    fn from(a: ActiveSet) -> Self {
        a.0
    }
}

impl fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn check_pair(ds: &Dataset, i: usize, j: usize) -> Result<()> {
    if i >= ds.n() || j >= ds.n() {
        return arg(format!("sample index out of range (n = {})", ds.n()));
    }
    Ok(())
}

/// `q(i, j, k)`: 1 when sample `i` strictly exceeds sample `j` in coordinate `k`.
pub fn q_indicator(ds: &Dataset, i: usize, j: usize, k: usize) -> Result<u8> {
    check_pair(ds, i, j)?;
    if k >= ds.d() {
        return arg(format!("coordinate index out of range (d = {})", ds.d()));
    }
    Ok(u8::from(ds.x(i)[k] > ds.x(j)[k]))
}

#[inline]
pub(crate) fn dominates_on(a: &[f64], b: &[f64], active: &[usize]) -> bool {
    active.iter().all(|&k| a[k] <= b[k])
}

/// Whether `X_i` is below `X_j` on every active coordinate.
pub fn dominates(ds: &Dataset, i: usize, j: usize, active: &ActiveSet) -> Result<bool> {
    check_pair(ds, i, j)?;
    active.check_dim(ds.d())?;
    Ok(dominates_on(ds.x(i), ds.x(j), active.indices()))
}

/// The dominance preorder of a dataset restricted to an active set.
#[derive(Clone, Debug)]
pub struct ComparabilityRelation<'a> {
    data: &'a Dataset,
    active: ActiveSet,
    dominance: BitMatrix,
}

impl<'a> ComparabilityRelation<'a> {
    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    /// `X_i` is below `X_j` on the active coordinates.
    #[inline]
    pub fn dominance(&self, i: usize, j: usize) -> bool {
        self.dominance.get(i, j)
    }

    /// `q(i, j, k)` for any coordinate, not only active ones.
    pub fn strict_coord(&self, i: usize, j: usize, k: usize) -> Result<u8> {
        q_indicator(self.data, i, j, k)
    }

    /// Row `i` as a bitset of every `j` with `X_i` below `X_j`.
    pub fn successors(&self) -> &BitMatrix {
        &self.dominance
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }
}

/// Materialize the dominance relation for every ordered pair of samples.
pub fn build_comparability<'a>(ds: &'a Dataset, active: &ActiveSet) -> Result<ComparabilityRelation<'a>> {
    active.check_dim(ds.d())?;
    let n = ds.n();
    let mut dominance = BitMatrix::new(n, n);
    for i in 0..n {
        let xi = ds.x(i);
        for j in 0..n {
            if dominates_on(xi, ds.x(j), active.indices()) {
                dominance.set(i, j, true);
            }
        }
    }
    Ok(ComparabilityRelation { data: ds, active: active.clone(), dominance })
}
