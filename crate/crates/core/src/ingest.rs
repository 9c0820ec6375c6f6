//! Known Exploited Vulnerabilities catalog ingestion.
//!
//! Columns are located by header name (case-insensitive, ignoring spaces,
//! underscores and dashes), so both the raw CISA export (`cveID`,
//! `vendorProject`, ...) and enriched variants with CVSS/severity columns
//! are accepted. Rows with unusable mandatory fields are collected as
//! rejects together with their line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, NormalizationRange};
use crate::error::{Error, Result};

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnRecord {
    pub cve_id: String,
    pub vendor_project: String,
    pub product: String,
    pub vulnerability_name: String,
    pub date_added: NaiveDate,
    pub short_description: String,
    pub required_action: String,
    pub due_date: Option<NaiveDate>,
    pub cvss_score: Option<f64>,
    pub cwe: String,
    pub attack_vector: String,
    pub complexity: String,
    pub severity: String,
}

/// A data row that could not be turned into a [`VulnRecord`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    /// 1-based line number in the source file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedCatalog {
    pub records: Vec<VulnRecord>,
    pub rejects: Vec<Reject>,
}

/// Record fields addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    CveId,
    VendorProject,
    Product,
    VulnerabilityName,
    DateAdded,
    ShortDescription,
    RequiredAction,
    DueDate,
    CvssScore,
    Cwe,
    AttackVector,
    Complexity,
    Severity,
}

impl Column {
    pub const ALL: [Column; 13] = [
        Column::CveId,
        Column::VendorProject,
        Column::Product,
        Column::VulnerabilityName,
        Column::DateAdded,
        Column::ShortDescription,
        Column::RequiredAction,
        Column::DueDate,
        Column::CvssScore,
        Column::Cwe,
        Column::AttackVector,
        Column::Complexity,
        Column::Severity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::CveId => "cve_id",
            Column::VendorProject => "vendor_project",
            Column::Product => "product",
            Column::VulnerabilityName => "vulnerability_name",
            Column::DateAdded => "date_added",
            Column::ShortDescription => "short_description",
            Column::RequiredAction => "required_action",
            Column::DueDate => "due_date",
            Column::CvssScore => "cvss_score",
            Column::Cwe => "cwe",
            Column::AttackVector => "attack_vector",
            Column::Complexity => "complexity",
            Column::Severity => "severity",
        }
    }

    /// Accepted header spellings after [`header_key`] folding.
    fn aliases(self) -> &'static [&'static str] {
        match self {
            Column::CveId => &["cveid", "cve"],
            Column::VendorProject => &["vendorproject", "vendor"],
            Column::Product => &["product"],
            Column::VulnerabilityName => &["vulnerabilityname"],
            Column::DateAdded => &["dateadded"],
            Column::ShortDescription => &["shortdescription"],
            Column::RequiredAction => &["requiredaction"],
            Column::DueDate => &["duedate"],
            Column::CvssScore => &["cvssscore", "cvss", "cvss3", "cvssv3"],
            Column::Cwe => &["cwe", "cwes"],
            Column::AttackVector => &["attackvector", "vector"],
            Column::Complexity => &["complexity", "attackcomplexity"],
            Column::Severity => &["severity"],
        }
    }

    fn mandatory(self) -> bool {
        matches!(
            self,
            Column::CveId | Column::VendorProject | Column::Product | Column::DateAdded
        )
    }

    /// String value of a categorical field.
    pub fn text(self, record: &VulnRecord) -> Result<&str> {
        Ok(match self {
            Column::CveId => &record.cve_id,
            Column::VendorProject => &record.vendor_project,
            Column::Product => &record.product,
            Column::VulnerabilityName => &record.vulnerability_name,
            Column::ShortDescription => &record.short_description,
            Column::RequiredAction => &record.required_action,
            Column::Cwe => &record.cwe,
            Column::AttackVector => &record.attack_vector,
            Column::Complexity => &record.complexity,
            Column::Severity => &record.severity,
            Column::DateAdded | Column::DueDate | Column::CvssScore => {
                return Err(Error::Usage(format!(
                    "column {} is not categorical",
                    self.name()
                )))
            }
        })
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = header_key(s);
        Column::ALL
            .into_iter()
            .find(|c| header_key(c.name()) == key || c.aliases().contains(&key.as_str()))
            .ok_or_else(|| Error::Usage(format!("unknown column '{s}'")))
    }
}

fn header_key(h: &str) -> String {
    h.trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    let s = raw.trim();
    let s = match s.char_indices().nth(10) {
        Some((i, 'T' | ' ')) => &s[..i],
        _ => s,
    };
    ["%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d"]
        .iter()
        .find_map(|fmt| NaiveDate::parse_from_str(s, fmt).ok())
}

fn valid_cve_id(id: &str) -> bool {
    let mut parts = id.split('-');
    matches!(
        (parts.next(), parts.next(), parts.next(), parts.next()),
        (Some("CVE"), Some(year), Some(seq), None)
            if year.len() == 4
                && year.bytes().all(|b| b.is_ascii_digit())
                && seq.len() >= 4
                && seq.bytes().all(|b| b.is_ascii_digit())
    )
}

/// Reads a catalog CSV from disk.
pub fn parse_kev_csv(path: impl AsRef<Path>) -> Result<ParsedCatalog> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_kev_reader(file)
}

/// Reads a catalog CSV from any reader.
pub fn parse_kev_reader(reader: impl std::io::Read) -> Result<ParsedCatalog> {
    let mut csv = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let mut positions: BTreeMap<Column, usize> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        let key = header_key(h);
        if let Some(col) = Column::ALL
            .into_iter()
            .find(|c| c.aliases().contains(&key.as_str()))
        {
            positions.entry(col).or_insert(i);
        }
    }
    let missing: Vec<&str> = Column::ALL
        .into_iter()
        .filter(|c| c.mandatory() && !positions.contains_key(c))
        .map(Column::name)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Ingest(format!(
            "missing mandatory columns: {}",
            missing.join(", ")
        )));
    }

    let mut out = ParsedCatalog::default();
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match record_from_row(&row, &positions) {
            Ok(record) => out.records.push(record),
            Err(reason) => out.rejects.push(Reject { line, reason }),
        }
    }
    Ok(out)
}

fn record_from_row(
    row: &csv::StringRecord,
    positions: &BTreeMap<Column, usize>,
) -> std::result::Result<VulnRecord, String> {
    let field = |c: Column| -> &str {
        positions
            .get(&c)
            .and_then(|&i| row.get(i))
            .map_or("", str::trim)
    };
    for col in [
        Column::CveId,
        Column::VendorProject,
        Column::Product,
        Column::DateAdded,
    ] {
        if row.get(positions[&col]).is_none() {
            return Err(format!("row is too short to contain {col}"));
        }
        if field(col).is_empty() {
            return Err(format!("empty {col}"));
        }
    }
    let cve_id = field(Column::CveId);
    if !valid_cve_id(cve_id) {
        return Err(format!("malformed cve_id '{cve_id}'"));
    }
    let date_added = parse_date(field(Column::DateAdded))
        .ok_or_else(|| format!("malformed date_added '{}'", field(Column::DateAdded)))?;
    let due_date = match field(Column::DueDate) {
        "" => None,
        raw => Some(parse_date(raw).ok_or_else(|| format!("malformed due_date '{raw}'"))?),
    };
    let cvss_score = match field(Column::CvssScore) {
        "" => None,
        raw => {
            let v: f64 = raw
                .parse()
                .map_err(|_| format!("malformed cvss_score '{raw}'"))?;
            if !(0.0..=10.0).contains(&v) {
                return Err(format!("cvss_score {v} outside [0, 10]"));
            }
            Some(v)
        }
    };
    Ok(VulnRecord {
        cve_id: cve_id.to_string(),
        vendor_project: field(Column::VendorProject).to_string(),
        product: field(Column::Product).to_string(),
        vulnerability_name: field(Column::VulnerabilityName).to_string(),
        date_added,
        short_description: field(Column::ShortDescription).to_string(),
        required_action: field(Column::RequiredAction).to_string(),
        due_date,
        cvss_score,
        cwe: field(Column::Cwe).to_string(),
        attack_vector: field(Column::AttackVector).to_string(),
        complexity: field(Column::Complexity).to_string(),
        severity: field(Column::Severity).to_string(),
    })
}

/// Records whose `date_added` falls within calendar `year`.
pub fn filter_year(records: &[VulnRecord], year: i32) -> Vec<VulnRecord> {
    records
        .iter()
        .filter(|r| r.date_added.year() == year)
        .cloned()
        .collect()
}

/// Category-to-integer mapping for one column. Codes follow byte-wise
/// lexicographic order of the category strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelEncoding {
    pub column: String,
    pub categories: Vec<String>,
}

impl LabelEncoding {
    pub fn fit<'a>(column: &str, values: impl IntoIterator<Item = &'a str>) -> Self {
        let mut categories: Vec<String> = values.into_iter().map(str::to_string).collect();
        categories.sort();
        categories.dedup();
        Self {
            column: column.to_string(),
            categories,
        }
    }

    pub fn code_of(&self, category: &str) -> Option<usize> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(category))
            .ok()
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

/// Label-encodes the given categorical columns into an `M x columns.len()`
/// integer-valued dataset.
pub fn label_encode(
    records: &[VulnRecord],
    columns: &[Column],
) -> Result<(Dataset, Vec<LabelEncoding>)> {
    if records.is_empty() {
        return Err(Error::Data("no records to encode".into()));
    }
    let mut encodings = Vec::with_capacity(columns.len());
    for &col in columns {
        let values = records
            .iter()
            .map(|r| col.text(r))
            .collect::<Result<Vec<_>>>()?;
        encodings.push(LabelEncoding::fit(col.name(), values));
    }
    let mut flat = Vec::with_capacity(records.len() * columns.len());
    for r in records {
        for (&col, enc) in columns.iter().zip(&encodings) {
            let code = enc.code_of(col.text(r)?).expect("category fitted above");
            flat.push(code as f64);
        }
    }
    Ok((
        Dataset::from_flat(records.len(), columns.len(), flat)?,
        encodings,
    ))
}

/// Per-column affine map of `[min, max]` onto `[range.lo, range.hi]`.
///
/// Constant columns map to `range.lo`; their indices are returned alongside
/// the normalized data.
pub fn min_max_normalize(
    data: &Dataset,
    range: NormalizationRange,
) -> Result<(Dataset, Vec<usize>)> {
    let n = data.n_cols();
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            data.rows()
                .map(|r| r[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
        })
        .collect();
    let constant: Vec<usize> = (0..n).filter(|&j| bounds[j].0 == bounds[j].1).collect();
    for &j in &constant {
        log::warn!("column {j} is constant; normalizing it to {}", range.lo);
    }
    let mut flat = Vec::with_capacity(data.n_rows() * n);
    for row in data.rows() {
        for (j, &v) in row.iter().enumerate() {
            let (min, max) = bounds[j];
            let scaled = if max > min {
                let t = (v - min) / (max - min);
                // endpoints land exactly on lo and hi
                (range.lo * (1.0 - t) + range.hi * t).clamp(range.lo, range.hi)
            } else {
                range.lo
            };
            flat.push(scaled);
        }
    }
    Ok((Dataset::from_flat(data.n_rows(), n, flat)?, constant))
}

/// Vendor, product and severity make-up of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub size: usize,
    /// `(vendor, count)`, most frequent first, ties in lexicographic order.
    pub top_vendors: Vec<(String, usize)>,
    pub top_products: Vec<(String, usize)>,
    /// Severity label counts; blank severities count as `unknown`.
    pub severity_histogram: BTreeMap<String, usize>,
}

fn ranked(counts: BTreeMap<&str, usize>) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(k, c)| (k.to_string(), c))
        .collect();
    // BTreeMap order is lexicographic; a stable sort keeps it among ties
    v.sort_by_key(|e| std::cmp::Reverse(e.1));
    v
}

/// Builds one profile per cluster id in `0..k`.
pub fn cluster_profile(
    records: &[VulnRecord],
    assignments: &[usize],
    k: usize,
) -> Result<Vec<ClusterProfile>> {
    if records.len() != assignments.len() {
        return Err(Error::Usage(format!(
            "{} assignments for {} records",
            assignments.len(),
            records.len()
        )));
    }
    if let Some(&a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::Usage(format!(
            "assignment {a} out of range for k={k}"
        )));
    }
    (0..k)
        .map(|cluster_id| {
            let mut vendors = BTreeMap::new();
            let mut products = BTreeMap::new();
            let mut severity = BTreeMap::new();
            let mut size = 0;
            for (r, _) in records
                .iter()
                .zip(assignments)
                .filter(|(_, &a)| a == cluster_id)
            {
                size += 1;
                *vendors.entry(r.vendor_project.as_str()).or_insert(0) += 1;
                *products.entry(r.product.as_str()).or_insert(0) += 1;
                let label = if r.severity.is_empty() {
                    "unknown"
                } else {
                    r.severity.as_str()
                };
                *severity.entry(label.to_string()).or_insert(0) += 1;
            }
            Ok(ClusterProfile {
                cluster_id,
                size,
                top_vendors: ranked(vendors),
                top_products: ranked(products),
                severity_histogram: severity,
            })
        })
        .collect()
}
