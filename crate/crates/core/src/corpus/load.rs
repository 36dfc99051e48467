use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate_minimal_edit, Condition, EvaluationInstance, Gender, InvariantViolation,
    LanguagePair, VariantLabel,
};

/// Pairs whose variants differ in more than this share of tokens are flagged.
pub const NOT_MINIMAL_EDIT_RATIO: f64 = 0.5;

/// Input layouts understood by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// Tab-separated MT-GenEval export: `id lang_pair source feminine masculine`
    /// plus optional `context`, `subset`, `gender`, `condition`.
    MtGenEval,
    /// Tab-separated GATE export: `id lang_pair source feminine masculine`.
    Gate,
    /// Tab-separated mGeNTE export: `id lang_pair source gendered neutral`.
    MGente,
    /// One JSON object per line, fields as in [`EvaluationInstance`].
    Native,
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mtgeneval" => Ok(Schema::MtGenEval),
            "gate" => Ok(Schema::Gate),
            "mgente" => Ok(Schema::MGente),
            "native" => Ok(Schema::Native),
            other => Err(format!("unknown schema `{other}` (mtgeneval, gate, mgente, native)")),
        }
    }
}

impl Schema {
    pub fn as_str(self) -> &'static str {
        match self {
            Schema::MtGenEval => "mtgeneval",
            Schema::Gate => "gate",
            Schema::MGente => "mgente",
            Schema::Native => "native",
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: u64, field: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: instance `{id}`: {violation}")]
    Invariant { line: u64, id: String, violation: InvariantViolation },
}

impl CorpusError {
    pub fn line(&self) -> Option<u64> {
        match self {
            CorpusError::Io { .. } => None,
            CorpusError::Malformed { line, .. }
            | CorpusError::MissingField { line, .. }
            | CorpusError::DuplicateId { line, .. }
            | CorpusError::Invariant { line, .. } => Some(*line),
        }
    }
}

/// A non-fatal finding about a loaded instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u64,
    pub id: String,
    pub diff_ratio: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub instances: Vec<EvaluationInstance>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn load_dataset(path: &Path, schema: Schema) -> Result<Vec<EvaluationInstance>, CorpusError> {
    Ok(load_dataset_with_report(path, schema)?.instances)
}

/// Loads a dataset and also reports pairs that are not minimal edits.
pub fn load_dataset_with_report(path: &Path, schema: Schema) -> Result<LoadReport, CorpusError> {
    let file =
        File::open(path).map_err(|source| CorpusError::Io { path: path.to_owned(), source })?;
    read_dataset(BufReader::new(file), schema).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io { path: path.to_owned(), source },
        other => other,
    })
}

pub fn read_dataset<R: Read>(reader: R, schema: Schema) -> Result<LoadReport, CorpusError> {
    let rows = match schema {
        Schema::Native => read_native(reader)?,
        tabular => read_tsv(reader, tabular)?,
    };

    let mut seen = HashSet::new();
    let mut report = LoadReport::default();
    for (line, inst) in rows {
        inst.validate().map_err(|violation| CorpusError::Invariant {
            line,
            id: inst.id.clone(),
            violation,
        })?;
        if !seen.insert(inst.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: inst.id });
        }
        if inst.condition != Condition::AmbiguousNeutral {
            let [a, b] = inst.condition.labels();
            let diff = validate_minimal_edit(&inst.variants[&a], &inst.variants[&b]);
            if diff.diff_ratio > NOT_MINIMAL_EDIT_RATIO {
                report.diagnostics.push(Diagnostic {
                    line,
                    id: inst.id.clone(),
                    diff_ratio: diff.diff_ratio,
                    message: format!(
                        "not minimal-edit: {} of {} token positions differ",
                        diff.edits(),
                        (diff.edits() as f64 / diff.diff_ratio).round()
                    ),
                });
            }
        }
        report.instances.push(inst);
    }
    Ok(report)
}

fn read_native<R: Read>(reader: R) -> Result<Vec<(u64, EvaluationInstance)>, CorpusError> {
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|source| CorpusError::Io { path: PathBuf::new(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: EvaluationInstance = serde_json::from_str(&line).map_err(|e| {
            CorpusError::Malformed { line: line_no, message: e.to_string() }
        })?;
        rows.push((line_no, inst));
    }
    Ok(rows)
}

struct Row<'a> {
    line: u64,
    headers: &'a csv::StringRecord,
    record: csv::StringRecord,
}

impl Row<'_> {
    fn get(&self, field: &str) -> Option<&str> {
        let idx = self.headers.iter().position(|h| h == field)?;
        self.record.get(idx).map(str::trim).filter(|v| !v.is_empty())
    }

    fn require(&self, field: &str) -> Result<&str, CorpusError> {
        self.get(field)
            .ok_or_else(|| CorpusError::MissingField { line: self.line, field: field.to_string() })
    }

    fn metadata(&self, known: &[&str]) -> BTreeMap<String, serde_json::Value> {
        self.headers
            .iter()
            .zip(self.record.iter())
            .filter(|(h, _)| !known.contains(h))
            .map(|(h, v)| (h.to_string(), serde_json::Value::String(v.to_string())))
            .collect()
    }

    fn parse<T: FromStr<Err = String>>(&self, field: &str) -> Result<Option<T>, CorpusError> {
        self.get(field)
            .map(|v| v.parse().map_err(|message| CorpusError::Malformed { line: self.line, message }))
            .transpose()
    }
}

fn read_tsv<R: Read>(
    reader: R,
    schema: Schema,
) -> Result<Vec<(u64, EvaluationInstance)>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Malformed { line: 1, message: e.to_string() })?
        .clone();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = Row { line, headers: &headers, record };
        let inst = match schema {
            Schema::MtGenEval => mtgeneval_row(&row)?,
            Schema::Gate => fm_row(&row, Condition::AmbiguousFm, &["feminine", "masculine"])?,
            Schema::MGente => fm_row(&row, Condition::AmbiguousNeutral, &["neutral", "gendered"])?,
            Schema::Native => unreachable!("native records are not tabular"),
        };
        rows.push((line, inst));
    }
    Ok(rows)
}

const BASE_COLUMNS: [&str; 3] = ["id", "lang_pair", "source"];

fn fm_row(
    row: &Row<'_>,
    condition: Condition,
    columns: &[&str; 2],
) -> Result<EvaluationInstance, CorpusError> {
    let labels = condition.labels();
    let mut variants = BTreeMap::new();
    for (label, column) in labels.into_iter().zip(columns) {
        variants.insert(label, row.require(column)?.to_string());
    }
    let known: Vec<&str> = BASE_COLUMNS.iter().chain(columns.iter()).copied().collect();
    Ok(EvaluationInstance {
        id: row.require("id")?.to_string(),
        language_pair: row.parse::<LanguagePair>("lang_pair")?,
        source: row.require("source")?.to_string(),
        context: None,
        condition,
        variants,
        correct_variant: None,
        source_group: None,
        metadata: row.metadata(&known),
    })
}

fn parse_gender(row: &Row<'_>) -> Result<Option<Gender>, CorpusError> {
    match row.get("gender") {
        None => Ok(None),
        Some("female" | "feminine" | "F" | "f") => Ok(Some(Gender::F)),
        Some("male" | "masculine" | "M" | "m") => Ok(Some(Gender::M)),
        Some(other) => Err(CorpusError::Malformed {
            line: row.line,
            message: format!("unknown gender `{other}`"),
        }),
    }
}

/// MT-GenEval rows. Without an explicit `condition` column the condition follows the
/// subset: `counterfactual` rows are intra-sentential, `contextual` rows with a gender
/// label and context are extra-sentential, everything else is ambiguous with the
/// context dropped.
fn mtgeneval_row(row: &Row<'_>) -> Result<EvaluationInstance, CorpusError> {
    const KNOWN: [&str; 9] = [
        "id", "lang_pair", "source", "context", "feminine", "masculine", "subset", "gender",
        "condition",
    ];
    let gender = parse_gender(row)?;
    let context = row.get("context").map(str::to_string);
    let condition = match row.parse::<Condition>("condition")? {
        Some(c) => c,
        None => match (row.get("subset"), gender, &context) {
            (Some("counterfactual"), _, _) => Condition::UnambiguousIntra,
            (Some("contextual"), Some(_), Some(_)) => Condition::UnambiguousExtra,
            _ => Condition::AmbiguousFm,
        },
    };
    let context = match condition {
        Condition::UnambiguousExtra => context,
        _ => None,
    };
    let (correct_variant, source_group) = if condition.is_unambiguous() {
        let g = gender
            .ok_or_else(|| CorpusError::MissingField { line: row.line, field: "gender".into() })?;
        (Some(g.variant()), Some(g))
    } else {
        (None, None)
    };
    Ok(EvaluationInstance {
        id: row.require("id")?.to_string(),
        language_pair: row.parse::<LanguagePair>("lang_pair")?,
        source: row.require("source")?.to_string(),
        context,
        condition,
        variants: BTreeMap::from([
            (VariantLabel::F, row.require("feminine")?.to_string()),
            (VariantLabel::M, row.require("masculine")?.to_string()),
        ]),
        correct_variant,
        source_group,
        metadata: row.metadata(&KNOWN),
    })
}

/// Writes instances in the native line-delimited format.
pub fn write_native<W: Write>(instances: &[EvaluationInstance], mut out: W) -> io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
