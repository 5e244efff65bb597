use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::json::to_canonical_json;
use super::spec::ParsedSpec;
use super::RunConfig;
use crate::bohr_sommerfeld::BSFibreRecord;
use crate::error::{Error, Result};
use crate::quantisation::{quantise, DegreeEntry, DenseHolonomyWitness, Dispatch, QuantisationReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub dispatch: Dispatch,
    pub per_degree: BTreeMap<usize, DegreeEntry>,
    pub bs_fibres: Vec<BSFibreRecord>,
    pub convention_notes: Vec<String>,
    pub h0_witness: Option<DenseHolonomyWitness>,
    pub config_echo: RunConfig,
}

impl ReportDocument {
    pub fn new(report: QuantisationReport, cfg: &RunConfig) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            dispatch: report.dispatch,
            per_degree: report.per_degree,
            bs_fibres: report.bs_fibres,
            convention_notes: report.convention_notes,
            h0_witness: report.h0_witness,
            config_echo: cfg.clone(),
        }
    }
}

pub fn run_quantise(spec: &ParsedSpec, cfg: &RunConfig) -> Result<ReportDocument> {
    cfg.numerics().validate()?;
    let report = quantise(&spec.descriptor, &spec.window, &cfg.quantise_options())?;
    Ok(ReportDocument::new(report, cfg))
}

pub fn emit_report(doc: &ReportDocument) -> String {
    to_canonical_json(doc)
}

pub fn parse_report(text: &str) -> Result<ReportDocument> {
    let doc: ReportDocument =
        serde_json::from_str(text).map_err(|e| Error::schema("$", format!("bad report: {e}")))?;
    if doc.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::schema(
            "$.schema_version",
            format!("unsupported report version {}", doc.schema_version),
        ));
    }
    Ok(doc)
}

/// One BS record per line: `label...,regularity,fibre_dim`.
pub fn bs_csv(records: &[BSFibreRecord]) -> Result<String> {
    let width = records.iter().map(|r| r.label.len()).max().unwrap_or(0);
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let mut header: Vec<String> = (1..=width).map(|j| format!("label{j}")).collect();
    header.extend(["regularity".into(), "fibre_dim".into()]);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = r.label.iter().map(|l| l.csv_field()).collect();
        row.push(r.regularity.tag());
        row.push(r.fibre_dim.to_string());
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}
