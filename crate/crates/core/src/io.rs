//! Output documents and their JSON / CSV encodings.
//!
//! Every JSON document is wrapped in an [`Envelope`] carrying
//! `"schema": "ctxfer/1"` and the producing command. Complex numbers are
//! `{"re": .., "im": ..}` in JSON and `<name>_re`, `<name>_im` column pairs in
//! CSV. CSV numbers are printed with 12 significant digits; JSON numbers are
//! the shortest representation that parses back to the same double.

use serde::{Deserialize, Serialize};

use crate::contextuality::{ContextualityReport, ScanResult};
use crate::error::Result;
use crate::hilbert::{CVec3, DensityMatrix, C64};
use crate::interferometer::{contexts, InterferometerConfig, PathId, PathVectorTable};
use crate::measurement::{CountRecord, ProbeExtrapolation, ProbeMode};
use crate::states::ProbabilityTable;
use crate::weak::WeakReport;

pub const SCHEMA: &str = "ctxfer/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

fn vec_doc(v: &CVec3) -> [JsonComplex; 3] {
    v.0.map(JsonComplex::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub command: String,
    pub data: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, data: T) -> Self {
        Envelope {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            data,
        }
    }
}

/// A density matrix file, as accepted by `--state @file.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub density: [[JsonComplex; 3]; 3],
}

impl DensityDoc {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        DensityDoc {
            schema: Some(SCHEMA.to_string()),
            density: rho.matrix().0.map(|row| row.map(JsonComplex::from)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub r1: f64,
    pub r2: f64,
    pub rf: f64,
    pub rs1: f64,
    pub rs2: f64,
}

impl From<&InterferometerConfig> for ConfigDoc {
    fn from(c: &InterferometerConfig) -> Self {
        ConfigDoc {
            r1: c.r1,
            r2: c.r2,
            rf: c.rf,
            rs1: c.rs1,
            rs2: c.rs2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDoc {
    pub path: String,
    pub outer: bool,
    pub vector: [JsonComplex; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitterDoc {
    pub name: String,
    pub inputs: [String; 2],
    pub outputs: [String; 2],
    pub reflectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildDoc {
    pub config: ConfigDoc,
    pub paths: Vec<PathDoc>,
    pub splitters: Vec<SplitterDoc>,
    pub contexts: Vec<[String; 3]>,
    /// `|1_out>, |2_out>, |3_out>`.
    pub outputs: [[JsonComplex; 3]; 3],
    pub closure_residual: f64,
}

impl BuildDoc {
    pub fn new(table: &PathVectorTable) -> Self {
        BuildDoc {
            config: ConfigDoc::from(&table.config),
            paths: PathId::ALL
                .iter()
                .map(|&p| PathDoc {
                    path: p.label().to_string(),
                    outer: p.is_outer(),
                    vector: vec_doc(table.vector(p)),
                })
                .collect(),
            splitters: table
                .splitters
                .iter()
                .map(|bs| SplitterDoc {
                    name: bs.name.to_string(),
                    inputs: [bs.inputs.0.to_string(), bs.inputs.1.to_string()],
                    outputs: [bs.outputs.0.to_string(), bs.outputs.1.to_string()],
                    reflectivity: bs.reflectivity,
                })
                .collect(),
            contexts: contexts()
                .iter()
                .map(|c| c.paths().map(|p| p.to_string()))
                .collect(),
            outputs: table.outputs.map(|v| vec_doc(&v)),
            closure_residual: table.closure_residual(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub path: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbsDoc {
    pub config: ConfigDoc,
    pub probabilities: Vec<ProbabilityRow>,
}

impl ProbsDoc {
    pub fn new(config: &InterferometerConfig, table: &ProbabilityTable) -> Self {
        ProbsDoc {
            config: config.into(),
            probabilities: table
                .iter()
                .map(|(p, v)| ProbabilityRow {
                    path: p.to_string(),
                    probability: v,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub path: String,
    pub outcome: String,
    /// `null` when the postselection is impossible.
    pub weak_value: Option<JsonComplex>,
    pub kd: JsonComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub outcome: String,
    pub splitter: String,
    pub residual: Option<JsonComplex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakDoc {
    pub config: ConfigDoc,
    pub outcome_probabilities: Vec<ProbabilityRow>,
    pub rows: Vec<WeakRow>,
    pub continuity: Vec<ContinuityRow>,
    /// Residuals of the two `f`-current relations through `D1` and `D2`.
    pub f_current_residuals: [JsonComplex; 2],
}

impl WeakDoc {
    pub fn new(table: &PathVectorTable, report: &WeakReport) -> Self {
        let mut continuity = Vec::new();
        for (k, o) in PathId::PORTS.iter().enumerate() {
            for (s, bs) in table.splitters.iter().enumerate() {
                continuity.push(ContinuityRow {
                    outcome: o.to_string(),
                    splitter: bs.name.to_string(),
                    residual: report.continuity[k].map(|r| r[s].into()),
                });
            }
        }
        WeakDoc {
            config: (&table.config).into(),
            outcome_probabilities: PathId::PORTS
                .iter()
                .zip(report.outcome_probabilities.iter())
                .map(|(o, &p)| ProbabilityRow {
                    path: o.to_string(),
                    probability: p,
                })
                .collect(),
            rows: report
                .entries
                .iter()
                .map(|e| WeakRow {
                    path: e.path.to_string(),
                    outcome: e.outcome.to_string(),
                    weak_value: e.weak_value.map(Into::into),
                    kd: e.kd.into(),
                })
                .collect(),
            continuity,
            f_current_residuals: report.dcont.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdRow {
    pub path: String,
    pub outcome: String,
    pub kd: JsonComplex,
    pub reconstruction_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdDoc {
    pub config: ConfigDoc,
    pub rows: Vec<KdRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub path: String,
    pub n: String,
    pub o: String,
    pub value: JsonComplex,
    /// Same coefficient from differences of conditional currents, where
    /// available (`(n, o)` = `(3, 1)` or `(3, 2)`).
    pub via_current_difference: Option<JsonComplex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceDoc {
    pub config: ConfigDoc,
    pub rows: Vec<CoherenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub config: ConfigDoc,
    pub p_d1: f64,
    pub p_d2: f64,
    pub p_f: f64,
    pub margin: f64,
    pub decomposition_terms: Option<[f64; 3]>,
    pub identity_residual: Option<f64>,
    pub violated: bool,
}

impl CheckDoc {
    pub fn new(config: &InterferometerConfig, probs: &ProbabilityTable, rep: &ContextualityReport) -> Self {
        CheckDoc {
            config: config.into(),
            p_d1: probs.get(PathId::D1),
            p_d2: probs.get(PathId::D2),
            p_f: probs.get(PathId::F),
            margin: rep.margin,
            decomposition_terms: rep.decomposition_terms,
            identity_residual: rep.identity_residual,
            violated: rep.violated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r1: f64,
    pub r2: f64,
    pub pf_closed: f64,
    pub pf_propagated: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDoc {
    pub r1_grid: Vec<f64>,
    pub r2_grid: Vec<f64>,
    pub cells: Vec<ScanRow>,
    pub argmax: ScanRow,
}

impl From<&ScanResult> for ScanDoc {
    fn from(s: &ScanResult) -> Self {
        let row = |c: &crate::contextuality::ScanCell| ScanRow {
            r1: c.r1,
            r2: c.r2,
            pf_closed: c.pf_closed,
            pf_propagated: c.pf_propagated,
            delta: c.delta(),
        };
        ScanDoc {
            r1_grid: s.r1_grid.clone(),
            r2_grid: s.r2_grid.clone(),
            cells: s.cells.iter().map(row).collect(),
            argmax: row(s.max_cell()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub path: String,
    pub count: u64,
    pub frequency: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDoc {
    pub config: ConfigDoc,
    pub context: [String; 3],
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<CountRow>,
}

impl SampleDoc {
    pub fn new(config: &InterferometerConfig, rec: &CountRecord, probs: [f64; 3]) -> Self {
        SampleDoc {
            config: config.into(),
            context: rec.context.paths().map(|p| p.to_string()),
            shots: rec.shots,
            seed: rec.seed,
            counts: rec
                .context
                .paths()
                .iter()
                .zip(rec.counts.iter().zip(probs))
                .map(|(p, (&c, prob))| CountRow {
                    path: p.to_string(),
                    count: c,
                    frequency: c as f64 / rec.shots as f64,
                    probability: prob,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub estimate: JsonComplex,
    pub postselection_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDoc {
    pub config: ConfigDoc,
    pub path: String,
    pub outcome: String,
    /// `"exact"` or `"sampled"`.
    pub mode: String,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub probes: Vec<ProbeRow>,
    pub extrapolated: JsonComplex,
    pub weak_value: JsonComplex,
}

impl ProbeDoc {
    pub fn new(config: &InterferometerConfig, fit: &ProbeExtrapolation, mode: ProbeMode, weak_value: C64) -> Self {
        let first = &fit.probes[0];
        let (mode_name, shots, seed) = match mode {
            ProbeMode::Exact => ("exact", None, None),
            ProbeMode::Sampled { shots, seed } => ("sampled", Some(shots), Some(seed)),
        };
        ProbeDoc {
            config: config.into(),
            path: first.path.to_string(),
            outcome: first.outcome.to_string(),
            mode: mode_name.to_string(),
            shots,
            seed,
            probes: fit
                .probes
                .iter()
                .map(|p| ProbeRow {
                    epsilon: p.epsilon,
                    estimate: p.estimate.into(),
                    postselection_probability: p.postselection_probability,
                })
                .collect(),
            extrapolated: fit.intercept.into(),
            weak_value: weak_value.into(),
        }
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" { "0".to_string() } else { s }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// A document that can be flattened to a CSV table.
pub trait Tabular {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn cplx(z: &JsonComplex) -> [String; 2] {
    [fmt_sig(z.re), fmt_sig(z.im)]
}

fn opt_cplx(z: &Option<JsonComplex>) -> [String; 2] {
    match z {
        Some(z) => cplx(z),
        None => ["undefined".to_string(), "undefined".to_string()],
    }
}

impl Tabular for BuildDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "outer", "v1_re", "v1_im", "v2_re", "v2_im", "v3_re", "v3_im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.paths
            .iter()
            .map(|p| {
                let mut row = vec![p.path.clone(), p.outer.to_string()];
                row.extend(p.vector.iter().flat_map(cplx));
                row
            })
            .collect()
    }
}

impl Tabular for ProbsDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "probability"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.probabilities
            .iter()
            .map(|r| vec![r.path.clone(), fmt_sig(r.probability)])
            .collect()
    }
}

impl Tabular for WeakDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "outcome", "value_re", "value_im", "kd_re", "kd_im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.path.clone(), r.outcome.clone()];
                row.extend(opt_cplx(&r.weak_value));
                row.extend(cplx(&r.kd));
                row
            })
            .collect()
    }
}

impl Tabular for KdDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "outcome", "value_re", "value_im", "reconstruction_residual"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.path.clone(), r.outcome.clone()];
                row.extend(cplx(&r.kd));
                row.push(fmt_sig(r.reconstruction_residual));
                row
            })
            .collect()
    }
}

impl Tabular for CoherenceDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "n", "o", "value_re", "value_im", "via_difference_re", "via_difference_im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.path.clone(), r.n.clone(), r.o.clone()];
                row.extend(cplx(&r.value));
                match &r.via_current_difference {
                    Some(z) => row.extend(cplx(z)),
                    None => row.extend([String::new(), String::new()]),
                }
                row
            })
            .collect()
    }
}

impl Tabular for CheckDoc {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "p_d1",
            "p_d2",
            "p_f",
            "margin",
            "term_1",
            "term_2",
            "term_3",
            "identity_residual",
            "violated",
        ]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut row = vec![
            fmt_sig(self.p_d1),
            fmt_sig(self.p_d2),
            fmt_sig(self.p_f),
            fmt_sig(self.margin),
        ];
        match self.decomposition_terms {
            Some(t) => row.extend(t.iter().map(|&x| fmt_sig(x))),
            None => row.extend(std::iter::repeat_n("undefined".to_string(), 3)),
        }
        row.push(
            self.identity_residual
                .map(fmt_sig)
                .unwrap_or_else(|| "undefined".into()),
        );
        row.push(self.violated.to_string());
        vec![row]
    }
}

impl Tabular for ScanDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["r1", "r2", "pf_closed", "pf_propagated", "delta"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                [c.r1, c.r2, c.pf_closed, c.pf_propagated, c.delta]
                    .iter()
                    .map(|&x| fmt_sig(x))
                    .collect()
            })
            .collect()
    }
}

impl Tabular for SampleDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["path", "count", "frequency", "probability"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.counts
            .iter()
            .map(|c| {
                vec![
                    c.path.clone(),
                    c.count.to_string(),
                    fmt_sig(c.frequency),
                    fmt_sig(c.probability),
                ]
            })
            .collect()
    }
}

impl Tabular for ProbeDoc {
    fn header(&self) -> Vec<&'static str> {
        vec!["kind", "epsilon", "estimate_re", "estimate_im"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .probes
            .iter()
            .map(|p| {
                let mut row = vec!["probe".to_string(), fmt_sig(p.epsilon)];
                row.extend(cplx(&p.estimate));
                row
            })
            .collect();
        let mut row = vec!["extrapolated".to_string(), "0".to_string()];
        row.extend(cplx(&self.extrapolated));
        rows.push(row);
        let mut row = vec!["weak_value".to_string(), String::new()];
        row.extend(cplx(&self.weak_value));
        rows.push(row);
        rows
    }
}

pub fn to_csv<T: Tabular>(doc: &T) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(doc.header())?;
    for row in doc.rows() {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn to_json<T: Serialize>(command: &str, doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope::new(command, doc))?;
    s.push('\n');
    Ok(s)
}

/// Renders `doc` in the requested format.
pub fn render<T: Serialize + Tabular>(command: &str, doc: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(command, doc),
        Format::Csv => to_csv(doc),
    }
}
