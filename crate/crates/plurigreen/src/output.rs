//! CSV rows and JSON documents. Floats are written with 17 significant
//! digits in both.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::Tolerances;
use crate::harness::{Diagnostics, RowOutcome, SweepReport, TargetKind};
use crate::schema::{ClassificationRecord, FamilyRecord, FrameRecord, PointRecord, Real};

pub const CSV_COLUMNS: [&str; 11] = [
    "eps",
    "z1_re",
    "z1_im",
    "z2_re",
    "z2_im",
    "lower",
    "upper_two_point",
    "upper_envelope",
    "exact_or_reference",
    "kind",
    "gap",
];

/// `{:.16e}` for finite values, `inf`, `-inf`, `nan` otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Value of the `kind` column.
pub fn row_kind(o: &RowOutcome) -> &'static str {
    match o {
        RowOutcome::Evaluated { target: Some(t), .. } => match t.kind {
            TargetKind::Exact => "exact",
            TargetKind::Reference => "reference",
        },
        RowOutcome::Evaluated { target: None, .. } => "none",
        RowOutcome::NearPole { .. } => "pole",
        RowOutcome::Failed(_) => "error",
    }
}

pub fn write_csv<W: io::Write>(report: &SweepReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    for r in &report.rows {
        let b = r.bounds();
        w.write_record([
            fmt_float(r.eps),
            fmt_float(r.z.c1.re),
            fmt_float(r.z.c1.im),
            fmt_float(r.z.c2.re),
            fmt_float(r.z.c2.im),
            opt(b.map(|b| b.lower)),
            opt(b.map(|b| b.upper_two_point)),
            opt(b.map(|b| b.upper_envelope)),
            opt(r.target().map(|t| t.value)),
            row_kind(&r.outcome).to_string(),
            opt(r.gap()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(report: &SweepReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct SigFormatter(PrettyFormatter<'static>);

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_float(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("records always serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json output is utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowError {
    pub eps_index: usize,
    pub point_index: usize,
    pub message: String,
}

/// JSON companion of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub family: FamilyRecord,
    pub frames: Vec<FrameRecord>,
    pub delta_log_ratios: Vec<Real>,
    pub test_points: Vec<PointRecord>,
    pub envelope_budget: usize,
    pub sup_resolution: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub classification: ClassificationRecord,
    pub diagnostics: Option<Diagnostics>,
    pub diagnostics_error: Option<String>,
    pub row_errors: Vec<RowError>,
}

impl SweepSummary {
    pub fn new(report: &SweepReport) -> Self {
        let cfg = &report.config;
        let (diagnostics, diagnostics_error) = match crate::harness::convergence_diagnostics(report) {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            family: (&cfg.family).into(),
            frames: report.frames.iter().map(|(_, f)| f.into()).collect(),
            delta_log_ratios: report.delta_log_ratios().into_iter().map(Real).collect(),
            test_points: cfg.test_points.iter().map(|&z| z.into()).collect(),
            envelope_budget: cfg.envelope_budget,
            sup_resolution: cfg.sup_resolution,
            seed: cfg.seed,
            tolerances: cfg.tolerances,
            classification: (&report.classification).into(),
            diagnostics,
            diagnostics_error,
            row_errors: report
                .rows
                .iter()
                .filter_map(|r| match &r.outcome {
                    RowOutcome::Failed(message) => Some(RowError {
                        eps_index: r.eps_index,
                        point_index: r.point_index,
                        message: message.clone(),
                    }),
                    _ => None,
                })
                .collect(),
        }
    }
}
