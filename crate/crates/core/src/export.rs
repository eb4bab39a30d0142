//! Serialization of library artifacts: JSON, CSV and the origami text format.
//! Rationals are written as `"p/q"` (or `"p"` when integral).

use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::arith::{fiber_invariants, format_rational, sv_closed_form, FiberInvariants, SvKind};
use crate::counting::SvReport;
use crate::error::{domain, Error, Result};
use crate::Origami;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    OrigamiText,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "origami-text" | "text" => Ok(Format::OrigamiText),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

pub fn ser_rational64<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational64_text(r))
}

pub fn rational64_text(r: &Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(x: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(x).map_err(|e| Error::Internal(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct OrigamiJson {
    n: usize,
    unit: String,
    h: String,
    v: String,
    /// `(label, square)` pairs.
    marks: Vec<(u32, usize)>,
}

pub fn origami(o: &Origami, format: Format) -> Result<String> {
    match format {
        Format::OrigamiText => Ok(o.to_text()),
        Format::Json => to_json(&OrigamiJson {
            n: o.n_squares(),
            unit: rational64_text(&o.unit()),
            h: o.h().to_string(),
            v: o.v().to_string(),
            marks: o.marks().to_vec(),
        }),
        Format::Csv => domain("origamis have no CSV encoding"),
    }
}

fn csv_string<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(format!("csv: {e}")))
}

#[derive(Serialize)]
struct SampleRow {
    #[serde(rename = "T")]
    t: String,
    #[serde(rename = "N")]
    n: u64,
    normalized: f64,
    formula: String,
    rel_err: String,
}

pub fn sv_report(r: &SvReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(r),
        Format::Csv => {
            let rows: Vec<SampleRow> = r
                .samples
                .iter()
                .map(|s| SampleRow {
                    t: rational64_text(&s.t),
                    n: s.raw,
                    normalized: s.normalized,
                    formula: r.formula_value.clone().unwrap_or_default(),
                    rel_err: r
                        .formula_f64
                        .map(|f| ((s.normalized - f).abs() / f.abs()).to_string())
                        .unwrap_or_default(),
                })
                .collect();
            csv_string(&rows)
        }
        Format::OrigamiText => domain("count reports have no origami-text encoding"),
    }
}

/// One row of the degree table: the fiber invariants and the three
/// closed-form constants at `n = degree`.
#[derive(Debug, Clone, Serialize)]
pub struct ArithRow {
    #[serde(flatten)]
    pub invariants: FiberInvariants,
    pub marked_torus_cylinders: String,
    pub marked_torus_saddles: String,
    pub d_symmetric_cylinders: String,
}

pub fn arith_rows(dmin: u64, dmax: u64) -> Result<Vec<ArithRow>> {
    if dmin < 2 || dmin > dmax {
        return domain(format!("need 2 <= dmin <= dmax, got {dmin}..{dmax}"));
    }
    (dmin..=dmax)
        .map(|d| {
            Ok(ArithRow {
                invariants: fiber_invariants(d)?,
                marked_torus_cylinders: format_rational(&sv_closed_form(SvKind::MarkedTorusCylinders, d)?),
                marked_torus_saddles: format_rational(&sv_closed_form(SvKind::MarkedTorusSaddles, d)?),
                d_symmetric_cylinders: format_rational(&sv_closed_form(SvKind::DSymmetricCylinders, d)?),
            })
        })
        .collect()
}

pub fn arith_table(rows: &[ArithRow], format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(rows),
        // the csv crate cannot serialize flattened structs, so spell the row out
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat<'a> {
                degree: u64,
                cone_count: i64,
                degenerate_count: i64,
                square_count: i64,
                euler_char: i64,
                euler_char_quotient: i64,
                spin_parity: u8,
                marked_torus_cylinders: &'a str,
                marked_torus_saddles: &'a str,
                d_symmetric_cylinders: &'a str,
            }
            let flat: Vec<Flat> = rows
                .iter()
                .map(|r| {
                    let i = &r.invariants;
                    Flat {
                        degree: i.degree,
                        cone_count: i.cone_count,
                        degenerate_count: i.degenerate_count,
                        square_count: i.square_count,
                        euler_char: i.euler_char,
                        euler_char_quotient: i.euler_char_quotient,
                        spin_parity: i.spin_parity,
                        marked_torus_cylinders: &r.marked_torus_cylinders,
                        marked_torus_saddles: &r.marked_torus_saddles,
                        d_symmetric_cylinders: &r.d_symmetric_cylinders,
                    }
                })
                .collect();
            csv_string(&flat)
        }
        Format::OrigamiText => domain("the degree table has no origami-text encoding"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{build_report, count_series, CountKind};

    #[test]
    fn torus_text_round_trip() {
        let t = Origami::torus();
        let text = origami(&t, Format::OrigamiText).unwrap();
        assert_eq!(text, "n=1 unit=1/1\nh=()\nv=()\n");
        let back = Origami::parse_text(&text).unwrap();
        assert_eq!(back.canonical_form().unwrap(), t.canonical_form().unwrap());
        assert!(origami(&t, Format::Csv).is_err());
    }

    #[test]
    fn invariants_json_has_seven_fields() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&fiber_invariants(3).unwrap()).unwrap()).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 7);
        assert_eq!(obj["square_count"], 16);
        assert_eq!(obj["spin_parity"], 1);
    }

    #[test]
    fn report_csv_header() {
        let o = Origami::marked_torus(2, 1, 0).unwrap();
        let ts: Vec<Rational64> = [2, 4, 8].iter().map(|&t| t.into()).collect();
        let s = count_series(&o, CountKind::Cylinders, &ts, false).unwrap();
        let f = sv_closed_form(SvKind::MarkedTorusCylinders, 2).unwrap();
        let r = build_report("marked torus", CountKind::Cylinders, s, Some(&f)).unwrap();
        let csv = sv_report(&r, Format::Csv).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("T,N,normalized,formula,rel_err"));
        assert_eq!(lines.count(), 3);
        assert!(csv.contains(",5/3,"));
    }

    #[test]
    fn arith_table_rows() {
        let rows = arith_rows(2, 4).unwrap();
        let csv = arith_table(&rows, Format::Csv).unwrap();
        assert!(csv.starts_with("degree,cone_count,"));
        assert_eq!(csv.lines().count(), 4);
        let json: serde_json::Value = serde_json::from_str(&arith_table(&rows, Format::Json).unwrap()).unwrap();
        assert_eq!(json[1]["degree"], 3);
        assert_eq!(json[0]["marked_torus_saddles"], "8/3");
        assert!(arith_rows(1, 3).is_err());
    }
}
