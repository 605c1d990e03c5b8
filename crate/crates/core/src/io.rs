//! Sample and point files.
//!
//! Samples are CSV rows `x1,...,xd,label` with an optional header, or a JSON
//! array of `[[x1,...,xd], label]`. Labels must be -1 or 1.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::metric::{Label, LabeledSample, Point};

/// Formats a double like C's `%.17g`, which round-trips every finite value.
pub fn fmt_g17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_label_text(text: &str) -> Result<Label> {
    let t = text.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::input(format!("bad label {t:?}")))?;
    if v == 1.0 {
        Ok(Label::Positive)
    } else if v == -1.0 {
        Ok(Label::Negative)
    } else {
        Err(Error::input(format!("label must be -1 or 1, got {t}")))
    }
}

fn parse_coord(text: &str, row: usize) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::input(format!("row {row}: bad number {:?}", text.trim())))?;
    if !v.is_finite() {
        return Err(Error::input(format!("row {row}: non-finite coordinate")));
    }
    Ok(v)
}

/// Reads CSV rows of numbers, skipping a non-numeric first row.
fn read_numeric_rows<R: Read>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::input(format!("csv: {e}")))?;
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        rows.push(fields);
    }
    Ok(rows)
}

pub fn read_sample_csv<R: Read>(reader: R) -> Result<Vec<(Point, Label)>> {
    let rows = read_numeric_rows(reader)?;
    let mut out = Vec::with_capacity(rows.len());
    for (r, fields) in rows.iter().enumerate() {
        if fields.len() < 2 {
            return Err(Error::input(format!("row {r}: need at least one coordinate and a label")));
        }
        let (label, coords) = fields.split_last().expect("nonempty");
        let coords = coords
            .iter()
            .map(|c| parse_coord(c, r))
            .collect::<Result<Vec<_>>>()?;
        out.push((Point::new(coords)?, parse_label_text(label)?));
    }
    Ok(out)
}

pub fn read_sample_json<R: Read>(reader: R) -> Result<Vec<(Point, Label)>> {
    let v: Value = serde_json::from_reader(reader)?;
    let items = v
        .as_array()
        .ok_or_else(|| Error::input("sample JSON must be an array"))?;
    items.iter().enumerate().map(|(i, item)| parse_json_pair(item, i)).collect()
}

pub(crate) fn parse_json_pair(item: &Value, i: usize) -> Result<(Point, Label)> {
    let pair = item
        .as_array()
        .filter(|p| p.len() == 2)
        .ok_or_else(|| Error::input(format!("entry {i}: expected [[coords...], label]")))?;
    let coords = pair[0]
        .as_array()
        .ok_or_else(|| Error::input(format!("entry {i}: coordinates must be an array")))?
        .iter()
        .map(|c| {
            c.as_f64()
                .ok_or_else(|| Error::input(format!("entry {i}: coordinate is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    let label = pair[1]
        .as_f64()
        .ok_or_else(|| Error::input(format!("entry {i}: label is not a number")))?;
    let label = if label == 1.0 {
        Label::Positive
    } else if label == -1.0 {
        Label::Negative
    } else {
        return Err(Error::input(format!("entry {i}: label must be -1 or 1, got {label}")));
    };
    Ok((Point::new(coords)?, label))
}

/// Reads a sample, choosing JSON for `.json` files and CSV otherwise.
pub fn read_sample_file(path: &Path) -> Result<Vec<(Point, Label)>> {
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_sample_json(file)
    } else {
        read_sample_csv(file)
    }
}

/// Reads unlabeled points, one per CSV row.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Point>> {
    read_numeric_rows(reader)?
        .iter()
        .enumerate()
        .map(|(r, fields)| {
            let coords = fields
                .iter()
                .map(|c| parse_coord(c, r))
                .collect::<Result<Vec<_>>>()?;
            Point::new(coords)
        })
        .collect()
}

/// Writes `x1,...,xd,label` with a header row.
pub fn write_sample_csv<W: Write>(mut w: W, s: &LabeledSample) -> Result<()> {
    let header: Vec<String> = (1..=s.dim()).map(|i| format!("x{i}")).collect();
    writeln!(w, "{},label", header.join(","))?;
    for (p, y) in s.iter() {
        for c in p {
            write!(w, "{},", fmt_g17(*c))?;
        }
        writeln!(w, "{y}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_c_formatting() {
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
    }

    proptest! {
        #[test]
        fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = fmt_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_with_and_without_header() {
        let with = "x1,x2,label\n0,1,1\n2,3,-1\n";
        let without = "0,1,1\n2,3,-1\n";
        let a = read_sample_csv(with.as_bytes()).unwrap();
        let b = read_sample_csv(without.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].1, Label::Negative);
        assert_eq!(a[1].0.coords(), &[2.0, 3.0]);
    }

    #[test]
    fn csv_rejects_label_two() {
        let err = read_sample_csv("0,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(read_sample_csv("0,1,1\n2,-1\n".as_bytes()).is_err());
    }

    #[test]
    fn json_form() {
        let s = read_sample_json("[[[0.5, 1], 1], [[2, 3], -1]]".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0.coords(), &[0.5, 1.0]);
        assert!(read_sample_json("[[[0], 0]]".as_bytes()).is_err());
    }

    #[test]
    fn points_csv_empty() {
        assert!(read_points_csv("".as_bytes()).unwrap().is_empty());
        assert!(read_points_csv("x1,x2\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn sample_csv_round_trip() {
        let raw = read_sample_csv("0.1,0.2,1\n-3,1e-9,-1\n".as_bytes()).unwrap();
        let s = LabeledSample::new(raw.clone()).unwrap();
        let mut buf = Vec::new();
        write_sample_csv(&mut buf, &s).unwrap();
        assert_eq!(read_sample_csv(buf.as_slice()).unwrap(), raw);
    }
}
