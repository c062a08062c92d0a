//! Segment CSV: `x1,y1,x2,y2,width_index`, with an empty width when unset.

use std::fs;
use std::path::Path;

use super::{LineSegment, Point};
use crate::error::{Error, Result};

const HEADER: [&str; 5] = ["x1", "y1", "x2", "y2", "width_index"];

pub fn write_segments(segments: &[LineSegment]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for s in segments {
        let width = s.width_index.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            s.p1.x.to_string(),
            s.p1.y.to_string(),
            s.p2.x.to_string(),
            s.p2.y.to_string(),
            width,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<segments>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_segments(text: &str) -> Result<Vec<LineSegment>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().ne(HEADER) {
        return Err(Error::Config {
            line: 1,
            detail: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidValue {
                    line,
                    token: rec.get(k).unwrap_or_default().to_string(),
                })
        };
        let width_index = match rec.get(4).unwrap_or_default() {
            "" => None,
            v => Some(v.parse::<u32>().ok().filter(|&w| w >= 1).ok_or_else(|| Error::InvalidValue {
                line,
                token: v.to_string(),
            })?),
        };
        let s = LineSegment {
            p1: Point::new(num(0)?, num(1)?),
            p2: Point::new(num(2)?, num(3)?),
            width_index,
        };
        if s.p1 == s.p2 {
            return Err(Error::InvalidValue {
                line,
                token: "zero-length segment".into(),
            });
        }
        out.push(s);
    }
    Ok(out)
}

pub fn save_segments(segments: &[LineSegment], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_segments(segments)?).map_err(|e| Error::io(path, e))
}

pub fn load_segments(path: impl AsRef<Path>) -> Result<Vec<LineSegment>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_segments(&text)
}
