//! ESRI ASCII grids for heightfields, binary PGM/PPM for images and masks.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{BinaryMask, Dims, Heightfield, RasterImage, DEFAULT_NODATA};
use crate::error::{Error, Result};

pub fn load_heightfield(path: impl AsRef<Path>) -> Result<Heightfield> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_heightfield(&text)
}

pub fn parse_heightfield(text: &str) -> Result<Heightfield> {
    let mut lines = text.lines().enumerate().peekable();

    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut centered = (false, false);
    let mut cellsize = None;
    let mut nodata = None;
    let mut last_header_line = 0;

    while let Some(&(i, line)) = lines.peek() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            lines.next();
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if !key.starts_with(|c: char| c.is_ascii_alphabetic()) {
            break;
        }
        let value = parts.next().ok_or_else(|| Error::MalformedHeader {
            line: line_no,
            detail: format!("missing value for {key}"),
        })?;
        let num = |v: &str| {
            v.parse::<f64>().map_err(|_| Error::MalformedHeader {
                line: line_no,
                detail: format!("bad value {v:?} for {key}"),
            })
        };
        let count = |v: &str| match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::MalformedHeader {
                line: line_no,
                detail: format!("{key} must be a positive integer, got {v:?}"),
            }),
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(count(value)?),
            "nrows" => nrows = Some(count(value)?),
            "xllcorner" => xll = Some(num(value)?),
            "yllcorner" => yll = Some(num(value)?),
            "xllcenter" => {
                xll = Some(num(value)?);
                centered.0 = true;
            }
            "yllcenter" => {
                yll = Some(num(value)?);
                centered.1 = true;
            }
            "cellsize" => cellsize = Some(num(value)?),
            "nodata_value" => nodata = Some(num(value)?),
            _ => {
                return Err(Error::MalformedHeader {
                    line: line_no,
                    detail: format!("unknown key {key:?}"),
                })
            }
        }
        last_header_line = line_no;
        lines.next();
    }

    let missing = |name: &str| Error::MalformedHeader {
        line: last_header_line.max(1),
        detail: format!("missing {name}"),
    };
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    if !(cellsize > 0.0) {
        return Err(Error::MalformedHeader {
            line: last_header_line,
            detail: format!("cellsize must be positive, got {cellsize}"),
        });
    }
    let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
    if centered.0 {
        xll -= cellsize / 2.0;
    }
    if centered.1 {
        yll -= cellsize / 2.0;
    }
    let nodata = nodata.unwrap_or(DEFAULT_NODATA);

    let expected = ncols * nrows;
    let mut cells = Vec::with_capacity(expected);
    let mut last_line = last_header_line;
    for (i, line) in lines {
        let line_no = i + 1;
        for token in line.split_whitespace() {
            if cells.len() == expected {
                return Err(Error::CellCount {
                    line: line_no,
                    expected,
                    found: expected + 1,
                });
            }
            let v: f64 = token.parse().map_err(|_| Error::InvalidValue {
                line: line_no,
                token: token.to_string(),
            })?;
            if v != nodata && !v.is_finite() {
                return Err(Error::InvalidValue {
                    line: line_no,
                    token: token.to_string(),
                });
            }
            cells.push(v);
        }
        if !line.trim().is_empty() {
            last_line = line_no;
        }
    }
    if cells.len() != expected {
        return Err(Error::CellCount {
            line: last_line,
            expected,
            found: cells.len(),
        });
    }
    Heightfield::new(Dims::new(ncols, nrows), cellsize, (xll, yll), nodata, cells)
}

/// Renders the grid text. `f64`'s `Display` is the shortest string that
/// parses back to the same value, so the text round-trips exactly.
pub fn write_heightfield(field: &Heightfield) -> String {
    let dims = field.dims();
    let mut out = String::with_capacity(dims.len() * 8 + 128);
    let _ = writeln!(out, "ncols {}", dims.width);
    let _ = writeln!(out, "nrows {}", dims.height);
    let _ = writeln!(out, "xllcorner {}", field.origin.0);
    let _ = writeln!(out, "yllcorner {}", field.origin.1);
    let _ = writeln!(out, "cellsize {}", field.cell_size);
    let _ = writeln!(out, "NODATA_value {}", field.nodata);
    for row in field.cells().chunks_exact(dims.width) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_heightfield(field: &Heightfield, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_heightfield(field)).map_err(|e| Error::io(path, e))
}

pub fn parse_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.len() < 2 {
        return Err(Error::UnsupportedMagic(String::from_utf8_lossy(bytes).into_owned()));
    }
    let bands = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => return Err(Error::UnsupportedMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Truncated {
                expected: pos + 1,
                found: bytes.len(),
            });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(Error::UnsupportedMaxval(u32::MAX))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates header and payload
    pos += 1;
    let dims = Dims::new(width as usize, height as usize);
    let expected = dims.len() * bands;
    let payload = bytes.get(pos..).unwrap_or_default();
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    RasterImage::new(dims, bands, payload[..expected].to_vec())
}

pub fn encode_image(image: &RasterImage) -> Vec<u8> {
    let magic = if image.bands() == 1 { "P5" } else { "P6" };
    let dims = image.dims();
    let mut out = format!("{magic}\n{} {}\n255\n", dims.width, dims.height).into_bytes();
    out.extend_from_slice(image.samples());
    out
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_image(&bytes)
}

pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_image(image)).map_err(|e| Error::io(path, e))
}

/// Any non-zero PGM sample reads as foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let image = load_image(path)?;
    if image.bands() != 1 {
        return Err(Error::UnsupportedBands(image.bands()));
    }
    BinaryMask::from_bits(image.dims(), image.samples().iter().map(|&v| v != 0).collect())
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let samples = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let image = RasterImage::new(mask.dims(), 1, samples)?;
    save_image(&image, path)
}
