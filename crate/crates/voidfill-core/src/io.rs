//! Bit-exact file I/O: ESRI ASCII grids and binary PNM (P5/P6, maxval 255).
//!
//! Floats are written with the shortest representation that round-trips
//! a 64-bit float, so read(write(g)) == g cell-exact.

use crate::error::{Error, Result};
use crate::grid::{Grid, GuideImage, VoidMask};

const HEADER_KEYS: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "nodata_value",
];

fn parse_f64(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::NonNumericToken(tok.to_string()))?;
    if v.is_nan() {
        return Err(Error::NonNumericToken(tok.to_string()));
    }
    Ok(v)
}

/// Parse an ESRI ASCII grid. Header keys are case-insensitive and may
/// appear in any order, each exactly once.
pub fn read_ascii_grid(text: &str) -> Result<Grid> {
    let mut tokens = text.split_ascii_whitespace();
    let mut header = [None::<f64>; 6];
    for _ in 0..6 {
        let key = tokens
            .next()
            .ok_or_else(|| Error::MalformedHeader("missing header key".into()))?;
        let pos = HEADER_KEYS
            .iter()
            .position(|k| key.eq_ignore_ascii_case(k))
            .ok_or_else(|| Error::MalformedHeader(format!("unknown key {key:?}")))?;
        if header[pos].is_some() {
            return Err(Error::MalformedHeader(format!("duplicate key {key:?}")));
        }
        let val = tokens
            .next()
            .ok_or_else(|| Error::MalformedHeader(format!("missing value for {key:?}")))?;
        header[pos] = Some(parse_f64(val)?);
    }
    let ncols = header[0].unwrap();
    let nrows = header[1].unwrap();
    if ncols < 1.0 || ncols.fract() != 0.0 || nrows < 1.0 || nrows.fract() != 0.0 {
        return Err(Error::MalformedHeader("ncols/nrows must be positive integers".into()));
    }
    let width = ncols as usize;
    let height = nrows as usize;
    let cellsize = header[4].unwrap();
    if cellsize <= 0.0 {
        return Err(Error::MalformedHeader("cellsize must be > 0".into()));
    }
    let nodata = header[5].unwrap();

    let expected = width * height;
    let mut values = Vec::with_capacity(expected);
    for tok in tokens {
        if values.len() == expected {
            return Err(Error::CountMismatch {
                expected,
                found: expected + 1,
            });
        }
        let v = parse_f64(tok)?;
        // Exact match to the sentinel maps to nodata.
        values.push(if v == nodata { nodata } else { v });
    }
    if values.len() != expected {
        return Err(Error::CountMismatch {
            expected,
            found: values.len(),
        });
    }
    Ok(Grid {
        width,
        height,
        cellsize,
        origin_x: header[2].unwrap(),
        origin_y: header[3].unwrap(),
        nodata_value: nodata,
        values,
    })
}

/// Emit header then rows top-to-bottom; total function.
pub fn write_ascii_grid(g: &Grid) -> String {
    let mut out = String::new();
    out.push_str(&format!("ncols {}\n", g.width));
    out.push_str(&format!("nrows {}\n", g.height));
    out.push_str(&format!("xllcorner {}\n", g.origin_x));
    out.push_str(&format!("yllcorner {}\n", g.origin_y));
    out.push_str(&format!("cellsize {}\n", g.cellsize));
    out.push_str(&format!("NODATA_value {}\n", g.nodata_value));
    for row in 0..g.height {
        for col in 0..g.width {
            if col > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{}", g.get(row, col)));
        }
        out.push('\n');
    }
    out
}

struct PnmHeader {
    rgb: bool,
    width: usize,
    height: usize,
    payload_start: usize,
}

fn parse_pnm_header(bytes: &[u8]) -> Result<PnmHeader> {
    if bytes.len() < 2 {
        return Err(Error::UnsupportedMagic(String::from_utf8_lossy(bytes).into()));
    }
    let rgb = match &bytes[..2] {
        b"P5" => false,
        b"P6" => true,
        m => return Err(Error::UnsupportedMagic(String::from_utf8_lossy(m).into())),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and '#' comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedHeader("missing PNM header field".into()));
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = tok
            .parse()
            .map_err(|_| Error::NonNumericToken(tok.to_string()))?;
    }
    if fields[2] != 255 {
        return Err(Error::MaxvalNot255(fields[2]));
    }
    // Exactly one whitespace byte between maxval and payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::MalformedHeader("missing separator before payload".into()));
    }
    pos += 1;
    Ok(PnmHeader {
        rgb,
        width: fields[0] as usize,
        height: fields[1] as usize,
        payload_start: pos,
    })
}

fn payload<'a>(bytes: &'a [u8], h: &PnmHeader) -> Result<&'a [u8]> {
    let n = h.width * h.height * if h.rgb { 3 } else { 1 };
    let avail = bytes.len() - h.payload_start;
    if avail < n {
        return Err(Error::TruncatedPayload {
            expected: n,
            got: avail,
        });
    }
    Ok(&bytes[h.payload_start..h.payload_start + n])
}

/// Read a P5 or P6 image as a guide image.
pub fn read_guide(bytes: &[u8]) -> Result<GuideImage> {
    let h = parse_pnm_header(bytes)?;
    let data = payload(bytes, &h)?;
    Ok(GuideImage::new(
        h.width,
        h.height,
        if h.rgb { 3 } else { 1 },
        data.to_vec(),
    ))
}

/// Read a P5 image as a void mask: sample > 0 means void.
pub fn read_mask(bytes: &[u8]) -> Result<VoidMask> {
    let h = parse_pnm_header(bytes)?;
    if h.rgb {
        return Err(Error::UnsupportedMagic("P6 (masks must be P5)".into()));
    }
    let data = payload(bytes, &h)?;
    Ok(VoidMask::from_bits(
        h.width,
        h.height,
        data.iter().map(|&b| b > 0).collect(),
    ))
}

/// Write a mask as binary P5, 255 = void, 0 = known.
pub fn write_mask(m: &VoidMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.width, m.height).into_bytes();
    out.extend(m.bits.iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Write a guide image as binary P5 (1 channel) or P6 (3 channels).
pub fn write_guide(img: &GuideImage) -> Vec<u8> {
    let magic = if img.channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.samples);
    out
}
