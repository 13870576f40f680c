//! Text and binary signal formats.
//!
//! Text: a `CVEC <len>` header followed by one `re im` pair per line.
//! Several blocks may follow each other in one file.
//! Binary: magic `KAWCVEC1`, little-endian `u64` length, then interleaved
//! little-endian `f64` real/imaginary parts.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

pub const CVEC_MAGIC: &[u8; 8] = b"KAWCVEC1";

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

pub fn write_cvector_text<W: Write>(w: &mut W, v: &CVector) -> Result<()> {
    writeln!(w, "CVEC {}", v.len())?;
    for z in v.iter() {
        writeln!(w, "{} {}", z.re, z.im)?;
    }
    Ok(())
}

pub fn cvector_to_text(v: &CVector) -> String {
    let mut buf = Vec::new();
    write_cvector_text(&mut buf, v).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Reads every `CVEC` block in the input.
pub fn read_cvectors_text<R: BufRead>(r: R) -> Result<Vec<CVector>> {
    let mut out = Vec::new();
    let mut current: Option<(usize, Vec<C64>)> = None;
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = no + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("CVEC") {
            if let Some((len, data)) = current.take() {
                if data.len() != len {
                    return parse_err(
                        lineno,
                        format!("expected {len} entries, found {}", data.len()),
                    );
                }
                out.push(CVector(data));
            }
            let len: usize = match rest.trim().parse() {
                Ok(l) => l,
                Err(_) => return parse_err(lineno, format!("bad CVEC header '{t}'")),
            };
            current = Some((len, Vec::with_capacity(len)));
            continue;
        }
        let Some((len, data)) = current.as_mut() else {
            return parse_err(lineno, "data before CVEC header");
        };
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 2 {
            return parse_err(lineno, "expected 're im'");
        }
        let re: f64 = parts[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad number '{}'", parts[0]),
        })?;
        let im: f64 = parts[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad number '{}'", parts[1]),
        })?;
        if data.len() == *len {
            return parse_err(lineno, format!("more than {len} entries"));
        }
        data.push(C64::new(re, im));
    }
    if let Some((len, data)) = current.take() {
        if data.len() != len {
            return parse_err(0, format!("expected {len} entries, found {}", data.len()));
        }
        out.push(CVector(data));
    }
    Ok(out)
}

pub fn read_cvector_text<R: BufRead>(r: R) -> Result<CVector> {
    let mut all = read_cvectors_text(r)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => parse_err(0, format!("expected one CVEC block, found {n}")),
    }
}

pub fn write_cvector_binary<W: Write>(w: &mut W, v: &CVector) -> Result<()> {
    w.write_all(CVEC_MAGIC)?;
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for z in v.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_cvector_binary<R: Read>(r: &mut R) -> Result<CVector> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CVEC_MAGIC {
        return parse_err(0, "bad magic");
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut out = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        out.push(C64::new(re, im));
    }
    Ok(CVector(out))
}
