//! File formats.
//!
//! * signals: one sample per line, or binary: the 8-byte magic `LMFSIG01`, a
//!   little-endian `u64` length, then little-endian `f64` samples;
//! * binned measures: a `J,total_mass` header then `2^J` mass lines;
//! * wavelet pyramids: CSV `j,k,c`;
//! * dyadic families: a text container (header line, then one row of values
//!   per scale) or CSV `j,k,value`;
//! * jump lists: CSV `t,size`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::builders::BinnedMeasure;
use crate::dyadic::{DyadicFamily, Window};
use crate::error::{Error, Result};
use crate::wavelet::{Filter, WaveletPyramid};

pub const SIGNAL_MAGIC: &[u8; 8] = b"LMFSIG01";

const FAMILY_TAG: &str = "locmf-family";

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t.parse().map_err(|_| Error::Parse(format!("line {line}: `{t}` is not a number"))),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_signal_text(text: &str) -> Result<Vec<f64>> {
    data_lines(text).map(|(i, l)| parse_f64(l, i)).collect()
}

pub fn parse_signal_binary(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 16 || &bytes[..8] != SIGNAL_MAGIC {
        return Err(Error::Parse("missing binary signal header".into()));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if body.len() != n * 8 {
        return Err(Error::Parse(format!("header announces {n} samples, file holds {} bytes", body.len())));
    }
    Ok(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

/// Reads a signal in either format, detected from the magic.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(SIGNAL_MAGIC) {
        parse_signal_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse("signal file is neither text nor binary".into()))?;
        parse_signal_text(&text)
    }
}

pub fn write_signal_text(path: &Path, samples: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in samples {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_signal_binary(path: &Path, samples: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(SIGNAL_MAGIC)?;
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    for v in samples {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_measure(text: &str) -> Result<BinnedMeasure> {
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty measure file".into()))?;
    let parts: Vec<&str> = header.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse("measure header must be `J,total_mass`".into()));
    }
    let j: u32 = parts[0].trim().parse().map_err(|_| Error::Parse(format!("bad scale `{}`", parts[0])))?;
    let total = parse_f64(parts[1], 1)?;
    let mass = lines.map(|(i, l)| parse_f64(l, i)).collect::<Result<Vec<_>>>()?;
    if j > 30 || mass.len() != 1usize << j {
        return Err(Error::Parse(format!("header announces J = {j}, file holds {} masses", mass.len())));
    }
    BinnedMeasure::with_declared_total(mass, total)
}

pub fn read_measure(path: &Path) -> Result<BinnedMeasure> {
    parse_measure(&fs::read_to_string(path)?)
}

pub fn write_measure(path: &Path, m: &BinnedMeasure) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{},{:e}", m.scale(), m.total_mass())?;
    for v in m.masses() {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pyramid_csv(path: &Path, p: &WaveletPyramid) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "j,k,c")?;
    for j in p.j_min()..=p.j_max() {
        for (k, c) in p.scale(j).expect("scale in range").iter().enumerate() {
            writeln!(w, "{j},{k},{c:e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `j,k,c` rows; every scale between the smallest and largest present
/// must be complete. The approximation remainder is not stored and reads as
/// zero.
pub fn parse_pyramid_csv(text: &str, filter: Filter) -> Result<WaveletPyramid> {
    let mut rows: Vec<(u32, usize, f64)> = Vec::new();
    for (i, line) in data_lines(text) {
        if line.starts_with('j') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("line {i}: expected `j,k,c`")));
        }
        let j = parts[0].trim().parse().map_err(|_| Error::Parse(format!("line {i}: bad scale")))?;
        let k = parts[1].trim().parse().map_err(|_| Error::Parse(format!("line {i}: bad offset")))?;
        rows.push((j, k, parse_f64(parts[2], i)?));
    }
    let j_min = rows.iter().map(|r| r.0).min().ok_or_else(|| Error::Parse("empty pyramid".into()))?;
    let j_max = rows.iter().map(|r| r.0).max().expect("nonempty");
    if j_max > 30 {
        return Err(Error::Parse(format!("scale {j_max} is too fine")));
    }
    let mut details: Vec<Vec<Option<f64>>> = (j_min..=j_max).map(|j| vec![None; 1 << j]).collect();
    for (j, k, c) in rows {
        let row = &mut details[(j - j_min) as usize];
        let slot = row.get_mut(k).ok_or_else(|| Error::Parse(format!("offset {k} out of range at scale {j}")))?;
        *slot = Some(c);
    }
    let details = details
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::Parse(format!("scale {} is incomplete", j_min + i as u32)))
        })
        .collect::<Result<Vec<_>>>()?;
    WaveletPyramid::from_details(filter, j_min, details)
}

pub fn read_pyramid_csv(path: &Path, filter: Filter) -> Result<WaveletPyramid> {
    parse_pyramid_csv(&fs::read_to_string(path)?, filter)
}

pub fn write_family_csv(path: &Path, f: &DyadicFamily) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "j,k,value")?;
    for j in f.j_min()..=f.j_max() {
        for (c, v) in f.cubes(j) {
            writeln!(w, "{},{},{v:e}", c.j, c.k)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Text container: `locmf-family j_min j_max lo hi dim edge_flag`, then one
/// whitespace-separated row per scale.
pub fn write_family(path: &Path, f: &DyadicFamily) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let win = f.window();
    writeln!(
        w,
        "{FAMILY_TAG} {} {} {:e} {:e} {} {}",
        f.j_min(),
        f.j_max(),
        win.lo,
        win.hi,
        f.dim(),
        u8::from(f.edge_flagged())
    )?;
    for j in f.j_min()..=f.j_max() {
        let (_, row) = f.row(j).expect("scale in range");
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_family(path: &Path) -> Result<DyadicFamily> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty family file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 || fields[0] != FAMILY_TAG {
        return Err(Error::Parse("not a family container".into()));
    }
    let int = |s: &str| s.parse::<u32>().map_err(|_| Error::Parse(format!("bad header field `{s}`")));
    let (j_min, j_max) = (int(fields[1])?, int(fields[2])?);
    let window = Window::new(parse_f64(fields[3], 1)?, parse_f64(fields[4], 1)?)?;
    if int(fields[5])? != crate::DIM {
        return Err(Error::Parse(format!("unsupported dimension {}", fields[5])));
    }
    let edge = int(fields[6])? == 1;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let row = line.split_whitespace().map(|v| parse_f64(v, i + 2)).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if j_max < j_min || rows.len() != (j_max - j_min + 1) as usize {
        return Err(Error::Parse(format!("header announces scales {j_min}..={j_max}, file holds {} rows", rows.len())));
    }
    Ok(DyadicFamily::from_rows(j_min, window, rows)?.with_edge_flag(edge))
}

pub fn write_jumps(path: &Path, jumps: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,size")?;
    for (t, u) in jumps {
        writeln!(w, "{t:e},{u:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jumps(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    data_lines(&text)
        .filter(|(_, l)| !l.starts_with('t'))
        .map(|(i, l)| {
            let (a, b) = l.split_once(',').ok_or_else(|| Error::Parse(format!("line {i}: expected `t,size`")))?;
            Ok((parse_f64(a, i)?, parse_f64(b, i)?))
        })
        .collect()
}
