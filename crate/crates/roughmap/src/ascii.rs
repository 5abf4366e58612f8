//! Esri ASCII grid reading and writing, plus the roughness-map sidecar.
//!
//! The canonical raster format: a six-line header (`ncols`, `nrows`,
//! `xllcorner`, `yllcorner`, `cellsize`, `NODATA_value`), then rows written
//! top to bottom with space-separated values. Data values carry 6
//! significant digits; georeferencing fields round-trip exactly. The nodata
//! sentinel is -9999.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::descriptors::RoughnessMap;
use crate::error::{Result, RoughError};
use crate::grid::DemGrid;

pub const NODATA: f64 = -9999.0;

/// Format with 6 significant digits, trimming trailing zeros; plain notation
/// in the %g range, scientific outside it.
fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, v)
    } else {
        let sci = format!("{:.5e}", v);
        let (mantissa, e) = sci.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{e}");
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Write a grid as Esri ASCII.
pub fn write_esri_ascii(path: impl AsRef<Path>, grid: &DemGrid) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_esri_ascii_to(&mut out, grid)?;
    out.flush()?;
    Ok(())
}

/// Write a grid as Esri ASCII to any sink.
pub fn write_esri_ascii_to(out: &mut impl Write, grid: &DemGrid) -> Result<()> {
    writeln!(out, "ncols {}", grid.ncols())?;
    writeln!(out, "nrows {}", grid.nrows())?;
    writeln!(out, "xllcorner {}", grid.x0())?;
    writeln!(out, "yllcorner {}", grid.y0())?;
    writeln!(out, "cellsize {}", grid.cell())?;
    writeln!(out, "NODATA_value {}", fmt_g6(NODATA))?;
    let mut line = String::new();
    for row in (0..grid.nrows()).rev() {
        line.clear();
        for col in 0..grid.ncols() {
            if col > 0 {
                line.push(' ');
            }
            let v = grid.get(row, col);
            if v.is_finite() {
                line.push_str(&fmt_g6(v));
            } else {
                line.push_str(&fmt_g6(NODATA));
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Read an Esri ASCII grid.
pub fn read_esri_ascii(path: impl AsRef<Path>) -> Result<DemGrid> {
    read_esri_ascii_from(BufReader::new(File::open(path)?))
}

/// Read an Esri ASCII grid from any source.
pub fn read_esri_ascii_from(input: impl BufRead) -> Result<DemGrid> {
    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut x0: Option<f64> = None;
    let mut y0: Option<f64> = None;
    let mut cell: Option<f64> = None;
    let mut nodata = NODATA;
    let mut values: Vec<f64> = Vec::new();

    let parse_err = |line: usize, msg: String| RoughError::Parse { line, msg };

    let mut in_data = false;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace().peekable();
        let first = match tokens.peek() {
            Some(&t) => t,
            None => continue,
        };
        if !in_data && first.parse::<f64>().is_err() {
            // Header line: keyword then one numeric value.
            let key = tokens.next().expect("peeked").to_ascii_lowercase();
            let raw = tokens
                .next()
                .ok_or_else(|| parse_err(lineno, format!("header `{key}` has no value")))?;
            if tokens.next().is_some() {
                return Err(parse_err(lineno, format!("trailing tokens after `{key}`")));
            }
            let num: f64 = raw
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad number `{raw}` for `{key}`")))?;
            let as_count = |v: f64| -> Result<usize> {
                if v.fract() == 0.0 && v > 0.0 && v <= usize::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(parse_err(lineno, format!("`{key}` must be a positive integer")))
                }
            };
            match key.as_str() {
                "ncols" => ncols = Some(as_count(num)?),
                "nrows" => nrows = Some(as_count(num)?),
                "xllcorner" => x0 = Some(num),
                "yllcorner" => y0 = Some(num),
                "cellsize" => cell = Some(num),
                "nodata_value" => nodata = num,
                _ => return Err(parse_err(lineno, format!("unknown header key `{key}`"))),
            }
        } else {
            in_data = true;
            for t in line.split_whitespace() {
                let v: f64 = t
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad cell value `{t}`")))?;
                values.push(if v == nodata { f64::NAN } else { v });
            }
        }
    }

    let missing = |what: &str| RoughError::Parse {
        line: 0,
        msg: format!("missing header `{what}`"),
    };
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let x0 = x0.ok_or_else(|| missing("xllcorner"))?;
    let y0 = y0.ok_or_else(|| missing("yllcorner"))?;
    let cell = cell.ok_or_else(|| missing("cellsize"))?;
    if values.len() != nrows * ncols {
        return Err(RoughError::Parse {
            line: 0,
            msg: format!(
                "expected {} cell values ({nrows}x{ncols}), got {}",
                nrows * ncols,
                values.len()
            ),
        });
    }

    // File rows run top to bottom; storage rows run south to north.
    let mut data = vec![0.0f64; values.len()];
    for file_row in 0..nrows {
        let storage_row = nrows - 1 - file_row;
        let src = &values[file_row * ncols..(file_row + 1) * ncols];
        data[storage_row * ncols..(storage_row + 1) * ncols].copy_from_slice(src);
    }
    DemGrid::from_data(nrows, ncols, x0, y0, cell, data)
}

/// Write the JSON-lines sidecar describing a roughness map: one key per
/// line (descriptor, window, source_cell, units).
pub fn write_roughness_meta(path: impl AsRef<Path>, map: &RoughnessMap) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{{\"descriptor\":\"{}\"}}", map.descriptor.name())?;
    writeln!(out, "{{\"window\":{}}}", map.window.size())?;
    writeln!(out, "{{\"source_cell\":{}}}", map.source_cell)?;
    writeln!(out, "{{\"units\":\"{}\"}}", map.units())?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    /// Deterministic LCG in [0, 1), enough for test scaffolding.
    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn write_to_string(g: &DemGrid) -> String {
        let mut buf = Vec::new();
        write_esri_ascii_to(&mut buf, g).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn six_significant_digit_formatting() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(45.0), "45");
        assert_eq!(fmt_g6(2.5), "2.5");
        assert_eq!(fmt_g6(-9999.0), "-9999");
        assert_eq!(fmt_g6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_g6(123456.7), "123457");
        assert_eq!(fmt_g6(1234567.0), "1.23457e6");
        assert_eq!(fmt_g6(0.000123456789), "0.000123457");
        assert_eq!(fmt_g6(0.00001), "1e-5");
        assert_eq!(fmt_g6(-0.5), "-0.5");
    }

    #[test]
    fn golden_small_grid() {
        // Row 0 is the south row, so it prints last.
        let g = DemGrid::from_data(
            2,
            3,
            10.0,
            20.0,
            0.5,
            vec![1.0, 2.0, 3.0, 4.0, f64::NAN, 6.5],
        )
        .unwrap();
        assert_eq!(
            write_to_string(&g),
            "ncols 3\n\
             nrows 2\n\
             xllcorner 10\n\
             yllcorner 20\n\
             cellsize 0.5\n\
             NODATA_value -9999\n\
             4 -9999 6.5\n\
             1 2 3\n"
        );
    }

    #[test]
    fn round_trip_preserves_grid() {
        let mut rng = Lcg(404);
        let mut data: Vec<f64> = (0..9 * 7).map(|_| (rng.next_f64() - 0.3) * 50.0).collect();
        data[5] = f64::NAN;
        data[40] = f64::NAN;
        let g = DemGrid::from_data(9, 7, 1.25, -3.5, 0.64, data).unwrap();
        let text = write_to_string(&g);
        let back = read_esri_ascii_from(Cursor::new(text.clone())).unwrap();
        assert_eq!(back.nrows(), 9);
        assert_eq!(back.ncols(), 7);
        assert_eq!(back.x0(), 1.25);
        assert_eq!(back.y0(), -3.5);
        assert_eq!(back.cell(), 0.64);
        for (a, b) in g.data().iter().zip(back.data()) {
            assert_eq!(a.is_nan(), b.is_nan());
            if !a.is_nan() {
                // 6 significant digits.
                assert!((a - b).abs() <= 5e-6 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
        // Writing the reloaded grid reproduces the file byte for byte.
        assert_eq!(write_to_string(&back), text);
    }

    #[test]
    fn reader_handles_flexible_whitespace_and_case() {
        let text = "NCOLS 2\nnrows 2\nXLLCORNER 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n\
                    1   2\n  3 -1\n";
        let g = read_esri_ascii_from(Cursor::new(text)).unwrap();
        assert_eq!(g.get(1, 0), 1.0);
        assert_eq!(g.get(1, 1), 2.0);
        assert_eq!(g.get(0, 0), 3.0);
        assert!(g.is_nodata(0, 1));
    }

    #[test]
    fn reader_rejects_malformed_input() {
        let cases = [
            // Unknown header key.
            "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nfoo 3\n1 2\n",
            // Bad cell token.
            "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 abc\n",
            // Wrong cell count.
            "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n",
            // Missing header.
            "ncols 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n",
            // Fractional dimension.
            "ncols 2.5\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n",
        ];
        for text in cases {
            assert!(
                matches!(
                    read_esri_ascii_from(Cursor::new(text)),
                    Err(RoughError::Parse { .. })
                ),
                "accepted: {text:?}"
            );
        }
    }

    #[test]
    fn reader_accepts_values_split_across_lines() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1\n2\n3\n4\n";
        let g = read_esri_ascii_from(Cursor::new(text)).unwrap();
        assert_eq!(g.get(0, 0), 3.0);
        assert_eq!(g.get(1, 1), 2.0);
    }

    #[test]
    fn meta_sidecar_lists_map_provenance() {
        use crate::descriptors::{roughness_map, Descriptor, WindowSpec};
        let dem = DemGrid::from_data(
            6,
            6,
            0.0,
            0.0,
            1.0,
            (0..36).map(|i| (i % 7) as f64).collect(),
        )
        .unwrap();
        let map = roughness_map(&dem, Descriptor::SlopeSd, WindowSpec::new(3).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.meta");
        write_roughness_meta(&path, &map).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "{\"descriptor\":\"slope_sd\"}\n\
             {\"window\":3}\n\
             {\"source_cell\":1}\n\
             {\"units\":\"degrees\"}\n"
        );
    }
}
