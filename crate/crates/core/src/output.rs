//! CSV and manifest writers.
//!
//! Numbers are written in scientific notation with 12 significant digits so
//! that identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::AmplitudeField;
use crate::observables::{Spectrum, TimeSeries};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Two columns `t,value`.
pub fn series_csv(series: &TimeSeries) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in series.times.iter().zip(&series.values) {
        s.push_str(&fmt_num(*t));
        s.push(',');
        s.push_str(&fmt_num(*v));
        s.push('\n');
    }
    s
}

/// Two columns `omega,amplitude`.
pub fn spectrum_csv(sp: &Spectrum) -> String {
    let mut s = String::from("omega,amplitude\n");
    for (w, a) in sp.frequencies.iter().zip(&sp.amplitudes) {
        s.push_str(&fmt_num(*w));
        s.push(',');
        s.push_str(&fmt_num(*a));
        s.push('\n');
    }
    s
}

/// Reads a two-column CSV with a header line into a series.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = TimeSeries::new(path.display().to_string());
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if i == 0 || line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let raw = cols
                .next()
                .ok_or_else(|| Error::Series(format!("line {}: missing {name} column", i + 1)))?;
            raw.trim()
                .parse()
                .map_err(|_| Error::Series(format!("line {}: cannot parse {name} `{raw}`", i + 1)))
        };
        let t = next("time")?;
        let v = next("value")?;
        out.push(t, v);
    }
    Ok(out)
}

/// Streams amplitude snapshots as rows `t,j,m,l,re_a,im_a,re_b,im_b`,
/// ordered by time, then chain, then site, then photon block.
pub struct FieldDump {
    out: BufWriter<File>,
}

impl FieldDump {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "t,j,m,l,re_a,im_a,re_b,im_b")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, t: f64, field: &AmplitudeField) -> Result<()> {
        let ts = fmt_num(t);
        for j in 0..field.n_chains() {
            for m in 0..field.n_sites() {
                for l in 0..=field.l_max() {
                    let a = field.a(j, m, l);
                    let b = field.b(j, m, l);
                    writeln!(
                        self.out,
                        "{ts},{j},{m},{l},{},{},{},{}",
                        fmt_num(a.re),
                        fmt_num(a.im),
                        fmt_num(b.re),
                        fmt_num(b.im)
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Resolved configuration followed by the output directory, source
/// checksum and tool version. The result parses as a config.
pub fn manifest_text(config: &Config, source: &[u8], out_dir: &Path) -> String {
    let mut s = String::from("# resolved run manifest\n");
    s.push_str(&config.to_text());
    s.push_str(&format!("output_dir = {}\n", out_dir.display()));
    s.push_str(&format!("config_checksum = {}\n", sha256_hex(source)));
    s.push_str(&format!("tool_version = {TOOL_VERSION}\n"));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn series_round_trip() {
        let mut s = TimeSeries::new("w");
        for i in 0..5 {
            s.push(i as f64 * 0.1, (i as f64).sin());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, series_csv(&s)).unwrap();
        let back = read_series(&path).unwrap();
        for (a, b) in back.values.iter().zip(&s.values) {
            assert!((a - b).abs() < 1e-11);
        }
        assert_eq!(back.len(), 5);
    }

    #[test]
    fn read_series_reports_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,value\n0,1\n0.1,x\n").unwrap();
        let e = read_series(&path).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }
}
