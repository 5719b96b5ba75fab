//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment. Keys are the
//! [`SystemParams`] field names; `xi1`, `xi2` and `chain_profile` take
//! comma-separated lists (complex entries written like `0.5+0.1i`).
//! `l_max = auto` picks the cutoff from the Poisson tail. Run options
//! (`mode`, `spectrum`, `window`, `unnormalized_inversion`, `dump_field`,
//! `quad_h_max`, `quad_h_step`) are optional, and the manifest-only keys
//! `output_dir`, `config_checksum` and `tool_version` are accepted and
//! ignored. A run
//! manifest is itself a valid config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{auto_l_max, PacketShape, SystemParams};
use crate::observables::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Discrete,
    Continuum,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Continuum => "continuum",
            Mode::Compare => "compare",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "discrete" => Ok(Mode::Discrete),
            "continuum" => Ok(Mode::Continuum),
            "compare" => Ok(Mode::Compare),
            other => Err(format!("unknown mode `{other}` (expected discrete, continuum or compare)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub mode: Option<Mode>,
    pub spectrum: bool,
    pub window: Window,
    pub unnormalized_inversion: bool,
    pub dump_field: bool,
    pub quad_h_max: Option<f64>,
    pub quad_h_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub run: RunOptions,
}

const REQUIRED: [&str; 17] = [
    "n_chains",
    "n_sites",
    "site_spacing",
    "omega0",
    "omega",
    "g",
    "wavenumber",
    "xi1",
    "xi2",
    "lambda",
    "mean_photons",
    "l_max",
    "sigma",
    "x0",
    "dt",
    "t_end",
    "sample_stride",
];

const OPTIONAL: [&str; 12] = [
    "chain_profile",
    "packet",
    "mode",
    "spectrum",
    "window",
    "unnormalized_inversion",
    "dump_field",
    "quad_h_max",
    "quad_h_step",
    "config_checksum",
    "tool_version",
    "output_dir",
];

struct Entry {
    line: usize,
    value: String,
}

fn err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

fn parse_scalar<T: FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| err(e.line, format!("`{key}`: cannot parse `{}`", e.value)))
}

fn parse_list<T: FromStr>(key: &str, e: &Entry) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse()
                .map_err(|_| err(e.line, format!("`{key}`: cannot parse list entry `{s}`")))
        })
        .collect()
}

fn parse_bool(key: &str, e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(err(e.line, format!("`{key}`: expected true or false, got `{other}`"))),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
                return Err(err(line, format!("unknown key `{key}`")));
            }
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(err(line, format!("`{key}` has no value")));
            }
            if let Some(prev) = entries.insert(key.to_string(), Entry { line, value }) {
                return Err(err(line, format!("`{key}` already set on line {}", prev.line)));
            }
        }
        for key in REQUIRED {
            if !entries.contains_key(key) {
                return Err(err(0, format!("missing required key `{key}`")));
            }
        }
        let get = |k: &str| &entries[k];

        let mean_photons: f64 = parse_scalar("mean_photons", get("mean_photons"))?;
        let l_max = match get("l_max").value.as_str() {
            "auto" => auto_l_max(mean_photons.max(0.0)),
            _ => parse_scalar("l_max", get("l_max"))?,
        };
        let chain_profile = match entries.get("chain_profile") {
            Some(e) => Some(parse_list::<C64>("chain_profile", e)?),
            None => None,
        };
        let packet = match entries.get("packet").map(|e| (e.line, e.value.as_str())) {
            None | Some((_, "gaussian")) => PacketShape::Gaussian,
            Some((_, "single_site")) => PacketShape::SingleSite,
            Some((line, other)) => {
                return Err(err(line, format!("`packet`: expected gaussian or single_site, got `{other}`")))
            }
        };

        let params = SystemParams {
            n_chains: parse_scalar("n_chains", get("n_chains"))?,
            n_sites: parse_scalar("n_sites", get("n_sites"))?,
            site_spacing: parse_scalar("site_spacing", get("site_spacing"))?,
            omega0: parse_scalar("omega0", get("omega0"))?,
            omega: parse_scalar("omega", get("omega"))?,
            g: parse_scalar("g", get("g"))?,
            wavenumber: parse_scalar("wavenumber", get("wavenumber"))?,
            xi1: parse_list("xi1", get("xi1"))?,
            xi2: parse_list("xi2", get("xi2"))?,
            lambda: parse_scalar("lambda", get("lambda"))?,
            mean_photons,
            l_max,
            sigma: parse_scalar("sigma", get("sigma"))?,
            x0: parse_scalar("x0", get("x0"))?,
            dt: parse_scalar("dt", get("dt"))?,
            t_end: parse_scalar("t_end", get("t_end"))?,
            sample_stride: parse_scalar("sample_stride", get("sample_stride"))?,
            chain_profile,
            packet,
        };

        let mut run = RunOptions::default();
        if let Some(e) = entries.get("mode") {
            run.mode = Some(e.value.parse().map_err(|m: String| err(e.line, m))?);
        }
        if let Some(e) = entries.get("spectrum") {
            run.spectrum = parse_bool("spectrum", e)?;
        }
        if let Some(e) = entries.get("window") {
            run.window = e.value.parse().map_err(|m: String| err(e.line, m))?;
        }
        if let Some(e) = entries.get("unnormalized_inversion") {
            run.unnormalized_inversion = parse_bool("unnormalized_inversion", e)?;
        }
        if let Some(e) = entries.get("dump_field") {
            run.dump_field = parse_bool("dump_field", e)?;
        }
        if let Some(e) = entries.get("quad_h_max") {
            run.quad_h_max = Some(parse_scalar("quad_h_max", e)?);
        }
        if let Some(e) = entries.get("quad_h_step") {
            run.quad_h_step = Some(parse_scalar("quad_h_step", e)?);
        }
        Ok(Config { params, run })
    }

    /// Serializes every resolved value. Floats use the shortest exact
    /// representation, so parsing the output gives back identical values.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_chains", p.n_chains.to_string());
        kv("n_sites", p.n_sites.to_string());
        kv("site_spacing", p.site_spacing.to_string());
        kv("omega0", p.omega0.to_string());
        kv("omega", p.omega.to_string());
        kv("g", p.g.to_string());
        kv("wavenumber", p.wavenumber.to_string());
        kv("xi1", list(&p.xi1));
        kv("xi2", list(&p.xi2));
        kv("lambda", p.lambda.to_string());
        kv("mean_photons", p.mean_photons.to_string());
        kv("l_max", p.l_max.to_string());
        kv("sigma", p.sigma.to_string());
        kv("x0", p.x0.to_string());
        kv("dt", p.dt.to_string());
        kv("t_end", p.t_end.to_string());
        kv("sample_stride", p.sample_stride.to_string());
        if let Some(u) = &p.chain_profile {
            let entries: Vec<String> = u
                .iter()
                .map(|c| {
                    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
                    format!("{}{}{}i", c.re, sign, c.im.abs())
                })
                .collect();
            kv("chain_profile", entries.join(", "));
        }
        kv("packet", p.packet.name().to_string());
        let r = &self.run;
        if let Some(m) = r.mode {
            kv("mode", m.name().to_string());
        }
        kv("spectrum", r.spectrum.to_string());
        kv("window", r.window.name().to_string());
        kv("unnormalized_inversion", r.unnormalized_inversion.to_string());
        kv("dump_field", r.dump_field.to_string());
        if let Some(h) = r.quad_h_max {
            kv("quad_h_max", h.to_string());
        }
        if let Some(h) = r.quad_h_step {
            kv("quad_h_step", h.to_string());
        }
        s
    }
}
