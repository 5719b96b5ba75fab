//! Scalar observables, their time series and spectra, plus the SSH soliton
//! profile and coherence-length formulas.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::AmplitudeField;

/// Smallest series accepted by [`spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            times: Vec::new(),
            values: Vec::new(),
            label: label.into(),
        }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> TimeSeries {
        let mut out = TimeSeries::new(self.label.clone());
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if t >= t0 && t < t1 {
                out.push(t, v);
            }
        }
        out
    }

    /// Uniform sampling step, or an error describing the irregularity.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() != self.values.len() {
            return Err(Error::Series("times and values differ in length".into()));
        }
        if self.times.len() < 2 {
            return Err(Error::Series("need at least two samples".into()));
        }
        let n = self.times.len();
        let dt = (self.times[n - 1] - self.times[0]) / (n - 1) as f64;
        if dt <= 0.0 {
            return Err(Error::Series("times must increase".into()));
        }
        for (k, w) in self.times.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(Error::Series(format!(
                    "non-uniform sampling at index {}: step {} vs mean {}",
                    k + 1,
                    w[1] - w[0],
                    dt
                )));
            }
        }
        Ok(dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Angular frequencies `2π·bin/(N·Δt)`, ascending from zero.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl Spectrum {
    /// Amplitude at the bin nearest to `omega`.
    pub fn at(&self, omega: f64) -> f64 {
        let step = self.frequencies.get(1).copied().unwrap_or(1.0);
        let k = (omega / step).round() as usize;
        self.amplitudes.get(k).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rectangular" | "rect" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            other => Err(format!("unknown window `{other}` (expected rectangular or hann)")),
        }
    }
}

/// Σ(|A|² + |B|²) over chains, sites and photon blocks.
pub fn total_norm(state: &AmplitudeField) -> f64 {
    state.blocks().iter().map(|b| b.norm_sqr()).sum()
}

/// Σ(|A|² − |B|²) without normalization.
pub fn raw_inversion(state: &AmplitudeField) -> f64 {
    state
        .blocks()
        .iter()
        .map(|b| {
            let a: f64 = b.a().iter().map(|c| c.norm_sqr()).sum();
            let bb: f64 = b.b().iter().map(|c| c.norm_sqr()).sum();
            a - bb
        })
        .sum()
}

/// Integral inversion normalized by the instantaneous norm, in [−1, 1].
pub fn inversion(state: &AmplitudeField) -> Result<f64> {
    let norm = total_norm(state);
    if norm <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(raw_inversion(state) / norm)
}

/// One-sided magnitude spectrum of the mean-removed series.
///
/// Amplitudes are `|X_k|·√(2/N)` for interior bins and `|X_k|/√N` for the
/// DC and Nyquist bins, so that with the rectangular window
/// `Σ amplitude² = Σ (x − x̄)² = N · variance`.
pub fn spectrum(series: &TimeSeries, window: Window) -> Result<Spectrum> {
    let dt = series.uniform_step()?;
    let n = series.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::Series(format!(
            "need at least {MIN_SPECTRUM_SAMPLES} samples, got {n}"
        )));
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = match window {
                Window::Rectangular => 1.0,
                Window::Hann => 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos(),
            };
            C64::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let inv = 1.0 / (n as f64).sqrt();
    let (frequencies, amplitudes) = (0..=half)
        .map(|k| {
            let edge = k == 0 || (n % 2 == 0 && k == half);
            let scale = if edge { inv } else { inv * 2f64.sqrt() };
            (TAU * k as f64 / (n as f64 * dt), buf[k].norm() * scale)
        })
        .unzip();
    Ok(Spectrum {
        frequencies,
        amplitudes,
    })
}

/// Peak-to-peak range of the series in windows `[t0, t0 + width)`, with t0
/// advancing by `step` from the first sample while the window fits.
pub fn windowed_peak_to_peak(series: &TimeSeries, width: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(width > 0.0 && step > 0.0) {
        return Err(Error::Series(format!("window width {width} and step {step} must be positive")));
    }
    let (Some(&first), Some(&last)) = (series.times.first(), series.times.last()) else {
        return Err(Error::Series("empty series".into()));
    };
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t0 = first + k as f64 * step;
        if t0 + width > last + 1e-9 * width {
            break;
        }
        let (lo, hi) = series
            .times
            .iter()
            .zip(&series.values)
            .filter(|(t, _)| **t >= t0 && **t < t0 + width)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
        out.push((t0, if hi >= lo { hi - lo } else { 0.0 }));
        k += 1;
    }
    Ok(out)
}

/// Resolved lines: bins strictly above both neighbours and above
/// `rel_threshold` times the largest amplitude, as `(omega, amplitude)`.
pub fn spectral_peaks(sp: &Spectrum, rel_threshold: f64) -> Vec<(f64, f64)> {
    let max = sp.amplitudes.iter().cloned().fold(0.0, f64::max);
    sp.amplitudes
        .windows(3)
        .zip(&sp.frequencies[1..])
        .filter(|(w, _)| w[1] > w[0] && w[1] > w[2] && w[1] > rel_threshold * max)
        .map(|(w, f)| (*f, w[1]))
        .collect()
}

/// `|φ(n)|² = (1/ξ) sech²((n − n0)a/ξ − v t) cos(nπ/2)` per site, with the
/// coherence length `xi` in units of `a`.
pub fn soliton_profile(n0: i64, xi: f64, v: f64, t: f64, sites: std::ops::Range<i64>) -> Vec<f64> {
    sites
        .map(|n| {
            let arg = (n - n0) as f64 / xi - v * t;
            let sech = 1.0 / arg.cosh();
            // cos(nπ/2) is exactly 0, ±1 on integers.
            let cos = match n.rem_euclid(4) {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            sech * sech * cos / xi
        })
        .collect()
}

/// `ħ v_F / Δ` with ħ = 1.
pub fn coherence_length(gap: f64, fermi_velocity: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::InvalidParam {
            field: "gap",
            reason: format!("must be positive, got {gap}"),
        });
    }
    if !(fermi_velocity > 0.0) {
        return Err(Error::InvalidParam {
            field: "fermi_velocity",
            reason: format!("must be positive, got {fermi_velocity}"),
        });
    }
    Ok(fermi_velocity / gap)
}

/// Half-width argument of sech²: `arcsech(1/√2) = ln(1 + √2)`.
pub fn sech2_half_max_argument() -> f64 {
    (1.0 + 2f64.sqrt()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn series(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
        let mut s = TimeSeries::new("test");
        for i in 0..n {
            let t = i as f64 * dt;
            s.push(t, f(t));
        }
        s
    }

    fn field_with(a: C64, b: C64) -> AmplitudeField {
        let mut f = AmplitudeField::zeros(2, 3, 2);
        f.set_a(1, 2, 0, a);
        f.set_b(0, 1, 2, b);
        f
    }

    #[test]
    fn inversion_limits() {
        let z = C64::new(0.0, 0.0);
        assert_eq!(inversion(&field_with(C64::new(0.3, 0.4), z)).unwrap(), 1.0);
        assert_eq!(inversion(&field_with(z, C64::new(0.0, 2.0))).unwrap(), -1.0);
        assert!(matches!(inversion(&field_with(z, z)), Err(Error::ZeroNorm)));
        assert_eq!(total_norm(&field_with(z, z)), 0.0);
    }

    #[test]
    fn inversion_ignores_global_phase() {
        let f = field_with(C64::new(0.3, -0.2), C64::new(0.5, 0.1));
        let g = f.scaled(C64::from_polar(1.0, 1.234));
        assert!((inversion(&f).unwrap() - inversion(&g).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pure_tone_single_bin() {
        // 8 full periods in 256 samples.
        let n = 256;
        let dt = 0.05;
        let f = 8.0 / (n as f64 * dt);
        let s = series(n, dt, |t| (TAU * f * t).cos());
        let sp = spectrum(&s, Window::Rectangular).unwrap();
        let (kmax, &peak) = sp
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(kmax, 8);
        assert!((sp.frequencies[8] - TAU * f).abs() < 1e-12);
        for (k, a) in sp.amplitudes.iter().enumerate() {
            if k != 8 {
                assert!(*a < 0.01 * peak);
            }
        }
    }

    #[test]
    fn constant_series_has_empty_spectrum() {
        let sp = spectrum(&series(64, 0.1, |_| 3.25), Window::Rectangular).unwrap();
        assert!(sp.amplitudes.iter().all(|a| *a < 1e-12));
    }

    #[test]
    fn rejects_short_or_irregular() {
        assert!(spectrum(&series(8, 0.1, |t| t), Window::Rectangular).is_err());
        let mut s = series(32, 0.1, |t| t.sin());
        s.times[10] += 0.01;
        assert!(matches!(spectrum(&s, Window::Rectangular), Err(Error::Series(_))));
    }

    #[test]
    fn parseval_rectangular() {
        for n in [64usize, 65] {
            let s = series(n, 0.07, |t| (1.3 * t).sin() + 0.4 * (5.1 * t).cos() + 0.2 * t);
            let sp = spectrum(&s, Window::Rectangular).unwrap();
            let mean = s.values.iter().sum::<f64>() / n as f64;
            let ss: f64 = s.values.iter().map(|v| (v - mean).powi(2)).sum();
            let sa: f64 = sp.amplitudes.iter().map(|a| a * a).sum();
            assert!((ss - sa).abs() < 1e-10 * ss.max(1.0));
        }
    }

    #[test]
    fn spectrum_against_direct_dft() {
        let n = 50;
        let dt = 0.13;
        let s = series(n, dt, |t| (0.7 * t).cos() * (-0.05 * t).exp());
        let mean = s.values.iter().sum::<f64>() / n as f64;
        let sp = spectrum(&s, Window::Rectangular).unwrap();
        for k in 0..=n / 2 {
            let x: C64 = s
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - mean) * C64::from_polar(1.0, -TAU * (k * i) as f64 / n as f64))
                .sum();
            let scale = if k == 0 || k == n / 2 { 1.0 } else { 2f64.sqrt() };
            assert!((sp.amplitudes[k] - x.norm() * scale / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn hann_reduces_leakage() {
        let n = 256;
        let s = series(n, 0.1, |t| (2.345 * t).sin());
        let rect = spectrum(&s, Window::Rectangular).unwrap();
        let hann = spectrum(&s, Window::Hann).unwrap();
        let far = |sp: &Spectrum| sp.at(8.0) / sp.amplitudes.iter().cloned().fold(0.0, f64::max);
        assert!(far(&hann) < 0.1 * far(&rect));
    }

    #[test]
    fn soliton_point_values() {
        let p = soliton_profile(0, 3.0, 0.0, 0.0, 0..1);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
        let p = soliton_profile(10, 4.0, 0.2, 1.5, -20..40);
        for (i, n) in (-20i64..40).enumerate() {
            if n.rem_euclid(2) == 1 {
                assert_eq!(p[i], 0.0);
            }
            let arg = (n - 10) as f64 / 4.0 - 0.3;
            let want = (1.0 / arg.cosh()).powi(2) * (n as f64 * PI / 2.0).cos() / 4.0;
            assert!((p[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn sech2_half_maximum() {
        // Bisection oracle on sech²(x) = 1/2.
        let (mut lo, mut hi) = (0.0f64, 3.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (1.0 / mid.cosh()).powi(2) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((sech2_half_max_argument() - lo).abs() < 1e-12);
        assert!((lo - 0.8814).abs() < 1e-4);
    }

    #[test]
    fn soliton_envelope_integral() {
        // Even sites carry |cos| = 1; every other site sampled at spacing 2a
        // approximates ∫ sech² = 2 after rescaling.
        for xi in [5.0, 9.0, 20.0] {
            let p = soliton_profile(0, xi, 0.0, 0.0, -2000..2001);
            let even_sum: f64 = (-2000i64..2001)
                .zip(&p)
                .filter(|(n, _)| n.rem_euclid(2) == 0)
                .map(|(_, v)| v.abs())
                .sum();
            assert!((even_sum * 2.0 - 2.0).abs() < 0.02, "xi={xi}: {even_sum}");
        }
    }

    #[test]
    fn coherence_length_scaling() {
        let a = coherence_length(2.0, 3.0).unwrap();
        let b = coherence_length(4.0, 3.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert!(coherence_length(0.0, 1.0).is_err());
        assert!(coherence_length(-1.0, 1.0).is_err());
    }

    #[test]
    fn peak_to_peak_tracks_envelope() {
        let s = series(1000, 0.01, |t| (-t).exp() * (20.0 * t).sin());
        let w = windowed_peak_to_peak(&s, 1.0, 0.5).unwrap();
        assert_eq!(w.len(), 18);
        assert!((w[0].1 - 2.0).abs() < 0.3);
        assert!(w.windows(2).all(|p| p[1].1 < p[0].1));
        assert!(windowed_peak_to_peak(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn peaks_of_two_tones() {
        let n = 512;
        let dt = 0.05;
        let f1 = TAU * 10.0 / (n as f64 * dt);
        let f2 = TAU * 40.0 / (n as f64 * dt);
        let s = series(n, dt, |t| (f1 * t).cos() + 0.1 * (f2 * t).cos());
        let sp = spectrum(&s, Window::Rectangular).unwrap();
        let peaks = spectral_peaks(&sp, 0.05);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].0 - f1).abs() < 1e-9 && (peaks[1].0 - f2).abs() < 1e-9);
        assert!(spectral_peaks(&sp, 0.2).len() == 1);
    }
}
