//! Continuum-limit solution at exact resonance.
//!
//! In the rotated frame
//!
//! ```text
//! Φ(x, t) = exp(i(ω₀t − kx)σ_z / 2) · exp(λt/2) · Ψ(x, t)
//! ```
//!
//! each chain mode q and photon block l evolves in wavenumber space under
//! the 2×2 generator `H_q(h, l) = diag(θ₁,q(h), θ₂,q(h)) − g√(l+1)·σ_x`,
//! `φ(h, t) = exp(itH)·Θ(h)`, with the quadratic dispersions
//!
//! ```text
//! θ₁,q(h) = k_q([ξ₁])·(2 − a²(h + k/2)²)
//! θ₂,q(h) = k_q([ξ₂])·(2 − a²(h − k/2)²)
//! ```
//!
//! The field is rebuilt by uniform quadrature over h followed by the inverse
//! chain transform. The chain transform carries 1/n on the forward side
//! only, which makes the t = 0 reconstruction the identity.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::circulant::twiddle;
use crate::error::{Error, Result};
use crate::model::{coherent_amplitudes, coupling_eigenvalues, AmplitudeField, PacketShape, SystemParams};
use crate::observables::{inversion, total_norm, TimeSeries};

/// Relative spectral weight tolerated at the ends of the h interval.
pub const TRUNCATION_TOL: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDispersion {
    pub q: usize,
    /// `k_q([ξ₁])`
    pub excited: f64,
    /// `k_q([ξ₂])`
    pub ground: f64,
    pub site_spacing: f64,
    pub wavenumber: f64,
}

impl ModeDispersion {
    pub fn theta1(&self, h: f64) -> f64 {
        let s = self.site_spacing * (h + 0.5 * self.wavenumber);
        self.excited * (2.0 - s * s)
    }

    pub fn theta2(&self, h: f64) -> f64 {
        let s = self.site_spacing * (h - 0.5 * self.wavenumber);
        self.ground * (2.0 - s * s)
    }
}

pub fn mode_dispersions(p: &SystemParams) -> Result<Vec<ModeDispersion>> {
    let k1 = coupling_eigenvalues(&p.xi1)?;
    let k2 = coupling_eigenvalues(&p.xi2)?;
    Ok((0..p.n_chains)
        .map(|q| ModeDispersion {
            q,
            excited: k1[q],
            ground: k2[q],
            site_spacing: p.site_spacing,
            wavenumber: p.wavenumber,
        })
        .collect())
}

/// `exp(it·H_q(h, l))` in closed form, as a row-major 2×2 matrix acting on
/// `(Φ_A, Φ_B)`.
pub fn propagate_mode(disp: &ModeDispersion, l: usize, h: f64, t: f64, g: f64) -> [[C64; 2]; 2] {
    let t1 = disp.theta1(h);
    let t2 = disp.theta2(h);
    let mean = 0.5 * (t1 + t2);
    let half = 0.5 * (t1 - t2);
    let cpl = -g * ((l + 1) as f64).sqrt();
    let omega = half.hypot(cpl);
    let cos = (omega * t).cos();
    // sin(Ωt)/Ω, continuous at Ω = 0.
    let sinc = if omega * t.abs() < 1e-8 {
        t
    } else {
        (omega * t).sin() / omega
    };
    let phase = C64::from_polar(1.0, mean * t);
    let i = C64::new(0.0, 1.0);
    [
        [phase * (cos + i * sinc * half), phase * (i * sinc * cpl)],
        [phase * (i * sinc * cpl), phase * (cos - i * sinc * half)],
    ]
}

/// Uniform h grid on `[-h_max, h_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub h_max: f64,
    pub h_step: f64,
}

impl Quadrature {
    /// `H = k/2 + 8/σ`, spacing `min(π/(4·x_max), 1/(8σ))`, where `x_max`
    /// is the largest distance from the packet center to a grid point.
    pub fn for_grid(p: &SystemParams, x_grid: &[f64]) -> Self {
        let h_max = 0.5 * p.wavenumber.abs() + 8.0 / p.sigma;
        Self {
            h_max,
            h_step: Self::max_step(p, x_grid),
        }
    }

    pub fn max_step(p: &SystemParams, x_grid: &[f64]) -> f64 {
        let x_max = x_grid
            .iter()
            .map(|x| (x - p.x0).abs())
            .fold(p.sigma, f64::max);
        (PI / (4.0 * x_max)).min(1.0 / (8.0 * p.sigma))
    }

    pub fn nodes(&self) -> Vec<f64> {
        let count = (2.0 * self.h_max / self.h_step).ceil() as usize;
        let step = 2.0 * self.h_max / count as f64;
        (0..=count).map(|i| -self.h_max + i as f64 * step).collect()
    }

    pub fn weight(&self) -> f64 {
        let count = (2.0 * self.h_max / self.h_step).ceil();
        2.0 * self.h_max / count
    }
}

/// Initial spectral functions `Θ_{q,l}(h)` for both components on the
/// quadrature nodes, indexed `[l][q]`.
#[derive(Debug, Clone)]
pub struct InitialSpectrum {
    pub quadrature: Quadrature,
    pub h: Vec<f64>,
    pub modes: Vec<Vec<(Vec<C64>, Vec<C64>)>>,
}

impl InitialSpectrum {
    pub fn n_chains(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    pub fn l_max(&self) -> usize {
        self.modes.len() - 1
    }

    /// Largest |Θ| at either end of the interval relative to the global maximum.
    pub fn truncation_estimate(&self) -> f64 {
        let last = self.h.len() - 1;
        let mut edge: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for (a, b) in self.modes.iter().flatten() {
            for v in [a, b] {
                edge = edge.max(v[0].norm()).max(v[last].norm());
                peak = v.iter().map(|c| c.norm()).fold(peak, f64::max);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    fn check(&self) -> Result<()> {
        let est = self.truncation_estimate();
        if est > TRUNCATION_TOL {
            return Err(Error::Quadrature(format!(
                "spectral weight at |h| = {} is {est:.2e} of the peak (tolerance {TRUNCATION_TOL:.0e})",
                self.quadrature.h_max
            )));
        }
        Ok(())
    }

    /// Pointwise sum of two spectra on the same grid.
    pub fn add(&self, other: &Self) -> Self {
        let modes = self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|((a1, b1), (a2, b2))| {
                        (
                            a1.iter().zip(a2).map(|(u, v)| u + v).collect(),
                            b1.iter().zip(b2).map(|(u, v)| u + v).collect(),
                        )
                    })
                    .collect()
            })
            .collect();
        Self {
            quadrature: self.quadrature,
            h: self.h.clone(),
            modes,
        }
    }
}

/// Chain-mode weights `û_q = (1/n) Σ_j u_j exp(+2πi q j / n)`.
fn chain_mode_weights(u: &[C64]) -> Vec<C64> {
    let n = u.len();
    (0..n)
        .map(|q| {
            u.iter()
                .enumerate()
                .map(|(j, &c)| c * twiddle(q * j, n, 1.0))
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

/// Analytic transform of the Gaussian initial packet:
/// `Θ_A(h) = c(l)·û_q·(πσ²)^{−1/4}·σ/√(2π)·exp(−σ²(h + k/2)²/2)·exp(−i(h + k/2)x0)`,
/// `Θ_B = 0`.
pub fn gaussian_transform(p: &SystemParams, quad: Quadrature) -> Result<InitialSpectrum> {
    p.validate()?;
    if p.packet != PacketShape::Gaussian {
        return Err(Error::InvalidParam {
            field: "packet",
            reason: "analytic transform needs a gaussian packet; use field_transform".into(),
        });
    }
    let coherent = coherent_amplitudes(p.mean_photons, p.l_max);
    if coherent.exceeds_tolerance() {
        return Err(Error::Truncation {
            l_max: p.l_max,
            tail: coherent.truncation_error,
        });
    }
    let weights = chain_mode_weights(&p.profile());
    let h = quad.nodes();
    let norm = (PI * p.sigma * p.sigma).powf(-0.25) * p.sigma / TAU.sqrt();
    let shape: Vec<C64> = h
        .iter()
        .map(|&h| {
            let s = h + 0.5 * p.wavenumber;
            C64::from_polar(norm * (-0.5 * p.sigma * p.sigma * s * s).exp(), -s * p.x0)
        })
        .collect();
    let modes = coherent
        .amplitudes
        .iter()
        .map(|&c| {
            weights
                .iter()
                .map(|&w| {
                    (
                        shape.iter().map(|s| s * w * c).collect(),
                        vec![ZERO; h.len()],
                    )
                })
                .collect()
        })
        .collect();
    let spec = InitialSpectrum {
        quadrature: quad,
        h,
        modes,
    };
    spec.check()?;
    Ok(spec)
}

/// Numerical transform of a lattice field taken as the t = 0 state:
/// `Θ(h) = (1/2π) Σ_m Φ(x_m) e^{−ihx_m} a` after the chain transform, with
/// `Φ_A(x_m) = A_m e^{−ikx_m/2}/√a` and `Φ_B(x_m) = B_m e^{+ikx_m/2}/√a`.
pub fn field_transform(field: &AmplitudeField, p: &SystemParams, quad: Quadrature) -> Result<InitialSpectrum> {
    field.check_shape(p)?;
    let a = p.site_spacing;
    let n = p.n_chains;
    let h = quad.nodes();
    let scale = a.sqrt() / TAU;
    let xs: Vec<f64> = (0..p.n_sites).map(|m| m as f64 * a).collect();
    let half_k = 0.5 * p.wavenumber;

    let mut modes = Vec::with_capacity(p.l_max + 1);
    let mut col = vec![ZERO; n];
    for l in 0..=p.l_max {
        // Chain-mode amplitudes per site, [q][m].
        let mut mode_a = vec![vec![ZERO; p.n_sites]; n];
        let mut mode_b = vec![vec![ZERO; p.n_sites]; n];
        for m in 0..p.n_sites {
            for (j, c) in col.iter_mut().enumerate() {
                *c = field.a(j, m, l);
            }
            for (q, v) in chain_mode_weights(&col).into_iter().enumerate() {
                mode_a[q][m] = v;
            }
            for (j, c) in col.iter_mut().enumerate() {
                *c = field.b(j, m, l);
            }
            for (q, v) in chain_mode_weights(&col).into_iter().enumerate() {
                mode_b[q][m] = v;
            }
        }
        let per_q = (0..n)
            .map(|q| {
                let ta = h
                    .iter()
                    .map(|&h| {
                        xs.iter()
                            .zip(&mode_a[q])
                            .map(|(&x, &v)| v * C64::from_polar(scale, -(h + half_k) * x))
                            .sum()
                    })
                    .collect();
                let tb = h
                    .iter()
                    .map(|&h| {
                        xs.iter()
                            .zip(&mode_b[q])
                            .map(|(&x, &v)| v * C64::from_polar(scale, -(h - half_k) * x))
                            .sum()
                    })
                    .collect();
                (ta, tb)
            })
            .collect();
        modes.push(per_q);
    }
    let spec = InitialSpectrum {
        quadrature: quad,
        h,
        modes,
    };
    spec.check()?;
    Ok(spec)
}

/// Φ-frame amplitudes on an x grid at one time, indexed `[l][j * nx + ix]`.
#[derive(Debug, Clone)]
pub struct ContinuumField {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub n_chains: usize,
    pub phi_a: Vec<Vec<C64>>,
    pub phi_b: Vec<Vec<C64>>,
    omega0: f64,
    wavenumber: f64,
    lambda: f64,
}

impl ContinuumField {
    fn idx(&self, j: usize, ix: usize) -> usize {
        j * self.x_grid.len() + ix
    }

    pub fn l_max(&self) -> usize {
        self.phi_a.len() - 1
    }

    /// `(Ψ_A, Ψ_B)` at chain j, block l, grid point ix.
    pub fn psi(&self, j: usize, ix: usize, l: usize) -> (C64, C64) {
        let i = self.idx(j, ix);
        let x = self.x_grid[ix];
        let damp = (-0.5 * self.lambda * self.t).exp();
        let rot = C64::from_polar(1.0, -0.5 * (self.omega0 * self.t - self.wavenumber * x));
        (rot * damp * self.phi_a[l][i], rot.conj() * damp * self.phi_b[l][i])
    }

    /// `Σ (|Φ_A|² + |Φ_B|²)·Δx` over the grid, assuming uniform spacing.
    pub fn phi_norm(&self) -> f64 {
        let dx = if self.x_grid.len() > 1 {
            self.x_grid[1] - self.x_grid[0]
        } else {
            1.0
        };
        self.phi_a
            .iter()
            .chain(&self.phi_b)
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// Samples Ψ onto a lattice whose sites coincide with the grid,
    /// applying the √a discrete weight.
    pub fn to_lattice(&self, site_spacing: f64) -> AmplitudeField {
        let nx = self.x_grid.len();
        let mut out = AmplitudeField::zeros(self.n_chains, nx, self.l_max());
        let w = site_spacing.sqrt();
        for l in 0..=self.l_max() {
            for j in 0..self.n_chains {
                for ix in 0..nx {
                    let (a, b) = self.psi(j, ix, l);
                    out.set_a(j, ix, l, a * w);
                    out.set_b(j, ix, l, b * w);
                }
            }
        }
        out
    }
}

fn require_resonance(p: &SystemParams) -> Result<()> {
    let det = p.detuning();
    if det.abs() > 1e-12 * p.omega0.abs().max(1.0) {
        return Err(Error::NotResonant(det));
    }
    Ok(())
}

/// `Σ_k w·v_k·e^{i h_k x}` for every x, by phase recurrence along the h grid.
fn synthesize_direct(h0: f64, dh: f64, w: f64, v: &[C64], x_grid: &[f64], out: &mut [C64]) {
    for (o, &x) in out.iter_mut().zip(x_grid) {
        let step = C64::from_polar(1.0, dh * x);
        let mut z = C64::from_polar(w, h0 * x);
        let mut s = ZERO;
        for c in v {
            s += c * z;
            z *= step;
        }
        *o = s;
    }
}

/// Evaluates `Σ_k w·v_k·e^{i h_k x_m}` on a uniform x grid as a chirp-z
/// transform: with `W = e^{i·dh·Δx}`, `km = (k² + m² − (m − k)²)/2` turns the
/// sum into a convolution done by FFT.
struct ChirpSynthesizer {
    nh: usize,
    nx: usize,
    pre: Vec<C64>,
    post: Vec<C64>,
    kernel: Vec<C64>,
    fft: std::sync::Arc<dyn Fft<f64>>,
    ifft: std::sync::Arc<dyn Fft<f64>>,
    buf: Vec<C64>,
}

impl ChirpSynthesizer {
    fn new(h0: f64, dh: f64, w: f64, nh: usize, x_grid: &[f64]) -> Option<Self> {
        let nx = x_grid.len();
        if nx < 2 || nh == 0 {
            return None;
        }
        let x0 = x_grid[0];
        let dx = (x_grid[nx - 1] - x0) / (nx - 1) as f64;
        let uniform = x_grid
            .iter()
            .enumerate()
            .all(|(m, &x)| (x - (x0 + m as f64 * dx)).abs() <= 1e-12 * dx.abs().max(x.abs()));
        if !uniform || dx == 0.0 {
            return None;
        }
        let theta = dh * dx;
        let chirp = |j: f64| C64::from_polar(1.0, 0.5 * theta * j * j);
        let len = (nh + nx - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);

        let mut kernel = vec![ZERO; len];
        for m in 0..nx {
            kernel[m] = chirp(m as f64).conj();
        }
        for k in 1..nh {
            kernel[len - k] = chirp(k as f64).conj();
        }
        fft.process(&mut kernel);
        let scale = 1.0 / len as f64;
        for c in &mut kernel {
            *c *= scale;
        }
        let pre = (0..nh)
            .map(|k| chirp(k as f64) * C64::from_polar(w, k as f64 * dh * x0))
            .collect();
        let post = x_grid
            .iter()
            .enumerate()
            .map(|(m, &x)| chirp(m as f64) * C64::from_polar(1.0, h0 * x))
            .collect();
        Some(Self {
            nh,
            nx,
            pre,
            post,
            kernel,
            fft,
            ifft,
            buf: vec![ZERO; len],
        })
    }

    fn apply(&mut self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.nh);
        self.buf.fill(ZERO);
        for ((b, c), p) in self.buf.iter_mut().zip(v).zip(&self.pre) {
            *b = c * p;
        }
        self.fft.process(&mut self.buf);
        for (b, k) in self.buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.ifft.process(&mut self.buf);
        for ((o, b), p) in out.iter_mut().zip(&self.buf[..self.nx]).zip(&self.post) {
            *o = b * p;
        }
    }
}

/// Rebuilds the field at time `t` on `x_grid`.
pub fn evaluate_field(spec: &InitialSpectrum, x_grid: &[f64], t: f64, p: &SystemParams) -> Result<ContinuumField> {
    require_resonance(p)?;
    if spec.n_chains() != p.n_chains || spec.l_max() != p.l_max {
        return Err(Error::ShapeMismatch(format!(
            "spectrum is {} chains x {} blocks, params want {} x {}",
            spec.n_chains(),
            spec.l_max() + 1,
            p.n_chains,
            p.l_max + 1
        )));
    }
    let disp = mode_dispersions(p)?;
    let n = p.n_chains;
    let nx = x_grid.len();
    let nh = spec.h.len();
    let w = spec.quadrature.weight();
    let h0 = spec.h[0];
    let dh = if nh > 1 { spec.h[1] - h0 } else { 0.0 };
    let mut chirp = ChirpSynthesizer::new(h0, dh, w, nh, x_grid);

    let mut phi_a = Vec::with_capacity(p.l_max + 1);
    let mut phi_b = Vec::with_capacity(p.l_max + 1);
    let mut va = vec![ZERO; nh];
    let mut vb = vec![ZERO; nh];
    let mut mode_a = vec![ZERO; n * nx];
    let mut mode_b = vec![ZERO; n * nx];
    for (l, per_q) in spec.modes.iter().enumerate() {
        for (q, (ta, tb)) in per_q.iter().enumerate() {
            for (k, &h) in spec.h.iter().enumerate() {
                let u = propagate_mode(&disp[q], l, h, t, p.g);
                va[k] = u[0][0] * ta[k] + u[0][1] * tb[k];
                vb[k] = u[1][0] * ta[k] + u[1][1] * tb[k];
            }
            let rows = q * nx..(q + 1) * nx;
            match chirp.as_mut() {
                Some(c) => {
                    c.apply(&va, &mut mode_a[rows.clone()]);
                    c.apply(&vb, &mut mode_b[rows]);
                }
                None => {
                    synthesize_direct(h0, dh, w, &va, x_grid, &mut mode_a[rows.clone()]);
                    synthesize_direct(h0, dh, w, &vb, x_grid, &mut mode_b[rows]);
                }
            }
        }
        // Φ_j = Σ_q Φ_q exp(−2πi q j / n)
        let mut la = vec![ZERO; n * nx];
        let mut lb = vec![ZERO; n * nx];
        for j in 0..n {
            for q in 0..n {
                let tw = twiddle(q * j, n, -1.0);
                for ix in 0..nx {
                    la[j * nx + ix] += tw * mode_a[q * nx + ix];
                    lb[j * nx + ix] += tw * mode_b[q * nx + ix];
                }
            }
        }
        phi_a.push(la);
        phi_b.push(lb);
    }
    Ok(ContinuumField {
        t,
        x_grid: x_grid.to_vec(),
        n_chains: n,
        phi_a,
        phi_b,
        omega0: p.omega0,
        wavenumber: p.wavenumber,
        lambda: p.lambda,
    })
}

/// Lattice site positions `m·a`.
pub fn lattice_grid(p: &SystemParams) -> Vec<f64> {
    (0..p.n_sites).map(|m| m as f64 * p.site_spacing).collect()
}

/// Sample times matching the lattice integrator: every
/// `sample_stride·dt` from 0 to `t_end`.
pub fn sample_times(p: &SystemParams) -> Vec<f64> {
    (0..=p.n_steps())
        .step_by(p.sample_stride)
        .map(|s| s as f64 * p.dt)
        .collect()
}

/// Evaluates the resonant analytic solution on the lattice grid at every
/// sample time, handing each lattice-sampled state to `observe`.
pub fn run_with<F>(p: &SystemParams, quad: Option<Quadrature>, mut observe: F) -> Result<()>
where
    F: FnMut(f64, &AmplitudeField) -> Result<()>,
{
    p.validate()?;
    require_resonance(p)?;
    let grid = lattice_grid(p);
    let quad = quad.unwrap_or_else(|| Quadrature::for_grid(p, &grid));
    let spec = match p.packet {
        PacketShape::Gaussian => gaussian_transform(p, quad)?,
        PacketShape::SingleSite => field_transform(&crate::model::initial_state(p)?, p, quad)?,
    };
    for t in sample_times(p) {
        let field = evaluate_field(&spec, &grid, t, p)?;
        observe(t, &field.to_lattice(p.site_spacing))?;
    }
    Ok(())
}

/// Inversion and norm series of the analytic solution.
pub fn inversion_series(p: &SystemParams, quad: Option<Quadrature>) -> Result<(TimeSeries, TimeSeries)> {
    let mut w = TimeSeries::new("inversion");
    let mut norm = TimeSeries::new("norm");
    run_with(p, quad, |t, f| {
        w.push(t, inversion(f)?);
        norm.push(t, total_norm(f));
        Ok(())
    })?;
    Ok((w, norm))
}
