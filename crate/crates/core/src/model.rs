//! Physical and numerical parameters, the amplitude field, coupling
//! circulants, coherent photon amplitudes and the initial Gaussian packet.
//!
//! Units: ħ = 1. The bundled scenarios use g = 1 and a = 1, so rates are in
//! units of g and lengths in units of a.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::circulant::Circulant;
use crate::error::{Error, Result};

/// Poisson tail weight accepted beyond the photon cutoff.
pub const TRUNCATION_TOL: f64 = 1e-8;

/// Upper bound on `dt · max(|ω₀|, |ω|, g√(l_max+1), 4·max|ξ|)`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Largest photon cutoff tried when choosing `l_max` automatically.
const MAX_AUTO_L: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketShape {
    /// `exp(-(x - x0)² / 2σ²) / (πσ²)^{1/4}`, sampled with a √a weight.
    Gaussian,
    /// All amplitude on the single site nearest to `x0`.
    SingleSite,
}

impl PacketShape {
    pub fn name(self) -> &'static str {
        match self {
            PacketShape::Gaussian => "gaussian",
            PacketShape::SingleSite => "single_site",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_chains: usize,
    pub n_sites: usize,
    pub site_spacing: f64,
    pub omega0: f64,
    pub omega: f64,
    pub g: f64,
    pub wavenumber: f64,
    /// Excited-state coupling by chain distance d = |l - j|.
    pub xi1: Vec<f64>,
    /// Ground-state coupling by chain distance.
    pub xi2: Vec<f64>,
    pub lambda: f64,
    pub mean_photons: f64,
    pub l_max: usize,
    pub sigma: f64,
    pub x0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    /// Initial transverse profile u_j; `None` means uniform 1/√n.
    pub chain_profile: Option<Vec<C64>>,
    pub packet: PacketShape,
}

impl SystemParams {
    /// Single chain with the fig1 couplings in units of g and a. `l_max` is
    /// chosen by the Poisson tail criterion.
    pub fn single_chain_defaults() -> Self {
        let mut p = Self {
            n_chains: 1,
            n_sites: 1024,
            site_spacing: 1.0,
            omega0: 0.0,
            omega: 0.0,
            g: 1.0,
            wavenumber: 0.5,
            xi1: vec![10.0],
            xi2: vec![7.0],
            lambda: 0.05,
            mean_photons: 4.0,
            l_max: 1,
            sigma: 20.0,
            x0: 880.0,
            dt: 1e-3,
            t_end: 60.0,
            sample_stride: 20,
            chain_profile: None,
            packet: PacketShape::Gaussian,
        };
        p.l_max = auto_l_max(p.mean_photons);
        p
    }

    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omega
    }

    pub fn n_blocks(&self) -> usize {
        self.l_max + 1
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi1
            .iter()
            .chain(&self.xi2)
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    pub fn has_hopping(&self) -> bool {
        self.max_abs_xi() > 0.0
    }

    /// `dt · max(|ω₀|, |ω|, g√(l_max+1), 4·max|ξ|)`.
    pub fn stability_number(&self) -> f64 {
        let rates = [
            self.omega0.abs(),
            self.omega.abs(),
            self.g * ((self.l_max + 1) as f64).sqrt(),
            4.0 * self.max_abs_xi(),
        ];
        self.dt * rates.into_iter().fold(0.0, f64::max)
    }

    pub fn coupling1(&self) -> Result<Circulant> {
        build_coupling(&self.xi1)
    }

    pub fn coupling2(&self) -> Result<Circulant> {
        build_coupling(&self.xi2)
    }

    /// Normalized chain profile, uniform unless configured.
    pub fn profile(&self) -> Vec<C64> {
        match &self.chain_profile {
            Some(u) => u.clone(),
            None => vec![C64::new(1.0 / (self.n_chains as f64).sqrt(), 0.0); self.n_chains],
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::InvalidParam {
                field,
                reason: reason.into(),
            }
        }
        let finite = [
            ("site_spacing", self.site_spacing),
            ("omega0", self.omega0),
            ("omega", self.omega),
            ("g", self.g),
            ("wavenumber", self.wavenumber),
            ("lambda", self.lambda),
            ("mean_photons", self.mean_photons),
            ("sigma", self.sigma),
            ("x0", self.x0),
            ("dt", self.dt),
            ("t_end", self.t_end),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(bad(name, format!("must be finite, got {v}")));
            }
        }
        if self.n_chains == 0 {
            return Err(bad("n_chains", "must be at least 1"));
        }
        if self.n_sites == 0 {
            return Err(bad("n_sites", "must be at least 1"));
        }
        if self.site_spacing <= 0.0 {
            return Err(bad("site_spacing", "must be positive"));
        }
        if self.g < 0.0 {
            return Err(bad("g", "must be nonnegative"));
        }
        if self.lambda < 0.0 {
            return Err(bad("lambda", "must be nonnegative"));
        }
        if self.mean_photons < 0.0 {
            return Err(bad("mean_photons", "must be nonnegative"));
        }
        if self.l_max == 0 {
            return Err(bad("l_max", "must be at least 1"));
        }
        if self.sigma <= 0.0 {
            return Err(bad("sigma", "must be positive"));
        }
        if self.dt <= 0.0 {
            return Err(bad("dt", "must be positive"));
        }
        if self.t_end <= 0.0 {
            return Err(bad("t_end", "must be positive"));
        }
        if self.n_steps() == 0 {
            return Err(bad("t_end", "shorter than one time step"));
        }
        if self.sample_stride == 0 {
            return Err(bad("sample_stride", "must be at least 1"));
        }
        for (name, xi) in [("xi1", &self.xi1), ("xi2", &self.xi2)] {
            if xi.len() != self.n_chains {
                return Err(bad(
                    name,
                    format!("expected {} entries (one per chain distance), got {}", self.n_chains, xi.len()),
                ));
            }
            if let Some(x) = xi.iter().find(|x| !x.is_finite()) {
                return Err(bad(name, format!("entry {x} is not finite")));
            }
            check_symmetric(xi).map_err(|e| bad(name, e.to_string()))?;
        }
        if let Some(u) = &self.chain_profile {
            if u.len() != self.n_chains {
                return Err(bad(
                    "chain_profile",
                    format!("expected {} entries, got {}", self.n_chains, u.len()),
                ));
            }
            let norm: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(bad("chain_profile", format!("must be normalized, Σ|u|² = {norm}")));
            }
        }
        let s = self.stability_number();
        if s >= STABILITY_LIMIT {
            return Err(bad(
                "dt",
                format!("step guard violated: dt·max rate = {s:.4} (limit {STABILITY_LIMIT})"),
            ));
        }
        Ok(())
    }
}

/// Amplitudes of one photon block l: `|a_{mj}, l⟩` and `|b_{mj}, l+1⟩`.
/// Both halves are indexed `j * n_sites + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonBlock {
    data: Vec<C64>,
    half: usize,
}

impl PhotonBlock {
    pub fn zeros(n_chains: usize, n_sites: usize) -> Self {
        let half = n_chains * n_sites;
        Self {
            data: vec![C64::new(0.0, 0.0); 2 * half],
            half,
        }
    }

    pub fn a(&self) -> &[C64] {
        &self.data[..self.half]
    }

    pub fn b(&self) -> &[C64] {
        &self.data[self.half..]
    }

    pub fn a_mut(&mut self) -> &mut [C64] {
        &mut self.data[..self.half]
    }

    pub fn b_mut(&mut self) -> &mut [C64] {
        &mut self.data[self.half..]
    }

    pub(crate) fn raw(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Full state: `A[j][m][l]` and `B[j][m][l]`, where the B entry at block
/// index l carries l + 1 photons.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    n_chains: usize,
    n_sites: usize,
    blocks: Vec<PhotonBlock>,
}

impl AmplitudeField {
    pub fn zeros(n_chains: usize, n_sites: usize, l_max: usize) -> Self {
        Self {
            n_chains,
            n_sites,
            blocks: (0..=l_max).map(|_| PhotonBlock::zeros(n_chains, n_sites)).collect(),
        }
    }

    pub fn for_params(p: &SystemParams) -> Self {
        Self::zeros(p.n_chains, p.n_sites, p.l_max)
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn l_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[PhotonBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [PhotonBlock] {
        &mut self.blocks
    }

    fn idx(&self, j: usize, m: usize) -> usize {
        j * self.n_sites + m
    }

    pub fn a(&self, j: usize, m: usize, l: usize) -> C64 {
        self.blocks[l].a()[self.idx(j, m)]
    }

    pub fn b(&self, j: usize, m: usize, l: usize) -> C64 {
        self.blocks[l].b()[self.idx(j, m)]
    }

    pub fn set_a(&mut self, j: usize, m: usize, l: usize, v: C64) {
        let i = self.idx(j, m);
        self.blocks[l].a_mut()[i] = v;
    }

    pub fn set_b(&mut self, j: usize, m: usize, l: usize, v: C64) {
        let i = self.idx(j, m);
        self.blocks[l].b_mut()[i] = v;
    }

    pub fn matches(&self, p: &SystemParams) -> bool {
        self.n_chains == p.n_chains && self.n_sites == p.n_sites && self.l_max() == p.l_max
    }

    pub fn check_shape(&self, p: &SystemParams) -> Result<()> {
        if self.matches(p) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "field is {}x{}x{}, params want {}x{}x{}",
                self.n_chains,
                self.n_sites,
                self.l_max() + 1,
                p.n_chains,
                p.n_sites,
                p.l_max + 1
            )))
        }
    }

    /// Largest amplitude magnitude anywhere.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.raw())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest magnitude on the outermost `width` sites at either end.
    pub fn max_abs_at_edges(&self, width: usize) -> f64 {
        let m = self.n_sites;
        let width = width.min(m);
        let mut out: f64 = 0.0;
        for block in &self.blocks {
            for half in [block.a(), block.b()] {
                for row in half.chunks(m) {
                    for c in row[..width].iter().chain(&row[m - width..]) {
                        out = out.max(c.norm());
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for block in &mut out.blocks {
            for c in block.raw_mut() {
                *c *= s;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(x, y)| x.raw().iter().zip(y.raw()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_symmetric(xi: &[f64]) -> Result<()> {
    let n = xi.len();
    for d in 1..n {
        let mirror = n - d;
        let (x, y) = (xi[d], xi[mirror]);
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::AsymmetricCoupling {
                d,
                value: x,
                mirror,
                mirror_value: y,
            });
        }
    }
    Ok(())
}

/// Coupling circulant with `coeffs[d] = xi[d]`, symmetric under d ↔ n − d.
pub fn build_coupling(xi: &[f64]) -> Result<Circulant> {
    if xi.is_empty() {
        return Err(Error::EmptyCirculant);
    }
    check_symmetric(xi)?;
    Circulant::from_real(xi)
}

/// Real parts of the coupling eigenvalues `k_q([ξ])`.
pub fn coupling_eigenvalues(xi: &[f64]) -> Result<Vec<f64>> {
    Ok(build_coupling(xi)?.eigenvalues().into_iter().map(|k| k.re).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAmplitudes {
    /// `c(l)` for l = 0..=l_max, real and nonnegative.
    pub amplitudes: Vec<f64>,
    /// Missing probability `1 − Σ c(l)²`.
    pub truncation_error: f64,
}

impl CoherentAmplitudes {
    pub fn exceeds_tolerance(&self) -> bool {
        self.truncation_error >= TRUNCATION_TOL
    }
}

/// `c(l) = exp(−⟨n⟩/2) ⟨n⟩^{l/2} / √(l!)`, by the stable recurrence
/// `c(l) = c(l−1) √(⟨n⟩/l)`.
pub fn coherent_amplitudes(mean_photons: f64, l_max: usize) -> CoherentAmplitudes {
    let mut amplitudes = Vec::with_capacity(l_max + 1);
    let mut c = (-mean_photons / 2.0).exp();
    amplitudes.push(c);
    for l in 1..=l_max {
        c *= (mean_photons / l as f64).sqrt();
        amplitudes.push(c);
    }
    let kept: f64 = amplitudes.iter().map(|c| c * c).sum();
    CoherentAmplitudes {
        amplitudes,
        truncation_error: (1.0 - kept).max(0.0),
    }
}

/// Smallest cutoff (at least 1) whose Poisson tail is below [`TRUNCATION_TOL`].
pub fn auto_l_max(mean_photons: f64) -> usize {
    let mut c2 = (-mean_photons).exp();
    let mut kept = c2;
    let mut l = 0;
    while 1.0 - kept >= TRUNCATION_TOL && l < MAX_AUTO_L {
        l += 1;
        c2 *= mean_photons / l as f64;
        kept += c2;
    }
    l.max(1)
}

/// Gaussian packet in photon blocks weighted by the coherent amplitudes;
/// the B component starts empty.
pub fn initial_state(p: &SystemParams) -> Result<AmplitudeField> {
    p.validate()?;
    let coherent = coherent_amplitudes(p.mean_photons, p.l_max);
    if coherent.exceeds_tolerance() {
        return Err(Error::Truncation {
            l_max: p.l_max,
            tail: coherent.truncation_error,
        });
    }
    let a = p.site_spacing;
    let spatial: Vec<f64> = match p.packet {
        PacketShape::Gaussian => {
            let lo = p.x0 - 5.0 * p.sigma;
            let hi = p.x0 + 5.0 * p.sigma;
            let last = (p.n_sites - 1) as f64 * a;
            if lo < 0.0 || hi > last {
                return Err(Error::PacketAtEdge(format!(
                    "x0 ± 5σ = [{lo}, {hi}] must lie inside the lattice [0, {last}]"
                )));
            }
            let norm = (PI * p.sigma * p.sigma).powf(-0.25) * a.sqrt();
            (0..p.n_sites)
                .map(|m| {
                    let dx = m as f64 * a - p.x0;
                    norm * (-dx * dx / (2.0 * p.sigma * p.sigma)).exp()
                })
                .collect()
        }
        PacketShape::SingleSite => {
            let site = (p.x0 / a).round();
            if site < 0.0 || site >= p.n_sites as f64 {
                return Err(Error::PacketAtEdge(format!(
                    "x0 = {} falls outside the lattice",
                    p.x0
                )));
            }
            let mut v = vec![0.0; p.n_sites];
            v[site as usize] = 1.0;
            v
        }
    };
    let profile = p.profile();
    let mut field = AmplitudeField::for_params(p);
    for (block, &c) in field.blocks.iter_mut().zip(&coherent.amplitudes) {
        let a = block.a_mut();
        for (j, u) in profile.iter().enumerate() {
            for (m, s) in spatial.iter().enumerate() {
                a[j * p.n_sites + m] = u * (c * s);
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::twiddle;

    fn small_params() -> SystemParams {
        SystemParams {
            n_sites: 400,
            x0: 200.0,
            ..SystemParams::single_chain_defaults()
        }
    }

    #[test]
    fn scalar_coupling() {
        let c = build_coupling(&[3.5]).unwrap();
        assert_eq!(c.coeffs(), &[C64::new(3.5, 0.0)]);
    }

    #[test]
    fn coupling_eigenvalues_dense_oracle() {
        // n=3, xi=[0, ξ, ξ]: all-ones minus identity times ξ has spectrum {2ξ, −ξ, −ξ}.
        let x = 1.7;
        let ev = build_coupling(&[0.0, x, x]).unwrap().eigenvalues();
        let want = [2.0 * x, -x, -x];
        for (k, w) in ev.iter().zip(want) {
            assert!((k.re - w).abs() < 1e-12 && k.im.abs() < 1e-12);
        }
        let ev = build_coupling(&[0.0, x]).unwrap().eigenvalues();
        assert!((ev[0].re - x).abs() < 1e-15 && (ev[1].re + x).abs() < 1e-15);
    }

    #[test]
    fn symmetric_couplings_have_real_spectra() {
        let xi = [0.3, -1.1, 2.5, 0.4, 2.5, -1.1];
        let ev = build_coupling(&xi).unwrap().eigenvalues();
        assert!(ev.iter().all(|k| k.im.abs() < 1e-12));
    }

    #[test]
    fn asymmetric_coupling_rejected() {
        let err = build_coupling(&[0.0, 1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::AsymmetricCoupling { d: 1, mirror: 2, .. }));
    }

    #[test]
    fn vacuum_amplitudes() {
        let c = coherent_amplitudes(0.0, 5);
        assert_eq!(c.amplitudes[0], 1.0);
        assert!(c.amplitudes[1..].iter().all(|&x| x == 0.0));
        assert_eq!(c.truncation_error, 0.0);
    }

    #[test]
    fn coherent_four_is_poisson() {
        // Direct Poisson evaluation: 4^4 e^-4 / 4! = 0.195366815...
        let c = coherent_amplitudes(4.0, 30);
        let direct = 4f64.powi(4) * (-4f64).exp() / 24.0;
        assert!((c.amplitudes[4].powi(2) - direct).abs() < 1e-15);
        assert!((direct - 0.19537).abs() < 1e-5);
        let sum: f64 = c.amplitudes.iter().map(|x| x * x).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auto_cutoff_meets_tail_criterion() {
        for nbar in [0.0, 0.5, 4.0, 25.0] {
            let l = auto_l_max(nbar);
            assert!(coherent_amplitudes(nbar, l).truncation_error < TRUNCATION_TOL);
            if l > 1 {
                assert!(coherent_amplitudes(nbar, l - 1).exceeds_tolerance());
            }
        }
    }

    #[test]
    fn initial_state_norm_is_one() {
        // Direct summation oracle over the sampled Gaussian.
        let p = SystemParams {
            x0: 512.0,
            ..SystemParams::single_chain_defaults()
        };
        let f = initial_state(&p).unwrap();
        let norm: f64 = f.blocks().iter().map(|b| b.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-6, "norm {norm}");
        assert!(f.blocks().iter().all(|b| b.b().iter().all(|c| c.norm() == 0.0)));
    }

    #[test]
    fn initial_state_follows_gaussian_ratio() {
        let p = small_params();
        let f = initial_state(&p).unwrap();
        let (m0, l) = (190, 4);
        let ratio = f.a(0, m0, l).re / f.a(0, m0 + 1, l).re;
        let x = |m: usize| m as f64 - p.x0;
        let want = ((x(m0 + 1).powi(2) - x(m0).powi(2)) / (2.0 * p.sigma * p.sigma)).exp();
        assert!((ratio - want).abs() < 1e-12 * want);
    }

    #[test]
    fn packet_near_edge_rejected() {
        let p = SystemParams {
            x0: 60.0,
            ..small_params()
        };
        assert!(matches!(initial_state(&p), Err(Error::PacketAtEdge(_))));
    }

    #[test]
    fn uniform_profile_lives_in_mode_zero() {
        let p = SystemParams {
            n_chains: 5,
            xi1: vec![1.0, 0.5, 0.0, 0.0, 0.5],
            xi2: vec![1.0, 0.2, 0.0, 0.0, 0.2],
            ..small_params()
        };
        let f = initial_state(&p).unwrap();
        let n = p.n_chains;
        for m in [150, 200, 230] {
            for q in 1..n {
                let proj: C64 = (0..n).map(|j| f.a(j, m, 3) * twiddle(q * j, n, 1.0)).sum::<C64>() / n as f64;
                assert!(proj.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut p = small_params();
        p.xi1 = vec![1.0, 2.0];
        assert!(matches!(p.validate(), Err(Error::InvalidParam { field: "xi1", .. })));
        let mut p = small_params();
        p.dt = 0.01;
        assert!(matches!(p.validate(), Err(Error::InvalidParam { field: "dt", .. })));
        let mut p = small_params();
        p.l_max = 3;
        assert!(matches!(initial_state(&p), Err(Error::Truncation { l_max: 3, .. })));
    }
}
