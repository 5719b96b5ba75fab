//! Fixed-step RK4 integration of the lattice amplitude equations.
//!
//! Per photon block l, chain j and site m (open chain ends, cyclic chain
//! distance):
//!
//! ```text
//! dA/dt = −(i/2)ω₀A − (λ/2)A + i Σ_r ξ⁽¹⁾(A[r][m−1] + A[r][m+1]) − i g√(l+1) B e^{+i(kma − ωt)}
//! dB/dt = +(i/2)ω₀B − (λ/2)B + i Σ_r ξ⁽²⁾(B[r][m−1] + B[r][m+1]) − i g√(l+1) A e^{−i(kma − ωt)}
//! ```
//!
//! Photon blocks never mix and are stepped independently. Each step only
//! touches the span of nonzero sites widened by one site per stage.

use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::circulant::{forward_dft, inverse_dft_unscaled};
use crate::error::{Error, Result};
use crate::model::{AmplitudeField, PhotonBlock, SystemParams};

/// Sites at each end watched by the edge-contact guard.
pub const EDGE_WIDTH: usize = 2;
/// Edge amplitude, relative to the field maximum, that aborts a run.
pub const EDGE_TOL: f64 = 1e-4;

/// Amplitude components smaller than this are set to zero after each step.
pub const FLUSH_BELOW: f64 = 1e-200;

const STAGES: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<AmplitudeField>,
    pub params: SystemParams,
}

/// Precomputed coefficients of the right-hand side for one parameter set.
struct Stepper {
    n: usize,
    m: usize,
    omega: f64,
    g: f64,
    diag_a: C64,
    diag_b: C64,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    site_phase: Vec<C64>,
}

impl Stepper {
    fn new(p: &SystemParams) -> Self {
        let ka = p.wavenumber * p.site_spacing;
        Self {
            n: p.n_chains,
            m: p.n_sites,
            omega: p.omega,
            g: p.g,
            diag_a: C64::new(-0.5 * p.lambda, -0.5 * p.omega0),
            diag_b: C64::new(-0.5 * p.lambda, 0.5 * p.omega0),
            xi1: p.xi1.clone(),
            xi2: p.xi2.clone(),
            site_phase: (0..p.n_sites)
                .map(|m| C64::from_polar(1.0, ka * m as f64))
                .collect(),
        }
    }

    /// `e^{i(kma − ωt)}` for every site.
    fn coupling_phase(&self, t: f64, out: &mut [C64]) {
        let tp = C64::from_polar(1.0, -self.omega * t);
        for (o, s) in out.iter_mut().zip(&self.site_phase) {
            *o = s * tp;
        }
    }

    /// Right-hand side restricted to the sites `w` of every chain; the
    /// field is taken as zero outside `w`.
    fn block_rhs(&self, y: &[C64], dy: &mut [C64], l: usize, phase: &[C64], w: Range<usize>) {
        let half = self.n * self.m;
        let (ya, yb) = y.split_at(half);
        let (da, db) = dy.split_at_mut(half);
        let c = self.g * ((l + 1) as f64).sqrt();
        let (la, lb) = (self.diag_a, self.diag_b);
        let phase = &phase[w.clone()];

        for j in 0..self.n {
            let row = j * self.m + w.start..j * self.m + w.end;
            let rows = da[row.clone()]
                .iter_mut()
                .zip(db[row.clone()].iter_mut())
                .zip(&ya[row.clone()])
                .zip(&yb[row]);
            for ((((da, db), ya), yb), ph) in rows.zip(phase) {
                // −i·c·e^{iθ}·B and −i·c·e^{−iθ}·A
                let pb = ph * yb;
                let pa = ph.conj() * ya;
                *da = la * ya + C64::new(c * pb.im, -c * pb.re);
                *db = lb * yb + C64::new(c * pa.im, -c * pa.re);
            }
        }

        for j in 0..self.n {
            for r in 0..self.n {
                let d = (r + self.n - j) % self.n;
                let src = r * self.m + w.start..r * self.m + w.end;
                let dst = j * self.m + w.start..j * self.m + w.end;
                if self.xi1[d] != 0.0 {
                    add_hopping(&mut da[dst.clone()], &ya[src.clone()], self.xi1[d]);
                }
                if self.xi2[d] != 0.0 {
                    add_hopping(&mut db[dst], &yb[src], self.xi2[d]);
                }
            }
        }
    }

    /// Sites that can be nonzero after one step: the nonzero span of `y`
    /// widened by one site per stage.
    fn active_sites(&self, y: &[C64]) -> Range<usize> {
        let mut lo = self.m;
        let mut hi = 0;
        for row in y.chunks_exact(self.m) {
            if let Some(first) = row.iter().position(|c| *c != ZERO) {
                let last = row.iter().rposition(|c| *c != ZERO).unwrap_or(first);
                lo = lo.min(first);
                hi = hi.max(last + 1);
            }
        }
        if lo >= hi {
            return 0..0;
        }
        lo.saturating_sub(STAGES)..(hi + STAGES).min(self.m)
    }
}

/// `out[m] += i·xi·(src[m−1] + src[m+1])`, zero beyond either end.
fn add_hopping(out: &mut [C64], src: &[C64], xi: f64) {
    let m = src.len();
    if m < 2 {
        return;
    }
    let add = |o: &mut C64, s: C64| {
        o.re -= xi * s.im;
        o.im += xi * s.re;
    };
    add(&mut out[0], src[1]);
    for (o, w) in out[1..m - 1].iter_mut().zip(src.windows(3)) {
        add(o, w[0] + w[2]);
    }
    add(&mut out[m - 1], src[m - 2]);
}

struct Rk4Scratch {
    k: Vec<C64>,
    tmp: Vec<C64>,
    acc: Vec<C64>,
}

impl Rk4Scratch {
    fn new(len: usize) -> Self {
        Self {
            k: vec![ZERO; len],
            tmp: vec![ZERO; len],
            acc: vec![ZERO; len],
        }
    }

    /// One classical RK4 step of a block; the three phase vectors belong to
    /// t, t + dt/2 and t + dt.
    fn step(&mut self, st: &Stepper, y: &mut [C64], l: usize, dt: f64, phases: [&[C64]; 3]) {
        let w = st.active_sites(y);
        if w.is_empty() {
            return;
        }
        let rows: Vec<Range<usize>> = (0..2 * st.n)
            .map(|r| r * st.m + w.start..r * st.m + w.end)
            .collect();
        let h2 = 0.5 * dt;
        let sixth = dt / 6.0;
        for stage in 0..STAGES {
            let (src, phase): (&[C64], _) = match stage {
                0 => (y, phases[0]),
                1 | 2 => (&self.tmp, phases[1]),
                _ => (&self.tmp, phases[2]),
            };
            st.block_rhs(src, &mut self.k, l, phase, w.clone());
            for r in &rows {
                let acc = &mut self.acc[r.clone()];
                let tmp = &mut self.tmp[r.clone()];
                let k = &self.k[r.clone()];
                let y = &mut y[r.clone()];
                match stage {
                    0 => {
                        for (((acc, tmp), k), y) in acc.iter_mut().zip(tmp).zip(k).zip(y.iter()) {
                            *acc = *k;
                            *tmp = y + k * h2;
                        }
                    }
                    1 | 2 => {
                        let h = if stage == 1 { h2 } else { dt };
                        for (((acc, tmp), k), y) in acc.iter_mut().zip(tmp).zip(k).zip(y.iter()) {
                            *acc += k * 2.0;
                            *tmp = y + k * h;
                        }
                    }
                    _ => {
                        for ((y, acc), k) in y.iter_mut().zip(acc.iter()).zip(k) {
                            *y = flush_tiny(*y + (acc + k) * sixth);
                        }
                    }
                }
            }
        }
    }
}

/// Zeroes components below [`FLUSH_BELOW`].
#[inline]
fn flush_tiny(v: C64) -> C64 {
    let keep = |x: f64| if x.abs() < FLUSH_BELOW { 0.0 } else { x };
    C64::new(keep(v.re), keep(v.im))
}

/// Time derivative of the whole field at time `t`.
pub fn rhs(state: &AmplitudeField, t: f64, p: &SystemParams) -> Result<AmplitudeField> {
    state.check_shape(p)?;
    let st = Stepper::new(p);
    let mut phase = vec![ZERO; p.n_sites];
    st.coupling_phase(t, &mut phase);
    let mut out = AmplitudeField::for_params(p);
    for (l, (src, dst)) in state.blocks().iter().zip(out.blocks_mut()).enumerate() {
        st.block_rhs(src.raw(), dst.raw_mut(), l, &phase, 0..p.n_sites);
    }
    Ok(out)
}

fn check_edges(field: &AmplitudeField, p: &SystemParams, t: f64) -> Result<()> {
    if !p.has_hopping() {
        return Ok(());
    }
    let max = field.max_abs();
    let edge = field.max_abs_at_edges(EDGE_WIDTH);
    if max > 0.0 && edge > EDGE_TOL * max {
        return Err(Error::EdgeContact { time: t, edge, max });
    }
    Ok(())
}

/// Propagates `initial` from t = 0 to `t_end`, handing every sampled state
/// (each `sample_stride` steps, starting at t = 0) to `observe`.
///
/// With any nonzero coupling the run aborts with [`Error::EdgeContact`] once
/// the outermost sites carry more than [`EDGE_TOL`] of the peak amplitude.
pub fn integrate_with<F>(initial: &AmplitudeField, p: &SystemParams, observe: F) -> Result<()>
where
    F: FnMut(f64, &AmplitudeField) -> Result<()>,
{
    propagate(initial, p, true, observe)
}

/// Like [`integrate_with`] without the edge-contact guard. Amplitudes that
/// reach an open end are reflected, so observables no longer describe a
/// packet on the infinite line, but the evolution stays norm-preserving.
pub fn integrate_unguarded_with<F>(initial: &AmplitudeField, p: &SystemParams, observe: F) -> Result<()>
where
    F: FnMut(f64, &AmplitudeField) -> Result<()>,
{
    propagate(initial, p, false, observe)
}

fn propagate<F>(initial: &AmplitudeField, p: &SystemParams, guard: bool, mut observe: F) -> Result<()>
where
    F: FnMut(f64, &AmplitudeField) -> Result<()>,
{
    p.validate()?;
    initial.check_shape(p)?;
    let st = Stepper::new(p);
    let mut field = initial.clone();
    let mut scratch = Rk4Scratch::new(2 * p.n_chains * p.n_sites);
    let mut ph = [vec![ZERO; p.n_sites], vec![ZERO; p.n_sites], vec![ZERO; p.n_sites]];

    if guard {
        check_edges(&field, p, 0.0)?;
    }
    observe(0.0, &field)?;
    let n_steps = p.n_steps();
    for step in 0..n_steps {
        let t = step as f64 * p.dt;
        for (buf, tt) in ph.iter_mut().zip([t, t + 0.5 * p.dt, t + p.dt]) {
            st.coupling_phase(tt, buf);
        }
        for (l, block) in field.blocks_mut().iter_mut().enumerate() {
            scratch.step(&st, block.raw_mut(), l, p.dt, [&ph[0], &ph[1], &ph[2]]);
        }
        if (step + 1) % p.sample_stride == 0 {
            let t_next = (step + 1) as f64 * p.dt;
            if guard {
                check_edges(&field, p, t_next)?;
            }
            observe(t_next, &field)?;
        }
    }
    Ok(())
}

/// Like [`integrate_with`], keeping every sample.
pub fn integrate(initial: &AmplitudeField, p: &SystemParams) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    integrate_with(initial, p, |t, f| {
        times.push(t);
        snapshots.push(f.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        snapshots,
        params: p.clone(),
    })
}

/// Chain-mode amplitudes `â_q = (1/n) Σ_j a_j exp(+2πi q j / n)` for every
/// site and block. The result is laid out like an ordinary field with the
/// chain index replaced by q.
pub fn to_chain_modes(field: &AmplitudeField) -> AmplitudeField {
    chain_transform(field, |v| {
        let n = v.len() as f64;
        forward_dft(v).into_iter().map(|c| c / n).collect()
    })
}

/// Inverse of [`to_chain_modes`].
pub fn from_chain_modes(modes: &AmplitudeField) -> AmplitudeField {
    chain_transform(modes, inverse_dft_unscaled)
}

fn chain_transform(field: &AmplitudeField, f: impl Fn(&[C64]) -> Vec<C64>) -> AmplitudeField {
    let (n, m_sites) = (field.n_chains(), field.n_sites());
    let mut out = AmplitudeField::zeros(n, m_sites, field.l_max());
    let mut col = vec![ZERO; n];
    for l in 0..=field.l_max() {
        for m in 0..m_sites {
            for (j, c) in col.iter_mut().enumerate() {
                *c = field.a(j, m, l);
            }
            for (j, c) in f(&col).into_iter().enumerate() {
                out.set_a(j, m, l, c);
            }
            for (j, c) in col.iter_mut().enumerate() {
                *c = field.b(j, m, l);
            }
            for (j, c) in f(&col).into_iter().enumerate() {
                out.set_b(j, m, l, c);
            }
        }
    }
    out
}

/// Parameters of the single-chain problem obeyed by chain mode q: the
/// coupling circulants are replaced by their q-th eigenvalues.
pub fn mode_params(p: &SystemParams, q: usize) -> Result<SystemParams> {
    let k1 = crate::model::coupling_eigenvalues(&p.xi1)?;
    let k2 = crate::model::coupling_eigenvalues(&p.xi2)?;
    Ok(SystemParams {
        n_chains: 1,
        xi1: vec![k1[q]],
        xi2: vec![k2[q]],
        chain_profile: None,
        ..p.clone()
    })
}

/// Integrates every chain mode as an independent single-chain problem and
/// reassembles the chain amplitudes by the inverse chain transform. Returns
/// the sampled times and reassembled fields.
pub fn integrate_modewise(initial: &AmplitudeField, p: &SystemParams) -> Result<Trajectory> {
    p.validate()?;
    initial.check_shape(p)?;
    let n = p.n_chains;
    let modes = to_chain_modes(initial);
    let mut per_mode = Vec::with_capacity(n);
    for q in 0..n {
        let mp = mode_params(p, q)?;
        let mut single = AmplitudeField::for_params(&mp);
        for l in 0..=p.l_max {
            for m in 0..p.n_sites {
                single.set_a(0, m, l, modes.a(q, m, l));
                single.set_b(0, m, l, modes.b(q, m, l));
            }
        }
        per_mode.push(integrate(&single, &mp)?);
    }
    let times = per_mode[0].times.clone();
    let snapshots = (0..times.len())
        .map(|s| {
            let mut joined = AmplitudeField::for_params(p);
            for (q, traj) in per_mode.iter().enumerate() {
                let f = &traj.snapshots[s];
                for l in 0..=p.l_max {
                    for m in 0..p.n_sites {
                        joined.set_a(q, m, l, f.a(0, m, l));
                        joined.set_b(q, m, l, f.b(0, m, l));
                    }
                }
            }
            from_chain_modes(&joined)
        })
        .collect();
    Ok(Trajectory {
        times,
        snapshots,
        params: p.clone(),
    })
}

/// Norm of each photon block.
pub fn block_norms(field: &AmplitudeField) -> Vec<f64> {
    field.blocks().iter().map(PhotonBlock::norm_sqr).collect()
}
