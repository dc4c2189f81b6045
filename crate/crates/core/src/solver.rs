//! Method-of-lines solver for `∂²ₜu = Δu + u⁵` (radial, three dimensions).
//!
//! The unknown is `h = r·u`, which obeys `∂²ₜh = ∂²_r h + h⁵/r⁴` on the half
//! line with `h(t, 0) = 0`. Space is discretized by three-point differences,
//! time by classical RK4, and the outer node carries the outflow condition
//! `∂ₜh + ∂_r h = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{self, Region};
use crate::mesh::{FieldState, RadialMesh};
use crate::profile::{Gaussian, RadialProfile, ScaledW};
use crate::quadrature;

pub const CFL_MAX: f64 = 0.5;
pub const DT_FLOOR: f64 = 1e-12;
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

/// Relative amplitude below which data count as absent when locating the support.
const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub ratio: f64,
    pub inner_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub h: f64,
    pub r_max: f64,
    #[serde(default)]
    pub refine: Option<Refinement>,
}

impl MeshSpec {
    pub fn uniform(h: f64, r_max: f64) -> Self {
        Self {
            h,
            r_max,
            refine: None,
        }
    }

    pub fn build(&self) -> Result<RadialMesh> {
        match self.refine {
            None => RadialMesh::uniform(self.h, self.r_max),
            Some(Refinement { ratio, inner_count }) => {
                RadialMesh::geometric(self.h, ratio, inner_count, self.r_max)
            }
        }
    }
}

/// Initial-data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    /// `(1 + δ)·W_λ·φ(r/R_cut)` with `∂ₜu = 0`; `R_cut` defaults to `R_max/4`.
    NearW {
        delta: f64,
        lambda: f64,
        #[serde(default)]
        r_cut: Option<f64>,
    },
    /// `A·exp(−r²/σ²)` with `∂ₜu = 0`.
    Bump { amp: f64, sigma: f64 },
    /// `W_λ + A·exp(−r²/σ²)` with `∂ₜu = 0`.
    PerturbedW { lambda: f64, amp: f64, sigma: f64 },
    /// Sampled `(r, u, ∂ₜu)`, interpolated linearly and zero past the last sample.
    Samples { r: Vec<f64>, u: Vec<f64>, ut: Vec<f64> },
}

impl InitialData {
    pub fn family_name(&self) -> &'static str {
        match self {
            Self::NearW { .. } => "near_w",
            Self::Bump { .. } => "bump",
            Self::PerturbedW { .. } => "perturbed_w",
            Self::Samples { .. } => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub cfl: f64,
    /// Fixed base time step; when absent `cfl·min_spacing` is used.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub nonlinear: bool,
    pub blowup_threshold: f64,
    pub output_every: f64,
    pub data: InitialData,
    /// Keep a full field snapshot at every output time.
    #[serde(default = "default_true")]
    pub keep_frames: bool,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Defaults: `h = 0.02`, `R_max = 80`, CFL 0.5, `T_end = 20`, output every 0.1.
    pub fn new(data: InitialData) -> Self {
        Self {
            mesh: MeshSpec::uniform(0.02, 80.0),
            cfl: CFL_MAX,
            dt: None,
            t_end: 20.0,
            nonlinear: true,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            output_every: 0.1,
            data,
            keep_frames: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.cfl > 0.0 && self.cfl <= CFL_MAX) {
            return bad(format!("cfl must lie in (0, {CFL_MAX}], got {}", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive".into());
        }
        if !(self.output_every > 0.0) {
            return bad("output.every must be positive".into());
        }
        match &self.data {
            InitialData::NearW { lambda, r_cut, .. } => {
                if !(*lambda > 0.0) {
                    return bad("data.lambda must be positive".into());
                }
                if let Some(rc) = r_cut {
                    if !(*rc > 0.0) {
                        return bad("data.rcut must be positive".into());
                    }
                }
            }
            InitialData::Bump { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return bad("data.sigma must be positive".into());
                }
            }
            InitialData::PerturbedW { lambda, sigma, .. } => {
                if !(*lambda > 0.0) || !(*sigma > 0.0) {
                    return bad("data.lambda and data.sigma must be positive".into());
                }
            }
            InitialData::Samples { r, u, ut } => {
                if r.len() < 2 || u.len() != r.len() || ut.len() != r.len() {
                    return bad("sampled data need ≥ 2 rows of equal length".into());
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
                    return bad("sampled radii must be nonnegative and increasing".into());
                }
            }
        }
        let mesh = self.mesh.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if let Some(dt) = self.dt {
            if dt > CFL_MAX * mesh.min_spacing() * (1.0 + 1e-12) {
                return bad(format!(
                    "dt = {dt} violates the CFL bound {} for this mesh",
                    CFL_MAX * mesh.min_spacing()
                ));
            }
        }
        Ok(())
    }

    /// Base time step before the amplitude limiter.
    pub fn base_dt(&self, mesh: &RadialMesh) -> f64 {
        self.dt.unwrap_or(self.cfl * mesh.min_spacing())
    }
}

/// `C²` cutoff: 1 on `s ≤ 1`, `1 − 3σ² + 2σ³` (`σ = s − 1`) on `[1, 2]`, 0 beyond.
pub fn cutoff(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let x = s - 1.0;
        1.0 - 3.0 * x * x + 2.0 * x * x * x
    }
}

/// Derivative of [`cutoff`].
pub fn cutoff_derivative(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        0.0
    } else {
        let x = s - 1.0;
        -6.0 * x + 6.0 * x * x
    }
}

pub fn make_initial_data(data: &InitialData, mesh: Arc<RadialMesh>) -> Result<FieldState> {
    let r_max = mesh.r_max();
    match data {
        InitialData::NearW { delta, lambda, r_cut } => {
            let w = ScaledW::new(*lambda, 1.0 + delta);
            let rc = r_cut.unwrap_or(0.25 * r_max);
            Ok(FieldState::from_profiles(mesh, 0.0, |r| w.value(r) * cutoff(r / rc), |_| 0.0))
        }
        InitialData::Bump { amp, sigma } => {
            let g = Gaussian::centered(*amp, *sigma);
            Ok(FieldState::from_profiles(mesh, 0.0, |r| g.value(r), |_| 0.0))
        }
        InitialData::PerturbedW { lambda, amp, sigma } => {
            let w = ScaledW::new(*lambda, 1.0);
            let g = Gaussian::centered(*amp, *sigma);
            Ok(FieldState::from_profiles(mesh, 0.0, |r| w.value(r) + g.value(r), |_| 0.0))
        }
        InitialData::Samples { r, u, ut } => {
            let last = r[r.len() - 1];
            let sample = |vals: &[f64], x: f64| {
                if x > last {
                    0.0
                } else {
                    quadrature::interpolate_linear(r, vals, x)
                }
            };
            Ok(FieldState::from_profiles(mesh, 0.0, |x| sample(u, x), |x| sample(ut, x)))
        }
    }
}

/// Precomputed stencils for one mesh.
#[derive(Debug, Clone)]
pub struct Stepper {
    mesh: Arc<RadialMesh>,
    nonlinear: bool,
    lap: Vec<[f64; 3]>,
    outflow: [f64; 3],
}

impl Stepper {
    pub fn new(mesh: Arc<RadialMesh>, nonlinear: bool) -> Self {
        let r = mesh.nodes();
        let n = r.len();
        let mut lap = vec![[0.0; 3]; n];
        for i in 1..n - 1 {
            let h0 = r[i] - r[i - 1];
            let h1 = r[i + 1] - r[i];
            let s = 2.0 / (h0 + h1);
            lap[i] = [s / h0, -s * (1.0 / h0 + 1.0 / h1), s / h1];
        }
        // Backward second-order derivative at the last node.
        let (x0, x1, x2) = (r[n - 1], r[n - 2], r[n - 3]);
        let (d1, d2) = (x1 - x0, x2 - x0);
        let outflow = [
            -(d1 + d2) / (d1 * d2),
            d2 / (d1 * (d2 - d1)),
            -d1 / (d2 * (d2 - d1)),
        ];
        Self {
            mesh,
            nonlinear,
            lap,
            outflow,
        }
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn nonlinear(&self) -> bool {
        self.nonlinear
    }

    fn rhs(&self, h: &[f64], p: &[f64], dh: &mut [f64], dp: &mut [f64]) {
        let r = self.mesh.nodes();
        let n = r.len();
        dh[0] = 0.0;
        dp[0] = 0.0;
        for i in 1..n - 1 {
            let [a, b, c] = self.lap[i];
            let mut acc = a * h[i - 1] + b * h[i] + c * h[i + 1];
            if self.nonlinear {
                let u = h[i] / r[i];
                let u2 = u * u;
                acc += h[i] * u2 * u2;
            }
            dh[i] = p[i];
            dp[i] = acc;
        }
        let [a, b, c] = self.outflow;
        dh[n - 1] = -(a * h[n - 1] + b * h[n - 2] + c * h[n - 3]);
        dp[n - 1] = -(a * p[n - 1] + b * p[n - 2] + c * p[n - 3]);
    }

    /// One classical RK4 step of length `dt`.
    pub fn step(&self, state: &FieldState, dt: f64) -> FieldState {
        let n = state.h.len();
        let (h, p) = (&state.h, &state.hdot);
        let mut k = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]], [
            vec![0.0; n],
            vec![0.0; n],
        ]];
        let mut th = vec![0.0; n];
        let mut tp = vec![0.0; n];
        let coef = [0.5 * dt, 0.5 * dt, dt];
        {
            let [ka, kb] = &mut k[0];
            self.rhs(h, p, ka, kb);
        }
        for s in 0..3 {
            for i in 0..n {
                th[i] = h[i] + coef[s] * k[s][0][i];
                tp[i] = p[i] + coef[s] * k[s][1][i];
            }
            let [ka, kb] = &mut k[s + 1];
            self.rhs(&th, &tp, ka, kb);
        }
        let w = dt / 6.0;
        let mut nh = vec![0.0; n];
        let mut np = vec![0.0; n];
        for i in 0..n {
            nh[i] = h[i] + w * (k[0][0][i] + 2.0 * k[1][0][i] + 2.0 * k[2][0][i] + k[3][0][i]);
            np[i] = p[i] + w * (k[0][1][i] + 2.0 * k[1][1][i] + 2.0 * k[2][1][i] + k[3][1][i]);
        }
        nh[0] = 0.0;
        np[0] = 0.0;
        FieldState {
            t: state.t + dt,
            mesh: state.mesh.clone(),
            h: nh,
            hdot: np,
        }
    }
}

/// One RK4 step (builds the stencils; use [`Stepper`] for repeated steps).
pub fn step(state: &FieldState, dt: f64, nonlinear: bool) -> FieldState {
    Stepper::new(state.mesh.clone(), nonlinear).step(state, dt)
}

/// Energy conserved by the semi-discrete scheme (up to outflow through `R_max`):
///
/// `4π[½Σ pᵢ²wᵢ + ½Σ ((hᵢ₊₁ − hᵢ)/Δᵢ)²Δᵢ − ⅙Σ hᵢ⁶/rᵢ⁴ wᵢ]`, with dual
/// widths `wᵢ = (rᵢ₊₁ − rᵢ₋₁)/2`.
pub fn discrete_energy(state: &FieldState, nonlinear: bool) -> f64 {
    let r = state.nodes();
    let n = r.len();
    let (h, p) = (&state.h, &state.hdot);
    let mut kin = 0.0;
    let mut pot = 0.0;
    let mut grad = 0.0;
    for i in 0..n {
        let lo = if i == 0 { r[0] } else { r[i - 1] };
        let hi = if i == n - 1 { r[n - 1] } else { r[i + 1] };
        let w = 0.5 * (hi - lo);
        kin += p[i] * p[i] * w;
        if nonlinear && i > 0 {
            let u = h[i] / r[i];
            pot += h[i] * h[i] * u.powi(4) * w;
        }
    }
    for i in 0..n - 1 {
        let d = r[i + 1] - r[i];
        let s = (h[i + 1] - h[i]) / d;
        grad += s * s * d;
    }
    4.0 * std::f64::consts::PI * (0.5 * kin + 0.5 * grad - pot / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Outcome {
    Completed,
    BlowUpDetected { t_star: f64 },
    BoundaryContaminated { t: f64 },
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Completed => "Completed",
            Self::BlowUpDetected { .. } => "BlowUpDetected",
            Self::BoundaryContaminated { .. } => "BoundaryContaminated",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match self {
            Self::BlowUpDetected { t_star } => Some(*t_star),
            _ => None,
        }
    }
}

/// Per-output-time record kept by every run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    pub t: f64,
    pub energy: f64,
    pub sup_u: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub samples: Vec<RunSample>,
    /// Snapshots at the output times (empty unless `keep_frames`).
    pub frames: Vec<FieldState>,
    /// Last accepted state (the last stable one on blow-up).
    pub final_state: FieldState,
    /// `max |E(t) − E(0)|/|E(0)|` over the samples.
    pub energy_drift: f64,
    pub max_amplitude: f64,
    pub steps: usize,
    /// Time at which outgoing signal from the initial support reaches `R_max`.
    pub contamination_time: f64,
}

impl RunReport {
    /// Relative drift over samples with `t ≤ t_max`.
    pub fn drift_until(&self, t_max: f64) -> f64 {
        drift(&self.samples, t_max)
    }
}

fn drift(samples: &[RunSample], t_max: f64) -> f64 {
    let e0 = samples[0].energy;
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    samples
        .iter()
        .filter(|s| s.t <= t_max)
        .map(|s| (s.energy - e0).abs() / scale)
        .fold(0.0, f64::max)
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let mesh = Arc::new(config.mesh.build()?);
    let state = make_initial_data(&config.data, mesh.clone())?;
    run_from(config, state)
}

/// Run from an explicit initial state (the mesh comes from the state).
pub fn run_from(config: &RunConfig, initial: FieldState) -> Result<RunReport> {
    config.validate()?;
    let mesh = initial.mesh.clone();
    let stepper = Stepper::new(mesh.clone(), config.nonlinear);
    let base_dt = config.base_dt(&mesh);
    let t0 = initial.t;
    let support = initial.support_radius(SUPPORT_TOL);
    let contamination_time = t0 + (mesh.r_max() - support).max(0.0);
    let sample = |s: &FieldState| RunSample {
        t: s.t,
        energy: discrete_energy(s, config.nonlinear),
        sup_u: s.sup_abs_u(),
    };
    let mut samples = vec![sample(&initial)];
    let mut frames = Vec::new();
    if config.keep_frames {
        frames.push(initial.clone());
    }
    let t_end = t0 + config.t_end;
    let mut k_out = 1u64;
    let mut state = initial;
    let mut steps = 0usize;
    let mut max_amp = samples[0].sup_u;
    let eps = 1e-12 * config.t_end.max(1.0);
    let outcome = loop {
        if state.t >= t_end - eps {
            break Outcome::Completed;
        }
        if state.t >= contamination_time - eps {
            break Outcome::BoundaryContaminated { t: state.t };
        }
        let sup = state.sup_abs_u();
        let mut dt = base_dt;
        if config.nonlinear && sup > 0.0 {
            let limit = 0.5 / (5f64.sqrt() * sup * sup);
            if limit < DT_FLOOR {
                break Outcome::BlowUpDetected { t_star: state.t };
            }
            dt = dt.min(limit);
        }
        let next_out = (t0 + k_out as f64 * config.output_every).min(t_end);
        let mut landing = false;
        if state.t + dt >= next_out - eps {
            dt = next_out - state.t;
            landing = true;
        }
        if state.t + dt > contamination_time {
            dt = (contamination_time - state.t).max(0.0);
            landing = false;
            if dt <= eps {
                break Outcome::BoundaryContaminated { t: state.t };
            }
        }
        let mut next = stepper.step(&state, dt);
        steps += 1;
        let next_sup = next.sup_abs_u();
        if !next_sup.is_finite() || next_sup > config.blowup_threshold {
            break Outcome::BlowUpDetected { t_star: state.t };
        }
        max_amp = max_amp.max(next_sup);
        if landing {
            next.t = next_out;
            k_out += 1;
            samples.push(sample(&next));
            if config.keep_frames {
                frames.push(next.clone());
            }
        }
        state = next;
    };
    if samples.last().map(|s| s.t) != Some(state.t) {
        samples.push(sample(&state));
        if config.keep_frames {
            frames.push(state.clone());
        }
    }
    let energy_drift = drift(&samples, f64::INFINITY);
    Ok(RunReport {
        outcome,
        samples,
        frames,
        final_state: state,
        energy_drift,
        max_amplitude: max_amp,
        steps,
        contamination_time,
    })
}

/// Evolve with a fixed step sequence, returning the states at `times`
/// (increasing, all ≥ `state.t`). Steps are shortened only to land on `times`.
pub fn evolve_to(stepper: &Stepper, state: &FieldState, dt: f64, times: &[f64]) -> Vec<FieldState> {
    let mut out = Vec::with_capacity(times.len());
    let mut s = state.clone();
    for &target in times {
        while s.t < target - 1e-13 * target.abs().max(1.0) {
            let step = dt.min(target - s.t);
            s = stepper.step(&s, step);
        }
        s.t = target;
        out.push(s.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpeedReport {
    pub rho: f64,
    pub times: Vec<f64>,
    /// `∫_{r ≥ ρ + t} |∇w|² + (∂ₜw)²` for `w` = perturbed − unperturbed.
    pub leakage: Vec<f64>,
    pub max_leakage: f64,
}

/// Runs `background` and `background + perturbation` with identical steps and
/// measures the energy of the difference outside `r ≤ ρ + t`.
pub fn finite_speed_check(
    config: &RunConfig,
    background: &FieldState,
    perturbation_u0: &dyn RadialProfile,
    perturbation_u1: &dyn RadialProfile,
    rho: f64,
    times: &[f64],
) -> Result<FiniteSpeedReport> {
    config.validate()?;
    let mesh = background.mesh.clone();
    let stepper = Stepper::new(mesh.clone(), config.nonlinear);
    let dt = config.base_dt(&mesh);
    let r = mesh.nodes();
    let mut perturbed = background.clone();
    for (i, &ri) in r.iter().enumerate() {
        perturbed.h[i] += ri * perturbation_u0.value(ri);
        perturbed.hdot[i] += ri * perturbation_u1.value(ri);
    }
    let a = evolve_to(&stepper, background, dt, times);
    let b = evolve_to(&stepper, &perturbed, dt, times);
    let mut leakage = Vec::with_capacity(times.len());
    for (x, y) in a.iter().zip(&b) {
        let diff = y.difference(x)?;
        let lo = rho + (x.t - background.t).abs();
        let e = if lo >= mesh.r_max() {
            0.0
        } else {
            let rep = ground_state::energy(&diff, Region::Annulus(lo, mesh.r_max()))?;
            rep.gradient_sq + rep.kinetic_sq
        };
        leakage.push(e);
    }
    let max_leakage = leakage.iter().copied().fold(0.0, f64::max);
    Ok(FiniteSpeedReport {
        rho,
        times: times.to_vec(),
        leakage,
        max_leakage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    /// `4π∫∫ u⁸ r² dr dt` over the frame window.
    pub value: f64,
    /// Spatial integral per frame.
    pub per_frame: Vec<f64>,
    /// Running time integral, one entry per frame.
    pub cumulative: Vec<f64>,
    /// Fewer than three frames: time quadrature only first order or absent.
    pub degraded: bool,
}

pub fn strichartz_monitor(frames: &[FieldState]) -> StrichartzReport {
    let per_frame: Vec<f64> = frames
        .iter()
        .map(|f| {
            let r = f.nodes();
            let dens: Vec<f64> = f
                .u()
                .iter()
                .zip(r)
                .map(|(u, r)| u.powi(8) * r * r)
                .collect();
            4.0 * std::f64::consts::PI * quadrature::integrate_samples(r, &dens, 0.0, f.mesh.r_max())
        })
        .collect();
    let times: Vec<f64> = frames.iter().map(|f| f.t).collect();
    let cumulative = if frames.len() >= 3 {
        quadrature::cumulative_samples(&times, &per_frame)
    } else {
        let mut c = vec![0.0; frames.len()];
        if frames.len() == 2 {
            c[1] = 0.5 * (per_frame[0] + per_frame[1]) * (times[1] - times[0]);
        }
        c
    };
    StrichartzReport {
        value: cumulative.last().copied().unwrap_or(0.0),
        per_frame,
        cumulative,
        degraded: frames.len() < 3,
    }
}
