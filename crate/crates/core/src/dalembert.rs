//! Exact radial linear waves in three dimensions through the reduction
//! `f = r·v`, which turns `□v = 0` into the half-line problem
//! `∂²ₜf = ∂²_r f`, `f(t, 0) = 0`.
//!
//! Data are piecewise: `f₀` piecewise linear and `f₁` piecewise constant on a
//! shared node set starting at `r = 0`. The generating function
//!
//! ```text
//! F(s) =  ½f₀(s) + ½∫₀^s f₁,     s > 0
//! F(s) = −½f₀(−s) + ½∫₀^{−s} f₁,  s < 0
//! ```
//!
//! is then exactly piecewise linear, `f(t, r) = F(t + r) − F(t − r)`, and every
//! band energy is a finite sum of squared slopes times lengths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quadrature;

/// Tolerance below the exact constant ½ tolerated from floating-point round-off.
pub const CHANNEL_SLACK: f64 = 1e-12;

/// Reduced data `(f₀, f₁)` on nodes `0 = r₀ < r₁ < …`.
///
/// `f₀` is linear between nodes and constant past the last node; `f1_cells[i]`
/// is the value of `f₁` on `[rᵢ, rᵢ₊₁)`, and `f₁ = 0` past the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedData {
    pub nodes: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1_cells: Vec<f64>,
}

impl ReducedData {
    pub fn empty() -> Self {
        Self {
            nodes: Vec::new(),
            f0: Vec::new(),
            f1_cells: Vec::new(),
        }
    }

    pub fn new(nodes: Vec<f64>, f0: Vec<f64>, f1_cells: Vec<f64>) -> Result<Self> {
        let d = Self { nodes, f0, f1_cells };
        d.validate()?;
        Ok(d)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Ok(());
        }
        if self.f0.len() != n || self.f1_cells.len() + 1 != n {
            return Err(Error::InvalidData(format!(
                "{} nodes need {} f0 values and {} f1 cells (got {}, {})",
                n,
                n,
                n - 1,
                self.f0.len(),
                self.f1_cells.len()
            )));
        }
        if self.nodes[0] != 0.0 {
            return Err(Error::InvalidData("first node must be r = 0".into()));
        }
        if self.nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidData("nodes must increase strictly".into()));
        }
        if self
            .f0
            .iter()
            .chain(&self.f1_cells)
            .chain(&self.nodes)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidData("non-finite value".into()));
        }
        Ok(())
    }

    /// `f₀` at radius `r` (piecewise linear, constant past the last node).
    pub fn f0_at(&self, r: f64) -> f64 {
        quadrature::interpolate_linear(&self.nodes, &self.f0, r)
    }

    /// `f₁` at radius `r` (right-continuous cell value).
    pub fn f1_at(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        if n < 2 || r < 0.0 || r >= self.nodes[n - 1] {
            return 0.0;
        }
        self.f1_cells[quadrature::cell_index(&self.nodes, r)]
    }

    /// `u₀ = f₀/r` at the nodes with `r > 0`.
    pub fn unreduce(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .zip(&self.f0)
            .skip(1)
            .map(|(r, f)| (*r, f / r))
            .collect()
    }
}

/// `f₀ = r·u₀` sampled at the nodes and `f₁ = r·u₁` at cell midpoints.
pub fn reduce(nodes: &[f64], u0: impl Fn(f64) -> f64, u1: impl Fn(f64) -> f64) -> Result<ReducedData> {
    let f0 = nodes
        .iter()
        .map(|&r| if r == 0.0 { 0.0 } else { r * u0(r) })
        .collect();
    let f1 = nodes
        .windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            m * u1(m)
        })
        .collect();
    ReducedData::new(nodes.to_vec(), f0, f1)
}

/// The piecewise-linear generating function `F` together with its source data.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDWaveData {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// `∫_{s₀}^{s_k} F'²`.
    prefix_sq: Vec<f64>,
    source: ReducedData,
}

/// Build `F` from reduced data; fails when `f₀(0) ≠ 0`.
pub fn build_f(data: &ReducedData) -> Result<OneDWaveData> {
    data.validate()?;
    let n = data.nodes.len();
    if n == 0 {
        return Ok(OneDWaveData {
            breakpoints: Vec::new(),
            values: Vec::new(),
            slopes: Vec::new(),
            prefix_sq: Vec::new(),
            source: data.clone(),
        });
    }
    if data.f0[0] != 0.0 {
        return Err(Error::InvalidData(format!(
            "f0(0) must vanish, got {}",
            data.f0[0]
        )));
    }
    if n == 1 {
        return Ok(OneDWaveData {
            breakpoints: vec![0.0],
            values: vec![0.0],
            slopes: Vec::new(),
            prefix_sq: vec![0.0],
            source: data.clone(),
        });
    }
    // ∫₀^{rᵢ} f₁
    let mut integral = vec![0.0; n];
    for i in 1..n {
        integral[i] = integral[i - 1] + data.f1_cells[i - 1] * (data.nodes[i] - data.nodes[i - 1]);
    }
    let mut breakpoints = Vec::with_capacity(2 * n - 1);
    let mut values = Vec::with_capacity(2 * n - 1);
    for i in (1..n).rev() {
        breakpoints.push(-data.nodes[i]);
        values.push(-0.5 * data.f0[i] + 0.5 * integral[i]);
    }
    for i in 0..n {
        breakpoints.push(data.nodes[i]);
        values.push(0.5 * data.f0[i] + 0.5 * integral[i]);
    }
    Ok(OneDWaveData::from_parts(breakpoints, values, data.clone()))
}

impl OneDWaveData {
    fn from_parts(breakpoints: Vec<f64>, values: Vec<f64>, source: ReducedData) -> Self {
        let slopes: Vec<f64> = breakpoints
            .windows(2)
            .zip(values.windows(2))
            .map(|(s, v)| (v[1] - v[0]) / (s[1] - s[0]))
            .collect();
        let mut prefix_sq = Vec::with_capacity(breakpoints.len());
        prefix_sq.push(0.0);
        for (k, m) in slopes.iter().enumerate() {
            let last = prefix_sq[k];
            prefix_sq.push(last + m * m * (breakpoints[k + 1] - breakpoints[k]));
        }
        Self {
            breakpoints,
            values,
            slopes,
            prefix_sq,
            source,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Slope of `F` on each cell `[s_k, s_{k+1})`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn source(&self) -> &ReducedData {
        &self.source
    }

    /// Largest `|s|` at which `F'` may be nonzero.
    pub fn support_radius(&self) -> f64 {
        self.breakpoints
            .iter()
            .fold(0.0, |m: f64, s| m.max(s.abs()))
    }

    /// `F(s)`; constant outside the breakpoint range.
    pub fn f_value(&self, s: f64) -> f64 {
        if self.breakpoints.is_empty() {
            return 0.0;
        }
        quadrature::interpolate_linear(&self.breakpoints, &self.values, s)
    }

    /// `F'(s)`, right-continuous; zero outside the breakpoint range.
    pub fn f_slope(&self, s: f64) -> f64 {
        let n = self.breakpoints.len();
        if n < 2 || s < self.breakpoints[0] || s >= self.breakpoints[n - 1] {
            return 0.0;
        }
        self.slopes[quadrature::cell_index(&self.breakpoints, s)]
    }

    fn prefix_at(&self, s: f64) -> f64 {
        let n = self.breakpoints.len();
        if n < 2 || s <= self.breakpoints[0] {
            return 0.0;
        }
        if s >= self.breakpoints[n - 1] {
            return self.prefix_sq[n - 1];
        }
        let k = quadrature::cell_index(&self.breakpoints, s);
        self.prefix_sq[k] + self.slopes[k] * self.slopes[k] * (s - self.breakpoints[k])
    }

    /// `∫_a^b F'(s)² ds` exactly.
    pub fn slope_sq_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.prefix_at(b) - self.prefix_at(a)).max(0.0)
    }

    /// `f(t, r) = F(t + r) − F(t − r)`.
    pub fn f_at(&self, t: f64, r: f64) -> f64 {
        self.f_value(t + r) - self.f_value(t - r)
    }

    /// `∂ₜf(t, r) = F'(t + r) − F'(t − r)` (right-continuous in `r`).
    pub fn ft_at(&self, t: f64, r: f64) -> f64 {
        self.f_slope(t + r) - self.f_slope_left(t - r)
    }

    /// `∂_r f(t, r) = F'(t + r) + F'(t − r)` (right-continuous in `r`).
    pub fn fr_at(&self, t: f64, r: f64) -> f64 {
        self.f_slope(t + r) + self.f_slope_left(t - r)
    }

    /// Left-continuous slope, so that `r ↦ F'(t − r)` is right-continuous.
    fn f_slope_left(&self, s: f64) -> f64 {
        let n = self.breakpoints.len();
        if n < 2 || s <= self.breakpoints[0] || s > self.breakpoints[n - 1] {
            return 0.0;
        }
        let k = self.breakpoints.partition_point(|&x| x < s);
        self.slopes[k - 1]
    }

    /// Exact state at time `t` as reduced data on the shifted breakpoint set.
    pub fn evolve(&self, t: f64) -> ReducedData {
        if self.breakpoints.is_empty() {
            return ReducedData::empty();
        }
        let scale = self.support_radius().max(t.abs()).max(1.0);
        let mut nodes: Vec<f64> = self
            .breakpoints
            .iter()
            .flat_map(|&s| [s - t, t - s])
            .filter(|&r| r > 1e-13 * scale)
            .collect();
        nodes.push(0.0);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * scale);
        let f0: Vec<f64> = nodes
            .iter()
            .map(|&r| if r == 0.0 { 0.0 } else { self.f_at(t, r) })
            .collect();
        let f1: Vec<f64> = nodes
            .windows(2)
            .map(|w| self.ft_at(t, 0.5 * (w[0] + w[1])))
            .collect();
        ReducedData {
            nodes,
            f0,
            f1_cells: f1,
        }
    }

    /// `∫_a^b (∂_r f)² + (∂ₜf)² dr` at time `t`, for `0 ≤ a ≤ b`.
    pub fn interval_energy(&self, t: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        2.0 * (self.slope_sq_integral(t + a, t + b) + self.slope_sq_integral(t - b, t - a))
    }

    /// `∫₀^∞ (∂_r f)² + (∂ₜf)² dr`, independent of time.
    pub fn total_energy(&self) -> f64 {
        2.0 * self.prefix_sq.last().copied().unwrap_or(0.0)
    }

    /// Energy on the band `[r₀ + |t|, r₁ + |t|]` at time `t`.
    pub fn band_energy(&self, t: f64, r0: f64, r1: f64) -> Result<BandEnergy> {
        if !(r0 > 0.0) || !(r1 > r0) {
            return Err(Error::InvalidBand { r0, r1 });
        }
        let shift = t.abs();
        Ok(BandEnergy {
            r0,
            r1,
            t,
            value: self.interval_energy(t, r0 + shift, r1 + shift),
        })
    }
}

/// Energy of the shifted band `[r₀ + |t|, r₁ + |t|]` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEnergy {
    pub r0: f64,
    pub r1: f64,
    pub t: f64,
    pub value: f64,
}

/// Time half-line(s) on which the band keeps at least half its initial energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelSide {
    Plus,
    Minus,
    Both,
    /// No half-line qualifies: impossible for exact data, so this flags a bug.
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub side: ChannelSide,
    /// Minimal ratio on the qualifying side(s).
    pub min_ratio: f64,
    pub plus_min: f64,
    pub minus_min: f64,
}

/// Ratio `band_energy(t)/band_energy(0)` over `t_grid`, split by the sign of `t`.
pub fn channel_check(data: &OneDWaveData, r0: f64, r1: f64, t_grid: &[f64]) -> Result<ChannelReport> {
    let initial = data.band_energy(0.0, r0, r1)?.value;
    if !(initial > 0.0) {
        return Err(Error::DegenerateInput(
            "initial band energy vanishes; ratio undefined".into(),
        ));
    }
    if !t_grid.contains(&0.0) || !t_grid.iter().any(|&t| t > 0.0) || !t_grid.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidInput(
            "time grid must contain 0 and times of both signs".into(),
        ));
    }
    let mut plus_min = f64::INFINITY;
    let mut minus_min = f64::INFINITY;
    for &t in t_grid {
        let ratio = data.band_energy(t, r0, r1)?.value / initial;
        if t >= 0.0 {
            plus_min = plus_min.min(ratio);
        }
        if t <= 0.0 {
            minus_min = minus_min.min(ratio);
        }
    }
    let ok = |m: f64| m >= 0.5 - CHANNEL_SLACK;
    let (side, min_ratio) = match (ok(plus_min), ok(minus_min)) {
        (true, true) => (ChannelSide::Both, plus_min.min(minus_min)),
        (true, false) => (ChannelSide::Plus, plus_min),
        (false, true) => (ChannelSide::Minus, minus_min),
        (false, false) => (ChannelSide::Neither, plus_min.max(minus_min)),
    };
    Ok(ChannelReport {
        side,
        min_ratio,
        plus_min,
        minus_min,
    })
}

/// Symmetric lattice `{0, ±h, ±2h, …, ±(supp + 10)}` with `h` half the minimal
/// breakpoint gap, plus the times at which a band edge crosses a breakpoint
/// and one time past all crossings.
///
/// Band energy is piecewise linear in `t` between those crossing times, so the
/// minima over this grid are the exact minima over each half-line.
pub fn default_time_grid(data: &OneDWaveData, r0: f64, r1: f64) -> Vec<f64> {
    const MAX_LATTICE: usize = 20_000;
    let bp = data.breakpoints();
    let supp = data.support_radius();
    let extent = supp + 10.0;
    let min_gap = bp
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mut h = if min_gap.is_finite() { 0.5 * min_gap } else { 1.0 };
    if extent / h > MAX_LATTICE as f64 {
        h = extent / MAX_LATTICE as f64;
    }
    let steps = (extent / h).ceil() as usize;
    let mut grid = Vec::with_capacity(4 * steps + 4 * bp.len() + 3);
    grid.push(0.0);
    for k in 1..=steps {
        let t = k as f64 * h;
        grid.push(t);
        grid.push(-t);
    }
    for &s in bp {
        for e in [r0, r1] {
            let tp = 0.5 * (s - e);
            if tp > 0.0 {
                grid.push(tp);
            }
            let tm = 0.5 * (s + e);
            if tm < 0.0 {
                grid.push(tm);
            }
        }
    }
    let far = supp + r1 + 10.0;
    grid.push(far);
    grid.push(-far);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Energy fraction in the annulus `||r| − |t|| ≤ Rλ` at a fixed time.
#[derive(Debug, Clone)]
pub struct HuygensReport<'a> {
    data: &'a OneDWaveData,
    pub t: f64,
    pub scale: f64,
    pub total: f64,
}

impl HuygensReport<'_> {
    pub fn annulus_fraction(&self, radius: f64) -> f64 {
        let w = radius * self.scale;
        let a = (self.t.abs() - w).max(0.0);
        let b = self.t.abs() + w;
        (self.data.interval_energy(self.t, a, b) / self.total).min(1.0)
    }
}

pub fn huygens_localization(data: &OneDWaveData, t: f64, scale: f64) -> Result<HuygensReport<'_>> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let total = data.total_energy();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("zero-energy data".into()));
    }
    Ok(HuygensReport {
        data,
        t,
        scale,
        total,
    })
}

/// Both sides of `∫_{R₀}^∞ (∂_r(r u₀))² dr = ∫_{R₀}^∞ r²(∂_r u₀)² dr − R₀u₀(R₀)²`,
/// all in the `dr` normalization (multiply by `4π` for `dx` integrals).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub boundary_term: f64,
    /// `∫_{R₀}^∞ r²(∂_r u₀)² dr`.
    pub exterior_gradient: f64,
}

impl ExteriorIdentity {
    pub fn relative_defect(&self) -> f64 {
        let scale = self.lhs.abs().max(self.exterior_gradient.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

pub fn exterior_identity_check(u0: &dyn RadialProfile, r0: f64) -> Result<ExteriorIdentity> {
    if !(r0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("R0 must be nonnegative, got {r0}")));
    }
    let tol = 1e-14;
    let int = |f: &dyn Fn(f64) -> f64| {
        quadrature::integrate(f, r0, r0 + 1.0, tol)
            + quadrature::integrate(f, r0 + 1.0, r0 + 10.0, tol)
            + quadrature::integrate_to_infinity(f, r0 + 10.0, tol)
    };
    let lhs = int(&|r: f64| (u0.value(r) + r * u0.derivative(r)).powi(2));
    let grad = int(&|r: f64| (r * u0.derivative(r)).powi(2));
    let boundary = r0 * u0.value(r0).powi(2);
    Ok(ExteriorIdentity {
        lhs,
        rhs: grad - boundary,
        boundary_term: boundary,
        exterior_gradient: grad,
    })
}

/// One randomly generated channel test: data plus band.
#[derive(Debug, Clone)]
pub struct RandomChannelCase {
    pub data: ReducedData,
    pub r0: f64,
    pub r1: f64,
}

impl RandomChannelCase {
    /// Random nodes (gaps in `[0.1, 1]`), `f₀`, `f₁` in `[−1, 1]` and a band
    /// inside the data support carrying nonzero energy.
    pub fn generate<R: Rng>(rng: &mut R) -> Self {
        loop {
            let count = rng.gen_range(3..24);
            let mut nodes = vec![0.0];
            for _ in 1..count {
                let last = *nodes.last().unwrap();
                nodes.push(last + rng.gen_range(0.1..1.0));
            }
            let mut f0: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
            f0[0] = 0.0;
            let f1: Vec<f64> = (1..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let supp = nodes[count - 1];
            let a = rng.gen_range(0.01..supp);
            let b = rng.gen_range(0.01..supp);
            let (r0, r1) = if a < b { (a, b) } else { (b, a) };
            if r1 - r0 < 1e-3 {
                continue;
            }
            let data = ReducedData { nodes, f0, f1_cells: f1 };
            return Self { data, r0, r1 };
        }
    }
}

/// Worst outcome over a batch of random channel checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBatch {
    pub cases: usize,
    /// Smallest `min_ratio` over the batch (∞ for an empty batch).
    pub worst_ratio: f64,
    pub failures: usize,
}

pub fn channel_batch<R: Rng>(rng: &mut R, cases: usize) -> Result<ChannelBatch> {
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..cases {
        let case = RandomChannelCase::generate(rng);
        let data = build_f(&case.data)?;
        let grid = default_time_grid(&data, case.r0, case.r1);
        let report = match channel_check(&data, case.r0, case.r1, &grid) {
            Ok(r) => r,
            // A band with vanishing energy (e.g. f₁ = −f₀' exactly) says nothing.
            Err(Error::DegenerateInput(_)) => continue,
            Err(e) => return Err(e),
        };
        worst = worst.min(report.min_ratio);
        if report.side == ChannelSide::Neither {
            failures += 1;
        }
    }
    Ok(ChannelBatch {
        cases,
        worst_ratio: worst,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{CompactBump, ScaledW};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `f₀ = 0`, `f₁ = 1` on `[1, 2]`.
    fn step_velocity() -> ReducedData {
        ReducedData::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let nodes: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let w = ScaledW::new(1.0, 1.0);
        let d = reduce(&nodes, |r| w.value(r), |_| 0.0).unwrap();
        assert_eq!(d.f0[0], 0.0);
        assert!((d.f0[10] - w.value(1.0)).abs() < 1e-15);
        assert!(d.f1_cells.iter().all(|&v| v == 0.0));
        let d = reduce(&nodes, |_| 0.0, |r| if (1.0..2.0).contains(&r) { 1.0 } else { 0.0 }).unwrap();
        assert!((d.f1_cells[10] - 1.05).abs() < 1e-12);
        assert_eq!(d.f1_cells[25], 0.0);
        for (r, u) in reduce(&nodes, |r| w.value(r), |_| 0.0).unwrap().unreduce() {
            assert!((u - w.value(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn build_f_step_velocity_is_even() {
        let f = build_f(&step_velocity()).unwrap();
        for &s in &[-3.0f64, -2.0, -1.5, -0.5, 0.0, 0.5, 1.25, 1.5, 2.0, 5.0] {
            let expected = 0.5 * (s.abs().min(2.0) - 1.0).max(0.0);
            assert!((f.f_value(s) - expected).abs() < 1e-15, "s = {s}");
        }
        assert_eq!(f.f_slope(1.5), 0.5);
        assert_eq!(f.f_slope(-1.5), -0.5);
    }

    #[test]
    fn build_f_without_velocity_is_odd_half() {
        let d = ReducedData::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, -1.0], vec![0.0, 0.0]).unwrap();
        let f = build_f(&d).unwrap();
        for &s in &[0.5, 1.0, 2.0, 3.0] {
            assert!((f.f_value(s) - 0.5 * d.f0_at(s)).abs() < 1e-15);
            assert!((f.f_value(-s) + 0.5 * d.f0_at(s)).abs() < 1e-15);
        }
        let zero = build_f(&ReducedData::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0]).unwrap()).unwrap();
        assert_eq!(zero.f_value(0.3), 0.0);
        assert_eq!(zero.total_energy(), 0.0);
    }

    #[test]
    fn build_f_rejects_nonzero_origin() {
        let d = ReducedData::new(vec![0.0, 1.0], vec![0.5, 0.0], vec![0.0]).unwrap();
        assert!(matches!(build_f(&d), Err(Error::InvalidData(_))));
        assert!(ReducedData::new(vec![0.1, 1.0], vec![0.0, 0.0], vec![0.0]).is_err());
    }

    #[test]
    fn evolve_examples() {
        let f = build_f(&step_velocity()).unwrap();
        let at0 = f.evolve(0.0);
        for &r in &[0.5, 1.2, 1.9, 2.5] {
            assert!((at0.f0_at(r) - step_velocity().f0_at(r)).abs() < 1e-15);
            assert!((at0.f1_at(r) - step_velocity().f1_at(r)).abs() < 1e-15);
        }
        // At t = 10 the energy sits in r ∈ [8, 9] ∪ [11, 12]; between the
        // shells f is the constant ½∫f₁ = ½ with vanishing derivatives.
        let s = f.evolve(10.0);
        for &r in &[0.5, 7.9, 12.1, 30.0] {
            assert!(s.f0_at(r).abs() < 1e-15 && s.f1_at(r).abs() < 1e-15, "r = {r}");
        }
        for &r in &[9.2, 10.0, 10.8] {
            assert!((s.f0_at(r) - 0.5).abs() < 1e-15 && s.f1_at(r).abs() < 1e-15, "r = {r}");
            assert_eq!(f.fr_at(10.0, r), 0.0);
        }
        assert!((f.interval_energy(10.0, 8.0, 9.0) + f.interval_energy(10.0, 11.0, 12.0) - f.total_energy()).abs() < 1e-14);
        assert!(s.f1_at(8.5).abs() > 0.1 && s.f1_at(11.5).abs() > 0.1);
        assert_eq!(f.f_at(3.0, 1e6), 0.0);
        assert_eq!(f.f_at(-7.0, 0.0), 0.0);
    }

    #[test]
    fn band_energy_examples() {
        let f = build_f(&step_velocity()).unwrap();
        assert!((f.band_energy(0.0, 1.0, 2.0).unwrap().value - 1.0).abs() < 1e-15);
        assert!((f.band_energy(3.0, 1.0, 2.0).unwrap().value - 0.5).abs() < 1e-15);
        assert!(matches!(f.band_energy(0.0, 2.0, 1.0), Err(Error::InvalidBand { .. })));
        let d = ReducedData::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.0, -1.0, 0.5], vec![0.0; 3]).unwrap();
        let g = build_f(&d).unwrap();
        // ∫_{0.5}^{3} (f₀')² = 0.5·1 + 1·4 + 1·(0.75)²
        let expected = 0.5 + 4.0 + 0.5625;
        assert!((g.band_energy(0.0, 0.5, 3.0).unwrap().value - expected).abs() < 1e-14);
    }

    #[test]
    fn channel_step_velocity_both_sides_half() {
        let f = build_f(&step_velocity()).unwrap();
        let grid = default_time_grid(&f, 1.0, 2.0);
        let rep = channel_check(&f, 1.0, 2.0, &grid).unwrap();
        assert_eq!(rep.side, ChannelSide::Both);
        assert!((rep.min_ratio - 0.5).abs() < 1e-12);
        for t in [3.0, 4.5, -3.0, -10.0] {
            let r = f.band_energy(t, 1.0, 2.0).unwrap().value;
            assert!((r - 0.5).abs() < 1e-12);
        }
    }

    /// `f₁ = −∂_r f₀` puts all of `F'` on `s < 0`: a purely outgoing wave.
    #[test]
    fn channel_outgoing_and_incoming() {
        let nodes = vec![0.0, 1.0, 1.5, 2.0, 3.0];
        let f0 = vec![0.0, 0.0, 1.0, -0.5, -0.5];
        let slopes: Vec<f64> = (0..4).map(|i| (f0[i + 1] - f0[i]) / (nodes[i + 1] - nodes[i])).collect();
        let out = ReducedData::new(nodes.clone(), f0.clone(), slopes.iter().map(|s| -s).collect()).unwrap();
        let f = build_f(&out).unwrap();
        assert!(f.breakpoints().iter().zip(f.slopes()).all(|(s, m)| *s < 0.0 || *m == 0.0));
        let rep = channel_check(&f, 1.0, 2.0, &default_time_grid(&f, 1.0, 2.0)).unwrap();
        assert_eq!(rep.side, ChannelSide::Plus);
        assert!((rep.min_ratio - 1.0).abs() < 1e-12);

        let inc = ReducedData::new(nodes, f0, slopes).unwrap();
        let g = build_f(&inc).unwrap();
        let rep = channel_check(&g, 1.0, 2.0, &default_time_grid(&g, 1.0, 2.0)).unwrap();
        assert_eq!(rep.side, ChannelSide::Minus);
        assert!((rep.min_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_zero_data_is_degenerate() {
        let z = build_f(&ReducedData::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], vec![0.0; 2]).unwrap()).unwrap();
        assert!(matches!(
            channel_check(&z, 0.5, 1.0, &[-1.0, 0.0, 1.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn channel_grid_must_cover_both_signs() {
        let f = build_f(&step_velocity()).unwrap();
        assert!(matches!(channel_check(&f, 1.0, 2.0, &[0.0, 1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn huygens_compact_data_exact() {
        let lam = 0.5;
        let bump = CompactBump { amp: 1.0, center: 0.25, width: 0.25 };
        let nodes: Vec<f64> = (0..=100).map(|i| i as f64 * 0.005).collect();
        let f = build_f(&reduce(&nodes, |r| bump.value(r), |r| 0.3 * bump.value(r)).unwrap()).unwrap();
        for &t in &[0.0, 0.7, 5.0, -40.0] {
            let h = huygens_localization(&f, t, lam).unwrap();
            assert!((h.annulus_fraction(1.0) - 1.0).abs() < 1e-12, "t = {t}");
        }
        let zero = build_f(&ReducedData::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0]).unwrap()).unwrap();
        assert!(huygens_localization(&zero, 1.0, 1.0).is_err());
    }

    #[test]
    fn exterior_identity_for_w() {
        let w = ScaledW::new(1.0, 1.0);
        let id = exterior_identity_check(&w, 0.0).unwrap();
        assert!(id.relative_defect() < 1e-10);
        let grad = crate::ground_state::grad_w_sq();
        assert!((4.0 * std::f64::consts::PI * id.lhs - grad).abs() < 1e-8 * grad);
        let id = exterior_identity_check(&w, 1.0).unwrap();
        assert!((id.boundary_term - 0.75).abs() < 1e-15);
        assert!(id.relative_defect() < 1e-10);
    }

    #[test]
    fn exterior_identity_beyond_support_vanishes() {
        let b = CompactBump { amp: 2.0, center: 1.0, width: 0.5 };
        let id = exterior_identity_check(&b, 2.0).unwrap();
        assert_eq!(id.lhs, 0.0);
        assert_eq!(id.rhs, 0.0);
        assert_eq!(id.boundary_term, 0.0);
    }

    #[test]
    fn random_batch_never_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = channel_batch(&mut rng, 50).unwrap();
        assert_eq!(b.failures, 0);
        assert!(b.worst_ratio >= 0.5 - CHANNEL_SLACK);
        let empty = channel_batch(&mut rng, 0).unwrap();
        assert_eq!(empty.worst_ratio, f64::INFINITY);
    }
}
