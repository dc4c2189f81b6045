//! Radial mesh and the sampled field pair `(u, ∂ₜu)` carried in the
//! `h = r·u` representation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// How the mesh spacing is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Spacing {
    /// Uniform spacing `h` from the origin.
    Uniform { h: f64 },
    /// `inner_count` geometrically graded cells (ratio `ratio`) ending at
    /// spacing `h`, followed by uniform spacing `h`.
    Geometric { h: f64, ratio: f64, inner_count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl RadialMesh {
    pub fn uniform(h: f64, r_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(r_max > h) {
            return Err(Error::InvalidParameter(format!(
                "uniform mesh needs 0 < h < r_max (h = {h}, r_max = {r_max})"
            )));
        }
        let n = (r_max / h).round() as usize;
        if ((n as f64) * h - r_max).abs() > 1e-9 * r_max {
            return Err(Error::InvalidParameter(format!(
                "r_max = {r_max} is not a multiple of h = {h}"
            )));
        }
        let nodes = (0..=n).map(|i| i as f64 * h).collect();
        Ok(Self {
            nodes,
            spacing: Spacing::Uniform { h },
        })
    }

    /// Geometric refinement toward the origin: the innermost cell has width
    /// `h·ratio^-(inner_count-1)`, widths grow by `ratio` until they reach `h`.
    pub fn geometric(h: f64, ratio: f64, inner_count: usize, r_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(ratio > 1.0) || inner_count == 0 {
            return Err(Error::InvalidParameter(
                "geometric mesh needs h > 0, ratio > 1, inner_count ≥ 1".into(),
            ));
        }
        let mut nodes = vec![0.0];
        let mut r = 0.0;
        for k in (0..inner_count).rev() {
            r += h / ratio.powi(k as i32 + 1);
            nodes.push(r);
        }
        if r >= r_max {
            return Err(Error::InvalidParameter("graded region exceeds r_max".into()));
        }
        let remaining = ((r_max - r) / h).ceil() as usize;
        for i in 1..=remaining {
            nodes.push(r + i as f64 * h);
        }
        Ok(Self {
            nodes,
            spacing: Spacing::Geometric {
                h,
                ratio,
                inner_count,
            },
        })
    }

    /// Build from explicit nodes (must start at 0 and increase strictly).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "mesh needs ≥ 3 nodes starting at r = 0".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("mesh nodes must increase strictly".into()));
        }
        let h0 = nodes[1] - nodes[0];
        let uniform = nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0);
        let h = nodes[nodes.len() - 1] - nodes[nodes.len() - 2];
        let spacing = if uniform {
            Spacing::Uniform { h: h0 }
        } else {
            Spacing::Geometric {
                h,
                ratio: 1.0,
                inner_count: 0,
            }
        };
        Ok(Self { nodes, spacing })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Smallest cell width (sets the CFL time step).
    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest cell width.
    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Sampled state at time `t`: `h = r·u` and `∂ₜh` at every node.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    pub mesh: Arc<RadialMesh>,
    pub h: Vec<f64>,
    pub hdot: Vec<f64>,
}

impl FieldState {
    pub fn zeros(mesh: Arc<RadialMesh>, t: f64) -> Self {
        let n = mesh.len();
        Self {
            t,
            mesh,
            h: vec![0.0; n],
            hdot: vec![0.0; n],
        }
    }

    /// Sample radial profiles `u₀`, `u₁` onto the mesh.
    pub fn from_profiles<F, G>(mesh: Arc<RadialMesh>, t: f64, u0: F, u1: G) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let h = mesh.nodes().iter().map(|&r| r * u0(r)).collect();
        let hdot = mesh.nodes().iter().map(|&r| r * u1(r)).collect();
        Self { t, mesh, h, hdot }
    }

    /// Build from `(u, ∂ₜu)` samples.
    pub fn from_u_samples(mesh: Arc<RadialMesh>, t: f64, u: &[f64], ut: &[f64]) -> Result<Self> {
        if u.len() != mesh.len() || ut.len() != mesh.len() {
            return Err(Error::InvalidData(format!(
                "expected {} samples, got {} and {}",
                mesh.len(),
                u.len(),
                ut.len()
            )));
        }
        let r = mesh.nodes();
        let h = r.iter().zip(u).map(|(r, u)| r * u).collect();
        let hdot = r.iter().zip(ut).map(|(r, v)| r * v).collect();
        Ok(Self { t, mesh, h, hdot })
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    /// `u` at every node; at the origin the limit `∂_r h(0)` from a
    /// one-sided second-order stencil.
    pub fn u(&self) -> Vec<f64> {
        divide_by_r(self.nodes(), &self.h)
    }

    /// `∂ₜu` at every node (same origin treatment as [`FieldState::u`]).
    pub fn ut(&self) -> Vec<f64> {
        divide_by_r(self.nodes(), &self.hdot)
    }

    /// `r·∂_r u = ∂_r h − u` at every node (zero at the origin).
    pub fn r_times_ur(&self) -> Vec<f64> {
        let dh = quadrature::differentiate(self.nodes(), &self.h);
        let u = self.u();
        let mut out: Vec<f64> = dh.iter().zip(&u).map(|(a, b)| a - b).collect();
        out[0] = 0.0;
        out
    }

    pub fn sup_abs_u(&self) -> f64 {
        self.u().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            t: self.t,
            mesh: self.mesh.clone(),
            h: self.h.iter().map(|v| c * v).collect(),
            hdot: self.hdot.iter().map(|v| c * v).collect(),
        }
    }

    /// `self − other` on a shared mesh.
    pub fn difference(&self, other: &FieldState) -> Result<Self> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) && *self.mesh != *other.mesh {
            return Err(Error::InvalidInput("fields live on different meshes".into()));
        }
        Ok(Self {
            t: self.t,
            mesh: self.mesh.clone(),
            h: self.h.iter().zip(&other.h).map(|(a, b)| a - b).collect(),
            hdot: self.hdot.iter().zip(&other.hdot).map(|(a, b)| a - b).collect(),
        })
    }

    /// Smallest radius beyond which `h` and `∂ₜh` are below `tol` (relative to their max).
    pub fn support_radius(&self, tol: f64) -> f64 {
        let scale = self
            .h
            .iter()
            .chain(&self.hdot)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let r = self.nodes();
        for i in (0..r.len()).rev() {
            if self.h[i].abs() > tol * scale || self.hdot[i].abs() > tol * scale {
                return r[(i + 1).min(r.len() - 1)];
            }
        }
        0.0
    }
}

pub(crate) fn divide_by_r(r: &[f64], h: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(h.len());
    out.push(if r.len() >= 3 {
        quadrature::one_sided([r[0], r[1], r[2]], [h[0], h[1], h[2]])
    } else {
        (h[1] - h[0]) / (r[1] - r[0])
    });
    out.extend(r.iter().zip(h).skip(1).map(|(r, h)| h / r));
    out
}
