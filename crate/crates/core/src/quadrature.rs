//! Quadrature and differentiation helpers.
//!
//! Two families live here: adaptive Gauss–Kronrod integration of closed-form
//! integrands (used for ground-state constants and exact radial identities),
//! and piecewise-quadratic integration / finite differences of sampled data on
//! possibly nonuniform meshes (used for everything the solver produces).

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * hw, ((kronrod - gauss) * hw).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
    let (val, err) = whole;
    if err <= tol.max(1e-15 * val.abs()) || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, tol, 50)
}

/// Integral of `f` over `[a, ∞)` via the map `r = a + s/(1-s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        let r = a + s / one_minus;
        let v = f(r) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // Split so that the transformed integrand near s = 1 gets its own panels.
    integrate(&g, 0.0, 0.5, 0.5 * tol) + integrate(&g, 0.5, 1.0, 0.5 * tol)
}

/// Integral over `[lo, hi]` of the parabola through `(x[k], y[k])`, `k = 0..3`.
fn parabola_integral(x: [f64; 3], y: [f64; 3], lo: f64, hi: f64) -> f64 {
    // Newton form around x1: p(s) = y1 + d1 (s - x1) + d2 (s - x1)(s - x0)
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let d2 = (d12 - d01) / (x[2] - x[0]);
    // p(s) = y1 + d01 (s - x1) + d2 (s - x1)(s - x0); expand in t = s - x1.
    let c0 = y[1];
    let c1 = d01 + d2 * (x[1] - x[0]);
    let c2 = d2;
    let prim = |s: f64| {
        let t = s - x[1];
        t * (c0 + t * (0.5 * c1 + t * c2 / 3.0))
    };
    prim(hi) - prim(lo)
}

/// Integral of sampled data over `[a, b]` (clamped to the node range).
///
/// Cells are grouped in pairs `(0,1,2), (2,3,4), …` and each pair's parabola is
/// used for any part of its two cells, so over whole pairs this is composite
/// Simpson; an odd trailing cell borrows the preceding two nodes.
pub fn integrate_samples(nodes: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let n = nodes.len();
    assert_eq!(n, values.len());
    if n < 2 {
        return 0.0;
    }
    let a = a.max(nodes[0]);
    let b = b.min(nodes[n - 1]);
    if b <= a {
        return 0.0;
    }
    if n == 2 {
        let slope = (values[1] - values[0]) / (nodes[1] - nodes[0]);
        let at = |s: f64| values[0] + slope * (s - nodes[0]);
        return 0.5 * (at(a) + at(b)) * (b - a);
    }
    let first = cell_index(nodes, a);
    let last = cell_index(nodes, b);
    let mut total = 0.0;
    for cell in first..=last {
        let lo = a.max(nodes[cell]);
        let hi = b.min(nodes[cell + 1]);
        if hi <= lo {
            continue;
        }
        let mut base = cell - cell % 2;
        if base + 2 > n - 1 {
            base = n - 3;
        }
        total += parabola_integral(
            [nodes[base], nodes[base + 1], nodes[base + 2]],
            [values[base], values[base + 1], values[base + 2]],
            lo,
            hi,
        );
    }
    total
}

/// Cumulative integral from the first node to every node.
pub fn cumulative_samples(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..nodes.len() {
        acc += integrate_samples(nodes, values, nodes[i - 1], nodes[i]);
        out.push(acc);
    }
    out
}

/// Index `i` of the cell `[x_i, x_{i+1}]` containing `s` (clamped to valid cells).
pub fn cell_index(nodes: &[f64], s: f64) -> usize {
    let n = nodes.len();
    match nodes.partition_point(|&x| x <= s) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    }
}

/// Piecewise-linear interpolation of samples, constant extension outside.
pub fn interpolate_linear(nodes: &[f64], values: &[f64], s: f64) -> f64 {
    let n = nodes.len();
    if n == 0 {
        return 0.0;
    }
    if s <= nodes[0] {
        return values[0];
    }
    if s >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = cell_index(nodes, s);
    let w = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// First derivative of samples: five-point (fourth order) in the interior,
/// three-point next to the ends, one-sided second order at both ends.
pub fn differentiate(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n < 5 {
        return differentiate_series(nodes, values);
    }
    let mut d = differentiate_series(nodes, values);
    for i in 2..n - 2 {
        let x = &nodes[i - 2..=i + 2];
        let mut acc = 0.0;
        for j in 0..5 {
            acc += lagrange_slope(x, j, 2) * values[i - 2 + j];
        }
        d[i] = acc;
    }
    d
}

/// `L_j'(x_c)` for the Lagrange basis on the nodes `x`.
fn lagrange_slope(x: &[f64], j: usize, c: usize) -> f64 {
    let k = x.len();
    if j == c {
        return (0..k).filter(|&m| m != j).map(|m| 1.0 / (x[j] - x[m])).sum();
    }
    // L_j(x) = Π_{l≠j}(x − x_l)/(x_j − x_l) vanishes at x_c, so only the
    // term differentiating the factor (x − x_c) survives.
    let mut p = 1.0 / (x[j] - x[c]);
    for l in 0..k {
        if l != j && l != c {
            p *= (x[c] - x[l]) / (x[j] - x[l]);
        }
    }
    p
}

/// Derivative at `x[0]` of the parabola through three points.
pub fn one_sided(x: [f64; 3], y: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[0];
    // Lagrange basis derivatives evaluated at x0.
    let w0 = -(h1 + h2) / (h1 * h2);
    let w1 = h2 / (h1 * (h2 - h1));
    let w2 = -h1 / (h2 * (h2 - h1));
    w0 * y[0] + w1 * y[1] + w2 * y[2]
}

/// Three-point derivative of a (possibly irregular) series: centered in the
/// interior, one-sided second order at both ends.
pub fn differentiate_series(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (values[1] - values[0]) / (nodes[1] - nodes[0]);
        return vec![s, s];
    }
    for i in 1..n - 1 {
        let h0 = nodes[i] - nodes[i - 1];
        let h1 = nodes[i + 1] - nodes[i];
        d[i] = (-h1 / (h0 * (h0 + h1))) * values[i - 1]
            + ((h1 - h0) / (h0 * h1)) * values[i]
            + (h0 / (h1 * (h0 + h1))) * values[i + 1];
    }
    d[0] = one_sided(
        [nodes[0], nodes[1], nodes[2]],
        [values[0], values[1], values[2]],
    );
    d[n - 1] = one_sided(
        [nodes[n - 1], nodes[n - 2], nodes[n - 3]],
        [values[n - 1], values[n - 2], values[n - 3]],
    );
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_kronrod_polynomial_and_transcendental() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(f64::sin, 0.0, PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_interval() {
        let v = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1e-13);
        assert!((v - PI / 2.0).abs() < 1e-11, "{v}");
        let v = integrate_to_infinity(|x| (-x).exp(), 1.0, 1e-13);
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn samples_exact_for_quadratics_on_nonuniform_mesh() {
        let nodes: Vec<f64> = (0..12).map(|i| (i as f64).powf(1.3) * 0.1).collect();
        let vals: Vec<f64> = nodes.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let prim = |x: f64| x * x * x - 0.5 * x * x + 2.0 * x;
        for &(a, b) in &[(0.0f64, 10.0f64), (0.13, 1.7), (0.5, 0.51), (1.0, 0.3)] {
            let exact = if b > a { prim(b.min(nodes[11])) - prim(a) } else { 0.0 };
            let got = integrate_samples(&nodes, &vals, a, b);
            assert!((got - exact).abs() < 1e-12, "{a} {b}: {got} vs {exact}");
        }
        let cum = cumulative_samples(&nodes, &vals);
        assert!((cum[11] - prim(nodes[11])).abs() < 1e-12);
    }

    #[test]
    fn differentiate_exact_on_quadratics() {
        let nodes: Vec<f64> = (0..9).map(|i| (i as f64).powf(1.5)).collect();
        let vals: Vec<f64> = nodes.iter().map(|x| x * x - 4.0 * x).collect();
        for (x, d) in nodes.iter().zip(differentiate(&nodes, &vals)) {
            assert!((d - (2.0 * x - 4.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn five_point_exact_on_quartics() {
        let nodes: Vec<f64> = (0..11).map(|i| (i as f64).powf(1.2) * 0.3).collect();
        let vals: Vec<f64> = nodes.iter().map(|x| x.powi(4) - x * x).collect();
        let d = differentiate(&nodes, &vals);
        for i in 2..9 {
            let x = nodes[i];
            assert!((d[i] - (4.0 * x * x * x - 2.0 * x)).abs() < 1e-9, "{i}");
        }
    }

    #[test]
    fn interpolation_and_cells() {
        let nodes = [0.0, 1.0, 3.0];
        let vals = [0.0, 2.0, 6.0];
        assert_eq!(interpolate_linear(&nodes, &vals, 2.0), 4.0);
        assert_eq!(interpolate_linear(&nodes, &vals, 9.0), 6.0);
        assert_eq!(cell_index(&nodes, 3.0), 1);
        assert_eq!(cell_index(&nodes, -1.0), 0);
    }
}
