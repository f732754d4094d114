use serde::{Deserialize, Serialize};

use crate::fields::{binom, Factor1D, Field2D, SmoothField};
use crate::spline::composite_gauss;

use super::AnalysisError;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Integration domain of the Green identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum GreenDomain {
    /// `(x0, x1) × (z0, z1)`, all four sides carrying boundary terms.
    Box { x: [f64; 2], z: [f64; 2] },
    /// `Y × (depth, 0)` with `Y = (−½, ½)` periodic; both flat faces contribute.
    Strip { depth: f64 },
}

/// Both sides of the identity, the relative residual and the individual terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `(name, value)` of each right-hand-side term.
    pub terms: Vec<(String, f64)>,
}

impl GreenCheck {
    fn new(lhs: f64, terms: Vec<(String, f64)>, product_scale: f64) -> Self {
        let rhs: f64 = terms.iter().map(|(_, v)| v).sum();
        let scale = terms.iter().map(|(_, v)| v.abs()).sum::<f64>().max(product_scale).max(lhs.abs());
        let residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, residual, terms }
    }

    /// Largest absolute value among the left side and all terms.
    pub fn max_term(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v.abs()).fold(self.lhs.abs(), f64::max)
    }
}

/// Full third-derivative contraction `D³f : D³φ` and the norms' squares.
fn third_contraction(f: &dyn Field2D, phi: &dyn Field2D, x: [f64; 2]) -> (f64, f64, f64) {
    let (mut dot, mut nf, mut np) = (0.0, 0.0, 0.0);
    for b in 0..=3 {
        let m = binom(3, b);
        let (df, dp) = (f.partial(x, 3 - b, b), phi.partial(x, 3 - b, b));
        dot += m * df * dp;
        nf += m * df * df;
        np += m * dp * dp;
    }
    (dot, nf, np)
}

fn tensor_rule(x: [f64; 2], z: [f64; 2]) -> Vec<([f64; 2], f64)> {
    let (xs, xw) = composite_gauss(x[0], x[1], 8, 12);
    let (zs, zw) = composite_gauss(z[0], z[1], 8, 12);
    xs.iter().zip(&xw).flat_map(|(&a, &wa)| zs.iter().zip(&zw).map(move |(&b, &wb)| ([a, b], wa * wb))).collect()
}

/// Checks `∫ D³f : D³φ = −∫ Δ³f φ + ∫_∂ (nᵀD³f) : D²φ − (D²Δf n)·∇φ + ∂_n Δ²f φ`.
///
/// On the periodic strip the face integrands are integrated by parts along the
/// face, which leaves `σ[f_zzz φ_zz − (2f_xxzz + (Δf)_zz) φ_z + (f_xxxxz + (Δf)_xxz + (Δ²f)_z) φ]`
/// with `σ = ±1` the normal direction.
pub fn verify_green(f: &dyn Field2D, phi: &dyn Field2D, domain: GreenDomain) -> Result<GreenCheck, AnalysisError> {
    if f.max_order() < 6 {
        return Err(AnalysisError::InsufficientOrder { needed: 6, available: f.max_order() });
    }
    if phi.max_order() < 3 {
        return Err(AnalysisError::InsufficientOrder { needed: 3, available: phi.max_order() });
    }
    let (xr, zr) = match domain {
        GreenDomain::Box { x, z } => (x, z),
        GreenDomain::Strip { depth } => {
            if !(depth < 0.0) {
                return Err(AnalysisError::InvalidParameter(format!("strip depth {depth} must be negative")));
            }
            ([-0.5, 0.5], [depth, 0.0])
        }
    };
    let (mut lhs, mut volume, mut nf, mut np) = (0.0, 0.0, 0.0, 0.0);
    for (x, w) in tensor_rule(xr, zr) {
        let (dot, a, b) = third_contraction(f, phi, x);
        lhs += w * dot;
        nf += w * a;
        np += w * b;
        volume -= w * f.laplace_power(x, 3, 0, 0) * phi.value(x);
    }
    let mut terms = vec![("volume".to_string(), volume)];
    match domain {
        GreenDomain::Strip { depth } => {
            for (name, z, sigma) in [("top", 0.0, 1.0), ("bottom", depth, -1.0)] {
                terms.push((name.to_string(), sigma * edge_integral(xr, |x| strip_face(f, phi, [x, z]))));
            }
        }
        GreenDomain::Box { x, z } => {
            for (name, normal, fixed, range) in [("bottom", [0.0, -1.0], z[0], x), ("top", [0.0, 1.0], z[1], x), ("left", [-1.0, 0.0], x[0], z), ("right", [1.0, 0.0], x[1], z)] {
                let horizontal = normal[0] == 0.0;
                let at = |s: f64| if horizontal { [s, fixed] } else { [fixed, s] };
                terms.push((name.to_string(), edge_integral(range, |s| box_face(f, phi, at(s), normal))));
            }
        }
    }
    Ok(GreenCheck::new(lhs, terms, (nf * np).sqrt()))
}

fn edge_integral(range: [f64; 2], g: impl Fn(f64) -> f64) -> f64 {
    let (s, w) = composite_gauss(range[0], range[1], 8, 12);
    s.iter().zip(&w).map(|(&s, &w)| w * g(s)).sum()
}

/// Face integrand with outward normal `+e_z`, tangential derivatives moved onto `f`.
fn strip_face(f: &dyn Field2D, phi: &dyn Field2D, x: [f64; 2]) -> f64 {
    let lap = |a, b| f.laplace_power(x, 1, a, b);
    let first = f.partial(x, 0, 3) * phi.partial(x, 0, 2);
    let second = -(2.0 * f.partial(x, 2, 2) + lap(0, 2)) * phi.partial(x, 0, 1);
    let third = (f.partial(x, 4, 1) + lap(2, 1) + f.laplace_power(x, 2, 0, 1)) * phi.value(x);
    first + second + third
}

/// `(nᵀD³f) : D²φ − (D²Δf n)·∇φ + ∂_n Δ²f φ` at a point of a box side.
fn box_face(f: &dyn Field2D, phi: &dyn Field2D, x: [f64; 2], n: [f64; 2]) -> f64 {
    // unit multi-index e_i as (a, b) exponents
    let e = [(1usize, 0usize), (0, 1)];
    let mut acc = 0.0;
    for k in 0..2 {
        if n[k] == 0.0 {
            continue;
        }
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (e[i].0 + e[j].0, e[i].1 + e[j].1);
                acc += n[k] * f.partial(x, a + e[k].0, b + e[k].1) * phi.partial(x, a, b);
            }
            let (a, b) = (e[i].0 + e[k].0, e[i].1 + e[k].1);
            acc -= n[k] * f.laplace_power(x, 1, a, b) * phi.partial(x, e[i].0, e[i].1);
        }
        acc += n[k] * f.laplace_power(x, 2, e[k].0, e[k].1) * phi.value(x);
    }
    acc
}

/// One-dimensional reduction on `(a, b)`:
/// `∫ f‴φ‴ = −∫ f⁽⁶⁾φ + [f‴φ″ − f⁗φ′ + f⁽⁵⁾φ]_a^b`.
pub fn green_1d(f: &Factor1D, phi: &Factor1D, a: f64, b: f64) -> GreenCheck {
    let (s, w) = composite_gauss(a, b, 16, 12);
    let (mut lhs, mut volume, mut nf, mut np) = (0.0, 0.0, 0.0, 0.0);
    for (&x, &w) in s.iter().zip(&w) {
        let (f3, p3) = (f.derivative(x, 3), phi.derivative(x, 3));
        lhs += w * f3 * p3;
        nf += w * f3 * f3;
        np += w * p3 * p3;
        volume -= w * f.derivative(x, 6) * phi.derivative(x, 0);
    }
    let bracket = |x: f64| f.derivative(x, 3) * phi.derivative(x, 2) - f.derivative(x, 4) * phi.derivative(x, 1) + f.derivative(x, 5) * phi.derivative(x, 0);
    let terms = vec![("volume".to_string(), volume), ("right".to_string(), bracket(b)), ("left".to_string(), -bracket(a))];
    GreenCheck::new(lhs, terms, (nf * np).sqrt())
}

/// A named test pair for the strip identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenPair {
    pub name: String,
    pub f: SmoothField,
    pub phi: SmoothField,
    pub depth: f64,
}

/// Smooth `Y`-periodic test pairs: trigonometric modes in `ȳ` times polynomials or
/// trigonometric factors in `y_N`.
pub fn strip_corpus() -> Vec<GreenPair> {
    let trig = |m: f64, c: f64, s: f64| Factor1D::trig(TWO_PI * m, c, s);
    let poly = Factor1D::poly;
    let pair = |name: &str, f: SmoothField, phi: SmoothField, depth: f64| GreenPair { name: name.into(), f, phi, depth };
    let one = || Factor1D::poly(&[1.0]);
    vec![
        pair(
            "cos(1+z)^4-vs-sin.z(1+z)^2",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-1.0, 4)),
            SmoothField::term(1.0, trig(1.0, 0.0, 1.0), Factor1D::shifted_power(-1.0, 2).times_poly(&[0.0, 1.0])),
            -1.0,
        ),
        pair(
            "cos.z^3-vs-cos.(1+z)^3",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), poly(&[0.0, 0.0, 0.0, 1.0])),
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-1.0, 3)),
            -1.0,
        ),
        pair(
            "sin2.sin3z-vs-sin2.cos2z",
            SmoothField::term(1.0, trig(2.0, 0.0, 1.0), Factor1D::trig(3.0, 0.0, 1.0)),
            SmoothField::term(1.0, trig(2.0, 0.0, 1.0), Factor1D::trig(2.0, 1.0, 0.0)),
            -1.0,
        ),
        pair(
            "poly-z-only",
            SmoothField::term(1.0, one(), poly(&[0.3, -1.0, 0.5, 2.0, 0.0, 1.0, 0.25])),
            SmoothField::term(1.0, one(), poly(&[1.0, 1.0, -2.0, 0.5])),
            -1.0,
        ),
        pair(
            "mixed-modes",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.5), poly(&[0.0, 1.0, 1.0, 0.0, 0.5])).plus(SmoothField::term(0.5, trig(2.0, 0.0, 1.0), poly(&[1.0, 0.0, 1.0]))),
            SmoothField::term(1.0, trig(1.0, 0.3, 1.0), poly(&[0.0, 0.0, 1.0, 1.0])).plus(SmoothField::term(-2.0, trig(2.0, 1.0, 0.0), poly(&[0.0, 1.0]))),
            -1.0,
        ),
        pair(
            "deep-strip",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::trig(1.5, 1.0, 0.2)),
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-2.0, 3)),
            -2.0,
        ),
        pair(
            "shallow-strip",
            SmoothField::term(1.0, trig(3.0, 0.0, 1.0), poly(&[1.0, 2.0, 0.0, 0.0, 1.0])),
            SmoothField::term(1.0, trig(3.0, 0.0, 1.0), Factor1D::trig(4.0, 0.0, 1.0)),
            -0.5,
        ),
        pair(
            "trig-times-poly-z",
            SmoothField::term(1.0, trig(1.0, 0.0, 1.0), Factor1D::trig(2.0, 1.0, 0.0).times_poly(&[1.0, 1.0])),
            SmoothField::term(1.0, trig(1.0, 1.0, 1.0), poly(&[0.0, 1.0, 0.0, 1.0])),
            -1.0,
        ),
        pair(
            "quintic-vs-quartic",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-1.0, 5)),
            SmoothField::term(1.0, trig(1.0, 1.0, 0.5), Factor1D::shifted_power(-1.0, 4)),
            -1.0,
        ),
        pair(
            "lifting-like",
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-1.0, 4)).plus(SmoothField::term(1.5, one(), Factor1D::shifted_power(-1.0, 4))),
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), Factor1D::shifted_power(-1.0, 4)).plus(SmoothField::term(1.5, one(), Factor1D::shifted_power(-1.0, 4))),
            -1.0,
        ),
        pair(
            "high-mode",
            SmoothField::term(1.0, trig(4.0, 1.0, 0.0), Factor1D::trig(1.0, 0.5, 1.0)),
            SmoothField::term(1.0, trig(4.0, 0.5, 0.5), poly(&[1.0, 0.0, 1.0])),
            -1.0,
        ),
        pair(
            "constant-f",
            SmoothField::term(2.0, one(), one()),
            SmoothField::term(1.0, trig(1.0, 1.0, 0.0), poly(&[1.0, 1.0])),
            -1.0,
        ),
    ]
}
