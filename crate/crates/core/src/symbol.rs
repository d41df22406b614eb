//! Spectral symbols of the variable-Toeplitz family.
//!
//! The symbol attached to a ratio profile `phi` is
//!
//! ```text
//! kappa(x, th) = (1 - d*sqrt(phi(x))*e^{i th} - e*phi(x)*e^{2i th}) / (1 + phi(x))
//! ```
//!
//! with smoothing parameters `(d, e) = (delta, eta)`. For constant
//! `phi = r` the real part reduces to a quadratic in `cos(th)`, which makes
//! extrema and negative level sets exactly computable. For grids produced by
//! a smooth map the first-order momentary correction `l(x, th)` refines the
//! limit symbol with an `O(1/n)` weight.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridMap;

/// The two smoothing parameters of the stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolParams {
    pub delta: f64,
    pub eta: f64,
}

impl Default for SymbolParams {
    fn default() -> Self {
        // second-order variable-step BDF values
        Self { delta: 0.9672, eta: -0.1793 }
    }
}

impl SymbolParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        if !delta.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "delta and eta must be finite, got ({delta}, {eta})"
            )));
        }
        Ok(Self { delta, eta })
    }
}

/// Ratio profile `phi_hat` on `[0, 1]`; must be nonnegative so that
/// `sqrt(phi_hat)` is real.
#[derive(Debug, Clone)]
pub enum PhiSpec {
    Constant(f64),
    /// `x^2`
    XSquared,
    /// `1 + cos(2x)`
    OnePlusCos2x,
    /// Piecewise-linear table of `(x, value)` samples on `[0, 1]`.
    Table(Vec<(f64, f64)>),
}

impl PhiSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PhiSpec::Constant(c) => *c,
            PhiSpec::XSquared => x * x,
            PhiSpec::OnePlusCos2x => 1.0 + (2.0 * x).cos(),
            PhiSpec::Table(pts) => {
                let i = match pts.partition_point(|p| p.0 <= x) {
                    0 => return pts[0].1,
                    k if k >= pts.len() => return pts[pts.len() - 1].1,
                    k => k - 1,
                };
                let (x0, y0) = pts[i];
                let (x1, y1) = pts[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            PhiSpec::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Identifier used in report metadata.
    pub fn id(&self) -> String {
        match self {
            PhiSpec::Constant(c) => format!("const:{c}"),
            PhiSpec::XSquared => "x^2".into(),
            PhiSpec::OnePlusCos2x => "1+cos(2x)".into(),
            PhiSpec::Table(_) => "table".into(),
        }
    }

    /// Parses `x2`, `onepluscos2x`, `const:<v>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "x2" | "x^2" => Ok(PhiSpec::XSquared),
            "onepluscos2x" | "1+cos(2x)" => Ok(PhiSpec::OnePlusCos2x),
            _ => {
                if let Some(v) = name.strip_prefix("const:") {
                    let c: f64 = v
                        .parse()
                        .map_err(|_| Error::Config(format!("bad phi spec: {name:?}")))?;
                    Ok(PhiSpec::Constant(c))
                } else {
                    Err(Error::Config(format!("unknown phi spec: {name:?}")))
                }
            }
        }
    }
}

fn phi_at(phi: &PhiSpec, x: f64) -> Result<f64> {
    let v = phi.eval(x);
    if v < 0.0 || !v.is_finite() {
        return Err(Error::SymbolDomain(format!(
            "phi({x}) = {v}; sqrt(phi) requires a nonnegative finite value"
        )));
    }
    Ok(v)
}

/// `kappa(x, th)` as a complex value.
pub fn eval_kappa(params: &SymbolParams, phi: &PhiSpec, x: f64, theta: f64) -> Result<Complex64> {
    let p = phi_at(phi, x)?;
    let e1 = Complex64::from_polar(1.0, theta);
    let e2 = Complex64::from_polar(1.0, 2.0 * theta);
    let num = Complex64::new(1.0, 0.0) - params.delta * p.sqrt() * e1 - params.eta * p * e2;
    Ok(num / (1.0 + p))
}

/// `Re(kappa(x, th))` through the cosine closed form.
pub fn eval_re_kappa(params: &SymbolParams, phi: &PhiSpec, x: f64, theta: f64) -> Result<f64> {
    let p = phi_at(phi, x)?;
    Ok((1.0 - params.delta * p.sqrt() * theta.cos() - params.eta * p * (2.0 * theta).cos())
        / (1.0 + p))
}

/// Quadratic `P(z) = a2 z^2 + a1 z + a0` obtained from `Re(kappa_1)` via
/// `z = cos(th)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl Quadratic {
    pub fn eval(&self, z: f64) -> f64 {
        (self.a2 * z + self.a1) * z + self.a0
    }

    /// Vertex `(z_e, P(z_e))`; `None` when the quadratic degenerates to a
    /// linear function (`a2 = 0`).
    pub fn vertex(&self) -> Option<(f64, f64)> {
        if self.a2 == 0.0 {
            return None;
        }
        let z = -self.a1 / (2.0 * self.a2);
        Some((z, self.eval(z)))
    }
}

/// Stationary (`r = 1`) reduction: `P(z) = -eta z^2 - (delta/2) z + (eta+1)/2`.
pub fn stationary_quadratic(params: &SymbolParams) -> Quadratic {
    Quadratic { a2: -params.eta, a1: -params.delta / 2.0, a0: (params.eta + 1.0) / 2.0 }
}

/// Quadratic in `z = cos(th)` representing `Re(kappa_r)` for constant ratio r.
fn stationary_quadratic_r(params: &SymbolParams, r: f64) -> Quadratic {
    let w = 1.0 + r;
    Quadratic {
        a2: -2.0 * params.eta * r / w,
        a1: -params.delta * r.sqrt() / w,
        a0: (1.0 + params.eta * r) / w,
    }
}

/// Extrema of `Re(kappa_r)` over `th in [-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin_theta: f64,
    pub max: f64,
    pub argmax_theta: f64,
}

/// Exact extrema of the stationary symbol: the quadratic in `z = cos(th)` is
/// examined at the endpoints of `[-1, 1]` and at its vertex when interior.
pub fn extrema_on_interval(params: &SymbolParams, r: f64) -> Result<Extrema> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("need r >= 0, got {r}")));
    }
    let q = stationary_quadratic_r(params, r);
    let mut candidates = vec![-1.0, 1.0];
    if let Some((zv, _)) = q.vertex() {
        if zv > -1.0 && zv < 1.0 {
            candidates.push(zv);
        }
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut argmin = 0.0;
    let mut argmax = 0.0;
    for z in candidates {
        let v = q.eval(z);
        if v < min {
            min = v;
            argmin = z.clamp(-1.0, 1.0).acos();
        }
        if v > max {
            max = v;
            argmax = z.clamp(-1.0, 1.0).acos();
        }
    }
    Ok(Extrema { min, argmin_theta: argmin, max, argmax_theta: argmax })
}

/// Lebesgue measure of `{th in [0, pi] : Re(kappa_r(th)) < 0}`, from the
/// closed-form roots of the quadratic in `cos(th)`.
pub fn negative_level_measure(params: &SymbolParams, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("need r >= 0, got {r}")));
    }
    let q = stationary_quadratic_r(params, r);
    let mut cuts = vec![-1.0, 1.0];
    if q.a2 != 0.0 {
        let disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0;
        if disc > 0.0 {
            let s = disc.sqrt();
            for z in [(-q.a1 - s) / (2.0 * q.a2), (-q.a1 + s) / (2.0 * q.a2)] {
                if z > -1.0 && z < 1.0 {
                    cuts.push(z);
                }
            }
        }
    } else if q.a1 != 0.0 {
        let z = -q.a0 / q.a1;
        if z > -1.0 && z < 1.0 {
            cuts.push(z);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut measure = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if q.eval(mid) < 0.0 {
            // arccos is decreasing: z-interval [w0, w1] maps to
            // theta-interval [acos(w1), acos(w0)]
            measure += w[0].acos() - w[1].acos();
        }
    }
    Ok(measure)
}

/// The scalar weight `-psi''(x)/psi'(x)` entering the momentary correction.
/// Rejects table maps and any point where the slope is not strictly positive
/// (power maps with exponent > 1 fail at `x = 0`).
pub fn momentary_weight(map: &GridMap, x: f64) -> Result<f64> {
    if !map.has_closed_form_derivatives() {
        return Err(Error::SymbolDomain(
            "momentary correction needs closed-form derivatives; table maps are not smooth".into(),
        ));
    }
    let d1 = map.deriv1(x);
    if !(d1 > 0.0) || !d1.is_finite() {
        return Err(Error::SymbolDomain(format!(
            "momentary correction needs psi'(x) > 0, got psi'({x}) = {d1}"
        )));
    }
    Ok(-map.deriv2(x) / d1)
}

/// First-order momentary correction
/// `l(x, th) = -(psi''(x)/psi'(x)) * (1/4 + (eta/4) e^{2i th})`
/// for a grid map with closed-form derivatives and positive slope at `x`.
pub fn momentary_correction(
    map: &GridMap,
    params: &SymbolParams,
    x: f64,
    theta: f64,
) -> Result<Complex64> {
    let weight = momentary_weight(map, x)?;
    let e2 = Complex64::from_polar(1.0, 2.0 * theta);
    Ok(weight * (Complex64::new(0.25, 0.0) + 0.25 * params.eta * e2))
}

/// Which scalar reduction of `kappa` to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolPart {
    /// `|kappa|`, compared against singular values.
    Modulus,
    /// `Re(kappa)`, compared against eigenvalues of the Hermitian part.
    RealPart,
}

impl SymbolPart {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "abs" | "modulus" => Ok(SymbolPart::Modulus),
            "re" | "real" => Ok(SymbolPart::RealPart),
            _ => Err(Error::Config(format!("unknown symbol part: {name:?}"))),
        }
    }
}

/// Sorted sampling of the symbol on the tensor grid `x_j = j/gx`,
/// `th_k = -pi + 2 pi k/gt` (`j = 1..gx`, `k = 1..gt`).
pub fn sample_symbol(
    params: &SymbolParams,
    phi: &PhiSpec,
    grid_x: usize,
    grid_theta: usize,
    part: SymbolPart,
) -> Result<Vec<f64>> {
    if grid_x == 0 || grid_theta == 0 {
        return Err(Error::InvalidArgument("sampling grid sizes must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(grid_x * grid_theta);
    for j in 1..=grid_x {
        let x = j as f64 / grid_x as f64;
        for k in 1..=grid_theta {
            let theta = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * k as f64 / grid_theta as f64;
            let v = match part {
                SymbolPart::Modulus => eval_kappa(params, phi, x, theta)?.norm(),
                SymbolPart::RealPart => eval_re_kappa(params, phi, x, theta)?,
            };
            out.push(v);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// CSV export of raw tensor-grid samples, columns `x,theta,value`.
pub fn samples_to_csv(
    params: &SymbolParams,
    phi: &PhiSpec,
    grid_x: usize,
    grid_theta: usize,
    part: SymbolPart,
) -> Result<String> {
    let mut out = String::from("# schema vartoeplitz.symbol-samples.v1\nx,theta,value\n");
    for j in 1..=grid_x {
        let x = j as f64 / grid_x as f64;
        for k in 1..=grid_theta {
            let theta = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * k as f64 / grid_theta as f64;
            let v = match part {
                SymbolPart::Modulus => eval_kappa(params, phi, x, theta)?.norm(),
                SymbolPart::RealPart => eval_re_kappa(params, phi, x, theta)?,
            };
            let _ = writeln!(out, "{},{},{}", x, theta, v);
        }
    }
    Ok(out)
}

/// CSV export of sorted sample quantiles, columns `k,q_k`.
pub fn quantiles_to_csv(sorted: &[f64]) -> String {
    let mut out = String::from("# schema vartoeplitz.symbol-quantiles.v1\nk,q_k\n");
    for (k, v) in sorted.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, v);
    }
    out
}

/// Number of quadrature nodes for [`fourier_coefficients`]; trapezoid on a
/// periodic domain, spectrally accurate for smooth integrands.
pub const FOURIER_QUADRATURE_NODES: usize = 1 << 14;

/// Fourier coefficients `a_{-k}, ..., a_k` of a `2 pi`-periodic function,
/// `a_k = (1/2 pi) \int f(th) e^{-i k th} dth`.
pub fn fourier_coefficients<F>(f: F, k_range: usize) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let n = FOURIER_QUADRATURE_NODES;
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        samples.push((theta, f(theta)));
    }
    let mut coeffs = Vec::with_capacity(2 * k_range + 1);
    for k in -(k_range as i64)..=(k_range as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(theta, v) in &samples {
            acc += v * Complex64::from_polar(1.0, -(k as f64) * theta);
        }
        coeffs.push(acc / n as f64);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn defaults() -> SymbolParams {
        SymbolParams::default()
    }

    #[test]
    fn kappa_at_zero_phi_is_one() {
        let p = defaults();
        for theta in [-3.0, -0.5, 0.0, 1.2, 3.14] {
            let v = eval_kappa(&p, &PhiSpec::Constant(0.0), 0.3, theta).unwrap();
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kappa_with_zero_params_is_reciprocal() {
        let p = SymbolParams::new(0.0, 0.0).unwrap();
        let r = 0.7;
        let v = eval_kappa(&p, &PhiSpec::Constant(r), 0.5, 1.0).unwrap();
        assert_relative_eq!(v.re, 1.0 / (1.0 + r), max_relative = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn kappa_minimum_value_at_theta_zero() {
        let v = eval_kappa(&defaults(), &PhiSpec::Constant(1.0), 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(v.re, 0.10605, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn kappa_rejects_negative_phi() {
        assert!(eval_kappa(&defaults(), &PhiSpec::Constant(-0.1), 0.5, 0.0).is_err());
    }

    #[test]
    fn re_kappa_matches_complex_real_part() {
        let p = defaults();
        let phi = PhiSpec::XSquared;
        for j in 0..100 {
            let x = (j + 1) as f64 / 100.0;
            for k in 0..100 {
                let theta =
                    -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (k + 1) as f64 / 100.0;
                let a = eval_kappa(&p, &phi, x, theta).unwrap().re;
                let b = eval_re_kappa(&p, &phi, x, theta).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn re_kappa_spot_values() {
        let p = defaults();
        let phi = PhiSpec::Constant(1.0);
        assert_abs_diff_eq!(
            eval_re_kappa(&p, &phi, 0.5, std::f64::consts::PI).unwrap(),
            1.07325,
            epsilon = 1e-12
        );
        // cos(th) = 0, cos(2 th) = -1: (1 + eta)/2
        assert_abs_diff_eq!(
            eval_re_kappa(&p, &phi, 0.5, std::f64::consts::FRAC_PI_2).unwrap(),
            0.41035,
            epsilon = 1e-12
        );
    }

    #[test]
    fn kappa_conjugate_symmetry() {
        let p = defaults();
        for r in [0.3, 1.0, 1.9398, 2.5] {
            for k in 0..50 {
                let theta = 0.06 * k as f64;
                let a = eval_kappa(&p, &PhiSpec::Constant(r), 0.5, theta).unwrap();
                let b = eval_kappa(&p, &PhiSpec::Constant(r), 0.5, -theta).unwrap();
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
                assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn stationary_quadratic_coefficients_and_vertex() {
        let q = stationary_quadratic(&defaults());
        assert_relative_eq!(q.a2, 0.1793, max_relative = 1e-15);
        assert_relative_eq!(q.a1, -0.4836, max_relative = 1e-15);
        assert_relative_eq!(q.a0, 0.41035, max_relative = 1e-15);
        let (ze, pe) = q.vertex().unwrap();
        assert_abs_diff_eq!(ze, 1.3486, epsilon = 1e-3);
        assert_abs_diff_eq!(pe, 0.0843, epsilon = 1e-3);
    }

    #[test]
    fn stationary_quadratic_degenerate() {
        let q = stationary_quadratic(&SymbolParams::new(0.0, 0.0).unwrap());
        assert!(q.vertex().is_none());
        assert_abs_diff_eq!(q.eval(0.3), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_matches_re_kappa_at_r1() {
        let p = defaults();
        let q = stationary_quadratic(&p);
        // pseudo-random but reproducible angles
        let mut state = 1u64;
        for _ in 0..1000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let theta = (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * std::f64::consts::PI
                - std::f64::consts::PI;
            let a = q.eval(theta.cos());
            let b = eval_re_kappa(&p, &PhiSpec::Constant(1.0), 0.5, theta).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn extrema_at_r1() {
        let e = extrema_on_interval(&defaults(), 1.0).unwrap();
        assert_abs_diff_eq!(e.min, 0.10605, epsilon = 1e-12);
        assert_abs_diff_eq!(e.max, 1.07325, epsilon = 1e-12);
        assert_abs_diff_eq!(e.argmin_theta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.argmax_theta, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn extrema_at_critical_ratio() {
        // at r = 1.9398 the minimum sits at an interior theta and is ~ 0
        let e = extrema_on_interval(&defaults(), 1.9398).unwrap();
        assert!(e.min.abs() < 5e-4, "min = {}", e.min);
        assert!(e.argmin_theta > 0.1, "argmin = {}", e.argmin_theta);
    }

    #[test]
    fn extrema_constant_symbol() {
        for r in [0.0, 0.5, 3.0] {
            let e = extrema_on_interval(&SymbolParams::new(0.0, 0.0).unwrap(), r).unwrap();
            assert_relative_eq!(e.min, 1.0 / (1.0 + r), max_relative = 1e-15);
            assert_relative_eq!(e.max, 1.0 / (1.0 + r), max_relative = 1e-15);
        }
    }

    #[test]
    fn extrema_agree_with_brute_force() {
        let p = defaults();
        for r in [0.4, 1.0, 1.9398, 2.5, 4.0] {
            let e = extrema_on_interval(&p, r).unwrap();
            let mut bmin = f64::INFINITY;
            let mut bmax = f64::NEG_INFINITY;
            let n = 1_000_000;
            for k in 0..=n {
                let theta = -std::f64::consts::PI
                    + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let v = eval_re_kappa(&p, &PhiSpec::Constant(r), 0.5, theta).unwrap();
                bmin = bmin.min(v);
                bmax = bmax.max(v);
            }
            assert_abs_diff_eq!(e.min, bmin, epsilon = 1e-6);
            assert_abs_diff_eq!(e.max, bmax, epsilon = 1e-6);
        }
    }

    #[test]
    fn measure_zero_iff_min_nonnegative() {
        let p = defaults();
        for r in [0.2, 1.0, 1.9, 1.9398, 1.95, 2.2, 2.5, 5.0] {
            let mu = negative_level_measure(&p, r).unwrap();
            let e = extrema_on_interval(&p, r).unwrap();
            if e.min >= 0.0 {
                assert!(mu.abs() <= 1e-12, "r={r}: mu={mu} but min={}", e.min);
            } else {
                assert!(mu > 0.0, "r={r}: mu={mu} but min={}", e.min);
            }
        }
    }

    #[test]
    fn measure_spot_values() {
        let p = defaults();
        assert_eq!(negative_level_measure(&p, 1.0).unwrap(), 0.0);
        assert!(negative_level_measure(&p, 1.9398).unwrap() <= 1e-3);
        let mu = negative_level_measure(&p, 2.5).unwrap();
        assert!(mu > 0.0);
        // brute-force sampling oracle with 10^6 points
        let n = 1_000_000;
        let mut hits = 0usize;
        for k in 0..n {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            if eval_re_kappa(&p, &PhiSpec::Constant(2.5), 0.5, theta).unwrap() < 0.0 {
                hits += 1;
            }
        }
        let brute = std::f64::consts::PI * hits as f64 / n as f64;
        assert_abs_diff_eq!(mu, brute, epsilon = 1e-5);
    }

    #[test]
    fn momentary_zero_for_identity_map() {
        let p = defaults();
        for theta in [-2.0, 0.0, 0.7] {
            for x in [0.0, 0.5, 1.0] {
                let l = momentary_correction(&GridMap::Identity, &p, x, theta).unwrap();
                assert_abs_diff_eq!(l.norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn momentary_affine_quadratic_value() {
        // psi = (x + x^2)/2: psi''/psi' = 2/(1 + 2x) = 2/3 at x = 1;
        // l(1, 0) = -(2/3) * (1 + eta)/4
        let p = defaults();
        let l = momentary_correction(&GridMap::AffineQuadratic, &p, 1.0, 0.0).unwrap();
        let expect = -(2.0 / 3.0) * 0.25 * (1.0 + p.eta);
        assert_abs_diff_eq!(l.re, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(l.re, -0.13678333333333333, epsilon = 1e-12);
        assert_abs_diff_eq!(l.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn momentary_theta_half_pi_reduction() {
        // e^{2i th} = -1 at th = pi/2: l = -(psi''/psi')(1 - eta)/4
        let p = defaults();
        let x = 0.25;
        let l = momentary_correction(
            &GridMap::AffineQuadratic,
            &p,
            x,
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        let ratio = 2.0 / (1.0 + 2.0 * x);
        assert_abs_diff_eq!(l.re, -ratio * (1.0 - p.eta) / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn momentary_rejects_flat_or_table_maps() {
        let p = defaults();
        // power(p > 1) has psi'(0) = 0
        let map = GridMap::power(2.0).unwrap();
        assert!(momentary_correction(&map, &p, 0.0, 0.0).is_err());
        assert!(momentary_correction(&map, &p, 0.5, 0.0).is_ok());
        let table =
            GridMap::table(vec![(0.0, 0.0), (0.25, 0.2), (0.5, 0.45), (1.0, 1.0)]).unwrap();
        assert!(momentary_correction(&table, &p, 0.5, 0.0).is_err());
    }

    #[test]
    fn momentary_affine_in_eta() {
        let x = 0.6;
        let theta = 1.1;
        let map = GridMap::AffineQuadratic;
        let l = |eta: f64| {
            momentary_correction(&map, &SymbolParams::new(0.9672, eta).unwrap(), x, theta).unwrap()
        };
        let l0 = l(0.0);
        let l1 = l(1.0);
        for eta in [-0.5, 0.3, 2.0] {
            let expect = l0 + eta * (l1 - l0);
            let got = l(eta);
            assert_abs_diff_eq!((got - expect).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sample_symbol_constant_and_sorted() {
        let p = SymbolParams::new(0.0, 0.0).unwrap();
        let s = sample_symbol(&p, &PhiSpec::Constant(1.0), 4, 16, SymbolPart::RealPart).unwrap();
        assert_eq!(s.len(), 64);
        for v in &s {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        let p = defaults();
        let s = sample_symbol(&p, &PhiSpec::XSquared, 13, 29, SymbolPart::Modulus).unwrap();
        for w in s.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn sample_symbol_min_approaches_symbol_min() {
        let p = defaults();
        let s = sample_symbol(&p, &PhiSpec::Constant(1.0), 1, 20_000, SymbolPart::RealPart)
            .unwrap();
        assert_abs_diff_eq!(s[0], 0.10605, epsilon = 1e-6);
    }

    #[test]
    fn fourier_constant_and_single_mode() {
        let c = fourier_coefficients(|_| Complex64::new(1.0, 0.0), 3);
        assert_eq!(c.len(), 7);
        for (i, v) in c.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
        let c = fourier_coefficients(|t| Complex64::from_polar(1.0, t), 2);
        for (i, v) in c.iter().enumerate() {
            // order: a_{-2}, a_{-1}, a_0, a_1, a_2
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fourier_fd_stencil() {
        // rho(th) = (2 - 2 cos th)^2 has coefficients (1, -4, 6, -4, 1)
        let c = fourier_coefficients(
            |t| {
                let v = (2.0 - 2.0 * t.cos()).powi(2);
                Complex64::new(v, 0.0)
            },
            2,
        );
        let expect = [1.0, -4.0, 6.0, -4.0, 1.0];
        for (v, e) in c.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(v.re, *e, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_table_interpolates() {
        let phi = PhiSpec::Table(vec![(0.0, 1.0), (0.5, 2.0), (1.0, 4.0)]);
        assert_abs_diff_eq!(phi.eval(0.25), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.eval(0.75), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.eval(1.0), 4.0, epsilon = 1e-15);
    }
}
