//! Closed forms for Hamilton's cigar soliton and its time-dependent family.
//!
//! The static cigar is `g_c = (dx² + dy²) / (1 + x² + y²)`. In the arc-length
//! coordinate `s = arcsinh r` it reads `ds² + tanh² s dθ²`, an asymptotic
//! cylinder of circumference 2π. The family
//! `g_c(t) = (dx² + dy²) / (e^{4t} + x² + y²)` solves the Ricci flow and is
//! the static cigar pulled back by `φ_t(a, b) = (e^{2t} a, e^{2t} b)`.
//!
//! Every evaluator is a pure function; these serve as oracles for the
//! solvers, so nothing here is cached or approximated beyond f64 rounding.

use std::f64::consts::LN_2;

use crate::error::{FlowError, Result};

/// Above this radius `arcsinh r` switches to its `ln 2r` asymptote.
const ASINH_ASYMPTOTE: f64 = 1e8;

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(FlowError::Domain(format!(
            "radius must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}

/// `ln(1 + r²)` without overflow for huge r.
fn ln_one_plus_square(r: f64) -> f64 {
    if r > 1e150 {
        2.0 * r.ln() + (1.0 / (r * r)).ln_1p()
    } else {
        (r * r).ln_1p()
    }
}

/// `ln cosh s`, accurate both near zero and for large |s|.
pub fn ln_cosh(s: f64) -> f64 {
    let a = s.abs();
    if a < 20.0 {
        let half = (0.5 * a).sinh();
        (2.0 * half * half).ln_1p()
    } else {
        a - LN_2 + (-2.0 * a).exp().ln_1p()
    }
}

/// Conformal density of the cigar against the Euclidean metric, `w₀ = 1/(1+r²)`.
pub fn cigar_density(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(1.0 / (1.0 + r * r))
}

/// Scalar curvature `R_c = 4/(1+r²)`; twice the Gauss curvature.
pub fn cigar_scalar_curvature(r: f64) -> Result<f64> {
    Ok(4.0 * cigar_density(r)?)
}

pub fn cigar_gauss_curvature(r: f64) -> Result<f64> {
    Ok(0.5 * cigar_scalar_curvature(r)?)
}

/// Ricci potential `f₀ = ln(1+r²)`, normalised so that `f₀(0) = 0`.
pub fn cigar_potential(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(ln_one_plus_square(r))
}

/// Cigar arc length from the tip, `s = arcsinh r`.
pub fn arc_length(r: f64) -> Result<f64> {
    check_radius(r)?;
    if r > ASINH_ASYMPTOTE {
        // ln(r + √(1+r²)) = ln 2r + 1/(4r²) + O(r⁻⁴)
        Ok(LN_2 + r.ln() + 0.25 / (r * r))
    } else {
        // ln1p form keeps full relative accuracy for small r
        Ok((r + r * r / (1.0 + (1.0 + r * r).sqrt())).ln_1p())
    }
}

/// Inverse of [`arc_length`]: `r = sinh s`.
pub fn radius_of(s: f64) -> Result<f64> {
    if !s.is_finite() || s < 0.0 {
        return Err(FlowError::Domain(format!(
            "arc length must be finite and non-negative, got {s}"
        )));
    }
    let r = s.sinh();
    if !r.is_finite() {
        return Err(FlowError::Range(format!("sinh({s}) overflows f64")));
    }
    Ok(r)
}

/// Euclidean-gauge log factor of the static cigar as a function of s:
/// `ũ = ln w₀ = -2 ln cosh s`.
pub fn cigar_log_factor_s(s: f64) -> f64 {
    -2.0 * ln_cosh(s)
}

/// Scalar curvature of the cigar in the arc-length coordinate, `4 cosh⁻² s`.
pub fn cigar_scalar_curvature_s(s: f64) -> f64 {
    let c = s.cosh();
    4.0 / (c * c)
}

/// The time-dependent soliton `g_c(t) = |dx|² / (e^{4t} + |x|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonFamily {
    pub t: f64,
}

impl SolitonFamily {
    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(FlowError::Domain(format!("time must be finite, got {t}")));
        }
        Ok(Self { t })
    }

    fn growth(&self) -> Result<f64> {
        let e = (4.0 * self.t).exp();
        if !e.is_finite() {
            return Err(FlowError::Range(format!(
                "e^(4t) overflows f64 at t = {}",
                self.t
            )));
        }
        Ok(e)
    }

    /// Metric density `1/(e^{4t} + |x|²)` at a point of the plane.
    pub fn density(&self, x: [f64; 2]) -> Result<f64> {
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(FlowError::Domain(format!(
                "point must be finite, got {x:?}"
            )));
        }
        let d = 1.0 / (self.growth()? + x[0] * x[0] + x[1] * x[1]);
        if d == 0.0 {
            return Err(FlowError::Range(format!(
                "density underflows at x = {x:?}, t = {}",
                self.t
            )));
        }
        Ok(d)
    }

    /// `ũ(r, t) = -ln(e^{4t} + r²)`; stays finite where [`Self::density`] would overflow.
    pub fn log_factor(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let lead = 4.0 * self.t;
        if !lead.is_finite() {
            return Err(FlowError::Range(format!("4t not finite at t = {}", self.t)));
        }
        // ln(e^{4t} + r²) = 4t + ln(1 + r² e^{-4t}) = 2 ln r + ln(1 + e^{4t}/r²)
        if r == 0.0 || 2.0 * r.ln() < lead {
            Ok(-(lead + (r * r * (-lead).exp()).ln_1p()))
        } else {
            Ok(-(2.0 * r.ln() + ((lead - 2.0 * r.ln()).exp()).ln_1p()))
        }
    }

    /// `∂_s ũ` at arc length `s`: `-2 sinh s cosh s / (e^{4t} + sinh² s)`.
    pub fn log_factor_slope_s(&self, s: f64) -> Result<f64> {
        let r = radius_of(s)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let coth = 1.0 / s.tanh();
        Ok(-2.0 * coth / (1.0 + self.growth()? / (r * r)))
    }

    /// Scalar curvature of the family, `4e^{4t}/(e^{4t} + r²)`.
    pub fn scalar_curvature(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let ratio = r * r * (-4.0 * self.t).exp();
        Ok(4.0 / (1.0 + ratio))
    }

    /// The dilation `φ_t(a, b) = (e^{2t} a, e^{2t} b)`.
    pub fn pullback(&self, a: f64, b: f64) -> Result<[f64; 2]> {
        if !a.is_finite() || !b.is_finite() {
            return Err(FlowError::Domain(format!(
                "coordinates must be finite, got ({a}, {b})"
            )));
        }
        let k = (2.0 * self.t).exp();
        let p = [k * a, k * b];
        if !k.is_finite() || !p[0].is_finite() || !p[1].is_finite() {
            return Err(FlowError::Range(format!(
                "e^(2t) dilation overflows at t = {}",
                self.t
            )));
        }
        Ok(p)
    }
}

pub fn soliton_density(x: [f64; 2], t: f64) -> Result<f64> {
    SolitonFamily::new(t)?.density(x)
}

pub fn soliton_pullback(a: f64, b: f64, t: f64) -> Result<[f64; 2]> {
    SolitonFamily::new(t)?.pullback(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn density_examples() {
        assert_eq!(cigar_density(0.0).unwrap(), 1.0);
        assert_eq!(cigar_density(1.0).unwrap(), 0.5);
        assert!((cigar_density(3.0).unwrap() - 0.1).abs() < 1e-16);
        assert!(cigar_density(-1.0).is_err());
        assert!(cigar_density(f64::NAN).is_err());
        assert!(cigar_density(f64::INFINITY).is_err());
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(cigar_scalar_curvature(0.0).unwrap(), 4.0);
        assert_eq!(cigar_scalar_curvature(1.0).unwrap(), 2.0);
        assert_eq!(cigar_scalar_curvature(100.0).unwrap(), 4.0 / 10001.0);
        assert_eq!(cigar_gauss_curvature(0.0).unwrap(), 2.0);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let r = k as f64 * 0.5;
            let c = cigar_scalar_curvature(r).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn potential_examples() {
        assert_eq!(cigar_potential(0.0).unwrap(), 0.0);
        assert!((cigar_potential(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        for r in [0.1, 1.0, 7.5, 1e3, 1e200] {
            let sum = cigar_potential(r).unwrap() + cigar_density(r).unwrap().ln();
            if r < 1e150 {
                assert!(sum.abs() < 1e-12, "r={r}: {sum}");
            }
        }
        assert!(cigar_potential(1e200).unwrap().is_finite());
    }

    #[test]
    fn arc_length_matches_quadrature() {
        // composite Simpson of ds = dr/√(1+r²) on [0, 1]
        let n = 2000;
        let h = 1.0 / n as f64;
        let g = |r: f64| 1.0 / (1.0 + r * r).sqrt();
        let mut acc = g(0.0) + g(1.0);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(k as f64 * h);
        }
        let quad = acc * h / 3.0;
        assert!((quad - 0.881373587019543).abs() < 1e-12);
        assert!((arc_length(1.0).unwrap() - quad).abs() < 1e-12);
        assert_eq!(arc_length(0.0).unwrap(), 0.0);
        assert!(arc_length(-0.5).is_err());
    }

    #[test]
    fn arc_length_round_trip_and_asymptote() {
        assert!(rel(radius_of(arc_length(2.0).unwrap()).unwrap(), 2.0) < 1e-12);
        for r in [1e-6, 1e-3, 0.5, 3.0, 1e4, 1e7, 1e9, 1e12] {
            assert!(
                rel(radius_of(arc_length(r).unwrap()).unwrap(), r) < 1e-12,
                "r={r}"
            );
        }
        // continuity across the asymptotic branch
        let below = arc_length(ASINH_ASYMPTOTE * (1.0 - 1e-12)).unwrap();
        let above = arc_length(ASINH_ASYMPTOTE * (1.0 + 1e-12)).unwrap();
        assert!((above - below).abs() < 1e-10);
        assert!(radius_of(800.0).is_err());
        assert!(radius_of(-1.0).is_err());
    }

    #[test]
    fn ln_cosh_branches_agree() {
        for s in [0.5f64, 5.0, 19.999, 20.0, 20.001, 40.0] {
            assert!(rel(ln_cosh(s), s.cosh().ln()) < 1e-12, "s={s}");
        }
        // direct evaluation cancels for small s; compare with the series
        for s in [1e-8f64, 1e-4, 1e-3] {
            let series = 0.5 * s * s - s.powi(4) / 12.0;
            assert!(rel(ln_cosh(s), series) < 1e-12, "s={s}");
        }
    }

    #[test]
    fn soliton_examples() {
        assert_eq!(soliton_density([0.0, 0.0], 0.0).unwrap(), 1.0);
        assert!((soliton_density([0.0, 0.0], 0.25).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(soliton_density([0.0, 0.0], 1e3).is_err());
        assert_eq!(soliton_pullback(0.3, -0.7, 0.0).unwrap(), [0.3, -0.7]);
        let p = soliton_pullback(1.0, 0.0, 0.5).unwrap();
        assert!((p[0] - std::f64::consts::E).abs() < 1e-15 && p[1] == 0.0);
        assert!(soliton_pullback(1.0, 1.0, 1e3).is_err());
        for t in [0.0, 0.3, 2.0] {
            assert!(
                (SolitonFamily::new(t)
                    .unwrap()
                    .scalar_curvature(0.0)
                    .unwrap()
                    - 4.0)
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn pullback_identity_at_sample_point() {
        let t = 0.3;
        let fam = SolitonFamily::new(t).unwrap();
        let p = fam.pullback(1.0, 1.0).unwrap();
        let lhs = fam.density(p).unwrap() * (4.0 * t).exp();
        assert!(rel(lhs, cigar_density(2f64.sqrt()).unwrap()) < 1e-12);
    }

    #[test]
    fn soliton_log_factor_branches() {
        let fam = SolitonFamily::new(5.0).unwrap();
        for r in [0.0, 1.0, 1e3, 1e5, 1e10] {
            let direct = -((20f64).exp() + r * r).ln();
            assert!(rel(fam.log_factor(r).unwrap(), direct) < 1e-13, "r={r}");
        }
        let fam0 = SolitonFamily::new(0.0).unwrap();
        for r in [0.0, 0.5, 1.0, 2.0, 1e4] {
            assert!((fam0.log_factor(r).unwrap() + cigar_potential(r).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn circumference_tends_to_two_pi() {
        // L(r) = 2π r √w₀(r)
        let l = |r: f64| 2.0 * PI * r * cigar_density(r).unwrap().sqrt();
        assert!(rel(l(100.0), 2.0 * PI) < 1e-4);
        assert!(l(10.0) < l(100.0));
    }

    proptest::proptest! {
        #[test]
        fn arc_length_round_trips(r in 0.0f64..1e6) {
            let back = radius_of(arc_length(r).unwrap()).unwrap();
            proptest::prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0));
        }

        #[test]
        fn potential_is_minus_log_density(r in 0.0f64..1e6) {
            let sum = cigar_potential(r).unwrap() + cigar_density(r).unwrap().ln();
            proptest::prop_assert!(sum.abs() <= 1e-12 * cigar_potential(r).unwrap().max(1.0));
        }

        #[test]
        fn soliton_is_a_pullback(a in -50.0f64..50.0, b in -50.0f64..50.0, t in 0.0f64..2.0) {
            let x = soliton_pullback(a, b, t).unwrap();
            let lhs = (4.0 * t).exp() * soliton_density(x, t).unwrap();
            proptest::prop_assert!(rel(lhs, cigar_density(a.hypot(b)).unwrap()) < 1e-12);
        }
    }
}
