//! Profile functions `φ` of (α,β) metrics and the helicoid family.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::jet::{Jet, JetSpace};

/// Distance from a domain endpoint below which evaluations are flagged.
pub const BOUNDARY_PROXIMITY: f64 = 1e-6;

/// Named profile families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PhiFamily {
    /// `φ ≡ 1`, the Riemannian case.
    ConstantOne,
    /// `φ(s) = 1/s` on `s > 0`.
    Kropina,
    /// Dual helicoid profile on `0 < |s| < c`, `c = b/√(1+a²)`.
    Helicoid {
        a: f64,
        b: f64,
        /// Flips the sign of the arctan term; a negative control only.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        corrupted: bool,
    },
}

impl PhiFamily {
    pub fn helicoid(a: f64, b: f64) -> PhiFamily {
        PhiFamily::Helicoid { a, b, corrupted: false }
    }

    /// Helicoid profile with the arctan sign flipped. Not a valid model.
    pub fn corrupted_helicoid(a: f64, b: f64) -> PhiFamily {
        PhiFamily::Helicoid { a, b, corrupted: true }
    }

    pub fn validate_parameters(&self) -> Result<()> {
        if let PhiFamily::Helicoid { a, b, .. } = self {
            if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(GeometryError::Config(format!(
                    "helicoid profile needs a > 0 and b > 0, got a = {a}, b = {b}"
                )));
            }
        }
        Ok(())
    }

    /// Open intervals making up the natural domain.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        match self {
            PhiFamily::ConstantOne => vec![(f64::NEG_INFINITY, f64::INFINITY)],
            PhiFamily::Kropina => vec![(0.0, f64::INFINITY)],
            PhiFamily::Helicoid { a, b, .. } => {
                let c = b / (1.0 + a * a).sqrt();
                vec![(-c, 0.0), (0.0, c)]
            }
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        self.domain().iter().any(|&(lo, hi)| s > lo && s < hi)
    }

    /// True when `s` lies within [`BOUNDARY_PROXIMITY`] of a finite endpoint.
    pub fn near_boundary(&self, s: f64) -> bool {
        self.domain().iter().any(|&(lo, hi)| {
            (lo.is_finite() && (s - lo).abs() < BOUNDARY_PROXIMITY)
                || (hi.is_finite() && (s - hi).abs() < BOUNDARY_PROXIMITY)
        })
    }

    /// `(φ(s), φ'(s))` on jets.
    pub fn eval_with_derivative(&self, s: &Jet) -> (Jet, Jet) {
        match self {
            PhiFamily::ConstantOne => (Jet::constant(1.0), Jet::constant(0.0)),
            PhiFamily::Kropina => {
                let r = s.recip();
                let d = -r.square();
                (r, d)
            }
            PhiFamily::Helicoid { a, b, corrupted } => {
                let (a, b) = (*a, *b);
                let sign = if *corrupted { -1.0 } else { 1.0 };
                let q = (b * b - (1.0 + a * a) * s.square()).sqrt();
                // atan(q / (a s)) is odd in s and tends to ±π/2 at s → 0±.
                let at = (&q / (a * s)).atan();
                let phi = &q / b - sign * (a / b) * s * &at;
                let dphi = -(s * &q) / (b * (b * b - s.square())) - sign * (a / b) * at;
                (phi, dphi)
            }
        }
    }

    /// `(φ(s), φ'(s))` in plain arithmetic, for root scans.
    pub fn value_and_slope(&self, s: f64) -> (f64, f64) {
        match self {
            PhiFamily::ConstantOne => (1.0, 0.0),
            PhiFamily::Kropina => (1.0 / s, -1.0 / (s * s)),
            PhiFamily::Helicoid { a, b, corrupted } => {
                let (a, b) = (*a, *b);
                let sign = if *corrupted { -1.0 } else { 1.0 };
                let q = (b * b - (1.0 + a * a) * s * s).sqrt();
                let at = (q / (a * s)).atan();
                let phi = q / b - sign * (a / b) * s * at;
                let dphi = -(s * q) / (b * (b * b - s * s)) - sign * (a / b) * at;
                (phi, dphi)
            }
        }
    }

    pub fn eval(&self, s: &Jet) -> Jet {
        self.eval_with_derivative(s).0
    }

    /// `(φ, φ', φ'')` at a plain argument.
    pub fn derivatives(&self, s: f64) -> [f64; 3] {
        let t = &JetSpace::get(1, 1).variables(&[s])[0];
        let (p, dp) = self.eval_with_derivative(t);
        [p.value(), dp.value(), dp.partial(&[0])]
    }
}

/// Coefficients of the dual fundamental tensor of `F* = α* φ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualTensorCoefficients {
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
}

impl DualTensorCoefficients {
    pub fn at(phi: &PhiFamily, s: f64) -> DualTensorCoefficients {
        let [p, dp, ddp] = phi.derivatives(s);
        DualTensorCoefficients {
            rho: p * (p - s * dp),
            rho0: p * ddp + dp * dp,
            rho1: (p - s * dp) * dp - s * p * ddp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiValidation {
    pub samples: usize,
    /// Minimum of `φ`.
    pub min_phi: f64,
    /// Minimum of `φ − sφ'`.
    pub min_first: f64,
    /// Minimum of `φ − sφ' + (b² − s²)φ''` over `b ∈ [|s|, b₀]`.
    pub min_second: f64,
    /// Grid point where the smallest expression occurred.
    pub worst_s: f64,
    pub boundary_warnings: usize,
    pub passed: bool,
}

/// Evaluates the strong-convexity conditions of an (α,β) profile on `points`
/// interior grid points of `domain ∩ [−b₀, b₀]`.
pub fn validate_phi(phi: &PhiFamily, b0: f64, points: usize) -> Result<PhiValidation> {
    phi.validate_parameters()?;
    let intervals: Vec<(f64, f64)> = phi
        .domain()
        .into_iter()
        .map(|(lo, hi)| (lo.max(-b0), hi.min(b0)))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    if intervals.is_empty() || points == 0 {
        return Err(GeometryError::EmptyDomain(format!(
            "no admissible s in [-{b0}, {b0}] for {phi:?}"
        )));
    }
    let total: f64 = intervals.iter().map(|(lo, hi)| hi - lo).sum();
    let mut report = PhiValidation {
        samples: 0,
        min_phi: f64::INFINITY,
        min_first: f64::INFINITY,
        min_second: f64::INFINITY,
        worst_s: f64::NAN,
        boundary_warnings: 0,
        passed: false,
    };
    let mut worst = f64::INFINITY;
    for (k, &(lo, hi)) in intervals.iter().enumerate() {
        let n = if k + 1 == intervals.len() {
            points - report.samples.min(points)
        } else {
            ((points as f64) * (hi - lo) / total).round() as usize
        };
        for i in 1..=n {
            let s = lo + (hi - lo) * i as f64 / (n + 1) as f64;
            if phi.near_boundary(s) {
                report.boundary_warnings += 1;
            }
            let [p, dp, ddp] = phi.derivatives(s);
            let first = p - s * dp;
            let second = [s.abs(), b0]
                .iter()
                .map(|b| first + (b * b - s * s) * ddp)
                .fold(f64::INFINITY, f64::min);
            report.min_phi = report.min_phi.min(p);
            report.min_first = report.min_first.min(first);
            report.min_second = report.min_second.min(second);
            let m = p.min(first).min(second);
            if m < worst {
                worst = m;
                report.worst_s = s;
            }
            report.samples += 1;
        }
    }
    report.passed = report.min_phi > 0.0 && report.min_first > 0.0 && report.min_second > 0.0;
    Ok(report)
}

/// The helicoid space: Minkowski metric whose dual is `α* φ(β*/α*)` with
/// Euclidean `α*`, `β* = (0, 0, b)` and the helicoid profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelicoidModel {
    pub a: f64,
    pub b: f64,
}

impl HelicoidModel {
    pub fn new(a: f64, b: f64) -> Result<HelicoidModel> {
        PhiFamily::helicoid(a, b).validate_parameters()?;
        Ok(HelicoidModel { a, b })
    }

    pub fn c(&self) -> f64 {
        self.b / (1.0 + self.a * self.a).sqrt()
    }

    pub fn phi(&self) -> PhiFamily {
        PhiFamily::helicoid(self.a, self.b)
    }

    pub fn beta_star(&self) -> [f64; 3] {
        [0.0, 0.0, self.b]
    }

    /// Closed form `ϕ̄ = b √(b² − (1+a²)s²) / (b² − s²)`.
    pub fn phi_bar(&self, s: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        b * (b * b - (1.0 + a * a) * s * s).sqrt() / (b * b - s * s)
    }

    /// `(ϕ̄, ϕ̄')` with `ϕ̄ = φ − sφ'` differentiated through the profile itself.
    pub fn phi_bar_from_profile(&self, s: f64) -> (f64, f64) {
        let t = &JetSpace::get(1, 2).variables(&[s])[0];
        let (p, dp) = self.phi().eval_with_derivative(t);
        let bar = p - t * dp;
        (bar.value(), bar.partial(&[0]))
    }

    /// Residual of `f' − 2s f/(b² − s²) + 2a²b⁴s/(b² − s²)³` for `f = ϕ̄²`.
    pub fn ode_residual(&self, s: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let (bar, dbar) = self.phi_bar_from_profile(s);
        let f = bar * bar;
        let df = 2.0 * bar * dbar;
        let w = b * b - s * s;
        df - 2.0 * s * f / w + 2.0 * a * a * b.powi(4) * s / w.powi(3)
    }

    /// `(ϕ̄(ϕ̄ − (b² − s²)ϕ̄'/s), a²b⁴/(b² − s²)²)`.
    pub fn positivity_identity(&self, s: f64) -> (f64, f64) {
        let (a, b) = (self.a, self.b);
        let (bar, dbar) = self.phi_bar_from_profile(s);
        let w = b * b - s * s;
        (bar * (bar - w * dbar / s), a * a * b.powi(4) / (w * w))
    }

    /// `s = β(n̄)` along the helicoid at parameter `u`.
    pub fn s_at(&self, u: f64) -> f64 {
        self.b * u / (u * u + self.a * self.a).sqrt()
    }
}

/// The dual helicoid metric with `b = 1` in its displayed closed form.
pub fn helicoid_dual_metric(a: f64, xi: &[f64]) -> Result<f64> {
    crate::error::check_dim(3, xi.len())?;
    let h = xi[0] * xi[0] + xi[1] * xi[1];
    let v = a * a * xi[2] * xi[2];
    if !(h > v && xi[2] != 0.0) {
        return Err(GeometryError::ConeViolation(format!(
            "covector {xi:?} outside the dual helicoid cone for a = {a}"
        )));
    }
    let r = (h - v).sqrt();
    Ok(r - a * xi[2] * (r / (a * xi[2])).atan())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_closed_form_matches_alpha_phi_on_both_branches() {
        let phi = PhiFamily::helicoid(1.0, 1.0);
        for xi in [[1.0, 0.0, 0.5], [1.0, 0.0, -0.5], [0.3, -0.8, 0.2], [0.2, 0.9, -0.4]] {
            let alpha = crate::linalg::norm(&xi);
            let s = xi[2] / alpha;
            let via_phi = alpha * phi.derivatives(s)[0];
            let closed = helicoid_dual_metric(1.0, &xi).unwrap();
            assert!((via_phi - closed).abs() <= 1e-12 * closed, "{xi:?}");
        }
        let v = helicoid_dual_metric(1.0, &[1.0, 0.0, 0.5]).unwrap();
        let want = 0.75f64.sqrt() - 0.5 * (0.75f64.sqrt() / 0.5).atan();
        assert!((v - want).abs() < 1e-15);
        // sqrt(3)/2 - pi/6
        assert!((v - 0.342_426_628_186_139_8).abs() < 1e-15);
        assert_eq!(helicoid_dual_metric(1.0, &[1.0, 0.0, -0.5]).unwrap(), v);
        assert!(helicoid_dual_metric(1.0, &[1.0, 0.0, 1.5]).is_err());
    }

    #[test]
    fn phi_bar_matches_closed_form() {
        let m = HelicoidModel::new(0.5, 2.0).unwrap();
        for s in [-1.5, -0.3, 0.01, 0.9, 1.7] {
            let (bar, _) = m.phi_bar_from_profile(s);
            assert!((bar - m.phi_bar(s)).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn kropina_profile_conditions() {
        let r = validate_phi(&PhiFamily::Kropina, 1.0, 50).unwrap();
        assert!(r.passed);
        for s in [0.1, 0.5, 0.9] {
            let [p, dp, ddp] = PhiFamily::Kropina.derivatives(s);
            assert!((p - s * dp - 2.0 / s).abs() < 1e-12);
            assert!((p - s * dp + (1.0 - s * s) * ddp - 2.0 / s.powi(3)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_one_has_unit_expressions() {
        let r = validate_phi(&PhiFamily::ConstantOne, 0.7, 20).unwrap();
        assert!(r.passed && r.min_first == 1.0 && r.min_second == 1.0);
    }

    #[test]
    fn helicoid_profile_passes_and_corruption_fails() {
        let r = validate_phi(&PhiFamily::helicoid(1.0, 1.0), 1.0, 200).unwrap();
        assert!(r.passed && r.samples == 200, "{r:?}");
        let bad = validate_phi(&PhiFamily::corrupted_helicoid(1.0, 1.0), 1.0, 200).unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn empty_domain_is_reported() {
        assert!(matches!(
            validate_phi(&PhiFamily::Kropina, 0.0, 10),
            Err(GeometryError::EmptyDomain(_))
        ));
    }

    #[test]
    fn dual_tensor_coefficients_are_definitional() {
        let phi = PhiFamily::helicoid(1.0, 1.0);
        let s = 0.3;
        let [p, dp, ddp] = phi.derivatives(s);
        let c = DualTensorCoefficients::at(&phi, s);
        assert_eq!(c.rho, p * (p - s * dp));
        assert_eq!(c.rho0, p * ddp + dp * dp);
        assert_eq!(c.rho1, (p - s * dp) * dp - s * p * ddp);
    }

    #[test]
    fn plain_slope_matches_jets() {
        for phi in [PhiFamily::Kropina, PhiFamily::helicoid(1.0, 1.0), PhiFamily::corrupted_helicoid(0.5, 2.0)] {
            for s in [-0.6, -0.1, 0.02, 0.3, 0.69] {
                if !phi.contains(s) {
                    continue;
                }
                let [p, dp, _] = phi.derivatives(s);
                let (q, dq) = phi.value_and_slope(s);
                assert!((p - q).abs() <= 1e-14 * (1.0 + p.abs()) && (dp - dq).abs() <= 1e-14 * (1.0 + dp.abs()));
            }
        }
    }

}
