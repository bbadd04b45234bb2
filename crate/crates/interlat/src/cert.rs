//! Certified two-sided bounds and their witnesses.

use crate::C64;

/// Solver outcome quality. `Stagnated` marks values that are still valid
/// bounds but were produced by a search that hit its budget or relied on a
/// non-certified slack; records built from them never carry PASS/FAIL
/// authority on their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Stagnated,
}

impl Status {
    pub fn and(self, other: Status) -> Status {
        if self == Status::Converged && other == Status::Converged {
            Status::Converged
        } else {
            Status::Stagnated
        }
    }
}

/// An analytic candidate on the unit strip: a coordinatewise exponential
/// prefactor `e^{lambda_i (z - theta)}` times a polynomial in the disk
/// coordinate of the conformal map sending the evaluation parameter to the
/// disk center. `coeffs[0]` is the target vector, so `f(theta) = x` holds by
/// construction; the exponential prefactor is 1 there.
#[derive(Debug, Clone)]
pub struct AnalyticCandidate {
    pub theta: f64,
    /// Rates of the coordinatewise exponential prefactor. The modulus of the
    /// prefactor is constant along each strip edge, so it contributes no
    /// boundary-derivative error.
    pub lambdas: Vec<f64>,
    pub coeffs: Vec<Vec<C64>>,
    pub grid_per_edge: usize,
    /// Additive grid correction that was included in the reported bound.
    pub correction: f64,
}

impl AnalyticCandidate {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Constant candidate `f == x`.
    pub fn constant(theta: f64, x: &[C64], grid_per_edge: usize) -> Self {
        AnalyticCandidate {
            theta,
            lambdas: vec![0.0; x.len()],
            coeffs: vec![x.to_vec()],
            grid_per_edge,
            correction: 0.0,
        }
    }
}

/// A `(lower, upper)` pair with reproducible witnesses.
#[derive(Debug, Clone)]
pub struct CertifiedInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: Option<Vec<C64>>,
    pub upper_witness: Option<AnalyticCandidate>,
    pub status: Status,
}

impl CertifiedInterval {
    pub fn new(lower: f64, upper: f64, status: Status) -> Self {
        debug_assert!(
            lower <= upper * (1.0 + 1e-9) + 1e-300,
            "interval inverted: {lower} > {upper}"
        );
        // Round-off can cross the bounds by a hair; keep the lower valid.
        let lower = lower.min(upper);
        CertifiedInterval {
            lower,
            upper,
            lower_witness: None,
            upper_witness: None,
            status,
        }
    }

    pub fn exact(v: f64) -> Self {
        CertifiedInterval::new(v, v, Status::Converged)
    }

    pub fn with_lower_witness(mut self, w: Vec<C64>) -> Self {
        self.lower_witness = Some(w);
        self
    }

    pub fn with_upper_witness(mut self, w: AnalyticCandidate) -> Self {
        self.upper_witness = Some(w);
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn relative_width(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            self.width() / self.upper
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// True when the interval certifies `value > rhs` beyond `tol` (used to
    /// decide FAIL records; overlap never fails).
    pub fn certifies_above(&self, rhs: f64, tol: f64) -> bool {
        self.lower > rhs + tol
    }

    pub fn intersects(&self, lo: f64, hi: f64) -> bool {
        self.lower <= hi && lo <= self.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_basics() {
        let i = CertifiedInterval::new(1.0, 1.5, Status::Converged);
        assert!(i.contains(1.2));
        assert!(!i.contains(1.6));
        assert!(i.certifies_above(0.9, 0.05));
        assert!(!i.certifies_above(0.99, 0.05));
        assert!((i.relative_width() - (0.5 / 1.5)).abs() < 1e-15);
    }

    #[test]
    fn status_combines() {
        assert_eq!(Status::Converged.and(Status::Converged), Status::Converged);
        assert_eq!(Status::Converged.and(Status::Stagnated), Status::Stagnated);
    }
}
