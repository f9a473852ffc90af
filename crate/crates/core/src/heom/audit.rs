use crate::CMatrix;

pub const TRACE_TOLERANCE: f64 = 1e-6;
pub const HERMITICITY_TOLERANCE: f64 = 1e-8;
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

/// Unit-trace, Hermiticity and positivity diagnostics for one density
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// |tr ρ − 1|
    pub trace_deviation: f64,
    /// max |ρ − ρ†|
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace_ok: bool,
    pub hermitian_ok: bool,
    pub positive_ok: bool,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.trace_ok && self.hermitian_ok && self.positive_ok
    }
}

pub fn check_density_properties(rho: &CMatrix) -> DensityReport {
    let trace_deviation = (rho.trace() - 1.0).norm();
    let hermiticity_deviation = rho.hermiticity_deviation();
    let min_eigenvalue = rho
        .hermitian_eigenvalues()
        .first()
        .copied()
        .unwrap_or(f64::NAN);
    DensityReport {
        trace_deviation,
        hermiticity_deviation,
        min_eigenvalue,
        trace_ok: trace_deviation <= TRACE_TOLERANCE,
        hermitian_ok: hermiticity_deviation <= HERMITICITY_TOLERANCE,
        positive_ok: min_eigenvalue >= EIGENVALUE_FLOOR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_mixed_dimer_passes() {
        let r = check_density_properties(&CMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]).unwrap());
        assert_eq!(r.trace_deviation, 0.0);
        assert_eq!(r.hermiticity_deviation, 0.0);
        assert!((r.min_eigenvalue - 0.5).abs() < 1e-14);
        assert!(r.passed());
    }

    #[test]
    fn wrong_trace_fails() {
        let r = check_density_properties(&CMatrix::from_real_rows(&[&[0.6, 0.0], &[0.0, 0.5]]).unwrap());
        assert!((r.trace_deviation - 0.1).abs() < 1e-12);
        assert!(!r.trace_ok && !r.passed());
    }

    #[test]
    fn negative_eigenvalue_fails() {
        let r = check_density_properties(&CMatrix::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]).unwrap());
        assert!((r.min_eigenvalue + 0.2).abs() < 1e-12);
        assert!(!r.positive_ok && r.trace_ok);
    }
}
