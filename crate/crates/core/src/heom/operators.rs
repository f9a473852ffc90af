use crate::model::BathSpec;
use crate::{CMatrix, Error, Result, UnitSystem, C64};

/// L_e σ = [H, σ].
pub fn liouvillian_apply(h: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    h.commutator(sigma)
}

/// Φ_j σ = i[V_j, σ] with V_j = |j⟩⟨j|.
pub fn phi_apply(j: usize, sigma: &CMatrix) -> Result<CMatrix> {
    let n = sigma.dim();
    if j >= n {
        return Err(Error::SiteOutOfRange { site: j, n_sites: n });
    }
    let i = C64::new(0.0, 1.0);
    Ok(CMatrix::projector(n, j).commutator(sigma)?.scale(i))
}

/// Θ_j σ = i(2λ_j k_B T [V_j, σ] − i λ_j γ_j {V_j, σ}) in rad·ps⁻¹ units
/// (ħ = 1).
pub fn theta_apply(j: usize, sigma: &CMatrix, bath: &BathSpec, units: &UnitSystem) -> Result<CMatrix> {
    let n = sigma.dim();
    if j >= n || j >= bath.n_sites() {
        return Err(Error::SiteOutOfRange {
            site: j,
            n_sites: n.min(bath.n_sites()),
        });
    }
    let lambda = units.to_angular(bath.lambdas()[j]);
    let gamma = units.to_angular(bath.gammas()[j]);
    let kt = units.thermal_angular(bath.temperature());
    let v = CMatrix::projector(n, j);
    let comm = v.commutator(sigma)?.scale(C64::new(2.0 * lambda * kt, 0.0));
    let anti = v.anticommutator(sigma)?.scale(C64::new(0.0, -lambda * gamma));
    Ok(comm.add(&anti)?.scale(C64::new(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commuting_liouvillian_vanishes() {
        let h = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 3.0]]).unwrap();
        let s = CMatrix::from_real_rows(&[&[0.2, 0.0], &[0.0, 0.8]]).unwrap();
        assert_eq!(liouvillian_apply(&h, &s).unwrap().max_abs(), 0.0);
        assert_eq!(phi_apply(1, &s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hand_computed_values() {
        let h = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let s = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let l = liouvillian_apply(&h, &s).unwrap();
        assert_eq!(l, CMatrix::from_real_rows(&[&[0.0, 2.0], &[-2.0, 0.0]]).unwrap());

        let phi = phi_apply(1, &s).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
            .unwrap()
            .scale(C64::new(0.0, 1.0));
        assert_eq!(phi, expected);
        assert!(phi.is_hermitian(0.0));
        assert!(matches!(phi_apply(2, &s), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn theta_limits() {
        let u = UnitSystem::STANDARD;
        let s = CMatrix::from_real_rows(&[&[0.3, 0.1], &[0.1, 0.7]]).unwrap();
        let no_coupling = BathSpec::uniform(2, 0.0, 53.0, 300.0).unwrap();
        assert_eq!(theta_apply(0, &s, &no_coupling, &u).unwrap().max_abs(), 0.0);

        let bath = BathSpec::uniform(2, 35.0, 53.0, 300.0).unwrap();
        let id = CMatrix::identity(2);
        let got = theta_apply(1, &id, &bath, &u).unwrap();
        let lg = u.to_angular(35.0) * u.to_angular(53.0);
        let expected = CMatrix::projector(2, 1).scale(C64::new(2.0 * lg, 0.0));
        assert!(got.max_abs_diff(&expected).unwrap() < 1e-12);
        assert!(theta_apply(2, &id, &bath, &u).is_err());
    }
}
