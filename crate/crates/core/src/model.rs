//! Physical parameter records: the exciton system Hamiltonian and the
//! per-site Drude–Lorentz baths.
//!
//! Sites are 0-based here; file formats and reports number them from 1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{CMatrix, Error, Result, UnitSystem, C64};

/// Ratio ħγ/(k_B T) at or above which the single-exponential
/// high-temperature bath correlation is flagged.
pub const HIGH_TEMPERATURE_WARNING_RATIO: f64 = 0.5;

/// Site energies and inter-site couplings, both in cm⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    site_energies: Vec<f64>,
    /// Row-major `n × n`, symmetric with zero diagonal.
    couplings: Vec<f64>,
}

impl SystemSpec {
    pub fn new(site_energies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        let n = site_energies.len();
        if n == 0 {
            return Err(Error::InvalidSpec("a system needs at least one site".into()));
        }
        if couplings.len() != n * n {
            return Err(Error::InvalidSpec(format!(
                "coupling matrix has {} entries, expected {n}x{n}",
                couplings.len()
            )));
        }
        if site_energies.iter().chain(&couplings).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite energy or coupling".into()));
        }
        for j in 0..n {
            if couplings[j * n + j] != 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "coupling matrix diagonal must be zero (site {})",
                    j + 1
                )));
            }
            for k in (j + 1)..n {
                let (a, b) = (couplings[j * n + k], couplings[k * n + j]);
                if a != b {
                    return Err(Error::InvalidSpec(format!(
                        "coupling matrix not symmetric at ({}, {}): {a} vs {b}",
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
        Ok(Self {
            site_energies,
            couplings,
        })
    }

    /// Nearest-neighbour chain: `chain[j]` couples sites j and j+1.
    pub fn linear_chain(site_energies: Vec<f64>, chain: &[f64]) -> Result<Self> {
        let n = site_energies.len();
        if chain.len() + 1 != n {
            return Err(Error::InvalidSpec(format!(
                "a {n}-site chain needs {} couplings, got {}",
                n.saturating_sub(1),
                chain.len()
            )));
        }
        let mut couplings = vec![0.0; n * n];
        for (j, &v) in chain.iter().enumerate() {
            couplings[j * n + j + 1] = v;
            couplings[(j + 1) * n + j] = v;
        }
        Self::new(site_energies, couplings)
    }

    /// Splits a full symmetric Hamiltonian (cm⁻¹) into site energies and
    /// couplings.
    pub fn from_hamiltonian(dim: usize, h: &[f64]) -> Result<Self> {
        if h.len() != dim * dim {
            return Err(Error::InvalidSpec(format!(
                "Hamiltonian has {} entries, expected {dim}x{dim}",
                h.len()
            )));
        }
        let energies = (0..dim).map(|j| h[j * dim + j]).collect();
        let mut couplings = h.to_vec();
        for j in 0..dim {
            couplings[j * dim + j] = 0.0;
        }
        Self::new(energies, couplings)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.site_energies.len()
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    #[inline]
    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        self.couplings[j * self.n_sites() + k]
    }

    /// True when only nearest neighbours are coupled.
    pub fn is_linear_chain(&self) -> bool {
        let n = self.n_sites();
        (0..n).all(|j| (0..n).all(|k| j.abs_diff(k) == 1 || self.coupling(j, k) == 0.0))
    }

    /// The nearest-neighbour couplings J₁₂, J₂₃, ….
    pub fn chain_couplings(&self) -> Vec<f64> {
        (1..self.n_sites()).map(|j| self.coupling(j - 1, j)).collect()
    }
}

/// One Drude–Lorentz bath per site, all at a common temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    /// Reorganization energies λ_j, cm⁻¹.
    lambdas: Vec<f64>,
    /// Cut-off / relaxation rates γ_j, cm⁻¹.
    gammas: Vec<f64>,
    temperature: f64,
}

impl BathSpec {
    /// λ_j = 0 is accepted and describes an uncoupled site.
    pub fn new(lambdas: Vec<f64>, gammas: Vec<f64>, temperature: f64) -> Result<Self> {
        if lambdas.len() != gammas.len() {
            return Err(Error::InvalidSpec(format!(
                "{} reorganization energies but {} cut-off frequencies",
                lambdas.len(),
                gammas.len()
            )));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidSpec("reorganization energies must be >= 0".into()));
        }
        if gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidSpec("cut-off frequencies must be > 0".into()));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidSpec("temperature must be > 0".into()));
        }
        Ok(Self {
            lambdas,
            gammas,
            temperature,
        })
    }

    pub fn uniform(n_sites: usize, lambda: f64, gamma: f64, temperature: f64) -> Result<Self> {
        Self::new(vec![lambda; n_sites], vec![gamma; n_sites], temperature)
    }

    pub fn n_sites(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub(crate) fn check_sites(&self, n_sites: usize) -> Result<()> {
        if self.n_sites() != n_sites {
            return Err(Error::InvalidSpec(format!(
                "bath describes {} sites, system has {n_sites}",
                self.n_sites()
            )));
        }
        Ok(())
    }
}

/// H_S in rad·ps⁻¹: ε_j on the diagonal, J_jk off the diagonal.
pub fn build_hamiltonian(spec: &SystemSpec, units: &UnitSystem) -> CMatrix {
    let n = spec.n_sites();
    CMatrix::from_fn(n, |j, k| {
        let cm1 = if j == k {
            spec.site_energies[j]
        } else {
            spec.coupling(j, k)
        };
        C64::new(units.to_angular(cm1), 0.0)
    })
}

/// Drude–Lorentz spectral density 2λγω/(ω² + γ²).
///
/// `omega` is in rad·ps⁻¹; `lambda` and `gamma` are in cm⁻¹ and converted
/// with the standard unit system. The result is in rad·ps⁻¹.
pub fn spectral_density(omega: f64, lambda: f64, gamma: f64) -> f64 {
    let units = UnitSystem::STANDARD;
    let lambda = units.to_angular(lambda);
    let gamma = units.to_angular(gamma);
    2.0 * lambda * gamma * omega / (omega * omega + gamma * gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighTemperatureCheck {
    /// ħγ_j/(k_B T) per site.
    pub ratios: Vec<f64>,
    /// Set when any ratio reaches [`HIGH_TEMPERATURE_WARNING_RATIO`].
    pub warning: bool,
}

pub fn check_high_temperature(bath: &BathSpec, units: &UnitSystem) -> HighTemperatureCheck {
    let kt = units.thermal_wavenumber(bath.temperature);
    let ratios: Vec<f64> = bath.gammas.iter().map(|g| g / kt).collect();
    let warning = ratios.iter().any(|&r| r >= HIGH_TEMPERATURE_WARNING_RATIO);
    HighTemperatureCheck { ratios, warning }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimer_hamiltonian() {
        let spec = SystemSpec::linear_chain(vec![0.0, 0.0], &[0.0]).unwrap();
        let h = build_hamiltonian(&spec, &UnitSystem::STANDARD);
        assert_eq!(h, CMatrix::zeros(2));
    }

    #[test]
    fn dimer_hamiltonian_in_angular_units() {
        let spec = SystemSpec::linear_chain(vec![100.0, 0.0], &[100.0]).unwrap();
        let h = build_hamiltonian(&spec, &UnitSystem::STANDARD);
        // 100 cm⁻¹ × 2π × 0.0299792458 cm/ps
        let expected = 18.836_515_673_088_53;
        assert!((h[(0, 0)].re - expected).abs() < 1e-12);
        assert!((h[(0, 1)].re - expected).abs() < 1e-12);
        assert!((h[(1, 0)].re - expected).abs() < 1e-12);
        assert_eq!(h[(1, 1)].re, 0.0);
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn invalid_specs() {
        assert!(SystemSpec::new(vec![0.0, 0.0], vec![0.0; 3]).is_err());
        assert!(SystemSpec::new(vec![0.0, 0.0], vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(SystemSpec::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(SystemSpec::linear_chain(vec![0.0, 0.0, 0.0], &[1.0]).is_err());
        assert!(BathSpec::new(vec![1.0], vec![0.0], 300.0).is_err());
        assert!(BathSpec::new(vec![1.0], vec![53.0], 0.0).is_err());
        assert!(BathSpec::new(vec![-1.0], vec![53.0], 300.0).is_err());
        assert!(BathSpec::new(vec![1.0, 2.0], vec![53.0], 300.0).is_err());
    }

    #[test]
    fn chain_detection() {
        let chain = SystemSpec::linear_chain(vec![0.0; 4], &[1.0, -2.0, 3.0]).unwrap();
        assert!(chain.is_linear_chain());
        assert_eq!(chain.chain_couplings(), vec![1.0, -2.0, 3.0]);
        let mut full = vec![0.0; 9];
        full[2] = 5.0;
        full[6] = 5.0;
        assert!(!SystemSpec::new(vec![0.0; 3], full).unwrap().is_linear_chain());
    }

    #[test]
    fn spectral_density_values() {
        let u = UnitSystem::STANDARD;
        assert_eq!(spectral_density(0.0, 35.0, 53.0), 0.0);
        let at_peak = spectral_density(u.to_angular(53.0), 35.0, 53.0);
        assert!((at_peak - u.to_angular(35.0)).abs() < 1e-12);
        // 2·35·53·100 / (100² + 53²) = 371000 / 12809
        let v = u.to_wavenumber(spectral_density(u.to_angular(100.0), 35.0, 53.0));
        assert!((v - 28.964_009_680_693_26).abs() < 1e-9);
    }

    #[test]
    fn high_temperature_ratio() {
        let u = UnitSystem::STANDARD;
        let warm = check_high_temperature(&BathSpec::uniform(2, 35.0, 53.0, 300.0).unwrap(), &u);
        assert!((warm.ratios[0] - 0.254_183_915).abs() < 1e-8);
        assert!(!warm.warning);
        let cold = check_high_temperature(&BathSpec::uniform(2, 35.0, 53.0, 30.0).unwrap(), &u);
        assert!((cold.ratios[0] - 2.541_839_15).abs() < 1e-7);
        assert!(cold.warning);
        let tiny = check_high_temperature(&BathSpec::uniform(1, 35.0, 1e-9, 300.0).unwrap(), &u);
        assert!(tiny.ratios[0] < 1e-10 && !tiny.warning);
    }
}
