use alloc::vec;
use alloc::vec::Vec;

use crate::hierarchy::{HierarchyLayout, MemoryBudget};
use crate::model::{build_hamiltonian, BathSpec, SystemSpec};
use crate::{CMatrix, Error, Result, UnitSystem, C64};

/// The full set of ADOs σ^(n) in one flat pool, in layout order.
/// Position 0 is the reduced density matrix ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    dim: usize,
    ados: Vec<C64>,
    pub time: f64,
}

impl HierarchyState {
    pub fn zeros(layout: &HierarchyLayout) -> Self {
        let dim = layout.n_sites();
        Self {
            dim,
            ados: vec![C64::new(0.0, 0.0); layout.len() * dim * dim],
            time: 0.0,
        }
    }

    /// All ADOs zero except σ^(0) = ρ₀.
    pub fn from_density(layout: &HierarchyLayout, rho0: &CMatrix) -> Result<Self> {
        if rho0.dim() != layout.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: layout.n_sites(),
                found: rho0.dim(),
            });
        }
        let mut state = Self::zeros(layout);
        state.ado_mut(0).copy_from_slice(rho0.as_slice());
        Ok(state)
    }

    pub fn from_raw(dim: usize, ados: Vec<C64>, time: f64) -> Result<Self> {
        if dim == 0 || ados.len() % (dim * dim) != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: ados.len(),
            });
        }
        Ok(Self { dim, ados, time })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_ados(&self) -> usize {
        self.ados.len() / (self.dim * self.dim)
    }

    pub fn ado(&self, i: usize) -> &[C64] {
        let nn = self.dim * self.dim;
        &self.ados[i * nn..(i + 1) * nn]
    }

    pub fn ado_mut(&mut self, i: usize) -> &mut [C64] {
        let nn = self.dim * self.dim;
        &mut self.ados[i * nn..(i + 1) * nn]
    }

    pub fn ado_matrix(&self, i: usize) -> CMatrix {
        CMatrix::from_row_major(self.dim, self.ado(i).to_vec()).expect("square block")
    }

    /// The reduced density matrix σ^(0).
    pub fn rho(&self) -> CMatrix {
        self.ado_matrix(0)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.ados
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.ados
    }
}

/// Right-hand side of the hierarchy in internal units, with all per-index
/// coefficients precomputed.
#[derive(Debug, Clone)]
pub struct HeomSolver {
    layout: HierarchyLayout,
    hamiltonian: CMatrix,
    gammas: Vec<f64>,
    /// 2 λ_j k_B T, the commutator weight of Θ_j.
    thermal: Vec<f64>,
    /// λ_j γ_j, the anticommutator weight of Θ_j.
    dissipative: Vec<f64>,
    /// Σ_j n_j γ_j per hierarchy index.
    damping: Vec<f64>,
}

impl HeomSolver {
    pub fn new(
        system: &SystemSpec,
        bath: &BathSpec,
        depth: usize,
        budget: MemoryBudget,
        units: &UnitSystem,
    ) -> Result<Self> {
        let layout = HierarchyLayout::with_budget(system.n_sites(), depth, budget)?;
        Self::with_layout(system, bath, layout, units)
    }

    pub fn with_layout(
        system: &SystemSpec,
        bath: &BathSpec,
        layout: HierarchyLayout,
        units: &UnitSystem,
    ) -> Result<Self> {
        let n = system.n_sites();
        bath.check_sites(n)?;
        if layout.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: layout.n_sites(),
            });
        }
        let kt = units.thermal_angular(bath.temperature());
        let gammas: Vec<f64> = bath.gammas().iter().map(|&g| units.to_angular(g)).collect();
        let lambdas: Vec<f64> = bath.lambdas().iter().map(|&l| units.to_angular(l)).collect();
        let thermal = lambdas.iter().map(|l| 2.0 * l * kt).collect();
        let dissipative = lambdas.iter().zip(&gammas).map(|(l, g)| l * g).collect();
        let damping = layout
            .iter()
            .map(|idx| {
                idx.occupations()
                    .iter()
                    .zip(&gammas)
                    .map(|(&k, g)| k as f64 * g)
                    .sum()
            })
            .collect();
        Ok(Self {
            layout,
            hamiltonian: build_hamiltonian(system, units),
            gammas,
            thermal,
            dissipative,
            damping,
        })
    }

    pub fn layout(&self) -> &HierarchyLayout {
        &self.layout
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn n_sites(&self) -> usize {
        self.layout.n_sites()
    }

    /// Length of the flat ADO pool.
    pub fn state_len(&self) -> usize {
        let n = self.n_sites();
        self.layout.len() * n * n
    }

    /// ω_e / min_j γ_j, with ω_e the spread of the eigenvalues of H_S. The
    /// truncation is trusted when the depth is well above this ratio.
    pub fn terminator_ratio(&self) -> f64 {
        let eig = self.hamiltonian.hermitian_eigenvalues();
        let spread = eig.last().copied().unwrap_or(0.0) - eig.first().copied().unwrap_or(0.0);
        let gmin = self.gammas.iter().copied().fold(f64::INFINITY, f64::min);
        spread / gmin
    }

    /// dσ/dt for a whole hierarchy state.
    pub fn derivative(&self, state: &HierarchyState) -> Result<HierarchyState> {
        if state.dim() != self.n_sites() || state.as_slice().len() != self.state_len() {
            return Err(Error::DimensionMismatch {
                expected: self.state_len(),
                found: state.as_slice().len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.state_len()];
        self.derivative_into(state.as_slice(), &mut out);
        HierarchyState::from_raw(state.dim(), out, state.time)
    }

    pub fn derivative_into(&self, ados: &[C64], out: &mut [C64]) {
        self.derivative_block(ados, 0, out);
    }

    /// Writes the derivatives of ADOs `first..first + out.len() / n²` into
    /// `out`, reading neighbours from the full pool `ados`. Blocks are
    /// independent, so disjoint ranges may be evaluated concurrently.
    pub fn derivative_block(&self, ados: &[C64], first: usize, out: &mut [C64]) {
        let n = self.n_sites();
        let nn = n * n;
        debug_assert_eq!(ados.len(), self.state_len());
        let h = self.hamiltonian.as_slice();
        let i_unit = C64::new(0.0, 1.0);

        for (local, dst) in out.chunks_exact_mut(nn).enumerate() {
            let idx = first + local;
            let s = &ados[idx * nn..(idx + 1) * nn];
            let damp = self.damping[idx];

            // −i[H, σ] − Σ n_j γ_j σ
            for a in 0..n {
                for b in 0..n {
                    let mut comm = C64::new(0.0, 0.0);
                    for k in 0..n {
                        comm += h[a * n + k] * s[k * n + b] - s[a * n + k] * h[k * n + b];
                    }
                    dst[a * n + b] = C64::new(comm.im, -comm.re) - s[a * n + b] * damp;
                }
            }

            let occupations = self.layout.index(idx).occupations();
            for j in 0..n {
                // Φ_j σ^(n+e_j) = i[V_j, σ⁺]
                if let Some(up) = self.layout.raised(idx, j) {
                    let up = &ados[up * nn..(up + 1) * nn];
                    for b in 0..n {
                        dst[j * n + b] += i_unit * up[j * n + b];
                    }
                    for a in 0..n {
                        dst[a * n + j] -= i_unit * up[a * n + j];
                    }
                }
                // n_j Θ_j σ^(n−e_j) = n_j (i c [V_j, σ⁻] + λγ {V_j, σ⁻})
                let nj = occupations[j];
                if nj > 0 {
                    let lo = self.layout.lowered(idx, j).expect("n_j > 0 has a lower neighbour");
                    let lo = &ados[lo * nn..(lo + 1) * nn];
                    let c = nj as f64 * self.thermal[j];
                    let g = nj as f64 * self.dissipative[j];
                    let row = C64::new(g, c);
                    let col = C64::new(g, -c);
                    for b in 0..n {
                        dst[j * n + b] += row * lo[j * n + b];
                    }
                    for a in 0..n {
                        dst[a * n + j] += col * lo[a * n + j];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer(lambda: f64) -> HeomSolver {
        let sys = SystemSpec::linear_chain(vec![100.0, 0.0], &[100.0]).unwrap();
        let bath = BathSpec::uniform(2, lambda, 53.0, 300.0).unwrap();
        HeomSolver::new(&sys, &bath, 3, MemoryBudget::DEFAULT, &UnitSystem::STANDARD).unwrap()
    }

    #[test]
    fn closed_system_derivative_is_liouville_flow() {
        let solver = dimer(0.0);
        let rho = CMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]).unwrap();
        let state = HierarchyState::from_density(solver.layout(), &rho).unwrap();
        let d = solver.derivative(&state).unwrap();
        let expected = solver
            .hamiltonian()
            .commutator(&rho)
            .unwrap()
            .scale(C64::new(0.0, -1.0));
        assert!(d.rho().max_abs_diff(&expected).unwrap() < 1e-13);
        for i in 1..d.n_ados() {
            assert!(d.ado(i).iter().all(|x| x.norm() == 0.0));
        }
    }

    #[test]
    fn first_tier_receives_theta_terms_only() {
        let solver = dimer(35.0);
        let rho = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let state = HierarchyState::from_density(solver.layout(), &rho).unwrap();
        let d = solver.derivative(&state).unwrap();
        let bath = BathSpec::uniform(2, 35.0, 53.0, 300.0).unwrap();
        for j in 0..2 {
            let pos = solver.layout().position(if j == 0 { &[1, 0] } else { &[0, 1] }).unwrap();
            let expected = super::super::theta_apply(j, &rho, &bath, &UnitSystem::STANDARD).unwrap();
            assert!(d.ado_matrix(pos).max_abs_diff(&expected).unwrap() < 1e-10);
        }
        let deep = solver.layout().position(&[1, 1]).unwrap();
        assert!(d.ado(deep).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let solver = dimer(35.0);
        let wrong = HierarchyState::from_raw(2, vec![C64::new(0.0, 0.0); 8], 0.0).unwrap();
        assert!(solver.derivative(&wrong).is_err());
    }

    #[test]
    fn terminator_ratio_uses_eigenvalue_spread() {
        let solver = dimer(35.0);
        // eigenvalue spread sqrt(100² + 4·100²) cm⁻¹ over γ = 53 cm⁻¹
        let expected = libm::sqrt(50_000.0) / 53.0;
        assert!((solver.terminator_ratio() - expected).abs() < 1e-9);
    }
}
