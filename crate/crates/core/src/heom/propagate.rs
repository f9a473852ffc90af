use alloc::format;
use alloc::vec::Vec;

use super::{check_density_properties, HeomSolver, HierarchyState, Rk4};
use crate::hierarchy::MemoryBudget;
use crate::matrix::hermiticity_deviation;
use crate::model::{BathSpec, SystemSpec};
use crate::{CMatrix, Error, Result, UnitSystem, C64};

pub const DEFAULT_DT_PS: f64 = 0.0002;
pub const DEFAULT_TOTAL_PS: f64 = 1.0;

/// A physical density matrix has |ρ_ab| ≤ 1; anything beyond this bound is
/// treated as a numerical blow-up.
pub const RHO_DIVERGENCE_BOUND: f64 = 10.0;

const POPULATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub t_total: f64,
    pub dt: f64,
    /// Hierarchy truncation depth K.
    pub depth: usize,
    /// Keep every full density matrix, not just the populations.
    pub store_full: bool,
    pub budget: MemoryBudget,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            t_total: DEFAULT_TOTAL_PS,
            dt: DEFAULT_DT_PS,
            depth: 20,
            store_full: false,
            budget: MemoryBudget::DEFAULT,
        }
    }
}

impl PropagationConfig {
    /// Number of RK4 steps; the trajectory has one more sample.
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_total / self.dt) as usize
    }
}

/// Site populations on a uniform time grid, plus running diagnostics of
/// the reduced density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n_sites: usize,
    dt: f64,
    times: Vec<f64>,
    populations: Vec<f64>,
    density_matrices: Option<Vec<CMatrix>>,
    /// max_t |tr ρ(t) − 1|
    pub max_trace_deviation: f64,
    /// max_t max |ρ(t) − ρ(t)†|
    pub max_hermiticity_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryAudit {
    pub max_sum_deviation: f64,
    pub min_population: f64,
    pub max_population: f64,
    pub passed: bool,
}

impl Trajectory {
    /// Builds a trajectory from stored rows (`times.len() × n_sites`).
    pub fn from_rows(n_sites: usize, times: Vec<f64>, populations: Vec<f64>) -> Result<Self> {
        if n_sites == 0 || populations.len() != times.len() * n_sites {
            return Err(Error::DimensionMismatch {
                expected: times.len() * n_sites,
                found: populations.len(),
            });
        }
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        let mut traj = Self {
            n_sites,
            dt,
            times,
            populations,
            density_matrices: None,
            max_trace_deviation: 0.0,
            max_hermiticity_deviation: 0.0,
        };
        traj.max_trace_deviation = traj.audit().max_sum_deviation;
        Ok(traj)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Populations of all sites at sample `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.populations[t * self.n_sites..(t + 1) * self.n_sites]
    }

    pub fn population(&self, t: usize, site: usize) -> f64 {
        self.populations[t * self.n_sites + site]
    }

    pub fn site_series(&self, site: usize) -> Vec<f64> {
        self.populations
            .iter()
            .skip(site)
            .step_by(self.n_sites)
            .copied()
            .collect()
    }

    pub fn density_matrices(&self) -> Option<&[CMatrix]> {
        self.density_matrices.as_deref()
    }

    /// Checks every row sums to one and every population lies in [0, 1],
    /// both within 1e-6.
    pub fn audit(&self) -> TrajectoryAudit {
        let mut max_sum_deviation: f64 = 0.0;
        let mut min_population = f64::INFINITY;
        let mut max_population = f64::NEG_INFINITY;
        for t in 0..self.len() {
            let row = self.row(t);
            max_sum_deviation = max_sum_deviation.max(libm::fabs(row.iter().sum::<f64>() - 1.0));
            for &p in row {
                min_population = min_population.min(p);
                max_population = max_population.max(p);
            }
        }
        let passed = max_sum_deviation <= POPULATION_TOLERANCE
            && min_population >= -POPULATION_TOLERANCE
            && max_population <= 1.0 + POPULATION_TOLERANCE;
        TrajectoryAudit {
            max_sum_deviation,
            min_population,
            max_population,
            passed,
        }
    }
}

/// ρ₀ = |site⟩⟨site|.
pub fn excited_site(n_sites: usize, site: usize) -> Result<CMatrix> {
    if site >= n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    Ok(CMatrix::projector(n_sites, site))
}

/// Propagates ρ₀ through the truncated hierarchy with fixed-step RK4 and
/// records the populations at every step.
pub fn propagate(
    system: &SystemSpec,
    bath: &BathSpec,
    rho0: &CMatrix,
    config: &PropagationConfig,
) -> Result<Trajectory> {
    let units = UnitSystem::STANDARD;
    let solver = HeomSolver::new(system, bath, config.depth, config.budget, &units)?;
    propagate_with(&solver, rho0, config, |y, out| solver.derivative_into(y, out))
}

/// As [`propagate`], with a caller-supplied evaluation of the derivative
/// (for example one that splits the hierarchy across threads).
pub fn propagate_with<F>(
    solver: &HeomSolver,
    rho0: &CMatrix,
    config: &PropagationConfig,
    mut derivative: F,
) -> Result<Trajectory>
where
    F: FnMut(&[C64], &mut [C64]),
{
    validate_initial_state(rho0, solver.n_sites())?;
    if !(config.t_total > 0.0) || !(config.dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t_total > 0 and dt > 0, got {} and {}",
            config.t_total, config.dt
        )));
    }
    let n = solver.n_sites();
    let n_steps = config.n_steps();
    let mut state = HierarchyState::from_density(solver.layout(), rho0)?;
    let mut rk = Rk4::new(solver.state_len());

    let mut traj = Trajectory {
        n_sites: n,
        dt: config.dt,
        times: Vec::with_capacity(n_steps + 1),
        populations: Vec::with_capacity((n_steps + 1) * n),
        density_matrices: config.store_full.then(|| Vec::with_capacity(n_steps + 1)),
        max_trace_deviation: 0.0,
        max_hermiticity_deviation: 0.0,
    };
    record(&mut traj, &state, 0.0);

    for step in 1..=n_steps {
        let mut t = state.time;
        rk.step(state.as_mut_slice(), &mut t, config.dt, &mut derivative)?;
        // Pin the grid to k·dt so no rounding drift accumulates.
        let time = step as f64 * config.dt;
        state.time = time;
        let rho = state.ado(0);
        let max_rho = rho.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if max_rho > RHO_DIVERGENCE_BOUND {
            return Err(Error::Divergence {
                time,
                max_magnitude: max_rho,
            });
        }
        record(&mut traj, &state, time);
    }
    Ok(traj)
}

fn record(traj: &mut Trajectory, state: &HierarchyState, time: f64) {
    let n = traj.n_sites;
    let rho = state.ado(0);
    let mut trace = C64::new(0.0, 0.0);
    for j in 0..n {
        traj.populations.push(rho[j * n + j].re);
        trace += rho[j * n + j];
    }
    traj.times.push(time);
    traj.max_trace_deviation = traj.max_trace_deviation.max((trace - 1.0).norm());
    traj.max_hermiticity_deviation = traj
        .max_hermiticity_deviation
        .max(hermiticity_deviation(rho, n));
    if let Some(store) = traj.density_matrices.as_mut() {
        store.push(state.rho());
    }
}

fn validate_initial_state(rho0: &CMatrix, n_sites: usize) -> Result<()> {
    if rho0.dim() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            found: rho0.dim(),
        });
    }
    let report = check_density_properties(rho0);
    if report.hermiticity_deviation > 1e-10
        || report.trace_deviation > 1e-8
        || report.min_eigenvalue < -1e-8
    {
        return Err(Error::InvalidArgument(format!(
            "initial state is not a density matrix (trace dev {:e}, hermiticity dev {:e}, min eigenvalue {:e})",
            report.trace_deviation, report.hermiticity_deviation, report.min_eigenvalue
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uncoupled_site_stays_excited() {
        let sys = SystemSpec::linear_chain(vec![50.0, -20.0, 0.0], &[0.0, 0.0]).unwrap();
        let bath = BathSpec::uniform(3, 0.0, 53.0, 300.0).unwrap();
        let cfg = PropagationConfig {
            t_total: 0.1,
            depth: 2,
            ..Default::default()
        };
        let traj = propagate(&sys, &bath, &excited_site(3, 0).unwrap(), &cfg).unwrap();
        assert_eq!(traj.len(), 501);
        for t in 0..traj.len() {
            assert!((traj.population(t, 0) - 1.0).abs() < 1e-14);
            assert!(traj.population(t, 1).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_density_initial_state() {
        let sys = SystemSpec::linear_chain(vec![0.0, 0.0], &[10.0]).unwrap();
        let bath = BathSpec::uniform(2, 1.0, 53.0, 300.0).unwrap();
        let bad = CMatrix::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]).unwrap();
        assert!(propagate(&sys, &bath, &bad, &PropagationConfig::default()).is_err());
    }

    #[test]
    fn coarse_step_diverges() {
        let sys = SystemSpec::linear_chain(vec![100.0, 0.0], &[100.0]).unwrap();
        let bath = BathSpec::uniform(2, 50.0, 53.0, 300.0).unwrap();
        let cfg = PropagationConfig {
            dt: 0.05,
            ..Default::default()
        };
        let err = propagate(&sys, &bath, &excited_site(2, 0).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn full_matrices_stored_on_request() {
        let sys = SystemSpec::linear_chain(vec![0.0, 0.0], &[100.0]).unwrap();
        let bath = BathSpec::uniform(2, 35.0, 53.0, 300.0).unwrap();
        let cfg = PropagationConfig {
            t_total: 0.01,
            depth: 4,
            store_full: true,
            ..Default::default()
        };
        let traj = propagate(&sys, &bath, &excited_site(2, 0).unwrap(), &cfg).unwrap();
        let mats = traj.density_matrices().unwrap();
        assert_eq!(mats.len(), traj.len());
        assert_eq!(mats[7].diagonal_real(), traj.row(7).to_vec());
    }
}
