//! Propagation with the hierarchy derivative split across threads.

use anyhow::Result;
use heomcast_core::heom::{propagate_with, HeomSolver, PropagationConfig, Trajectory};
use heomcast_core::CMatrix;
use rayon::prelude::*;

/// Each ADO's derivative depends only on the previous state, so any
/// partition gives bitwise the same trajectory as the serial kernel.
pub fn propagate_blocks(
    solver: &HeomSolver,
    rho0: &CMatrix,
    config: &PropagationConfig,
    workers: usize,
) -> Result<Trajectory> {
    if workers <= 1 {
        return Ok(propagate_with(solver, rho0, config, |y, out| solver.derivative_into(y, out))?);
    }
    let nn = solver.n_sites() * solver.n_sites();
    let block = solver.layout().len().div_ceil(4 * workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let traj = pool.install(|| {
        propagate_with(solver, rho0, config, |y, out| {
            out.par_chunks_mut(block * nn)
                .enumerate()
                .for_each(|(b, chunk)| solver.derivative_block(y, b * block, chunk));
        })
    })?;
    Ok(traj)
}
