use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{HeomSolver, HierarchyState};
use crate::{Error, Result, C64};

/// Classical fourth-order Runge–Kutta on a flat complex vector, with the
/// scratch buffers kept between steps.
#[derive(Debug, Clone)]
pub struct Rk4 {
    stage: Vec<C64>,
    slope: Vec<C64>,
    acc: Vec<C64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self {
            stage: vec![zero; len],
            slope: vec![zero; len],
            acc: vec![zero; len],
        }
    }

    /// Advances `y` from `*t` to `*t + dt` under dy/dt = f(y).
    ///
    /// Fails with a divergence error if any entry is non-finite afterwards.
    pub fn step<F>(&mut self, y: &mut [C64], t: &mut f64, dt: f64, mut f: F) -> Result<()>
    where
        F: FnMut(&[C64], &mut [C64]),
    {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be > 0, got {dt}")));
        }
        if y.len() != self.stage.len() {
            return Err(Error::DimensionMismatch {
                expected: self.stage.len(),
                found: y.len(),
            });
        }
        let half = dt * 0.5;

        f(y, &mut self.slope);
        for ((acc, st), (&yi, &k)) in self.acc.iter_mut().zip(&mut self.stage).zip(y.iter().zip(&self.slope)) {
            *acc = k;
            *st = yi + k * half;
        }
        f(&self.stage, &mut self.slope);
        for ((acc, st), (&yi, &k)) in self.acc.iter_mut().zip(&mut self.stage).zip(y.iter().zip(&self.slope)) {
            *acc += k * 2.0;
            *st = yi + k * half;
        }
        f(&self.stage, &mut self.slope);
        for ((acc, st), (&yi, &k)) in self.acc.iter_mut().zip(&mut self.stage).zip(y.iter().zip(&self.slope)) {
            *acc += k * 2.0;
            *st = yi + k * dt;
        }
        f(&self.stage, &mut self.slope);
        let sixth = dt / 6.0;
        let mut finite = true;
        for ((yi, &acc), &k) in y.iter_mut().zip(&self.acc).zip(&self.slope) {
            *yi += (acc + k) * sixth;
            finite &= yi.re.is_finite() && yi.im.is_finite();
        }
        *t += dt;

        if !finite {
            let max_magnitude = y
                .iter()
                .map(|x| libm::hypot(x.re, x.im))
                .fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x) });
            return Err(Error::Divergence {
                time: *t,
                max_magnitude,
            });
        }
        Ok(())
    }
}

/// One RK4 step of a hierarchy state under the HEOM right-hand side.
pub fn rk4_step(state: &mut HierarchyState, dt: f64, solver: &HeomSolver, rk: &mut Rk4) -> Result<()> {
    let mut t = state.time;
    rk.step(state.as_mut_slice(), &mut t, dt, |y, out| solver.derivative_into(y, out))?;
    state.time = t;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_leaves_state_unchanged() {
        let mut y = vec![C64::new(0.25, -1.0), C64::new(3.0, 0.5)];
        let before = y.clone();
        let mut t = 1.0;
        Rk4::new(2)
            .step(&mut y, &mut t, 0.1, |_, out| out.fill(C64::new(0.0, 0.0)))
            .unwrap();
        assert_eq!(y, before);
        assert!((t - 1.1).abs() < 1e-15);
    }

    #[test]
    fn exponential_decay_one_step() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut t = 0.0;
        Rk4::new(1)
            .step(&mut y, &mut t, 0.1, |y, out| out[0] = -y[0])
            .unwrap();
        // e^{-0.1} = 0.904837418…; RK4 gives the degree-4 Taylor polynomial.
        assert!((y[0].re - 0.904_837_418).abs() < 1e-7);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut t = 0.0;
        let mut rk = Rk4::new(1);
        let mut result = Ok(());
        for _ in 0..200 {
            result = rk.step(&mut y, &mut t, 1.0, |y, out| out[0] = y[0] * 1e3);
            if result.is_err() {
                break;
            }
        }
        assert!(matches!(result, Err(Error::Divergence { .. })));
        assert!(Rk4::new(1).step(&mut y, &mut t, 0.0, |_, _| {}).is_err());
    }
}
