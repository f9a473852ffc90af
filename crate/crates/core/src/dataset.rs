//! Parameter sweeps over the exciton model, stride-1 sliding windows over
//! population series, and trajectory-level train/validation/test splits.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{BathSpec, SystemSpec};
use crate::{Error, Result};

/// Bounds of the sampled parameter box, cm⁻¹.
pub const EPSILON_RANGE: (f64, f64) = (-100.0, 100.0);
pub const COUPLING_RANGE: (f64, f64) = (-100.0, 100.0);
pub const LAMBDA_RANGE: (f64, f64) = (1.0, 100.0);
/// Fixed bath cut-off, cm⁻¹.
pub const DEFAULT_GAMMA: f64 = 53.0;
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Equally spaced values on every axis, Cartesian product.
    Grid,
    /// Independent uniform draws inside the box.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_sites: usize,
    pub epsilon_range: (f64, f64),
    pub coupling_range: (f64, f64),
    pub lambda_range: (f64, f64),
    pub gamma: f64,
    pub temperature: f64,
    pub n_samples: usize,
    pub mode: SamplingMode,
    pub seed: u64,
}

impl SweepSpec {
    /// The standard photosynthetic box with γ = 53 cm⁻¹ and T = 300 K.
    pub fn standard(n_sites: usize, n_samples: usize, mode: SamplingMode, seed: u64) -> Self {
        Self {
            n_sites,
            epsilon_range: EPSILON_RANGE,
            coupling_range: COUPLING_RANGE,
            lambda_range: LAMBDA_RANGE,
            gamma: DEFAULT_GAMMA,
            temperature: DEFAULT_TEMPERATURE,
            n_samples,
            mode,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if self.n_sites < 2 {
            return Err(Error::InvalidSpec("sweeps need at least two sites".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidSpec("n_samples must be >= 1".into()));
        }
        if !ordered(self.epsilon_range) || !ordered(self.coupling_range) || !ordered(self.lambda_range) {
            return Err(Error::InvalidSpec("parameter ranges must be finite with lo <= hi".into()));
        }
        if !(self.lambda_range.0 > 0.0) {
            return Err(Error::InvalidSpec("reorganization energy lower bound must be > 0".into()));
        }
        if !(self.gamma > 0.0) || !(self.temperature > 0.0) {
            return Err(Error::InvalidSpec("gamma and temperature must be > 0".into()));
        }
        Ok(())
    }
}

/// One point of a sweep: chain Hamiltonian plus a shared reorganization
/// energy, all in cm⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    pub id: u64,
    pub site_energies: Vec<f64>,
    /// Nearest-neighbour couplings J₁₂, J₂₃, ….
    pub couplings: Vec<f64>,
    pub lambda: f64,
}

impl ParameterPoint {
    pub fn system(&self) -> Result<SystemSpec> {
        SystemSpec::linear_chain(self.site_energies.clone(), &self.couplings)
    }

    pub fn bath(&self, gamma: f64, temperature: f64) -> Result<BathSpec> {
        BathSpec::uniform(self.site_energies.len(), self.lambda, gamma, temperature)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSample {
    pub points: Vec<ParameterPoint>,
    pub requested: usize,
    /// Values per axis in grid mode.
    pub per_axis: Option<usize>,
}

impl ParameterSample {
    pub fn actual(&self) -> usize {
        self.points.len()
    }
}

/// Largest k with k^axes ≤ n.
fn integer_root(n: usize, axes: u32) -> usize {
    let mut k = libm::floor(libm::pow(n as f64, 1.0 / axes as f64)) as usize;
    let fits = |k: usize| (k as u128).checked_pow(axes).is_some_and(|v| v <= n as u128);
    while k > 1 && !fits(k) {
        k -= 1;
    }
    while fits(k + 1) {
        k += 1;
    }
    k.max(1)
}

fn linspace((lo, hi): (f64, f64), k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (k - 1) as f64;
    (0..k)
        .map(|i| if i + 1 == k { hi } else { lo + step * i as f64 })
        .collect()
}

/// Draws the sweep points. Deterministic for a given spec.
///
/// Grid mode varies ε₁..ε_{N−1} (with ε_N = 0 as the energy reference), the
/// N−1 chain couplings and λ, i.e. 2N−1 axes with ⌊n^{1/(2N−1)}⌋ values each;
/// the realised count is reported in the result. Random mode draws every
/// site energy, coupling and λ uniformly and hits `n_samples` exactly.
pub fn sample_parameters(spec: &SweepSpec) -> Result<ParameterSample> {
    spec.validate()?;
    let n = spec.n_sites;
    match spec.mode {
        SamplingMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            };
            let points = (0..spec.n_samples as u64)
                .map(|id| {
                    let site_energies = (0..n).map(|_| draw(&mut rng, spec.epsilon_range)).collect();
                    let couplings = (1..n).map(|_| draw(&mut rng, spec.coupling_range)).collect();
                    let lambda = draw(&mut rng, spec.lambda_range);
                    ParameterPoint {
                        id,
                        site_energies,
                        couplings,
                        lambda,
                    }
                })
                .collect();
            Ok(ParameterSample {
                points,
                requested: spec.n_samples,
                per_axis: None,
            })
        }
        SamplingMode::Grid => {
            let axes = 2 * n - 1;
            let k = integer_root(spec.n_samples, axes as u32);
            let eps = linspace(spec.epsilon_range, k);
            let cpl = linspace(spec.coupling_range, k);
            let lam = linspace(spec.lambda_range, k);
            let total = k.pow(axes as u32);
            let mut points = Vec::with_capacity(total);
            let mut digits = vec![0usize; axes];
            for id in 0..total {
                let mut rest = id;
                for d in digits.iter_mut().rev() {
                    *d = rest % k;
                    rest /= k;
                }
                let mut site_energies: Vec<f64> = digits[..n - 1].iter().map(|&i| eps[i]).collect();
                site_energies.push(0.0);
                let couplings = digits[n - 1..2 * n - 2].iter().map(|&i| cpl[i]).collect();
                let lambda = lam[digits[axes - 1]];
                points.push(ParameterPoint {
                    id: id as u64,
                    site_energies,
                    couplings,
                    lambda,
                });
            }
            Ok(ParameterSample {
                points,
                requested: spec.n_samples,
                per_axis: Some(k),
            })
        }
    }
}

/// Number of samples spanning `duration_ps` at step `dt_ps`, counting both
/// endpoints (0.2 ps at 0.0002 ps → 1001).
pub fn input_points(duration_ps: f64, dt_ps: f64) -> usize {
    libm::round(duration_ps / dt_ps) as usize + 1
}

/// Number of future steps covering `duration_ps` (0.6 ps at 0.0002 ps → 3000).
pub fn horizon_steps(duration_ps: f64, dt_ps: f64) -> usize {
    libm::round(duration_ps / dt_ps) as usize
}

/// A supervised (input → target) pair cut from one site series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSample {
    pub source_id: u64,
    pub site: usize,
    pub offset: usize,
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Borrowed view of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub offset: usize,
    pub input: &'a [f64],
    pub target: &'a [f64],
}

/// len − (L_in + L_out) + 1, or 0 if the series is too short.
pub fn window_count(len: usize, input_len: usize, output_len: usize) -> usize {
    (len + 1).saturating_sub(input_len + output_len)
}

/// Stride-1 windows over `series`, in offset order.
pub fn windows(
    series: &[f64],
    input_len: usize,
    output_len: usize,
) -> Result<impl Iterator<Item = Window<'_>> + '_> {
    if input_len == 0 || output_len == 0 {
        return Err(Error::InvalidArgument("window lengths must be >= 1".into()));
    }
    let required = input_len + output_len;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: series.len(),
        });
    }
    Ok((0..window_count(series.len(), input_len, output_len)).map(move |offset| Window {
        offset,
        input: &series[offset..offset + input_len],
        target: &series[offset + input_len..offset + required],
    }))
}

pub fn slide_windows(
    series: &[f64],
    input_len: usize,
    output_len: usize,
    source_id: u64,
    site: usize,
) -> Result<Vec<WindowedSample>> {
    Ok(windows(series, input_len, output_len)?
        .map(|w| WindowedSample {
            source_id,
            site,
            offset: w.offset,
            input: w.input.to_vec(),
            target: w.target.to_vec(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitFractions {
    pub const STANDARD: SplitFractions = SplitFractions {
        train: 0.70,
        validation: 0.10,
        test: 0.20,
    };
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitManifest {
    pub train_ids: Vec<u64>,
    pub val_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
    pub fractions: SplitFractions,
    pub seed: u64,
}

impl SplitManifest {
    pub fn split_of(&self, id: u64) -> Option<Split> {
        if self.train_ids.contains(&id) {
            Some(Split::Train)
        } else if self.val_ids.contains(&id) {
            Some(Split::Validation)
        } else if self.test_ids.contains(&id) {
            Some(Split::Test)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.train_ids.len() + self.val_ids.len() + self.test_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shuffles trajectory ids with `seed` and partitions them. Counts are
/// rounded to nearest, the test split takes the remainder and is never
/// left empty.
pub fn split_dataset(ids: &[u64], fractions: SplitFractions, seed: u64) -> Result<SplitManifest> {
    let f = fractions;
    if [f.train, f.validation, f.test].iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidArgument("split fractions must be >= 0".into()));
    }
    let sum = f.train + f.validation + f.test;
    if libm::fabs(sum - 1.0) > 1e-9 {
        return Err(Error::InvalidArgument(format!("split fractions sum to {sum}, not 1")));
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("duplicate trajectory ids".into()));
    }

    let n = ids.len();
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut n_train = (libm::round(f.train * n as f64) as usize).min(n);
    let mut n_val = (libm::round(f.validation * n as f64) as usize).min(n - n_train);
    if n > 0 && n_train + n_val == n {
        if n_val > 0 {
            n_val -= 1;
        } else {
            n_train -= 1;
        }
    }
    let test_ids = shuffled.split_off(n_train + n_val);
    let val_ids = shuffled.split_off(n_train);
    Ok(SplitManifest {
        train_ids: shuffled,
        val_ids,
        test_ids,
        fractions,
        seed,
    })
}
