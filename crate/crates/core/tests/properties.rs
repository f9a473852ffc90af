use std::collections::HashSet;

use heomcast_core::dataset::{
    sample_parameters, slide_windows, split_dataset, window_count, windows, SamplingMode, SplitFractions, SweepSpec,
};
use heomcast_core::forecast::{difference, undifference, DifferencingOperator};
use heomcast_core::heom::{liouvillian_apply, phi_apply, HeomSolver, HierarchyState};
use heomcast_core::hierarchy::MemoryBudget;
use heomcast_core::metrics::{mse, summarize};
use heomcast_core::model::{build_hamiltonian, spectral_density};
use heomcast_core::{BathSpec, CMatrix, SystemSpec, UnitSystem, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn symmetric_system(n: usize) -> impl Strategy<Value = SystemSpec> {
    (
        prop::collection::vec(-100.0..100.0f64, n),
        prop::collection::vec(-100.0..100.0f64, n * (n - 1) / 2),
    )
        .prop_map(move |(eps, upper)| {
            let mut j = vec![0.0; n * n];
            let mut it = upper.into_iter();
            for a in 0..n {
                for b in a + 1..n {
                    let v = it.next().unwrap();
                    j[a * n + b] = v;
                    j[b * n + a] = v;
                }
            }
            SystemSpec::new(eps, j).unwrap()
        })
}

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        CMatrix::from_fn(n, |a, b| {
            let (re, im) = v[a.min(b) * n + a.max(b)];
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => C64::new(re, 0.0),
                std::cmp::Ordering::Less => C64::new(re, im),
                std::cmp::Ordering::Greater => C64::new(re, -im),
            }
        })
    })
}

proptest! {
    #[test]
    fn hamiltonian_is_exactly_hermitian(spec in (1usize..6).prop_flat_map(symmetric_system)) {
        let h = build_hamiltonian(&spec, &UnitSystem::STANDARD);
        prop_assert_eq!(h.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn spectral_density_is_odd(w in -500.0..500.0f64, l in 0.0..100.0f64, g in 1.0..200.0f64) {
        prop_assert_eq!(spectral_density(-w, l, g), -spectral_density(w, l, g));
    }

    #[test]
    fn spectral_density_peaks_at_gamma(l in 1.0..100.0f64, g in 1.0..200.0f64) {
        let u = UnitSystem::STANDARD;
        let gamma = u.to_angular(g);
        let peak = spectral_density(gamma, l, g);
        prop_assert!((peak - u.to_angular(l)).abs() < 1e-9);
        for k in 0..=2000 {
            let w = gamma * (0.5 + k as f64 / 2000.0);
            prop_assert!(spectral_density(w, l, g) <= peak + 1e-9);
        }
    }

    #[test]
    fn commutators_keep_hermitian_structure(
        (h, s) in (1usize..5).prop_flat_map(|n| (hermitian(n), hermitian(n))),
        j in 0usize..5,
    ) {
        let l = liouvillian_apply(&h, &s).unwrap();
        // [H, σ]† = −[H, σ]
        prop_assert!(l.add(&l.adjoint()).unwrap().max_abs() < 1e-12);
        if j < s.dim() {
            let p = phi_apply(j, &s).unwrap();
            prop_assert!(p.hermiticity_deviation() < 1e-14);
        } else {
            prop_assert!(phi_apply(j, &s).is_err());
        }
    }

    /// With every ADO Hermitian, each ADO derivative is Hermitian and the
    /// derivative of ρ is traceless.
    #[test]
    fn derivative_preserves_hermiticity_and_trace(
        spec in symmetric_system(3),
        lambda in 0.0..100.0f64,
        seed in any::<u64>(),
    ) {
        let bath = BathSpec::uniform(3, lambda, 53.0, 300.0).unwrap();
        let solver = HeomSolver::new(&spec, &bath, 3, MemoryBudget::DEFAULT, &UnitSystem::STANDARD).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ados = Vec::new();
        for _ in 0..solver.layout().len() {
            let m = CMatrix::from_fn(3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let m = m.add(&m.adjoint()).unwrap();
            ados.extend_from_slice(m.as_slice());
        }
        let state = HierarchyState::from_raw(3, ados, 0.0).unwrap();
        let d = solver.derivative(&state).unwrap();
        let scale = d.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..d.n_ados() {
            prop_assert!(d.ado_matrix(i).hermiticity_deviation() < 1e-13 * scale);
        }
        prop_assert!(d.rho().trace().norm() < 1e-13 * scale);
    }

    #[test]
    fn window_count_identity(len in 0usize..400, lin in 1usize..60, lout in 1usize..60) {
        let series: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let expected = window_count(len, lin, lout);
        prop_assert_eq!(expected, (len + 1).saturating_sub(lin + lout));
        let result = windows(&series, lin, lout);
        match result {
            Ok(it) => {
                let all: Vec<_> = it.collect();
                prop_assert_eq!(all.len(), expected);
                for (k, w) in all.iter().enumerate() {
                    prop_assert_eq!(w.offset, k);
                    prop_assert_eq!(w.input.len(), lin);
                    prop_assert_eq!(w.target.len(), lout);
                    // target follows input contiguously
                    prop_assert_eq!(w.target[0], w.input[lin - 1] + 1.0);
                }
            }
            Err(_) => prop_assert_eq!(expected, 0),
        }
    }

    #[test]
    fn splits_are_disjoint_exhaustive_and_leak_free(n in 1usize..200, seed in any::<u64>()) {
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 7 + 3).collect();
        let m = split_dataset(&ids, SplitFractions::STANDARD, seed).unwrap();
        prop_assert!(!m.test_ids.is_empty());
        prop_assert_eq!(m.len(), n);
        let sets: Vec<HashSet<u64>> = [&m.train_ids, &m.val_ids, &m.test_ids]
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        prop_assert!(sets[0].is_disjoint(&sets[1]) && sets[0].is_disjoint(&sets[2]) && sets[1].is_disjoint(&sets[2]));
        let union: HashSet<u64> = sets.iter().flatten().copied().collect();
        prop_assert_eq!(union, ids.iter().copied().collect::<HashSet<u64>>());
        prop_assert_eq!(&m, &split_dataset(&ids, SplitFractions::STANDARD, seed).unwrap());

        // Windows inherit their trajectory's split.
        let series = [0.5; 12];
        let mut seen = Vec::new();
        for part in [&m.train_ids, &m.val_ids, &m.test_ids] {
            let srcs: HashSet<u64> = part
                .iter()
                .flat_map(|&id| slide_windows(&series, 4, 3, id, 0).unwrap())
                .map(|w| w.source_id)
                .collect();
            seen.push(srcs);
        }
        prop_assert!(seen[0].is_disjoint(&seen[1]) && seen[0].is_disjoint(&seen[2]) && seen[1].is_disjoint(&seen[2]));
    }

    #[test]
    fn random_sweep_stays_in_table_ranges(n_sites in 2usize..5, n in 1usize..50, seed in any::<u64>()) {
        let spec = SweepSpec::standard(n_sites, n, SamplingMode::Random, seed);
        let a = sample_parameters(&spec).unwrap();
        prop_assert_eq!(a.actual(), n);
        for p in &a.points {
            prop_assert!(p.site_energies.iter().all(|e| (-100.0..=100.0).contains(e)));
            prop_assert!(p.couplings.iter().all(|j| (-100.0..=100.0).contains(j)));
            prop_assert!((1.0..=100.0).contains(&p.lambda));
            prop_assert_eq!(p.couplings.len(), n_sites - 1);
        }
        prop_assert_eq!(a, sample_parameters(&spec).unwrap());
    }

    #[test]
    fn difference_round_trips(series in prop::collection::vec(-1.0..1.0f64, 5..60), d in 0usize..=3, split in 0usize..20) {
        let split = d + split % (series.len() - d);
        let w = difference(&series, d).unwrap();
        prop_assert_eq!(w.len(), series.len() - d);
        let back = undifference(&w[split - d..], &series[..split], d).unwrap();
        for (a, b) in back.iter().zip(&series[split..]) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let op = DifferencingOperator::new(d, 0, 0);
        let ow = op.apply(&series).unwrap();
        for (a, b) in ow.iter().zip(&w) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mse_is_a_symmetric_nonnegative_discrepancy(
        (a, b) in (1usize..50).prop_flat_map(|n| (
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n),
        ))
    ) {
        let ab = mse(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, mse(&b, &a).unwrap());
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
    }

    #[test]
    fn aggregating_identical_scores(v in 0.0..1.0f64, k in 1usize..100) {
        let s = summarize(&vec![v; k]).unwrap();
        prop_assert_eq!(s.mean, v);
        prop_assert_eq!(s.std, 0.0);
        prop_assert_eq!(s.n, k);
    }
}
