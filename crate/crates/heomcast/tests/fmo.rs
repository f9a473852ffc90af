use heomcast::fmo::{fmo_demo, write_fmo_outputs, write_template, FmoConfig, FmoOptions, TEMPLATE};
use heomcast::trajectory::read_trajectory;
use heomcast_core::forecast::GridSpec;
use heomcast_core::hierarchy::MemoryBudget;

// An arbitrary coupled seven-site Hamiltonian with pigment-protein scale
// numbers; only the magnitudes matter here.
const COUPLED: &str = r#"
sites = 7
epsilon = [240.0, 30.0, 0.0, 180.0, 320.0, 300.0, 210.0]
J = [
    [0.0, -88.0, 5.0, -5.9, 6.7, -13.7, -9.9],
    [-88.0, 0.0, 30.8, 8.2, 0.7, 11.8, 4.3],
    [5.0, 30.8, 0.0, -53.5, -2.2, -9.6, 6.0],
    [-5.9, 8.2, -53.5, 0.0, -70.7, -17.0, -63.3],
    [6.7, 0.7, -2.2, -70.7, 0.0, 81.1, -1.3],
    [-13.7, 11.8, -9.6, -17.0, 81.1, 0.0, 39.7],
    [-9.9, 4.3, 6.0, -63.3, -1.3, 39.7, 0.0],
]
lambda = 35.0
gamma = 53.0
temperature_K = 300.0
initial_site = 1
report_sites = [1, 2, 3]
"#;

fn options(depth: usize, check: Option<usize>, t_total: f64) -> FmoOptions {
    FmoOptions {
        depth,
        check_depth: check,
        t_total,
        dt: 0.0005,
        input_len: 41,
        horizon: None,
        grid: GridSpec {
            p_max: 2,
            q_max: 1,
            ..GridSpec::default()
        },
        workers: 2,
        budget: MemoryBudget::DEFAULT,
    }
}

#[test]
fn uncoupled_template_keeps_site_one_full() {
    let cfg = FmoConfig::from_toml(TEMPLATE).unwrap();
    let out = fmo_demo(&cfg, &options(2, None, 0.05)).unwrap();
    assert_eq!(out.trajectory.len(), 101);
    assert!(out.convergence.is_none());
    for t in 0..out.trajectory.len() {
        assert!((out.trajectory.population(t, 0) - 1.0).abs() < 1e-12);
    }
    let f1 = &out.forecasts[0];
    assert_eq!((f1.site, f1.values.len()), (1, 60));
    assert!(f1.values.iter().all(|v| (v - 1.0).abs() < 1e-9), "{:?}", &f1.values[..5]);
    assert!(out.forecasts[1].values.iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn coupled_run_conserves_population_and_writes_outputs() {
    let cfg = FmoConfig::from_toml(COUPLED).unwrap();
    let out = fmo_demo(&cfg, &options(6, Some(4), 0.1)).unwrap();
    assert!(out.max_sum_deviation < 1e-6, "{}", out.max_sum_deviation);
    let audit = out.trajectory.audit();
    assert!(audit.passed);
    // population actually leaves site 1
    assert!(out.trajectory.population(200, 0) < 0.95);
    let note = out.convergence.clone().unwrap();
    assert!(note.converged, "{}", note.message());
    assert!(note.max_difference < 5e-3);
    for f in &out.forecasts {
        assert!(f.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    let dir = tempfile::tempdir().unwrap();
    let paths = write_fmo_outputs(dir.path(), &out).unwrap();
    let (h, t) = read_trajectory(&paths.trajectory).unwrap();
    assert_eq!((h.n_sites, h.depth, t.len()), (7, 6, 201));
    let forecast = std::fs::read_to_string(&paths.forecast).unwrap();
    assert_eq!(forecast.lines().next().unwrap(), "t_ps,P1,P2,P3");
    assert_eq!(forecast.lines().count(), 1 + 160);
    let plot = std::fs::read_to_string(&paths.plot).unwrap();
    assert_eq!(plot.lines().count(), 1 + 3 * (201 + 41 + 160));
    let first = format!("\n{},P1_forecast,", out.trajectory.times()[41]);
    assert!(plot.contains(&first));
    assert!(plot.contains("\n0,P3_truth,0\n"));
}

#[test]
fn too_deep_hierarchy_suggests_a_fitting_depth() {
    let cfg = FmoConfig::from_toml(COUPLED).unwrap();
    let err = fmo_demo(&cfg, &options(20, None, 0.01)).unwrap_err().to_string();
    assert!(err.contains("try --depth"), "{err}");
    let k: usize = err.rsplit("--depth ").next().unwrap().trim().parse().unwrap();
    assert!((6..20).contains(&k), "{err}");
}

#[test]
fn template_is_not_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fmo.toml");
    write_template(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), TEMPLATE);
    assert!(write_template(&path).is_err());
    assert!(FmoConfig::from_toml(&TEMPLATE.replace("initial_site = 1", "initial_site = 8")).is_err());
}
