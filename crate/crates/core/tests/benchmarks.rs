use ale_idp::harness::{exact_sod, run_benchmark, BenchmarkSpec, Problem, RunConfig};
use ale_idp::scheme::SchemeVersion;
use ale_idp::systems::make_euler;

#[test]
fn coarse_sod_is_close_to_the_exact_profile() {
    let run = run_benchmark(&BenchmarkSpec::standard(Problem::Sod), 1).unwrap();
    let (l1, _) = run.errors.unwrap();
    assert!(l1 < 6e-2, "L1 density error {l1}");
    assert!((run.outcome.state.t() - 0.2).abs() < 1e-12);
    assert!(run.outcome.reports.iter().all(|r| r.min_convexity >= 0.0));
    // shock position at T: density right of the star region is the initial one
    let rho = exact_sod(0.95, 0.2, 1.4).0;
    assert!((rho - 0.125).abs() < 1e-12);
}

#[test]
fn noh_stays_admissible_on_the_coarsest_mesh() {
    let mut spec = BenchmarkSpec::standard(Problem::Noh);
    spec.final_time = 0.2;
    let run = run_benchmark(&spec, 0).unwrap();
    let e = make_euler(1.4, 2).unwrap();
    assert!(run
        .outcome
        .state
        .u
        .iter()
        .all(|u| u[0] > 0.0 && e.internal_energy(u) > 0.0));
    // boundary nodes moved inwards with unit speed
    let start = spec.mesh(0).unwrap();
    for (i, (p, q)) in start.coords().iter().zip(run.outcome.state.mesh.coords()).enumerate() {
        if start.is_boundary(i) {
            let (r0, r) = (p[0].hypot(p[1]), q[0].hypot(q[1]));
            assert!((r0 - r - 0.2).abs() < 1e-10, "dof {i}: {r0} -> {r}");
        }
    }
}

#[test]
fn kpp_respects_the_maximum_principle() {
    let mut spec = BenchmarkSpec::standard(Problem::Kpp);
    spec.final_time = 0.1;
    let run = run_benchmark(&spec, 0).unwrap();
    let (lo, hi) = spec.scalar_bounds().unwrap();
    assert!(run
        .outcome
        .state
        .u
        .iter()
        .all(|u| u[0] >= lo - 1e-12 && u[0] <= hi + 1e-12));
}

#[test]
fn version_two_runs_burgers() {
    let cfg = RunConfig::parse("problem = burgers2d\nscheme = v2\nfinal_time = 0.1\nfem = p1\n").unwrap();
    let spec = cfg.to_spec().unwrap();
    assert_eq!(spec.version, SchemeVersion::V2);
    let (l1, _) = run_benchmark(&spec, 0).unwrap().errors.unwrap();
    let mut v1 = spec.clone();
    v1.version = SchemeVersion::V1;
    let (reference, _) = run_benchmark(&v1, 0).unwrap().errors.unwrap();
    assert!((l1 - reference).abs() < 0.1 * reference, "{l1} vs {reference}");
}

#[test]
fn version_two_with_ssp_is_refused() {
    let cfg = RunConfig::parse("problem = rotation\nscheme = v2\n").unwrap();
    let spec = cfg.to_spec().unwrap();
    assert!(run_benchmark(&spec, 0).is_err());
}
