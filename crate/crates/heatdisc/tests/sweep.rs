use heatdisc::disc::PolarGrid;
use heatdisc::flows::{branching_flow, roll_flow, BranchingPlan, Constraint};
use heatdisc::sources::{Source, SourceKind};
use heatdisc::sweep::*;

fn small(pe: &str) -> SweepConfig {
    let mut c = SweepConfig::default();
    c.apply_text(&format!("pe={pe}\nnr=512\nexact_cap=0\n")).unwrap();
    c
}

#[test]
fn branching_sweep_rows_sorted_and_decreasing() {
    let t = run_sweep(&small("1e4, 1e2, 1e3")).unwrap();
    let pe: Vec<f64> = t.rows.iter().map(|r| r.pe).collect();
    assert_eq!(pe, vec![1e2, 1e3, 1e4]);
    let up: Vec<f64> = t.reports().map(|r| r.upper).collect();
    assert_eq!(up.len(), 3);
    assert!(up.iter().all(|u| u.is_finite()));
    assert!(up.windows(2).all(|w| w[1] < w[0]), "{up:?}");
    assert!(t.reports().all(|r| r.exact.is_none() && r.lower.is_some()));
}

#[test]
fn sweep_records_row_failures() {
    let mut c = small("30, 1e3");
    c.set("modes", "256").unwrap();
    let t = run_bounds(&c).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[0].report.as_ref().unwrap_err().contains("Pe >= 70"));
    assert!(t.rows[1].report.is_ok());
    let back = SweepTable::from_csv(&t.to_csv().unwrap()).unwrap();
    assert!(back.rows.iter().zip(&t.rows).all(|(a, b)| a.same_content(b)));
}

#[test]
fn exact_values_only_below_cap() {
    let mut c = small("100, 2000");
    c.apply_text("flow=roll:4\nexact_cap=1000\nmodes=128\n").unwrap();
    let t = run_sweep(&c).unwrap();
    let r: Vec<_> = t.reports().collect();
    assert!(r[0].exact.is_some() && r[1].exact.is_none());
    let (lo, ex, up) = (r[0].lower.unwrap(), r[0].exact.unwrap(), r[0].upper);
    assert!(lo <= ex && ex <= up, "{lo} {ex} {up}");
}

#[test]
fn identical_config_gives_identical_csv() {
    let c = small("100, 1e3");
    let a = run_bounds(&c).unwrap().to_csv().unwrap();
    let b = run_bounds(&c).unwrap().to_csv().unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_file_round_trip() {
    let t = run_bounds(&small("100, 1e3")).unwrap();
    let dir = std::env::temp_dir().join(format!("heatdisc-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.csv");
    write_csv(&t, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.config, t.config);
    assert!(back.rows.iter().zip(&t.rows).all(|(a, b)| a.same_content(b)));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_flow_is_an_error() {
    assert!(SweepConfig::from_text("flow=vortex").is_err());
}

#[test]
fn branching_cells_double_across_rings() {
    let plan = BranchingPlan::for_pe(1e4).unwrap();
    let g = PolarGrid::new(1024, 4 * plan.max_wavenumber(), 2.0).unwrap();
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let d = branching_flow(&s, &plan).unwrap();
    let counts: Vec<usize> = cell_counts(&d).into_iter().map(|(_, c)| c).collect();
    let expect: Vec<usize> = plan.inv_l.iter().map(|il| 2 * il).collect();
    assert_eq!(counts, expect);
}

#[test]
fn rendering_is_deterministic() {
    let g = PolarGrid::new(256, 64, 2.0).unwrap();
    let s = Source::new(SourceKind::Quadrupole { k: 2 }, &g).unwrap();
    let d = roll_flow(&s, 3, 0.0).unwrap();
    let dir = std::env::temp_dir().join(format!("heatdisc-render-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (a, b) = (dir.join("a.svg"), dir.join("b.svg"));
    render_streamlines(&d, &a).unwrap();
    render_streamlines(&d, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_passes_and_detects_fault() {
    let rep = selftest(&SelftestOptions::default()).unwrap();
    for c in &rep.checks {
        eprintln!("{c}");
    }
    assert!(rep.passed());
    assert!(matches!(rep.outcome("flows.plan_1e6"), Some(CheckOutcome::Skip(_))));

    let bad = selftest(&SelftestOptions { poisson_fault: Some(1e-3), ..Default::default() }).unwrap();
    assert!(!bad.passed());
    assert!(matches!(bad.outcome("bounds.flux_q_identity"), Some(CheckOutcome::Fail(_))));
}

#[test]
fn fit_from_table_uses_successful_rows() {
    let t = run_bounds(&small("100, 316.2, 1e3, 3162, 1e4")).unwrap();
    let fit = fit_scaling(&t, Constraint::Enstrophy).unwrap();
    assert!(fit.raw_slope < 0.0 && fit.compensated_spread >= 1.0);
}
