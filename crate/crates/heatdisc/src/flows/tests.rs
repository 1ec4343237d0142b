use super::*;

fn grid(nr: usize, modes: usize) -> Arc<PolarGrid<f64>> {
    PolarGrid::new(nr, modes, 2.0).unwrap()
}

fn sign_changes(vals: &[f64]) -> usize {
    let n = vals.len();
    (0..n).filter(|&j| vals[j] * vals[(j + 1) % n] < 0.0).count()
}

#[test]
fn smoothstep_endpoints() {
    assert_eq!(smoothstep(0.0), [0.0; 3]);
    assert_eq!(smoothstep(1.0), [1.0, 0.0, 0.0]);
    let [s, ds, dds] = smoothstep(0.5f64);
    assert!((s - 0.5).abs() < 1e-15 && (ds - 1.875).abs() < 1e-15 && dds.abs() < 1e-15);
}

#[test]
fn plan_at_1e4() {
    let p = BranchingPlan::<f64>::for_pe(1e4).unwrap();
    assert_eq!(p.inv_l, vec![30, 60, 120]);
    for (r, want) in p.r.iter().zip([0.75401, 0.93850, 0.98463]) {
        assert!((r - want).abs() < 1e-4, "{r} vs {want}");
    }
    assert!((p.delta_bl() - 0.015374).abs() < 5e-6);
    for k in 0..p.n() {
        assert!((p.ell(p.r[k]).unwrap() - p.l(k)).abs() < 1e-12);
    }
    assert!(BranchingPlan::for_pe(50.0).is_err());
}

#[test]
fn plan_hypotheses_across_pe() {
    for e in [1.85, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
        let pe = 10f64.powf(e);
        let p = BranchingPlan::for_pe(pe).unwrap();
        let big_r = pe.cbrt() / pe.ln().powf(1.0 / 6.0);
        let ib = p.inv_l[0] as f64;
        assert!(2.0 * big_r <= ib && ib <= 4.0 * big_r && ib - 1.0 < 2.0 * big_r);
        assert_eq!(p.n(), big_r.log2().floor() as usize);
        assert!(p.r[0] > 0.5 && *p.r.last().unwrap() < 1.0);
        for k in 0..p.n() {
            assert!(p.l(k) <= 4.0 * p.delta(k));
            if k + 1 < p.n() {
                assert!((p.l(k) - p.l(k + 1) - p.l(k + 1)).abs() < 1e-15);
                let q = p.delta(k + 1) / p.delta(k);
                assert!((0.125..=8.0).contains(&q));
            }
        }
        assert!(p.r_core > 0.0 && p.r_core < p.r[0]);
    }
}

#[test]
fn cutoff_partition_and_bounds() {
    for pe in [1e3, 1e4, 1e5] {
        let p = BranchingPlan::for_pe(pe).unwrap();
        let c = p.cutoffs();
        let n = p.n();
        for i in 0..10_000 {
            let r = (i as f64 + 0.5) / 10_000.0;
            let vals: Vec<[f64; 3]> = (0..n).map(|k| c.eval(k, r)).collect();
            if r < p.r_bl() {
                let s: f64 = vals.iter().map(|v| v[0] * v[0]).sum();
                assert!((s - 1.0).abs() < 1e-12, "r={r}");
            }
            if r <= p.r[0] {
                assert_eq!(vals[0][0], 1.0);
            }
            for a in 0..n {
                for b in 0..n {
                    if a.abs_diff(b) > 1 {
                        assert_eq!(vals[a][0] * vals[b][0], 0.0);
                    }
                }
                if vals[a][0] != 0.0 {
                    assert!(c.active(r).contains(&a));
                }
            }
            for k in 0..n {
                // Overlap intervals touching χ_k are [r_{k-1}, r_k] and [r_k, r_{k+1}].
                let d = if k > 0 && r < p.r[k] { p.delta(k - 1) } else { p.delta(k) };
                assert!(vals[k][1].abs() <= 8.0 / d && vals[k][2].abs() <= 64.0 / (d * d));
            }
        }
        let end = c.eval(n - 1, 1.0);
        assert!(end[0].abs() < 1e-15 && end[1].abs() < 1e-12);
        let h = 1e-6;
        for &r in &[0.3, p.r[0] + 0.3 * p.delta(0), p.r_bl() + 0.5 * p.delta_bl()] {
            for k in 0..n {
                let fd = (c.eval(k, r + h)[0] - c.eval(k, r - h)[0]) / (2.0 * h);
                let fd2 = (c.eval(k, r + h)[1] - c.eval(k, r - h)[1]) / (2.0 * h);
                let [_, d1, d2] = c.eval(k, r);
                assert!((fd - d1).abs() < 1e-5 * (1.0 + d1.abs()));
                assert!((fd2 - d2).abs() < 1e-4 * (1.0 + d2.abs()));
            }
        }
    }
}

#[test]
fn roll_flow_closed_forms() {
    let g = grid(256, 16);
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let d = roll_flow(&s, 2, 0.0).unwrap();
    assert!((d.energy() - 0.25).abs() < 1e-10, "{}", d.energy());
    assert!((d.enstrophy() - 1.0).abs() < 1e-8, "{}", d.enstrophy());
    for n in [1usize, 3, 5] {
        let d = roll_flow(&s, n, 0.0).unwrap();
        let k = 200;
        let r = g.r_nodes()[k];
        let row: Vec<f64> = (0..g.ntheta()).map(|j| d.streamfunction().eval_at_node(k, g.theta(j))).collect();
        assert_eq!(sign_changes(&row), 2 * n);
        let th = 0.7;
        let want = r * r / (2f64.sqrt() * n as f64) * (n as f64 * th).cos();
        assert!((d.psi_at(r, th) - want).abs() < 1e-12);
        assert!((d.streamfunction().eval_at_node(k, th) - want).abs() < 1e-12);
    }
}

#[test]
fn roll_velocity_matches_product_rule() {
    // u = −(∂_θg Ψ + gΨ')ê_r + r f Ψ ê_θ for f = sin²2θ, g = (r/2) sin²2θ.
    let g = grid(256, 32);
    let s = Source::new(SourceKind::Quadrupole { k: 2 }, &g).unwrap();
    let n = 6.0f64;
    let d = roll_flow(&s, 6, 0.0).unwrap();
    let k = 180;
    let r = g.r_nodes()[k];
    for th in [0.1, 1.3, 2.9] {
        let psi = (2f64).sqrt() / n * (n * th).cos();
        let dpsi = -(2f64).sqrt() * (n * th).sin();
        let gg = 0.5 * r * (2.0 * th).sin().powi(2);
        let dg = 2.0 * r * (2.0 * th).sin() * (2.0 * th).cos();
        let ur = -(dg * psi + gg * dpsi);
        let ut = r * (2.0 * th).sin().powi(2) * psi;
        assert!((d.velocity().r.eval_at_node(k, th) - ur).abs() < 1e-7);
        assert!((d.velocity().t.eval_at_node(k, th) - ut).abs() < 1e-7);
    }
}

#[test]
fn roll_enstrophy_scaling() {
    let g = grid(256, 160);
    for kind in [SourceKind::Constant, SourceKind::GaussianCenter { a: 4.0 }] {
        let s = Source::new(kind, &g).unwrap();
        for n in [8usize, 16, 32] {
            let a = roll_flow(&s, n, 0.0).unwrap().enstrophy();
            let b = roll_flow(&s, 2 * n, 0.0).unwrap().enstrophy();
            assert!((3.0..=5.0).contains(&(b / a)), "n={n}: {}", b / a);
        }
    }
    // Closed form n²/4 − 1/2 + 2/n² for f = 1.
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let n = 8.0;
    let e = roll_flow(&s, 8, 0.0).unwrap().enstrophy();
    assert!((e - (n * n / 4.0 - 0.5 + 2.0 / (n * n))).abs() < 1e-3 * e, "{e}");
}

#[test]
fn branching_flow_at_1e4() {
    let plan = BranchingPlan::for_pe(1e4).unwrap();
    let g = grid(512, 480);
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let d = branching_flow(&s, &plan).unwrap();
    d.check_invariants().unwrap();
    assert!(d.enstrophy().is_finite() && d.grad_eta().is_finite());

    let g2 = grid(1024, 480);
    let s2 = Source::new(SourceKind::Constant, &g2).unwrap();
    let d2 = branching_flow(&s2, &plan).unwrap();
    assert!((d.enstrophy() / d2.enstrophy() - 1.0).abs() < 0.01);
    assert!((d.grad_eta() / d2.grad_eta() - 1.0).abs() < 0.01);

    // Where χ_2 dominates, the streamfunction changes sign 2/l_2 times.
    let k = g.r_nodes().iter().position(|&r| r > plan.r[1] - 0.02 * plan.delta(0)).unwrap();
    let row: Vec<f64> = (0..g.ntheta()).map(|j| d.streamfunction().eval_at_node(k, g.theta(j))).collect();
    assert_eq!(sign_changes(&row), 2 * plan.inv_l[1]);

    let r = g.r_nodes()[k];
    assert!((d.psi_at(r, 0.4) - d.streamfunction().eval_at_node(k, 0.4)).abs() < 1e-10);
    assert!((d.eta_at(r, 0.4) - d.test_function().eval_at_node(k, 0.4)).abs() < 1e-10);
}

#[test]
fn branching_requires_modes() {
    let plan = BranchingPlan::for_pe(1e4).unwrap();
    let g = grid(128, 64);
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    match branching_flow(&s, &plan) {
        Err(Error::Unresolved { required, available }) => assert_eq!((required, available), (480, 64)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn energy_roll_at_100() {
    let plan = BranchingPlan::<f64>::energy_roll(100.0).unwrap();
    assert_eq!(plan.inv_l, vec![10]);
    assert!((plan.delta_bl() - 0.1).abs() < 1e-15);
    let g = grid(256, 64);
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let d = energy_roll_design(&s, 100.0).unwrap();
    assert_eq!(d.kind(), FlowKind::EnergyRoll);
    assert!(d.energy() > 0.0 && d.energy() < 4.0);
    assert!(energy_roll_design(&s, 3.0).is_err());
}

#[test]
fn rescaling() {
    let g = grid(256, 16);
    let s = Source::new(SourceKind::Constant, &g).unwrap();
    let d = roll_flow(&s, 2, 0.0).unwrap();
    let e = d.rescale_to_pe(10.0, Constraint::Enstrophy).unwrap();
    assert!((e.lambda() - 10.0).abs() < 1e-7);
    assert!((e.enstrophy() / 100.0 - 1.0).abs() < 1e-10);
    let again = e.rescale_to_pe(10.0, Constraint::Enstrophy).unwrap();
    assert!((again.lambda() / e.lambda() - 1.0).abs() < 1e-12);
    assert!((again.velocity().mean_square() / e.velocity().mean_square() - 1.0).abs() < 1e-12);
    let en = d.rescale_to_pe(10.0, Constraint::Energy).unwrap();
    assert!((en.lambda() - 20.0).abs() < 1e-8);
    assert!((en.velocity().mean_square() / 100.0 - 1.0).abs() < 1e-10);
    assert!((en.grad_eta() * en.lambda().powi(2) / d.grad_eta() - 1.0).abs() < 1e-12);

    let zero = Source::new(SourceKind::Constant, &g).unwrap();
    let mut flat = roll_flow(&zero, 2, 0.0).unwrap();
    flat.energy = 0.0;
    assert!(matches!(flat.rescale_to_pe(10.0, Constraint::Energy), Err(Error::ZeroNorm(_))));
}

#[test]
fn names_round_trip() {
    for k in [FlowKind::Roll, FlowKind::Branching, FlowKind::EnergyRoll] {
        assert_eq!(k.to_string().parse::<FlowKind>().unwrap(), k);
    }
    assert!("spiral".parse::<FlowKind>().is_err());
    assert_eq!("energy".parse::<Constraint>().unwrap(), Constraint::Energy);
}
