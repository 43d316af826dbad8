use secmimo::channel::*;
use secmimo::clustering::{strongest_bss, ClusterRequest, ClusteringPolicy};
use secmimo::mse::*;
use secmimo::numerics::*;
use secmimo::simkit::*;

/// Gaussian tail probability by composite Simpson integration of the density.
fn q_func(x: f64) -> f64 {
    let (a, b, n) = (x, x + 12.0, 20_000);
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn scalar_link(gain: f64, noise: f64, an_var: f64) -> (SystemDims, ChannelSet, TransceiverSolution) {
    let dims = SystemDims::uniform(1, 1, 1, 1, 1, 1, 1, 1.0, noise, an_var, 0.5);
    let ch = ChannelSet {
        c_hat: vec![vec![identity(1) * c(gain, 0.0)]],
        g_hat: vec![vec![identity(1)]],
        leg_error: ErrorModel::Perfect,
        eve_error: ErrorModel::Perfect,
    };
    let mut sol = TransceiverSolution::zeros(&dims);
    sol.v[0] = identity(1);
    sol.r[0] = identity(1) * c(1.0 / gain, 0.0);
    sol.e[0] = identity(1);
    (dims, ch, sol)
}

#[test]
fn qpsk_mapping_convention() {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let s = qpsk_modulate(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
    assert_eq!(s, vec![c(a, a), c(a, -a), c(-a, a), c(-a, -a)]);
    assert_eq!(qpsk_demodulate(&s), vec![0, 0, 0, 1, 1, 0, 1, 1]);
    assert!(matches!(qpsk_modulate(&[0, 1, 1]), Err(secmimo::Error::OddLength(3))));
}

#[test]
fn qpsk_symbols_have_unit_energy() {
    let mut rng = SimRng::new(1);
    let bits: Vec<u8> = (0..10_000).map(|_| rng.bit()).collect();
    let s = qpsk_modulate(&bits).unwrap();
    let mean = s.iter().map(|x| x.norm_sqr()).sum::<f64>() / s.len() as f64;
    assert!((mean - 1.0).abs() < 1e-12);
}

#[test]
fn noiseless_identity_chain_is_error_free() {
    let (dims, ch, sol) = scalar_link(0.7, 0.0, 0.0);
    let out = run_link_trial(&sol, &ch, &dims, 1000, &mut SimRng::new(2)).unwrap();
    assert_eq!(out.user_bit_errors, vec![0]);
    assert!(out.user_sq_error[0] < 1e-20);
    assert_eq!(out.bits, 2000);
}

#[test]
fn zero_precoder_gives_coin_flips() {
    let (dims, ch, mut sol) = scalar_link(1.0, 0.1, 0.0);
    sol.v[0] = zeros(1, 1);
    let out = run_link_trial(&sol, &ch, &dims, 5000, &mut SimRng::new(3)).unwrap();
    let ber = out.user_bit_errors[0] as f64 / out.bits as f64;
    assert!((ber - 0.5).abs() < 0.02, "{ber}");
}

#[test]
fn awgn_ber_matches_q_function() {
    // Unit-energy QPSK, Eb = 1/2, so Eb/N0 = 4 dB means N0 = 1 / (2 * 10^0.4).
    let n0 = 1.0 / (2.0 * 10f64.powf(0.4));
    let (dims, ch, sol) = scalar_link(1.0, n0, 0.0);
    let out = run_link_trial(&sol, &ch, &dims, 200_000, &mut SimRng::new(4)).unwrap();
    let ber = out.user_bit_errors[0] as f64 / out.bits as f64;
    let expect = q_func((2.0 * 10f64.powf(0.4)).sqrt());
    let se = (expect * (1.0 - expect) / out.bits as f64).sqrt();
    assert!((ber - expect).abs() < 3.0 * se, "{ber} vs {expect}");
}

#[test]
fn eavesdropper_sees_artificial_noise() {
    // Same data and noise draws, AN of variance 0.5 switched on through W.
    let (dims, ch, mut sol) = scalar_link(1.0, 0.05, 0.5);
    let off = run_link_trial(&sol, &ch, &dims, 20_000, &mut SimRng::new(5)).unwrap();
    sol.w[0] = identity(1);
    let on = run_link_trial(&sol, &ch, &dims, 20_000, &mut SimRng::new(5)).unwrap();
    assert!(on.eve_bit_errors[0] > off.eve_bit_errors[0]);
}

#[test]
fn link_squared_error_matches_closed_form() {
    let dims = SystemDims::uniform(2, 2, 1, 4, 2, 2, 2, 1.0, 0.1, 0.09, 0.5);
    let mut rng = SimRng::new(6);
    let ch = ChannelSet::rayleigh(&dims, ErrorModel::Perfect, ErrorModel::Perfect, &mut rng);
    let mut sol = TransceiverSolution::zeros(&dims);
    for t in 0..2 {
        sol.v[t] = rng.complex_gaussian(4, 2, 0.1);
        sol.w[t] = rng.complex_gaussian(4, 4, 0.1);
    }
    for l in 0..2 {
        sol.r[l] = rng.complex_gaussian(2, 2, 0.5);
    }
    sol.e[0] = rng.complex_gaussian(2, 2, 0.5);
    let u = UncertaintyInput::zeros(&dims);
    let flags = RobustFlags::NON_ROBUST;
    let (batches, per) = (100, 2000);
    let mut user = vec![Vec::new(); 2];
    let mut eve = Vec::new();
    for _ in 0..batches {
        let out = run_link_trial(&sol, &ch, &dims, per, &mut rng).unwrap();
        for l in 0..2 {
            user[l].push(out.user_sq_error[l] / per as f64);
        }
        eve.push(out.eve_sq_error[0] / per as f64);
    }
    let check = |samples: &[f64], closed: f64| {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - closed).abs() < 3.0 * (var / n).sqrt(), "{mean} vs {closed}");
    };
    for l in 0..2 {
        check(&user[l], mse_legitimate(&sol, &ch, &dims, flags, &u, l).unwrap());
    }
    check(&eve, mse_eavesdropper(&sol, &ch, &dims, flags, &u, 0).unwrap());
}

fn small_template(design: DesignKind) -> SweepTemplate {
    let dims = SystemDims::uniform(2, 2, 1, 4, 2, 2, 2, 1.0, 0.1, 0.09, 0.5);
    SweepTemplate::new(dims, design, 0.04, 0.09, ErrorPolicy::stochastic(0.04, 0.09))
}

#[test]
fn degenerate_sweep_has_mse_but_no_ber() {
    let grid = SnrSweep { points: vec![5.0], trials_per_point: 1, symbols_per_trial: 0 };
    let r = sweep(&small_template(DesignKind::NonRobust), &grid, 7).unwrap();
    let p = &r.points[0];
    assert_eq!(p.ber_legit, None);
    assert_eq!(p.ber_eve, None);
    assert!(p.mse_legit.is_finite() && p.mse_legit > 0.0);
    assert!(p.mse_eve.is_finite());
    assert_eq!(p.trials, 1);
    assert!(r.legit_curve().is_empty());
}

#[test]
fn sweep_rejects_bad_grids() {
    let t = small_template(DesignKind::NonRobust);
    let bad = SnrSweep { points: vec![5.0, 0.0], trials_per_point: 1, symbols_per_trial: 10 };
    assert!(sweep(&t, &bad, 1).is_err());
    let bad = SnrSweep { points: vec![0.0], trials_per_point: 0, symbols_per_trial: 10 };
    assert!(sweep(&t, &bad, 1).is_err());
}

#[test]
fn sweep_is_deterministic_and_monotone() {
    let grid = SnrSweep { points: vec![-10.0, -5.0, 0.0, 5.0], trials_per_point: 4, symbols_per_trial: 500 };
    let t = small_template(DesignKind::RobustStochastic);
    let a = sweep(&t, &grid, 8).unwrap();
    let b = sweep(&t, &grid, 8).unwrap();
    assert_eq!(a, b);
    for w in a.points.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let slack = lo.ber_legit_hw.unwrap() + hi.ber_legit_hw.unwrap();
        assert!(hi.ber_legit.unwrap() <= lo.ber_legit.unwrap() + slack);
    }
    for p in &a.points {
        assert!((0.0..=1.0).contains(&p.ber_legit.unwrap()));
        assert!((0.0..=1.0).contains(&p.ber_eve.unwrap()));
        assert!(p.mse_legit_hw >= 0.0 && p.ber_legit_hw.unwrap() >= 0.0);
    }
}

#[test]
fn gap_of_identical_curves_is_zero() {
    let curve = vec![(0.0, 0.4), (5.0, 0.1), (10.0, 0.01)];
    let g = security_gap(&curve, &curve, 0.1, 0.1).unwrap();
    assert_eq!(g.gap_db, 0.0);
}

#[test]
fn gap_arithmetic() {
    let legit = vec![(4.0, 1e-2), (6.0, 1e-4), (8.0, 1e-6)];
    let eve = vec![(0.0, 0.4), (2.0, 0.3), (4.0, 0.2)];
    let g = security_gap(&legit, &eve, 1e-4, 0.3).unwrap();
    assert_eq!((g.snr_min_legit_db, g.snr_max_eve_db, g.gap_db), (6.0, 2.0, 4.0));
    assert_eq!(g.target_ber_legit, 1e-4);
}

#[test]
fn gap_interpolates_log_linearly() {
    let legit = vec![(0.0, 1e-2), (10.0, 1e-6)];
    assert!((snr_min_reaching(&legit, 1e-4).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn unbracketed_targets_are_errors() {
    let curve = vec![(0.0, 0.2), (5.0, 0.1)];
    assert!(matches!(snr_min_reaching(&curve, 1e-4), Err(secmimo::Error::TargetNotBracketed { .. })));
    assert!(matches!(snr_max_above(&curve, 0.3), Err(secmimo::Error::TargetNotBracketed { .. })));
    // Already below target at the first sample: the crossing is not inside the sweep.
    assert!(snr_min_reaching(&curve, 0.5).is_err());
    assert!(snr_min_reaching(&[(1.0, 0.1), (0.0, 0.01)], 0.05).is_err());
}

#[test]
fn gap_on_q_curves_matches_analytic_crossings() {
    // BER(s) = Q(sqrt(2 * 10^((s - shift) / 10))) sampled every dB.
    let ber = |s: f64, shift: f64| q_func((2.0 * 10f64.powf((s - shift) / 10.0)).sqrt());
    let crossing = |target: f64, shift: f64| {
        let (mut lo, mut hi) = (-30.0, 30.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ber(mid, shift) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let legit: Vec<(f64, f64)> = (-10..=20).map(|s| (s as f64, ber(s as f64, 0.0))).collect();
    let eve: Vec<(f64, f64)> = (-10..=20).map(|s| (s as f64, ber(s as f64, 6.0))).collect();
    let g = security_gap(&legit, &eve, 1e-4, 0.3).unwrap();
    let expect = crossing(1e-4, 0.0) - crossing(0.3, 6.0);
    assert!((g.gap_db - expect).abs() < 0.1, "{} vs {expect}", g.gap_db);
}

#[test]
fn csv_tables_carry_schema_and_header() {
    let grid = SnrSweep { points: vec![0.0, 5.0], trials_per_point: 1, symbols_per_trial: 10 };
    let r = sweep(&small_template(DesignKind::NonRobust), &grid, 9).unwrap();
    let mut t = CsvTable::curves().unwrap();
    for p in &r.points {
        t.curve_row("fig", "NR", p).unwrap();
    }
    let text = t.finish().unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], format!("#schema={CURVE_SCHEMA}"));
    assert!(lines[1].starts_with("experiment,policy,snr_db,ber_legit"));
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("fig,NR,0.000000e0,"));
    assert_eq!(real(1234.5), "1.234500e3");
}

fn tiny_system() -> SystemLevelParams {
    SystemLevelParams {
        n_groups: 2,
        tx_antennas: 4,
        rx_antennas: 2,
        eve_antennas: 2,
        streams: 1,
        symbols: 200,
        error_draws: 1,
        max_outer_iters: 3,
        max_nbe_iters: 2,
        ..SystemLevelParams::default()
    }
}

#[test]
fn system_policies_pick_expected_clusters() {
    let params = tiny_system();
    let seed = 10;
    let mbsfn = system_level_run(&params, ClusteringPolicy::Mbsfn, seed).unwrap();
    let scptm = system_level_run(&params, ClusteringPolicy::ScPtm, seed).unwrap();
    for g in 0..params.n_groups {
        let layout = generate_system_scenario(&params.layout, &mut SimRng::new(seed).substream(g as u64).substream(0)).unwrap();
        let mut area = layout.sync_area.clone();
        area.sort();
        assert_eq!(mbsfn[g].cluster, area);
        let gains = layout.gains_to(&layout.user_positions, params.layout.h_bs_m, params.layout.h_ue_m);
        let mut strongest = strongest_bss(&ClusterRequest::for_layout(&layout, 1, 1.0, 1.0), &gains).unwrap();
        strongest.sort();
        assert_eq!(scptm[g].cluster, strongest);
        for o in [&mbsfn[g], &scptm[g]] {
            assert!(o.failed || (0.0..=1.0).contains(&o.ber_legit));
        }
    }
    assert_eq!(mbsfn, system_level_run(&params, ClusteringPolicy::Mbsfn, seed).unwrap());
}

#[test]
fn system_run_rejects_empty_runs() {
    let params = SystemLevelParams { n_groups: 0, ..tiny_system() };
    assert!(system_level_run(&params, ClusteringPolicy::Mbsfn, 1).is_err());
}
