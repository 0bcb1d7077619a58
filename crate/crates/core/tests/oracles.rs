//! Cross-checks between independent routes to the same quantity.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use beats_core::dynamics::transit_sample;
use beats_core::field::DETECTOR_OFFSET;
use beats_core::metrics::beat_visibility;
use beats_core::scenarios;
use beats_core::*;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expansion(p: &SystemParams, sector: SymmetrySector, preset: WindowPreset) -> ModeExpansion {
    solve_sector(p, sector, &SearchWindow::preset(preset, p)).unwrap()
}

#[test]
fn detector_mode_form_matches_lightcone() {
    let p = scenarios::NONMARKOVIAN_HALF.params(&canonical_paper_params());
    let t_max = 4.0;
    let times = time_grid(&p, t_max, DEFAULT_DT).unwrap();
    for sector in [SymmetrySector::Symmetric, SymmetrySector::Antisymmetric] {
        let exp = expansion(&p, sector, WindowPreset::NonMarkovian);
        let dde = dde_integrate(&p, &InitialState::sector(sector), &DdeConfig::new(DEFAULT_DT, t_max)).unwrap();
        let late: Vec<f64> = times.iter().cloned().filter(|&t| t > p.delay() && t < t_max - 0.01).collect();
        let modes = intensity_at_detector(&exp, &late).unwrap();
        let cone = intensity_lightcone(&dde, &p, p.distance + DETECTOR_OFFSET, &late).unwrap();
        let peak = cone.peak();
        let dev = modes.values.iter().zip(&cone.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev / peak < 5e-3, "{sector:?}: {dev:e} of peak {peak:e}");
    }
}

#[test]
fn grid_detector_matches_lightcone() {
    let p = scenarios::MARKOVIAN_FULL.params(&canonical_paper_params());
    let dde = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(DEFAULT_DT, 1.0)).unwrap();
    let pair = detector_pair(&dde, &p).unwrap();
    let times: Vec<f64> = pair.times.iter().cloned().filter(|&t| t > 2.0 * p.delay() && t < 0.99).collect();
    let cone = intensity_lightcone(&dde, &p, p.distance + DETECTOR_OFFSET, &times).unwrap();
    let offset = pair.times.iter().position(|&t| t == times[0]).unwrap();
    for (k, v) in cone.values.iter().enumerate() {
        assert!((v - pair.right[offset + k]).abs() < 1e-3 * cone.peak());
    }
}

#[test]
fn energy_is_conserved() {
    let base = canonical_paper_params();
    for sc in [scenarios::MARKOVIAN_FULL, scenarios::NONMARKOVIAN_FULL] {
        let p = sc.params(&base);
        for init in [InitialState::symmetric(), InitialState::antisymmetric(), InitialState::from_angles(0.4, 0.9)] {
            let dde = dde_integrate(&p, &init, &DdeConfig::new(DEFAULT_DT, 6.0)).unwrap();
            let budget = energy_budget(&dde, &p).unwrap();
            assert!((budget.total() - 1.0).abs() < 2e-2, "{}: {budget:?}", sc.name);
        }
    }
}

#[test]
fn dde_is_fourth_order_without_delay() {
    let p = canonical_paper_params();
    let report = convergence_study(&p, &InitialState::symmetric(), &[1e-3, 5e-4, 2.5e-4], 1.0).unwrap();
    assert!((report.order() - 4.0).abs() < 0.5, "{report:?}");
}

#[test]
fn dde_converges_with_delay() {
    let p = scenarios::MARKOVIAN_FULL.params(&canonical_paper_params());
    let report = convergence_study(&p, &InitialState::symmetric(), &[1e-3, 5e-4, 2.5e-4], 1.0).unwrap();
    assert!(report.order() >= 2.0, "{report:?}");
    assert!(report.differences.iter().all(|d| d.is_finite()));
}

#[test]
fn closed_form_tracks_dde_at_zero_separation() {
    let p = canonical_paper_params();
    let times = time_grid(&p, 3.0, DEFAULT_DT).unwrap();
    let closed = closed_form_coincident(&p, SymmetrySector::Symmetric, &times);
    let dde = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(DEFAULT_DT, 3.0)).unwrap();
    let residual = closed.max_deviation(&dde, -1.0, 3.0).unwrap();
    let scale = p.gamma32 / p.omega23;
    assert!(residual < 0.5 * scale, "{residual:e}");
}

#[test]
fn level3_substitution_reproduces_dde() {
    let p = scenarios::MARKOVIAN_FULL.params(&canonical_paper_params());
    let z = Complex64::default();
    let a = [z, z, c(0.6, 0.0), c(0.0, 0.8)];
    let direct = dde_integrate(&p, &InitialState::general(a).unwrap(), &DdeConfig::new(DEFAULT_DT, 1.0)).unwrap();
    let swapped = InitialState::general([a[2], a[3], a[0], a[1]]).unwrap();
    let q = p.level3_substitution();
    let mapped = dde_integrate(&q, &swapped, &DdeConfig::new(DEFAULT_DT, 1.0)).unwrap().swap_levels();
    assert!(direct.max_deviation(&mapped, -1.0, 1.0).unwrap() < 1e-9);
}

#[test]
fn composed_sectors_match_general_dde() {
    let p = scenarios::MARKOVIAN_FULL.params(&canonical_paper_params());
    let init = InitialState::from_angles(0.3, 1.1);
    let times = time_grid(&p, 2.0, DEFAULT_DT).unwrap();
    let plus =
        amplitudes_from_modes(&expansion(&p, SymmetrySector::Symmetric, WindowPreset::Markovian), &times).unwrap();
    let minus =
        amplitudes_from_modes(&expansion(&p, SymmetrySector::Antisymmetric, WindowPreset::Markovian), &times).unwrap();
    let composed = compose_general_state(&init, &plus, &minus).unwrap();
    let dde = dde_integrate(&p, &init, &DdeConfig::new(DEFAULT_DT, 2.0)).unwrap();
    assert!(composed.max_deviation(&dde, p.delay(), 2.0).unwrap() < 1e-4);
}

#[test]
fn beat_visibility_orders_by_separation() {
    let base = canonical_paper_params();
    let period = 2.0 * PI / base.omega23;
    let vis = |sc: scenarios::Scenario| {
        let p = sc.params(&base);
        let dde = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(DEFAULT_DT, 1.0)).unwrap();
        let pop2: Vec<f64> = dde.ca2.iter().map(|c| c.norm_sqr()).collect();
        beat_visibility(&dde.times, &pop2, 0.5, period).unwrap()
    };
    let p = scenarios::MARKOVIAN_FULL.params(&base);
    let times = time_grid(&p, 1.0, DEFAULT_DT).unwrap();
    let lone = single_atom_trace(&p, c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), &times);
    let lone_pop2: Vec<f64> = lone.ca2.iter().map(|c| c.norm_sqr()).collect();
    let lone_vis = beat_visibility(&times, &lone_pop2, 0.5, period).unwrap();
    let (full, half) = (vis(scenarios::MARKOVIAN_FULL), vis(scenarios::MARKOVIAN_HALF));
    assert!(full > lone_vis && lone_vis > half, "{full} {lone_vis} {half}");
}

#[test]
fn derivative_kink_sits_at_transit() {
    let p = scenarios::NONMARKOVIAN_FULL.params(&canonical_paper_params());
    let dde = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(DEFAULT_DT, p.delay() + 0.1)).unwrap();
    let m = transit_sample(&dde, &p).unwrap();
    let h = dde.dt();
    let slope = |i: usize| (dde.ca2[i + 1] - dde.ca2[i]) / h;
    let jump = (slope(m) - slope(m - 1)).norm();
    let smooth = (slope(m - 1) - slope(m - 2)).norm();
    assert!(jump > 100.0 * smooth, "jump {jump:e}, neighbour {smooth:e}");
}

#[test]
fn transit_sums_match_exact_single_emitter() {
    let p = scenarios::MARKOVIAN_FULL.params(&canonical_paper_params());
    let times = time_grid(&p, 1.0, DEFAULT_DT).unwrap();
    let exp = expansion(&p, SymmetrySector::Symmetric, WindowPreset::Markovian);
    let trace = amplitudes_from_modes(&exp, &times).unwrap();
    assert!(trace.transit_defect.unwrap() < 1e-4);
}
