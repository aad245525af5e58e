use ph_core::plant::{BeamParams, BeamPlant, PlantModel, PlantState, PlateParams, PlatePlant};
use ph_core::scenario::{Scenario, ScenarioKind, ScenarioParams};
use ph_core::sim::{simulate, SimOptions, Trajectory};
use ph_core::verify;

fn open_loop(kind: ScenarioKind, periods: f64, dt: Option<f64>) -> (Scenario, Trajectory) {
    let s = Scenario::build(ScenarioParams::defaults(kind)).unwrap();
    let opts = SimOptions {
        t_final: periods * s.fundamental_period().unwrap(),
        dt: dt.unwrap_or_else(|| s.auto_dt().unwrap()),
        log_every: 50,
        integrator: s.params.integrator,
    };
    let traj = simulate(&s.closed_loop, s.initial.clone(), &opts).unwrap();
    (s, traj)
}

fn rel_energy_change(t: &Trajectory) -> f64 {
    let h0 = t.records[0].h;
    t.records.iter().map(|r| (r.h - h0).abs()).fold(0.0, f64::max) / h0
}

#[test]
fn beam_conserves_energy_over_ten_periods() {
    let (_, t) = open_loop(ScenarioKind::BeamOpenLoop, 10.0, None);
    assert!(t.records[0].h > 0.0);
    assert!(rel_energy_change(&t) <= 1e-5, "{}", rel_energy_change(&t));
    assert!(t.records.iter().all(|r| r.u.iter().all(|u| *u == 0.0)));
}

#[test]
fn plate_conserves_energy_over_ten_periods() {
    let (_, t) = open_loop(ScenarioKind::PlateOpenLoop, 10.0, None);
    assert!(rel_energy_change(&t) <= 1e-5, "{}", rel_energy_change(&t));
}

#[test]
fn halving_the_step_shrinks_the_energy_error() {
    let (s, _) = open_loop(ScenarioKind::BeamOpenLoop, 0.0, None);
    let dt = s.auto_dt().unwrap();
    let coarse = rel_energy_change(&open_loop(ScenarioKind::BeamOpenLoop, 2.0, Some(dt)).1);
    let fine = rel_energy_change(&open_loop(ScenarioKind::BeamOpenLoop, 2.0, Some(dt / 2.0)).1);
    assert!(coarse > 0.0);
    assert!(fine <= coarse / 16.0, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn ten_times_the_stable_step_blows_up() {
    let s = Scenario::build(ScenarioParams::defaults(ScenarioKind::BeamOpenLoop)).unwrap();
    let opts = SimOptions {
        t_final: 1.0,
        dt: 10.0 * s.auto_dt().unwrap() / 0.8,
        log_every: 1,
        integrator: s.params.integrator,
    };
    let err = simulate(&s.closed_loop, s.initial.clone(), &opts).unwrap_err();
    assert!(matches!(err, ph_core::Error::BlowUp { .. }), "{err}");
}

fn sampled_state(n: usize, seed: f64) -> PlantState {
    PlantState {
        w: (0..n).map(|k| 0.01 * (seed * k as f64 + 0.3).sin()).collect(),
        p: (0..n).map(|k| 0.02 * (1.7 * seed * k as f64).cos()).collect(),
    }
}

/// Ḣ = Σ W (K w/W)·ẇ + Σ W (p/m)·ṗ computed from the assembled parts, against u·y.
fn power_gap(plant: &impl PlantModel, seed: f64, u: &[f64]) -> (f64, f64) {
    let d = plant.discrete();
    let mut s = sampled_state(d.node_count(), seed);
    d.apply_bcs(&mut s.w);
    d.apply_bcs(&mut s.p);
    let (wdot, pdot) = d.rhs(&s, u).unwrap();
    let mut kw = vec![0.0; d.node_count()];
    d.energy().apply(&s.w, &mut kw);
    let hdot: f64 = (0..d.node_count())
        .map(|k| kw[k] * wdot[k] + d.weights()[k] * s.p[k] / d.mass()[k] * pdot[k])
        .sum();
    let y = d.outputs(&s).unwrap();
    let supplied: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
    let scale: f64 = u.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum();
    ((hdot - supplied).abs(), scale)
}

#[test]
fn supplied_power_matches_the_energy_rate() {
    let plate = PlatePlant::new(PlateParams::default()).unwrap();
    let beam = BeamPlant::new(BeamParams::default()).unwrap();
    for (i, seed) in [0.37, 1.1, 2.9].into_iter().enumerate() {
        let u = [0.5 + i as f64, -0.8 * (i as f64 + 1.0)];
        for (gap, scale) in [power_gap(&plate, seed, &u), power_gap(&beam, seed, &u)] {
            assert!(scale > 0.0);
            assert!(gap <= 1e-8 * scale, "gap {gap:e} scale {scale:e}");
        }
    }
}

#[test]
fn power_identity_suite() {
    let r = verify::power_identity().unwrap();
    assert!(r.passes(), "{:?}", r.failures());
}
