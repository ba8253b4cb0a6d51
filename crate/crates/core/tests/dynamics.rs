use proptest::prelude::*;
use trepr_core::liouville::state_defects;
use trepr_core::propagate::{evolve_model, populations, spectral_decompose, ProtocolPropagator};
use trepr_core::{c64, CMatrix, Model, ModelKind, ModelParams, Protocol};

fn params(kind: ModelKind, j: f64, v: f64, isc: f64, decay: f64, flip: f64) -> ModelParams {
    ModelParams {
        j_exchange: j,
        v_laser: v,
        gamma_isc: isc,
        gamma_decay: decay,
        gamma_triplet_flip: flip,
        ..ModelParams::baseline(kind)
    }
}

/// `Tr[L(X)] = 0` for every X, i.e. `vec(I)ᵀ L = 0` under column stacking.
fn trace_annihilator_defect(l: &CMatrix, d: usize) -> f64 {
    let n = d * d;
    (0..n)
        .map(|col| {
            (0..d)
                .map(|i| l[(i * d + i, col)])
                .fold(c64(0.0, 0.0), |a, b| a + b)
                .norm()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn srts_states_stay_physical(
        j in -200.0f64..200.0,
        v in 0.1f64..10.0,
        isc in 0.1f64..50.0,
        decay in 0.01f64..10.0,
        flip in 0.0f64..100.0,
    ) {
        let model = Model::new(params(ModelKind::Srts, j, v, isc, decay, flip)).unwrap();
        let protocol = Protocol::with_log_grid(8.0, 500.0, 12).unwrap();
        let tr = evolve_model(&model, &protocol).unwrap();
        for (s, p) in tr.states.iter().zip(&tr.populations) {
            let d = state_defects(s.matrix()).unwrap();
            prop_assert!(d.trace_error < 1e-9, "{:?}", d);
            prop_assert!(d.hermiticity < 1e-10, "{:?}", d);
            prop_assert!(d.min_eigenvalue > -1e-9, "{:?}", d);
            prop_assert!((p.sum() - 1.0).abs() < 1e-9);
            prop_assert!(p.gs >= -1e-12 && p.es >= -1e-12 && p.t >= -1e-12);
        }
    }

    #[test]
    fn generators_preserve_trace_and_are_stable(
        j in -200.0f64..200.0,
        isc in 0.1f64..50.0,
        flip in 0.0f64..100.0,
    ) {
        let model = Model::new(params(ModelKind::Srts, j, 1.0, isc, 0.5, flip)).unwrap();
        for laser in [false, true] {
            let l = model.liouvillian(laser);
            let scale = l.matrix().norm_max();
            prop_assert!(trace_annihilator_defect(l.matrix(), model.dim()) < 1e-12 * scale);
            let spec = spectral_decompose(l).unwrap();
            prop_assert!(spec.spectral_abscissa() < 1e-9 * scale);
        }
    }
}

#[test]
fn drts_generator_preserves_trace() {
    let model = Model::new(ModelParams::drts()).unwrap();
    let l = model.liouvillian(true);
    assert!(trace_annihilator_defect(l.matrix(), model.dim()) < 1e-12 * l.matrix().norm_max());
}

#[test]
fn sample_set_does_not_change_states() {
    let model = Model::new(ModelParams::srts()).unwrap();
    let sparse = Protocol::new(8.0, 100.0, vec![3.0, 50.0]).unwrap();
    let dense = Protocol::with_log_grid(8.0, 100.0, 40).unwrap();
    let a = evolve_model(&model, &sparse).unwrap();
    let b = evolve_model(&model, &dense).unwrap();
    let prop = ProtocolPropagator::new(&model, &model.initial_state(), 8.0).unwrap();
    for (t, s) in a.times.iter().zip(&a.states) {
        assert_eq!(s, &prop.state_at(*t).unwrap());
    }
    assert_eq!(b.times.len(), b.states.len());
}

#[test]
fn without_laser_nothing_happens() {
    let mut p = ModelParams::drts();
    p.v_laser = 0.0;
    let model = Model::new(p).unwrap();
    let tr = evolve_model(&model, &Protocol::with_log_grid(8.0, 1000.0, 20).unwrap()).unwrap();
    for s in &tr.states {
        let pop = populations(&model.space, s).unwrap();
        assert!((pop.gs - 1.0).abs() < 1e-10 && pop.es == 0.0 && pop.t == 0.0, "{pop:?}");
    }
}
