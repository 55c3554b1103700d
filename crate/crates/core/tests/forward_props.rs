//! Far-field Born-split properties at fixed realizations.

use num_complex::Complex64;
use scatterlab_core::forward::{
    born_far_terms, born_solve, far_field, incident_field, Frequency, IncidentWave,
    ResolventOperator,
};
use scatterlab_core::gridfield::{
    make_grid, strength_preset, synthesize_potential, PotentialRealization, PresetId,
};
use scatterlab_core::stats::linear_fit;

/// |u2plus| shrinks along a dyadic k sweep with a fitted exponent within
/// the margin of the second-order bound (-2 - 6 alpha, alpha = 0 here).
#[test]
fn u2plus_decays_along_dyadic_sweep() {
    let grid = make_grid(32, 0.5).unwrap();
    let m = 3.5;
    let h = strength_preset(PresetId::SingleBump, grid, 1.0e5, 0.22).unwrap();
    let v = synthesize_potential(&h, m, 5).unwrap();
    let theta = [0.0, 0.0, 1.0];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in [6.0, 12.0, 24.0] {
        let inc = IncidentWave::new(theta, Frequency::real(k).unwrap()).unwrap();
        let terms = born_far_terms(&v, &inc, [0.0, 0.0, -1.0], 1e-10).unwrap();
        xs.push(k.ln());
        ys.push(terms.u2plus.norm().ln());
    }
    assert!(ys[2] < ys[0], "|u2plus| did not shrink: {ys:?}");
    let (slope, _) = linear_fit(&xs, &ys);
    // Bound exponent -2 with a one-unit margin for single-realization
    // fluctuation of the underlying V_hat factors.
    assert!(slope <= -1.0, "fitted exponent {slope}");
}

/// Doubling V doubles the zeroth far-field term exactly.
#[test]
fn u0_is_exactly_linear_in_v() {
    let grid = make_grid(16, 0.7).unwrap();
    let h = strength_preset(PresetId::SingleBump, grid, 1.0, 0.3).unwrap();
    let v = synthesize_potential(&h, 3.0, 17).unwrap();
    let doubled: Vec<f64> = v.values().iter().map(|x| 2.0 * x).collect();
    let v2 = PotentialRealization::from_values(h.clone(), 3.0, 17, doubled).unwrap();
    let k = Complex64::new(7.0, 0.0);
    let inc = IncidentWave::new([0.0, 1.0, 0.0], Frequency::new(k).unwrap()).unwrap();
    let u_inc = incident_field(&v, &inc);
    let a = far_field(&v, &u_inc, [0.0, -1.0, 0.0], k);
    let b = far_field(&v2, &u_inc, [0.0, -1.0, 0.0], k);
    assert_eq!(b, a * 2.0);
}

/// Born with zero terms is the single application R0(V u_inc).
#[test]
fn born_zero_terms_is_the_born_approximation() {
    let grid = make_grid(16, 0.7).unwrap();
    let h = strength_preset(PresetId::SingleBump, grid, 1.0, 0.3).unwrap();
    let v = synthesize_potential(&h, 3.0, 23).unwrap();
    let k = 6.0;
    let inc = IncidentWave::new([1.0, 0.0, 0.0], Frequency::real(k).unwrap()).unwrap();
    let u_sc = born_solve(&v, &inc, 0).unwrap();
    let op = ResolventOperator::new(grid, Complex64::new(k, 0.0), 1.4).unwrap();
    let u_inc = incident_field(&v, &inc);
    let vu: Vec<Complex64> = v
        .values()
        .iter()
        .zip(&u_inc.values)
        .map(|(p, u)| u * *p)
        .collect();
    let direct = op.apply(&vu);
    for (a, b) in u_sc.values.iter().zip(&direct) {
        assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300));
    }
}
