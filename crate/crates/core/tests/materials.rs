use std::f64::consts::PI;

use prsant_core::materials::{drive_sheet_current, drude_ade_coefficients, graphene_sigma};
use prsant_core::{Complex64, DielectricSpec, GrapheneSpec};
use proptest::prelude::*;

fn graphene() -> GrapheneSpec {
    GrapheneSpec::default()
}

/// Lock-in amplitude of `samples` at angular frequency `w` over the last `periods` full periods.
fn lock_in(samples: &[f64], dt: f64, w: f64, periods: usize) -> Complex64 {
    let per = 2.0 * PI / (w * dt);
    let n = (per * periods as f64).round() as usize;
    let start = samples.len() - n;
    let sum: Complex64 = samples[start..]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = (start + i) as f64 * dt;
            v * Complex64::from_polar(1.0, -w * t)
        })
        .sum();
    2.0 * sum / n as f64
}

#[test]
fn ade_harmonic_response_matches_closed_form() {
    let g = graphene();
    let dt = 0.1e-15;
    let coeffs = drude_ade_coefficients(&g, dt).unwrap();
    let mut worst: f64 = 0.0;
    for f in [600e9, 700e9, 800e9, 900e9, 1000e9] {
        let w = 2.0 * PI * f;
        // 20 relaxation times lets the start-up transient die out.
        let steps = (20.0 * g.tau / dt) as usize;
        let field: Vec<f64> = (0..steps).map(|n| (w * n as f64 * dt).cos()).collect();
        let current = drive_sheet_current(&coeffs, &field);
        let measured = lock_in(&current, dt, w, 4);
        let exact = graphene_sigma(&g, f).unwrap();
        let err = (measured - exact).norm() / exact.norm();
        worst = worst.max(err);
    }
    assert!(worst < 0.01, "relative error {worst}");
}

#[test]
fn ade_error_shrinks_with_step() {
    let g = graphene();
    let f = 1e12;
    let exact = graphene_sigma(&g, f).unwrap();
    let err = |dt: f64| {
        let c = drude_ade_coefficients(&g, dt).unwrap();
        (c.discrete_response(f, dt) - exact).norm()
    };
    let (coarse, fine) = (err(20e-15), err(10e-15));
    let order = (coarse / fine).log2();
    assert!(order >= 1.0, "observed order {order}");
}

#[test]
fn dielectric_rejects_sub_unity_permittivity() {
    assert!(DielectricSpec::lossless(0.5).is_err());
    assert!(DielectricSpec::new(2.2, -0.01).is_err());
}

proptest! {
    #[test]
    fn conductivity_magnitude_falls_with_frequency(f in 1e9..5e12f64, df in 1e6..1e12f64) {
        let g = graphene();
        let a = graphene_sigma(&g, f).unwrap().norm();
        let b = graphene_sigma(&g, f + df).unwrap().norm();
        prop_assert!(b < a);
    }

    #[test]
    fn conductivity_is_hermitian(f in 1e9..5e12f64, mu in 0.05..1.0f64, tau in 1e-14..1e-11f64) {
        let g = GrapheneSpec::new(mu, tau, 300.0).unwrap();
        let p = graphene_sigma(&g, f).unwrap();
        let n = graphene_sigma(&g, -f).unwrap();
        prop_assert!((p.conj() - n).norm() <= 1e-14 * p.norm());
    }

    #[test]
    fn conductivity_is_passive(f in 0.0..1e13f64, mu in -1.0..1.0f64, t in 4.0..600.0f64) {
        let g = GrapheneSpec::new(mu, 1e-12, t).unwrap();
        prop_assert!(graphene_sigma(&g, f).unwrap().re > 0.0);
    }

    #[test]
    fn conductivity_is_even_in_chemical_potential(mu in 0.0..1.0f64, f in 1e9..2e12f64) {
        let a = graphene_sigma(&GrapheneSpec::new(mu, 1e-12, 300.0).unwrap(), f).unwrap();
        let b = graphene_sigma(&GrapheneSpec::new(-mu, 1e-12, 300.0).unwrap(), f).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm());
    }
}
