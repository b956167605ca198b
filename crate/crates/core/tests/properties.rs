use std::f64::consts::{PI, TAU};

use cylvort::confinement::{apply_mn, PiecewiseFn, RecursionParams, DEFAULT_MAX_DEGREE};
use cylvort::dynamics::{self_induced_velocities_with, simulate, step_with, Execution, Integrator, SimConfig};
use cylvort::field::{
    abs_first_moment, horizontal_center, recenter_to_zero, regularized_energy, total_mass, VortexBlob,
};
use cylvort::geometry::{k1_majorant, regularized_kernel, stream_kernel, Displacement};
use cylvort::scenario::{build_scenario, ScenarioKind, ScenarioSpec};
use cylvort::VorticityEnsemble;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn away_from_origin() -> impl Strategy<Value = (f64, f64)> {
    (-8.0..8.0f64, -TAU..TAU).prop_filter("away from the singularity", |(dx, dy)| {
        dx.abs() > 1e-3 || Displacement::new(*dx, *dy).dy.abs() > 1e-3
    })
}

proptest! {
    #[test]
    fn kernel_is_odd((dx, dy) in away_from_origin(), delta in 0.0..0.5f64) {
        let d = Displacement::new(dx, dy);
        let a = regularized_kernel(d, delta).unwrap();
        let b = regularized_kernel(-d, delta).unwrap();
        let scale = a.u1.hypot(a.u2).max(1.0);
        prop_assert!((a.u1 + b.u1).abs() <= 1e-14 * scale);
        prop_assert!((a.u2 + b.u2).abs() <= 1e-14 * scale);
    }

    #[test]
    fn kernel_is_periodic_in_y((dx, dy) in away_from_origin(), delta in 0.0..0.5f64, k in -3i32..3) {
        let a = regularized_kernel(Displacement::new(dx, dy), delta).unwrap();
        let b = regularized_kernel(Displacement::new(dx, dy + k as f64 * TAU), delta).unwrap();
        let scale = a.u1.hypot(a.u2).max(1.0);
        prop_assert!((a.u1 - b.u1).abs() <= 1e-12 * scale);
        prop_assert!((a.u2 - b.u2).abs() <= 1e-12 * scale);
    }

    #[test]
    fn kernel_is_the_perp_gradient_of_the_stream_kernel(
        dx in -6.0..6.0f64,
        dy in -PI..PI,
        delta in 0.05..0.5f64,
    ) {
        let h = 1e-5;
        let g = |a: f64, b: f64| stream_kernel(Displacement::new(a, b), delta).unwrap();
        let k = regularized_kernel(Displacement::new(dx, dy), delta).unwrap();
        let fd1 = -(g(dx, dy + h) - g(dx, dy - h)) / (2.0 * h);
        let fd2 = (g(dx + h, dy) - g(dx - h, dy)) / (2.0 * h);
        prop_assert!((fd1 - k.u1).hypot(fd2 - k.u2) <= 1e-6 * k.u1.hypot(k.u2));
    }

    #[test]
    fn mn_is_monotone(
        steps in prop::collection::vec((0.01..1.0f64, 0.0..0.3f64, 0.0..0.3f64), 1..5),
        base in 0.0..0.5f64,
        lift in 0.0..0.2f64,
        n in 0u32..3,
    ) {
        // h2 <= h1 pointwise: both piecewise linear on shared breakpoints.
        let mut bps = vec![0.0];
        let (mut v, mut w) = (vec![base], vec![base + lift]);
        for &(len, dv, dd) in &steps {
            bps.push(bps.last().unwrap() + len);
            v.push(v.last().unwrap() + dv);
            w.push(w.last().unwrap() + dv + dd);
        }
        let lin = |vals: &[f64]| {
            let pieces = vals.windows(2).map(|p| vec![p[0], p[1] - p[0]]).collect();
            PiecewiseFn::new(bps.clone(), pieces, *vals.last().unwrap()).unwrap()
        };
        let (h2, h1) = (lin(&v), lin(&w));
        let params = RecursionParams::new(2.0, 2.0, 1.0).unwrap();
        let g1 = apply_mn(&h1, n, &params, DEFAULT_MAX_DEGREE).unwrap();
        let g2 = apply_mn(&h2, n, &params, DEFAULT_MAX_DEGREE).unwrap();
        let t_max = 2.0 * bps.last().unwrap() + 4f64.powi(2 * n as i32);
        for k in 0..=200 {
            let t = t_max * k as f64 / 200.0;
            let (a, b) = (g1.eval(t), g2.eval(t));
            prop_assert!(a >= b - 1e-13 * a.abs().max(1e-300), "t = {}: {} < {}", t, a, b);
        }
        g1.check_nonneg_nondecreasing().unwrap();
    }
}

#[test]
fn k1_majorant_bounds_dx_k1_away_from_the_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let ax: f64 = rng.gen_range(1.0..30.0);
        let dx = if rng.gen_bool(0.5) { ax } else { -ax };
        let dy = rng.gen_range(-PI..PI);
        let k = regularized_kernel(Displacement::new(dx, dy), 0.0).unwrap();
        worst = worst.max((dx * k.u1).abs() / k1_majorant(dx));
    }
    assert!(worst <= 2.0, "worst ratio {worst}");
}

fn cloud(n: usize, seed: u64) -> VorticityEnsemble {
    build_scenario(&ScenarioSpec {
        kind: ScenarioKind::RandomCloud,
        blob_count: n,
        delta: 0.1,
        seed,
        ..ScenarioSpec::default()
    })
    .unwrap()
}

#[test]
fn functionals_are_translation_invariant_where_expected() {
    let ens = cloud(60, 3);
    let moved = ens.translated(0.75, 2.0).unwrap();
    assert!((total_mass(&moved) - total_mass(&ens)).abs() < 1e-15);
    let (e0, e1) = (regularized_energy(&ens).unwrap(), regularized_energy(&moved).unwrap());
    assert!((e0 - e1).abs() < 1e-12 * e0.abs());
    let shifted_h = horizontal_center(&ens) + 0.75 * total_mass(&ens);
    assert!((horizontal_center(&moved) - shifted_h).abs() < 1e-13);
    let centered = recenter_to_zero(&moved).unwrap();
    assert!(horizontal_center(&centered).abs() < 1e-15);
    assert!(abs_first_moment(&centered) > 0.0);
}

fn final_positions(ens: &VorticityEnsemble, dt: f64, integrator: Integrator) -> Vec<(f64, f64)> {
    let cfg = SimConfig {
        dt,
        t_end: 1.0,
        output_every: 1_000_000,
        integrator,
        ..SimConfig::default()
    };
    simulate(ens, &cfg)
        .unwrap()
        .final_state
        .blobs()
        .iter()
        .map(|b| (b.pos.x(), b.pos.y()))
        .collect()
}

fn distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let dy = (p.1 - q.1 + PI).rem_euclid(TAU) - PI;
            (p.0 - q.0).hypot(dy)
        })
        .fold(0.0, f64::max)
}

fn observed_order(integrator: Integrator, dts: [f64; 2]) -> f64 {
    let ens = VorticityEnsemble::new(
        vec![
            VortexBlob::new(-0.4, 0.0, 1.0, 0.2).unwrap(),
            VortexBlob::new(0.3, 0.5, 0.7, 0.2).unwrap(),
            VortexBlob::new(0.1, -0.6, 1.3, 0.2).unwrap(),
        ],
        true,
    )
    .unwrap();
    let reference = final_positions(&ens, 1.0 / 2048.0, Integrator::Rk4);
    let e0 = distance(&final_positions(&ens, dts[0], integrator), &reference);
    let e1 = distance(&final_positions(&ens, dts[1], integrator), &reference);
    (e0 / e1).log2()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let p = observed_order(Integrator::Rk4, [0.1, 0.05]);
    assert!(p >= 3.7, "observed order {p}");
}

#[test]
fn rk2_converges_at_second_order() {
    let p = observed_order(Integrator::Rk2, [0.05, 0.025]);
    assert!((1.8..2.3).contains(&p), "observed order {p}");
}

#[test]
fn point_reflection_commutes_with_the_flow() {
    let ens = cloud(40, 5);
    let reflect = |e: &VorticityEnsemble| {
        VorticityEnsemble::new(
            e.blobs()
                .iter()
                .map(|b| VortexBlob::new(-b.pos.x(), -b.pos.y(), b.circulation, b.core_radius).unwrap())
                .collect(),
            true,
        )
        .unwrap()
    };
    let mut a = ens.clone();
    let mut b = reflect(&ens);
    for _ in 0..50 {
        a = step_with(&a, 0.02, Integrator::Rk4, Execution::Sequential).unwrap();
        b = step_with(&b, 0.02, Integrator::Rk4, Execution::Sequential).unwrap();
    }
    let ra = reflect(&a);
    for (p, q) in ra.blobs().iter().zip(b.blobs()) {
        assert!((p.pos.x() - q.pos.x()).abs() < 1e-12);
        let dy = (p.pos.y() - q.pos.y() + PI).rem_euclid(TAU) - PI;
        assert!(dy.abs() < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    for n in [1, 2, 37, 300] {
        let ens = cloud(n, n as u64);
        let s = self_induced_velocities_with(&ens, Execution::Sequential).unwrap();
        let p = self_induced_velocities_with(&ens, Execution::Parallel).unwrap();
        assert_eq!(s, p);
    }
    // mixed core radii take the direct path for unequal pairs
    let mixed = VorticityEnsemble::new(
        (0..50)
            .map(|i| VortexBlob::new(0.02 * i as f64, 0.13 * i as f64, 1.0, 0.05 + 0.001 * (i % 3) as f64).unwrap())
            .collect(),
        true,
    )
    .unwrap();
    let s = self_induced_velocities_with(&mixed, Execution::Sequential).unwrap();
    let p = self_induced_velocities_with(&mixed, Execution::Parallel).unwrap();
    assert_eq!(s, p);
}

#[test]
fn pair_buffer_matches_direct_summation() {
    use cylvort::dynamics::velocity_at;
    let ens = cloud(80, 9);
    let fast = self_induced_velocities_with(&ens, Execution::Sequential).unwrap();
    for (i, b) in ens.blobs().iter().enumerate() {
        let direct = velocity_at(&ens, b.pos, Some(i)).unwrap();
        assert_eq!(direct, fast[i]);
    }
}
