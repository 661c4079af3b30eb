//! Discrete geometry of sampled caps against closed-form sphere geometry.

use std::f64::consts::PI;

use cmclab::geometry::{laplace_beltrami, umbilicity_deficit};
use cmclab::harness::estimated_orders;
use cmclab::{
    boundary_trace, build_frame, cap_from_h, cap_height_field, surface_integral, DiskGrid, HeightField,
};

const R: f64 = 2.0;

/// Height of the sphere of radius 2 through the unit circle, written out directly.
fn cap_height(rho: f64) -> f64 {
    (R * R - rho * rho).sqrt() - (R * R - 1.0).sqrt()
}

fn grid(nr: usize) -> DiskGrid {
    DiskGrid::new(1.0, nr, 2 * nr).unwrap()
}

fn sampled_cap(g: &DiskGrid) -> HeightField {
    HeightField::from_polar_homogeneous(g, |rho, _| cap_height(rho))
}

fn max_over<F: Fn(usize, usize, usize) -> f64>(g: &DiskGrid, f: F) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..g.n_rho() {
        for j in 0..g.n_theta() {
            m = m.max(f(i, j, g.index(i, j)));
        }
    }
    m
}

#[test]
fn sampled_cap_matches_catalog() {
    let g = grid(32);
    let a = sampled_cap(&g);
    let b = cap_height_field(&cap_from_h(1.0, -0.5).unwrap(), &g).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() < 1e-15);
    }
    assert!((cap_height(0.0) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
}

#[test]
fn cap_gradient_converges_at_second_order() {
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let frame = build_frame(&sampled_cap(&g), &g).unwrap();
            max_over(&g, |i, j, k| {
                let (x, y) = g.position(i, j);
                let s = (R * R - g.rho(i).powi(2)).sqrt();
                let d = frame.derivatives[k];
                (d.fx + x / s).abs().max((d.fy + y / s).abs())
            })
        })
        .collect();
    for p in estimated_orders(&errors).into_iter().flatten() {
        assert!(p > 1.8, "{errors:?}");
    }
}

#[test]
fn cap_is_umbilic_with_curvature_of_the_sphere() {
    let g = grid(128);
    let frame = build_frame(&sampled_cap(&g), &g).unwrap();
    let worst_h = max_over(&g, |_, _, k| (frame.mean[k] + 1.0 / R).abs());
    let worst_k = max_over(&g, |_, _, k| (frame.gauss[k] - 1.0 / (R * R)).abs());
    let worst_s = max_over(&g, |_, _, k| (frame.sigma_sq[k] - 2.0 / (R * R)).abs());
    assert!(worst_h < 1e-4, "{worst_h}");
    assert!(worst_k < 1e-4, "{worst_k}");
    assert!(worst_s < 1e-4, "{worst_s}");
    let worst_v = max_over(&g, |i, _, k| (frame.vertical[k] - (R * R - g.rho(i).powi(2)).sqrt() / R).abs());
    assert!(worst_v < 1e-5, "{worst_v}");

    let (pointwise, _) = umbilicity_deficit(&frame, &g).unwrap();
    let worst = pointwise.iter().copied().fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn boundary_normal_of_the_cap() {
    let g = grid(64);
    let field = sampled_cap(&g);
    let frame = build_frame(&field, &g).unwrap();
    let trace = boundary_trace(&field, &frame, &g).unwrap();
    for (p, n) in trace.position.iter().zip(&trace.normal) {
        let err = (n.x - p.x / R).abs().max((n.y - p.y / R).abs()).max((n.z - 3f64.sqrt() / 2.0).abs());
        assert!(err < 1e-5, "{err}");
    }
}

#[test]
fn cap_boundary_trace_values() {
    let g = grid(128);
    let field = sampled_cap(&g);
    let frame = build_frame(&field, &g).unwrap();
    let trace = boundary_trace(&field, &frame, &g).unwrap();
    for j in 0..g.n_theta() {
        assert!((trace.nu_dot_a[j] - 0.5).abs() < 1e-6, "{}", trace.nu_dot_a[j]);
        assert!((trace.sigma_nn[j] + 0.5).abs() < 1e-4, "{}", trace.sigma_nn[j]);
        assert!((trace.dn_nu_dot_a[j] - 0.25).abs() < 1e-4, "{}", trace.dn_nu_dot_a[j]);
    }
}

#[test]
fn cap_area_converges() {
    let exact = 2.0 * PI * R * (R - (R * R - 1.0).sqrt());
    assert!((exact - 3.36715).abs() < 1e-5);
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let frame = build_frame(&sampled_cap(&g), &g).unwrap();
            (surface_integral(&vec![1.0; g.len()], &frame, &g).unwrap() - exact).abs()
        })
        .collect();
    for p in estimated_orders(&errors).into_iter().flatten() {
        assert!(p > 1.9, "{errors:?}");
    }
}

#[test]
fn flat_laplacian_of_rho_squared() {
    let g = grid(64);
    let frame = build_frame(&HeightField::zeros(&g), &g).unwrap();
    let u: Vec<f64> = (0..g.n_rho())
        .flat_map(|i| std::iter::repeat_n(g.rho(i).powi(2), g.n_theta()))
        .collect();
    let lap = laplace_beltrami(&u, &frame, &g).unwrap();
    let worst = lap.iter().fold(0.0_f64, |m, v| m.max((v - 4.0).abs()));
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn cap_jacobi_residual_shrinks() {
    let residual = |n: usize| {
        let g = grid(n);
        let frame = build_frame(&sampled_cap(&g), &g).unwrap();
        let lap = laplace_beltrami(&frame.vertical, &frame, &g).unwrap();
        let interior = (g.n_rho() - 2) * g.n_theta();
        let sum: f64 = (0..interior)
            .map(|k| (lap[k] + 2.0 / (R * R) * frame.vertical[k]).powi(2) * g.cell_area(k / g.n_theta()))
            .sum();
        sum.sqrt()
    };
    let r: Vec<f64> = [16, 32, 64].iter().map(|&n| residual(n)).collect();
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
}
