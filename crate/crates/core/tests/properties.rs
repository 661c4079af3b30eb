use std::f64::consts::PI;

use cmclab::geometry::{gauss_and_sigma, mean_curvature, unit_normal};
use cmclab::harness::cauchy_schwarz_sides;
use cmclab::persist::{read_field, write_field};
use cmclab::solver::jacobian_apply;
use cmclab::{boundary_integral, build_frame, surface_integral, Derivatives, DiskGrid, HeightField};
use proptest::prelude::*;

fn derivatives() -> impl Strategy<Value = Derivatives> {
    (-3.0..3.0f64, -3.0..3.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(fx, fy, fxx, fxy, fyy)| Derivatives { fx, fy, fxx, fxy, fyy })
}

fn small_grid() -> impl Strategy<Value = DiskGrid> {
    (0.5..3.0f64, 4usize..12, 4usize..12).prop_map(|(r, nr, half)| DiskGrid::new(r, nr, 2 * half).unwrap())
}

/// Random low-mode field with zero boundary values on `grid`.
fn smooth_field(grid: DiskGrid) -> impl Strategy<Value = (DiskGrid, HeightField)> {
    prop::collection::vec((-0.3..0.3f64, 0.0..6.3f64), 3).prop_map(move |terms| {
        let field = HeightField::from_polar_homogeneous(&grid, |rho, theta| {
            let s = rho / grid.radius();
            terms
                .iter()
                .enumerate()
                .map(|(m, &(c, phase))| c * grid.radius() * s.powi(m as i32) * (1.0 - s * s) * (m as f64 * theta + phase).cos())
                .sum()
        });
        (grid, field)
    })
}

proptest! {
    #[test]
    fn normal_is_unit_and_vertical_is_inverse_w(fx in -50.0..50.0f64, fy in -50.0..50.0f64) {
        let n = unit_normal(fx, fy);
        let w = (1.0 + fx * fx + fy * fy).sqrt();
        prop_assert!((n.norm() - 1.0).abs() < 1e-12);
        prop_assert!((n.z - 1.0 / w).abs() < 1e-12);
        prop_assert!(n.z > 0.0);
    }

    #[test]
    fn sigma_identity_and_nonnegative_deficit(d in derivatives()) {
        let h = mean_curvature(&d);
        let (k, sigma_sq) = gauss_and_sigma(&d, h);
        prop_assert!((sigma_sq - (4.0 * h * h - 2.0 * k)).abs() <= 1e-12 * (1.0 + sigma_sq.abs()));
        prop_assert!(sigma_sq - 2.0 * h * h >= -1e-12 * (1.0 + sigma_sq.abs()));
    }

    #[test]
    fn boundary_integral_kills_harmonics(g in small_grid(), c in -5.0..5.0f64, k in 1usize..6) {
        prop_assume!(k < g.n_theta() / 2);
        let cosines: Vec<f64> = (0..g.n_theta()).map(|j| (k as f64 * g.theta(j)).cos()).collect();
        let constant = vec![c; g.n_theta()];
        prop_assert!(boundary_integral(&cosines, &g).unwrap().abs() < 1e-12);
        let length = boundary_integral(&constant, &g).unwrap();
        prop_assert!((length - 2.0 * PI * g.radius() * c).abs() <= 1e-12 * (1.0 + length.abs()));
    }

    #[test]
    fn surface_integral_is_linear_and_monotone(
        (g, field) in small_grid().prop_flat_map(smooth_field),
        a in -3.0..3.0f64,
        seed in prop::collection::vec(-1.0..1.0f64, 1..400),
    ) {
        let frame = build_frame(&field, &g).unwrap();
        let phi: Vec<f64> = (0..g.len()).map(|k| seed[k % seed.len()]).collect();
        let psi: Vec<f64> = (0..g.len()).map(|k| seed[(k * 7 + 3) % seed.len()].abs()).collect();
        let i_phi = surface_integral(&phi, &frame, &g).unwrap();
        let i_psi = surface_integral(&psi, &frame, &g).unwrap();
        let combo: Vec<f64> = phi.iter().zip(&psi).map(|(p, q)| a * p + q).collect();
        let i_combo = surface_integral(&combo, &frame, &g).unwrap();
        prop_assert!((i_combo - (a * i_phi + i_psi)).abs() <= 1e-10 * (1.0 + i_combo.abs()));
        prop_assert!(i_psi >= 0.0);
        let area = surface_integral(&vec![1.0; g.len()], &frame, &g).unwrap();
        prop_assert!(area >= PI * g.radius().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn cauchy_schwarz_slack_is_nonnegative(
        g in small_grid(),
        seed in prop::collection::vec(-2.0..2.0f64, 1..64),
    ) {
        let trace: Vec<f64> = (0..g.n_theta()).map(|j| seed[j % seed.len()]).collect();
        let (lhs, rhs) = cauchy_schwarz_sides(&trace, &g).unwrap();
        prop_assert!(lhs - rhs >= -1e-10);
    }

    #[test]
    fn persistence_round_trip_is_exact(
        g in small_grid(),
        seed in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..64),
        with_boundary in any::<bool>(),
    ) {
        let values: Vec<f64> = (0..g.len()).map(|k| seed[k % seed.len()]).collect();
        let boundary: Vec<f64> =
            (0..g.n_theta()).map(|j| if with_boundary { seed[(j + 1) % seed.len()] } else { 0.0 }).collect();
        let field = HeightField::from_parts(&g, values, boundary).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &field, &g).unwrap();
        let (g2, f2) = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(g2, g);
        for (a, b) in field.values().iter().zip(f2.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in field.boundary().iter().zip(f2.boundary()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn jacobian_is_linear_in_the_direction(
        (g, field) in small_grid().prop_flat_map(smooth_field),
        a in -2.0..2.0f64,
        seed in prop::collection::vec(-1.0..1.0f64, 1..64),
    ) {
        let u: Vec<f64> = (0..g.len()).map(|k| seed[k % seed.len()]).collect();
        let v: Vec<f64> = (0..g.len()).map(|k| seed[(k + 5) % seed.len()]).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + y).collect();
        let ju = jacobian_apply(&field, &u, -0.5, &g).unwrap();
        let jv = jacobian_apply(&field, &v, -0.5, &g).unwrap();
        let jw = jacobian_apply(&field, &w, -0.5, &g).unwrap();
        let scale = jw.iter().chain(&ju).chain(&jv).fold(1.0_f64, |m, x| m.max(x.abs()));
        for k in 0..g.len() {
            prop_assert!((jw[k] - (a * ju[k] + jv[k])).abs() <= 1e-10 * scale);
        }
    }
}
