use std::f64::consts::PI;

use radialns_core::diagnostics::{compare_coefficients, total_mass_with, write_products_csv};
use radialns_core::{
    blowup_rate_estimate, center_density, surface_coefficient, total_mass, CoefficientMode, Error,
    FamilyParams, MassResult, RateVerdict, SolutionFamily,
};
use statrs::function::gamma::{gamma, gamma_ui};

fn iso(dim: u32, k: f64, lambda: f64, alpha: f64, a0: f64, a1: f64) -> FamilyParams {
    FamilyParams::IsothermalNs {
        dim,
        k,
        nu: 0.5,
        lambda,
        alpha,
        a0,
        a1,
    }
}

fn family(p: FamilyParams, horizon: f64) -> SolutionFamily {
    SolutionFamily::new(p, horizon).unwrap()
}

/// `α(N) e^α ½Γ(N/2) (2K/|λ|)^{N/2}`, the Gaussian moment in the similarity variable.
fn gaussian_mass(dim: u32, k: f64, lambda: f64, alpha: f64) -> f64 {
    let h = 0.5 * dim as f64;
    let sphere = if dim == 1 {
        1.0
    } else {
        2.0 * PI.powf(h) / gamma(h)
    };
    sphere * alpha.exp() * 0.5 * gamma(h) * (2.0 * k / lambda.abs()).powf(h)
}

fn finite(m: MassResult) -> (f64, f64) {
    match m {
        MassResult::Finite { value, quad_error } => (value, quad_error),
        other => panic!("expected a finite mass, got {other:?}"),
    }
}

#[test]
fn coefficient_examples() {
    let s = CoefficientMode::SurfaceMeasure;
    let b = CoefficientMode::ScaledBallVolume;
    assert_eq!(surface_coefficient(1, s).unwrap(), 1.0);
    assert_eq!(surface_coefficient(1, b).unwrap(), 1.0);
    assert_eq!(surface_coefficient(2, s).unwrap(), 2.0 * PI);
    assert_eq!(surface_coefficient(2, b).unwrap(), 2.0 * PI);
    assert!((surface_coefficient(3, s).unwrap() - 4.0 * PI).abs() < 1e-14);
    assert!((surface_coefficient(3, b).unwrap() - 4.0 * PI).abs() < 1e-14);
    let four = compare_coefficients(4).unwrap();
    assert!((four.surface_measure - 2.0 * PI * PI).abs() < 1e-13);
    assert!((four.scaled_ball_volume - 4.0 * PI * PI).abs() < 1e-13);
    assert!(!four.agree);
}

#[test]
fn non_negative_lambda_is_divergent() {
    for lambda in [0.0, 0.5, 2.0] {
        let m = total_mass(
            &family(iso(3, 1.0, lambda, 0.0, 1.0, 0.0), 0.5),
            0.0,
            1e-10,
            None,
        )
        .unwrap();
        assert!(matches!(m, MassResult::Divergent { .. }), "{m:?}");
    }
    let theta1 = FamilyParams::PressurelessTheta1 {
        dim: 2,
        kappa: 1.0,
        lambda: 1.0,
        alpha: 0.0,
        a0: 1.0,
        a1: 0.0,
    };
    assert!(matches!(
        total_mass(&family(theta1, 0.5), 0.0, 1e-10, None).unwrap(),
        MassResult::Divergent { .. }
    ));
}

#[test]
fn planar_gaussian_mass_is_pi() {
    let (v, e) = finite(
        total_mass(
            &family(iso(2, 1.0, -2.0, 0.0, 1.0, 0.0), 1.0),
            0.0,
            1e-10,
            None,
        )
        .unwrap(),
    );
    assert!((v - PI).abs() < 1e-10 * PI, "{v}");
    assert!(e < 1e-9);
}

#[test]
fn mass_matches_gaussian_moments() {
    let tol = 1e-10;
    for dim in 1..=5 {
        for k in [0.5, 1.0, 2.0] {
            for lambda in [-0.5, -1.0, -2.0] {
                let fam = family(iso(dim, k, lambda, 0.3, 1.3, 0.0), 0.5);
                let exact = gaussian_mass(dim, k, lambda, 0.3);
                // the mass is conserved, so any t in the domain works
                for t in [0.0, 0.2] {
                    let (v, _) = finite(total_mass(&fam, t, tol, None).unwrap());
                    assert!(
                        (v - exact).abs() <= 10.0 * tol * exact,
                        "N={dim} K={k} λ={lambda}: {v} vs {exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn mass_can_be_made_arbitrarily_small() {
    let (v, _) = finite(
        total_mass(
            &family(iso(3, 1.0, -1.0, -20.0, 1.0, 0.0), 0.5),
            0.0,
            1e-10,
            None,
        )
        .unwrap(),
    );
    let exact = gaussian_mass(3, 1.0, -1.0, -20.0);
    assert!(
        v > 0.0 && v < 1e-7 && (v - exact).abs() < 1e-9 * exact,
        "{v}"
    );
}

#[test]
fn scaled_ball_mode_scales_the_mass() {
    let fam = family(iso(4, 1.0, -1.0, 0.0, 1.0, 0.0), 0.5);
    let (s, _) =
        finite(total_mass_with(&fam, 0.0, 1e-10, None, CoefficientMode::SurfaceMeasure).unwrap());
    let (b, _) =
        finite(total_mass_with(&fam, 0.0, 1e-10, None, CoefficientMode::ScaledBallVolume).unwrap());
    assert!((b / s - 2.0).abs() < 1e-9);
}

#[test]
fn truncated_mass_is_monotone_and_converges() {
    let fam = family(iso(3, 1.0, -1.0, 0.0, 1.0, 0.0), 0.5);
    let exact = gaussian_mass(3, 1.0, -1.0, 0.0);
    let mut last = 0.0;
    for i in 0..=40 {
        let r_max = 0.2 * i as f64;
        let m = total_mass(&fam, 0.1, 1e-10, Some(r_max)).unwrap();
        let MassResult::Truncated { value, .. } = m else {
            panic!("{m:?}")
        };
        assert!(value >= last, "r_max = {r_max}");
        last = value;
    }
    assert!((last - exact).abs() < 1e-9 * exact);
    // partial Gaussian moment: α(3) ∫₀^R e^{-x²/2} x² dx
    let r: f64 = 1.5;
    let partial = 4.0 * PI * 0.5 * 2f64.powf(1.5) * (gamma(1.5) - gamma_ui(1.5, r * r / 2.0));
    let (a, _) = fam.scale_at(0.0).unwrap();
    let v = total_mass(&fam, 0.0, 1e-12, Some(r * a))
        .unwrap()
        .value()
        .unwrap();
    assert!((v - partial).abs() < 1e-10 * partial, "{v} vs {partial}");
}

#[test]
fn compact_support_mass() {
    // θ = 2, N = 1, λ = 2, κ = 1, α = 1: y = 1 - x²/2 on [0, √2], mass (2/3)√2
    let p = FamilyParams::PressurelessThetaNe1 {
        dim: 1,
        kappa: 1.0,
        theta: 2.0,
        beta: 0.0,
        lambda: 2.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    let (v, _) = finite(total_mass(&family(p, 0.5), 0.1, 1e-10, None).unwrap());
    let exact = 2.0 / 3.0 * 2f64.sqrt();
    assert!((v - exact).abs() < 1e-9 * exact, "{v}");
}

#[test]
fn theta_below_one_masses() {
    // compact support with θ < 1: the density blows up at the edge
    let edge = FamilyParams::PressurelessThetaNe1 {
        dim: 2,
        kappa: 1.0,
        theta: 0.5,
        beta: 0.0,
        lambda: -1.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    assert!(matches!(
        total_mass(&family(edge, 0.5), 0.0, 1e-8, None).unwrap(),
        MassResult::Divergent { .. }
    ));

    // θ = 0.5, N = 1, κ = 1, λ = 1: y = (1 + x²/2)^{-2}
    let tail = FamilyParams::PressurelessThetaNe1 {
        dim: 1,
        kappa: 1.0,
        theta: 0.5,
        beta: 0.0,
        lambda: 1.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    let (v, _) = finite(total_mass(&family(tail, 0.5), 0.0, 1e-10, None).unwrap());
    // ∫₀^∞ (1 + u²)^{-2} du = π/4, with x = √2 u
    let exact = 2f64.sqrt() * PI / 4.0;
    assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");

    // N = 3: ξ = -2/3, y = (1 + x²/6)^{-2}; 4π ∫ x² y dx = 4π 6^{3/2} π/4
    let three = FamilyParams::PressurelessThetaNe1 {
        dim: 3,
        kappa: 1.0,
        theta: 0.5,
        beta: 0.0,
        lambda: 1.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    let (v, _) = finite(total_mass(&family(three, 0.5), 0.0, 1e-10, None).unwrap());
    let exact = PI * PI * 6f64.powf(1.5);
    assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");

    // N = 4: the tail x^{-4} x³ is not integrable
    let slow = FamilyParams::PressurelessThetaNe1 {
        dim: 4,
        kappa: 1.0,
        theta: 0.5,
        beta: 0.0,
        lambda: 1.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    assert!(matches!(
        total_mass(&family(slow, 0.5), 0.0, 1e-8, None).unwrap(),
        MassResult::Divergent { .. }
    ));
}

#[test]
fn solid_core_mass_excludes_the_core() {
    let p = FamilyParams::SolidCore2d {
        k: 1.0,
        nu: 0.3,
        beta: 0.0,
        m0: 1.0,
        r0: 0.5,
        lambda: -2.0,
        alpha: 1.5,
        a0: 1.0,
        a1: 0.0,
    };
    // 2π e^{1.5} ∫_{1/2}^∞ x² e^{-x²} dx = 2π e^{1.5} (√π/4 erfc(1/2) + e^{-1/4}/4)
    let (v, _) = finite(total_mass(&family(p, 0.5), 0.0, 1e-10, None).unwrap());
    let erfc_half = gamma_ui(0.5, 0.25) / PI.sqrt();
    let exact = 2.0 * PI * 1.5f64.exp() * (PI.sqrt() / 4.0 * erfc_half + (-0.25f64).exp() / 4.0);
    assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
}

#[test]
fn mass_after_vanish_is_rejected() {
    let fam = family(iso(2, 1.0, 0.0, 0.0, 1.0, -1.0), 3.0);
    let (lo, _) = fam.vanish_bracket().unwrap();
    assert!(matches!(
        total_mass(&fam, lo + 0.1, 1e-8, None),
        Err(Error::AfterBlowup { .. })
    ));
}

#[test]
fn center_density_examples() {
    let fam = family(iso(3, 1.0, 0.0, 0.4, 2.0, 0.0), 1.0);
    for t in [0.0, 0.3, 0.9] {
        assert!((center_density(&fam, t).unwrap() - 0.4f64.exp() / 8.0).abs() < 1e-15);
    }

    let fam = family(iso(3, 1.0, 1.0, 0.0, 1.0, 0.0), 5.0);
    let (lo, _) = fam.vanish_bracket().unwrap();
    let mut last = 0.0;
    for i in 0..200 {
        let t = lo * i as f64 / 200.0;
        let rho = center_density(&fam, t).unwrap();
        let (a, _) = fam.scale_at(t).unwrap();
        assert!((rho * a.powi(3) - 1.0).abs() < 1e-12);
        assert!(rho > last, "t = {t}");
        last = rho;
    }

    let theta = FamilyParams::PressurelessThetaNe1 {
        dim: 2,
        kappa: 1.0,
        theta: 2.0,
        beta: 0.0,
        lambda: 1.0,
        alpha: 0.7,
        a0: 2.0,
        a1: 0.0,
    };
    assert!((center_density(&family(theta, 0.5), 0.0).unwrap() - 0.7 / 4.0).abs() < 1e-15);

    let core = FamilyParams::SolidCore2d {
        k: 1.0,
        nu: 0.3,
        beta: 0.0,
        m0: 1.0,
        r0: 0.5,
        lambda: 1.0,
        alpha: 1.0,
        a0: 1.0,
        a1: 0.0,
    };
    assert!(matches!(
        center_density(&family(core, 0.5), 0.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn rate_below_dimension_is_bounded_below() {
    let fam = family(iso(3, 1.0, 1.0, 0.0, 1.0, 0.0), 5.0);
    let est = blowup_rate_estimate(&fam, 2.5, 40).unwrap();
    assert_eq!(est.verdict, RateVerdict::BoundedBelow);
    let first = est.products.first().unwrap().product;
    let last = est.products.last().unwrap().product;
    assert!(last > 10.0 * first, "{first} -> {last}");
    assert!(est.products.iter().all(|s| s.t < est.t_lower));
    assert_eq!(est.verdict_at_lower, est.verdict);
    assert_eq!(est.verdict_at_upper, est.verdict);
}

#[test]
fn rate_at_dimension_is_not_bounded_below() {
    let fam = family(iso(3, 1.0, 1.0, 0.0, 1.0, 0.0), 5.0);
    let est = blowup_rate_estimate(&fam, 3.0, 40).unwrap();
    assert_eq!(est.verdict, RateVerdict::Inconclusive);
    let tail = &est.products[20..];
    assert!(tail.windows(2).all(|w| w[1].product < w[0].product));
}

#[test]
fn rate_for_linear_collapse() {
    // a = 1 - t exactly: product = (1 - t)^{-1/2}
    let fam = family(iso(2, 1.0, 0.0, 0.0, 1.0, -1.0), 3.0);
    let est = blowup_rate_estimate(&fam, 1.5, 20).unwrap();
    assert_eq!(est.verdict, RateVerdict::BoundedBelow);
    for s in &est.products {
        let exact = (1.0 - s.t).powf(-0.5);
        assert!(
            (s.product - exact).abs() < 1e-6 * exact,
            "t = {}: {} vs {exact}",
            s.t,
            s.product
        );
    }
    let mut csv = Vec::new();
    write_products_csv(&mut csv, &est.products).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 21);
}

#[test]
fn rate_rejects_bad_inputs() {
    let fam = family(iso(3, 1.0, 1.0, 0.0, 1.0, 0.0), 5.0);
    assert!(matches!(
        blowup_rate_estimate(&fam, 3.5, 10),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        blowup_rate_estimate(&fam, 2.0, 2),
        Err(Error::InvalidParameter(_))
    ));
    let no_vanish = family(iso(3, 1.0, -1.0, 0.0, 1.0, 0.0), 5.0);
    assert!(matches!(
        blowup_rate_estimate(&no_vanish, 2.0, 10),
        Err(Error::Domain(_))
    ));
}
