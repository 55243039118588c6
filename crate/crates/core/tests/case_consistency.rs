//! Finite-difference self-consistency of every shipped analytic case, plus
//! the spot values and series identities of the shear-loaded beam.

use std::sync::Arc;
use swg_core::{get_case, verify_case_consistency, CaseName, Point};

#[test]
fn all_exact_cases_pass_consistency() {
    for name in [
        CaseName::Tc1,
        CaseName::Tc2,
        CaseName::Tc3Mixed,
        CaseName::Tc3d1,
        CaseName::Tc3d2,
        CaseName::ShearBeam,
    ] {
        let case = get_case(name, None, None).unwrap();
        let report = verify_case_consistency(&case, 200, 42);
        assert!(report.applicable);
        assert!(
            report.pass(),
            "{}: stress dev {:.3e}, equilibrium dev {:.3e}, first failure {:?}",
            name.as_str(),
            report.max_stress_residual,
            report.max_equilibrium_residual,
            report.failures.first()
        );
    }
}

#[test]
fn tc2_in_the_incompressible_limit_stays_consistent() {
    // lambda ~ 1.7e6 amplifies the finite-difference error of div(u), so the
    // constitutive residual needs a looser bound here; equilibrium does not
    let case = get_case(CaseName::Tc2, None, Some(0.4999999)).unwrap();
    let report = verify_case_consistency(&case, 200, 7);
    assert!(report.max_stress_residual < 1e-4);
    assert!(report.max_equilibrium_residual < 1e-5);
}

#[test]
fn cook_has_no_exact_fields() {
    let case = get_case(CaseName::Cook, None, None).unwrap();
    let report = verify_case_consistency(&case, 50, 1);
    assert!(!report.applicable);
    assert_eq!(report.samples, 0);
    assert!((case.material.youngs - 1.124_999_981_25).abs() < 1e-15);
    assert!((case.material.poisson - 0.499_999_975).abs() < 1e-15);
    assert_eq!(case.reference_tip, Some(16.442));
}

#[test]
fn tc2_pressure_is_two() {
    let case = get_case(CaseName::Tc2, None, None).unwrap();
    let p = case.pressure.as_ref().unwrap();
    for q in [[0.3, 0.8, 0.0], [0.92, 0.11, 0.0]] {
        assert!((p(&q) - 2.0).abs() < 1e-12);
    }
}

#[test]
fn tc3_mixed_pressure_is_zero() {
    let case = get_case(CaseName::Tc3Mixed, None, None).unwrap();
    let p = case.pressure.as_ref().unwrap();
    assert_eq!(p(&[0.5, 0.25, 0.0]), 0.0);
}

#[test]
fn tc1_body_force_matches_stress_divergence_fd() {
    // oracle: central finite differences of sigma, step 1e-5
    let case = get_case(CaseName::Tc1, None, None).unwrap();
    let stress = case.stress.as_ref().unwrap();
    let f = (case.body_force)(&[0.5, 0.5, 0.0]);
    let h = 1e-5;
    let mut div = [0.0f64; 2];
    for j in 0..2 {
        let mut xp = [0.5, 0.5, 0.0];
        let mut xm = xp;
        xp[j] += h;
        xm[j] -= h;
        let sp = stress(&xp);
        let sm = stress(&xm);
        for i in 0..2 {
            div[i] += (sp[i][j] - sm[i][j]) / (2.0 * h);
        }
    }
    for i in 0..2 {
        assert!((f[i] + div[i]).abs() < 1e-6, "component {i}");
    }
}

#[test]
fn shear_beam_stress_structure() {
    let case = get_case(CaseName::ShearBeam, None, None).unwrap();
    let stress = case.stress.as_ref().unwrap();
    for q in [[0.2, -0.7, 3.0], [-0.9, 0.4, 8.5], [0.0, 1.0, 4.0]] {
        let s = stress(&q);
        assert_eq!(s[0][0], 0.0);
        assert_eq!(s[1][1], 0.0);
        assert_eq!(s[0][1], 0.0);
    }
    // sigma_33 at (0, 1, 4) = (3 F / 4) y z with F = 0.1
    let s = stress(&[0.0, 1.0, 4.0]);
    assert!((s[2][2] - 0.3).abs() < 1e-14);
}

#[test]
fn shear_beam_psi_antiderivative_of_sigma23() {
    // recover psi from u_3 minus its polynomial part and difference it in y
    let case = get_case(CaseName::ShearBeam, None, None).unwrap();
    let u = case.displacement.clone().unwrap();
    let stress = case.stress.clone().unwrap();
    let (e_mod, nu) = (case.material.youngs, case.material.poisson);
    let f_load = 0.1;
    let psi = Arc::new(move |x: f64, y: f64| -> f64 {
        let z = 2.0; // psi is z-independent
        let poly =
            f_load / (8.0 * e_mod) * (3.0 * y * z * z + nu * y * (y * y - 3.0 * x * x));
        let u3 = u(&[x, y, z])[2];
        (u3 - poly) * e_mod / (2.0 * (1.0 + nu))
    });
    let h = 1e-6;
    let pts = [(0.3, 0.2), (-0.5, 0.6), (0.1, -0.4), (0.77, 0.05)];
    for (x, y) in pts {
        let dpsi = (psi(x, y + h) - psi(x, y - h)) / (2.0 * h);
        let s23 = stress(&[x, y, 1.0])[1][2];
        assert!((dpsi - s23).abs() < 1e-8, "at ({x},{y}): {dpsi} vs {s23}");
    }
    // gauge: psi(x, 0) = 0
    assert!(psi(0.4, 0.0).abs() < 1e-14);
}

#[test]
fn wrong_body_force_is_flagged() {
    let mut case = get_case(CaseName::Tc1, None, None).unwrap();
    case.body_force = Arc::new(|_: &Point| [1.0, 1.0, 0.0]);
    let report = verify_case_consistency(&case, 50, 3);
    assert!(!report.pass());
    assert!(report
        .failures
        .iter()
        .any(|f| f.check == "equilibrium"));
}

#[test]
fn material_overrides_reshape_tc2() {
    let a = get_case(CaseName::Tc2, None, Some(0.45)).unwrap();
    let b = get_case(CaseName::Tc2, None, Some(0.4999999)).unwrap();
    let ua = a.displacement.as_ref().unwrap()(&[0.5, 0.5, 0.0]);
    let ub = b.displacement.as_ref().unwrap()(&[0.5, 0.5, 0.0]);
    // the lambda^{-1} (x, y) mode shrinks as nu -> 1/2
    assert!((ua[0] - ub[0]).abs() > 1e-3);
}
