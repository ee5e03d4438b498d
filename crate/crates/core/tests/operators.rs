use proptest::prelude::*;
use wavebem::assembly::{assemble, assemble_rhs, project_qh, solve, Formulation, GalerkinSystem};
use wavebem::experiments::{interior_representation_error, traveling_identity_residual};
use wavebem::wave_ops::{apply_dt_v, apply_v, case_traveling, direct_rhs, ManufacturedCase};
use wavebem::{LateralMesh, ProblemGeometry, Side};

fn pulse_case(l: f64, t: f64, width: f64) -> ManufacturedCase {
    let p = ProblemGeometry::new(l, t).unwrap();
    // (tau / width)^3 (1 - tau / width)^3
    let coeffs: Vec<f64> =
        [0.0, 0.0, 0.0, 1.0, -3.0, 3.0, -1.0].iter().enumerate().map(|(k, c)| c / width.powi(k as i32)).collect();
    case_traveling(p, &coeffs, width).unwrap()
}

#[test]
fn direct_identity_on_several_geometries() {
    for (l, t) in [(3.0, 6.0), (1.0, 0.5), (1.0, 7.3), (2.0, 2.0)] {
        let p = ProblemGeometry::new(l, t).unwrap();
        assert!(traveling_identity_residual(p, direct_rhs, 500).unwrap() <= 1e-12, "L = {l}, T = {t}");
        assert!(interior_representation_error(p, 50, 3).unwrap() <= 1e-12, "L = {l}, T = {t}");
    }
}

#[test]
fn energetic_solution_of_a_pulse_converges() {
    let case = pulse_case(3.0, 6.0, 1.0);
    let mut errors = Vec::new();
    for level in [3, 4, 5] {
        let mesh = LateralMesh::uniform_level(*case.geometry(), level).unwrap();
        let f = Formulation::Energetic;
        let system = GalerkinSystem {
            matrix: assemble(&mesh, &f).unwrap(),
            rhs: assemble_rhs(&mesh, &project_qh(&case, &mesh).unwrap(), &f).unwrap(),
        };
        let sol = solve(&system).unwrap();
        assert!(sol.residual < 1e-12);
        errors.push(wavebem::assembly::l2_error(&mesh, &sol.coefficients, &case).unwrap());
    }
    assert!(errors[2] < 0.6 * errors[0] && errors[1] < errors[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn time_derivative_of_v_is_exact(l in 0.5f64..3.0, t in 0.5f64..8.0, width in 0.2f64..2.0, s in 0.0f64..1.0) {
        let case = pulse_case(l, t, width);
        let w = case.w_poly().unwrap();
        let v = apply_v(&w, l);
        let dv = apply_dt_v(&w, l);
        let x = s * t;
        let h = 1e-6;
        for side in Side::BOTH {
            let (a, b) = (v.get(side), dv.get(side));
            if x > h && x < t - h {
                let fd = (a.eval(x + h) - a.eval(x - h)) / (2.0 * h);
                prop_assert!((fd - b.eval(x)).abs() < 1e-5 * (1.0 + b.eval(x).abs()));
            }
        }
    }

    #[test]
    fn vw_equals_direct_rhs(l in 0.5f64..3.0, t in 0.5f64..8.0, width in 0.2f64..2.0, s in 0.0f64..1.0) {
        let case = pulse_case(l, t, width);
        let lhs = apply_v(&case.w_poly().unwrap(), l);
        let rhs = direct_rhs(&case.g_poly().unwrap(), l);
        for side in Side::BOTH {
            let x = s * t;
            prop_assert!((lhs.get(side).eval(x) - rhs.get(side).eval(x)).abs() <= 1e-12);
        }
    }
}
