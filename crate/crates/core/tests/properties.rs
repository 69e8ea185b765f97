use std::f64::consts::PI;

use proptest::prelude::*;

use cone_spectra::profile::{profile_for, spacing_for};
use cone_spectra::reference::lambda_closed_form_2d;
use cone_spectra::{solve_lambda, Branch, ConeProblem, Tolerances};

fn solve(p: f64, n: u32, alpha: f64, branch: Branch) -> f64 {
    let pb = ConeProblem::new(p, n, alpha, branch).unwrap();
    solve_lambda(&pb, &Tolerances::default()).unwrap().lambda
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn branches_have_their_sign(p in 1.3f64..8.0, n in 2u32..6, alpha in 0.2f64..3.0) {
        prop_assert!(solve(p, n, alpha, Branch::Fundamental) > 0.0);
        prop_assert!(solve(p, n, alpha, Branch::Exterior) < 0.0);
    }

    #[test]
    fn widening_the_cone_lowers_both_exponents(
        p in 1.3f64..8.0,
        n in 2u32..6,
        a in 0.2f64..2.9,
        gap in 0.05f64..0.2,
    ) {
        let b = a + gap;
        prop_assert!(solve(p, n, b, Branch::Fundamental) < solve(p, n, a, Branch::Fundamental));
        prop_assert!(solve(p, n, b, Branch::Exterior) > solve(p, n, a, Branch::Exterior));
    }

    #[test]
    fn solution_reproduces_the_aperture(p in 1.3f64..8.0, n in 2u32..6, alpha in 0.2f64..3.0) {
        let tol = Tolerances::default();
        let pb = ConeProblem::new(p, n, alpha, Branch::Fundamental).unwrap();
        let r = solve_lambda(&pb, &tol).unwrap();
        prop_assert!(r.residual_alpha <= 10.0 * tol.alpha_tol);
        prop_assert!(r.bracket.0 <= r.lambda && r.lambda <= r.bracket.1);
    }

    #[test]
    fn planar_closed_form_agrees(p in 1.2f64..10.0, alpha in 0.2f64..3.1) {
        for branch in [Branch::Fundamental, Branch::Exterior] {
            let exact = lambda_closed_form_2d(p, alpha, branch).unwrap();
            let l = solve(p, 2, alpha, branch);
            prop_assert!((l - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{branch} {l} vs {exact}");
        }
    }

    #[test]
    fn profile_is_positive_and_normalised(p in 1.3f64..8.0, n in 2u32..6, alpha in 0.3f64..3.0) {
        let l = solve(p, n, alpha, Branch::Fundamental);
        let prof = profile_for(l, p, n, &Tolerances::default(), spacing_for(alpha)).unwrap();
        prop_assert!((prof.phi[0] - 1.0).abs() < 1e-12);
        let last = prof.len() - 1;
        prop_assert!(prof.phi[..last].iter().all(|v| *v > 0.0));
        prop_assert!(prof.phi[last].abs() < 1e-6);
        prop_assert!((prof.alpha - alpha).abs() < 1e-6 * PI);
    }
}
