use proptest::prelude::*;
use richards_front::front::{Direction, FrontAnalyzer};
use richards_front::SoilModel;

const TIMES: [f64; 6] = [0.05, 0.3, 1.0, 2.5, 6.0, 12.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_law_fronts_respect_the_analytic_bounds(
        c_f in 0.2f64..3.0,
        p in 0.6f64..3.0,
        frac in 0.05f64..1.0,
        c_g in 0.2f64..3.0,
        u_star in 0.3f64..2.0,
        r0 in 0.2f64..2.0,
    ) {
        // Bounded P needs q <= p - 1.
        let q = -1.0 + frac * p;
        let m = SoilModel::from_power_law(c_f, p, c_g, q, u_star).unwrap();
        let a = FrontAnalyzer::new(m.clone()).unwrap();

        let down = a.curve(Direction::down(), r0, &TIMES).unwrap();
        let tc = down.t_critical.unwrap();
        for (i, &t) in TIMES.iter().enumerate() {
            let lin = t * m.p_sharp();
            let sq = 2.0 * (m.q_star() * t).sqrt();
            let r = down.radius[i] - r0;
            prop_assert!(r >= lin * (1.0 - 1e-9));
            if t < tc {
                prop_assert!(r <= (lin + sq) * (1.0 + 1e-9));
            }
            if i > 0 {
                prop_assert!(down.radius[i] >= down.radius[i - 1]);
            }
        }

        let up = a.curve(Direction::up(), r0, &TIMES).unwrap();
        for &r in &up.radius {
            prop_assert!(r <= (r0 + u_star) * (1.0 + 1e-9));
        }

        let side = a.curve(Direction::new(std::f64::consts::FRAC_PI_2), r0, &TIMES).unwrap();
        for (i, &t) in TIMES.iter().enumerate() {
            let r = side.radius[i] - r0;
            prop_assert!(r <= 2.0 * (m.q_star() * t).sqrt() * (1.0 + 1e-9));
            prop_assert!(r >= 0.0);
        }
    }
}
