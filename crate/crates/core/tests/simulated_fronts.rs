use richards_front::scenario::{uniform_times, Scenario};
use richards_front::verification::{extract_support, Axis, SupportTrace};
use richards_front::{Execution, PresetP};

fn trace(s: &Scenario) -> (SupportTrace, f64) {
    let (m, run) = s.run(Execution::best()).unwrap();
    let tr = extract_support(&run.fields, &run.grid, &m, s.absolute_threshold(), Execution::best()).unwrap();
    let dx = run.grid.dx();
    (tr, dx)
}

fn argmax(xs: &[f64]) -> usize {
    xs.iter().enumerate().fold(0, |best, (i, &x)| if x > xs[best] { i } else { best })
}

#[test]
fn case_1_upward_front_reverses() {
    for p in [PresetP::InvSqrt, PresetP::Const] {
        let (tr, dx) = trace(&Scenario::quick(p, 1));
        let up = tr.extents(Axis::Up);
        let peak = argmax(&up);
        assert!(peak + 1 < up.len(), "{p}: upward extent peaks at the horizon");
        for w in up[peak..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{p}: upward extent grows after its peak");
        }
        assert!(up[peak] - up[up.len() - 1] >= 3.0 * dx, "{p}: reversal smaller than three cells");
    }
}

#[test]
fn case_2_upward_front_settles() {
    for p in [PresetP::Linear, PresetP::Sqrt] {
        let (tr, dx) = trace(&Scenario::quick(p, 1));
        let up = tr.extents(Axis::Up);
        for w in up.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{p}: upward extent recedes");
        }
        let top = 1.0 + 1.0;
        assert!(up[up.len() - 1] <= top + dx, "{p}: above the static bound");
    }
}

#[test]
fn downward_extent_converges_to_the_bound() {
    let horizon = 1.0;
    let mut overshoot = Vec::new();
    let mut finest_dx = 0.0;
    for cells in [128, 256, 512] {
        let mut s = Scenario::quick(PresetP::Const, 1);
        s.cells = cells;
        s.horizon = horizon;
        s.output_times = uniform_times(horizon, 4);
        s.half_width = None;
        let s = s.validate().unwrap();
        let (tr, dx) = trace(&s);
        finest_dx = dx;
        let excess = tr
            .times
            .iter()
            .zip(tr.extents(Axis::Down))
            .map(|(&t, d)| d - (1.0 + t + 2.0 * t.sqrt()))
            .fold(f64::NEG_INFINITY, f64::max);
        overshoot.push(excess);
    }
    for w in overshoot.windows(2) {
        assert!(w[1].max(0.0) <= w[0].max(0.0), "{overshoot:?}");
    }
    assert!(overshoot[2].abs() <= 2.0 * finest_dx, "{overshoot:?}");
}
