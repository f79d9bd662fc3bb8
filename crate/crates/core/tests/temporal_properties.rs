use rdsir_core::kinetics::endemic_high;
use rdsir_core::presets::cycle_params;
use rdsir_core::temporal::{
    find_limit_cycles, CycleSearch, CycleStability, PoincareSection, SeedFate, TimeDirection,
};
use rdsir_core::{stability_e2, E2Stability};

#[test]
fn unstable_focus_feeds_a_stable_cycle() {
    let mut checked = 0;
    for b in [0.0523, 0.053, 0.055, 0.06, 0.07] {
        let p = cycle_params(b, 12.0).unwrap();
        assert!(p.basic_reproduction_number() > 1.0);
        if stability_e2(&p).unwrap() != E2Stability::Unstable {
            continue;
        }
        let e2 = endemic_high(&p).unwrap();
        let seed = (e2.s, e2.i * 1.001);
        let census = find_limit_cycles(&p, &[seed], CycleSearch::default()).unwrap();
        let fate = census.seeds[0].fate;
        let SeedFate::Cycle(idx) = fate else {
            panic!("b = {b}: seed fate {fate:?}");
        };
        assert_eq!(census.cycles[idx].stability, CycleStability::Stable);
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn unstable_cycle_is_attracting_backwards() {
    let p = cycle_params(0.052264417, 12.0).unwrap();
    let census = find_limit_cycles(&p, &[(0.51, 0.086), (0.65, 0.14)], CycleSearch::default())
        .unwrap();
    let inner = census.unstable().next().expect("unstable cycle");
    let outer = census.stable().next().expect("stable cycle");
    assert!(inner.amplitude < outer.amplitude);
    let sec = PoincareSection::new(&p, CycleSearch::default().tol).unwrap();
    // Reverse returns contract onto the unstable cycle.
    let start = inner.section_point.1 * 1.002;
    let mut x = start;
    for _ in 0..20 {
        x = sec.return_map(x, TimeDirection::Reverse).unwrap().i;
    }
    assert!((x - inner.section_point.1).abs() < (start - inner.section_point.1).abs());
    let back = sec
        .return_map(inner.section_point.1, TimeDirection::Reverse)
        .unwrap();
    assert!((back.period / inner.period - 1.0).abs() < 1e-4);
}
