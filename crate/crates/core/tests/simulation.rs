use group_updating::analytic::{average_age, convolution_oracle};
use group_updating::model::validate_config;
use group_updating::sim::{
    cross_term_check, empirical_average_age, empirical_moments, simulate_cycles, simulate_streaming,
};

#[test]
fn identical_seeds_give_identical_runs() {
    let c = validate_config(24, 0.15, 4).unwrap();
    let a = simulate_cycles(&c, 5_000, 42);
    let b = simulate_cycles(&c, 5_000, 42);
    assert_eq!(a, b);
    assert_eq!(
        empirical_average_age(&a).unwrap(),
        empirical_average_age(&b).unwrap()
    );
    assert_ne!(a, simulate_cycles(&c, 5_000, 43));
}

#[test]
fn trace_structure() {
    let c = validate_config(30, 0.2, 5).unwrap();
    let (k, m) = (5usize, 6usize);
    let t = simulate_cycles(&c, 500, 4);
    for cycle in 0..t.num_cycles() {
        let groups = t.group_times(cycle);
        let services = t.service_times(cycle);
        let offsets = t.delivery_offsets(cycle);
        let starts = t.group_starts(cycle);
        assert_eq!(t.cycle_lengths()[cycle], groups.iter().sum::<u32>());
        for i in 0..m {
            assert!(groups[i] == 1 || groups[i] == k as u32 + 1);
            let members = &services[i * k..(i + 1) * k];
            for (j, &s) in members.iter().enumerate() {
                assert!(s == 1 || s == j as u32 + 2);
            }
            let group_offsets = &offsets[i * k..(i + 1) * k];
            if groups[i] == 1 {
                assert!(group_offsets.iter().all(|&d| d == group_offsets[0]));
            }
            // deliveries of group i finish no later than group i+1 opens
            let last = *group_offsets.iter().max().unwrap();
            if i + 1 < m {
                assert!(last <= starts[i + 1]);
                assert!(offsets[(i + 1) * k] > last);
            }
            assert_eq!(last, starts[i] + groups[i]);
        }
    }
}

#[test]
fn inter_delivery_intervals_telescope() {
    let c = validate_config(12, 0.3, 3).unwrap();
    let t = simulate_cycles(&c, 300, 8);
    let starts = t.cycle_starts();
    for source in 0..12 {
        let deliveries: Vec<u64> = (0..t.num_cycles())
            .map(|l| starts[l] + u64::from(t.delivery_offsets(l)[source]))
            .collect();
        let gaps: u64 = deliveries.windows(2).map(|w| w[1] - w[0]).sum();
        assert!(deliveries.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(gaps, deliveries.last().unwrap() - deliveries[0]);
    }
}

#[test]
fn mean_cycle_length_small_system() {
    let c = validate_config(4, 0.5, 2).unwrap();
    let m = simulate_streaming(&c, 1_000_000, 2).moments().unwrap();
    assert!((m.mean_cycle - 5.0).abs() < 0.01, "{}", m.mean_cycle);
    assert!((m.second_moment_cycle - 26.5).abs() / 26.5 < 0.01);
    assert!((m.mean_service - 2.125).abs() / 2.125 < 0.01);
    let exact = convolution_oracle(&c);
    assert!((m.average_age - exact.average_age).abs() / exact.average_age < 0.01);
}

#[test]
fn trace_moments_match_oracle() {
    let c = validate_config(12, 0.1, 3).unwrap();
    let m = empirical_moments(&simulate_cycles(&c, 200_000, 6)).unwrap();
    let exact = convolution_oracle(&c);
    assert!((m.mean_cycle - exact.mean_cycle).abs() / exact.mean_cycle < 0.01);
    assert!(
        (m.second_moment_cycle - exact.second_moment_cycle).abs() / exact.second_moment_cycle
            < 0.01
    );
}

#[test]
fn age_estimate_within_one_percent() {
    let c = validate_config(120, 0.1, 4).unwrap();
    let exact = average_age(&c);
    for seed in [1, 77] {
        let s = empirical_average_age(&simulate_cycles(&c, 100_000, seed)).unwrap();
        assert!((s.overall_age - exact).abs() / exact <= 0.01, "seed {seed}");
        let mean: f64 = s.per_source_age.iter().sum::<f64>() / 120.0;
        assert!((mean - s.overall_age).abs() < 1e-12);
        assert!(s.overall_age >= 1.0);
    }
}

#[test]
fn cross_term_vanishes() {
    let c = validate_config(120, 0.1, 4).unwrap();
    let r = cross_term_check(&simulate_cycles(&c, 100_000, 5)).unwrap();
    assert!(r < 0.01, "{r}");
    let c = validate_config(4, 0.5, 2).unwrap();
    let r = cross_term_check(&simulate_cycles(&c, 100_000, 5)).unwrap();
    assert!(r < 0.02, "{r}");
}

#[test]
fn error_shrinks_with_more_cycles() {
    let c = validate_config(24, 0.2, 3).unwrap();
    let exact = average_age(&c);
    let median_error = |cycles: usize| {
        let mut errs: Vec<f64> = (0..10)
            .map(|seed| {
                let s = simulate_streaming(&c, cycles, 1_000 + seed)
                    .summary()
                    .unwrap();
                (s.overall_age - exact).abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        0.5 * (errs[4] + errs[5])
    };
    let coarse = median_error(5_000);
    let fine = median_error(20_000);
    assert!(fine <= coarse, "{fine} > {coarse}");
}

#[test]
fn standard_error_tracks_spread_across_seeds() {
    let c = validate_config(12, 0.2, 3).unwrap();
    let runs: Vec<_> = (0..30)
        .map(|seed| simulate_streaming(&c, 20_000, seed).summary().unwrap())
        .collect();
    let mean = runs.iter().map(|r| r.overall_age).sum::<f64>() / 30.0;
    let spread = (runs
        .iter()
        .map(|r| (r.overall_age - mean).powi(2))
        .sum::<f64>()
        / 29.0)
        .sqrt();
    let reported = runs.iter().map(|r| r.standard_error).sum::<f64>() / 30.0;
    let ratio = spread / reported;
    assert!((0.6..1.6).contains(&ratio), "spread/se = {ratio}");
}
