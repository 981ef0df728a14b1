use smectic_wasm::{potential_work, solvability_bound, Demo};

#[test]
fn energy_history_rows_follow_steps() {
    let mut d = Demo::create(3, 2e-4, "od2", "cosine").unwrap();
    d.advance(2).unwrap();
    d.advance(3).unwrap();
    let h = d.energy_history();
    let times: Vec<f64> = h.chunks(7).map(|r| r[0]).collect();
    assert_eq!(times.len(), 6);
    for (i, t) in times.iter().enumerate() {
        assert!((t - i as f64 * 2e-4).abs() < 1e-15);
    }
    let residuals: Vec<f64> = h.chunks(7).map(|r| r[6]).collect();
    assert!(residuals.iter().all(|&r| r <= 1e-6), "{residuals:?}");
}

#[test]
fn explorer_matches_secant_property_across_pairs() {
    for (a, b) in [([0.0, 0.0], [1.0, 0.0]), ([2.0, -1.0], [-0.5, 0.5]), ([1.0, 1.0], [1.0, 1.0])] {
        let [work, delta, nd] = potential_work(a, b, "mp").unwrap();
        assert!((work - delta).abs() <= 1e-13 && nd.abs() <= 1e-13);
    }
    assert!(solvability_bound(0.1, 2.0) > 0.0);
}
