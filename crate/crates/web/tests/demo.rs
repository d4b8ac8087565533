use onebit_doa_web::{link_table, solve_scene};

#[test]
fn solve_recovers_well_separated_targets() {
    let s = solve_scene(&[-30.0, 30.0], 25.0, 7, "sbri_x:on_grid", 1.0, 50).unwrap();
    assert_eq!(s.angles_deg().len(), 121);
    assert_eq!(s.magnitudes().iter().cloned().fold(0.0, f64::max), 1.0);
    for (e, t) in s.estimates_deg().iter().zip(s.truth_deg()) {
        assert!((e - t).abs() <= 2.0);
    }
    assert_eq!(s.objective().len(), s.iterations() + 1);
    assert_eq!(s.change().len(), s.iterations());
}

#[test]
fn off_grid_solve_reports_gaps_within_half_cell() {
    let s = solve_scene(&[-10.28, 20.56], 20.0, 1, "sbri:off_grid", 2.0, 30).unwrap();
    assert!(s.gaps_deg().iter().all(|g| g.abs() <= 1.0 + 1e-12));
}

#[test]
fn solve_rejects_bad_input() {
    assert!(solve_scene(&[0.0], 10.0, 1, "magic:on_grid", 1.0, 10).is_err());
    assert!(solve_scene(&[0.0], 10.0, 1, "sbri:on_grid", -1.0, 10).is_err());
}

#[test]
fn link_table_shape_and_bound() {
    let t = link_table(1.0, 0.5, 0.7, -10.0, 10.0, 201).unwrap();
    assert_eq!(t.len(), 201 * 5);
    for row in t.chunks_exact(5) {
        let [s, logi, probit, loss, bound] = [row[0], row[1], row[2], row[3], row[4]];
        assert!((0.0..=1.0).contains(&logi) && (0.0..=1.0).contains(&probit));
        assert!(bound >= loss - 1e-12, "bound below loss at s = {s}");
    }
    let mid = &t[100 * 5..101 * 5];
    assert_eq!(mid[0], 0.0);
    assert!((mid[1] - 0.5).abs() < 1e-15 && (mid[2] - 0.5).abs() < 1e-15);
    assert!(link_table(0.0, 1.0, 0.0, -1.0, 1.0, 3).is_err());
    assert!(link_table(1.0, 1.0, 0.0, 1.0, 1.0, 3).is_err());
}
