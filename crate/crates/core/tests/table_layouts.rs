//! Reference period and ecosystem tables rebuilt from hand-made graphs
//! whose component sizes and channel means match the reference cells,
//! then rendered through the report layer.

mod common;

use chantopo::analyze::{evolution_report, popularity_groups, render_popularity_table, DominanceLevel, Thresholds};
use chantopo::knowledge::{registry_default, EVOLUTION_CHANNELS, POPULARITY_CHANNELS};

/// 2015 rows: (points, checkmarks over the evolution channels).
const PERIOD_2015: [(usize, [bool; 8]); 3] = [
    (16_906, [true, false, true, true, true, true, true, true]),
    (15_638, [false, false, true, false, false, false, true, true]),
    (5_138, [true, false, true, false, false, false, true, true]),
];

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn period_rows_follow_point_counts() {
    let reg = registry_default();
    // rows listed smallest first so ranking has to reorder them
    let mut rows = Vec::new();
    let mut members = Vec::new();
    for &(points, marks) in PERIOD_2015.iter().rev() {
        let start = rows.len();
        let row: Vec<f64> = marks.iter().map(|&m| if m { 0.6 } else { 0.1 }).collect();
        rows.extend(std::iter::repeat_n(row, points));
        // two overlapping nodes per component
        members.push((start..start + points / 2 + 1).collect());
        members.push((start + points / 2..start + points).collect());
    }
    let n = rows.len();
    let m = common::matrix(rows, &EVOLUTION_CHANNELS, vec![1; n]);
    let g = common::graph(members, &m);
    let channels = owned(&EVOLUTION_CHANNELS);
    let report = evolution_report([("2015".to_string(), &g, &m)], 3, &channels, &reg, &Thresholds::default()).unwrap();

    for (row, &(points, marks)) in report.rows.iter().zip(&PERIOD_2015) {
        assert_eq!(row.points, points);
        assert_eq!(row.nodes, 2);
        let got: Vec<bool> = row.dominance.iter().map(|d| d.level == DominanceLevel::Dominant).collect();
        assert_eq!(got, marks);
    }
    let text = report.to_text();
    let first = text.lines().find(|l| l.starts_with("2015")).unwrap();
    assert!(first.contains("16,906"), "{first}");
}

#[test]
fn issue_tracker_is_marked_in_every_reference_row() {
    let j = EVOLUTION_CHANNELS.iter().position(|c| *c == "Issue Tracker").unwrap();
    assert!(PERIOD_2015.iter().all(|(_, marks)| marks[j]));
}

#[test]
fn popular_column_layout() {
    let reg = registry_default();
    // Bower column: Popular ✓ on all five; non-popular −, −, ✓✓, ✓, ✓✓
    let popular = [0.6, 0.6, 0.6, 0.6, 0.6];
    let plain = [0.1, 0.1, 0.9, 0.6, 0.9];
    let mut rows = Vec::new();
    let mut stars = Vec::new();
    for _ in 0..40 {
        rows.push(plain.to_vec());
        stars.push(20);
    }
    for _ in 0..30 {
        rows.push(popular.to_vec());
        stars.push(9000);
    }
    let m = common::matrix(rows, &POPULARITY_CHANNELS, stars);
    let g = common::graph(vec![(0..25).collect(), (20..40).collect(), (40..70).collect()], &m);
    let channels = owned(&POPULARITY_CHANNELS);
    let rep = popularity_groups(&g, &m, &channels, &reg, &Thresholds::default()).unwrap();
    assert_eq!(rep.group("Popular").unwrap().total_points, 30);
    assert_eq!(rep.group("NonPopular1").unwrap().total_points, 40);

    let text = render_popularity_table(&[("Bower".to_string(), &rep)]);
    let cells: Vec<(String, String)> = text
        .lines()
        .filter(|l| l.contains(" | ") && !l.starts_with("Topology"))
        .map(|l| {
            let parts: Vec<&str> = l.split(" | ").map(str::trim).collect();
            (parts[0].to_string(), parts[3].to_string())
        })
        .collect();
    let symbols: Vec<&str> = cells.iter().map(|(_, s)| s.as_str()).collect();
    assert_eq!(symbols, ["✓", "✓", "✓", "✓", "✓", "−", "−", "✓✓", "✓", "✓✓"]);
    assert_eq!(cells[0].0, "Popular");
    assert_eq!(cells[5].0, "NonPopular1");
}
