//! Shared test fixtures for the tree modules.

use crate::data::EncodedMatrix;

/// The ten individuals of the worked weighted-tree node with three
/// engineered candidate features: a perfect split, dead+censored vs alive,
/// and dead+alive vs censored.
pub(crate) fn weighted_node() -> (EncodedMatrix, Vec<usize>, Vec<f64>) {
    // rows 0..5 dead (ei=1), rows 5..7 alive (ei=1), rows 7..10 censored.
    let labels = vec![1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let weights = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.8, 0.5];
    let mut rows_data = Vec::new();
    for i in 0..10usize {
        let dead = i < 5;
        let censored = i >= 7;
        rows_data.push(vec![
            if dead { 0.0 } else { 1.0 },
            if dead || censored { 0.0 } else { 1.0 },
            if censored { 1.0 } else { 0.0 },
        ]);
    }
    let x = EncodedMatrix::from_rows(
        rows_data,
        vec!["perfect".into(), "dead_cens".into(), "dead_alive".into()],
    )
    .unwrap();
    (x, labels, weights)
}

/// Twenty-row fixture engineered so the optimal splits are sex, then age at
/// 9.5, then siblings at 2.5.
pub(crate) fn titanic_fixture() -> (EncodedMatrix, Vec<usize>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    // (male, age, sibsp, survived)
    let data: Vec<(f64, f64, f64, usize)> = vec![
        // Ten females, all survive.
        (0.0, 5.0, 0.0, 1),
        (0.0, 12.0, 1.0, 1),
        (0.0, 20.0, 2.0, 1),
        (0.0, 28.0, 0.0, 1),
        (0.0, 33.0, 1.0, 1),
        (0.0, 39.0, 0.0, 1),
        (0.0, 45.0, 2.0, 1),
        (0.0, 51.0, 0.0, 1),
        (0.0, 57.0, 1.0, 1),
        (0.0, 62.0, 0.0, 1),
        // Three young males: two with few siblings survive, one does not.
        // The dying child sits between the survivors in age, so siblings is
        // the only clean separator inside the young-male node.
        (1.0, 4.0, 0.0, 1),
        (1.0, 6.0, 4.0, 0),
        (1.0, 9.0, 1.0, 1),
        // Seven older males die.
        (1.0, 10.0, 0.0, 0),
        (1.0, 20.0, 1.0, 0),
        (1.0, 25.0, 2.0, 0),
        (1.0, 30.0, 0.0, 0),
        (1.0, 40.0, 1.0, 0),
        (1.0, 50.0, 2.0, 0),
        (1.0, 60.0, 0.0, 0),
    ];
    for (male, age, sibsp, survived) in data {
        rows.push(vec![male, age, sibsp]);
        labels.push(survived);
    }
    let x = EncodedMatrix::from_rows(rows, vec!["male".into(), "age".into(), "sibsp".into()])
        .unwrap();
    let weights = vec![1.0; 20];
    (x, labels, weights)
}
