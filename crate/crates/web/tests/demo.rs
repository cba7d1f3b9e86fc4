use hfl_web::{aggregation_curves, learning_curves, scatter};

#[test]
fn scatter_has_one_entry_per_row() {
    let s = scatter(500, 0.9, 4.0, 3).unwrap();
    assert_eq!(s.points.len(), 500);
    assert_eq!(s.labels.len(), 500);
    assert_eq!(s.clients.len(), 500);
    assert!(s.clients.iter().all(|&c| c < 4));
    assert!(scatter(0, 0.9, 4.0, 3).is_err());
}

#[test]
fn learning_curves_cover_hfl_and_every_client() {
    let curves = learning_curves(5, 0.9, 7).unwrap();
    assert_eq!(curves.len(), 5);
    assert_eq!(curves[0].label, "4 Clients / 2 Edge Servers");
    assert!(curves.iter().all(|c| c.accuracy.len() == 5));
    assert!(curves.iter().all(|c| (0.0..=100.0).contains(&c.final_accuracy)));
}

#[test]
fn balanced_edges_weighting_changes_nothing() {
    let curves = aggregation_curves(3, 2, 1).unwrap();
    assert_eq!(curves.len(), 3);
    assert_eq!(curves[1].accuracy, curves[2].accuracy);
    let uneven = aggregation_curves(3, 3, 1).unwrap();
    assert_eq!(uneven.len(), 3);
}
