use qcmi::synthgen::{gen_linear_decay_runs, gen_mod1, inflate_zeros, TimeSeries};
use qcmi::{
    cmi_knn, directed_scores, make_potential, qcmi_knn, qcmi_partition, Dataset, EdgeMethod,
    EstimatorConfig, Potential, PotentialKind, PotentialParams,
};

fn unit_square() -> Potential {
    Potential::uniform(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap()
}

#[test]
fn csv_round_trip_keeps_estimates() {
    let data = gen_mod1(1500, 3, 0.2, 11).unwrap();
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    let back = Dataset::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, data);

    let cfg = EstimatorConfig::default();
    let a = qcmi_knn(&data, &unit_square(), &cfg).unwrap();
    let b = qcmi_knn(&back, &unit_square(), &cfg).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.per_sample, b.per_sample);
}

#[test]
fn flat_grid_matches_uniform_box() {
    let text =
        "bounds,0,1,0,1\nc0,c1,density\n0.25,0.25,1\n0.25,0.75,1\n0.75,0.25,1\n0.75,0.75,1\n";
    let grid = Potential::read_grid_csv(text.as_bytes()).unwrap();
    let data = gen_mod1(1200, 2, 0.2, 4).unwrap();
    let cfg = EstimatorConfig::default();
    let g = qcmi_knn(&data, &grid, &cfg).unwrap().estimate;
    let u = qcmi_knn(&data, &unit_square(), &cfg).unwrap().estimate;
    assert!((g - u).abs() < 1e-12, "{g} vs {u}");
    let pg = qcmi_partition(&data, &grid, Some(4)).unwrap();
    let pu = qcmi_partition(&data, &unit_square(), Some(4)).unwrap();
    assert!((pg - pu).abs() < 1e-12, "{pg} vs {pu}");
}

#[test]
fn every_potential_kind_yields_a_finite_estimate() {
    let data = gen_mod1(800, 2, 0.2, 9).unwrap();
    let cfg = EstimatorConfig::default();
    for kind in [
        PotentialKind::Uniform,
        PotentialKind::Gaussian,
        PotentialKind::ProductMarginal,
        PotentialKind::Factual,
    ] {
        let q = make_potential(kind, &data, &PotentialParams::default()).unwrap();
        let r = qcmi_knn(&data, &q, &cfg).unwrap();
        assert!(r.estimate.is_finite(), "{kind:?}");
        assert_eq!(r.per_sample.len(), data.len());
    }
}

#[test]
fn zero_inflation_moves_cmi_more_than_qcmi() {
    let base = gen_mod1(600, 1, 0.2, 2).unwrap();
    let inflated = inflate_zeros(&base, 3000);
    let cfg = EstimatorConfig::default();
    let cmi = cmi_knn(&inflated, &cfg).unwrap().estimate;
    let q = qcmi_knn(&inflated, &unit_square(), &cfg).unwrap();
    assert!(q.zero_radius_samples >= 3000);
    assert!(q.estimate > cmi + 0.5, "qcmi {} cmi {cmi}", q.estimate);
}

#[test]
fn mismatched_potential_is_rejected() {
    let data = gen_mod1(200, 1, 0.2, 0).unwrap();
    let q = Potential::uniform(vec![(0.0, 1.0)]).unwrap();
    assert!(qcmi_knn(&data, &q, &EstimatorConfig::default()).is_err());
}

#[test]
fn series_round_trip_and_scoring_are_deterministic() {
    let ts = gen_linear_decay_runs(60, 2, 0.1, 3).unwrap();
    let mut csv = Vec::new();
    ts.write_csv(&mut csv).unwrap();
    let mut adj = Vec::new();
    ts.write_adjacency(&mut adj).unwrap();
    let back = TimeSeries::read_csv(csv.as_slice())
        .unwrap()
        .with_truth(TimeSeries::read_adjacency(adj.as_slice()).unwrap())
        .unwrap();
    assert_eq!(back.values, ts.values);
    assert_eq!(back.run_lengths, ts.run_lengths);

    let cfg = EstimatorConfig::default().with_strict(false);
    let a = directed_scores(&back, EdgeMethod::Urdi, &cfg).unwrap();
    let b = directed_scores(&ts, EdgeMethod::Urdi, &cfg.sequential()).unwrap();
    assert_eq!(a.scores, b.scores);
    assert!(qcmi::auc(&a).is_ok());
}
