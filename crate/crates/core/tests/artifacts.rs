use std::fs;
use std::path::PathBuf;

use faer::Col;
use fpielm::experiment::{compare_fdm, dump_field, run_replicates, train, CsvWriter};
use fpielm::{get_problem, rel_error, ActivationKind, ExperimentConfig, HiddenLayer, TrainedModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        hidden_n: 200,
        delta: Some(3.0),
        q_interior: 800,
        p_boundary: 300,
        replicates: 2,
        test_grid: vec![24],
        ..Default::default()
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fpielm-artifacts-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn read_rows(path: &PathBuf) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn field_file_reproduces_the_recorded_error() {
    let config = small();
    let trained = train(&config).unwrap();
    let path = scratch("field.csv");
    let n = dump_field(&trained.model, &trained.problem, &[24, 24], &path).unwrap();
    let (header, rows) = read_rows(&path);
    assert_eq!(header, "x1,x2,u_exact,u_pred,abs_err");
    assert_eq!(rows.len(), n);
    let exact: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let pred: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let rel = rel_error(&pred, &exact).unwrap();
    assert!((rel - trained.record.rel).abs() <= 1e-12 * trained.record.rel.max(1e-300));
    for r in &rows {
        assert_eq!(r[4], (r[3] - r[2]).abs());
    }
}

#[test]
fn zero_model_error_is_the_exact_magnitude() {
    let problem = get_problem("dirichlet-poly2d", None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layer = HiddenLayer::init(5, 2, ActivationKind::Sine, 1.0, &mut rng).unwrap();
    let model = TrainedModel::from_weights(layer, Col::zeros(5)).unwrap();
    let path = scratch("zero.csv");
    assert_eq!(dump_field(&model, &problem, &[3, 3], &path).unwrap(), 9);
    let (_, rows) = read_rows(&path);
    for r in rows {
        assert_eq!(r[3], 0.0);
        assert_eq!(r[4], r[2].abs());
        assert_eq!(r[2], problem.exact_u(&r[..2]));
    }
}

#[test]
fn full_box_grid_has_every_node() {
    let problem = get_problem("dirichlet-poly2d", None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let layer = HiddenLayer::init(3, 2, ActivationKind::Tanh, 1.0, &mut rng).unwrap();
    let model = TrainedModel::from_weights(layer, Col::from_fn(3, |i| i as f64)).unwrap();
    let path = scratch("grid128.csv");
    assert_eq!(dump_field(&model, &problem, &[128, 128], &path).unwrap(), 128 * 128);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 128 * 128 + 1);
}

#[test]
fn csv_is_byte_identical_without_timings() {
    let render = || {
        let records = run_replicates(&small()).unwrap();
        let mut csv = CsvWriter::new(Vec::new(), false).unwrap();
        for r in &records {
            csv.write(r).unwrap();
        }
        csv.into_inner()
    };
    let first = render();
    assert_eq!(first, render());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 3);
}

#[test]
fn comparison_rows_refine_and_share_one_network_run() {
    let mut config = small();
    config.set("domain.kind", "box").unwrap();
    config.set("domain.lo", "0, 0").unwrap();
    config.set("domain.hi", "5, 5").unwrap();
    let coarse = compare_fdm(&config, &[16, 32]).unwrap();
    let fine = compare_fdm(&config, &[32, 64, 128]).unwrap();
    let fdm: Vec<f64> = fine.iter().filter(|r| r.method == "fdm").map(|r| r.rel).collect();
    assert!(fdm.windows(2).all(|w| w[1] < w[0]));
    let net = |rows: &[fpielm::experiment::CompareRow]| rows.iter().find(|r| r.method == "fpielm").unwrap().rel;
    assert_eq!(net(&coarse), net(&fine));
}
