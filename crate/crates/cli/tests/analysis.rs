use landau_cli::bench::CostModelFit;
use landau_cli::converge::{check_grids, observed_orders, parse_grids};
use landau_cli::CliError;

fn geometric(ratio: f64, grids: usize, samples: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let times: Vec<f64> = (0..samples).map(|k| 0.1 * k as f64).collect();
    // q_k = q + C(t) ratio^{-k}
    let fluxes = (0..grids)
        .map(|k| {
            times
                .iter()
                .map(|t| 1.0 + (1.0 + t) * ratio.powi(-(k as i32)))
                .collect()
        })
        .collect();
    (times, fluxes)
}

#[test]
fn orders_from_synthetic_ratios() {
    for (ratio, p) in [(16.0, 4.0), (8.0, 3.0)] {
        let (t, q) = geometric(ratio, 4, 5);
        let a = observed_orders(&t, &q).unwrap();
        assert_eq!(a.differences.len(), 3);
        assert_eq!(a.orders.len(), 2);
        for row in &a.orders {
            for v in row {
                assert!((v - p).abs() < 1e-9);
            }
        }
        for v in &a.pairwise {
            assert!((v - p).abs() < 1e-9);
        }
        assert!((a.aggregate - p).abs() < 1e-9);
    }
}

#[test]
fn aggregate_ignores_initial_sample() {
    let (t, mut q) = geometric(16.0, 3, 4);
    // perturb only t = 0 on the finest grid
    q[2][0] += 1.0;
    let a = observed_orders(&t, &q).unwrap();
    assert!((a.aggregate - 4.0).abs() < 1e-9);
    assert!((a.orders[0][0] - 4.0).abs() > 1.0);
}

#[test]
fn too_few_grids_is_an_error() {
    let (t, q) = geometric(16.0, 2, 3);
    assert!(matches!(observed_orders(&t, &q), Err(CliError::InvalidArgument(_))));
    assert!(check_grids(&[(8, 16), (16, 32)]).is_err());
    assert!(check_grids(&[(8, 16), (16, 32), (30, 64)]).is_err());
    check_grids(&[(8, 16), (16, 32), (32, 64)]).unwrap();
}

#[test]
fn grid_lists_parse() {
    assert_eq!(
        parse_grids("8x16,16x32, 32X64").unwrap(),
        vec![(8, 16), (16, 32), (32, 64)]
    );
    assert!(parse_grids("8x16,16").is_err());
    assert!(parse_grids("0x16").is_err());
    assert!(parse_grids("axb").is_err());
}

#[test]
fn cost_fit_on_published_timings() {
    let samples = [(1.0, 0.21), (2.0, 0.28), (3.0, 0.38)];
    let f = CostModelFit::fit(&samples).unwrap();
    // c = (t1 - 2 t2 + t3)/2, b = t2 - t1 - 3c, a = t1 - b - c
    let c = (0.21 - 2.0 * 0.28 + 0.38) / 2.0;
    let b = 0.28 - 0.21 - 3.0 * c;
    let a = 0.21 - b - c;
    assert!((f.a - a).abs() < 1e-12 && (f.a - 0.17).abs() < 1e-12);
    assert!((f.b - b).abs() < 1e-12 && (f.b - 0.025).abs() < 1e-12);
    assert!((f.c - c).abs() < 1e-12 && (f.c - 0.015).abs() < 1e-12);
    for (s, t) in samples {
        assert!((f.eval(s) - t).abs() < 1e-12);
    }
    assert!((f.a + 2.0 * f.b + 4.0 * f.c - 0.28).abs() < 1e-12);
    let sh = f.shares(2.0);
    assert!((sh[0] - 0.17 / 0.28).abs() < 1e-12);
    assert!((sh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn cost_fit_without_constant_term() {
    let samples: Vec<(f64, f64)> = [1.0, 2.0, 3.0].iter().map(|&s| (s, 0.3 * s + 0.05 * s * s)).collect();
    let f = CostModelFit::fit(&samples).unwrap();
    assert!(f.a.abs() < 1e-12);
    assert!(f.shares(2.0)[0].abs() < 1e-10);
    assert_eq!(CostModelFit { a: 0.0, b: 0.0, c: 0.0 }.shares(1.0), [0.0; 3]);
}

#[test]
fn cost_fit_needs_three_species_counts() {
    assert!(CostModelFit::fit(&[(1.0, 0.2), (2.0, 0.3)]).is_err());
    assert!(CostModelFit::fit(&[(1.0, 0.2), (1.0, 0.21), (2.0, 0.3)]).is_err());
}
