use sparse_isotonic::algorithms::RecoveryMethod;
use sparse_isotonic::experiment::{recovery_experiment, ExperimentConfig};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

#[test]
fn noiseless_recovery_is_perfect() {
    let c = config(
        "ns = [200]\nds = [5]\ns = 3\nsigma = 0.0\ntrials = 10\nseed = 1\nmethods = [\"ipir\", \"lpsr\", \"slpsr\"]\n",
    );
    let table = recovery_experiment(&c).unwrap();
    assert!(table.cells.iter().all(|cell| cell.percent == 100.0), "{:?}", table.cells);
}

#[cfg(feature = "parallel")]
#[test]
fn results_do_not_depend_on_thread_count() {
    let c = config("ns = [60, 90]\nds = [6]\ns = 2\nnoise_variance = 0.1\ntrials = 6\nseed = 3\nmethods = [\"ipir\", \"lpsr\", \"slpsr\"]\n");
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| recovery_experiment(&c).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn recovery_rate_grows_with_sample_size() {
    let c = config(
        "ns = [50, 100, 150, 200]\nds = [5]\ns = 3\nnoise_variance = 0.1\ntrials = 50\nseed = 17\nmethods = [\"ipir\", \"lpsr\", \"slpsr\"]\n",
    );
    let table = recovery_experiment(&c).unwrap();
    for m in [RecoveryMethod::Ipir, RecoveryMethod::Lpsr, RecoveryMethod::Slpsr] {
        let rates: Vec<f64> = c.ns.iter().map(|&n| table.percent(n, 5, m).unwrap()).collect();
        for w in rates.windows(2) {
            assert!(w[1] >= w[0] - 5.0, "{} {rates:?}", m.label());
        }
    }
}

#[test]
fn shuffled_coordinates_keep_results_in_original_indices() {
    let base = "ns = [200]\nds = [6]\ns = 2\nsigma = 0.0\ntrials = 4\nseed = 9\nmethods = [\"ipir\", \"slpsr\"]\n";
    let plain = recovery_experiment(&config(base)).unwrap();
    let shuffled = recovery_experiment(&config(&format!("{base}shuffle_coordinates = true\n"))).unwrap();
    assert!(shuffled.cells.iter().all(|c| c.percent == 100.0), "{:?}", shuffled.cells);
    assert!(shuffled.details.iter().all(|t| t.recovered == vec![1, 2]));
    assert_eq!(plain.cells, shuffled.cells);
}
