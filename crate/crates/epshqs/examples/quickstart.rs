//! Minimal end-to-end benchmark: two strategies, one seed, tiny budgets.
//! Run with `cargo run --release --example quickstart`.

use epshqs::config::ExperimentConfig;
use epshqs::harness::run_experiment;

fn main() -> epshqs::Result<()> {
    // ANCHOR: config
    let toml = r#"
        strategies = ["random", "eps_hqs:0.5"]
        seeds = [1, 2]
        test_set_size = 500
        output_dir = "target/quickstart-out"

        [oracle]
        kind = "styblinski_tang"
        dim = 2
        sim_cost_seconds = 0.5

        [loop]
        iterations = 10
        batch_size = 20
        proposal_size = 500
        seed = 7

        [student]
        hidden = [32, 32]
        epochs_initial = 100
        epochs_warm = 30

        [teacher]
        hidden = [16, 16]
        epochs_initial = 50
        epochs_warm = 20
    "#;
    let cfg = ExperimentConfig::from_toml_str(toml)?;
    let outcome = run_experiment(&cfg, 1, None)?;
    // ANCHOR_END: config

    // ANCHOR: report
    for row in &outcome.summary {
        println!(
            "{:<12} final hit-rate {:.3} ± {:.3}",
            row.strategy.to_string(),
            row.final_mean_hit_rate,
            row.final_std
        );
    }
    // ANCHOR_END: report
    Ok(())
}
