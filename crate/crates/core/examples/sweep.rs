//! Fail-probability sweep over the diagonal starts 600..=2800.

use crunch::{run_failprob, GcsConfig, ObjectiveSpec};

fn main() -> crunch::Result<()> {
    let well = ObjectiveSpec::<f64>::reference_well();
    let starts: Vec<Vec<f64>> = (600..=2800)
        .step_by(200)
        .map(|s| vec![s as f64; 2])
        .collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_failprob(&well, &starts, 100, 0.5, 42, &GcsConfig::default(), jobs)?;
    for row in &report.rows {
        println!(
            "[{}, {}]  {:>5.2}%",
            row.start[0],
            row.start[1],
            100.0 * row.fail_fraction
        );
    }
    Ok(())
}
