//! A small configured sweep written as CSV plus a plotting script.

use ricean_mimo::experiments::{
    emit_csv, emit_plot_script, run_sweep, ExperimentConfig, PlotFilter, PlotOptions,
};

const CONFIG: &str = r#"
[scenario]
n = 4
drop_seed = 3

[sweep]
kind = "m_sweep"
grid = [16, 32, 64]
p_u_db = 10.0
k_db = [-inf, 6.0]

[mc]
trials = 300
master_seed = 1
"#;

fn main() {
    let config = ExperimentConfig::from_toml(CONFIG).unwrap();
    let rows = run_sweep(&config).unwrap();
    let dir = std::env::temp_dir().join("ricean-mimo-example");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("sweep.csv");
    emit_csv(&rows, &csv).unwrap();
    let options = PlotOptions {
        csv_name: "sweep.csv".into(),
        kind: config.sweep.kind,
        filter: PlotFilter::default(),
    };
    emit_plot_script(&rows, &dir.join("sweep.py"), &options).unwrap();
    println!("{}", std::fs::read_to_string(&csv).unwrap());
    println!("wrote {} and sweep.py", csv.display());
}
