//! Small seed-fixed runs of every preset compared byte for byte against the
//! tables in `tests/golden/`. Set `SECMIMO_BLESS=1` to rewrite them.

use std::path::PathBuf;

use secmimo_cli::{execute, load};

fn overrides(name: &str) -> Vec<String> {
    let list: &[&str] = match name {
        "fig7_threshold" => &["threshold.gamma=[0.3, 0.7]", "threshold.trials=1", "threshold.error_draws=1"],
        "fig8_system" => &[
            "system_level.n_groups=1",
            "system_level.symbols=100",
            "system_level.error_draws=1",
            "system_level.tx_antennas=4",
            "system_level.rx_antennas=2",
            "system_level.eve_antennas=2",
            "system_level.greedy_min_size=3",
            "system_level.max_outer_iters=3",
            "system_level.max_nbe_iters=2",
        ],
        "fig5_gap" => &[
            "sweep.snr_db=[-20.0, -10.0, 0.0]",
            "sweep.trials_per_point=1",
            "sweep.symbols_per_trial=100",
        ],
        _ => &["sweep.snr_db=[-5.0, 5.0]", "sweep.trials_per_point=1", "sweep.symbols_per_trial=100"],
    };
    list.iter().map(|s| s.to_string()).collect()
}

fn check(name: &str) {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let path = root.join("presets").join(format!("{name}.toml"));
    let cfg = load(path.to_str().unwrap(), &overrides(name)).unwrap();
    let artifacts = execute(&cfg, &mut |_| {}).unwrap();
    let bless = std::env::var("SECMIMO_BLESS").is_ok_and(|v| v == "1");
    for (file, body) in &artifacts.tables {
        let golden = root.join("tests/golden").join(format!("{name}.{file}"));
        if bless {
            std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
            std::fs::write(&golden, body).unwrap();
            continue;
        }
        let expected = std::fs::read_to_string(&golden)
            .unwrap_or_else(|e| panic!("{}: {e}", golden.display()));
        assert_eq!(body, &expected, "{name}/{file} differs from its golden table");
    }
}

#[test]
fn fig3_ber() {
    check("fig3_ber");
}

#[test]
fn fig3_ber_default_group() {
    check("fig3_ber_default_group");
}

#[test]
fn fig4_mse() {
    check("fig4_mse");
}

#[test]
fn fig5_gap() {
    check("fig5_gap");
}

#[test]
fn fig6_an() {
    check("fig6_an");
}

#[test]
fn fig7_threshold() {
    check("fig7_threshold");
}

#[test]
fn fig8_system() {
    check("fig8_system");
}
