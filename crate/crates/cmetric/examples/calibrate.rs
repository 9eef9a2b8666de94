//! Prints per-agent signal statistics for each synthetic scenario across
//! seeds; used to place the default detection thresholds.

use cmetric::centrality::compute_series;
use cmetric::styles::smooth_agent_series;
use cmetric::synth::{generate, Scenario, ScenarioKind};
use cmetric::Config;

fn main() {
    let cfg = Config::default();
    for kind in [
        ScenarioKind::ConservativePlatoon,
        ScenarioKind::OverspeedingPass,
        ScenarioKind::OvertakeSingle,
        ScenarioKind::SuddenLaneChange,
        ScenarioKind::WeavingSinusoid,
        ScenarioKind::Mixed,
    ] {
        println!("=== {:?} ===", kind);
        for seed in [0u64, 1, 2, 3, 4, 10, 17] {
            let sc = Scenario::new(kind).with_seed(seed);
            let (ds, events) = generate(&sc).unwrap();
            let series = compute_series(&ds, cfg.mu).unwrap();
            let mut ids: Vec<&String> = series.keys().collect();
            ids.sort();
            for id in ids {
                let s = &series[id];
                if s.len() < cfg.window {
                    println!("  seed {seed} {id}: too short");
                    continue;
                }
                let sig = smooth_agent_series(&s.closeness, &s.degree, s.start_frame, &cfg).unwrap();
                let (t0, sle0) = sig.closeness.sle_max();
                let (t1, sle1) = sig.degree.sle_max();
                let pts = sig.closeness.find_extreme_points(cfg.epsilon, cfg.zero_tol).unwrap();
                let max_sharp = pts.iter().map(|p| p.sharpness).fold(0.0, f64::max);
                let n_sharp = pts.iter().filter(|p| p.sharpness > cfg.thresholds.sharp_tol).count();
                println!(
                    "  seed {seed} {id:<10} sle0_max={sle0:<9.4} @{t0:<4} sle1_max={sle1:<9.4} @{t1:<4} extrema={:<2} sharp>{:.2}: {n_sharp:<2} max_sharp={max_sharp:.4}",
                    pts.len(),
                    cfg.thresholds.sharp_tol,
                );
            }
            for e in &events {
                println!(
                    "    truth: {} {} window=[{},{}] expected={:.1}",
                    e.agent_id,
                    e.style.as_str(),
                    e.window.0,
                    e.window.1,
                    e.expected_frame
                );
            }
        }
    }
}
