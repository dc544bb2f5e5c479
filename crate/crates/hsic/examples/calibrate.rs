//! Scratch calibration driver (not part of the deliverable test suite).

use hsic::{
    run_study, InnovationModel, LinkFn, MethodKind, Scenario, StudyConfig,
};
use std::time::Instant;

fn study(scenarios: Vec<Scenario>, method: MethodKind, runs: usize, seed: u64) {
    let cfg = StudyConfig {
        scenarios,
        method,
        permutations: 200,
        runs,
        alpha: 0.05,
        master_seed: seed,
        threads: 0,
    };
    let t0 = Instant::now();
    let report = run_study(&cfg).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    for o in &report.outcomes {
        println!(
            "{:?} {:?} runs={} rate={:.4} ({} rej)  [{dt:.1}s total]",
            o.method, o.scenario, o.runs, o.empirical_rate, o.rejections
        );
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let runs: usize = args
        .get(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);

    let sim2null = Scenario::Sim2Null {
        model: InnovationModel::Normal,
        n: 100,
        p: 100,
        rho: 0.5,
    };
    let sim2alt = Scenario::Sim2Alt {
        n: 50,
        p: 50,
        rho: 0.5,
        delta: 1.0,
    };
    let sim3null = Scenario::Sim3 {
        f: LinkFn::Square,
        m: 0,
        n: 50,
        k: 201,
    };

    match which {
        "c4new" => study(vec![sim2null], MethodKind::New, runs, 1001),
        "c4gamma" => study(vec![sim2null], MethodKind::Gamma, runs, 1002),
        "c4perm" => study(vec![sim2null], MethodKind::Permutation, runs, 1003),
        "c5new" => study(vec![sim2alt], MethodKind::New, runs, 1004),
        "c5gamma" => study(vec![sim2alt], MethodKind::Gamma, runs, 1005),
        "c6" => study(vec![sim3null], MethodKind::New, runs, 1006),
        "c7" => {
            let ms = [3usize, 5, 10, 15];
            let scenarios: Vec<Scenario> = ms
                .iter()
                .map(|&m| Scenario::Sim3 {
                    f: LinkFn::Square,
                    m,
                    n: 100,
                    k: 201,
                })
                .collect();
            study(scenarios, MethodKind::New, runs, 1007);
        }
        other => eprintln!("unknown target {other}"),
    }
}
