//! Scratch probe: empirical moments of T_{n,G} vs fitted Gamma moments.

use hsic::{
    center_biased, center_unbiased, cumulants, gen_sim2_null, gram, statistic, InnovationModel,
    KernelConfig, Sim2NullSpec,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let p: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let reps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(300);

    let mut tng_vals = Vec::new();
    let mut tn_vals = Vec::new();
    let mut mu_hat = Vec::new();
    let mut var_hat = Vec::new();
    let mut mu_hat_unb = Vec::new();
    let mut var_hat_unb = Vec::new();
    let cfg = KernelConfig::auto();

    for r in 0..reps {
        let spec = Sim2NullSpec {
            model: InnovationModel::Normal,
            n,
            p,
            rho: 0.5,
            seed: 42_000 + r as u64,
        };
        let (x, y) = gen_sim2_null(&spec).unwrap();
        let kg = gram(&x, &cfg).unwrap();
        let lg = gram(&y, &cfg).unwrap();
        let kb = center_biased(&kg);
        let lb = center_biased(&lg);
        let tng = statistic(&kb, &lb).unwrap();
        let mb = cumulants(&kb).unwrap();
        let nb = cumulants(&lb).unwrap();
        tng_vals.push(tng.value);
        mu_hat.push(mb.c1 * nb.c1);
        var_hat.push(2.0 * mb.c2 * nb.c2);

        let ku = center_unbiased(&kg).unwrap();
        let lu = center_unbiased(&lg).unwrap();
        let tn = statistic(&ku, &lu).unwrap();
        let mu = cumulants(&ku).unwrap();
        let nu = cumulants(&lu).unwrap();
        tn_vals.push(tn.value);
        mu_hat_unb.push(mu.c1 * nu.c1);
        var_hat_unb.push(2.0 * mu.c2 * nu.c2);
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    println!("n={n} p={p} reps={reps}");
    println!(
        "T_nG: emp mean {:.6e}  emp var {:.6e}",
        mean(&tng_vals),
        var(&tng_vals)
    );
    println!(
        "fitted (biased grams): mean(mu_hat) {:.6e}  mean(var_hat) {:.6e}",
        mean(&mu_hat),
        mean(&var_hat)
    );
    println!(
        "T_n : emp mean {:.6e}  emp var {:.6e}",
        mean(&tn_vals),
        var(&tn_vals)
    );
    println!(
        "fitted (unbiased grams): mean(mu_hat) {:.6e}  mean(var_hat) {:.6e}",
        mean(&mu_hat_unb),
        mean(&var_hat_unb)
    );
}
