//! Independent chains run on the rayon pool.

use netrecon_core::dynamics::StateMatrix;
use netrecon_core::inference::{
    chain_seed, run_chain, ChainDiagnostics, EdgeTally, GraphSample, Hyperparameters, McmcConfig,
    Posterior, SampleSink, TraceIndex,
};
use netrecon_core::rng;
use rayon::prelude::*;

fn run_all<S, F>(
    x: &StateMatrix,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    seed: u64,
    make_sink: F,
) -> netrecon_core::Result<Vec<(S, ChainDiagnostics)>>
where
    S: SampleSink + Send,
    F: Fn() -> S + Sync,
{
    config.validate()?;
    hyper.validate()?;
    let trace = TraceIndex::new(x);
    (0..config.n_chains)
        .into_par_iter()
        .map(|chain| {
            let mut rng = rng::seeded(chain_seed(seed, chain));
            let mut sink = make_sink();
            let diag = run_chain(&trace, hyper, config, chain, &mut rng, &mut sink)?;
            Ok((sink, diag))
        })
        .collect()
}

/// Same output as [`netrecon_core::inference::edge_flip_mcmc`], with the
/// chains spread over the current rayon pool.
pub fn sample_posterior(
    x: &StateMatrix,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    seed: u64,
) -> netrecon_core::Result<Posterior> {
    let runs = run_all(x, hyper, config, seed, Vec::<GraphSample>::new)?;
    let mut samples = Vec::with_capacity(config.n_samples * config.n_chains);
    let mut diagnostics = Vec::with_capacity(runs.len());
    for (s, d) in runs {
        samples.extend(s);
        diagnostics.push(d);
    }
    Ok(Posterior {
        samples,
        diagnostics,
    })
}

/// Like [`sample_posterior`] but keeps only per-pair counts and densities.
pub fn tally_posterior(
    x: &StateMatrix,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    seed: u64,
) -> netrecon_core::Result<(EdgeTally, Vec<ChainDiagnostics>)> {
    let n = x.node_count();
    let runs = run_all(x, hyper, config, seed, || EdgeTally::new(n))?;
    let mut tally = EdgeTally::new(n);
    let mut diagnostics = Vec::with_capacity(runs.len());
    for (t, d) in runs {
        tally.merge(&t);
        diagnostics.push(d);
    }
    Ok((tally, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use netrecon_core::dynamics::{simulate, ContagionFunction, DynamicsParams};
    use netrecon_core::inference::edge_flip_mcmc;
    use netrecon_core::netgen::erdos_renyi;

    #[test]
    fn parallel_chains_match_sequential_run() {
        let mut r = rng::seeded(1);
        let g = erdos_renyi(7, 0.4, &mut r).unwrap();
        let p = DynamicsParams::new(0.2, ContagionFunction::simple(0.3).unwrap()).unwrap();
        let x = simulate(&g, &p, &[1; 7], 80, &mut r).unwrap();
        let hyper = Hyperparameters::uniform(7);
        let cfg = McmcConfig {
            burn_in: 500,
            thinning: 50,
            n_samples: 30,
            n_chains: 3,
            init_density: 0.5,
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let par = pool.install(|| sample_posterior(&x, &hyper, &cfg, 9)).unwrap();
        assert_eq!(par, edge_flip_mcmc(&x, &hyper, &cfg, 9).unwrap());
        let (tally, diag) = pool.install(|| tally_posterior(&x, &hyper, &cfg, 9)).unwrap();
        assert_eq!(tally.matrix(), par.edge_probabilities().unwrap());
        assert_eq!(diag, par.diagnostics);
    }
}
