//! `npproc fit` subcommands: topic models with multi-chain support, and GP
//! posterior regression.

use serde::Serialize;

use npproc_core::corpus::{load_uci_bow, write_model, Corpus};
use npproc_core::gp::{gp_fit, gp_posterior, KernelSpec, MeanMeasure};
use npproc_core::topics::{
    ftm_gibbs_fit_observed, ftm_joint_log_prob, lda_gibbs_fit_observed, lda_joint_log_prob,
    FittedModel, FtmParams, LdaParams,
};
use npproc_core::{Error, RngStream};

use crate::args::{FtmFitArgs, GpFitArgs, LdaFitArgs};
use crate::csvio::{parse_point_list, read_points_csv, read_xy_csv};
use crate::provenance::{comment_header, emit, json_artifact};
use crate::CliError;

struct ChainOutcome {
    model: FittedModel,
    trace: Vec<f64>,
    final_joint: f64,
}

#[derive(Serialize)]
struct ChainReport {
    chain: usize,
    final_joint_log_prob: f64,
}

#[derive(Serialize)]
struct FitPayload {
    iterations: usize,
    burn_in: usize,
    chains: Vec<ChainReport>,
    selected_chain: usize,
    k_active: usize,
    model_path: String,
}

/// Run `chains` independent seeded chains concurrently and keep the model
/// whose final joint log-probability is best (ties to the lowest id).
fn run_chains(
    chains: usize,
    run: impl Fn(u64) -> Result<ChainOutcome, Error> + Sync,
) -> Result<Vec<ChainOutcome>, Error> {
    let mut outcomes: Vec<Option<ChainOutcome>> = (0..chains).map(|_| None).collect();
    std::thread::scope(|scope| -> Result<(), Error> {
        let handles: Vec<_> = (0..chains)
            .map(|c| {
                let run = &run;
                scope.spawn(move || run(c as u64))
            })
            .collect();
        for (c, h) in handles.into_iter().enumerate() {
            outcomes[c] = Some(h.join().expect("chain thread panicked")?);
        }
        Ok(())
    })?;
    Ok(outcomes.into_iter().map(|o| o.expect("chain ran")).collect())
}

fn select_best(outcomes: &[ChainOutcome]) -> usize {
    let mut best = 0;
    for (c, o) in outcomes.iter().enumerate() {
        if o.final_joint > outcomes[best].final_joint {
            best = c;
        }
    }
    best
}

fn write_trace(
    path: &std::path::Path,
    outcomes: &[ChainOutcome],
    config: &impl Serialize,
    seed: u64,
) -> Result<(), CliError> {
    let mut out = comment_header(config, seed);
    out.push_str("chain,sweep,joint_log_prob\n");
    for (c, o) in outcomes.iter().enumerate() {
        for (sweep, lp) in o.trace.iter().enumerate() {
            out.push_str(&format!("{c},{sweep},{lp}\n"));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn finish_fit<C: Serialize>(
    args_out: &std::path::Path,
    trace: &Option<std::path::PathBuf>,
    config: &C,
    seed: u64,
    iters: usize,
    burn_in: usize,
    outcomes: Vec<ChainOutcome>,
) -> Result<(), CliError> {
    let selected = select_best(&outcomes);
    write_model(&outcomes[selected].model, args_out)?;
    if let Some(path) = trace {
        write_trace(path, &outcomes, config, seed)?;
    }
    let payload = FitPayload {
        iterations: iters,
        burn_in,
        chains: outcomes
            .iter()
            .enumerate()
            .map(|(c, o)| ChainReport {
                chain: c,
                final_joint_log_prob: o.final_joint,
            })
            .collect(),
        selected_chain: selected,
        k_active: outcomes[selected].model.k_active(),
        model_path: args_out.display().to_string(),
    };
    print!("{}", json_artifact(config, seed, payload));
    Ok(())
}

fn load_corpus(docword: &std::path::Path, vocab: &std::path::Path) -> Result<Corpus, CliError> {
    Ok(load_uci_bow(docword, vocab)?)
}

pub fn cmd_fit_lda(args: &LdaFitArgs) -> Result<(), CliError> {
    if args.chains == 0 {
        return Err("--chains must be >= 1".to_string().into());
    }
    let corpus = load_corpus(&args.docword, &args.vocab)?;
    let params = LdaParams::new(
        args.topics,
        args.alpha,
        args.eta,
        args.kappa,
        corpus.vocab_size(),
    )?;
    let outcomes = run_chains(args.chains, |stream_id| {
        let mut rng = RngStream::new(args.seed, stream_id);
        let mut trace = Vec::with_capacity(args.iters);
        let model = lda_gibbs_fit_observed(
            &corpus,
            &params,
            args.iters,
            args.burn_in,
            &mut rng,
            &mut |view| trace.push(lda_joint_log_prob(view.state, &params)),
        )?;
        let final_joint = *trace.last().unwrap();
        Ok(ChainOutcome {
            model,
            trace,
            final_joint,
        })
    })?;
    finish_fit(
        &args.out,
        &args.trace,
        args,
        args.seed,
        args.iters,
        args.burn_in,
        outcomes,
    )
}

pub fn cmd_fit_ftm(args: &FtmFitArgs) -> Result<(), CliError> {
    if args.chains == 0 {
        return Err("--chains must be >= 1".to_string().into());
    }
    let corpus = load_corpus(&args.docword, &args.vocab)?;
    let params = FtmParams::new(
        npproc_core::ibp::IbpParams::new(args.ibp_alpha, args.ibp_beta)?,
        args.phi,
        args.eta,
        args.kappa,
        corpus.vocab_size(),
    )?;
    let outcomes = run_chains(args.chains, |stream_id| {
        let mut rng = RngStream::new(args.seed, stream_id);
        let mut trace = Vec::with_capacity(args.iters);
        let model = ftm_gibbs_fit_observed(
            &corpus,
            &params,
            args.k_max,
            args.iters,
            args.burn_in,
            &mut rng,
            &mut |view| {
                trace.push(ftm_joint_log_prob(
                    view.state,
                    view.gates.expect("ftm sweeps carry gates"),
                    &params,
                    args.k_max,
                ))
            },
        )?;
        let final_joint = *trace.last().unwrap();
        Ok(ChainOutcome {
            model,
            trace,
            final_joint,
        })
    })?;
    finish_fit(
        &args.out,
        &args.trace,
        args,
        args.seed,
        args.iters,
        args.burn_in,
        outcomes,
    )
}

pub fn cmd_fit_gp(args: &GpFitArgs) -> Result<(), CliError> {
    let (train_x, train_y) = read_xy_csv(&args.train)?;
    let test_x = match (&args.test_points, &args.test_file) {
        (Some(spec), _) => parse_point_list(spec)?,
        (None, Some(path)) => read_points_csv(path)?,
        (None, None) => return Err("need --test-points or --test-file".to_string().into()),
    };
    let kernel = KernelSpec::squared_exponential(args.lengthscale, args.signal_variance)?;
    let mean = match args.mean_constant {
        Some(c) => MeanMeasure::Constant(c),
        None => MeanMeasure::Zero,
    };
    let model = gp_fit(&train_x, &train_y, mean, kernel, args.noise_variance)?;
    let (mu, cov) = gp_posterior(&model, &test_x)?;

    let mut out = comment_header(args, 0);
    out.push_str("x,mean,variance\n");
    for (i, &x) in test_x.iter().enumerate() {
        out.push_str(&format!("{x},{},{}\n", mu[i], cov[i][i]));
    }
    emit(&args.out, &out)?;
    Ok(())
}
