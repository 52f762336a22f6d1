//! `npproc sample` subcommands.

use serde::Serialize;

use npproc_core::crp::{crp_sample, DpParams};
use npproc_core::gp::{gp_prior_sample, KernelSpec, MeanMeasure};
use npproc_core::ibp::{finite_bb_sample, format_matrix_block, ibp_sample, IbpParams};
use npproc_core::RngStream;

use crate::args::{CrpArgs, GpPriorArgs, IbpArgs};
use crate::csvio::{parse_point_list, read_points_csv};
use crate::provenance::{comment_header, emit, json_artifact};
use crate::CliError;

pub fn cmd_sample_crp(args: &CrpArgs) -> Result<(), CliError> {
    let params = DpParams::new(args.alpha)?;
    let mut rng = RngStream::new(args.seed, 0);
    let mut out = comment_header(args, args.seed);
    for _ in 0..args.draws {
        let p = crp_sample(args.n, &params, &mut rng)?;
        let sizes: Vec<String> = p.cluster_sizes().iter().map(|s| s.to_string()).collect();
        out.push_str(&sizes.join(","));
        out.push('\n');
    }
    emit(&args.out, &out)?;
    Ok(())
}

#[derive(Serialize)]
struct KPlusSummary {
    chain: Option<usize>,
    draws: usize,
    mean_k_plus: f64,
    se_k_plus: f64,
}

#[derive(Serialize)]
struct IbpSummaryPayload {
    per_chain: Vec<KPlusSummary>,
    pooled: KPlusSummary,
}

fn summarize(chain: Option<usize>, counts: &[usize]) -> KPlusSummary {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = counts
        .iter()
        .map(|&k| (k as f64 - mean) * (k as f64 - mean))
        .sum::<f64>()
        / n;
    KPlusSummary {
        chain,
        draws: counts.len(),
        mean_k_plus: mean,
        se_k_plus: (var / n).sqrt(),
    }
}

pub fn cmd_sample_ibp(args: &IbpArgs) -> Result<(), CliError> {
    let params = IbpParams::new(args.alpha, args.beta)?;
    if args.chains == 0 {
        return Err("--chains must be >= 1".to_string().into());
    }

    let draw = |rng: &mut RngStream| -> Result<_, npproc_core::Error> {
        match args.finite_k {
            Some(k) => finite_bb_sample(args.n, k, args.alpha, rng),
            None => ibp_sample(args.n, &params, rng),
        }
    };

    if args.summary {
        // Chains run over distinct stream ids; results reduce in order.
        let mut per_chain = Vec::with_capacity(args.chains);
        let mut chain_counts: Vec<Vec<usize>> = vec![Vec::new(); args.chains];
        std::thread::scope(|scope| -> Result<(), npproc_core::Error> {
            let handles: Vec<_> = (0..args.chains)
                .map(|c| {
                    scope.spawn(move || -> Result<Vec<usize>, npproc_core::Error> {
                        let mut rng = RngStream::new(args.seed, c as u64);
                        (0..args.draws).map(|_| Ok(draw(&mut rng)?.k_plus())).collect()
                    })
                })
                .collect();
            for (c, h) in handles.into_iter().enumerate() {
                chain_counts[c] = h.join().expect("chain thread panicked")?;
            }
            Ok(())
        })?;
        let mut all = Vec::new();
        for (c, counts) in chain_counts.iter().enumerate() {
            per_chain.push(summarize(Some(c), counts));
            all.extend_from_slice(counts);
        }
        let payload = IbpSummaryPayload {
            per_chain,
            pooled: summarize(None, &all),
        };
        emit(&args.out, &json_artifact(args, args.seed, payload))?;
        return Ok(());
    }

    let mut rng = RngStream::new(args.seed, 0);
    let mut out = comment_header(args, args.seed);
    for _ in 0..args.draws {
        let z = draw(&mut rng)?;
        out.push_str(&format_matrix_block(&z));
        out.push('\n');
    }
    emit(&args.out, &out)?;
    Ok(())
}

pub fn cmd_sample_gp_prior(args: &GpPriorArgs) -> Result<(), CliError> {
    let points = match (&args.points, &args.points_file) {
        (Some(spec), _) => parse_point_list(spec)?,
        (None, Some(path)) => read_points_csv(path)?,
        (None, None) => return Err("need --points or --points-file".to_string().into()),
    };
    let kernel = KernelSpec::squared_exponential(args.lengthscale, args.signal_variance)?;
    let mean = match args.mean_constant {
        Some(c) => MeanMeasure::Constant(c),
        None => MeanMeasure::Zero,
    };
    let mut rng = RngStream::new(args.seed, 0);
    let draws: Vec<Vec<f64>> = (0..args.draws)
        .map(|_| gp_prior_sample(&points, &mean, &kernel, &mut rng))
        .collect::<Result<_, _>>()?;

    let mut out = comment_header(args, args.seed);
    let header: Vec<String> = std::iter::once("x".to_string())
        .chain((0..args.draws).map(|d| format!("draw_{d}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, &x) in points.iter().enumerate() {
        let mut row = vec![x.to_string()];
        row.extend(draws.iter().map(|d| d[i].to_string()));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    emit(&args.out, &out)?;
    Ok(())
}
