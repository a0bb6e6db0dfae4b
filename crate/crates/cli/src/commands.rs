use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mvprobit::config::FitConfig;
use mvprobit::data::{simulate_panel, CodebookSpec, CovariateGenerator, CsvLayout, PanelData, TrueParams};
use mvprobit::diagnostics::{
    geweke_joint_test, harness_design, harness_spec, iact_ratio_report, GewekeConfig, SeriesSummary,
};
use mvprobit::inference::{
    extract_graph, graph_to_dot, posterior_predictive, precision_series, run_chain, run_px_chain,
    summarize_predictive, write_edges_csv, ChainDraws, GraphMatrix, PredictEvent, BLOCK_NAMES,
};
use mvprobit::priors::PriorStudy;
use mvprobit::samplers::ProposalMode;
use mvprobit::{Error, Result};

use crate::{
    BetaPriorArg, DiagnoseArgs, FitArgs, GewekeArgs, GraphArgs, ModeArg, PredictArgs, PriorStudyArgs, SigmaPriorArg,
    SimulateArgs,
};

const OUT_ENV: &str = "MVPROBIT_OUT";

fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn read_draws(dir: &Path) -> Result<ChainDraws> {
    if !dir.join("header.json").is_file() {
        return Err(usage(format!("{} does not contain fitted draws", dir.display())));
    }
    ChainDraws::read_dir(dir)
}

fn truncate_outcomes(t: &TrueParams, d: usize) -> Result<TrueParams> {
    let (dd, k) = (t.outcomes(), t.covariates());
    if d == 0 || d > dd {
        return Err(usage(format!("parameter set has {dd} outcomes, asked for {d}")));
    }
    Ok(TrueParams {
        outcomes: t.outcomes[..d].to_vec(),
        covariates: t.covariates.clone(),
        beta: t.beta[..d * k].to_vec(),
        r_eps: t.r_eps[..d * (d - 1) / 2].to_vec(),
        sigma_alpha: t.sigma_alpha[..d].iter().map(|r| r[..d].to_vec()).collect(),
    })
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let mut truth = match &a.truth {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<TrueParams>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => TrueParams::paper(),
    };
    if let Some(d) = a.outcomes {
        truth = truncate_outcomes(&truth, d)?;
    }
    truth.matrices().map_err(|e| usage(format!("invalid parameters: {e}")))?;
    let codebook = CodebookSpec::gp_survey();
    let generator = if truth.covariates == codebook.covariate_names() {
        CovariateGenerator::Codebook(codebook)
    } else {
        CovariateGenerator::Gaussian {
            columns: truth.covariates(),
        }
    };
    let sim = simulate_panel(&truth, a.individuals, a.periods, &generator, a.seed)?;
    let out = output_root(a.out);
    fs::create_dir_all(&out)?;
    sim.data.write_csv(BufWriter::new(fs::File::create(out.join("data.csv"))?))?;
    fs::write(out.join("truth.json"), serde_json::to_string_pretty(&truth)?)?;

    let mut w = csv::Writer::from_path(out.join("random_effects.csv"))?;
    let mut header = vec!["individual".to_string()];
    header.extend(truth.outcomes.iter().map(|o| format!("alpha_{o}")));
    w.write_record(&header)?;
    for (i, alpha) in sim.alpha.iter().enumerate() {
        let mut rec = vec![sim.data.ids()[i].clone()];
        rec.extend(alpha.iter().map(|&v| num(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let layout = CsvLayout {
        outcomes: truth.outcomes.clone(),
        ..Default::default()
    };
    let template = serde_json::json!({
        "model": 1,
        "data": { "path": "data.csv", "layout": layout },
    });
    fs::write(out.join("fit_config.json"), serde_json::to_string_pretty(&template)?)?;
    let rates: Vec<String> = sim.data.outcome_rates().iter().map(|r| format!("{r:.3}")).collect();
    println!(
        "simulated P={} T={} D={} K={} into {} (outcome rates {})",
        a.individuals,
        a.periods,
        truth.outcomes(),
        truth.covariates(),
        out.display(),
        rates.join(", ")
    );
    Ok(())
}

fn write_individuals(data: &PanelData, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["individual".to_string()];
    header.extend(data.individual_covariate_names().iter().cloned());
    w.write_record(&header)?;
    for i in 0..data.individuals() {
        let mut rec = vec![data.ids()[i].clone()];
        rec.extend(data.z_row(i).iter().map(|&v| num(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn fit(a: FitArgs) -> Result<()> {
    let mut cfg = FitConfig::from_path(&a.config)?;
    if let Some(s) = a.seed {
        cfg.sampler.seed = s;
    }
    if let Some(r) = a.replicates {
        if r == 0 {
            return Err(usage("replicates must be at least 1"));
        }
        cfg.replicates = r;
    }
    let data = cfg.load_data()?;
    let out = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| output_root(None));
    fs::create_dir_all(&out)?;
    let runs: Vec<(usize, PathBuf)> = (0..cfg.replicates)
        .map(|r| {
            let dir = if cfg.replicates == 1 { out.clone() } else { out.join(format!("replicate_{r}")) };
            (r, dir)
        })
        .collect();
    let results: Vec<Result<String>> = runs
        .par_iter()
        .map(|(r, dir)| {
            let mut sampler = cfg.sampler.clone();
            sampler.seed = cfg.sampler.seed + *r as u64;
            let draws = run_chain(&data, &cfg.spec, &sampler)?;
            draws.write_dir(dir)?;
            write_individuals(&data, &dir.join("individuals.csv"))?;
            let mut line = format!(
                "{}: {} draws, {:.3e} s/iteration, {} divergences after burn-in",
                dir.display(),
                draws.len(),
                draws.meta.seconds_per_iteration,
                draws.meta.divergences_after_burn_in
            );
            if cfg.spec.include_px_comparison {
                let px = run_px_chain(&data, &cfg.spec, &sampler)?;
                px.write_dir(&dir.join("px"))?;
                line.push_str(&format!("; px {:.3e} s/iteration", px.meta.seconds_per_iteration));
            }
            Ok(line)
        })
        .collect();
    for r in results {
        println!("{}", r?);
    }
    Ok(())
}

pub fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let blocks: Vec<&str> = a.blocks.iter().map(String::as_str).collect();
    let out = output_root(a.out.or_else(|| Some(a.draws.clone())));
    fs::create_dir_all(&out)?;
    if let Some(other) = &a.compare {
        let b = read_draws(other)?;
        let table = iact_ratio_report(&draws, &b, &blocks, (&a.label, &a.compare_label))?;
        table.write_csv(fs::File::create(out.join("iact_ratio.csv"))?)?;
        fs::write(out.join("iact_ratio.txt"), format!("{table}\n"))?;
        println!("{table}");
        return Ok(());
    }
    let names: Vec<&str> = if blocks.is_empty() {
        BLOCK_NAMES.iter().copied().filter(|n| draws.block(n).is_some()).collect()
    } else {
        blocks
    };
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    w.write_record(["block", "parameter", "n", "mean", "sd", "q025", "q25", "q50", "q75", "q975", "iact", "ess"])?;
    println!("{:<22} {:>12} {:>12} {:>12} {:>12} {:>9}", "parameter", "mean", "sd", "q025", "q975", "iact");
    for name in names {
        let block = draws
            .block(name)
            .ok_or_else(|| usage(format!("block `{name}` is not stored in {}", a.draws.display())))?;
        for (j, param) in block.names.iter().enumerate() {
            let s = SeriesSummary::new(&block.series(j))?;
            let mut rec = vec![name.to_string(), param.clone(), s.n.to_string(), num(s.mean), num(s.sd)];
            rec.extend(s.quantiles.iter().map(|&q| num(q)));
            rec.push(opt_num(s.iact));
            rec.push(opt_num(s.ess));
            w.write_record(&rec)?;
            if name != "alpha" && name != "latent" {
                println!(
                    "{:<22} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>9.2}",
                    param,
                    s.mean,
                    s.sd,
                    s.quantiles[0],
                    s.quantiles[4],
                    s.iact.unwrap_or(f64::NAN)
                );
            }
        }
    }
    w.flush()?;
    println!(
        "{} draws; {} divergences after burn-in; summary written to {}",
        draws.len(),
        draws.meta.divergences_after_burn_in,
        out.join("summary.csv").display()
    );
    Ok(())
}

/// Individual ids and individual-level covariate rows written by `fit`.
fn read_individuals(dir: &Path, p: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = dir.join("individuals.csv");
    if !path.is_file() {
        return Ok(((1..=p).map(|i| i.to_string()).collect(), vec![Vec::new(); p]));
    }
    let mut ids = Vec::new();
    let mut z = Vec::new();
    for rec in csv::Reader::from_path(&path)?.records() {
        let rec = rec?;
        ids.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| usage(format!("bad number `{v}` in {}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        z.push(row);
    }
    if ids.len() != p {
        return Err(usage(format!("{} lists {} individuals, draws have {p}", path.display(), ids.len())));
    }
    Ok((ids, z))
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let event = match (&a.event.bundle, &a.event.all_of, a.event.outcome) {
        (Some(b), _, _) => PredictEvent::at_least_one(b)?,
        (_, Some(b), _) => PredictEvent::all(b)?,
        (_, _, Some(d)) => PredictEvent::at_least_one(&[d])?,
        _ => return Err(usage("choose --bundle, --all-of or --outcome")),
    };
    event.validate(draws.outcomes())?;
    let p = draws.meta.individuals;
    let (ids, z) = read_individuals(&a.draws, p)?;
    let g = if draws.meta.spec.individual_covariates { z[0].len() } else { 0 };
    let k_obs = draws.covariates() - g - 1;
    let x = a.x.unwrap_or_else(|| vec![0.0; k_obs]);
    if x.len() != k_obs {
        return Err(usage(format!("--x needs {k_obs} values (covariates without the intercept), got {}", x.len())));
    }
    let base: Vec<f64> = std::iter::once(1.0).chain(x).collect();
    let designs: Vec<Vec<f64>> = if g == 0 {
        vec![base]
    } else {
        z.iter().map(|zi| base.iter().chain(zi).copied().collect()).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let series = posterior_predictive(&draws, &designs, &event, a.n_mc, &mut rng)?;
    let summary = summarize_predictive(&series);
    let out = output_root(a.out.or_else(|| Some(a.draws.clone())));
    fs::create_dir_all(&out)?;
    let label = event.label();
    let mut w = csv::Writer::from_path(out.join("predict.csv"))?;
    w.write_record(["individual", label.as_str(), "median", "q025", "q975"])?;
    for s in &summary {
        w.write_record([ids[s.individual].clone(), num(s.mean), num(s.median), num(s.q025), num(s.q975)])?;
    }
    w.flush()?;
    let means: Vec<f64> = summary.iter().map(|s| s.mean).collect();
    let (lo, hi) = means
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &m| (l.min(m), h.max(m)));
    println!(
        "{label}: posterior means over {p} individuals range {lo:.4} to {hi:.4}; written to {}",
        out.join("predict.csv").display()
    );
    Ok(())
}

pub fn graph(a: GraphArgs) -> Result<()> {
    let matrix: GraphMatrix = a.matrix.parse()?;
    let draws = read_draws(&a.draws)?;
    let series = precision_series(&draws, matrix)?;
    let edges = extract_graph(&series, a.level)?;
    let labels = draws.meta.outcomes.clone();
    let out = output_root(a.out.or_else(|| Some(a.draws.clone())));
    fs::create_dir_all(&out)?;
    fs::write(out.join("graph.dot"), graph_to_dot(&edges, &labels))?;
    write_edges_csv(&edges, &labels, fs::File::create(out.join("edges.csv"))?)?;
    println!("{} edges at level {}", edges.len(), a.level);
    for e in &edges {
        println!(
            "  {} -- {}  mean {:+.4}  [{:+.4}, {:+.4}]",
            labels[e.i], labels[e.j], e.mean, e.lower, e.upper
        );
    }
    Ok(())
}

pub fn prior_study(a: PriorStudyArgs) -> Result<()> {
    let nu = a.nu.unwrap_or(a.dim as f64 + 1.0);
    let study = PriorStudy::run(a.dim, nu, a.draws, a.seed)?;
    let summary = study.summary()?;
    let out = output_root(a.out);
    fs::create_dir_all(&out)?;
    study.write_csv(BufWriter::new(fs::File::create(out.join("prior_draws.csv"))?))?;
    fs::write(out.join("prior_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("D = {}, nu = {nu}, {} draws", a.dim, a.draws);
    println!("{:<20} {:>10} {:>10}", "marginal", "KS", "p-value");
    for f in summary.r_fits.iter().chain(&summary.rho_fits) {
        println!("{:<20} {:>10.5} {:>10.4}", f.name, f.ks_statistic, f.p_value);
    }
    println!("{:<20} {:>10}", "pair", "pearson");
    for d in &summary.dependence {
        println!("{:<20} {:>10.4}", d.name, d.value);
    }
    Ok(())
}

pub fn geweke_test(a: GewekeArgs) -> Result<()> {
    let design = harness_design(a.covariates, a.x_scale)?;
    let spec = harness_spec(
        matches!(a.beta_prior, BetaPriorArg::Horseshoe),
        matches!(a.sigma_prior, SigmaPriorArg::Hiw),
    );
    let mode = match a.mode {
        ModeArg::Independent => ProposalMode::Independent,
        ModeArg::Antithetic => ProposalMode::Antithetic,
    };
    let cfg = GewekeConfig {
        sweeps: a.sweeps,
        prior_draws: a.sweeps,
        beta_mode: mode,
        alpha_mode: mode,
        seed: a.seed,
        ..Default::default()
    };
    let report = geweke_joint_test(&design, &spec, &cfg)?;
    let out = output_root(a.out);
    fs::create_dir_all(&out)?;
    let mut w = csv::Writer::from_path(out.join("geweke.csv"))?;
    w.write_record(["function", "prior_mean", "chain_mean", "z"])?;
    for j in 0..report.z.len() {
        w.write_record([
            report.names[j].clone(),
            num(report.prior_mean[j]),
            num(report.chain_mean[j]),
            num(report.z[j]),
        ])?;
    }
    w.flush()?;
    let mut order: Vec<usize> = (0..report.z.len()).collect();
    order.sort_by(|&i, &j| report.z[j].abs().total_cmp(&report.z[i].abs()));
    println!("{:<28} {:>12} {:>12} {:>8}", "function", "prior", "chain", "z");
    for &j in order.iter().take(5) {
        println!(
            "{:<28} {:>12.5} {:>12.5} {:>8.2}",
            report.names[j], report.prior_mean[j], report.chain_mean[j], report.z[j]
        );
    }
    println!("max |z| = {:.3} over {} test functions", report.max_abs_z(), report.z.len());
    Ok(())
}
