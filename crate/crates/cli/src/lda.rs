use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use annealed_walk::lda::{
    default_tolerance, run_kappa_sweep, toy_mode_catalog, Corpus, Hyper, ModeRef, StartState, SweepConfig,
    SweepRecord, ToyMode,
};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::{install_threads, persist, resolve_seed, CommonArgs};
use crate::output::create;
use crate::CliError;

pub const SWEEP_HEADER: &str = "kappa,run,end_mode,log_posterior";

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Use the three-document toy corpus with this many tokens.
    #[arg(long)]
    pub toy: Option<usize>,
    /// Corpus file, one document per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Vocabulary sidecar for a corpus of raw tokens.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Comma separated; the first stage runs at sigma = kappa / tokens.
    #[arg(long, value_delimiter = ',')]
    pub kappas: Option<Vec<f64>>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Token updates at sigma = kappa / tokens (default 5 tokens^2).
    #[arg(long)]
    pub stage1_steps: Option<u64>,
    /// Token updates at sigma = 1 (default tokens^2).
    #[arg(long)]
    pub stage2_steps: Option<u64>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub lda_alpha: Option<f64>,
    #[arg(long)]
    pub lda_beta: Option<f64>,
    /// Toy corpus: second | best | worst | uniform. Other corpora: uniform.
    #[arg(long)]
    pub start: Option<String>,
}

fn load_corpus(args: &LdaArgs) -> Result<(Arc<Corpus>, bool), CliError> {
    match (args.toy, &args.corpus) {
        (Some(_), Some(_)) => Err(CliError::Usage("give --toy or --corpus, not both".into())),
        (Some(n), None) => Ok((Arc::new(Corpus::toy(n).map_err(|e| CliError::Usage(e.to_string()))?), true)),
        (None, Some(path)) => {
            let c = Corpus::from_file(path, args.vocab.as_deref())
                .map_err(|e| CliError::Usage(format!("malformed corpus {}: {e}", path.display())))?;
            if c.tokens() == 0 {
                return Err(CliError::Usage("corpus has no tokens".into()));
            }
            Ok((Arc::new(c), false))
        }
        (None, None) => Err(CliError::Usage("missing --toy or --corpus".into())),
    }
}

/// Sweep configuration and records; the catalog is empty for non-toy corpora.
pub fn sweep(args: &LdaArgs, seed: u64) -> Result<(Vec<ModeRef>, Vec<SweepRecord>), CliError> {
    let (corpus, toy) = load_corpus(args)?;
    let tokens = corpus.tokens() as u64;
    let topics = args.topics.unwrap_or(2);
    let hyper = Hyper {
        alpha: args.lda_alpha.unwrap_or(1.0),
        beta: args.lda_beta.unwrap_or(1.0),
    };
    let closed_form = toy && topics == 2 && hyper == Hyper::default();
    let catalog = if closed_form {
        toy_mode_catalog(corpus.clone())?
    } else {
        Vec::new()
    };
    let start = match (args.start.as_deref(), toy) {
        (None | Some("uniform"), _) if !toy => StartState::Uniform,
        (Some("uniform"), _) => StartState::Uniform,
        (None | Some("second"), true) => StartState::Given(ToyMode::Second.assignment(&corpus)),
        (Some("best"), true) => StartState::Given(ToyMode::Best.assignment(&corpus)),
        (Some("worst"), true) => StartState::Given(ToyMode::Worst.assignment(&corpus)),
        (Some(other), _) => return Err(CliError::Usage(format!("unknown or unsupported --start `{other}`"))),
        (None, false) => StartState::Uniform,
    };
    if matches!(start, StartState::Given(_)) && topics != 2 {
        return Err(CliError::Usage("mode starts need --topics 2".into()));
    }
    let config = SweepConfig {
        kappas: args.kappas.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]),
        runs: args.runs.unwrap_or(100),
        stage1_steps: args.stage1_steps.unwrap_or(5 * tokens * tokens),
        stage2_steps: args.stage2_steps.unwrap_or(tokens * tokens),
        topics,
        hyper,
        start,
        tolerance: if catalog.len() > 1 { default_tolerance(&catalog) } else { 0.0 },
        catalog: catalog.clone(),
    };
    if config.kappas.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
        return Err(CliError::Usage("kappas must be positive".into()));
    }
    Ok((catalog, run_kappa_sweep(corpus, &config, seed)?))
}

fn mode_label(catalog: &[ModeRef], record: &SweepRecord) -> String {
    record.end_mode.map(|i| catalog[i].name.clone()).unwrap_or_default()
}

pub fn write_sweep(out: &mut dyn Write, catalog: &[ModeRef], records: &[SweepRecord]) -> Result<(), CliError> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.kappa, r.run, mode_label(catalog, r), r.log_posterior)?;
    }
    Ok(())
}

/// `kappa,mode,log_posterior,count,fraction`; without a catalog the log
/// posterior is rounded to the nearest integer and used as the mode label.
pub fn write_histogram(out: &mut dyn Write, catalog: &[ModeRef], records: &[SweepRecord]) -> Result<(), CliError> {
    writeln!(out, "kappa,mode,log_posterior,count,fraction")?;
    let mut by_kappa: Vec<(f64, BTreeMap<String, (f64, usize)>)> = Vec::new();
    for r in records {
        if by_kappa.last().is_none_or(|b| b.0 != r.kappa) {
            by_kappa.push((r.kappa, BTreeMap::new()));
        }
        let (label, lp) = if catalog.is_empty() {
            let rounded = r.log_posterior.round();
            (format!("lp{rounded}"), rounded)
        } else {
            match r.end_mode {
                Some(i) => (catalog[i].name.clone(), catalog[i].log_posterior),
                None => ("unclassified".to_string(), f64::NAN),
            }
        };
        let entry = by_kappa.last_mut().expect("pushed above").1.entry(label).or_insert((lp, 0));
        entry.1 += 1;
    }
    for (kappa, modes) in by_kappa {
        let total: usize = modes.values().map(|v| v.1).sum();
        for (label, (lp, count)) in modes {
            writeln!(out, "{kappa},{label},{lp},{count},{}", count as f64 / total as f64)?;
        }
    }
    Ok(())
}

pub fn run(args: &LdaArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_threads(args.common.threads)?;
    let seed = resolve_seed(args.common.seed)?;
    let started = std::time::Instant::now();
    let (catalog, records) = sweep(args, seed)?;
    eprintln!("lda: {} runs in {:.2}s", records.len(), started.elapsed().as_secs_f64());
    write_sweep(stdout, &catalog, &records)?;
    if let Some(dir) = &args.common.out {
        let mut resolved = args.clone();
        resolved.common.seed = Some(seed);
        persist(Some(dir), "lda", &resolved)?;
        write_sweep(&mut create(dir, "sweep.csv")?, &catalog, &records)?;
        write_histogram(&mut create(dir, "histogram.csv")?, &catalog, &records)?;
        let mut modes = create(dir, "modes.csv")?;
        writeln!(modes, "mode,log_posterior")?;
        for m in &catalog {
            writeln!(modes, "{},{}", m.name, m.log_posterior)?;
        }
    }
    Ok(())
}
