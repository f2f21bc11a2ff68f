use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qhlab::run::{run, DomainSource, RunConfig};

/// Quasihyperbolic geometry laboratory.
///
/// Commands: dist, delta, gh, bs, deform, whitney, probe-theorem, report.
#[derive(Debug, Parser)]
#[command(name = "qhlab", version)]
struct Cli {
    /// Pipeline to run.
    command: String,
    /// Domain JSON file.
    #[arg(long, conflicts_with = "corpus")]
    domain: Option<PathBuf>,
    /// Corpus family (disk, half-plane-box, square, slit-square,
    /// punctured-box, comb, cusp).
    #[arg(long)]
    corpus: Option<String>,
    /// Family parameter `k=v`; `k=v1,v2,...` sweeps the family.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// Grid spacing, coarsest first; repeatable or comma separated.
    #[arg(long = "h", value_delimiter = ',')]
    hs: Vec<f64>,
    #[arg(long, default_value_t = qhlab::deformation::DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = qhlab::sampling::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = qhlab::run::DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = qhlab::run::DEFAULT_TRIPLES)]
    triples: usize,
    #[arg(long, default_value_t = qhlab::run::DEFAULT_LANDMARKS)]
    landmarks: usize,
    #[arg(long, default_value_t = qhlab::run::DEFAULT_SAMPLES)]
    samples: usize,
    /// Start point `x,y` for `dist`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    from: Option<[f64; 2]>,
    /// End point `x,y` for `dist`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    to: Option<[f64; 2]>,
    #[arg(long, default_value = "qhlab-out")]
    out: PathBuf,
    /// Also write SVG overlays.
    #[arg(long)]
    svg: bool,
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, Vec<f64>>, String> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected k=v, got `{item}`"))?;
        let values = v
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("parameter `{k}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(k.trim().to_string(), values);
    }
    Ok(out)
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    match s
        .split(',')
        .map(str::trim)
        .map(str::parse::<f64>)
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(v) if v.len() == 2 => Ok([v[0], v[1]]),
        _ => Err(format!("expected `x,y`, got `{s}`")),
    }
}

fn config(cli: Cli) -> Result<(String, RunConfig), String> {
    let domain = match (cli.domain, cli.corpus) {
        (Some(path), None) => DomainSource::File(path),
        (None, Some(name)) => DomainSource::Corpus {
            name,
            params: parse_params(&cli.params)?,
        },
        _ => return Err("exactly one of --domain and --corpus is required".into()),
    };
    let cfg = RunConfig {
        hs: cli.hs,
        eps: cli.eps,
        seed: cli.seed,
        pairs: cli.pairs,
        triples: cli.triples,
        landmarks: cli.landmarks,
        samples: cli.samples,
        from: cli.from,
        to: cli.to,
        out: cli.out,
        svg: cli.svg,
        ..RunConfig::new(domain)
    };
    Ok((cli.command, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("QHLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qhlab: QHLAB_THREADS ignored: {e}");
        }
    }
    match config(cli) {
        Ok((command, cfg)) => ExitCode::from(run(&command, &cfg) as u8),
        Err(e) => {
            eprintln!("qhlab: {e}");
            ExitCode::from(2)
        }
    }
}
