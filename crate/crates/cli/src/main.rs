use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use outbound_core::analytics::{
    confusion_matrix, duration_report, load_ratings, load_stimuli, paired_ratings, paired_t_test,
    rating_report, segment_counts, segment_events, segments_with_domains, similarity_report,
    AnalyticsError, DurationRow, SegmentCounts, SimilarityRow, Stimuli,
};
use outbound_core::config::ServiceConfig;
use outbound_core::events::{replay_log, Replay};
use outbound_core::mt::LangPair;
use outbound_core::qe::{QeTag, QeTagging, TagLineMode};
use outbound_core::session::AssistQueue;
use outbound_core::synthesis::{span_sample, synthesize_files, SpanInventory};
use outbound_service::AppState;

#[derive(Parser)]
#[command(name = "outbound", version, about = "Round-trip translation assistance backend and study tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP/websocket service.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Event log (JSON Lines); overrides the config file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Listen address; overrides the config file.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Print a CSV report computed from an event log or ratings file.
    Analyze {
        report: Report,
        #[arg(long)]
        log: Option<PathBuf>,
        /// Tab-separated sid, domain, text with a header row.
        #[arg(long)]
        stimuli: Option<PathBuf>,
        /// CSV sid, domain, variant, rating, source_length with a header row.
        #[arg(long)]
        ratings: Option<PathBuf>,
        /// Which rating table to print.
        #[arg(long, value_enum, default_value_t = Series::Summary)]
        series: Series,
        /// Reference tags file, one sentence per line (agreement).
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Compared tags file (agreement).
        #[arg(long)]
        hyp: Option<PathBuf>,
    },
    /// Replace the source side of a WMT triplet with its machine translation.
    Synthesize {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        mt: PathBuf,
        #[arg(long)]
        tags: PathBuf,
        #[arg(long)]
        engine: String,
        #[arg(long)]
        out_prefix: PathBuf,
        /// Service config declaring the engine.
        #[arg(long)]
        config: PathBuf,
        /// Language pair as `src-tgt`; required if the engine has several.
        #[arg(long)]
        pair: Option<String>,
        /// Tag lines interleave gap and word tags.
        #[arg(long)]
        gapped: bool,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Sample span ids per bucket under a quota.
    SpanSample {
        /// CSV `k,count` with a header row.
        #[arg(long)]
        inventory: PathBuf,
        /// CSV `k,n` with a header row.
        #[arg(long)]
        quota: PathBuf,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Segments,
    Durations,
    Similarity,
    Ratings,
    Ttest,
    Agreement,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Series {
    Summary,
    Histogram,
    Length,
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Serve { config, log, bind } => return serve(&config, log.as_deref(), bind),
        Command::Analyze {
            report,
            log,
            stimuli,
            ratings,
            series,
            gold,
            hyp,
        } => analyze(report, log.as_deref(), stimuli.as_deref(), ratings.as_deref(), series, gold.as_deref(), hyp.as_deref())?,
        Command::Synthesize {
            src,
            mt,
            tags,
            engine,
            out_prefix,
            config,
            pair,
            gapped,
            workers,
        } => {
            let cfg = ServiceConfig::load(&config)?;
            let registry = cfg.build_registry()?;
            let engine = registry.get(&engine)?;
            let pair = match pair {
                Some(p) => parse_pair(&p)?,
                None => {
                    let pairs = &engine.descriptor().supported_pairs;
                    if pairs.len() != 1 {
                        bail!("engine {} has {} pairs; pass --pair", engine.id(), pairs.len());
                    }
                    pairs.iter().next().expect("one pair").clone()
                }
            };
            let mode = if gapped { TagLineMode::Gapped } else { TagLineMode::Strict };
            let n = synthesize_files((&src, &mt, &tags), mode, engine, &pair, workers, &out_prefix)?;
            eprintln!("wrote {n} triples to {}.{{src,mt,tags}}", out_prefix.display());
            String::new()
        }
        Command::SpanSample {
            inventory,
            quota,
            seed,
        } => {
            let inv = SpanInventory::new(read_buckets(&inventory)?, read_buckets(&quota)?);
            let mut t = String::from("k,span_id\n");
            for (k, ids) in span_sample(&inv, seed)? {
                for id in ids {
                    t.push_str(&format!("{k},{id}\n"));
                }
            }
            t
        }
    };
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn parse_pair(s: &str) -> Result<LangPair> {
    match s.split_once('-') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(LangPair::new(a, b)),
        _ => bail!("pair must look like cs-de, got {s:?}"),
    }
}

fn serve(config: &Path, log: Option<&Path>, bind: Option<String>) -> Result<()> {
    let cfg = ServiceConfig::load(config)?;
    let service = cfg.build_service(log)?;
    let queue = AssistQueue::new(cfg.queue.capacity, cfg.queue.workers);
    let state = AppState::new(service, queue);
    let addr = bind.unwrap_or_else(|| cfg.server.bind.clone());
    tokio::runtime::Runtime::new()?.block_on(outbound_service::serve(&addr, state))?;
    Ok(())
}

fn read_replay(log: Option<&Path>) -> Result<Replay> {
    let path = log.context("--log is required for this report")?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let replay = replay_log(BufReader::new(file));
    for d in &replay.diagnostics {
        eprintln!("{}: line {}: {}", path.display(), d.line, d.message);
    }
    Ok(replay)
}

fn read_stimuli(path: Option<&Path>) -> Result<Stimuli> {
    match path {
        Some(p) => Ok(load_stimuli(File::open(p).with_context(|| format!("opening {}", p.display()))?)?),
        None => Ok(Stimuli::default()),
    }
}

fn read_tag_lines(path: &Path) -> Result<Vec<QeTagging>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("opening {}", path.display()))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|t| t.parse::<QeTag>())
                .collect::<Result<Vec<_>, _>>()
                .map(QeTagging)
                .with_context(|| format!("{}: line {}", path.display(), i + 1))
        })
        .collect()
}

fn read_buckets(path: &Path) -> Result<BTreeMap<u32, usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = BTreeMap::new();
    for rec in rdr.deserialize::<(u32, usize)>() {
        let (k, n) = rec.with_context(|| format!("reading {}", path.display()))?;
        if out.insert(k, n).is_some() {
            bail!("{}: bucket {k} listed twice", path.display());
        }
    }
    Ok(out)
}

fn analyze(
    report: Report,
    log: Option<&Path>,
    stimuli: Option<&Path>,
    ratings: Option<&Path>,
    series: Series,
    gold: Option<&Path>,
    hyp: Option<&Path>,
) -> Result<String> {
    let ratings_file = || -> Result<_> {
        let p = ratings.context("--ratings is required for this report")?;
        Ok(load_ratings(File::open(p).with_context(|| format!("opening {}", p.display()))?)?)
    };
    Ok(match report {
        Report::Segments | Report::Durations | Report::Similarity => {
            let replay = read_replay(log)?;
            for s in &replay.sessions {
                for d in segment_events(s).1 {
                    eprintln!("{d:?}");
                }
            }
            let stimuli = read_stimuli(stimuli)?;
            let segs = segments_with_domains(&replay, &stimuli);
            match report {
                Report::Segments => SegmentCounts::table(&segment_counts(&segs, &stimuli)),
                Report::Durations => DurationRow::table(&duration_report::<f64>(&segs)),
                _ => SimilarityRow::table(&similarity_report::<f64>(&segs)),
            }
            .to_csv()
        }
        Report::Ratings => {
            let rep = rating_report::<f64>(&ratings_file()?);
            match series {
                Series::Summary => rep.summary_table(),
                Series::Histogram => rep.histogram_table(),
                Series::Length => rep.length_table(),
            }
            .to_csv()
        }
        Report::Ttest => {
            let (x, y) = paired_ratings::<f64>(&ratings_file()?);
            let (t, dof, p) = match paired_t_test(&x, &y) {
                Ok(r) => (r.t, r.dof, r.p_two_sided),
                Err(AnalyticsError::ZeroVariance { t, dof, p_two_sided }) => {
                    eprintln!("warning: differences have zero variance");
                    (t, dof, p_two_sided)
                }
                Err(e) => return Err(e.into()),
            };
            format!("n,t,dof,p_two_sided\n{},{t:.6},{dof},{p:.6}\n", x.len())
        }
        Report::Agreement => {
            let gold = read_tag_lines(gold.context("--gold is required for agreement")?)?;
            let hyp = read_tag_lines(hyp.context("--hyp is required for agreement")?)?;
            let m = confusion_matrix::<f64>(&gold, &hyp)?;
            let (tp, fp, fn_, tn) = m.rounded();
            format!("tags,tp,fp,fn,tn\n{},{tp:.2},{fp:.2},{fn_:.2},{tn:.2}\n", m.total)
        }
    })
}
