use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use coursemap::analysis::{build_occurrences, AnalysisBundle};
use coursemap::chaptermatch::FeatureMode;
use coursemap::corpus::{self, load_corpus};
use coursemap::indexer::merge_variants;
use coursemap::indexmap::ViewFilter;
use coursemap::pairs::RankLimit;
use coursemap::synthlab::{generate_degraded_course, run_matching_benchmark, SynthParams};
use coursemap::{Config, Error, Result};
use serde::Serialize;

pub const PORT_ENV: &str = "COURSEMAP_PORT";

#[derive(Debug, Parser)]
#[command(name = "coursemap", version, about = "Index-phrase analytics for lecture transcripts")]
pub struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Match index phrases in every transcript and export the occurrence table.
    Analyze {
        #[command(flatten)]
        input: CorpusArg,
        /// Further transcript sets of the same lectures (e.g. other ASR
        /// runs); counts are merged by maximum.
        #[arg(long = "variant")]
        variants: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Rank windowed word pairs by G².
    Pairs {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        min_g2: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Score every lecture against every chapter.
    Chaptermatch {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long, default_value = "phrases_and_pairs")]
        mode: FeatureMode,
        #[arg(long)]
        zoom: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Lay out the transcript index map.
    Indexmap {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        zoom: Option<usize>,
        #[arg(long)]
        focus: Option<usize>,
        #[arg(long)]
        contrast: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Embed lectures by Dice distance over selected phrases.
    Similarity {
        #[command(flatten)]
        input: CorpusArg,
        /// Comma-separated phrase ids or phrase texts.
        #[arg(long, value_delimiter = ',', required = true)]
        phrases: Vec<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Per-lecture and course phrase statistics.
    Stats {
        #[command(flatten)]
        input: CorpusArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate a synthetic corpus directory.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.75)]
        wer: f64,
        #[arg(long, default_value_t = 10)]
        chapters: usize,
        #[arg(long, default_value_t = 0.2)]
        shared: f64,
        #[arg(long)]
        confusable: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chapter-matching accuracy on synthetic courses.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "phrases,pairs,g2pairs,combined")]
        modes: Vec<FeatureMode>,
        /// Zoom range `lo:hi` or a single value.
        #[arg(long, default_value = "1:10", value_parser = parse_range)]
        zoom: (usize, usize),
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0.75)]
        wer: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Serve the JSON API (and optional static UI files).
    Serve {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of UI assets served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CorpusArg {
    /// Corpus directory.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').unwrap_or((s, s));
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range must satisfy 1 <= lo <= hi, got {s:?}"));
    }
    Ok((lo, hi))
}

fn corpus_dir(arg: &CorpusArg, config: &Config) -> Result<PathBuf> {
    arg.corpus
        .clone()
        .or_else(|| config.corpus.clone())
        .ok_or_else(|| Error::Config("no corpus directory given (use --corpus)".into()))
}

fn emit<T: Serialize>(value: &T, out: &OutArg) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Param(e.to_string()))?;
    text.push('\n');
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => write_stdout(&text),
    }
}

/// Writes to standard output; a closed pipe is not an error.
fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn load_bundle(input: &CorpusArg, config: &Config) -> Result<AnalysisBundle> {
    AnalysisBundle::load(&corpus_dir(input, config)?, config)
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    config.validate()?;

    match cli.command {
        Command::Analyze { input, variants, out } => {
            let root = corpus_dir(&input, &config)?;
            let corpus = load_corpus(&root, &config)?;
            let (_, _, table) = build_occurrences(&corpus, &config);
            let mut tables = vec![table];
            for dir in &variants {
                let variant = corpus::RawCorpus {
                    transcripts: corpus::load_transcripts(dir)?,
                    ..corpus.clone()
                };
                variant.validate()?;
                tables.push(build_occurrences(&variant, &config).2);
            }
            let table = if tables.len() == 1 { tables.pop().expect("one table") } else { merge_variants(&tables)? };
            emit(&table.to_export(), &out)
        }
        Command::Pairs { input, top, min_g2, out } => {
            let bundle = load_bundle(&input, &config)?;
            emit(&bundle.collocation_export(RankLimit { top_k: top, min_g2 }), &out)
        }
        Command::Chaptermatch { input, mode, zoom, out } => {
            let bundle = load_bundle(&input, &config)?;
            let zoom = zoom.unwrap_or(bundle.default_filter().zoom);
            emit(&bundle.chapter_match(mode, zoom)?, &out)
        }
        Command::Indexmap {
            input,
            zoom,
            focus,
            contrast,
            out,
        } => {
            let bundle = load_bundle(&input, &config)?;
            let d = bundle.default_filter();
            let filter = ViewFilter {
                zoom: zoom.unwrap_or(d.zoom),
                focus: focus.unwrap_or(d.focus),
                contrast: contrast.unwrap_or(d.contrast),
            };
            emit(&bundle.index_map(filter)?, &out)
        }
        Command::Similarity { input, phrases, out } => {
            let bundle = load_bundle(&input, &config)?;
            let selection = bundle.resolve_selection(&phrases)?;
            emit(&bundle.similarity(&selection)?, &out)
        }
        Command::Stats { input, out } => {
            let bundle = load_bundle(&input, &config)?;
            emit(bundle.stats(), &out)
        }
        Command::Synth {
            seed,
            wer,
            chapters,
            shared,
            confusable,
            out,
        } => {
            let params = SynthParams {
                seed,
                wer,
                n_chapters: chapters,
                shared_vocab_fraction: shared,
                confusable,
                ..SynthParams::default()
            };
            let course = generate_degraded_course(&params)?;
            course.write(&out)?;
            tracing::info!(dir = %out.display(), lectures = chapters, "synthetic corpus written");
            Ok(())
        }
        Command::Bench {
            modes,
            zoom,
            seeds,
            wer,
            csv,
        } => {
            let params = SynthParams {
                wer,
                ..SynthParams::default()
            };
            let zooms: Vec<usize> = (zoom.0..=zoom.1.min(params.n_chapters)).collect();
            if zooms.is_empty() {
                return Err(Error::Param(format!(
                    "zoom range starts above the number of lectures ({})",
                    params.n_chapters
                )));
            }
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = run_matching_benchmark(&params, &modes, &zooms, &seeds, &config)?;
            let text = report.to_csv();
            match csv {
                Some(path) => fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?,
                None => write_stdout(&text)?,
            }
            Ok(())
        }
        Command::Serve {
            input,
            port,
            host,
            static_dir,
        } => {
            let bundle = load_bundle(&input, &config)?;
            let port = match port {
                Some(p) => p,
                None => env_port()?.unwrap_or(config.port),
            };
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|_| Error::Param(format!("invalid listen address {host}:{port}")))?;
            serve(bundle, addr, static_dir)
        }
    }
}

fn env_port() -> Result<Option<u16>> {
    match std::env::var(PORT_ENV) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{PORT_ENV} must be a port number, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn serve(bundle: AnalysisBundle, addr: SocketAddr, static_dir: Option<PathBuf>) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: Path::new(&addr.to_string()).to_path_buf(),
        source: e,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime.block_on(async move {
        let app = crate::service::router(Arc::new(bundle), static_dir);
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(io_err)?;
        tracing::info!(%addr, "serving");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(io_err)
    })
}
