use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use streamviz::scraper::SourceKind;
use tracing_subscriber::EnvFilter;

mod config;
mod headless;
mod run;
mod scrape;

use config::{split_overrides, top_level_keys, CliConfig, ConfigError};

/// Agent-based visualization of streaming text.
///
/// Any configuration key can be overridden with a dotted flag, e.g.
/// `--layout.speed_coefficient 0.2` or `--tick_rate 60`.
#[derive(Debug, Parser)]
#[command(name = "streamviz", version)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Serve the live session with a scraper child process.
    Run {
        /// Address for the WebSocket and status endpoints.
        #[arg(long)]
        bind: Option<String>,
        /// Directory with the browser client.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Record intake: stdin or tcp:host:port.
        #[arg(long)]
        intake: Option<String>,
    },
    /// Drive a session from a record file without a server and write frames.
    Replay {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 2000)]
        ticks: u64,
        /// Records per second of simulated time; 0 delivers all at once.
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        /// Frame stream output, `-` for stdout.
        #[arg(long, default_value = "-")]
        frames: PathBuf,
        /// Also write the final frame as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Lay out a corpus headlessly and write an SVG.
    Snapshot {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1000)]
        ticks: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print frequency and co-occurrence tables for a corpus.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run the scraper: poll a feed or replay a record file.
    Scrape {
        /// Feed URL or file path; defaults to `source.location`.
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        kind: Option<SourceKind>,
        /// Query term (repeatable).
        #[arg(long = "query")]
        query: Vec<String>,
        #[arg(long)]
        query_param: Option<String>,
        #[arg(long)]
        stoplist: Option<PathBuf>,
        #[arg(long)]
        obscene: Option<PathBuf>,
        #[arg(long)]
        min_len: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        keep_markup: bool,
        /// Seconds between polls.
        #[arg(long)]
        interval: Option<u64>,
        /// stdout or tcp:host:port.
        #[arg(long, default_value = "stdout")]
        out: String,
        /// Records per second when replaying a record file.
        #[arg(long, default_value_t = 0.0)]
        replay_rate: f64,
        /// Poll once and exit.
        #[arg(long)]
        once: bool,
    },
}

fn execute(cli: Cli, mut config: CliConfig) -> anyhow::Result<()> {
    let Some(command) = cli.command else {
        return Err(config::config_error("no command given; see --help"));
    };
    match command {
        Cmd::Run {
            bind,
            static_dir,
            intake,
        } => {
            if let Some(b) = bind {
                config.server.bind = b;
            }
            if let Some(d) = static_dir {
                config.server.static_dir = Some(d);
            }
            if let Some(i) = intake {
                config.server.intake = i;
            }
            config.validate()?;
            tokio::runtime::Runtime::new()?.block_on(run::run(config))
        }
        Cmd::Replay {
            corpus,
            ticks,
            rate,
            frames,
            svg,
        } => headless::replay(&config, &corpus, rate, ticks, Some(&frames), svg.as_deref()),
        Cmd::Snapshot { corpus, ticks, out } => headless::snapshot(&config, &corpus, ticks, &out),
        Cmd::Analyze { corpus } => {
            let stdout = std::io::stdout();
            headless::analyze(&config, &corpus, &mut stdout.lock())
        }
        Cmd::Scrape {
            source,
            kind,
            query,
            query_param,
            stoplist,
            obscene,
            min_len,
            max_len,
            keep_markup,
            interval,
            out,
            replay_rate,
            once,
        } => {
            let mut feed = config.source.clone();
            if let Some(s) = source {
                feed.location = s;
            }
            if let Some(k) = kind {
                feed.kind = k;
            }
            if !query.is_empty() {
                feed.query_terms = query;
            }
            if let Some(p) = query_param {
                feed.query_param = p;
            }
            if let Some(i) = interval {
                feed.poll_interval = i;
            }
            let mut filter = config.filter.clone();
            filter.stoplist = stoplist.or(filter.stoplist);
            filter.obscene = obscene.or(filter.obscene);
            filter.min_len = min_len.unwrap_or(filter.min_len);
            filter.max_len = max_len.unwrap_or(filter.max_len);
            filter.strip_markup &= !keep_markup;
            scrape::scrape(scrape::ScrapeOptions {
                source: feed,
                filter: filter.load()?,
                out,
                replay_rate,
                once,
            })
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_env("STREAMVIZ_LOG").unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let (args, overrides) = match split_overrides(std::env::args().collect(), &top_level_keys()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = CliConfig::load(cli.config.as_ref(), &overrides, cli.seed).and_then(|config| {
        if cli.print_config {
            let text = serde_json::to_string_pretty(&config)?;
            writeln!(std::io::stdout().lock(), "{text}")?;
            return Ok(());
        }
        execute(cli, config)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
