//! Live mode: session server plus a scraper child process.

use std::process::Stdio;

use anyhow::Context;
use streamviz::session::Session;
use streamviz_service::{
    accept_records, control_channel, forward_control, read_records, router, serve, spawn,
};
use tokio::io::BufReader;
use tokio::net::TcpListener;
use tokio::process::{Child, Command};
use tracing::{info, warn};

use crate::config::{config_error, CliConfig};

const SHUTDOWN_GRACE: std::time::Duration = std::time::Duration::from_secs(2);

/// Arguments that start this binary as the scraper for `config`.
fn scraper_args(config: &CliConfig, out: &str) -> Vec<String> {
    let source = &config.source;
    let filter = &config.filter;
    let mut args = vec![
        "scrape".to_string(),
        "--source".into(),
        source.location.clone(),
        "--kind".into(),
        source.kind.to_string(),
        "--interval".into(),
        source.poll_interval.to_string(),
        "--min-len".into(),
        filter.min_len.to_string(),
        "--max-len".into(),
        filter.max_len.to_string(),
        "--out".into(),
        out.to_string(),
    ];
    for term in &source.query_terms {
        args.push("--query".into());
        args.push(term.clone());
    }
    if let Some(path) = &filter.stoplist {
        args.push("--stoplist".into());
        args.push(path.display().to_string());
    }
    if let Some(path) = &filter.obscene {
        args.push("--obscene".into());
        args.push(path.display().to_string());
    }
    if !filter.strip_markup {
        args.push("--keep-markup".into());
    }
    args.push("--query-param".into());
    args.push(source.query_param.clone());
    args
}

fn spawn_scraper(config: &CliConfig, out: &str, pipe_stdout: bool) -> anyhow::Result<Child> {
    let exe = std::env::current_exe().context("locating own executable")?;
    Command::new(exe)
        .args(scraper_args(config, out))
        .stdin(Stdio::piped())
        .stdout(if pipe_stdout {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .kill_on_drop(true)
        .spawn()
        .context("spawning scraper")
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = match signal(SignalKind::terminate()) {
            Ok(s) => s,
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
                return;
            }
        };
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

pub async fn run(config: CliConfig) -> anyhow::Result<()> {
    let intake_addr = match config.server.intake.as_str() {
        "stdin" => None,
        other => Some(
            other
                .strip_prefix("tcp:")
                .ok_or_else(|| {
                    config_error(format!(
                        "server.intake must be stdin or tcp:host:port, got `{other}`"
                    ))
                })?
                .to_string(),
        ),
    };

    let listener = TcpListener::bind(&config.server.bind)
        .await
        .with_context(|| format!("cannot listen on {}", config.server.bind))?;
    let intake = match &intake_addr {
        Some(addr) => Some(
            TcpListener::bind(addr)
                .await
                .with_context(|| format!("cannot listen for records on {addr}"))?,
        ),
        None => None,
    };

    let (sink, control_rx) = control_channel();
    let session = Session::new(config.session.clone())?.with_control(Box::new(sink));
    let (handle, task) = spawn(session);

    let mut child = None;
    if !config.source.location.is_empty() {
        let out = match &intake {
            Some(l) => format!("tcp:{}", l.local_addr()?),
            None => "stdout".to_string(),
        };
        let mut c = spawn_scraper(&config, &out, intake.is_none())?;
        let stdin = c.stdin.take().expect("piped");
        tokio::spawn(async move {
            if let Err(e) = forward_control(control_rx, stdin).await {
                warn!(error = %e, "scraper control channel closed");
            }
        });
        if let Some(stdout) = c.stdout.take() {
            let h = handle.clone();
            tokio::spawn(async move {
                match read_records(BufReader::new(stdout), &h).await {
                    Ok(n) => info!(records = n, "scraper output ended"),
                    Err(e) => warn!(error = %e, "scraper intake failed"),
                }
            });
        }
        child = Some(c);
    } else if intake.is_none() {
        let h = handle.clone();
        tokio::spawn(async move {
            let stdin = BufReader::new(tokio::io::stdin());
            if let Err(e) = read_records(stdin, &h).await {
                warn!(error = %e, "stdin intake failed");
            }
        });
    }
    if let Some(listener) = intake {
        let h = handle.clone();
        tokio::spawn(async move {
            if let Err(e) = accept_records(listener, h).await {
                warn!(error = %e, "record listener failed");
            }
        });
    }

    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    info!(%addr, "serving");
    let app = router(handle, config.server.static_dir.as_deref());
    let (stop_tx, mut stop_rx) = tokio::sync::watch::channel(false);
    let server = serve(listener, app, async move {
        shutdown_signal().await;
        let _ = stop_tx.send(true);
    });
    // open WebSocket clients would otherwise hold graceful shutdown forever
    let deadline = async {
        let _ = stop_rx.wait_for(|stopped| *stopped).await;
        tokio::time::sleep(SHUTDOWN_GRACE).await;
    };
    tokio::select! {
        result = server => result?,
        _ = deadline => warn!("clients still connected; closing anyway"),
    }

    if let Some(mut c) = child {
        let _ = c.kill().await;
    }
    task.abort();
    Ok(())
}
