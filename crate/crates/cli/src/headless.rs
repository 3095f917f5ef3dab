//! Commands that run without a server: replay, snapshot and analyze.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use streamviz::analyzer::{cooccurrence, frequencies, prune_and_select, Window};
use streamviz::scraper::ArticleRecord;
use streamviz::session::{Frame, ServerMessage, Session};
use streamviz::svg::render_svg;
use tracing::warn;

use crate::config::CliConfig;

/// Well-formed record lines of a corpus file, in file order.
pub fn load_corpus(path: &Path) -> anyhow::Result<Vec<ArticleRecord>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading corpus {}", path.display()))?;
    let mut records = Vec::new();
    for (number, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match ArticleRecord::from_line(line) {
            Ok(r) => records.push(r),
            Err(e) => warn!(line = number + 1, error = %e, "skipping malformed record"),
        }
    }
    Ok(records)
}

fn open_output(path: &Path) -> anyhow::Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(Box::new(BufWriter::new(file)))
}

/// Drives a session from a corpus on a simulated clock: record `i` arrives
/// at `i / rate` seconds and tick `t` runs at `(t - 1) / tick_rate`.
/// A rate of zero delivers the whole corpus before the first tick.
pub fn simulate(
    config: &CliConfig,
    records: Vec<ArticleRecord>,
    rate: f64,
    ticks: u64,
    mut on_frame: impl FnMut(&Frame) -> anyhow::Result<()>,
) -> anyhow::Result<Frame> {
    anyhow::ensure!(rate >= 0.0 && rate.is_finite(), "replay rate must be >= 0");
    let mut session = Session::new(config.session.clone())?;
    let tick_rate = config.session.tick_rate;
    let mut pending = records.into_iter().enumerate().peekable();
    let mut frame = Frame::empty(0);
    for t in 0..ticks {
        let now = t as f64 / tick_rate;
        while let Some((i, _)) = pending.peek() {
            if rate > 0.0 && *i as f64 / rate > now {
                break;
            }
            let (_, record) = pending.next().expect("peeked");
            session.ingest_record(record);
        }
        frame = session.tick();
        on_frame(&frame)?;
    }
    Ok(frame)
}

pub fn replay(
    config: &CliConfig,
    corpus: &Path,
    rate: f64,
    ticks: u64,
    frames: Option<&Path>,
    svg: Option<&Path>,
) -> anyhow::Result<()> {
    let records = load_corpus(corpus)?;
    let mut out = frames.map(open_output).transpose()?;
    let last = simulate(config, records, rate, ticks, |frame| {
        if let Some(out) = out.as_mut() {
            let msg = ServerMessage::Frame(frame.clone());
            writeln!(out, "{}", msg.to_json()).context("writing frames")?;
        }
        Ok(())
    })?;
    if let Some(mut out) = out {
        out.flush().context("writing frames")?;
    }
    if let Some(path) = svg {
        write_svg(config, &last, path)?;
    }
    Ok(())
}

pub fn snapshot(config: &CliConfig, corpus: &Path, ticks: u64, out: &Path) -> anyhow::Result<()> {
    let records = load_corpus(corpus)?;
    let last = simulate(config, records, 0.0, ticks, |_| Ok(()))?;
    write_svg(config, &last, out)
}

fn write_svg(config: &CliConfig, frame: &Frame, path: &Path) -> anyhow::Result<()> {
    let svg = render_svg(frame, config.session.layout.viewport);
    let mut out = open_output(path)?;
    out.write_all(svg.as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Frequency table, co-occurring pairs (most frequent first) and the
/// selected vocabulary.
pub fn analyze(config: &CliConfig, corpus: &Path, out: &mut impl Write) -> anyhow::Result<()> {
    let records = load_corpus(corpus)?;
    let mut window = Window::new(config.session.analyzer.window);
    for record in records {
        window.ingest(record.into_article())?;
    }
    let freq = frequencies(&window);
    let mut rows: Vec<(&String, u32)> = freq.iter().map(|(w, &f)| (w, f)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    writeln!(out, "# frequency ({} articles)", window.len())?;
    for (word, f) in &rows {
        writeln!(out, "{word} {f}")?;
    }

    let vocabulary: Vec<String> = freq.keys().cloned().collect();
    let table = cooccurrence(&window, &vocabulary);
    let mut pairs: Vec<(&str, &str, u32)> = table
        .iter()
        .map(|(a, b, c)| if a <= b { (a, b, c) } else { (b, a, c) })
        .collect();
    pairs.sort_by(|x, y| y.2.cmp(&x.2).then_with(|| (x.0, x.1).cmp(&(y.0, y.1))));
    writeln!(out)?;
    writeln!(out, "# co-occurrence")?;
    for (a, b, c) in pairs {
        writeln!(out, "{a} {b} {c}")?;
    }

    let analyzer = &config.session.analyzer;
    let selected = prune_and_select(&freq, analyzer.f_min, analyzer.n_max);
    writeln!(out)?;
    writeln!(
        out,
        "# selected (f_min {}, n_max {})",
        analyzer.f_min, analyzer.n_max
    )?;
    if selected.is_empty() {
        writeln!(out, "no words selected")?;
    } else {
        writeln!(out, "{}", selected.join(" "))?;
    }
    Ok(())
}
