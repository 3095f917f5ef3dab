use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Duration;

use tracing::warn;

use super::record::ArticleRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplayStats {
    pub emitted: usize,
    pub malformed: usize,
}

/// Replays a newline-delimited record file at `rate` records per second;
/// a rate of zero emits everything immediately.
pub fn replay<W: Write>(path: &Path, rate: f64, out: &mut W) -> Result<ReplayStats> {
    let file = File::open(path).map_err(|e| Error::Source(format!("{}: {e}", path.display())))?;
    replay_from(BufReader::new(file), rate, out, std::thread::sleep)
}

/// [`replay`] over any reader, with an injectable sleep.
pub fn replay_from<R: BufRead, W: Write>(
    input: R,
    rate: f64,
    out: &mut W,
    mut sleep: impl FnMut(Duration),
) -> Result<ReplayStats> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::Config(format!(
            "replay rate must be >= 0, got {rate}"
        )));
    }
    let pause = (rate > 0.0).then(|| Duration::from_secs_f64(1.0 / rate));
    let mut stats = ReplayStats::default();
    for (number, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match ArticleRecord::from_line(&line) {
            Ok(r) => r,
            Err(e) => {
                warn!(line = number + 1, error = %e, "skipping malformed record");
                stats.malformed += 1;
                continue;
            }
        };
        if let (Some(p), true) = (pause, stats.emitted > 0) {
            sleep(p);
        }
        let mut text = record.to_line();
        text.push('\n');
        out.write_all(text.as_bytes())
            .map_err(Error::OutputClosed)?;
        if pause.is_some() {
            out.flush().map_err(Error::OutputClosed)?;
        }
        stats.emitted += 1;
    }
    out.flush().map_err(Error::OutputClosed)?;
    Ok(stats)
}
