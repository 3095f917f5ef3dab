use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use streamviz::synthetic::TopicCorpus;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_streamviz"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn abg() -> PathBuf {
    fixtures().join("alpha_beta_gamma.ndjson")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn analyze_prints_hand_counts() {
    let out = run(bin().args(["analyze", "--corpus"]).arg(abg()));
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    for row in [
        "alpha 2",
        "beta 1",
        "gamma 1",
        "alpha beta 1",
        "alpha gamma 1",
    ] {
        assert!(lines.contains(&row), "missing {row}:\n{text}");
    }

    let out = run(bin()
        .args(["--analyzer.f_min", "5", "analyze", "--corpus"])
        .arg(abg()));
    assert!(out.status.success());
    assert!(stdout(&out).contains("no words selected"));
}

#[test]
fn analyze_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.ndjson");
    std::fs::write(&empty, "").unwrap();
    let out = run(bin().args(["analyze", "--corpus"]).arg(&empty));
    assert!(out.status.success());
    assert!(stdout(&out).contains("no words selected"));
    let out = run(bin().args(["analyze", "--corpus", "/no/such/corpus"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn snapshot_draws_one_circle_per_word() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for path in [&a, &b] {
        let out = run(bin()
            .args([
                "--seed",
                "5",
                "--analyzer.f_min",
                "1",
                "snapshot",
                "--ticks",
                "1000",
                "--corpus",
            ])
            .arg(abg())
            .arg("--out")
            .arg(path));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
    for word in ["alpha", "beta", "gamma"] {
        assert!(svg.contains(&format!(">{word}</text>")));
    }
    assert_eq!(svg, std::fs::read_to_string(&b).unwrap());

    let empty = dir.path().join("empty.ndjson");
    std::fs::write(&empty, "").unwrap();
    let out = run(bin()
        .args(["snapshot", "--corpus"])
        .arg(&empty)
        .arg("--out")
        .arg(&a));
    assert!(out.status.success());
    assert!(!std::fs::read_to_string(&a).unwrap().contains("<circle"));

    let out = run(bin()
        .args(["snapshot", "--corpus"])
        .arg(abg())
        .args(["--out", "/no/such/dir/x.svg"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_one() {
    let out = run(bin()
        .args(["--layout.speed_coefficent", "1", "analyze", "--corpus"])
        .arg(abg()));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("layout.speed_coefficent"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"euler": {"r_maximum": 3}}"#).unwrap();
    let out = run(bin().arg("--config").arg(&cfg).arg("--print-config"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("euler.r_maximum"));

    assert_eq!(run(bin().arg("--no-such-flag")).status.code(), Some(1));
    assert_eq!(run(bin().arg("--help")).status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"layout": {"speed_coefficient": 0.3}, "rng_seed": 1, "tick_rate": 10}"#,
    )
    .unwrap();
    let out = run(bin().arg("--config").arg(&cfg).args([
        "--layout.speed_coefficient",
        "0.25",
        "--seed",
        "8",
        "--print-config",
    ]));
    assert!(out.status.success());
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed["layout"]["speed_coefficient"], 0.25);
    assert_eq!(printed["rng_seed"], 8);
    assert_eq!(printed["tick_rate"], 10.0);

    // the dump is itself a valid config that reproduces itself
    let dumped = dir.path().join("dump.json");
    std::fs::write(&dumped, &out.stdout).unwrap();
    let again = run(bin().arg("--config").arg(&dumped).arg("--print-config"));
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn scrape_replays_record_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = TopicCorpus::disjoint(2, 5, 10, 3).to_ndjson();
    let path = dir.path().join("ten.ndjson");
    std::fs::write(&path, &corpus).unwrap();
    let out = run(bin()
        .args(["scrape", "--kind", "ndjson_file", "--source"])
        .arg(&path));
    assert!(out.status.success());
    assert_eq!(stdout(&out), corpus);

    let mut lines: Vec<&str> = corpus.lines().take(4).collect();
    lines.insert(2, "{broken");
    let path = dir.path().join("five.ndjson");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let out = run(bin()
        .args(["scrape", "--kind", "ndjson_file", "--source"])
        .arg(&path));
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));
}

#[test]
fn scrape_once_matches_golden() {
    let out = run(bin()
        .current_dir(fixtures())
        .args(["scrape", "--source", "feed.rss", "--kind", "rss", "--once"]));
    assert!(out.status.success());
    let golden = std::fs::read(fixtures().join("feed.golden.ndjson")).unwrap();
    assert_eq!(out.stdout, golden);
}

#[test]
fn run_ingests_source_and_stops_on_interrupt() {
    let golden = fixtures().join("feed.golden.ndjson");
    let mut child = bin()
        .args(["--source.kind", "ndjson_file", "--source.location"])
        .arg(&golden)
        .args(["run", "--bind", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut first = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut first)
        .unwrap();
    let base = first
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_string();

    let start = Instant::now();
    let status = loop {
        let body = reqwest::blocking::get(format!("{base}/status"))
            .unwrap()
            .text()
            .unwrap();
        let status: serde_json::Value = serde_json::from_str(&body).unwrap();
        if status["articles_ingested"] == 3 || start.elapsed() > Duration::from_secs(10) {
            break status;
        }
        std::thread::sleep(Duration::from_millis(50));
    };
    assert_eq!(status["articles_ingested"], 3);
    assert_eq!(status["malformed"], 0);

    let pid = child.id().to_string();
    assert!(Command::new("kill")
        .args(["-INT", &pid])
        .status()
        .unwrap()
        .success());
    let start = Instant::now();
    let code = loop {
        if let Some(code) = child.try_wait().unwrap() {
            break code;
        }
        assert!(start.elapsed() < Duration::from_secs(10), "did not exit");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(code.success());
}

#[test]
fn run_reports_port_in_use() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let out = run(bin().args(["run", "--bind", &addr]).stdin(Stdio::null()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&addr));
}
