//! Session state: articles in, frames out.
//!
//! A [`Session`] owns the analyzer window and the layout. Every tick it
//! advances the layout by one step and assembles a [`Frame`]; every
//! snapshot period it re-runs the analysis and, when the result changed,
//! rebuilds the word agents. All mutation happens through `&mut self`, so
//! the async service drives it from a single task.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::analyzer::{self, AnalysisSnapshot, AnalyzerConfig, Article, Window};
use crate::error::{Error, Result};
use crate::euler::{build_ideal_matrix, EulerParams};
use crate::geometry::Vec2;
use crate::layout::{self, Agent, AgentId, AgentKind, DistanceMatrix, LayoutParams, LayoutState};
use crate::scraper::{format_query_line, ArticleRecord};
use crate::settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Discard and re-place every word agent on new data.
    Refresh,
    /// Keep surviving words where they are; place new ones near a neighbor.
    #[default]
    Incremental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub update_mode: UpdateMode,
    /// Ticks per second.
    pub tick_rate: f64,
    /// Seconds between analyzer snapshots.
    pub snapshot_period: f64,
    pub layout: LayoutParams,
    pub euler: EulerParams,
    pub analyzer: AnalyzerConfig,
    pub rng_seed: u64,
    /// Radius of article agents; `None` means three times `euler.r_max`.
    pub article_radius: Option<f64>,
    /// Extra clearance between an article card and the words around it.
    pub article_margin: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            update_mode: UpdateMode::Incremental,
            tick_rate: 30.0,
            snapshot_period: 5.0,
            layout: LayoutParams::default(),
            euler: EulerParams::default(),
            analyzer: AnalyzerConfig::default(),
            rng_seed: 0,
            article_radius: None,
            article_margin: 10.0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tick_rate > 0.0 && self.tick_rate.is_finite()) {
            return Err(Error::Config(format!(
                "tick_rate must be > 0, got {}",
                self.tick_rate
            )));
        }
        if !(self.snapshot_period > 0.0 && self.snapshot_period.is_finite()) {
            return Err(Error::Config(format!(
                "snapshot_period must be > 0, got {}",
                self.snapshot_period
            )));
        }
        self.layout.validate()?;
        self.euler.validate()?;
        self.analyzer.validate()?;
        if !(self.article_radius() > 0.0 && self.article_radius().is_finite()) {
            return Err(Error::Config("article_radius must be > 0".into()));
        }
        if !(self.article_margin >= 0.0 && self.article_margin.is_finite()) {
            return Err(Error::Config("article_margin must be >= 0".into()));
        }
        Ok(())
    }

    pub fn article_radius(&self) -> f64 {
        self.article_radius.unwrap_or(3.0 * self.euler.r_max)
    }

    /// Ticks between snapshots, at least one.
    pub fn snapshot_every(&self) -> u64 {
        (self.snapshot_period * self.tick_rate).round().max(1.0) as u64
    }
}

/// Client-issued command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    SetQuery {
        terms: Vec<String>,
    },
    OpenArticle {
        word: String,
        x: f64,
        y: f64,
    },
    CloseArticle {
        id: String,
    },
    Pause,
    Resume,
    SetParam {
        path: String,
        value: serde_json::Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAgent {
    pub id: String,
    pub label: String,
    pub kind: AgentKind,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    /// Raw stress divided by the largest raw stress in the frame.
    pub stress: f64,
    pub freq: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub tick: u64,
    pub agents: Vec<FrameAgent>,
    pub mean_speed: f64,
    pub stable: bool,
}

impl Frame {
    pub fn empty(tick: u64) -> Self {
        Self {
            tick,
            agents: Vec::new(),
            mean_speed: 0.0,
            stable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleMessage {
    pub id: String,
    pub title: String,
    pub source: String,
    pub text: String,
}

/// Server-to-client message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(Frame),
    Article(ArticleMessage),
    Error { message: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub articles_ingested: u64,
    pub malformed: u64,
    pub window_size: usize,
    pub agent_count: usize,
    pub tick: u64,
}

/// What a command produced: messages for every client and an optional
/// reply for the issuer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutcome {
    pub broadcast: Vec<ServerMessage>,
    pub reply: Option<ServerMessage>,
}

/// Line-oriented channel back to the scraper process.
pub trait ControlSink: Send {
    fn send_line(&mut self, line: &str) -> std::io::Result<()>;
}

/// Records control lines in memory.
impl ControlSink for Vec<String> {
    fn send_line(&mut self, line: &str) -> std::io::Result<()> {
        self.push(line.to_owned());
        Ok(())
    }
}

pub struct Session {
    config: SessionConfig,
    window: Window,
    layout: LayoutState,
    freq: HashMap<String, u32>,
    open_articles: BTreeMap<AgentId, Article>,
    applied: Option<AnalysisSnapshot>,
    rng: ChaCha8Rng,
    paused: bool,
    ticks_since_snapshot: Option<u64>,
    force_rebuild: bool,
    status: Status,
    last_frame: Frame,
    control: Option<Box<dyn ControlSink>>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("status", &self.status)
            .field("paused", &self.paused)
            .finish_non_exhaustive()
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: Window::new(config.analyzer.window),
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            config,
            layout: LayoutState::default(),
            freq: HashMap::new(),
            open_articles: BTreeMap::new(),
            applied: None,
            paused: false,
            ticks_since_snapshot: None,
            force_rebuild: false,
            status: Status::default(),
            last_frame: Frame::empty(0),
            control: None,
        })
    }

    pub fn with_control(mut self, sink: Box<dyn ControlSink>) -> Self {
        self.control = Some(sink);
        self
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn layout(&self) -> &LayoutState {
        &self.layout
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn last_frame(&self) -> &Frame {
        &self.last_frame
    }

    pub fn status(&self) -> Status {
        Status {
            window_size: self.window.len(),
            agent_count: self.layout.len(),
            tick: self.layout.tick,
            ..self.status
        }
    }

    /// Ingests one record; duplicates are ignored.
    pub fn ingest_record(&mut self, record: ArticleRecord) {
        match self.window.ingest(record.into_article()) {
            Ok(true) => self.status.articles_ingested += 1,
            Ok(false) => {}
            Err(e) => {
                debug!(error = %e, "dropping article");
                self.status.malformed += 1;
            }
        }
    }

    /// Ingests wire-format lines, counting and dropping malformed ones.
    pub fn on_articles<'a>(&mut self, lines: impl IntoIterator<Item = &'a str>) {
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            match ArticleRecord::from_line(line) {
                Ok(record) => self.ingest_record(record),
                Err(e) => {
                    debug!(error = %e, "malformed record");
                    self.status.malformed += 1;
                }
            }
        }
    }

    pub fn take_snapshot(&self) -> AnalysisSnapshot {
        analyzer::snapshot(
            &self.window,
            self.config.analyzer.f_min,
            self.config.analyzer.n_max,
        )
    }

    fn random_position(&mut self, radius: f64) -> Vec2 {
        let ((x0, x1), (y0, y1)) = self.config.layout.viewport.center_range(radius);
        Vec2::new(
            self.rng.random_range(x0..=x1),
            self.rng.random_range(y0..=y1),
        )
    }

    /// Installs a new vocabulary, creating, moving or dropping word agents
    /// according to the update mode. Article agents are kept.
    pub fn rebuild(&mut self, snapshot: &AnalysisSnapshot) -> Result<()> {
        let (radii, word_ideal) = build_ideal_matrix(snapshot, &self.config.euler)?;
        let previous: HashMap<String, Vec2> = self
            .layout
            .agents
            .iter()
            .filter(|a| a.kind == AgentKind::Word)
            .map(|a| (a.id.to_string(), a.position))
            .collect();

        let mut words = Vec::with_capacity(snapshot.words.len());
        for (word, &radius) in snapshot.words.iter().zip(&radii) {
            let position = match self.config.update_mode {
                UpdateMode::Refresh => self.random_position(radius),
                UpdateMode::Incremental => match previous.get(word.as_str()) {
                    Some(&p) => p,
                    None => {
                        let neighbor = snapshot
                            .words
                            .iter()
                            .filter_map(|other| {
                                let p = previous.get(other.as_str())?;
                                let c = snapshot.cooc.get(word, other);
                                (c > 0).then_some((c, *p))
                            })
                            // first of the highest counts, in snapshot order
                            .fold(None, |best: Option<(u32, Vec2)>, cand| match best {
                                Some(b) if b.0 >= cand.0 => Some(b),
                                _ => Some(cand),
                            });
                        match neighbor {
                            Some((_, p)) => {
                                let angle = self.rng.random_range(0.0..std::f64::consts::TAU);
                                p + Vec2::from_angle(angle) * self.config.euler.r_max
                            }
                            None => self.random_position(radius),
                        }
                    }
                },
            };
            words.push(Agent::word(word.as_str(), position, radius));
        }

        let articles: Vec<Agent> = self
            .layout
            .agents
            .iter()
            .filter(|a| a.kind == AgentKind::Article)
            .cloned()
            .collect();
        let margin = self.config.article_margin;
        let n_words = words.len();
        let mut agents = words;
        agents.extend(articles);
        let ideal = DistanceMatrix::from_fn(agents.len(), |i, j| {
            if j < n_words {
                word_ideal.get(i, j)
            } else {
                agents[i].radius + agents[j].radius + margin
            }
        })?;
        self.layout = LayoutState {
            agents,
            ideal,
            tick: self.layout.tick,
        };
        self.freq = snapshot.freq.iter().map(|(w, &f)| (w.clone(), f)).collect();
        self.applied = Some(snapshot.clone());
        Ok(())
    }

    fn snapshot_if_due(&mut self) {
        let due = self
            .ticks_since_snapshot
            .is_none_or(|t| t >= self.config.snapshot_every());
        if !due {
            return;
        }
        self.ticks_since_snapshot = Some(0);
        let snapshot = self.take_snapshot();
        if self.force_rebuild || self.applied.as_ref() != Some(&snapshot) {
            self.force_rebuild = false;
            if let Err(e) = self.rebuild(&snapshot) {
                warn!(error = %e, "rebuild failed; keeping previous layout");
            }
        }
    }

    /// Runs one tick. While paused nothing changes and the last frame is
    /// returned again.
    pub fn tick(&mut self) -> Frame {
        if self.paused {
            return self.last_frame.clone();
        }
        self.snapshot_if_due();
        let velocities = match layout::step(&self.layout, &self.config.layout) {
            Ok((next, v)) => {
                self.layout = next;
                v
            }
            Err(e) => {
                warn!(error = %e, "layout step failed");
                self.layout.tick += 1;
                vec![Vec2::ZERO; self.layout.len()]
            }
        };
        if let Some(t) = self.ticks_since_snapshot.as_mut() {
            *t += 1;
        }
        self.last_frame = self.frame_from(&velocities);
        self.last_frame.clone()
    }

    fn frame_from(&self, velocities: &[Vec2]) -> Frame {
        let raw = self.layout.stresses();
        let max = raw.iter().fold(0.0_f64, |m, &s| m.max(s));
        let agents = self
            .layout
            .agents
            .iter()
            .zip(&raw)
            .map(|(a, &s)| {
                let (label, freq) = match a.kind {
                    AgentKind::Word => (
                        a.id.to_string(),
                        self.freq.get(a.id.as_str()).copied().unwrap_or(0),
                    ),
                    AgentKind::Article => {
                        let title = self
                            .open_articles
                            .get(&a.id)
                            .and_then(|art| art.title.clone())
                            .unwrap_or_else(|| a.id.to_string());
                        (title, 0)
                    }
                };
                FrameAgent {
                    id: a.id.to_string(),
                    label,
                    kind: a.kind,
                    x: a.position.x,
                    y: a.position.y,
                    r: a.radius,
                    stress: if max > 0.0 { s / max } else { 0.0 },
                    freq,
                }
            })
            .collect();
        let mean = layout::mean_speed(velocities);
        Frame {
            tick: self.layout.tick,
            agents,
            mean_speed: mean,
            stable: layout::is_stable(mean, &self.config.layout),
        }
    }

    /// Opens the most recent article containing `word` as a pinned agent at
    /// `click`. Words are then pushed outside its radius by the layout.
    pub fn open_article(&mut self, word: &str, click: Vec2) -> Result<(AgentId, ArticleMessage)> {
        if !self.config.layout.viewport.contains(click) {
            return Err(Error::InvalidInput(format!(
                "click point ({}, {}) is outside the viewport",
                click.x, click.y
            )));
        }
        let word_id = AgentId::from(word);
        match self.layout.agent(&word_id) {
            Some(a) if a.kind == AgentKind::Word => {}
            _ => return Err(Error::MissingAgent(word.to_owned())),
        }
        let article = self
            .window
            .latest_with(word)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no article contains `{word}`")))?;
        let id = AgentId::new(format!("article:{}", article.id));
        let message = ArticleMessage {
            id: id.to_string(),
            title: article.title.clone().unwrap_or_default(),
            source: article.source.clone(),
            text: article.text.clone(),
        };
        if self.open_articles.contains_key(&id) {
            return Ok((id, message));
        }
        let radius = self.config.article_radius();
        let margin = self.config.article_margin;
        let mut row: Vec<f64> = self
            .layout
            .agents
            .iter()
            .map(|a| radius + a.radius + margin)
            .collect();
        row.push(0.0);
        self.layout = layout::add_agent(
            &self.layout,
            Agent::article(id.clone(), click, radius),
            &row,
        )?;
        self.open_articles.insert(id.clone(), article);
        Ok((id, message))
    }

    pub fn close_article(&mut self, id: &str) -> Result<()> {
        let id = AgentId::from(id);
        if !self.open_articles.contains_key(&id) {
            return Err(Error::MissingAgent(id.to_string()));
        }
        self.layout = layout::remove_agent(&self.layout, &id)?;
        self.open_articles.remove(&id);
        Ok(())
    }

    /// Forwards a new query to the scraper and clears the window so the next
    /// snapshot reflects only the new stream.
    pub fn set_query(&mut self, terms: &[String]) -> Result<()> {
        let terms: Vec<String> = terms
            .iter()
            .map(|t| t.trim().to_owned())
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidInput("query needs at least one term".into()));
        }
        let sink = self.control.as_mut().ok_or(Error::ControlClosed)?;
        sink.send_line(&format_query_line(&terms))
            .map_err(|_| Error::ControlClosed)?;
        self.window.clear();
        self.force_rebuild = true;
        Ok(())
    }

    pub fn pause(&mut self) {
        self.paused = true;
    }

    pub fn resume(&mut self) {
        self.paused = false;
    }

    /// Sets one configuration value by dotted path, e.g.
    /// `layout.speed_coefficient`. Invalid values leave the config unchanged.
    pub fn set_param(&mut self, path: &str, value: serde_json::Value) -> Result<()> {
        let mut doc = serde_json::to_value(&self.config)?;
        settings::set_path(&mut doc, path, value)?;
        let next: SessionConfig =
            serde_json::from_value(doc).map_err(|e| Error::Config(format!("{path}: {e}")))?;
        next.validate()?;
        if next.analyzer.window != self.config.analyzer.window {
            let mut window = Window::new(next.analyzer.window);
            for article in self.window.articles() {
                window.ingest(article.clone())?;
            }
            self.window = window;
        }
        if next.euler != self.config.euler || next.analyzer != self.config.analyzer {
            self.force_rebuild = true;
        }
        self.config = next;
        Ok(())
    }

    /// Applies a client command.
    pub fn handle(&mut self, command: Command) -> CommandOutcome {
        let result = match command {
            Command::SetQuery { terms } => self.set_query(&terms).map(|_| None),
            Command::OpenArticle { word, x, y } => self
                .open_article(&word, Vec2::new(x, y))
                .map(|(_, msg)| Some(ServerMessage::Article(msg))),
            Command::CloseArticle { id } => self.close_article(&id).map(|_| None),
            Command::Pause => {
                self.pause();
                Ok(None)
            }
            Command::Resume => {
                self.resume();
                Ok(None)
            }
            Command::SetParam { path, value } => self.set_param(&path, value).map(|_| None),
        };
        match result {
            Ok(broadcast) => CommandOutcome {
                broadcast: broadcast.into_iter().collect(),
                reply: None,
            },
            Err(e) => CommandOutcome {
                broadcast: Vec::new(),
                reply: Some(ServerMessage::Error {
                    message: e.to_string(),
                }),
            },
        }
    }
}
