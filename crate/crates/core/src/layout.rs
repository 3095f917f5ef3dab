//! Distance-matrix agent layout.
//!
//! Each tick every agent `i` moves with velocity
//!
//! ```text
//! v_i = k * sum_j (ideal[i,j] - displayed[i,j]) * (p_i - p_j) / n
//! ```
//!
//! so an agent that sits closer to `j` than ideal is pushed away from it and
//! one that sits farther is pulled in. Pinned agents never move. Optional
//! behaviors (collision avoidance, viewport clamping) transform the
//! velocities in their configured order before positions advance.
//!
//! The law is the negative gradient of `sum_{i<j} d^3/3 - ideal*d^2/2`, so its
//! continuous flow settles. A single explicit step of the flow is only stable
//! while `dt * k * d / n` stays small, which typical display distances
//! violate, so the default [`Integrator::Adaptive`] splits each tick into
//! explicit substeps bounded by a Gershgorin estimate of the field's
//! stiffness. [`Integrator::Euler`] takes the whole tick in one step.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};

/// Upper bound on substeps per tick for the adaptive integrator.
pub const MAX_SUBSTEPS: usize = 4096;

/// Substep length times the stiffness bound.
const STABILITY_FACTOR: f64 = 1.0;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Word,
    Article,
}

/// One visual entity: a word circle or an open article card.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub position: Vec2,
    pub radius: f64,
    pub kind: AgentKind,
    pub pinned: bool,
}

impl Agent {
    pub fn word(id: impl Into<AgentId>, position: Vec2, radius: f64) -> Self {
        Self {
            id: id.into(),
            position,
            radius,
            kind: AgentKind::Word,
            pinned: false,
        }
    }

    pub fn article(id: impl Into<AgentId>, position: Vec2, radius: f64) -> Self {
        Self {
            id: id.into(),
            position,
            radius,
            kind: AgentKind::Article,
            pinned: true,
        }
    }

    pub fn pinned(mut self, pinned: bool) -> Self {
        self.pinned = pinned;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidAgent(format!(
                "agent `{}` has non-positive radius {}",
                self.id, self.radius
            )));
        }
        if !self.position.is_finite() {
            return Err(Error::InvalidAgent(format!(
                "agent `{}` has a non-finite position",
                self.id
            )));
        }
        Ok(())
    }
}

/// Symmetric, zero-diagonal, nonnegative `n x n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from the upper triangle given by `f(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                m.set(i, j, f(i, j))?;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows are not all of length n".into()));
        }
        let m = Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Sets `[i,j]` and `[j,i]`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            if value != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry [{i},{i}] must be 0"
                )));
            }
            return Ok(());
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "entry [{i},{j}] = {value} is not a finite nonnegative distance"
            )));
        }
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry [{i},{i}] is nonzero"
                )));
            }
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry [{i},{j}] = {v} is not a finite nonnegative distance"
                    )));
                }
                if v != self.get(j, i) {
                    return Err(Error::InvalidMatrix(format!(
                        "entries [{i},{j}] and [{j},{i}] differ"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Copy with row and column `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let n = self.n - 1;
        let mut data = Vec::with_capacity(n * n);
        for i in (0..self.n).filter(|&i| i != index) {
            data.extend((0..self.n).filter(|&j| j != index).map(|j| self.get(i, j)));
        }
        Self { n, data }
    }

    /// Copy grown by one row/column. `row` has length `n + 1`, with the new
    /// self-distance last.
    pub fn with_appended(&self, row: &[f64]) -> Result<Self> {
        if row.len() != self.n + 1 {
            return Err(Error::InvalidMatrix(format!(
                "appended row has length {}, expected {}",
                row.len(),
                self.n + 1
            )));
        }
        let mut m = Self::zeros(self.n + 1);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m.set(i, j, self.get(i, j))?;
            }
        }
        m.set(self.n, self.n, row[self.n])?;
        for (j, &v) in row[..self.n].iter().enumerate() {
            m.set(j, self.n, v)?;
        }
        Ok(m)
    }

    /// `self - displayed`, the signed mismatch that drives motion.
    pub fn delta(&self, displayed: &DistanceMatrix) -> DeltaMatrix {
        assert_eq!(self.n, displayed.n, "matrix dimensions differ");
        DeltaMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&displayed.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Signed ideal-minus-displayed differences; symmetric with zero diagonal
/// but entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DeltaMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    /// Keep every agent circle inside the viewport.
    BoundsClamp,
    /// Push apart pairs that are closer than ideal by more than the slack.
    CollisionAvoidance,
}

impl Behavior {
    pub fn name(self) -> &'static str {
        match self {
            Behavior::BoundsClamp => "bounds_clamp",
            Behavior::CollisionAvoidance => "collision_avoidance",
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds_clamp" => Ok(Behavior::BoundsClamp),
            "collision_avoidance" => Ok(Behavior::CollisionAvoidance),
            other => Err(Error::UnknownBehavior(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// One explicit step of length `timestep` per tick.
    Euler,
    /// Explicit substeps sized to the local stiffness of the field.
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub speed_coefficient: f64,
    /// Time per tick; velocities are in display units per unit of this time.
    pub timestep: f64,
    /// Per-tick displacement cap; `None` disables the clamp.
    pub max_displacement: Option<f64>,
    pub viewport: Rect,
    pub stability_threshold: f64,
    pub behaviors: Vec<Behavior>,
    pub integrator: Integrator,
    /// Collision avoidance ignores pairs closer than ideal by less than this.
    pub separation_slack: f64,
    /// Added velocity per unit of collision depth.
    pub collision_strength: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        let viewport = Rect::new(0.0, 0.0, 1000.0, 800.0);
        Self {
            speed_coefficient: 0.1,
            timestep: 1.0,
            max_displacement: Some(0.05 * viewport.diagonal()),
            viewport,
            stability_threshold: 0.05,
            behaviors: vec![Behavior::CollisionAvoidance, Behavior::BoundsClamp],
            integrator: Integrator::Adaptive,
            separation_slack: 2.0,
            collision_strength: 0.5,
        }
    }
}

impl LayoutParams {
    /// Bare velocity law: no behaviors, no displacement clamp.
    pub fn unconstrained(viewport: Rect) -> Self {
        Self {
            max_displacement: None,
            viewport,
            behaviors: Vec::new(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.speed_coefficient > 0.0 && self.speed_coefficient.is_finite()) {
            return bad(format!(
                "speed_coefficient must be > 0, got {}",
                self.speed_coefficient
            ));
        }
        if !(self.timestep > 0.0 && self.timestep.is_finite()) {
            return bad(format!("timestep must be > 0, got {}", self.timestep));
        }
        if let Some(m) = self.max_displacement {
            if !(m > 0.0) {
                return bad(format!("max_displacement must be > 0, got {m}"));
            }
        }
        if !self.viewport.is_valid() {
            return bad("viewport must have positive finite extent".into());
        }
        if !(self.stability_threshold >= 0.0) {
            return bad(format!(
                "stability_threshold must be >= 0, got {}",
                self.stability_threshold
            ));
        }
        if !(self.separation_slack >= 0.0 && self.separation_slack.is_finite()) {
            return bad(format!(
                "separation_slack must be >= 0, got {}",
                self.separation_slack
            ));
        }
        if !(self.collision_strength >= 0.0 && self.collision_strength.is_finite()) {
            return bad(format!(
                "collision_strength must be >= 0, got {}",
                self.collision_strength
            ));
        }
        let mut seen = HashSet::new();
        for b in &self.behaviors {
            if !seen.insert(b) {
                return bad(format!("behavior `{b}` listed twice"));
            }
        }
        Ok(())
    }

    pub fn has(&self, behavior: Behavior) -> bool {
        self.behaviors.contains(&behavior)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutState {
    pub agents: Vec<Agent>,
    pub ideal: DistanceMatrix,
    pub tick: u64,
}

impl Default for LayoutState {
    fn default() -> Self {
        Self {
            agents: Vec::new(),
            ideal: DistanceMatrix::zeros(0),
            tick: 0,
        }
    }
}

impl LayoutState {
    pub fn new(agents: Vec<Agent>, ideal: DistanceMatrix) -> Result<Self> {
        let state = Self {
            agents,
            ideal,
            tick: 0,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ideal.len() != self.agents.len() {
            return Err(Error::DimensionMismatch {
                agents: self.agents.len(),
                matrix: self.ideal.len(),
            });
        }
        let mut ids = HashSet::with_capacity(self.agents.len());
        for agent in &self.agents {
            agent.validate()?;
            if !ids.insert(&agent.id) {
                return Err(Error::DuplicateAgent(agent.id.to_string()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| &a.id == id)
    }

    pub fn agent(&self, id: &AgentId) -> Option<&Agent> {
        self.agents.iter().find(|a| &a.id == id)
    }

    pub fn delta(&self) -> DeltaMatrix {
        self.ideal.delta(&displayed_distances(&self.agents))
    }

    /// Raw stress of every agent.
    pub fn stresses(&self) -> Vec<f64> {
        let n = self.agents.len();
        let delta = self.delta();
        (0..n)
            .map(|i| agent_stress(delta.row(i), n).expect("n >= 1 inside the loop"))
            .collect()
    }
}

/// Pairwise Euclidean distances between agent centers.
pub fn displayed_distances(agents: &[Agent]) -> DistanceMatrix {
    let n = agents.len();
    let mut m = DistanceMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = agents[i].position.distance(agents[j].position);
            m.data[i * n + j] = d;
            m.data[j * n + i] = d;
        }
    }
    m
}

/// Raw velocity law plus a bound on the spectral radius of its Jacobian.
fn velocity_field(agents: &[Agent], ideal: &DistanceMatrix, k: f64) -> (Vec<Vec2>, f64) {
    let n = agents.len();
    let mut v = vec![Vec2::ZERO; n];
    let mut row_sums = vec![0.0; n];
    for i in 0..n {
        let pi = agents[i].position;
        for j in (i + 1)..n {
            let diff = pi - agents[j].position;
            let d = diff.norm();
            let delta = ideal.get(i, j) - d;
            // antisymmetric update keeps sum_i v_i at zero
            let term = diff * delta;
            v[i] += term;
            v[j] = v[j] - term;
            let weight = delta.abs() + d;
            row_sums[i] += weight;
            row_sums[j] += weight;
        }
    }
    let scale = k / n as f64;
    for vi in &mut v {
        *vi = *vi * scale;
    }
    let rate = 2.0 * scale * row_sums.iter().fold(0.0_f64, |m, &s| m.max(s));
    (v, rate)
}

fn collision_threshold(ideal: f64, slack: f64) -> f64 {
    ideal - slack
}

/// Largest number of collision contacts any single agent has.
fn max_contacts(agents: &[Agent], ideal: &DistanceMatrix, slack: f64) -> usize {
    let n = agents.len();
    let mut contacts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = agents[i].position.distance(agents[j].position);
            if d < collision_threshold(ideal.get(i, j), slack) {
                contacts[i] += 1;
                contacts[j] += 1;
            }
        }
    }
    contacts.into_iter().max().unwrap_or(0)
}

/// Direction used for exactly coincident pairs.
fn fallback_direction(i: usize, j: usize, n: usize) -> Vec2 {
    Vec2::from_angle(GOLDEN_ANGLE * (i * n + j) as f64)
}

fn collision_avoidance(
    agents: &[Agent],
    ideal: &DistanceMatrix,
    velocities: &mut [Vec2],
    params: &LayoutParams,
) {
    let n = agents.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = agents[i].position - agents[j].position;
            let d = diff.norm();
            let depth = collision_threshold(ideal.get(i, j), params.separation_slack) - d;
            if depth <= 0.0 {
                continue;
            }
            let dir = if d > 0.0 {
                diff * (1.0 / d)
            } else {
                fallback_direction(i, j, n)
            };
            let push = dir * (params.collision_strength * depth);
            if !agents[i].pinned {
                velocities[i] += push;
            }
            if !agents[j].pinned {
                velocities[j] = velocities[j] - push;
            }
        }
    }
}

fn bounds_clamp(agents: &[Agent], velocities: &mut [Vec2], viewport: &Rect, dt: f64) {
    for (agent, v) in agents.iter().zip(velocities.iter_mut()) {
        if agent.pinned {
            continue;
        }
        let target = agent.position + *v * dt;
        let clamped = viewport.clamp_circle(target, agent.radius);
        if clamped != target {
            *v = (clamped - agent.position) * (1.0 / dt);
        }
    }
}

fn apply_with_dt(
    behavior: Behavior,
    agents: &[Agent],
    ideal: &DistanceMatrix,
    velocities: &mut [Vec2],
    params: &LayoutParams,
    dt: f64,
) {
    match behavior {
        Behavior::BoundsClamp => bounds_clamp(agents, velocities, &params.viewport, dt),
        Behavior::CollisionAvoidance => collision_avoidance(agents, ideal, velocities, params),
    }
}

/// Applies one named behavior to a velocity set over one full timestep.
pub fn apply_behavior(
    name: &str,
    state: &LayoutState,
    velocities: &[Vec2],
    params: &LayoutParams,
) -> Result<Vec<Vec2>> {
    let behavior: Behavior = name.parse()?;
    if !params.has(behavior) {
        return Err(Error::Config(format!(
            "behavior `{behavior}` is not enabled"
        )));
    }
    if velocities.len() != state.agents.len() {
        return Err(Error::InvalidInput(format!(
            "{} velocities for {} agents",
            velocities.len(),
            state.agents.len()
        )));
    }
    let mut out = velocities.to_vec();
    apply_with_dt(
        behavior,
        &state.agents,
        &state.ideal,
        &mut out,
        params,
        params.timestep,
    );
    Ok(out)
}

/// Advances the layout by one tick.
///
/// Returns the new state and each agent's effective velocity over the tick
/// (displacement divided by `timestep`).
pub fn step(state: &LayoutState, params: &LayoutParams) -> Result<(LayoutState, Vec<Vec2>)> {
    params.validate()?;
    state.validate()?;
    let mut next = state.clone();
    next.tick += 1;
    let n = state.agents.len();
    if n == 0 {
        return Ok((next, Vec::new()));
    }

    let dt = params.timestep;
    let collision = params.has(Behavior::CollisionAvoidance);
    let mut elapsed = 0.0;
    for _ in 0..MAX_SUBSTEPS {
        let (mut v, mut rate) = velocity_field(&next.agents, &next.ideal, params.speed_coefficient);
        if collision {
            let contacts = max_contacts(&next.agents, &next.ideal, params.separation_slack);
            rate += 2.0 * params.collision_strength * contacts as f64;
        }
        let remaining = dt - elapsed;
        let h = match params.integrator {
            Integrator::Adaptive if rate * remaining > STABILITY_FACTOR => STABILITY_FACTOR / rate,
            _ => remaining,
        };
        for (vi, agent) in v.iter_mut().zip(&next.agents) {
            if agent.pinned {
                *vi = Vec2::ZERO;
            }
        }
        for &behavior in &params.behaviors {
            apply_with_dt(behavior, &next.agents, &next.ideal, &mut v, params, h);
        }
        for (agent, vi) in next.agents.iter_mut().zip(&v) {
            agent.position += *vi * h;
        }
        if h == remaining {
            break;
        }
        elapsed += h;
    }

    let bounds = params.has(Behavior::BoundsClamp);
    let mut velocities = Vec::with_capacity(n);
    for (agent, before) in next.agents.iter_mut().zip(&state.agents) {
        let start = before.position;
        if agent.pinned {
            agent.position = start;
            velocities.push(Vec2::ZERO);
            continue;
        }
        let mut disp = agent.position - start;
        if let Some(max) = params.max_displacement {
            let len = disp.norm();
            if len > max {
                disp = disp * (max / len);
            }
        }
        let mut end = start + disp;
        if bounds {
            end = params.viewport.clamp_circle(end, agent.radius);
            disp = end - start;
        }
        agent.position = end;
        velocities.push(disp * (1.0 / dt));
    }
    Ok((next, velocities))
}

/// Mean absolute mismatch of one agent's row of ideal-minus-displayed.
pub fn agent_stress(delta_row: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("stress is undefined for n = 0".into()));
    }
    Ok(delta_row.iter().map(|d| d.abs()).sum::<f64>() / n as f64)
}

pub fn mean_speed(velocities: &[Vec2]) -> f64 {
    if velocities.is_empty() {
        return 0.0;
    }
    velocities.iter().map(|v| v.norm()).sum::<f64>() / velocities.len() as f64
}

pub fn is_stable(mean: f64, params: &LayoutParams) -> bool {
    mean < params.stability_threshold
}

/// Appends an agent. `ideal_row` holds its ideal distance to every existing
/// agent followed by its zero self-distance.
pub fn add_agent(state: &LayoutState, agent: Agent, ideal_row: &[f64]) -> Result<LayoutState> {
    agent.validate()?;
    if state.index_of(&agent.id).is_some() {
        return Err(Error::DuplicateAgent(agent.id.to_string()));
    }
    let ideal = state.ideal.with_appended(ideal_row)?;
    let mut agents = state.agents.clone();
    agents.push(agent);
    Ok(LayoutState {
        agents,
        ideal,
        tick: state.tick,
    })
}

pub fn remove_agent(state: &LayoutState, id: &AgentId) -> Result<LayoutState> {
    let index = state
        .index_of(id)
        .ok_or_else(|| Error::MissingAgent(id.to_string()))?;
    let mut agents = state.agents.clone();
    agents.remove(index);
    Ok(LayoutState {
        agents,
        ideal: state.ideal.without(index),
        tick: state.tick,
    })
}
