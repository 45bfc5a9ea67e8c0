//! Toroidal (or clamped) 2-D world: patch grid plus point agents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type AgentId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Sheep,
    #[serde(alias = "wolves")]
    Wolf,
}

impl Species {
    pub fn label(self) -> &'static str {
        match self {
            Species::Sheep => "sheep",
            Species::Wolf => "wolves",
        }
    }
}

/// World extent and edge behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub wrap: bool,
}

impl Dims {
    pub fn new(width: usize, height: usize, wrap: bool) -> Self {
        Self {
            width,
            height,
            wrap,
        }
    }

    pub fn patch_count(&self) -> usize {
        self.width * self.height
    }

    /// Shortest displacement `to - from`, using the minimal image on a torus.
    pub fn displacement(&self, from: Position, to: Position) -> (f64, f64) {
        let mut dx = to.x - from.x;
        let mut dy = to.y - from.y;
        if self.wrap {
            dx = minimal_image(dx, self.width as f64);
            dy = minimal_image(dy, self.height as f64);
        }
        (dx, dy)
    }

    pub fn torus_distance(&self, a: Position, b: Position) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        (dx * dx + dy * dy).sqrt()
    }

    /// Brings a position back inside the world: wrapped on a torus,
    /// clamped to `[0, extent)` otherwise.
    pub fn normalize(&self, p: Position) -> Position {
        if self.wrap {
            Position::new(
                wrap_coord(p.x, self.width as f64),
                wrap_coord(p.y, self.height as f64),
            )
        } else {
            Position::new(
                clamp_coord(p.x, self.width as f64),
                clamp_coord(p.y, self.height as f64),
            )
        }
    }

    pub fn move_forward(&self, p: Position, heading: f64, distance: f64) -> Position {
        let (dx, dy) = heading_vector(heading);
        self.normalize(Position::new(p.x + dx * distance, p.y + dy * distance))
    }

    /// Cell `(c, r)` covers `[c, c+1) x [r, r+1)`.
    pub fn patch_at(&self, p: Position) -> (usize, usize) {
        // truncation is floor for the non-negative coordinates we hold
        let c = (p.x.max(0.0) as usize).min(self.width - 1);
        let r = (p.y.max(0.0) as usize).min(self.height - 1);
        (c, r)
    }

    pub fn patch_index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }
}

fn minimal_image(d: f64, extent: f64) -> f64 {
    let d = if (-extent..extent).contains(&d) {
        d
    } else {
        d.rem_euclid(extent)
    };
    if d > extent / 2.0 {
        d - extent
    } else if d < -extent / 2.0 {
        d + extent
    } else {
        d
    }
}

fn wrap_coord(v: f64, extent: f64) -> f64 {
    if (0.0..extent).contains(&v) {
        return v;
    }
    let w = v.rem_euclid(extent);
    // rem_euclid rounds tiny negatives up to `extent` itself
    if w >= extent {
        0.0
    } else {
        w
    }
}

fn clamp_coord(v: f64, extent: f64) -> f64 {
    v.clamp(0.0, extent.next_down())
}

/// Unit vector for a compass heading: 0 is +y (north), 90 is +x (east).
pub fn heading_vector(heading: f64) -> (f64, f64) {
    let (s, c) = heading.to_radians().sin_cos();
    (s, c)
}

pub fn normalize_heading(h: f64) -> f64 {
    if (0.0..360.0).contains(&h) {
        return h;
    }
    let n = h.rem_euclid(360.0);
    if n >= 360.0 {
        0.0
    } else {
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Patch {
    pub grass: bool,
    pub regrow_countdown: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub species: Species,
    pub pos: Position,
    pub heading: f64,
    pub energy: f64,
}

/// Full mutable simulation state.
///
/// Agents are kept sorted by id: ids are handed out in increasing order and
/// new agents are appended, so lookups can binary-search.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    dims: Dims,
    patches: Vec<Patch>,
    agents: Vec<Agent>,
    tick: u64,
    next_agent_id: AgentId,
}

impl WorldState {
    /// A world with every patch bare and a zero countdown.
    pub fn new(dims: Dims) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 {
            return Err(Error::ZeroSizedWorld {
                width: dims.width,
                height: dims.height,
            });
        }
        Ok(Self {
            dims,
            patches: vec![Patch::default(); dims.patch_count()],
            agents: Vec::new(),
            tick: 0,
            next_agent_id: 0,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub(crate) fn advance_tick(&mut self) {
        self.tick += 1;
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch(&self, col: usize, row: usize) -> &Patch {
        &self.patches[self.dims.patch_index(col, row)]
    }

    pub fn patch_mut(&mut self, col: usize, row: usize) -> &mut Patch {
        let i = self.dims.patch_index(col, row);
        &mut self.patches[i]
    }

    pub fn patches_mut(&mut self) -> &mut [Patch] {
        &mut self.patches
    }

    pub fn set_grass(&mut self, col: usize, row: usize, grass: bool) {
        let p = self.patch_mut(col, row);
        p.grass = grass;
        if grass {
            p.regrow_countdown = 0;
        }
    }

    pub fn grass_count(&self) -> usize {
        self.patches.iter().filter(|p| p.grass).count()
    }

    pub fn grass_density(&self) -> f64 {
        self.grass_count() as f64 / self.patches.len() as f64
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn count(&self, species: Species) -> usize {
        self.agents.iter().filter(|a| a.species == species).count()
    }

    pub fn agent_index(&self, id: AgentId) -> Option<usize> {
        self.agents.binary_search_by_key(&id, |a| a.id).ok()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agent_index(id).map(|i| &self.agents[i])
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut Agent> {
        self.agent_index(id).map(move |i| &mut self.agents[i])
    }

    /// Adds an agent at a normalized position and returns its fresh id.
    pub fn spawn(&mut self, species: Species, pos: Position, heading: f64, energy: f64) -> AgentId {
        let id = self.next_agent_id;
        self.next_agent_id += 1;
        self.agents.push(Agent {
            id,
            species,
            pos: self.dims.normalize(pos),
            heading: normalize_heading(heading),
            energy,
        });
        id
    }

    pub fn remove(&mut self, id: AgentId) -> Option<Agent> {
        self.agent_index(id).map(|i| self.agents.remove(i))
    }

    pub(crate) fn retain_agents(&mut self, keep: impl FnMut(&Agent) -> bool) {
        self.agents.retain(keep);
    }

    /// Agents other than `exclude` within `radius` of `center`, ascending id.
    pub fn agents_in_radius(
        &self,
        center: Position,
        radius: f64,
        exclude: Option<AgentId>,
    ) -> Vec<&Agent> {
        self.agents
            .iter()
            .filter(|a| Some(a.id) != exclude)
            .filter(|a| {
                let (dx, dy) = self.dims.displacement(center, a.pos);
                dx * dx + dy * dy <= radius * radius
            })
            .collect()
    }

    /// Live agents of `species` standing on patch `(col, row)`, ascending id.
    pub fn agents_on_patch(
        &self,
        species: Species,
        col: usize,
        row: usize,
    ) -> impl Iterator<Item = &Agent> + '_ {
        self.agents
            .iter()
            .filter(move |a| a.species == species && self.dims.patch_at(a.pos) == (col, row))
    }
}
