//! The ego's private, simplified world.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CognitionParams, Energetics, Snapshot};
use crate::sim::{AgentId, Dims, Position, Species};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrassCell {
    Live,
    Dead,
    /// Outside the vision disk. Resolved on first use within a rollout.
    Unobserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CogAgent {
    pub id: AgentId,
    pub species: Species,
    pub pos: Position,
    pub heading: f64,
    pub alive: bool,
}

/// A bounded, non-wrapping grid centred on the ego's patch.
///
/// Only the ego's energy exists here. There is no reproduction and no
/// regrowth, so neither the roster nor the grass can grow during a rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognitiveWorld {
    pub half_width: usize,
    pub grass: Vec<GrassCell>,
    pub fill_density: f64,
    /// Sorted by id; includes the ego.
    pub agents: Vec<CogAgent>,
    pub ego: usize,
    pub ego_energy: f64,
    pub energetics: Energetics,
}

impl CognitiveWorld {
    /// Makes `self` a copy of `template`, reusing allocations.
    pub fn reset_from(&mut self, template: &CognitiveWorld) {
        self.half_width = template.half_width;
        self.grass.clone_from(&template.grass);
        self.fill_density = template.fill_density;
        self.agents.clone_from(&template.agents);
        self.ego = template.ego;
        self.ego_energy = template.ego_energy;
        self.energetics = template.energetics;
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.side(), self.side(), false)
    }

    pub fn ego_agent(&self) -> &CogAgent {
        &self.agents[self.ego]
    }

    pub fn cell(&self, col: usize, row: usize) -> GrassCell {
        self.grass[row * self.side() + col]
    }

    pub fn live_grass(&self) -> usize {
        self.grass.iter().filter(|g| **g == GrassCell::Live).count()
    }

    pub fn alive_count(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    /// Grass state of a cell, drawing a fill for unobserved cells. The draw
    /// sticks for the remainder of this copy's life.
    pub fn resolve<R: Rng + ?Sized>(&mut self, col: usize, row: usize, rng: &mut R) -> GrassCell {
        let i = row * self.side() + col;
        if self.grass[i] == GrassCell::Unobserved {
            self.grass[i] = if rng.random_bool(self.fill_density) {
                GrassCell::Live
            } else {
                GrassCell::Dead
            };
        }
        self.grass[i]
    }
}

/// Places the snapshot into a fresh nested world. The ego's patch becomes the
/// centre cell and everything else keeps its offset from the ego.
pub fn build_cognitive_world(
    snapshot: &Snapshot,
    params: &CognitionParams,
    energetics: &Energetics,
) -> CognitiveWorld {
    let half = params.half_width();
    let side = 2 * half + 1;
    let ego = &snapshot.ego;
    let frac_x = ego.pos.x - ego.pos.x.floor();
    let frac_y = ego.pos.y - ego.pos.y.floor();
    let centre = Position::new(half as f64 + frac_x, half as f64 + frac_y);

    let mut grass = vec![GrassCell::Unobserved; side * side];
    for cell in &snapshot.cells {
        let col = half as i64 + cell.dc as i64;
        let row = half as i64 + cell.dr as i64;
        if (0..side as i64).contains(&col) && (0..side as i64).contains(&row) {
            grass[row as usize * side + col as usize] = if cell.live {
                GrassCell::Live
            } else {
                GrassCell::Dead
            };
        }
    }

    let dims = Dims::new(side, side, false);
    let mut agents: Vec<CogAgent> = snapshot
        .neighbors
        .iter()
        .map(|n| CogAgent {
            id: n.id,
            species: n.species,
            pos: dims.normalize(Position::new(centre.x + n.dx, centre.y + n.dy)),
            heading: n.heading,
            alive: true,
        })
        .collect();
    agents.push(CogAgent {
        id: ego.id,
        species: ego.species,
        pos: centre,
        heading: ego.heading,
        alive: true,
    });
    agents.sort_by_key(|a| a.id);
    let ego_index = agents
        .iter()
        .position(|a| a.id == ego.id)
        .expect("ego was just inserted");

    CognitiveWorld {
        half_width: half,
        grass,
        fill_density: snapshot.observed_grass_density,
        agents,
        ego: ego_index,
        ego_energy: ego.energy,
        energetics: *energetics,
    }
}
