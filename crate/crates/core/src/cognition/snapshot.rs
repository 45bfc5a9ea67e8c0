use serde::{Deserialize, Serialize};

use crate::sim::{AgentId, Position, Species, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoView {
    pub id: AgentId,
    pub species: Species,
    pub pos: Position,
    pub heading: f64,
    pub energy: f64,
}

/// Another agent as the ego sees it: no energy, position relative to the ego.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborView {
    pub id: AgentId,
    pub species: Species,
    pub dx: f64,
    pub dy: f64,
    pub heading: f64,
}

/// A patch inside the vision disk, addressed relative to the ego's patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedCell {
    pub dc: i32,
    pub dr: i32,
    pub live: bool,
}

/// Everything an agent perceives at the start of a tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub vision_radius: f64,
    pub ego: EgoView,
    pub neighbors: Vec<NeighborView>,
    pub cells: Vec<ObservedCell>,
    pub observed_grass_density: f64,
}

impl Snapshot {
    /// Offsets of visible patches that carry grass.
    pub fn grass_seen(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.cells.iter().filter(|c| c.live).map(|c| (c.dc, c.dr))
    }
}

/// Snapshot of the world around `ego` within `vision_radius`. A patch is
/// visible when its centre is within the radius. Returns `None` for an
/// absent agent.
pub fn observe(world: &WorldState, ego: AgentId, vision_radius: f64) -> Option<Snapshot> {
    let me = world.agent(ego)?;
    let dims = world.dims();

    let neighbors = world
        .agents_in_radius(me.pos, vision_radius, Some(ego))
        .into_iter()
        .map(|a| {
            let (dx, dy) = dims.displacement(me.pos, a.pos);
            NeighborView {
                id: a.id,
                species: a.species,
                dx,
                dy,
                heading: a.heading,
            }
        })
        .collect();

    let (pc, pr) = dims.patch_at(me.pos);
    let (fx, fy) = (me.pos.x - pc as f64, me.pos.y - pr as f64);
    let reach = vision_radius.ceil() as i64 + 1;
    let (w, h) = (dims.width as i64, dims.height as i64);
    let mut cells = Vec::new();
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let cx = dc as f64 + 0.5 - fx;
            let cy = dr as f64 + 0.5 - fy;
            if cx * cx + cy * cy > vision_radius * vision_radius {
                continue;
            }
            let (mut col, mut row) = (pc as i64 + dc, pr as i64 + dr);
            if dims.wrap {
                col = col.rem_euclid(w);
                row = row.rem_euclid(h);
            } else if !(0..w).contains(&col) || !(0..h).contains(&row) {
                continue;
            }
            cells.push(ObservedCell {
                dc: dc as i32,
                dr: dr as i32,
                live: world.patch(col as usize, row as usize).grass,
            });
        }
    }
    let live = cells.iter().filter(|c| c.live).count();
    let observed_grass_density = if cells.is_empty() {
        0.0
    } else {
        live as f64 / cells.len() as f64
    };

    Some(Snapshot {
        tick: world.tick(),
        vision_radius,
        ego: EgoView {
            id: me.id,
            species: me.species,
            pos: me.pos,
            heading: me.heading,
            energy: me.energy,
        },
        neighbors,
        cells,
        observed_grass_density,
    })
}
