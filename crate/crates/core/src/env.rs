//! Spatial environment: arena, villages, food, and proximity sensing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Vec2) -> f64 {
        self.dist2(o).sqrt()
    }

    pub fn dist2(self, o: Vec2) -> f64 {
        let (dx, dy) = (self.x - o.x, self.y - o.y);
        dx * dx + dy * dy
    }

    pub fn midpoint(self, o: Vec2) -> Vec2 {
        Vec2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        Vec2::new(rng.random::<f64>() * self.width, rng.random::<f64>() * self.height)
    }
}

/// Circular reproduction zone. Ids start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Village {
    pub id: usize,
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoodItem {
    pub id: usize,
    pub position: Vec2,
    pub available: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensedNeighborhood {
    /// Other IDLE agents within the neighbour radius.
    pub idle_neighbors: usize,
    /// Available food items within the food radius.
    pub accessible_food: usize,
}

/// Nearest village and the distance to its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VillageProximity {
    pub village: usize,
    pub distance: f64,
    pub radius: f64,
}

impl VillageProximity {
    /// Boundary inclusive.
    pub fn inside(&self) -> bool {
        self.distance <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VillageSpec {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    pub width: f64,
    pub height: f64,
    pub villages: Vec<VillageSpec>,
    pub food_count: usize,
    /// Food is accessible within this distance.
    pub food_radius: f64,
    pub neighbor_radius: f64,
    /// How far a hungry agent without company looks for others to join.
    pub gather_radius: f64,
    pub speed: f64,
    /// Per-step probability that a consumed item reappears.
    pub regen_rate: f64,
}

pub const VILLAGE_COUNT: usize = 5;

impl Default for EnvParams {
    fn default() -> Self {
        let v = |x, y| VillageSpec { x, y, radius: 10.0 };
        Self {
            width: 100.0,
            height: 100.0,
            villages: vec![v(20.0, 20.0), v(80.0, 20.0), v(50.0, 50.0), v(20.0, 80.0), v(80.0, 80.0)],
            food_count: 200,
            food_radius: 5.0,
            neighbor_radius: 5.0,
            gather_radius: 20.0,
            speed: 0.5,
            regen_rate: 0.3,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: String| Err(ConfigError::invalid(key, msg));
        if !(self.width > 0.0 && self.height > 0.0) {
            return bad("env.width", "arena dimensions must be positive".into());
        }
        if self.villages.len() != VILLAGE_COUNT {
            return bad(
                "env.villages",
                format!("exactly {VILLAGE_COUNT} villages required, got {}", self.villages.len()),
            );
        }
        let arena = self.arena();
        for v in &self.villages {
            if !(v.radius > 0.0) {
                return bad("env.villages", "village radius must be positive".into());
            }
            if !arena.contains(Vec2::new(v.x, v.y)) {
                return bad("env.villages", format!("village center ({}, {}) outside arena", v.x, v.y));
            }
        }
        if !(self.food_radius >= 0.0) {
            return bad("env.food_radius", "must be non-negative".into());
        }
        if !(self.neighbor_radius >= 0.0) {
            return bad("env.neighbor_radius", "must be non-negative".into());
        }
        if !(self.gather_radius >= 0.0) {
            return bad("env.gather_radius", "must be non-negative".into());
        }
        if !(self.speed > 0.0) {
            return bad("env.speed", "must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.regen_rate) {
            return bad("env.regen_rate", "must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn arena(&self) -> Arena {
        Arena {
            width: self.width,
            height: self.height,
        }
    }

    pub fn build_villages(&self) -> Vec<Village> {
        self.villages
            .iter()
            .enumerate()
            .map(|(i, v)| Village {
                id: i + 1,
                center: Vec2::new(v.x, v.y),
                radius: v.radius,
            })
            .collect()
    }
}

/// Nearest village center; ties go to the lower id.
///
/// Panics if `villages` is empty.
pub fn distance_to_village(pos: Vec2, villages: &[Village]) -> VillageProximity {
    let mut best: Option<VillageProximity> = None;
    for v in villages {
        let d = pos.dist(v.center);
        if best.is_none_or(|b| d < b.distance) {
            best = Some(VillageProximity {
                village: v.id,
                distance: d,
                radius: v.radius,
            });
        }
    }
    best.expect("at least one village")
}

/// Advances `pos` by `min(speed, distance)` toward `target`, kept in the arena.
pub fn move_step(pos: Vec2, target: Vec2, speed: f64, arena: &Arena) -> Vec2 {
    let d = pos.dist(target);
    if d <= speed {
        return arena.clamp(target);
    }
    let k = speed / d;
    arena.clamp(Vec2::new(pos.x + (target.x - pos.x) * k, pos.y + (target.y - pos.y) * k))
}

/// Each consumed item independently reappears at a uniform random spot with
/// probability `regen_rate`. Returns how many were restored.
pub fn regenerate_food<R: Rng + ?Sized>(food: &mut [FoodItem], arena: &Arena, regen_rate: f64, rng: &mut R) -> usize {
    let mut restored = 0;
    for item in food.iter_mut().filter(|f| !f.available) {
        if rng.random::<f64>() < regen_rate {
            item.available = true;
            item.position = arena.random_point(rng);
            restored += 1;
        }
    }
    restored
}

/// Uniform-grid index over points for radius queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<(usize, Vec2)>>,
}

impl PointIndex {
    pub fn new(arena: &Arena, cell: f64, points: impl IntoIterator<Item = (usize, Vec2)>) -> Self {
        let cell = cell.max(1.0);
        let cols = ((arena.width / cell).floor() as usize + 1).max(1);
        let rows = ((arena.height / cell).floor() as usize + 1).max(1);
        let mut idx = Self {
            cell,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
        };
        for (key, p) in points {
            let c = idx.cell_of(p);
            idx.cells[c].push((key, p));
        }
        idx
    }

    fn coords(&self, p: Vec2) -> (usize, usize) {
        let cx = ((p.x / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = ((p.y / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    fn cell_of(&self, p: Vec2) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.cols + cx
    }

    /// Calls `f(key, point, squared distance)` for every point within `radius` of `center`.
    pub fn for_each_within(&self, center: Vec2, radius: f64, mut f: impl FnMut(usize, Vec2, f64)) {
        let r2 = radius * radius;
        let lo = self.coords(Vec2::new(center.x - radius, center.y - radius));
        let hi = self.coords(Vec2::new(center.x + radius, center.y + radius));
        for cy in lo.1..=hi.1 {
            for cx in lo.0..=hi.0 {
                for &(key, p) in &self.cells[cy * self.cols + cx] {
                    let d2 = p.dist2(center);
                    if d2 <= r2 {
                        f(key, p, d2);
                    }
                }
            }
        }
    }
}

/// Counts idle neighbours (excluding `self_key`) and available food nearby.
///
/// `idle` must index only agents that were IDLE in the snapshot.
pub fn sense(
    pos: Vec2,
    self_key: usize,
    idle: &PointIndex,
    food: &[FoodItem],
    neighbor_radius: f64,
    food_radius: f64,
) -> SensedNeighborhood {
    let mut idle_neighbors = 0;
    idle.for_each_within(pos, neighbor_radius, |key, _, _| {
        if key != self_key {
            idle_neighbors += 1;
        }
    });
    let r2 = food_radius * food_radius;
    let accessible_food = food
        .iter()
        .filter(|f| f.available && f.position.dist2(pos) <= r2)
        .count();
    SensedNeighborhood {
        idle_neighbors,
        accessible_food,
    }
}

/// Nearest available food item within `radius` (ties to lower index).
pub fn nearest_food(pos: Vec2, food: &[FoodItem], radius: f64) -> Option<usize> {
    let r2 = radius * radius;
    let mut best: Option<(f64, usize)> = None;
    for (i, f) in food.iter().enumerate() {
        if !f.available {
            continue;
        }
        let d2 = f.position.dist2(pos);
        if d2 <= r2 && best.is_none_or(|(bd, _)| d2 < bd) {
            best = Some((d2, i));
        }
    }
    best.map(|(_, i)| i)
}
