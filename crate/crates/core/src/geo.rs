//! Tract grid, activity locations, agent placement, and the daily
//! destination rules per scenario.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DayKind, ScenarioKind};
use crate::error::{Error, Result};
use crate::population::{AgentAttributes, Population};
use crate::rng::StreamRng;

/// Grid coordinate; origin at (0,0), x < width, y < height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    Work,
    College,
    EssentialCommerce,
    NonEssentialCommerce,
}

pub const LOCATION_KINDS: [LocationKind; 4] = [
    LocationKind::Work,
    LocationKind::College,
    LocationKind::EssentialCommerce,
    LocationKind::NonEssentialCommerce,
];

impl LocationKind {
    pub fn token(self) -> &'static str {
        match self {
            LocationKind::Work => "work",
            LocationKind::College => "college",
            LocationKind::EssentialCommerce => "essential_commerce",
            LocationKind::NonEssentialCommerce => "non_essential_commerce",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        LOCATION_KINDS.into_iter().find(|k| k.token() == s)
    }

    fn ix(self) -> usize {
        match self {
            LocationKind::Work => 0,
            LocationKind::College => 1,
            LocationKind::EssentialCommerce => 2,
            LocationKind::NonEssentialCommerce => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub kind: LocationKind,
    pub cell: Cell,
    pub id: u32,
}

/// The city board: per-cell tract codes plus the activity-location inventory.
/// Locations are addressed by their index into `locations`.
#[derive(Debug, Clone)]
pub struct TractGrid {
    width: u32,
    height: u32,
    tract_of: Vec<u32>,
    tract_cells: BTreeMap<u32, Vec<Cell>>,
    locations: Vec<Location>,
    by_kind: [Vec<usize>; 4],
}

impl TractGrid {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn tract_at(&self, cell: Cell) -> u32 {
        self.tract_of[(cell.y * self.width + cell.x) as usize]
    }

    pub fn tract_codes(&self) -> impl Iterator<Item = u32> + '_ {
        self.tract_cells.keys().copied()
    }

    pub fn num_tracts(&self) -> usize {
        self.tract_cells.len()
    }

    pub fn cells_of_tract(&self, tract: u32) -> Option<&[Cell]> {
        self.tract_cells.get(&tract).map(Vec::as_slice)
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, ix: usize) -> &Location {
        &self.locations[ix]
    }

    pub fn locations_of_kind(&self, kind: LocationKind) -> &[usize] {
        &self.by_kind[kind.ix()]
    }
}

const MAX_GRID_CELLS: u64 = 1 << 22;

/// Parses the tract-map format: one `size W H` header, then `cell x y tract`
/// rows covering every cell exactly once, then `loc kind x y id` rows.
/// Blank lines and `#` comments are ignored.
pub fn parse_tract_map(text: &str, path: &Path) -> Result<TractGrid> {
    let err = |message: String| Error::DataParse {
        what: "tract map",
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_no, header) = lines.next().ok_or_else(|| err("empty file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (width, height) = match dims.as_slice() {
        ["size", w, h] => (
            w.parse::<u32>()
                .map_err(|_| err(format!("line {header_no}: bad width {w:?}")))?,
            h.parse::<u32>()
                .map_err(|_| err(format!("line {header_no}: bad height {h:?}")))?,
        ),
        _ => return Err(err(format!("line {header_no}: expected `size W H` header"))),
    };
    if width == 0 || height == 0 || u64::from(width) * u64::from(height) > MAX_GRID_CELLS {
        return Err(err(format!("unusable grid dimensions {width}x{height}")));
    }

    let n_cells = (width * height) as usize;
    let mut tract_of: Vec<Option<u32>> = vec![None; n_cells];
    let mut locations = Vec::new();
    let mut seen_ids: BTreeSet<(LocationKind, u32)> = BTreeSet::new();

    let parse_coord = |line_no: usize, token: &str, axis: &str, bound: u32| -> Result<u32> {
        let v: u32 = token
            .parse()
            .map_err(|_| err(format!("line {line_no}: bad {axis} {token:?}")))?;
        if v >= bound {
            return Err(err(format!(
                "line {line_no}: {axis}={v} outside grid of {axis}-size {bound}"
            )));
        }
        Ok(v)
    };

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["cell", x, y, tract] => {
                let x = parse_coord(line_no, x, "x", width)?;
                let y = parse_coord(line_no, y, "y", height)?;
                let tract: u32 = tract
                    .parse()
                    .map_err(|_| err(format!("line {line_no}: bad tract {tract:?}")))?;
                let slot = &mut tract_of[(y * width + x) as usize];
                if slot.is_some() {
                    return Err(err(format!("line {line_no}: duplicate cell ({x},{y})")));
                }
                *slot = Some(tract);
            }
            ["loc", kind, x, y, id] => {
                let kind = LocationKind::from_token(kind).ok_or_else(|| {
                    err(format!("line {line_no}: unknown location kind {kind:?}"))
                })?;
                let x = parse_coord(line_no, x, "x", width)?;
                let y = parse_coord(line_no, y, "y", height)?;
                let id: u32 = id
                    .parse()
                    .map_err(|_| err(format!("line {line_no}: bad location id {id:?}")))?;
                if !seen_ids.insert((kind, id)) {
                    return Err(err(format!(
                        "line {line_no}: duplicate {} id {id}",
                        kind.token()
                    )));
                }
                locations.push(Location {
                    kind,
                    cell: Cell { x, y },
                    id,
                });
            }
            _ => return Err(err(format!("line {line_no}: unrecognized row {line:?}"))),
        }
    }

    let missing = tract_of.iter().filter(|t| t.is_none()).count();
    if missing > 0 {
        return Err(err(format!(
            "{missing} of {n_cells} cells have no tract assignment"
        )));
    }
    let tract_of: Vec<u32> = tract_of.into_iter().map(Option::unwrap).collect();

    let mut tract_cells: BTreeMap<u32, Vec<Cell>> = BTreeMap::new();
    for y in 0..height {
        for x in 0..width {
            let tract = tract_of[(y * width + x) as usize];
            tract_cells.entry(tract).or_default().push(Cell { x, y });
        }
    }
    let mut by_kind: [Vec<usize>; 4] = Default::default();
    for (ix, loc) in locations.iter().enumerate() {
        by_kind[loc.kind.ix()].push(ix);
    }

    Ok(TractGrid {
        width,
        height,
        tract_of,
        tract_cells,
        locations,
        by_kind,
    })
}

pub fn load_tract_map(path: &Path) -> Result<TractGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tract_map(&text, path)
}

/// Where one agent lives and which locations they frequent. Location fields
/// index into the grid's location table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentPlacement {
    pub home: Cell,
    pub work_or_college: Option<usize>,
    pub essential: usize,
    pub leisure: usize,
}

fn pick(pool: &[usize], rng: &mut StreamRng) -> usize {
    pool[rng.random_range(0..pool.len())]
}

/// Assigns homes uniformly within each agent's tract and draws the activity
/// locations: work or college per economic activity, plus one essential and
/// one leisure location for everyone.
pub fn assign_placements(
    pop: &Population,
    grid: &TractGrid,
    rng: &mut StreamRng,
) -> Result<Vec<AgentPlacement>> {
    let need = |kind: LocationKind| -> Result<&[usize]> {
        let pool = grid.locations_of_kind(kind);
        if pool.is_empty() {
            return Err(Error::Synthesis(format!(
                "map has no {} locations",
                kind.token()
            )));
        }
        Ok(pool)
    };
    let essential = need(LocationKind::EssentialCommerce)?;
    let leisure = need(LocationKind::NonEssentialCommerce)?;

    let mut placements = Vec::with_capacity(pop.len());
    for agent in &pop.agents {
        let tract = agent.attributes.census_tract;
        let cells = grid
            .cells_of_tract(tract)
            .ok_or_else(|| Error::Synthesis(format!("tract {tract} has no cells on the map")))?;
        let home = cells[rng.random_range(0..cells.len())];
        let activity = agent.attributes.economic_activity;
        let work_or_college = if activity.works() {
            Some(pick(need(LocationKind::Work)?, rng))
        } else if activity.studies() {
            Some(pick(need(LocationKind::College)?, rng))
        } else {
            None
        };
        placements.push(AgentPlacement {
            home,
            work_or_college,
            essential: pick(essential, rng),
            leisure: pick(leisure, rng),
        });
    }
    Ok(placements)
}

/// One agent's whereabouts for a day. `At` carries a location index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Destination {
    Home,
    At(usize),
}

/// Movement rules. Working days send workers and students to their posts and
/// everyone else shopping; non-working days split leisure vs. essential
/// commerce. Lockdown keeps all but essential workers home and closes
/// non-essential commerce, redirecting the leisure branch home.
pub fn daily_destination(
    attrs: &AgentAttributes,
    placement: &AgentPlacement,
    day: DayKind,
    scenario: ScenarioKind,
    leisure_probability: f64,
    rng: &mut StreamRng,
) -> Destination {
    let activity = attrs.economic_activity;
    match scenario {
        ScenarioKind::Lockdown => match day {
            DayKind::Working => {
                if attrs.essential_worker && activity.works() {
                    Destination::At(placement.work_or_college.expect("worker has a workplace"))
                } else {
                    Destination::Home
                }
            }
            DayKind::NonWorking => {
                if rng.random_bool(leisure_probability) {
                    Destination::Home
                } else {
                    Destination::At(placement.essential)
                }
            }
        },
        ScenarioKind::NoMeasures | ScenarioKind::PreventiveMeasures => match day {
            DayKind::Working => {
                if activity.works() || activity.studies() {
                    Destination::At(placement.work_or_college.expect("commuter has a post"))
                } else {
                    Destination::At(placement.essential)
                }
            }
            DayKind::NonWorking => {
                if rng.random_bool(leisure_probability) {
                    Destination::At(placement.leisure)
                } else {
                    Destination::At(placement.essential)
                }
            }
        },
    }
}

/// Groups agents by destination location. `dests[agent]` is None for agents
/// excluded from circulation (dead, hospitalized, ICU, quarantined).
pub fn build_rosters(num_locations: usize, dests: &[Option<Destination>]) -> Vec<Vec<usize>> {
    let mut rosters = vec![Vec::new(); num_locations];
    for (agent, dest) in dests.iter().enumerate() {
        if let Some(Destination::At(loc)) = dest {
            rosters[*loc].push(agent);
        }
    }
    rosters
}
