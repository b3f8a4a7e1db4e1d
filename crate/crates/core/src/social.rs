//! The two directed trust-weighted networks: proximity neighbors and
//! age-homophilous friends, plus the death-repair pass.

use std::collections::BTreeSet;

use rand::Rng;

use crate::config::NetworkParams;
use crate::geo::Cell;
use crate::population::Population;
use crate::rng::StreamRng;

pub const FIRST_FRIEND_AGE: u32 = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Neighbor,
    Friend,
}

/// Directed edge; trust is the source's trust in the target. The persuasion
/// counters feed the interlocutor-selection weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkData {
    pub target: usize,
    pub kind: LinkKind,
    pub trust: f64,
    pub attempts: u32,
    pub successes: u32,
}

impl LinkData {
    fn new(target: usize, kind: LinkKind, trust: f64) -> Self {
        LinkData {
            target,
            kind,
            trust,
            attempts: 0,
            successes: 0,
        }
    }
}

/// Adjacency lists of out-links per agent. Link existence is symmetric for
/// both kinds; trust and persuasion history are per direction.
#[derive(Debug, Clone, Default)]
pub struct SocialGraph {
    out: Vec<Vec<LinkData>>,
}

impl SocialGraph {
    pub fn new(n: usize) -> Self {
        SocialGraph {
            out: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn out(&self, agent: usize) -> &[LinkData] {
        &self.out[agent]
    }

    pub fn find_link(&self, source: usize, target: usize, kind: LinkKind) -> Option<usize> {
        self.out[source]
            .iter()
            .position(|l| l.target == target && l.kind == kind)
    }

    /// Adds the pair of directed links for one undirected tie.
    pub(crate) fn add_tie(
        &mut self,
        a: usize,
        b: usize,
        kind: LinkKind,
        trust_ab: f64,
        trust_ba: f64,
    ) {
        debug_assert_ne!(a, b, "self-links are not allowed");
        self.out[a].push(LinkData::new(b, kind, trust_ab));
        self.out[b].push(LinkData::new(a, kind, trust_ba));
    }

    pub fn record_attempt(&mut self, source: usize, link_ix: usize, success: bool) {
        let link = &mut self.out[source][link_ix];
        link.attempts += 1;
        if success {
            link.successes += 1;
        }
    }

    pub fn friend_degree(&self, agent: usize) -> usize {
        self.out[agent]
            .iter()
            .filter(|l| l.kind == LinkKind::Friend)
            .count()
    }

    pub fn living_friend_degree(&self, agent: usize, alive: &[bool]) -> usize {
        self.out[agent]
            .iter()
            .filter(|l| l.kind == LinkKind::Friend && alive[l.target])
            .count()
    }

    /// Drops every link touching `dead` (their own adjacency mirrors the
    /// incoming links, so no global scan is needed) and returns the agents
    /// that lost a link.
    pub fn remove_agent(&mut self, dead: usize) -> Vec<usize> {
        let links = std::mem::take(&mut self.out[dead]);
        let mut affected: Vec<usize> = links.iter().map(|l| l.target).collect();
        affected.sort_unstable();
        affected.dedup();
        for &t in &affected {
            self.out[t].retain(|l| l.target != dead);
        }
        affected
    }

    /// Edge list in a stable order, for dumps and golden tests.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &LinkData)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(src, links)| links.iter().map(move |l| (src, l)))
    }
}

/// Age-homophily band of an agent; bands are `age_band_width` years wide,
/// starting at the minimum agent age.
pub fn age_band(age: u32, p: &NetworkParams) -> u32 {
    (age.saturating_sub(FIRST_FRIEND_AGE)) / p.age_band_width
}

/// Links every pair of agents whose homes lie within Chebyshev distance
/// `social_reach`; existence symmetric, trusts independent per direction.
pub fn build_neighbor_network(
    graph: &mut SocialGraph,
    homes: &[Cell],
    p: &NetworkParams,
    rng: &mut StreamRng,
) {
    // Bucket agents by home cell so each agent only scans its reach window.
    let mut by_cell: std::collections::BTreeMap<Cell, Vec<usize>> = Default::default();
    for (ix, &home) in homes.iter().enumerate() {
        by_cell.entry(home).or_default().push(ix);
    }
    let reach = p.social_reach as i64;
    for (ix, &home) in homes.iter().enumerate() {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (nx, ny) = (i64::from(home.x) + dx, i64::from(home.y) + dy);
                if nx < 0 || ny < 0 {
                    continue;
                }
                let cell = Cell {
                    x: nx as u32,
                    y: ny as u32,
                };
                let Some(residents) = by_cell.get(&cell) else {
                    continue;
                };
                for &other in residents {
                    // Each unordered pair is handled once, by its lower id.
                    if other > ix {
                        let t_ab = rng.random::<f64>();
                        let t_ba = rng.random::<f64>();
                        graph.add_tie(ix, other, LinkKind::Neighbor, t_ab, t_ba);
                    }
                }
            }
        }
    }
}

/// Candidate pools per age band, shrunk to living agents on demand.
struct BandPools {
    bands: Vec<Vec<usize>>,
}

impl BandPools {
    fn build(pop: &Population, p: &NetworkParams, alive: Option<&[bool]>) -> Self {
        let max_band = age_band(crate::population::AGE_MAX, p);
        let mut bands = vec![Vec::new(); max_band as usize + 1];
        for (ix, agent) in pop.agents.iter().enumerate() {
            if alive.map_or(true, |a| a[ix]) {
                bands[age_band(agent.attributes.age, p) as usize].push(ix);
            }
        }
        BandPools { bands }
    }

    fn total(&self) -> usize {
        self.bands.iter().map(Vec::len).sum()
    }

    /// Uniform draw from the band, or from everyone on `any_band`.
    fn draw(&self, band: usize, any_band: bool, rng: &mut StreamRng) -> Option<usize> {
        if any_band {
            let total = self.total();
            if total == 0 {
                return None;
            }
            let mut k = rng.random_range(0..total);
            for pool in &self.bands {
                if k < pool.len() {
                    return Some(pool[k]);
                }
                k -= pool.len();
            }
            unreachable!("index within total");
        } else {
            let pool = &self.bands[band];
            if pool.is_empty() {
                return None;
            }
            Some(pool[rng.random_range(0..pool.len())])
        }
    }
}

const TIE_DRAW_RETRIES: usize = 32;

/// Draws one new friend for `agent` under the homophily rule and adds the
/// bidirectional tie. Returns false when no valid candidate exists.
fn add_friend_tie(
    graph: &mut SocialGraph,
    agent: usize,
    band: usize,
    pools: &BandPools,
    p: &NetworkParams,
    rng: &mut StreamRng,
) -> bool {
    let is_valid = |candidate: usize| {
        candidate != agent
            && graph
                .find_link(agent, candidate, LinkKind::Friend)
                .is_none()
    };
    for use_any_band in [false, true] {
        for _ in 0..TIE_DRAW_RETRIES {
            let any = use_any_band || rng.random_bool(p.random_friend);
            let Some(candidate) = pools.draw(band, any, rng) else {
                break;
            };
            if is_valid(candidate) {
                let t_ab = rng.random::<f64>();
                let t_ba = rng.random::<f64>();
                graph.add_tie(agent, candidate, LinkKind::Friend, t_ab, t_ba);
                return true;
            }
        }
        if !use_any_band {
            log::debug!("agent {agent}: band {band} exhausted, falling back to any band");
        }
    }
    // Tiny populations only: scan for any remaining legal candidate.
    for pool in &pools.bands {
        for &candidate in pool {
            if is_valid(candidate) {
                let t_ab = rng.random::<f64>();
                let t_ba = rng.random::<f64>();
                graph.add_tie(agent, candidate, LinkKind::Friend, t_ab, t_ba);
                return true;
            }
        }
    }
    log::warn!("agent {agent}: no friend candidates left");
    false
}

/// Gives every agent at least `num_friends` bidirectional friend ties, drawn
/// from the agent's age band except with probability `random_friend`.
pub fn build_friend_network(
    graph: &mut SocialGraph,
    pop: &Population,
    p: &NetworkParams,
    rng: &mut StreamRng,
) {
    let pools = BandPools::build(pop, p, None);
    for agent in 0..pop.len() {
        let band = age_band(pop.agents[agent].attributes.age, p) as usize;
        while graph.friend_degree(agent) < p.num_friends as usize {
            if !add_friend_tie(graph, agent, band, &pools, p, rng) {
                return;
            }
        }
    }
}

/// Death repair: removes all links of the newly dead and tops the survivors'
/// living-friend degree back up to the minimum. New ties follow the same
/// homophily rule and never target dead agents.
pub fn repair_network(
    graph: &mut SocialGraph,
    pop: &Population,
    newly_dead: &[usize],
    alive: &[bool],
    p: &NetworkParams,
    rng: &mut StreamRng,
) {
    if newly_dead.is_empty() {
        return;
    }
    let mut affected = BTreeSet::new();
    for &dead in newly_dead {
        for agent in graph.remove_agent(dead) {
            if alive[agent] {
                affected.insert(agent);
            }
        }
    }
    let pools = BandPools::build(pop, p, Some(alive));
    for &agent in &affected {
        let band = age_band(pop.agents[agent].attributes.age, p) as usize;
        while graph.living_friend_degree(agent, alive) < p.num_friends as usize {
            if !add_friend_tie(graph, agent, band, &pools, p, rng) {
                return;
            }
        }
    }
}
