//! Per-agent epidemic state machine and the daily contagion step.
//!
//! Branch outcomes and stage durations are drawn once, on entry to each
//! state, so downstream substates (quarantine) inherit the drawn outcome.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::config::{ScenarioKind, TransitionTable, VirusParams};
use crate::geo::LocationKind;
use crate::rng::StreamRng;
use crate::social::{LinkKind, SocialGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Susceptible,
    Exposed,
    /// Infectious and circulating; the only phase that spreads the virus.
    InfectiousCommunity,
    Hospitalized,
    Icu,
    Quarantine,
    Recovered,
    Dead,
}

pub const PHASES: [Phase; 8] = [
    Phase::Susceptible,
    Phase::Exposed,
    Phase::InfectiousCommunity,
    Phase::Hospitalized,
    Phase::Icu,
    Phase::Quarantine,
    Phase::Recovered,
    Phase::Dead,
];

impl Phase {
    /// Excluded from daily movement and location rosters.
    pub fn confined(self) -> bool {
        matches!(
            self,
            Phase::Hospitalized | Phase::Icu | Phase::Quarantine | Phase::Dead
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpidemicState {
    pub phase: Phase,
    /// Next transition, if the current phase has one pending.
    pub scheduled: Option<(Phase, u32)>,
    pub asymptomatic: bool,
    pub infected_on: Option<u32>,
    pub infectious_since: Option<u32>,
}

impl EpidemicState {
    pub fn susceptible() -> Self {
        EpidemicState {
            phase: Phase::Susceptible,
            scheduled: None,
            asymptomatic: false,
            infected_on: None,
            infectious_since: None,
        }
    }
}

/// Incubation duration in whole days: lognormal, rounded to the nearest day,
/// never below one.
pub fn sample_incubation_days(v: &VirusParams, rng: &mut StreamRng) -> u32 {
    let dist = LogNormal::new(v.incubation_mu, v.incubation_sigma).expect("valid lognormal");
    (dist.sample(rng).round() as u32).max(1)
}

/// Moves a susceptible agent to Exposed and schedules the infectious onset.
/// The asymptomatic flag is only drawn where testing awareness matters.
pub fn expose(
    state: &mut EpidemicState,
    day: u32,
    v: &VirusParams,
    scenario: ScenarioKind,
    rng: &mut StreamRng,
) {
    assert_eq!(
        state.phase,
        Phase::Susceptible,
        "expose on a non-susceptible agent"
    );
    let incubation = sample_incubation_days(v, rng);
    state.phase = Phase::Exposed;
    state.scheduled = Some((Phase::InfectiousCommunity, day + incubation));
    state.infected_on = Some(day);
    state.asymptomatic =
        scenario == ScenarioKind::PreventiveMeasures && rng.random_bool(v.asymptomatic_fraction);
}

/// Seeds an initial case straight into the community-infectious phase, with
/// the usual entry draws.
pub fn seed_infectious(
    state: &mut EpidemicState,
    day: u32,
    t: &TransitionTable,
    v: &VirusParams,
    scenario: ScenarioKind,
    rng: &mut StreamRng,
) {
    assert_eq!(
        state.phase,
        Phase::Susceptible,
        "seeding a non-susceptible agent"
    );
    state.infected_on = Some(day);
    state.asymptomatic =
        scenario == ScenarioKind::PreventiveMeasures && rng.random_bool(v.asymptomatic_fraction);
    enter_phase(state, Phase::InfectiousCommunity, day, t, v, rng);
}

/// Applies entry effects of `phase`: branch draw plus duration scheduling.
fn enter_phase(
    state: &mut EpidemicState,
    phase: Phase,
    day: u32,
    t: &TransitionTable,
    v: &VirusParams,
    rng: &mut StreamRng,
) {
    state.phase = phase;
    state.scheduled = match phase {
        Phase::InfectiousCommunity => {
            state.infectious_since = Some(day);
            let u = rng.random::<f64>();
            if u < t.p_id {
                Some((Phase::Dead, day + v.days_id))
            } else if u < t.p_id + t.p_ih {
                Some((Phase::Hospitalized, day + v.days_ih))
            } else {
                Some((Phase::Recovered, day + v.days_ir))
            }
        }
        Phase::Hospitalized => {
            let u = rng.random::<f64>();
            if u < t.p_hd {
                Some((Phase::Dead, day + v.days_hd))
            } else if u < t.p_hd + t.p_hicu {
                Some((Phase::Icu, day + v.days_hicu))
            } else {
                Some((Phase::Recovered, day + v.days_hr))
            }
        }
        Phase::Icu => {
            if rng.random_bool(t.p_icud) {
                Some((Phase::Dead, day + v.days_icud))
            } else {
                Some((Phase::Recovered, day + v.days_icur))
            }
        }
        Phase::Recovered => Some((Phase::Susceptible, day + v.days_rs)),
        Phase::Susceptible => {
            // Immunity wore off; the slate is clean for reinfection.
            state.asymptomatic = false;
            state.infected_on = None;
            state.infectious_since = None;
            None
        }
        Phase::Dead => None,
        Phase::Exposed | Phase::Quarantine => {
            unreachable!("{phase:?} is never entered via a scheduled transition")
        }
    };
}

/// True when a community-infectious agent is due to isolate: symptomatic,
/// currently compliant, and past the awareness delay. Rejecting agents never
/// enter; asymptomatic agents do not know they are infected.
pub fn quarantine_entry_check(
    state: &EpidemicState,
    day: u32,
    accepts: bool,
    v: &VirusParams,
    scenario: ScenarioKind,
) -> bool {
    scenario == ScenarioKind::PreventiveMeasures
        && state.phase == Phase::InfectiousCommunity
        && !state.asymptomatic
        && accepts
        && state
            .infectious_since
            .is_some_and(|since| day - since >= v.quarantine_delay_days)
}

/// One day of state-machine progress for one agent: quarantine exit for
/// agents that stopped complying, then any due scheduled transition, then
/// quarantine entry. The drawn outcome rides along through quarantine.
pub fn step_epidemic(
    state: &mut EpidemicState,
    day: u32,
    accepts: bool,
    t: &TransitionTable,
    v: &VirusParams,
    scenario: ScenarioKind,
    rng: &mut StreamRng,
) {
    debug_assert_ne!(state.phase, Phase::Dead, "stepping a dead agent");
    if state.phase == Phase::Quarantine && !accepts {
        state.phase = Phase::InfectiousCommunity;
    }
    if let Some((next, due)) = state.scheduled {
        if day >= due {
            enter_phase(state, next, day, t, v, rng);
        }
    }
    if quarantine_entry_check(state, day, accepts, v, scenario) {
        state.phase = Phase::Quarantine;
    }
}

/// Inputs of one day's contagion pass. `phases` is the start-of-day snapshot
/// so results do not depend on iteration order.
pub struct ContagionContext<'a> {
    pub phases: &'a [Phase],
    pub accepts: &'a [bool],
    /// Per-location agent lists for today; confined agents excluded.
    pub rosters: &'a [Vec<usize>],
    pub roster_kinds: &'a [LocationKind],
    pub graph: &'a SocialGraph,
    pub scenario: ScenarioKind,
    pub v: &'a VirusParams,
    pub meet_friend_probability: f64,
}

/// Infection probability for one susceptible contact at a location.
fn location_probability(ctx: &ContagionContext, susceptible: usize, kind: LocationKind) -> f64 {
    match ctx.scenario {
        ScenarioKind::NoMeasures => ctx.v.p_se,
        ScenarioKind::Lockdown => unreachable!("no location contagion under lockdown"),
        ScenarioKind::PreventiveMeasures => {
            if !ctx.accepts[susceptible] {
                ctx.v.p_se
            } else if kind == LocationKind::NonEssentialCommerce {
                ctx.v.p_se_non_essential
            } else {
                ctx.v.p_se_accepting
            }
        }
    }
}

/// Infection probability for one susceptible friend contact; zero when the
/// meeting cannot happen (lockdown requires both parties non-compliant).
fn friend_probability(ctx: &ContagionContext, infectious: usize, susceptible: usize) -> f64 {
    let p = match ctx.scenario {
        ScenarioKind::NoMeasures => ctx.v.p_se,
        ScenarioKind::Lockdown => {
            if ctx.accepts[infectious] || ctx.accepts[susceptible] {
                return 0.0;
            }
            ctx.v.lockdown_p_se()
        }
        ScenarioKind::PreventiveMeasures => {
            if ctx.accepts[susceptible] {
                ctx.v.p_se_non_essential
            } else {
                ctx.v.p_se
            }
        }
    };
    p * ctx.meet_friend_probability
}

/// Daily contagion: every infectious community agent draws once against each
/// susceptible roster-mate and each susceptible living friend. An agent
/// exposed by several contacts counts once. Exposures are returned, not
/// applied, so the caller commits them after the scan.
pub fn contagion_step(ctx: &ContagionContext, rng: &mut StreamRng) -> Vec<usize> {
    let n = ctx.phases.len();
    let mut exposed = vec![false; n];
    let infectious = |a: usize| ctx.phases[a] == Phase::InfectiousCommunity;
    let susceptible = |a: usize| ctx.phases[a] == Phase::Susceptible;

    if ctx.scenario != ScenarioKind::Lockdown {
        for (roster, &kind) in ctx.rosters.iter().zip(ctx.roster_kinds) {
            let sources = roster.iter().filter(|&&a| infectious(a)).count();
            if sources == 0 {
                continue;
            }
            for &contact in roster.iter().filter(|&&a| susceptible(a)) {
                let p = location_probability(ctx, contact, kind);
                // One independent draw per infectious roster-mate.
                for _ in 0..sources {
                    if rng.random_bool(p) {
                        exposed[contact] = true;
                    }
                }
            }
        }
    }

    for source in (0..n).filter(|&a| infectious(a)) {
        for link in ctx.graph.out(source) {
            if link.kind != LinkKind::Friend || !susceptible(link.target) {
                continue;
            }
            let p = friend_probability(ctx, source, link.target);
            if p > 0.0 && rng.random_bool(p) {
                exposed[link.target] = true;
            }
        }
    }

    (0..n).filter(|&a| exposed[a]).collect()
}
