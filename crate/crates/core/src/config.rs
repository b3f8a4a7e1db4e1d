//! Scenario configuration: parsing, defaults, validation, derived transition
//! probabilities, and the working-day calendar.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Free movement, single contagion probability.
    NoMeasures,
    /// Only essential workers commute; contagion limited to meetings between
    /// non-compliant friends.
    Lockdown,
    /// Compliance-dependent contagion probabilities plus quarantine.
    PreventiveMeasures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    fn index(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayKind {
    Working,
    NonWorking,
}

/// Per-contact-day transmission probabilities and stage timings.
///
/// Defaults carry the calibrated baseline values; the four compliance-variant
/// fields additionally default to the documented calibration targets so a
/// scenario file only has to override what it studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirusParams {
    #[serde(default = "d_p_se")]
    pub p_se: f64,
    /// Contagion probability at clandestine friend meetings under lockdown;
    /// falls back to `p_se` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_se_quarantine_scenario: Option<f64>,
    /// Compliant agent at an essential business (also work and college).
    #[serde(default = "d_p_se_accepting")]
    pub p_se_accepting: f64,
    /// Compliant agent at a non-essential business.
    #[serde(default = "d_p_se_non_essential")]
    pub p_se_non_essential: f64,
    #[serde(default = "d_p_id")]
    pub p_id: f64,
    #[serde(default = "d_p_ih")]
    pub p_ih: f64,
    #[serde(default = "d_p_hd")]
    pub p_hd: f64,
    #[serde(default = "d_p_hicu")]
    pub p_hicu: f64,
    #[serde(default = "d_p_icud")]
    pub p_icud: f64,
    /// Lognormal parameters of the incubation period, in days.
    #[serde(default = "d_incubation_mu")]
    pub incubation_mu: f64,
    #[serde(default = "d_incubation_sigma")]
    pub incubation_sigma: f64,
    #[serde(default = "d_days_ih")]
    pub days_ih: u32,
    #[serde(default = "d_days_id")]
    pub days_id: u32,
    #[serde(default = "d_days_ir")]
    pub days_ir: u32,
    #[serde(default = "d_days_hicu")]
    pub days_hicu: u32,
    #[serde(default = "d_days_hd")]
    pub days_hd: u32,
    #[serde(default = "d_days_hr")]
    pub days_hr: u32,
    #[serde(default = "d_days_icud")]
    pub days_icud: u32,
    #[serde(default = "d_days_icur")]
    pub days_icur: u32,
    /// Days of immunity before a recovered agent becomes susceptible again.
    #[serde(default = "d_days_rs")]
    pub days_rs: u32,
    /// Days after becoming infectious before a compliant symptomatic agent
    /// enters quarantine.
    #[serde(default = "d_quarantine_delay_days")]
    pub quarantine_delay_days: u32,
    #[serde(default = "d_asymptomatic_fraction")]
    pub asymptomatic_fraction: f64,
}

fn d_p_se() -> f64 {
    0.07
}
fn d_p_se_accepting() -> f64 {
    0.02
}
fn d_p_se_non_essential() -> f64 {
    0.04
}
fn d_p_id() -> f64 {
    0.005
}
fn d_p_ih() -> f64 {
    0.07
}
fn d_p_hd() -> f64 {
    0.005
}
fn d_p_hicu() -> f64 {
    0.08
}
fn d_p_icud() -> f64 {
    0.31
}
fn d_incubation_mu() -> f64 {
    1.621
}
fn d_incubation_sigma() -> f64 {
    0.418
}
fn d_days_ih() -> u32 {
    5
}
fn d_days_id() -> u32 {
    10
}
fn d_days_ir() -> u32 {
    10
}
fn d_days_hicu() -> u32 {
    3
}
fn d_days_hd() -> u32 {
    10
}
fn d_days_hr() -> u32 {
    10
}
fn d_days_icud() -> u32 {
    7
}
fn d_days_icur() -> u32 {
    7
}
fn d_days_rs() -> u32 {
    90
}
fn d_quarantine_delay_days() -> u32 {
    3
}
fn d_asymptomatic_fraction() -> f64 {
    0.4
}

impl Default for VirusParams {
    fn default() -> Self {
        // Round-trips through serde so the two default paths cannot diverge.
        toml::from_str("").expect("empty virus table must deserialize")
    }
}

impl VirusParams {
    /// Effective contagion probability for lockdown friend meetings.
    pub fn lockdown_p_se(&self) -> f64 {
        self.p_se_quarantine_scenario.unwrap_or(self.p_se)
    }
}

/// Branch distributions with residuals resolved; each row sums to exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionTable {
    pub p_id: f64,
    pub p_ih: f64,
    pub p_ir: f64,
    pub p_hd: f64,
    pub p_hicu: f64,
    pub p_hr: f64,
    pub p_icud: f64,
    pub p_icur: f64,
}

pub fn derive_transition_table(v: &VirusParams) -> TransitionTable {
    TransitionTable {
        p_id: v.p_id,
        p_ih: v.p_ih,
        p_ir: 1.0 - (v.p_id + v.p_ih),
        p_hd: v.p_hd,
        p_hicu: v.p_hicu,
        p_hr: 1.0 - (v.p_hd + v.p_hicu),
        p_icud: v.p_icud,
        p_icur: 1.0 - v.p_icud,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calendar {
    pub horizon_days: u32,
    /// Day of week of simulation day 0.
    pub anchor_weekday: Weekday,
    /// Probability of choosing leisure over essential commerce on a
    /// non-working day.
    pub leisure_probability: f64,
}

impl Default for Calendar {
    fn default() -> Self {
        Self {
            horizon_days: 150,
            anchor_weekday: Weekday::Monday,
            leisure_probability: 0.25,
        }
    }
}

pub fn day_kind(c: &Calendar, day_index: u32) -> DayKind {
    assert!(day_index < c.horizon_days, "day {day_index} out of horizon");
    if (c.anchor_weekday.index() + day_index) % 7 < 5 {
        DayKind::Working
    } else {
        DayKind::NonWorking
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkParams {
    /// Chebyshev radius, in cells, of the proximity circle around each home.
    pub social_reach: u32,
    /// Minimum friend links per agent.
    pub num_friends: u32,
    /// Probability that a new friend tie ignores the age band.
    pub random_friend: f64,
    /// Width, in years, of the age-homophily bands (first band starts at 18).
    pub age_band_width: u32,
    /// Probability that a friend pair is in contact on a given day.
    pub meet_friend_probability: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            social_reach: 1,
            num_friends: 5,
            random_friend: 0.05,
            age_band_width: 10,
            meet_friend_probability: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HumatParams {
    /// Cap on interpersonal persuasion.
    pub alpha: f64,
    /// Minimum overall-satisfaction gap for step 1 of alternative choice.
    pub overall_threshold: f64,
    /// Minimum dissonance gap for step 2.
    pub dissonance_threshold: f64,
    /// Minimum hedonic-evaluation gap for step 3.
    pub hedonic_threshold: f64,
    /// Dissonance level above which dilemmas trigger communication.
    pub dissonance_tolerance: f64,
    /// Per-agent-day probability of a spontaneous chat.
    pub random_chat_probability: f64,
}

impl Default for HumatParams {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            overall_threshold: 0.2,
            dissonance_threshold: 0.1,
            hedonic_threshold: 0.2,
            dissonance_tolerance: 0.5,
            random_chat_probability: 0.1,
        }
    }
}

/// Input files for population construction. Relative paths are resolved
/// against the scenario file's directory at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSource {
    pub survey: PathBuf,
    pub census: PathBuf,
    pub profile_tree: PathBuf,
    pub tract_map: PathBuf,
    pub target_size: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    ProMeasures,
    AntiMeasures,
}

/// Declares an institutional node and the size of its random audience network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalNodeDecl {
    pub id: String,
    pub network_size: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalNodePlanConfig {
    pub node_id: String,
    pub orientation: Orientation,
    pub start_day: u32,
    pub end_day: u32,
    pub frequency_days: u32,
    /// Fraction of the audience network reached per broadcast.
    pub reach: f64,
    /// When set, the broadcast goes out over this node's network and trust.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_node_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario_kind: ScenarioKind,
    #[serde(default = "d_replicates")]
    pub replicates: u32,
    pub rng_seed: u64,
    /// Fraction of the population seeded infectious on day 0.
    pub initial_infected_fraction: f64,
    pub virus: VirusParams,
    #[serde(default)]
    pub calendar: Calendar,
    #[serde(default)]
    pub network: NetworkParams,
    #[serde(default)]
    pub humat: HumatParams,
    pub population: PopulationSource,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub critical_nodes: Vec<CriticalNodeDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub critical_node_plans: Vec<CriticalNodePlanConfig>,
}

fn d_replicates() -> u32 {
    1
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config: ScenarioConfig = toml::from_str(&text).map_err(|e| Error::ScenarioParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    config.resolve_paths(base);
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.population.survey,
            &mut self.population.census,
            &mut self.population.profile_tree,
            &mut self.population.tract_map,
        ] {
            if p.is_relative() {
                *p = base.join(&p);
            }
        }
    }

    /// Checks every invariant and reports all violations at once, each naming
    /// the offending field.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let mut check = |ok: bool, msg: fmt::Arguments| {
            if !ok {
                violations.push(msg.to_string());
            }
        };

        check(
            self.schema_version == SCHEMA_VERSION,
            format_args!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ),
        );
        check(
            self.replicates >= 1,
            format_args!("replicates: must be >= 1"),
        );
        check(
            in_unit(self.initial_infected_fraction),
            format_args!(
                "initial_infected_fraction: {} out of [0,1]",
                self.initial_infected_fraction
            ),
        );

        let v = &self.virus;
        let probs = [
            ("virus.p_se", v.p_se),
            (
                "virus.p_se_quarantine_scenario",
                v.p_se_quarantine_scenario.unwrap_or(0.0),
            ),
            ("virus.p_se_accepting", v.p_se_accepting),
            ("virus.p_se_non_essential", v.p_se_non_essential),
            ("virus.p_id", v.p_id),
            ("virus.p_ih", v.p_ih),
            ("virus.p_hd", v.p_hd),
            ("virus.p_hicu", v.p_hicu),
            ("virus.p_icud", v.p_icud),
            ("virus.asymptomatic_fraction", v.asymptomatic_fraction),
        ];
        for (name, p) in probs {
            check(in_unit(p), format_args!("{name}: {p} out of [0,1]"));
        }
        check(
            v.p_id + v.p_ih <= 1.0,
            format_args!("virus.p_id + virus.p_ih: {} exceeds 1", v.p_id + v.p_ih),
        );
        check(
            v.p_hd + v.p_hicu <= 1.0,
            format_args!("virus.p_hd + virus.p_hicu: {} exceeds 1", v.p_hd + v.p_hicu),
        );
        let durations = [
            ("virus.days_ih", v.days_ih),
            ("virus.days_id", v.days_id),
            ("virus.days_ir", v.days_ir),
            ("virus.days_hicu", v.days_hicu),
            ("virus.days_hd", v.days_hd),
            ("virus.days_hr", v.days_hr),
            ("virus.days_icud", v.days_icud),
            ("virus.days_icur", v.days_icur),
            ("virus.days_rs", v.days_rs),
        ];
        for (name, d) in durations {
            check(d >= 1, format_args!("{name}: must be >= 1"));
        }
        check(
            v.incubation_sigma > 0.0 && v.incubation_sigma.is_finite(),
            format_args!("virus.incubation_sigma: must be > 0"),
        );
        check(
            v.incubation_mu.is_finite(),
            format_args!("virus.incubation_mu: must be finite"),
        );

        let c = &self.calendar;
        check(
            c.horizon_days >= 1,
            format_args!("calendar.horizon_days: must be >= 1"),
        );
        check(
            in_unit(c.leisure_probability),
            format_args!(
                "calendar.leisure_probability: {} out of [0,1]",
                c.leisure_probability
            ),
        );

        let n = &self.network;
        check(
            in_unit(n.random_friend),
            format_args!("network.random_friend: {} out of [0,1]", n.random_friend),
        );
        check(
            in_unit(n.meet_friend_probability),
            format_args!(
                "network.meet_friend_probability: {} out of [0,1]",
                n.meet_friend_probability
            ),
        );
        check(
            n.age_band_width >= 1,
            format_args!("network.age_band_width: must be >= 1"),
        );

        let h = &self.humat;
        check(
            (0.0..=0.5).contains(&h.alpha),
            format_args!("humat.alpha: {} out of [0,0.5]", h.alpha),
        );
        for (name, t) in [
            ("humat.overall_threshold", h.overall_threshold),
            ("humat.dissonance_threshold", h.dissonance_threshold),
            ("humat.hedonic_threshold", h.hedonic_threshold),
        ] {
            check(t >= 0.0, format_args!("{name}: must be >= 0"));
        }
        check(
            in_unit(h.dissonance_tolerance),
            format_args!(
                "humat.dissonance_tolerance: {} out of [0,1]",
                h.dissonance_tolerance
            ),
        );
        check(
            in_unit(h.random_chat_probability),
            format_args!(
                "humat.random_chat_probability: {} out of [0,1]",
                h.random_chat_probability
            ),
        );

        check(
            self.population.target_size >= 1,
            format_args!("population.target_size: must be >= 1"),
        );

        let mut ids: Vec<&str> = Vec::new();
        for node in &self.critical_nodes {
            check(
                node.network_size >= 1,
                format_args!("critical_nodes[{}].network_size: must be >= 1", node.id),
            );
            check(
                !ids.contains(&node.id.as_str()),
                format_args!("critical_nodes[{}].id: duplicate", node.id),
            );
            ids.push(&node.id);
        }
        for (i, plan) in self.critical_node_plans.iter().enumerate() {
            check(
                plan.start_day <= plan.end_day,
                format_args!(
                    "critical_node_plans[{i}].start_day: {} exceeds end_day {}",
                    plan.start_day, plan.end_day
                ),
            );
            check(
                plan.frequency_days >= 1,
                format_args!("critical_node_plans[{i}].frequency_days: must be >= 1"),
            );
            check(
                in_unit(plan.reach),
                format_args!(
                    "critical_node_plans[{i}].reach: {} out of [0,1]",
                    plan.reach
                ),
            );
            check(
                ids.contains(&plan.node_id.as_str()),
                format_args!(
                    "critical_node_plans[{i}].node_id: unknown node {:?}",
                    plan.node_id
                ),
            );
            if let Some(sec) = &plan.secondary_node_id {
                check(
                    ids.contains(&sec.as_str()),
                    format_args!(
                        "critical_node_plans[{i}].secondary_node_id: unknown node {sec:?}"
                    ),
                );
            }
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::ScenarioInvalid { violations })
        }
    }
}

fn in_unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}
