//! Agent-based epidemic simulator coupling an extended SEIRD engine to a
//! need-driven model of containment-measure acceptance.
//!
//! The crate is organized around a daily five-phase loop: movement, social
//! decision cycles, epidemic state stepping, contagion, and network repair.
//! Everything is deterministic under a fixed scenario configuration and seed.

pub mod config;
pub mod epidemic;
pub mod error;
pub mod geo;
pub mod humat;
pub mod population;
pub mod report;
pub mod rng;
pub mod runner;
pub mod social;
#[cfg(test)]
pub(crate) mod test_fixtures;

pub use config::{
    day_kind, derive_transition_table, load_scenario, Calendar, DayKind, HumatParams,
    NetworkParams, Orientation, ScenarioConfig, ScenarioKind, TransitionTable, VirusParams,
    Weekday,
};
pub use epidemic::{
    contagion_step, expose, quarantine_entry_check, step_epidemic, ContagionContext, EpidemicState,
    Phase,
};
pub use error::{Error, Result};
pub use geo::{
    daily_destination, load_tract_map, AgentPlacement, Cell, Destination, Location, LocationKind,
    TractGrid,
};
pub use humat::{
    agent_cycle, choose_alternative, critical_broadcast, deliberate, evaluate_alternatives,
    Alternative, BroadcastPlan, CriticalNode, Dilemma, DilemmaKind,
};
pub use population::{
    ingest_real_agents, load_census, load_profile_tree, synthesize_population, Agent,
    AgentAttributes, CensusCell, EconomicActivity, Family, Gender, NeedProfile, NeedState, Origin,
    Population, ProfileTree, SalaryBand, SurveyData,
};
pub use report::{
    render_plot, series_color, sha256_hex, summarize_mean, summarize_replicate, write_graph_csv,
    write_mean_csv, write_replicate_csv, write_run, PlotSpec, RunArtifacts, RunManifest,
    SeriesSummary, CSV_HEADER, SERIES_NAMES,
};
pub use rng::{RngFactory, StreamRng};
pub use runner::{
    init_world, mean_series, run_replicates, DailyMetrics, MeanDay, ReplicateRun, RunResult, World,
    WorldInputs,
};
pub use social::{
    build_friend_network, build_neighbor_network, repair_network, LinkData, LinkKind, SocialGraph,
};
