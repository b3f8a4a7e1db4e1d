//! Population construction: survey ingestion, profile-tree classification,
//! and synthesis of additional agents from census marginals.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::humat::Alternative;
use crate::rng::StreamRng;

pub const AGE_MIN: u32 = 18;
pub const AGE_MAX: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Man,
    Woman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    OnePerson,
    SingleParent,
    SingleParentExtended,
    CoupleWithChildren,
    CoupleWithChildrenExtended,
    CoupleNoChildren,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EconomicActivity {
    Employee,
    Unemployed,
    Autonomous,
    CivilServant,
    Executive,
    CollegeStudent,
    Retired,
}

impl EconomicActivity {
    /// Categories that commute to a work location on working days.
    pub fn works(self) -> bool {
        matches!(
            self,
            EconomicActivity::Employee
                | EconomicActivity::Autonomous
                | EconomicActivity::CivilServant
                | EconomicActivity::Executive
        )
    }

    pub fn studies(self) -> bool {
        self == EconomicActivity::CollegeStudent
    }
}

/// Net monthly salary bands, in euros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SalaryBand {
    #[serde(rename = "no_income")]
    NoIncome,
    #[serde(rename = "under_1000")]
    Under1000,
    #[serde(rename = "from_1000_to_1500")]
    From1000To1500,
    #[serde(rename = "from_1501_to_3000")]
    From1501To3000,
    #[serde(rename = "from_3001_to_4500")]
    From3001To4500,
    #[serde(rename = "from_4501_to_6000")]
    From4501To6000,
    #[serde(rename = "over_6000")]
    Over6000,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAttributes {
    pub gender: Gender,
    pub age: u32,
    pub family: Family,
    pub rural_house: bool,
    pub economic_activity: EconomicActivity,
    pub essential_worker: bool,
    pub salary_band: SalaryBand,
    pub census_tract: u32,
}

/// One psychological need: its weight and how well each alternative meets it.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedState {
    /// Importance, in [0,1].
    pub importance: f64,
    /// Satisfaction per alternative, in [-1,1], indexed by `Alternative::ix`.
    pub satisfaction: [f64; 2],
}

/// Parallel to the population-wide need-name list.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedProfile {
    pub needs: Vec<NeedState>,
}

impl NeedProfile {
    pub fn satisfaction(&self, alt: Alternative, need_ix: usize) -> f64 {
        self.needs[need_ix].satisfaction[alt.ix()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Real,
    Simulated,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub attributes: AgentAttributes,
    pub needs: NeedProfile,
    pub origin: Origin,
    /// Declared position toward the measures; donors are partitioned by it.
    pub stance: Alternative,
}

#[derive(Debug, Clone)]
pub struct Population {
    pub agents: Vec<Agent>,
    /// Need names shared by every profile, in survey column order.
    pub need_names: Vec<String>,
    pub hedonic_ix: usize,
    pub belonging_ix: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Survey records plus the need schema discovered from the header row.
#[derive(Debug, Clone)]
pub struct SurveyData {
    pub need_names: Vec<String>,
    pub hedonic_ix: usize,
    pub belonging_ix: usize,
    pub agents: Vec<Agent>,
}

const SURVEY_FIXED_COLUMNS: [&str; 10] = [
    "id",
    "gender",
    "age",
    "family",
    "rural_house",
    "economic_activity",
    "essential_worker",
    "salary_band",
    "census_tract",
    "stance",
];

pub fn ingest_real_agents(path: &Path) -> Result<SurveyData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_survey_reader(file).map_err(|e| match e {
        Error::DataParse { message, .. } => Error::DataParse {
            what: "survey",
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

fn survey_err(message: String) -> Error {
    Error::DataParse {
        what: "survey",
        path: Default::default(),
        message,
    }
}

pub fn ingest_survey_reader<R: Read>(reader: R) -> Result<SurveyData> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();

    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| survey_err(format!("missing column {name:?}")))
    };
    for name in SURVEY_FIXED_COLUMNS {
        col(name)?;
    }

    // Needs are discovered from imp_* columns; each must come with matching
    // satisfaction columns for both alternatives.
    let mut need_names = Vec::new();
    for h in headers.iter() {
        if let Some(name) = h.strip_prefix("imp_") {
            need_names.push(name.to_string());
        }
    }
    if need_names.len() < 2 {
        return Err(survey_err(format!(
            "need at least 2 imp_* columns, found {}",
            need_names.len()
        )));
    }
    for h in headers.iter() {
        let known = SURVEY_FIXED_COLUMNS.contains(&h)
            || need_names.iter().any(|n| {
                h == format!("imp_{n}")
                    || h == format!("sat_accept_{n}")
                    || h == format!("sat_reject_{n}")
            });
        if !known {
            return Err(survey_err(format!("unknown column {h:?}")));
        }
    }
    let mut need_cols = Vec::new();
    for name in &need_names {
        need_cols.push((
            col(&format!("imp_{name}"))?,
            col(&format!("sat_accept_{name}"))?,
            col(&format!("sat_reject_{name}"))?,
        ));
    }
    let hedonic_ix = need_names
        .iter()
        .position(|n| n == "hedonic")
        .ok_or_else(|| survey_err("no need named \"hedonic\"".into()))?;
    let belonging_ix = need_names
        .iter()
        .position(|n| n == "belonging")
        .ok_or_else(|| survey_err("no need named \"belonging\"".into()))?;

    let gender_c = col("gender")?;
    let age_c = col("age")?;
    let family_c = col("family")?;
    let rural_c = col("rural_house")?;
    let activity_c = col("economic_activity")?;
    let essential_c = col("essential_worker")?;
    let salary_c = col("salary_band")?;
    let tract_c = col("census_tract")?;
    let stance_c = col("stance")?;

    let mut agents = Vec::new();
    for (row_ix, record) in csv.records().enumerate() {
        let record = record?;
        let row = row_ix + 2; // header is line 1
        let field = |c: usize| record.get(c).unwrap_or("");
        let bad = |what: &str, value: &str| survey_err(format!("row {row}: bad {what} {value:?}"));

        let age: u32 = field(age_c).parse().map_err(|_| bad("age", field(age_c)))?;
        if !(AGE_MIN..=AGE_MAX).contains(&age) {
            return Err(survey_err(format!(
                "row {row}: age {age} out of [{AGE_MIN},{AGE_MAX}]"
            )));
        }
        let attributes = AgentAttributes {
            gender: parse_token(field(gender_c)).ok_or_else(|| bad("gender", field(gender_c)))?,
            age,
            family: parse_token(field(family_c)).ok_or_else(|| bad("family", field(family_c)))?,
            rural_house: parse_bool(field(rural_c))
                .ok_or_else(|| bad("rural_house", field(rural_c)))?,
            economic_activity: parse_token(field(activity_c))
                .ok_or_else(|| bad("economic_activity", field(activity_c)))?,
            essential_worker: parse_bool(field(essential_c))
                .ok_or_else(|| bad("essential_worker", field(essential_c)))?,
            salary_band: parse_token(field(salary_c))
                .ok_or_else(|| bad("salary_band", field(salary_c)))?,
            census_tract: field(tract_c)
                .parse()
                .map_err(|_| bad("census_tract", field(tract_c)))?,
        };
        let stance: Alternative =
            parse_token(field(stance_c)).ok_or_else(|| bad("stance", field(stance_c)))?;

        let mut needs = Vec::with_capacity(need_cols.len());
        for (name, &(imp_c, acc_c, rej_c)) in need_names.iter().zip(&need_cols) {
            let num = |c: usize, what: &str| -> Result<f64> {
                field(c).parse::<f64>().map_err(|_| bad(what, field(c)))
            };
            let importance = num(imp_c, &format!("imp_{name}"))?;
            let sat_accept = num(acc_c, &format!("sat_accept_{name}"))?;
            let sat_reject = num(rej_c, &format!("sat_reject_{name}"))?;
            if !(0.0..=1.0).contains(&importance) {
                return Err(survey_err(format!(
                    "row {row}: imp_{name} {importance} out of [0,1]"
                )));
            }
            for (what, s) in [("sat_accept", sat_accept), ("sat_reject", sat_reject)] {
                if !(-1.0..=1.0).contains(&s) {
                    return Err(survey_err(format!(
                        "row {row}: {what}_{name} {s} out of [-1,1]"
                    )));
                }
            }
            needs.push(NeedState {
                importance,
                satisfaction: [sat_accept, sat_reject],
            });
        }

        agents.push(Agent {
            attributes,
            needs: NeedProfile { needs },
            origin: Origin::Real,
            stance,
        });
    }

    if agents.is_empty() {
        return Err(survey_err("no agents".into()));
    }
    Ok(SurveyData {
        need_names,
        hedonic_ix,
        belonging_ix,
        agents,
    })
}

fn parse_token<'de, T: Deserialize<'de>>(s: &'de str) -> Option<T> {
    use serde::de::value::Error as ValueError;
    use serde::de::value::StrDeserializer;
    T::deserialize(StrDeserializer::<ValueError>::new(s)).ok()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Profile tree

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Predicate {
    AgeLt { value: u32 },
    GenderIs { value: Gender },
    FamilyIn { values: Vec<Family> },
    EconomicActivityIn { values: Vec<EconomicActivity> },
    SalaryBandIn { values: Vec<SalaryBand> },
    RuralHouse { value: bool },
    EssentialWorker { value: bool },
}

impl Predicate {
    pub fn holds(&self, a: &AgentAttributes) -> bool {
        match self {
            Predicate::AgeLt { value } => a.age < *value,
            Predicate::GenderIs { value } => a.gender == *value,
            Predicate::FamilyIn { values } => values.contains(&a.family),
            Predicate::EconomicActivityIn { values } => values.contains(&a.economic_activity),
            Predicate::SalaryBandIn { values } => values.contains(&a.salary_band),
            Predicate::RuralHouse { value } => a.rural_house == *value,
            Predicate::EssentialWorker { value } => a.essential_worker == *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        predicate: Predicate,
        then: Box<TreeNode>,
        otherwise: Box<TreeNode>,
    },
    Leaf {
        profile_id: String,
        accept_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileTreeFile {
    root: TreeNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafInfo {
    pub profile_id: String,
    pub accept_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTree {
    root: TreeNode,
    leaves: Vec<LeafInfo>,
    /// Ascending, distinct age-split thresholds; cluster boundaries.
    age_splits: Vec<u32>,
}

impl ProfileTree {
    pub fn from_root(root: TreeNode) -> Result<Self> {
        let mut leaves = Vec::new();
        let mut age_splits = Vec::new();
        collect(&root, &mut leaves, &mut age_splits)?;
        age_splits.sort_unstable();
        age_splits.dedup();
        return Ok(ProfileTree {
            root,
            leaves,
            age_splits,
        });

        fn collect(
            node: &TreeNode,
            leaves: &mut Vec<LeafInfo>,
            age_splits: &mut Vec<u32>,
        ) -> Result<()> {
            match node {
                TreeNode::Split {
                    predicate,
                    then,
                    otherwise,
                } => {
                    if let Predicate::AgeLt { value } = predicate {
                        age_splits.push(*value);
                    }
                    collect(then, leaves, age_splits)?;
                    collect(otherwise, leaves, age_splits)
                }
                TreeNode::Leaf {
                    profile_id,
                    accept_fraction,
                } => {
                    if !(0.0..=1.0).contains(accept_fraction) {
                        return Err(Error::Synthesis(format!(
                            "leaf {profile_id}: accept_fraction {accept_fraction} out of [0,1]"
                        )));
                    }
                    if leaves.iter().any(|l| l.profile_id == *profile_id) {
                        return Err(Error::Synthesis(format!(
                            "duplicate leaf profile_id {profile_id:?}"
                        )));
                    }
                    leaves.push(LeafInfo {
                        profile_id: profile_id.clone(),
                        accept_fraction: *accept_fraction,
                    });
                    Ok(())
                }
            }
        }
    }

    /// Returns the index into `leaves` of the unique leaf `a` descends to.
    pub fn classify(&self, a: &AgentAttributes) -> usize {
        let mut node = &self.root;
        let mut leaf_counter = 0;
        loop {
            match node {
                TreeNode::Split {
                    predicate,
                    then,
                    otherwise,
                } => {
                    if predicate.holds(a) {
                        node = then;
                    } else {
                        // Skip over every leaf in the branch not taken.
                        leaf_counter += count_leaves(then);
                        node = otherwise;
                    }
                }
                TreeNode::Leaf { .. } => return leaf_counter,
            }
        }

        fn count_leaves(node: &TreeNode) -> usize {
            match node {
                TreeNode::Split {
                    then, otherwise, ..
                } => count_leaves(then) + count_leaves(otherwise),
                TreeNode::Leaf { .. } => 1,
            }
        }
    }

    pub fn leaves(&self) -> &[LeafInfo] {
        &self.leaves
    }

    /// Index of the age cluster delimited by the tree's age-split points.
    pub fn age_cluster(&self, age: u32) -> usize {
        self.age_splits.iter().filter(|&&b| age >= b).count()
    }

    pub fn num_age_clusters(&self) -> usize {
        self.age_splits.len() + 1
    }
}

pub fn load_profile_tree(path: &Path) -> Result<ProfileTree> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ProfileTreeFile = serde_json::from_str(&text).map_err(|e| Error::DataParse {
        what: "profile tree",
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ProfileTree::from_root(file.root)
}

// ---------------------------------------------------------------------------
// Census marginals

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusCell {
    pub tract: u32,
    pub age_lo: u32,
    pub age_hi: u32,
    pub gender: Gender,
    pub count: u64,
}

pub fn load_census(path: &Path) -> Result<Vec<CensusCell>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_census_reader(file).map_err(|e| match e {
        Error::DataParse { message, .. } => Error::DataParse {
            what: "census",
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn load_census_reader<R: Read>(reader: R) -> Result<Vec<CensusCell>> {
    let err = |message: String| Error::DataParse {
        what: "census",
        path: Default::default(),
        message,
    };
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    let expected = ["tract", "age_band", "gender", "count"];
    if headers.iter().ne(expected) {
        return Err(err(format!("header must be {expected:?}, got {headers:?}")));
    }

    let mut cells: Vec<CensusCell> = Vec::new();
    for (row_ix, record) in csv.records().enumerate() {
        let record = record?;
        let row = row_ix + 2;
        let tract: u32 = record[0]
            .parse()
            .map_err(|_| err(format!("row {row}: bad tract {:?}", &record[0])))?;
        let (lo, hi) = record[1]
            .split_once('-')
            .ok_or_else(|| err(format!("row {row}: bad age_band {:?}", &record[1])))?;
        let age_lo: u32 = lo
            .parse()
            .map_err(|_| err(format!("row {row}: bad age_band {:?}", &record[1])))?;
        let age_hi: u32 = hi
            .parse()
            .map_err(|_| err(format!("row {row}: bad age_band {:?}", &record[1])))?;
        if !(AGE_MIN <= age_lo && age_lo <= age_hi && age_hi <= AGE_MAX) {
            return Err(err(format!(
                "row {row}: age_band {}-{} outside [{AGE_MIN},{AGE_MAX}]",
                age_lo, age_hi
            )));
        }
        let gender: Gender = parse_token(&record[2])
            .ok_or_else(|| err(format!("row {row}: bad gender {:?}", &record[2])))?;
        let count: u64 = record[3]
            .parse()
            .map_err(|_| err(format!("row {row}: bad count {:?}", &record[3])))?;
        if cells
            .iter()
            .any(|c| c.tract == tract && c.age_lo == age_lo && c.gender == gender)
        {
            return Err(err(format!(
                "row {row}: duplicate cell (tract {tract}, band {age_lo}-{age_hi}, {gender:?})"
            )));
        }
        cells.push(CensusCell {
            tract,
            age_lo,
            age_hi,
            gender,
            count,
        });
    }
    if cells.is_empty() {
        return Err(err("no census cells".into()));
    }
    Ok(cells)
}

// ---------------------------------------------------------------------------
// Synthesis

/// Apportions `total` slots across cells proportionally to their counts,
/// flooring quotas and handing leftovers to the largest remainders (ties go to
/// the earlier cell). Guarantees |alloc - exact quota| < 1 per cell.
pub fn largest_remainder(counts: &[u64], total: u32) -> Vec<u32> {
    let sum: u64 = counts.iter().sum();
    if sum == 0 || total == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc = Vec::with_capacity(counts.len());
    let mut remainders = Vec::with_capacity(counts.len());
    let mut assigned: u32 = 0;
    for &c in counts {
        let quota = c as f64 * f64::from(total) / sum as f64;
        let floor = quota.floor() as u32;
        alloc.push(floor);
        remainders.push(quota - f64::from(floor));
        assigned += floor;
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        remainders[b]
            .partial_cmp(&remainders[a])
            .expect("remainders are finite")
            .then(a.cmp(&b))
    });
    for &ix in order.iter().take((total - assigned) as usize) {
        alloc[ix] += 1;
    }
    alloc
}

pub fn synthesize_population(
    survey: &SurveyData,
    census: &[CensusCell],
    tree: &ProfileTree,
    target_size: u32,
    rng: &mut StreamRng,
) -> Result<Population> {
    let real_count = survey.agents.len();
    if (target_size as usize) < real_count {
        return Err(Error::Synthesis(format!(
            "target_size {target_size} below the {real_count} survey agents"
        )));
    }
    let simulated_count = target_size - real_count as u32;

    // Donor pools per (leaf, stance), from classifying the real agents.
    let num_leaves = tree.leaves().len();
    let mut donors: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; num_leaves];
    for (ix, agent) in survey.agents.iter().enumerate() {
        let leaf = tree.classify(&agent.attributes);
        donors[leaf][agent.stance.ix()].push(ix);
    }
    for (leaf_ix, leaf) in tree.leaves().iter().enumerate() {
        let [ref accepters, ref rejecters] = donors[leaf_ix];
        if accepters.is_empty() && rejecters.is_empty() {
            return Err(Error::Synthesis(format!(
                "leaf {} has no survey members",
                leaf.profile_id
            )));
        }
        if leaf.accept_fraction > 0.0 && accepters.is_empty() {
            return Err(Error::Synthesis(format!(
                "empty leaf donor pool: leaf {} needs accepting donors",
                leaf.profile_id
            )));
        }
        if leaf.accept_fraction < 1.0 && rejecters.is_empty() {
            return Err(Error::Synthesis(format!(
                "empty leaf donor pool: leaf {} needs rejecting donors",
                leaf.profile_id
            )));
        }
    }

    // Attribute pools keyed by (gender, age cluster); cluster boundaries come
    // from the tree's age splits.
    let mut attr_pools: BTreeMap<(Gender, usize), Vec<usize>> = BTreeMap::new();
    for (ix, agent) in survey.agents.iter().enumerate() {
        let key = (
            agent.attributes.gender,
            tree.age_cluster(agent.attributes.age),
        );
        attr_pools.entry(key).or_default().push(ix);
    }

    let mut cells: Vec<&CensusCell> = census.iter().collect();
    cells.sort_by_key(|c| (c.tract, c.age_lo, c.gender));
    let counts: Vec<u64> = cells.iter().map(|c| c.count).collect();
    if counts.iter().sum::<u64>() == 0 && simulated_count > 0 {
        return Err(Error::Synthesis("census counts sum to zero".into()));
    }
    let alloc = largest_remainder(&counts, simulated_count);

    let mut agents = survey.agents.clone();
    agents.reserve(simulated_count as usize);
    for (cell, &n) in cells.iter().zip(&alloc) {
        for _ in 0..n {
            let age = rng.random_range(cell.age_lo..=cell.age_hi);
            let cluster = tree.age_cluster(age);
            let pool: &[usize] = attr_pools
                .get(&(cell.gender, cluster))
                .map(Vec::as_slice)
                .unwrap_or_else(|| {
                    log::warn!(
                        "no survey rows for ({:?}, age cluster {cluster}); using whole survey",
                        cell.gender
                    );
                    &[]
                });
            // Each remaining attribute is drawn from its own empirical
            // distribution within the pool.
            let draw = |rng: &mut StreamRng| -> usize {
                if pool.is_empty() {
                    rng.random_range(0..survey.agents.len())
                } else {
                    pool[rng.random_range(0..pool.len())]
                }
            };
            let family = survey.agents[draw(rng)].attributes.family;
            let rural_house = survey.agents[draw(rng)].attributes.rural_house;
            let economic_activity = survey.agents[draw(rng)].attributes.economic_activity;
            let essential_worker = survey.agents[draw(rng)].attributes.essential_worker;
            let salary_band = survey.agents[draw(rng)].attributes.salary_band;
            let attributes = AgentAttributes {
                gender: cell.gender,
                age,
                family,
                rural_house,
                economic_activity,
                essential_worker,
                salary_band,
                census_tract: cell.tract,
            };

            let leaf_ix = tree.classify(&attributes);
            let stance = if rng.random_bool(tree.leaves()[leaf_ix].accept_fraction) {
                Alternative::Accept
            } else {
                Alternative::Reject
            };
            let pool = &donors[leaf_ix][stance.ix()];
            let donor = &survey.agents[pool[rng.random_range(0..pool.len())]];
            agents.push(Agent {
                attributes,
                needs: donor.needs.clone(),
                origin: Origin::Simulated,
                stance,
            });
        }
    }
    debug_assert_eq!(agents.len(), target_size as usize);

    Ok(Population {
        agents,
        need_names: survey.need_names.clone(),
        hedonic_ix: survey.hedonic_ix,
        belonging_ix: survey.belonging_ix,
    })
}
