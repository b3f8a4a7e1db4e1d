//! Self-contained miniature city used across module and integration tests:
//! a 6x6 two-tract map, a two-leaf profile tree, a 40-respondent survey, and
//! census marginals consistent with all three.

use std::path::Path;

use crate::config::{Calendar, ScenarioConfig, ScenarioKind};

pub fn fixture_survey() -> String {
    let mut out = String::from(
        "id,gender,age,family,rural_house,economic_activity,essential_worker,salary_band,\
         census_tract,stance,imp_hedonic,imp_belonging,imp_security,\
         sat_accept_hedonic,sat_reject_hedonic,sat_accept_belonging,sat_reject_belonging,\
         sat_accept_security,sat_reject_security\n",
    );
    let genders = ["man", "woman"];
    let families = [
        "one_person",
        "couple_with_children",
        "couple_no_children",
        "single_parent",
        "other",
    ];
    let activities = [
        "employee",
        "employee",
        "autonomous",
        "civil_servant",
        "college_student",
        "retired",
        "unemployed",
        "executive",
    ];
    let salaries = [
        "no_income",
        "under_1000",
        "from_1000_to_1500",
        "from_1501_to_3000",
        "from_3001_to_4500",
    ];
    for id in 0..40u32 {
        let gender = genders[(id % 2) as usize];
        // Ages sweep both age clusters (< 50 and >= 50) in every tract.
        let age = 19 + (id * 7) % 75;
        let family = families[(id % 5) as usize];
        let activity = if age >= 67 {
            "retired"
        } else {
            activities[(id % 8) as usize]
        };
        let essential = activity == "employee" && id % 4 == 0;
        let salary = salaries[(id % 5) as usize];
        let tract = 1 + id % 2;
        // Alternate stances so every profile leaf has donors of both kinds.
        let stance = if id % 2 == 0 { "accept" } else { "reject" };
        let sign = if stance == "accept" { 1.0 } else { -1.0 };
        let imp_h = 0.3 + 0.015 * f64::from(id % 20);
        let imp_b = 0.4 + 0.01 * f64::from(id % 30);
        let imp_s = 0.5 + 0.01 * f64::from(id % 25);
        // Satisfactions lean with the stance but keep mixed signs in the
        // profile so dissonance and dilemmas occur.
        let sa_h = -0.4 * sign - 0.002 * f64::from(id);
        let sr_h = 0.5 * sign + 0.002 * f64::from(id);
        let sa_b = 0.6 * sign;
        let sr_b = -0.5 * sign;
        let sa_s = 0.7 * sign - 0.001 * f64::from(id);
        let sr_s = -0.6 * sign;
        out.push_str(&format!(
            "{id},{gender},{age},{family},false,{activity},{essential},{salary},{tract},{stance},\
             {imp_h:.3},{imp_b:.3},{imp_s:.3},{sa_h:.3},{sr_h:.3},{sa_b:.3},{sr_b:.3},{sa_s:.3},{sr_s:.3}\n"
        ));
    }
    out
}

pub fn fixture_census() -> String {
    let mut out = String::from("tract,age_band,gender,count\n");
    for tract in [1u32, 2] {
        for gender in ["man", "woman"] {
            out.push_str(&format!("{tract},18-49,{gender},30\n"));
            out.push_str(&format!("{tract},50-100,{gender},20\n"));
        }
    }
    out
}

pub fn fixture_tree() -> String {
    r#"{
  "root": {
    "kind": "split",
    "predicate": {"test": "age_lt", "value": 50},
    "then": {"kind": "leaf", "profile_id": "younger", "accept_fraction": 0.6},
    "otherwise": {"kind": "leaf", "profile_id": "older", "accept_fraction": 0.4}
  }
}
"#
    .to_string()
}

pub fn fixture_map() -> String {
    let mut out = String::from("size 6 6\n");
    for y in 0..6u32 {
        let tract = if y < 3 { 1 } else { 2 };
        for x in 0..6u32 {
            out.push_str(&format!("cell {x} {y} {tract}\n"));
        }
    }
    out.push_str(
        "loc work 0 0 0\n\
         loc work 5 5 1\n\
         loc college 2 2 0\n\
         loc essential_commerce 1 1 0\n\
         loc essential_commerce 4 4 1\n\
         loc non_essential_commerce 3 3 0\n\
         loc non_essential_commerce 0 5 1\n",
    );
    out
}

pub fn write_fixture_data(dir: &Path) {
    std::fs::write(dir.join("survey.csv"), fixture_survey()).unwrap();
    std::fs::write(dir.join("census.csv"), fixture_census()).unwrap();
    std::fs::write(dir.join("profile_tree.json"), fixture_tree()).unwrap();
    std::fs::write(dir.join("tract_map.txt"), fixture_map()).unwrap();
}

/// A small, fast scenario over the fixture files in `dir`.
pub fn fixture_config(dir: &Path) -> ScenarioConfig {
    let toml_text = format!(
        r#"
schema_version = 1
scenario_kind = "no_measures"
replicates = 1
rng_seed = 11
initial_infected_fraction = 0.02

[virus]

[calendar]
horizon_days = 12

[population]
survey = "{survey}"
census = "{census}"
profile_tree = "{tree}"
tract_map = "{map}"
target_size = 200
"#,
        survey = dir.join("survey.csv").display(),
        census = dir.join("census.csv").display(),
        tree = dir.join("profile_tree.json").display(),
        map = dir.join("tract_map.txt").display(),
    );
    let mut config: ScenarioConfig = toml::from_str(&toml_text).expect("fixture config parses");
    config.calendar = Calendar {
        horizon_days: 12,
        ..Calendar::default()
    };
    config.scenario_kind = ScenarioKind::NoMeasures;
    config.validate().expect("fixture config is valid");
    config
}
