//! Property tests for the invariants the simulator's correctness leans on:
//! exact residual rows, bounded satisfactions and dissonance, weekly calendar
//! periodicity, exact quota allocation, and config round-tripping.

use proptest::prelude::*;

use civisim_core::config::SCHEMA_VERSION;
use civisim_core::humat::{apply_broadcast, apply_communication, similarity, Alternative};
use civisim_core::population::{largest_remainder, NeedProfile, NeedState};
use civisim_core::{
    day_kind, deliberate, derive_transition_table, Calendar, DayKind, HumatParams, NetworkParams,
    ScenarioConfig, ScenarioKind, VirusParams, Weekday,
};

fn profile_from(needs: &[(f64, f64, f64)]) -> NeedProfile {
    NeedProfile {
        needs: needs
            .iter()
            .map(|&(importance, s0, s1)| NeedState {
                importance,
                satisfaction: [s0, s1],
            })
            .collect(),
    }
}

fn need_vec() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0), 1..6)
}

fn weekday() -> impl Strategy<Value = Weekday> {
    (0u8..7).prop_map(|i| {
        [
            Weekday::Monday,
            Weekday::Tuesday,
            Weekday::Wednesday,
            Weekday::Thursday,
            Weekday::Friday,
            Weekday::Saturday,
            Weekday::Sunday,
        ][usize::from(i)]
    })
}

proptest! {
    /// Branch rows must close exactly so per-entry draws can never fall
    /// through all outcomes.
    #[test]
    fn residual_rows_sum_to_exactly_one(
        p_id in 0.0f64..=0.5,
        p_ih in 0.0f64..=0.5,
        p_hd in 0.0f64..=0.5,
        p_hicu in 0.0f64..=0.5,
        p_icud in 0.0f64..=1.0,
    ) {
        let v = VirusParams { p_id, p_ih, p_hd, p_hicu, p_icud, ..VirusParams::default() };
        let t = derive_transition_table(&v);
        prop_assert_eq!(t.p_id + t.p_ih + t.p_ir, 1.0);
        prop_assert_eq!(t.p_hd + t.p_hicu + t.p_hr, 1.0);
        prop_assert_eq!(t.p_icud + t.p_icur, 1.0);
    }

    #[test]
    fn communication_keeps_satisfaction_in_range(
        pairs in prop::collection::vec(
            ((0.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0),
             (0.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0)),
            1..6,
        ),
        trusts in prop::collection::vec(0.0f64..=1.0, 1..12),
        accept in prop::bool::ANY,
    ) {
        let influenced_needs: Vec<_> = pairs.iter().map(|p| p.0).collect();
        let influencer_needs: Vec<_> = pairs.iter().map(|p| p.1).collect();
        let mut influenced = profile_from(&influenced_needs);
        let influencer = profile_from(&influencer_needs);
        let alt = if accept { Alternative::Accept } else { Alternative::Reject };
        for trust in trusts {
            apply_communication(&mut influenced, &influencer, trust, 0.4, alt);
            for need in &influenced.needs {
                prop_assert!((-1.0..=1.0).contains(&need.satisfaction[0]));
                prop_assert!((-1.0..=1.0).contains(&need.satisfaction[1]));
            }
        }
    }

    /// A broadcast moves the promoted column up and the other column down,
    /// and neither ever leaves [-1, 1].
    #[test]
    fn broadcast_is_monotone_and_bounded(
        needs in need_vec(),
        trust in 0.0f64..=1.0,
        accept in prop::bool::ANY,
    ) {
        let mut profile = profile_from(&needs);
        let before = profile.clone();
        let alt = if accept { Alternative::Accept } else { Alternative::Reject };
        apply_broadcast(&mut profile, trust, alt);
        for (after, was) in profile.needs.iter().zip(&before.needs) {
            let (p, o) = (alt.ix(), alt.other().ix());
            prop_assert!(after.satisfaction[p] >= was.satisfaction[p] - 1e-12);
            prop_assert!(after.satisfaction[o] <= was.satisfaction[o] + 1e-12);
            prop_assert!((-1.0..=1.0).contains(&after.satisfaction[p]));
            prop_assert!((-1.0..=1.0).contains(&after.satisfaction[o]));
        }
    }

    #[test]
    fn dissonance_stays_in_unit_interval(needs in need_vec()) {
        let del = deliberate(&profile_from(&needs));
        for terms in &del.diss {
            prop_assert!((0.0..=1.0).contains(&terms.dissonance));
        }
    }

    /// Evaluations of a single sign carry no dissonance.
    #[test]
    fn single_signed_evaluations_are_dissonance_free(
        sats in prop::collection::vec(0.0f64..=1.0, 1..6),
    ) {
        let needs: Vec<_> = sats.iter().map(|&s| (1.0, s, 0.0)).collect();
        let del = deliberate(&profile_from(&needs));
        prop_assert_eq!(del.diss[0].dissonance, 0.0);
    }

    #[test]
    fn similarity_is_bounded_and_symmetric(
        imp_a in 0.0f64..=1.0,
        imp_b in 0.0f64..=1.0,
        eval_a in -1.0f64..=1.0,
        eval_b in -1.0f64..=1.0,
    ) {
        let m = similarity(imp_a, imp_b, eval_a, eval_b);
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert_eq!(m, similarity(imp_b, imp_a, eval_b, eval_a));
    }

    /// The calendar repeats weekly and every week holds exactly two
    /// non-working days.
    #[test]
    fn calendar_has_weekly_period(anchor in weekday(), day in 0u32..10_000) {
        let c = Calendar {
            anchor_weekday: anchor,
            horizon_days: 10_008,
            ..Calendar::default()
        };
        prop_assert_eq!(day_kind(&c, day), day_kind(&c, day + 7));
        let weekend_days = (day..day + 7)
            .filter(|&d| day_kind(&c, d) == DayKind::NonWorking)
            .count();
        prop_assert_eq!(weekend_days, 2);
    }

    /// Quota allocation: exact total, every cell within one of its share.
    #[test]
    fn quota_allocation_is_exact_and_fair(
        counts in prop::collection::vec(0u64..5_000, 1..40),
        total in 0u32..20_000,
    ) {
        let sum: u64 = counts.iter().sum();
        prop_assume!(sum > 0);
        let alloc = largest_remainder(&counts, total);
        prop_assert_eq!(alloc.iter().sum::<u32>(), total);
        for (a, &c) in alloc.iter().zip(&counts) {
            let quota = c as f64 * f64::from(total) / sum as f64;
            prop_assert!((f64::from(*a) - quota).abs() < 1.0);
        }
    }

    /// Scenario files survive a serialize and parse cycle unchanged.
    #[test]
    fn scenario_config_round_trips_through_toml(
        kind_ix in 0u8..3,
        // TOML integers are signed 64-bit, so seeds above i64::MAX cannot
        // appear in scenario files.
        rng_seed in 0u64..=i64::MAX as u64,
        replicates in 1u32..100,
        initial_infected_fraction in 0.0f64..=0.2,
        horizon_days in 1u32..400,
        leisure_probability in 0.0f64..=1.0,
        p_se in 0.0f64..=0.3,
        days_rs in 1u32..365,
        target_size in 10u32..100_000,
    ) {
        let config = ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            scenario_kind: [
                ScenarioKind::NoMeasures,
                ScenarioKind::Lockdown,
                ScenarioKind::PreventiveMeasures,
            ][usize::from(kind_ix)],
            replicates,
            rng_seed,
            initial_infected_fraction,
            virus: VirusParams { p_se, days_rs, ..VirusParams::default() },
            calendar: Calendar {
                horizon_days,
                leisure_probability,
                ..Calendar::default()
            },
            network: NetworkParams::default(),
            humat: HumatParams::default(),
            population: civisim_core::config::PopulationSource {
                survey: "survey.csv".into(),
                census: "census.csv".into(),
                profile_tree: "profile_tree.json".into(),
                tract_map: "tract_map.txt".into(),
                target_size,
            },
            critical_nodes: Vec::new(),
            critical_node_plans: Vec::new(),
        };
        let text = toml::to_string(&config).expect("serialize");
        let back: ScenarioConfig = toml::from_str(&text).expect("parse");
        prop_assert_eq!(back, config);
    }
}
