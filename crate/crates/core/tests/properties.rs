mod common;

use proptest::prelude::*;

use common::oracle;
use qmon::capacity::{max_access_networks, LimitingFactor};
use qmon::catalog::NodeKind;
use qmon::config::{parse_config, ConfigDocument, EdgeEntry, PlanSection, TopologySection};
use qmon::loss::{Budget, Budgets};
use qmon::topology::TopologyKind;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

fn chain_picks() -> impl Strategy<Value = Vec<(usize, u16)>> {
    prop::collection::vec((0usize..7, 0u16..500), 0..8)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pairing_is_an_involution_conserving_frequency(index in -400i32..400, center in -800i64..800) {
        common::check_pairing(index, center).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn chain_loss_is_additive_and_monotone(a in chain_picks(), b in chain_picks(), extra in (0usize..7, 0u16..500)) {
        common::check_chain(&a, &b, extra).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn pxc_loss_ignores_port_count(d1 in 1usize..256, d2 in 1usize..256) {
        common::check_pxc_degree(d1, d2).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn channel_plan_serves_every_pair(n in 1usize..=8) {
        common::check_plan(n).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn schedules_cover_demands_without_sharing_channels(
        n in 2usize..=6,
        parents in prop::collection::vec(0usize..6, 5),
        extra in any::<u32>(),
        picks in prop::collection::vec(0usize..64, 1..=6),
    ) {
        let edges = common::random_mesh_edges(n, &parents, extra & 0x7fff);
        let demands = common::pick_demands(n, &picks);
        common::check_schedule(n, &edges, &demands).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn config_round_trips(
        budget in prop::option::of(100u32..4000),
        n in prop::option::of(1usize..9),
        span in prop::option::of(1u32..200),
        fraction in prop::option::of(0u32..=100),
        edges in prop::collection::vec((1usize..6, 1usize..6), 0..4),
    ) {
        let doc = ConfigDocument {
            budget_db: budget.map(|b| b as f64 / 100.0),
            topology: Some(TopologySection {
                kind: Some(TopologyKind::Mesh),
                access_networks: n,
                span_km: span.map(|s| s as f64 / 10.0),
                ..TopologySection::default()
            }),
            plan: fraction.map(|f| PlanSection { one_way_fraction: Some(f as f64 / 100.0), ..PlanSection::default() }),
            edges: edges.into_iter().map(|(a, b)| EdgeEntry { a, b, length_km: None }).collect(),
            ..ConfigDocument::default()
        };
        let text = doc.to_canonical_string().map_err(|e| TestCaseError::fail(e.to_string()))?;
        let once = parse_config(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&once, &doc);
        let twice = parse_config(&once.to_canonical_string().unwrap()).unwrap();
        prop_assert_eq!(twice, once);
    }

    // The largest entanglement-only ring fits the budget and one more
    // access network breaks it, whatever the budget.
    #[test]
    fn capacity_is_tight_against_the_budget(centi in 1500u32..4000) {
        let b = centi as f64 / 100.0;
        let budgets = Budgets::uniform(Budget::db(b));
        let report = max_access_networks(NodeKind::CwdmOadmSimple, &budgets, 1000.0)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let worst = |n: usize| oracle::simple_ring_arm(n) + oracle::simple_ring_arm(n - 1);
        let mut expected = 1;
        while worst(expected + 1) <= b + 1e-9 {
            expected += 1;
        }
        let got = report.max_access_networks.unwrap_or(0);
        if expected <= 8 {
            prop_assert_eq!(got, expected, "budget {}", b);
            prop_assert_eq!(report.limiting_factor, Some(LimitingFactor::LossBudget));
        } else {
            prop_assert_eq!(got, 8, "budget {}", b);
            prop_assert_eq!(report.limiting_factor, Some(LimitingFactor::CwdmSpectrum));
        }
    }
}
