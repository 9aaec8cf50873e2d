use std::time::Duration;

use proptest::prelude::*;
use tempus_bench::suite::{suite, write_csv, SuiteError, SuiteRow};
use tempus_bench::{generate, lint, Domain, InstanceSpec};
use tempus_core::io::{read_task, write_task};
use tempus_core::rational::ratio;

fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (1usize..=4).prop_map(|size| Domain::Match { size }),
        (1usize..=5).prop_map(|bottles| Domain::Shake { bottles }),
        (1usize..=2, 1usize..=3, 1i64..=6).prop_map(|(bottles, glasses, litres)| Domain::Pour { bottles, glasses, litres }),
        (1usize..=3).prop_map(|pairs| Domain::Pack { bottles: 2 * pairs }),
        (1usize..=3, 1usize..=3).prop_map(|(items, coats)| Domain::Painter { items, coats }),
        (1usize..=4).prop_map(|trains| Domain::Instradi { trains }),
        (1usize..=8).prop_map(|jobs| Domain::OversubLite { jobs }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regenerated_instances_are_byte_identical(domain in domain(), seed in any::<u64>()) {
        let spec = InstanceSpec::new(domain, seed, ratio(1, 1000));
        let first = write_task(&generate(&spec).unwrap());
        let second = write_task(&generate(&spec.clone()).unwrap());
        prop_assert_eq!(&first, &second);
        let reread = read_task(&first).unwrap();
        prop_assert_eq!(lint(&reread), Ok(()));
        prop_assert_eq!(write_task(&reread), first);
    }
}

#[test]
fn seeds_vary_random_domains() {
    let text = |seed| write_task(&generate(&InstanceSpec::new(Domain::Shake { bottles: 5 }, seed, ratio(1, 1000))).unwrap());
    assert!((1..10).any(|seed| text(seed) != text(0)));
}

#[test]
fn suites_list_their_instances() {
    let eps = ratio(1, 1000);
    let smoke: Vec<String> = suite("smoke", &eps).unwrap().iter().map(InstanceSpec::name).collect();
    assert_eq!(smoke.len(), 7);
    assert_eq!(smoke[0], "instradi(2)");
    assert_eq!(suite("table", &eps).unwrap().len(), 11);
    assert!(matches!(suite("nope", &eps), Err(SuiteError::Unknown(_))));
}

#[test]
fn csv_has_table_columns() {
    let rows = vec![
        SuiteRow { instance: "match(1)".into(), solved: true, time: Duration::from_millis(1250), bound: Some(1) },
        SuiteRow { instance: "pour(1,1,3)".into(), solved: false, time: Duration::from_secs(2), bound: None },
    ];
    let mut out = Vec::new();
    write_csv(&rows, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "instance,solved,time,bound\nmatch(1),true,1.250,1\n\"pour(1,1,3)\",false,2.000,\n");
}
