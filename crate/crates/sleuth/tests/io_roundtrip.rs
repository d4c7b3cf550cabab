use std::path::Path;

use cascade_sleuth::io::*;
use cascade_sleuth::SleuthError;
use cascade_sleuth_core::rng::stream;
use cascade_sleuth_core::simulate::simulate_cascade;
use cascade_sleuth_core::{Edge, Kernel, Network};
use proptest::prelude::*;

fn p() -> &'static Path {
    Path::new("mem")
}

#[test]
fn three_edge_network_round_trips() {
    let edges = vec![
        Edge { source: 0, target: 1, alpha: 1.5 },
        Edge { source: 1, target: 2, alpha: 0.1 + 0.2 },
        Edge { source: 2, target: 0, alpha: 7.0 / 3.0 },
    ];
    let net = Network::new(3, Kernel::RAYLEIGH, edges).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.txt");
    write_network(&path, &net).unwrap();
    assert_eq!(read_network(&path).unwrap(), net);
}

#[test]
fn non_numeric_edge_reports_its_line() {
    let text = "# cascade-sleuth network v1\n3 1\n0 1 2.0\na b c\n";
    match parse_network(text, p()) {
        Err(SleuthError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_networks_are_rejected() {
    for (text, line) in [
        ("3 1\n0 1 -2.0\n", 2),
        ("3 1\n0 1 2.0\n0 1 3.0\n", 3),
        ("3 1\n1 1 2.0\n", 2),
        ("3 1\n0 5 2.0\n", 2),
        ("# cascade-sleuth network v9\n3 1\n", 1),
        ("3\n", 1),
    ] {
        match parse_network(text, p()) {
            Err(SleuthError::Parse { line: got, .. }) => assert_eq!(got, line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn empty_edge_section_is_valid() {
    let net = parse_network("# cascade-sleuth network v1\n4 1\n", p()).unwrap();
    assert_eq!((net.node_count(), net.edge_count()), (4, 0));
}

#[test]
fn hundred_simulated_cascades_round_trip() {
    let net = Network::new(
        6,
        Kernel::EXPONENTIAL,
        vec![
            Edge { source: 0, target: 1, alpha: 1.0 },
            Edge { source: 1, target: 2, alpha: 2.0 },
            Edge { source: 0, target: 3, alpha: 0.7 },
            Edge { source: 3, target: 4, alpha: 1.3 },
            Edge { source: 4, target: 5, alpha: 3.1 },
            Edge { source: 2, target: 5, alpha: 0.4 },
        ],
    )
    .unwrap();
    let cascades: Vec<_> = (0..100)
        .map(|c| simulate_cascade(&net, c % 2, 0.0, 4.0, &mut stream(5, &[c as u64])).unwrap())
        .collect();
    let records: Vec<_> = cascades.iter().map(CascadeRecord::from_cascade).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cascades.txt");
    write_cascades(&path, &records).unwrap();
    let back = read_cascades(&path, Some(6)).unwrap();
    assert_eq!(back, records);
    assert_eq!(training_set(&back, 6, &path).unwrap(), cascades);
}

#[test]
fn pairs_are_written_in_time_order() {
    let r = CascadeRecord { source: Some(2), window: 9.0, entries: vec![(4, 3.5), (2, 0.0), (1, 1.25)] };
    let text = format_cascades(&[r], None);
    assert_eq!(text.lines().nth(1).unwrap(), "2;9;2:0,1:1.25,4:3.5");
}

#[test]
fn duplicate_node_names_the_cascade() {
    let text = "-1;5;1:1.0\n-1;5;1:1.0,2:2.0,1:3.0\n";
    let err = parse_cascades(text, Some(4), p()).unwrap_err();
    assert!(err.to_string().contains("cascade 1"), "{err}");
    assert!(err.to_string().contains("duplicate node 1"), "{err}");
}

#[test]
fn time_past_window_is_rejected() {
    let err = parse_cascades("-1;5;1:5.0\n", Some(4), p()).unwrap_err();
    assert!(err.to_string().contains("window"), "{err}");
    assert!(parse_cascades("-1;inf;1:1e6\n", Some(4), p()).is_ok());
}

#[test]
fn single_infection_trains_but_cannot_be_identified() {
    let records = parse_cascades("3;5;3:0.5\n", Some(4), p()).unwrap();
    let train = training_set(&records, 4, p()).unwrap();
    assert_eq!(train[0].infected_count(), 1);
    let err = identification_set(&records, 4, p(), 1.0, 0).unwrap_err();
    assert!(err.to_string().contains("cascade 0"), "{err}");
}

#[test]
fn observed_records_keep_their_source_hidden() {
    let records = parse_cascades("0;5;1:1.0,2:2.0\n-1;5;2:1.5\n", Some(3), p()).unwrap();
    let obs = identification_set(&records, 3, p(), 0.5, 0).unwrap();
    assert_eq!(obs[0].observed().len(), 2);
    assert!(obs[1].hidden_set().contains(0));
}

#[test]
fn complete_records_are_masked() {
    let records = parse_cascades("0;9;0:0,1:1,2:2,3:3,4:4\n", Some(5), p()).unwrap();
    let obs = identification_set(&records, 5, p(), 0.5, 1).unwrap();
    assert_eq!(obs[0].observed().len(), 2);
    assert!(!obs[0].observed().contains_key(&0));
}

proptest! {
    #[test]
    fn network_text_round_trips(
        n in 2usize..20,
        raw in prop::collection::vec((0usize..20, 0usize..20, 1e-6f64..1e6), 0..40),
        shape in 0.1f64..5.0,
    ) {
        let mut seen = std::collections::BTreeSet::new();
        let edges: Vec<Edge> = raw
            .into_iter()
            .map(|(a, b, alpha)| (a % n, b % n, alpha))
            .filter(|&(a, b, _)| a != b && seen.insert((a, b)))
            .map(|(source, target, alpha)| Edge { source, target, alpha })
            .collect();
        let net = Network::new(n, Kernel::new(shape).unwrap(), edges).unwrap();
        prop_assert_eq!(parse_network(&format_network(&net, Some("m.json")), p()).unwrap(), net);
    }
}
