use realloc_core::axioms::check_os_endow_mono;
use realloc_core::format::{parse_economy, parse_witness, parse_witnesses, serialize_economy, serialize_witness};
use realloc_core::manipulation::{construct_predelivery_witness, find_withdrawal_pair, Mode, Template};
use realloc_core::{int, rat, AgentId, Error, Order, RuleId};

const EXAMPLE_ONE: &str = "\
# four agents, excess demand 7/2
agent 1 peak=0 endow=9
agent 2 peak=2 endow=1

agent 3 peak=3.5 endow=0
agent 4 peak=10 endow=2   # the big demander
";

#[test]
fn decimal_peak_is_exact() {
    let e = parse_economy(EXAMPLE_ONE).unwrap();
    assert_eq!(e.len(), 4);
    assert_eq!(e.peak(AgentId(3)), rat(7, 2));
    assert_eq!(e.excess(), rat(7, 2));
}

#[test]
fn empty_file_has_no_agents() {
    for text in ["", "\n\n", "# only a comment\n"] {
        let err = parse_economy(text).unwrap_err();
        assert_eq!(err, Error::NoAgents);
        assert!(err.to_string().contains("no agents"));
    }
}

#[test]
fn left_weight_changes_the_ranking() {
    let e = parse_economy("agent 1 peak=1 endow=9 left=14").unwrap();
    let pref = e.preference(AgentId(1));
    assert_eq!(pref.left_weight(), int(14));
    assert_eq!(pref.right_weight(), int(1));
    assert!(pref.strictly_prefers(int(14), int(0)));
}

#[test]
fn fractions_and_decimals_agree() {
    let a = parse_economy("agent 5 peak=0.25 endow=1.50").unwrap();
    let b = parse_economy("agent 5 peak=1/4 endow=3/2").unwrap();
    assert_eq!(a, b);
}

#[test]
fn duplicate_ids_name_both_lines() {
    let err = parse_economy("agent 1 peak=1 endow=1\n# gap\nagent 1 peak=2 endow=2\n").unwrap_err();
    match err {
        Error::Semantic { line, message } => {
            assert_eq!(line, 3);
            assert!(message.contains("line 1"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn semantic_errors_carry_the_line() {
    let cases = [
        ("agent 1 peak=1 endow=1\nagent 2 peak=1 endow=-1/2\n", 2, "negative"),
        ("agent 1 peak=1 endow=1 left=0\n", 1, "positive"),
        ("agent 1 peak=1 endow=1 right=-2\n", 1, "positive"),
        ("agent 1 peak=-1 endow=1\n", 1, "negative"),
    ];
    for (text, want_line, needle) in cases {
        match parse_economy(text).unwrap_err() {
            Error::Semantic { line, message } => {
                assert_eq!(line, want_line, "{text}");
                assert!(message.contains(needle), "{message}");
            }
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let cases = [
        ("agnet 1 peak=1 endow=1", 1, 1),
        ("agent x peak=1 endow=1", 1, 7),
        ("agent 1 peak=1 endow=1 colour=3", 1, 24),
        ("agent 1 peak=1", 1, 15),
        ("\n  agent 1 peak=1/0 endow=1", 2, 16),
        ("agent 1 peak=1 peak=2 endow=1", 1, 16),
        ("agent 1 peak 1 endow=1", 1, 9),
    ];
    for (text, want_line, want_column) in cases {
        match parse_economy(text).unwrap_err() {
            Error::Syntax { line, column, .. } => {
                assert_eq!((line, column), (want_line, want_column), "{text}");
            }
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn serialized_economy_reparses_identically() {
    let text = "agent 9 peak=7/3 endow=0.5 left=2\nagent 2 peak=0 endow=4 right=14\n";
    let e = parse_economy(text).unwrap();
    let out = serialize_economy(&e);
    assert_eq!(
        out,
        "agent 2 peak=0 endow=4 right=14\nagent 9 peak=7/3 endow=1/2 left=2\n"
    );
    assert_eq!(parse_economy(&out).unwrap(), e);
}

#[test]
fn witnesses_round_trip_and_replay() {
    let e = parse_economy("agent 1 peak=0 endow=3\nagent 2 peak=9 endow=1\nagent 3 peak=4 endow=1\n").unwrap();
    let endow = check_os_endow_mono(&RuleId::MaxSatiating, &e, &[(AgentId(2), int(7))].into())
        .unwrap()
        .into_witness()
        .unwrap();
    let weak = find_withdrawal_pair(
        &RuleId::UniformRealloc,
        &parse_economy(
            "agent 1 peak=1 endow=3\nagent 2 peak=4 endow=1\nagent 3 peak=3 endow=1\nagent 4 peak=1 endow=3",
        )
        .unwrap(),
        AgentId(2),
        AgentId(4),
        Mode::Weak,
    )
    .unwrap()
    .unwrap();
    let pre = construct_predelivery_witness(
        &RuleId::Priority(Order::ranked(vec![AgentId(3), AgentId(2)])),
        &Template::default(),
    )
    .unwrap();
    for w in [endow, weak, pre] {
        let text = serialize_witness(&w);
        let back = parse_witness(&text).unwrap();
        assert_eq!(back, w, "{text}");
        assert_eq!(back.replay().unwrap(), w.comparison);
    }
}

#[test]
fn report_lines_between_blocks_are_skipped() {
    let e = parse_economy("agent 1 peak=0 endow=3\nagent 2 peak=9 endow=1\nagent 3 peak=4 endow=1\n").unwrap();
    let w = check_os_endow_mono(&RuleId::MaxSatiating, &e, &[(AgentId(2), int(7))].into())
        .unwrap()
        .into_witness()
        .unwrap();
    let text = format!(
        "property=x violations=1\n{}RESULT violation\n{}",
        serialize_witness(&w),
        serialize_witness(&w)
    );
    assert_eq!(parse_witnesses(&text).unwrap().len(), 2);
    assert!(matches!(parse_witness(&text), Err(Error::Semantic { .. })));
}

#[test]
fn tampered_witness_is_stale() {
    let e = parse_economy("agent 1 peak=0 endow=3\nagent 2 peak=9 endow=1\nagent 3 peak=4 endow=1\n").unwrap();
    let w = check_os_endow_mono(&RuleId::MaxSatiating, &e, &[(AgentId(2), int(7))].into())
        .unwrap()
        .into_witness()
        .unwrap();
    let text = serialize_witness(&w).replace("rule=max-satiating", "rule=uniform");
    let back = parse_witness(&text).unwrap();
    assert!(matches!(back.replay(), Err(Error::StaleWitness(_))));
}

#[test]
fn malformed_witness_blocks() {
    let missing_end = "WITNESS kind=elb rule=uniform agents=1\nBEFORE 1=1\nagent 1 peak=1 endow=1\n";
    assert!(matches!(
        parse_witnesses(missing_end),
        Err(Error::Syntax { line: 4, .. })
    ));
    let bad_kind = "WITNESS kind=nonsense rule=uniform agents=1\nEND\n";
    assert!(matches!(
        parse_witnesses(bad_kind),
        Err(Error::Syntax {
            line: 1,
            column: 14,
            ..
        })
    ));
    let after_without_variant =
        "WITNESS kind=elb rule=uniform agents=1\nBEFORE 1=1\nAFTER 1=1\nagent 1 peak=1 endow=1\nEND\n";
    assert!(matches!(
        parse_witnesses(after_without_variant),
        Err(Error::Semantic { line: 3, .. })
    ));
}
