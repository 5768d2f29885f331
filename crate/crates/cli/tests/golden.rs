mod common;

use std::fs;

// Set UPDATE_GOLDEN=1 to rewrite the expected transcripts.
#[test]
fn golden_transcripts_match() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let cases = common::cases();
    assert!(cases.len() >= 20, "{}", cases.len());
    let mut mismatched = Vec::new();
    for case in &cases {
        let got = common::run(case);
        if update {
            fs::write(&case.expected, &got).unwrap();
            continue;
        }
        let want = fs::read(&case.expected).unwrap_or_else(|_| panic!("{}: no .out file", case.name));
        if got != want {
            mismatched.push(format!("--- {}\n{}", case.name, String::from_utf8_lossy(&got)));
        }
    }
    assert!(mismatched.is_empty(), "{}", mismatched.join("\n"));
}

#[test]
fn exit_codes_partition_outcomes() {
    for case in common::cases() {
        let text = String::from_utf8(common::run(&case)).unwrap();
        let code: i32 = text.lines().last().unwrap().strip_prefix("% exit ").unwrap().parse().unwrap();
        let body: Vec<&str> = text.lines().collect();
        let verdict = body[body.len() - 2];
        match code {
            0 => assert_eq!(verdict, "yes.", "{}", case.name),
            1 => assert!(verdict == "no." && !text.contains("% aborted") && !text.contains("% node"), "{}", case.name),
            2 => assert!(verdict == "no." && (text.contains("% aborted") || text.contains("% node")), "{}", case.name),
            3 => assert!(text.starts_with("error: "), "{}", case.name),
            other => panic!("{}: exit {other}", case.name),
        }
    }
}
