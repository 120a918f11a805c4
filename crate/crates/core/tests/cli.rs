use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treecode"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn pascal_rows_and_tns() {
    let o = run(&["pascal", "--n", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1\n1 1\n1 2 1\n");
    let o = run(&["pascal", "--n", "4", "--check-tns"]);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["tns"], true);
    assert_eq!(v["negative"], "0");
}

#[test]
fn search_tns_output() {
    let o = run(&["search-tns", "--n", "3", "--bound", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = run(&["search-tns", "--n", "2", "--bound", "0"]);
    assert_eq!(stdout(&o), "none\n");
}

#[test]
fn schedule_rows() {
    let o = run(&["schedule", "--n", "1000000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json_lines(&o);
    assert_eq!(rows.len(), 6);
    let ells: Vec<&str> = rows.iter().map(|r| r["ell"].as_str().unwrap()).collect();
    assert_eq!(ells, ["96", "128", "227", "715", "7100", "700138"]);
    assert!(rows.iter().all(|r| r["c_delta"] == 144));
}

#[test]
fn singleton_and_usage() {
    let o = run(&["verify", "--mode", "singleton", "--n", "4", "--sigma", "2", "--gamma", "4"]);
    assert_eq!(stdout(&o), "3/4\n");
    let o = run(&["bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = run(&["verify", "--mode", "singleton", "--n", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn distance_reports_and_claims() {
    let o = run(&["verify", "--mode", "distance", "--code", "copy", "--n", "3"]);
    assert!(o.status.success());
    let r = &json_lines(&o)[0];
    assert_eq!(r["value"], "1/3");
    assert_eq!(r["x"], "(0,0,0)");
    assert_eq!(r["x_prime"], "(1,0,0)");
    let o = run(&["verify", "--mode", "distance", "--code", "copy", "--n", "3", "--claim", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--mode", "distance", "--sigma", "3", "--n", "4", "--claim", "1/2", "--strict"]);
    assert!(o.status.success());
    let o = run(&["verify", "--mode", "tilde", "--n", "5", "--claim", "1/2", "--strict"]);
    assert!(o.status.success());
    let o = run(&["verify", "--mode", "toeplitz", "--n", "6", "--delta", "1/10"]);
    assert!(o.status.success());
    let o = run(&["verify", "--mode", "lagged", "--n", "12", "--a", "2", "--s", "4", "--claim", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ecc_summary() {
    let o = run(&["ecc", "build", "--s", "64", "--delta", "1/4", "--recipe", "concat"]);
    assert!(o.status.success());
    let v = &json_lines(&o)[0];
    assert_eq!(v["c"], 144);
    assert_eq!(v["recipe"], "concat");
    let o = run(&["ecc", "build", "--s", "16", "--delta", "0.25", "--recipe", "rs"]);
    assert_eq!(json_lines(&o)[0]["c"], 5);
}

#[test]
fn encode_chs_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bits.txt");
    std::fs::write(&input, "1\n0\n1\nff\n00a5\n").unwrap();
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("out{k}.ndjson"));
            let o = run(&[
                "encode-chs",
                "--n",
                "200",
                "--input",
                input.to_str().unwrap(),
                "--output",
                out.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs[0].clone()).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3 + 8 + 16);
    assert_eq!(rows[0]["i"], 1);
    assert_eq!(rows[0]["symbol"], "(1)");
    assert_eq!(rows[0]["gamma_bits"], 1);
    assert_eq!(rows[2]["symbol"], "(5)");
}

/// Writes one line, then waits for the corresponding record before writing more.
fn assert_online(args: &[&str], lines: &[&str], records_per_line: usize) {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    let mut input = child.stdin.take().unwrap();
    let mut output = BufReader::new(child.stdout.take().unwrap());
    for line in lines {
        writeln!(input, "{line}").unwrap();
        input.flush().unwrap();
        for _ in 0..records_per_line {
            let mut rec = String::new();
            output.read_line(&mut rec).unwrap();
            assert!(rec.starts_with("{\"i\":"), "{rec:?}");
        }
    }
    drop(input);
    assert!(child.wait().unwrap().success());
}

#[test]
fn streaming_commands_are_online() {
    assert_online(&["encode-int", "--input", "-"], &["3", "18446744073709551616", "0"], 1);
    assert_online(&["encode-chs", "--n", "100", "--input", "-"], &["1", "0", "1"], 1);
    assert_online(&["encode-chs", "--n", "100", "--input", "-"], &["ab", "cd"], 8);
}
