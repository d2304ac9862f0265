use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_rsalab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn keys(dir: &tempfile::TempDir, p: &str, q: &str, e: &str) -> (String, String) {
    let base = dir.path().join("key");
    let o = run(&[
        "keygen",
        "--p",
        p,
        "--q",
        q,
        "--e",
        e,
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = base.to_str().unwrap();
    (format!("{b}.pub"), format!("{b}.priv"))
}

#[test]
fn keygen_writes_key_files() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_path, priv_path) = keys(&dir, "17", "11", "7");
    assert_eq!(
        std::fs::read_to_string(pub_path).unwrap(),
        "rsa-toy-public\n187 7\n"
    );
    assert_eq!(
        std::fs::read_to_string(priv_path).unwrap(),
        "rsa-toy-private\n187 23\n"
    );
}

#[test]
fn keygen_rejects_composite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "keygen",
        "--p",
        "1005",
        "--q",
        "509",
        "--out",
        dir.path().join("k").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1005 is not prime"));
}

#[test]
fn small_key_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_path, priv_path) = keys(&dir, "17", "11", "7");
    assert_eq!(
        stdout(&run(&["encrypt", "--key", &pub_path, "88"])).trim(),
        "11"
    );
    assert_eq!(
        stdout(&run(&["decrypt", "--key", &priv_path, "11"])).trim(),
        "0088"
    );
    let o = run(&["encrypt", "--key", &pub_path, "187"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("block exceeds modulus"));
}

#[test]
fn pipe_roundtrip_across_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_path, priv_path) = keys(&dir, "131", "137", "3");
    let packets = stdout(&run(&["encode", "--text", "parallel encryption"]));
    assert_eq!(
        packets.trim(),
        "1500 1700 1111 0411 0413 0217 2415 1908 1413"
    );
    let cipher = run_stdin(
        &[
            "encrypt",
            "--key",
            &pub_path,
            "--algo",
            "halving",
            "--parallel",
            "3,4",
        ],
        &packets,
    );
    assert_eq!(code(&cipher), 0);
    for algo in ["naive", "r2l", "l2r", "kary:3", "sliding", "halving"] {
        let plain = run_stdin(
            &["decrypt", "--key", &priv_path, "--algo", algo],
            &stdout(&cipher),
        );
        assert_eq!(stdout(&plain), packets, "{algo}");
    }
    let text = run_stdin(
        &[
            "decrypt",
            "--key",
            &priv_path,
            "--text",
            "--parallel",
            "1,16",
            "--workers",
            "2",
        ],
        &stdout(&cipher),
    );
    assert_eq!(stdout(&text).trim(), "parallelencryption");
}

#[test]
fn encode_decode() {
    assert_eq!(stdout(&run_stdin(&["encode"], "ab\n")).trim(), "0001");
    assert_eq!(stdout(&run(&["decode", "1500", "0411"])).trim(), "pael");
    let o = run(&["encode", "--text", "abc"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd-length message"));
    assert_eq!(code(&run(&["decode", "2600"])), 2);
}

#[test]
fn undersized_grid_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (pub_path, _) = keys(&dir, "17", "11", "7");
    let o = run(&[
        "encrypt",
        "--key",
        &pub_path,
        "--parallel",
        "2,2",
        "1",
        "2",
        "3",
        "4",
        "5",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid too small"));
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--n", "187", "--e", "7", "--d", "23"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("overall: pass"));
    let o = run(&["validate", "--n", "17947", "--e", "131", "--d", "137"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("267"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["selftest", "--bogus"])), 64);
    assert_eq!(
        code(&run(&["encrypt", "--key", "x", "--algo", "warp", "1"])),
        64
    );
    assert_eq!(
        code(&run(&[
            "encrypt", "--key", "x", "--algo", "kary", "--k", "9", "1"
        ])),
        64
    );
    assert_eq!(code(&run(&["bench", "--table1", "--table2"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_key_file_is_domain_error() {
    let o = run(&["encrypt", "--key", "/nonexistent/key.pub", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn selftest_and_tamper() {
    let o = run(&["selftest"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o).lines().filter(|l| l.starts_with("pass")).count(),
        6
    );
    let o = run(&["selftest", "--tamper-halving"]);
    assert_eq!(code(&o), 1);
    let failed: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .map(String::from)
        .collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("fig12-e0-divergence"));
}

#[test]
fn bench_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    std::fs::write(
        &plan,
        "sizes = 64, 100\nblocks = 1, 4\ntpb = 32\ntrials = 2\nkey_n = 17947\nkey_e = 3\n",
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let o = run(&[
        "bench",
        "--plan",
        plan.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    // 1x32 lanes cannot hold 64 or 100 elements; those records carry no times.
    assert!(rows[0].starts_with("64,1,32,") && rows[0].contains(",,,"));
    assert!(
        rows[1].starts_with("64,4,32,") && !rows[1].contains(",,"),
        "{}",
        rows[1]
    );
    assert!(dir.path().join("r.csv.log").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid too small"));

    let md = run(&["bench", "--plan", plan.to_str().unwrap(), "--markdown"]);
    assert!(stdout(&md).starts_with("| data_size |"));
}

#[test]
fn bad_plan_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    std::fs::write(&plan, "# comment\nsizes = 64\nwarp = 9\n").unwrap();
    let o = run(&["bench", "--plan", plan.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("line 3"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(code(&run(&["bench", "--plan", "/nonexistent/plan"])), 2);
}
