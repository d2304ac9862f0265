//! Benchmark harness comparing [`launch_map`] against [`sequential_map`] for
//! block encryption over a sweep of payload sizes and grid shapes.
//!
//! Each (size, grid) cell gets one untimed warm-up launch and then `trials`
//! timed launches; the record keeps the mean and every raw trial time.

use std::fmt::Write as _;
use std::time::Duration;

use crate::codec::generate_payload;
use crate::modmath::AlgorithmSelector;
use crate::rsa::{encrypt_block, PublicKey, RsaError};
use crate::spmd::{default_workers, launch_map, sequential_map, LaunchConfig, LaunchError};

/// Sweep sizes of both reference tables. 16392 and 32784 are kept as listed
/// even though they look like typos for 16384 and 32768.
pub const TABLE_SIZES: [usize; 8] = [256, 512, 1024, 2048, 4096, 8192, 16392, 32784];

/// Reference modulus for the table 1 sweep (131 * 137).
pub const TABLE1_MODULUS: u64 = 17947;

/// Reference modulus for the table 2 sweep (1009 * 509).
pub const TABLE2_MODULUS: u64 = 513_581;

/// Public exponent for both sweeps: the largest 8-bit exponent coprime with
/// both totients (17680 and 512064).
pub const TABLE_EXPONENT: u64 = 253;

pub const TABLE_TRIALS: usize = 20;

/// Minimum number of elements re-checked against the sequential path.
pub const SAMPLE_CHECK: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSpec {
    /// One config per size: `ceil(size / threads_per_block)` blocks.
    Covering { threads_per_block: usize },
    /// Every size runs on every listed `(blocks, threads_per_block)` grid.
    Fixed(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub sizes: Vec<usize>,
    pub grid: GridSpec,
    pub workers: usize,
    pub key: PublicKey,
    pub algo: AlgorithmSelector,
    pub trials: usize,
    pub seed: u64,
    pub compare_sequential: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("plan has no sizes")]
    NoSizes,
    #[error("plan has no grid configs")]
    NoConfigs,
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("line {line}: {message}")]
    Plan { line: usize, message: String },
}

impl BenchPlan {
    /// 64 threads per block, sequential comparison on, modulus 17947.
    pub fn table1() -> Self {
        Self {
            sizes: TABLE_SIZES.to_vec(),
            grid: GridSpec::Covering {
                threads_per_block: 64,
            },
            workers: default_workers(),
            key: PublicKey {
                n: TABLE1_MODULUS,
                e: TABLE_EXPONENT,
            },
            algo: AlgorithmSelector::halving(false),
            trials: TABLE_TRIALS,
            seed: 1,
            compare_sequential: true,
        }
    }

    /// 32 threads per block, parallel only, modulus 513581.
    pub fn table2() -> Self {
        Self {
            grid: GridSpec::Covering {
                threads_per_block: 32,
            },
            key: PublicKey {
                n: TABLE2_MODULUS,
                e: TABLE_EXPONENT,
            },
            compare_sequential: false,
            ..Self::table1()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() {
            return Err(BenchError::NoSizes);
        }
        if matches!(&self.grid, GridSpec::Fixed(v) if v.is_empty()) {
            return Err(BenchError::NoConfigs);
        }
        if self.trials == 0 {
            return Err(BenchError::NoTrials);
        }
        Ok(())
    }

    /// The `(size, blocks, threads_per_block)` cells in sweep order.
    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut cells = Vec::new();
        for &size in &self.sizes {
            match &self.grid {
                GridSpec::Covering { threads_per_block } => {
                    let tpb = *threads_per_block;
                    cells.push((size, size.div_ceil(tpb.max(1)).max(1), tpb));
                }
                GridSpec::Fixed(grids) => cells.extend(grids.iter().map(|&(b, t)| (size, b, t))),
            }
        }
        cells
    }

    /// Parses `key = value` lines. Recognized keys: `sizes`, `blocks`
    /// (`auto` or a list), `tpb`, `workers`, `trials`, `seed`, `algo`,
    /// `key_n`, `key_e`, `compare`. Blank lines and `#` comments are skipped;
    /// anything not set keeps its table 1 default.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut plan = Self::table1();
        let mut blocks: Option<Vec<usize>> = None;
        let mut tpb = 64usize;
        let (mut key_n, mut key_e) = (plan.key.n, plan.key.e);

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| BenchError::Plan { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| err(format!("`{k}`: not a number: `{s}`")))
            };
            let list = |s: &str| -> Result<Vec<usize>, BenchError> {
                s.split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| num(t).map(|x| x as usize))
                    .collect()
            };
            match k {
                "sizes" => plan.sizes = list(v)?,
                "blocks" if v == "auto" => blocks = None,
                "blocks" => blocks = Some(list(v)?),
                "tpb" => {
                    tpb = num(v)? as usize;
                    if !(1..=crate::spmd::MAX_THREADS_PER_BLOCK).contains(&tpb) {
                        return Err(err(format!("tpb must be in 1..=1024, got {tpb}")));
                    }
                }
                "workers" => plan.workers = num(v)? as usize,
                "trials" => plan.trials = num(v)? as usize,
                "seed" => plan.seed = num(v)?,
                "algo" => plan.algo = v.parse().map_err(|e| err(format!("{e}")))?,
                "key_n" => key_n = num(v)?,
                "key_e" => key_e = num(v)?,
                "compare" => {
                    plan.compare_sequential = match v {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => {
                            return Err(err(format!(
                                "`compare`: expected true or false, got `{v}`"
                            )))
                        }
                    }
                }
                _ => return Err(err(format!("unknown key `{k}`"))),
            }
        }
        let at_end = |message: String| BenchError::Plan {
            line: text.lines().count(),
            message,
        };
        plan.grid = match blocks {
            None => GridSpec::Covering {
                threads_per_block: tpb,
            },
            Some(b) => GridSpec::Fixed(b.into_iter().map(|b| (b, tpb)).collect()),
        };
        plan.key = PublicKey::new(key_n, key_e).map_err(|e| at_end(e.to_string()))?;
        plan.validate().map_err(|e| at_end(e.to_string()))?;
        Ok(plan)
    }
}

/// One benchmark cell. Times are seconds; means over `trials`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub data_size: usize,
    pub blocks: usize,
    pub threads_per_block: usize,
    pub workers: usize,
    pub algo: AlgorithmSelector,
    pub key_n: u64,
    pub parallel_time: Option<f64>,
    pub sequential_time: Option<f64>,
    pub speedup: Option<f64>,
    pub trials: usize,
    pub parallel_trials: Vec<f64>,
    pub sequential_trials: Vec<f64>,
    /// FNV-1a over the ciphertext blocks.
    pub checksum: Option<u64>,
    /// Elements whose parallel output was re-checked against the sequential path.
    pub verified: usize,
    pub error: Option<String>,
}

impl BenchRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

pub fn checksum(values: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Evenly spaced indices, at least [`SAMPLE_CHECK`] of them (or all).
fn sample_indices(len: usize) -> Vec<usize> {
    if len <= SAMPLE_CHECK {
        return (0..len).collect();
    }
    (0..SAMPLE_CHECK)
        .map(|j| j * (len - 1) / (SAMPLE_CHECK - 1))
        .collect()
}

fn run_cell(plan: &BenchPlan, size: usize, blocks: usize, tpb: usize) -> BenchRecord {
    let mut record = BenchRecord {
        data_size: size,
        blocks,
        threads_per_block: tpb,
        workers: plan.workers.max(1),
        algo: plan.algo,
        key_n: plan.key.n,
        parallel_time: None,
        sequential_time: None,
        speedup: None,
        trials: plan.trials,
        parallel_trials: Vec::new(),
        sequential_trials: Vec::new(),
        checksum: None,
        verified: 0,
        error: None,
    };
    let config = match LaunchConfig::new(blocks, tpb) {
        Ok(c) => c.with_workers(plan.workers),
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let payload = generate_payload(size, plan.seed);
    let algo = plan.algo;
    let kernel = move |m: u64, key: &PublicKey| encrypt_block(m, key, &algo);

    let mut run = || -> Result<(), LaunchError<RsaError>> {
        // Warm-up.
        let (mut output, _) = launch_map(&config, &payload.blocks, kernel, &plan.key)?;
        if plan.compare_sequential {
            sequential_map(&payload.blocks, kernel, &plan.key)?;
        }
        for _ in 0..plan.trials {
            let (out, t) = launch_map(&config, &payload.blocks, kernel, &plan.key)?;
            record.parallel_trials.push(secs(t.total));
            output = out;
            if plan.compare_sequential {
                let (seq, t) = sequential_map(&payload.blocks, kernel, &plan.key)?;
                record.sequential_trials.push(secs(t.total));
                if seq != output {
                    record.error = Some("parallel output differs from sequential output".into());
                }
            }
        }
        let idx = sample_indices(size);
        let sampled: Vec<u64> = idx.iter().map(|&i| payload.blocks[i]).collect();
        let (expected, _) = sequential_map(&sampled, kernel, &plan.key)?;
        if idx.iter().zip(&expected).any(|(&i, &e)| output[i] != e) {
            record.error = Some("sampled parallel output differs from sequential output".into());
        }
        record.verified = if plan.compare_sequential {
            size
        } else {
            idx.len()
        };
        record.checksum = Some(checksum(&output));
        Ok(())
    };
    let outcome = run();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    if record.error.is_some() {
        return record;
    }
    let par = mean(&record.parallel_trials);
    record.parallel_time = Some(par);
    if plan.compare_sequential {
        let seq = mean(&record.sequential_trials);
        record.sequential_time = Some(seq);
        record.speedup = Some(seq / par);
    }
    record
}

/// Runs every cell of the plan one at a time, in sweep order. A failing cell
/// yields a record with `error` set and the sweep continues.
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchRecord>, BenchError> {
    plan.validate()?;
    Ok(plan
        .cells()
        .into_iter()
        .map(|(size, blocks, tpb)| run_cell(plan, size, blocks, tpb))
        .collect())
}

pub const CSV_HEADER: &str =
    "data_size,blocks,threads_per_block,workers,algo,key_n,parallel_time_s,sequential_time_s,speedup,trials,verified";

fn cells(r: &BenchRecord) -> [String; 11] {
    let opt = |x: Option<f64>, prec: usize| x.map(|v| format!("{v:.prec$}")).unwrap_or_default();
    [
        r.data_size.to_string(),
        r.blocks.to_string(),
        r.threads_per_block.to_string(),
        r.workers.to_string(),
        r.algo.to_string(),
        r.key_n.to_string(),
        opt(r.parallel_time, 6),
        opt(r.sequential_time, 6),
        opt(r.speedup, 2),
        r.trials.to_string(),
        r.verified.to_string(),
    ]
}

/// One header line plus one row per record. Missing values are empty cells;
/// failed records therefore have an empty `parallel_time_s`.
pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&cells(r).join(","));
        out.push('\n');
    }
    out
}

pub fn emit_markdown(records: &[BenchRecord]) -> String {
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in records {
        out.push_str(&format!("| {} |\n", cells(r).join(" | ")));
    }
    out
}

/// Plain-text run log: plan echo, machine info, then raw trial times and the
/// output checksum for each record.
pub fn render_log(plan: &BenchPlan, records: &[BenchRecord]) -> String {
    let mut log = String::new();
    let sizes: Vec<String> = plan.sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(log, "# plan");
    let _ = writeln!(log, "sizes = {}", sizes.join(","));
    let _ = writeln!(log, "grid = {:?}", plan.grid);
    let _ = writeln!(log, "workers = {}", plan.workers);
    let _ = writeln!(log, "key_n = {}", plan.key.n);
    let _ = writeln!(log, "key_e = {}", plan.key.e);
    let _ = writeln!(log, "algo = {}", plan.algo);
    let _ = writeln!(log, "trials = {}", plan.trials);
    let _ = writeln!(log, "seed = {}", plan.seed);
    let _ = writeln!(log, "compare = {}", plan.compare_sequential);
    let _ = writeln!(log, "# machine");
    let _ = writeln!(
        log,
        "os = {} {}",
        std::env::consts::OS,
        std::env::consts::ARCH
    );
    let _ = writeln!(log, "available_parallelism = {}", default_workers());
    let _ = writeln!(log, "# records");
    for r in records {
        let _ = writeln!(
            log,
            "size={} blocks={} tpb={} workers={}",
            r.data_size, r.blocks, r.threads_per_block, r.workers
        );
        if let Some(e) = &r.error {
            let _ = writeln!(log, "  error: {e}");
            continue;
        }
        let fmt = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.9}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(log, "  parallel_s: {}", fmt(&r.parallel_trials));
        if !r.sequential_trials.is_empty() {
            let _ = writeln!(log, "  sequential_s: {}", fmt(&r.sequential_trials));
        }
        let _ = writeln!(log, "  verified: {}", r.verified);
        if let Some(c) = r.checksum {
            let _ = writeln!(log, "  checksum: {c:016x}");
        }
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsa::{gcd, keygen};

    fn record(size: usize, par: Option<f64>, seq: Option<f64>) -> BenchRecord {
        BenchRecord {
            data_size: size,
            blocks: 4,
            threads_per_block: 64,
            workers: 4,
            algo: AlgorithmSelector::halving(false),
            key_n: 17947,
            parallel_time: par,
            sequential_time: seq,
            speedup: par.zip(seq).map(|(p, s)| s / p),
            trials: 20,
            parallel_trials: vec![],
            sequential_trials: vec![],
            checksum: None,
            verified: 0,
            error: None,
        }
    }

    fn small_plan() -> BenchPlan {
        BenchPlan {
            sizes: vec![64, 300],
            trials: 2,
            workers: 3,
            ..BenchPlan::table1()
        }
    }

    #[test]
    fn table_constants() {
        assert_eq!(1009 * 509, TABLE2_MODULUS);
        assert_eq!(131 * 137, TABLE1_MODULUS);
        assert_eq!(gcd(TABLE_EXPONENT, 130 * 136), 1);
        assert_eq!(gcd(TABLE_EXPONENT, 1008 * 508), 1);
        assert!(keygen(131, 137, Some(TABLE_EXPONENT)).is_ok());
        assert!(keygen(1009, 509, Some(TABLE_EXPONENT)).is_ok());
    }

    #[test]
    fn table_plans_have_expected_cells() {
        let t1 = BenchPlan::table1().cells();
        assert_eq!(t1.len(), 8);
        assert!(t1
            .iter()
            .all(|&(s, b, t)| t == 64 && b * t >= s && (b - 1) * t < s));
        assert_eq!(t1[0], (256, 4, 64));
        let t2 = BenchPlan::table2().cells();
        assert!(t2.iter().all(|&(s, b, t)| t == 32 && b * t >= s));
        assert_eq!(t2[0], (256, 8, 32));
        assert!(!BenchPlan::table2().compare_sequential);
    }

    #[test]
    fn csv_examples() {
        let mut r = record(256, Some(7.56), Some(12.56));
        r.speedup = Some(1.66);
        assert_eq!(
            emit_csv(&[r]),
            format!("{CSV_HEADER}\n256,4,64,4,halving,17947,7.560000,12.560000,1.66,20,0\n")
        );
        assert_eq!(emit_csv(&[]), format!("{CSV_HEADER}\n"));
        let row = emit_csv(&[record(256, Some(0.5), None)]);
        assert!(row.ends_with(",0.500000,,,20,0\n"), "{row}");
    }

    #[test]
    fn markdown_examples() {
        let one = emit_markdown(&[record(1, Some(1.0), Some(1.0))]);
        assert_eq!(one.lines().count(), 3);
        let eight: Vec<_> = (0..8).map(|i| record(i, Some(1.0), None)).collect();
        assert_eq!(emit_markdown(&eight).lines().count(), 10);
        let cols: Vec<String> = one
            .lines()
            .next()
            .unwrap()
            .trim_matches('|')
            .split('|')
            .map(|c| c.trim().to_string())
            .collect();
        assert_eq!(cols.join(","), CSV_HEADER);
    }

    #[test]
    fn small_sweep_runs_and_verifies() {
        let plan = small_plan();
        let records = run_bench(&plan).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.is_ok(), "{:?}", r.error);
            assert_eq!(r.parallel_trials.len(), 2);
            assert_eq!(r.verified, r.data_size);
            let (p, s) = (r.parallel_time.unwrap(), r.sequential_time.unwrap());
            assert!(p > 0.0 && s > 0.0);
            assert!((r.speedup.unwrap() - s / p).abs() < 1e-12);
        }
        // Same plan, same ciphertexts.
        let again = run_bench(&plan).unwrap();
        let sums = |rs: &[BenchRecord]| rs.iter().map(|r| r.checksum).collect::<Vec<_>>();
        assert_eq!(sums(&records), sums(&again));
        let log = render_log(&plan, &records);
        assert!(
            log.contains("checksum: ")
                && log.contains("parallel_s: ")
                && log.contains("available_parallelism")
        );
    }

    #[test]
    fn parallel_only_samples_output() {
        let plan = BenchPlan {
            compare_sequential: false,
            ..small_plan()
        };
        let records = run_bench(&plan).unwrap();
        assert_eq!(records[1].verified, SAMPLE_CHECK);
        assert!(records
            .iter()
            .all(|r| r.sequential_time.is_none() && r.speedup.is_none()));
        assert_eq!(sample_indices(10), (0..10).collect::<Vec<_>>());
        let idx = sample_indices(1000);
        assert_eq!((idx.len(), idx[0], idx[31]), (32, 0, 999));
    }

    #[test]
    fn single_cell_plan() {
        let plan = BenchPlan {
            sizes: vec![1],
            grid: GridSpec::Fixed(vec![(1, 1)]),
            trials: 1,
            workers: 1,
            ..BenchPlan::table1()
        };
        let r = &run_bench(&plan).unwrap()[0];
        assert!(r.is_ok());
        assert!(r.speedup.unwrap() > 0.0);
    }

    #[test]
    fn bad_cells_do_not_stop_the_sweep() {
        let plan = BenchPlan {
            sizes: vec![10, 100],
            grid: GridSpec::Fixed(vec![(1, 32), (0, 8)]),
            trials: 1,
            ..BenchPlan::table1()
        };
        let records = run_bench(&plan).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records[0].is_ok());
        assert!(records[1]
            .error
            .as_deref()
            .unwrap()
            .contains("invalid launch config"));
        assert!(records[2]
            .error
            .as_deref()
            .unwrap()
            .contains("grid too small"));
        let csv = emit_csv(&records);
        assert!(csv.lines().nth(3).unwrap().contains(",,,"));

        let kernel_fail = BenchPlan {
            key: PublicKey { n: 100, e: 3 },
            sizes: vec![50],
            trials: 1,
            ..BenchPlan::table1()
        };
        let r = &run_bench(&kernel_fail).unwrap()[0];
        assert!(r
            .error
            .as_deref()
            .unwrap()
            .contains("block exceeds modulus"));
    }

    #[test]
    fn invalid_plans() {
        assert_eq!(
            run_bench(&BenchPlan {
                sizes: vec![],
                ..BenchPlan::table1()
            }),
            Err(BenchError::NoSizes)
        );
        assert_eq!(
            run_bench(&BenchPlan {
                trials: 0,
                ..BenchPlan::table1()
            }),
            Err(BenchError::NoTrials)
        );
        let p = BenchPlan {
            grid: GridSpec::Fixed(vec![]),
            ..BenchPlan::table1()
        };
        assert_eq!(run_bench(&p), Err(BenchError::NoConfigs));
    }

    #[test]
    fn plan_file_parsing() {
        let plan = BenchPlan::parse(
            "# tiny\nsizes = 16, 32\nblocks = 1,2\ntpb = 32\ntrials=3\nseed=9\nalgo=kary:3\nkey_n=187\nkey_e=7\ncompare=false\nworkers=2\n",
        )
        .unwrap();
        assert_eq!(plan.sizes, [16, 32]);
        assert_eq!(plan.grid, GridSpec::Fixed(vec![(1, 32), (2, 32)]));
        assert_eq!((plan.trials, plan.seed, plan.workers), (3, 9, 2));
        assert_eq!(plan.algo, AlgorithmSelector::kary(3));
        assert_eq!(plan.key, PublicKey { n: 187, e: 7 });
        assert!(!plan.compare_sequential);
        assert_eq!(plan.cells().len(), 4);

        let auto = BenchPlan::parse("sizes=100\nblocks=auto\ntpb=32\n").unwrap();
        assert_eq!(auto.cells(), [(100, 4, 32)]);
        assert_eq!(BenchPlan::parse("").unwrap().sizes, TABLE_SIZES);

        let line = |text: &str| match BenchPlan::parse(text) {
            Err(BenchError::Plan { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("sizes=1\nbogus=2\n"), 2);
        assert_eq!(line("\n\nsizes=1,x\n"), 3);
        assert_eq!(line("trials\n"), 1);
        assert_eq!(line("compare=maybe\n"), 1);
        assert_eq!(line("algo=warp\n"), 1);
        assert_eq!(line("sizes=1\ntpb=2000\n"), 2);
        assert_eq!(line("sizes=\n"), 1);
    }

    #[test]
    fn sequential_worker_time_grows_with_size() {
        // Guard against a harness that times the wrong thing: with one worker,
        // doubling the payload must not make the launch markedly faster.
        let plan = BenchPlan {
            sizes: vec![2048, 4096, 8192, 16384],
            workers: 1,
            trials: 5,
            compare_sequential: false,
            algo: AlgorithmSelector::halving(false),
            key: PublicKey {
                n: TABLE1_MODULUS,
                e: 4001,
            },
            ..BenchPlan::table1()
        };
        let times: Vec<f64> = run_bench(&plan)
            .unwrap()
            .iter()
            .map(|r| r.parallel_time.unwrap())
            .collect();
        for w in times.windows(2) {
            assert!(w[1] >= 0.8 * w[0], "{times:?}");
        }
    }
}
