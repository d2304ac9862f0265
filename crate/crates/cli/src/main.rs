use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use rsalab_core::bench::{emit_csv, emit_markdown, render_log, run_bench, BenchPlan};
use rsalab_core::codec::{decode_packets, encode_text, format_packets, parse_stream};
use rsalab_core::selftest::{self, SelftestOptions};
use rsalab_core::spmd::{launch_map, sequential_map, LaunchConfig};
use rsalab_core::{
    decrypt_block, encrypt_block, keygen, validate_keypair, AlgorithmSelector, PrivateKey,
    PublicKey,
};

const EXIT_SELFTEST: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "rsalab",
    version,
    about = "Textbook RSA lab with an SPMD-style parallel block engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair from two primes below 65536
    Keygen {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Public exponent (default: smallest e >= 3 coprime with the totient)
        #[arg(long)]
        e: Option<u64>,
        /// Writes <OUT>.pub and <OUT>.priv
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a claimed key against every RSA key invariant
    Validate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        e: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, requires = "q")]
        p: Option<u64>,
        #[arg(long, requires = "p")]
        q: Option<u64>,
    },
    /// Turn lowercase text into a packet stream (reads stdin without --text)
    Encode {
        #[arg(long)]
        text: Option<String>,
    },
    /// Turn a packet stream back into text (reads stdin without packets)
    Decode { packets: Vec<String> },
    /// Encrypt blocks with a public key file
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        /// Encode this text into packets and encrypt those
        #[arg(long, conflicts_with = "blocks")]
        text: Option<String>,
        #[command(flatten)]
        exec: ExecArgs,
        /// Plaintext blocks (reads stdin when neither blocks nor --text are given)
        blocks: Vec<String>,
    },
    /// Decrypt blocks with a private key file
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        /// Print the plaintext as letters instead of packets
        #[arg(long)]
        text: bool,
        #[command(flatten)]
        exec: ExecArgs,
        /// Ciphertext blocks (reads stdin when none are given)
        blocks: Vec<String>,
    },
    /// Time parallel against sequential encryption and print CSV
    Bench(BenchArgs),
    /// Run the built-in worked fixtures
    Selftest {
        #[arg(long, hide = true)]
        tamper_halving: bool,
    },
}

#[derive(Args)]
struct ExecArgs {
    /// naive, r2l, l2r, kary, sliding or halving
    #[arg(long, default_value = "l2r")]
    algo: String,
    /// Window width for kary and sliding (1..=8)
    #[arg(long)]
    k: Option<u32>,
    /// Keep the kernel's e = 0 behaviour in the halving strategy
    #[arg(long)]
    faithful: bool,
    /// Run through the parallel engine on a BLOCKS,THREADS grid
    #[arg(long, value_name = "BLOCKS,THREADS", value_parser = parse_grid)]
    parallel: Option<(usize, usize)>,
    /// Worker threads for --parallel (default: available cores)
    #[arg(long, requires = "parallel")]
    workers: Option<usize>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("plan_source").required(true).multiple(false)))]
struct BenchArgs {
    /// 8 sizes, 64 threads per block, n = 17947, parallel vs sequential
    #[arg(long, group = "plan_source")]
    table1: bool,
    /// 8 sizes, 32 threads per block, n = 513581, parallel only
    #[arg(long, group = "plan_source")]
    table2: bool,
    /// key = value plan file
    #[arg(long, group = "plan_source")]
    plan: Option<PathBuf>,
    /// Write CSV here and the run log to <OUT>.log
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Emit a Markdown table instead of CSV
    #[arg(long)]
    markdown: bool,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (b, t) = s.split_once(',').ok_or("expected BLOCKS,THREADS")?;
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| format!("not a number: `{x}`"))
    };
    Ok((num(b)?, num(t)?))
}

#[derive(Debug)]
enum CliError {
    Domain(String),
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn selector(exec: &ExecArgs) -> CliResult<AlgorithmSelector> {
    let mut sel: AlgorithmSelector = exec
        .algo
        .parse()
        .map_err(|e: rsalab_core::modmath::ParseAlgorithmError| CliError::Usage(e.to_string()))?;
    if let Some(k) = exec.k {
        if !(1..=rsalab_core::modmath::MAX_WINDOW).contains(&k) {
            return Err(CliError::Usage(format!(
                "--k {k}: window out of range (1..=8)"
            )));
        }
        sel.window = k;
    }
    if exec.faithful {
        sel.faithful = true;
    }
    Ok(sel)
}

fn read_stdin() -> CliResult<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

fn blocks_from(args: &[String]) -> CliResult<Vec<u64>> {
    if args.is_empty() {
        Ok(parse_stream(&read_stdin()?)?)
    } else {
        Ok(parse_stream(&args.join(" "))?)
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// Runs `op` over every block, either sequentially or on the requested grid.
fn map_blocks<C: Sync>(
    exec: &ExecArgs,
    blocks: &[u64],
    key: &C,
    op: impl Fn(u64, &C) -> Result<u64, rsalab_core::RsaError> + Sync,
) -> CliResult<Vec<u64>> {
    let out = match exec.parallel {
        None => sequential_map(blocks, op, key)?.0,
        Some((b, t)) => {
            let mut config = LaunchConfig::new(b, t).map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(w) = exec.workers {
                config = config.with_workers(w);
            }
            launch_map(&config, blocks, op, key)?.0
        }
    };
    Ok(out)
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> CliResult<u8> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Keygen { p, q, e, out } => {
            let k = keygen(p, q, e)?;
            let stem = out.to_string_lossy();
            let (pub_path, priv_path) = (format!("{stem}.pub"), format!("{stem}.priv"));
            k.public().save(&pub_path)?;
            k.private().save(&priv_path)?;
            writeln!(
                stdout,
                "p={} q={} n={} phi={} e={} d={}",
                k.p, k.q, k.n, k.phi, k.e, k.d
            )?;
            writeln!(stdout, "wrote {pub_path} {priv_path}")?;
        }
        Command::Validate { n, e, d, p, q } => {
            let report = validate_keypair(n, e, d, p, q);
            writeln!(stdout, "{report}")?;
            if !report.overall {
                return Ok(EXIT_DOMAIN);
            }
        }
        Command::Encode { text } => {
            let text = match text {
                Some(t) => t,
                None => read_stdin()?,
            };
            // Trailing newline from a pipe is not part of the message.
            let packets = encode_text(text.trim_end_matches(['\n', '\r']))?;
            writeln!(stdout, "{}", format_packets(packets))?;
        }
        Command::Decode { packets } => {
            let values = blocks_from(&packets)?;
            writeln!(stdout, "{}", decode_packets(&values)?)?;
        }
        Command::Encrypt {
            key,
            text,
            exec,
            blocks,
        } => {
            let algo = selector(&exec)?;
            let key: PublicKey = read_file(&key)?.parse()?;
            let plain = match text {
                Some(t) => encode_text(&t)?.into_iter().map(|p| p.value()).collect(),
                None => blocks_from(&blocks)?,
            };
            let cipher = map_blocks(&exec, &plain, &key, |m, k| encrypt_block(m, k, &algo))?;
            writeln!(stdout, "{}", join(&cipher))?;
        }
        Command::Decrypt {
            key,
            text,
            exec,
            blocks,
        } => {
            let algo = selector(&exec)?;
            let key: PrivateKey = read_file(&key)?.parse()?;
            let cipher = blocks_from(&blocks)?;
            let plain = map_blocks(&exec, &cipher, &key, |c, k| decrypt_block(c, k, &algo))?;
            if text {
                writeln!(stdout, "{}", decode_packets(&plain)?)?;
            } else {
                writeln!(stdout, "{}", format_packets(plain))?;
            }
        }
        Command::Bench(args) => return bench(args, &mut stdout),
        Command::Selftest { tamper_halving } => {
            let results = selftest::run(&SelftestOptions { tamper_halving });
            for r in &results {
                let mark = if r.passed { "pass" } else { "FAIL" };
                writeln!(stdout, "{mark} {:20} {}", r.name, r.detail)?;
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(EXIT_SELFTEST);
            }
        }
    }
    Ok(0)
}

fn bench(args: BenchArgs, stdout: &mut impl Write) -> CliResult<u8> {
    let mut plan = if args.table1 {
        BenchPlan::table1()
    } else if args.table2 {
        BenchPlan::table2()
    } else {
        let path = args.plan.as_deref().expect("clap enforces one plan source");
        BenchPlan::parse(&read_file(path)?)
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?
    };
    if let Some(t) = args.trials {
        plan.trials = t;
    }
    if let Some(w) = args.workers {
        plan.workers = w;
    }
    let records = run_bench(&plan)?;
    let table = if args.markdown {
        emit_markdown(&records)
    } else {
        emit_csv(&records)
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &table)?;
            let mut log_path = path.clone().into_os_string();
            log_path.push(".log");
            fs::write(&log_path, render_log(&plan, &records))?;
        }
        None => stdout.write_all(table.as_bytes())?,
    }
    for r in records.iter().filter(|r| !r.is_ok()) {
        eprintln!(
            "size {} on {}x{}: {}",
            r.data_size,
            r.blocks,
            r.threads_per_block,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
