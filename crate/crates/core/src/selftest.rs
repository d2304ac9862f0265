//! Built-in worked fixtures, runnable from the CLI as a release gate.

use crate::bench::TABLE2_MODULUS;
use crate::codec::{decode_packets, encode_text, format_packets};
use crate::modmath::AlgorithmSelector;
use crate::modmath::{modexp_halving, modexp_naive_trace};
use crate::rsa::{check, decrypt_block, encrypt_block, is_prime, keygen, validate_keypair};

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Invert the halving `faithful` flag, to prove the divergence fixture bites.
    pub tamper_halving: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn fixture(name: &'static str, outcome: Result<String, String>) -> FixtureResult {
    match outcome {
        Ok(detail) => FixtureResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => FixtureResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn naive_trace() -> Result<String, String> {
    const EXPECTED: [u64; 13] = [4, 16, 64, 256, 30, 120, 480, 429, 225, 403, 121, 484, 445];
    let (r, trace) = modexp_naive_trace(4, 13, 497).map_err(|e| e.to_string())?;
    ensure(r == 445 && trace == EXPECTED, || {
        format!("got {r} with trace {trace:?}")
    })?;
    Ok("4^13 mod 497 = 445 in 13 steps".into())
}

fn packets() -> Result<String, String> {
    let packets = encode_text("parallel encryption").map_err(|e| e.to_string())?;
    let stream = format_packets(packets.iter().copied());
    ensure(
        stream == "1500 1700 1111 0411 0413 0217 2415 1908 1413",
        || format!("encoded as {stream}"),
    )?;
    let values: Vec<u64> = packets.iter().map(|p| p.value()).collect();
    let text = decode_packets(&values).map_err(|e| e.to_string())?;
    ensure(text == "parallelencryption", || {
        format!("decoded as {text}")
    })?;
    Ok(stream)
}

fn small_keypair() -> Result<String, String> {
    let k = keygen(17, 11, Some(7)).map_err(|e| e.to_string())?;
    ensure((k.n, k.phi, k.d) == (187, 160, 23), || {
        format!("n={} phi={} d={}", k.n, k.phi, k.d)
    })?;
    let algo = AlgorithmSelector::l2r();
    for m in 0..k.n {
        let c = encrypt_block(m, &k.public(), &algo).map_err(|e| e.to_string())?;
        let back = decrypt_block(c, &k.private(), &algo).map_err(|e| e.to_string())?;
        ensure(back == m, || format!("roundtrip failed for {m}"))?;
    }
    Ok("n=187 phi=160 e=7 d=23, all 187 blocks roundtrip".into())
}

fn invalid_key() -> Result<String, String> {
    let r = validate_keypair(17947, 131, 137, None, None);
    let failed: Vec<&str> = r.failed().map(|c| c.name).collect();
    ensure(failed == [check::INVERSE], || {
        format!("failed checks: {failed:?}")
    })?;
    let detail = &r
        .check(check::INVERSE)
        .expect("inverse check present")
        .detail;
    ensure(detail.contains("= 267"), || detail.clone())?;
    Ok(format!("rejected: {detail}"))
}

fn zero_exponent(opts: &SelftestOptions) -> Result<String, String> {
    let faithful = !opts.tamper_halving;
    let quirk = modexp_halving(5, 0, 7, faithful).map_err(|e| e.to_string())?;
    let fixed = modexp_halving(5, 0, 7, !faithful).map_err(|e| e.to_string())?;
    ensure(quirk == 5 && fixed == 1, || {
        format!("faithful gave {quirk}, corrected gave {fixed}")
    })?;
    Ok("e=0: faithful 5, corrected 1".into())
}

fn table2_modulus() -> Result<String, String> {
    ensure(!is_prime(1005), || "1005 reported prime".into())?;
    ensure(is_prime(1009) && is_prime(509), || {
        "1009 or 509 reported composite".into()
    })?;
    let k = keygen(1009, 509, None).map_err(|e| e.to_string())?;
    ensure(k.n == TABLE2_MODULUS, || format!("1009 * 509 = {}", k.n))?;
    Ok("1005 = 3 * 5 * 67 is composite; n = 1009 * 509 = 513581".into())
}

pub fn run(opts: &SelftestOptions) -> Vec<FixtureResult> {
    vec![
        fixture("fig4-trace", naive_trace()),
        fixture("sec2-packets", packets()),
        fixture("fig2-keypair", small_keypair()),
        fixture("sec2-invalid-key", invalid_key()),
        fixture("fig12-e0-divergence", zero_exponent(opts)),
        fixture("table2-modulus", table2_modulus()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_pass() {
        let results = run(&SelftestOptions::default());
        assert_eq!(results.len(), 6);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let results = run(&SelftestOptions {
            tamper_halving: true,
        });
        let failed: Vec<_> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect();
        assert_eq!(failed, ["fig12-e0-divergence"]);
    }
}
