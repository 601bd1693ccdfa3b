use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use comb_attack::gf2::keystream;
use comb_attack::multiples::verify_multiple;
use comb_attack::{BitSeq, Keystream};
use comb_attack_cli::commands::{load_cache, load_keystream, load_spec};
use comb_attack_cli::formats::{
    decode_cache, decode_keystream, encode_cache, encode_keystream, format_key, parse_key,
    SpecDocument,
};

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn toy() -> PathBuf {
    specs_dir().join("toy.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comb-attack"))
        .args(args)
        .env_remove("COMB_ATTACK_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spec_document_round_trips() {
    for name in ["toy.json", "paper_29_31_37.json"] {
        let text = std::fs::read_to_string(specs_dir().join(name)).unwrap();
        let doc = SpecDocument::parse(&text).unwrap();
        let spec = doc.to_spec().unwrap();
        let again = SpecDocument::from_spec(&spec);
        assert_eq!(again, doc);
        assert_eq!(SpecDocument::parse(&again.to_json()).unwrap(), doc);
    }
}

#[test]
fn spec_validation_errors() {
    let text = std::fs::read_to_string(toy()).unwrap();
    let bad_len = text.replace("\"length\": 13", "\"length\": 12");
    assert!(SpecDocument::parse(&bad_len).unwrap().to_spec().is_err());
    let non_primitive = text.replace("0x2129", "0x2001");
    assert!(SpecDocument::parse(&non_primitive)
        .unwrap()
        .to_spec()
        .is_err());
    let twice = text.replace("[2, 1]]", "[2, 0]]");
    assert!(SpecDocument::parse(&twice).unwrap().to_spec().is_err());
    assert!(SpecDocument::parse("{\"lfsrs\": []}").is_err());
}

#[test]
fn keystream_file_round_trips() {
    for len in [0usize, 1, 7, 8, 9, 64, 1000] {
        let ks = Keystream::new(BitSeq::from_bools((0..len).map(|t| t % 3 == 1)));
        let bytes = encode_keystream(&ks);
        assert_eq!(&bytes[..5], b"CGKS\x01");
        assert_eq!(bytes.len(), 13 + len.div_ceil(8));
        let back = decode_keystream(&bytes).unwrap();
        assert_eq!(back, ks);
        assert_eq!(encode_keystream(&back), bytes);
    }
    let mut bytes = encode_keystream(&Keystream::new(BitSeq::from_bools([true, false, true])));
    bytes[13] |= 0x80;
    assert!(decode_keystream(&bytes).is_err());
    assert!(decode_keystream(b"CGKS\x02\0\0\0\0\0\0\0\0").is_err());
}

#[test]
fn key_hex_round_trips() {
    let spec = load_spec(&toy()).unwrap();
    let state = parse_key(&spec, "0x1c5b47abc").unwrap();
    assert_eq!(state, vec![0x1abc, 0x5a3, 0x1c5]);
    assert_eq!(format_key(&spec, &state), "0x1c5b47abc");
    assert!(parse_key(&spec, "0x200000000").is_err());
}

#[test]
fn gen_writes_the_stored_vector() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ks.bin");
    let spec = load_spec(&toy()).unwrap();
    let key = format_key(&spec, &[0x1abc, 0x5a3, 0x1c5]);
    let o = run(&[
        "gen",
        toy().to_str().unwrap(),
        "--key",
        &key,
        "--nbits",
        "64",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let ks = load_keystream(&out).unwrap();
    assert_eq!(ks.bits().window(0, 64), 0x465c_fddb_82c3_4e37);

    let o = run(&[
        "gen",
        toy().to_str().unwrap(),
        "--key",
        &key,
        "--nbits",
        "0",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), b"CGKS\x01\0\0\0\0\0\0\0\0");

    let o = run(&[
        "gen",
        toy().to_str().unwrap(),
        "--key",
        "0xfffffffffff",
        "--nbits",
        "8",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn multiples_cache_is_verified_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.w4");
    let o = run(&[
        "multiples",
        toy().to_str().unwrap(),
        "--group",
        "1,2",
        "--max-degree",
        "512",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let report = load_cache(&out).unwrap();
    assert!(!report.found.is_empty());
    let spec = load_spec(&toy()).unwrap();
    let group: Vec<_> = [1, 2].iter().map(|&r| &spec.lfsrs()[r]).collect();
    assert!(report.found.iter().all(|m| verify_multiple(m, &group)));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# modulus 0x"));
    assert_eq!(encode_cache(&decode_cache(&text).unwrap()), text);

    let o = run(&[
        "multiples",
        toy().to_str().unwrap(),
        "--group",
        "1,2",
        "--max-degree",
        "3",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("warning: no weight-4 multiple"));
    assert!(stdout(&o).contains("expected count"));
    assert!(load_cache(&out).unwrap().found.is_empty());
}

#[test]
fn cache_parser_rejects_garbage() {
    assert!(decode_cache("").is_err());
    assert!(decode_cache("# modulus 0x13 max-degree 6\n2 4\n").is_err());
    assert!(decode_cache("# modulus 0x13 max-degree 6\n4 2 5\n").is_err());
    assert!(decode_cache("# modulus 0x13 max-degree 4\n2 4 5\n").is_err());
    assert!(decode_cache("# modulus 0x13 max-degree 9\n2 4 9\n1 2 5\n").is_err());
    let ok = decode_cache("# modulus 0x13 max-degree 6\n2 4 5\n").unwrap();
    assert_eq!(ok.found.len(), 1);
}

#[test]
fn attack_recovers_the_toy_key() {
    let dir = tempfile::tempdir().unwrap();
    let spec = load_spec(&toy()).unwrap();
    let state = vec![0x0a5e, 0x3d1, 0x0b7];
    let ks = keystream(&spec, &state, 1 << 16).unwrap();
    let ks_path = dir.path().join("ks.bin");
    std::fs::write(&ks_path, encode_keystream(&ks)).unwrap();
    let cache = dir.path().join("cache");
    let o = run(&[
        "attack",
        toy().to_str().unwrap(),
        ks_path.to_str().unwrap(),
        "--order",
        "0,1,2",
        "--cache-dir",
        cache.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains(&format!("recovered key {}", format_key(&spec, &state))));
    assert!(text.contains("regeneration check: ok"));
    assert!(text.contains("candidate\tn0\tn1_count\tbias\tzscore"));
    // second run reads the caches written by the first
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 2);
    let again = run(&[
        "attack",
        toy().to_str().unwrap(),
        ks_path.to_str().unwrap(),
        "--cache-dir",
        cache.to_str().unwrap(),
        "--split-bits",
        "3",
        "--threads",
        "1",
    ]);
    assert!(again.status.success());
    assert!(stdout(&again).contains(&format!("recovered key {}", format_key(&spec, &state))));
}

#[test]
fn plan_only_on_the_large_configuration() {
    let o = run(&[
        "attack",
        specs_dir().join("paper_29_31_37.json").to_str().unwrap(),
        "--plan-only",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("N = 121634816 (2^26.86)"), "{text}");
    assert!(text.contains("[2, 0, 1]: stage-1 N = 2^27.21"));
}

#[test]
fn attack_without_keystream_is_a_usage_error() {
    let o = run(&["attack", toy().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let linear = dir.path().join("linear.hex");
    // f(x) = x0 + x1 + x2 on 3 variables
    std::fs::write(&linear, "0x96\n").unwrap();
    let text = stdout(&run(&["analyze", linear.to_str().unwrap()]));
    assert!(text.contains("resiliency order = 2"));
    assert!(text.contains("nonlinearity = 0"));
    assert!(text.contains("P_0 = 512/2^9 = 1.00000000"));

    let mm = specs_dir().join("mm9_3resilient.hex");
    let text = stdout(&run(&["analyze", mm.to_str().unwrap()]));
    assert!(text.contains("resiliency order = 3"));
    assert!(text.contains("attack-relevant gap: 2^-10"));
    assert!(text.contains("delta_f = 256"));

    let unbalanced = dir.path().join("and.hex");
    std::fs::write(&unbalanced, "0x8\n").unwrap();
    let text = stdout(&run(&["analyze", unbalanced.to_str().unwrap()]));
    assert!(text.contains("warning: the function is unbalanced"));

    std::fs::write(&unbalanced, "0xz1\n").unwrap();
    assert_eq!(
        run(&["analyze", unbalanced.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_is_deterministic_and_exhaustive() {
    let a = run(&["verify", "--n", "4", "--trials", "100", "--seed", "7"]);
    let b = run(&["verify", "--n", "4", "--trials", "100", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("p_spectrum exact: 100/100"));
    let e = run(&["verify", "--n", "3", "--exhaustive"]);
    assert!(e.status.success());
    assert!(stdout(&e).contains("exhaustive over 70 balanced functions"));
    assert!(stdout(&e).contains("bounds: 70/70"));
    assert_eq!(run(&["verify", "--n", "9"]).status.code(), Some(2));
}
