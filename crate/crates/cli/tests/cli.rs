//! Command line behavior: examples, exit codes, and the served-root lock.

mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};

use common::*;

fn add_media(root: &std::path::Path, work: &std::path::Path) {
    let file = work.join("media.mdl");
    std::fs::write(&file, media()).unwrap();
    assert_eq!(cli(root, &["add", "media-model", file.to_str().unwrap()]).0, 0);
}

#[test]
fn stage_examples() {
    let (d, root) = new_root();
    add_media(&root, d.path());
    assert_eq!(cli(&root, &["stage", "media-model"]).1, "vague (red)\n");
    for attr in WEAK {
        assert_eq!(cli(&root, &["attest", "media-model", attr, "--verdict", "pass"]).0, 0);
    }
    assert_eq!(cli(&root, &["stage", "media-model"]), (0, "fine (green)\n".into(), String::new()));
    let (code, out, _) = cli(&root, &["review", "add", "media-model", "--hat", "black", "--text", "songs belong to one album?"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("media-model.r1\n"));
    assert_eq!(cli(&root, &["stage", "media-model"]).1, "vague (red)\n");
    let (_, list, _) = cli(&root, &["review", "list", "media-model"]);
    assert_eq!(list, "media-model.r1\tblack\topen\tsnapshot 1\tsongs belong to one album?\n");
}

#[test]
fn assess_exit_codes() {
    let (d, root) = new_root();
    add_media(&root, d.path());
    let (code, out, _) = cli(&root, &["assess", "media-model"]);
    assert_eq!(code, 3, "vague entry");
    assert!(out.starts_with("stage: vague (red)\n"));

    // decent: strong and medium clean, semantic validity attested
    cli(&root, &["attest", "media-model", "semantic-validity", "--verdict", "pass"]);
    let (code, out, _) = cli(&root, &["assess", "media-model", "--format", "json"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["stage"], "decent");
    for key in ["entry_id", "seq_no", "stage", "statuses", "findings", "delta"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn usage_and_domain_errors() {
    let (d, root) = new_root();
    add_media(&root, d.path());
    let (code, _, err) = cli(&root, &["attest", "media-model", "appeal"]);
    assert_eq!(code, 2);
    assert!(err.contains("--verdict"), "{err}");
    assert!(err.contains("Usage: modelgate attest"), "subcommand help: {err}");
    let (code, _, err) = cli(&root, &["review", "add", "media-model", "--hat", "purple", "--text", "x"]);
    assert_eq!(code, 2);
    assert!(err.contains("purple"));
    assert_eq!(cli(&root, &["frobnicate"]).0, 2);
    assert_eq!(cli(&root, &["--help"]).0, 0);

    let (code, _, err) = cli(&root, &["stage", "ghost"]);
    assert_eq!((code, err.trim()), (1, "error[unknown_entry]: no entry `ghost`"));
    let (code, _, err) = cli(&root, &["review", "reopen", "media-model.r9"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[unknown_review]"));
    let bad = d.path().join("bad.mdl");
    std::fs::write(&bad, "model M {\n  purpose \"p\"\n  class {\n}").unwrap();
    let (code, _, err) = cli(&root, &["commit", "media-model", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[parse_error]") && err.contains("line 3"), "{err}");
    let (code, _, _) = cli(&root, &["commit", "media-model", "/no/such/file.mdl"]);
    assert_eq!(code, 1);
}

#[test]
fn served_root_refuses_cli_mutations() {
    let (d, root) = new_root();
    add_media(&root, d.path());
    let server_state = state(&root);
    let (code, _, err) = cli(&root, &["review", "add", "media-model", "--hat", "white", "--text", "x"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[library_locked]"), "{err}");
    // reads still work, and assess falls back to an uncached evaluation
    assert_eq!(cli(&root, &["stage", "media-model"]).0, 0);
    let (code, out, _) = cli(&root, &["assess", "media-model"]);
    assert_eq!(code, 3);
    assert!(out.starts_with("stage: vague (red)"));
    drop(server_state);
    assert_eq!(cli(&root, &["review", "add", "media-model", "--hat", "white", "--text", "x"]).0, 0);
}

fn http_get(addr: &str, path: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    resp
}

#[test]
fn binary_serves_http_and_holds_the_lock() {
    let bin = env!("CARGO_BIN_EXE_modelgate");
    let (d, root) = new_root();
    add_media(&root, d.path());
    let mut server = Command::new(bin)
        .args(["serve", "--port", "0"])
        .env("MODELGATE_ROOT", &root)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap_or_else(|| panic!("{line}")).to_string();

    let resp = http_get(&addr, "/api/entries/media-model/assessment");
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"entry_id\":\"media-model\""));
    let resp = http_get(&addr, "/api/entries/ghost");
    assert!(resp.starts_with("HTTP/1.1 404"));
    assert!(resp.contains("\"code\":\"unknown_entry\""));

    let file = d.path().join("media.mdl");
    let status = Command::new(bin)
        .args(["commit", "media-model", file.to_str().unwrap()])
        .env("MODELGATE_ROOT", &root)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let status = Command::new(bin).args(["stage", "media-model"]).env("MODELGATE_ROOT", &root).stdout(Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(0));

    server.kill().unwrap();
    server.wait().unwrap();
}
