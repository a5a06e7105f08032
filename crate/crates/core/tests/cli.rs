use std::ffi::OsStr;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use layerpaint::fixtures::{random_scene, ScenePaths};
use layerpaint::pipeline::Manifest;

fn os(s: &str) -> &OsStr {
    OsStr::new(s)
}

fn layerpaint(args: &[&OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layerpaint")).args(args).output().unwrap()
}

fn scene(dir: &Path) -> ScenePaths {
    random_scene(50, 40, 12).write(&dir.join("in")).unwrap()
}

fn base_args<'a>(p: &'a ScenePaths, out: &'a Path) -> Vec<&'a OsStr> {
    vec![
        os("--input"), p.image.as_os_str(),
        os("--depth"), p.depth.as_os_str(),
        os("--labels"), p.labels.as_os_str(),
        os("--meta"), p.meta.as_os_str(),
        os("--out"), out.as_os_str(),
        os("--strokes"), os("120"),
    ]
}

fn stderr_lines(o: &Output) -> usize {
    String::from_utf8_lossy(&o.stderr).lines().count()
}

#[test]
fn successful_run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    let out = dir.path().join("out");
    let mut args = base_args(&p, &out);
    args.extend([os("--colors"), os("3"), os("--robot")]);
    let o = layerpaint(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.stroke_count, 120);
    assert_eq!(m.config.colors, Some(3));
    for e in &m.outputs {
        assert!(out.join(&e.path).exists(), "{}", e.path);
    }
}

#[test]
fn zero_strokes_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    let out = dir.path().join("out");
    let mut args = base_args(&p, &out);
    args.extend([os("--strokes"), os("0")]);
    let o = layerpaint(&args);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o), 1);
}

#[test]
fn unknown_flag_exits_2() {
    let o = layerpaint(&[os("--bogus")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o), 1);
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    fs::remove_file(&p.depth).unwrap();
    let out = dir.path().join("out");
    let o = layerpaint(&base_args(&p, &out));
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_lines(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth.pgm"));
}

#[test]
fn dimension_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    random_scene(51, 40, 12).image.save_png(&p.image).unwrap();
    let out = dir.path().join("out");
    let o = layerpaint(&base_args(&p, &out));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("out");
    let o = layerpaint(&base_args(&p, &out));
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_lines(&o), 1);
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = scene(dir.path());
    let out = dir.path().join("out");
    let mut args = base_args(&p, &out);
    args.extend([os("--colors"), os("4"), os("--rng-seed"), os("7"), os("--robot")]);
    assert!(layerpaint(&args).status.success());
    let again = dir.path().join("again");
    let manifest = out.join("manifest.json");
    let o = layerpaint(&[os("--from-manifest"), manifest.as_os_str(), os("--out"), again.as_os_str()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = Manifest::load(&manifest).unwrap();
    let b = Manifest::load(&again.join("manifest.json")).unwrap();
    assert_eq!(a.outputs, b.outputs);
    for e in &a.outputs {
        assert_eq!(fs::read(out.join(&e.path)).unwrap(), fs::read(again.join(&e.path)).unwrap(), "{}", e.path);
    }
}
