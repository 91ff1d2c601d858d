use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn curvefill(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvefill"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to launch curvefill")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

const DASHED_LINE: &str = "\
# horizontal dashed line
width = 128
height = 96
dash = 14, 6
background = flat 0.1
foreground = 0.9
noise_sigma = 0.02
seed = 7
segment = 16 48 112 48 3
";

fn synth_input(dir: &Path) {
    fs::write(dir.join("spec.cfg"), DASHED_LINE).unwrap();
    assert_ok(&curvefill(
        &["synth", "--spec", "spec.cfg", "--output", "in.pgm"],
        dir,
    ));
}

#[test]
fn pipeline_writes_final_and_overlay() {
    let tmp = TempDir::new().unwrap();
    synth_input(tmp.path());
    let out = curvefill(
        &[
            "pipeline",
            "--input",
            "in.pgm",
            "--output-dir",
            "out",
            "--blur-radius",
            "9",
            "--alpha",
            "0.4",
            "--morph-radius",
            "12",
        ],
        tmp.path(),
    );
    assert_ok(&out);
    let dir = tmp.path().join("out");
    assert!(dir.join("06_final.pgm").is_file());
    assert!(dir.join("overlay.pgm").is_file());
    assert!(!dir.join("01_blur.pgm").exists());
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("spec.cfg"), DASHED_LINE).unwrap();
    for name in ["a.pgm", "b.pgm"] {
        assert_ok(&curvefill(
            &["synth", "--spec", "spec.cfg", "--output", name],
            tmp.path(),
        ));
    }
    let a = fs::read(tmp.path().join("a.pgm")).unwrap();
    let b = fs::read(tmp.path().join("b.pgm")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn threshold_on_constant_image_fails() {
    let tmp = TempDir::new().unwrap();
    let mut pgm = b"P5\n8 8\n255\n".to_vec();
    pgm.extend([120u8; 64]);
    fs::write(tmp.path().join("flat.pgm"), pgm).unwrap();
    let out = curvefill(
        &[
            "threshold",
            "--method",
            "cec",
            "--input",
            "flat.pgm",
            "--output",
            "t.pgm",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("degenerate histogram"), "{stderr}");
    assert_eq!(stderr.trim().lines().count(), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let missing = curvefill(
        &["blur", "--input", "nope.pgm", "--output", "x.pgm"],
        tmp.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
    let unknown = curvefill(&["pipeline", "--frobnicate"], tmp.path());
    assert_eq!(unknown.status.code(), Some(2));
    let bad_method = curvefill(
        &[
            "threshold",
            "--method",
            "kmeans",
            "--input",
            "a",
            "--output",
            "b",
        ],
        tmp.path(),
    );
    assert_eq!(bad_method.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_processing_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("junk.pgm"), b"not an image").unwrap();
    let out = curvefill(
        &["blur", "--input", "junk.pgm", "--output", "x.pgm"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_applied_and_flags_override_it() {
    let tmp = TempDir::new().unwrap();
    synth_input(tmp.path());
    fs::write(
        tmp.path().join("run.cfg"),
        "blur_radius = 9\nmorph_radius = 12\nalpha = 0.4\nprune_length = 8\n\
         emit_intermediates = true\noutput_dir = from_config\n",
    )
    .unwrap();
    assert_ok(&curvefill(
        &["pipeline", "--input", "in.pgm", "--config", "run.cfg"],
        tmp.path(),
    ));
    assert!(tmp.path().join("from_config/03_morph.pgm").is_file());

    assert_ok(&curvefill(
        &[
            "pipeline",
            "--input",
            "in.pgm",
            "--config",
            "run.cfg",
            "--output-dir",
            "flag",
        ],
        tmp.path(),
    ));
    assert_eq!(
        fs::read(tmp.path().join("from_config/06_final.pgm")).unwrap(),
        fs::read(tmp.path().join("flag/06_final.pgm")).unwrap()
    );

    fs::write(tmp.path().join("bad.cfg"), "alpha = 3\n").unwrap();
    let out = curvefill(
        &["pipeline", "--input", "in.pgm", "--config", "bad.cfg"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stages_compose_to_the_pipeline_output() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    synth_input(dir);
    assert_ok(&curvefill(
        &[
            "pipeline",
            "--input",
            "in.pgm",
            "--output-dir",
            "out",
            "--blur-radius",
            "9",
            "--morph-radius",
            "12",
            "--alpha",
            "0.4",
            "--prune-length",
            "8",
            "--emit-intermediates",
        ],
        dir,
    ));
    let steps: [&[&str]; 4] = [
        &[
            "blur", "--radius", "9", "--input", "in.pgm", "--output", "s1.pgm",
        ],
        &[
            "threshold",
            "--method",
            "cec",
            "--input",
            "out/01_blur.pgm",
            "--output",
            "s2.pgm",
        ],
        &[
            "morph",
            "--radius",
            "12",
            "--alpha",
            "0.4",
            "--input",
            "out/02_binary.pgm",
            "--output",
            "s3.pgm",
        ],
        &[
            "skeleton",
            "--prune-length",
            "8",
            "--input",
            "out/03_morph.pgm",
            "--output",
            "s6.pgm",
        ],
    ];
    for args in steps {
        assert_ok(&curvefill(args, dir));
    }
    for (mine, theirs) in [
        ("s1.pgm", "out/01_blur.pgm"),
        ("s2.pgm", "out/02_binary.pgm"),
        ("s3.pgm", "out/03_morph.pgm"),
        ("s6.pgm", "out/06_final.pgm"),
    ] {
        assert_eq!(
            fs::read(dir.join(mine)).unwrap(),
            fs::read(dir.join(theirs)).unwrap(),
            "{mine} vs {theirs}"
        );
    }

    // a skeleton that keeps every component equals the pruned stage
    assert_ok(&curvefill(
        &[
            "skeleton",
            "--prune-length",
            "8",
            "--keep-all-components",
            "--input",
            "out/03_morph.pgm",
            "--output",
            "s5.pgm",
        ],
        dir,
    ));
    assert_eq!(
        fs::read(dir.join("s5.pgm")).unwrap(),
        fs::read(dir.join("out/05_prune.pgm")).unwrap()
    );
}

#[test]
fn png_output_round_trips_through_stages() {
    let tmp = TempDir::new().unwrap();
    synth_input(tmp.path());
    assert_ok(&curvefill(
        &[
            "blur", "--radius", "5", "--input", "in.pgm", "--output", "b.png",
        ],
        tmp.path(),
    ));
    assert_ok(&curvefill(
        &[
            "threshold",
            "--method",
            "otsu",
            "--input",
            "b.png",
            "--output",
            "t.png",
        ],
        tmp.path(),
    ));
    assert_ok(&curvefill(
        &[
            "morph",
            "--classical",
            "--radius",
            "2",
            "--input",
            "t.png",
            "--output",
            "m.pgm",
        ],
        tmp.path(),
    ));
}
