use std::path::Path;
use std::process::{Command, Output};

fn octasplat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octasplat"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Synthetic scene with `count` splats and two 24x24 cameras in `dir`.
fn synth(dir: &Path, count: usize) {
    let o = octasplat(&[
        "synth",
        &count.to_string(),
        "--out",
        s(dir),
        "--views",
        "2",
        "--width",
        "24",
        "--height",
        "24",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn render_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3);
    let (ply, cams) = (dir.path().join("splats.ply"), dir.path().join("cameras.json"));
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = octasplat(&["render", s(&ply), s(&cams), "--out", s(&out), "--workers", workers]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("\"workers\":"), "resolved settings are logged");
        outputs.push([std::fs::read(out.join("00000.png")).unwrap(), std::fs::read(out.join("00001.png")).unwrap()]);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn render_empty_scene_with_white_background() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 0);
    let out = dir.path().join("r");
    let o = octasplat(&[
        "render",
        s(&dir.path().join("splats.ply")),
        s(&dir.path().join("cameras.json")),
        "--out",
        s(&out),
        "--background",
        "1,1,1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let img = octasplat::Image::load_png_encoded(out.join("00000.png")).unwrap();
    assert!(img.pixels().iter().all(|p| *p == glam::DVec3::ONE));
}

#[test]
fn render_with_mesh_and_light() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2);
    let floor = dir.path().join("floor.obj");
    std::fs::write(&floor, "v -3 -1 -3\nv 3 -1 -3\nv 3 -1 3\nv -3 -1 3\nf 1 2 3 4\n").unwrap();
    let out = dir.path().join("r");
    let o = octasplat(&[
        "render",
        s(&dir.path().join("splats.ply")),
        s(&dir.path().join("cameras.json")),
        "--out",
        s(&out),
        "--mesh",
        &format!("{}:diffuse", s(&floor)),
        "--light",
        "0,3,0:1,1,1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("00001.png").exists());
}

#[test]
fn missing_ply_exits_1_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1);
    let missing = dir.path().join("nope.ply");
    let o = octasplat(&["render", s(&missing), s(&dir.path().join("cameras.json")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.ply"));
}

#[test]
fn invalid_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1);
    let ply = dir.path().join("splats.ply");
    let out = dir.path().join("m.obj");
    let bad_format = octasplat(&["export", s(&ply), "--format", "stl", "--out", s(&out)]);
    assert_eq!(bad_format.status.code(), Some(2));
    let bad_level = octasplat(&["export", s(&ply), "--format", "obj", "--out", s(&out), "--alpha-level", "1.5"]);
    assert_eq!(bad_level.status.code(), Some(2));
    let bad_mesh = octasplat(&["render", s(&ply), "c.json", "--out", "x", "--mesh", "a.obj:wood"]);
    assert_eq!(bad_mesh.status.code(), Some(2));
}

fn read_vertices(path: &Path) -> Vec<glam::DVec3> {
    octasplat::io::read_exported_polygons(path).unwrap().into_iter().flat_map(|p| p.vertices).collect()
}

#[test]
fn export_reports_counts_and_scales_with_level() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 5);
    let ply = dir.path().join("splats.ply");
    let mut spreads = Vec::new();
    for level in ["0.9", "0.99"] {
        let out = dir.path().join(format!("m{level}.obj"));
        let o = octasplat(&["export", s(&ply), "--format", "obj", "--out", s(&out), "--alpha-level", level]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("wrote 40 vertices and 30 triangles"), "{}", stdout(&o));
        spreads.push(read_vertices(&out));
    }
    let q = |a: f64| octasplat::chi2::chi2_quantile(a).unwrap();
    let ratio = (q(0.9) / q(0.99)).sqrt();
    for k in 0..5 {
        let center = |v: &[glam::DVec3]| 0.5 * (v[8 * k + 2] + v[8 * k + 6]);
        let (small, large) = (&spreads[0], &spreads[1]);
        let d_small = (small[8 * k] - center(small)).length();
        let d_large = (large[8 * k] - center(large)).length();
        assert!((d_small / d_large - ratio).abs() < 1e-9);
    }
    let ply_out = dir.path().join("m.ply");
    let o = octasplat(&["export", s(&ply), "--format", "ply", "--out", s(&ply_out)]);
    assert!(o.status.success());
    assert_eq!(read_vertices(&ply_out).len(), 40);
}

#[test]
fn edit_identity_translate_and_empty_selection() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 4);
    let ply = dir.path().join("splats.ply");
    let original = octasplat::io::load_gs_ply(&ply).unwrap().splats;

    let run = |spec: &str, name: &str| {
        let spec_path = dir.path().join(format!("{name}.json"));
        std::fs::write(&spec_path, spec).unwrap();
        let out = dir.path().join(format!("{name}.ply"));
        let o = octasplat(&["edit", s(&ply), s(&spec_path), "--out", s(&out)]);
        (o, out)
    };

    let (o, out) = run(r#"{"select": {"indices": [0, 1, 2, 3]}}"#, "identity");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("edited 4 splats"));
    for (g, h) in original.iter().zip(octasplat::io::load_gs_ply(&out).unwrap().splats) {
        assert!((g.mean - h.mean).abs().max_element() < 1e-6);
        assert!(g.frame().abs_diff_eq(h.frame(), 1e-6));
        assert!(((g.scales - h.scales) / g.scales).abs().max_element() < 1e-5);
    }

    let (o, out) = run(
        r#"{"select": {"box": {"min": [-9, -9, -9], "max": [9, 9, 9]}}, "translate": [0.5, 0, -1]}"#,
        "shift",
    );
    assert!(o.status.success());
    for (g, h) in original.iter().zip(octasplat::io::load_gs_ply(&out).unwrap().splats) {
        assert!((h.mean - g.mean - glam::DVec3::new(0.5, 0.0, -1.0)).abs().max_element() < 1e-6);
    }

    let (o, _) = run(r#"{"select": {"box": {"min": [50, 50, 50], "max": [60, 60, 60]}}}"#, "empty");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("edited 0 splats"));
    assert!(stderr(&o).contains("matched no splats"));

    let (o, _) = run(r#"{"select": {"indices": [2]}, "linear": [[1e30, 0, 0], [0, 1e-14, 0], [0, 0, 1e-14]]}"#, "squash");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("splat 2"), "{}", stderr(&o));
}

#[test]
fn synthetic_self_fit_stays_at_zero_loss() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.ply");
    let csv = dir.path().join("loss.csv");
    let o = octasplat(&[
        "fit", "--synthetic", "3", "--self-fit", "--iterations", "10", "--width", "16", "--height", "16", "--out",
        s(&out), "--csv", s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let losses: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(losses.len(), 11);
    assert!(losses.iter().all(|&l| l < 1e-10));
}

#[test]
fn fit_from_rendered_targets_improves() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2);
    let (ply, cams) = (dir.path().join("splats.ply"), dir.path().join("cameras.json"));
    let targets = dir.path().join("targets");
    assert!(octasplat(&["render", s(&ply), s(&cams), "--out", s(&targets)]).status.success());
    let csv = dir.path().join("loss.csv");
    let o = octasplat(&[
        "fit", "--synthetic", "2", "--init-splats", "8", "--targets", s(&targets), "--cameras", s(&cams),
        "--iterations", "40", "--out", s(&dir.path().join("fit.ply")), "--csv", s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let psnr: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(psnr.last().unwrap() > psnr.first().unwrap());
}

#[test]
fn fit_with_missing_targets_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1);
    let o = octasplat(&[
        "fit", "--init", s(&dir.path().join("splats.ply")), "--targets", s(&dir.path().join("missing")), "--cameras",
        s(&dir.path().join("cameras.json")), "--out", s(&dir.path().join("o.ply")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn write_png(path: &Path, w: u32, h: u32, f: impl Fn(u32, u32) -> [u8; 3]) {
    let mut img = image::RgbImage::new(w, h);
    for (x, y, p) in img.enumerate_pixels_mut() {
        *p = image::Rgb(f(x, y));
    }
    img.save(path).unwrap();
}

#[test]
fn eval_identical_known_mse_and_mismatched_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b, &c] {
        std::fs::create_dir(d).unwrap();
    }
    let base = |x: u32, y: u32| [(40 + 3 * x) as u8, (60 + 2 * y) as u8, 100];
    write_png(&a.join("0.png"), 16, 16, base);
    write_png(&b.join("0.png"), 16, 16, base);
    // One pixel in four differs by 51/255 = 0.2 in every channel: MSE 0.01.
    write_png(&c.join("0.png"), 16, 16, |x, y| {
        let p = base(x, y);
        if x % 2 == 0 && y % 2 == 0 { p.map(|v| v + 51) } else { p }
    });

    let same = octasplat(&["eval", s(&a), s(&b)]);
    assert!(same.status.success(), "{}", stderr(&same));
    let mean = stdout(&same).lines().find(|l| l.starts_with("mean")).unwrap().to_string();
    let fields: Vec<f64> = mean.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(fields, vec![100.0, 1.0]);

    let known = octasplat(&["eval", s(&a), s(&c)]);
    let row = stdout(&known).lines().find(|l| l.starts_with("0.png")).unwrap().to_string();
    let db: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((db - 20.0).abs() < 1e-3, "{row}");

    write_png(&b.join("1.png"), 16, 16, base);
    assert_eq!(octasplat(&["eval", s(&a), s(&b)]).status.code(), Some(1));
}
