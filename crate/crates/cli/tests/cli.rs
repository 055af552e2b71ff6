use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polynomiogram"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

const SMALL: &str = r#"
preset = "hibiscus"
workers = 2
[plan]
count = 400
[grid]
width = 32
height = 32
[output]
image = "out.png"
grid_dump = "out.polygrid"
roots_csv = "roots.csv"
csv_cap = 50
"#;

#[test]
fn roots_of_x2_plus_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["roots", "--", "1", "0", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("re=")).collect();
    assert_eq!(rows.len(), 2);
    let im: Vec<f64> = rows
        .iter()
        .map(|r| r.split_whitespace().nth(1).unwrap()[3..].parse().unwrap())
        .collect();
    assert!((im[0] + 1.0).abs() < 1e-12 && (im[1] - 1.0).abs() < 1e-12, "{text}");
}

#[test]
fn roots_reproduce_cubic_point() {
    let dir = tempfile::tempdir().unwrap();
    for engine in ["companion", "aberth"] {
        let o = run(&["roots", "--engine", engine, "--", "-1", "3", "3", "1"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let mut vals: Vec<(f64, f64)> = text
            .lines()
            .filter(|l| l.starts_with("re="))
            .map(|l| {
                let mut it = l.split_whitespace();
                let re: f64 = it.next().unwrap()[3..].parse().unwrap();
                let im: f64 = it.next().unwrap()[3..].parse().unwrap();
                ((re * 100.0).round() / 100.0, (im * 100.0).round() / 100.0 + 0.0)
            })
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vals, [(-1.63, -1.09), (-1.63, 1.09), (0.26, 0.0)], "{engine}");
    }
}

#[test]
fn roots_from_expressions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["roots", "--term", "2=1", "--term", "0=-t1*t2", "--t1", "2", "--t2", "2,0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let re: Vec<f64> = text
        .lines()
        .filter_map(|l| l.strip_prefix("re="))
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(re.len(), 2);
    assert!((re[0] + 2.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12, "{text}");
}

#[test]
fn degenerate_roots_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["roots", "--", "0", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["roots", "--", "5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["roots", "--", "1", "2t1"], dir.path()).status.code(), Some(2));
}

#[test]
fn render_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = run(&["render", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(value(&text, "samples"), Some("400"));
    assert_eq!(value(&text, "rejected"), Some("0"));
    assert!(value(&text, "dropped_roots").is_some());
    assert!(value(&text, "wall_time_s").is_some());
    assert_eq!(value(&text, "csv_rows"), Some("50"));

    let png = std::fs::read(dir.path().join("out.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");
    let csv = std::fs::read_to_string(dir.path().join("roots.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("re,im,sample_index"));
    assert_eq!(csv.lines().count(), 51);

    let first = std::fs::read(dir.path().join("out.polygrid")).unwrap();
    let o = run(&["render", cfg.to_str().unwrap(), "--workers", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("out.polygrid")).unwrap(), first);
    assert_eq!(value(&stdout(&o), "pixel_hash"), value(&text, "pixel_hash"));

    let o = run(&["render", cfg.to_str().unwrap(), "--seed", "9"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(std::fs::read(dir.path().join("out.polygrid")).unwrap(), first);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMALL.replace("count = 400", "count = 0")).unwrap();
    let o = run(&["render", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("plan.count"));

    std::fs::write(&cfg, SMALL.replace("width = 32", "widht = 32")).unwrap();
    let o = run(&["render", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("widht"));
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["render", "nope.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SMALL.replace("\"out.png\"", "\"missing/dir/out.png\"")).unwrap();
    assert_eq!(run(&["render", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn fusion_preset_renders_twelve_roots() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["preset", "fusion", "--out", "fusion.png"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "roots_offered"), Some("12"));
    assert!(dir.path().join("fusion.png").exists());
}

#[test]
fn preset_config_round_trips_through_render() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["preset", "lucas", "--print-config"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o).replace("width = 1024", "width = 64").replace("height = 1024", "height = 64");
    assert!(text.contains("kind = \"lucas\""));
    std::fs::write(dir.path().join("lucas.toml"), text).unwrap();
    let o = run(&["render", "lucas.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&stdout(&o), "roots_offered"), Some("32"));
    assert_eq!(run(&["preset", "nope", "--print-config"], dir.path()).status.code(), Some(2));
}

#[test]
fn validate_cubic_and_lucas() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "cubic", "--json", "cubic.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("suite=cubic"));
    let json = std::fs::read_to_string(dir.path().join("cubic.json")).unwrap();
    assert!(json.contains("\"pass\": true"));

    let o = run(&["validate", "lucas", "--n", "32"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("validate-lucas.json").exists());
}

#[test]
fn validate_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    // Too few samples for the ring statistics to hold.
    let o = run(&["validate", "kac", "--degree", "4", "--low-degree", "0", "--samples", "20"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn validate_kac_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "kac", "--samples", "2000"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("metric=kac.peak_radius"), "{text}");
    assert!(matches!(o.status.code(), Some(0) | Some(4)));
}
