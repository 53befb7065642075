//! Command-line contract, one line per check. Plain binary, non-zero exit on failure.

use std::path::Path;
use std::process::Command;

const CONFIG: &str = r#"
problem = "linear"
m_target = 1.0
horizon = 0.5
seed = 4
stride = 2
output = "unused"

[geometry]
d = { kind = "rectangle", min = [0.0, 0.0], max = [1.0, 1.0] }
omega = { kind = "rectangle", min = [-1.0, -1.0], max = [2.0, 2.0] }
points = [[1.0, 0.5], [0.0, 0.5]]

[design]
r0 = 0.3
m = 6
enforce_eps = false

[coefficients]
a1 = { kind = "hermitian-rotation", angle = 0.6, contrast = 0.2 }
theta = 0.75

[grid]
nx = 41
ny = 41
dt = 0.05

[fitter]
n_nodes = 64
lambdas = [1e-10]
n_radial = 10
n_angular = 40
domain_weight = 1000.0
domain_h = 0.1

[sweep]
n_nodes = [64]
"#;

fn run(dir: &Path, config: &str, out: &str, args: &[&str]) -> i32 {
    let cfg = dir.join(format!("{out}.toml"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gradamp"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn line(failed: &mut usize, what: &str, ok: bool, detail: String) {
    println!("{} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        *failed += 1;
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut failed = 0;

    let codes: Vec<i32> =
        ["design", "simulate", "verify", "report"].iter().map(|s| run(dir, CONFIG, "a", &[s])).collect();
    line(&mut failed, "pipeline stages exit 0", codes.iter().all(|&c| c == 0), format!("{codes:?}"));

    let n = std::fs::read_dir(dir.join("a/auxiliary")).unwrap().count();
    // ⌊T/(dt·stride)⌋ + 1 = ⌊0.5/0.1⌋ + 1
    line(&mut failed, "snapshot count", n == 6, format!("{n} (expected 6)"));

    for s in ["design", "simulate", "verify"] {
        run(dir, CONFIG, "b", &[s]);
    }
    let same = std::fs::read(dir.join("a/report.json")).unwrap() == std::fs::read(dir.join("b/report.json")).unwrap();
    line(&mut failed, "identical config and seed give identical reports", same, format!("{same}"));

    let bad = CONFIG.replace("theta = 0.75", "theta = 0.75\nl0 = 9");
    let c = run(dir, &bad, "c", &["design"]);
    line(&mut failed, "l0 = 9 rejected before any work", c == 2 && !dir.join("c").exists(), format!("exit {c}"));

    let c = run(dir, CONFIG, "d", &["verify"]);
    line(&mut failed, "missing artifact is a validation error", c == 2, format!("exit {c}"));

    let strict = CONFIG.replace("enforce_eps = false", "enforce_eps = true");
    let c = run(dir, &strict, "e", &["design"]);
    line(&mut failed, "infeasible fit is a numerical failure", c == 3, format!("exit {c}"));

    let c = run(dir, CONFIG, "f", &["sweep", "n_nodes"]);
    let rows = std::fs::read_to_string(dir.join("f/sweep_n_nodes.csv")).map(|s| s.lines().count() - 1).unwrap_or(0);
    line(&mut failed, "single-value sweep gives one row", c == 0 && rows == 1, format!("exit {c}, {rows} rows"));

    println!("{failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
