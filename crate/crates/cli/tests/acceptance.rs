//! End-to-end acceptance run over the shipped configs. Prints one line per
//! criterion and exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use cayley_ltc_cli::config::MonteCarloSpec;
use cayley_ltc_cli::{run_command, write_outputs, CommandOutput, ExperimentConfig, RunOptions, RunReport, Status};
use serde_json::Value;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(cmd: &str, cfg: &ExperimentConfig) -> (CommandOutput, Duration) {
    let t = Instant::now();
    let out = run_command(cmd, cfg, &RunOptions::default()).unwrap_or_else(|e| panic!("{} {cmd}: {e}", cfg.name));
    (out, t.elapsed())
}

fn passes(r: &RunReport, id: &str) -> bool {
    r.status_of(id) == Some(Status::Pass)
}

#[derive(Default)]
struct Criterion {
    problems: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn need(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.problems.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

struct Ledger {
    lines: Vec<(usize, &'static str, bool, String)>,
}

impl Ledger {
    fn record(&mut self, n: usize, title: &'static str, c: Criterion) {
        let ok = c.problems.is_empty();
        let detail = if ok { c.notes.join("; ") } else { c.problems.join("; ") };
        println!("criterion {n:>2} {} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((n, title, ok, detail));
    }
}

const CODE_CONFIGS: [&str; 7] = ["z8-demo", "cyclic12", "dihedral10", "psl2-5", "psl2-16", "psl2-16-reduced", "psl2-16-a"];

fn str_at<'a>(v: &'a Value, path: &[&str]) -> &'a str {
    path.iter().fold(v, |v, k| &v[*k]).as_str().unwrap_or_default()
}

fn f64_at(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or(f64::NAN)
}

/// Rounds a scientific-notation string to `digits` significant digits.
fn sci_round(s: &str, digits: usize) -> String {
    let (m, e) = s.split_once('e').expect("scientific notation");
    let m: f64 = m.parse().unwrap();
    let e: i32 = e.parse().unwrap();
    let r = format!("{:.*e}", digits - 1, m);
    let (rm, re) = r.split_once('e').unwrap();
    let rm = rm.trim_end_matches('0').trim_end_matches('.');
    format!("{rm}e{}", e + re.parse::<i32>().unwrap())
}

fn main() {
    let mut ledger = Ledger { lines: Vec::new() };

    let code_reports: Vec<(&str, RunReport)> = CODE_CONFIGS.iter().map(|n| (*n, run("code", &config(n)).0.report)).collect();

    // 1. Complexes
    let mut c = Criterion::default();
    for name in ["z8-demo", "cyclic12", "dihedral10", "psl2-5", "psl2-16", "psl2-16-reduced"] {
        let (out, t) = run("build", &config(name));
        let r = &out.report;
        for id in ["edge-count", "square-count", "vertex-degree", "square-vertex-distinct", "link-bijection", "no-conjugacy"] {
            c.need(passes(r, id), format!("{name} {id} {:?}", r.status_of(id)));
        }
        c.need(t < Duration::from_secs(60), format!("{name} build took {:.1}s", t.as_secs_f64()));
        let s = &r.complex.as_ref().unwrap()["summary"];
        c.note(format!("{name} V={} E={} Q={} in {:.2}s", s["vertices"], s["edges"], s["squares"], t.as_secs_f64()));
        if name == "z8-demo" {
            c.need(s["vertices"] == 8 && s["edges"] == 16 && s["squares"] == 8, "Z8 counts differ from 8/16/8");
        }
    }
    ledger.record(1, "complex construction", c);

    // 2. Lifted tensor equality
    let mut c = Criterion::default();
    for (name, r) in &code_reports {
        c.need(passes(r, "lifted-tensor"), format!("{name} lifted-tensor {:?}", r.status_of("lifted-tensor")));
    }
    c.note(format!("edge and vertex systems agree on {} instances", code_reports.len()));
    ledger.record(2, "lifted tensor kernel", c);

    // 3. Rate bounds
    let mut c = Criterion::default();
    for (name, r) in &code_reports {
        c.need(passes(r, "rate-generic"), format!("{name} rate-generic"));
        for id in ["rate-cover", "rate-bipartite"] {
            c.need(r.status_of(id) != Some(Status::Fail), format!("{name} {id} failed"));
        }
    }
    let z8 = &code_reports[0].1;
    c.need(passes(z8, "rate-bipartite"), "Z8 rate-bipartite not exercised");
    c.note(format!("Z8 rate {} vs bipartite bound {}", str_at(z8.code.as_ref().unwrap(), &["rate"]), str_at(z8.code.as_ref().unwrap(), &["rate_bounds", "bipartite_bound"])));
    ledger.record(3, "rate lower bounds", c);

    // 4. Distance
    let mut c = Criterion::default();
    let zc = z8.code.as_ref().unwrap();
    let bound = f64_at(zc, &["distance", "bound"]);
    c.need((bound - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12, format!("Z8 bound {bound}"));
    c.need(f64_at(zc, &["distance", "relative"]) == 1.0 && zc["distance"]["exact"] == true, "Z8 exact distance is not 1");
    for (name, r) in &code_reports {
        c.need(r.status_of("distance-bound") != Some(Status::Fail), format!("{name} distance-bound failed"));
    }
    let p16 = &code_reports[4].1;
    c.need(passes(p16, "distance-bound"), "PSL2(16) distance-bound not passing");
    let pc = p16.code.as_ref().unwrap();
    c.note(format!("Z8 1 >= {bound:.6}; PSL2(16) n={} {} >= {:.4}", pc["n"], f64_at(pc, &["distance", "relative"]), f64_at(pc, &["distance", "bound"])));
    ledger.record(4, "distance bound", c);

    // 5. Tester
    let mut c = Criterion::default();
    for (name, r) in &code_reports {
        for id in ["tester-completeness", "tester-soundness", "tester-queries"] {
            c.need(passes(r, id), format!("{name} {id} {:?}", r.status_of(id)));
        }
    }
    c.note(format!("completeness, soundness and |A||B| queries on {} instances", code_reports.len()));
    ledger.record(5, "local tester", c);

    // 6. Local testability
    let mut c = Criterion::default();
    let mut applies = 0;
    for (name, r) in &code_reports {
        match r.status_of("local-testability") {
            Some(Status::Fail) => c.need(false, format!("{name} local-testability failed")),
            Some(Status::Pass) => applies += 1,
            _ => {}
        }
    }
    if applies == 0 {
        let t = z8.testability.as_ref().unwrap();
        c.note(format!(
            "na on all {} instances: hypothesis c > lambda fails (Z8 c={:.4} lambda={:.4})",
            code_reports.len(),
            f64_at(t, &["theorem", "c"]),
            f64_at(t, &["lambda"])
        ));
    } else {
        c.note(format!("verified on {applies} instances"));
    }
    ledger.record(6, "local testability", c);

    // 7. Decoder
    let mut c = Criterion::default();
    let decoder_ids = [
        "decoder-initial-disagreement",
        "decoder-termination",
        "decoder-strict-decrease",
        "decoder-incremental-agrees",
        "decoder-completeness",
        "decoder-output-in-code",
    ];
    let (mc, t) = run("montecarlo", &config("psl2-16"));
    let trials = mc.report.montecarlo.as_ref().unwrap()["trials"].as_u64().unwrap_or(0);
    c.need(trials >= 10_000, format!("only {trials} trials"));
    c.need(t < Duration::from_secs(300), format!("PSL2(16) Monte Carlo took {:.1}s", t.as_secs_f64()));
    for id in decoder_ids.iter().chain(&["far-soundness"]) {
        c.need(mc.report.status_of(id) != Some(Status::Fail), format!("PSL2(16) {id} failed"));
    }
    for id in decoder_ids.iter().filter(|id| **id != "decoder-incremental-agrees") {
        c.need(passes(&mc.report, id), format!("PSL2(16) {id} not exercised"));
    }
    let dec = run("decode", &config("psl2-16")).0.report;
    for id in decoder_ids {
        c.need(passes(&dec, id), format!("PSL2(16) decode {id} {:?}", dec.status_of(id)));
    }
    let m = mc.report.montecarlo.as_ref().unwrap();
    c.note(format!("PSL2(16) {trials} trials in {:.1}s, far {}", t.as_secs_f64(), m["far_verdicts"]));
    for name in ["z8-demo", "cyclic12", "dihedral10", "psl2-5"] {
        let r = run("montecarlo", &config(name)).0.report;
        c.need(r.failures() == 0, format!("{name} montecarlo has {} failures", r.failures()));
    }
    let mut zcfg = config("z8-demo");
    zcfg.montecarlo = Some(MonteCarloSpec { trials: 20, weights: vec![0, 1] });
    let zout = run("montecarlo", &zcfg).0;
    let mut rows = csv::Reader::from_reader(zout.csv.as_deref().unwrap().as_bytes());
    let mut seen = [0usize; 2];
    for row in rows.records() {
        let row = row.unwrap();
        let (w, zeta, verdict, dist_out) = (&row[2], &row[3], &row[5], &row[7]);
        match w {
            "0" => {
                seen[0] += 1;
                c.need((zeta, verdict, dist_out) == ("0", "codeword", "0"), format!("Z8 weight-0 row {row:?}"));
            }
            "1" => {
                seen[1] += 1;
                c.need((zeta, verdict, dist_out) == ("1/2", "codeword", "1/8"), format!("Z8 weight-1 row {row:?}"));
            }
            _ => c.need(false, format!("unexpected weight {w}")),
        }
    }
    c.need(seen == [10, 10], format!("Z8 rows {seen:?}"));
    let far = run("decode", &config("z8-far")).0.report;
    c.need(passes(&far, "dispute-counts") && far.failures() == 0, "Z8 far word checks");
    c.need(str_at(far.decode.as_ref().unwrap(), &["outcome", "verdict"]) == "far", "Z8 far word not rejected");
    c.note("Z8 rows zeta 1/2 -> codeword at 1/8, weight 0 fixed, far word rejected");
    ledger.record(7, "decoder", c);

    // 8. Testability oracles
    let mut c = Criterion::default();
    let or = run("oracles", &config("oracles")).0.report;
    let o = or.oracles.as_ref().unwrap();
    c.need(o["pairs"][0]["tau"]["tau"] == "1/2", "rep2 x rep2 tau");
    c.need(o["pairs"][0]["kappa"]["kappa"] == "1/2", "rep2 x rep2 kappa");
    let pairs = o["pairs"].as_array().unwrap();
    let both = pairs.iter().filter(|p| p["tau_direction"] == true && p["kappa_direction"] == true).count();
    c.need(both >= 10, format!("only {both} pairs checked in both directions"));
    for id in ["conversion-tau-to-kappa", "conversion-kappa-to-tau", "expander-tensor-robustness"] {
        c.need(passes(&or, id), format!("{id} {:?}", or.status_of(id)));
    }
    let dsw = or.checks.iter().filter(|k| k.id == "expander-tensor-robustness" && k.status == Status::Pass).count();
    c.need(dsw >= 3, format!("{dsw} robustness instances"));
    c.note(format!("rep2 x rep2 tau=kappa=1/2; {both} pairs both directions; {dsw} expander instances"));
    ledger.record(8, "testability oracles", c);

    // 9. Spectra
    let mut c = Criterion::default();
    let zs = run("spectrum", &config("z8-demo")).0.report;
    c.need(passes(&zs, "cyclic-spectrum"), "Z8 cyclic-spectrum");
    let zl = f64_at(zs.spectral.as_ref().unwrap(), &["lambda_a", "lambda2"]);
    c.need((zl - (std::f64::consts::PI / 4.0).cos()).abs() < 1e-9, format!("Z8 lambda {zl}"));
    let (ps, t) = run("spectrum", &config("psl2-16-spectrum"));
    for id in ["ramanujan-b", "a-set-expansion"] {
        c.need(passes(&ps.report, id), format!("PSL2(16) {id} {:?}", ps.report.status_of(id)));
    }
    let dense: f64 = ps.timings.stages.iter().filter(|(s, _)| s == "lambda2").map(|(_, v)| v).sum();
    c.need(dense / 2.0 < 120.0, format!("dense solves took {dense:.1}s for two"));
    let rs = run("spectrum", &config("psl2-16-reduced")).0.report;
    c.need(passes(&rs, "degree-reduction"), "degree-reduction");
    let sp = ps.report.spectral.as_ref().unwrap();
    c.note(format!(
        "Z8 {zl:.6}; PSL2(16) B {:.6} A' {:.6}, two dense solves in {dense:.1}s, command {:.1}s",
        f64_at(sp, &["lambda_b", "lambda2"]),
        f64_at(sp, &["lambda_a", "lambda2"]),
        t.as_secs_f64()
    ));
    ledger.record(9, "spectral checks", c);

    // 10. Planner
    let mut c = Criterion::default();
    let pr = run("plan", &config("plan")).0.report;
    let p = pr.plan.as_ref().unwrap();
    let expect = [(0.5, 14, "1.06165e-89", "3.56126e-271"), (0.875, 56, "2.41391e-102", "1.04656e-309")];
    for (i, (r0, d0, delta0, kappa0)) in expect.iter().enumerate() {
        let b = &p["base"][i]["base"];
        c.need(b["c0"] == 7 && f64_at(b, &["gamma0"]) == 0.15, format!("base {i} c0/gamma0 {} {}", b["c0"], b["gamma0"]));
        c.need(f64_at(b, &["r0"]) == *r0 && b["d0"] == *d0, format!("base {i} r0/d0 {} {}", b["r0"], b["d0"]));
        c.need(sci_round(str_at(b, &["delta0"]), 6) == *delta0, format!("delta0 {}", b["delta0"]));
        c.need(sci_round(str_at(b, &["kappa0"]), 6) == *kappa0, format!("kappa0 {}", b["kappa0"]));
    }
    for k in pr.checks.iter().filter(|k| k.id.starts_with("plan-") || k.id == "base-code-hypothesis" || k.id == "final-constants-positive") {
        c.need(k.status == Status::Pass, format!("{} {:?}", k.id, k.status));
    }
    c.need(pr.failures() == 0, "plan failures");
    c.note(format!("d0=14 c0=7 gamma0=0.15 delta0={} kappa0={}", expect[0].2, expect[0].3));
    ledger.record(10, "parameter planner", c);

    // 11. Reproducibility
    let mut c = Criterion::default();
    let mut p16 = config("psl2-16");
    p16.montecarlo.as_mut().unwrap().trials = 300;
    for (name, cfg) in [("z8-demo", config("z8-demo")), ("psl2-5", config("psl2-5")), ("psl2-16", p16)] {
        let a = run_command("montecarlo", &cfg, &RunOptions { seed: None, threads: Some(1) }).unwrap();
        let b = run_command("montecarlo", &cfg, &RunOptions { seed: None, threads: Some(4) }).unwrap();
        c.need(a.report.to_json() == b.report.to_json(), format!("{name} report differs"));
        c.need(a.csv == b.csv, format!("{name} csv differs"));
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_outputs(da.path(), &a).unwrap();
        write_outputs(db.path(), &b).unwrap();
        for f in ["montecarlo.json", "montecarlo.csv"] {
            let x = std::fs::read(da.path().join(f)).unwrap();
            let y = std::fs::read(db.path().join(f)).unwrap();
            c.need(x == y, format!("{name} {f} bytes differ"));
        }
    }
    c.note("report and CSV bytes identical across runs with 1 and 4 threads");
    ledger.record(11, "reproducibility", c);

    let failed: Vec<_> = ledger.lines.iter().filter(|l| !l.2).map(|l| format!("{} {}: {}", l.0, l.1, l.3)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
