//! Subcommand implementations. Each returns a report fragment; wall-clock
//! times go to a separate [`Timings`] value.

use cayley_ltc::codes::{agreement_kappa, check_expander, dsw_tau_bound, random_ldpc, robustness_tau, LinearCode, TestabilityReport};
use cayley_ltc::decoder::{Decoder, Verdict};
use cayley_ltc::gf2::{BitVector, WeightMode};
use cayley_ltc::ltc::{kappa_theorem, KappaTheorem, SquareCodeInstance};
use cayley_ltc::planner::{delta0_scaling, plan_base_code, plan_family, plan_complex};
use cayley_ltc::spectral::{build_operators, cayley_lambda2, lambda2, Graph, MethodChoice};
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, MorgensternSet};
use crate::instance::{self, Built};
use crate::report::{float12, ratio, RunReport, Status, Timings};
use crate::{derive_seed, CliError, RunOptions};

#[derive(Debug)]
pub struct CommandOutput {
    pub report: RunReport,
    pub csv: Option<String>,
    pub timings: Timings,
}

fn new_report(cfg: &ExperimentConfig, command: &str, opts: &RunOptions) -> RunReport {
    RunReport { name: cfg.name.clone(), command: command.to_string(), seed: opts.seed.unwrap_or(cfg.seed), ..Default::default() }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report fragment serializes")
}

fn rel_distance(c: &LinearCode) -> Result<f64, CliError> {
    Ok(c.distance()?.weight as f64 / c.len() as f64)
}

fn rf(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn structural_checks(built: &Built, report: &mut RunReport) {
    let cx = &built.complex;
    let (n, na, nb) = (cx.num_vertices(), cx.a_size(), cx.b_size());
    report.assert(
        "edge-count",
        2 * cx.num_edges() == (na + nb) * n,
        format!("|X(1)| = {} and (|A|+|B|)|G|/2 = {}/2", cx.num_edges(), (na + nb) * n),
    );
    report.assert(
        "square-count",
        4 * cx.num_squares() == na * nb * n,
        format!("|X(2)| = {} and |A||B||G|/4 = {}/4", cx.num_squares(), na * nb * n),
    );
    let mut bad_degree = 0;
    let mut bad_link = 0;
    for g in 0..n as u32 {
        let mut nbrs: Vec<u32> = (0..na).map(|i| cx.left_neighbor(g, i)).chain((0..nb).map(|j| cx.right_neighbor(g, j))).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        if nbrs.len() != na + nb || nbrs.contains(&g) {
            bad_degree += 1;
        }
        let mut cells = Vec::with_capacity(na * nb);
        let mut ok = true;
        for i in 0..na {
            for j in 0..nb {
                let s = cx.link_cell(g, i, j);
                ok &= cx.corners(s).iter().any(|c| c.vertex == g && c.apos as usize == i && c.bpos as usize == j);
                cells.push(s);
            }
        }
        cells.sort_unstable();
        cells.dedup();
        if !ok || cells.len() != na * nb {
            bad_link += 1;
        }
    }
    report.assert("vertex-degree", bad_degree == 0, format!("{bad_degree} of {n} vertices without |A|+|B| = {} distinct neighbours", na + nb));
    let bad_squares = (0..cx.num_squares() as u32)
        .filter(|&s| {
            let mut v: Vec<u32> = cx.corners(s).iter().map(|c| c.vertex).collect();
            v.sort_unstable();
            v.dedup();
            v.len() != 4
        })
        .count();
    report.assert("square-vertex-distinct", bad_squares == 0, format!("{bad_squares} squares with a repeated vertex"));
    report.assert("link-bijection", bad_link == 0, format!("{bad_link} vertices where A×B does not map bijectively onto the link"));
}

pub fn build(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let mut report = new_report(cfg, "build", opts);
    let (built, bounds) = t.record("construct", || instance::build(cfg))?;
    t.record("structure", || structural_checks(&built, &mut report));
    let (ra, rb) = t.record("lambda2", || instance::lambdas(cfg, &built))?;
    let (ga, gb) = t.record("girth", || {
        (Graph::cayley(&built.group, &built.a).girth(), Graph::cayley(&built.group, &built.b).girth())
    });
    report.check(
        "no-conjugacy",
        Status::Pass,
        format!("certificate {:?}; construction rejects any violating triple", built.complex.tnc_certificate()),
    );
    report.complex = Some(json!({
        "summary": to_value(&built.complex.summary()),
        "provenance": to_value(&built.provenance),
        "morgenstern": bounds.as_ref().map(to_value),
        "girth_a": ga,
        "girth_b": gb,
    }));
    report.spectral = Some(json!({ "lambda_a": to_value(&ra), "lambda_b": to_value(&rb) }));
    Ok(CommandOutput { report, csv: None, timings: t })
}

pub fn spectrum(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let mut report = new_report(cfg, "spectrum", opts);
    let (built, bounds) = t.record("construct", || instance::build(cfg))?;
    let (ra, rb) = t.record("lambda2", || instance::lambdas(cfg, &built))?;
    let mut out = json!({ "lambda_a": to_value(&ra), "lambda_b": to_value(&rb) });
    if let Some(crate::config::GroupSpec::Cyclic { n }) = &cfg.group {
        for (side, set, r) in [("a", &built.a, &ra), ("b", &built.b, &rb)] {
            let exact = cyclic_lambda2(*n, set.elements());
            report.assert(
                "cyclic-spectrum",
                (r.lambda2 - exact).abs() < 1e-9,
                format!("λ({side}) = {} against the character sum {}", float12(r.lambda2), float12(exact)),
            );
        }
    }
    if let (Some(m), Some(bd)) = (&built.morgenstern, &bounds) {
        report.assert(
            "ramanujan-b",
            rb.lambda2 <= bd.ramanujan + 1e-6,
            format!("λ(B) = {} against 2√q/(q+1) = {}", float12(rb.lambda2), float12(bd.ramanujan)),
        );
        let reduce = match cfg.generators.as_ref() {
            Some(crate::config::GeneratorSpec::Morgenstern { a_set, reduce_a_to }) => Some((*a_set, *reduce_a_to)),
            _ => None,
        };
        if let Some((a_set, reduce_to)) = reduce {
            let full = match a_set {
                MorgensternSet::APrime => m.a_prime()?.set,
                MorgensternSet::A => m.a()?.set,
            };
            let rfull = if reduce_to.is_some() {
                cayley_lambda2(&built.group, &full, instance::method(&cfg.caps), instance::lanczos(&cfg.caps, cfg.seed, "lambda_full"))?
            } else {
                ra.clone()
            };
            let (bound, name) = match a_set {
                MorgensternSet::APrime => (bd.a_prime_bound, "3√(2q−1)/(2q)"),
                MorgensternSet::A => (bd.a_bound, "(3q−1)/(q²+q)"),
            };
            report.assert(
                "a-set-expansion",
                rfull.lambda2 <= bound + 1e-6,
                format!("λ(A) = {} against {name} = {}", float12(rfull.lambda2), float12(bound)),
            );
            if let Some(target) = reduce_to {
                let red = cayley_ltc::generators::degree_reduce(&built.group, &full, target, rfull.lambda2)?;
                report.assert(
                    "degree-reduction",
                    ra.lambda2 <= red.bound + 1e-9,
                    format!("reduced to {target}: λ′ = {} against λ + 2|S∖S′|/|S′| = {}", float12(ra.lambda2), float12(red.bound)),
                );
                out["lambda_a_full"] = to_value(&rfull);
                out["reduction_bound"] = json!(red.bound);
            }
        }
        out["morgenstern"] = to_value(bd);
    }
    if cfg.spectrum.complex_walks {
        let ops = t.record("operators", || build_operators(&built.complex));
        let mut walks = Vec::new();
        for op in [&ops.m_a, &ops.m_b, &ops.m, &ops.parallel] {
            let r = t.record(&format!("lambda2 {}", op.name), || {
                lambda2(op, MethodChoice::Iterative, instance::lanczos(&cfg.caps, cfg.seed, &op.name))
            })?;
            walks.push(json!({ "operator": op.name, "report": to_value(&r) }));
        }
        out["walks"] = Value::Array(walks);
    }
    report.spectral = Some(out);
    Ok(CommandOutput { report, csv: None, timings: t })
}

/// Second eigenvalue of Cay(Z_n, S) from the characters k ↦ (1/|S|)Σ cos(2πks/n).
pub fn cyclic_lambda2(n: u32, set: &[u32]) -> f64 {
    let mut vals: Vec<f64> = (0..n)
        .map(|k| {
            set.iter().map(|&s| (2.0 * std::f64::consts::PI * (k as f64) * (s as f64) / n as f64).cos()).sum::<f64>() / set.len() as f64
        })
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals[1]
}

/// Local testability constants for an instance; κ₀ is the exact agreement
/// testability of the local tensor code when the oracle can compute it.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremView {
    pub lambda: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub kappa0: Option<String>,
    pub kappa0_value: Option<f64>,
    pub kappa0_error: Option<String>,
    pub theorem: Option<KappaTheorem>,
    /// (c − λ)/(|A|+|B|)
    pub epsilon0: Option<f64>,
}

impl TheoremView {
    fn applies(&self) -> bool {
        self.theorem.is_some_and(|t| t.condition_holds)
    }

    fn na_reason(&self) -> String {
        match &self.theorem {
            Some(t) => format!("na — hypothesis fails at desk scale (c = {} ≤ λ = {})", float12(t.c), float12(self.lambda)),
            None if self.delta_a.min(self.delta_b) <= self.lambda => format!(
                "na — hypothesis fails at desk scale (c < min δ = {} ≤ λ = {}; κ₀ not computed: {})",
                float12(self.delta_a.min(self.delta_b)),
                float12(self.lambda),
                self.kappa0_error.clone().unwrap_or_default()
            ),
            None => format!("na: κ₀ unavailable: {}", self.kappa0_error.clone().unwrap_or_default()),
        }
    }
}

fn theorem_view(inst: &SquareCodeInstance, lambda: f64) -> Result<TheoremView, CliError> {
    let (na, nb) = (inst.complex().a_size(), inst.complex().b_size());
    let delta_a = rel_distance(inst.code_a())?;
    let delta_b = rel_distance(inst.code_b())?;
    let (k0, err) = match agreement_kappa(inst.code_a(), inst.code_b()) {
        Ok(Some(k)) => (Some(k.kappa), None),
        Ok(None) => (None, Some("tensor code has no non-codeword pairs".to_string())),
        Err(e) => (None, Some(e.to_string())),
    };
    let theorem = k0.map(|k| kappa_theorem(na, nb, delta_a, delta_b, rf(k), lambda));
    Ok(TheoremView {
        lambda,
        delta_a,
        delta_b,
        kappa0: k0.as_ref().map(ratio),
        kappa0_value: k0.map(rf),
        kappa0_error: err,
        epsilon0: theorem.map(|t| (t.c - lambda) / (na + nb) as f64),
        theorem,
    })
}

fn distance_mode(cfg: &ExperimentConfig, dim: usize) -> WeightMode {
    if dim <= cfg.caps.exact_distance_dim {
        WeightMode::Exact { cap: cfg.caps.exact_distance_dim }
    } else {
        WeightMode::Heuristic { iterations: cfg.caps.heuristic_iterations, seed: derive_seed(cfg.seed, "distance", 0) }
    }
}

struct Prepared {
    built: Built,
    inst: SquareCodeInstance,
    lambda: f64,
}

fn prepare(cfg: &ExperimentConfig, t: &mut Timings) -> Result<Prepared, CliError> {
    let (built, _) = t.record("construct", || instance::build(cfg))?;
    let inst = t.record("assemble", || instance::build_instance(cfg, &built))?;
    let (ra, rb) = t.record("lambda2", || instance::lambdas(cfg, &built))?;
    Ok(Prepared { built, inst, lambda: ra.lambda2.max(rb.lambda2) })
}

fn random_word<R: Rng>(n: usize, rng: &mut R) -> BitVector {
    let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    BitVector::from_bools(&bits)
}

pub fn code(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let mut report = new_report(cfg, "code", opts);
    let p = prepare(cfg, &mut t)?;
    let inst = &p.inst;
    let (na, nb) = (p.built.a.len(), p.built.b.len());

    let lt = t.record("lifted_tensor", || inst.lifted_tensor_check());
    report.assert(
        "lifted-tensor",
        lt.equal,
        format!("edge rank {} vertex rank {}, kernels contained both ways: {}", lt.edge_rank, lt.vertex_rank, lt.equal),
    );

    let rb = inst.rate_bounds();
    report.assert("rate-generic", rb.rate >= rb.generic, format!("rate {} ≥ 2(ρ_A+ρ_B)−3 = {}", ratio(&rb.rate), ratio(&rb.generic)));
    report.assert("rate-cover", rb.rate >= rb.cover, format!("rate {} ≥ cover bound {} (cover size {})", ratio(&rb.rate), ratio(&rb.cover), rb.cover_size));
    match rb.bipartite_bound {
        Some(b) => report.assert("rate-bipartite", rb.rate >= b, format!("rate {} ≥ 2ρ_Aρ_B−1 = {}", ratio(&rb.rate), ratio(&b))),
        None => report.check("rate-bipartite", Status::Na, "skeleton is not bipartite"),
    }

    let dr = t.record("distance", || inst.distance_report(p.lambda, Some(distance_mode(cfg, inst.dim()))))?;
    match dr.holds {
        Some(h) => report.assert(
            "distance-bound",
            h,
            format!(
                "{} relative distance {} ≥ δ_Aδ_B(max δ − λ) = {}",
                if dr.exact { "exact" } else { "upper bound on" },
                float12(dr.relative.unwrap_or(0.0)),
                float12(dr.bound)
            ),
        ),
        None => report.check("distance-bound", Status::Na, format!("bound {} is not positive or the code is zero", float12(dr.bound))),
    }

    // tester
    let mut complete = true;
    let mut sound = true;
    let mut queries_ok = true;
    let mut resampled = 0usize;
    let mut zetas = Vec::new();
    let tv = theorem_view(inst, p.lambda)?;
    let mut lt_ok = true;
    let mut lt_checked = 0usize;
    t.record("tester", || -> Result<(), CliError> {
        for k in 0..cfg.tester.codewords {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "tester_codeword", k as u64));
            let f = inst.random_codeword(&mut rng);
            complete &= inst.zeta(&f)? == Ratio::from_integer(0);
            let o = inst.sample_test(&f, derive_seed(cfg.seed, "tester_query", k as u64))?;
            complete &= o.accept;
            queries_ok &= o.queried.len() == na * nb;
        }
        for k in 0..cfg.tester.non_codewords {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "tester_word", k as u64));
            let mut f = random_word(inst.len(), &mut rng);
            while inst.contains(&f) {
                resampled += 1;
                f = random_word(inst.len(), &mut rng);
            }
            let z = inst.zeta(&f)?;
            sound &= z > Ratio::from_integer(0);
            let o = inst.sample_test(&f, derive_seed(cfg.seed, "tester_query_far", k as u64))?;
            queries_ok &= o.queried.len() == na * nb;
            if tv.applies() {
                if let Some(d) = inst.distance_to_code(&f) {
                    lt_checked += 1;
                    lt_ok &= rf(z) + 1e-12 >= tv.theorem.unwrap().kappa * d as f64 / inst.len() as f64;
                }
            }
            zetas.push(ratio(&z));
        }
        Ok(())
    })?;
    report.assert("tester-completeness", complete, format!("ζ = 0 on {} sampled codewords", cfg.tester.codewords));
    report.assert("tester-soundness", sound, format!("ζ > 0 on {} sampled non-codewords", cfg.tester.non_codewords));
    report.assert("tester-queries", queries_ok, format!("every test reads |A||B| = {} bits", na * nb));
    if tv.applies() && lt_checked > 0 {
        report.assert("local-testability", lt_ok, format!("ζ ≥ κ·dist on {lt_checked} words"));
    } else {
        report.check("local-testability", Status::Na, tv.na_reason());
    }

    report.code = Some(json!({
        "n": inst.len(),
        "dim": inst.dim(),
        "rank": inst.rank(),
        "parity_rows": inst.parity_rows(),
        "rate": ratio(&inst.rate()),
        "code_a": { "n": inst.code_a().len(), "dim": inst.code_a().dim(), "rel_distance": tv.delta_a },
        "code_b": { "n": inst.code_b().len(), "dim": inst.code_b().dim(), "rel_distance": tv.delta_b },
        "lifted_tensor": to_value(&lt),
        "rate_bounds": to_value(&rb),
        "distance": to_value(&dr),
    }));
    report.tester = Some(json!({
        "codewords": cfg.tester.codewords,
        "non_codewords": cfg.tester.non_codewords,
        "resampled": resampled,
        "queries": na * nb,
        "zeta_non_codewords": zetas,
    }));
    report.testability = Some(to_value(&tv));
    Ok(CommandOutput { report, csv: None, timings: t })
}

pub fn oracles(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let mut report = new_report(cfg, "oracles", opts);
    let spec = cfg.oracles.clone().unwrap_or_default();
    let mut pairs = Vec::new();
    for (k, [s1, s2]) in spec.pairs.iter().enumerate() {
        let c1 = instance::build_code(s1, cfg.seed, &format!("oracle_{k}_1"))?;
        let c2 = instance::build_code(s2, cfg.seed, &format!("oracle_{k}_2"))?;
        let id = format!("pair {k} ({}x{}, dims {}x{})", c1.len(), c2.len(), c1.dim(), c2.dim());
        match t.record(&format!("oracle {k}"), || TestabilityReport::compute(&c1, &c2)) {
            Ok(r) => {
                match r.kappa_direction {
                    Some(ok) => report.assert("conversion-tau-to-kappa", ok, format!("{id}: κ ≥ κ(τ)")),
                    None => report.check(
                        "conversion-tau-to-kappa",
                        Status::Na,
                        format!("{id}: {}", r.tau_error.clone().or(r.kappa_error.clone()).unwrap_or("no non-codeword".into())),
                    ),
                }
                match r.tau_direction {
                    Some(ok) => report.assert("conversion-kappa-to-tau", ok, format!("{id}: τ ≥ τ(κ)")),
                    None => report.check(
                        "conversion-kappa-to-tau",
                        Status::Na,
                        format!("{id}: {}", r.kappa_error.clone().or(r.tau_error.clone()).unwrap_or("no non-codeword".into())),
                    ),
                }
                pairs.push(to_value(&r));
            }
            Err(e) => {
                report.check("conversion-tau-to-kappa", Status::Na, format!("{id}: {e}"));
                report.check("conversion-kappa-to-tau", Status::Na, format!("{id}: {e}"));
                pairs.push(json!({ "error": e.to_string() }));
            }
        }
    }
    let mut dsw = Vec::new();
    for (k, s) in spec.dsw.iter().enumerate() {
        let partner = instance::build_code(&s.partner, cfg.seed, &format!("dsw_{k}"))?;
        let dp = rel_distance(&partner)?;
        let bound = dsw_tau_bound(s.delta, dp, s.gamma, s.d);
        let mut found = Vec::new();
        t.record(&format!("dsw {k}"), || -> Result<(), CliError> {
            for seed in s.seeds[0]..s.seeds[1] {
                if found.len() == s.count {
                    break;
                }
                let (code, fg) = random_ldpc(s.c, s.d, s.n, seed)?;
                if code.dim() == 0 || !check_expander(&fg, s.delta, s.gamma, cfg.caps.subset_budget)?.is_certified() {
                    continue;
                }
                let Some(tau) = robustness_tau(&code, &partner)? else { continue };
                let ok = rf(tau.tau) + 1e-12 >= bound.bound;
                report.assert(
                    "expander-tensor-robustness",
                    ok,
                    format!("({},{}) LDPC n={} seed {seed}: τ = {} ≥ bound {}", s.c, s.d, s.n, ratio(&tau.tau), float12(bound.bound)),
                );
                found.push(json!({ "seed": seed, "dim": code.dim(), "tau": ratio(&tau.tau) }));
            }
            Ok(())
        })?;
        if found.len() < s.count {
            report.check(
                "expander-tensor-robustness",
                Status::Fail,
                format!("only {} of {} certified instances in seeds {}..{}", found.len(), s.count, s.seeds[0], s.seeds[1]),
            );
        }
        dsw.push(json!({ "spec": { "c": s.c, "d": s.d, "n": s.n, "delta": s.delta, "gamma": s.gamma }, "bound": to_value(&bound), "instances": found }));
    }
    report.oracles = Some(json!({ "pairs": pairs, "dsw": dsw }));
    Ok(CommandOutput { report, csv: None, timings: t })
}

#[derive(Clone, Debug)]
struct Trial {
    trial: usize,
    seed: u64,
    weight: usize,
    zeta: Ratio<u64>,
    dist: Option<usize>,
    verdict: Verdict,
    iters: usize,
    dist_out: Option<usize>,
    initial_delta_holds: bool,
    terminated: bool,
    strict: bool,
    completeness: Option<bool>,
    output_in_code: Option<bool>,
    testability: Option<bool>,
    far_margin: Option<bool>,
}

fn run_trial(inst: &SquareCodeInstance, dec: &Decoder, tv: &TheoremView, master: u64, trial: usize, weight: usize) -> Result<Trial, CliError> {
    let seed = derive_seed(master, "montecarlo", trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = inst.random_codeword(&mut rng);
    let n = inst.len();
    for i in sample(&mut rng, n, weight.min(n)) {
        f.flip(i);
    }
    let o = dec.run(&f)?;
    let dist = inst.distance_to_code(&f);
    let initial = o.iteration_bound as usize;
    let fin = o.final_views.dispute_count();
    let output_in_code = match &o.output {
        Some(f0) => Some(inst.zeta(f0)? == Ratio::from_integer(0)),
        None => None,
    };
    let testability = match (tv.applies(), dist) {
        (true, Some(d)) => Some(rf(o.zeta) + 1e-12 >= tv.theorem.unwrap().kappa * d as f64 / n as f64),
        _ => None,
    };
    let far_margin = match (o.verdict, tv.applies()) {
        (Verdict::Far, true) => Some(rf(o.delta_final) + 1e-12 >= tv.epsilon0.unwrap()),
        _ => None,
    };
    Ok(Trial {
        trial,
        seed,
        weight,
        zeta: o.zeta,
        dist,
        verdict: o.verdict,
        iters: o.iterations,
        dist_out: o.dist,
        initial_delta_holds: o.initial_delta_holds,
        terminated: (o.iterations as u64) <= o.iteration_bound,
        strict: fin + o.iterations <= initial,
        completeness: o.completeness_holds,
        output_in_code,
        testability,
        far_margin,
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Codeword => "codeword",
        Verdict::Far => "far",
    }
}

fn trials_csv(rows: &[Trial], n: usize) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trial", "seed", "weight", "zeta", "dist", "verdict", "iters", "dist_out"])?;
    for r in rows {
        let dist = match r.dist {
            Some(d) => ratio(&Ratio::new(d as u64, n as u64)),
            None => format!("<={}", ratio(&Ratio::new(r.weight as u64, n as u64))),
        };
        let dist_out = r.dist_out.map(|d| ratio(&Ratio::new(d as u64, n as u64))).unwrap_or_else(|| "na".into());
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.weight.to_string(),
            ratio(&r.zeta),
            dist,
            verdict_str(r.verdict).to_string(),
            r.iters.to_string(),
            dist_out,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn summarize<F: Fn(&Trial) -> Option<bool>>(rows: &[Trial], f: F) -> (usize, usize) {
    let mut checked = 0;
    let mut failed = 0;
    for r in rows {
        if let Some(ok) = f(r) {
            checked += 1;
            failed += (!ok) as usize;
        }
    }
    (checked, failed)
}

pub fn montecarlo(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut report = new_report(cfg, "montecarlo", opts);
    let spec = cfg.montecarlo.clone().ok_or_else(|| CliError::Config("montecarlo section missing".into()))?;
    let p = prepare(cfg, &mut t)?;
    let inst = &p.inst;
    let dec = Decoder::new(inst)?;
    let tv = theorem_view(inst, p.lambda)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let rows: Vec<Trial> = t.record("trials", || {
        pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|k| run_trial(inst, &dec, &tv, seed, k, spec.weights[k % spec.weights.len()]))
                .collect::<Result<Vec<_>, _>>()
        })
    })?;
    let csv = trials_csv(&rows, inst.len())?;

    let mut line = |id: &str, (checked, failed): (usize, usize), what: &str| {
        if checked == 0 {
            report.check(id, Status::Na, format!("no applicable trials for {what}"));
        } else {
            report.assert(id, failed == 0, format!("{what}: {failed} failures in {checked} trials"));
        }
    };
    line("decoder-initial-disagreement", summarize(&rows, |r| Some(r.initial_delta_holds)), "Δ(W⁰) ≤ 2ζ(f)");
    line("decoder-termination", summarize(&rows, |r| Some(r.terminated)), "steps ≤ Δ(W⁰)|X(1)|");
    line("decoder-strict-decrease", summarize(&rows, |r| Some(r.strict)), "each step removes a dispute edge");
    line("decoder-completeness", summarize(&rows, |r| r.completeness), "dist(f,f₀) ≤ 4(1+|A|+|B|)ζ(f)");
    line("decoder-output-in-code", summarize(&rows, |r| r.output_in_code), "ζ(f₀) = 0");
    if tv.applies() {
        line("local-testability", summarize(&rows, |r| r.testability), "ζ(f) ≥ κ·dist(f,C)");
        line("far-soundness", summarize(&rows, |r| r.far_margin), "Far ⇒ Δ ≥ (c−λ)/(|A|+|B|)");
    } else {
        report.check("local-testability", Status::Na, tv.na_reason());
        report.check("far-soundness", Status::Na, tv.na_reason());
    }
    let codewords = rows.iter().filter(|r| r.verdict == Verdict::Codeword).count();
    report.montecarlo = Some(json!({
        "trials": spec.trials,
        "weights": spec.weights,
        "n": inst.len(),
        "dim": inst.dim(),
        "codeword_verdicts": codewords,
        "far_verdicts": rows.len() - codewords,
        "exact_distances": rows.iter().filter(|r| r.dist.is_some()).count(),
        "max_iterations": rows.iter().map(|r| r.iters).max().unwrap_or(0),
        "decoded_to_origin": rows.iter().filter(|r| r.dist_out.is_some() && r.dist_out == r.dist).count(),
    }));
    report.testability = Some(to_value(&tv));
    Ok(CommandOutput { report, csv: Some(csv), timings: t })
}

pub fn decode(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut report = new_report(cfg, "decode", opts);
    let spec = cfg.decode.clone().ok_or_else(|| CliError::Config("decode section missing".into()))?;
    let p = prepare(cfg, &mut t)?;
    let inst = &p.inst;
    let f = match (&spec.word, spec.weight) {
        (Some(w), _) => BitVector::parse01(w).map_err(|e| CliError::Config(format!("decode.word: {e}")))?,
        (None, Some(weight)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "decode", 0));
            let mut f = inst.random_codeword(&mut rng);
            for i in sample(&mut rng, inst.len(), weight.min(inst.len())) {
                f.flip(i);
            }
            f
        }
        (None, None) => unreachable!("validated"),
    };
    if f.len() != inst.len() {
        return Err(CliError::Config(format!("decode.word has length {}, expected {}", f.len(), inst.len())));
    }
    let dec = Decoder::new(inst)?;
    let tv = theorem_view(inst, p.lambda)?;

    // full-scan trace, one committed step at a time
    let mut w = dec.init_views(&f)?;
    let initial = w.dispute_count();
    let mut trace = Vec::new();
    let mut strict = true;
    t.record("trace", || {
        while let Some(s) = dec.step(&mut w) {
            let count = w.dispute_count();
            strict &= s.local_after < s.local_before && count < trace.last().map_or(initial, |&(_, c)| c);
            trace.push((s.vertex, count));
        }
    });
    let o = t.record("run", || dec.run(&f))?;
    report.assert("decoder-strict-decrease", strict, format!("{} steps, dispute count {initial} → {}", trace.len(), w.dispute_count()));
    report.assert(
        "decoder-termination",
        trace.len() as u64 <= o.iteration_bound,
        format!("{} steps ≤ Δ(W⁰)|X(1)| = {}", trace.len(), o.iteration_bound),
    );
    report.assert(
        "decoder-incremental-agrees",
        o.iterations == trace.len() && o.final_views == w,
        "incremental run commits the same moves as full scans",
    );
    report.assert(
        "decoder-initial-disagreement",
        o.initial_delta_holds,
        format!("Δ(W⁰) = {} ≤ 2ζ = {}", ratio(&o.delta_initial), ratio(&(o.zeta * 2))),
    );
    let diag = dec.dispute_diagnostics(&o.final_views, tv.kappa0_value);
    match o.verdict {
        Verdict::Codeword => {
            let f0 = o.output.as_ref().expect("codeword verdict carries output");
            report.assert("decoder-output-in-code", inst.zeta(f0)? == Ratio::from_integer(0), "ζ(f₀) = 0");
            report.assert(
                "decoder-completeness",
                o.completeness_holds == Some(true),
                format!("dist(f,f₀) = {} ≤ 4(1+|A|+|B|)ζ = {}", float12(o.dist_relative.unwrap_or(0.0)), float12(o.completeness_bound)),
            );
            report.check("far-soundness", Status::Na, "decoder returned a codeword");
            report.check("dispute-counts", Status::Na, "no dispute edges remain");
        }
        Verdict::Far => {
            report.check("decoder-output-in-code", Status::Na, "decoder returned far");
            report.check("decoder-completeness", Status::Na, "decoder returned far");
            if tv.applies() {
                let eps = tv.epsilon0.unwrap();
                report.assert("far-soundness", rf(o.delta_final) + 1e-12 >= eps, format!("Δ = {} ≥ ε₀ = {}", ratio(&o.delta_final), float12(eps)));
            } else {
                report.check("far-soundness", Status::Na, tv.na_reason());
            }
            report.assert(
                "dispute-counts",
                diag.all_edges_hold,
                format!("{} dispute edges each meet the distance count of their side", diag.edges.len()),
            );
        }
    }
    match (diag.vertex_inequality_asserted, diag.all_vertices_hold) {
        (true, Some(ok)) if o.verdict == Verdict::Far => report.assert("vertex-agreement", ok, "per-vertex agreement inequality at termination"),
        (false, Some(ok)) => report.check("vertex-agreement", Status::Na, format!("|A| ≠ |B|; inequality holds everywhere: {ok}")),
        _ => report.check("vertex-agreement", Status::Na, "not applicable"),
    }
    report.decode = Some(json!({
        "word_weight": f.weight(),
        "outcome": to_value(&o),
        "trace": trace.iter().map(|&(v, c)| json!([v, c])).collect::<Vec<_>>(),
        "dispute_edges": diag.edges.len(),
    }));
    report.testability = Some(to_value(&tv));
    Ok(CommandOutput { report, csv: None, timings: t })
}

pub fn plan(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let mut t = Timings::default();
    let mut report = new_report(cfg, "plan", opts);
    let spec = cfg.plan.clone().ok_or_else(|| CliError::Config("plan section missing".into()))?;
    let mut bases = Vec::new();
    for &r0 in &spec.base_rates {
        let b = plan_base_code(r0)?;
        let c = t.record("plan_complex", || plan_complex(&b));
        report.assert("base-code-hypothesis", b.gamma_exceeds_inverse_c && b.d0_exceeds_c0, format!("r₀ = {r0}: γ₀ > 1/c₀ and d₀ = {} > c₀", b.d0));
        proof_checks(&mut report, &format!("r₀ = {r0}"), &c);
        bases.push(json!({ "base": to_value(&b), "complex": to_value(&c) }));
    }
    let mut full = Vec::new();
    for &r in &spec.rates {
        let fp = t.record("plan_family", || plan_family(r, &spec.group_powers))?;
        report.assert("base-code-hypothesis", fp.base.gamma_exceeds_inverse_c && fp.base.d0_exceeds_c0, format!("r = {r}: d₀ = {}", fp.base.d0));
        proof_checks(&mut report, &format!("r = {r}"), &fp.complex);
        for v in &fp.variants {
            report.assert(
                "final-constants-positive",
                v.distance.is_some() && v.kappa.is_some(),
                format!("r = {r}, constant {}: δ and κ positive", v.constant),
            );
        }
        full.push(to_value(&fp));
    }
    let scaling = delta0_scaling(&spec.scaling);
    report.plan = Some(json!({ "base": bases, "full": full, "scaling": to_value(&scaling) }));
    Ok(CommandOutput { report, csv: None, timings: t })
}

fn proof_checks(report: &mut RunReport, label: &str, c: &cayley_ltc::planner::ComplexPlan) {
    report.assert("plan-d-divisible", c.d_divisible_by_d0, format!("{label}: d₀ | D"));
    report.assert("plan-d-large", c.d_exceeds_half_q, format!("{label}: D > q/2"));
    report.assert("plan-lambda-below-c", c.lambda_below_c_term, format!("{label}: 8D^(-1/2) < κ₀δ₀/(8+κ₀)"));
    report.assert("plan-lambda-below-delta0", c.lambda_below_delta0, format!("{label}: 8D^(-1/2) < δ₀"));
    report.assert("plan-q-admissible", c.q_meets_complex_requirements, format!("{label}: log₂ q = {} with q ≥ max(2d₀², n₀, 17)", float12(c.log2_q)));
}
