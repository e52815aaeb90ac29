//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! here. Exits non-zero when any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use common::{mapk, mapk_net, net_of, random_document, MAPK_POOLS};
use pfa_core::biopepa::{check_output, generate, map_arcs_for_entity, render};
use pfa_core::expr::{eval, resolve_text};
use pfa_core::model::{Arc, ArcType, Document, EntityPoolNode, EpnType, ProcessNode, ProcessType};
use pfa_core::sbgntext::{parse, print};
use pfa_core::sim::{
    auto_horizon, run, EnsembleStats, Method, ReactionNetwork, RunOptions, Trace, Watch,
};
use rayon::prelude::*;

const GOLDEN: &str = include_str!("golden/mapk.biopepa");
const OUTPUT: &str = "m_MAPK_PP";
const MAPK_TOTAL: f64 = 7500.0;
/// Paper's simulations use Gibson-Bruck.
const PAPER_METHOD: Method = Method::GibsonBruck;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Conservation bookkeeping shared by every MAPK run.
struct Ledger {
    ssa_checks: AtomicU64,
    ssa_violations: AtomicU64,
    negative: AtomicU64,
    ode_checks: AtomicU64,
    ode_violations: AtomicU64,
    worst_ode_rel: std::sync::Mutex<f64>,
}

impl Ledger {
    fn new() -> Self {
        Ledger {
            ssa_checks: AtomicU64::new(0),
            ssa_violations: AtomicU64::new(0),
            negative: AtomicU64::new(0),
            ode_checks: AtomicU64::new(0),
            ode_violations: AtomicU64::new(0),
            worst_ode_rel: std::sync::Mutex::new(0.0),
        }
    }
}

struct Pools(Vec<(Vec<usize>, f64)>);

impl Pools {
    fn of(net: &ReactionNetwork) -> Self {
        Pools(
            MAPK_POOLS
                .iter()
                .map(|(ids, t)| {
                    (
                        ids.iter().map(|s| net.species_index(s).unwrap()).collect(),
                        *t,
                    )
                })
                .collect(),
        )
    }

    fn check_ssa(&self, x: &[f64], ledger: &Ledger) {
        ledger.ssa_checks.fetch_add(1, Ordering::Relaxed);
        if self
            .0
            .iter()
            .any(|(idx, t)| idx.iter().map(|&i| x[i]).sum::<f64>() != *t)
        {
            ledger.ssa_violations.fetch_add(1, Ordering::Relaxed);
        }
        if x.iter().any(|&v| v < 0.0) {
            ledger.negative.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Returns the worst relative deviation.
    fn check_ode(&self, x: &[f64], ledger: &Ledger) -> f64 {
        ledger.ode_checks.fetch_add(1, Ordering::Relaxed);
        let worst = self
            .0
            .iter()
            .map(|(idx, t)| ((idx.iter().map(|&i| x[i]).sum::<f64>() - t) / t).abs())
            .fold(0.0, f64::max);
        if worst > 1e-6 {
            ledger.ode_violations.fetch_add(1, Ordering::Relaxed);
        }
        worst
    }
}

/// Result of one MAPK replica.
struct Replica {
    seed: u64,
    signal: Option<f64>,
    max_output: f64,
    /// Dropped below 25 % of the pool after first exceeding 75 %.
    switched_back: bool,
}

/// Stochastic MAPK replicas with full conservation checking. With `stop`
/// a replica ends once the whole pool is MAPK_PP.
fn mapk_replicas(e1: f64, seeds: &[u64], t_end: f64, stop: bool, ledger: &Ledger) -> Vec<Replica> {
    let net = mapk_net(e1);
    let out = net.species_index(OUTPUT).unwrap();
    let pools = Pools::of(&net);
    seeds
        .par_iter()
        .map(|&seed| {
            let opts = RunOptions {
                t_end,
                output_interval: f64::INFINITY,
                watch: Some(Watch {
                    species: out,
                    level: MAPK_TOTAL,
                    stop,
                }),
            };
            let mut max_output: f64 = 0.0;
            let (mut high, mut switched_back) = (false, false);
            let trace = run(&net, PAPER_METHOD, seed, &opts, &mut |_, x| {
                pools.check_ssa(x, ledger);
                max_output = max_output.max(x[out]);
                high |= x[out] >= 0.75 * MAPK_TOTAL;
                switched_back |= high && x[out] <= 0.25 * MAPK_TOTAL;
            })
            .unwrap_or_else(|e| panic!("E1={e1} seed {seed}: {e}"));
            Replica {
                seed,
                signal: trace.crossing,
                max_output,
                switched_back,
            }
        })
        .collect()
}

fn stats(t_end: f64, reps: &[Replica]) -> EnsembleStats {
    EnsembleStats::from_times(t_end, reps.iter().map(|r| (r.seed, r.signal)).collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.4}"))
}

fn horizon(e1: f64) -> (f64, Option<f64>) {
    let h = auto_horizon(&mapk_net(e1), OUTPUT).unwrap();
    (h.t_end, h.ode_signalling_time)
}

// ---- criteria ----

fn c1_propensity_unit() -> Outcome {
    let doc = parse(
        r#"
        entity E { type: Macromolecule count: 20 }
        entity S { type: Macromolecule count: 150 }
        entity P { type: Macromolecule count: 0 }
        process R { type: Process reversible: false
            rate: "<par: enz.kcat> * <ent: enz> * <ent: sub> / (<par: enz.Km> + <ent: sub>)" }
        arc { kind: Consumption entity: S process: R ref: sub }
        arc { kind: Production entity: P process: R }
        arc { kind: Stimulation entity: E process: R ref: enz params { kcat = 10 Km = 300 } }
        "#,
    )
    .unwrap();
    let p = &doc.processes["R"];
    let r = resolve_text(&p.propensity_forward, p, &doc).unwrap();
    let state = BTreeMap::from([("E".to_string(), 20.0), ("S".to_string(), 150.0)]);
    let params: BTreeMap<String, f64> = pfa_core::biopepa::gen_parameters(&doc)
        .unwrap()
        .into_iter()
        .collect();
    let got = eval(&r, &state, &params).unwrap();
    let want = 10.0 * 20.0 * 150.0 / (300.0 + 150.0);
    outcome(
        (got - want).abs() < 1e-9,
        format!("eval = {got:.10}, hand value {want:.10}, tol 1e-9"),
    )
}

fn c2_arc_mapping() -> Outcome {
    let mut bad = Vec::new();
    for &kind in ArcType::ALL {
        let mut doc = Document::new();
        doc.add_entity(EntityPoolNode {
            id: "X".into(),
            epn_type: EpnType::Macromolecule,
            initial_molecule_count: Some(1.0),
            compartment: None,
        })
        .unwrap();
        let reversible = kind.is_reversible_only();
        doc.add_process(ProcessNode {
            id: "p".into(),
            process_type: ProcessType::Process,
            reversible,
            propensity_forward: "1".into(),
            propensity_backward: reversible.then(|| "1".into()),
        })
        .unwrap();
        doc.add_arc(Arc {
            arc_id: "a".into(),
            manual_equation_arc_id: None,
            arc_type: kind,
            entity: "X".into(),
            process: "p".into(),
            stoichiometry: 3,
        })
        .unwrap();
        let got: Vec<String> = map_arcs_for_entity(&doc, "X")
            .unwrap()
            .iter()
            .map(|t| format!("({}, {}) {}", t.reaction, t.stoichiometry, t.op))
            .collect();
        let want: &[&str] = match kind {
            ArcType::Consumption => &["(p, 3) <<"],
            ArcType::Production => &["(p, 3) >>"],
            ArcType::Modulation | ArcType::NecessaryStimulation => &["(p, 1) (.)"],
            ArcType::Stimulation | ArcType::Catalysis => &["(p, 1) (+)"],
            ArcType::Inhibition => &["(p, 1) (-)"],
            ArcType::LeftHandSide => &["(p_F, 3) <<", "(p_B, 3) >>"],
            ArcType::RightHandSide => &["(p_F, 3) >>", "(p_B, 3) <<"],
        };
        if got != want {
            bad.push(format!("{kind}: {got:?}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} arc types checked; mismatches: {bad:?}",
            ArcType::ALL.len()
        ),
    )
}

fn c3_round_trip() -> Outcome {
    let started = Instant::now();
    let mut docs = vec![mapk()];
    docs.extend((0..50).map(random_document));
    let mut failures = 0;
    for d in &docs {
        let text = print(d);
        let ok = match parse(&text) {
            Ok(back) => &back == d && print(&back) == text,
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }
    let took = started.elapsed();
    outcome(
        failures == 0 && took < Duration::from_secs(1),
        format!(
            "{} documents, {failures} failures, {took:.2?} (budget 1 s)",
            docs.len()
        ),
    )
}

fn c4_codegen() -> Outcome {
    let started = Instant::now();
    let text = render(&generate(&mapk()).unwrap());
    let diags = check_output(&text);
    let took = started.elapsed();
    outcome(
        diags.is_empty() && text == GOLDEN && took < Duration::from_secs(1),
        format!(
            "self-check diagnostics {}, golden match {}, {took:.2?} (budget 1 s)",
            diags.len(),
            text == GOLDEN
        ),
    )
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn c5_ssa_exactness() -> Outcome {
    let started = Instant::now();
    let birth = net_of(
        r#"
        entity Z { type: Source }
        entity A { type: SimpleChemical count: 0 }
        process make { type: Process reversible: false rate: "<par: z.k>" }
        arc { kind: Consumption entity: Z process: make ref: z params { k = 1 } }
        arc { kind: Production entity: A process: make }
        "#,
    );
    let n0 = 20;
    let death = net_of(&format!(
        r#"
        entity A {{ type: SimpleChemical count: {n0} }}
        entity Gone {{ type: Sink }}
        process die {{ type: Process reversible: false rate: "<par: a.k> * <ent: a>" }}
        arc {{ kind: Consumption entity: A process: die ref: a params {{ k = 1 }} }}
        arc {{ kind: Production entity: Gone process: die }}
        "#
    ));
    let replicas: Vec<u64> = (1..=1000).collect();
    // A(10) ~ Poisson(10)
    let poisson_mean = 10.0;
    let poisson_se = (10.0f64 / 1000.0).sqrt();
    // extinction time = sum of Exp(i), i = 1..n0
    let ext_mean: f64 = (1..=n0).map(|i| 1.0 / i as f64).sum();
    let ext_se = ((1..=n0).map(|i| 1.0 / (i * i) as f64).sum::<f64>() / 1000.0).sqrt();

    let mut parts = Vec::new();
    let mut pass = true;
    for m in [Method::Direct, Method::GibsonBruck] {
        let counts: Vec<f64> = replicas
            .par_iter()
            .map(|&s| {
                run(
                    &birth,
                    m,
                    s,
                    &RunOptions::new(10.0, f64::INFINITY),
                    &mut |_, _| {},
                )
                .unwrap()
            })
            .map(|t: Trace| t.last().unwrap()[0])
            .collect();
        let ends: Vec<f64> = replicas
            .par_iter()
            .map(|&s| {
                run(
                    &death,
                    m,
                    s,
                    &RunOptions::new(1e9, f64::INFINITY),
                    &mut |_, _| {},
                )
                .unwrap()
            })
            .map(|t: Trace| {
                assert_eq!(t.last().unwrap()[0], 0.0);
                t.end_time()
            })
            .collect();
        let (pm, _) = mean_se(&counts);
        let (em, _) = mean_se(&ends);
        let ok_p = (pm - poisson_mean).abs() <= 3.0 * poisson_se;
        let ok_e = (em - ext_mean).abs() <= 3.0 * ext_se;
        pass &= ok_p && ok_e;
        parts.push(format!(
            "{m}: Poisson mean {pm:.4} vs 10 +/- {:.4}, extinction mean {em:.4} vs {ext_mean:.4} +/- {:.4}",
            3.0 * poisson_se,
            3.0 * ext_se
        ));
    }
    let took = started.elapsed();
    pass &= took < Duration::from_secs(30);
    outcome(
        pass,
        format!("{}; {took:.2?} (budget 30 s)", parts.join("; ")),
    )
}

/// Criterion 6 and the ODE-tracking invariant share these runs.
fn c6_method_agreement(ledger: &Ledger) -> (Outcome, Outcome) {
    let started = Instant::now();
    let e1 = 100.0;
    let net = mapk_net(e1);
    let out = net.species_index(OUTPUT).unwrap();
    let pools = Pools::of(&net);
    let checkpoints = [2.0, 5.0, 10.0];
    let opts = RunOptions::new(10.0, 1.0);
    let sample = |m: Method, seeds: std::ops::RangeInclusive<u64>| -> Vec<Vec<f64>> {
        seeds
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&s| {
                let t = run(&net, m, s, &opts, &mut |_, x| pools.check_ssa(x, ledger)).unwrap();
                checkpoints
                    .iter()
                    .map(|c| t.rows[t.times.iter().position(|x| x == c).unwrap()][out])
                    .collect()
            })
            .collect()
    };
    let direct = sample(Method::Direct, 1..=200);
    let gb = sample(Method::GibsonBruck, 1001..=1200);
    let ode = run(&net, Method::Ode { dt: 0.01 }, 0, &opts, &mut |_, x| {
        let w = pools.check_ode(x, ledger);
        let mut worst = ledger.worst_ode_rel.lock().unwrap();
        *worst = worst.max(w);
    })
    .unwrap();

    let mut pass = true;
    let mut track = true;
    let mut parts = Vec::new();
    let mut ode_parts = Vec::new();
    for (k, c) in checkpoints.iter().enumerate() {
        let col = |v: &[Vec<f64>]| v.iter().map(|r| r[k]).collect::<Vec<_>>();
        let (md, sd) = mean_se(&col(&direct));
        let (mg, sg) = mean_se(&col(&gb));
        let tol = 3.0 * (sd * sd + sg * sg).sqrt();
        pass &= (md - mg).abs() <= tol;
        parts.push(format!(
            "t={c}: {md:.1} vs {mg:.1} (|d| {:.1} <= {tol:.1})",
            (md - mg).abs()
        ));
        let ode_v = ode.rows[ode.times.iter().position(|x| x == c).unwrap()][out];
        let pooled = (md + mg) / 2.0;
        track &= (pooled - ode_v).abs() <= 0.05 * MAPK_TOTAL;
        ode_parts.push(format!("t={c}: SSA {pooled:.1} ODE {ode_v:.1}"));
    }
    let took = started.elapsed();
    pass &= took < Duration::from_secs(300);
    (
        outcome(
            pass,
            format!(
                "E1=100, 200 seeds each; {}; {took:.1?} (budget 5 min)",
                parts.join(", ")
            ),
        ),
        outcome(
            track,
            format!("E1=100, tol 5% of pool = 375; {}", ode_parts.join(", ")),
        ),
    )
}

fn c7_off_below(ledger: &Ledger) -> Outcome {
    let (t_end, ode_t) = horizon(19.0);
    let seeds: Vec<u64> = (1..=10).collect();
    let reps = mapk_replicas(19.0, &seeds, t_end, false, ledger);
    let off = reps
        .iter()
        .filter(|r| r.max_output < 0.05 * MAPK_TOTAL)
        .count();
    let maxes: Vec<String> = reps.iter().map(|r| format!("{}", r.max_output)).collect();
    outcome(
        off >= 9,
        format!(
            "E1=19, horizon {t_end} s (ODE signalling {}); {off}/10 seeds stay below 375; max MAPK_PP per seed [{}]",
            fmt_opt(ode_t),
            maxes.join(", ")
        ),
    )
}

fn c8_full_activation(e21: &EnsembleStats, t_end: f64, ode_t: Option<f64>) -> Outcome {
    let first10 = EnsembleStats::from_times(t_end, e21.times[..10].to_vec());
    let all = first10.reached() == 10;
    let spread = first10.cv.is_some_and(|cv| cv > 0.05);
    outcome(
        all && spread,
        format!(
            "E1=21, horizon {t_end} s (ODE signalling {}); {}/10 seeds reach 7500; CV {} (need > 0.05)",
            fmt_opt(ode_t),
            first10.reached(),
            fmt_opt(first10.cv)
        ),
    )
}

fn c9_noise_reduction(e21: &EnsembleStats, e100: &EnsembleStats) -> Outcome {
    let pass = match (e21.cv, e100.cv, e21.mean, e100.mean) {
        (Some(c21), Some(c100), Some(m21), Some(m100)) => c100 < c21 && m100 <= m21,
        _ => false,
    };
    outcome(
        pass,
        format!(
            "20 seeds each; E1=21: reached {}/20, mean {}, CV {}; E1=100: reached {}/20, mean {}, CV {}",
            e21.reached(),
            fmt_opt(e21.mean),
            fmt_opt(e21.cv),
            e100.reached(),
            fmt_opt(e100.mean),
            fmt_opt(e100.cv)
        ),
    )
}

fn c10_switching(e21: &EnsembleStats, ledger: &Ledger) -> Outcome {
    // 5x the E1=21 mean signalling time; the auto horizon when that mean is undefined
    let (t_end, note) = match e21.mean {
        Some(m) => (5.0 * m, "5 x E1=21 mean".to_string()),
        None => (
            horizon(20.0).0,
            "E1=21 mean undefined, auto horizon used".to_string(),
        ),
    };
    let seeds: Vec<u64> = (1..=10).collect();
    let reps = mapk_replicas(20.0, &seeds, t_end, false, ledger);
    let flips = reps.iter().filter(|r| r.switched_back).count();
    let max = reps.iter().map(|r| r.max_output).fold(0.0, f64::max);
    outcome(
        flips >= 1,
        format!(
            "E1=E2=20, horizon {t_end} s ({note}); {flips}/10 seeds go above 5625 then below 1875; highest MAPK_PP seen {max}"
        ),
    )
}

fn c11_conservation(ledger: &Ledger) -> Outcome {
    // ODE traces over each horizon used above
    for e1 in [19.0, 20.0, 21.0, 100.0] {
        let net = mapk_net(e1);
        let pools = Pools::of(&net);
        let (t_end, _) = horizon(e1);
        run(
            &net,
            Method::Ode { dt: 0.01 },
            0,
            &RunOptions::new(t_end, 1.0),
            &mut |_, x| {
                let w = pools.check_ode(x, ledger);
                let mut worst = ledger.worst_ode_rel.lock().unwrap();
                *worst = worst.max(w);
            },
        )
        .unwrap();
    }
    let ssa = ledger.ssa_checks.load(Ordering::Relaxed);
    let ssa_bad = ledger.ssa_violations.load(Ordering::Relaxed);
    let neg = ledger.negative.load(Ordering::Relaxed);
    let ode = ledger.ode_checks.load(Ordering::Relaxed);
    let ode_bad = ledger.ode_violations.load(Ordering::Relaxed);
    let worst = *ledger.worst_ode_rel.lock().unwrap();
    outcome(
        ssa > 0 && ode > 0 && ssa_bad + neg + ode_bad == 0,
        format!(
            "{ssa} SSA states: {ssa_bad} pool violations, {neg} negative; {ode} ODE states: {ode_bad} beyond 1e-6 (worst {worst:.2e})"
        ),
    )
}

fn c12_ode_accuracy() -> Outcome {
    let net = net_of(
        r#"
        entity A { type: SimpleChemical count: 100 }
        entity B { type: SimpleChemical count: 0 }
        process d { type: Process reversible: false rate: "<par: a.k> * <ent: a>" }
        arc { kind: Consumption entity: A process: d ref: a params { k = 0.1 } }
        arc { kind: Production entity: B process: d }
        "#,
    );
    let t = run(
        &net,
        Method::Ode { dt: 0.01 },
        0,
        &RunOptions::new(10.0, 10.0),
        &mut |_, _| {},
    )
    .unwrap();
    let got = t.last().unwrap()[0];
    let want = 100.0 * (-1.0f64).exp();
    let rel = ((got - want) / want).abs();
    outcome(
        rel < 1e-4,
        format!("A(10) = {got:.8}, exact {want:.8}, rel err {rel:.2e} (tol 1e-4)"),
    )
}

fn main() {
    let started = Instant::now();
    let ledger = Ledger::new();
    let mut results: Vec<(&str, &str, Outcome)> = Vec::new();
    let mut report = |id: &'static str, name: &'static str, o: Outcome| {
        println!(
            "[{}] {id:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };

    report("1", "propensity unit check", c1_propensity_unit());
    report(
        "2",
        "arc type to Bio-PEPA operator mapping",
        c2_arc_mapping(),
    );
    report("3", "parse/print round trip", c3_round_trip());
    report("4", "self-consistent code generation", c4_codegen());
    report("5", "SSA exactness oracles", c5_ssa_exactness());
    let (c6, ode_track) = c6_method_agreement(&ledger);
    report("6", "direct vs Gibson-Bruck agreement", c6);
    report("7", "cascade stays off when E1 < E2", c7_off_below(&ledger));

    let (h21, ode21) = horizon(21.0);
    let seeds: Vec<u64> = (1..=20).collect();
    let e21 = stats(h21, &mapk_replicas(21.0, &seeds, h21, true, &ledger));
    report(
        "8",
        "full activation with noisy timing at E1=21",
        c8_full_activation(&e21, h21, ode21),
    );
    let (h100, _) = horizon(100.0);
    let e100 = stats(h100, &mapk_replicas(100.0, &seeds, h100, true, &ledger));
    report(
        "9",
        "strong input reduces timing noise",
        c9_noise_reduction(&e21, &e100),
    );
    report("10", "switching when E1 = E2", c10_switching(&e21, &ledger));
    report(
        "11",
        "conservation and non-negativity",
        c11_conservation(&ledger),
    );
    report(
        "12",
        "ODE accuracy on exponential decay",
        c12_ode_accuracy(),
    );
    report("-", "invariant: ODE tracks SSA ensemble mean", ode_track);

    let failed: Vec<&str> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1?}{}",
        results.len() - failed.len(),
        results.len(),
        started.elapsed(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
