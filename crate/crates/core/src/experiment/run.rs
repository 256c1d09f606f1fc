//! End-to-end scenario runs: solve, build the generator, simulate, analyze, gate.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{FractalBlock, ScenarioConfig};
use super::gates::GateBook;
use super::report::*;
use crate::error::{Error, Result};
use crate::fractal::{
    approximation_rate_with, covering_measure, dyadic_eps_grid, dyadic_jump_counts, holder_empirical,
    holder_theoretical, levy_baseline, top_exponent, BandGaps, BoxCounter, CoverRow, PointSystem, ScaleWindow,
    SpectrumEstimate, KAPPA,
};
use crate::gst::{generator_cross_check, GstModel, BUMPS};
use crate::levy::{BgMode, LevyDensity, LevyModel, LevyPathConfig};
use crate::path::PathRecord;
use crate::rng::{self, child_seed, Purpose};
use crate::sim::{
    accepted_band_rates, compensator_consistency, exit_fraction, martingale_check, stationarity_check,
    stationary_sample, thinning_chi_square, RecordMode, SimConfig, Simulator,
};
use crate::spectral::{discretize_h, ground_state, kato_diagnostic, DiscreteOperator, GroundState, PotentialSpec};
use crate::stats;

/// Whether failing hard gates turn into a nonzero exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Hard,
    ReportOnly,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub strictness: Strictness,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: None, out_dir: PathBuf::from("runs"), strictness: Strictness::Hard }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub run_dir: PathBuf,
    /// Wall-clock seconds per stage; kept out of the summary so it stays reproducible.
    pub timings: Vec<(String, f64)>,
    pub strictness: Strictness,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.strictness == Strictness::Hard && self.report.hard_failures() > 0 {
            1
        } else {
            0
        }
    }
}

// Gate tolerances.
const EIGEN_LAMBDA_TOL: f64 = 1e-6;
const EIGEN_PHI_TOL: f64 = 1e-4;
const ORACLE_RADIUS: f64 = 4.0;
const RESIDUAL_TOL: f64 = 1e-8;
const DOUBLING_TOL: f64 = 1e-6;
const TAIL_TOL: f64 = 0.15;
const CROSS_TOL: f64 = 1e-5;
const MARTINGALE_Z: f64 = 3.0;
const KS_TOL: f64 = 0.05;
const THINNING_P: f64 = 1e-3;
const BASELINE_HS: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
const BASELINE_TOL: f64 = 0.15;
const PURE_JUMP_HS: [f64; 4] = [0.2, 0.3, 0.4, 0.5];
const DIFFUSIVE_HS: [f64; 2] = [0.2, 0.3];
const SPECTRUM_TOL: f64 = 0.2;
const TOP_TOL: f64 = 0.1;
const HOLDER_TOL: f64 = 0.1;
const COVER_FULL: f64 = 0.99;
const GROWTH_TOL: f64 = 0.2;
const REPLAY_PATHS: usize = 32;
const SIDE_PATHS: usize = 200;
const COMPENSATOR_PATHS: usize = 4000;

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    seed: u64,
    hash: String,
    dir: PathBuf,
    gates: GateBook,
    errors: Vec<StageError>,
    artifacts: Vec<String>,
    timings: Vec<(String, f64)>,
}

impl Run<'_> {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Option<T> {
        let t = Instant::now();
        log::info!("{}: {name}", self.cfg.name);
        let out = f(self);
        self.timings.push((name.to_string(), t.elapsed().as_secs_f64()));
        match out {
            Ok(v) => Some(v),
            Err(e) => {
                log::error!("{}: stage {name} failed: {e}", self.cfg.name);
                self.errors.push(StageError { stage: name.to_string(), message: e.to_string() });
                None
            }
        }
    }

    /// Write a CSV artifact behind the seed/config header.
    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let head = format!("# master_seed={} config_hash={}\n", self.seed, self.hash);
        let body = body.strip_prefix(&format!("# master_seed={}\n", self.seed)).unwrap_or(body);
        fs::write(self.dir.join(name), format!("{head}{body}"))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

/// Load, validate and run a scenario file.
pub fn run_config_path(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = ScenarioConfig::load(path)?;
    run_scenario(&cfg, opts)
}

/// Gaussian ground state of `−(σ²/2) d² + a x²`: `(λ₀, κ)` with `φ₀ ∝ e^{−κx²/2}`.
fn harmonic_oracle(model: &LevyModel, v: &PotentialSpec) -> Option<(f64, f64)> {
    match v {
        PotentialSpec::Polynomial { half_degree: 1, scale } if model.density.is_zero() && model.sigma != 0.0 => {
            let s = model.sigma.abs();
            Some((s * (scale / 2.0).sqrt(), (2.0 * scale).sqrt() / s))
        }
        _ => None,
    }
}

fn run_dir(cfg: &ScenarioConfig, seed: u64, out: &Path) -> PathBuf {
    out.join(format!("{}-seed{seed}", cfg.name))
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.master_seed);
    let dir = run_dir(cfg, seed, &opts.out_dir);
    fs::create_dir_all(&dir)?;
    let marker = dir.join("FAILED");
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let mut run = Run {
        cfg,
        seed,
        hash: cfg.hash(),
        dir: dir.clone(),
        gates: GateBook::new(cfg.exploratory),
        errors: Vec::new(),
        artifacts: Vec::new(),
        timings: Vec::new(),
    };
    let model = cfg.levy_model()?;
    run.text("config.toml", &cfg.to_toml())?;

    let mut report = RunReport {
        scenario: cfg.name.clone(),
        exploratory: cfg.exploratory,
        master_seed: seed,
        config_hash: run.hash.clone(),
        reference_curve: cfg.reference.curve.clone(),
        eigen: None,
        levy: None,
        generator: None,
        simulation: SimulationReport::default(),
        fractal: None,
        kato: None,
        gates: Vec::new(),
        errors: Vec::new(),
        artifacts: Vec::new(),
    };

    let solved = run.stage("eigen", |r| eigen_stage(r, &model));
    if let Some((_, _, block)) = &solved {
        report.eigen = Some(block.clone());
    } else {
        for id in [1, 2, 3, 4, 6, 7, 8, 10, 11, 12, 13, 15] {
            if applies(cfg, id) {
                run.gates.fail(id, "ground state unavailable");
            }
        }
    }
    report.levy = run.stage("levy", |r| levy_stage(r, &model));

    if let Some((gs, op, _)) = solved {
        let gst = run.stage("generator", |_| {
            GstModel::new(model.clone(), gs.clone(), op.clone(), cfg.simulation.small_jump_cutoff)
        });
        if let Some(gst) = gst {
            report.generator = run.stage("generator-checks", |r| generator_stage(r, &gst));
            if report.generator.is_none() {
                run.gates.fail(4, "generator cross-check failed to run");
            }
            report.simulation = simulation_stage(&mut run, &gst);
        } else {
            for id in [4, 6, 7, 8, 15] {
                if applies(cfg, id) {
                    run.gates.fail(id, "generator construction failed");
                }
            }
        }
        if let Some(f) = &cfg.fractal {
            let out = run.stage("fractal", |r| fractal_stage(r, f, &model, gs, op));
            if out.is_none() {
                for id in [9, 10, 11, 12, 13] {
                    if applies(cfg, id) {
                        run.gates.fail(id, "fractal stage failed");
                    }
                }
            }
            report.fractal = out;
        }
    }
    report.kato = run.stage("kato", |r| kato_stage(r, &model));
    if report.kato.is_none() {
        run.gates.fail(14, "Kato diagnostic failed to run");
    }

    report.errors = std::mem::take(&mut run.errors);
    report.gates = std::mem::replace(&mut run.gates, GateBook::new(cfg.exploratory)).finish();
    run.artifacts.push("summary.json".into());
    run.artifacts.push("timings.json".into());
    report.artifacts = run.artifacts.clone();
    fs::write(dir.join("summary.json"), report.to_json())?;
    #[derive(Serialize)]
    struct Timing<'a> {
        stage: &'a str,
        seconds: f64,
    }
    let t: Vec<Timing> = run.timings.iter().map(|(s, x)| Timing { stage: s, seconds: *x }).collect();
    fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&t)?)?;
    let failed: Vec<String> =
        report.gates.iter().filter(|g| g.failed_hard()).map(|g| format!("{} {}", g.id, g.name)).collect();
    if !failed.is_empty() {
        fs::write(&marker, format!("{}\n", failed.join("\n")))?;
    }
    Ok(RunOutcome { report, run_dir: dir, timings: run.timings, strictness: opts.strictness })
}

/// Which gates a scenario is measured against.
pub fn applies(cfg: &ScenarioConfig, id: u8) -> bool {
    let model_sigma = cfg.levy.diffusion_coefficient;
    match id {
        1 => cfg.levy_model().ok().and_then(|m| harmonic_oracle(&m, &cfg.potential)).is_some(),
        3 => cfg.reference.tail_exponent.is_some(),
        5 | 8 => cfg.has_jumps(),
        9 => cfg.fractal.as_ref().is_some_and(|f| f.baseline.is_some()),
        10 => cfg.fractal.is_some() && model_sigma == 0.0,
        11 => cfg.fractal.is_some() && model_sigma != 0.0,
        12 | 13 => cfg.fractal.is_some(),
        _ => true,
    }
}

fn eigen_stage(r: &mut Run, model: &LevyModel) -> Result<(GroundState, DiscreteOperator, EigenBlock)> {
    let cfg = r.cfg;
    let grid = cfg.grid()?;
    let op = discretize_h(model, &cfg.potential, &grid)?;
    let gs = ground_state(&op)?;
    r.csv("ground_state.csv", &gs.to_csv(&op.potential, r.seed))?;

    let doubled = discretize_h(model, &cfg.potential, &grid.refined()).and_then(|op2| ground_state(&op2));
    let doubled_lambda0 = match doubled {
        Ok(g2) => Some(g2.lambda0),
        Err(e) => {
            r.errors.push(StageError { stage: "eigen-doubling".into(), message: e.to_string() });
            None
        }
    };
    let drift = doubled_lambda0.map(|l| (l - gs.lambda0).abs());
    let oracle = harmonic_oracle(model, &cfg.potential);
    let phi_err = oracle.map(|(_, kappa)| {
        let norm = (kappa / std::f64::consts::PI).powf(0.25);
        (0..grid.points)
            .map(|i| grid.x(i))
            .enumerate()
            .filter(|(_, x)| x.abs() <= ORACLE_RADIUS)
            .map(|(i, x)| (gs.phi[i] / (norm * (-0.5 * kappa * x * x).exp()) - 1.0).abs())
            .fold(0.0, f64::max)
    });
    let block = EigenBlock {
        lambda0: gs.lambda0,
        lambda1: gs.lambda1,
        residual: gs.residual,
        ritz_gap: gs.ritz_gap,
        tail_kind: format!("{:?}", gs.tail.kind),
        tail_exponent: gs.tail.exponent(),
        boundary_mass: gs.boundary_mass(),
        doubled_lambda0,
        grid_doubling_drift: drift,
        oracle_phi_error: phi_err,
        oracle_lambda0: oracle.map(|o| o.0),
    };

    if let (Some((l, _)), Some(e)) = (oracle, phi_err) {
        let dl = (gs.lambda0 - l).abs();
        r.gates.set(
            1,
            dl <= EIGEN_LAMBDA_TOL && e < EIGEN_PHI_TOL,
            format!("|λ₀ − {l}| = {dl:.2e} (tol {EIGEN_LAMBDA_TOL:e}); max rel φ₀ error on |x| ≤ 4 = {e:.2e} (tol {EIGEN_PHI_TOL:e})"),
        );
    }
    match drift {
        Some(d) => r.gates.set(
            2,
            gs.residual <= RESIDUAL_TOL && d <= DOUBLING_TOL,
            format!("residual {:.2e} (tol {RESIDUAL_TOL:e}); grid-doubling drift {d:.2e} (tol {DOUBLING_TOL:e})", gs.residual),
        ),
        None => r.gates.fail(2, format!("residual {:.2e}; grid-doubling solve failed", gs.residual)),
    }
    if let Some(want) = cfg.reference.tail_exponent {
        let got = gs.tail.exponent();
        let power = matches!(gs.tail.kind, crate::spectral::TailKind::PowerLaw);
        r.gates.set(
            3,
            power && (got - want).abs() <= TAIL_TOL,
            format!("{:?} tail, exponent {got:.4} vs {want} (tol {TAIL_TOL})", gs.tail.kind),
        );
    }
    Ok((gs, op, block))
}

fn levy_stage(r: &mut Run, model: &LevyModel) -> Result<LevyReport> {
    let cfg = r.cfg;
    let eps = cfg.fractal.as_ref().map_or(cfg.simulation.small_jump_cutoff, |f| f.small_jump_cutoff);
    let j_max = ((1.0 / eps).log2().floor() as i64 - 1).max(0) as u32;
    let table = model.band_mass_table(j_max)?;
    r.csv("levy_bands.csv", &table.to_csv())?;
    let analytic = model.bg_index(BgMode::Analytic)?;
    let numeric = if cfg.has_jumps() { Some(model.bg_index(BgMode::Numeric)?) } else { None };
    if let Some(b) = numeric {
        let tol = if matches!(model.density, LevyDensity::LogPerturbed { .. }) { 0.1 } else { 0.05 };
        let want = cfg.reference.bg_index;
        r.gates.set(5, (b - want).abs() <= tol, format!("numeric index {b:.4} vs {want} (tol {tol})"));
    }
    Ok(LevyReport { bg_index_analytic: analytic, bg_index_numeric: numeric, band_masses: table.c })
}

fn generator_stage(r: &mut Run, gst: &GstModel) -> Result<GeneratorBlock> {
    let cc = generator_cross_check(gst)?;
    r.gates.set(
        4,
        cc.max_rel_error <= CROSS_TOL,
        format!("max relative discrepancy {:.2e} over {} node evaluations (tol {CROSS_TOL:e})", cc.max_rel_error, cc.nodes),
    );
    r.csv("drift.csv", &gst.drift.to_csv())?;
    let lim = gst.gs.grid.half_width - 1.0;
    let mut windows: Vec<f64> = [1.0, 2.0, 4.0].into_iter().filter(|&k| k < r.cfg.simulation.window_bound).collect();
    windows.push(r.cfg.simulation.window_bound.min(lim));
    let mut bounds = Vec::new();
    let mut txt = format!("# master_seed={} config_hash={}\n", r.seed, r.hash);
    for k in windows {
        let c = gst.local_ratio_bound(k)?;
        txt.push_str(&format!("window_bound = {k}\nratio_lower_bound = {c:.6e}\nratio_upper_bound = {:.6e}\n\n", 1.0 / c));
        bounds.push((k, c));
    }
    r.text("ratio_envelope.txt", &txt)?;
    Ok(GeneratorBlock { cross_check: cc, pull_back_radius: gst.pull_back_radius(), ratio_bounds: bounds })
}

/// Hash of the grid states and accepted jumps of `paths`, in index order.
fn paths_digest(paths: &[(u64, PathRecord)]) -> String {
    let mut h = Sha256::new();
    let mut sorted: Vec<&(u64, PathRecord)> = paths.iter().collect();
    sorted.sort_by_key(|p| p.0);
    for (i, p) in sorted {
        h.update(i.to_le_bytes());
        for x in &p.states {
            h.update(x.to_le_bytes());
        }
        for j in p.accepted() {
            h.update(j.s.to_le_bytes());
            h.update(j.z.to_le_bytes());
        }
        h.update(p.exit_time.unwrap_or(-1.0).to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn simulation_stage(r: &mut Run, gst: &GstModel) -> SimulationReport {
    let cfg = r.cfg;
    let s = &cfg.simulation;
    let mut out = SimulationReport::default();

    let mcfg = cfg.martingale_sim(child_seed(r.seed, "martingale"));
    out.martingale = r.stage("martingale", |_| martingale_check(gst, &mcfg, &BUMPS[..3], &s.martingale_times));
    match &out.martingale {
        Some(sc) => {
            let worst = sc.iter().map(|x| x.z.abs()).fold(0.0, f64::max);
            let reliable = sc.iter().all(|x| x.reliable);
            let zs: Vec<String> = sc.iter().map(|x| format!("{:.2}", x.z)).collect();
            r.gates.set(
                6,
                worst < MARTINGALE_Z && reliable,
                format!("z-scores [{}], max |z| {worst:.2} (tol {MARTINGALE_Z}); {} paths", zs.join(", "), mcfg.n_paths),
            );
        }
        None => r.gates.fail(6, "martingale check failed to run"),
    }

    let scfg = cfg.stationarity_sim(child_seed(r.seed, "stationarity"));
    out.stationarity = r.stage("stationarity", |_| stationarity_check(gst, &scfg, s.stationarity_horizon_time));
    match &out.stationarity {
        Some(st) => r.gates.set(
            7,
            st.ks < KS_TOL && st.reliable,
            format!("KS at t = {} is {:.4} (tol {KS_TOL}); {} paths, exit fraction {:.4}", st.t, st.ks, st.paths_used, st.exit_fraction),
        ),
        None => r.gates.fail(7, "stationarity check failed to run"),
    }
    let init = stationary_sample(gst, child_seed(r.seed, "moments"), s.n_paths);
    out.stationary_moments = Some((stats::mean_se(&init).0, stats::variance(&init)));

    if cfg.has_jumps() {
        out.thinning = r.stage("thinning", |_| thinning_chi_square(gst, &mcfg, s.thinning_state, s.thinning_proposals));
        match &out.thinning {
            Some(t) => r.gates.set(
                8,
                t.p_value > THINNING_P,
                format!("chi-square {:.2} on {} dof, p = {:.4} (tol > {THINNING_P}); {} of {} accepted", t.statistic, t.dof, t.p_value, t.accepted, t.proposals),
            ),
            None => r.gates.fail(8, "thinning test failed to run"),
        }
        let ccfg = SimConfig {
            n_paths: s.n_paths.min(COMPENSATOR_PATHS),
            dt: (mcfg.dt * 5.0).min(1e-3 * mcfg.horizon),
            window: gst.gs.grid.half_width - 1.0,
            ..mcfg.clone()
        };
        out.compensator = r.stage("compensator", |_| compensator_consistency(gst, &ccfg));
    }

    let side = SimConfig { n_paths: s.n_paths.min(SIDE_PATHS), ..mcfg.clone() };
    let j_max = ((1.0 / s.small_jump_cutoff).log2().floor() as i64 - 1).max(0) as u32;
    let side_out = r.stage("ensemble", |r| {
        let sim = Simulator::new(gst, &side)?;
        let paths = sim.map_paths(|_, p| p)?;
        let mut full = side.clone();
        full.record = RecordMode::Full;
        full.n_paths = 1;
        let p0 = Simulator::new(gst, &full)?.path(0)?;
        r.csv("path0_states.csv", &p0.states_csv())?;
        r.csv("path0_jumps.csv", &p0.jumps_csv())?;
        Ok((exit_fraction(&paths), accepted_band_rates(&paths, j_max)))
    });
    if let Some((e, rates)) = side_out {
        out.exit_fraction = Some(e);
        if cfg.has_jumps() {
            out.band_rates = Some(rates);
        }
    }

    // Replay: the same paths simulated forwards and backwards must hash alike.
    let replay = r.stage("replay", |_| {
        let rcfg = SimConfig { n_paths: s.n_paths.min(REPLAY_PATHS), ..mcfg.clone() };
        let sim = Simulator::new(gst, &rcfg)?;
        let n = rcfg.n_paths as u64;
        let fwd: Vec<(u64, PathRecord)> = (0..n).map(|i| sim.path(i).map(|p| (i, p))).collect::<Result<_>>()?;
        let bwd: Vec<(u64, PathRecord)> = (0..n).rev().map(|i| sim.path(i).map(|p| (i, p))).collect::<Result<_>>()?;
        let par = sim.map_paths(|i, p| (i, p))?;
        Ok((paths_digest(&fwd), paths_digest(&bwd), paths_digest(&par)))
    });
    match replay {
        Some((a, b, c)) => {
            r.gates.set(15, a == b && a == c, format!("replay digest {} (forward, reverse and parallel {})", &a[..16], if a == b && a == c { "agree" } else { "differ" }));
            out.replay_hash = Some(a);
        }
        None => r.gates.fail(15, "replay failed to run"),
    }
    out
}

struct PathAnalysis {
    counter: BoxCounter,
    holder: Vec<(f64, f64, Option<f64>, f64, Option<f64>)>,
    first: Option<PointSystem>,
    exited: bool,
}

fn fractal_stage(
    r: &mut Run,
    f: &FractalBlock,
    model: &LevyModel,
    gs: GroundState,
    op: DiscreteOperator,
) -> Result<FractalReport> {
    let cfg = r.cfg;
    let fseed = child_seed(r.seed, "fractal");
    let scfg = cfg.fractal_sim(fseed).expect("fractal block");
    let gst = GstModel::new(model.clone(), gs, op, f.small_jump_cutoff)?;
    let sim = Simulator::new(&gst, &scfg)?;
    let bg = model.bg_index(BgMode::Analytic)?;
    let sigma = model.sigma;
    let window = ScaleWindow::new(f.small_jump_cutoff, bg, f.time_step, f.horizon_time);
    let top = top_exponent(bg, sigma);
    let mut hs = f.h_grid.clone();
    hs.push(top);
    hs.sort_by(f64::total_cmp);
    hs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let proto = BoxCounter::new(&hs, &window, bg, sigma, f.small_jump_cutoff, KAPPA);

    // Probe times, dealt to paths round-robin.
    let mut probes = vec![Vec::new(); f.n_paths];
    let mut pr = rng::stream(fseed, Purpose::Probes, 0);
    let (lo, hi) = (window.hi, f.horizon_time - window.hi);
    for k in 0..f.holder_probes {
        probes[k % f.n_paths].push(lo + (hi - lo) * pr.random::<f64>());
    }
    let results = sim.map_paths(|i, p| {
        let ps = PointSystem::from_path(&p);
        let mut counter = proto.clone();
        counter.add(&ps);
        let gaps = BandGaps::new(&ps, bg, f.small_jump_cutoff);
        let mut holder = Vec::new();
        for &t in &probes[i as usize] {
            // probes must sit in the usable segment and off the jump set
            if t + window.hi > p.valid_until() || ps.near_jump(t, p.dt) {
                continue;
            }
            if let Some(est) = holder_empirical(&p, t, &window) {
                let delta = gaps.as_ref().and_then(|g| approximation_rate_with(g, t)).map(|d| d.delta);
                let theory = delta.map(|d| holder_theoretical(d, bg, sigma));
                holder.push((t, est.h_hat, delta, est.r2, theory));
            }
        }
        PathAnalysis { counter, holder, first: (i == 0).then_some(ps), exited: p.exited() }
    })?;

    let mut total = proto.clone();
    let mut probes_csv = String::from("t,H_hat,delta_hat,R2\n");
    let mut h_hats = Vec::new();
    let mut theories = Vec::new();
    let mut deltas = Vec::new();
    let mut exited = 0;
    let mut first = None;
    for a in results {
        total.merge(&a.counter);
        exited += a.exited as usize;
        for (t, h, d, r2, th) in &a.holder {
            probes_csv.push_str(&format!(
                "{t:.9},{h:.6},{},{r2:.6}\n",
                d.map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"))
            ));
            h_hats.push(*h);
            if let Some(v) = d {
                deltas.push(*v);
            }
            if let Some(v) = th {
                theories.push(*v);
            }
        }
        if a.first.is_some() {
            first = a.first;
        }
    }
    let spectrum = total.finish();
    r.csv("spectrum.csv", &spectrum.to_csv())?;
    r.csv("holder_probes.csv", &probes_csv)?;
    let med = |v: &[f64]| (!v.is_empty()).then(|| stats::median(v));
    let holder = HolderSummary {
        probes: h_hats.len(),
        median_h_hat: med(&h_hats),
        median_h_theory: med(&theories),
        median_delta_hat: med(&deltas),
    };

    let ps0 = first.unwrap_or(PointSystem { times: Vec::new(), sizes: Vec::new(), horizon: f.horizon_time });
    let eps_grid = dyadic_eps_grid(f.small_jump_cutoff);
    let mut covering = Vec::new();
    for &d in &f.covering_deltas {
        covering.extend(covering_measure(&ps0, d, bg, &eps_grid));
    }
    let mut cov_csv = String::from("epsilon,delta,measure_fraction\n");
    for c in &covering {
        cov_csv.push_str(&format!("{:.9e},{},{:.9}\n", c.epsilon, c.delta, c.measure_fraction));
    }
    r.csv("covering.csv", &cov_csv)?;

    let j_max = ((1.0 / f.small_jump_cutoff).log2().floor() as i64 - 1).max(0) as u32;
    let masses: Vec<f64> = (0..=j_max).map(|j| model.dyadic_band_mass(j)).collect::<Result<_>>()?;
    let c_k = gst.local_ratio_bound(f.window_bound)?;
    let dyadic = dyadic_jump_counts(&ps0, c_k, &masses);
    let mut dy_csv = String::from("j,N_j,C_j,lower,upper,inside\n");
    for d in &dyadic.rows {
        dy_csv.push_str(&format!("{},{},{:.6e},{:.6e},{:.6e},{}\n", d.j, d.count, d.band_mass, d.lower, d.upper, d.inside));
    }
    r.csv("dyadic_counts.csv", &dy_csv)?;

    let baseline = match &f.baseline {
        Some(b) => {
            let mut bh = b.h_grid.clone();
            bh.push(top_exponent(bg, sigma));
            bh.sort_by(f64::total_cmp);
            bh.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let lcfg = LevyPathConfig::new(b.horizon_time, b.time_step, b.small_jump_cutoff);
            let est = levy_baseline(model, &lcfg, b.n_paths, child_seed(r.seed, "baseline"), &bh)?;
            r.csv("baseline_spectrum.csv", &est.to_csv())?;
            Some(est)
        }
        None => None,
    };

    spectrum_gates(r, &spectrum, baseline.as_ref(), &holder, bg, sigma);
    covering_gate(r, &covering);
    let growth = dyadic.growth;
    let inside = dyadic.all_inside();
    r.gates.set(
        13,
        growth.is_some_and(|g| (g - bg).abs() <= GROWTH_TOL) && inside,
        format!(
            "growth {} vs {bg} (tol {GROWTH_TOL}); {} of {} resolved bands inside the thinned-Poisson band (c = {c_k:.3e})",
            growth.map_or("undefined".into(), |g| format!("{g:.3}")),
            dyadic.rows.iter().filter(|d| d.inside).count(),
            dyadic.rows.len()
        ),
    );

    Ok(FractalReport {
        paths: f.n_paths,
        exit_fraction: if f.n_paths == 0 { 0.0 } else { exited as f64 / f.n_paths as f64 },
        scale_window: (window.lo, window.hi),
        levels: spectrum.levels.clone(),
        spectrum: spectrum.rows.clone(),
        holder,
        covering,
        dyadic: dyadic.rows,
        dyadic_growth: growth,
        ratio_bound: c_k,
        baseline: baseline.map(|b| b.rows),
        artifacts: ["spectrum.csv", "holder_probes.csv", "covering.csv", "dyadic_counts.csv"]
            .iter()
            .map(|s| s.to_string())
            .chain(f.baseline.as_ref().map(|_| "baseline_spectrum.csv".to_string()))
            .collect(),
    })
}

/// `|D̂(h) − target| ≤ tol` for each `(h, target)`; the failure text names the offenders.
fn check_rows(est: &SpectrumEstimate, want: &[(f64, f64)], tol: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(h, target) in want {
        match est.get(h).and_then(|row| row.d_hat) {
            Some(d) => {
                let good = (d - target).abs() <= tol;
                ok &= good;
                parts.push(format!("D({h:.3}) = {d:.3} vs {target:.3}{}", if good { "" } else { " ✗" }));
            }
            None => {
                ok = false;
                parts.push(format!("D({h:.3}) undefined ✗"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn spectrum_gates(
    r: &mut Run,
    est: &SpectrumEstimate,
    baseline: Option<&SpectrumEstimate>,
    holder: &HolderSummary,
    bg: f64,
    sigma: f64,
) {
    let top = top_exponent(bg, sigma);
    if let Some(b) = baseline {
        let mut want: Vec<(f64, f64)> = BASELINE_HS.iter().map(|&h| (h, bg * h)).collect();
        let (ok1, t1) = check_rows(b, &want, BASELINE_TOL);
        want = vec![(top, 1.0)];
        let (ok2, t2) = check_rows(b, &want, TOP_TOL);
        r.gates.set(9, ok1 && ok2, format!("{t1} (tol {BASELINE_TOL}); {t2} (tol {TOP_TOL}); {} paths", b.paths));
    }
    let med = holder.median_h_hat;
    let med_txt = med.map_or("undefined".to_string(), |m| format!("{m:.3}"));
    if sigma == 0.0 {
        let want: Vec<(f64, f64)> = PURE_JUMP_HS.iter().map(|&h| (h, bg * h)).collect();
        let (ok, t) = check_rows(est, &want, SPECTRUM_TOL);
        let hold = med.is_some_and(|m| (m - top).abs() <= HOLDER_TOL);
        r.gates.set(
            10,
            ok && hold,
            format!("{t} (tol {SPECTRUM_TOL}); median Hölder {med_txt} vs {top:.3} over {} probes (tol {HOLDER_TOL})", holder.probes),
        );
    } else {
        let want: Vec<(f64, f64)> = DIFFUSIVE_HS.iter().map(|&h| (h, bg * h)).collect();
        let (ok1, t1) = check_rows(est, &want, SPECTRUM_TOL);
        let (ok2, t2) = check_rows(est, &[(0.5, 1.0)], TOP_TOL);
        let hold = med.is_some_and(|m| (m - 0.5).abs() <= HOLDER_TOL);
        r.gates.set(
            11,
            ok1 && ok2 && hold,
            format!(
                "median Hölder {med_txt} vs 0.5 over {} probes (tol {HOLDER_TOL}); {t2} (tol {TOP_TOL}); {t1} (tol {SPECTRUM_TOL})",
                holder.probes
            ),
        );
    }
}

fn covering_gate(r: &mut Run, rows: &[CoverRow]) {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut deltas: Vec<f64> = rows.iter().map(|c| c.delta).collect();
    deltas.dedup();
    for d in deltas {
        // rows run from the largest ε down to the smallest resolved one
        let fr: Vec<f64> = rows.iter().filter(|c| c.delta == d).map(|c| c.measure_fraction).collect();
        let Some(&last) = fr.last() else { continue };
        if d < 1.0 {
            let good = last >= COVER_FULL;
            ok &= good;
            parts.push(format!("δ = {d}: fraction {last:.4} at the smallest ε (need ≥ {COVER_FULL})"));
        } else if d > 1.0 {
            let below = fr.iter().all(|&m| m < 1.0);
            let mono = fr.windows(2).all(|w| w[1] <= w[0]) && last < fr[0];
            ok &= below && mono;
            parts.push(format!(
                "δ = {d}: fractions {:.4} → {last:.4} ({}, {})",
                fr[0],
                if below { "all below 1" } else { "reaches 1" },
                if mono { "decreasing as ε shrinks" } else { "not monotone" }
            ));
        }
    }
    r.gates.set(12, ok && !parts.is_empty(), parts.join("; "));
}

fn kato_stage(r: &mut Run, model: &LevyModel) -> Result<Vec<crate::spectral::KatoRow>> {
    let k = &r.cfg.kato;
    let starts: Vec<f64> = if k.start_points == 1 {
        vec![0.0]
    } else {
        (0..k.start_points).map(|i| -k.window_bound + 2.0 * k.window_bound * i as f64 / (k.start_points - 1) as f64).collect()
    };
    let rows = kato_diagnostic(model, &r.cfg.potential, &k.times, &starts, Some(k.window_bound), k.n_paths, child_seed(r.seed, "kato"))?;
    let mut csv = String::from("t,sup_estimate,argmax\n");
    for row in &rows {
        csv.push_str(&format!("{},{:.9e},{}\n", row.t, row.sup_estimate, row.argmax));
    }
    r.csv("kato.csv", &csv)?;
    let at = |t: f64| rows.iter().find(|x| (x.t - t).abs() < 1e-12).map(|x| x.sup_estimate);
    match (at(0.01), at(0.1)) {
        (Some(a), Some(b)) => r.gates.set(14, a <= 0.5 * b, format!("sup estimate {a:.4e} at t = 0.01 vs {b:.4e} at t = 0.1 (need ≤ half)")),
        _ => r.gates.fail(14, "kato times must include 0.01 and 0.1"),
    }
    Ok(rows)
}

/// A scenario file path, or else the name of a built-in scenario.
pub fn resolve(arg: &str) -> Result<ScenarioConfig> {
    let p = Path::new(arg);
    if p.exists() {
        return ScenarioConfig::load(p);
    }
    match super::registry::find(arg) {
        Some(e) => e.config(),
        None => Err(Error::Config(format!("{arg} is neither a file nor a built-in scenario"))),
    }
}
