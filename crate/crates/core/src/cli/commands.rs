//! Subcommand dispatch: run, tomo, analyze, fixtures, sweep.

use super::config::ExperimentConfig;
use super::manifest::RunManifest;
use super::output::{render_csv, JVal};
use crate::analysis;
use crate::node::{paper_parameter_fixture, ION_FIXTURE_IDS};
use crate::protocols::{
    self, single_photon_bell, BellConfig, BellStage, MultiplexedConfig, ProtocolResult,
    SameDeviceConfig, TwoPhotonConfig, WStateConfig,
};
use crate::qcore::state_fidelity;
use crate::tomography::{
    bootstrap_errors, dataset_text, golden_dataset_ids, mle_reconstruct, CountTable, MleOptions,
    PauliAxis, ReadoutMatrix,
};
use crate::units::{mhz_ang, TWO_PI};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "heraldlab",
    about = "Numerical laboratory for heralded entanglement of cavity-coupled ion qubits",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (default: machine parallelism). One thread must
    /// reproduce multi-threaded results bit-exactly.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a protocol experiment from a config file.
    Run(RunArgs),
    /// Reconstruct a density matrix from count/readout files.
    Tomo(TomoArgs),
    /// Evaluate a closed-form analysis model.
    Analyze(AnalyzeArgs),
    /// List or export the shipped fixtures.
    Fixtures(FixturesArgs),
    /// Run a Cartesian sweep over config overrides.
    Sweep(RunArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Experiment config (TOML).
    pub config: PathBuf,
    /// Output directory (overrides the config's out_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root seed override.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TomoArgs {
    /// Count-table file.
    pub counts: PathBuf,
    /// Readout-matrix file.
    pub readout: PathBuf,
    /// Bootstrap resamples for error bars (0 disables).
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    /// Fidelity target: psi-plus | w | none.
    #[arg(long, default_value = "psi-plus")]
    pub target: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Model name; `heraldlab analyze list` prints the inventory.
    pub model: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FixturesArgs {
    /// list | export
    #[arg(default_value = "list")]
    pub action: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Run(args) => run_command(&args, false),
        Command::Sweep(args) => run_command(&args, true),
        Command::Tomo(args) => tomo_command(&args),
        Command::Analyze(args) => analyze_command(&args),
        Command::Fixtures(args) => fixtures_command(&args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::Unknown(_) = err {
                eprintln!("known protocols: {}", PROTOCOL_NAMES.join(", "));
            }
            super::exit_code_for(&err)
        }
    }
}

pub const PROTOCOL_NAMES: [&str; 5] = [
    "single-photon-bell",
    "two-photon-bell",
    "w-state",
    "same-device-bell",
    "multiplexed",
];

struct OutDir {
    dir: PathBuf,
    manifest: RunManifest,
    started: std::time::Instant,
}

impl OutDir {
    fn new(dir: PathBuf, config_text: &str) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            manifest: RunManifest::new(config_text),
            started: std::time::Instant::now(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.manifest.record(name, contents);
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.wall_ms = self.started.elapsed().as_millis();
        self.manifest.write_to(&self.dir)?;
        Ok(())
    }
}

fn run_command(args: &RunArgs, sweep: bool) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out_base = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    if sweep {
        let table = cfg.sweep.clone().ok_or_else(|| Error::Invariant {
            field: "sweep".into(),
            msg: "sweep command needs a [sweep] table".into(),
        })?;
        let combos = sweep_combinations(&table)?;
        for (i, combo) in combos.iter().enumerate() {
            let mut sub = cfg.clone();
            for (key, value) in combo {
                apply_override(&mut sub, key, *value)?;
            }
            sub.validate()?;
            let label: Vec<String> = combo
                .iter()
                .map(|(k, v)| format!("{}={v}", k.replace('.', "_")))
                .collect();
            let dir = out_base.join(format!("sweep_{i:03}_{}", label.join("_")));
            run_protocol_into(&sub, &text, dir)?;
        }
        return Ok(());
    }
    run_protocol_into(&cfg, &text, out_base)
}

fn sweep_combinations(table: &toml::Table) -> Result<Vec<Vec<(String, f64)>>> {
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for (key, value) in table {
        let arr = value.as_array().ok_or_else(|| Error::Invariant {
            field: format!("sweep.{key}"),
            msg: "sweep values must be arrays".into(),
        })?;
        let vals: Vec<f64> = arr
            .iter()
            .map(|v| {
                v.as_float()
                    .or_else(|| v.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::Invariant {
                        field: format!("sweep.{key}"),
                        msg: "sweep values must be numeric".into(),
                    })
            })
            .collect::<Result<_>>()?;
        axes.push((key.clone(), vals));
    }
    axes.sort_by(|a, b| a.0.cmp(&b.0));
    let mut combos: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for (key, vals) in axes {
        let mut next = Vec::new();
        for combo in &combos {
            for &v in &vals {
                let mut c = combo.clone();
                c.push((key.clone(), v));
                next.push(c);
            }
        }
        combos = next;
    }
    Ok(combos)
}

fn apply_override(cfg: &mut ExperimentConfig, key: &str, value: f64) -> Result<()> {
    match key {
        "run.accept_ns" => cfg.run.accept_ns = value,
        "run.bin_ns" => cfg.run.bin_ns = value,
        "run.trials" => cfg.run.trials = value as usize,
        "run.stage" => cfg.run.stage = value as u8,
        "seed" => cfg.seed = value as u64,
        other => {
            if let Some(rest) = other.strip_prefix("ions.alphas.") {
                let idx: usize = rest.parse().map_err(|_| Error::Invariant {
                    field: other.to_string(),
                    msg: "bad alpha index".into(),
                })?;
                if idx >= cfg.ions.alphas.len() {
                    return Err(Error::Invariant {
                        field: other.to_string(),
                        msg: "alpha index out of range".into(),
                    });
                }
                cfg.ions.alphas[idx] = value;
            } else {
                return Err(Error::Invariant {
                    field: format!("sweep.{other}"),
                    msg: "unsupported sweep key".into(),
                });
            }
        }
    }
    Ok(())
}

fn bell_config_from(cfg: &ExperimentConfig) -> Result<BellConfig> {
    let ions = cfg.ion_parameters()?;
    if ions.len() != 2 {
        return Err(Error::Invariant {
            field: "ions.ids".into(),
            msg: "single-photon-bell needs exactly two ions".into(),
        });
    }
    Ok(BellConfig {
        ions: [ions[0].clone(), ions[1].clone()],
        laser: cfg.laser_settings(),
        noise: cfg.noise_environment(),
        alphas: [cfg.ions.alphas[0], cfg.ions.alphas[1]],
        p_det_scale: {
            let s = cfg.p_det_scale();
            [s[0], s[1]]
        },
        tau_h: cfg.run.window_us,
        tau_s: cfg.run.tau_s_us,
        pre_dd_periods: 2,
        post_dd_periods: 3,
        dt: cfg.bin_us(),
        accept: cfg.accept_us(),
        trials: cfg.run.trials,
        seed: cfg.seed,
        rep_rate: cfg.rep_rate(),
        remote: true,
    })
}

fn protocol_summary(res: &ProtocolResult) -> JVal {
    JVal::obj(vec![
        ("target", JVal::Str(res.target.clone())),
        ("fidelity", JVal::Num(res.fidelity.mean)),
        ("fidelity_std_err", JVal::Num(res.fidelity.std_err)),
        ("success_probability", JVal::Num(res.success_probability)),
        ("rate_hz", JVal::Num(res.rate_hz)),
        (
            "window_table",
            JVal::Arr(
                res.window_table
                    .iter()
                    .map(|p| {
                        JVal::obj(vec![
                            ("window_us", JVal::Num(p.window)),
                            ("fidelity", JVal::Num(p.fidelity)),
                            ("success_probability", JVal::Num(p.success_probability)),
                            ("rate_hz", JVal::Num(p.rate_hz)),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "warnings",
            JVal::Arr(
                res.ensemble
                    .warnings
                    .iter()
                    .map(|w| JVal::Str(w.clone()))
                    .collect(),
            ),
        ),
    ])
}

fn stage_csv(res: &ProtocolResult) -> Vec<(String, String)> {
    res.stages
        .iter()
        .map(|curve| {
            let rows: Vec<Vec<f64>> = curve
                .t0
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    vec![
                        t * 1e3,
                        curve.xx[i],
                        curve.yy[i],
                        curve.zz[i],
                        curve.weight[i],
                    ]
                })
                .collect();
            (
                format!("fig2b_stage{}.csv", curve.stage),
                render_csv(&["t0_ns", "xx", "yy", "zz", "branch_weight"], &rows),
            )
        })
        .collect()
}

fn window_csv(res: &ProtocolResult) -> String {
    let rows: Vec<Vec<f64>> = res
        .window_table
        .iter()
        .map(|p| {
            vec![
                p.window * 1e3,
                p.fidelity,
                p.success_probability,
                p.rate_hz,
            ]
        })
        .collect();
    render_csv(
        &["window_ns", "fidelity", "success_probability", "rate_hz"],
        &rows,
    )
}

fn run_protocol_into(cfg: &ExperimentConfig, config_text: &str, dir: PathBuf) -> Result<()> {
    if cfg.kind != "protocol" {
        return Err(Error::Invariant {
            field: "kind".into(),
            msg: "run expects kind = \"protocol\"".into(),
        });
    }
    let mut out = OutDir::new(dir, config_text)?;
    match cfg.name.as_str() {
        "single-photon-bell" => {
            let bell = bell_config_from(cfg)?;
            let stage = match cfg.run.stage {
                1 => BellStage::Heralded,
                2 => BellStage::Rephased,
                3 => BellStage::Compensated,
                other => {
                    return Err(Error::Invariant {
                        field: "run.stage".into(),
                        msg: format!("stage must be 1..=3, got {other}"),
                    })
                }
            };
            let res = single_photon_bell(&bell, stage)?;
            for (name, contents) in stage_csv(&res) {
                out.write(&name, &contents)?;
            }
            out.write("fig2d_window_sweep.csv", &window_csv(&res))?;
            out.write("summary.json", &protocol_summary(&res).render())?;
        }
        "two-photon-bell" => {
            let ions = cfg.ion_parameters()?;
            let two = TwoPhotonConfig {
                ions: [ions[0].clone(), ions[1].clone()],
                laser: cfg.laser_settings(),
                noise: cfg.noise_environment(),
                p_det_scale: {
                    let s = cfg.p_det_scale();
                    [s[0], s[1]]
                },
                tau_h: cfg.run.window_us,
                tau_s: cfg.run.tau_s_us,
                dt: cfg.bin_us(),
                accept: cfg.accept_us(),
                trials: cfg.run.trials,
                seed: cfg.seed,
                rep_rate: cfg.rep_rate(),
            };
            let res = protocols::two_photon_bell(&two)?;
            out.write("fig_ed8b_window_sweep.csv", &window_csv(&res))?;
            out.write("summary.json", &protocol_summary(&res).render())?;
        }
        "w-state" => {
            let ions = cfg.ion_parameters()?;
            if ions.len() != 3 {
                return Err(Error::Invariant {
                    field: "ions.ids".into(),
                    msg: "w-state needs exactly three ions".into(),
                });
            }
            let w = WStateConfig {
                ions: [ions[0].clone(), ions[1].clone(), ions[2].clone()],
                laser: cfg.laser_settings(),
                noise: cfg.noise_environment(),
                alphas: [cfg.ions.alphas[0], cfg.ions.alphas[1], cfg.ions.alphas[2]],
                p_det_scale: {
                    let s = cfg.p_det_scale();
                    [s[0], s[1], s[2]]
                },
                ac_detuning_ion1: -mhz_ang(50.0),
                ac_detuning_ion3: mhz_ang(425.0),
                tau_h: cfg.run.window_us,
                tau_s: cfg.run.tau_s_us,
                dt: cfg.bin_us(),
                accept: cfg.accept_us(),
                trials: cfg.run.trials,
                seed: cfg.seed,
                rep_rate: cfg.rep_rate(),
                qubit_drive_mode: true,
            };
            let res = protocols::w_state_protocol(&w)?;
            out.write("fig4c_summary.csv", &window_csv(&res))?;
            out.write("summary.json", &protocol_summary(&res).render())?;
        }
        "same-device-bell" => {
            let ions = cfg.ion_parameters()?;
            let sd = SameDeviceConfig {
                ions: [ions[0].clone(), ions[1].clone()],
                laser: cfg.laser_settings(),
                noise: cfg.noise_environment(),
                alphas: [cfg.ions.alphas[0], cfg.ions.alphas[1]],
                p_det_scale: {
                    let s = cfg.p_det_scale();
                    [s[0], s[1]]
                },
                ac_detuning: [-mhz_ang(50.0), mhz_ang(425.0)],
                ac_rabi_ceiling: mhz_ang(5.0),
                ac_periods: 16,
                tau_h: cfg.run.window_us,
                tau_s: cfg.run.tau_s_us,
                dt: cfg.bin_us(),
                accept: cfg.accept_us(),
                trials: cfg.run.trials,
                seed: cfg.seed,
                rep_rate: cfg.rep_rate(),
                qubit_drive_mode: true,
            };
            let res = protocols::same_device_bell(&sd)?;
            out.write("fig_ed10d_summary.csv", &window_csv(&res))?;
            out.write("summary.json", &protocol_summary(&res).render())?;
        }
        "multiplexed" => {
            let mut mcfg = MultiplexedConfig::paper_default()?;
            mcfg.trials = cfg.run.trials;
            mcfg.seed = cfg.seed;
            mcfg.dt = cfg.bin_us();
            mcfg.accept = cfg.accept_us();
            let res = protocols::multiplexed_pairs(&mcfg)?;
            let summary = JVal::obj(vec![
                ("predicted_enhancement", JVal::Num(res.predicted_enhancement)),
                ("rate_mult_hz", JVal::Num(res.rate_mult_hz)),
                ("fidelity_mult", JVal::Num(res.fidelity_mult)),
                (
                    "pair1",
                    protocol_summary(&res.pair_results[0]),
                ),
                (
                    "pair2",
                    protocol_summary(&res.pair_results[1]),
                ),
            ]);
            out.write("fig_ed9b_summary.json", &summary.render())?;
            out.write("summary.json", &summary.render())?;
        }
        other => return Err(Error::Unknown(format!("protocol `{other}`"))),
    }
    out.finish()
}

fn tomo_command(args: &TomoArgs) -> Result<()> {
    let counts_text = std::fs::read_to_string(&args.counts)?;
    let readout_text = std::fs::read_to_string(&args.readout)?;
    let counts = CountTable::parse(&counts_text)?;
    let readout = ReadoutMatrix::parse(&readout_text)?;
    let estimate = mle_reconstruct(&counts, &readout, &MleOptions::default())?;

    let target_state = match args.target.as_str() {
        "psi-plus" => Some(crate::protocols::support::psi_plus()),
        "w" => Some(crate::protocols::support::w_state()),
        "none" => None,
        other => return Err(Error::Unknown(format!("target `{other}`"))),
    };
    let fidelity = match &target_state {
        Some(amps) => {
            let psi = crate::qcore::PureState::new(amps.clone())?;
            Some(state_fidelity(&estimate.rho, &psi)?)
        }
        None => None,
    };

    let boot = if args.bootstrap >= 2 {
        let target_state = target_state.clone();
        let fidelity_fn = move |rho: &crate::qcore::DensityMatrix| -> f64 {
            match &target_state {
                Some(amps) => {
                    let psi = crate::qcore::PureState::new(amps.clone()).expect("valid target");
                    state_fidelity(rho, &psi).unwrap_or(0.0)
                }
                None => rho.trace(),
            }
        };
        let observables: Vec<&(dyn Fn(&crate::qcore::DensityMatrix) -> f64 + Sync)> =
            vec![&fidelity_fn];
        Some(bootstrap_errors(
            &estimate.rho,
            &counts,
            &readout,
            args.bootstrap,
            args.seed,
            &observables,
        )?)
    } else {
        None
    };

    let d = estimate.rho.dim();
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = Vec::with_capacity(2 * d);
        for j in 0..d {
            let v = estimate.rho.matrix()[[i, j]];
            row.push(v.re);
            row.push(v.im);
        }
        rows.push(row);
    }
    let summary = JVal::obj(vec![
        ("log_likelihood", JVal::Num(estimate.log_likelihood)),
        ("iterations", JVal::Int(estimate.iterations as i64)),
        ("converged", JVal::Bool(estimate.converged)),
        (
            "cross_check_gap",
            estimate
                .cross_check_gap
                .map(JVal::Num)
                .unwrap_or(JVal::Null),
        ),
        (
            "fidelity",
            fidelity.map(JVal::Num).unwrap_or(JVal::Null),
        ),
        (
            "fidelity_std_err",
            boot.as_ref()
                .map(|b| JVal::Num(b.std_devs[0]))
                .unwrap_or(JVal::Null),
        ),
        (
            "rho",
            JVal::Arr(rows.iter().map(|r| JVal::nums(r)).collect()),
        ),
    ]);
    let rendered = summary.render();
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("tomography.json"), &rendered)?;
        }
        None => print!("{rendered}"),
    }
    if let Some(f) = fidelity {
        let err = boot.as_ref().map(|b| b.std_devs[0]).unwrap_or(0.0);
        println!("fidelity = {f:.4} +- {err:.4}");
    }
    Ok(())
}

fn analyze_command(args: &AnalyzeArgs) -> Result<()> {
    let (name, summary, csv): (&str, JVal, Option<(String, String)>) = match args.model.as_str() {
        "list" => {
            println!(
                "models: ramsey-envelope rephased-envelope precompensated-envelope hom \
                 delayed-echo long-range heralding-rate rate-budget phase-noise-bound aux \
                 repeater error-budget detuned-population"
            );
            return Ok(());
        }
        "ramsey-envelope" | "rephased-envelope" | "precompensated-envelope" => {
            let params = paper_envelope_params()?;
            let mut rows = Vec::new();
            for k in 0..=580 {
                let t0 = k as f64 * 0.005;
                let v = match args.model.as_str() {
                    "ramsey-envelope" => analysis::ramsey_envelope(t0, &params),
                    "rephased-envelope" => analysis::rephased_envelope(t0, &params),
                    _ => analysis::precompensated_envelope(t0, 0.45, &params),
                };
                rows.push(vec![t0 * 1e3, v]);
            }
            let summary = JVal::obj(vec![
                (
                    "gaussian_1e_ns",
                    JVal::Num(analysis::ramsey_gaussian_timescale(params.gamma_star) * 1e3),
                ),
                (
                    "rephased_1e_ns",
                    JVal::Num(1e3 / params.rephased_rate()),
                ),
            ]);
            (
                "envelope",
                summary,
                Some((
                    format!("{}.csv", args.model),
                    render_csv(&["t0_ns", "coherence"], &rows),
                )),
            )
        }
        "hom" => {
            let ion1 = paper_parameter_fixture("ion1")?;
            let ion2 = paper_parameter_fixture("ion2")?;
            // HOM-era linewidths: contrast decays on 205 ns.
            let scale = analysis::ramsey_gaussian_timescale([ion1.gamma_star, ion2.gamma_star])
                / 0.205;
            let hom = analysis::HomParams {
                t1_opt: [ion1.t1_opt, ion2.t1_opt],
                gamma_star: [ion1.gamma_star * scale, ion2.gamma_star * scale],
                mean_optical_diff: mhz_ang(33.0),
                balance: 1.0,
                bin_width: 0.004,
            };
            let mut rows = Vec::new();
            for k in 0..=200 {
                let dt = k as f64 * 0.002;
                rows.push(vec![
                    dt * 1e3,
                    analysis::hom_coincidence(dt, &hom),
                    analysis::hom_visibility(dt, &hom),
                ]);
            }
            let res = analysis::hom_model(&hom, 0.006)?;
            (
                "hom",
                JVal::obj(vec![
                    ("visibility_w6ns", JVal::Num(res.visibility)),
                    ("bin_contrast", JVal::Num(res.bin_contrast)),
                ]),
                Some((
                    "fig_ed1_hom.csv".to_string(),
                    render_csv(&["dt_ns", "coincidence", "visibility"], &rows),
                )),
            )
        }
        "delayed-echo" => {
            let ion3 = paper_parameter_fixture("ion3")?;
            let tau = 1.5;
            let mut rows = Vec::new();
            let mut wait = Vec::new();
            let mut coh = Vec::new();
            for k in 0..=60 {
                let w = 9.0e3 * k as f64 / 60.0;
                let c = analysis::delayed_echo_model(
                    w,
                    tau,
                    ion3.t1_opt,
                    27.0e3,
                    ion3.t2_opt_star,
                    ion3.tau_c,
                );
                rows.push(vec![w * 1e-3, c]);
                wait.push(w);
                coh.push(c);
            }
            let fit = analysis::fit_correlation_time(&wait, &coh, 27.0e3)?;
            (
                "delayed-echo",
                JVal::obj(vec![
                    ("tau_c_ms", JVal::Num(fit.tau_c * 1e-3)),
                    ("b", JVal::Num(fit.b)),
                    (
                        "t2o_star_us",
                        JVal::Num(analysis::t2o_star_from_b(tau, fit.b)),
                    ),
                ]),
                Some((
                    "fig_ed2_delayed_echo.csv".to_string(),
                    render_csv(&["wait_ms", "coherence"], &rows),
                )),
            )
        }
        "long-range" => {
            let ion1 = paper_parameter_fixture("ion1")?;
            let ion2 = paper_parameter_fixture("ion2")?;
            let gamma = mhz_ang(0.067);
            let mut rows = Vec::new();
            for k in 0..=40 {
                let length = 10f64.powf(k as f64 * 0.125);
                let lr = analysis::long_range_coherence(
                    length,
                    200.0,
                    ion1.tau_c,
                    [gamma, gamma],
                    [ion1.t1_opt, ion2.t1_opt],
                    0.5,
                );
                rows.push(vec![length, lr.coherence, lr.diffusion_factor]);
            }
            let asymptote = analysis::long_range_coherence(
                f64::INFINITY,
                200.0,
                ion1.tau_c,
                [gamma, gamma],
                [ion1.t1_opt, ion2.t1_opt],
                0.5,
            );
            (
                "long-range",
                JVal::obj(vec![
                    ("diffusion_factor_infinite", JVal::Num(asymptote.diffusion_factor)),
                    ("coherence_infinite", JVal::Num(asymptote.coherence)),
                ]),
                Some((
                    "long_range.csv".to_string(),
                    render_csv(&["length_km", "coherence", "diffusion_factor"], &rows),
                )),
            )
        }
        "heralding-rate" => {
            let ion1 = paper_parameter_fixture("ion1")?;
            let ion2 = paper_parameter_fixture("ion2")?;
            let rate = analysis::heralding_rate(
                &[0.062, 0.078],
                &[ion1.p_det, ion2.p_det],
                &[ion1.t1_opt, ion2.t1_opt],
                0.5,
                crate::units::hz(12.3e3),
            )?;
            (
                "heralding-rate",
                JVal::obj(vec![
                    ("rate_hz", JVal::Num(rate * 1e6)),
                    (
                        "success_probability",
                        JVal::Num(rate / crate::units::hz(12.3e3)),
                    ),
                ]),
                None,
            )
        }
        "rate-budget" => {
            let budget = analysis::rate_budget(
                &analysis::paper_attempt_steps(),
                &analysis::paper_device1_chain(),
            )?;
            (
                "rate-budget",
                JVal::obj(vec![
                    ("attempt_time_us", JVal::Num(budget.attempt_time)),
                    ("repetition_rate_khz", JVal::Num(budget.repetition_rate * 1e3)),
                    ("device1_p_det", JVal::Num(budget.chain_product)),
                ]),
                None,
            )
        }
        "phase-noise-bound" => {
            let bound = analysis::phase_noise_fidelity_bound(0.037 * TWO_PI);
            (
                "phase-noise-bound",
                JVal::obj(vec![("fidelity_bound", JVal::Num(bound))]),
                None,
            )
        }
        "aux" => {
            let p0 = 0.023;
            let accumulated = analysis::aux_accumulated_population(p0, 1.2e-3, 50);
            (
                "aux",
                JVal::obj(vec![
                    ("p_aux_initial", JVal::Num(p0)),
                    ("p_aux_cycle_average", JVal::Num(accumulated)),
                    ("reported_cycle_average", JVal::Num(0.060)),
                    (
                        "fidelity_bound_factor",
                        JVal::Num(analysis::aux_fidelity_bound(0.060, 1.0)),
                    ),
                ]),
                None,
            )
        }
        "repeater" => {
            let cfg = analysis::RepeaterConfig {
                total_length_km: 100.0,
                halvings: 2,
                multiplex_width: 4,
                p_link: 0.1,
                tau_intra_us: 81.0,
                p_intra: 2.2e-4,
                light_speed_km_per_ms: 200.0,
            };
            let t1 = analysis::repeater_time(&cfg, analysis::RepeaterScheme::One)?;
            let t2 = analysis::repeater_time(&cfg, analysis::RepeaterScheme::Two)?;
            (
                "repeater",
                JVal::obj(vec![
                    ("scheme1_ms", JVal::Num(t1)),
                    ("scheme2_ms", JVal::Num(t2)),
                ]),
                None,
            )
        }
        "detuned-population" => {
            let mut rows = Vec::new();
            for k in -60..=60 {
                let det = mhz_ang(k as f64 * 0.025);
                let single = protocols::detuned_qubit_population(
                    det,
                    protocols::DetunedSequence::WeakPulse,
                    0.062,
                    mhz_ang(5.0),
                    2.9,
                );
                let dd = protocols::detuned_qubit_population(
                    det,
                    protocols::DetunedSequence::WeakPulseTwoDd,
                    0.062,
                    mhz_ang(5.0),
                    2.9,
                );
                rows.push(vec![k as f64 * 0.025, single, dd]);
            }
            (
                "detuned-population",
                JVal::obj(vec![("alpha", JVal::Num(0.062))]),
                Some((
                    "fig_s5_detuned_population.csv".to_string(),
                    render_csv(&["detuning_mhz", "weak_pulse", "weak_pulse_2dd"], &rows),
                )),
            )
        }
        "error-budget" => {
            let mut bell = BellConfig::fig2_default()?;
            bell.trials = 150;
            bell.dt = 0.02;
            let (rows, headline) = protocols::bell_error_budget(&bell)?;
            let table = rows
                .iter()
                .map(|r| {
                    JVal::obj(vec![
                        ("source", JVal::Str(r.source.clone())),
                        ("fidelity_removed", JVal::Num(r.fidelity_removed)),
                        ("fidelity_exclusive", JVal::Num(r.fidelity_exclusive)),
                    ])
                })
                .collect();
            (
                "error-budget",
                JVal::obj(vec![
                    ("rows", JVal::Arr(table)),
                    ("dominant_removed", JVal::Num(headline)),
                ]),
                None,
            )
        }
        other => return Err(Error::Unknown(format!("analysis model `{other}`"))),
    };
    let _ = name;

    let rendered = summary.render();
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.json", args.model)), &rendered)?;
            if let Some((csv_name, csv_text)) = csv {
                std::fs::write(dir.join(csv_name), csv_text)?;
            }
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn paper_envelope_params() -> Result<analysis::EnvelopeParams> {
    let ion1 = paper_parameter_fixture("ion1")?;
    let ion2 = paper_parameter_fixture("ion2")?;
    Ok(analysis::EnvelopeParams {
        mean_optical_diff: mhz_ang(31.0),
        drive_diff: mhz_ang(31.0),
        gamma_star: [ion1.gamma_star, ion2.gamma_star],
        t1_opt: [ion1.t1_opt, ion2.t1_opt],
        t2_spin_star: [30.0, 30.0],
        tau_h: 2.9,
    })
}

fn fixtures_command(args: &FixturesArgs) -> Result<()> {
    match args.action.as_str() {
        "list" => {
            println!("ion parameter sets: {}", ION_FIXTURE_IDS.len());
            for id in ION_FIXTURE_IDS {
                let ion = paper_parameter_fixture(id)?;
                println!(
                    "  {id}: device {} T1o {:.3} us p_det {:.3e}",
                    ion.device, ion.t1_opt, ion.p_det
                );
            }
            let ids = golden_dataset_ids();
            println!("tomography count tables: {}", ids.len());
            println!("readout matrices: {}", ids.len());
            let mut goldens = 0usize;
            let mut reference = 0usize;
            for id in ids {
                let ds = crate::tomography::golden_dataset(id)?;
                println!("  {id}: {} bases", ds.counts.records.len());
                if id == "teleportation" {
                    goldens += ds.golden.len();
                } else {
                    reference += ds.golden.len();
                }
            }
            println!("golden density matrices (teleported states): {goldens}");
            println!("reference reconstructions: {reference}");
            Ok(())
        }
        "export" => {
            let dir = args
                .out
                .clone()
                .ok_or_else(|| Error::InvalidArgument("export needs --out".into()))?;
            export_fixtures(&dir)
        }
        other => Err(Error::Unknown(format!("fixtures action `{other}`"))),
    }
}

pub fn export_fixtures(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir.join("ions"))?;
    std::fs::create_dir_all(dir.join("tomography"))?;
    for (id, text) in ION_FIXTURE_IDS.iter().zip([
        include_str!("../../fixtures/ions/ion1.toml"),
        include_str!("../../fixtures/ions/ion2.toml"),
        include_str!("../../fixtures/ions/ion3.toml"),
        include_str!("../../fixtures/ions/ion4.toml"),
    ]) {
        std::fs::write(dir.join("ions").join(format!("{id}.toml")), text)?;
    }
    std::fs::write(
        dir.join("devices.toml"),
        include_str!("../../fixtures/devices.toml"),
    )?;
    for id in golden_dataset_ids() {
        let (counts, readout, golden) = dataset_text(id)?;
        let base = dir.join("tomography");
        std::fs::write(base.join(format!("{id}_counts.txt")), counts)?;
        std::fs::write(base.join(format!("{id}_readout.txt")), readout)?;
        std::fs::write(base.join(format!("{id}_golden.txt")), golden)?;
    }
    Ok(())
}

/// Parse helper shared by tests: axis string like "XX" to a basis vector.
pub fn parse_basis(text: &str) -> Result<Vec<PauliAxis>> {
    text.chars().map(PauliAxis::from_char).collect()
}
