//! config -> classical trajectory -> {propagators + occupancy, moments}.

use std::time::Instant;

use optocool::classical::{evolve_classical, ClassicalOptions, DriveModel, MeanFieldBath};
use optocool::model::{validate, Warning};
use optocool::moments::{evolve_moments, finite_difference_audit};
use optocool::occupancy::{
    phonon_number, BathNoise, InitialOccupations, InputNoiseForm, OccupancyOptions, ResponseForm,
};
use optocool::propagator::{solve_ml, PropagatorOptions};
use optocool::spectral::{default_mode_band, discretize_bath, eval_j, thermal_occupation, SpectralSamples};
use optocool::{
    BathModes, ClassicalTrajectory, DressedKernel, KernelTables, MomentSeries, OccupancySeries, PhaseIntegral,
    PropagatorPair, QuadratureRule, Schedule, SpectralModel, SystemParams, TimeGrid,
};

use crate::config::{DriveKind, InputNoiseKind, ResponseKind, RunConfig};
use crate::CliError;

pub struct KernelPath {
    pub pair: PropagatorPair,
    pub occupancy: OccupancySeries,
}

pub struct MomentPath {
    pub modes: BathModes,
    pub series: MomentSeries,
    /// Relative finite-difference residuals of `N_a`, `N_b` against the rates.
    pub audit: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub max_abs: f64,
    pub max_rel: f64,
    /// Largest `|dN_b| / max(rel |N_b|, abs)` over the grid; <= 1 passes.
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub tolerance_rel: f64,
    pub tolerance_abs: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

pub struct RunOutput {
    pub config: RunConfig,
    pub params: SystemParams,
    pub model: SpectralModel,
    pub grid: TimeGrid,
    pub schedule: Schedule,
    pub warnings: Vec<String>,
    /// Local decay rate when run as a Markovian baseline.
    pub markovian_rate: Option<f64>,
    pub quad_nodes: usize,
    pub trajectory: ClassicalTrajectory,
    pub phase: PhaseIntegral,
    pub kernel: Option<KernelPath>,
    pub moments: Option<MomentPath>,
    pub comparison: Option<Comparison>,
    pub wall_time: f64,
}

impl RunOutput {
    /// Phonon number of the primary path (kernel if it ran).
    pub fn n_b(&self) -> &[f64] {
        match (&self.kernel, &self.moments) {
            (Some(k), _) => &k.occupancy.total,
            (None, Some(m)) => &m.series.n_b,
            (None, None) => &[],
        }
    }
}

struct Prepared {
    params: SystemParams,
    model: SpectralModel,
    grid: TimeGrid,
    schedule: Schedule,
    warnings: Vec<String>,
    markovian_rate: Option<f64>,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let grid = cfg.time_grid()?;
    let params = cfg.params();
    let model = cfg.spectral_model();
    model.check()?;
    let schedule = cfg.schedule();
    schedule.check()?;
    let validated = validate(&params, &grid)?;
    let warnings = validated
        .warnings
        .iter()
        .map(|w| match w {
            Warning::WeakInitialDisplacement { alpha0_abs } => {
                format!("|alpha0| = {alpha0_abs:.3} is below the linearization threshold")
            }
            Warning::WeakSteadyDisplacement { alpha_ss_abs } => {
                format!("steady |alpha| = {alpha_ss_abs:.3} is below the linearization threshold")
            }
        })
        .collect();
    let markovian_rate = (cfg.run.markovian || model.is_markovian())
        .then(|| 2.0 * std::f64::consts::PI * eval_j(&model, params.omega_m));
    Ok(Prepared { params, model, grid, schedule, warnings, markovian_rate })
}

/// Memory-kernel tables on the configured grid.
pub fn kernel_tables(cfg: &RunConfig) -> Result<(KernelTables, usize), CliError> {
    let grid = cfg.time_grid()?;
    let params = cfg.params();
    let model = cfg.spectral_model();
    if model.is_markovian() {
        return Err(CliError::Config("kernel tables need a structured spectrum (bath.model = ohmic | band)".into()));
    }
    let quad = QuadratureRule::for_model(&model, params.omega_m, grid.t_end(), &cfg.quad_options())?;
    let tables = KernelTables::build(&model, &quad, params.temperature_ratio, params.omega_m, &grid)?;
    Ok((tables, quad.len()))
}

fn classical_options(cfg: &RunConfig) -> ClassicalOptions {
    let drive = match cfg.run.drive_model {
        DriveKind::Locked => DriveModel::Locked,
        DriveKind::SelfConsistent => DriveModel::SelfConsistent,
    };
    ClassicalOptions { drive, constant_g: cfg.run.constant_g }
}

fn occupancy_options(cfg: &RunConfig) -> OccupancyOptions {
    OccupancyOptions {
        response: match cfg.run.response {
            ResponseKind::Derived => ResponseForm::Derived,
            ResponseKind::MainText => ResponseForm::MainText,
        },
        input_noise: match cfg.run.input_noise {
            InputNoiseKind::TwoTime => InputNoiseForm::TwoTime,
            InputNoiseKind::AsPrinted => InputNoiseForm::AsPrinted,
        },
    }
}

fn bath_modes(cfg: &RunConfig, p: &Prepared) -> Result<BathModes, CliError> {
    if cfg.bath.modes == 0 {
        return Ok(BathModes::empty());
    }
    // The Markovian baseline sees a white reservoir of the same local rate.
    let model = match p.markovian_rate {
        Some(gamma_m) => SpectralModel::Flat { gamma_m },
        None => p.model.clone(),
    };
    let band = match cfg.bath.mode_band {
        Some([lo, hi]) => (lo, hi),
        None => default_mode_band(&model, p.params.omega_m),
    };
    Ok(discretize_bath(&model, cfg.bath.modes, band)?)
}

/// Runs the path(s) selected by `run.mode`.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let p = prepare(cfg)?;
    let (params, grid) = (&p.params, &p.grid);
    let omega_m = params.omega_m;

    let (tables, samples, quad_nodes) = match p.markovian_rate {
        Some(_) => (None, None, 0),
        None => {
            let quad = QuadratureRule::for_model(&p.model, omega_m, grid.t_end(), &cfg.quad_options())?;
            let tables = KernelTables::build(&p.model, &quad, params.temperature_ratio, omega_m, grid)?;
            let samples = SpectralSamples::new(&p.model, &quad, params.temperature_ratio, omega_m);
            (Some(tables), Some(samples), quad.len())
        }
    };
    let f_imag = tables.as_ref().map(|t| t.f_imag());
    let mean_field = match (&f_imag, p.markovian_rate) {
        (Some(f), _) => MeanFieldBath::Memory(f),
        (None, Some(gamma)) => MeanFieldBath::Local { gamma },
        (None, None) => MeanFieldBath::None,
    };
    let (trajectory, phase) = evolve_classical(params, mean_field, grid, &p.schedule, classical_options(cfg))?;

    let kernel = if cfg.run.mode.kernel() {
        let free = DressedKernel::free(grid, omega_m);
        let kern = match (&tables, p.markovian_rate) {
            (Some(t), _) => free.with_memory(t)?,
            (None, Some(gamma)) => free.with_local_damping(gamma),
            (None, None) => free,
        }
        .with_coupling(&trajectory, &phase)?;
        let pair = solve_ml(&kern, PropagatorOptions { rwa: cfg.run.rwa })?;
        let noise = match (&samples, p.markovian_rate) {
            (Some(s), _) => BathNoise::Spectral(s),
            (None, Some(gamma)) => {
                BathNoise::Local { gamma, n_th: thermal_occupation(omega_m, params.temperature_ratio, omega_m) }
            }
            (None, None) => BathNoise::None,
        };
        let init = InitialOccupations { m0: params.m0, n0: params.n0 };
        let occupancy = phonon_number(&pair, &trajectory, &phase, noise, init, occupancy_options(cfg))?;
        Some(KernelPath { pair, occupancy })
    } else {
        None
    };

    let moments = if cfg.run.mode.moments() {
        let modes = bath_modes(cfg, &p)?;
        let series = evolve_moments(params, &modes, grid, &trajectory)?;
        let audit = finite_difference_audit(&series)?;
        Some(MomentPath { modes, series, audit })
    } else {
        None
    };

    let comparison = match (&kernel, &moments) {
        (Some(k), Some(m)) => {
            Some(compare(&k.occupancy.total, &m.series.n_b, grid, cfg.run.tolerance_rel, cfg.run.tolerance_abs))
        }
        _ => None,
    };

    Ok(RunOutput {
        config: cfg.clone(),
        params: p.params,
        model: p.model,
        grid: p.grid,
        schedule: p.schedule,
        warnings: p.warnings,
        markovian_rate: p.markovian_rate,
        quad_nodes,
        trajectory,
        phase,
        kernel,
        moments,
        comparison,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Pointwise comparison of two `N_b` series; `reference` sets the relative scale.
pub fn compare(candidate: &[f64], reference: &[f64], grid: &TimeGrid, rel: f64, abs: f64) -> Comparison {
    let mut c = Comparison {
        max_abs: 0.0,
        max_rel: 0.0,
        worst_ratio: 0.0,
        worst_t: 0.0,
        tolerance_rel: rel,
        tolerance_abs: abs,
    };
    for (i, (&a, &b)) in candidate.iter().zip(reference).enumerate() {
        let d = (a - b).abs();
        c.max_abs = c.max_abs.max(d);
        if b != 0.0 {
            c.max_rel = c.max_rel.max(d / b.abs());
        } else if d > 0.0 {
            c.max_rel = f64::INFINITY;
        }
        let ratio = d / (rel * b.abs()).max(abs);
        if ratio > c.worst_ratio || ratio.is_nan() {
            c.worst_ratio = ratio;
            c.worst_t = grid.t(i);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub final_n_b: f64,
    pub min_n_b: f64,
}

pub type SweepResult = (f64, Result<RunOutput, CliError>);

/// One run per value of `axis`; failures are kept per value.
pub fn sweep(cfg: &RunConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepResult>, CliError> {
    let key = crate::config::sweep_key(axis).ok_or_else(|| {
        let known: Vec<_> = crate::config::SWEEP_AXES.iter().map(|(a, _)| *a).collect();
        CliError::Config(format!("unknown sweep axis `{axis}` (expected one of {})", known.join(", ")))
    })?;
    let configs: Vec<_> = values.iter().map(|&v| (v, cfg.with_override(&format!("{key}={v:?}")))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(values.len().max(1));
    let mut results: Vec<Option<Result<RunOutput, CliError>>> = (0..values.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((_, c)) = configs.get(i) else { break };
                let r = match c {
                    Ok(c) => execute(c),
                    Err(e) => Err(CliError::Config(e.to_string())),
                };
                slots.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    Ok(values.iter().copied().zip(results.into_iter().map(|r| r.expect("every value ran"))).collect())
}

impl SweepRow {
    pub fn from_run(value: f64, run: &RunOutput) -> Self {
        let n = run.n_b();
        Self {
            value,
            final_n_b: n.last().copied().unwrap_or(f64::NAN),
            min_n_b: n.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}
