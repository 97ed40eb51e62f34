//! One runner per experiment. Each validates its slice of the config,
//! dispatches into the library, renders the data files, and registers them
//! with the manifest.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use randwave::deviation::{
    continuity_probe, estimate_tail, event_rates, fit_tail_exponent, ContinuityParams,
    EventParams, NormFunctional,
};
use randwave::evolve::{
    evolve_decomposed, evolve_full, fit_growth, EvolveOptions, GuardMode, Split,
    TrajectoryRecord,
};
use randwave::kakutani::{classify, KakutaniThresholds};
use randwave::random::{randomize, CoefficientLaw, SeedSpec};
use randwave::spectral::{Component, NormComponent, Projector, SpectrumPair, WeightedNormParams};

use crate::config::{NamedSplit, RunConfig, SplitSpec};
use crate::manifest::ManifestBuilder;
use crate::output::{fmt_g17, json_f64, json_f64_array};
use crate::CliError;

fn load_base(config: &RunConfig) -> Result<SpectrumPair, CliError> {
    let path = config
        .base_spectrum
        .as_ref()
        .ok_or_else(|| CliError::validation("missing required config key 'base_spectrum'".into()))?;
    let mut base = SpectrumPair::read_file(path)
        .map_err(|e| CliError::validation(format!("base spectrum {path:?}: {e}")))?;
    if let Some(n_max) = config.n_max {
        if n_max != base.n_max() {
            return Err(CliError::validation(format!(
                "config n_max = {n_max} but {path:?} is truncated at {}",
                base.n_max()
            )));
        }
    }
    if let Some(s) = config.s {
        base = base.with_s(s);
    }
    Ok(base)
}

fn law_of(config: &RunConfig) -> Result<CoefficientLaw, CliError> {
    let name = config
        .law
        .as_deref()
        .ok_or_else(|| CliError::validation("missing required config key 'law'".into()))?;
    CoefficientLaw::from_name(name).map_err(CliError::from)
}

fn evolve_options(config: &RunConfig, snapshots: bool) -> Result<EvolveOptions, CliError> {
    let dt = RunConfig::require(&config.dt, "dt")?;
    let t_end = RunConfig::require(&config.t, "t")?;
    if !(dt > 0.0) {
        return Err(CliError::validation(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0) {
        return Err(CliError::validation(format!("t must be positive, got {t_end}")));
    }
    Ok(EvolveOptions {
        dt,
        t_end,
        record_every: config.record_every.unwrap_or(10).max(1),
        snapshots,
        guard: GuardMode::Auto,
        nonlinearity: true,
    })
}

pub fn run_tails(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let base = load_base(config)?;
    let law = law_of(config)?;
    let lambdas = config
        .lambdas
        .clone()
        .ok_or_else(|| CliError::validation("missing required config key 'lambdas'".into()))?;
    let trials = config.trials_at_least(100)?;
    let seed = SeedSpec::new(config.master_seed()?, config.stream_base());

    let functional = match config.functional.as_deref().unwrap_or("sobolev_pair") {
        "sobolev_pair" => NormFunctional::SobolevPair {
            sigma: config.functional_sigma.or(config.s).unwrap_or(0.0),
        },
        "lp_low" => NormFunctional::LpOfLowProjection {
            p: RunConfig::require(&config.functional_p, "functional_p")?,
            n_cut: config.functional_n_cut.unwrap_or(base.n_max()),
        },
        "weighted" => {
            let p1 = RunConfig::require(&config.p1, "p1")?;
            let delta = RunConfig::require(&config.delta, "delta")?;
            if delta <= 1.0 / p1 {
                return Err(CliError::validation(format!(
                    "delta = {delta} must exceed 1/p1 = {}",
                    1.0 / p1
                )));
            }
            NormFunctional::WeightedSpaceTime {
                params: WeightedNormParams {
                    p1,
                    p2: RunConfig::require(&config.p2, "p2")?,
                    delta,
                    t_max: RunConfig::require(&config.t_max, "t_max")?,
                    dt: RunConfig::require(&config.dt, "dt")?,
                },
                projector: projector_of(config)?,
            }
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown functional '{other}' (expected sobolev_pair, lp_low or weighted)"
            )))
        }
    };

    let curve = estimate_tail(&functional, &base, &law, &lambdas, trials, seed)?;
    manifest.seed(seed.master_seed);
    manifest.streams(seed.stream_id, trials);

    let mut csv = String::from("lambda,p_hat,ci_lo,ci_hi,trials\n");
    for k in 0..curve.lambdas.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_g17(curve.lambdas[k]),
            fmt_g17(curve.p_hat[k]),
            fmt_g17(curve.ci_lo[k]),
            fmt_g17(curve.ci_hi[k]),
            curve.trials
        );
    }
    manifest.write_output("tail_curve.csv", csv.as_bytes())?;

    let fit_json = match fit_tail_exponent(&curve) {
        Ok(fit) => format!(
            "{{\n  \"c_hat\": {},\n  \"prefactor\": {},\n  \"r_squared\": {},\n  \"points_used\": {}\n}}\n",
            json_f64(fit.c),
            json_f64(fit.prefactor),
            json_f64(fit.r_squared),
            fit.points_used
        ),
        Err(e) => format!("{{\n  \"fit\": null,\n  \"reason\": \"{e}\"\n}}\n"),
    };
    manifest.write_output("tail_fit.json", fit_json.as_bytes())?;
    Ok(())
}

fn projector_of(config: &RunConfig) -> Result<Projector, CliError> {
    match config.projector.as_deref().unwrap_or("nonzero") {
        "full" => Ok(Projector::Full),
        "nonzero" => Ok(Projector::NonZero),
        "high" => Ok(Projector::High(RunConfig::require(
            &config.projector_n,
            "projector_n",
        )?)),
        other => Err(CliError::validation(format!(
            "unknown projector '{other}' (expected full, nonzero or high)"
        ))),
    }
}

pub fn run_events(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let base = load_base(config)?;
    let law = law_of(config)?;
    let params = EventParams {
        s: RunConfig::require(&config.s, "s")?,
        epsilon: RunConfig::require(&config.epsilon, "epsilon")?,
        delta: RunConfig::require(&config.delta, "delta")?,
        delta_tilde: RunConfig::require(&config.delta_tilde, "delta_tilde")?,
        t_max: RunConfig::require(&config.t_max, "t_max")?,
        dt: RunConfig::require(&config.dt, "dt")?,
    };
    let n_list = config
        .n_list
        .clone()
        .ok_or_else(|| CliError::validation("missing required config key 'n_list'".into()))?;
    let trials = config.trials_at_least(1)?;
    let seed = SeedSpec::new(config.master_seed()?, config.stream_base());

    let rates = event_rates(&base, &law, &params, &n_list, trials, seed)?;
    manifest.seed(seed.master_seed);
    manifest.streams(seed.stream_id, trials);

    let mut csv = String::from(
        "n,rate_f,rate_g,rate_h,rate_k,rate_e,comp_f,comp_f_lo,comp_f_hi,comp_g,comp_g_lo,comp_g_hi,comp_h,comp_h_lo,comp_h_hi,comp_k,comp_k_lo,comp_k_hi,comp_e,comp_e_lo,comp_e_hi,trials\n",
    );
    for c in &rates.cutoffs {
        let mut row = format!("{}", c.n);
        for j in 0..5 {
            let _ = write!(row, ",{}", fmt_g17(c.rate[j]));
        }
        for j in 0..5 {
            let _ = write!(
                row,
                ",{},{},{}",
                fmt_g17(c.complement[j]),
                fmt_g17(c.complement_ci[j].0),
                fmt_g17(c.complement_ci[j].1)
            );
        }
        let _ = writeln!(csv, "{row},{}", rates.trials);
    }
    manifest.write_output("event_rates.csv", csv.as_bytes())?;
    Ok(())
}

pub fn run_growth(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let base = load_base(config)?;
    let law = law_of(config)?;
    let s = RunConfig::require(&config.s, "s")?;
    if !(0.0..1.0).contains(&s) {
        return Err(CliError::validation(format!("s must lie in [0, 1), got {s}")));
    }
    let trials = config.trials_at_least(1)?;
    let opts = evolve_options(config, false)?;
    let split = split_of(config).unwrap_or(SplitSpec::Named(NamedSplit::All));
    let seed = SeedSpec::new(config.master_seed()?, config.stream_base());

    let trajectories: Vec<(u64, TrajectoryRecord)> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<(u64, TrajectoryRecord), randwave::Error> {
            let stream = seed.stream_id + k;
            let draw = randomize(&base, &law, seed.with_stream(stream))?;
            let traj = match split {
                SplitSpec::Named(NamedSplit::Full) => evolve_full(&draw, &opts)?,
                SplitSpec::Named(NamedSplit::All) => evolve_decomposed(&draw, Split::All, &opts)?,
                SplitSpec::Cutoff(n) => evolve_decomposed(&draw, Split::At(n), &opts)?,
            };
            Ok((stream, traj))
        })
        .collect::<Result<Vec<_>, _>>()?;
    manifest.seed(seed.master_seed);
    manifest.streams(seed.stream_id, trials);

    let mut fits_csv = String::from("stream_id,m,exponent,prefactor,residual,degenerate\n");
    let bound = if s > 0.0 { (1.0 - s) / s + 1.0 } else { f64::INFINITY };
    let mut below = 0u64;
    let mut fitted = 0u64;
    for (stream, traj) in &trajectories {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)
            .map_err(|e| CliError::io(format!("trajectory csv: {e}")))?;
        manifest.write_output(&format!("traj_{stream}.csv"), &buf)?;
        match fit_growth(std::slice::from_ref(traj), s) {
            Ok(fit) => {
                let _ = writeln!(
                    fits_csv,
                    "{stream},{},{},{},{},{}",
                    fmt_g17(fit.m),
                    fmt_g17(fit.exponent),
                    fmt_g17(fit.prefactor),
                    fmt_g17(fit.residual),
                    fit.degenerate
                );
                fitted += 1;
                if fit.exponent <= bound {
                    below += 1;
                }
            }
            Err(e) => {
                let _ = writeln!(fits_csv, "{stream},nan,nan,nan,nan,error: {e}");
            }
        }
    }
    manifest.write_output("growth_fits.csv", fits_csv.as_bytes())?;

    let summary = format!(
        "{{\n  \"s\": {},\n  \"exponent_bound\": {},\n  \"trials\": {},\n  \"fitted\": {},\n  \"within_bound\": {},\n  \"within_bound_fraction\": {}\n}}\n",
        json_f64(s),
        json_f64(bound),
        trials,
        fitted,
        below,
        json_f64(if fitted > 0 { below as f64 / fitted as f64 } else { f64::NAN }),
    );
    manifest.write_output("growth_summary.json", summary.as_bytes())?;
    Ok(())
}

fn split_of(config: &RunConfig) -> Option<SplitSpec> {
    config.n_split
}

pub fn run_continuity(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let base = load_base(config)?;
    let law = law_of(config)?;
    let etas = config
        .etas
        .clone()
        .ok_or_else(|| CliError::validation("missing required config key 'etas'".into()))?;
    let pairs = config.pairs_per_eta.unwrap_or(100);
    if pairs < 1 {
        return Err(CliError::validation("pairs_per_eta must be positive".into()));
    }
    let params = ContinuityParams {
        s: RunConfig::require(&config.s, "s")?,
        ball_radius: RunConfig::require(&config.ball_radius, "ball_radius")?,
        t_end: RunConfig::require(&config.t, "t")?,
        dt: RunConfig::require(&config.dt, "dt")?,
        record_every: config.record_every.unwrap_or(10).max(1),
        pairs_per_eta: pairs,
        max_attempts: config.max_attempts.unwrap_or(64),
    };
    let seed = SeedSpec::new(config.master_seed()?, config.stream_base());
    let report = continuity_probe(&base, &law, &params, &etas, seed)?;
    manifest.seed(seed.master_seed);
    manifest.streams(
        seed.stream_id,
        2 * (etas.len() * pairs) as u64 * params.max_attempts as u64,
    );

    let mut json = String::from("{\n  \"per_eta\": [\n");
    for (i, r) in report.per_eta.iter().enumerate() {
        let _ = write!(
            json,
            "    {{\"eta\": {}, \"samples\": {}, \"rejections\": {}, \"quantiles\": {}, \"mean\": {}}}{}",
            json_f64(r.eta),
            r.samples,
            r.rejections,
            json_f64_array(&r.quantiles),
            json_f64(r.mean),
            if i + 1 == report.per_eta.len() { "\n" } else { ",\n" }
        );
    }
    let _ = write!(
        json,
        "  ],\n  \"slope\": {},\n  \"slope_residual\": {}\n}}\n",
        json_f64(report.slope),
        json_f64(report.slope_residual)
    );
    manifest.write_output("continuity_report.json", json.as_bytes())?;
    Ok(())
}

pub fn run_kakutani(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    if let Some(law) = config.law.as_deref() {
        if !law.eq_ignore_ascii_case("gaussian") {
            return Err(CliError::validation(format!(
                "the equivalence verdict is defined for the gaussian law only, got '{law}'"
            )));
        }
    }
    let base = load_base(config)?;
    let other_path = config
        .other_spectrum
        .as_ref()
        .ok_or_else(|| CliError::validation("missing required config key 'other_spectrum'".into()))?;
    let other = SpectrumPair::read_file(other_path)
        .map_err(|e| CliError::validation(format!("other spectrum {other_path:?}: {e}")))?;
    let report = classify(&base, &other, &KakutaniThresholds::default())?;

    let json = format!(
        "{{\n  \"log_affinity\": {},\n  \"affinity\": {},\n  \"partial_ratio_sum\": {},\n  \"verdict\": \"{:?}\",\n  \"zero_mismatch\": {},\n  \"tail_mean\": {},\n  \"slots\": {}\n}}\n",
        json_f64(report.log_affinity),
        json_f64(report.affinity),
        json_f64(report.partial_ratio_sum),
        report.verdict,
        report.zero_mismatch,
        json_f64(report.tail_mean),
        report.slots
    );
    manifest.write_output("affinity_report.json", json.as_bytes())?;
    Ok(())
}

pub fn run_evolve(
    config: &RunConfig,
    manifest: &mut ManifestBuilder,
    _out_dir: &Path,
) -> Result<(), CliError> {
    let base = load_base(config)?;
    let opts = evolve_options(config, false)?;
    let seed = SeedSpec::new(config.master_seed.unwrap_or(0), config.stream_base());
    let data = match config.law.as_deref() {
        Some(_) => {
            let law = law_of(config)?;
            manifest.seed(seed.master_seed);
            manifest.streams(seed.stream_id, 1);
            randomize(&base, &law, seed)?
        }
        None => base,
    };
    let traj = match split_of(config).unwrap_or(SplitSpec::Named(NamedSplit::Full)) {
        SplitSpec::Named(NamedSplit::Full) => evolve_full(&data, &opts)?,
        SplitSpec::Named(NamedSplit::All) => evolve_decomposed(&data, Split::All, &opts)?,
        SplitSpec::Cutoff(n) => evolve_decomposed(&data, Split::At(n), &opts)?,
    };
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)
        .map_err(|e| CliError::io(format!("trajectory csv: {e}")))?;
    manifest.write_output(&format!("traj_{}.csv", seed.stream_id), &buf)?;
    Ok(())
}

/// Base-spectrum generator profiles.
pub enum Profile {
    SingleMode { n: [i32; 3] },
    PowerDecay { sigma: f64, n_max: u32, scale: f64 },
    Custom { from: std::path::PathBuf },
}

pub fn make_base(profile: Profile, s: f64, out: &Path) -> Result<(), CliError> {
    let sp = match profile {
        Profile::SingleMode { n } => {
            let radius = ((n[0] as i64).pow(2) + (n[1] as i64).pow(2) + (n[2] as i64).pow(2))
                as f64;
            let n_max = radius.sqrt().ceil() as u32;
            let mut sp = SpectrumPair::zero(s, n_max.max(1));
            sp.set_mode(n, Component::Position, 1.0, 0.0)
                .map_err(CliError::from)?;
            sp
        }
        Profile::PowerDecay { sigma, n_max, scale } => {
            if s >= sigma - 1.5 {
                eprintln!(
                    "warning: s = {s} is not below sigma - 3/2 = {}; the data leaves H^s as the truncation grows",
                    sigma - 1.5
                );
            }
            let mut sp = SpectrumPair::zero(s, n_max);
            sp.set_zero_mode(Component::Position, scale);
            sp.set_zero_mode(Component::Velocity, scale);
            for (k, m) in sp.modes().clone().iter().enumerate() {
                let w = scale * m.bracket_sq().powf(-0.5 * sigma);
                sp.coef_mut()[k] = randwave::spectral::ModeCoef {
                    b: [w, w],
                    c: [w, w],
                };
            }
            sp
        }
        Profile::Custom { from } => SpectrumPair::read_file(&from)
            .map_err(|e| CliError::validation(format!("custom profile {from:?}: {e}")))?
            .with_s(s),
    };
    sp.write_file(out)
        .map_err(|e| CliError::io(format!("writing {out:?}: {e}")))?;
    let norm = sp.sobolev_norm(s, NormComponent::Pair)?;
    println!(
        "wrote {} ({} modes, n_max {}); H^{} pair norm = {}",
        out.display(),
        sp.coef().len(),
        sp.n_max(),
        s,
        fmt_g17(norm)
    );
    Ok(())
}
