use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::json;

use acoustiq::drive_design::{acoustic_wave_requirements, requirements_both_conventions};
use acoustiq::effective::{
    bessel_j, dispersive_couplings, optimal_drive_amplitude, secular_coupling, CouplingMethod,
};
use acoustiq::spectrum::{render_spectrum, sideband_comb, MIN_MARGIN};
use acoustiq::sweep::config::RunConfig;
use acoustiq::sweep::output::{add_map, trajectory_csv, OutputSet, RunManifest};
use acoustiq::sweep::{find_resonances, run_sweep_with, Execution};
use acoustiq::units::{angular_to_hz, hz_to_angular, s_to_ns};
use acoustiq::{DriveParams, Error};

use crate::Common;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_integration_failure() => 3,
        Some(
            Error::Config { .. }
            | Error::InvalidSpec { .. }
            | Error::InvalidDrive { .. }
            | Error::IndexOutOfRange { .. }
            | Error::VanishingDetuning { .. }
            | Error::BesselDomain { .. }
            | Error::TruncationExceeded { .. }
            | Error::CombTooNarrow { .. }
            | Error::OffGrid { .. },
        ) => 2,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config {
        path: "--config".into(),
        message: "this subcommand needs a configuration file".into(),
    })?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(model) = common.model {
        cfg.model = model;
    }
    Ok(cfg)
}

fn commit(common: &Common, mut set: OutputSet, mut manifest: RunManifest, started: Instant) -> Result<()> {
    manifest.outputs = set.names();
    manifest.outputs.push("manifest.json".into());
    manifest.wall_clock_s = started.elapsed().as_secs_f64();
    set.add("manifest.json", manifest.to_json());
    let written = set
        .commit(&common.out)
        .with_context(|| format!("writing outputs to {}", common.out.display()))?;
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

pub fn simulate(common: &Common) -> Result<()> {
    let started = Instant::now();
    let cfg = load(common)?;
    let sim = cfg.simulation()?;
    let traj = sim.run()?;
    let mut set = OutputSet::new();
    set.add("trajectory.csv", trajectory_csv(&traj)?);
    let mut manifest = RunManifest::new("simulate", cfg.to_json_value());
    manifest.integrator = Some(traj.stats);
    for q in 0..traj.num_qubits() {
        let (t, p) = traj.first_peak(q, 0.05);
        println!(
            "qubit {}: max population {:.4}, first peak {:.4} at {:.3} ns",
            q + 1,
            traj.max_population(q),
            p,
            s_to_ns(t)
        );
    }
    println!("max |tr ρ − 1| = {:.2e}", traj.max_trace_drift());
    commit(common, set, manifest, started)
}

pub fn sweep(common: &Common) -> Result<()> {
    let started = Instant::now();
    let cfg = load(common)?;
    let sweep = cfg.sweep_config()?;
    let map = run_sweep_with(&sweep, Execution::Parallel { workers: common.workers })?;
    if let Some(&source) = sweep.excited.first() {
        for target in (0..map.num_qubits()).filter(|&q| q != source) {
            let found: Vec<String> = find_resonances(&map, source, target)?
                .iter()
                .map(|&m| format!("{:.3}", angular_to_hz(m) / 1e9))
                .collect();
            println!(
                "qubit {} -> qubit {}: resonances at M/2π = [{}] GHz",
                source + 1,
                target + 1,
                found.join(", ")
            );
        }
    }
    let mut set = OutputSet::new();
    add_map(&mut set, &map)?;
    let manifest = RunManifest::new("sweep", cfg.to_json_value()).with_map(&map);
    commit(common, set, manifest, started)
}

/// D_i/M and phases from the drive section.
fn drive_shape(cfg: &RunConfig) -> Result<DriveParams> {
    let n = cfg.system_spec()?.num_qubits();
    let has_amplitudes = cfg.drive.as_ref().is_some_and(|d| d.amplitudes_hz.is_some());
    let (ratios, phases) = if has_amplitudes {
        let d = cfg.drive_params()?;
        let r = d.amplitudes.iter().map(|a| a / d.frequency).collect();
        (r, d.phases)
    } else {
        let d = cfg.drive_params().ok();
        (cfg.ratios()?, d.map_or_else(|| vec![0.0; n], |d| d.phases))
    };
    Ok(DriveParams::from_ratios(1.0, &ratios, phases))
}

pub fn effective(common: &Common) -> Result<()> {
    let started = Instant::now();
    let cfg = load(common)?;
    let spec = cfg.system_spec()?;
    let c = dispersive_couplings(&spec)?;
    let n = c.num_qubits();
    let mhz = |w: f64| angular_to_hz(w) / 1e6;

    println!("J_ij / 2π (MHz):");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:10.4}", mhz(c.coupling(i, j)))).collect();
        println!("  {}", row.join(" "));
    }
    let shape = drive_shape(&cfg)?;
    let mut table = Vec::new();
    println!("pair  N   δ_ij/N (GHz)   |G|/2π (MHz)   |G|/J      z        ψ (rad)   π/2|G| (ns)");
    for (i, j) in cfg.pairs()? {
        let delta = c.effective_detuning(i, j);
        for &order in &cfg.effective.orders {
            let series = secular_coupling(c.coupling(i, j), &shape, (i, j), order, CouplingMethod::Series)?;
            let closed = secular_coupling(c.coupling(i, j), &shape, (i, j), order, CouplingMethod::ClosedForm)?;
            let resonance = if order != 0 { delta / order as f64 } else { f64::NAN };
            let transfer = if series.normalized() > 1e-12 {
                format!("{:.4}", s_to_ns(series.transfer_time()))
            } else {
                "-".into()
            };
            println!(
                "{}-{}  {:<3} {:>12.5}   {:>12.4}   {:.5}   {:.5}  {:>8.4}   {:>10}",
                i + 1,
                j + 1,
                order,
                angular_to_hz(resonance) / 1e9,
                mhz(series.magnitude()),
                series.normalized(),
                series.z,
                series.psi,
                transfer
            );
            table.push(json!({
                "pair": [i + 1, j + 1],
                "order": order,
                "resonant_m_hz": angular_to_hz(resonance),
                "g_series_hz": [angular_to_hz(series.value.re), angular_to_hz(series.value.im)],
                "g_closed_form_hz": [angular_to_hz(closed.value.re), angular_to_hz(closed.value.im)],
                "g_over_j": series.normalized(),
                "z": series.z,
                "psi_rad": series.psi,
                "transfer_time_ns": s_to_ns(series.transfer_time()),
            }));
        }
    }
    let record = json!({
        "coupling_matrix_hz": (0..n).map(|i| (0..n).map(|j| angular_to_hz(c.coupling(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "lamb_shifts_hz": c.lamb_shifts().into_iter().map(angular_to_hz).collect::<Vec<_>>(),
        "effective_detunings_hz": (0..n).map(|i| (0..n).map(|j| angular_to_hz(c.effective_detuning(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "secular": table,
    });
    let mut set = OutputSet::new();
    set.add("effective.json", serde_json::to_vec_pretty(&record)?);
    commit(common, set, RunManifest::new("effective", cfg.to_json_value()), started)
}

pub fn spectrum(common: &Common) -> Result<()> {
    let started = Instant::now();
    let cfg = load(common)?;
    let s = cfg.spectrum.as_ref().ok_or_else(|| Error::Config {
        path: "spectrum".into(),
        message: "section is required".into(),
    })?;
    let m = hz_to_angular(s.frequency_hz);
    let d = match (s.ratio, s.amplitude_hz) {
        (Some(r), None) => r * m,
        (None, Some(a)) => hz_to_angular(a),
        _ => {
            return Err(Error::Config {
                path: "spectrum".into(),
                message: "give exactly one of `ratio` and `amplitude_hz`".into(),
            }
            .into())
        }
    };
    let n_max = s.n_max.unwrap_or_else(|| (d / m).ceil() as usize + MIN_MARGIN);
    let comb = sideband_comb(d, m, n_max)?;
    let mut set = OutputSet::new();
    let mut csv = Vec::new();
    comb.write_csv(&mut csv)?;
    set.add("spectrum.csv", csv);
    for line in comb.lines.iter().filter(|l| l.weight > 1e-3) {
        println!("n = {:>3}  offset {:>10.4} GHz  weight {:.6}", line.order, angular_to_hz(line.offset) / 1e9, line.weight);
    }
    if let Some(width_hz) = s.linewidth_hz {
        let gamma = hz_to_angular(width_hz);
        let span = (n_max + 2) as f64 * m;
        let points = s
            .grid_points
            .unwrap_or_else(|| ((2.0 * span) / (gamma / 10.0)).ceil() as usize + 1)
            .max(2);
        let grid: Vec<f64> = (0..points)
            .map(|k| -span + 2.0 * span * k as f64 / (points - 1) as f64)
            .collect();
        let density = render_spectrum(&comb, gamma, &grid)?;
        let mut body = String::from("offset_hz,density_per_hz\n");
        for (w, v) in grid.iter().zip(&density) {
            // density per rad/s → per Hz
            body.push_str(&format!("{:e},{:e}\n", angular_to_hz(*w), v * 2.0 * std::f64::consts::PI));
        }
        set.add("spectrum_rendered.csv", body.into_bytes());
    }
    commit(common, set, RunManifest::new("spectrum", cfg.to_json_value()), started)
}

pub fn drive_design(common: &Common) -> Result<()> {
    let started = Instant::now();
    let cfg = load(common)?;
    let (material, m, ratio) = cfg.material()?;
    let req = acoustic_wave_requirements(&material, m, ratio)?;
    let section = cfg.drive_design.as_ref().expect("checked by material()");
    let pair = requirements_both_conventions(section.deformation_potential, material.sound_speed, m, ratio)?;
    println!("drive M/2π = {:.4} GHz, target D/M = {ratio}", angular_to_hz(m) / 1e9);
    println!("  wavenumber k = M/c      {:.4} μm⁻¹", req.wavenumber * 1e-6);
    println!("  inverse wavelength 1/λ  {:.4} μm⁻¹", req.spatial_frequency * 1e-6);
    println!("  wavelength λ            {:.4} μm", req.wavelength * 1e6);
    println!("  displacement A₀         {:.4} pm", req.displacement_amplitude * 1e12);
    println!("  strain ε                {:.4e}", req.strain_amplitude);
    println!("  D/2π                    {:.4} GHz", angular_to_hz(req.modulation_amplitude) / 1e9);
    println!(
        "  deformation potential read as Hz/strain: A₀ = {:.4} pm, ε = {:.4e}",
        pair.as_cyclic.displacement_amplitude * 1e12,
        pair.as_cyclic.strain_amplitude
    );
    println!(
        "  deformation potential read as rad/s/strain: A₀ = {:.4} pm, ε = {:.4e}",
        pair.as_angular.displacement_amplitude * 1e12,
        pair.as_angular.strain_amplitude
    );
    let record = json!({ "requirement": req, "conventions": pair });
    let mut set = OutputSet::new();
    set.add("drive_design.json", serde_json::to_vec_pretty(&record)?);
    commit(common, set, RunManifest::new("drive-design", cfg.to_json_value()), started)
}

pub fn optimize(_common: &Common) -> Result<()> {
    println!("N   D/M      z = 2D/M   |J_N(z)|");
    for order in 1..=3 {
        let r = optimal_drive_amplitude(order)?;
        println!("{order}   {r:.4}   {:.4}     {:.6}", 2.0 * r, bessel_j(order, 2.0 * r)?.abs());
    }
    Ok(())
}
