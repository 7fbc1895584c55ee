use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use heom_core::dataset::{
    extract_features, generate_dataset, DatasetReader, DatasetRecord, GenerateOptions, Manifest, SamplingSpec,
    STORE_TOLERANCE,
};
use heom_core::{propagate, BathSpec, DensityMatrix, HeomConfig, SystemHamiltonian};

use crate::args::{DynamicsArgs, ExportArgs, GenDatasetArgs, InspectArgs, SimulateArgs};

/// Shortest representation that parses back to the same f64.
fn float(v: f64) -> String {
    format!("{v:?}")
}

fn feature_header(n_sites: usize) -> Vec<String> {
    let mut h = vec!["time_ps".to_string()];
    h.extend((1..=n_sites).map(|j| format!("p_{j}")));
    h.extend((1..n_sites).map(|j| format!("c_{j}")));
    h
}

fn label_names(n_sites: usize) -> Vec<String> {
    let mut names: Vec<String> = (2..=n_sites).map(|j| format!("eps_{j}")).collect();
    names.extend((1..n_sites).map(|j| format!("J_{j}_{}", j + 1)));
    names
}

fn csv_sink(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    Ok(csv::Writer::from_writer(w))
}

fn config(d: &DynamicsArgs) -> Result<HeomConfig> {
    let mut cfg = HeomConfig::with_horizon(d.time_ps, d.steps)?;
    cfg.truncation_depth = d.depth;
    cfg.integrator = d.integrator.into();
    cfg.initial_site = d.initial_site - 1;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let d = &args.dynamics;
    let h = SystemHamiltonian::new(args.energies.clone(), args.couplings.clone())?;
    let bath = BathSpec::uniform(args.levels, d.lambda, d.gamma, d.temp)?;
    let cfg = config(d)?;
    let rho0 = DensityMatrix::site_projector(args.levels, cfg.initial_site)?;
    let ev = propagate(&rho0, &h, &bath, &cfg)?;
    let features = extract_features(&ev.rhos, d.coherence.into())?;

    let mut w = csv_sink(args.out.as_deref())?;
    w.write_record(feature_header(args.levels))?;
    for (t, row) in ev.times.iter().zip(features.rows()) {
        w.write_field(float(*t))?;
        w.write_record(row.iter().map(|&v| float(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn gen_dataset(args: &GenDatasetArgs) -> Result<()> {
    let d = &args.dynamics;
    let spec = SamplingSpec::new(args.levels, args.samples, args.seed);
    let bath = BathSpec::uniform(args.levels, d.lambda, d.gamma, d.temp)?;
    let cfg = config(d)?;
    let options = GenerateOptions {
        workers: args.workers,
        coherence: d.coherence.into(),
    };
    let last_pct = AtomicUsize::new(usize::MAX);
    let progress = |done: usize, total: usize| {
        let pct = done * 100 / total.max(1);
        if last_pct.swap(pct, Ordering::Relaxed) != pct {
            eprintln!("generated {done}/{total} samples ({pct}%)");
        }
    };
    let summary = generate_dataset(&spec, &bath, &cfg, &args.out, &options, Some(&progress))
        .with_context(|| format!("generating dataset in {}", args.out.display()))?;
    println!(
        "wrote {} records ({} rejected) to {}",
        summary.manifest.n_records,
        summary.rejects.len(),
        args.out.display()
    );
    println!("checksum_sha256 {}", summary.manifest.checksum_sha256);
    Ok(())
}

pub fn inspect(args: &InspectArgs) -> Result<()> {
    let reader = DatasetReader::open(&args.path).with_context(|| format!("reading {}", args.path.display()))?;
    let m = reader.manifest();
    println!("{}", serde_json::to_string_pretty(m)?);
    println!("checksum: ok");
    println!("rejected samples: {}", reader.rejects().len());

    let names = label_names(m.n_sites);
    let mut min = vec![f64::INFINITY; names.len()];
    let mut max = vec![f64::NEG_INFINITY; names.len()];
    let mut sum = vec![0.0; names.len()];
    let (mut passed, mut failed) = (0usize, 0usize);
    for rec in reader.records(None)? {
        let rec = rec?;
        for (k, &v) in rec.labels.iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
            sum[k] += v;
        }
        let problems = rec.trajectory.check_invariants(STORE_TOLERANCE);
        if problems.is_empty() {
            passed += 1;
        } else {
            failed += 1;
            eprintln!("sample {}: {}", rec.sample_id, problems[0]);
        }
    }
    let count = (passed + failed).max(1) as f64;
    println!("{:<10} {:>12} {:>12} {:>12}", "label", "min", "max", "mean");
    for (k, name) in names.iter().enumerate() {
        println!("{name:<10} {:>12.4} {:>12.4} {:>12.4}", min[k], max[k], sum[k] / count);
    }
    println!("invariant checks: {passed} passed, {failed} failed");
    if failed > 0 {
        bail!("{failed} stored trajectories violate the population/coherence bounds");
    }
    Ok(())
}

fn window_steps(m: &Manifest, window_fs: f64) -> Result<usize> {
    let horizon_fs = m.n_steps as f64 * m.dt_fs;
    let exact = window_fs / m.dt_fs;
    let steps = exact.round();
    if (exact - steps).abs() > 1e-6 * exact.max(1.0) || steps < 1.0 {
        bail!("invalid input: window of {window_fs} fs is not a positive multiple of the {} fs step", m.dt_fs);
    }
    if steps as usize > m.n_steps {
        bail!("invalid input: window of {window_fs} fs exceeds the stored horizon of {horizon_fs} fs");
    }
    Ok(steps as usize)
}

fn write_trajectory(w: &mut csv::Writer<Box<dyn Write>>, rec: &DatasetRecord, with_id: bool) -> Result<()> {
    for (t, row) in rec.trajectory.times.iter().zip(rec.trajectory.features.rows()) {
        if with_id {
            w.write_field(rec.sample_id.to_string())?;
        }
        w.write_field(float(*t))?;
        w.write_record(row.iter().map(|&v| float(v)))?;
    }
    Ok(())
}

pub fn export(args: &ExportArgs) -> Result<()> {
    let reader = DatasetReader::open(&args.path).with_context(|| format!("reading {}", args.path.display()))?;
    let m = reader.manifest();
    let window = args.window_fs.map(|fs| window_steps(m, fs)).transpose()?;
    let header = feature_header(m.n_sites);

    if let Some(id) = args.sample {
        if !reader.sample_ids().contains(&id) {
            bail!("invalid input: sample {id} is not stored in this dataset");
        }
        let rec = reader
            .records(window)?
            .find(|r| r.as_ref().map_or(true, |r| r.sample_id == id))
            .expect("stored id")?;
        let mut w = csv_sink(args.out.as_deref())?;
        w.write_record(&header)?;
        write_trajectory(&mut w, &rec, false)?;
        w.flush()?;
        return Ok(());
    }

    if args.combined {
        let mut w = csv_sink(args.out.as_deref())?;
        w.write_record(std::iter::once("sample_id".to_string()).chain(header))?;
        for rec in reader.records(window)? {
            write_trajectory(&mut w, &rec?, true)?;
        }
        w.flush()?;
        return Ok(());
    }

    let dir = args.out.as_deref().expect("clap requires --out here");
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut labels = csv_sink(Some(&dir.join("labels.csv")))?;
    labels.write_record(std::iter::once("sample_id".to_string()).chain(label_names(m.n_sites)))?;
    for rec in reader.records(window)? {
        let rec = rec?;
        labels.write_field(rec.sample_id.to_string())?;
        labels.write_record(rec.labels.iter().map(|&v| float(v)))?;
        let mut w = csv_sink(Some(&dir.join(format!("sample_{:06}.csv", rec.sample_id))))?;
        w.write_record(&header)?;
        write_trajectory(&mut w, &rec, false)?;
        w.flush()?;
    }
    labels.flush()?;
    Ok(())
}
