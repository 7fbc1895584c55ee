//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use heom_core::dataset::*;
use heom_core::*;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dimer() -> (SystemHamiltonian, BathSpec) {
    (
        SystemHamiltonian::new(vec![0.0, 100.0], vec![100.0]).unwrap(),
        BathSpec::uniform(2, 35.0, 106.1767, 300.0).unwrap(),
    )
}

fn with_integrator(integrator: Integrator) -> HeomConfig {
    HeomConfig {
        integrator,
        ..HeomConfig::default()
    }
}

fn max_diff(a: &Evolution, b: &Evolution) -> f64 {
    a.rhos
        .iter()
        .zip(&b.rhos)
        .flat_map(|(x, y)| x.view().iter().zip(y.view().iter()).map(|(p, q)| (p - q).norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

fn p1_dimer() -> Outcome {
    let (h, bath) = dimer();
    let rho0 = DensityMatrix::site_projector(2, 0).unwrap();
    let t0 = Instant::now();
    let rk4 = propagate(&rho0, &h, &bath, &with_integrator(Integrator::Rk4)).map_err(|e| e.to_string())?;
    let t_rk4 = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let expm = propagate(&rho0, &h, &bath, &with_integrator(Integrator::Expm)).map_err(|e| e.to_string())?;
    let t_expm = t0.elapsed().as_secs_f64();

    let p = rk4.population(0);
    ensure(p[0] == 1.0, || format!("p1(0) = {}", p[0]))?;
    let extrema = (1..p.len() - 1)
        .filter(|&k| rk4.times[k] < 0.5)
        .filter(|&k| (p[k] - p[k - 1]) * (p[k + 1] - p[k]) < 0.0)
        .count();
    ensure(extrema >= 2, || format!("{extrema} extrema before 500 fs"))?;
    let late = &p[4000..];
    let late_swing = late.iter().copied().fold(f64::MIN, f64::max) - late.iter().copied().fold(f64::MAX, f64::min);
    ensure(late_swing < 0.05, || format!("oscillation not damped, late swing {late_swing}"))?;
    let diff = max_diff(&rk4, &expm);
    ensure(diff <= 1e-6, || format!("rk4 vs expm differ by {diff:e}"))?;
    ensure(t_rk4 < 10.0 && t_expm < 10.0, || format!("runtime rk4 {t_rk4:.3}s expm {t_expm:.3}s"))?;
    Ok(format!(
        "{extrema} extrema before 500 fs, rk4 vs expm {diff:.1e}, runtime rk4 {t_rk4:.3}s expm {t_expm:.3}s"
    ))
}

fn p2_invariants() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut runs = 0;
    for n in 2..=4 {
        let spec = SamplingSpec::new(n, 20, 2718);
        let bath = BathSpec::uniform(n, 35.0, 106.1767, 300.0).unwrap();
        let rho0 = DensityMatrix::site_projector(n, 0).unwrap();
        for i in 0..20 {
            let h = sample_hamiltonian(&spec, i).unwrap();
            for integrator in [Integrator::Rk4, Integrator::Expm] {
                let ev = propagate(&rho0, &h, &bath, &with_integrator(integrator))
                    .map_err(|e| format!("N={n} sample {i} {integrator}: {e}"))?;
                ensure(ev.len() == 5001, || format!("{} snapshots", ev.len()))?;
                for (k, rho) in ev.rhos.iter().enumerate() {
                    let tr = (rho.trace() - 1.0).norm();
                    let herm = rho.hermiticity_error();
                    let pop = rho.populations().iter().map(|&p| (-p).max(p - 1.0)).fold(f64::MIN, f64::max);
                    worst = (worst.0.max(tr), worst.1.max(herm), worst.2.max(pop));
                    ensure(tr <= 1e-8 && herm <= 1e-10 && pop <= 1e-8, || {
                        format!("N={n} sample {i} {integrator} step {k}: trace {tr:e}, hermiticity {herm:e}, population excess {pop:e}")
                    })?;
                }
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{runs} runs, worst trace {:.1e}, hermiticity {:.1e}, population excess {:.1e}",
        worst.0, worst.1, worst.2 + 0.0
    ))
}

/// exp(−iHt) ρ exp(iHt) through a real symmetric eigendecomposition.
fn closed_evolution(h: &SystemHamiltonian, rho0: &DensityMatrix, t: f64) -> Array2<Complex64> {
    let n = h.n_sites();
    let hm = h.angular_matrix();
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |r, c| hm[[r, c]]));
    let u = Array2::from_shape_fn((n, n), |(r, c)| {
        (0..n)
            .map(|k| Complex64::from_polar(eig.eigenvectors[(r, k)] * eig.eigenvectors[(c, k)], -eig.eigenvalues[k] * t))
            .sum::<Complex64>()
    });
    let u_dag = u.t().mapv(|z| z.conj());
    u.dot(&rho0.view()).dot(&u_dag)
}

fn p3_unitary_limit() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let spec = SamplingSpec::new(n, 10, 31337);
        let bath = BathSpec::uniform(n, 1e-12, 106.1767, 300.0).unwrap();
        let rho0 = DensityMatrix::site_projector(n, 0).unwrap();
        for i in 0..10 {
            let h = sample_hamiltonian(&spec, i).unwrap();
            for integrator in [Integrator::Rk4, Integrator::Expm] {
                let ev = propagate(&rho0, &h, &bath, &with_integrator(integrator)).map_err(|e| e.to_string())?;
                for (t, rho) in ev.times.iter().zip(&ev.rhos) {
                    let want = closed_evolution(&h, &rho0, *t);
                    let err = rho.view().iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    worst = worst.max(err);
                    ensure(err <= 1e-8, || format!("N={n} sample {i} {integrator} t={t}: {err:e}"))?;
                }
            }
        }
    }
    Ok(format!("30 systems, both integrators, worst deviation {worst:.1e}"))
}

fn p4_combinatorics() -> Outcome {
    // Pascal's triangle up to row 11
    let mut pascal = vec![vec![1u64]];
    for r in 1..=11 {
        let prev = &pascal[r - 1];
        let row = (0..=r).map(|k| if k == 0 || k == r { 1 } else { prev[k - 1] + prev[k] }).collect();
        pascal.push(row);
    }
    for n in 1..=6usize {
        for k in 0..=5u32 {
            let idx = enumerate_hierarchy(n, k);
            let want = pascal[n + k as usize][k as usize];
            ensure(idx.len() as u64 == want, || format!("N={n} K={k}: {} indices, want {want}", idx.len()))?;
            let unique: std::collections::BTreeSet<_> = idx.iter().map(|i| i.components().to_vec()).collect();
            ensure(unique.len() == idx.len(), || format!("N={n} K={k}: duplicate indices"))?;
            ensure(idx.iter().all(|i| i.depth() <= k), || format!("N={n} K={k}: index deeper than K"))?;
        }
    }
    Ok("36 (N, K) pairs match C(N+K, K)".into())
}

fn gen_cli(dir: &Path, workers: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_heom"))
        .args(["gen-dataset", "--levels", "3", "--samples", "24", "--seed", "7", "--workers", workers, "--out"])
        .arg(dir)
        .env_remove("HEOM_WORKERS")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn p5_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reference = tmp.path().join("w1");
    gen_cli(&reference, "1")?;
    let want = dir_bytes(&reference);
    ensure(want.len() == 4, || format!("{} files in dataset directory", want.len()))?;
    for (name, workers) in [("w1-again", "1"), ("w4", "4"), ("wmax", "0")] {
        let dir = tmp.path().join(name);
        gen_cli(&dir, workers)?;
        let got = dir_bytes(&dir);
        ensure(got == want, || format!("workers={workers} ({name}) differs from the first run"))?;
    }
    Ok("4 runs (workers 1, 1, 4, max) byte-identical".into())
}

fn p6_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path().join("ds");
    let spec = SamplingSpec::new(3, 6, 11);
    let bath = BathSpec::uniform(3, 35.0, 106.1767, 300.0).unwrap();
    let cfg = HeomConfig::default();
    generate_dataset(&spec, &bath, &cfg, &dir, &GenerateOptions::default(), None).map_err(|e| e.to_string())?;

    let reader = DatasetReader::open(&dir).map_err(|e| e.to_string())?;
    let mut floats = 0usize;
    for rec in reader.records(None).map_err(|e| e.to_string())? {
        let rec = rec.map_err(|e| e.to_string())?;
        let (labels, traj) =
            simulate_sample(&spec, &bath, &cfg, CoherenceChannel::Real, rec.sample_id).map_err(|e| e.to_string())?;
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(same(&rec.labels, &labels), || format!("labels of sample {} changed", rec.sample_id))?;
        ensure(
            same(rec.trajectory.features.as_slice().unwrap(), traj.features.as_slice().unwrap()),
            || format!("features of sample {} changed", rec.sample_id),
        )?;
        floats += labels.len() + traj.features.len();
    }
    ensure(floats == 6 * (4 + 5000 * 5), || format!("read {floats} floats"))?;

    let features = dir.join(FEATURES_FILE);
    let pristine = fs::read(&features).map_err(|e| e.to_string())?;

    let mut flipped = pristine.clone();
    flipped[pristine.len() / 2] ^= 0x04;
    fs::write(&features, &flipped).map_err(|e| e.to_string())?;
    match DatasetReader::open(&dir) {
        Err(e @ Error::Corruption { .. }) if e.to_string().contains("checksum") => {}
        other => return Err(format!("flipped byte gave {other:?}")),
    }

    let cut = pristine.len() as u64 - 7;
    fs::write(&features, &pristine[..cut as usize]).map_err(|e| e.to_string())?;
    match DatasetReader::open(&dir) {
        Err(Error::Truncated { offset, .. }) if offset == cut => {}
        other => return Err(format!("truncated file gave {other:?}")),
    }
    Ok(format!("{floats} floats bit-exact; flipped byte -> checksum corruption; truncation -> offset {cut}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("P1 dimer dynamics", p1_dimer),
        ("P2 physical invariants", p2_invariants),
        ("P3 unitary limit", p3_unitary_limit),
        ("P4 hierarchy combinatorics", p4_combinatorics),
        ("P5 determinism", p5_determinism),
        ("P6 format round-trip", p6_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
