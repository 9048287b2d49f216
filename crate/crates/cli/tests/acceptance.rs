//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! exits non-zero if any check fails.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use kerrspec::circuit::{
    bcs_gap, charging_energy, critical_current_density, effective_junction_number, junction_kerr,
    mattis_bardeen_sheet_inductance, qubit_frequency_vs_field,
};
use kerrspec::constants::{HBAR, MU_0, PLANCK};
use kerrspec::estimation::{
    fit_field_dependence, fit_fluorescence_trace, fit_lorentzian_peak, fit_power_series, fit_rabi_power_law,
    fit_rabi_power_law_with_intercept, fluorescence_model, RabiPoint,
};
use kerrspec::fluorescence::{excited_population, mollow_splittings, reflection_two_level};
use kerrspec::io::{load_assembly, RunConfig};
use kerrspec::kerr::{
    build_kerr_hamiltonian, build_liouvillian, drive_amplitude, extract_multiphoton_peaks, kerr_shift_series, ladder_windows,
    photon_number_curve, solve_point, steady_state, sweep_spectrum, DensityMatrix,
};
use kerrspec::magnetics::{
    conversion_factor, helmholtz_field, homogeneity_report, loop_field, Assembly, LoopKernel,
};
use kerrspec::units::{dbm_to_watt, hz_to_angular};
use kerrspec::{CircuitParams, CoilGeometry, ComplexTrace, HelmholtzPair, KerrModel, TwoLevelParams, Vec3};

struct Suite {
    failed: usize,
}

impl Suite {
    fn check(&mut self, id: &str, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} [{id}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn runtime(&mut self, id: &str, elapsed: Duration, budget: Duration) {
        self.check(
            id,
            "runtime",
            elapsed < budget,
            format!("{:.1} s (budget {} s)", elapsed.as_secs_f64(), budget.as_secs()),
        );
    }
}

fn repo(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

fn reference_config() -> RunConfig {
    RunConfig::load(&repo("configs/reference.toml")).expect("reference config")
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn table(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.trim().parse().unwrap()).collect())
        .collect()
}

fn ladder(suite: &mut Suite) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_kerrspec"))
        .args(["simulate-spectrum"])
        .arg(repo("configs/reference.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .expect("binary runs");
    let elapsed = start.elapsed();
    suite.check("1", "simulate-spectrum exit status", status.success(), format!("{status}"));
    if !status.success() {
        return;
    }
    let peaks = table(&out.join("peaks.csv"));
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[0][1] - w[1][1]).collect();
    let worst = spacings.iter().map(|s| (s - 2.25e6).abs()).fold(0.0, f64::max);
    suite.check(
        "1",
        "consecutive peak spacing 2.25 MHz +- 0.05 MHz",
        peaks.len() >= 3 && worst <= 0.05e6,
        format!(
            "{} peaks, spacings [{}] MHz",
            peaks.len(),
            spacings.iter().map(|s| format!("{:.4}", s / 1e6)).collect::<Vec<_>>().join(", ")
        ),
    );
    let f3 = peaks.iter().find(|r| r[0] == 3.0).map(|r| r[1]).unwrap_or(f64::NAN);
    suite.check(
        "1",
        "f3 = 7.4842 GHz +- 25 kHz",
        (f3 - 7.4842e9).abs() <= 25e3,
        format!("f3 = {:.7} GHz", f3 / 1e9),
    );
    suite.runtime("1", elapsed, Duration::from_secs(600));
}

fn kerr_constancy(suite: &mut Suite) {
    let model = KerrModel::reference();
    let max_order = 11;
    let freqs = ladder_windows(&model, max_order, 10e3, 150e3).unwrap();
    let powers: Vec<f64> = (0..28).map(|i| dbm_to_watt(-150.0 + 2.0 * i as f64)).collect();
    let start = Instant::now();
    let grid = sweep_spectrum(&model, &freqs, &powers).unwrap();
    let result = extract_multiphoton_peaks(&grid, max_order).and_then(|peaks| {
        let pairs: Vec<(usize, f64)> = peaks.iter().map(|p| (p.order, p.frequency)).collect();
        kerr_shift_series(&pairs)
    });
    match result {
        Ok(series) => {
            let k: Vec<f64> = series.iter().filter(|(n, _)| *n <= 10).map(|&(_, k)| k / TAU).collect();
            let ok = k.len() == 10 && k.iter().all(|v| (v - 4.5e6).abs() <= 0.1e6);
            suite.check(
                "2",
                "K(n) = 4.5 MHz +- 0.1 MHz for n = 1..10",
                ok,
                format!("[{}] MHz", k.iter().map(|v| format!("{:.4}", v / 1e6)).collect::<Vec<_>>().join(", ")),
            );
        }
        Err(e) => suite.check("2", "K(n) = 4.5 MHz +- 0.1 MHz for n = 1..10", false, e.to_string()),
    }
    println!("     [2] sweep of {} points in {:.1} s", grid.s11.len(), start.elapsed().as_secs_f64());
}

fn qubit_limit(suite: &mut Suite) {
    let model = KerrModel::reference();
    let attenuation_db = 103.0;
    let powers_dbm: Vec<f64> = vec![-168.0, -164.0, -160.0, -156.0, -152.0, -148.0, -144.0, -141.0, -138.0];
    let freqs: Vec<f64> = (0..201).map(|i| model.mode_frequency - 300e3 + 3e3 * i as f64).collect();
    let start = Instant::now();
    let traces: Vec<ComplexTrace> = powers_dbm
        .iter()
        .map(|&dbm| {
            let p = dbm_to_watt(dbm);
            let s11: Vec<Complex64> = freqs.par_iter().map(|&f| solve_point(&model, f, p).unwrap().1).collect();
            ComplexTrace::new(freqs.clone(), s11, p).unwrap()
        })
        .collect();
    let (stage1, fits) = match fit_power_series(&traces[0], &traces[1..]) {
        Ok(r) => r,
        Err(e) => {
            suite.check("3", "two-stage fit of Kerr traces", false, e.to_string());
            return;
        }
    };
    suite.check(
        "3",
        "low-power fit recovers kappa and gamma within 2%",
        rel(stage1.value("kappa").unwrap(), model.external_rate) < 0.02
            && rel(stage1.value("gamma").unwrap(), model.internal_rate) < 0.02,
        format!(
            "kappa/2pi = {:.3} kHz, gamma/2pi = {:.3} kHz",
            stage1.value("kappa").unwrap() / TAU / 1e3,
            stage1.value("gamma").unwrap() / TAU / 1e3
        ),
    );
    let on_chip: Vec<f64> = powers_dbm[1..].iter().map(|&d| dbm_to_watt(d)).collect();
    let rabi: Vec<f64> = fits.iter().map(|r| r.value("rabi").unwrap()).collect();
    let points: Vec<RabiPoint> = on_chip
        .iter()
        .zip(&rabi)
        .map(|(&p, &r)| RabiPoint {
            power: p * 10f64.powf(attenuation_db / 10.0),
            rabi: r,
        })
        .collect();
    let law = fit_rabi_power_law(&points, model.external_rate, model.mode_frequency).unwrap();
    let slope = law.value("slope").unwrap();
    let line_dev = points
        .iter()
        .map(|p| rel(p.rabi, (slope * p.power).sqrt()))
        .fold(0.0, f64::max);
    suite.check(
        "3",
        "Rabi rate linear in sqrt(P) through the origin within 2% per point",
        line_dev < 0.02,
        format!("max deviation {:.3}%", 100.0 * line_dev),
    );
    let ideal_dev = on_chip
        .iter()
        .zip(&rabi)
        .map(|(&p, &r)| {
            let alpha = (p / (HBAR * hz_to_angular(model.mode_frequency))).sqrt();
            rel(r, 2.0 * model.external_rate.sqrt() * alpha)
        })
        .fold(0.0, f64::max);
    suite.check(
        "3",
        "Rabi rate equals 2 sqrt(kappa) alpha_in within 2% per point",
        ideal_dev < 0.02,
        format!("max deviation {:.3}%", 100.0 * ideal_dev),
    );
    let att = law.value("attenuation_db").unwrap();
    suite.check(
        "3",
        "attenuation recovery 103 dB +- 0.5 dB",
        (att - attenuation_db).abs() <= 0.5,
        format!("{att:.4} dB"),
    );
    suite.runtime("3", start.elapsed(), Duration::from_secs(300));
}

fn resonant_dip(suite: &mut Suite) {
    let params = TwoLevelParams::reference();
    let two_level = reflection_two_level(0.0, 0.0, &params).unwrap();
    let model = KerrModel::reference();
    let kerr = solve_point(&model, model.mode_frequency, dbm_to_watt(-230.0)).unwrap().1;
    for (label, s) in [("two-level", two_level), ("Kerr", kerr)] {
        suite.check(
            "4",
            &format!("{label} resonant dip -0.600 +- 0.001"),
            (s.re + 0.6).abs() <= 1e-3 && s.im.abs() <= 1e-3,
            format!("S11 = {:.6} {:+.2e}i", s.re, s.im),
        );
    }
    let (t_k, t_g) = params.lifetimes();
    suite.check(
        "4",
        "lifetimes 1/kappa = 3.98 us and 1/gamma = 15.9 us",
        (t_k * 1e6 - 3.98).abs() < 0.005 && (t_g * 1e6 - 15.9).abs() < 0.05,
        format!("{:.4} us, {:.3} us", t_k * 1e6, t_g * 1e6),
    );
}

fn circuit_numbers(suite: &mut Suite) {
    let ec = charging_energy(137e-15).unwrap();
    suite.check(
        "5",
        "charging energy 141 MHz +- 1 MHz",
        (ec / TAU - 141e6).abs() <= 1e6,
        format!("{:.4} MHz", ec / TAU / 1e6),
    );
    let n = effective_junction_number(ec, hz_to_angular(4.48e6)).unwrap();
    suite.check("5", "effective junction number 5.6", (n - 5.6).abs() < 0.05, format!("{n:.4}"));
    let jc = critical_current_density(6.0, 2.7e-9, 2e-15).unwrap() * 1e-9;
    suite.check(
        "5",
        "critical current density 0.37 mA/um^2",
        (jc - 0.37).abs() < 0.005,
        format!("{jc:.5} mA/um^2"),
    );
    let l_sq = mattis_bardeen_sheet_inductance(1800.0, bcs_gap(1.9).unwrap()).unwrap();
    suite.check(
        "5",
        "sheet inductance 1.31 nH/sq",
        (l_sq * 1e9 - 1.31).abs() < 0.005,
        format!("{:.5} nH/sq", l_sq * 1e9),
    );
    let k = junction_kerr(hz_to_angular(7.4887e9), 5e-6, 0.02).unwrap() / TAU;
    suite.check(
        "5",
        "junction Kerr 5 kHz +- 0.5 kHz",
        (k - 5e3).abs() <= 0.5e3,
        format!("{:.4} kHz", k / 1e3),
    );
}

fn field_model(suite: &mut Suite) {
    let start = Instant::now();
    let circuit = CircuitParams::reference();
    let f0 = qubit_frequency_vs_field(0.0, &circuit).unwrap();
    let fields: Vec<f64> = (0..=140).map(|i| i as f64 * 1e-3).collect();
    let shifts: Vec<f64> = fields.iter().map(|&b| qubit_frequency_vs_field(b, &circuit).unwrap() - f0).collect();
    suite.check(
        "6",
        "frequency shift monotone in field",
        shifts.windows(2).all(|w| w[1] < w[0]),
        format!("{} fields up to 140 mT", fields.len()),
    );
    let d70 = qubit_frequency_vs_field(0.070, &circuit).unwrap() - f0;
    suite.check(
        "6",
        "shift at 70 mT within 10% of -54.3348 MHz",
        rel(d70, -54.334779707595825e6) <= 0.1,
        format!("{:.6} MHz", d70 / 1e6),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 50e3).unwrap();
    let points: Vec<(f64, f64)> = (0..=24)
        .map(|i| {
            let b = i as f64 * 5e-3;
            (b, qubit_frequency_vs_field(b, &circuit).unwrap() + noise.sample(&mut rng))
        })
        .collect();
    let mut guess = circuit;
    guess.al_critical_field = 0.170;
    guess.al_kinetic_inductance_zero_field = 180e-12;
    match fit_field_dependence(&points, &guess) {
        Ok(fit) => {
            let bc = fit.value("al_critical_field").unwrap();
            let lk = fit.value("al_kinetic_inductance_zero_field").unwrap();
            suite.check(
                "6",
                "noisy fit recovers B_c = 150 +- 5 mT and L_k = 200 +- 5 pH",
                fit.converged && (bc - 0.150).abs() <= 5e-3 && (lk - 200e-12).abs() <= 5e-12,
                format!("B_c = {:.3} mT, L_k = {:.3} pH", bc * 1e3, lk * 1e12),
            );
        }
        Err(e) => suite.check("6", "noisy fit recovers B_c and L_k", false, e.to_string()),
    }
    suite.runtime("6", start.elapsed(), Duration::from_secs(60));
}

fn saturation(suite: &mut Suite) {
    let start = Instant::now();
    let qubit = KerrModel::reference().with_truncation(2);
    let high: Vec<f64> = [-110.0, -100.0, -90.0].iter().map(|&d| dbm_to_watt(d)).collect();
    let n = photon_number_curve(&qubit, &high, 0.0).unwrap();
    suite.check(
        "7",
        "two-level photon number saturates at 0.500 +- 1e-4",
        (n[2] - 0.5).abs() <= 1e-4 && n.windows(2).all(|w| w[1] >= w[0]),
        format!("[{}]", n.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")),
    );
    let p = dbm_to_watt(-138.0);
    let mut multi = KerrModel::reference();
    multi.self_kerr = hz_to_angular(4.48e6);
    let nq = photon_number_curve(&qubit, &[p], 0.0).unwrap()[0];
    let nm = photon_number_curve(&multi, &[p], 0.0).unwrap()[0];
    suite.check(
        "7",
        "multi-level photon number within 1% of the qubit at -138 dBm",
        rel(nm, nq) < 0.01,
        format!("qubit {nq:.6}, multi-level {nm:.6}, deviation {:.3}%", 100.0 * rel(nm, nq)),
    );
    let drive = drive_amplitude(&qubit, p).unwrap();
    let closed = excited_population(drive, 0.0, &TwoLevelParams::reference()).unwrap();
    suite.check(
        "7",
        "two-level Lindblad curve matches the Bloch population",
        (nq - closed).abs() < 1e-9,
        format!("{nq:.9} vs {closed:.9}"),
    );
    suite.runtime("7", start.elapsed(), Duration::from_secs(120));
}

fn mollow(suite: &mut Suite) {
    let kappa = hz_to_angular(40e3);
    let f = 7.4887e9;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = dbm_to_watt(rng.random_range(-170.0..-120.0));
        let d = hz_to_angular(rng.random_range(-2e6..2e6));
        let (mollow, at) = mollow_splittings(p, d, kappa, f).unwrap();
        let omega = (4.0 * kappa * p / (PLANCK * f)).sqrt();
        let r = (d * d + omega * omega).sqrt() / TAU;
        worst = worst.max(rel(mollow, 2.0 * r)).max(rel(at, r));
    }
    suite.check("8", "splittings equal 2 Omega_R and Omega_R", worst < 1e-12, format!("max relative error {worst:.2e}"));
    let d = hz_to_angular(200e3);
    let (m0, a0) = mollow_splittings(0.0, d, kappa, f).unwrap();
    suite.check(
        "8",
        "zero power collapses to (2 Delta, Delta)/2pi",
        rel(m0, 400e3) < 1e-12 && rel(a0, 200e3) < 1e-12,
        format!("{m0:.6} Hz, {a0:.6} Hz"),
    );
    let p = dbm_to_watt(-150.0);
    let (m1, a1) = mollow_splittings(p, 0.0, kappa, f).unwrap();
    let (m4, a4) = mollow_splittings(100.0 * p, 0.0, kappa, f).unwrap();
    suite.check(
        "8",
        "splittings scale as sqrt(P) on resonance",
        rel(m4, 10.0 * m1) < 1e-12 && rel(a4, 10.0 * a1) < 1e-12,
        format!("ratio {:.12}", m4 / m1),
    );
}

fn magnetostatics(suite: &mut Suite) {
    let start = Instant::now();
    let (r, i) = (7e-3, 0.3);
    let b = loop_field(r, i, Vec3::zeros(), LoopKernel::Exact).unwrap();
    let expected = MU_0 * i / (2.0 * r);
    suite.check("9", "loop centre field mu0 I / 2R", rel(b.z, expected) < 1e-12, format!("relative error {:.2e}", rel(b.z, expected)));

    let coil = CoilGeometry {
        layer_count: 1,
        turns_per_layer: 1,
        inner_radius: 10e-3,
        length: 1e-6,
        wire_diameter: 1e-6,
        axis: Vec3::z(),
        center: Vec3::zeros(),
    };
    let pair = HelmholtzPair::new(coil, 10e-3).unwrap();
    let bh = helmholtz_field(&pair, 1.0, Vec3::zeros()).unwrap().norm();
    let closed = 0.8f64.powf(1.5) * MU_0 / 10e-3;
    suite.check("9", "ideal Helmholtz centre field", rel(bh, closed) < 1e-10, format!("relative error {:.2e}", rel(bh, closed)));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut kernel_err: f64 = 0.0;
    let mut div_err: f64 = 0.0;
    for _ in 0..200 {
        let p = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)) * r;
        if (p.x.hypot(p.y) - r).hypot(p.z) < 0.1 * r {
            continue;
        }
        let exact = loop_field(r, i, p, LoopKernel::Exact).unwrap();
        let series = loop_field(r, i, p, LoopKernel::Series).unwrap();
        kernel_err = kernel_err.max((exact - series).norm() / exact.norm());
        let h = 1e-5 * r;
        let mut div = 0.0;
        let mut scale = 0.0;
        for axis in 0..3 {
            let mut e = Vec3::zeros();
            e[axis] = h;
            let plus = loop_field(r, i, p + e, LoopKernel::Exact).unwrap()[axis];
            let minus = loop_field(r, i, p - e, LoopKernel::Exact).unwrap()[axis];
            let d = (plus - minus) / (2.0 * h);
            div += d;
            scale += d.abs();
        }
        div_err = div_err.max(div.abs() / scale.max(exact.norm() / r));
    }
    suite.check("9", "exact and series kernels agree to 1e-6", kernel_err < 1e-6, format!("max relative difference {kernel_err:.2e}"));
    suite.check("9", "numerical divergence below 1e-6", div_err < 1e-6, format!("max relative divergence {div_err:.2e}"));

    let assembly = load_assembly(&repo("crates/core/data/geometry/helmholtz_y.toml")).unwrap();
    let c = conversion_factor(&assembly).unwrap();
    suite.check("9", "reference coil 80 mT/A +- 5%", rel(c, 80e-3) <= 0.05, format!("{:.3} mT/A", c * 1e3));
    if let Assembly::Helmholtz(_) = assembly {
        let report =
            homogeneity_report(&assembly, 1.0, Vec3::new(-5e-3, 0.0, 0.0), Vec3::new(5e-3, 0.0, 0.0), 41).unwrap();
        suite.check(
            "9",
            "reference coil homogeneity within 3% over +-5 mm",
            report.max_relative_deviation <= 0.03,
            format!("{:.3}%", 100.0 * report.max_relative_deviation),
        );
    }
    suite.runtime("9", start.elapsed(), Duration::from_secs(60));
}

/// Lindblad equation with a single decay channel of rate `gamma`, integrated
/// with fixed-step RK4 from the vacuum. The Hamiltonian is tridiagonal with
/// diagonal `d` and off-diagonal `o`; ρ is stored row-major.
fn rk4_oracle(d: &[f64], o: &[f64], gamma: f64, t_end: f64) -> DMatrix<Complex64> {
    let n = d.len();
    let norm = d.iter().map(|v| v.abs()).fold(0.0, f64::max) + 2.0 * o.iter().map(|v| v.abs()).fold(0.0, f64::max) + gamma * n as f64;
    let dt = 0.2 / norm;
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let i = Complex64::new(0.0, 1.0);
    let rhs = |r: &[Complex64], out: &mut [Complex64]| {
        for m in 0..n {
            for k in 0..n {
                let at = |a: usize, b: usize| r[a * n + b];
                let mut h_rho = d[m] * at(m, k);
                if m > 0 {
                    h_rho += o[m - 1] * at(m - 1, k);
                }
                if m + 1 < n {
                    h_rho += o[m] * at(m + 1, k);
                }
                let mut rho_h = at(m, k) * d[k];
                if k > 0 {
                    rho_h += at(m, k - 1) * o[k - 1];
                }
                if k + 1 < n {
                    rho_h += at(m, k + 1) * o[k];
                }
                let mut v = -i * (h_rho - rho_h) - 0.5 * gamma * (m + k) as f64 * at(m, k);
                if m + 1 < n && k + 1 < n {
                    v += gamma * (((m + 1) * (k + 1)) as f64).sqrt() * at(m + 1, k + 1);
                }
                out[m * n + k] = v;
            }
        }
    };
    let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
    rho[0] = Complex64::new(1.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (rho.clone(), rho.clone(), rho.clone(), rho.clone());
    let mut tmp = rho.clone();
    for _ in 0..steps {
        rhs(&rho, &mut k1);
        for j in 0..n * n {
            tmp[j] = rho[j] + 0.5 * dt * k1[j];
        }
        rhs(&tmp, &mut k2);
        for j in 0..n * n {
            tmp[j] = rho[j] + 0.5 * dt * k2[j];
        }
        rhs(&tmp, &mut k3);
        for j in 0..n * n {
            tmp[j] = rho[j] + dt * k3[j];
        }
        rhs(&tmp, &mut k4);
        for j in 0..n * n {
            rho[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    DMatrix::from_fn(n, n, |a, b| rho[a * n + b])
}

fn density_properties(rho: &DensityMatrix) -> (f64, f64, f64) {
    let e = rho.entries();
    let trace = (e.trace() - Complex64::new(1.0, 0.0)).norm();
    let herm = (e - e.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-60 * e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let flushed = e.map(|v| if v.norm() < floor { Complex64::new(0.0, 0.0) } else { v });
    let min_eig = flushed.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    (trace, herm, min_eig)
}

fn properties(suite: &mut Suite) {
    let cfg = reference_config();
    let model = cfg.kerr.unwrap();
    let sweep = cfg.spectrum.unwrap();
    let freqs = ladder_windows(&model, sweep.max_order, sweep.step, sweep.half_window).unwrap();
    let grid: Vec<(f64, f64)> = sweep.powers.iter().flat_map(|&p| freqs.iter().map(move |&f| (f, p))).collect();

    let solve_all = |m: &KerrModel| -> Vec<Result<(DensityMatrix, Complex64), String>> {
        grid.par_iter().map(|&(f, p)| solve_point(m, f, p).map_err(|e| e.to_string())).collect()
    };
    let n30 = solve_all(&model);
    let n40 = solve_all(&model.with_truncation(40));
    let failures = n30.iter().chain(&n40).filter(|r| r.is_err()).count();
    let (mut tr, mut herm, mut eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for (rho, _) in n30.iter().chain(&n40).flatten() {
        let (t, h, e) = density_properties(rho);
        tr = tr.max(t);
        herm = herm.max(h);
        eig = eig.min(e);
    }
    suite.check(
        "10",
        "trace, Hermiticity and positivity on every solved point",
        failures == 0 && tr < 1e-10 && herm < 1e-10 && eig > -1e-9,
        format!(
            "{} points, {failures} failures, |tr-1| {tr:.1e}, Hermiticity {herm:.1e}, min eigenvalue {eig:.1e}",
            2 * grid.len()
        ),
    );
    let stability = n30
        .iter()
        .zip(&n40)
        .filter_map(|(a, b)| Some((a.as_ref().ok()?.1 - b.as_ref().ok()?.1).norm()))
        .fold(0.0, f64::max);
    suite.check(
        "10",
        "S11 stable from 30 to 40 levels within 1e-6",
        failures == 0 && stability < 1e-6,
        format!("max |dS11| = {stability:.2e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut sets = Vec::new();
    for _ in 0..5 {
        let levels = rng.random_range(4..=10usize);
        let detuning = rng.random_range(-3.0..3.0);
        let kerr = rng.random_range(0.5..5.0);
        let drive = rng.random_range(0.3..3.0);
        let d: Vec<f64> = (0..levels).map(|k| detuning * k as f64 - 0.5 * kerr * (k * k.saturating_sub(1)) as f64).collect();
        let o: Vec<f64> = (0..levels - 1).map(|k| -0.5 * drive * ((k + 1) as f64).sqrt()).collect();
        let oracle = DensityMatrix::new(rk4_oracle(&d, &o, 1.0, 60.0)).unwrap();
        let h = build_kerr_hamiltonian(detuning, kerr, drive, levels).unwrap();
        let rho = steady_state(&build_liouvillian(&h, 1.0).unwrap()).unwrap();
        let dist = rho.trace_distance(&oracle);
        worst = worst.max(dist);
        sets.push(format!("N={levels} d={detuning:.2} K={kerr:.2} W={drive:.2}: {dist:.1e}"));
    }
    suite.check("10", "steady state matches RK4 integration within 1e-6", worst < 1e-6, sets.join("; "));

    self_consistency(suite);
}

fn self_consistency(suite: &mut Suite) {
    let (f1, kappa, gamma, rabi) = (7.4887e9, hz_to_angular(40e3), hz_to_angular(10e3), hz_to_angular(20e3));
    let freqs: Vec<f64> = (0..301).map(|i| f1 - 300e3 + 2e3 * i as f64).collect();
    let trace_at = |rabi: f64| {
        let s = freqs.iter().map(|&f| fluorescence_model(f, f1, kappa, gamma, rabi)).collect();
        ComplexTrace::new(freqs.clone(), s, dbm_to_watt(-160.0)).unwrap()
    };
    let fit = fit_fluorescence_trace(&trace_at(rabi), &BTreeMap::new()).unwrap();
    let err = [
        (fit.value("f1").unwrap() - f1).abs() / 1e3,
        rel(fit.value("kappa").unwrap(), kappa),
        rel(fit.value("gamma").unwrap(), gamma),
        rel(fit.value("rabi").unwrap(), rabi),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    suite.check("10", "fluorescence trace fit recovers its generator", fit.converged && err < 1e-6, format!("max error {err:.1e}"));

    let rabis = [hz_to_angular(40e3), hz_to_angular(80e3), hz_to_angular(160e3)];
    let traces: Vec<ComplexTrace> = rabis.iter().map(|&r| trace_at(r)).collect();
    let err = match fit_power_series(&trace_at(rabi), &traces) {
        Ok((_, fits)) => fits.iter().zip(&rabis).map(|(f, &r)| rel(f.value("rabi").unwrap(), r)).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    suite.check("10", "power-series fit recovers its generator", err < 1e-6, format!("max error {err:.1e}"));

    let slope = 4.0 * kappa / (HBAR * TAU * f1) * 10f64.powf(-10.3);
    let points: Vec<RabiPoint> = (1..=6)
        .map(|k| {
            let p = k as f64 * 1e-12;
            RabiPoint {
                power: p,
                rabi: (slope * p).sqrt(),
            }
        })
        .collect();
    let law = fit_rabi_power_law(&points, kappa, f1).unwrap();
    let with_intercept = fit_rabi_power_law_with_intercept(&points, kappa, f1).unwrap();
    let err = rel(law.value("slope").unwrap(), slope)
        .max((law.value("attenuation_db").unwrap() - 103.0).abs())
        .max(rel(with_intercept.value("slope").unwrap(), slope))
        .max(with_intercept.value("intercept").unwrap().abs() / (slope * 1e-12));
    suite.check("10", "Rabi power-law fits recover their generator", err < 1e-6, format!("max error {err:.1e}"));

    let circuit = CircuitParams::reference();
    let points: Vec<(f64, f64)> =
        (0..=12).map(|k| (k as f64 * 10e-3, qubit_frequency_vs_field(k as f64 * 10e-3, &circuit).unwrap())).collect();
    let mut guess = circuit;
    guess.al_critical_field = 0.170;
    guess.al_kinetic_inductance_zero_field = 180e-12;
    let err = match fit_field_dependence(&points, &guess) {
        Ok(f) => rel(f.value("al_critical_field").unwrap(), 0.150)
            .max(rel(f.value("al_kinetic_inductance_zero_field").unwrap(), 200e-12)),
        Err(_) => f64::INFINITY,
    };
    suite.check("10", "field-dependence fit recovers its generator", err < 1e-6, format!("max error {err:.1e}"));

    let (center, width, amplitude, offset) = (7.4842e9, 60e3, 0.02, 0.3);
    let f: Vec<f64> = (0..201).map(|i| center - 400e3 + 4e3 * i as f64).collect();
    let s = f
        .iter()
        .map(|&x| {
            let u = 2.0 * (x - center) / width;
            Complex64::from_polar(0.9, offset + amplitude / (1.0 + u * u))
        })
        .collect();
    let trace = ComplexTrace::new(f, s, dbm_to_watt(-128.0)).unwrap();
    let err = match fit_lorentzian_peak(&trace, (center - 400e3, center + 400e3)) {
        Ok(p) => ((p.value("center").unwrap() - center).abs() / width)
            .max(rel(p.value("linewidth").unwrap(), width))
            .max(rel(p.value("amplitude").unwrap(), amplitude))
            .max((p.value("offset").unwrap() - offset).abs()),
        Err(_) => f64::INFINITY,
    };
    suite.check("10", "Lorentzian peak fit recovers its generator", err < 1e-6, format!("max error {err:.1e}"));
}

fn main() {
    let mut suite = Suite { failed: 0 };
    let start = Instant::now();
    ladder(&mut suite);
    kerr_constancy(&mut suite);
    qubit_limit(&mut suite);
    resonant_dip(&mut suite);
    circuit_numbers(&mut suite);
    field_model(&mut suite);
    saturation(&mut suite);
    mollow(&mut suite);
    magnetostatics(&mut suite);
    properties(&mut suite);
    println!("{} check(s) failed, total {:.1} s", suite.failed, start.elapsed().as_secs_f64());
    if suite.failed > 0 {
        std::process::exit(1);
    }
}
