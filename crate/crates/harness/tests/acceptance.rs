//! Acceptance checks. Every test prints one `criterion N: PASS|FAIL` line
//! straight to stdout (bypassing the test capture) before asserting.

use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;

use pbit_core::beamform::{build_qcqp, expected_gain, randomized_rounding, solve_sdp, SdpOptions};
use pbit_core::linalg::{complex_normal_mat, random_phase};
use pbit_core::model::{
    binary_entropy, effective_channel, modulate, random_bits, sample_channels, sample_lis_state, PhaseShifts,
    SystemConfig,
};
use pbit_core::rx_sparse::{form_observation, gamp_recover, GampOptions};
use pbit_core::{CVec, C64};
use pbit_harness::csv::write_csv;
use pbit_harness::spec::{ExperimentSpec, PhaseMode, Scheme};
use pbit_harness::stats::{separation, snr_at_ber, BerPoint};
use pbit_harness::sweep::{records_from_counts, sweep, sweep_counts};
use pbit_harness::trial::GridCounts;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_BER: f64 = 1e-3;

fn report(n: u32, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n}: {verdict} {}", detail.as_ref());
    let _ = out.flush();
}

fn artifact(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn save_csv(spec: &ExperimentSpec, grid: &GridCounts, name: &str) {
    let mut buf = Vec::new();
    write_csv(&records_from_counts(spec, grid), &mut buf).unwrap();
    std::fs::write(artifact(name), buf).unwrap();
}

/// `(errors, total)` curve of one scheme along the SNR grid.
fn curve(spec: &ExperimentSpec, grid: &GridCounts, rho: usize, scheme: Scheme, of_s: bool) -> Vec<BerPoint> {
    let k = spec.schemes.iter().position(|&s| s == scheme).expect("scheme in spec");
    spec.snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let c = grid.get(rho, i, k);
            let (errors, total) = if of_s { (c.errors_s, c.elements_s) } else { (c.bit_errors_x, c.bits_x) };
            BerPoint { snr_db, errors, total }
        })
        .collect()
}

fn fmt_snr(v: Option<f64>) -> String {
    v.map_or("none".into(), |s| format!("{s:.2} dB"))
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_01_entropy_table() {
    let table = [(0.5, 1.0), (0.6, 0.9710), (0.7, 0.8813), (0.8, 0.7219), (0.9, 0.4690), (1.0, 0.0)];
    let start = std::time::Instant::now();
    let got: Vec<f64> = table.iter().map(|&(rho, _)| binary_entropy(rho)).collect();
    let elapsed = start.elapsed();
    let pass = table.iter().zip(&got).all(|(&(_, want), &h)| (h - want).abs() < 5e-5)
        && elapsed < std::time::Duration::from_millis(1);
    let shown: Vec<String> = got.iter().map(|h| format!("{h:.4}")).collect();
    report(1, pass, format!("H = [{}] in {elapsed:?}", shown.join(", ")));
    assert!(pass);
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_moments_and_gain_enumeration() {
    let n = 4;
    let draws = 100_000u32;
    let mut worst_z: f64 = 0.0;
    for (idx, rho) in [0.3, 0.5, 0.9].into_iter().enumerate() {
        let cfg = SystemConfig::new(1, n, 2, 1.0, rho, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(200 + idx as u64);
        let mut acc = vec![0u32; n * n];
        for _ in 0..draws {
            let s = sample_lis_state(&cfg, &mut rng);
            for i in 0..n {
                for j in 0..n {
                    acc[i * n + j] += u32::from(s[i] & s[j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let p = if i == j { rho } else { rho * rho };
                let se = (p * (1.0 - p) / f64::from(draws)).sqrt();
                let est = f64::from(acc[i * n + j]) / f64::from(draws);
                worst_z = worst_z.max((est - p).abs() / se);
            }
        }
    }

    let mut worst_rel: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(210);
    for n in 1..=12usize {
        let rho: f64 = rng.random_range(0.05..0.95);
        let cfg = SystemConfig::new(4, n, 2, 0.5, rho, 1.0, 1.0).unwrap();
        let ch = sample_channels(&cfg, &mut rng);
        let phases = PhaseShifts::random(n, &mut rng);
        let a = ch.coefficient_matrix(&phases, cfg.beta).unwrap();
        let mut brute = 0.0;
        for bits in 0..(1u32 << n) {
            let s = CVec::from_fn(n, |j, _| C64::new(f64::from((bits >> j) & 1), 0.0));
            let ones = bits.count_ones() as i32;
            let p: f64 = rho.powi(ones) * (1.0 - rho).powi(n as i32 - ones);
            brute += p * (&a * s + &ch.h_d).norm_squared();
        }
        let got = expected_gain(&phases, &ch, rho, cfg.beta).unwrap();
        worst_rel = worst_rel.max((got - brute).abs() / brute);
    }
    let pass = worst_z <= 3.0 && worst_rel <= 1e-9;
    report(
        2,
        pass,
        format!("worst moment deviation {worst_z:.2} s.e. (limit 3), worst gain mismatch {worst_rel:.1e} (limit 1e-9)"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_sdr_bounds_and_rounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let opts = SdpOptions::default();
    let mut failures = Vec::new();
    let mut worst_round: f64 = 0.0;

    // N = 1 against a 3600 point phase grid
    for inst in 0..50 {
        let cfg = SystemConfig::new(4, 1, 2, 0.5, rng.random_range(0.1..1.0), 1.0, 1.0).unwrap();
        let ch = sample_channels(&cfg, &mut rng);
        let q = build_qcqp(&ch, cfg.rho, cfg.beta);
        let sol = solve_sdp(&q.combined(), &opts).unwrap();
        let bound = sol.objective + q.constant;
        let grid_best = (0..3600)
            .map(|k| {
                let phases = PhaseShifts::from_angles(&[f64::from(k) * std::f64::consts::TAU / 3600.0]);
                expected_gain(&phases, &ch, cfg.rho, cfg.beta).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let rounded = randomized_rounding(&sol, &q, 100, &mut rng).unwrap();
        let gain = expected_gain(&rounded.phases, &ch, cfg.rho, cfg.beta).unwrap();
        let rel = (gain - grid_best).abs() / grid_best;
        worst_round = worst_round.max(rel);
        if bound < grid_best * (1.0 - 1e-6) {
            failures.push(format!("N=1 #{inst}: sdp {bound} < grid {grid_best}"));
        }
        if rel > 1e-6 {
            failures.push(format!("N=1 #{inst}: rounding {gain} vs grid {grid_best}"));
        }
    }

    // N <= 4 against 10^6 random feasible points
    let mut worst_ratio: f64 = 0.0;
    for inst in 0..50 {
        let n = 2 + inst % 3;
        let cfg = SystemConfig::new(4, n, 2, 0.5, rng.random_range(0.1..1.0), 1.0, 1.0).unwrap();
        let ch = sample_channels(&cfg, &mut rng);
        let q = build_qcqp(&ch, cfg.rho, cfg.beta);
        let c = q.combined();
        let sol = solve_sdp(&c, &opts).unwrap();
        let bound = sol.objective;
        let mut bar = CVec::from_element(n + 1, C64::new(1.0, 0.0));
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            for k in 0..n {
                bar[k] = random_phase(&mut rng);
            }
            best = best.max(bar.dotc(&(&c * &bar)).re);
        }
        worst_ratio = worst_ratio.max(best / bound);
        if best > bound * (1.0 + 1e-6) {
            failures.push(format!("N={n} #{inst}: sampled {best} > sdp {bound}"));
        }
    }
    let pass = failures.is_empty();
    report(
        3,
        pass,
        format!(
            "100 instances, worst sampled/sdp ratio {worst_ratio:.6}, worst N=1 rounding gap {worst_round:.1e}{}",
            if pass { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 4-7 shared run

struct MainRun {
    opt: ExperimentSpec,
    opt_counts: GridCounts,
    rand: ExperimentSpec,
    rand_counts: GridCounts,
}

fn main_run() -> &'static MainRun {
    static RUN: OnceLock<MainRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut grid = vec![-20.0, -18.0];
        grid.extend((-16..=-2).map(f64::from));
        let opt = ExperimentSpec {
            cfg: SystemConfig::reference_setup(0.0),
            snr_grid_db: grid,
            rho_grid: vec![0.5],
            schemes: Scheme::ALL.to_vec(),
            phase_mode: PhaseMode::Optimized,
            trials: 2000,
            master_seed: 20_190_101,
            output_path: String::new(),
        };
        let rand = ExperimentSpec {
            snr_grid_db: (-16..=-4).map(f64::from).collect(),
            schemes: vec![Scheme::BigAmp],
            phase_mode: PhaseMode::Random,
            ..opt.clone()
        };
        let opt_counts = sweep_counts(&opt).unwrap();
        save_csv(&opt, &opt_counts, "fig2_fig3_optimized.csv");
        let rand_counts = sweep_counts(&rand).unwrap();
        save_csv(&rand, &rand_counts, "fig2_random.csv");
        MainRun {
            opt,
            opt_counts,
            rand,
            rand_counts,
        }
    })
}

fn opt_snr(run: &MainRun, scheme: Scheme) -> Option<f64> {
    snr_at_ber(&curve(&run.opt, &run.opt_counts, 0, scheme, false), TARGET_BER)
}

#[test]
fn criterion_04_beamforming_gain() {
    let run = main_run();
    let opt = opt_snr(run, Scheme::BigAmp);
    let rand = snr_at_ber(&curve(&run.rand, &run.rand_counts, 0, Scheme::BigAmp, false), TARGET_BER);
    let gain = opt.zip(rand).map(|(o, r)| r - o);
    let pass = gain.is_some_and(|g| g >= 1.5);
    report(
        4,
        pass,
        format!(
            "SNR at BER_x 1e-3: optimized {}, random {}, gain {} (need >= 1.5 dB)",
            fmt_snr(opt),
            fmt_snr(rand),
            fmt_snr(gain)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_lis_gain() {
    let run = main_run();
    let opt = opt_snr(run, Scheme::BigAmp);
    let no_lis = opt_snr(run, Scheme::NoLis);
    let gain = opt.zip(no_lis).map(|(o, r)| r - o);
    let pass = gain.is_some_and(|g| g >= 4.0);
    report(
        5,
        pass,
        format!(
            "SNR at BER_x 1e-3: Opt-BiG-AMP {}, no LIS {}, gain {} (need >= 4 dB)",
            fmt_snr(opt),
            fmt_snr(no_lis),
            fmt_snr(gain)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_receiver_gaps() {
    let run = main_run();
    let amp = opt_snr(run, Scheme::BigAmp);
    let lb = opt_snr(run, Scheme::LbX);
    let svd = opt_snr(run, Scheme::Svd);
    let to_lb = amp.zip(lb).map(|(a, l)| a - l);
    let svd_gap = svd.zip(amp).map(|(s, a)| s - a);
    let pass = to_lb.is_some_and(|g| g.abs() <= 1.0) && svd_gap.is_some_and(|g| (1.0..=3.0).contains(&g));
    report(
        6,
        pass,
        format!(
            "SNR at BER_x 1e-3: LB-x {}, Opt-BiG-AMP {}, Opt-SVD {}; BiG-AMP to LB-x {} (need <= 1 dB), SVD behind BiG-AMP {} (need 1-3 dB)",
            fmt_snr(lb),
            fmt_snr(amp),
            fmt_snr(svd),
            fmt_snr(to_lb),
            fmt_snr(svd_gap)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_s_recovery_ordering() {
    let run = main_run();
    let get = |scheme| curve(&run.opt, &run.opt_counts, 0, scheme, true);
    let (lb, amp, svd, omp, cosamp) = (
        get(Scheme::LbS),
        get(Scheme::BigAmpGamp),
        get(Scheme::SvdGamp),
        get(Scheme::BigAmpOmp),
        get(Scheme::BigAmpCosamp),
    );
    let mut violations = Vec::new();
    // `better` should not have a higher BER than `worse` by 2 or more intervals
    let check = |violations: &mut Vec<String>, name: &str, better: &BerPoint, worse: &BerPoint| {
        if better.ber() > worse.ber() {
            let sep = separation((better.errors, better.total), (worse.errors, worse.total));
            if sep >= 2.0 {
                violations.push(format!("{name} reversed at {} dB ({sep:.1} intervals)", better.snr_db));
            }
        }
    };
    let mut max_lb_sep: f64 = 0.0;
    for i in 0..lb.len() {
        let snr = lb[i].snr_db;
        if !(-20.0..=-5.0).contains(&snr) {
            continue;
        }
        check(&mut violations, "LB-s <= BiG-AMP+GAMP", &lb[i], &amp[i]);
        check(&mut violations, "BiG-AMP+GAMP <= SVD+GAMP", &amp[i], &svd[i]);
        check(&mut violations, "GAMP <= OMP", &amp[i], &omp[i]);
        check(&mut violations, "GAMP <= CoSaMP", &amp[i], &cosamp[i]);
        if snr >= -14.0 {
            let sep = separation((amp[i].errors, amp[i].total), (lb[i].errors, lb[i].total));
            max_lb_sep = max_lb_sep.max(sep);
            if sep >= 2.0 {
                violations.push(format!("BiG-AMP+GAMP differs from LB-s at {snr} dB by {sep:.1} intervals"));
            }
        }
    }
    let at = |c: &[BerPoint], snr: f64| c.iter().find(|p| p.snr_db == snr).map_or(f64::NAN, BerPoint::ber);
    let pass = violations.is_empty();
    report(
        7,
        pass,
        format!(
            "BER_s at -14 dB: LB-s {:.2e}, BiG-AMP+GAMP {:.2e}, SVD+GAMP {:.2e}, OMP {:.2e}, CoSaMP {:.2e}; max LB-s separation above -14 dB {max_lb_sep:.2}{}",
            at(&lb, -14.0),
            at(&amp, -14.0),
            at(&svd, -14.0),
            at(&omp, -14.0),
            at(&cosamp, -14.0),
            if pass { String::new() } else { format!("; {}", violations.join("; ")) }
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_gamp_matches_map() {
    // full block at 0 dB; the matched filter observation has variance σ²/(L P)
    let (m, n, l) = (16, 12, 100);
    let cfg = SystemConfig::new(m, n, l, 0.5, 0.5, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let trials = 1000;
    let mut agree = 0;
    for _ in 0..trials {
        let ch = sample_channels(&cfg, &mut rng)
            .with_phases(&PhaseShifts::random(n, &mut rng), cfg.beta)
            .unwrap();
        let s = sample_lis_state(&cfg, &mut rng);
        let x = modulate(&random_bits(cfg.payload_bits(), &mut rng), &cfg).unwrap();
        let z = effective_channel(&ch, &s).unwrap();
        let y = &z * x.transpose() + complex_normal_mat(&mut rng, m, l, cfg.noise_var);
        let obs = form_observation(&y, &x, &cfg, ch.a().unwrap(), &ch.h_d).unwrap();
        let est = gamp_recover(&obs, cfg.rho, &GampOptions::default()).unwrap();

        // exhaustive MAP, walking the states in Gray order
        let prior = (cfg.rho / (1.0 - cfg.rho)).ln();
        let mut resid = obs.centered();
        let mut state = 0u32;
        let score = |r: &CVec, st: u32| f64::from(st.count_ones()) * prior - r.norm_squared() / obs.w_var;
        let mut best = (score(&resid, 0), 0u32);
        for k in 1..(1u32 << n) {
            let j = k.trailing_zeros() as usize;
            let sign = if state >> j & 1 == 1 { 1.0 } else { -1.0 };
            resid.axpy(C64::new(sign, 0.0), &obs.a.column(j), C64::new(1.0, 0.0));
            state ^= 1 << j;
            let sc = score(&resid, state);
            if sc > best.0 {
                best = (sc, state);
            }
        }
        let map: Vec<u8> = (0..n).map(|j| (best.1 >> j & 1) as u8).collect();
        agree += usize::from(map == est.s_hat);
    }
    let pass = agree * 100 >= 99 * trials;
    report(8, pass, format!("GAMP equals MAP on {agree}/{trials} blocks (need >= 99%)"));
    assert!(pass);
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_rate_tradeoff() {
    let spec = ExperimentSpec {
        cfg: SystemConfig::reference_setup(0.0),
        snr_grid_db: (-24..=-14).map(f64::from).collect(),
        rho_grid: vec![0.9, 1.0],
        schemes: vec![Scheme::BigAmp],
        phase_mode: PhaseMode::Optimized,
        trials: 1000,
        master_seed: 20_190_109,
        output_path: String::new(),
    };
    let counts = sweep_counts(&spec).unwrap();
    save_csv(&spec, &counts, "fig4_rate_tradeoff.csv");
    let at_09 = snr_at_ber(&curve(&spec, &counts, 0, Scheme::BigAmp, false), TARGET_BER);
    let at_1 = snr_at_ber(&curve(&spec, &counts, 1, Scheme::BigAmp, false), TARGET_BER);
    let loss = at_09.zip(at_1).map(|(a, b)| a - b);
    let (r09, r1) = (binary_entropy(0.9), binary_entropy(1.0));
    let pass = loss.is_some_and(|l| l <= 1.0) && format!("{r09:.4}") == "0.4690" && r1 == 0.0;
    report(
        9,
        pass,
        format!(
            "SNR at BER_x 1e-3: rho=0.9 {}, rho=1 {}, loss {} (need <= 1 dB); rate {r1:.4} -> {r09:.4}",
            fmt_snr(at_09),
            fmt_snr(at_1),
            fmt_snr(loss)
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_determinism_and_noiseless() {
    let small = ExperimentSpec {
        cfg: SystemConfig::new(16, 12, 40, 0.5, 0.5, 1.0, 1.0).unwrap(),
        snr_grid_db: vec![-10.0, -5.0, 0.0],
        rho_grid: vec![0.5, 0.8],
        schemes: Scheme::ALL.to_vec(),
        phase_mode: PhaseMode::Optimized,
        trials: 20,
        master_seed: 77,
        output_path: String::new(),
    };
    let csv = |spec: &ExperimentSpec| {
        let mut buf = Vec::new();
        write_csv(&sweep(spec).unwrap(), &mut buf).unwrap();
        buf
    };
    let identical = csv(&small) == csv(&small);

    let noiseless = ExperimentSpec {
        cfg: SystemConfig::reference_setup(0.0),
        snr_grid_db: vec![f64::INFINITY],
        rho_grid: vec![0.5],
        schemes: Scheme::ALL.to_vec(),
        phase_mode: PhaseMode::Random,
        trials: 1000,
        master_seed: 10,
        output_path: String::new(),
    };
    let records = sweep(&noiseless).unwrap();
    let mut dirty = Vec::new();
    for r in &records {
        let (ex, es) = (r.errors_x(), r.errors_s());
        if ex > 0 || es > 0 || r.erased_blocks > 0 {
            dirty.push(format!("{} (x {ex}/{}, s {es}/{})", r.scheme, r.bit_count_x, r.bit_count_s));
        }
    }
    let pass = identical && dirty.is_empty();
    report(
        10,
        pass,
        format!(
            "CSV byte-identical across reruns: {identical}; noiseless 1000 blocks, schemes with errors: {}",
            if dirty.is_empty() { "none".to_string() } else { dirty.join(", ") }
        ),
    );
    assert!(pass);
}
