//! Exit criteria, one line per criterion. Exits nonzero if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use qisi::energy::{enumerate_profile, mean_energy_trace, solve_energy_qp};
use qisi::gibbs::{
    avg_energy, capacity_curve, capacity_curve_from_profile, gibbs_probabilities, log_partition,
    solve_beta,
};
use qisi::markov::{
    achievable_rate, optimize_rate, power_asymptotic, power_finite_n, rate_two_tap_closed_form,
};
use qisi::sim::{q_function, simulate_zero_forcing};
use qisi::spectral::{pbar_asymptotic, pbar_two_tap, pmin_two_tap};
use qisi::{
    ChannelOperators, ChannelSpec, MarkovScheme, NoisySimConfig, PowerModel, Regime, SignPattern,
};
use qisi_cli::figures::{write_figure, Figure, FIG3_GRID, FIG4_C_GRID, FIG4_RM_GRID, FIG4_TAPS};

const DELTA: f64 = 0.3;
const D2: f64 = DELTA * DELTA;

// Reference curves as (P / delta^2, bits per use), four-decimal precision.
const REF_C_EPS02: [(f64, f64); 16] = [
    (0.6944, 0.0834),
    (0.7178, 0.2686),
    (0.7411, 0.4073),
    (0.7644, 0.5231),
    (0.7867, 0.6205),
    (0.8100, 0.7019),
    (0.8333, 0.7695),
    (0.8567, 0.8255),
    (0.8800, 0.8715),
    (0.9033, 0.9090),
    (0.9256, 0.9389),
    (0.9489, 0.9621),
    (0.9722, 0.9793),
    (0.9956, 0.9910),
    (1.0189, 0.9978),
    (1.0422, 0.9999),
];

const REF_RM_EPS02: [(f64, f64); 16] = [
    (0.6944, 0.0),
    (0.7178, 0.2399),
    (0.7411, 0.3949),
    (0.7644, 0.5159),
    (0.7867, 0.6146),
    (0.8100, 0.6962),
    (0.8333, 0.7642),
    (0.8567, 0.8207),
    (0.8800, 0.8676),
    (0.9033, 0.9059),
    (0.9256, 0.9366),
    (0.9489, 0.9607),
    (0.9722, 0.9784),
    (0.9956, 0.9907),
    (1.0189, 0.9978),
    (1.0422, 0.9999),
];

const REF_C_THREE_TAP: [f64; 26] = [
    0.0, 0.5386, 0.6456, 0.7177, 0.7700, 0.8098, 0.8414, 0.8672, 0.8887, 0.9069, 0.9223, 0.9354,
    0.9468, 0.9565, 0.9649, 0.9721, 0.9781, 0.9833, 0.9877, 0.9911, 0.9940, 0.9963, 0.9979,
    0.9991, 0.9998, 0.9999,
];

const REF_RM_THREE_TAP: [f64; 23] = [
    0.0003, 0.2735, 0.4510, 0.5686, 0.6531, 0.7177, 0.7690, 0.8105, 0.8448, 0.8734, 0.8974,
    0.9176, 0.9346, 0.9489, 0.9608, 0.9706, 0.9789, 0.9854, 0.9906, 0.9944, 0.9972, 0.9991,
    0.9999,
];

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ops(taps: &[f64], n: usize) -> ChannelOperators {
    ChannelOperators::new(ChannelSpec::new(taps.to_vec(), DELTA, n).unwrap()).unwrap()
}

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest absolute deviation and the abscissa where it occurs.
fn worst(pairs: impl Iterator<Item = (f64, f64, f64)>) -> (f64, f64) {
    pairs
        .map(|(x, got, want)| ((got - want).abs(), x))
        .fold((0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a })
}

fn two_tap_thresholds() -> Outcome {
    let pbar = pbar_two_tap(0.2, DELTA).unwrap();
    let pmin = pmin_two_tap(0.2, DELTA).unwrap() / D2;
    let spec = ChannelSpec::new(vec![1.0, 0.2], DELTA, 12).unwrap();
    let asym = pbar_asymptotic(&spec).unwrap();
    let rel = (asym - 0.09375).abs() / 0.09375;
    verdict(
        pbar == 0.09375 && (pmin - 25.0 / 36.0).abs() <= 1e-12 && rel <= 1e-8,
        format!("pbar={pbar} pmin/d2={pmin} quadrature rel err={rel:.2e}"),
    )
}

fn two_tap_rate_curve() -> Outcome {
    let spec = ChannelSpec::new(vec![1.0, 0.2], DELTA, 12).unwrap();
    let generic: Vec<(f64, f64, f64)> = REF_RM_EPS02
        .iter()
        .map(|&(x, y)| (x, achievable_rate(&spec, x * D2).unwrap(), y))
        .collect();
    let closed: Vec<(f64, f64, f64)> = REF_RM_EPS02
        .iter()
        .map(|&(x, y)| (x, rate_two_tap_closed_form(0.2, DELTA, x * D2).unwrap(), y))
        .collect();
    let (eg, xg) = worst(generic.iter().copied());
    let (ec, xc) = worst(closed.iter().copied());
    let spot = (achievable_rate(&spec, 0.8333 * D2).unwrap() - 0.7642).abs();
    let misses: Vec<String> = generic
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 2e-3)
        .map(|(x, got, want)| format!("{x}:{got:.4}vs{want}"))
        .collect();
    verdict(
        eg <= 2e-3 && ec <= 2e-3 && spot <= 5e-4,
        format!(
            "max err generic={eg:.5} at {xg}, closed form={ec:.5} at {xc}, spot err={spot:.2e}; over 2e-3: [{}]",
            misses.join(" ")
        ),
    )
}

fn two_tap_capacity_curve() -> Outcome {
    let o = ops(&[1.0, 0.2], 12);
    let powers: Vec<f64> = FIG3_GRID.iter().map(|g| g * D2).collect();
    let curve = capacity_curve(&o, &powers).unwrap();
    let (err, at) = worst(
        REF_C_EPS02
            .iter()
            .zip(&curve)
            .map(|(&(x, y), (_, sol))| (x, sol.entropy_bits_per_use, y)),
    );
    let left = curve[0].1.entropy_bits_per_use;
    let left_err = (left - 1.0 / 12.0).abs();
    verdict(
        err <= 0.02 && left_err <= 1e-6,
        format!("max err={err:.5} at {at}, left endpoint={left} ({})", curve[0].1.regime),
    )
}

fn three_tap_constants() -> Outcome {
    let o = ops(&FIG4_TAPS, 12);
    let pbar = pbar_asymptotic(o.spec()).unwrap() / D2;
    let profile = enumerate_profile(&o).unwrap();
    let pmin = profile.e_min() / (12.0 * D2);
    let zero_below: Vec<f64> = [0.50, 0.55, 0.57, 0.58]
        .iter()
        .map(|x| achievable_rate(o.spec(), x * D2).unwrap())
        .collect();
    let at_060 = achievable_rate(o.spec(), 0.60 * D2).unwrap();
    verdict(
        (pbar - 0.838).abs() <= 0.005
            && (pmin - 0.56).abs() <= 0.02
            && zero_below.iter().all(|&r| r == 0.0)
            && at_060 > 0.0,
        format!("pbar/d2={pbar:.5} pmin/d2={pmin:.5} rate<=0.58: {zero_below:?} rate(0.60)={at_060:.4}"),
    )
}

fn three_tap_curves() -> Outcome {
    let start = Instant::now();
    let o = ops(&FIG4_TAPS, 12);
    let profile = enumerate_profile(&o).unwrap();
    let powers: Vec<f64> = FIG4_C_GRID.iter().map(|g| g * D2).collect();
    let curve = capacity_curve_from_profile(&profile, &powers).unwrap();
    let c_pairs: Vec<(f64, f64, f64)> = FIG4_C_GRID
        .iter()
        .zip(&curve)
        .zip(REF_C_THREE_TAP)
        .map(|((&x, (_, sol)), y)| (x, sol.entropy_bits_per_use, y))
        .collect();
    let (ec, xc) = worst(c_pairs.iter().copied());
    let c_misses: Vec<String> = c_pairs
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 0.05)
        .map(|(x, got, want)| format!("{x}:{got:.4}vs{want}"))
        .collect();
    let (er, xr) = worst(FIG4_RM_GRID.iter().zip(REF_RM_THREE_TAP).map(|(&x, y)| {
        let r = optimize_rate(o.spec(), x * D2, PowerModel::FiniteBlock(&o)).unwrap();
        (x, r.rate_bits, y)
    }));
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ec <= 0.05 && er <= 0.03 && secs <= 600.0,
        format!(
            "C max err={ec:.4} at {xc} (over 0.05: [{}]), Rm max err={er:.4} at {xr}, {secs:.1}s",
            c_misses.join(" ")
        ),
    )
}

fn closed_form_energy_equivalence() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut min_dual = f64::INFINITY;
    let mut failing = Vec::new();
    for eps in [0.1, 0.2, 0.4] {
        for n in [6usize, 8, 10] {
            let o = ops(&[1.0, eps], n);
            let g = o.gram_matrix();
            let mut bad = 0;
            for i in 0..(1u64 << n) {
                let s = SignPattern::from_index(i, n);
                let sv = s.to_f64();
                let quad: f64 = (0..n)
                    .map(|a| (0..n).map(|b| sv[a] * g[a][b] * sv[b]).sum::<f64>())
                    .sum::<f64>()
                    * D2;
                let sol = solve_energy_qp(&o, &s).unwrap();
                let rel = (sol.energy - quad).abs() / quad;
                let dmin = sol.dual.iter().copied().fold(f64::INFINITY, f64::min);
                if rel > 1e-6 || sol.gap > 1e-8 || dmin < -1e-10 {
                    bad += 1;
                }
                worst_rel = worst_rel.max(rel);
                worst_gap = worst_gap.max(sol.gap);
                min_dual = min_dual.min(dmin);
            }
            if bad > 0 {
                failing.push(format!("eps={eps},N={n}:{bad}/{}", 1u64 << n));
            }
        }
    }
    verdict(
        failing.is_empty(),
        format!(
            "max rel diff={worst_rel:.2e} max gap={worst_gap:.2e} min dual={min_dual:.2e}; failing patterns: [{}]",
            failing.join(" ")
        ),
    )
}

fn mean_energy_equivalence() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for taps in [vec![1.0, 0.2], vec![1.0, -0.25], vec![1.0, 0.1, 0.02]] {
        let o = ops(&taps, 12);
        let profile = enumerate_profile(&o).unwrap();
        let avg = profile.energies().iter().sum::<f64>() / profile.energies().len() as f64;
        let rel = (avg - mean_energy_trace(&o)).abs() / avg;
        pass &= o.is_diagonally_dominant() && rel <= 1e-9;
        details.push(format!("{taps:?}:{rel:.1e}"));
    }
    verdict(pass, format!("rel diff {}", details.join(" ")))
}

fn gibbs_endpoints() -> Outcome {
    let o = ops(&[1.0, 0.2], 12);
    let profile = enumerate_profile(&o).unwrap();
    let sat = solve_beta(&profile, profile.e_mean() / 12.0).unwrap();
    let mut worst_diff: f64 = 0.0;
    for beta in [1.0, 20.0, 100.0, 300.0, 800.0] {
        let p = gibbs_probabilities(&profile, beta);
        let definitional: f64 = p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum();
        let thermo = (beta * avg_energy(&profile, beta) / 12.0 + log_partition(&profile, beta)) / LN_2;
        worst_diff = worst_diff.max((definitional - thermo).abs());
    }
    verdict(
        sat.gibbs_beta == 0.0
            && sat.entropy_bits_per_use == 1.0
            && sat.regime == Regime::Saturated
            && worst_diff <= 1e-9,
        format!(
            "beta at mean={} bits={} max entropy mismatch={worst_diff:.2e}",
            sat.gibbs_beta, sat.entropy_bits_per_use
        ),
    )
}

fn markov_power_convergence() -> Outcome {
    let big = ops(&[1.0, 0.2], 4096);
    let mut worst_rel: f64 = 0.0;
    for alpha in [0.6, 0.78, 0.95] {
        let scheme = MarkovScheme::new(alpha).unwrap();
        let finite = power_finite_n(&big, &scheme).unwrap();
        let asym = power_asymptotic(big.spec(), &scheme).unwrap();
        worst_rel = worst_rel.max((finite - asym).abs() / asym);
    }
    let mut worst_iid: f64 = 0.0;
    for n in [12usize, 4096] {
        let o = ops(&[1.0, 0.2], n);
        let p = power_finite_n(&o, &MarkovScheme::new(0.5).unwrap()).unwrap();
        let t = mean_energy_trace(&o) / n as f64;
        worst_iid = worst_iid.max((p - t).abs() / t);
    }
    verdict(
        worst_rel <= 1e-3 && worst_iid <= 4.0 * f64::EPSILON,
        format!("finite vs asymptotic rel={worst_rel:.2e}, alpha=1/2 vs trace rel={worst_iid:.2e}"),
    )
}

// Composite Simpson on [x, x + 20] of the standard normal density.
fn gaussian_tail(x: f64) -> f64 {
    let steps = 200_000;
    let h = 20.0 / steps as f64;
    let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * PI).sqrt();
    let mut acc = phi(x) + phi(x + 20.0);
    for k in 1..steps {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * phi(x + k as f64 * h);
    }
    acc * h / 3.0
}

fn noisy_validation() -> Outcome {
    let o = ops(&[1.0, 0.2], 12);
    let mut details = Vec::new();
    let mut pass = true;
    for (ratio, expected) in [(3.0, 1.3499e-3), (2.0, 0.02275)] {
        let tail = gaussian_tail(ratio);
        let cfg = NoisySimConfig {
            sigma: DELTA / ratio,
            num_symbols: 1_000_000,
            seed: 0,
            alpha: 0.5,
        };
        let r = simulate_zero_forcing(&o, &cfg).unwrap();
        let oracle_ok = (tail - q_function(ratio)).abs() < 1e-12 && (tail - expected).abs() < 1e-6;
        let z = (r.empirical_flip_rate - tail).abs() / r.std_error;
        pass &= oracle_ok && z <= 3.0;
        details.push(format!("d/s={ratio}: rate={} Q={tail:.6e} z={z:.2}", r.empirical_flip_rate));
    }
    verdict(pass, details.join(", "))
}

fn property_suite() -> Outcome {
    let mut failures = Vec::new();

    let dd = ops(&[1.0, 0.2], 10);
    let non_dd = ops(&FIG4_TAPS, 10);
    for i in (0..1024u64).step_by(37) {
        let s = SignPattern::from_index(i, 10);
        for o in [&dd, &non_dd] {
            let a = qisi::energy::energy(o, &s).unwrap().energy;
            let b = qisi::energy::energy(o, &s.negated()).unwrap().energy;
            if (a - b).abs() > 1e-8 * a {
                failures.push(format!("sign symmetry at {}", s.bits()));
            }
        }
        for c in [0.5, 3.0] {
            let scaled = ChannelOperators::new(
                ChannelSpec::new(FIG4_TAPS.to_vec(), DELTA * c, 10).unwrap(),
            )
            .unwrap();
            let a = solve_energy_qp(&non_dd, &s).unwrap().energy;
            let b = solve_energy_qp(&scaled, &s).unwrap().energy;
            if (b - c * c * a).abs() > 1e-8 * b {
                failures.push(format!("scaling c={c} at {}", s.bits()));
            }
        }
    }

    for taps in [vec![1.0, 0.2], vec![1.0, 0.1, 0.02]] {
        let o = ops(&taps, 12);
        let profile = enumerate_profile(&o).unwrap();
        let grid: Vec<f64> = (0..60).map(|i| D2 * (0.6 + 0.5 * i as f64 / 59.0)).collect();
        let curve = capacity_curve_from_profile(&profile, &grid).unwrap();
        if curve
            .windows(2)
            .any(|w| w[1].1.entropy_bits_per_use < w[0].1.entropy_bits_per_use - 1e-12)
        {
            failures.push(format!("capacity not monotone for {taps:?}"));
        }
        for (p, sol) in &curve {
            let r = achievable_rate(o.spec(), *p).unwrap();
            if r > sol.entropy_bits_per_use + 0.02 {
                failures.push(format!("rate above capacity for {taps:?} at {}", p / D2));
            }
        }
    }

    let render = |f: Figure| {
        let mut buf = Vec::new();
        write_figure(f, &mut buf).unwrap();
        buf
    };
    for f in [Figure::Fig3, Figure::Fig4] {
        if render(f) != render(f) {
            failures.push(format!("{} output differs between runs", f.name()));
        }
    }
    let o = ops(&[1.0, 0.2], 12);
    let cfg = NoisySimConfig {
        sigma: 0.1,
        num_symbols: 200_000,
        seed: 42,
        alpha: 0.7,
    };
    let a = simulate_zero_forcing(&o, &cfg).unwrap().to_key_value();
    let b = simulate_zero_forcing(&o, &cfg).unwrap().to_key_value();
    if a != b {
        failures.push("simulation report differs between runs".into());
    }

    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "sign symmetry, scaling, monotonicity, rate <= capacity + 0.02, reruns identical".into()
        } else {
            failures.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("two-tap closed-form thresholds", two_tap_thresholds),
        ("two-tap Markov rate curve", two_tap_rate_curve),
        ("two-tap capacity curve", two_tap_capacity_curve),
        ("three-tap constants", three_tap_constants),
        ("three-tap capacity and rate curves", three_tap_curves),
        ("closed-form energy equals QP energy", closed_form_energy_equivalence),
        ("exhaustive mean equals trace", mean_energy_equivalence),
        ("Gibbs endpoints and entropy identity", gibbs_endpoints),
        ("Markov power convergence", markov_power_convergence),
        ("noisy flip rate matches Gaussian tail", noisy_validation),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
