//! End-to-end acceptance suite. Runs every criterion, prints one line each,
//! and exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use fracpseudo::caputo_oracle::{caputo_derivative_sampled, l1_extrapolated, L1Grid};
use fracpseudo::direct::{
    solve_direct, solve_modal_case_i, solve_modal_case_ii, DirectProblem, FractionalOrder, ModalProblem,
    QuadratureSpec, Representation, SolverOptions, SourceTrace, TimeGrid,
};
use fracpseudo::inverse::{inverse_diagnostics, reconstruct, InverseOptions, InverseProblemData};
use fracpseudo::ledger::{stability, NormLedger};
use fracpseudo::mlfunc::{ml, ml_simon_bounds, MLAccuracy};
use fracpseudo::spectral::{SpectralField, SpectrumPair};

// Pinned tolerances.
const SANDWICH_RUNTIME_S: f64 = 5.0;
const EIGEN_FINAL_SUP: f64 = 1e-5;
const ORACLE_REL: f64 = 1e-6;
const ORACLE_RUNTIME_S: f64 = 60.0;
const REPRESENTATION_SUP: f64 = 1e-8;
const ROUND_TRIP_REL: f64 = 1e-8;
const ROUND_TRIP_RUNTIME_S: f64 = 10.0;
const HOMOGENEOUS_SUP: f64 = 1e-14;
const LEDGER_SLACK: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn sandwich() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut checked = 0;
    for i in 1..=9 {
        let alpha = i as f64 / 10.0;
        for n in 0..40 {
            let z = 1e-3 * (1e5f64).powf(n as f64 / 39.0);
            let (lo, hi) = ml_simon_bounds(alpha, z).unwrap();
            let v = ml(alpha, 1.0, -z).unwrap();
            checked += 1;
            if !(lo < v && v < hi) {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        violations == 0 && secs < SANDWICH_RUNTIME_S,
        format!("{checked} points, {violations} violations, {secs:.3} s"),
    )
}

/// sup over t ∈ [T/4, T] of |D^α_L1 E + ρ E| at J steps.
fn eigen_error(alpha: f64, rho: f64, steps: usize) -> f64 {
    let grid = L1Grid::new(steps, 1.0).unwrap();
    let e: Vec<f64> = grid.nodes().iter().map(|&t| ml(alpha, 1.0, -rho * t.powf(alpha)).unwrap()).collect();
    let d = caputo_derivative_sampled(&e, &grid, alpha).unwrap();
    (steps / 4..=steps).map(|j| (d[j - 1] + rho * e[j]).abs()).fold(0.0, f64::max)
}

fn eigen_relation() -> Outcome {
    let rho = 1.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 0.75] {
        let errs: Vec<f64> = [1 << 10, 1 << 12, 1 << 14].iter().map(|&j| eigen_error(alpha, rho, j)).collect();
        let rates: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log(4.0)).collect();
        let need = 1.5 - (1.0 - alpha);
        let ok = rates.iter().all(|&r| r >= need) && errs[2] <= EIGEN_FINAL_SUP;
        pass &= ok;
        parts.push(format!(
            "alpha={alpha}: sup err {:.2e}, rates {:.3}/{:.3} (need >= {need})",
            errs[2], rates[0], rates[1]
        ));
    }
    outcome(pass, parts.join("; "))
}

/// The twelve oracle problems: both spectra at mode 2, three orders, two sources.
fn oracle_problems() -> Vec<(String, ModalProblem)> {
    let mut out = Vec::new();
    for (name, lambda, mu) in [("dirichlet", 4.0, 4.0), ("bilaplacian", 16.0, 4.0)] {
        for alpha in [0.3, 0.6, 0.9] {
            let sources = [
                ("const", SourceTrace::Constant(1.0)),
                ("sin", SourceTrace::analytic_with_derivative(f64::sin, f64::cos)),
            ];
            for (sname, src) in sources {
                let p = ModalProblem::new(lambda, mu, 1.0, src, order(alpha)).unwrap();
                out.push((format!("{name}/a={alpha}/{sname}"), p));
            }
        }
    }
    out
}

fn closed_form_at_end(p: &ModalProblem, grid: &TimeGrid) -> f64 {
    let (q, acc) = (QuadratureSpec::default(), MLAccuracy::default());
    let sol = if p.alpha.admits_case_i() {
        solve_modal_case_i(p, grid, &q, &acc).unwrap()
    } else {
        solve_modal_case_ii(p, grid, &q, &acc).unwrap()
    };
    *sol.values.last().unwrap()
}

fn closed_form_vs_oracle() -> Outcome {
    let start = Instant::now();
    let grid = TimeGrid::uniform(1.0, 16).unwrap();
    let steps: Vec<usize> = (10..=14).map(|p| 1 << p).collect();
    let mut worst = (0.0, String::new());
    let problems = oracle_problems();
    for (name, p) in &problems {
        let closed = closed_form_at_end(p, &grid);
        let oracle = l1_extrapolated(p, 1.0, &steps).unwrap();
        let rel = (closed - oracle).abs() / oracle.abs();
        if rel > worst.0 {
            worst = (rel, name.clone());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.0 <= ORACLE_REL && secs < ORACLE_RUNTIME_S,
        format!("{} problems, worst rel err {:.2e} ({}), {secs:.1} s", problems.len(), worst.0, worst.1),
    )
}

fn representation_equivalence() -> Outcome {
    let grid = TimeGrid::uniform(1.0, 32).unwrap();
    let (q, acc) = (QuadratureSpec::default(), MLAccuracy::default());
    type Pair = (&'static str, fn(f64) -> f64, fn(f64) -> f64);
    let sources: [Pair; 4] = [
        ("sin", f64::sin, f64::cos),
        ("t", |t| t, |_| 1.0),
        ("exp(-2t)", |t| (-2.0 * t).exp(), |t| -2.0 * (-2.0 * t).exp()),
        ("1+t^2", |t| 1.0 + t * t, |t| 2.0 * t),
    ];
    let mut worst = (0.0, String::new());
    let mut count = 0;
    for (lambda, mu) in [(4.0, 4.0), (16.0, 4.0), (1.0, 9.0)] {
        for alpha in [0.6, 0.75, 0.9, 1.0] {
            for (name, f, df) in sources {
                let p = ModalProblem::new(lambda, mu, 0.5, SourceTrace::analytic_with_derivative(f, df), order(alpha))
                    .unwrap();
                let a = solve_modal_case_i(&p, &grid, &q, &acc).unwrap();
                let b = solve_modal_case_ii(&p, &grid, &q, &acc).unwrap();
                let sup = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                count += 1;
                if sup > worst.0 {
                    worst = (sup, format!("lambda={lambda} mu={mu} alpha={alpha} f={name}"));
                }
            }
        }
    }
    outcome(
        worst.0 <= REPRESENTATION_SUP,
        format!("{count} problems, worst sup diff {:.2e} ({})", worst.0, worst.1),
    )
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let spectrum = Arc::new(SpectrumPair::bilaplacian_pair(16).unwrap());
    let alpha = order(0.7);
    let phi = SpectralField::from_fn(spectrum.clone(), |k| 1.0 / (k * k) as f64).unwrap();
    let f_star: Vec<f64> = (1..=16).map(|k| 2.0 / k as f64 + 0.5).collect();
    let sources = f_star.iter().map(|&c| SourceTrace::Constant(c)).collect();
    let problem = DirectProblem::new(phi.clone(), sources, alpha).unwrap();
    let grid = TimeGrid::uniform(1.0, 32).unwrap();
    let report = solve_direct(&problem, &grid, &SolverOptions::default()).unwrap();
    let psi = SpectralField::new(report.modal_solutions.iter().map(|r| *r.last().unwrap()).collect(), spectrum).unwrap();
    let data = InverseProblemData::new(phi, psi, alpha, 1.0).unwrap();
    let sol = reconstruct(&data, &grid, &InverseOptions::default()).unwrap();
    let worst = sol.f.coeffs().iter().zip(&f_star).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    let certified = sol.denom.iter().all(|&d| d >= sol.denom_floor);
    let mu = data.spectrum().mu();
    let weighted = sol.denom.iter().zip(mu).all(|(&d, &m)| m * d >= sol.weighted_floor);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= ROUND_TRIP_REL && certified && weighted && secs < ROUND_TRIP_RUNTIME_S,
        format!(
            "max rel err {worst:.2e}, floor {:.3e} <= min denom {:.3e}: {certified}, weighted floor {:.3e}: {weighted}, {secs:.2} s",
            sol.denom_floor,
            sol.denom.iter().copied().fold(f64::INFINITY, f64::min),
            sol.weighted_floor
        ),
    )
}

fn homogeneous() -> Outcome {
    let mut worst: f64 = 0.0;
    let grid = TimeGrid::uniform(1.0, 32).unwrap();
    for (name, alpha) in [("dirichlet_laplacian_pair", 0.3), ("bilaplacian_pair", 0.7), ("bilaplacian_pair", 1.0)] {
        let spectrum = Arc::new(SpectrumPair::builtin(name, 8).unwrap());
        let zero = SpectralField::zeros(spectrum.clone());
        for (sources, repr) in [
            (vec![SourceTrace::zero(); 8], Representation::Auto),
            (vec![SourceTrace::analytic_with_derivative(|_| 0.0, |_| 0.0); 8], Representation::CaseII),
            (vec![SourceTrace::sampled_with_derivative(vec![0.0; 33], vec![0.0; 33]); 8], Representation::CaseII),
        ] {
            let problem = DirectProblem::new(zero.clone(), sources, order(alpha)).unwrap();
            let opts = SolverOptions { representation: repr, ..Default::default() };
            let r = solve_direct(&problem, &grid, &opts).unwrap();
            worst = r.modal_solutions.iter().flatten().fold(worst, |m, v| m.max(v.abs()));
        }
        let data = InverseProblemData::new(zero.clone(), zero.clone(), order(alpha), 1.0).unwrap();
        let sol = reconstruct(&data, &grid, &InverseOptions::default()).unwrap();
        worst = sol.u.iter().flatten().chain(sol.f.coeffs()).chain(&sol.c).fold(worst, |m, v| m.max(v.abs()));
    }
    outcome(worst <= HOMOGENEOUS_SUP, format!("max |output| {worst:.1e}"))
}

fn ledger_stability() -> Outcome {
    let mut families: Vec<(String, Vec<NormLedger>)> = vec![
        ("direct case I".into(), Vec::new()),
        ("direct case II".into(), Vec::new()),
        ("inverse".into(), Vec::new()),
    ];
    for n in [8, 16, 32] {
        for steps in [256, 512, 1024] {
            let grid = TimeGrid::uniform(1.0, steps).unwrap();
            let spectrum = Arc::new(SpectrumPair::bilaplacian_pair(n).unwrap());
            let phi = SpectralField::from_fn(spectrum.clone(), |k| (k as f64).powi(-6)).unwrap();
            let sources: Vec<SourceTrace> = (1..=n)
                .map(|k| {
                    let a = (k as f64).powi(-6);
                    SourceTrace::analytic_with_derivative(move |t| a * (1.0 + t.sin()), move |t| a * t.cos())
                })
                .collect();
            let problem = DirectProblem::new(phi.clone(), sources, order(0.75)).unwrap();
            for (slot, repr) in [(0, Representation::CaseI), (1, Representation::CaseII)] {
                let opts = SolverOptions { representation: repr, ..Default::default() };
                families[slot].1.push(solve_direct(&problem, &grid, &opts).unwrap().ledger);
            }
            let psi = SpectralField::from_fn(spectrum, |k| 0.5 * (k as f64).powi(-6)).unwrap();
            let data = InverseProblemData::new(phi, psi, order(0.75), 1.0).unwrap();
            let sol = reconstruct(&data, &grid, &InverseOptions::default()).unwrap();
            let oracle = L1Grid::new(steps, 1.0).unwrap();
            families[2].1.push(inverse_diagnostics(&sol, &data, &oracle, &MLAccuracy::default()).unwrap());
        }
    }
    let mut pass = true;
    let mut worst = (0.0, String::new());
    let mut count = 0;
    for (family, ledgers) in &families {
        let refs: Vec<&NormLedger> = ledgers.iter().collect();
        for s in stability(&refs, LEDGER_SLACK) {
            count += 1;
            pass &= s.holds;
            if s.spread >= worst.0 {
                worst = (s.spread, format!("{family}: {}", s.name));
            }
        }
    }
    outcome(pass, format!("{count} estimates over 9 refinements, worst spread {:.2}% ({})", 100.0 * worst.0, worst.1))
}

fn determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let bin = env!("CARGO_BIN_EXE_fracpseudo");
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = 0;
    let mut mismatched = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&configs)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    entries.sort();
    for config in &entries {
        let stem = config.file_stem().unwrap().to_string_lossy().to_string();
        // file names start with the subcommand: direct_*, inverse_*, verify_*, ml-eval_*
        let mode = stem.split('_').next().unwrap().to_string();
        let outs: Vec<PathBuf> = (0..2).map(|i| tmp.path().join(format!("{stem}-{i}"))).collect();
        for (i, out) in outs.iter().enumerate() {
            let status = Command::new(bin)
                .arg(&mode)
                .arg("--config")
                .arg(config)
                .arg("--out")
                .arg(out)
                .arg("--threads")
                .arg(if i == 0 { "1" } else { "4" })
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            if !status.success() {
                mismatched.push(format!("{stem}: exit {status}"));
            }
        }
        runs += 1;
        for file in artifact_files(&outs[0]) {
            let a = std::fs::read(outs[0].join(&file)).unwrap();
            let b = std::fs::read(outs[1].join(&file)).ok();
            if b.as_deref() != Some(&a[..]) {
                mismatched.push(format!("{stem}/{file}"));
            }
        }
    }
    outcome(
        runs > 0 && mismatched.is_empty(),
        format!("{runs} configs run twice (1 and 4 threads), mismatches: {mismatched:?}"),
    )
}

fn artifact_files(dir: &Path) -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.map(|e| e.unwrap().file_name().to_string_lossy().to_string())
                .filter(|n| n.ends_with(".csv") || n.ends_with(".json"))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("mittag-leffler sandwich", sandwich),
        ("eigen-relation under L1", eigen_relation),
        ("closed form vs L1 oracle", closed_form_vs_oracle),
        ("representation equivalence", representation_equivalence),
        ("inverse round trip", round_trip),
        ("homogeneous data", homogeneous),
        ("norm-ledger stability", ledger_stability),
        ("cli determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
