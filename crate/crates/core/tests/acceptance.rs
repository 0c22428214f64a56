//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to
//! stderr (uncaptured) before asserting. The shared simulations are built
//! once and reused across tests.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use wave_elastix::fem::{dispersion_curves, uniform_gamma_grid};
use wave_elastix::field::DisplacementField;
use wave_elastix::inversion::*;
use wave_elastix::motion::{phase_displacements, FilterParams};
use wave_elastix::objectives::ObjectiveKind;
use wave_elastix::sim::*;
use wave_elastix::spectral::*;
use wave_elastix::{LayerGeometry, Material};

const T0: f64 = 0.010;
const E0: f64 = 10e3;
const TRUE_CELL: (usize, usize) = (10, 10);

fn report(label: &str, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[acceptance] {label} {name}: {verdict} ({detail})");
}

fn criterion(n: u32) -> String {
    format!("criterion {n:>2}")
}

fn grid() -> SearchGrid {
    SearchGrid::around(T0, E0, 0.3, 21).unwrap()
}

fn cell_distance(cell: (usize, usize), truth: (usize, usize)) -> usize {
    cell.0.abs_diff(truth.0).max(cell.1.abs_diff(truth.1))
}

fn invert(field: &DisplacementField, roi: &Roi, grid: &SearchGrid, opts: &SearchOptions) -> EstimationResult {
    let raw = observed_dispersion(field).unwrap();
    grid_search(&prepare(&raw, roi).unwrap(), grid, opts).unwrap()
}

struct Fixture {
    scenario: Scenario,
    history: SimHistory,
    clean: DisplacementField,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let scenario = Scenario::default();
        let history = simulate(
            scenario.thickness,
            &scenario.material,
            &scenario.excitation,
            &scenario.sim,
        )
        .unwrap();
        let clean = sample_surface_with(&history, &scenario.sampling).unwrap();
        Fixture {
            scenario,
            history,
            clean,
        }
    })
}

fn clean_result() -> &'static EstimationResult {
    static R: OnceLock<EstimationResult> = OnceLock::new();
    R.get_or_init(|| invert(&fixture().clean, &Roi::default(), &grid(), &SearchOptions::default()))
}

#[test]
fn criterion_01_closed_loop_recovery() {
    let r = clean_result();
    let d = cell_distance(r.cell(), TRUE_CELL);
    let pass = d <= 1;
    report(
        &criterion(1),
        "closed-loop recovery",
        pass,
        &format!(
            "T*={:.4} m E*={:.0} Pa, cell {:?}, {d} cell(s) from truth",
            r.t_star,
            r.e_star,
            r.cell()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_sensitivity_ordering() {
    let sweep = sensitivity_sweep(
        T0,
        E0,
        &[-0.05, 0.0, 0.05],
        &fixture().scenario,
        &Roi::default(),
        &grid(),
        &SearchOptions::default(),
    )
    .unwrap();
    let failed = sweep.cases.iter().filter(|c| c.estimate.is_err()).count();
    let pass = failed == 0 && sweep.thickness_strict && sweep.stiffness_strict;
    let summary: Vec<String> = sweep
        .cases
        .iter()
        .map(|c| match &c.estimate {
            Ok((t, e)) => format!("({:.4},{:.0})->({t:.4},{e:.0})", c.true_thickness, c.true_stiffness),
            Err(msg) => format!("({:.4},{:.0})->error {msg}", c.true_thickness, c.true_stiffness),
        })
        .collect();
    report(&criterion(2), "sensitivity ordering", pass, &summary.join(" "));
    assert!(pass, "{sweep:?}");
}

#[test]
fn criterion_03_analytic_eigenvalues() {
    let mat = Material::soft_tissue(E0).unwrap();
    let geom = LayerGeometry::single_column(T0, T0 / 40.0).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b;

    let zero = dispersion_curves(&geom, &mat, &[0.0], 8).unwrap();
    let freqs: Vec<f64> = zero.branches.iter().map(|b| b[0] / (2.0 * PI)).collect();
    let fs = mat.shear_speed() / (4.0 * T0);
    let fp = mat.p_wave_speed() / (4.0 * T0);
    let err_s = rel(freqs[0], fs);
    let err_p = freqs.iter().map(|f| rel(*f, fp)).fold(f64::INFINITY, f64::min);

    let gamma: Vec<f64> = [6.0, 8.0, 12.0].iter().map(|x| x / T0).collect();
    let low = dispersion_curves(&geom, &mat, &gamma, 1).unwrap();
    let cr = mat.rayleigh_speed_estimate();
    let err_r = gamma
        .iter()
        .zip(&low.branches[0])
        .map(|(g, w)| rel(w / g, cr))
        .fold(0.0, f64::max);

    let pass = err_s < 0.01 && err_p < 0.01 && err_r < 0.03;
    report(
        &criterion(3),
        "analytic eigenvalue oracle",
        pass,
        &format!(
            "shear {:.3}%, compressional {:.3}%, Rayleigh {:.2}%",
            100.0 * err_s,
            100.0 * err_p,
            100.0 * err_r
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_scaling_laws() {
    let geom = LayerGeometry::single_column(T0, 0.0005).unwrap();
    let mat = Material::soft_tissue(E0).unwrap();
    let gamma = uniform_gamma_grid(10, 900.0, false);
    let base = dispersion_curves(&geom, &mat, &gamma, 8).unwrap();
    let stiff = dispersion_curves(&geom, &mat.with_modulus(2.3 * E0).unwrap(), &gamma, 8).unwrap();
    let heavy = dispersion_curves(&geom, &Material::new(E0, 0.45, 1450.0).unwrap(), &gamma, 8).unwrap();
    let mut err_e = 0.0f64;
    let mut err_rho = 0.0f64;
    for b in 0..8 {
        for g in 0..gamma.len() {
            let w = base.branches[b][g];
            err_e = err_e.max((stiff.branches[b][g] - 2.3f64.sqrt() * w).abs() / w);
            err_rho = err_rho.max((heavy.branches[b][g] - w / 1.45f64.sqrt()).abs() / w);
        }
    }

    // fast path against one eigen-solve per cell on a small grid
    let small = SearchGrid::around(T0, E0, 0.3, 5).unwrap();
    let observed = prepare(&observed_dispersion(&fixture().clean).unwrap(), &Roi::default()).unwrap();
    let fast = grid_search(&observed, &small, &SearchOptions::default()).unwrap();
    let brute = grid_search(
        &observed,
        &small,
        &SearchOptions {
            mode: SearchMode::Direct,
            ..Default::default()
        },
    )
    .unwrap();
    let err_fast = fast
        .landscape()
        .scores
        .iter()
        .zip(&brute.landscape().scores)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max);

    let pass = err_e < 1e-10 && err_rho < 1e-10 && err_fast < 1e-8;
    report(
        &criterion(4),
        "scaling laws",
        pass,
        &format!("stiffness {err_e:.1e}, density {err_rho:.1e}, fast path vs brute force {err_fast:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_mesh_ablation() {
    // observation from a finer strip mesh than any inversion mesh
    let scenario = Scenario {
        sim: SimConfig {
            element_size: 0.00025,
            ..fixture().scenario.sim
        },
        ..fixture().scenario.clone()
    };
    let field = scenario.sampled_field().unwrap();
    let observed = prepare(&observed_dispersion(&field).unwrap(), &Roi::default()).unwrap();
    let g = grid();
    let errors: Vec<(f64, (usize, usize), f64)> = [0.001, 0.0005, 0.00025]
        .iter()
        .map(|&e| {
            let mut opts = SearchOptions::default();
            opts.fem.element_size = e;
            let r = grid_search(&observed, &g, &opts).unwrap();
            let err = (r.t_star - T0).abs() / T0 + (r.e_star - E0).abs() / E0;
            (e, r.cell(), err)
        })
        .collect();
    let pass = errors.windows(2).all(|w| w[1].2 <= w[0].2 + 1e-12);
    let detail: Vec<String> = errors
        .iter()
        .map(|(e, c, err)| format!("e={:.2} mm cell {c:?} error {:.3}", e * 1e3, err))
        .collect();
    report(&criterion(5), "mesh ablation trend", pass, &detail.join(", "));
    assert!(pass);
}

#[test]
fn criterion_06_window_ablation() {
    let fx = fixture();
    let g = grid();
    let rows: Vec<(f64, f64, usize)> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&len| {
            let sampling = SurfaceSampling::new(1000.0, 600.0, (0.05, 0.05 + len));
            let field = sample_surface_with(&fx.history, &sampling).unwrap();
            let raw = observed_dispersion(&field).unwrap();
            let dgamma = raw.gamma[1] - raw.gamma[0];
            let r = grid_search(&prepare(&raw, &Roi::default()).unwrap(), &g, &SearchOptions::default()).unwrap();
            (len, dgamma, r.landscape().cells_within(0.01))
        })
        .collect();
    let product = rows[0].1 * rows[0].0;
    let dgamma_exact = rows
        .iter()
        .all(|(l, d, _)| ((d * l) - product).abs() <= 1e-12 * product);
    let grows = rows.windows(2).all(|w| w[1].2 >= w[0].2) && rows[2].2 > rows[0].2;
    let pass = dgamma_exact && grows;
    let detail: Vec<String> = rows
        .iter()
        .map(|(l, d, n)| format!("L={l} m Δγ={d:.3} rad/m region {n}"))
        .collect();
    report(&criterion(6), "window ablation", pass, &detail.join(", "));
    assert!(pass);
}

struct NoisyCase {
    landscapes: Vec<(ObjectiveKind, (usize, usize), f64, usize)>,
}

fn noisy_case() -> &'static NoisyCase {
    static N: OnceLock<NoisyCase> = OnceLock::new();
    N.get_or_init(|| {
        let fx = fixture();
        let mut field = fx.clean.clone();
        add_noise(&mut field, 0.1, fx.scenario.seed).unwrap();
        let observed = prepare(&observed_dispersion(&field).unwrap(), &Roi::default()).unwrap();
        let g = grid();
        let landscapes = ObjectiveKind::ALL
            .iter()
            .map(|&kind| {
                let r = grid_search(
                    &observed,
                    &g,
                    &SearchOptions {
                        objective: kind,
                        ..Default::default()
                    },
                )
                .unwrap();
                let l = r.landscape();
                (kind, l.argmax, l.sharpness(), l.cells_within(0.01))
            })
            .collect();
        NoisyCase { landscapes }
    })
}

#[test]
fn criterion_07_objective_ablation() {
    let case = noisy_case();
    let (_, ssim_cell, ssim_sharp, _) = case.landscapes[0];
    let sharpest = case.landscapes[1..].iter().all(|l| ssim_sharp > l.2);
    let pass = ssim_cell == TRUE_CELL && sharpest;
    let detail: Vec<String> = case
        .landscapes
        .iter()
        .map(|(k, c, s, _)| format!("{} cell {c:?} sharpness {s:.4}", k.name()))
        .collect();
    report(&criterion(7), "objective ablation", pass, &detail.join(", "));
    assert!(pass);
}

/// At least one of −MSE, PSNR and curve should peak off the true cell, or
/// on a plateau of more than 3 cells within 1% of its maximum.
#[test]
fn noisy_fixture_misleads_or_flattens_another_objective() {
    let case = noisy_case();
    let others = &case.landscapes[1..];
    let pass = others
        .iter()
        .any(|(_, cell, _, plateau)| *cell != TRUE_CELL || *plateau > 3);
    let detail: Vec<String> = others
        .iter()
        .map(|(k, c, _, n)| format!("{} cell {c:?} plateau {n}", k.name()))
        .collect();
    report(
        "objectives",
        "a competing objective misleads or flattens",
        pass,
        &detail.join(", "),
    );
    assert!(pass);
}

/// The fixture with every length and time divided by `s`; moduli and density unchanged.
fn rescaled(base: &Scenario, s: f64) -> Scenario {
    let ex = base.excitation;
    let sim = base.sim;
    let sm = base.sampling;
    Scenario {
        thickness: base.thickness / s,
        excitation: Excitation {
            f_start: ex.f_start * s,
            f_end: ex.f_end * s,
            duration: ex.duration / s,
            amplitude: ex.amplitude / s,
            location: (ex.location.0 / s, ex.location.1 / s),
            ..ex
        },
        sim: SimConfig {
            strip_length: sim.strip_length / s,
            element_size: sim.element_size / s,
            dt: sim.dt / s,
            total_time: sim.total_time / s,
            rayleigh_alpha: sim.rayleigh_alpha * s,
            rayleigh_beta: sim.rayleigh_beta / s,
            ..sim
        },
        sampling: SurfaceSampling::new(sm.ppm * s, sm.fps * s, (sm.window.0 / s, sm.window.1 / s)),
        ..base.clone()
    }
}

#[test]
fn criterion_08_similitude() {
    let s = 10.0;
    let fx = fixture();
    let small = rescaled(&fx.scenario, s);
    let roi = Roi::default();
    let small_roi = Roi {
        gamma_min: roi.gamma_min * s,
        gamma_max: roi.gamma_max * s,
        omega_min: roi.omega_min * s,
        omega_max: roi.omega_max * s,
        ..roi
    };
    let a = prepare(&observed_dispersion(&fx.clean).unwrap(), &roi).unwrap();
    let b = prepare(
        &observed_dispersion(&small.sampled_field().unwrap()).unwrap(),
        &small_roi,
    )
    .unwrap();
    let axes_match = a.gamma.iter().zip(&b.gamma).all(|(x, y)| (x * s - y).abs() <= 1e-9 * y)
        && a.omega.iter().zip(&b.omega).all(|(x, y)| (x * s - y).abs() <= 1e-9 * y);
    let diff: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = a.values.iter().map(|x| x * x).sum();
    let rms = (diff / norm).sqrt();

    let mut opts = SearchOptions::default();
    opts.fem.element_size /= s;
    let small_grid = SearchGrid::around(T0 / s, E0, 0.3, 21).unwrap();
    let rb = grid_search(&b, &small_grid, &opts).unwrap();
    let ra = clean_result();
    let pis = similitude_report(
        ra.char_numbers.as_ref().unwrap(),
        rb.char_numbers.as_ref().unwrap(),
        SIMILITUDE_TOLERANCE,
    );
    let pis_equal = pis.iter().all(|p| !p.differs);
    let da = cell_distance(ra.cell(), TRUE_CELL);
    let db = cell_distance(rb.cell(), TRUE_CELL);
    let pass = axes_match && rms < 0.02 && da <= 1 && db <= 1;
    report(
        &criterion(8),
        "π-similitude",
        pass,
        &format!(
            "image RMS difference {:.3}%, cells {:?} and {:?}, π groups equal: {pis_equal}",
            100.0 * rms,
            ra.cell(),
            rb.cell()
        ),
    );
    assert!(pass);
}

fn lock_in(
    field: &DisplacementField,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    w: f64,
) -> Vec<num_complex::Complex64> {
    cols.map(|c| {
        let mut z = num_complex::Complex64::new(0.0, 0.0);
        for r in rows.clone() {
            for (f, x) in field.u_series(r, c).iter().enumerate() {
                z += x * num_complex::Complex64::from_polar(1.0, w * f as f64);
            }
        }
        z * (2.0 / (field.frames * rows.len()) as f64)
    })
    .collect()
}

#[test]
fn criterion_09_motion_extraction() {
    // 0.1 px travelling wave, 40 px wavelength, 4 cycles over the clip
    let ppm = 1000.0;
    let (rows, cols, frames) = (16, 120, 64);
    let (amp, k, w) = (0.1 / ppm, 2.0 * PI / 40.0, 2.0 * PI * 4.0 / 64.0);
    let mut wave = DisplacementField::zeros(rows, cols, frames, ppm, 600.0);
    for r in 0..rows {
        for c in 0..cols {
            for f in 0..frames {
                let i = wave.index(r, c, f);
                wave.u[i] = amp * (k * c as f64 - w * f as f64).sin();
            }
        }
    }
    wave.rebase_to_first_frame();
    let clip = render_video(&wave, &Texture::random(rows, cols, 1.5, 11)).unwrap();
    let got = phase_displacements(&clip, &FilterParams::default()).unwrap();
    let z = lock_in(&got, 2..rows - 2, 10..cols - 10, w);
    let amp_ratio = z.iter().map(|z| z.norm()).sum::<f64>() / z.len() as f64 / amp;
    let slope = z.windows(2).map(|p| (p[1] * p[0].conj()).arg()).sum::<f64>() / (z.len() - 1) as f64;
    let speed_ratio = (w / slope.abs()) / (w / k);

    // full video-input pipeline on the fixture
    let fx = fixture();
    let path = VideoPath::default();
    let video = fx.scenario.render(&fx.clean, &path).unwrap();
    let extracted = phase_displacements(&video, &path.filter).unwrap();
    let r = invert(&extracted, &Roi::default(), &grid(), &SearchOptions::default());
    let d = cell_distance(r.cell(), TRUE_CELL);

    let pass = (amp_ratio - 1.0).abs() < 0.15 && (speed_ratio - 1.0).abs() < 0.05 && d <= 1;
    report(
        &criterion(9),
        "motion extraction",
        pass,
        &format!(
            "amplitude ratio {amp_ratio:.3}, phase speed ratio {speed_ratio:.4}, video pipeline cell {:?}",
            r.cell()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_spectral_units() {
    let (ppm, fps) = (1000.0, 600.0);
    let (cols, frames) = (64, 64);
    let mut field = DisplacementField::zeros(2, cols, frames, ppm, fps);
    for r in 0..2 {
        for c in 0..cols {
            for t in 0..frames {
                let i = field.index(r, c, t);
                field.u[i] = (2.0 * PI * (c as f64 / 16.0 - t as f64 / 8.0)).sin();
            }
        }
    }
    field.rebase_to_first_frame();
    let img = observed_dispersion(&field).unwrap();
    let (g, w) = img.argmax();
    let bin_ok =
        (img.gamma[g] - 2.0 * PI * ppm / 16.0).abs() < 1e-9 && (img.omega[w] - 2.0 * PI * fps / 8.0).abs() < 1e-9;

    let mut noisy = DisplacementField::zeros(1, 48, 40, ppm, fps);
    for c in 0..48 {
        for t in 0..40 {
            let i = noisy.index(0, c, t);
            let x = (c * 7 + t * 13) as f64;
            noisy.u[i] = (x * 0.37).sin() + 0.2 * (x * 1.91).cos();
        }
    }
    let spec = row_spectrum(&noisy, 0, Component::Horizontal).unwrap();
    let mut energy = 0.0;
    for c in 0..48 {
        let s = noisy.u_series(0, c);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        energy += s.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    let lhs: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let parseval = (lhs - (48 * 40) as f64 * energy).abs() / lhs;

    let pass = bin_ok && parseval < 1e-9;
    report(
        &criterion(10),
        "spectral units",
        pass,
        &format!(
            "peak at γ={:.2} rad/m ω={:.2} rad/s, Parseval error {parseval:.1e}",
            img.gamma[g], img.omega[w]
        ),
    );
    assert!(pass);
}

#[test]
fn halving_grid_spacing_keeps_the_optimum() {
    let coarse = clean_result();
    let g = grid();
    let (dt, de) = (g.thickness[1] - g.thickness[0], g.stiffness[1] - g.stiffness[0]);
    let fine = SearchGrid::uniform(
        (coarse.t_star - 5.0 * dt, coarse.t_star + 5.0 * dt, 21),
        (coarse.e_star - 5.0 * de, coarse.e_star + 5.0 * de, 21),
    )
    .unwrap();
    let observed = prepare(&observed_dispersion(&fixture().clean).unwrap(), &Roi::default()).unwrap();
    let r = grid_search(&observed, &fine, &SearchOptions::default()).unwrap();
    let moved = (
        (r.t_star - coarse.t_star).abs() / dt,
        (r.e_star - coarse.e_star).abs() / de,
    );
    let pass = moved.0 <= 1.0 + 1e-9 && moved.1 <= 1.0 + 1e-9;
    report(
        "inversion",
        "halving grid spacing keeps the optimum",
        pass,
        &format!("optimum moved by ({:.2}, {:.2}) coarse cells", moved.0, moved.1),
    );
    assert!(pass);
}
