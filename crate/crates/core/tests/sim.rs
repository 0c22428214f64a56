use rustfft::{num_complex::Complex64, FftPlanner};
use wave_elastix::error::Error;
use wave_elastix::sim::*;
use wave_elastix::Material;

const T: f64 = 0.01;

fn small_config() -> SimConfig {
    SimConfig {
        strip_length: 0.1,
        element_size: 0.001,
        dt: 1.0 / 2400.0,
        total_time: 0.2,
        ..Default::default()
    }
}

fn short_chirp() -> Excitation {
    Excitation {
        duration: 0.2,
        ..Default::default()
    }
}

fn run(exc: &Excitation, cfg: &SimConfig) -> SimHistory {
    simulate(T, &Material::soft_tissue(10e3).unwrap(), exc, cfg).unwrap()
}

#[test]
fn zero_amplitude_gives_zero_history() {
    let h = run(
        &Excitation {
            amplitude: 0.0,
            ..short_chirp()
        },
        &small_config(),
    );
    assert!(h.u[0].iter().chain(&h.v[0]).all(|x| *x == 0.0));
}

#[test]
fn response_is_linear_in_amplitude() {
    let cfg = small_config();
    let a = run(&short_chirp(), &cfg);
    let b = run(
        &Excitation {
            amplitude: 2e-5,
            ..short_chirp()
        },
        &cfg,
    );
    let scale = a.v[0].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (x, y) in a.u[0].iter().chain(&a.v[0]).zip(b.u[0].iter().chain(&b.v[0])) {
        assert!((2.0 * x - y).abs() <= 1e-9 * scale);
    }
}

#[test]
fn surface_energy_stays_in_the_excited_band() {
    let exc = Excitation::default();
    let cfg = SimConfig {
        strip_length: 0.1,
        element_size: 0.001,
        dt: 1.0 / 2400.0,
        total_time: 1.0,
        ..Default::default()
    };
    let h = run(&exc, &cfg);
    let n = h.samples;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let df = 1.0 / (n as f64 * h.dt);
    for x in [0.0, 0.02, 0.05, 0.08] {
        let node = h.nearest_node(x);
        for series in [h.u_at(0, node), h.v_at(0, node)] {
            let mut buf: Vec<Complex64> = series.iter().map(|&s| Complex64::new(s, 0.0)).collect();
            fft.process(&mut buf);
            let (mut inside, mut total) = (0.0, 0.0);
            for (k, z) in buf.iter().enumerate().take(n / 2 + 1) {
                let f = k as f64 * df;
                let e = z.norm_sqr();
                total += e;
                if (0.8 * exc.f_start..=1.2 * exc.f_end).contains(&f) {
                    inside += e;
                }
            }
            assert!(inside >= 0.95 * total, "x={x}: {:.4}", inside / total);
        }
    }
}

#[test]
fn undamped_free_vibration_conserves_energy() {
    let exc = Excitation {
        duration: 0.05,
        mode: ExcitationMode::Force,
        amplitude: 1.0,
        location: (0.0, 0.004),
        ..Default::default()
    };
    let cfg = SimConfig {
        total_time: 0.15,
        rayleigh_beta: 0.0,
        track_energy: true,
        ..small_config()
    };
    let h = run(&exc, &cfg);
    let energy = h.energy.unwrap();
    let start = (exc.duration / h.dt).ceil() as usize + 1;
    let e0 = energy[start];
    assert!(e0 > 0.0);
    let drift = energy[start..].iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0;
    assert!(drift < 1e-6, "relative drift {drift}");
}

#[test]
fn damping_dissipates_energy() {
    let exc = Excitation {
        duration: 0.05,
        mode: ExcitationMode::Force,
        amplitude: 1.0,
        ..Default::default()
    };
    let cfg = SimConfig {
        total_time: 0.15,
        track_energy: true,
        ..small_config()
    };
    let energy = run(&exc, &cfg).energy.unwrap();
    let start = (exc.duration * 2400.0) as usize + 1;
    assert!(energy[start..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn point_loads_are_reciprocal() {
    let cfg = small_config();
    let (xa, xb) = (0.03, 0.07);
    let load = |x: f64| Excitation {
        mode: ExcitationMode::Force,
        amplitude: 1.0,
        location: (x, x),
        ..short_chirp()
    };
    let ha = run(&load(xa), &cfg);
    let hb = run(&load(xb), &cfg);
    let ab = ha.v_at(0, ha.nearest_node(xb));
    let ba = hb.v_at(0, hb.nearest_node(xa));
    let num: f64 = ab.iter().zip(&ba).map(|(p, q)| (p - q).powi(2)).sum();
    let den: f64 = ab.iter().map(|p| p * p).sum();
    assert!((num / den).sqrt() < 0.01);
}

#[test]
fn pick_off_at_simulation_rate_is_lossless() {
    let cfg = small_config();
    let h = run(&short_chirp(), &cfg);
    let ppm = 1000.0;
    let field = sample_surface(&h, ppm, 1.0 / cfg.dt, (0.0, 0.025)).unwrap();
    // frames cover [0, τ) while the history also holds t = τ
    assert_eq!(field.frames, h.samples - 1);
    for c in 0..field.cols {
        let node = h.nearest_node(c as f64 / ppm);
        let truth = h.v_at(0, node);
        for (a, b) in field.v_series(0, c).iter().zip(&truth) {
            assert!((a - b).abs() <= 1e-15 + 1e-12 * b.abs());
        }
    }
}

#[test]
fn two_ppm_values_agree_on_the_spectral_peak() {
    use wave_elastix::spectral::observed_dispersion;
    let cfg = SimConfig {
        total_time: 0.4,
        ..small_config()
    };
    let h = run(
        &Excitation {
            duration: 0.4,
            ..Default::default()
        },
        &cfg,
    );
    let peak = |ppm: f64| {
        let d = observed_dispersion(&sample_surface(&h, ppm, 600.0, (0.0, 0.025)).unwrap()).unwrap();
        let (g, w) = d.argmax();
        (d.gamma[g], d.omega[w], d.gamma[1] - d.gamma[0])
    };
    let (g1, w1, dg) = peak(1000.0);
    let (g2, w2, _) = peak(2000.0);
    assert!((g1 - g2).abs() <= dg * (1.0 + 1e-9));
    assert!((w1 - w2).abs() < 1e-9);
}

#[test]
fn sampling_errors() {
    let cfg = small_config();
    let h = run(
        &Excitation {
            amplitude: 0.0,
            ..short_chirp()
        },
        &cfg,
    );
    let err = |r: wave_elastix::Result<_>| r.err().unwrap().kind();
    assert_eq!(err(sample_surface(&h, 1000.0, 600.0, (0.01, 0.01))), "resampling");
    assert_eq!(err(sample_surface(&h, 1000.0, 4800.0, (0.0, 0.02))), "resampling");
    assert_eq!(err(sample_surface(&h, 1000.0, 600.0, (0.0, 0.05))), "config");
    assert_eq!(err(sample_surface(&h, 1000.0, 600.0, (0.09, 0.11))), "resampling");
}

#[test]
fn config_errors() {
    let mat = Material::soft_tissue(10e3).unwrap();
    let exc = short_chirp();
    let coarse_dt = SimConfig {
        dt: 1.0 / 1000.0,
        ..small_config()
    };
    assert!(matches!(simulate(T, &mat, &exc, &coarse_dt), Err(Error::Config(_))));
    let short = SimConfig {
        total_time: 0.1,
        ..small_config()
    };
    assert!(matches!(simulate(T, &mat, &exc, &short), Err(Error::Config(_))));
    let outside = Excitation {
        location: (0.2, 0.21),
        ..exc
    };
    assert!(simulate(T, &mat, &outside, &small_config()).is_err());
}

#[test]
fn rendered_frames_follow_the_field() {
    let cfg = small_config();
    let h = run(&short_chirp(), &cfg);
    let field = sample_surface(&h, 1000.0, 600.0, (0.0, 0.025)).unwrap();
    let tex = Texture::random(field.rows, field.cols, 2.0, 3);
    let clip = render_video(&field, &tex).unwrap();
    assert_eq!(
        (clip.rows, clip.cols, clip.frames),
        (field.rows, field.cols, field.frames)
    );
    assert_eq!(clip.frame(0), tex.data);
}
