use wave_elastix_py::*;

const TINY: &str = r#"{"thickness": 0.005, "excitation": {"duration": 0.25, "f_start": 60, "f_end": 250},
  "sim": {"strip_length": 0.35, "element_size": 0.001, "total_time": 0.25},
  "sampling": {"ppm": 500, "fps": 800, "window": [0.02, 0.1]}}"#;

#[test]
fn scenario_round_trip_through_json() {
    let s = PyScenario::new(Some(TINY)).unwrap();
    assert_eq!(s.thickness(), 0.005);
    let again = PyScenario::new(Some(&s.to_json().unwrap())).unwrap();
    assert_eq!(again.inner, s.inner);
    assert!(PyScenario::new(Some(r#"{"thickness": 0.005, "bogus": 1}"#)).is_err());
}

#[test]
fn small_closed_loop() {
    let s = PyScenario::new(Some(TINY)).unwrap();
    let field = s.field().unwrap();
    assert_eq!(field.shape(), (1, 40, 200));
    let raw = observed_dispersion(&field).unwrap();
    let roi = r#"{"gamma_max": 1500, "omega_min": 400, "omega_max": 1500, "bins": [32, 32]}"#;
    let img = raw.prepare(Some(roi)).unwrap();
    assert_eq!(img.shape(), (32, 32));
    let opts = r#"{"fem": {"element_size": 0.001, "branches": 6, "gamma_count": 20}}"#;
    let est = grid_search(&img, (0.004, 0.006, 3), (8000.0, 12000.0, 3), "ssim", Some(opts)).unwrap();
    assert_eq!(est.cell(), (1, 1));
    assert_eq!(est.scores().len(), 9);
    assert!(grid_search(&img, (0.004, 0.006, 3), (8000.0, 12000.0, 3), "nope", Some(opts)).is_err());
}

#[test]
fn curves_and_char_numbers() {
    let b = dispersion_curves(0.01, 10e3, vec![100.0, 200.0], 3, None).unwrap();
    assert_eq!(b.len(), 3);
    assert!(b.iter().all(|w| w.len() == 2 && w[0] < w[1]));
    let pi = characteristic_numbers(300.0, 628.3, 0.2, 0.01, 0.0005, 1000.0, 600.0, 1.0).unwrap();
    assert_eq!(pi.len(), 6);
    assert!((pi["pi1"] - 60.0).abs() < 1e-12);
}
