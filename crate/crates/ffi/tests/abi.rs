use std::ffi::{CStr, CString};
use std::ptr;

use brinkmann_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

const BOX: [f64; 6] = [-1.0, 1.0, -2.0, 2.0, -2.0, 2.0];

fn metric(h: &str, o1: &str, o2: &str) -> *mut BrkMetric {
    let mut m = ptr::null_mut();
    let s = unsafe { brk_metric_new(c(h).as_ptr(), c(o1).as_ptr(), c(o2).as_ptr(), BOX.as_ptr(), &mut m) };
    assert_eq!(s, BrkStatus::Ok);
    m
}

#[test]
fn metric_tables() {
    let m = metric("0", "y", "-x");
    let p = [0.1, 0.0, 0.3, -0.2];
    let mut g = [0.0; 16];
    let mut gam = [0.0; 64];
    let mut ric = [0.0; 16];
    unsafe {
        assert_eq!(brk_metric_components(m, p.as_ptr(), g.as_mut_ptr()), BrkStatus::Ok);
        assert_eq!(brk_christoffel(m, p.as_ptr(), gam.as_mut_ptr()), BrkStatus::Ok);
        assert_eq!(brk_ricci(m, p.as_ptr(), ric.as_mut_ptr()), BrkStatus::Ok);
        let mut flat = true;
        let mut viol = 0.0;
        assert_eq!(brk_is_ricci_flat(m, &mut flat, &mut viol), BrkStatus::Ok);
        assert!(!flat && (viol - 2.0).abs() < 1e-12);
        brk_metric_free(m);
    }
    assert_eq!(g[1], 1.0);
    // Γ^x_{uy} = 1, Γ^y_{ux} = −1
    assert!((gam[16 * 2 + 3] - 1.0).abs() < 1e-14);
    assert!((gam[16 * 3 + 2] + 1.0).abs() < 1e-14);
    assert!((ric[0] - 2.0).abs() < 1e-12);
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut m = ptr::null_mut();
    unsafe {
        let s = brk_metric_new(c("x +").as_ptr(), c("0").as_ptr(), c("0").as_ptr(), BOX.as_ptr(), &mut m);
        assert_eq!(s, BrkStatus::Parse);
        assert!(m.is_null());
        let msg = CStr::from_ptr(brk_last_error()).to_str().unwrap();
        assert!(msg.starts_with("syntax"), "{msg}");
        let s = brk_metric_new(ptr::null(), c("0").as_ptr(), c("0").as_ptr(), BOX.as_ptr(), &mut m);
        assert_eq!(s, BrkStatus::NullPointer);
        let s = brk_metric_from_json(c(r#"{"H": "v"}"#).as_ptr(), &mut m);
        assert_eq!(s, BrkStatus::InvalidInput);
        let ok = metric("x^2", "0", "0");
        let mut pp = ptr::null_mut();
        assert_eq!(brk_normalize(ok, &mut pp), BrkStatus::NotRicciFlat);
        let far = [0.0, 0.0, 10.0, 0.0];
        let mut g = [0.0; 16];
        assert_eq!(brk_metric_components(ok, far.as_ptr(), g.as_mut_ptr()), BrkStatus::OutsideDomain);
        assert!(CStr::from_ptr(brk_last_error()).to_str().unwrap().starts_with("outside_domain"));
        brk_metric_free(ok);
        assert!(!CStr::from_ptr(brk_version()).to_bytes().is_empty());
    }
}

#[test]
fn normalize_and_classify() {
    let m = metric("(x^2 + y^2)/2 + x*y", "y", "-x");
    let mut pp = ptr::null_mut();
    unsafe {
        assert_eq!(brk_normalize(m, &mut pp), BrkStatus::Ok);
        let mut a = 0.0;
        assert_eq!(brk_pp_wave_alpha(pp, 0.2, &mut a), BrkStatus::Ok);
        assert!((a - 1.0).abs() < 1e-12);
        let mut q = [0.0; 3];
        assert_eq!(brk_pp_wave_forward(pp, 0.5, 1.0, 0.0, q.as_mut_ptr()), BrkStatus::Ok);
        assert!((q[1] - 0.5f64.cos()).abs() < 1e-12 && (q[2] + 0.5f64.sin()).abs() < 1e-12);
        let mut h = 0.0;
        assert_eq!(brk_pp_wave_h_tilde(pp, q[0], q[1], q[2], &mut h), BrkStatus::Ok);
        assert!(h.abs() < 1e-10, "{h}");
        brk_pp_wave_free(pp);
        brk_metric_free(m);

        let mut kind = BrkClassKind::PlaneWave;
        let mut l = [0.0; 2];
        let s = brk_classify(c("(x^2 - y^2)/2").as_ptr(), BOX.as_ptr(), 1e-8, &mut kind, l.as_mut_ptr());
        assert_eq!(s, BrkStatus::Ok);
        assert_eq!(kind, BrkClassKind::CahenWallach);
        assert_eq!(l, [1.0, -1.0]);
        brk_classify(c("x^3 - 3*x*y^2").as_ptr(), BOX.as_ptr(), 1e-8, &mut kind, l.as_mut_ptr());
        assert_eq!(kind, BrkClassKind::GeneralPpWave);
        assert!(l[0].is_nan());
    }
}

#[test]
fn geodesic_and_certificate() {
    let m = metric("0", "0", "0");
    let mut st = [0.0; 9];
    let mut exit = BrkExitReason::Blowup;
    let mut drift = 1.0;
    unsafe {
        let x0 = [0.0; 4];
        let dx0 = [0.5, 0.0, 0.5, 0.0];
        let s = brk_geodesic(m, x0.as_ptr(), dx0.as_ptr(), 1.0, st.as_mut_ptr(), &mut exit, &mut drift);
        assert_eq!(s, BrkStatus::Ok);
        assert_eq!(exit, BrkExitReason::Completed);
        assert!((st[1] - 0.5).abs() < 1e-12 && (st[3] - 0.5).abs() < 1e-12 && drift < 1e-14);
        brk_metric_free(m);

        let mut cert = ptr::null_mut();
        assert_eq!(brk_certificate_new(c("x^2 - y^2").as_ptr(), 0.0, 3.0, 1.0, 5, &mut cert), BrkStatus::NoWitness);
        let s = brk_certificate_new(c("-(exp(x)*cos(y))").as_ptr(), 0.0, 3.0, 1.0, 50, &mut cert);
        assert_eq!(s, BrkStatus::Ok);
        let mut sum = BrkCertificateSummary::default();
        assert_eq!(brk_certificate_summary(cert, &mut sum), BrkStatus::Ok);
        assert!(sum.excursion_norm > 3.0 && sum.bound_slack > 0.0 && sum.sample_count >= 1000);
        let mut small = vec![0.0; 6];
        assert_eq!(brk_certificate_samples(cert, small.as_mut_ptr(), 6), BrkStatus::BufferTooSmall);
        let mut buf = vec![0.0; 6 * sum.sample_count];
        assert_eq!(brk_certificate_samples(cert, buf.as_mut_ptr(), buf.len()), BrkStatus::Ok);
        assert_eq!(&buf[..5], &[0.0; 5]);
        let last = &buf[buf.len() - 6..];
        assert_eq!(last[0..5], [1.0, 1.0, 0.0, 0.0, 0.0]);
        for row in buf.chunks(6) {
            assert!((row[5] + sum.e0).abs() <= 1e-8 * (1.0 + sum.e0));
        }
        let mut js = ptr::null_mut();
        assert_eq!(brk_certificate_json(cert, &mut js), BrkStatus::Ok);
        let text = CStr::from_ptr(js).to_str().unwrap().to_owned();
        brk_string_free(js);
        assert!(text.contains("\"k0\": 14"), "{}", &text[..200]);
        brk_certificate_free(cert);
    }
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/brinkmann.h")).unwrap();
    for f in [
        "brk_version", "brk_last_error", "brk_metric_new", "brk_metric_from_json", "brk_metric_free",
        "brk_metric_components", "brk_christoffel", "brk_ricci", "brk_is_ricci_flat", "brk_normalize",
        "brk_pp_wave_free", "brk_pp_wave_alpha", "brk_pp_wave_forward", "brk_pp_wave_h_tilde", "brk_classify",
        "brk_geodesic", "brk_certificate_new", "brk_certificate_free", "brk_certificate_summary",
        "brk_certificate_samples", "brk_certificate_json", "brk_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct BrkMetric BrkMetric;"));
    assert!(h.contains("BRK_STATUS_NO_WITNESS = 8"));
}
