//! Exercise the C ABI through the Rust side: handle lifecycle, curve
//! copies, summaries, spectra and error paths.

use std::ffi::CStr;
use std::ptr;

use susy_forge_ffi::*;

fn new_partner(model: SfModel, param: f64, f0: f64, n: usize) -> (SfStatus, *mut SfPartner) {
    let mut handle: *mut SfPartner = ptr::null_mut();
    let status = unsafe { sf_partner_new(model, param, f0, n, &mut handle) };
    (status, handle)
}

#[test]
fn free_particle_partner_roundtrip() {
    let (status, handle) = new_partner(SfModel::Free, 1.0, -0.25, 8001);
    assert_eq!(status, SfStatus::Ok);
    let n = unsafe { sf_partner_len(handle) };
    assert_eq!(n, 8001);

    let mut xs = vec![0.0f64; n];
    let mut v3 = vec![0.0f64; n];
    unsafe {
        assert_eq!(sf_partner_curve(handle, SfCurve::GridX, xs.as_mut_ptr(), n), SfStatus::Ok);
        assert_eq!(sf_partner_curve(handle, SfCurve::V3, v3.as_mut_ptr(), n), SfStatus::Ok);
    }
    let i0 = xs.iter().position(|&x| x.abs() < 1e-9).expect("origin on grid");
    assert!((v3[i0] + 2.0).abs() < 1e-5, "V3(0) = {}", v3[i0]);

    let (mut sigma, mut f0, mut eps) = (0.0f64, 0.0f64, 0.0f64);
    let mut regime = SfRegime::Singular;
    unsafe {
        assert_eq!(
            sf_partner_summary(handle, &mut sigma, &mut f0, &mut eps, &mut regime),
            SfStatus::Ok
        );
    }
    assert!((sigma - 0.125).abs() < 1e-6);
    assert_eq!(f0, -0.25);
    assert_eq!(eps, -1.0);
    assert_eq!(regime, SfRegime::Augmented);

    let mut energies = vec![0.0f64; 2];
    let mut found = 0usize;
    unsafe {
        assert_eq!(
            sf_partner_spectrum(handle, 2, -1.9, -1e-4, energies.as_mut_ptr(), &mut found),
            SfStatus::Ok
        );
    }
    assert_eq!(found, 1, "single created level");
    assert!((energies[0] + 1.0).abs() < 1e-3);

    unsafe { sf_partner_free(handle) };
}

#[test]
fn coulomb_partner_regime() {
    let (status, handle) = new_partner(SfModel::Coulomb, 0.0, -0.1, 12000);
    assert_eq!(status, SfStatus::Ok);
    let mut regime = SfRegime::Singular;
    unsafe {
        assert_eq!(
            sf_partner_summary(handle, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), &mut regime),
            SfStatus::Ok
        );
    }
    assert_eq!(regime, SfRegime::Isospectral);
    unsafe { sf_partner_free(handle) };
}

#[test]
fn singular_window_is_reported() {
    let (status, handle) = new_partner(SfModel::Free, 1.0, -0.12, 4001);
    assert_eq!(status, SfStatus::SingularTransformation);
    assert!(handle.is_null());
    let msg = unsafe { CStr::from_ptr(sf_status_message(status)) };
    assert!(msg.to_str().unwrap().contains("singular"));
}

#[test]
fn null_and_size_errors() {
    let status = unsafe { sf_partner_new(SfModel::Free, 1.0, -0.25, 4001, ptr::null_mut()) };
    assert_eq!(status, SfStatus::NullArgument);

    let (status, handle) = new_partner(SfModel::Free, 1.0, -0.25, 4001);
    assert_eq!(status, SfStatus::Ok);
    let mut small = vec![0.0f64; 10];
    let status = unsafe { sf_partner_curve(handle, SfCurve::V0, small.as_mut_ptr(), small.len()) };
    assert_eq!(status, SfStatus::BufferTooSmall);
    let status = unsafe { sf_partner_curve(handle, SfCurve::V0, ptr::null_mut(), 4001) };
    assert_eq!(status, SfStatus::NullArgument);
    unsafe { sf_partner_free(handle) };

    // invalid coulomb parameter
    let (status, handle) = new_partner(SfModel::Coulomb, 1.5, -0.1, 4001);
    assert_eq!(status, SfStatus::InvalidConfig);
    assert!(handle.is_null());

    // double free is not attempted; freeing null is a no-op
    unsafe { sf_partner_free(ptr::null_mut()) };
}

#[test]
fn spectrum_error_paths() {
    let (status, handle) = new_partner(SfModel::Free, 1.0, -0.25, 4001);
    assert_eq!(status, SfStatus::Ok);
    let mut energies = vec![0.0f64; 1];
    let mut found = 123usize;
    // inverted bracket
    let status = unsafe { sf_partner_spectrum(handle, 1, 1.0, -1.0, energies.as_mut_ptr(), &mut found) };
    assert_eq!(status, SfStatus::InvalidConfig);
    unsafe { sf_partner_free(handle) };
}
