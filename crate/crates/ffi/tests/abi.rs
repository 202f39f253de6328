use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hocrip_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { hocrip_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hocrip_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn qirr_round_trip_and_quotients() {
    let text = CString::new("0,1,1,2").unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { hocrip_qirr_parse(text.as_ptr(), &mut q) }, HocripStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { hocrip_qirr_to_f64(q, &mut v) }, HocripStatus::Ok);
    assert!((v - 2f64.sqrt()).abs() < 1e-15);
    let mut a = [0i64; 6];
    assert_eq!(unsafe { hocrip_cf_quotients(q, a.as_mut_ptr(), a.len()) }, HocripStatus::Ok);
    assert_eq!(a, [1, 2, 2, 2, 2, 2]);
    unsafe { hocrip_qirr_free(q) };
}

#[test]
fn errors_map_to_codes_and_messages() {
    let bad = CString::new("1,1,1,4").unwrap();
    let mut q = ptr::null_mut();
    let st = unsafe { hocrip_qirr_parse(bad.as_ptr(), &mut q) };
    assert_ne!(st, HocripStatus::Ok);
    assert!(q.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { hocrip_qirr_parse(ptr::null(), &mut q) },
        HocripStatus::NullPointer
    );
    assert!(last_error().contains("null"));

    let mut v = 0.0;
    assert_eq!(unsafe { hocrip_qirr_to_f64(ptr::null(), &mut v) }, HocripStatus::NullPointer);
}

#[test]
fn ostrowski_type_of_fibonacci_sum() {
    let text = CString::new("golden-1").unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { hocrip_qirr_parse(text.as_ptr(), &mut b) }, HocripStatus::Ok);
    let mut t = 0usize;
    // 100 = 89 + 8 + 3 has three nonzero digits.
    assert_eq!(unsafe { hocrip_ostrowski_type(b, 100, &mut t) }, HocripStatus::Ok);
    assert_eq!(t, 3);
    unsafe { hocrip_qirr_free(b) };
}

#[test]
fn sequence_acf_and_matrix() {
    let desc = CString::new("hoc3:golden").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hocrip_sequence_new(desc.as_ptr(), 256, &mut s) }, HocripStatus::Ok);
    assert_eq!(unsafe { hocrip_sequence_len(s) }, 256);

    let (mut re, mut im) = (vec![0.0; 256], vec![0.0; 256]);
    assert_eq!(
        unsafe { hocrip_sequence_copy(s, re.as_mut_ptr(), im.as_mut_ptr(), 10) },
        HocripStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { hocrip_sequence_copy(s, re.as_mut_ptr(), im.as_mut_ptr(), 256) },
        HocripStatus::Ok
    );
    assert!(re.iter().zip(&im).all(|(a, b)| ((a * a + b * b) - 1.0).abs() < 1e-12));

    let (mut r, mut tau) = (0.0, 0i64);
    assert_eq!(unsafe { hocrip_acf_max_ratio(s, 255, &mut r, &mut tau) }, HocripStatus::Ok);
    assert!(r > 0.0 && r < 0.2, "{r}");
    assert!(tau != 0);

    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { hocrip_matrix_new(s, 256, 256, HocripToeplitz::ZeroPaddedFat, &mut m) },
        HocripStatus::Ok
    );
    let (mut q, mut rb) = (0usize, 0.0);
    assert_eq!(unsafe { hocrip_matrix_rip_order(m, &mut q, &mut rb) }, HocripStatus::Ok);
    assert!(q >= 2 && rb < 1.0);

    let subset: Vec<usize> = (0..q).map(|i| i * 17).collect();
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(
        unsafe { hocrip_matrix_subset_eigs(m, subset.as_ptr(), subset.len(), &mut lo, &mut hi) },
        HocripStatus::Ok
    );
    assert!(lo >= 1.0 - rb - 1e-9 && hi <= 1.0 + rb + 1e-9, "{lo} {hi} {rb} {q}");

    let oob = [0usize, 9999];
    assert_ne!(
        unsafe { hocrip_matrix_subset_eigs(m, oob.as_ptr(), 2, &mut lo, &mut hi) },
        HocripStatus::Ok
    );
    unsafe {
        hocrip_matrix_free(m);
        hocrip_sequence_free(s);
        hocrip_sequence_free(ptr::null_mut());
    }
}
