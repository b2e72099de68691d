use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use reglat_ffi::*;

fn new_lattice(c: &[u64]) -> *mut ReglatLattice {
    let mut out = ptr::null_mut();
    let s = unsafe { reglat_lattice_new(c.as_ptr(), c.len(), &mut out) };
    assert_eq!(s, ReglatStatus::Ok);
    assert!(!out.is_null());
    out
}

#[test]
fn handle_lifecycle_and_coefficients() {
    let l = new_lattice(&[5, 1, 2, 5]);
    unsafe {
        assert_eq!(reglat_lattice_rank(l), 4);
        let mut buf = [0u64; 8];
        let mut n = 0usize;
        assert_eq!(reglat_lattice_coeffs(l, buf.as_mut_ptr(), buf.len(), &mut n), ReglatStatus::Ok);
        assert_eq!(&buf[..n], &[1, 2, 5, 5]);
        let mut d = 0u64;
        assert_eq!(reglat_lattice_discriminant(l, &mut d), ReglatStatus::Ok);
        assert_eq!(d, 50);
        reglat_lattice_free(l);
        reglat_lattice_free(ptr::null_mut());
        assert_eq!(reglat_lattice_rank(ptr::null()), 0);
    }
}

#[test]
fn invalid_input_codes() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(reglat_lattice_new([0u64, 1].as_ptr(), 2, &mut out), ReglatStatus::InvalidArgument);
        assert_eq!(reglat_lattice_new(ptr::null(), 0, &mut out), ReglatStatus::NullPointer);
        assert_eq!(reglat_lattice_new([1u64].as_ptr(), 0, &mut out), ReglatStatus::InvalidArgument);
        let l = new_lattice(&[1, 1, 1]);
        let mut b = false;
        assert_eq!(reglat_locally_represents(l, 4, 7, &mut b), ReglatStatus::NotPrime);
        assert_eq!(reglat_represents(l, 7, ptr::null_mut()), ReglatStatus::NullPointer);
        let mut t = ptr::null_mut();
        assert_eq!(reglat_lambda(l, 2, &mut t), ReglatStatus::RankTooSmall);
        let big = new_lattice(&[u32::MAX as u64, u32::MAX as u64, 4]);
        let mut d = 0u64;
        assert_eq!(reglat_lattice_discriminant(big, &mut d), ReglatStatus::Overflow);
        reglat_lattice_free(big);
        reglat_lattice_free(l);
        let msg = CStr::from_ptr(reglat_status_message(ReglatStatus::NotPrime));
        assert_eq!(msg.to_str().unwrap(), "argument is not a prime");
    }
}

#[test]
fn three_squares() {
    let l = new_lattice(&[1, 1, 1]);
    let mut b = true;
    unsafe {
        assert_eq!(reglat_locally_represents(l, 2, 7, &mut b), ReglatStatus::Ok);
        assert!(!b);
        assert_eq!(reglat_genus_represents(l, 6, &mut b), ReglatStatus::Ok);
        assert!(b);
        assert_eq!(reglat_represents(l, 6, &mut b), ReglatStatus::Ok);
        assert!(b);
        let mut n = 1u64;
        assert_eq!(reglat_regular_verdict(l, 5000, &mut n), ReglatStatus::Ok);
        assert_eq!(n, 0);
        reglat_lattice_free(l);
    }
}

#[test]
fn irregular_ternary_and_refutation() {
    let j = new_lattice(&[1, 4, 20]);
    let h = new_lattice(&[2, 3, 9, 36]);
    let mut t = 0u64;
    let mut n = 0u64;
    unsafe {
        assert_eq!(reglat_t_value(j, 10_000, &mut t), ReglatStatus::Ok);
        assert_eq!(t, 77);
        assert_eq!(reglat_regular_verdict(h, 10_000, &mut n), ReglatStatus::Ok);
        assert_eq!(n, 26);
        reglat_lattice_free(j);
        reglat_lattice_free(h);
    }
}

#[test]
fn lambda_and_json() {
    let l = new_lattice(&[1, 1, 1, 4]);
    let mut t = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(reglat_lambda(l, 2, &mut t), ReglatStatus::Ok);
        let mut buf = [0u64; 4];
        let mut n = 0usize;
        reglat_lattice_coeffs(t, buf.as_mut_ptr(), 4, &mut n);
        assert_eq!(buf, [1, 1, 1, 1]);
        let mut none = ptr::null_mut();
        let odd = new_lattice(&[1, 1, 1, 1]);
        assert_eq!(reglat_lambda(odd, 3, &mut none), ReglatStatus::NoCase);
        assert_eq!(reglat_local_rep_set_json(l, 3, &mut s), ReglatStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["p"], 3);
        assert!(v["classes"].as_array().unwrap().iter().all(|c| c["member"] == true));
        reglat_string_free(s);
        reglat_lattice_free(odd);
        reglat_lattice_free(t);
        reglat_lattice_free(l);
    }
}

#[test]
fn header_is_generated_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/reglat.h")).unwrap();
    for f in [
        "reglat_lattice_new",
        "reglat_lattice_free",
        "reglat_regular_verdict",
        "reglat_local_rep_set_json",
        "reglat_string_free",
        "REGLAT_STATUS_NOT_PRIME = 3",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"reglat.h\"\nint main(void) { ReglatLattice *l = 0; uint64_t c[] = {1, 1, 1};\n\
         return reglat_lattice_new(c, 3, &l) == REGLAT_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!("-I{}", dir.join("include").display()))
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler on PATH, syntax check skipped");
        return;
    };
    assert!(status.success());
}
