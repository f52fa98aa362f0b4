use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ccd_ffi::*;

const SAMPLE: &str = "((A,B),(C,D));\n((A,B),(C,D));\n((A,B),(C,D));\n(((A,B),C),D);\n";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    ccd_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(ccd_last_error()).to_str().unwrap().to_string()
}

unsafe fn sample() -> *mut CcdSample {
    let mut s = ptr::null_mut();
    assert_eq!(ccd_sample_parse(cstr(SAMPLE).as_ptr(), 0.0, &mut s), CcdStatus::Ok);
    s
}

unsafe fn graph(model: CcdModel) -> *mut CcdGraph {
    let s = sample();
    let mut g = ptr::null_mut();
    assert_eq!(ccd_graph_build(s, model, &mut g), CcdStatus::Ok);
    ccd_sample_free(s);
    g
}

#[test]
fn build_and_query() {
    unsafe {
        let s = sample();
        assert_eq!(ccd_sample_len(s), 4);
        ccd_sample_free(s);

        let g = graph(CcdModel::Ccd1);
        let mut p = 0.0;
        assert_eq!(ccd_graph_tree_probability(g, cstr("((C,D),(B,A));").as_ptr(), &mut p), CcdStatus::Ok);
        assert!((p - 0.75).abs() < 1e-12);

        let mut nwk = ptr::null_mut();
        assert_eq!(ccd_graph_map_tree(g, &mut nwk, &mut p), CcdStatus::Ok);
        assert_eq!(take(nwk), "((A,B),(C,D));");
        assert!((p - 0.75).abs() < 1e-12);

        let labels = [cstr("C"), cstr("D")];
        let ptrs: Vec<*const c_char> = labels.iter().map(|l| l.as_ptr()).collect();
        assert_eq!(ccd_graph_clade_probability(g, ptrs.as_ptr(), 2, &mut p), CcdStatus::Ok);
        assert!((p - 0.75).abs() < 1e-12);

        let mut text = ptr::null_mut();
        assert_eq!(ccd_graph_write(g, &mut text), CcdStatus::Ok);
        let text = take(text);
        let mut g2 = ptr::null_mut();
        assert_eq!(ccd_graph_read(cstr(&text).as_ptr(), &mut g2), CcdStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(ccd_graph_write(g2, &mut again), CcdStatus::Ok);
        assert_eq!(take(again), text);

        ccd_graph_free(g2);
        ccd_graph_free(g);
    }
}

#[test]
fn credible_sets() {
    unsafe {
        let s = sample();
        let mut fi = ptr::null_mut();
        assert_eq!(ccd_frequency_index_build(s, 0.05, &mut fi), CcdStatus::Ok);
        let mut l = 0.0;
        assert_eq!(ccd_frequency_index_level(fi, cstr("(((A,B),C),D);").as_ptr(), &mut l), CcdStatus::Ok);
        assert!((l - 0.8).abs() < 1e-12);
        assert_eq!(ccd_frequency_index_level(fi, cstr("((A,C),(B,D));").as_ptr(), &mut l), CcdStatus::Ok);
        assert!(l.is_infinite());
        ccd_frequency_index_free(fi);
        ccd_sample_free(s);

        let g = graph(CcdModel::Ccd1);
        let mut rng = ptr::null_mut();
        assert_eq!(ccd_rng_new(7, &mut rng), CcdStatus::Ok);
        let mut pi = ptr::null_mut();
        assert_eq!(ccd_probability_index_build(g, 1000, 0.05, rng, &mut pi), CcdStatus::Ok);
        assert_eq!(ccd_probability_index_level(pi, cstr("((A,B),(C,D));").as_ptr(), &mut l), CcdStatus::Ok);
        assert!(l <= 0.8);
        for _ in 0..20 {
            let mut nwk = ptr::null_mut();
            assert_eq!(ccd_probability_index_sample(pi, 0.5, rng, &mut nwk), CcdStatus::Ok);
            assert_eq!(take(nwk), "((A,B),(C,D));");
        }
        ccd_probability_index_free(pi);

        let mut cc = ptr::null_mut();
        assert_eq!(ccd_credible_ccd_build(g, &mut cc), CcdStatus::Ok);
        assert_eq!(ccd_credible_ccd_level(cc, cstr("((A,B),(C,D));").as_ptr(), &mut l), CcdStatus::Ok);
        assert!(l <= 0.75 + 1e-12);
        let mut m = ptr::null_mut();
        assert_eq!(ccd_credible_ccd_materialize(cc, 0.8, &mut m), CcdStatus::Ok);
        let mut nwk = ptr::null_mut();
        assert_eq!(ccd_graph_sample_tree(m, rng, &mut nwk), CcdStatus::Ok);
        assert_eq!(take(nwk), "((A,B),(C,D));");
        ccd_graph_free(m);
        ccd_credible_ccd_free(cc);
        ccd_rng_free(rng);
        ccd_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ccd_sample_parse(cstr("((A,B),C;").as_ptr(), 0.0, &mut s), CcdStatus::Parse);
        assert!(s.is_null());
        assert!(last_error().starts_with("PARSE"));

        assert_eq!(ccd_sample_parse(ptr::null(), 0.0, &mut s), CcdStatus::NullPointer);
        assert_eq!(ccd_sample_parse(cstr("").as_ptr(), 0.0, &mut s), CcdStatus::EmptyInput);

        let g = graph(CcdModel::Ccd0);
        let mut p = 0.0;
        assert_eq!(ccd_graph_tree_probability(g, cstr("((A,B),(C,X));").as_ptr(), &mut p), CcdStatus::Taxon);
        assert_eq!(ccd_graph_tree_probability(g, cstr("((A,B),(C,D));").as_ptr(), ptr::null_mut()), CcdStatus::NullPointer);
        ccd_graph_free(g);

        let bad = [0xffu8, 0];
        assert_eq!(ccd_graph_read(bad.as_ptr() as *const c_char, &mut ptr::null_mut()), CcdStatus::InvalidUtf8);

        let (mut lo, mut hi) = (0, 0);
        assert_eq!(ccd_binomial_interval(100, 0.95, 0.95, &mut lo, &mut hi), CcdStatus::Ok);
        assert_eq!((lo, hi), (90, 99));
        assert_eq!(ccd_binomial_interval(100, 1.5, 0.95, &mut lo, &mut hi), CcdStatus::InvalidArgument);

        let mut d = 0;
        assert_eq!(ccd_rooted_rf(cstr("((A,B),(C,D));").as_ptr(), cstr("(((A,B),C),D);").as_ptr(), &mut d), CcdStatus::Ok);
        assert_eq!(d, 2);

        ccd_graph_free(ptr::null_mut());
        ccd_string_free(ptr::null_mut());
    }
}
