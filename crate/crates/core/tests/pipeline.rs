use rug::Float;

use knotlab::acurve::{self, CsVolume};
use knotlab::cjones;
use knotlab::num::{bits_for_digits, i_pi, rel_diff};
use knotlab::qrec::{self, JSequence, RecursionOptions};
use knotlab::table::KnotTable;

#[test]
fn kashaev_two_routes_agree() {
    for n in 4..=12 {
        let direct = cjones::kashaev_41(n, 40).unwrap();
        let via_jn = cjones::kashaev_from_colored(&cjones::habiro_41(n), n, 40).unwrap();
        assert!(rel_diff(&direct.value, &via_jn.value) < 1e-35, "N = {n}");
    }
}

#[test]
fn kashaev_of_trefoil_from_cabling() {
    // at N = 2 the invariant is the Jones polynomial at q = -1, of modulus det(3_1) = 3
    let k = KnotTable::builtin().get("3_1").unwrap().diagram().unwrap();
    let j2 = cjones::colored_jones_by_cabling(&k, 2).unwrap();
    let v2 = cjones::kashaev_from_colored(&j2, 2, 40).unwrap();
    let m = Float::with_val(64, v2.value.abs_ref()) - 3u32;
    assert!(m.abs() < 1e-30, "{}", v2.value);
}

#[test]
fn table_volume_matches_closed_form_volume() {
    let prec = bits_for_digits(50);
    let rec = KnotTable::builtin().get("4_1").unwrap().clone();
    let u = i_pi(prec);
    let ics = acurve::ics_closed_41(&u).unwrap();
    let (seed, _) = acurve::geometric_seed_41(prec, 1);
    let cv = CsVolume::from_ics(&u, &ics, &seed.v_theta());
    let vol = rec.volume(prec).unwrap().unwrap();
    // the stored decimal carries 41 digits
    assert!(Float::with_val(prec, &cv.vol - &vol).abs() < 1e-39);
    assert!(cv.cs.abs() < 1e-45);
}

#[test]
fn unknot_recursion_extends_past_the_data() {
    let seq = JSequence::unknot(12);
    let opts = RecursionOptions { order: 2, coeff_degree: 0, holdout: 3, ..Default::default() };
    let r = qrec::discover_recursion(&seq, &opts).unwrap().expect("recursion");
    let longer = JSequence::new("unknot", (1..=40).map(cjones::colored_jones_unknot).collect()).unwrap();
    for n in 1..=38 {
        assert!(qrec::apply(&r.op, &longer, n).unwrap().is_zero(), "N = {n}");
    }
}

#[test]
fn fourth_colored_jones_by_cabling() {
    let k = KnotTable::builtin().get("4_1").unwrap().diagram().unwrap();
    let j4 = cjones::colored_jones_4_by_cabling(&k, 40).unwrap();
    assert_eq!(j4, cjones::habiro_41(4));
}
