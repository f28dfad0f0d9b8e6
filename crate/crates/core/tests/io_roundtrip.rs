use std::io::BufReader;

use rough_spde::driver::io::{read_levy, read_path, write_levy, write_path};
use rough_spde::driver::{lift_piecewise_linear, sample_fbm};
use rough_spde::spectral::io::{read_field, write_field};
use rough_spde::spectral::{Basis, Complex64, SpectralField};

#[test]
fn path_and_levy_round_trip_bitwise() {
    let path = sample_fbm(0.4, 2, 64, 1.5, 9).unwrap();
    let rough = lift_piecewise_linear(&path);
    let mut buf = Vec::new();
    write_path(&path, &mut buf).unwrap();
    let back = read_path(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.values(), path.values());
    assert_eq!(back.horizon(), path.horizon());
    let mut lbuf = Vec::new();
    write_levy(&rough, &mut lbuf).unwrap();
    let rback = read_levy(back, BufReader::new(&lbuf[..])).unwrap();
    assert_eq!(rback.segment_blocks(), rough.segment_blocks());
    let text = String::from_utf8(lbuf).unwrap();
    assert!(text.starts_with("i,a,b,XX_ab\n"));
}

#[test]
fn field_round_trip_bitwise() {
    for basis in [Basis::periodic(2.0, 5, false).unwrap(), Basis::dirichlet(1.0, 7).unwrap()] {
        let f = SpectralField::single_mode(basis, 3, Complex64::new(0.1 + 1e-17, -1.0 / 3.0)).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let g = read_field(basis, BufReader::new(&buf[..])).unwrap();
        assert_eq!(f, g);
    }
}

#[test]
fn malformed_input_is_a_parse_error() {
    let r = read_path(BufReader::new("t,x_1\n0.0,0.0\n0.5,abc\n".as_bytes()));
    assert!(matches!(r, Err(rough_spde::Error::Parse(_))));
}
