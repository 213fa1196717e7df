#![no_main]

//! Input layout: field selector, rate, degree, then coefficient bytes for
//! `F_0..=F_t` followed by source symbols.

use arcnc::gf::{Elem, Field};
use arcnc::polyalg::{decodable, det_oracle, encode, sequential_decode, Matrix, PolyMatrix};
use libfuzzer_sys::fuzz_target;

const ORDERS: [u64; 6] = [2, 3, 4, 5, 8, 16];

fuzz_target!(|data: &[u8]| {
    let [qs, ms, ts, rest @ ..] = data else {
        return;
    };
    let q = ORDERS[*qs as usize % ORDERS.len()];
    let field = Field::with_order(q).unwrap();
    let m = 1 + *ms as usize % 3;
    let t = *ts as usize % 5;
    let mut bytes = rest.iter().copied().chain(std::iter::repeat(0));
    let mut next = || Elem((bytes.next().unwrap() as u64 % q) as u32);
    let blocks: Vec<Matrix> = (0..=t).map(|_| Matrix::from_fn(m, m, |_, _| next())).collect();
    let f = PolyMatrix::from_coefficients(&blocks).unwrap();
    let det = det_oracle(&field, &f);
    if decodable(&field, &blocks, m) {
        assert!(!det.is_zero());
    }
    let horizon = 2 * t + 2;
    let xs: Vec<Vec<Elem>> = (0..=horizon).map(|_| (0..m).map(|_| next()).collect()).collect();
    let ys = encode(&field, &f, &xs, horizon);
    match sequential_decode(&field, &f, &ys, horizon) {
        Ok(out) => {
            assert_eq!(Some(out.delay), det.valuation());
            assert_eq!(&out.symbols[..], &xs[..out.symbols.len()]);
        }
        Err(_) => assert!(det.is_zero() || det.valuation().unwrap() > horizon),
    }
    // arbitrary received words must not panic either
    let noise: Vec<Vec<Elem>> = (0..=horizon).map(|_| (0..m).map(|_| next()).collect()).collect();
    let _ = sequential_decode(&field, &f, &noise, horizon);
});
