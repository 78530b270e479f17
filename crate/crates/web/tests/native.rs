use delaycount_web::{scan, spiral, wigner_map};

#[test]
fn scan_counts_the_corpus_well() {
    let out = scan(&[3.0, -10.0, 0.2, 200.0], true, 0.05, 31.0, 2000).unwrap();
    assert!((out[0] - 3.0).abs() < 0.15, "{}", out[0]);
    assert_eq!(out[2], 3.0);
    let n = out[3] as usize;
    assert_eq!(out.len(), 4 + 3 * n);
    assert!(scan(&[1.0], true, 1.0, 2.0, 10).is_err());
}

#[test]
fn spiral_contracts() {
    let out = spiral(1.0, 1e-3, 1000.0, 0.01).unwrap();
    assert!((out[0] / 5e-4 - 1.0).abs() < 0.05, "{}", out[0]);
    let n = out[2] as usize;
    assert_eq!(out.len(), 3 + 2 * n);
    assert!(spiral(1.0, 1e-3, 1000.0, 1.0).is_err());
}

#[test]
fn wigner_map_matches_direct() {
    let out = wigner_map(5.0, 0.5, 0.01, 1000, 30.0).unwrap();
    let (rows, cols) = (out[0] as usize, out[1] as usize);
    assert_eq!(out.len(), 4 + rows + cols + rows * cols);
    assert!(((out[2] - out[3]) / out[3]).abs() < 0.03);
}
