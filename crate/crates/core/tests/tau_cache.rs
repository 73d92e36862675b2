use std::fs;

use twistmoments::hecke::{ramanujan_tau, ramanujan_tau_direct, EigenvalueTable};

#[test]
fn cache_round_trip_and_recovery() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("tau-roundtrip-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    std::env::set_var("MM_CACHE_DIR", &dir);
    let file = dir.join("ramanujan_tau.tsv");

    let direct = ramanujan_tau_direct(5000);
    assert_eq!(ramanujan_tau(5000).unwrap(), direct);
    assert!(file.exists());

    // Shorter requests are served from the file.
    assert_eq!(ramanujan_tau(1234).unwrap()[..], direct[..=1234]);

    // Tampered values are returned as stored, which shows the file is read.
    let text = fs::read_to_string(&file).unwrap().replacen("2\t-24", "2\t-25", 1);
    fs::write(&file, text).unwrap();
    assert_eq!(ramanujan_tau(3000).unwrap()[2], -25);

    // A truncated file is recomputed and rewritten.
    let text: String = fs::read_to_string(&file).unwrap().lines().take(100).map(|l| format!("{l}\n")).collect();
    fs::write(&file, text).unwrap();
    let t = ramanujan_tau(6000).unwrap();
    assert_eq!(t, ramanujan_tau_direct(6000));
    assert_eq!(fs::read_to_string(&file).unwrap().lines().count(), 6000);

    let table = EigenvalueTable::ramanujan(6000).unwrap();
    assert!((table.get(2).unwrap() + 24.0 / 2f64.powf(5.5)).abs() < 1e-15);
    fs::remove_dir_all(&dir).unwrap();
}
