use dignet_wasm::Net;

#[test]
fn shift_net_views() {
    let net = Net::shift_net();
    assert_eq!((net.m(), net.s(), net.n()), (4, 4, 16));
    let xy = net.points_2d(0, 3).unwrap();
    assert_eq!(xy.len(), 32);
    let v: serde_json::Value = serde_json::from_str(&net.analysis_json().unwrap()).unwrap();
    assert_eq!(v["gamma_log2"], 3);
    assert_eq!(v["t"], 1);
}

#[test]
fn interval_counts_balance_on_nets() {
    let net = Net::sobol(2, 8).unwrap();
    for xy in [net.points_2d(0, 1).unwrap(), net.scrambled_2d(0, 1, "nus", 9).unwrap()] {
        for ka in 0..=8 {
            let counts = Net::interval_counts(&xy, ka, 8 - ka);
            assert!(counts.iter().all(|&c| c == 1));
        }
    }
}

#[test]
fn gain_grid_shape_and_zero_region() {
    let net = Net::sobol(3, 5).unwrap();
    let side = 7;
    let grid = net.gain_grid(0, 2).unwrap();
    assert_eq!(grid.len(), side * side);
    let t = dignet::quality::t_u(net.generators(), &[0, 2]) as usize;
    assert!(t > 0);
    for ka in 0..side {
        for kb in 0..side {
            if 2 + ka + kb + t <= 5 {
                assert_eq!(grid[ka * side + kb], -1);
            }
            assert!(grid[ka * side + kb] <= 5);
        }
    }
    let diag = net.gain_grid(1, 1).unwrap();
    assert_eq!(diag[0], -1);
    assert_eq!(diag[6 * side + 6], 0);
}

#[test]
fn bad_inputs_are_reported() {
    assert!(Net::from_raw("1 2\n10\n0x\n").is_err());
    assert!(Net::sobol(2, 20).is_err());
    assert!(Net::shift_net().points_2d(0, 4).is_err());
    assert!(Net::shift_net().scrambled_2d(0, 1, "owen", 1).is_err());
}

#[test]
fn microstructure_table_is_skipped_for_wide_nets() {
    let small: serde_json::Value = serde_json::from_str(&Net::sobol(2, 6).unwrap().analysis_json().unwrap()).unwrap();
    assert_eq!(small["A_K"].as_array().unwrap().len(), 8);
    let wide: serde_json::Value = serde_json::from_str(&Net::sobol(16, 12).unwrap().analysis_json().unwrap()).unwrap();
    assert!(wide["A_K"].as_array().unwrap().is_empty());
}
