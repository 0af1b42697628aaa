use zxcliff::{bench, OptimiserConfig};

#[test]
fn benched_configurations_run_and_verify() {
    for width in 1..=4 {
        let r = bench(width, 20, 2, 1, 2, &OptimiserConfig::default());
        assert!(r.all_verified(), "width {width}");
        assert!(r.mean_out <= r.mean_in);
    }
}
