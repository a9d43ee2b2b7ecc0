use hitchin_lab::acceptance::degeneration_example;
use hitchin_lab::linalg::least_squares_slope;

// The coefficient residual of Z_inf/t + C t^-3 falls off like t^-2.
#[test]
fn residual_decay_rate() {
    let (grid, res) = degeneration_example().unwrap();
    let xs: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let slope = least_squares_slope(&xs[4..], &ys[4..]);
    assert!((slope + 2.0).abs() < 0.1, "slope {slope}, residuals {res:?}");
}
