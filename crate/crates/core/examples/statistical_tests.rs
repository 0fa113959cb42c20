//! The goodness-of-fit toolkit and its JSON test reports.

use cutforge::generate::RngStream;
use cutforge::rde::sample_sbml_half;
use cutforge::stats::{chi_square_gof, ks_one_sample, ks_two_sample, ReferenceCdf};
use rand::Rng;

fn main() -> cutforge::Result<()> {
    let mut rng = RngStream::new(6, 0);
    let uniform: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
    let sbml: Vec<f64> = (0..5000).map(|_| sample_sbml_half(&mut rng)).collect();
    let rayleigh: Vec<f64> = (0..5000)
        .map(|_| (-2.0 * rng.random::<f64>().ln()).sqrt())
        .collect();
    let scaled: Vec<f64> = rayleigh.iter().map(|x| x * 2f64.sqrt()).collect();
    let reports = [
        ks_one_sample(&uniform, ReferenceCdf::Uniform01, 0.01)?,
        ks_one_sample(&rayleigh, ReferenceCdf::Rayleigh, 0.01)?,
        ks_two_sample(&sbml, &scaled, 0.01)?,
        chi_square_gof(&[260, 240, 255, 245], &[0.25; 4], 0.01)?,
    ];
    for r in &reports {
        println!("{}", serde_json::to_string(r)?);
    }
    Ok(())
}
