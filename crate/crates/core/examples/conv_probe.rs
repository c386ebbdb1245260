// scratch: case-(a) scan [3,5] GHz (relaxation+harmonic window), case-(b) scan [1,3]
use pnp_core::*;
use rayon::prelude::*;

fn spectrum_of(params: &LaserParams, comb: &CombSpec, bias: f64, tones: &[Tone],
               resolution: f64) -> SpectrumResult {
    let drive = DriveConfig::new(bias, tones.to_vec()).unwrap();
    let grid = default_grid(params, comb, &drive, resolution).unwrap();
    let init = default_initial_state(params, bias);
    let rec = integrate(params, comb, &drive, &grid, &init).unwrap();
    power_spectrum(&rec, WindowKind::Hann).unwrap()
}

fn scan(params: &LaserParams, comb: &CombSpec, bias: f64, m: f64,
        f_lo: f64, f_hi: f64, res: f64, hw: f64, label: &str) {
    let offsets = comb.offsets();
    let s0 = spectrum_of(params, comb, bias, &[], res);
    let base = comb_powers(&s0, &offsets, hw).unwrap();
    let n = ((f_hi - f_lo) / 50e6).round() as usize + 1;
    let freqs: Vec<f64> = (0..n).map(|i| f_lo + i as f64 * 50e6).collect();
    let rows: Vec<Vec<f64>> = freqs.par_iter().map(|&f| {
        let s = spectrum_of(params, comb, bias, &[Tone::new(f, m, 0.0)], res);
        let p = comb_powers(&s, &offsets, hw).unwrap();
        p.iter().zip(&base).map(|(a, b)| a - b).collect()
    }).collect();
    println!("{label}: base=[{:.1} {:.1} {:.1}]", base[0], base[1], base[2]);
    for c in 0..3 {
        print!("  c{c}: ");
        for r in &rows { print!("{:+.1} ", r[c]); }
        println!();
    }
}

fn main() {
    let res = 1e6;
    for kappa in [8e8, 1.5e9, 2.5e9] {
        let params = LaserParams { kappa, ..LaserParams::default() };
        let comb_a = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        scan(&params, &comb_a, 1.2, 0.05, 3.0e9, 5.0e9, res, 40e6,
             &format!("case-a kappa={kappa:.1e} scan[3,5]"));
        let comb_b = uniform_comb(2.01e9, 2e9, 3, 0.1).unwrap();
        scan(&params, &comb_b, 4.0, 0.1, 1.0e9, 3.0e9, res, 40e6,
             &format!("case-b kappa={kappa:.1e} scan[1,3]"));
    }
}
