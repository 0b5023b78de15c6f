//! Maps tracker scores to existence probabilities. The sigmoid passes
//! through 0.9 at the initial score and 0.99 at the confirmation threshold.

use plausifuse::plausibility::calibrate_sigmoid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (pd, pfa) = (0.9, 1e-6);
    let s0 = f64::ln(pd / pfa);
    for (label, lambda) in [
        ("nominal", 1.5 * s0),
        ("strict", 2.5 * s0),
        ("a third", 0.5 * s0),
    ] {
        match calibrate_sigmoid(s0, lambda) {
            Ok(calib) => {
                println!(
                    "{label}: s0={s0:.2} lambda={lambda:.2} alpha={:.4} beta={:.4}",
                    calib.alpha, calib.beta
                );
                for score in [0.0, s0 / 2.0, s0, lambda, 2.0 * lambda] {
                    println!("  score {score:>6.2} -> p_ex {:.4}", calib.p_ex(score));
                }
            }
            // a threshold below the first-hit score confirms every new track
            Err(e) => println!("{label}: {e}"),
        }
    }
    Ok(())
}
