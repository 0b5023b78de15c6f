//! Single-sensor belief assignments, Dempster combination and the
//! pignistic transform on hand-picked factors.

use plausifuse::model::BeliefMass;
use plausifuse::plausibility::{compute_bba, ds_combine, miss_mass, pignistic, BbaFactors};

fn show(label: &str, m: &BeliefMass) {
    let (p, s) = pignistic(m);
    println!(
        "{label:<28} m=({:.3}, {:.3}, {:.3})  p_exists={p:.3} +/- {s:.3}",
        m.exists, m.not_exists, m.unknown
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let confirmed = BbaFactors {
        p_trust: 0.9,
        p_fov: 1.0,
        p_occ: 1.0,
        p_ex: 0.99,
        p_dm: 1.0,
        p_val: 1.0,
    };
    // off the road map: existence support moves to the negation
    let off_road = BbaFactors {
        p_dm: 0.2,
        ..confirmed
    };
    // far outside the field of view: the sensor barely counts
    let remote = BbaFactors {
        p_fov: 0.05,
        ..confirmed
    };

    let a = compute_bba(&confirmed)?;
    let b = compute_bba(&off_road)?;
    let c = compute_bba(&remote)?;
    show("confirmed track", &a);
    show("off-road track", &b);
    show("remote track", &c);
    show("miss (trust 0.9)", &miss_mass(0.9));

    show("confirmed + confirmed", &ds_combine(&a, &a)?);
    show("confirmed + miss", &ds_combine(&a, &miss_mass(0.9))?);
    show("confirmed + off-road", &ds_combine(&a, &b)?);
    show(
        "confirmed + vacuous",
        &ds_combine(&a, &BeliefMass::VACUOUS)?,
    );
    Ok(())
}
