use istn::antenna::{bs_gain, sat_gain, ue_gain, BsPattern, SatPattern, UeArray, UePattern};

fn main() {
    let sat = SatPattern::default();
    let bs = BsPattern::default();
    let ue = UeArray::new(UePattern::default());
    println!("off-axis(deg)  sat(dBi)  bs az cut(dBi)  ue(dBi)");
    for d in (0..=90).step_by(5) {
        let th = (d as f64).to_radians();
        println!(
            "{d:13}  {:8.2}  {:14.2}  {:7.2}",
            sat_gain(&sat, th),
            bs_gain(&bs, bs.sector_azimuth_deg + d as f64, bs.downtilt_deg),
            ue_gain(&ue, th, 0.0)
        );
    }
}
