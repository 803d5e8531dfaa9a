//! Pauli-twirled damping noise: the per-qubit closed form, the exact twirl of
//! the Kraus channel, and the two-qubit coefficients for the default drift
//! schedule.

use adaptive_pec::noise::{
    apd_channel, apd_twirl_exact, pauli_twirl, schedule_channel, twirled_apd_coeffs, ApdParams, NoiseSchedule,
};
use adaptive_pec::quantum::pauli_labels;

fn main() -> adaptive_pec::Result<()> {
    let (t, t1, t2) = (100.0, 150.0, 70.0);
    let params = ApdParams::from_times(t, t1, t2)?;
    let closed = twirled_apd_coeffs(t, t1, t2)?;
    let exact = apd_twirl_exact(&params)?;
    let numeric = pauli_twirl(&apd_channel(&params)?)?;
    println!(
        "t = {t} us, T1 = {t1} us, T2 = {t2} us (gamma {:.4}, lambda {:.4})",
        params.gamma, params.lambda
    );
    println!("{:>3} {:>10} {:>10} {:>10}", "", "closed", "exact", "numeric");
    for (i, label) in ["I", "X", "Y", "Z"].iter().enumerate() {
        println!(
            "{label:>3} {:>10.6} {:>10.6} {:>10.6}",
            closed.as_array()[i],
            exact.as_array()[i],
            numeric.coeffs()[i]
        );
    }

    let schedule = NoiseSchedule::default_two_qubit();
    let channels = (0..3)
        .map(|p| schedule_channel(&schedule, p).map(|(x, _)| x))
        .collect::<adaptive_pec::Result<Vec<_>>>()?;
    println!("\n{:>3} {:>8} {:>8} {:>8}", "", "period 0", "period 1", "period 2");
    for (i, label) in pauli_labels(2).iter().enumerate() {
        println!(
            "{label:>3} {:>8.4} {:>8.4} {:>8.4}",
            channels[0].coeffs()[i],
            channels[1].coeffs()[i],
            channels[2].coeffs()[i]
        );
    }
    Ok(())
}
