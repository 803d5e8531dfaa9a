//! MAP estimation of the period-1 channel from simulated shots, with the
//! prior rolled from the period-0 channel.

use adaptive_pec::inference::{
    map_estimate, predicted_probs, roll_prior, simulate_shots, CalibrationModel, MapOptions, ModelKind,
};
use adaptive_pec::noise::{schedule_channel, NoiseSchedule};
use adaptive_pec::quantum::{pauli_labels, DensityMatrix, Gate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> adaptive_pec::Result<()> {
    let schedule = NoiseSchedule::default_two_qubit();
    let x0 = schedule_channel(&schedule, 0)?.0;
    let x1 = schedule_channel(&schedule, 1)?.0;
    let model = CalibrationModel::new(
        &Gate::Hadamard.unitary(2)?,
        &DensityMatrix::test_state(),
        ModelKind::PlainNoisy,
    )?;

    let truth = predicted_probs(&x1, &model)?;
    let record = simulate_shots(&truth, 100_000, &mut ChaCha8Rng::seed_from_u64(5));
    let eta = roll_prior(&x0, 50.0)?;
    let est = map_estimate(
        &record,
        &model,
        &eta,
        &MapOptions {
            initial: Some(x0.coeffs().to_vec()),
            ..MapOptions::default()
        },
    )?;
    println!(
        "counts {:?}, converged {} after {} iterations",
        record.counts(),
        est.converged,
        est.iterations
    );
    println!("{:>3} {:>8} {:>8} {:>8}", "", "prior", "truth", "MAP");
    for (i, label) in pauli_labels(2).iter().enumerate() {
        println!(
            "{label:>3} {:>8.4} {:>8.4} {:>8.4}",
            x0.coeffs()[i],
            x1.coeffs()[i],
            est.x_hat.coeffs()[i]
        );
    }
    // Only the outcome distribution is pinned by a single measurement basis.
    println!("p(truth) {:?}", truth.probs());
    println!("p(MAP)   {:?}", est.predicted.probs());
    Ok(())
}
