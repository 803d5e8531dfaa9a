//! Probabilistic error cancellation of H⊗H with the period-0 noise model,
//! executed under the true noise of periods 0, 1 and 2.

use adaptive_pec::noise::{schedule_channel, NoiseSchedule};
use adaptive_pec::pec::{pec_run, quasiprob_decompose, FrameTable, NoisyBasis, PecOptions};
use adaptive_pec::quantum::{DensityMatrix, Gate};
use adaptive_pec::stats::hellinger_discrete;

fn main() -> adaptive_pec::Result<()> {
    let gate = Gate::Hadamard.unitary(2)?;
    let frames = FrameTable::new(&gate, &DensityMatrix::test_state())?;
    let ideal = frames.ideal();
    let schedule = NoiseSchedule::default_two_qubit();

    let x0 = schedule_channel(&schedule, 0)?.0;
    let q = quasiprob_decompose(&x0)?;
    let residual = NoisyBasis::new(&gate, &x0)?.reconstruction_residual(&q)?;
    println!("Theta = {:.4}, reconstruction residual {residual:.1e}", q.one_norm());
    println!("ideal     {:?}", rounded(ideal.probs()));

    for period in 0..3 {
        let x = schedule_channel(&schedule, period)?.0;
        let r = pec_run(&q, &x, &frames, &PecOptions::default(), 1)?;
        let h = hellinger_discrete(&r.clipped_histogram, &ideal)?;
        println!(
            "period {period}  {:?}  H = {h:.4}",
            rounded(r.clipped_histogram.probs())
        );
    }
    Ok(())
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
