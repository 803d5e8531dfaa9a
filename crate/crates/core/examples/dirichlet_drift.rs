//! Degree of non-stationarity: Hellinger distance between Dirichlet laws
//! centred on the period-0 channel and on each later period's channel.

use adaptive_pec::noise::{schedule_channel, NoiseSchedule};
use adaptive_pec::stats::{dirichlet_sample_channel, hellinger_dirichlet, nonstationarity, DirichletParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> adaptive_pec::Result<()> {
    let schedule = NoiseSchedule::default_two_qubit();
    let reference = schedule_channel(&schedule, 0)?.0;
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "period", "kappa=50", "kappa=100", "kappa=400"
    );
    for p in 0..4 {
        let later = schedule_channel(&schedule, p)?.0;
        let row: Vec<f64> = [50.0, 100.0, 400.0]
            .iter()
            .map(|&k| nonstationarity(&reference, &later, k))
            .collect::<adaptive_pec::Result<_>>()?;
        println!("{p:>6} {:>10.4} {:>10.4} {:>10.4}", row[0], row[1], row[2]);
    }

    // A few stochastic realizations of the period-1 channel.
    let eta = DirichletParams::from_mean(schedule_channel(&schedule, 1)?.0.coeffs(), 100.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let x = dirichlet_sample_channel(&eta, &mut rng)?;
        println!(
            "draw: II {:.4}  IZ {:.4}  ZZ {:.4}",
            x.get("II")?,
            x.get("IZ")?,
            x.get("ZZ")?
        );
    }

    let a = DirichletParams::new(vec![2.0, 1.0])?;
    let b = DirichletParams::new(vec![1.0, 2.0])?;
    println!("H(Dir(2,1), Dir(1,2)) = {:.5}", hellinger_dirichlet(&a, &b)?);
    Ok(())
}
