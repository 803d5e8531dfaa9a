//! Build a noise schedule from measured per-period T1/T2 means instead of
//! the linear drift model.

use adaptive_pec::experiment::ingest_t1t2_csv;
use adaptive_pec::noise::{schedule_channel, Feasibility};

const MEANS: &str = "qubit,period,t1_us,t2_us
0,0,150,70
1,0,200,130
0,1,127.5,65
1,1,152.5,113.125
0,2,105,60
1,2,105,96.25
";

fn main() -> adaptive_pec::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("means.csv");
    std::fs::write(&path, MEANS)?;
    let schedule = ingest_t1t2_csv(&path, 100.0, Feasibility::Strict)?;
    println!("{} qubits x {} periods", schedule.num_qubits(), schedule.periods());
    for p in 0..schedule.periods() {
        let (x, times) = schedule_channel(&schedule, p)?;
        let t: Vec<String> = times.iter().map(|d| format!("T1 {} / T2 {}", d.t1, d.t2)).collect();
        println!(
            "period {p}: {}  ->  II {:.4}, IZ {:.4}, ZZ {:.4}",
            t.join(", "),
            x.get("II")?,
            x.get("IZ")?,
            x.get("ZZ")?
        );
    }

    std::fs::write(&path, "qubit,period,t1_us,t2_us\n0,0,10,62.5\n")?;
    match ingest_t1t2_csv(&path, 100.0, Feasibility::Strict) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
