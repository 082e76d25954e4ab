//! Streams one orbit and prints raw and trimmed ratios at a few checkpoints.
//!
//! `cargo run --release --example trimmed_orbit -- [seed]`

use trimlab::dynamics::OrbitState;
use trimlab::trimming::{b_plus, PsiClass, PsiSpec, SumLedger};

fn main() -> trimlab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let psi = PsiSpec::parse("n*log(n)^2", PsiClass::Summable)?;
    let checkpoints = [1_000u64, 10_000, 100_000, 1_000_000];
    let cap = b_plus(*checkpoints.last().unwrap(), &psi)? as usize + 8;

    let mut orbit = OrbitState::from_seed(seed);
    let mut ledger = SumLedger::new(cap, &[]);
    println!("{:>9} {:>4} {:>12} {:>10} {:>10}", "n", "b_n", "max digit", "raw", "trimmed");
    for &n in &checkpoints {
        while ledger.n() < n {
            ledger.push(orbit.next_digit()?);
        }
        let b = b_plus(n, &psi)?;
        let d = n as f64 * (n as f64).ln();
        let trimmed = ledger.trimmed_sum(b as usize)?;
        println!(
            "{n:>9} {b:>4} {:>12} {:>10.4} {:>10.4}",
            ledger.max_digit(),
            ledger.total() as f64 / d,
            trimmed as f64 / d
        );
    }
    Ok(())
}
