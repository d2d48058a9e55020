//! Enumerates the single-species Fock basis and applies one hop.
//!
//!     cargo run --example fock_basis -- 3 2

use gauge_ring::fock::{dimension, Basis};

fn main() -> gauge_ring::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let sites = args.next().unwrap_or(3);
    let particles = args.next().unwrap_or(2);

    let basis = Basis::new(sites, particles)?;
    println!("L = {sites}, N = {particles}: d = {}", dimension(sites, particles)?);
    for (i, state) in basis.iter() {
        // move one boson from the last site back to the first, if any
        match state.hop(sites - 1, 0) {
            Some((target, amp)) => println!(
                "{i:3}  {state}  --hop {}->1-->  {target} (index {}, amplitude {amp:.4})",
                sites,
                basis.index_of(&target).expect("hop stays in the basis")
            ),
            None => println!("{i:3}  {state}"),
        }
    }
    Ok(())
}
