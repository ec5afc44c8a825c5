//! The reverse Markov bound P{b ≥ c·dⁿ} ≥ 1 − (c1 − c2)/(c1 − c).

use richsing::montecarlo::reverse_markov_bound;

fn main() {
    for (c1, c2, c) in [(2.0, 1.0, 0.0), (2.0, 1.0, 0.5), (1.0, 1.0, 0.9), (1.0, 0.0, 0.0), (1.0, 0.5, 1.0)] {
        match reverse_markov_bound(c1, c2, c) {
            Ok(b) => println!("c1={c1} c2={c2} c={c}: {b}"),
            Err(e) => println!("c1={c1} c2={c2} c={c}: {e}"),
        }
    }
}
