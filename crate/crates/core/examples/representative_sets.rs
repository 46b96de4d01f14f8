//! Block sizes of the symmetry reduction and the columns of the hook block.

use zarank::cycle::Cycle;
use zarank::repsets::{block_multiset, format_multiset, representative_set_alpha, BetaEvaluator};

fn main() -> zarank::Result<()> {
    for m in 4..=8 {
        let blocks = representative_set_alpha(m)?;
        let ms = block_multiset(&blocks);
        let sq: usize = ms.iter().map(|(s, k)| s * s * k).sum();
        println!("m = {m}: {}  (sum of squares {sq})", format_multiset(&ms));
    }

    let m = 7;
    let eval = BetaEvaluator::new(m)?;
    println!("\nhook block for m = {m}: {} columns", eval.dim());
    for seq in [[1u8, 2, 3, 4, 5, 6, 7], [1, 3, 5, 7, 2, 4, 6], [1, 7, 6, 5, 4, 3, 2]] {
        let c = Cycle::new(&seq)?;
        println!("  u({c:?}) = {:?}", eval.evaluate_vec(&c));
    }
    Ok(())
}
