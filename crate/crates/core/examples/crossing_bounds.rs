//! Crossing-number bounds derived from the published `α_k`, `β_k`.

use zarank::bounds::{asymptotic_ratio, knn_table, lift_bound, quadratic_bound, reference_levels, truncate_decimal, write_table};

fn main() -> std::io::Result<()> {
    let levels = reference_levels();
    for k in 10..=13 {
        let g = levels.get(k).expect("reference level");
        let q = quadratic_bound(k, &g.value);
        println!("{q}");
        println!("  {}", lift_bound(&q));
        println!("  ratio {}", truncate_decimal(&asymptotic_ratio(k, &g.value), 4));
    }
    println!();
    write_table(&knn_table(&levels, &[10, 11, 12, 13]), &mut std::io::stdout().lock())
}
