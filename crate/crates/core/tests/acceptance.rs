//! Runs every acceptance criterion and prints one line per criterion.
//! Built without the libtest harness so the lines are always shown.

use hitchin_lab::acceptance;

fn main() {
    let results = acceptance::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if results.len() != 9 || !failed.is_empty() {
        eprintln!("acceptance: {} criteria, failed: {failed:?}", results.len());
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", results.len());
}
