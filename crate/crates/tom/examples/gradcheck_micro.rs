//! Verify analytic gradients of the full conditioned network against
//! central finite differences on a miniature configuration.
//!
//!     cargo run --example gradcheck_micro

fn main() {
    let tolerance = 1e-4;
    let report = tom::model::micro_grad_check(tolerance);
    println!(
        "checked {} parameter coordinates, max relative error {:.3e}",
        report.entries.len(),
        report.max_rel_error
    );
    for entry in report.worst(5) {
        println!(
            "  {:30} [{:4}] analytic {:+.6e}  numeric {:+.6e}  rel {:.2e}",
            entry.tensor, entry.index, entry.analytic, entry.numeric, entry.rel_error
        );
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    std::process::exit(if report.passed() { 0 } else { 3 });
}
