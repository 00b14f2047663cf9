//! The cross-method comparison suite on a hand-checkable score table.
//!
//!     cargo run --example metric_report

use ndarray::array;
use tom::trainer::{metric_suite, ScoreTable};

fn main() {
    // Two methods, two tasks: each method wins one task.
    // method A: 0.9 on t0, 0.5 on t1; method B: 0.8 on t0, 0.7 on t1.
    let table = ScoreTable {
        methods: vec!["method_a".into(), "method_b".into()],
        tasks: vec!["t0".into(), "t1".into()],
        scores: array![[0.9, 0.5], [0.8, 0.7]],
        higher_is_better: true,
    };
    println!("method     norm_acc  mean_rank  best%  win%");
    for s in metric_suite(&table) {
        println!(
            "{:10} {:7.2} {:9.3} {:6.1} {:5.1}",
            s.method, s.normalized_accuracy, s.mean_rank, s.best_pct, s.win_pct
        );
    }
    println!("\nEach wins one task, so everything lands at 50 / 0.5 / 50 / 50.");
}
