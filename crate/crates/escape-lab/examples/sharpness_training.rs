//! Batch size versus terminal sharpness on a small logistic task.
//!
//! Trains plain SGD at a fixed learning rate with several batch sizes and
//! reports the median terminal Frobenius norm of the full-data Hessian over
//! independent runs: larger batches settle in sharper configurations.
//!
//! ```bash
//! cargo run --release --example sharpness_training
//! ```

use escape_lab::minibatch::{
    make_mixture_dataset, median, train_with_sharpness, LossFamily,
};

fn main() -> escape_lab::Result<()> {
    let ds = make_mixture_dataset(512, 6, 2.0, 3)?;
    let loss = LossFamily::RegularizedCrossEntropy { lambda: 0.1 };
    let w0 = vec![0.0; 6];
    let n_seeds = 10;

    println!("{:>6} {:>22} {:>16}", "M", "median |hess|_F (end)", "median loss");
    for m in [4usize, 16, 64] {
        let mut frob = Vec::new();
        let mut losses = Vec::new();
        for run in 0..n_seeds {
            let trace = train_with_sharpness(
                &ds, &loss, &w0, 0.05, m, 3_000, 100, 1_000 * m as u64 + run,
            )?;
            frob.push(*trace.sharpness_frobenius.last().unwrap());
            losses.push(*trace.losses.last().unwrap());
        }
        println!("{m:>6} {:>22.6} {:>16.6}", median(&frob)?, median(&losses)?);
    }
    Ok(())
}
