//! Solves the proportionally fair program on a small switch, then writes the
//! mean schedule as a short convex combination of schedules and samples it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchsim::model::ScheduleSet;
use switchsim::program::{
    caratheodory_decompose, sample_schedule, solve_program, Objective, SolverOptions,
};

fn main() -> switchsim::Result<()> {
    // 2x2 input-queued switch: links (1,1), (1,2), (2,1), (2,2).
    let set = ScheduleSet::from_atoms(
        4,
        vec![
            vec![0, 0, 0, 0],
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
            vec![1, 0, 0, 1],
            vec![0, 1, 1, 0],
        ],
    )?;
    let q = [5.0, 1.0, 2.0, 8.0];
    let ms = solve_program(
        &Objective::proportional(),
        &q,
        &set,
        &SolverOptions::fluid(),
    )?;
    println!(
        "s* = {:?} (gap {:.1e}, {} iterations)",
        ms.s, ms.gap, ms.iterations
    );

    let d = caratheodory_decompose(&ms, &set)?;
    for (w, atom) in d.atoms() {
        println!("  {w:.6} x {atom:?}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut freq = [0.0; 4];
    for _ in 0..n {
        for (f, &x) in freq.iter_mut().zip(sample_schedule(&d, &mut rng)) {
            *f += f64::from(x) / n as f64;
        }
    }
    println!("empirical mean over {n} draws: {freq:.4?}");
    Ok(())
}
