//! Driving the objective by hand: score a move, apply it, watch the score.
//!
//!     cargo run --example single_moves

use bkmeans::objective::best_move;
use bkmeans::{apply_move, move_gain, ClusterState, Dataset};

fn main() -> bkmeans::Result<()> {
    let ds = Dataset::from_rows(&[[0.0f32], [9.0], [10.0]])?;
    let mut state = ClusterState::build(&ds, vec![0, 0, 1], 2)?;
    println!("score {} with labels {:?}", state.score(), state.labels());

    let g = move_gain(&state, &ds, 1, 1)?;
    println!("moving sample 1 to cluster 1 changes the score by {}", g.delta);
    apply_move(&mut state, &ds, &g)?;
    println!("score {} with labels {:?}", state.score(), state.labels());

    let all = [0, 1];
    let next = (0..ds.n()).find_map(|i| best_move(&state, &ds, i, &all));
    println!("any further improving move: {}", next.is_some());
    Ok(())
}
