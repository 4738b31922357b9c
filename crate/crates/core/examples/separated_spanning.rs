//! Separated and spanning numbers of a small line, with the sandwich `N_2ε ≤ S_ε ≤ N_ε`.

use mdimlab::metricspace::{
    closed_ball_cover, cover_number_mesh, separated_number, spanning_number, CountMode, FinitePseudometricSpace,
    SolverLimits,
};

fn main() -> mdimlab::Result<()> {
    let space = FinitePseudometricSpace::line(&[0.0, 0.1, 0.35, 0.4, 0.9, 1.0, 1.6]);
    let all: Vec<usize> = (0..space.n()).collect();
    let limits = SolverLimits::default();

    println!("{:>6} {:>6} {:>6} {:>6} {:>6} {:>6}", "eps", "N_2e", "S_e", "N_e", "mesh", "balls");
    for eps in [0.05, 0.2, 0.3, 0.5, 0.8, 1.7] {
        let n2 = separated_number(&space, &all, 2.0 * eps, CountMode::Exact, &limits)?;
        let s = spanning_number(&space, &all, eps, CountMode::Exact, &limits)?;
        let n = separated_number(&space, &all, eps, CountMode::Exact, &limits)?;
        let mesh = cover_number_mesh(&space, eps, CountMode::Exact, &limits)?;
        let balls = closed_ball_cover(&space, eps / 2.0, CountMode::Exact, &limits)?;
        println!(
            "{eps:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
            n2.value, s.value, n.value, mesh.value, balls.value
        );
        assert!(n2.value <= s.value && s.value <= n.value);
    }

    let greedy = separated_number(&space, &all, 0.3, CountMode::Greedy, &limits)?;
    println!("greedy N_0.3 = {} ({}), witness {:?}", greedy.value, greedy.exactness, greedy.witness);
    Ok(())
}
