use logconcave::bodies::{mean_width_functionals, PBall};
use logconcave::Result;

fn main() -> Result<()> {
    for (name, body) in [("ball", PBall::euclidean(3)), ("cube", PBall::cube(3, 1.0)), ("octahedron", PBall::new(3, 1.0, 1.0))] {
        let w = mean_width_functionals(&body, 100_000, 7)?;
        println!("{name:>10}: M = {:.4} ± {:.4}, M* = {:.4} ± {:.4}", w.m, w.stderr_m, w.m_star, w.stderr_m_star);
    }
    Ok(())
}
