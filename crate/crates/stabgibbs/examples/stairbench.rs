use stabgibbs::jobs::{cmd_stair_scan, JobConfig};
fn main() {
    let cfg = JobConfig { stair_sizes: (150..=165).collect(), ..JobConfig::default() };
    let t0 = std::time::Instant::now();
    match cmd_stair_scan(&cfg) {
        Ok(o) => println!("ok {} rows, total {:.1} s", o.rows.len(), t0.elapsed().as_secs_f64()),
        Err(e) => println!("ERR: {e}"),
    }
}
