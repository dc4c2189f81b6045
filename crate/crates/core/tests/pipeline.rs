use critwave::io;
use critwave::solver::{self, InitialData, MeshSpec, RunConfig};

fn config(data: InitialData, t_end: f64) -> RunConfig {
    let mut cfg = RunConfig::new(data);
    cfg.mesh = MeshSpec::uniform(0.02, 20.0);
    cfg.t_end = t_end;
    cfg.output_every = 0.5;
    cfg
}

#[test]
fn restart_from_a_written_snapshot() {
    let bump = InitialData::Bump { amp: 0.4, sigma: 1.0 };
    let whole = solver::run(&config(bump.clone(), 2.0)).unwrap();
    let half = solver::run(&config(bump, 1.0)).unwrap();

    let mut buf = Vec::new();
    io::write_snapshot(&mut buf, &half.final_state).unwrap();
    let (r, u, ut) = io::read_snapshot_columns(&buf[..]).unwrap();
    let rest = solver::run(&config(InitialData::Samples { r, u, ut }, 1.0)).unwrap();

    let a = whole.final_state.u();
    let b = rest.final_state.u();
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let size = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(err <= 1e-12 * size.max(1.0), "restart differs by {err}");
}
