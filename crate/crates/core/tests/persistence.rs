use cigarflow::flow::{run, step, FlowState, RunPlan};
use cigarflow::geometry::ConformalState;
use cigarflow::grid::Grid;
use cigarflow::harness::{
    emit_diagnostics, load_snapshot, parse_snapshot, read_diagnostics, save_snapshot, snapshot_text,
};

fn bump(n: usize) -> FlowState {
    let grid = Grid::radial(n, 8.0).unwrap();
    let log_u = grid
        .arc_lengths()
        .iter()
        .map(|s| 0.3 * (-(s * s - 4.0f64).powi(2) / 8.0).exp())
        .collect();
    FlowState::from_initial_metric(&ConformalState::over_cigar(grid, log_u, 0.0).unwrap()).unwrap()
}

fn plan(t_end: f64) -> RunPlan {
    RunPlan {
        t_end,
        record_interval: 0.05,
        renormalize: Some(0.5),
        ..RunPlan::default()
    }
}

#[test]
fn snapshot_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let st = step(&bump(65), 1e-3).unwrap();
    let path = tmp.path().join("s.snap");
    save_snapshot(&st, &path).unwrap();
    let back = load_snapshot(&path).unwrap();
    assert_eq!(snapshot_text(&back), snapshot_text(&st));
}

#[test]
fn continuing_from_a_snapshot_matches_the_unbroken_run() {
    let whole = run(bump(65), &plan(0.4), |_, _| Ok(())).unwrap();
    let half = run(bump(65), &plan(0.2), |_, _| Ok(())).unwrap();
    let restored = parse_snapshot(&snapshot_text(&half.final_state)).unwrap();
    let rest = run(restored, &plan(0.4), |_, _| Ok(())).unwrap();
    assert_eq!(rest.final_state.u_tilde(), whole.final_state.u_tilde());
    assert_eq!(rest.final_state.potential(), whole.final_state.potential());
    assert_eq!(rest.records.last(), whole.records.last());
}

#[test]
fn identical_runs_give_identical_csv() {
    let csv = || {
        let traj = run(bump(65), &plan(0.3), |_, _| Ok(())).unwrap();
        let mut buf = Vec::new();
        emit_diagnostics(&traj.records, &mut buf).unwrap();
        buf
    };
    let a = csv();
    assert_eq!(a, csv());
    let rows = read_diagnostics(a.as_slice()).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.windows(2).all(|w| w[0].0[0] < w[1].0[0]));
}
