//! scratch: instrument a consensus run that ends in a solver failure
use mesa::datasets::load_problem;
use mesa::mesa::{ConstraintKind, MesaConfig, Team};

fn main() {
    let path = std::env::args().nth(1).unwrap_or("/tmp/smoke/c1.mrp".into());
    let problem = load_problem(&path).unwrap();
    let cfg = MesaConfig::for_kind(ConstraintKind::Geodesic);
    let mut team = Team::new(problem.team_inputs(), cfg).unwrap();
    let (i, j) = team.edges()[0];
    for ev in 0..1000 {
        let r2: f64 = team.r2_mean().unwrap();
        let gap: f64 = team.max_gap().unwrap();
        let mut lmax = 0.0f64;
        let mut bmax = 0.0f64;
        for r in team.robots() {
            let neighbors: Vec<_> = r.neighbors().collect();
            for n in neighbors {
                for k in r.shared_with(n).to_vec() {
                    if let Some(st) = r.edge_state(n, k) {
                        lmax = lmax.max(st.lambda.amax());
                        bmax = bmax.max(st.beta);
                    }
                }
            }
        }
        if ev % 25 == 0 {
            println!("ev {ev:4} r2 {r2:14.4} gap {gap:12.5e} lmax {lmax:12.5e} bmax {bmax:12.5e}");
        }
        if let Err(e) = team.edge_step(i, j) {
            println!("FAIL at event {ev}: {e}");
            println!("state before failure: r2 {r2:.4} gap {gap:.5e} lmax {lmax:.5e}");
            let ri = team.robot(i).unwrap();
            let rj = team.robot(j).unwrap();
            for k in ri.shared_with(j) {
                let ti = ri.values.get(k).unwrap().as_pose().unwrap();
                let tj = rj.values.get(k).unwrap().as_pose().unwrap();
                let rel = ti.between(tj);
                let st = ri.edge_state(j, *k).unwrap();
                println!(
                    "  key {:?}: rel angle {:.6} rel trans {:.4} lambda {:.4e}",
                    k,
                    rel.rotation_angle(),
                    rel.translation().norm(),
                    st.lambda.amax()
                );
            }
            return;
        }
    }
    println!("completed without failure: r2 {}", team.r2_mean().unwrap());
}
