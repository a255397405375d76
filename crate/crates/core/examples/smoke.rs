fn main() {
    use mf_core::experiments::{run, ExperimentConfig};
    let arg = std::env::args().nth(1).unwrap_or_default();
    let cfg_text = match arg.as_str() {
        "kl" => "experiment = kloosterman_salie\np = 7\nlevels = 3,4\nmoment_q = 31,101\n",
        "kl5" => "experiment = kloosterman_salie\np = 7\nlevels = 4,5\nmoment_q = 31,101\n",
        "gauss" => "experiment = moment_sweep\nfamily = gauss_degenerate\nq_list = 31,101\n",
        "torus31" => "experiment = moment_sweep\nfamily = legendre_torus\np = 31\nf_coeffs = 27,1,9,17,1\n",
        "sidon" => "experiment = sidon\nmax_q = 13\n",
        "var5" => "experiment = variance\np_list = 5\nm_max = 8\n",
        "var13" => "experiment = variance\np_list = 13\nm_max = 8\n",
        "jac" => "experiment = jacobian_st\nq_list = 11,13\nh_coeffs = 1,0,0,0,0,1\n",
        "lhat" => "experiment = lhat\nq = 7\nalpha_angle_num = 1\nalpha_angle_den = 5\n",
        "det" => "experiment = det_ratio\np = 5\nf_roots = 2,3,4\nmax_pairs = 400\n",
        other => { eprintln!("unknown smoke target {other}"); std::process::exit(2); }
    };
    let cfg = ExperimentConfig::parse(cfg_text).unwrap();
    match run(&cfg) {
        Ok(out) => {
            println!("=== {} ({:.2}s) ===", out.report.experiment, out.report.wall_seconds);
            for m in &out.report.measurements {
                let status = match m.pass { Some(true) => "PASS", Some(false) => "FAIL", None => "info" };
                println!("  [{status}] {}: {:.6} (ref {:?} tol {:?})", m.name, m.value, m.reference, m.tolerance);
            }
            println!("all_passed = {}", out.report.all_passed());
        }
        Err(e) => { eprintln!("error: {e}"); std::process::exit(1); }
    }
}
