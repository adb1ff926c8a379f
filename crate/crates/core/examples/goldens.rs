//! Prints the measured quantities the test suite pins as golden values:
//! drift-bound estimates, run sup-norms, final-window errors, comparison
//! metrics, convergence-order ratios, and chatter floors.

use nalgebra::DVector;
use riseadapt::analysis;
use riseadapt::config::ScenarioConfig;
use riseadapt::model::{ControllerKind, Scenario};
use riseadapt::sim;

fn run_with(name: &str, edits: &[(&str, &str)], controller: Option<&str>) -> (Scenario, sim::TrajectoryRecord) {
    let mut cfg = ScenarioConfig::builtin(name);
    for (k, v) in edits {
        cfg.apply_override(k, v).unwrap();
    }
    if let Some(c) = controller {
        cfg.controller = Some(c.parse::<ControllerKind>().unwrap());
    }
    let sc = cfg.build().unwrap();
    let record = sim::run(&sc).unwrap();
    (sc, record)
}

fn main() {
    println!("=== drift bounds and gain margins per built-in ===");
    for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
        let sc = Scenario::builtin(name).unwrap();
        let report = analysis::bound_report(&sc);
        println!(
            "{name}: gamma1={:.4} gamma2={:.4} yd_bar={:.4} gamma3={:.4} beta_required={:.4} beta={:.4} margin_ratio={:.3}",
            report.gamma1,
            report.gamma2,
            report.yd_bar,
            report.gamma3,
            report.beta_required,
            sc.gains.beta,
            sc.gains.beta / report.beta_required
        );
    }

    println!("\n=== adaptive-controller runs per built-in (default 40 s) ===");
    for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
        let start = std::time::Instant::now();
        let (sc, record) = run_with(name, &[], None);
        let elapsed = start.elapsed();
        let summary = analysis::run_summary(&sc, &record).unwrap();
        println!(
            "{name}: runtime={:.2}s final_rms={:.3e} final_max={:.3e} sup_x={:.3} sup_u={:.3} sup_th={:.3} sup_mu={:.3} sup_r={:.3} sup_p={:.3} min_p={:.4e} max_dVL={:.3e} switches={} e(20s)={:.3e}",
            elapsed.as_secs_f64(),
            summary.final_window_rms_error,
            summary.final_window_max_error,
            summary.sup_x,
            summary.sup_u,
            summary.sup_theta_hat,
            summary.sup_mu,
            summary.sup_r,
            record.sup_of(|s| s.p.abs()),
            summary.min_p,
            summary.lyapunov.as_ref().unwrap().max_vl_step_increase,
            summary.switch_count,
            record
                .samples
                .iter()
                .find(|s| (s.t - 20.0).abs() < 1e-9)
                .map(|s| s.e.norm())
                .unwrap_or(f64::NAN)
        );
        let lyap = summary.lyapunov.unwrap();
        println!(
            "    fitted_decay={:.4} per_step_ok={} log_slope={:.4} damping_floor={:.2}",
            lyap.fitted_decay, lyap.per_step_decay_ok, lyap.log_decay_slope, lyap.damping_floor
        );
        let rate = summary.update_rate.unwrap();
        println!(
            "    update_rate sup={:.4} limit={:.4} pass={}",
            rate.sup_rate, rate.limit, rate.pass
        );
        let proj = analysis::projection_report(&record, &sc).unwrap();
        println!(
            "    ball sup={:.6} (theta_bar={:.4}) boundary_samples={} worst_tangency={:.3e}",
            proj.sup_estimate_norm, sc.gains.theta_bar, proj.boundary_samples, proj.worst_tangency
        );
        let identity = analysis::closed_loop_identity_residual(&record, &sc);
        println!("    identity_residual={identity:.3e}");
        let mism = analysis::state_mismatch_report(&record, &sc);
        println!("    mismatch sup_ratio={:.4} sup_at_zero_z={:.3e}", mism.sup_ratio, mism.sup_at_zero_z);
    }

    println!("\n=== adversarial initial estimate (S1, theta_hat0 at 0.99 ball) ===");
    {
        let th0 = 0.99 * 1.875;
        let spec = format!("{},0", th0 / 2.0f64.sqrt());
        let (sc, record) = run_with(
            "S1_scalar",
            &[("theta_hat0", &format!("{},{}", th0 / 2.0f64.sqrt(), th0 / 2.0f64.sqrt())), ("t_end", "40")],
            None,
        );
        let _ = spec;
        let proj = analysis::projection_report(&record, &sc).unwrap();
        println!(
            "ball sup={:.9} theta_bar={:.6} boundary_samples={} worst_tangency={:.3e} min_p={:.4e} max_dVL={:.3e} final_max={:.3e}",
            proj.sup_estimate_norm,
            sc.gains.theta_bar,
            proj.boundary_samples,
            proj.worst_tangency,
            record.min_p(),
            record.max_vl_step_increase(),
            record.max_error_from(36.0)
        );
    }

    println!("\n=== baselines on S1 (40 s) ===");
    for kind in ["sigma_mod", "robust", "gradient"] {
        let (_, record) = run_with("S1_scalar", &[], Some(kind));
        let window = record.final_window_start();
        let tail_start = 30.0; // final 25%
        let min_abs_tail = record
            .samples
            .iter()
            .filter(|s| s.t >= tail_start)
            .map(|s| s.e.norm())
            .fold(f64::INFINITY, f64::min);
        println!(
            "{kind}: final_rms={:.4e} final_max={:.4e} min|e| tail25={:.4e} sup_u={:.3}",
            record.rms_error_from(window),
            record.max_error_from(window),
            min_abs_tail,
            record.sup_of(|s| s.u.norm())
        );
    }
    println!("--- gradient on S3 (constant parameters) ---");
    {
        let (_, record) = run_with("S3_constant_param", &[], Some("gradient"));
        let window = record.final_window_start();
        println!(
            "gradient/S3: final_rms={:.4e} final_max={:.4e}",
            record.rms_error_from(window),
            record.max_error_from(window)
        );
        let (_, record) = run_with("S3_constant_param", &[], Some("sigma_mod"));
        println!(
            "sigma_mod/S3: final_rms={:.4e} final_max={:.4e}",
            record.rms_error_from(window),
            record.max_error_from(window)
        );
    }
    println!("--- robust on S1 vs rise sup|u| after transient (t >= 20) ---");
    {
        let (_, robust) = run_with("S1_scalar", &[], Some("robust"));
        let (_, rise) = run_with("S1_scalar", &[], None);
        let sup_late = |r: &sim::TrajectoryRecord| {
            r.samples.iter().filter(|s| s.t >= 20.0).map(|s| s.u.norm()).fold(0.0, f64::max)
        };
        println!("robust sup_u_late={:.4} rise sup_u_late={:.4}", sup_late(&robust), sup_late(&rise));
    }

    println!("\n=== certificate failure probe (S1, beta at 0.1x required) ===");
    {
        let sc = Scenario::builtin("S1_scalar").unwrap();
        let report = analysis::bound_report(&sc);
        let weak = 0.1 * report.beta_required;
        let (sc2, record) = run_with("S1_scalar", &[("beta", &format!("{weak}"))], None);
        let lyap = analysis::lyapunov_report(&record, &sc2.gains);
        println!(
            "beta={:.4}: min_p={:.4e} max_dVL={:.4e} final_max={:.3e}",
            weak, lyap.min_p, lyap.max_vl_step_increase, record.max_error_from(36.0)
        );
    }

    println!("\n=== chatter floors (noise induced by the signum selection) ===");
    {
        for dt in ["0.001", "0.0001"] {
            let (_, record) = run_with(
                "S3_constant_param",
                &[("theta_hat0", "1.0,0.0"), ("x0", "0"), ("t_end", "2"), ("dt", dt)],
                None,
            );
            println!("perfect-init S3 dt={dt}: sup|e|={:.4e}", record.sup_of(|s| s.e.norm()));
        }
        for dt in ["0.001", "0.0001"] {
            let (_, record) = run_with(
                "S4_disturbance_only",
                &[("dist_amplitude", "0"), ("t_end", "20"), ("dt", dt)],
                None,
            );
            println!(
                "integrator-plant S4 dt={dt}: final_max(18s+)={:.4e}",
                record.max_error_from(18.0)
            );
        }
    }

    println!("\n=== step-halving on S3 (switch-free segment, small beta) ===");
    {
        let run_dt = |dt: f64| {
            let (_, record) = run_with(
                "S3_constant_param",
                &[("beta", "0.5"), ("t_end", "0.5"), ("dt", &format!("{dt}"))],
                None,
            );
            let last = record.samples.last().unwrap();
            (last.x[0], record.switch_count(), record.samples.iter().all(|s| s.e[0] > 0.0))
        };
        let (x1, sw1, pos1) = run_dt(0.02);
        let (x2, sw2, pos2) = run_dt(0.01);
        let (x3, sw3, pos3) = run_dt(0.005);
        let d1 = (x1 - x2).abs();
        let d2 = (x2 - x3).abs();
        println!(
            "x(0.5): {x1:.12} {x2:.12} {x3:.12}; d1={d1:.3e} d2={d2:.3e} ratio={:.2} switches=({sw1},{sw2},{sw3}) e>0 throughout=({pos1},{pos2},{pos3})",
            d1 / d2
        );
    }

    println!("\n=== closed-loop residual convergence (S1, 5 s horizon) ===");
    {
        let (sc_a, rec_a) = run_with("S1_scalar", &[("t_end", "5"), ("dt", "0.001")], None);
        let (sup_a, used_a) = analysis::closed_loop_residual_check(&rec_a, &sc_a);
        let (sc_b, rec_b) = run_with("S1_scalar", &[("t_end", "5"), ("dt", "0.0001")], None);
        let (sup_b, used_b) = analysis::closed_loop_residual_check(&rec_b, &sc_b);
        println!(
            "dt=1e-3: sup={sup_a:.4e} (used {used_a}); dt=1e-4: sup={sup_b:.4e} (used {used_b}); ratio={:.2}",
            sup_a / sup_b
        );
    }

    println!("\n=== drift term at t=0 for the certificate initialization ===");
    {
        let sc = Scenario::builtin("S1_scalar").unwrap();
        let d0 = analysis::drift_term_at(&sc, 0.0, &DVector::zeros(2));
        println!("S1 drift(0, 0-estimate) = {:?}", d0.as_slice());
    }
}
