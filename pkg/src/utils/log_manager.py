LOG_MESSAGES = {
    # Program lifecycle
    "program_started": "Program started: {}",
    "program_closed": "Program closed with exit code {}",
    "command_failed": "Command failed: {}",

    # Simulation runs
    "run_started": "Run '{}' started: n={}, steps={}, seeds={}, jobs={}",
    "run_finished": "Run '{}' finished in {:.2f}s",
    "seed_started": "Seed {} started ({} steps)",
    "seed_finished": "Seed {} finished: m={}, max adisc={:.3f}, max overload={:.3f}",
    "initial_state": "Initial state: n={}, m={}",
    "events_recorded": "Event log kept: {} events",
    "deletion_noop": "Deletion drawn on an empty system, step is a no-op",

    # Schedules
    "schedule_built": "Schedule built: {} with bounds [{:.4f}, {:.4f}]",
    "schedule_loaded": "Schedule loaded from {}",
    "burst_schedule": "Deletion burst: beta={:.4f} for {} steps after t={}",

    # Thresholds and levels
    "thresholds_built": "Thresholds built: n={}, beta_hat={}, levels={}, ell*={}",
    "sandwich_violation": "Threshold sandwich fails at level {} (n={}, beta_hat={})",
    "cgood_result": "c-good check over ({}, {}]: {}",

    # Potentials
    "potential_overflow": "Potential exponent {:.2f} exceeds cap {:.1f}",
    "drift_estimated": "Drift estimate over {} trials: mean={:.6g}, se={:.3g}",

    # Coupling and walks
    "coupling_met": "Coupled copies met after {} steps",
    "coupling_timeout": "Coupled copies did not meet within {} steps",
    "majorization_violation": "Majorization violated at step {}",
    "walk_finished": "Walk experiment {} finished: {} trials",

    # Lower bound
    "prefill_done": "Prefill done for seed {}: Gamma/n={:.4f}, fraction at floor average={:.4f}",
    "lower_bound_seed": "Seed {}: literal count={}, untouched count={}",

    # Suites
    "suite_started": "Suite '{}' started",
    "suite_check": "Check '{}': {} (value={}, threshold={})",
    "suite_finished": "Suite '{}' {}",

    # Output
    "samples_written": "Samples written: {} rows -> {}",
    "report_written": "Report written: {}",
    "csv_written": "CSV export written: {}",
    "config_loaded": "Config loaded from {}",

    # Calibration
    "calibration_value": "Calibrated {}: median={:.4f}, pinned={:.4f}",
}
