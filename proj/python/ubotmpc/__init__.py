"""GP-learned disturbance rejection with MPC for rolling microrobots."""

from ._core import (  # noqa: F401
    AxisField,
    ControlSequence,
    GPPrediction,
    GroundTruthModel,
    IdentificationResult,
    KernelParams,
    LinearFit,
    MAEReport,
    Metrics,
    ModelParams,
    MPCConfig,
    Path,
    PipelineOptions,
    PlannerConfig,
    PolarControl,
    QPProblem,
    RawTrajectory,
    ScenarioConfig,
    ScenarioKind,
    SearchSpace,
    SweepConfig,
    TrainedGP,
    TrajectoryLog,
    World,
    __version__,
    build_qp,
    circle_reference,
    differentiate,
    effective_radius,
    eval_disturbance,
    fit,
    fit_linear,
    generate_training_run,
    gp_from_json,
    gp_to_json,
    identify,
    kernel_eval,
    log_marginal_likelihood,
    lowpass,
    metrics,
    mpc_step,
    optimize_hyperparameters,
    plan,
    polar_to_u,
    predict,
    resample_path,
    residuals,
    simulate_closed_loop,
    solve_qp,
    step,
    u_to_polar,
)
