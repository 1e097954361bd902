"""
Run Orchestration
==================

`run(config)` executes one mode and writes its results:

    forward   state.csv, control.csv, summary.json (J, budget residual, entropy)
    adjoint   forward outputs + adjoint.csv, gradient.csv
    optimize  final control.csv and state.csv, history.csv, summary.json
              (objective history, residual, bang-bang fraction, polish)
    verify    verification_report.json

Every mode also writes config.yaml (the validated config, re-runnable),
run.log and manifest.json. A solver or optimizer failure still produces a
manifest with status "failed" and whatever files were written before the
failure.
"""

import logging
import time
from collections.abc import Callable

import yaml

from gliorad import __version__
from gliorad.control.gradient import gradient_field
from gliorad.control.objective import augmented_objective, constraint_residual, objective
from gliorad.control.optimizer import OptimizationResult, optimize
from gliorad.core.errors import ConfigurationError, OptimizationError, SolverError
from gliorad.core.fields import SpaceTimeField, l2_norm
from gliorad.io.config import (
    RunConfig,
    RunMode,
    build_initial_control,
    build_initial_state,
    build_run_objects,
)
from gliorad.io.results import LOG_NAME, ResultStore, RunManifest
from gliorad.solvers.adjoint import solve_adjoint
from gliorad.solvers.forward import ForwardProblem, solve_forward
from gliorad.utils.logger import attach_file_handler, setup_logger
from gliorad.verification.entropy import entropy_diagnostic
from gliorad.verification.suite import run_verification


logger = setup_logger(__name__)

PACKAGE_LOGGER = "gliorad"


def build_problem(config: RunConfig) -> ForwardProblem:
    _, tissue = build_run_objects(config)
    return ForwardProblem(
        tissue=tissue,
        proliferation=config.control.proliferation,
        control=build_initial_control(config, tissue),
        initial_state=build_initial_state(config, tissue.grid),
    )


def _forward_summary(
    config: RunConfig, state: SpaceTimeField, control: SpaceTimeField
) -> dict:
    spec = config.control
    return {
        "mode": config.mode.value,
        "objective": objective(state),
        "augmented_objective": augmented_objective(state, control, spec.penalty, spec.budget),
        "constraint_residual": constraint_residual(control, spec.budget),
        "state_min": float(state.values.min()),
        "state_max": float(state.values.max()),
        "entropy": entropy_diagnostic(state).summary(),
    }


# ─── Modes ────────────────────────────────────────────────────────


def run_forward(config: RunConfig, store: ResultStore) -> dict:
    problem = build_problem(config)
    state = solve_forward(problem, config.solver)
    store.write_field("control.csv", problem.control)
    store.write_field("state.csv", state)
    summary = _forward_summary(config, state, problem.control)
    store.write_json("summary.json", summary)
    return summary


def run_adjoint(config: RunConfig, store: ResultStore) -> dict:
    problem = build_problem(config)
    state = solve_forward(problem, config.solver)
    adjoint = solve_adjoint(
        state,
        problem.control,
        problem.proliferation,
        problem.tissue,
        config.solver,
        operator=problem.operator,
    )
    spec = config.control
    direction = gradient_field(
        state,
        adjoint,
        problem.control,
        spec.penalty,
        spec.budget,
        spec.shape,
        config.solver.adjoint_scheme,
    )
    store.write_field("control.csv", problem.control)
    store.write_field("state.csv", state)
    store.write_field("adjoint.csv", adjoint)
    store.write_field("gradient.csv", direction)
    summary = {
        **_forward_summary(config, state, problem.control),
        "adjoint_scheme": config.solver.adjoint_scheme.value,
        "adjoint_min": float(adjoint.values.min()),
        "adjoint_max": float(adjoint.values.max()),
        "gradient_norm": l2_norm(direction),
    }
    store.write_json("summary.json", summary)
    return summary


def _write_optimization(result: OptimizationResult, config: RunConfig, store: ResultStore):
    store.write_field("control.csv", result.control)
    store.write_field("state.csv", result.state)
    store.write_rows(
        "history.csv",
        ["accepted", "augmented_objective"],
        [[index, float(value)] for index, value in enumerate(result.history)],
    )
    if result.polish is not None:
        store.write_field("polish_control.csv", result.polish.bathtub.control)
    store.write_json("summary.json", {"mode": config.mode.value, **result.summary()})


def run_optimize(config: RunConfig, store: ResultStore) -> dict:
    problem = build_problem(config)
    result = optimize(problem, config.control, config.optimizer, config.solver)
    _write_optimization(result, config, store)
    return result.summary()


def run_verify(config: RunConfig, store: ResultStore) -> dict:
    verify_config = config.verify.model_copy(update={"seed": config.seed})
    report = run_verification(verify_config)
    summary = report.to_dict()
    store.write_json("verification_report.json", summary)
    return summary


MODES: dict[RunMode, Callable[[RunConfig, ResultStore], dict]] = {
    RunMode.FORWARD: run_forward,
    RunMode.ADJOINT: run_adjoint,
    RunMode.OPTIMIZE: run_optimize,
    RunMode.VERIFY: run_verify,
}


# ─── Entry point ──────────────────────────────────────────────────


def run(config: RunConfig) -> RunManifest:
    """
    Execute the configured mode and write results plus manifest.json.

    Returns:
        The manifest; status "failed" when a solve, the optimizer or a
        verification check failed.

    Raises:
        ConfigurationError: after writing a failed manifest, when the config
            turns out to be unusable (e.g. an initial-control file of the
            wrong shape).
    """
    store = ResultStore(config.output_dir)
    package_logger = logging.getLogger(PACKAGE_LOGGER)
    handler = attach_file_handler(package_logger, store.path(LOG_NAME))

    started = time.perf_counter()
    status, error = "ok", None
    logger.info(f"Run started: mode={config.mode.value}, output={store.base_dir}")
    try:
        store.write_text(
            "config.yaml",
            yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False),
        )
        summary = MODES[config.mode](config, store)
        if config.mode == RunMode.VERIFY and not summary["passed"]:
            status, error = "failed", f"{summary['failures']} verification records failed"
    except (SolverError, OptimizationError) as e:
        status, error = "failed", str(e)
        logger.error(f"Run failed: {e}")
    except ConfigurationError as e:
        status, error = "failed", str(e)
        logger.error(f"Run aborted by configuration: {e}")
        raise
    finally:
        manifest = RunManifest(
            version=__version__,
            mode=config.mode.value,
            status=status,
            error=error,
            wall_time=time.perf_counter() - started,
            config=config.model_dump(mode="json"),
            files=store.inventory(),
        )
        store.write_manifest(manifest)
        logger.info(f"Run finished: status={status}, {len(manifest.files)} files")
        package_logger.removeHandler(handler)
        handler.close()
    return manifest
