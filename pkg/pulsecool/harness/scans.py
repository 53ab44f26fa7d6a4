"""Detuning scans: equilibrium temperature and cold-ion lineshape.

Every (point, trial) pair is an independent task seeded by
`derive_seed(master, point, trial)`, so results do not depend on how
tasks are scheduled. With threads > 1 tasks run in a process pool;
threads == 1 runs them in order in this process.
"""

import asyncio
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from pulsecool.engine.engine import run
from pulsecool.harness.seeds import derive_seed
from pulsecool.model.config_types import ConfigBundle, ScanSpec
from pulsecool.model.constants import K_B, format_frequency
from pulsecool.model.errors import PulseCoolError, ValidationError
from pulsecool.model.validation import check, check_temperature_grid
from pulsecool.theory.theory import (
    axis_equilibrium_temperature,
    equilibrium_temperature,
    excitation_probability,
    scatter_rate,
)

logger = logging.getLogger(__name__)

LINE_CHUNK = 1 << 20


@dataclass(frozen=True)
class TemperatureRow:
    delta: float
    t_mc: float
    t_mc_err: float
    t_theory: float
    t_axis_theory: float
    error: str = ""


@dataclass(frozen=True)
class LineshapeRow:
    delta: float
    rate_theory: float
    rate_mc: float
    rate_mc_err: float
    error: str = ""


def _temperature_task(bundle: ConfigBundle, scan: ScanSpec, point: int, trial: int, master: int):
    laser = bundle.laser.with_detuning(scan.detunings[point])
    sim = replace(bundle.sim, seed=derive_seed(master, point, trial), n_pulses=scan.pulses_per_trial,
                  burn_in_pulses=scan.burn_in_pulses, energy_stride=0, trajectory_stride=0)
    result = run(bundle.atom, bundle.trap, laser, sim)
    return result.stats.axes_temperature(scan.axes)


def _lineshape_task(bundle: ConfigBundle, scan: ScanSpec, point: int, trial: int, master: int):
    """Absorptions in pulses_per_trial pulses at a pinned thermal velocity spread."""
    atom, laser = bundle.atom, bundle.laser
    rng = np.random.default_rng(derive_seed(master, point, trial))
    delta = scan.detunings[point]
    sigma_v = math.sqrt(K_B * scan.line_temperature / atom.mass)
    absorbed = 0
    for start in range(0, scan.pulses_per_trial, LINE_CHUNK):
        size = min(LINE_CHUNK, scan.pulses_per_trial - start)
        v_beam = sigma_v * rng.standard_normal(size)
        p_exc = excitation_probability(laser.rabi_angle, laser.tau, delta - atom.k * v_beam)
        absorbed += int(np.count_nonzero(rng.random(size) < p_exc))
    return absorbed, scan.pulses_per_trial


def _check(scan: ScanSpec, temperature: bool):
    violations = check_temperature_grid(scan) if temperature else check(scan)
    if violations:
        raise ValidationError(violations, context="scan")


async def _run_tasks(task, bundle, scan, threads):
    """Run task(bundle, scan, point, trial, master) for all pairs; returns {(point, trial): result or exception}.

    With a pool all tasks share one deadline of `scan.timeout_s`. Tasks
    finished by then keep their results; the rest are recorded as timed
    out and the pool is shut down without waiting for them.
    """
    master = bundle.sim.seed
    keys = [(p, t) for p in range(len(scan.detunings)) for t in range(scan.trials)]
    results = {}
    if threads <= 1:
        for point, trial in keys:
            try:
                results[(point, trial)] = task(bundle, scan, point, trial, master)
            except Exception as e:
                logger.warning("point %d trial %d failed: %s", point, trial, e)
                results[(point, trial)] = e
        return results

    loop = asyncio.get_running_loop()
    pool = ProcessPoolExecutor(max_workers=threads)
    try:
        futures = {
            loop.run_in_executor(pool, task, bundle, scan, key[0], key[1], master): key
            for key in keys
        }
        done, pending = await asyncio.wait(futures, timeout=scan.timeout_s)
        for future in done:
            key = futures[future]
            try:
                results[key] = future.result()
            except Exception as e:
                logger.warning("point %d trial %d failed: %s", key[0], key[1], e)
                results[key] = e
        if pending:
            logger.warning("%d of %d tasks timed out after %s s", len(pending), len(keys), scan.timeout_s)
        for future in pending:
            future.cancel()
            results[futures[future]] = PulseCoolError(f"timed out after {scan.timeout_s} s")
    finally:
        # running workers finish their current task in the background
        pool.shutdown(wait=False, cancel_futures=True)
    return results


def _first_error(outcomes):
    for outcome in outcomes:
        if isinstance(outcome, Exception):
            return f"{type(outcome).__name__}: {outcome}"
    return ""


async def temperature_scan_async(bundle: ConfigBundle, scan: ScanSpec | None = None, threads: int = 1):
    scan = scan or bundle.scan
    _check(scan, temperature=True)
    logger.info("temperature scan: %d points x %d trials x %d pulses",
                len(scan.detunings), scan.trials, scan.pulses_per_trial)
    results = await _run_tasks(_temperature_task, bundle, scan, threads)

    rows = []
    for point, delta in enumerate(scan.detunings):
        t_theory = equilibrium_temperature(bundle.laser.tau, delta)
        t_axis = axis_equilibrium_temperature(bundle.laser.tau, delta, bundle.laser.beam_dir,
                                              bundle.laser.rabi_angle)
        t_axis_theory = float(np.mean(t_axis[list(scan.axes)]))
        outcomes = [results[(point, trial)] for trial in range(scan.trials)]
        error = _first_error(outcomes)
        if error:
            rows.append(TemperatureRow(delta, math.nan, math.nan, t_theory, t_axis_theory, error))
            continue
        values = np.array([value for value, _ in outcomes])
        if len(values) > 1:
            err = float(values.std(ddof=1) / math.sqrt(len(values)))
        else:
            err = float(outcomes[0][1])
        rows.append(TemperatureRow(delta, float(values.mean()), err, t_theory, t_axis_theory))
        logger.info("%s: T = %.4g +- %.2g K (theory %.4g K, per-axis %.4g K)",
                    format_frequency(delta), rows[-1].t_mc, err, t_theory, t_axis_theory)
    return rows


async def lineshape_scan_async(bundle: ConfigBundle, scan: ScanSpec | None = None, threads: int = 1):
    scan = scan or bundle.scan
    _check(scan, temperature=False)
    logger.info("lineshape scan: %d points x %d trials x %d pulses at %.3g K",
                len(scan.detunings), scan.trials, scan.pulses_per_trial, scan.line_temperature)
    results = await _run_tasks(_lineshape_task, bundle, scan, threads)

    rate = bundle.laser.rep_rate
    rows = []
    for point, delta in enumerate(scan.detunings):
        rate_theory = scatter_rate(bundle.atom, bundle.laser.with_detuning(delta), 0.0)
        outcomes = [results[(point, trial)] for trial in range(scan.trials)]
        error = _first_error(outcomes)
        if error:
            rows.append(LineshapeRow(delta, rate_theory, math.nan, math.nan, error))
            continue
        absorbed = sum(a for a, _ in outcomes)
        pulses = sum(n for _, n in outcomes)
        fraction = absorbed / pulses
        err = rate * math.sqrt(max(fraction * (1.0 - fraction), 1.0 / pulses) / pulses)
        rows.append(LineshapeRow(delta, rate_theory, rate * fraction, err))
    return rows


def temperature_scan(bundle: ConfigBundle, scan: ScanSpec | None = None, threads: int = 1):
    return asyncio.run(temperature_scan_async(bundle, scan, threads))


def lineshape_scan(bundle: ConfigBundle, scan: ScanSpec | None = None, threads: int = 1):
    return asyncio.run(lineshape_scan_async(bundle, scan, threads))
