"""Run an ExperimentConfig into a CurvatureReport."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

from ..errors import CurvforgeError
from .checks import CHECKS, Context, Record, build_context
from .config import ConfigError
from .report import build_report
from .rng import XorShift64Star


def thread_cap():
    """Worker count from CURVFORGE_THREADS (default 1; invalid values are a config error)."""
    raw = os.environ.get("CURVFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CURVFORGE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("CURVFORGE_THREADS must be at least 1")
    return n


def _run_check(index, spec, config, metric, sub, steps, tolerance_scale):
    fn, default_tol = CHECKS[spec.name]
    tol = (spec.tolerance if spec.tolerance is not None else default_tol) * tolerance_scale
    # each check draws from its own stream so scheduling cannot change the numbers
    rng = XorShift64Star(config.seed).spawn(f"{index}:{spec.name}")
    ctx = Context(config.fixture, metric, sub, steps, rng, config.grids, spec.params, tol, tolerance_scale)
    try:
        return fn(ctx), None
    except ConfigError:
        raise
    except CurvforgeError as e:
        rec = Record(spec.name, f"error: {type(e).__name__}", math.nan, 0.0, tol)
        return [rec], f"{spec.name}: {e}"


def run(config, tolerance_scale=1.0, threads=None):
    if tolerance_scale <= 0:
        raise ConfigError("tolerance scale must be positive")
    try:
        metric, sub, steps = build_context(config)
    except (KeyError, ValueError) as e:
        raise ConfigError(str(e)) from None
    threads = threads or thread_cap()
    jobs = list(enumerate(config.checks))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as ex:
            results = list(ex.map(lambda j: _run_check(j[0], j[1], config, metric, sub, steps, tolerance_scale),
                                  jobs))
    else:
        results = [_run_check(i, c, config, metric, sub, steps, tolerance_scale) for i, c in jobs]
    records, errors = [], []
    for recs, err in results:   # ordered reduction by check index
        records.extend(recs)
        if err:
            errors.append(err)
    return build_report(config, records, errors)
