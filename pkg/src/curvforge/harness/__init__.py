"""Experiment runner: configs, checks, deterministic reports and the ``curvforge`` CLI."""
