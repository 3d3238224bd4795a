"""Experiment configuration, orchestration, and the command-line interface."""
