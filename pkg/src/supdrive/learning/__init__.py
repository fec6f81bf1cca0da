"""Agents, value oracles, checkpoints and training loops."""
