"""Simulator and training toolkit for supervisory visual attention control
while driving: a continuous driving subtask, a discrete in-car visual search
subtask, and a supervisor that allocates gaze between them based on the
subtask agents' value estimates."""

__version__ = "0.1.0"
