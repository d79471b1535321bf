"""Test-session setup.

The thread-pool size must be fixed before numba is first imported so the
determinism tests can switch between 1 and 4 workers even on single-CPU
machines.
"""
import os

os.environ.setdefault("NUMBA_NUM_THREADS", "4")
