"""Keeps the tests directory on sys.path so tests can import oracles.py."""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
