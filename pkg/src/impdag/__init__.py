"""Dag-shaped natural deduction for minimal purely implicational logic."""

__version__ = "0.1.0"

DAG_FORMAT_VERSION = 1
TUPLE_FORMAT_VERSION = 1
