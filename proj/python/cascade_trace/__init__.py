"""Python bindings for the cascade-trace C++ core."""

import json

from ._core import (
    ANCESTORS_ANNOTATION,
    CPID_ANNOTATION,
    DEFAULT_ANCESTOR_LIMIT,
    CascadeTraceError,
    CycleRejected,
    EmptyInput,
    MalformedContext,
    MergeGraph,
    NotFound,
    Timeout,
    TransportError,
    build_cpid_graph,
    builtin_scenarios,
    extract,
    inject,
    is_uuid_v4,
    merge,
    new_cpid,
    related,
)
from ._core import run_scenario as _run_scenario


def run_scenario(name, ancestor_limit=DEFAULT_ANCESTOR_LIMIT, seed=1, deterministic=True,
                 tracing=True, kubelet=True, server=None):
    """Runs a built-in scenario and returns its report as a dict."""
    return json.loads(_run_scenario(name, ancestor_limit, seed, deterministic, tracing, kubelet, server))


__all__ = [
    "ANCESTORS_ANNOTATION", "CPID_ANNOTATION", "DEFAULT_ANCESTOR_LIMIT", "CascadeTraceError",
    "CycleRejected", "EmptyInput", "MalformedContext", "MergeGraph", "NotFound", "Timeout",
    "TransportError", "build_cpid_graph", "builtin_scenarios", "extract", "inject", "is_uuid_v4",
    "merge", "new_cpid", "related", "run_scenario",
]
