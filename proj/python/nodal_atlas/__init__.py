"""Nodal domain statistics of Gaussian random waves."""
import json

from ._core import (
    NodalError,
    __version__,
    all_rooted_trees,
    canonical_code,
    covariance,
    discrepancy,
    nesting_codes,
    realize_tree,
    sample_field,
)
from . import _core


def run_campaign(config=None, write=False, **overrides):
    """Runs a plane or sphere campaign and returns its summary as a dict.

    `config` is a dict of configuration keys; keyword arguments override it.
    With write=True the output files go to config["out"].
    """
    merged = dict(config or {})
    merged.update(overrides)
    return json.loads(_core.run_campaign_json(json.dumps(merged), write))


def kac_rice(config=None, **overrides):
    """Empirical zero or nodal-length density against the analytic value."""
    merged = {"mode": "kacrice", "out": "out"}
    merged.update(config or {})
    merged.update(overrides)
    return json.loads(_core.run_kacrice_json(json.dumps(merged)))


__all__ = [
    "NodalError",
    "__version__",
    "all_rooted_trees",
    "canonical_code",
    "covariance",
    "discrepancy",
    "kac_rice",
    "nesting_codes",
    "realize_tree",
    "run_campaign",
    "sample_field",
]
