"""Zig-zag sampling with continuous tempering.

Thin wrapper over the compiled core. Configs and reports travel as plain
dicts; the heavy lifting happens in C++ with the GIL released.
"""

import json as _json

from . import _core

__version__ = _core.__version__

first_event_constant = _core.first_event_constant
first_event_poly = _core.first_event_poly
is_weight = _core.is_weight
derive_seed = _core.derive_seed


def run(config, out_dir, threads=1):
    """Run the sampler; writes skeleton CSVs and summary.json to out_dir."""
    return _json.loads(_core.run_json(_json.dumps(config), str(out_dir), int(threads)))


def replicates(config, threads=1):
    """Run the configured replicates and return their summaries (no files)."""
    return _json.loads(_core.replicates_json(_json.dumps(config), int(threads)))


def calibrate(config, out_dir):
    """Calibrate kappa for the configured model/base pair; writes kappa.json."""
    return _json.loads(_core.calibrate_json(_json.dumps(config), str(out_dir)))


def experiment(name, overrides=None, out_dir="out", threads=1):
    """Run a built-in study (mixture, spikeslab, boltzmann)."""
    ov = "" if overrides is None else _json.dumps(overrides)
    return _json.loads(_core.experiment_json(name, ov, str(out_dir), int(threads)))


def experiment_defaults(name):
    """Default settings of a built-in study."""
    return _json.loads(_core.experiment_defaults_json(name))
