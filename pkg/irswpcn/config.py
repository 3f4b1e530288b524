"""
Experiment configuration files.

A config is a TOML document rendered through Mako first, so `${...}`
expressions and `<% %>` blocks can compute values, e.g.

    [sweep]
    name = "n"
    values = ${[4 * 2**i for i in range(3)]}

Power and gain values may be given in dB units at this boundary only:
`p0_dbm`, `sigma2_dbm` and `zeta0_db` stand for `P0`, `sigma2` and `zeta0`.
"""
import dataclasses
import logging
import os
import sys

from irswpcn.bca import BcaConfig
from irswpcn.experiments import ExperimentConfig
from irswpcn.model import SystemParams
from irswpcn.srocr import SrocrConfig
from irswpcn.templating import db_to_linear, dbm_to_watts, render_file, render_text

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

_DB_KEYS = {
    "p0_dbm": ("P0", dbm_to_watts),
    "sigma2_dbm": ("sigma2", dbm_to_watts),
    "zeta0_db": ("zeta0", db_to_linear),
}
_TOP_LEVEL = {
    "name",
    "realizations",
    "base_seed",
    "algorithms",
    "output_path",
    "grouping",
    "distance_range",
    "parallel",
    "paired_init",
}


def make_absolute(this_dir, s):
    if os.path.isabs(s):
        return s
    else:
        return os.path.join(this_dir, s)


def _fields(cls):
    return {f.name for f in dataclasses.fields(cls)}


def _check_keys(section, table, allowed):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")


def system_params(table) -> SystemParams:
    table = dict(table)
    for key, (field_name, convert) in _DB_KEYS.items():
        if key in table:
            if field_name in table:
                raise ValueError(f"give either {key} or {field_name}, not both")
            table[field_name] = convert(table.pop(key))
    _check_keys("system", table, _fields(SystemParams))
    for key in ("clusters", "alpha_user", "d_user"):
        if isinstance(table.get(key), list):
            table[key] = tuple(table[key])
    return SystemParams.evaluation_defaults(**table)


def bca_config(table) -> BcaConfig:
    table = dict(table)
    srocr = table.pop("srocr", {})
    _check_keys("bca", table, _fields(BcaConfig) - {"srocr"})
    _check_keys("bca.srocr", srocr, _fields(SrocrConfig))
    return BcaConfig(srocr=SrocrConfig(**srocr), **table)


def parse_config(document, base_dir=".") -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed TOML mapping."""
    document = dict(document)
    system = document.pop("system", {})
    sweep = document.pop("sweep", None)
    bca = document.pop("bca", {})
    if sweep is None:
        raise ValueError("config needs a [sweep] table with name and values")
    _check_keys("sweep", sweep, {"name", "values"})
    _check_keys("top level", document, _TOP_LEVEL)

    values = sweep.get("values", ())
    if sweep.get("name") == "clusters":
        values = tuple(tuple(v) for v in values)
    options = dict(document)
    if "algorithms" in options:
        options["algorithms"] = tuple(options["algorithms"])
    if "distance_range" in options:
        options["distance_range"] = tuple(options["distance_range"])
    if options.get("output_path"):
        options["output_path"] = make_absolute(base_dir, options["output_path"])
    return ExperimentConfig(
        base=system_params(system),
        sweep_name=sweep.get("name"),
        sweep_values=tuple(values),
        bca=bca_config(bca),
        **options,
    )


def loads(text, base_dir=".", **namespace) -> ExperimentConfig:
    rendered = render_text(text, **namespace)
    return parse_config(tomllib.loads(rendered), base_dir)


def load_config(path, **namespace) -> ExperimentConfig:
    path = os.path.abspath(path)
    rendered = render_file(path, **namespace)
    logger.debug(f"rendered config {path}:\n{rendered}")
    return parse_config(tomllib.loads(rendered), os.path.dirname(path))
