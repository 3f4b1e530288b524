import hashlib
import json
import logging
import os
import struct

logger = logging.getLogger(__name__)

_SEED = struct.Struct("<Q")
_SEED_MASK = (1 << 63) - 1


def derive_seed(*parts):
    """
    A 63-bit seed from any JSON-encodable parts, e.g.
    (base_seed, sweep_index, realization_index, "channels"). Stable across
    processes and platforms, unlike `hash`.
    """
    dump = json.dumps(list(parts), separators=(",", ":")).encode("utf-8")
    (value,) = _SEED.unpack(hashlib.md5(dump).digest()[: _SEED.size])
    return value & _SEED_MASK


def _package_sources():
    root = os.path.dirname(os.path.abspath(__file__))
    return sorted(
        os.path.join(root, name)
        for name in os.listdir(root)
        if name.endswith(".py") and name != "_version.py"
    )


def build_identifier():
    """md5 over the package's own source files."""
    return _calc_cur_checksum(_package_sources())


def _calc_cur_checksum(file_lst):
    text = b""
    for filepath in file_lst:
        with open(filepath, "rb") as f:
            text += f.read()
    return hashlib.md5(text).hexdigest()
