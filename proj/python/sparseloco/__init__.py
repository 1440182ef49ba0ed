# Copyright 2026 The SparseLoCo Simulator Authors.
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the sparseloco simulator."""

import json

from ._core import (
    ConfigError,
    DimensionError,
    FormatError,
    NumericError,
    UndefinedSimilarity,
    ablation_suites,
    bits_per_value,
    comm_report_csv,
    compress_decompress,
    decode,
    encode,
    limit_bits_per_value,
    message_size_bytes,
    normalize_config,
    preset,
)
from ._core import train as _train


def train(config, threads=1):
    """Runs a simulation. `config` is a dict or a JSON string."""
    text = config if isinstance(config, str) else json.dumps(config)
    return _train(text, threads)


def preset_dict(algorithm):
    return json.loads(preset(algorithm))


__all__ = [
    "ConfigError",
    "DimensionError",
    "FormatError",
    "NumericError",
    "UndefinedSimilarity",
    "ablation_suites",
    "bits_per_value",
    "comm_report_csv",
    "compress_decompress",
    "decode",
    "encode",
    "limit_bits_per_value",
    "message_size_bytes",
    "normalize_config",
    "preset",
    "preset_dict",
    "train",
]
