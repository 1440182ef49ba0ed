# Copyright 2026 The SparseLoCo Simulator Authors.
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import sparseloco as sl


def tiny_config(algorithm="sparseloco"):
    cfg = sl.preset_dict(algorithm)
    cfg["data"].update({"n_samples": 512, "eval_samples": 128, "input_dim": 8, "n_classes": 4})
    cfg["model"]["hidden"] = [16]
    cfg["inner"]["warmup_steps"] = 2
    cfg["replicas"] = 2
    cfg["inner_steps"] = 3
    cfg["outer_steps"] = 4
    cfg["compression"].update({"chunk_size": 32, "k": 4})
    cfg["eval_every"] = 2
    return cfg


def test_topk_full_k_passthrough_is_identity():
    v = np.random.default_rng(0).normal(size=100)
    out = sl.compress_decompress(v, chunk_size=16, k=16, bits=32)
    np.testing.assert_array_equal(out, v)


def test_topk_keeps_largest_per_chunk():
    v = np.array([0.1, -3.0, 0.2, 2.0, 5.0, 0.0, -0.5, 0.4])
    out = sl.compress_decompress(v, chunk_size=4, k=1, bits=32)
    np.testing.assert_array_equal(out, [0, -3.0, 0, 0, 5.0, 0, 0, 0])


def test_two_bit_quantizer_example():
    out = sl.compress_decompress(np.array([-1.0, 0.9, 0.1, -0.2]), chunk_size=4, k=4, bits=2)
    np.testing.assert_allclose(out, [-0.75, 0.75, 0.25, -0.25])


def test_wire_round_trip_and_size():
    v = np.random.default_rng(1).normal(size=1000)
    for codec in ("enumerative", "naive"):
        data = sl.encode(v, chunk_size=64, k=4, bits=2, codec=codec)
        assert len(data) == sl.message_size_bytes(1000, 64, 4, 2, codec)
        np.testing.assert_allclose(sl.decode(data), sl.compress_decompress(v, 64, 4, bits=2))


def test_malformed_message_raises():
    with pytest.raises(sl.FormatError):
        sl.decode(b"\x00" * 8)


def test_codec_rates():
    assert sl.bits_per_value(4096, 128, "naive") == 12
    assert abs(sl.limit_bits_per_value(4096, 64) - math.log2(math.comb(4096, 64)) / 64) < 1e-9
    assert sl.bits_per_value(4096, 64) >= sl.limit_bits_per_value(4096, 64)


def test_config_errors_name_the_field():
    cfg = tiny_config()
    cfg["outer"]["bogus"] = 1
    with pytest.raises(sl.ConfigError, match="bogus"):
        sl.normalize_config(json.dumps(cfg))


def test_train_is_deterministic_across_threads():
    cfg = tiny_config()
    a = sl.train(cfg, threads=1)
    b = sl.train(cfg, threads=2)
    strip = lambda csv: [line.rsplit(",", 1)[0] for line in csv.splitlines()]
    assert strip(a["csv"]) == strip(b["csv"])
    assert len(a["train_loss"]) == 4
    assert math.isfinite(a["final_eval_loss"])
    assert a["bytes_per_worker"] > 0


def test_suites_and_report():
    assert "quant-bits" in sl.ablation_suites()
    assert sl.comm_report_csv().count("\n") > 3


def test_shipped_configs_parse():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[2] / "configs"
    files = sorted(root.glob("*.json"))
    assert files
    for f in files:
        sl.normalize_config(f.read_text())
