import json
import math
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gkmmnlab.cli import main
from gkmmnlab.config import ConfigError, RunConfig, effective_json, load_config
from gkmmnlab.grid import Domain, Field
from gkmmnlab.snapshot import (BadMagicError, DimensionMismatchError, Snapshot, TruncatedError,
                               VersionMismatchError, decode, encode, read_snapshot, write_snapshot)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _field(seed=0, nx=16, ny=8):
    d = Domain(2.0, 3.0, nx, ny)
    rng = np.random.default_rng(seed)
    return Field(d, rng.standard_normal(d.shape) + 1j * rng.standard_normal(d.shape))


# snapshots

def test_roundtrip_bit_identical(tmp_path):
    f = _field()
    write_snapshot(Snapshot(f, 0.25, "c"), tmp_path / "a.gkmm")
    s = read_snapshot(tmp_path / "a.gkmm")
    assert s.field.values.tobytes() == f.values.tobytes()
    assert s.t == 0.25 and s.kind == "c" and s.field.domain == f.domain
    assert encode(s) == (tmp_path / "a.gkmm").read_bytes()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), nx=st.sampled_from([8, 10, 16]), t=st.floats(-1e6, 1e6))
def test_roundtrip_property(seed, nx, t):
    f = _field(seed, nx, 8)
    s = decode(encode(Snapshot(f, t, "field")))
    assert np.array_equal(s.field.values.view(np.uint8), f.values.view(np.uint8)) and s.t == t


def test_zero_length_is_bad_magic():
    with pytest.raises(BadMagicError):
        decode(b"")
    with pytest.raises(BadMagicError):
        decode(b"XXXX" + bytes(100))


def test_truncated():
    blob = encode(Snapshot(_field()))
    with pytest.raises(TruncatedError):
        decode(blob[:20])
    with pytest.raises(TruncatedError):
        decode(blob[:-3])


def test_tampered_nx_is_dimension_mismatch():
    blob = bytearray(encode(Snapshot(_field())))
    struct.pack_into("<I", blob, 8, 18)
    with pytest.raises(DimensionMismatchError):
        decode(bytes(blob))


def test_expected_domain_mismatch():
    blob = encode(Snapshot(_field()))
    with pytest.raises(DimensionMismatchError):
        decode(blob, expected=Domain(2.0, 3.0, 8, 16))


def test_version_mismatch():
    blob = bytearray(encode(Snapshot(_field())))
    struct.pack_into("<I", blob, 4, 2)
    with pytest.raises(VersionMismatchError):
        decode(bytes(blob))


def test_kind_too_long():
    with pytest.raises(ValueError):
        Snapshot(_field(), 0.0, "x" * 17)


# config

def test_config_defaults_materialized():
    cfg = RunConfig()
    echo = json.loads(effective_json(cfg))
    assert echo["tolerances"]["b2_residual"] == 1e-6
    assert set(echo["gauges"]) == {"F", "A"}


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"domain": {"Nx": 32, "Nz": 4}}))
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text(json.dumps({"seed": -1}))
    with pytest.raises(ConfigError):
        load_config(p)


# command line

def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_derive_matches_golden(tmp_path, golden_dir):
    assert main(["derive", "--out", str(tmp_path / "d"), "--strict"]) == 0
    got = (tmp_path / "d" / "derive_report.txt").read_text(encoding="utf-8")
    assert got == (golden_dir / "derive_report.txt").read_text(encoding="utf-8")
    for key in ("F_x - 2*G_y", "A_y - 2*S_x", "2*G_x"):
        assert key in got


def test_verify_b2_free_config(tmp_path):
    out = tmp_path / "b2"
    assert main(["verify-b2", "--config", str(CONFIGS / "verify_b2_free.json"), "--out", str(out),
                 "--strict"]) == 0
    lines = [json.loads(line) for line in (out / "report.jsonl").read_text().splitlines()]
    assert lines[0]["command"] == "verify-b2"
    assert all(r["pass"] for r in lines[1:])
    assert any(name.endswith(".gkmm") for name in _tree(out))
    assert any(name.endswith(".csv") for name in _tree(out))


def test_malformed_config_exit_2_no_artifacts(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"domain": {"Nx": 7}}))
    out = tmp_path / "out"
    assert main(["verify-b2", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    bad.write_text(json.dumps({"bogus": 1}))
    assert main(["derive", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_strict_failure_exit_1(tmp_path):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({"tolerances": {"b2_residual": 1e-30}}))
    assert main(["verify-b2", "--config", str(cfg), "--out", str(tmp_path / "s"), "--strict"]) == 1
    assert main(["verify-b2", "--config", str(cfg), "--out", str(tmp_path / "n")]) == 0


@pytest.mark.parametrize("command,config", [
    ("linear-solve", "verify_b2_trig.json"),
    ("ba", "ba_k3.json"),
    ("pauli", "pauli.json"),
    ("evolve", "evolve.json"),
    ("verify", "verify.json"),
    ("sweep", "sweep.json"),
])
def test_runs_are_deterministic(tmp_path, command, config, monkeypatch):
    monkeypatch.setenv("GKMM_THREADS", "3")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([command, "--config", str(CONFIGS / config), "--out", str(a), "--strict"]) == 0
    assert main([command, "--config", str(CONFIGS / config), "--out", str(b), "--strict"]) == 0
    ta, tb = _tree(a), _tree(b)
    assert ta.keys() == tb.keys() and ta == tb


def test_seed_flag_overrides_config(tmp_path):
    main(["verify", "--config", str(CONFIGS / "verify.json"), "--seed", "99", "--out", str(tmp_path / "v")])
    first = json.loads((tmp_path / "v" / "report.jsonl").read_text().splitlines()[0])
    assert first["seed"] == 99
    echo = json.loads((tmp_path / "v" / "effective_config.json").read_text())
    assert echo["seed"] == 99


def test_snapshots_from_cli_are_readable(tmp_path):
    out = tmp_path / "ba"
    assert main(["ba", "--config", str(CONFIGS / "ba_explicit.json"), "--out", str(out)]) == 0
    snaps = sorted(out.glob("*.gkmm"))
    assert snaps
    for p in snaps:
        s = read_snapshot(p)
        assert s.field.is_finite()


def test_csv_has_17_digit_rows(tmp_path):
    out = tmp_path / "p"
    main(["pauli", "--config", str(CONFIGS / "pauli.json"), "--out", str(out)])
    csvs = sorted(out.glob("*.csv"))
    assert csvs
    lines = csvs[0].read_text().splitlines()
    assert lines[0] == "x,y,value"
    x, y, v = (float(s) for s in lines[1].split(","))
    assert math.isfinite(v)
