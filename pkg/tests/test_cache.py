import json

import numpy as np
import pytest

import oracles
from boundary_lab import cache
from boundary_lab.errors import CacheError
from boundary_lab.tree import TreeModel, words_array


def test_build_counts_and_lines(tmp_path, F2):
    status = cache.build_cache(F2, 10, tmp_path)
    assert set(status.values()) == {"written"}
    files = sorted(tmp_path.glob("*_sphere_*.txt"))
    assert len(files) == 11
    lines = cache.sphere_path(tmp_path, F2, 10).read_text().splitlines()
    assert lines[0] == "free,2,10,78732"
    assert len(lines) - 1 == 78732
    assert lines[1:6] == oracles.sphere(2, 10)[:5]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest) == 11


def test_idempotent(tmp_path, F2):
    cache.build_cache(F2, 4, tmp_path)
    stamp = {p: p.stat().st_mtime_ns for p in tmp_path.glob("*.txt")}
    status = cache.build_cache(F2, 4, tmp_path)
    assert set(status.values()) == {"kept"}
    assert {p: p.stat().st_mtime_ns for p in tmp_path.glob("*.txt")} == stamp


def test_corrupted_file_regenerated(tmp_path, F2):
    cache.build_cache(F2, 4, tmp_path)
    path = cache.sphere_path(tmp_path, F2, 3)
    good = path.read_bytes()
    path.write_bytes(good.replace(b",36\n", b",35\n", 1))
    with pytest.raises(CacheError, match="checksum"):
        cache.load_sphere(F2, 3, tmp_path)
    status = cache.build_cache(F2, 4, tmp_path)
    assert status[3] == "regenerated" and status[2] == "kept"
    assert path.read_bytes() == good


def test_parse_rejects_bad_content(F2):
    data = cache.render_sphere(F2, 2)
    assert np.array_equal(cache.parse_sphere(F2, 2, data), words_array(F2, 2))
    with pytest.raises(CacheError):
        cache.parse_sphere(F2, 2, data.replace(b"ab", b"aA", 1))
    with pytest.raises(CacheError):
        cache.parse_sphere(F2, 3, data)
    with pytest.raises(CacheError):
        cache.parse_sphere(F2, 2, b"")


def test_env_var_and_prime(tmp_path, monkeypatch):
    monkeypatch.setenv(cache.ENV_VAR, str(tmp_path))
    assert cache.default_cache_dir() == tmp_path
    F3 = TreeModel.free(3)
    cache.build_cache(F3, 3)
    assert (tmp_path / "free-3_sphere_03.txt").exists()
    assert cache.prime_from_cache(F3) == [0, 1, 2, 3]
    assert np.array_equal(cache.load_sphere(F3, 2), words_array(F3, 2))


def test_prime_missing_dir(tmp_path, F2):
    assert cache.prime_from_cache(F2, tmp_path / "nowhere") == []
