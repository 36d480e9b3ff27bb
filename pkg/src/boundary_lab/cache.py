"""On-disk sphere caches.

One text file per sphere: a header line ``model,k,n,count`` followed by one
reduced word per line in enumeration order (the identity is an empty line).
A ``manifest.json`` next to the files records their sha256 digests; a file
whose digest or content does not check out is regenerated.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .errors import CacheError
from .tree import TreeModel, indices_of, prime_sphere, words_array

ENV_VAR = "BOUNDARY_LAB_CACHE_DIR"
MANIFEST = "manifest.json"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "boundary_lab"


def sphere_path(cache_dir, model: TreeModel, n: int) -> Path:
    return Path(cache_dir) / f"{model.kind}-{model.rank}_sphere_{n:02d}.txt"


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def render_sphere(model: TreeModel, n: int) -> bytes:
    arr = words_array(model, n)
    sym = np.array(model.symbols)
    lines = [f"{model.kind},{model.rank},{n},{len(arr)}"]
    if n == 0:
        lines.append("")
    else:
        lines.extend("".join(row) for row in sym[arr])
    return ("\n".join(lines) + "\n").encode()


def parse_sphere(model: TreeModel, n: int, data: bytes) -> np.ndarray:
    """Decode a cache file; raise CacheError on any inconsistency."""
    lines = data.decode().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CacheError("empty cache file")
    head = lines[0].split(",")
    expected = [model.kind, str(model.rank), str(n), str(model.sphere_size(n))]
    if head != expected:
        raise CacheError(f"bad header {lines[0]!r}, expected {','.join(expected)!r}")
    body = lines[1:]
    if len(body) != model.sphere_size(n):
        raise CacheError(f"bad count: {len(body)} words, header says {head[3]}")
    if n == 0:
        if body != [""]:
            raise CacheError("sphere 0 must hold the identity only")
        return np.zeros((1, 0), dtype=np.int8)
    code = model._code
    try:
        arr = np.array([[code[ch] for ch in line] for line in body], dtype=np.int8)
    except KeyError as exc:
        raise CacheError(f"unknown letter {exc.args[0]!r}") from None
    if arr.shape != (len(body), n):
        raise CacheError("word of wrong length in cache file")
    if n > 1 and (np.asarray(model.inv)[arr[:, :-1]] == arr[:, 1:]).any():
        raise CacheError("unreduced word in cache file")
    if (np.diff(indices_of(model, arr)) != 1).any():
        raise CacheError("cache file words out of enumeration order")
    return arr


def _load_manifest(cache_dir: Path) -> dict:
    path = cache_dir / MANIFEST
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError:
        return {}


def _write_manifest(cache_dir: Path, manifest: dict):
    tmp = cache_dir / (MANIFEST + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    tmp.replace(cache_dir / MANIFEST)


def build_cache(model: TreeModel, n_max: int, cache_dir=None) -> dict:
    """Write or refresh sphere files 0..n_max.

    Returns ``{n: status}`` with status ``written``, ``kept`` or
    ``regenerated`` (the existing file failed its checksum or validation).
    """
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    manifest = _load_manifest(cache_dir)
    status = {}
    for n in range(n_max + 1):
        path = sphere_path(cache_dir, model, n)
        key = path.name
        if path.exists():
            data = path.read_bytes()
            if manifest.get(key) == _digest(data):
                try:
                    parse_sphere(model, n, data)
                    status[n] = "kept"
                    continue
                except CacheError:
                    pass
            status[n] = "regenerated"
        else:
            status[n] = "written"
        data = render_sphere(model, n)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(data)
        tmp.replace(path)
        manifest[key] = _digest(data)
    _write_manifest(cache_dir, manifest)
    return status


def load_sphere(model: TreeModel, n: int, cache_dir=None) -> np.ndarray:
    """Read a cached sphere after verifying its checksum."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = sphere_path(cache_dir, model, n)
    if not path.exists():
        raise CacheError(f"no cache file {path}")
    data = path.read_bytes()
    want = _load_manifest(cache_dir).get(path.name)
    if want != _digest(data):
        raise CacheError(f"checksum mismatch for {path}")
    return parse_sphere(model, n, data)


def prime_from_cache(model: TreeModel, cache_dir=None, n_max: int = 64) -> list[int]:
    """Install every valid cached sphere of ``model``; returns the radii loaded."""
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    loaded = []
    if not (cache_dir / MANIFEST).exists():
        return loaded
    for n in range(n_max + 1):
        if not sphere_path(cache_dir, model, n).exists():
            break
        try:
            arr = load_sphere(model, n, cache_dir)
        except CacheError:
            break
        arr.flags.writeable = False
        prime_sphere(model, n, arr)
        loaded.append(n)
    return loaded
