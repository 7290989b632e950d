"""Plain-text persistence for level sets and run manifests.

Level-set file format: a header line ``N0 t0 n0 seed j``, one atom per line,
a ``--`` separator, then the structured atoms. Round-trips exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .construction import Construction, LevelSet, verify_construction
from .params import ConstructionParams, derive_params

SEPARATOR = "--"


class StorageError(ValueError):
    """Missing, corrupt, or inconsistent persisted data."""


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def level_to_text(params: ConstructionParams, level: LevelSet) -> str:
    lines = [f"{params.N0} {params.t0} {params.n0} {params.seed} {level.j}"]
    lines += [str(int(a)) for a in level.atoms]
    lines.append(SEPARATOR)
    lines += [str(int(a)) for a in level.structured]
    return "\n".join(lines) + "\n"


def write_level(path, params: ConstructionParams, level: LevelSet) -> None:
    atomic_write_text(path, level_to_text(params, level))


def parse_level_text(text: str, path="<string>"):
    lines = text.splitlines()
    if not lines:
        raise StorageError(f"{path}: empty level file")
    header = lines[0].split()
    if len(header) != 5:
        raise StorageError(f"{path}: bad header {lines[0]!r}")
    try:
        N0, t0, n0, seed, j = (int(x) for x in header)
    except ValueError:
        raise StorageError(f"{path}: non-integer header {lines[0]!r}") from None
    atoms, structured = [], []
    bucket = atoms
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line == SEPARATOR:
            if bucket is structured:
                raise StorageError(f"{path}:{lineno}: duplicate separator")
            bucket = structured
            continue
        try:
            bucket.append(int(line))
        except ValueError:
            raise StorageError(f"{path}:{lineno}: bad atom line {line!r}") from None
    if bucket is atoms:
        raise StorageError(f"{path}: missing separator")
    level = LevelSet(j=j, atoms=np.array(atoms, dtype=np.int64),
                     structured=np.array(structured, dtype=np.int64))
    return (N0, t0, n0, seed), level


def read_level(path):
    return parse_level_text(Path(path).read_text(), path=str(path))


def level_filename(j: int) -> str:
    return f"level_{j}.txt"


def write_construction(out_dir, con: Construction) -> list[str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for level in con.levels:
        p = out_dir / level_filename(level.j)
        write_level(p, con.params, level)
        paths.append(str(p))
    return paths


def load_construction(in_dir, validate=True) -> Construction:
    in_dir = Path(in_dir)
    manifest = read_manifest(in_dir)
    levels = []
    header0 = None
    j = 0
    while (in_dir / level_filename(j)).exists():
        header, level = read_level(in_dir / level_filename(j))
        if level.j != j:
            raise StorageError(f"{level_filename(j)}: header level {level.j} != {j}")
        if header0 is None:
            header0 = header
        elif header != header0:
            raise StorageError(f"{level_filename(j)}: header mismatch across levels")
        levels.append(level)
        j += 1
    if not levels:
        raise StorageError(f"no level files found in {in_dir}")
    N0, t0, n0, seed = header0
    overrides = {}
    if manifest and "params" in manifest:
        p = manifest["params"]
        overrides = {
            k: p[k]
            for k in ("c_eta", "c_rot", "ap_offset", "ap_gap", "k_budget",
                      "max_retries", "fft_budget")
            if k in p
        }
    params = derive_params(N0, t0, n0, j_max=len(levels) - 1, seed=seed, **overrides)
    con = Construction(params=params, levels=levels)
    if validate:
        try:
            verify_construction(con)
        except Exception as exc:
            raise StorageError(f"loaded construction is inconsistent: {exc}") from exc
    return con


MANIFEST_NAME = "manifest.json"


def write_manifest(out_dir, manifest: dict) -> str:
    path = Path(out_dir) / MANIFEST_NAME
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return str(path)


def read_manifest(in_dir) -> dict | None:
    path = Path(in_dir) / MANIFEST_NAME
    if not path.exists():
        return None
    return json.loads(path.read_text())
