"""Level-by-level construction of the random Cantor digit sets.

Atoms at level j are exact integers in [0, N^j); the integer a encodes the
point a / N^j. Each level carries a structured sublist obtained by iterating
an arithmetic progression, and the random part of the construction is
verified against explicit deviation thresholds with retry on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ConstructionParams, make_progression


class ConstructionError(RuntimeError):
    """Verification-and-retry exhausted or an internal invariant broke."""


@dataclass
class LevelSet:
    j: int
    atoms: np.ndarray        # sorted int64, values in [0, N^j)
    structured: np.ndarray   # sorted int64 sublist of atoms


@dataclass
class BaseBlock:
    members: list[int]       # sorted, t distinct integers in [0, N)
    eta: float
    verified_k_count: int
    mode: str                # "exhaustive" | "sampled" | "trivial"


@dataclass
class RotationAssignment:
    j: int
    x_of_atom: np.ndarray    # aligned with the level's atoms, values in [0, N)
    lambda_j: float
    lambda_j_ell: list[float]
    retries_used: int
    verified_k_count: int = 0
    mode: str = "sampled"


@dataclass
class Construction:
    params: ConstructionParams
    levels: list[LevelSet]
    audit: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------------------
# frequency sets

def frequency_set(params: ConstructionParams, period: int, rng) -> tuple[np.ndarray, str]:
    """Frequencies to verify a bound on, with the mode actually achieved.

    Exhaustive over [0, period) when that fits the budget; otherwise a
    declared deterministic sample: all k < 2^16, a seeded uniform sample,
    and the N-adic multiples period/N * c and period/N^2 * c.
    """
    if period <= params.k_budget:
        return np.arange(period, dtype=np.int64), "exhaustive"
    parts = [np.arange(min(2**16, period), dtype=np.int64)]
    parts.append(rng.integers(0, period, size=4096, dtype=np.int64))
    step = period // params.N
    parts.append(np.arange(params.N, dtype=np.int64) * step)
    step2 = period // params.N**2
    if step2 > 0:
        n2 = min(params.N**2, 2**12)
        parts.append(np.arange(n2, dtype=np.int64) * step2)
    ks = np.unique(np.concatenate(parts))
    return ks, "sampled"


# ---------------------------------------------------------------------------
# base blocks

def rotate_block(members, x, N) -> list[int]:
    return sorted((x + y) % N for y in members)


def uniform_sum(ks: np.ndarray, period: int, N: int) -> np.ndarray:
    """Exponential sum of the full digit set {0..N-1}/period at frequencies ks."""
    ks = np.asarray(ks, dtype=np.int64)
    out = np.empty(len(ks), dtype=np.complex128)
    w = np.exp(-2j * np.pi * (ks % period) / period)
    full = ks % period == 0
    out[full] = N
    nz = ~full
    out[nz] = (1 - w[nz] ** N) / (1 - w[nz])
    return out


def block_deviations(members, ks, period, N, t, fft_budget=0) -> np.ndarray:
    """Matrix D[x, i] = S_{B_x}(k_i)/t - S_{[N]}(k_i)/N for every rotation x.

    A dense FFT of the rotated indicator replaces the direct sum when the
    period fits the budget and the frequency set is large enough to pay for it.
    """
    ks = np.asarray(ks, dtype=np.int64)
    base = uniform_sum(ks, period, N) / N
    mem = np.asarray(members, dtype=np.int64)
    out = np.empty((N, len(ks)), dtype=np.complex128)
    use_fft = period <= fft_budget and len(ks) * len(mem) >= period
    kmod = ks % period if use_fft else None
    for x in range(N):
        rot = (x + mem) % N
        if use_fft:
            ind = np.zeros(period)
            ind[rot] = 1.0
            s = np.fft.fft(ind)[kmod]
        else:
            s = np.exp(
                -2j * np.pi * ((rot[:, None] * ks[None, :]) % period) / period
            ).sum(axis=0)
        out[x] = s / t - base
    return out


def _fix_cardinality(members: set[int], t: int, N: int) -> list[int]:
    # deterministic: drop largest surplus members, add smallest absent ones
    members = set(members)
    while len(members) > t:
        members.discard(max(members))
    absent = (m for m in range(N) if m not in members)
    while len(members) < t:
        members.add(next(absent))
    return sorted(members)


def build_base_block(params: ConstructionParams, j: int, rng) -> BaseBlock:
    """Digit block for level j+1, verified against the deviation threshold.

    When eta_j >= 2 every deviation term is trivially within bounds and a
    deterministic block (progression plus smallest fillers) is returned.
    """
    if j < 1:
        raise ValueError(f"base blocks exist for j >= 1, got {j}")
    N, t = params.N, params.t
    eta = params.eta(j)
    if eta >= 2:
        members = _fix_cardinality(set(make_progression(params)), t, N)
        return BaseBlock(members=members, eta=eta, verified_k_count=0, mode="trivial")

    period = N ** (j + 1)
    ks, mode = frequency_set(params, period, rng)
    p = t / N
    worst = None
    for _ in range(params.max_retries):
        draw = np.flatnonzero(rng.random(N) < p)
        if len(draw) == 0:
            continue
        dev = np.abs(
            block_deviations(draw, ks, period, N, t, params.fft_budget)
        ).max()
        if dev > eta / 2:
            worst = dev
            continue
        members = _fix_cardinality(set(int(m) for m in draw), t, N)
        dev2 = np.abs(
            block_deviations(members, ks, period, N, t, params.fft_budget)
        ).max()
        if dev2 > eta:
            raise ConstructionError(
                f"deviation {dev2:.4g} > eta={eta:.4g} after cardinality fix at j={j}"
            )
        return BaseBlock(members=members, eta=eta,
                         verified_k_count=len(ks) * N, mode=mode)
    raise ConstructionError(
        f"base block retries exhausted at j={j}: worst deviation {worst:.4g} "
        f"vs threshold {eta / 2:.4g}"
    )


# ---------------------------------------------------------------------------
# rotations

def structured_mask(params: ConstructionParams, level: LevelSet, ell: int) -> np.ndarray:
    """Boolean mask of the level's atoms whose top-ell digit prefix is structured."""
    if ell == 0:
        return np.ones(len(level.atoms), dtype=bool)
    if ell > level.j:
        raise ValueError(f"ell={ell} exceeds level j={level.j}")
    shift = params.N ** (level.j - ell)
    prefixes = level.atoms // shift
    struct_prefixes = np.unique(level.structured // shift)
    return np.isin(prefixes, struct_prefixes)


def _chi_sums(params, level, dev_by_x, x_of_atom, ks, masks):
    """For each atom mask, the sum over masked atoms of chi_a(k) at every k.

    The atom phase e^{-2 pi i a k / N^j} has period N^j in k, so grouping
    atoms by their rotation value and running one dense FFT per group costs
    O(N^j log N^j) per group instead of O(|atoms| |ks|) overall.
    """
    N = params.N
    period_j = params.N**level.j
    atoms = level.atoms
    nk = len(ks)
    sums = [np.zeros(nk, dtype=np.complex128) for _ in masks]
    use_fft = period_j <= params.fft_budget and nk * len(atoms) > 4 * period_j
    if use_fft:
        kmod = ks % period_j
        for x in range(N):
            in_x = x_of_atom == x
            if not in_x.any():
                continue
            dev = dev_by_x[x]
            for s, mask in zip(sums, masks):
                sel = atoms[in_x & mask]
                if len(sel) == 0:
                    continue
                ind = np.zeros(period_j)
                ind[sel] = 1.0
                s += np.fft.fft(ind)[kmod] * dev
        return sums
    chunk = max(1, 2**22 // max(len(atoms), 1))
    for lo in range(0, nk, chunk):
        kc = ks[lo : lo + chunk]
        phase = np.exp(-2j * np.pi * ((atoms[:, None] * kc[None, :]) % period_j) / period_j)
        rows = phase * dev_by_x[x_of_atom][:, lo : lo + chunk]
        for s, mask in zip(sums, masks):
            s[lo : lo + chunk] = rows[mask].sum(axis=0)
    return sums


def choose_rotations(params: ConstructionParams, level: LevelSet,
                     base_block: BaseBlock, rng) -> RotationAssignment:
    """Draw per-atom rotations and accept only when every deviation sum stays
    strictly below its threshold on the checked frequency set."""
    N, t, j = params.N, params.t, level.j
    period = N ** (j + 1)
    ks, mode = frequency_set(params, period, rng)
    lam = params.lambda_rot(j)
    lams = [params.lambda_rot_ell(j, ell) for ell in range(1, j + 1)]
    dev_by_x = block_deviations(base_block.members, ks, period, N, t,
                                params.fft_budget)

    masks = [np.ones(len(level.atoms), dtype=bool)]
    masks += [structured_mask(params, level, ell) for ell in range(1, j + 1)]

    worst = None
    for attempt in range(params.max_retries):
        xs = rng.integers(0, N, size=len(level.atoms))
        sums = _chi_sums(params, level, dev_by_x, xs, ks, masks)
        ok = True
        for ell, s in enumerate(sums):
            scale = t ** (-j + ell / 2)
            thresh = lam if ell == 0 else lams[ell - 1]
            m = np.abs(scale * s).max()
            if m >= thresh:
                ok = False
                i = int(np.abs(scale * s).argmax())
                worst = (m, thresh, int(ks[i]), ell)
                break
        if ok:
            return RotationAssignment(
                j=j, x_of_atom=xs, lambda_j=lam, lambda_j_ell=lams,
                retries_used=attempt, verified_k_count=len(ks), mode=mode,
            )
    m, thresh, k, ell = worst
    raise ConstructionError(
        f"rotation retries exhausted at j={j}: |sum|={m:.4g} >= {thresh:.4g} "
        f"at k={k}, ell={ell}"
    )


# ---------------------------------------------------------------------------
# assembling levels

def patch_structured(base_block: BaseBlock, x_a: int, progression, params) -> list[int]:
    """Rotated block with the progression forced in, cardinality kept at t.

    Surplus non-progression members are removed largest-first.
    """
    N, t = params.N, params.t
    block = set(rotate_block(base_block.members, x_a, N))
    pset = set(progression)
    out = block | pset
    extras = sorted(out - pset)
    while len(out) > t:
        out.discard(extras.pop())
    if len(out) != t or not pset <= out:
        raise ConstructionError("patched block lost the progression or cardinality")
    return sorted(out)


def build_level(params: ConstructionParams, construction: Construction, rng) -> LevelSet:
    """Extend the construction by one level and append the audit record."""
    level = construction.levels[-1]
    j = level.j
    N, t = params.N, params.t
    progression = make_progression(params)

    if j == 0:
        members = _fix_cardinality(set(progression), t, N)
        new = LevelSet(
            j=1,
            atoms=np.array(members, dtype=np.int64),
            structured=np.array(sorted(progression), dtype=np.int64),
        )
        construction.audit.append({"j": 1, "mode": "deterministic", "retries": 0})
    else:
        base = build_base_block(params, j, rng)
        rot = choose_rotations(params, level, base, rng)
        struct_set = set(int(a) for a in level.structured)
        atoms_out = []
        struct_out = []
        for a, x in zip(level.atoms, rot.x_of_atom):
            a = int(a)
            if a in struct_set:
                digits = patch_structured(base, int(x), progression, params)
                struct_out.extend(a * N + m for m in progression)
            else:
                digits = rotate_block(base.members, int(x), N)
            atoms_out.extend(a * N + m for m in digits)
        new = LevelSet(
            j=j + 1,
            atoms=np.array(sorted(atoms_out), dtype=np.int64),
            structured=np.array(sorted(struct_out), dtype=np.int64),
        )
        construction.audit.append({
            "j": j + 1,
            "mode": base.mode,
            "eta": base.eta,
            "block_verified_k": base.verified_k_count,
            "rotation_mode": rot.mode,
            "rotation_verified_k": rot.verified_k_count,
            "retries": rot.retries_used,
            "lambda_j": rot.lambda_j,
        })

    construction.levels.append(new)
    check_level_invariants(params, construction.levels[-2], new)
    return new


def build_construction(params: ConstructionParams) -> Construction:
    """Build levels 0..j_max deterministically from (params, seed)."""
    rng = np.random.default_rng(params.seed)
    root = LevelSet(j=0, atoms=np.array([0], dtype=np.int64),
                    structured=np.array([0], dtype=np.int64))
    con = Construction(params=params, levels=[root])
    for _ in range(params.j_max):
        build_level(params, con, rng)
    return con


# ---------------------------------------------------------------------------
# invariants

def check_level_invariants(params: ConstructionParams, prev: LevelSet | None,
                           level: LevelSet) -> None:
    """Raise ConstructionError on any cardinality, range, order or nesting breach."""
    N, t = params.N, params.t
    j = level.j
    a, s = level.atoms, level.structured
    if len(a) != t**j:
        raise ConstructionError(f"level {j}: |atoms|={len(a)} != t^j={t**j}")
    if len(s) != params.sqrt_t**j:
        raise ConstructionError(
            f"level {j}: |structured|={len(s)} != sqrt(t)^j={params.sqrt_t ** j}"
        )
    for arr, name in ((a, "atoms"), (s, "structured")):
        if len(arr) and (arr[0] < 0 or arr[-1] >= N**j):
            raise ConstructionError(f"level {j}: {name} out of [0, N^j)")
        if np.any(np.diff(arr) <= 0):
            raise ConstructionError(f"level {j}: {name} not strictly sorted")
    if not set(s.tolist()) <= set(a.tolist()):
        raise ConstructionError(f"level {j}: structured not a subset of atoms")
    if prev is not None:
        if not set((a // N).tolist()) <= set(prev.atoms.tolist()):
            raise ConstructionError(f"level {j}: nesting breach")
        # structured nesting: v structured iff prefix structured and digit in P
        pset = set(make_progression(params))
        expected = {
            int(b) * N + m for b in prev.structured for m in pset
        }
        if expected != set(s.tolist()):
            raise ConstructionError(f"level {j}: structured nesting breach")


def verify_construction(con: Construction) -> None:
    for prev, level in zip([None] + con.levels[:-1], con.levels):
        check_level_invariants(con.params, prev, level)
