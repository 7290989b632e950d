"""Scalar parameters of the Cantor construction and their derived quantities.

All set-level arithmetic downstream works with exact integers; parameters
are validated here so the rest of the package can assume consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

# Frequencies are manipulated as int64 indices into dense FFT arrays, so the
# largest period N^(j_max+1) must stay below 2^62.
MAX_FREQ_BITS = 62


class ParamError(ValueError):
    """Invalid or inconsistent construction parameters."""


@dataclass(frozen=True)
class ConstructionParams:
    N0: int
    t0: int
    n0: int
    N: int          # N0^(2 n0), branching base of the Cantor iteration
    t: int          # t0^(2 n0), digits kept per block
    alpha: float    # log t0 / log N0
    j_max: int
    seed: int
    c_eta: float = 192.0     # coefficient in the block-deviation threshold
    c_rot: float = 6144.0    # coefficient in the rotation-acceptance thresholds
    ap_offset: int = 0       # first element of the embedded progression
    ap_gap: int = 1          # common difference of the embedded progression
    k_budget: int = 2**20    # max frequencies checked exhaustively
    max_retries: int = 64
    fft_budget: int = 2**26  # max dense transform length

    @property
    def sqrt_t(self) -> int:
        return self.t0**self.n0

    def alpha_fraction(self):
        """Exact rational value of alpha when t0 is a perfect power of a
        common base with N0 (e.g. alpha = 1/2 for N0=4, t0=2); None otherwise."""
        for q in range(1, 65):
            x = self.t0**q
            p = round(q * self.alpha)
            if p >= 1 and self.N0**p == x:
                return Fraction(p, q)
        return None

    def period(self, j: int) -> int:
        return self.N**j

    def eta(self, j: int) -> float:
        """Block-deviation threshold for the level-(j+1) base block."""
        return math.sqrt(self.c_eta / self.t * math.log(8 * self.N ** (j + 2)))

    def lambda_rot(self, j: int) -> float:
        """Rotation-acceptance threshold for the full atom sum at level j."""
        return self.c_rot * self.t ** (-(j + 1) / 2) * math.log(8 * self.N ** (j + 1))

    def lambda_rot_ell(self, j: int, ell: int) -> float:
        """Rotation-acceptance threshold for the sum over structured atoms."""
        return (
            self.c_rot
            * self.t ** (-(j + 1) / 2 + ell / 4)
            * math.log(8 * self.N ** (j + 1))
        )

    def as_dict(self) -> dict:
        return {
            "N0": self.N0, "t0": self.t0, "n0": self.n0,
            "N": self.N, "t": self.t, "alpha": self.alpha,
            "j_max": self.j_max, "seed": self.seed,
            "c_eta": self.c_eta, "c_rot": self.c_rot,
            "ap_offset": self.ap_offset, "ap_gap": self.ap_gap,
            "k_budget": self.k_budget, "max_retries": self.max_retries,
            "fft_budget": self.fft_budget,
        }


def derive_params(N0, t0, n0, j_max=5, seed=0, **overrides) -> ConstructionParams:
    """Derive all construction parameters from the base triple (N0, t0, n0).

    The default progression is {0, g, 2g, ...} with the widest gap that fits
    in [0, N): g = floor((N-1)/(sqrt(t)-1)).
    """
    N0, t0, n0, j_max = int(N0), int(t0), int(n0), int(j_max)
    if not (1 < t0 < N0):
        raise ParamError(f"need 1 < t0 < N0, got t0={t0}, N0={N0}")
    if n0 < 1:
        raise ParamError(f"need n0 >= 1, got {n0}")
    if j_max < 0:
        raise ParamError(f"need j_max >= 0, got {j_max}")
    N = N0 ** (2 * n0)
    t = t0 ** (2 * n0)
    if N ** (j_max + 1) >= 2**MAX_FREQ_BITS:
        raise ParamError(
            f"N^(j_max+1) = {N}^{j_max + 1} exceeds the exact integer "
            f"width ({MAX_FREQ_BITS} bits) used for frequencies"
        )
    alpha = math.log(t0) / math.log(N0)
    sqrt_t = t0**n0
    if sqrt_t >= N:
        raise ParamError(f"progression of length sqrt(t)={sqrt_t} cannot fit in [0, {N})")

    if "ap_gap" not in overrides:
        overrides["ap_gap"] = (N - 1) // (sqrt_t - 1) if sqrt_t > 1 else 1
    params = ConstructionParams(
        N0=N0, t0=t0, n0=n0, N=N, t=t, alpha=alpha, j_max=j_max, seed=int(seed),
        **overrides,
    )
    validate_progression(params)
    return params


def validate_progression(params: ConstructionParams) -> None:
    if params.ap_offset < 0 or params.ap_gap < 1:
        raise ParamError("progression needs ap_offset >= 0 and ap_gap >= 1")
    last = params.ap_offset + (params.sqrt_t - 1) * params.ap_gap
    if last > params.N - 1:
        raise ParamError(
            f"progression exits [0, {params.N}): last element {last}"
        )


def make_progression(params: ConstructionParams) -> list[int]:
    """The embedded arithmetic progression of length sqrt(t) inside [0, N)."""
    validate_progression(params)
    return [params.ap_offset + i * params.ap_gap for i in range(params.sqrt_t)]


def with_overrides(params: ConstructionParams, **kw) -> ConstructionParams:
    out = replace(params, **kw)
    validate_progression(out)
    return out
