"""Exponential sums and Fourier coefficients of the level measures.

Integer-frequency coefficients come from exact exponential sums (dense FFT
when the period fits the budget, direct evaluation otherwise); real-frequency
values use the closed sinc form. Decay bounds are verified against explicit
thresholds with the worst slack reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construction import Construction, LevelSet, structured_mask
from .params import ConstructionParams


class SpectralError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# exponential sums

def exp_sum(atoms, k, period, method="naive"):
    """S(k) = sum over atoms of exp(-2 pi i a k / period).

    ``method="naive"`` evaluates directly at the given k (scalar or array);
    ``method="fft"`` computes the dense transform once and indexes it at
    k mod period.
    """
    atoms = np.asarray(atoms, dtype=np.int64)
    if method == "naive":
        ks = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = np.zeros(len(ks), dtype=np.complex128)
        chunk = max(1, 2**22 // max(len(atoms), 1))
        for lo in range(0, len(ks), chunk):
            kc = ks[lo : lo + chunk]
            out[lo : lo + chunk] = np.exp(
                -2j * np.pi * ((atoms[:, None] * kc[None, :]) % period) / period
            ).sum(axis=0)
        return out[0] if np.isscalar(k) or np.ndim(k) == 0 else out
    if method == "fft":
        table = exp_sum_all(atoms, period)
        ks = np.asarray(k, dtype=np.int64) % period
        return table[ks]
    raise ValueError(f"unknown method {method!r}")


def exp_sum_all(atoms, period, fft_budget=2**26):
    """Dense table of S(k) for all k in [0, period) via one FFT."""
    if period > fft_budget:
        raise SpectralError(
            f"period {period} exceeds the dense transform budget {fft_budget}"
        )
    ind = np.zeros(period)
    ind[np.asarray(atoms, dtype=np.int64)] = 1.0
    return np.fft.fft(ind)


def prefactor(k, period):
    """(1 - e^{-2 pi i k/period}) / (2 pi i k/period), continued by 1 at k=0."""
    karr = np.atleast_1d(np.asarray(k, dtype=np.float64))
    z = karr / period
    out = np.ones(len(karr), dtype=np.complex128)
    nz = z != 0
    out[nz] = (1 - np.exp(-2j * np.pi * z[nz])) / (2j * np.pi * z[nz])
    return out[0] if np.ndim(k) == 0 else out


def restricted_atoms(params: ConstructionParams, level: LevelSet, ell: int) -> np.ndarray:
    """Atoms of the level whose top-ell digit prefix is structured."""
    return level.atoms[structured_mask(params, level, ell)]


# ---------------------------------------------------------------------------
# measure coefficients

def mu_hat(params: ConstructionParams, level: LevelSet, k, table=None):
    """Fourier coefficient of the level-j measure at integer frequency k."""
    period = params.period(level.j)
    if table is not None:
        s = table[np.asarray(k, dtype=np.int64) % period]
    else:
        s = exp_sum(level.atoms, k, period)
    return prefactor(k, period) * s * float(params.t) ** (-level.j)


def f_mu_hat(params: ConstructionParams, level: LevelSet, ell: int, k, table=None):
    """Fourier coefficient of the structured-window weighted measure."""
    if ell > level.j:
        raise ValueError(f"ell={ell} exceeds level j={level.j}")
    period = params.period(level.j)
    if table is not None:
        s = table[np.asarray(k, dtype=np.int64) % period]
    else:
        s = exp_sum(restricted_atoms(params, level, ell), k, period)
    return prefactor(k, period) * s * float(params.t) ** (-level.j)


def f_mu_hat_real(params: ConstructionParams, level: LevelSet, ell: int, xi):
    """Closed sinc-form transform at arbitrary real frequency xi."""
    atoms = restricted_atoms(params, level, ell)
    period = params.period(level.j)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    z = xi_arr / period
    out = np.zeros(len(xi_arr), dtype=np.complex128)
    chunk = max(1, 2**22 // max(len(atoms), 1))
    for lo in range(0, len(xi_arr), chunk):
        xc = xi_arr[lo : lo + chunk]
        out[lo : lo + chunk] = np.exp(
            -2j * np.pi * atoms[:, None] * (xc[None, :] / period)
        ).sum(axis=0)
    out *= np.exp(-1j * np.pi * z) * np.sinc(z) * float(params.t) ** (-level.j)
    return out[0] if np.ndim(xi) == 0 else out


# ---------------------------------------------------------------------------
# spectra

@dataclass
class Spectrum:
    j: int
    weight: str              # "mu" or "f_ell(<ell>)"
    ks: np.ndarray
    coefficients: np.ndarray

    def to_csv(self, path):
        from .storage import atomic_write_text

        lines = ["k,re,im,abs"]
        for k, c in zip(self.ks, self.coefficients):
            lines.append(
                f"{int(k)},{float(c.real)!r},{float(c.imag)!r},{float(abs(c))!r}"
            )
        atomic_write_text(path, "\n".join(lines) + "\n")


def compute_spectrum(params: ConstructionParams, level: LevelSet, ks,
                     ell=None) -> Spectrum:
    ks = np.asarray(ks, dtype=np.int64)
    period = params.period(level.j)
    atoms = level.atoms if ell in (None, 0) else restricted_atoms(params, level, ell)
    if period <= params.fft_budget:
        table = exp_sum_all(atoms, period, params.fft_budget)
        s = table[ks % period]
    else:
        s = exp_sum(atoms, ks, period)
    coeffs = prefactor(ks, period) * s * float(params.t) ** (-level.j)
    weight = "mu" if ell in (None, 0) else f"f_ell({ell})"
    return Spectrum(j=level.j, weight=weight, ks=ks, coefficients=coeffs)


# ---------------------------------------------------------------------------
# telescoping decay between consecutive levels

@dataclass
class TelescopeReport:
    j: int
    ell: int                  # 0 means the plain measure
    constant: float           # C used on the right-hand side
    max_ratio: float
    worst_k: int
    checked: int
    passed: bool


def telescope_check(params: ConstructionParams, lo: LevelSet, hi: LevelSet,
                    ks, ell: int = 0) -> TelescopeReport:
    """Verify |coef_{j+1}(k) - coef_j(k)| against the level-step envelope
    C * min(1, N^(j+1)/|k|) * t^(-(j+1)/2) * ln(8 N^(j+1)) with C = 2*c_rot.
    """
    if hi.j != lo.j + 1:
        raise ValueError("telescope_check needs consecutive levels")
    j = lo.j
    N, t = params.N, params.t
    ks = np.asarray(ks, dtype=np.int64)
    ks = ks[ks != 0]
    C = 2.0 * params.c_rot

    def coef(level):
        period = params.period(level.j)
        atoms = level.atoms if ell == 0 else restricted_atoms(params, level, ell)
        if period <= params.fft_budget and len(ks) > period // 4:
            table = exp_sum_all(atoms, period, params.fft_budget)
            s = table[ks % period]
        else:
            s = exp_sum(atoms, ks, period)
        return prefactor(ks, period) * s * float(t) ** (-level.j)

    lhs = np.abs(coef(hi) - coef(lo))
    envelope = np.minimum(1.0, N ** (j + 1) / np.abs(ks).astype(np.float64))
    rhs = C * envelope * t ** (-(j + 1) / 2) * math.log(8 * N ** (j + 1))
    ratio = lhs / rhs
    i = int(ratio.argmax())
    return TelescopeReport(
        j=j, ell=ell, constant=C, max_ratio=float(ratio[i]), worst_k=int(ks[i]),
        checked=len(ks), passed=bool(ratio[i] < 1.0),
    )


def trivial_bound_check(params: ConstructionParams, level: LevelSet, ell: int,
                        ks) -> dict:
    """Check |coef(k)| <= N^h t^(-ell/2) / (pi |k|) over nonzero frequencies."""
    ks = np.asarray(ks, dtype=np.int64)
    ks = ks[ks != 0]
    coeffs = np.abs(f_mu_hat(params, level, ell, ks))
    bound = (
        params.N**level.j
        * float(params.t) ** (-ell / 2)
        / (np.pi * np.abs(ks).astype(np.float64))
    )
    ratio = coeffs / bound
    i = int(ratio.argmax())
    return {
        "j": level.j, "ell": ell, "max_ratio": float(ratio[i]),
        "worst_k": int(ks[i]), "checked": len(ks),
        "passed": bool(ratio[i] <= 1.0 + 1e-12),
    }


# ---------------------------------------------------------------------------
# decay reports

@dataclass
class DecayReport:
    beta: float
    sup_constant: float
    dyadic_maxima: dict = field(default_factory=dict)   # octave -> max weighted coef
    fitted_exponent: float = float("nan")

    def to_json_dict(self):
        return {
            "beta": self.beta,
            "sup_constant": self.sup_constant,
            "dyadic_maxima": {str(k): v for k, v in self.dyadic_maxima.items()},
            "fitted_exponent": self.fitted_exponent,
        }


def decay_report(ks, coefficients, beta: float) -> DecayReport:
    """Octave-wise maxima of |coef(k)| (1+|k|)^(beta/2) and a power-law fit.

    The fitted exponent is the least-squares slope of log octave max of
    |coef| against log k; more negative than -beta/2 means faster decay
    than the target.
    """
    ks = np.abs(np.asarray(ks, dtype=np.int64))
    mags = np.abs(np.asarray(coefficients))
    keep = ks > 0
    ks, mags = ks[keep], mags[keep]
    if len(ks) == 0:
        raise SpectralError("decay_report needs a nonempty set of nonzero frequencies")
    weighted = mags * (1.0 + ks) ** (beta / 2)
    octaves = np.floor(np.log2(ks)).astype(int)
    table = {}
    raw_max = {}
    for m in range(octaves.min(), octaves.max() + 1):
        sel = octaves == m
        if sel.any():
            table[m] = float(weighted[sel].max())
            raw_max[m] = float(mags[sel].max())
    xs = np.array([m for m, v in raw_max.items() if v > 0], dtype=float)
    ys = np.log2([raw_max[int(m)] for m in xs])
    if len(xs) >= 2:
        slope = np.polyfit(xs, ys, 1)[0]
    else:
        slope = float("nan")
    return DecayReport(
        beta=beta,
        sup_constant=float(weighted.max()),
        dyadic_maxima=table,
        fitted_exponent=float(slope),
    )


# ---------------------------------------------------------------------------
# geometric series envelope

def series_lhs(params: ConstructionParams, k: int, tol=1e-15) -> float:
    """Sum over levels of min(1, N^(j+1)/|k|) t^(-(j+1)/2) ln(8 N^(j+1)),
    truncated once terms drop below tol."""
    if k == 0:
        raise ValueError("k must be nonzero")
    N, t = params.N, params.t
    total = 0.0
    j = 0
    while True:
        term = (
            min(1.0, N ** (j + 1) / abs(k))
            * t ** (-(j + 1) / 2)
            * math.log(8 * N ** (j + 1))
        )
        total += term
        if term < tol and N ** (j + 1) > abs(k):
            return total
        j += 1


def series_bound_check(params: ConstructionParams, beta: float, k: int,
                       calibration_k: int = 1) -> dict:
    """Compare the level-sum envelope against C |k|^(-beta/2) with C
    calibrated so the bound is tight at the calibration frequency."""
    if not 0 < beta < params.alpha:
        raise ValueError(f"need 0 < beta < alpha={params.alpha}")
    C = series_lhs(params, calibration_k) * abs(calibration_k) ** (beta / 2)
    lhs = series_lhs(params, k)
    rhs = C * abs(k) ** (-beta / 2)
    return {"lhs_sum": lhs, "rhs": rhs, "ratio": lhs / rhs, "constant": C}
