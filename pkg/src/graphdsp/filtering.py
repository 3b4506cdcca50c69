"""Polynomial filters in the graph shift.

A filter is a polynomial h(A) = h0 I + h1 A + ... + hL A^L of the adjacency,
applied to a signal with L shift multiplications (Horner's rule) instead of
ever forming matrix powers.  Design runs the other way: pick desired response
values on the spectrum and solve the Vandermonde system for the taps in the
least-squares sense.  Ideal low/high/band-pass targets are expressed through
the variation ordering of the frequencies, so they make sense for complex
spectra too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import Graph, GraphSignal, _check_bound, _freeze
from .spectral import FrequencyOrdering, SpectralBasis, order_frequencies

DISTINCT_FREQ_TOL = 1e-12
DEDUP_FREQ_TOL = 1e-10
EXACT_FIT_RTOL = 1e-8

FILTER_KINDS = ("lowpass", "highpass", "bandpass")


@dataclass(frozen=True, eq=False)
class GraphFilter:
    """Tap vector (h0 ... hL) of a degree-L polynomial filter."""

    taps: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.taps)
        t = t.astype(complex) if np.iscomplexobj(t) else t.astype(float)
        if t.ndim != 1 or t.shape[0] < 1:
            raise ValueError("taps must be a non-empty vector")
        if not np.all(np.isfinite(t)):
            raise ValueError("taps must be finite")
        object.__setattr__(self, "taps", _freeze(t))

    @property
    def degree(self):
        return self.taps.shape[0] - 1

    def __repr__(self):
        return f"GraphFilter(degree={self.degree})"


@dataclass(frozen=True, eq=False)
class TargetResponse:
    """Desired filter values attached to pairwise-distinct spectrum points."""

    frequencies: np.ndarray
    desired: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=complex)
        d = np.asarray(self.desired, dtype=complex)
        if f.ndim != 1 or f.shape[0] < 1 or f.shape != d.shape:
            raise ValueError("frequencies and desired must be matching vectors")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(d))):
            raise ValueError("target response must be finite")
        if f.shape[0] > 1:
            gap = np.abs(f[:, None] - f[None, :])
            np.fill_diagonal(gap, np.inf)
            if gap.min() <= DISTINCT_FREQ_TOL:
                raise ValueError(
                    f"frequencies must be pairwise distinct "
                    f"(closest pair {gap.min():.3e} apart)"
                )
        object.__setattr__(self, "frequencies", _freeze(f))
        object.__setattr__(self, "desired", _freeze(d))

    @property
    def m(self):
        return self.frequencies.shape[0]


@dataclass(frozen=True, eq=False)
class FilterDesign:
    """Least-squares fit of a tap vector to a target response."""

    filter: GraphFilter
    residual: float
    achieved: np.ndarray


def apply_filter(g: Graph, f: GraphFilter, s: GraphSignal,
                 normalized=True) -> GraphSignal:
    """Filter a signal: h(A)s through iterated shifts, Horner style.

    With ``normalized`` (the default) the polynomial is evaluated in the
    spectral-radius-scaled shift A/|lambda_max| rather than the raw
    adjacency.
    """
    _check_bound(g, s)
    a = g.adjacency
    if normalized:
        rho = g.spectral_radius
        if rho == 0.0:
            raise ValueError("cannot normalize a graph with zero adjacency")
        a = a / rho
    taps = f.taps
    out = taps[-1] * s.values
    for h in taps[-2::-1]:
        out = a @ out + h * s.values
    return GraphSignal(out, g)


def frequency_response(b: SpectralBasis, f: GraphFilter) -> np.ndarray:
    """Filter value h(lam) at every eigenvalue of the basis, in basis order."""
    return np.polyval(f.taps[::-1], b.eigenvalues)


def design_filter(t: TargetResponse, degree: int) -> FilterDesign:
    """Fit taps to a target response via the M x (degree+1) Vandermonde system.

    Solved by column-pivoted orthogonal factorization, never the normal
    equations; underdetermined systems get the minimum-norm tap vector.
    When the system should be solvable exactly (M <= degree+1) but the fit
    misses by more than a relative 1e-8, the design is refused instead of
    returning silently wrong taps.
    """
    if degree < 0:
        raise ValueError(f"filter degree must be >= 0, got {degree}")
    vand = np.vander(t.frequencies, degree + 1, increasing=True)
    taps, _, _, _ = scipy.linalg.lstsq(vand, t.desired, lapack_driver="gelsy")
    achieved = vand @ taps
    residual = float(np.linalg.norm(achieved - t.desired))
    if t.m <= degree + 1 and residual > EXACT_FIT_RTOL * np.linalg.norm(t.desired):
        raise ValueError(
            f"Vandermonde system too ill-conditioned for an exact fit "
            f"(residual {residual:.3e} with M={t.m}, L={degree})"
        )
    if np.iscomplexobj(taps) and np.all(taps.imag == 0.0):
        taps = taps.real
    return FilterDesign(filter=GraphFilter(taps), residual=residual,
                        achieved=_freeze(achieved))


def _distinct_by_rank(eigenvalues, order):
    """Walk the spectrum in rank order, keeping first representatives of
    numerically repeated eigenvalues."""
    kept = []
    for i in order:
        lam = eigenvalues[i]
        if all(abs(lam - mu) > DEDUP_FREQ_TOL for mu in kept):
            kept.append(lam)
    return np.array(kept, dtype=complex)


def ideal_response(ordering: FrequencyOrdering, eigenvalues, kind,
                   band=None) -> TargetResponse:
    """Ideal pass/stop target over the distinct frequencies of a spectrum.

    ``kind`` is "lowpass" (unit response on the floor(M/2) lowest-variation
    frequencies), "highpass" (the elementwise complement), or "bandpass"
    with ``band=(lo, hi)`` passing the inclusive rank interval of the
    variation ordering.
    """
    w = np.asarray(eigenvalues, dtype=complex)
    order = np.asarray(ordering.order)
    if sorted(order.tolist()) != list(range(w.shape[0])):
        raise ValueError("ordering is not a permutation of the spectrum indices")
    freqs = _distinct_by_rank(w, order)
    m = freqs.shape[0]
    desired = np.zeros(m)
    kind = str(kind).lower()
    if kind != "bandpass" and band is not None:
        raise ValueError(f"band is only meaningful for bandpass, not {kind}")
    if kind == "lowpass":
        desired[: m // 2] = 1.0
    elif kind == "highpass":
        desired[m // 2:] = 1.0
    elif kind == "bandpass":
        if band is None:
            raise ValueError("bandpass needs a band=(lo, hi) rank interval")
        lo, hi = (int(v) for v in band)
        if not 0 <= lo <= hi < m:
            raise ValueError(
                f"band ({lo}, {hi}) is empty or out of range for {m} frequencies"
            )
        desired[lo:hi + 1] = 1.0
    else:
        raise ValueError(f"kind must be one of {FILTER_KINDS}, got {kind!r}")
    if not desired.any():
        raise ValueError(f"{kind} band is empty for {m} distinct frequencies")
    return TargetResponse(freqs, desired)


def design_ideal_filter(b: SpectralBasis, kind, degree: int, band=None, *,
                        normalized=True, form="tv") -> FilterDesign:
    """Order the basis' spectrum, build the ideal target, and fit taps.

    By default the target is placed on the unit-spectral-radius frequencies
    lambda/|lambda_max| so the Vandermonde entries stay bounded by one in
    modulus; pass normalized=False to design against the raw spectrum.
    """
    ordering = order_frequencies(b, form)
    w = b.eigenvalues / b.lambda_max_abs if normalized else b.eigenvalues
    target = ideal_response(ordering, w, kind, band)
    return design_filter(target, degree)
