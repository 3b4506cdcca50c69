"""End-to-end pipelines: spectral anomaly detection and label regularization.

The detector high-pass filters sensor snapshots and flags Fourier
coefficients that exceed a threshold calibrated on recent history.  The
classifier treats two-class labels as a graph signal and minimizes signal
variation plus a fidelity penalty on the known labels, which reduces to one
symmetric positive-definite linear solve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import scipy.sparse.linalg

from .filtering import GraphFilter, apply_filter
from .graph import Graph, GraphSignal, LabelSignal, _freeze, laplacian
from .spectral import SpectralBasis, gft

DIRECT_SOLVE_MAX_N = 2000
REGULARIZER_FORMS = ("shift", "laplacian")
CALIBRATIONS = ("max", "median")


class SingularSystemError(Exception):
    """The regularization system has no unique minimizer.

    ``component`` holds the node indices of an unlabeled connected
    component when one could be identified as the cause.
    """

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


@dataclass(frozen=True)
class DetectorConfig:
    """High-pass filter plus thresholding policy for anomaly detection.

    The threshold is ``threshold_scale`` times the largest high-pass
    Fourier coefficient magnitude seen over the last ``window`` calibration
    snapshots; ``calibration="median"`` swaps the max across snapshots for
    a median, for histories that may themselves contain bad days.
    """

    filter: GraphFilter
    window: int = 3
    threshold_scale: float = 1.0
    calibration: str = "max"

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not self.threshold_scale > 0:
            raise ValueError("threshold_scale must be positive")
        if self.calibration not in CALIBRATIONS:
            raise ValueError(f"calibration must be one of {CALIBRATIONS}")


@dataclass(frozen=True, eq=False)
class DetectionReport:
    flagged: bool
    threshold: float
    offending_coefficients: tuple


@dataclass(frozen=True)
class ClassifierConfig:
    """Fidelity weight and variation operator for label regularization."""

    alpha: float
    form: str = "shift"
    solver_tolerance: float = 1e-8

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or a <= 0:
            raise ValueError(f"alpha must be finite and positive, got {self.alpha}")
        object.__setattr__(self, "alpha", a)
        form = str(self.form).lower()
        if form not in REGULARIZER_FORMS:
            raise ValueError(f"form must be one of {REGULARIZER_FORMS}, got {form!r}")
        object.__setattr__(self, "form", form)
        tol = float(self.solver_tolerance)
        if not np.isfinite(tol) or tol <= 0:
            raise ValueError("solver_tolerance must be finite and positive")
        object.__setattr__(self, "solver_tolerance", tol)


@dataclass(frozen=True, eq=False)
class Classification:
    predicted: np.ndarray
    classes: np.ndarray


def _coefficient_magnitudes(g, b, filt, s):
    return np.abs(gft(b, apply_filter(g, filt, s)))


def detect_malfunction(g: Graph, b: SpectralBasis, cfg: DetectorConfig,
                       history, current: GraphSignal) -> DetectionReport:
    """Flag a snapshot whose high-pass spectrum exceeds recent history.

    The threshold is calibrated on the last ``cfg.window`` entries of
    ``history``; the comparison is strict, so a snapshot identical to its
    own calibration history is never flagged.  Offending coefficients come
    back sorted by descending magnitude.
    """
    if b.graph is not g:
        raise ValueError("basis was computed for a different graph")
    history = list(history)
    if len(history) < cfg.window:
        raise ValueError(
            f"need at least window={cfg.window} history snapshots, "
            f"got {len(history)}"
        )
    peaks = [float(_coefficient_magnitudes(g, b, cfg.filter, s).max())
             for s in history[-cfg.window:]]
    level = float(np.median(peaks)) if cfg.calibration == "median" else max(peaks)
    threshold = cfg.threshold_scale * level
    mags = _coefficient_magnitudes(g, b, cfg.filter, current)
    over = np.flatnonzero(mags > threshold)
    over = over[np.argsort(-mags[over], kind="stable")]
    offending = tuple((int(k), float(mags[k])) for k in over)
    return DetectionReport(flagged=bool(offending), threshold=threshold,
                           offending_coefficients=offending)


def _variation_operator(g: Graph, form: str) -> np.ndarray:
    """Real symmetric PSD matrix M whose quadratic form (halved) is the
    smoothness term of the classifier objective; cached on the graph."""
    key = f"_varop_{form}"
    cached = g.__dict__.get(key)
    if cached is not None:
        return cached
    if form == "laplacian":
        m = 2.0 * laplacian(g)
    else:
        rho = g.spectral_radius
        if rho == 0.0:
            raise ValueError("graph with zero adjacency cannot be normalized")
        b = np.eye(g.n) - g.adjacency / rho
        m = np.ascontiguousarray((b.conj().T @ b).real)
    object.__setattr__(g, key, m)
    return m


def _system_matvec(g: Graph, form: str, alpha: float, cmask: np.ndarray):
    """Matrix-free application of M + 2*alpha*C for the iterative solver."""
    a = g.adjacency
    if form == "laplacian":
        if g.directed:
            raise ValueError("Laplacian is defined only for undirected graphs")
        if np.any(a < 0):
            raise ValueError("Laplacian requires non-negative edge weights")
        deg = a.sum(axis=1)

        def matvec(v):
            return 2.0 * (deg * v - a @ v) + 2.0 * alpha * cmask * v
    else:
        rho = g.spectral_radius
        if rho == 0.0:
            raise ValueError("graph with zero adjacency cannot be normalized")
        ah = a.conj().T

        def matvec(v):
            bv = v - (a @ v) / rho
            mv = bv - (ah @ bv) / rho
            return np.real(mv) + 2.0 * alpha * cmask * v

    return matvec


def _raise_singular(g: Graph, labels: LabelSignal):
    """Diagnose a singular classifier system before giving up."""
    pattern = scipy.sparse.csr_matrix(np.abs(g.adjacency) > 0)
    n_comp, comp = scipy.sparse.csgraph.connected_components(pattern,
                                                             directed=False)
    known = labels.known_mask
    for c in range(n_comp):
        nodes = np.flatnonzero(comp == c)
        if not known[nodes].any():
            head = ", ".join(str(i) for i in nodes[:8])
            more = "" if nodes.size <= 8 else f", ... ({nodes.size} nodes)"
            raise SingularSystemError(
                f"system is singular: connected component {{{head}{more}}} "
                f"contains no labeled node",
                component=tuple(int(i) for i in nodes),
            )
    raise SingularSystemError("regularization system is numerically singular")


def _solve_system(g: Graph, labels: LabelSignal, cfg: ClassifierConfig):
    cmask = labels.known_mask.astype(float)
    rhs = 2.0 * cfg.alpha * labels.labels
    if g.n <= DIRECT_SOLVE_MAX_N:
        m = _variation_operator(g, cfg.form)
        system = m + np.diag(2.0 * cfg.alpha * cmask)
        try:
            # a singular-but-consistent system can pass the residual check
            # below with an arbitrary nullspace component mixed in, so
            # treat scipy's reciprocal-condition warning as a failure too
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                s = scipy.linalg.solve(system, rhs, assume_a="pos")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
            _raise_singular(g, labels)
        residual = float(np.linalg.norm(system @ s - rhs))
    else:
        matvec = _system_matvec(g, cfg.form, cfg.alpha, cmask)
        op = scipy.sparse.linalg.LinearOperator((g.n, g.n), matvec=matvec,
                                                dtype=float)
        s, info = scipy.sparse.linalg.cg(op, rhs, rtol=0.5 * cfg.solver_tolerance,
                                         atol=0.0, maxiter=20 * g.n)
        if info != 0:
            _raise_singular(g, labels)
        residual = float(np.linalg.norm(matvec(s) - rhs))
    if residual > cfg.solver_tolerance * np.linalg.norm(rhs):
        _raise_singular(g, labels)
    return s


def classify(g: Graph, labels: LabelSignal, cfg: ClassifierConfig) -> Classification:
    """Spread known +/-1 labels over the graph by variation regularization.

    Solves (M + 2*alpha*C) s = 2*alpha*C*s_known, with M the shift-based
    smoothness operator (I - A_norm)^H (I - A_norm) or twice the Laplacian,
    and C the diagonal known-label mask.  Nodes with positive predictions
    get class +1, everything else (including exact zero) class -1.
    """
    if labels.n != g.n:
        raise ValueError("label vector length does not match graph")
    if not labels.known_mask.any():
        raise ValueError("at least one label must be known")
    s = _solve_system(g, labels, cfg)
    classes = np.where(s > 0.0, 1, -1)
    return Classification(predicted=_freeze(s), classes=_freeze(classes))


def classification_objective(g: Graph, labels: LabelSignal,
                             cfg: ClassifierConfig, values) -> float:
    """The functional classify minimizes, for direct optimality checks:
    smoothness of the candidate plus alpha times its squared misfit on the
    known labels."""
    v = np.asarray(values, dtype=float)
    if v.shape != (g.n,):
        raise ValueError("candidate signal has the wrong length")
    m = _variation_operator(g, cfg.form)
    misfit = labels.known_mask * (labels.labels - v)
    return float(0.5 * v @ m @ v + cfg.alpha * (misfit @ misfit))


def label_misfit(labels: LabelSignal, values) -> float:
    """l2 distance between a candidate signal and the known labels."""
    v = np.asarray(values, dtype=float)
    d = labels.known_mask * (labels.labels - v)
    return float(np.linalg.norm(d))


def classify_with_misfit_budget(g: Graph, labels: LabelSignal, epsilon: float,
                                form="shift", *, solver_tolerance=1e-8,
                                max_alpha=1e9, iterations=60):
    """Classify with the smallest fidelity weight meeting a misfit budget.

    Runs a doubling search then log-domain bisection on alpha until the
    solution's known-label misfit drops to ``epsilon`` or below; returns
    the classification and the alpha found.
    """
    if not epsilon >= 0:
        raise ValueError("epsilon must be non-negative")

    def solve(alpha):
        cfg = ClassifierConfig(alpha=alpha, form=form,
                               solver_tolerance=solver_tolerance)
        out = classify(g, labels, cfg)
        return out, label_misfit(labels, out.predicted)

    alpha = 1.0
    out, miss = solve(alpha)
    if miss > epsilon:
        lo = alpha
        while miss > epsilon:
            alpha *= 2.0
            if alpha > max_alpha:
                raise ValueError(
                    f"misfit budget {epsilon} not reachable below alpha={max_alpha}"
                )
            lo = alpha / 2.0
            out, miss = solve(alpha)
        hi = alpha
    else:
        hi = alpha
        while miss <= epsilon and alpha > 1e-12:
            alpha /= 2.0
            prev = out
            out, miss = solve(alpha)
            if miss <= epsilon:
                hi = alpha
            else:
                out = prev
        if miss <= epsilon:
            return out, alpha
        lo = alpha
    for _ in range(iterations):
        mid = float(np.sqrt(lo * hi))
        cand, miss = solve(mid)
        if miss <= epsilon:
            hi, out = mid, cand
        else:
            lo = mid
    return out, hi


def standard_alpha_grid() -> np.ndarray:
    """The 199-point fidelity-weight grid 1/100 ... 1/2, 1, 2 ... 100."""
    return np.concatenate([1.0 / np.arange(100.0, 1.0, -1.0), [1.0],
                           np.arange(2.0, 101.0)])


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Per-alpha accuracy table from repeated random label reveals."""

    alphas: np.ndarray
    ratio: float
    mean_accuracy: np.ndarray
    std_accuracy: np.ndarray
    best_alpha: float
    best_accuracy: float


def sweep_alpha(g: Graph, truth: LabelSignal, form, alphas, ratio: float,
                runs: int, *, seed=0, solver_tolerance=1e-8) -> SweepResult:
    """Average classification accuracy per fidelity weight.

    Each run reveals round(ratio*N) ground-truth labels drawn without
    replacement from a seeded generator, classifies, and scores the
    fraction of nodes whose sign matches the truth.  The same draws are
    reused for every alpha so the sweep isolates the weight's effect; ties
    for the best mean accuracy go to the smallest alpha.
    """
    if truth.n != g.n:
        raise ValueError("truth length does not match graph")
    if not truth.known_mask.all():
        raise ValueError("truth must label every node")
    alphas = np.asarray(list(alphas), dtype=float)
    if alphas.size == 0:
        raise ValueError("alpha grid is empty")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    n = g.n
    n_known = int(round(ratio * n))
    if not 1 <= n_known <= n:
        raise ValueError(f"ratio {ratio} reveals {n_known} of {n} labels")
    rng = np.random.default_rng(seed)
    draws = [rng.choice(n, size=n_known, replace=False) for _ in range(runs)]
    truth_classes = truth.labels.astype(int)
    accuracy = np.zeros((alphas.size, len(draws)))
    for j, nodes in enumerate(draws):
        revealed = np.zeros(n)
        revealed[nodes] = truth.labels[nodes]
        labels = LabelSignal(revealed)
        for i, alpha in enumerate(alphas):
            cfg = ClassifierConfig(alpha=alpha, form=form,
                                   solver_tolerance=solver_tolerance)
            result = classify(g, labels, cfg)
            accuracy[i, j] = float(np.mean(result.classes == truth_classes))
    mean = accuracy.mean(axis=1)
    std = accuracy.std(axis=1)
    best = int(np.argmax(mean))
    return SweepResult(alphas=_freeze(alphas), ratio=float(ratio),
                       mean_accuracy=_freeze(mean), std_accuracy=_freeze(std),
                       best_alpha=float(alphas[best]),
                       best_accuracy=float(mean[best]))
