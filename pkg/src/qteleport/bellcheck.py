"""Spin correlations of the singlet and the CHSH combination.

Analyzers lie in the x-z plane: angle 0 is sigma_z, angle pi/2 is sigma_x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gates import BellOutcome, bell_state
from .kernels import sample_index_batch_np
from .qstate import DenseOperator, apply_gate, apply_operator, inner

_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class AnalyzerSetting:
    angle: float

    def __post_init__(self):
        a = float(self.angle) % (2 * math.pi)
        object.__setattr__(self, "angle", 0.0 if a >= 2 * math.pi else a)

    def spin_operator(self) -> DenseOperator:
        return DenseOperator(math.cos(self.angle) * _SZ + math.sin(self.angle) * _SX, unitary=True, name="n.sigma")


def _setting(s) -> AnalyzerSetting:
    return s if isinstance(s, AnalyzerSetting) else AnalyzerSetting(s)


def singlet_correlation(a, b) -> float:
    """<Psi-| (n_a.sigma) x (n_b.sigma) |Psi->, evaluated on the simulator."""
    singlet = bell_state(BellOutcome.PSI_MINUS, (1, 2))
    rotated = apply_gate(singlet, _setting(a).spin_operator(), (1,))
    rotated = apply_gate(rotated, _setting(b).spin_operator(), (2,))
    return inner(singlet, rotated).real


def chsh_value(a1, a2, b1, b2) -> float:
    return abs(
        singlet_correlation(a1, b1)
        - singlet_correlation(a1, b2)
        + singlet_correlation(a2, b1)
        + singlet_correlation(a2, b2)
    )


def _outcome_probabilities(a, b) -> np.ndarray:
    """Joint probabilities of (++, +-, -+, --) for the two analyzers."""
    singlet = bell_state(BellOutcome.PSI_MINUS, (1, 2))
    ops = {}
    for name, s in (("a", _setting(a)), ("b", _setting(b))):
        n = s.spin_operator().matrix
        ops[name] = [DenseOperator((np.eye(2) + n) / 2), DenseOperator((np.eye(2) - n) / 2)]
    probs = np.empty(4)
    for i, pa in enumerate(ops["a"]):
        for j, pb in enumerate(ops["b"]):
            branch = apply_operator(apply_operator(singlet, pa, (1,)), pb, (2,))
            probs[2 * i + j] = max(inner(singlet, branch).real, 0.0)
    return probs


def sample_correlation(a, b, trials: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of E(a, b) and its standard error from ``trials`` pair detections."""
    probs = _outcome_probabilities(a, b)
    idx = sample_index_batch_np(np.broadcast_to(probs, (trials, 4)), rng.random(trials))
    products = np.array([1.0, -1.0, -1.0, 1.0])[idx]
    mean = float(products.mean())
    return mean, float(products.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")


def sample_chsh(a1, a2, b1, b2, trials: int, rng: np.random.Generator) -> dict:
    """Sampled correlations for the four setting pairs and the resulting S with its error."""
    pairs = {"E(a1,b1)": (a1, b1), "E(a1,b2)": (a1, b2), "E(a2,b1)": (a2, b1), "E(a2,b2)": (a2, b2)}
    est = {k: sample_correlation(x, y, trials, rng) for k, (x, y) in pairs.items()}
    s = est["E(a1,b1)"][0] - est["E(a1,b2)"][0] + est["E(a2,b1)"][0] + est["E(a2,b2)"][0]
    err = math.sqrt(sum(se**2 for _, se in est.values()))
    return {"correlations": est, "S": abs(s), "S_stderr": err}
