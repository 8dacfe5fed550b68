"""Mutual-information accounting for the contrastive objectives.

Each objective's minimum achievable loss sits an additive constant above
the negative of a one-vs-rest MI lower bound, so `offset - loss` turns a
measured loss into a bound estimate in nats. The poly-view and rest-set
objectives contrast against B - M + 1 candidates (offset ln(KM - M + 1));
the pairwise objectives contrast against K (offset ln K).

Also houses the closed-form side quantities: the variance ratio bound for
the multi-crop estimator, the compute-optimal view multiplicity, and a
relative-compute scale with (M = 2, 128 epochs) as 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .losses import Method


@dataclass(frozen=True)
class BoundReport:
    """Loss and derived MI bound for one evaluation, all in nats.

    true_mi and gap are present only when the data distribution has a known
    MI (the synthetic Gaussian world); gap = true_mi - bound, reported
    signed, never clamped.
    """

    method: Method
    k: int
    m: int
    loss: float
    bound: float
    true_mi: float | None = None
    gap: float | None = None

    @classmethod
    def from_loss(
        cls,
        method: Method,
        loss: float,
        k: int,
        m: int,
        true_mi: float | None = None,
    ) -> "BoundReport":
        bound = bound_from_loss(method, loss, k, m)
        gap = mi_gap(true_mi, bound) if true_mi is not None else None
        return cls(method=method, k=k, m=m, loss=loss, bound=bound,
                   true_mi=true_mi, gap=gap)


def offset_c(k: int, m: int) -> float:
    """ln(K*M - M + 1): candidate-count offset for the poly-view and
    rest-set objectives (one positive plus all views of other samples)."""
    if k < 1 or m < 2:
        raise ValueError(f"need K >= 1 and M >= 2, got K={k}, M={m}")
    return math.log(k * m - m + 1)


def bound_from_loss(method: Method, loss: float, k: int, m: int) -> float:
    """MI lower-bound estimate: method-appropriate offset minus the loss.

    Collapsed embeddings drive each loss to exactly its offset, so a
    collapsed run reports bound 0.
    """
    if method in (Method.ARITHMETIC_PVC, Method.GEOMETRIC_PVC, Method.SUFFSTATS):
        return offset_c(k, m) - loss
    if method in (Method.INFONCE, Method.MULTICROP):
        if k < 1:
            raise ValueError(f"need K >= 1, got {k}")
        return math.log(k) - loss
    raise ValueError(f"unknown method: {method!r}")


def mi_gap(true_mi: float, bound: float) -> float:
    """Signed gap true_mi - bound. Noisy estimates may come out negative;
    callers flag that rather than clamping."""
    return true_mi - bound


def variance_bound_factor(m: int) -> float:
    """Upper bound on Var[multi-crop loss] / Var[pair loss]: 2(2M-1)/(3M(M-1)).

    Equals 1 at M = 2 and decreases strictly in M, so averaging over view
    pairs can only shrink the per-sample estimator variance.
    """
    if m < 2:
        raise ValueError(f"need M >= 2, got {m}")
    return 2.0 * (2 * m - 1) / (3.0 * m * (m - 1))


def optimal_multiplicity(b: int, p_star: float, variant: str) -> float:
    """Compute-optimal view multiplicity at fixed view budget B.

    p_star is the assumed converged likelihood of the positive under the
    contrastive softmax; it is an input, never inferred from runs. The two
    variants come from the two linear-growth approximations:

      linear-1: sqrt(2 (B + 1) (1 - p*))
      linear-2: 1 + sqrt(B (1 - p*))
    """
    if b < 2:
        raise ValueError(f"need B >= 2, got {b}")
    if not 0.0 < p_star < 1.0:
        raise ValueError(f"p_star must lie in (0, 1), got {p_star}")
    if variant == "linear-1":
        return math.sqrt(2.0 * (b + 1) * (1.0 - p_star))
    if variant == "linear-2":
        return 1.0 + math.sqrt(b * (1.0 - p_star))
    raise ValueError(f"variant must be 'linear-1' or 'linear-2', got {variant!r}")


def relative_compute(m: int, epochs: int) -> float:
    """(M/2) * (epochs/128): total view-encoding cost relative to a two-view
    run of 128 epochs."""
    if m < 2:
        raise ValueError(f"need M >= 2, got {m}")
    if epochs < 1:
        raise ValueError(f"need epochs >= 1, got {epochs}")
    return (m / 2.0) * (epochs / 128.0)
