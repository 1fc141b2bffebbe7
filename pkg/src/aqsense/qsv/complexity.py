"""Copy-count bounds for the verification protocol."""

from __future__ import annotations

import math

__all__ = [
    "sample_complexity",
    "sample_complexity_terms",
    "exact_sample_bound",
    "failure_bound",
]


def _validate(epsilon: float, delta: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def sample_complexity_terms(
    n: int, q0: float, epsilon: float, delta: float, p: float = 0.0
) -> tuple[int, int]:
    """The two competing ceiling terms behind the copy-count formula.

    Term 1 covers the branch where the inverse gap is below 2n-1; term 2
    covers the other branch through the Wallis bound C(2n,n) < 4^n/sqrt(pi n)
    and carries the 1/(1-p) slowdown of a nonzero Z-test probability.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if not 0.0 < q0 < 1.0:
        raise ValueError(f"q0 must lie strictly between 0 and 1, got {q0}")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    _validate(epsilon, delta)
    budget = math.log(1.0 / delta) / epsilon
    term1 = math.ceil((2 * n - 1) * budget)
    factor = q0 * 4.0 ** n / (2 * (1.0 - q0) * math.sqrt(math.pi * n)) + 1.0
    term2 = math.ceil(factor * budget / (1.0 - p))
    return term1, term2


def sample_complexity(n: int, q0: float, epsilon: float, delta: float, p: float = 0.0) -> int:
    """Number of copies sufficient to reject every epsilon-far source with
    confidence 1 - delta: the larger of the two ceiling terms.
    """
    return max(sample_complexity_terms(n, q0, epsilon, delta, p))


def exact_sample_bound(nu: float, epsilon: float, delta: float) -> int:
    """The un-relaxed copy count ceil(ln delta / ln(1 - nu epsilon)).

    Never exceeds ``sample_complexity`` when nu is the strategy's gap.
    """
    _validate(epsilon, delta)
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    x = nu * epsilon
    if x >= 1.0:
        return 0
    return math.ceil(math.log(delta) / math.log(1.0 - x))


def failure_bound(nu: float, epsilon: float, copies: int) -> float:
    """Acceptance-probability bound (1 - nu epsilon)^copies for a source
    whose every copy is epsilon-far from the target.
    """
    if copies < 0:
        raise ValueError(f"copies must be nonnegative, got {copies}")
    x = nu * epsilon
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"nu*epsilon must lie in [0, 1], got {x}")
    return float((1.0 - x) ** copies)
