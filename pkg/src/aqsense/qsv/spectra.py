"""Closed-form spectrum of the combined verification strategy.

The strategy splits into three sector-disjoint pieces; the second-largest
eigenvalue (hence the spectral gap) comes from the GHZ/Dicke core, whose
two coupled eigenvalues follow from a 2x2 reduction on the symmetric
subspace. Everything here is exact arithmetic on the block coefficients;
``check_numeric`` diagonalizes the assembled blocks as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qcore import eig_top2, make_target
from ..symcomb import binom, johnson_eigenvalue
from .operators import assemble_strategy_decomposed, lambda_map

__all__ = [
    "SpectralSummary",
    "analytic_spectrum",
    "omega3_profile",
    "pauli_witness_bound",
]


@dataclass(frozen=True)
class SpectralSummary:
    """All analytic eigenvalue data of the combined strategy at (n, q0, p).

    a, b, c, d are the block coefficients of the GHZ/Dicke core; the
    lambda_* fields are its eigenvalues (lambda_plus = 1 on the target);
    beta is the second-largest eigenvalue of the whole strategy and
    nu = 1 - beta the spectral gap. ``branch`` records which candidate won:
    "a", "bc1", or "boundary" on a tie.
    """

    n: int
    q0: float
    p: float
    a: float
    b: float
    c: float
    d: float
    lambda_a: float
    lambda_bc1: float
    alpha_plus: float
    alpha_minus: float
    lambda_plus: float
    lambda_minus: float
    lambda1_omega2: float
    lambda1_omega3: float
    omega3_values: tuple[float, ...]
    beta: float
    nu: float
    branch: str
    residuals: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if abs(self.lambda_plus - 1.0) > 1e-9:
            raise ValueError(f"top eigenvalue should be 1, got {self.lambda_plus}")
        if not self.beta < 1.0:
            raise ValueError(f"second eigenvalue must stay below 1, got {self.beta}")
        if abs(self.nu - (1.0 - self.beta)) > 1e-15:
            raise ValueError("gap must equal 1 - beta")


def omega3_profile(n: int, q0: float, p: float = 0.0) -> tuple[float, ...]:
    """Eigenvalues of the diagonal remainder piece, one per weight l=1..n-2.

    Value at l: (1-p)/(n C(2n,n)) * C(2n-l, n) * [n lambda0 - l(2 lambda0 - 1)];
    strictly decreasing in l.
    """
    lam0, _ = lambda_map(n, q0)
    c_big = binom(2 * n, n)
    return tuple(
        (1 - p) / (n * c_big) * binom(2 * n - l, n) * (n * lam0 - l * (2 * lam0 - 1))
        for l in range(1, n - 1)
    )


def analytic_spectrum(n: int, q0: float, p: float = 0.0, check_numeric: bool = False) -> SpectralSummary:
    """Evaluate every closed-form eigenvalue and the spectral gap.

    The branch condition compares the two candidates for the second-largest
    eigenvalue of the core piece; p = 1 is rejected (no gap, the condition
    degenerates).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    lam0, lam1 = lambda_map(n, q0)
    m = 2 * n
    c_big = binom(m, n)

    a = p + (1 - p) * lam0
    b = (3 * n - 2) / (2 * (2 * n - 1)) - 2 * (1 - p) * lam0 / c_big
    c = 1.0 / (2 * n * (2 * n - 1))
    d = (1 - p) * np.sqrt(lam0 * lam1) / c_big

    # 2x2 reduction on span{(|0..0>+|1..1>)/sqrt2, uniform weight-n vector}
    s_mid = b + c * n * n
    disc = np.sqrt((s_mid - a) ** 2 + 8 * d * d * c_big)
    alpha_plus = ((a - s_mid) + disc) / (4 * d)
    alpha_minus = ((a - s_mid) - disc) / (4 * d)
    lambda_plus = s_mid + 2 * d * alpha_plus
    lambda_minus = s_mid + 2 * d * alpha_minus

    lambda_a = a
    lambda_bc1 = b + c * johnson_eigenvalue(m, n, 1)
    diff = lambda_a - lambda_bc1
    if abs(diff) <= 1e-12:
        branch = "boundary"
    elif diff > 0:
        branch = "a"
    else:
        branch = "bc1"
    beta = max(lambda_a, lambda_bc1)
    nu = 1.0 - beta

    alpha2 = (n + 1) * (1.0 / (4 * (2 * n - 1)) + (1 - p) / c_big * (1 - 1.0 / n - (1 - 2.0 / n) * lam0))
    lambda1_omega2 = alpha2 + (n + 1) / (4 * (2 * n - 1))

    omega3_values = omega3_profile(n, q0, p)
    lambda1_omega3 = omega3_values[0]

    residuals: dict[str, float] | None = None
    if check_numeric:
        o1, o2, o3 = assemble_strategy_decomposed(n, q0, p)
        comp1 = o1.component_matrix((0, n, m))
        top1, second1 = eig_top2(comp1)
        w1 = np.linalg.eigvalsh(comp1)
        top2, _ = eig_top2(o2.component_matrix((n - 1, n + 1)))
        top3 = float(np.max(o3.eigenvalues()))
        residuals = {
            "lambda_plus": abs(lambda_plus - top1),
            "beta": abs(beta - second1),
            "lambda_a": float(np.min(np.abs(w1 - lambda_a))),
            "lambda_bc1": float(np.min(np.abs(w1 - lambda_bc1))),
            "lambda_minus": float(np.min(np.abs(w1 - lambda_minus))),
            "lambda1_omega2": abs(lambda1_omega2 - top2),
            "lambda1_omega3": abs(lambda1_omega3 - top3),
        }

    return SpectralSummary(
        n=n,
        q0=q0,
        p=p,
        a=float(a),
        b=float(b),
        c=float(c),
        d=float(d),
        lambda_a=float(lambda_a),
        lambda_bc1=float(lambda_bc1),
        alpha_plus=float(alpha_plus),
        alpha_minus=float(alpha_minus),
        lambda_plus=float(lambda_plus),
        lambda_minus=float(lambda_minus),
        lambda1_omega2=float(lambda1_omega2),
        lambda1_omega3=float(lambda1_omega3),
        omega3_values=omega3_values,
        beta=float(beta),
        nu=float(nu),
        branch=branch,
        residuals=residuals,
    )


def pauli_witness_bound(n: int, q0: float) -> float:
    """Lower bound 2 sqrt(2 q0 q1 / C(2n,n)) on the all-X-on-one-half
    witness expectation of the target state.

    For n <= 5 the exact expectation is recomputed from the state vector
    and the inequality is verified before returning.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if not 0.0 < q0 < 1.0:
        raise ValueError(f"q0 must lie strictly between 0 and 1, got {q0}")
    bound = 2.0 * np.sqrt(2.0 * q0 * (1.0 - q0) / binom(2 * n, n))
    if n <= 5:
        amps = make_target(n, q0).amps
        flip = ((1 << n) - 1) << n
        idx = np.arange(1 << (2 * n))
        expectation = float(np.real(np.sum(amps.conj() * amps[idx ^ flip])))
        if expectation < bound - 1e-12:
            raise RuntimeError(
                f"witness self-check failed: expectation {expectation} below bound {bound}"
            )
    return float(bound)
