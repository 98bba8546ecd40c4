"""
The subspace chain behind the accessibility criterion.

Starting from the span of the control fields::

    S_0 = span{f_1, ..., f_{n-k}}
    S_{l+1} = S_l + span{L w, Phi(w) : w in S_l}

the system is strongly accessible from the origin iff ``S_k = R^n``, and
``dim S_k`` measures how many directions it can explore. ``Phi`` restricted
to a subspace is determined by ``Phi`` and ``Psi`` on a basis (polarization),
so every step only needs ``L b_i``, ``Phi(b_i)`` and ``Psi(b_i, b_j)`` for
``i < j``.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from quadctrl.constants import ArithmeticMode, Rule, VerdictTag
from quadctrl.exceptions import ShapeMismatchError
from quadctrl.linalg import (
    Matrix,
    Subspace,
    Vector,
    as_matrix,
    detect_mode,
    mode_of,
    rank,
    span_basis,
)
from quadctrl.system import QuadraticSystem
from quadctrl.verdicts import Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChainResult:
    """
    The chain ``S_0, ..., S_k``.

    Exactly ``k + 1`` subspaces are recorded; once the chain is stationary
    the stationary subspace is repeated.

    Attributes:
        subspaces: ``S_0`` through ``S_k``.
        dims: Their dimensions (nondecreasing, ``dims[0] == n - k``).
        stationary_at: First ``l`` with ``dim S_l == dim S_{l+1}`` (at most k).
        degree_of_reachability: ``dim S_k``.
    """

    subspaces: List[Subspace]
    dims: List[int]
    stationary_at: int
    degree_of_reachability: int

    @property
    def s_k(self) -> Subspace:
        return self.subspaces[-1]

    @property
    def is_full(self) -> bool:
        return self.s_k.is_full

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dims": list(self.dims),
            "stationary_at": self.stationary_at,
            "degree_of_reachability": self.degree_of_reachability,
            "bases": [s.to_dict()["basis"] for s in self.subspaces],
        }


def chain_step_generators(sys: QuadraticSystem, s: Subspace) -> List[Vector]:
    """``L b_i``, ``Phi(b_i)`` and ``Psi(b_i, b_j)`` (i < j) over the basis of ``s``."""
    basis = s.vectors
    generators: List[Vector] = []
    for i, b_i in enumerate(basis):
        generators.append(sys.L @ b_i)
        generators.append(sys.phi(b_i))
        for b_j in basis[i + 1 :]:
            generators.append(sys.psi(b_i, b_j))
    return generators


def s_chain(sys: QuadraticSystem) -> ChainResult:
    """
    Compute ``S_0, ..., S_k`` for a validated system.

    The recursion stops being evaluated at the first stationary step; later
    entries repeat the stationary subspace.
    """
    current = span_basis(list(sys.controls), sys.mode, sys.tol, ambient_dim=sys.n)
    subspaces = [current]
    stationary_at: Optional[int] = None

    while len(subspaces) < sys.k + 1:
        nxt = span_basis(
            list(current.basis) + chain_step_generators(sys, current),
            sys.mode,
            sys.tol,
            ambient_dim=sys.n,
        )
        if nxt.rank == current.rank:
            stationary_at = len(subspaces) - 1
            break
        subspaces.append(nxt)
        current = nxt

    if stationary_at is None:
        # dims grew at every step, so S_k = R^n and S_{k+1} = S_k
        stationary_at = sys.k
    while len(subspaces) < sys.k + 1:
        subspaces.append(current)

    dims = [s.rank for s in subspaces]
    logger.debug("S-chain of %r: dims=%s stationary_at=%d", sys, dims, stationary_at)
    return ChainResult(
        subspaces=subspaces,
        dims=dims,
        stationary_at=stationary_at,
        degree_of_reachability=dims[-1],
    )


def accessibility_verdict(sys: QuadraticSystem, chain: Optional[ChainResult] = None) -> Verdict:
    """
    StronglyAccessible iff ``dim S_k == n``.

    A NotAccessible verdict carries ``dim S_k`` as the degree of
    reachability together with a basis of ``S_k``; it also rules out the
    (weaker) accessibility property and hence STLC.
    """
    chain = chain or s_chain(sys)
    certificate = {
        "dims": list(chain.dims),
        "degree_of_reachability": chain.degree_of_reachability,
        "stationary_at": chain.stationary_at,
    }
    if chain.is_full:
        return Verdict(VerdictTag.STRONGLY_ACCESSIBLE, Rule.ACCESSIBILITY_THEOREM, certificate)
    certificate["subspace"] = chain.s_k.to_dict()
    return Verdict(VerdictTag.NOT_ACCESSIBLE, Rule.ACCESSIBILITY_THEOREM, certificate)


def _as_columns(B: Any, mode: ArithmeticMode, n: int) -> Matrix:
    if isinstance(B, np.ndarray) and B.ndim == 1:
        B = B.reshape(-1, 1)
    elif not isinstance(B, np.ndarray):
        B = np.array(B, dtype=object)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
    if B.ndim != 2 or B.shape[0] != n:
        raise ShapeMismatchError(f"B must have {n} rows, got shape {B.shape}", field="B")
    return as_matrix(B.tolist(), mode)


def controllability_matrix(L: Any, B: Any, mode: Optional[ArithmeticMode] = None) -> Matrix:
    """``[B | LB | ... | L^{n-1} B]`` as an ``n x (n m)`` matrix."""
    if mode is None:
        mode = _mode_of_inputs(L, B)
    L_m = as_matrix(L.tolist() if isinstance(L, np.ndarray) else L, mode)
    n = L_m.shape[0]
    if L_m.shape != (n, n):
        raise ShapeMismatchError(f"L must be square, got shape {L_m.shape}", field="L")
    block = _as_columns(B, mode, n)
    blocks = [block]
    for _ in range(n - 1):
        block = L_m @ block
        blocks.append(block)
    return np.concatenate(blocks, axis=1)


def kalman_rank(
    L: Any, B: Any, mode: Optional[ArithmeticMode] = None, tol: Optional[float] = None
) -> bool:
    """True iff ``[B | LB | ... | L^{n-1} B]`` has rank ``n``."""
    C = controllability_matrix(L, B, mode)
    n = C.shape[0]
    return rank(list(C.T), mode_of(C), tol, ambient_dim=n) == n


def _mode_of_inputs(L: Any, B: Any) -> ArithmeticMode:
    modes = {detect_mode(x) for x in (L, B)}
    return ArithmeticMode.FLOAT if ArithmeticMode.FLOAT in modes else ArithmeticMode.RATIONAL
