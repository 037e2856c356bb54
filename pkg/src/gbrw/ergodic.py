"""Ergodicity of the recycling transformation via finite orbit structure.

The rule induces a bijection tau_n on {-1,+1}^n for each n; the infinite
transformation is ergodic exactly when every tau_n is a single 2**n cycle.
That in turn reduces to psi0 = -1 together with one sign per step: the
product of psi_n over all 2**n inputs must be -1, equivalently the full-set
coefficient beta_{n+1,{1..n}} must be 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    DEFAULT_ENUM_CAP,
    BetaFamily,
    TruthTable,
    binomial_parity,
    check_enum_cap,
    level_family,
)
from .rules import RecyclingRule

__all__ = [
    "rule_permutation",
    "is_bijection",
    "OrbitDecomposition",
    "orbit_decompose",
    "criterion_product",
    "criterion_beta",
    "ErgodicityVerdict",
    "is_ergodic_up_to",
    "BetaArray",
    "sgn_beta_array",
    "binomial_parity",
    "pascal_parity_row",
    "ergodic_repair",
    "RepairedRule",
    "CLOSED_FORM_ERGODIC",
]

#: Builtin families whose single-orbit criterion holds at every step.
CLOSED_FORM_ERGODIC = ("max", "modified-levy", "modified-levy-max")


def rule_permutation(rule: RecyclingRule, n: int,
                     cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """The map tau_n as a permutation of input bitmasks.

    Output bit k-1 of entry m is the sign bit of eta_k on the input encoded
    by m; built from the per-step tables with one vectorized pass per step.
    """
    check_enum_cap(n, cap, "state space exponent")
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for k in range(1, n + 1):
        table = rule.step_table(k, cap)
        prefix = masks & ((1 << (k - 1)) - 1)
        mult_neg = table.signs[prefix] < 0
        u_neg = ((masks >> (k - 1)) & 1).astype(bool)
        v_neg = mult_neg ^ u_neg
        out |= v_neg.astype(np.int64) << (k - 1)
    return out


def is_bijection(perm: np.ndarray) -> bool:
    return bool(np.bincount(perm, minlength=perm.size).max() == 1)


@dataclass(frozen=True)
class OrbitDecomposition:
    """Cycle lengths of tau_n, sorted longest first."""

    n: int
    cycles: tuple[int, ...]

    @property
    def single_orbit(self) -> bool:
        return self.cycles == (1 << self.n,)


def orbit_decompose(rule: RecyclingRule, n: int,
                    cap: int = DEFAULT_ENUM_CAP) -> OrbitDecomposition:
    """Full cycle structure of tau_n by visited-flag traversal."""
    perm = rule_permutation(rule, n, cap)
    size = perm.size
    visited = np.zeros(size, dtype=bool)
    cycles = []
    for start in range(size):
        if visited[start]:
            continue
        length = 0
        node = start
        while not visited[node]:
            visited[node] = True
            node = int(perm[node])
            length += 1
        cycles.append(length)
    cycles.sort(reverse=True)
    return OrbitDecomposition(n=n, cycles=tuple(cycles))


def criterion_product(rule: RecyclingRule, n: int,
                      cap: int = DEFAULT_ENUM_CAP) -> int:
    """Product of psi_n over all 2**n inputs; -1 at every n means ergodic."""
    if n < 1:
        raise ValueError("n must be >= 1")
    table = rule.step_table(n + 1, cap)
    return -1 if table.negatives_parity() else 1


def criterion_beta(rule: RecyclingRule, n: int,
                   cap: int = DEFAULT_ENUM_CAP) -> int:
    """Full-set coefficient beta_{n+1,{1..n}} of the step-(n+1) multiplier."""
    if n < 1:
        raise ValueError("n must be >= 1")
    family = rule.step_family(n + 1, cap)
    return 1 if family.contains_full_set else 0


@dataclass(frozen=True)
class ErgodicityVerdict:
    """Finite-horizon certificate: all single-orbit criteria up to a step.

    ``ergodic_so_far`` is necessary, never sufficient, unless
    ``closed_form`` marks a builtin family with a proof for every step.
    ``first_failure`` reports the earliest failing step (0 stands for the
    psi0 check) together with the offending criterion value.
    """

    checked_up_to: int
    ergodic_so_far: bool
    first_failure: int | None = None
    failure_value: int | None = None
    closed_form: bool = False


def is_ergodic_up_to(rule: RecyclingRule, horizon: int,
                     cap: int = DEFAULT_ENUM_CAP) -> ErgodicityVerdict:
    """Check psi0 = -1 and the product criterion for n = 1..horizon."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if rule.psi0 != -1:
        return ErgodicityVerdict(
            checked_up_to=horizon,
            ergodic_so_far=False,
            first_failure=0,
            failure_value=rule.psi0,
        )
    for n in range(1, horizon + 1):
        value = criterion_product(rule, n, cap)
        if value != -1:
            return ErgodicityVerdict(
                checked_up_to=horizon,
                ergodic_so_far=False,
                first_failure=n,
                failure_value=value,
            )
    return ErgodicityVerdict(
        checked_up_to=horizon,
        ergodic_so_far=True,
        closed_form=rule.name in CLOSED_FORM_ERGODIC,
    )


# ---------------------------------------------------------------------------
# The level-coefficient array of the sign function


def pascal_parity_row(m: int) -> int:
    """Row m of Pascal's triangle mod 2, packed with bit k = C(m,k) mod 2."""
    row = 1
    shift = 1
    while m:
        if m & 1:
            row ^= row << shift
        m >>= 1
        shift <<= 1
    return row


@dataclass(frozen=True)
class BetaArray:
    """Level coefficients of sgn(u_1 + ... + u_n) for n = 1..size.

    ``rows[n-1]`` packs the coefficients with bit k = beta_{n,k}; the region
    n >= 2k+1 is identically zero.
    """

    size: int
    rows: tuple[int, ...]

    def coefficient(self, n: int, k: int) -> int:
        if not (1 <= n <= self.size and 0 <= k <= n):
            raise ValueError(f"need 1 <= n <= {self.size} and 0 <= k <= n")
        return (self.rows[n - 1] >> k) & 1

    def row_levels(self, n: int) -> list[int]:
        """Sizes k with beta_{n,k} = 1."""
        bits = self.rows[n - 1]
        return [k for k in range(n + 1) if (bits >> k) & 1]

    def row_family(self, n: int) -> BetaFamily:
        """Expand row n into the explicit family at step n+1."""
        levels = [0] * (n + 1)
        for k in self.row_levels(n):
            levels[k] = 1
        return level_family(n + 1, levels)

    def cells(self):
        for n in range(1, self.size + 1):
            for k in range(n + 1):
                yield n, k, self.coefficient(n, k)


def sgn_beta_array(size: int) -> BetaArray:
    """Compute the coefficient rows by the parity recurrence.

    Below the diagonal of the zero region (k <= floor((n-1)/2)) every
    coefficient vanishes; above it each beta_{n,m} is determined by
    beta_{n,m} = 1 + sum_{k=l+1}^{m-1} C(m,k) beta_{n,k} mod 2 with
    l = floor((n-1)/2).  Binomial parities come packed from Lucas rows, so
    a row costs O(n) word-sized big-integer operations.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    pascal = [pascal_parity_row(m) for m in range(size + 1)]
    rows = []
    for n in range(1, size + 1):
        ell = (n - 1) // 2
        bits = 0
        low_mask = (1 << (ell + 1)) - 1
        for m in range(ell + 1, n + 1):
            window = pascal[m] & bits & ((1 << m) - 1) & ~low_mask
            parity = window.bit_count() & 1
            if parity == 0:
                bits |= 1 << m
        rows.append(bits)
    return BetaArray(size=size, rows=tuple(rows))


def sgn_truth_table(n: int, sgn0: int = -1) -> TruthTable:
    """Sign table of sgn(u_1 + ... + u_n) with the stated value at zero."""
    masks = np.arange(1 << n, dtype=np.uint64)
    nu = np.bitwise_count(masks).astype(np.int64)
    s = n - 2 * nu
    signs = np.where(s > 0, 1, np.where(s < 0, -1, sgn0)).astype(np.int8)
    return TruthTable(n, signs)


# ---------------------------------------------------------------------------
# Repairing a rule into an ergodic one


class RepairedRule(RecyclingRule):
    """Minimal ergodic modification: force psi0 = -1 and, at each step whose
    product criterion fails, multiply the multiplier by the full prefix max
    (which flips exactly the full-set coefficient)."""

    def __init__(self, inner: RecyclingRule, cap: int = DEFAULT_ENUM_CAP):
        super().__init__(-1)
        self.inner = inner
        self.cap = cap
        self.name = f"repair({inner.name})"
        self._needs_flip: dict[int, bool] = {}

    def needs_flip(self, n: int) -> bool:
        """True when the inner rule fails the criterion at step multiplier n."""
        if n not in self._needs_flip:
            self._needs_flip[n] = criterion_product(self.inner, n, self.cap) != -1
        return self._needs_flip[n]

    def psi(self, n, u):
        value = self.inner.psi(n, u)
        if self.needs_flip(n):
            value *= max(int(v) for v in u[:n])
        return value

    def step_table(self, step, cap=None):
        cap = self.cap if cap is None else cap
        if step == 1:
            return TruthTable.constant(0, -1)
        table = self.inner.step_table(step, cap)
        if not self.needs_flip(step - 1):
            return table
        signs = table.signs.copy()
        signs[-1] = -signs[-1]  # the prefix max is -1 only on the all-minus input
        return TruthTable(table.arity, signs)


def ergodic_repair(rule: RecyclingRule, horizon: int = 0,
                   cap: int = DEFAULT_ENUM_CAP) -> RepairedRule:
    """Wrap a rule so every single-orbit criterion holds.

    ``horizon`` pre-materializes (and thereby validates against the cap)
    the repair decisions for steps 1..horizon; decisions beyond are made
    lazily on first use.
    """
    repaired = RepairedRule(rule, cap)
    for n in range(1, horizon + 1):
        repaired.needs_flip(n)
    return repaired
