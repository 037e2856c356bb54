"""Recycling rules: adapted sign multipliers that bootstrap walk increments.

A rule is a constant psi0 in {-1,+1} together with a sign function psi_n on
{-1,+1}^n for every n >= 1.  Applied to increments xi it produces
eta_n = psi_{n-1}(xi_1, ..., xi_{n-1}) * xi_n, which replicates the law of
xi and so defines a second simple random walk on the same filtration.

Rules expose three interchangeable views of each step: pointwise
evaluation, a full truth table, and the beta coefficient family.  Builtin
families override table and family construction with closed forms, and
override ``apply``/``scanner`` with O(1)-per-step state updates so that
paths with n in the 1e5..1e7 range stay cheap.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import (
    DEFAULT_ENUM_CAP,
    EMPTY_SET,
    BetaFamily,
    IndexSet,
    TruthTable,
    beta_to_truth,
    check_enum_cap,
    level_family,
    popcounts,
    symmetric_profile_to_levels,
    truth_to_beta,
)
from .setseq import SetSequence


def _as_signs(xi: Sequence[int]) -> np.ndarray:
    arr = np.asarray(xi, dtype=np.int8)
    if arr.ndim != 1:
        raise ValueError("increment sequence must be one-dimensional")
    if arr.size and not np.all(np.abs(arr) == 1):
        raise ValueError("increments must be -1 or +1")
    return arr


class Scanner:
    """Incremental evaluator: feed xi_k, receive eta_k."""

    def step(self, x: int) -> int:
        raise NotImplementedError


class _GenericScanner(Scanner):
    """Fallback that re-evaluates psi on the growing prefix (O(k) per step)."""

    def __init__(self, rule: "RecyclingRule"):
        self.rule = rule
        self.prefix: list[int] = []

    def step(self, x: int) -> int:
        self.prefix.append(x)
        return self.rule.increment(self.prefix)


class RecyclingRule:
    """Base class; subclasses provide psi and may add fast paths."""

    name = "rule"

    def __init__(self, psi0: int):
        if psi0 not in (-1, 1):
            raise ValueError("psi0 must be -1 or +1")
        self.psi0 = psi0

    # -- pointwise ---------------------------------------------------------

    def psi(self, n: int, u: Sequence[int]) -> int:
        """psi_n evaluated on the first n entries of u, for n >= 1."""
        raise NotImplementedError

    def multiplier(self, step: int, u: Sequence[int]) -> int:
        """The sign multiplying increment number ``step``."""
        if step < 1:
            raise ValueError("step must be >= 1")
        if step == 1:
            return self.psi0
        return self.psi(step - 1, u)

    def increment(self, u: Sequence[int]) -> int:
        """eta_n for the full prefix u = (u_1, ..., u_n)."""
        n = len(u)
        if n < 1:
            raise ValueError("need at least one increment")
        return self.multiplier(n, u) * int(u[n - 1])

    # -- whole-path --------------------------------------------------------

    def apply(self, xi: Sequence[int]) -> np.ndarray:
        """Transform an increment sequence; invertible on {-1,+1}^n."""
        arr = _as_signs(xi)
        out = np.empty_like(arr)
        scan = self.scanner()
        for i, x in enumerate(arr):
            out[i] = scan.step(int(x))
        return out

    def scanner(self) -> Scanner:
        return _GenericScanner(self)

    # -- materialized views --------------------------------------------------

    def step_table(self, step: int, cap: int = DEFAULT_ENUM_CAP) -> TruthTable:
        """Truth table (arity step-1) of the multiplier at ``step``."""
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        if arity == 0:
            return TruthTable.constant(0, self.psi0)
        signs = np.empty(1 << arity, dtype=np.int8)
        for mask in range(1 << arity):
            u = [-1 if (mask >> k) & 1 else 1 for k in range(arity)]
            signs[mask] = self.psi(arity, u)
        return TruthTable(arity, signs)

    def step_family(self, step: int, cap: int = DEFAULT_ENUM_CAP) -> BetaFamily:
        """Beta family of the multiplier at ``step``."""
        return truth_to_beta(self.step_table(step, cap))

    def describe(self) -> str:
        return f"{self.name} (psi0={self.psi0:+d})"

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


# ---------------------------------------------------------------------------
# Constant-multiplier rules


class ConstantRule(RecyclingRule):
    """psi_n identically equal to a fixed sign."""

    def __init__(self, name: str, psi0: int, value: int):
        super().__init__(psi0)
        self.name = name
        self.value = value

    def psi(self, n, u):
        return self.value

    def apply(self, xi):
        arr = _as_signs(xi)
        out = arr * np.int8(self.value)
        if arr.size:
            out[0] = self.psi0 * arr[0]
        return out

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        if step == 1:
            return TruthTable.constant(0, self.psi0)
        check_enum_cap(step - 1, cap, "rule table arity")
        return TruthTable.constant(step - 1, self.value)

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        value = self.psi0 if step == 1 else self.value
        members = [EMPTY_SET] if value == -1 else []
        return BetaFamily(step, members)


def identity_rule() -> ConstantRule:
    return ConstantRule("identity", +1, +1)


def negation_rule() -> ConstantRule:
    return ConstantRule("negation", -1, -1)


# ---------------------------------------------------------------------------
# Running-product rules


class ProductRule(RecyclingRule):
    """psi_n = u_1 * ... * u_n, so eta_n is the running product of increments."""

    name = "brw"

    def __init__(self):
        super().__init__(+1)

    def psi(self, n, u):
        sign = 1
        for v in u[:n]:
            sign *= int(v)
        return sign

    def apply(self, xi):
        arr = _as_signs(xi)
        return np.cumprod(arr, dtype=np.int8)

    class _Scan(Scanner):
        def __init__(self):
            self.prod = 1

        def step(self, x):
            self.prod *= x
            return self.prod

    def scanner(self):
        return self._Scan()

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        nu = popcounts(np.arange(1 << arity, dtype=np.uint64))
        return TruthTable(arity, np.where(nu & 1, -1, 1).astype(np.int8))

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        return BetaFamily(step, (IndexSet([j]) for j in range(1, step)))


class ExtendedBrwRule(RecyclingRule):
    """eta_k = xi_k * prod_{j in M_k} xi_j for a deterministic set sequence."""

    def __init__(self, seq: SetSequence):
        super().__init__(+1)
        self.seq = seq
        self.name = f"extended-brw[{seq.name}]"
        if self.seq.at(1).members:
            raise ValueError("M_1 must be empty")

    def psi(self, n, u):
        sign = 1
        for j in self.seq.at(n + 1):
            sign *= int(u[j - 1])
        return sign

    def apply(self, xi):
        arr = _as_signs(xi)
        prod = np.cumprod(arr, dtype=np.int8)  # prod[j-1] = xi_1...xi_j
        out = arr.copy()
        for k in range(2, arr.size + 1):
            m = self.seq.at(k)
            # prefix sets hit the cumulative-product fast path
            if m.members and m.members == tuple(range(1, len(m) + 1)):
                out[k - 1] = prod[len(m) - 1] * arr[k - 1]
            else:
                sign = 1
                for j in m:
                    sign *= int(arr[j - 1])
                out[k - 1] = sign * arr[k - 1]
        return out

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        return BetaFamily(step, (IndexSet([j]) for j in self.seq.at(step)))

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        mmask = self.seq.at(step).mask
        masks = np.arange(1 << arity, dtype=np.uint64)
        parity = popcounts(masks & mmask) & 1
        return TruthTable(arity, np.where(parity, -1, 1).astype(np.int8))


# ---------------------------------------------------------------------------
# Window and prefix maxima


class WindowMaxRule(RecyclingRule):
    """psi_n = max over the last ``width`` coordinates (all of them when None).

    The empty-window convention max over {} = -1 fixes psi0 = -1.
    """

    def __init__(self, width: int | None = None):
        super().__init__(-1)
        if width is not None and width < 1:
            raise ValueError("width must be >= 1")
        self.width = width
        self.name = "max" if width is None else f"window-max:{width}"

    def window(self, step: int) -> IndexSet:
        """Indices feeding the multiplier of increment ``step``."""
        if step == 1:
            return EMPTY_SET
        lo = 1 if self.width is None else max(1, step - self.width)
        return IndexSet(range(lo, step))

    def psi(self, n, u):
        lo = 0 if self.width is None else max(0, n - self.width)
        return max(int(v) for v in u[lo:n])

    def apply(self, xi):
        arr = _as_signs(xi)
        n = arr.size
        if n == 0:
            return arr.copy()
        neg = np.concatenate([[0], np.cumsum(arr < 0, dtype=np.int64)])
        k = np.arange(1, n + 1)
        lo = np.zeros(n, dtype=np.int64) if self.width is None else np.maximum(
            0, k - 1 - self.width
        )
        length = (k - 1) - lo
        all_minus = (neg[k - 1] - neg[lo]) == length  # includes the empty window
        mult = np.where(all_minus, -1, 1).astype(np.int8)
        return mult * arr

    class _Scan(Scanner):
        def __init__(self, width):
            self.width = width
            self.run = 0  # trailing run of -1 entries
            self.seen = 0

        def step(self, x):
            if self.width is None:
                all_minus = self.seen == self.run
            else:
                w = min(self.width, self.seen)
                all_minus = self.run >= w
            eta = (-1 if all_minus else 1) * x
            self.run = self.run + 1 if x == -1 else 0
            self.seen += 1
            return eta

    def scanner(self):
        return self._Scan(self.width)

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        if arity == 0:
            return TruthTable.constant(0, -1)
        wmask = self.window(step).mask
        masks = np.arange(1 << arity, dtype=np.int64)
        signs = np.where((masks & wmask) == wmask, -1, 1).astype(np.int8)
        return TruthTable(arity, signs)

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        return BetaFamily(step, [self.window(step)])


# ---------------------------------------------------------------------------
# Symmetric rules: multipliers that depend on the running sum


@dataclass(frozen=True)
class StepFunction:
    """Right- or left-closed step function with values in {-1,+1}.

    ``values[i]`` is taken between ``breaks[i-1]`` and ``breaks[i]``; the
    value at a breakpoint comes from the right piece when ``jump_side`` is
    "right" and from the left piece otherwise.  Breakpoints must be strictly
    increasing (a zero minimum gap is rejected) and adjacent values must
    differ, so the breakpoints are genuine jumps.
    """

    breaks: tuple[float, ...]
    values: tuple[int, ...]
    jump_side: str = "left"

    def __post_init__(self):
        if self.jump_side not in ("left", "right"):
            raise ValueError("jump_side must be 'left' or 'right'")
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(v not in (-1, 1) for v in self.values):
            raise ValueError("values must be -1 or +1")
        if any(b >= c for b, c in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v == w for v, w in zip(self.values, self.values[1:])):
            raise ValueError("adjacent pieces must differ at a breakpoint")

    def __call__(self, z: float) -> int:
        if self.jump_side == "right":
            i = bisect.bisect_right(self.breaks, z)
        else:
            i = bisect.bisect_left(self.breaks, z)
        return self.values[i]

    def vectorized(self, z: np.ndarray) -> np.ndarray:
        side = "right" if self.jump_side == "right" else "left"
        idx = np.searchsorted(self.breaks, z, side=side)
        return np.asarray(self.values, dtype=np.int8)[idx]


def sign_step(sgn0: int = -1) -> StepFunction:
    """sgn with the value at zero fixed to sgn0."""
    if sgn0 not in (-1, 1):
        raise ValueError("sgn0 must be -1 or +1")
    return StepFunction((0.0,), (-1, 1), "left" if sgn0 == -1 else "right")


class SymmetricRule(RecyclingRule):
    """psi_{k-1}(u) = f((u_1 + ... + u_{k-1}) / sqrt(k)).

    psi0 is f applied to the empty sum.  The multiplier is permutation
    invariant in the prefix, so tables reduce to popcount profiles and the
    beta family is level-constant.
    """

    def __init__(self, f: StepFunction, name: str | None = None):
        super().__init__(f(0.0))
        self.f = f
        self.name = name or "symmetric"

    def _scale(self, n: int) -> float:
        return math.sqrt(n + 1)

    def psi(self, n, u):
        s = int(sum(int(v) for v in u[:n]))
        return self.f(s / self._scale(n))

    def apply(self, xi):
        arr = _as_signs(xi)
        n = arr.size
        if n == 0:
            return arr.copy()
        sums = np.concatenate([[0], np.cumsum(arr[:-1], dtype=np.int64)])
        z = sums / np.sqrt(np.arange(1, n + 1, dtype=np.float64))
        return self.f.vectorized(z) * arr

    class _Scan(Scanner):
        def __init__(self, rule):
            self.rule = rule
            self.s = 0
            self.k = 1

        def step(self, x):
            eta = self.rule.f(self.s / math.sqrt(self.k)) * x
            self.s += x
            self.k += 1
            return eta

    def scanner(self):
        return self._Scan(self)

    def profile(self, step: int) -> np.ndarray:
        """Multiplier value per count of -1 coordinates in the prefix."""
        arity = step - 1
        nu = np.arange(arity + 1, dtype=np.float64)
        z = (arity - 2.0 * nu) / self._scale(arity)
        return self.f.vectorized(z)

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        prof = self.profile(step)
        nu = popcounts(np.arange(1 << arity, dtype=np.uint64))
        return TruthTable(arity, prof[nu])

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        check_enum_cap(step - 1, cap, "rule family arity")
        levels = symmetric_profile_to_levels(list(self.profile(step)))
        return level_family(step, levels)


class LevyRule(SymmetricRule):
    """The sign-of-the-walk rule: eta_k = sgn(X_{k-1}) xi_k."""

    def __init__(self, sgn0: int = -1):
        super().__init__(sign_step(sgn0), name="levy")
        self.sgn0 = sgn0


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class ModifiedLevyRule(RecyclingRule):
    """Sign-of-the-walk rule made ergodic by a prefix-max factor.

    At steps whose multiplier arity is a power of two the multiplier is
    sgn(u_1 + ... + u_n); elsewhere it is max(u_1..u_n) * sgn(u_1 + ... + u_n),
    equivalently sgn adjusted to +1 on the all-minus input.
    """

    name = "modified-levy"

    def __init__(self, sgn0: int = -1):
        super().__init__(-1)
        self.sgn0 = sgn0
        self._sgn = sign_step(sgn0)

    def _sgn_int(self, s: int) -> int:
        if s == 0:
            return self.sgn0
        return 1 if s > 0 else -1

    def psi(self, n, u):
        s = sum(int(v) for v in u[:n])
        if _is_power_of_two(n):
            return self._sgn_int(s)
        return max(int(v) for v in u[:n]) * self._sgn_int(s)

    def apply(self, xi):
        arr = _as_signs(xi)
        n = arr.size
        if n == 0:
            return arr.copy()
        sums = np.concatenate([[0], np.cumsum(arr, dtype=np.int64)[:-1]])
        sg = np.where(sums > 0, 1, np.where(sums < 0, -1, self.sgn0)).astype(np.int8)
        mx = np.empty(n, dtype=np.int8)
        mx[0] = -1  # empty prefix
        if n > 1:
            np.maximum.accumulate(arr[:-1], out=mx[1:])
        arity = np.arange(n)  # multiplier arity at each step
        pow2 = (arity >= 1) & ((arity & (arity - 1)) == 0)
        mult = np.where(pow2 | (arity == 0), sg, mx * sg)
        mult[0] = self.psi0
        return (mult * arr).astype(np.int8)

    class _Scan(Scanner):
        def __init__(self, rule):
            self.rule = rule
            self.s = 0
            self.n = 0
            self.any_plus = False

        def step(self, x):
            if self.n == 0:
                mult = self.rule.psi0
            elif _is_power_of_two(self.n):
                mult = self.rule._sgn_int(self.s)
            else:
                mx = 1 if self.any_plus else -1
                mult = mx * self.rule._sgn_int(self.s)
            self.s += x
            self.n += 1
            self.any_plus = self.any_plus or x == 1
            return mult * x

    def scanner(self):
        return self._Scan(self)

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        if arity == 0:
            return TruthTable.constant(0, self.psi0)
        nu = popcounts(np.arange(1 << arity, dtype=np.uint64))
        s = arity - 2 * nu
        signs = np.where(s > 0, 1, np.where(s < 0, -1, self.sgn0)).astype(np.int8)
        if not _is_power_of_two(arity):
            signs = signs.copy()
            signs[-1] = -signs[-1]  # max factor flips only the all-minus input
        return TruthTable(arity, signs)


class ModifiedLevyMaxRule(RecyclingRule):
    """Prefix max times the sign of the sum that excludes the last coordinate."""

    name = "modified-levy-max"

    def __init__(self, sgn0: int = -1):
        super().__init__(-1)
        self.sgn0 = sgn0

    def _sgn_int(self, s: int) -> int:
        if s == 0:
            return self.sgn0
        return 1 if s > 0 else -1

    def psi(self, n, u):
        s = sum(int(v) for v in u[: n - 1])
        return max(int(v) for v in u[:n]) * self._sgn_int(s)

    def apply(self, xi):
        arr = _as_signs(xi)
        n = arr.size
        if n == 0:
            return arr.copy()
        mx = np.empty(n, dtype=np.int8)
        mx[0] = -1
        if n > 1:
            np.maximum.accumulate(arr[:-1], out=mx[1:])
        sums = np.zeros(n, dtype=np.int64)
        if n > 2:
            sums[2:] = np.cumsum(arr[: n - 2], dtype=np.int64)
        sg = np.where(sums > 0, 1, np.where(sums < 0, -1, self.sgn0)).astype(np.int8)
        mult = mx * sg
        mult[0] = self.psi0
        return (mult * arr).astype(np.int8)

    class _Scan(Scanner):
        def __init__(self, rule):
            self.rule = rule
            self.s_before_last = 0
            self.last = 0
            self.any_plus = False
            self.n = 0

        def step(self, x):
            if self.n == 0:
                mult = self.rule.psi0
            else:
                mx = 1 if self.any_plus else -1
                mult = mx * self.rule._sgn_int(self.s_before_last)
            self.s_before_last += self.last
            self.last = x
            self.any_plus = self.any_plus or x == 1
            self.n += 1
            return mult * x

    def scanner(self):
        return self._Scan(self)

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        arity = step - 1
        check_enum_cap(arity, cap, "rule table arity")
        if arity == 0:
            return TruthTable.constant(0, self.psi0)
        masks = np.arange(1 << arity, dtype=np.uint64)
        nu_head = popcounts(masks & ((1 << (arity - 1)) - 1))
        s = (arity - 1) - 2 * nu_head
        sg = np.where(s > 0, 1, np.where(s < 0, -1, self.sgn0))
        full = (1 << arity) - 1
        mx = np.where(masks == full, -1, 1)
        return TruthTable(arity, (mx * sg).astype(np.int8))


# ---------------------------------------------------------------------------
# Constant sign flips


class SignFlipRule(RecyclingRule):
    """eta_k = epsilon_k xi_k for a deterministic sign sequence epsilon."""

    def __init__(self, flips: Iterable[int] | float, name: str | None = None):
        if isinstance(flips, float):
            if not 0.0 <= flips <= 1.0:
                raise ValueError("flip density must lie in [0, 1]")
            p = flips
            self._flip = lambda k: math.floor(k * p) > math.floor((k - 1) * p)
            self.density = p
            name = name or f"sign-flips:{p:g}"
        else:
            steps = frozenset(int(k) for k in flips)
            if steps and min(steps) < 1:
                raise ValueError("flip steps must be positive")
            self._flip = lambda k: k in steps
            self.density = None
            name = name or "sign-flips:explicit"
        super().__init__(-1 if self._flip(1) else +1)
        self.name = name

    def epsilon(self, step: int) -> int:
        return -1 if self._flip(step) else 1

    def psi(self, n, u):
        return self.epsilon(n + 1)

    def apply(self, xi):
        arr = _as_signs(xi)
        eps = np.fromiter(
            (self.epsilon(k) for k in range(1, arr.size + 1)),
            dtype=np.int8,
            count=arr.size,
        )
        return eps * arr

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        check_enum_cap(step - 1, cap, "rule table arity")
        return TruthTable.constant(step - 1, self.epsilon(step))

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        members = [EMPTY_SET] if self.epsilon(step) == -1 else []
        return BetaFamily(step, members)


# ---------------------------------------------------------------------------
# Explicitly tabulated rules


class ExplicitRule(RecyclingRule):
    """Rule given by per-step tables or beta families, with an optional fallback."""

    def __init__(self, psi0: int,
                 tables: Mapping[int, TruthTable] | None = None,
                 families: Mapping[int, BetaFamily] | None = None,
                 fallback: RecyclingRule | None = None,
                 name: str = "explicit"):
        super().__init__(psi0)
        self.tables = dict(tables or {})
        self.families = dict(families or {})
        self.fallback = fallback
        self.name = name
        for step, table in self.tables.items():
            if step < 2:
                raise ValueError("tabulated steps must be >= 2 (psi0 covers step 1)")
            if table.arity != step - 1:
                raise ValueError(f"table at step {step} must have arity {step - 1}")
        for step, family in self.families.items():
            if step < 2:
                raise ValueError("family steps must be >= 2 (psi0 covers step 1)")
            if family.step != step:
                raise ValueError(f"family at step {step} has step {family.step}")

    def psi(self, n, u):
        step = n + 1
        if step in self.tables:
            return self.tables[step].sign(u[:n])
        if step in self.families:
            return self.families[step].evaluate(u)
        if self.fallback is not None:
            return self.fallback.psi(n, u)
        raise ValueError(f"rule has no definition at step {step} and no fallback")

    def step_table(self, step, cap=DEFAULT_ENUM_CAP):
        if step == 1:
            return TruthTable.constant(0, self.psi0)
        if step in self.tables:
            return self.tables[step]
        if step in self.families:
            return beta_to_truth(self.families[step], cap)
        if self.fallback is not None:
            return self.fallback.step_table(step, cap)
        raise ValueError(f"rule has no definition at step {step} and no fallback")

    def step_family(self, step, cap=DEFAULT_ENUM_CAP):
        if step == 1:
            return BetaFamily(1, [EMPTY_SET] if self.psi0 == -1 else [])
        if step in self.families:
            return self.families[step]
        if step in self.tables:
            return truth_to_beta(self.tables[step])
        if self.fallback is not None:
            return self.fallback.step_family(step, cap)
        raise ValueError(f"rule has no definition at step {step} and no fallback")


class RandomRule(RecyclingRule):
    """Deterministically seeded random truth tables, one per step.

    ``force_full`` pins the full-set beta coefficient of every multiplier,
    which by the single-orbit criterion makes the rule ergodic-so-far (with
    psi0 = -1) or certifiably non-ergodic (coefficient forced to zero).
    """

    def __init__(self, seed: int, psi0: int = -1,
                 force_full: bool | None = None, cap: int = DEFAULT_ENUM_CAP):
        super().__init__(psi0)
        self.seed = int(seed)
        self.force_full = force_full
        self.cap = cap
        self.name = f"random:{seed}"
        self._tables: dict[int, TruthTable] = {}

    def step_table(self, step, cap=None):
        cap = self.cap if cap is None else cap
        if step == 1:
            return TruthTable.constant(0, self.psi0)
        if step not in self._tables:
            arity = step - 1
            check_enum_cap(arity, cap, "rule table arity")
            rng = np.random.Generator(
                np.random.Philox(key=[self.seed & (2**64 - 1), step])
            )
            bits = rng.integers(0, 2, size=1 << arity, dtype=np.uint8)
            if self.force_full is not None:
                parity = int(bits.sum()) & 1
                if parity != int(self.force_full):
                    bits[-1] ^= 1  # flips exactly the full-set coefficient
            self._tables[step] = TruthTable.from_neg_bits(bits)
        return self._tables[step]

    def psi(self, n, u):
        return self.step_table(n + 1).sign(u[:n])


BUILTIN_DOC = {
    "identity": "eta = xi (psi identically +1)",
    "negation": "eta = -xi (psi identically -1)",
    "brw": "running product: eta_k = xi_1 ... xi_k",
    "max": "prefix maximum multiplier, psi0 = -1",
    "window-max:M": "maximum of the last M increments",
    "levy": "eta_k = sgn(X_{k-1}) xi_k, sgn(0) configurable",
    "modified-levy": "levy with a prefix-max factor except at power-of-two arities",
    "modified-levy-max": "prefix max times sgn of the sum excluding the last entry",
    "extended-brw:KIND[:PARAM]": "eta_k = xi_k prod_{j in M_k} xi_j over a set sequence",
    "sign-flips:P": "eta_k = eps_k xi_k with flip density P (or explicit steps)",
    "symmetric:V0[:Z1:V1...]": "eta_k = f(X_{k-1}/sqrt(k)) xi_k for a step function f",
}
