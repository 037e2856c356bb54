"""Exact moment formulas for covariation increments and their diagnostics.

Writing zeta_{k-1} = eta_k xi_k = prod_{K in B(k)} xi_[K], the first and
second moments are finite signed sums of powers of two indexed by
sub-collections of the beta families:

    E[zeta_{k-1}]            = sum_H (-2)^|H| q(<H>)
    E[zeta_{k-1} zeta_{l-1}] = sum_{H,J} (-2)^(|H|+|J|) q(<H> union <J>)

with q(M) = 2^-|M|.  Everything here is evaluated in exact dyadic
arithmetic; floats appear only in convergence verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (
    DEFAULT_ENUM_CAP,
    DEFAULT_EXPANSION_CAP,
    BetaFamily,
    CapacityError,
    IndexSet,
    popcounts,
)
from .dyadic import Dyadic
from .rules import RecyclingRule
from .setseq import SetSequence

#: Default horizon for the quadratic-cost second-moment scan.
DEFAULT_B_HORIZON = 512
#: Default convergence tolerance for finite-horizon verdicts.
DEFAULT_TOLERANCE = 1e-2


def q(m_set: IndexSet) -> Dyadic:
    """Probability that the max over M of the increments is -1: 2**-|M|."""
    return Dyadic.half_power(len(m_set))


def _compress(sets: Sequence[IndexSet]) -> list[frozenset[int]]:
    support = sorted({k for s in sets for k in s})
    index = {k: i for i, k in enumerate(support)}
    return [frozenset(index[k] for k in s) for s in sets]


def _components(sets: list[frozenset[int]]) -> list[list[int]]:
    """Group set positions into overlap components (empty sets stay alone)."""
    parent = list(range(len(sets)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    owner: dict[int, int] = {}
    for pos, s in enumerate(sets):
        for k in s:
            if k in owner:
                ra, rb = find(owner[k]), find(pos)
                if ra != rb:
                    parent[rb] = ra
            else:
                owner[k] = pos
    groups: dict[int, list[int]] = {}
    for pos in range(len(sets)):
        groups.setdefault(find(pos), []).append(pos)
    return list(groups.values())


def _component_expectation(members: list[frozenset[int]]) -> Dyadic:
    """E of the product of maxima over one overlap component, exactly."""
    c = len(members)
    support = sorted({k for s in members for k in s})
    remap = {k: i for i, k in enumerate(support)}
    d = len(support)
    if d == 0:
        # empty sets only: each factor is the constant -1
        return Dyadic((-1) ** c)
    if c == 1:
        return Dyadic((1 << d) - 2, d)  # 1 - 2**(1-d)
    if c == 2:
        a, b = (len(s) for s in members)
        num = (1 << d) - (1 << (d - a + 1)) - (1 << (d - b + 1)) + 4
        return Dyadic(num, d)
    if d <= 62:
        masks = np.zeros(1 << c, dtype=np.int64)
        member_masks = np.array(
            [sum(1 << remap[k] for k in s) for s in members], dtype=np.int64
        )
        for i in range(c):
            view = masks.reshape(-1, 2, 1 << i)
            np.bitwise_or(view[:, 0, :], member_masks[i], out=view[:, 1, :])
        union_pc = popcounts(masks)
        sizes = popcounts(np.arange(1 << c, dtype=np.int64))
        exps = (sizes + d - union_pc).astype(np.int64)
        odd = (sizes & 1).astype(bool)
        pos = np.bincount(exps[~odd], minlength=1)
        neg = np.bincount(exps[odd], minlength=1)
        numerator = 0
        for e, cnt in enumerate(pos):
            numerator += int(cnt) << e
        for e, cnt in enumerate(neg):
            numerator -= int(cnt) << e
        return Dyadic(numerator, d)
    # wide-support fallback: subset DP with python integers
    member_masks = [sum(1 << remap[k] for k in s) for s in members]
    unions = [0] * (1 << c)
    numerator = 0
    for h in range(1 << c):
        if h:
            low = h & -h
            unions[h] = unions[h ^ low] | member_masks[low.bit_length() - 1]
        size = h.bit_count()
        exp = size + d - unions[h].bit_count()
        numerator += -(1 << exp) if size & 1 else (1 << exp)
    return Dyadic(numerator, d)


def expected_product(sets: Sequence[IndexSet],
                     cap: int = DEFAULT_EXPANSION_CAP) -> Dyadic:
    """Exact expectation of a product of increment maxima.

    Factorizes over overlap components (maxima over disjoint index sets are
    independent); the 2**size sub-collection sum runs per component, so the
    cap applies to the largest component rather than the whole collection.
    """
    if not sets:
        return Dyadic(1)
    compressed = _compress(sets)
    # fast path: empties and singletons only, i.e. a plain product of signs
    if all(len(s) <= 1 for s in compressed):
        flips = sum(1 for s in compressed if not s)
        odd = {}
        for s in compressed:
            for k in s:
                odd[k] = not odd.get(k, False)
        if any(odd.values()):
            return Dyadic(0)
        return Dyadic((-1) ** flips)
    total = Dyadic(1)
    for group in _components(compressed):
        if len(group) > cap:
            raise CapacityError(
                f"overlap component of size {len(group)} exceeds expansion cap {cap}"
            )
        total = total * _component_expectation([compressed[i] for i in group])
    return total


def expected_zeta(family: BetaFamily, cap: int = DEFAULT_EXPANSION_CAP) -> Dyadic:
    """E[zeta_{k-1}] for the multiplier encoded by the family."""
    return expected_product(list(family.members), cap)


def expected_zeta_pair(fam_k: BetaFamily, fam_l: BetaFamily,
                       cap: int = DEFAULT_EXPANSION_CAP) -> Dyadic:
    """E[zeta_{k-1} zeta_{l-1}]; the two families contribute independently
    chosen sub-collections, which is the subset sum over their concatenation."""
    return expected_product(list(fam_k.members) + list(fam_l.members), cap)


def brute_force_expect(families: Sequence[BetaFamily],
                       cap: int = DEFAULT_ENUM_CAP) -> Dyadic:
    """Oracle: average the product of family evaluations over all sign
    assignments of the joint index support."""
    support = sorted({k for fam in families for m in fam.members for k in m})
    d = len(support)
    if d > cap:
        raise CapacityError(f"joint support {d} exceeds enumeration cap {cap}")
    remap = {k: i for i, k in enumerate(support)}
    member_masks = [
        [sum(1 << remap[k] for k in m) for m in fam.members] for fam in families
    ]
    total = 0
    chunk = 1 << min(d, 20)
    for start in range(0, 1 << d, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        prod = np.ones(masks.size, dtype=np.int8)
        for fam_masks in member_masks:
            for mm in fam_masks:
                if mm == 0:
                    prod = -prod
                else:
                    np.multiply(
                        prod,
                        np.where((masks & mm) == mm, -1, 1).astype(np.int8),
                        out=prod,
                    )
        total += int(prod.sum(dtype=np.int64))
    return Dyadic(total, d)


# ---------------------------------------------------------------------------
# Finite-horizon condition diagnostics


@dataclass
class MomentReport:
    """Per-step moments, Cesaro means, and a finite-horizon verdict.

    The verdict is a heuristic on the computed horizon; it never claims to
    decide the limit.
    """

    horizon: int
    rho: list[Dyadic]
    cesaro: list[Fraction]
    verdict: str
    tolerance: float
    stabilized: Dyadic | None = None
    double_cesaro: list[Fraction] | None = None
    rho_estimate: float | None = None
    theta_rows: list[tuple[int, int, Dyadic]] | None = None

    def final_cesaro(self) -> Fraction:
        return self.cesaro[-1]


def _tail_range(values: list[Fraction]) -> float:
    tail = values[len(values) // 2:]
    return float(max(tail) - min(tail))


def _stabilized_tail(rho: list[Dyadic]) -> Dyadic | None:
    tail = rho[len(rho) // 2:]
    first = tail[0]
    if all(r == first for r in tail[1:]):
        return first
    return None


def _step_families(rule: RecyclingRule, horizon: int,
                   cap: int) -> list[BetaFamily]:
    fams = []
    for k in range(1, horizon + 1):
        try:
            fams.append(rule.step_family(k, cap))
        except CapacityError as exc:
            raise CapacityError(f"step {k}: {exc}") from exc
    return fams


def condition_A_partial(rule: RecyclingRule, horizon: int,
                        tolerance: float = DEFAULT_TOLERANCE,
                        cap: int = DEFAULT_ENUM_CAP,
                        expansion_cap: int = DEFAULT_EXPANSION_CAP) -> MomentReport:
    """First-moment Cesaro scan: rho_k = E[zeta_{k-1}] for k <= horizon.

    Converged means the last half of the Cesaro sequence has range below the
    tolerance.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    families = _step_families(rule, horizon, cap)
    rho: list[Dyadic] = []
    cesaro: list[Fraction] = []
    running = Dyadic(0)
    for k, fam in enumerate(families, start=1):
        try:
            value = expected_zeta(fam, expansion_cap)
        except CapacityError as exc:
            raise CapacityError(f"step {k}: {exc}") from exc
        rho.append(value)
        running = running + value
        cesaro.append(running.as_fraction() / k)
    stabilized = _stabilized_tail(rho)
    # an eventually constant per-step sequence has that constant as its
    # Cesaro limit, no tolerance needed
    if stabilized is not None or _tail_range(cesaro) < tolerance:
        verdict = "converged"
    else:
        verdict = "undetermined"
    estimate = float(stabilized) if stabilized is not None else float(cesaro[-1])
    return MomentReport(
        horizon=horizon,
        rho=rho,
        cesaro=cesaro,
        verdict=verdict,
        tolerance=tolerance,
        stabilized=stabilized,
        rho_estimate=estimate,
    )


def _family_signature(fam: BetaFamily):
    """(is plain product of signs, constant flip, index multiset signature)."""
    singleton = all(len(m) <= 1 for m in fam.members)
    eps = -1 if any(len(m) == 0 for m in fam.members) else 1
    indices = frozenset(next(iter(m)) for m in fam.members if len(m) == 1)
    return singleton, eps, indices


def condition_B_partial(rule: RecyclingRule, horizon: int = DEFAULT_B_HORIZON,
                        tolerance: float = DEFAULT_TOLERANCE,
                        cap: int = DEFAULT_ENUM_CAP,
                        expansion_cap: int = DEFAULT_EXPANSION_CAP,
                        keep_grid: bool = False) -> MomentReport:
    """Second-moment scan: double Cesaro means of theta_{k,l} versus rho**2.

    Costs O(horizon**2) pair evaluations.  The verdict is converged when the
    tail of the double means is stable and lands within the tolerance of the
    squared first-moment estimate, diverged when stable but away from it.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    report_a = condition_A_partial(rule, horizon, tolerance, cap, expansion_cap)
    families = _step_families(rule, horizon, cap)
    signatures = [_family_signature(f) for f in families]
    rows: list[tuple[int, int, Dyadic]] | None = [] if keep_grid else None
    double: list[Fraction] = []
    running = Dyadic(0)
    # exact stabilization scan: if rho settles at r and every computed theta
    # with both indices in the tail half and separation beyond a fixed band
    # equals r**2 exactly, the double Cesaro limit is r**2 (the band and the
    # head contribute O(1/horizon))
    r_stab = report_a.stabilized
    r_sq = r_stab * r_stab if r_stab is not None else None
    band = max(1, horizon // 8)
    tail_start = horizon // 2 + 1
    theta_stable = r_stab is not None
    for l in range(1, horizon + 1):
        sig_l = signatures[l - 1]
        for k in range(1, l):
            sig_k = signatures[k - 1]
            if sig_k[0] and sig_l[0]:
                if sig_k[2] == sig_l[2]:
                    theta = Dyadic(sig_k[1] * sig_l[1])
                else:
                    theta = Dyadic(0)
            else:
                try:
                    theta = expected_zeta_pair(
                        families[k - 1], families[l - 1], expansion_cap
                    )
                except CapacityError as exc:
                    raise CapacityError(f"pair ({k},{l}): {exc}") from exc
            if theta_stable and k >= tail_start and l - k >= band and theta != r_sq:
                theta_stable = False
            running = running + theta + theta  # symmetric off-diagonal pair
            if rows is not None:
                rows.append((k, l, theta))
        running = running + 1  # theta_{l,l} = E[zeta**2] = 1
        if rows is not None:
            rows.append((l, l, Dyadic(1)))
        double.append(running.as_fraction() / (l * l))
    rho_sq = Fraction(report_a.final_cesaro()) ** 2
    stable = _tail_range(double) < tolerance
    close = abs(float(double[-1] - rho_sq)) < tolerance
    if r_stab is not None and theta_stable:
        verdict = "converged"
    elif stable and close:
        verdict = "converged"
    elif stable:
        verdict = "diverged"
    else:
        verdict = "undetermined"
    return MomentReport(
        horizon=horizon,
        rho=report_a.rho,
        cesaro=report_a.cesaro,
        verdict=verdict,
        tolerance=tolerance,
        stabilized=report_a.stabilized,
        double_cesaro=double,
        rho_estimate=report_a.rho_estimate,
        theta_rows=rows,
    )


# ---------------------------------------------------------------------------
# Closed forms


def closed_form_disjoint(kappa: int, limit_size: int | None) -> Dyadic:
    """Limit correlation for families of disjoint sets of equal cardinality.

    ``limit_size`` is the limit of the family sizes; None encodes divergence
    to infinity.  Zero for cardinality one or unbounded families, otherwise
    (1 - 2**(1-kappa)) ** limit_size.  A limit size of zero means eventually
    empty families, where the covariation increment is identically +1, so
    the empty product wins over the cardinality-one case.
    """
    if kappa < 1:
        raise ValueError("cardinality must be >= 1")
    if limit_size == 0:
        return Dyadic(1)
    if kappa == 1:
        return Dyadic(0)
    if limit_size is None:
        return Dyadic(0)
    if limit_size < 0:
        raise ValueError("limit size must be non-negative")
    base = Dyadic(1) - Dyadic.half_power(kappa - 1)
    out = Dyadic(1)
    for _ in range(limit_size):
        out = out * base
    return out


def window_rho(m: int | None) -> Dyadic:
    """Correlation 1 - 2**(1-m) of the window-max rule; 1 in the limit m -> inf."""
    if m is None:
        return Dyadic(1)
    if m < 1:
        raise ValueError("window length must be >= 1")
    return Dyadic(1) - Dyadic.half_power(m - 1)


def sign_flip_rho(p) -> Fraction:
    """Correlation 1 - 2p of the constant-flip rule with flip density p."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("flip density must lie in [0, 1]")
    return 1 - 2 * p


# ---------------------------------------------------------------------------
# Set-sequence diagnostics


@dataclass
class SetSequenceReport:
    """First-occurrence and match-fraction diagnostics of a set sequence."""

    horizon: int
    first_match: list[int]              # N(n) = inf{k : M_k = M_n}
    n_ratio: list[Fraction]             # N(n) / n
    match_fraction: list[Fraction]      # (1/n) sum_{k<=n} 1{M_k = M_n}
    nested: bool
    independent_limit: bool
    tolerance: float


def analyze_set_sequence(seq: SetSequence, horizon: int,
                         tolerance: float = DEFAULT_TOLERANCE) -> SetSequenceReport:
    """Scan N(n)/n and the match fraction over the horizon.

    Flags the empirical sufficient condition for an independent Brownian
    limit: the tail of the match fraction sits below the tolerance.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    sets = seq.prefix(horizon)
    keys = [s.members for s in sets]
    first_seen: dict[tuple, int] = {}
    counts: dict[tuple, int] = {}
    first_match: list[int] = []
    n_ratio: list[Fraction] = []
    match_fraction: list[Fraction] = []
    for n, key in enumerate(keys, start=1):
        first_seen.setdefault(key, n)
        counts[key] = counts.get(key, 0) + 1
        first_match.append(first_seen[key])
        n_ratio.append(Fraction(first_seen[key], n))
        match_fraction.append(Fraction(counts[key], n))
    nested = all(
        set(a).issubset(set(b)) for a, b in zip(keys, keys[1:])
    )
    tail = match_fraction[horizon // 2:]
    independent = max(float(f) for f in tail) < tolerance
    return SetSequenceReport(
        horizon=horizon,
        first_match=first_match,
        n_ratio=n_ratio,
        match_fraction=match_fraction,
        nested=nested,
        independent_limit=independent,
        tolerance=tolerance,
    )


@dataclass
class IntersectionReport:
    """Mean intersection sizes with the next set, plus recurring indices."""

    horizon: int
    mean_intersection: list[Fraction]   # d_N = (1/N) sum_{k<=N} |M_k /\ M_{N+1}|
    cardinality: int
    recurring: list[int]                # indices present in >= threshold sets
    threshold: int


def intersection_diagnostic(seq: SetSequence, horizon: int,
                            threshold: int | None = None) -> IntersectionReport:
    """Finite-horizon proxy for the vanishing-limsup hypothesis.

    Requires the set cardinalities to have settled to a constant on the
    second half of the horizon (the hypothesis holds eventually, not
    necessarily from the first step).
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    sets = [set(s) for s in seq.prefix(horizon + 1)]
    tail_sizes = {len(s) for s in sets[horizon // 2:]}
    if len(tail_sizes) != 1:
        raise ValueError(
            f"set cardinality does not settle (tail sizes {sorted(tail_sizes)})"
        )
    if threshold is None:
        threshold = max(2, horizon // 2)
    mean_intersection: list[Fraction] = []
    for n in range(1, horizon + 1):
        total = sum(len(sets[k] & sets[n]) for k in range(n))
        mean_intersection.append(Fraction(total, n))
    appearance: dict[int, int] = {}
    for s in sets[:horizon]:
        for k in s:
            appearance[k] = appearance.get(k, 0) + 1
    recurring = sorted(k for k, cnt in appearance.items() if cnt >= threshold)
    return IntersectionReport(
        horizon=horizon,
        mean_intersection=mean_intersection,
        cardinality=next(iter(tail_sizes)),
        recurring=recurring,
        threshold=threshold,
    )
