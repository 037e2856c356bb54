"""Sign-valued boolean functions over the subset lattice.

A function psi : {-1,+1}^n -> {-1,+1} admits a unique product
representation over the building blocks u_[K] = max_{k in K} u_k (with
u_[empty] = -1): psi(u) = prod_K u_[K]^beta_K, beta_K in {0,1}.  Inputs are
indexed by the bitmask of coordinates carrying -1, which makes
u_[K] = -1 exactly when K is a submask, and turns conversion between truth
tables and beta coefficient families into the self-inverse GF(2) subset
zeta transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .dyadic import Dyadic

#: Largest n for which 2**n state enumerations are attempted by default.
DEFAULT_ENUM_CAP = 24
#: Largest family size for which 2**|family| expansions are attempted.
DEFAULT_EXPANSION_CAP = 20


class CapacityError(RuntimeError):
    """An enumeration would exceed the configured size cap."""


def check_enum_cap(n: int, cap: int = DEFAULT_ENUM_CAP, what: str = "input arity"):
    if n > cap:
        raise CapacityError(f"{what} {n} exceeds enumeration cap {cap}")


# ---------------------------------------------------------------------------
# Index sets


class IndexSet:
    """An immutable finite set of positive integer indices."""

    __slots__ = ("members",)

    def __init__(self, members: Iterable[int] = ()):
        elems = tuple(sorted(set(int(k) for k in members)))
        if elems and elems[0] < 1:
            raise ValueError(f"indices must be positive, got {elems[0]}")
        object.__setattr__(self, "members", elems)

    def __setattr__(self, name, value):
        raise AttributeError("IndexSet is immutable")

    @classmethod
    def from_mask(cls, mask: int) -> "IndexSet":
        """Build from a bitmask where bit k-1 represents index k."""
        if mask < 0:
            raise ValueError("mask must be non-negative")
        out = []
        k = 1
        while mask:
            if mask & 1:
                out.append(k)
            mask >>= 1
            k += 1
        return cls(out)

    @property
    def mask(self) -> int:
        m = 0
        for k in self.members:
            m |= 1 << (k - 1)
        return m

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.members + other.members)

    def intersection(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(set(self.members) & set(other.members))

    __or__ = union
    __and__ = intersection

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, k):
        return k in self.members

    def __eq__(self, other):
        return isinstance(other, IndexSet) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __str__(self):
        return "{" + ",".join(str(k) for k in self.members) + "}"

    def __repr__(self):
        return f"IndexSet({list(self.members)})"


EMPTY_SET = IndexSet()


def mask_of(u: Sequence[int]) -> int:
    """Bitmask of the coordinates of u equal to -1 (bit k-1 for u_k)."""
    m = 0
    for i, v in enumerate(u):
        if v == -1:
            m |= 1 << i
        elif v != 1:
            raise ValueError(f"coordinate {i + 1} is {v}, expected -1 or +1")
    return m


def subset_max(u: Sequence[int], k_set: IndexSet) -> int:
    """max_{k in K} u_k, with the empty-set convention u_[empty] = -1."""
    if not k_set.members:
        return -1
    if k_set.members[-1] > len(u):
        raise ValueError(
            f"index {k_set.members[-1]} out of range for a vector of length {len(u)}"
        )
    return max(u[k - 1] for k in k_set)


def popcounts(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)


# ---------------------------------------------------------------------------
# Truth tables


class TruthTable:
    """Sign table of a function on {-1,+1}^arity, indexed by -1 bitmasks."""

    __slots__ = ("arity", "signs")

    def __init__(self, arity: int, signs: np.ndarray):
        signs = np.asarray(signs, dtype=np.int8)
        if arity < 0:
            raise ValueError("arity must be non-negative")
        if signs.shape != (1 << arity,):
            raise ValueError(f"expected {1 << arity} entries, got {signs.shape}")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("table values must be -1 or +1")
        signs = signs.copy()
        signs.setflags(write=False)
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "signs", signs)

    def __setattr__(self, name, value):
        raise AttributeError("TruthTable is immutable")

    @classmethod
    def constant(cls, arity: int, value: int) -> "TruthTable":
        return cls(arity, np.full(1 << arity, value, dtype=np.int8))

    @classmethod
    def from_function(cls, arity: int, fn: Callable[[tuple[int, ...]], int],
                      cap: int = DEFAULT_ENUM_CAP) -> "TruthTable":
        check_enum_cap(arity, cap, "truth table arity")
        signs = np.empty(1 << arity, dtype=np.int8)
        for mask in range(1 << arity):
            u = tuple(-1 if (mask >> k) & 1 else 1 for k in range(arity))
            signs[mask] = fn(u)
        return cls(arity, signs)

    @classmethod
    def from_neg_bits(cls, bits: np.ndarray) -> "TruthTable":
        """Build from a 0/1 array marking the inputs mapped to -1."""
        bits = np.asarray(bits)
        arity = int(bits.size).bit_length() - 1
        if bits.size != 1 << arity:
            raise ValueError("bit array length must be a power of two")
        return cls(arity, 1 - 2 * bits.astype(np.int8))

    def neg_bits(self) -> np.ndarray:
        return (self.signs < 0).astype(np.uint8)

    def sign_at(self, mask: int) -> int:
        return int(self.signs[mask])

    def sign(self, u: Sequence[int]) -> int:
        if len(u) < self.arity:
            raise ValueError(f"need {self.arity} coordinates, got {len(u)}")
        return int(self.signs[mask_of(u[: self.arity])])

    def negatives_parity(self) -> int:
        """Parity of the number of inputs mapped to -1."""
        return int(np.count_nonzero(self.signs < 0)) & 1

    def is_symmetric(self) -> bool:
        """True when the value depends on the input only through its sum."""
        nu = popcounts(np.arange(1 << self.arity, dtype=np.uint64))
        for level in range(self.arity + 1):
            vals = self.signs[nu == level]
            if vals.size and not np.all(vals == vals[0]):
                return False
        return True

    def popcount_profile(self) -> np.ndarray:
        """Value on inputs with nu coordinates equal to -1, for nu = 0..arity.

        Raises ValueError when the table is not permutation invariant.
        """
        if not self.is_symmetric():
            raise ValueError("table is not permutation invariant")
        nu = popcounts(np.arange(1 << self.arity, dtype=np.uint64))
        out = np.empty(self.arity + 1, dtype=np.int8)
        for level in range(self.arity + 1):
            out[level] = self.signs[nu == level][0]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, TruthTable)
            and self.arity == other.arity
            and bool(np.array_equal(self.signs, other.signs))
        )

    def __repr__(self):
        if self.arity <= 5:
            body = "".join("-" if s < 0 else "+" for s in self.signs)
            return f"TruthTable({self.arity}, {body!r})"
        return f"TruthTable(arity={self.arity})"


# ---------------------------------------------------------------------------
# Beta coefficient families


class BetaFamily:
    """The index sets carrying exponent 1 in the max-basis product form.

    A family at ``step`` n describes the multiplier applied to the n-th
    increment, a function of the first n-1 increments; members are subsets
    of {1, ..., n-1} and the empty set encodes a constant sign flip.
    """

    __slots__ = ("step", "members")

    def __init__(self, step: int, members: Iterable[IndexSet] = ()):
        if step < 1:
            raise ValueError("step must be >= 1")
        members = frozenset(
            m if isinstance(m, IndexSet) else IndexSet(m) for m in members
        )
        for m in members:
            if m.members and m.members[-1] > step - 1:
                raise ValueError(f"member {m} not a subset of {{1,...,{step - 1}}}")
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "members", members)

    def __setattr__(self, name, value):
        raise AttributeError("BetaFamily is immutable")

    @classmethod
    def from_masks(cls, step: int, masks: Iterable[int]) -> "BetaFamily":
        return cls(step, (IndexSet.from_mask(m) for m in masks))

    @property
    def arity(self) -> int:
        return self.step - 1

    def sorted_members(self) -> list[IndexSet]:
        return sorted(self.members, key=lambda m: (len(m), m.members))

    def member_masks(self) -> list[int]:
        return sorted(m.mask for m in self.members)

    @property
    def contains_full_set(self) -> bool:
        return IndexSet(range(1, self.step)) in self.members

    def evaluate(self, u: Sequence[int]) -> int:
        """prod over members K of u_[K]; +1 for the empty family."""
        sign = 1
        for k_set in self.members:
            sign *= subset_max(u, k_set)
        return sign

    def indicator_bits(self) -> np.ndarray:
        """0/1 array over the 2**(step-1) subset masks, 1 at members."""
        bits = np.zeros(1 << self.arity, dtype=np.uint8)
        for m in self.members:
            bits[m.mask] = 1
        return bits

    def __eq__(self, other):
        return (
            isinstance(other, BetaFamily)
            and self.step == other.step
            and self.members == other.members
        )

    def __hash__(self):
        return hash((self.step, self.members))

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        body = ", ".join(str(m) for m in self.sorted_members())
        return f"BetaFamily(step={self.step}, members=[{body}])"


# ---------------------------------------------------------------------------
# Conversions between the two representations


def subset_xor_transform(bits: np.ndarray) -> np.ndarray:
    """GF(2) zeta transform along the last axis: out[S] = XOR of in[K], K subset of S.

    The transform is an involution over GF(2), so it performs both
    directions of the truth table <-> beta family conversion.  Accepts a
    stacked array of tables and transforms each row.
    """
    bits = np.ascontiguousarray(bits, dtype=np.uint8).copy()
    size = bits.shape[-1]
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError("last axis length must be a power of two")
    lead = bits.shape[:-1]
    for i in range(n):
        view = bits.reshape(lead + (-1, 2, 1 << i))
        view[..., 1, :] ^= view[..., 0, :]
    return bits


def truth_to_beta(table: TruthTable) -> BetaFamily:
    """The unique beta family reproducing the table (steps the arity up by one)."""
    coeffs = subset_xor_transform(table.neg_bits())
    masks = np.flatnonzero(coeffs)
    return BetaFamily.from_masks(table.arity + 1, (int(m) for m in masks))


def beta_to_truth(family: BetaFamily, cap: int = DEFAULT_ENUM_CAP) -> TruthTable:
    """Materialize the sign table of the family's product over all inputs."""
    check_enum_cap(family.arity, cap, "truth table arity")
    bits = subset_xor_transform(family.indicator_bits())
    return TruthTable.from_neg_bits(bits)


# ---------------------------------------------------------------------------
# Linearization of products of maxima


@dataclass(frozen=True)
class LinearExpansion:
    """An affine combination of building blocks: constant + sum c_M * u_[M]."""

    constant: Dyadic
    terms: tuple[tuple[IndexSet, Dyadic], ...]

    def evaluate(self, u: Sequence[int]) -> Dyadic:
        total = self.constant
        for k_set, coeff in self.terms:
            total = total + coeff * subset_max(u, k_set)
        return total

    def evaluate_all(self, n: int) -> tuple[np.ndarray, int]:
        """Exact values on all of {-1,+1}^n as (numerators, shared exponent).

        The value at input mask m is numerators[m] / 2**exponent.
        """
        check_enum_cap(n, what="expansion evaluation arity")
        exp = max([self.constant.exponent] + [c.exponent for _, c in self.terms],
                  default=0)
        masks = np.arange(1 << n, dtype=np.int64)
        nums = np.full(1 << n, self.constant.numerator << (exp - self.constant.exponent),
                       dtype=np.int64)
        for k_set, coeff in self.terms:
            if k_set.members and k_set.members[-1] > n:
                raise ValueError(f"term {k_set} exceeds arity {n}")
            kmask = k_set.mask
            if kmask == 0:
                signs = np.full(1 << n, -1, dtype=np.int64)
            else:
                signs = np.where((masks & kmask) == kmask, -1, 1).astype(np.int64)
            nums += (coeff.numerator << (exp - coeff.exponent)) * signs
        return nums, exp


def _merge_terms(raw: Iterable[tuple[IndexSet, Dyadic]]) -> tuple:
    merged: dict[IndexSet, Dyadic] = {}
    for k_set, coeff in raw:
        if k_set in merged:
            merged[k_set] = merged[k_set] + coeff
        else:
            merged[k_set] = coeff
    items = [(k, c) for k, c in merged.items() if c != 0]
    items.sort(key=lambda kc: (len(kc[0]), kc[0].members))
    return tuple(items)


def linearize_product(sets: Sequence[IndexSet]) -> LinearExpansion:
    """Rewrite prod_j u_[M_j] as an affine combination of single blocks.

    For m sets the expansion is (1/2)(-1)^m minus (1/2) sum over subsets K
    of {1..m} of (-2)^|K| u_[union of M_j, j in K]; coefficients of
    coinciding unions are merged by addition.
    """
    m = len(sets)
    if m < 1:
        raise ValueError("need at least one set")
    constant = Dyadic((-1) ** m, 1)
    raw = []
    for kmask in range(1 << m):
        union = EMPTY_SET
        size = 0
        for j in range(m):
            if (kmask >> j) & 1:
                union = union | sets[j]
                size += 1
        # -(1/2) * (-2)^size  ==  -(-1)^size * 2^(size-1)
        coeff = Dyadic(-((-2) ** size), 1)
        raw.append((union, coeff))
    return LinearExpansion(constant, _merge_terms(raw))


def expand_family(family: BetaFamily,
                  cap: int = DEFAULT_EXPANSION_CAP) -> LinearExpansion:
    """Affine expansion of the family's product over blocks u_[<H>].

    Terms are indexed by sub-collections H of the family, each contributing
    coefficient -(1/2)(-2)^|H| on the block of the union of H.
    """
    members = family.sorted_members()
    b = len(members)
    if b > cap:
        raise CapacityError(f"family size {b} exceeds expansion cap {cap}")
    constant = Dyadic((-1) ** b, 1)
    raw = []
    for hmask in range(1 << b):
        union = EMPTY_SET
        size = 0
        for j in range(b):
            if (hmask >> j) & 1:
                union = union | members[j]
                size += 1
        raw.append((union, Dyadic(-((-2) ** size), 1)))
    return LinearExpansion(constant, _merge_terms(raw))


# ---------------------------------------------------------------------------
# Generic building-block bases from a partial order on the subset lattice


class PartialOrderBasis:
    """Building blocks derived from a labeling of inputs and a strict order.

    ``labels[k_mask]`` gives the input mask labeled by the subset ``k_mask``
    and must be a bijection.  The block attached to K takes the value -1 on
    the input labeled K' exactly when K strictly precedes K' or K = K'.
    Strictness keeps the stored order canonical; the reflexive closure is
    what makes each block see its own label, which is what the triangular
    inversion below needs.
    """

    def __init__(self, arity: int, labels: Sequence[int],
                 precedes: Callable[[int, int], bool], name: str = "custom"):
        size = 1 << arity
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (size,):
            raise ValueError(f"labels must enumerate all {size} inputs")
        if not np.array_equal(np.sort(labels), np.arange(size)):
            raise ValueError("labels is not a bijection")
        self.arity = arity
        self.labels = labels
        self.precedes = precedes
        self.name = name
        inverse = np.empty(size, dtype=np.int64)
        inverse[labels] = np.arange(size)
        self._label_of_input = inverse

    def block_value(self, k_mask: int, input_mask: int) -> int:
        k_prime = int(self._label_of_input[input_mask])
        if k_mask == k_prime or self.precedes(k_mask, k_prime):
            return -1
        return 1

    def block_table(self, k_mask: int) -> TruthTable:
        size = 1 << self.arity
        signs = np.empty(size, dtype=np.int8)
        for m in range(size):
            signs[m] = self.block_value(k_mask, m)
        return TruthTable(self.arity, signs)

    def topological_masks(self) -> list[int]:
        """Subset labels ordered so that predecessors come first."""
        size = 1 << self.arity
        order = []
        placed = np.zeros(size, dtype=bool)
        remaining = set(range(size))
        while remaining:
            layer = [
                k for k in remaining
                if not any(self.precedes(j, k) for j in remaining if j != k)
            ]
            if not layer:
                raise ValueError("order admits no topological enumeration (cycle)")
            for k in sorted(layer):
                order.append(k)
                placed[k] = True
            remaining.difference_update(layer)
        return order

    @classmethod
    def max_basis(cls, arity: int) -> "PartialOrderBasis":
        """Label inputs by their -1 set and order by strict inclusion."""
        labels = np.arange(1 << arity, dtype=np.int64)

        def precedes(a: int, b: int) -> bool:
            return a != b and (a & b) == a

        return cls(arity, labels, precedes, name="max")

    @classmethod
    def min_basis(cls, arity: int) -> "PartialOrderBasis":
        """The max basis conjugated by u -> -u: label inputs by their +1 set."""
        full = (1 << arity) - 1
        labels = np.arange(1 << arity, dtype=np.int64) ^ full

        def precedes(a: int, b: int) -> bool:
            return a != b and (a & b) == a

        return cls(arity, labels, precedes, name="min")

    @classmethod
    def unordered_basis(cls, arity: int) -> "PartialOrderBasis":
        """No strict relations: block K is -1 only on the input labeled K."""
        labels = np.arange(1 << arity, dtype=np.int64)
        return cls(arity, labels, lambda a, b: False, name="unordered")


def change_basis(table: TruthTable, basis: PartialOrderBasis) -> dict[IndexSet, int]:
    """Coefficients gamma with table = prod over K of block_K ** gamma_K.

    Solved by GF(2) elimination along a topological enumeration of the
    order; cost can reach O(4^n) for adversarial orders.
    """
    if basis.arity != table.arity:
        raise ValueError("basis arity does not match table arity")
    order = basis.topological_masks()
    gamma: dict[int, int] = {}
    ones: list[int] = []  # masks with gamma = 1, in topological order
    for k_prime in order:
        input_mask = int(basis.labels[k_prime])
        b = 1 if table.sign_at(input_mask) < 0 else 0
        acc = 0
        for k in ones:
            if basis.precedes(k, k_prime):
                acc ^= 1
        g = b ^ acc
        gamma[k_prime] = g
        if g:
            ones.append(k_prime)
    return {IndexSet.from_mask(k): v for k, v in gamma.items()}


# ---------------------------------------------------------------------------
# Symmetric (permutation invariant) helpers


def binomial_parity(n: int, k: int) -> int:
    """C(n, k) mod 2 via base-2 digit domination."""
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return 0 if (k & (n - k)) else 1


def symmetric_profile_to_levels(profile: Sequence[int]) -> np.ndarray:
    """Level exponents lambda_j of a permutation-invariant sign function.

    ``profile[nu]`` is the value on inputs with nu coordinates equal to -1.
    On such inputs the product of all blocks of size j equals
    (-1)^C(nu, j), so the level bits solve the triangular GF(2) system
    b_nu = sum_j C(nu, j) lambda_j.
    """
    n = len(profile) - 1
    b = [1 if v < 0 else 0 for v in profile]
    levels = np.zeros(n + 1, dtype=np.uint8)
    for nu in range(n + 1):
        acc = 0
        for j in range(nu):
            if levels[j] and binomial_parity(nu, j):
                acc ^= 1
        levels[nu] = b[nu] ^ acc
    return levels


def level_family(step: int, levels: Sequence[int]) -> BetaFamily:
    """Family containing every subset of {1..step-1} whose size has a set level bit."""
    n = step - 1
    check_enum_cap(n, what="level family arity")
    active = [j for j, bit in enumerate(levels) if bit]
    if any(j > n for j in active):
        raise ValueError("level index exceeds arity")
    masks = np.arange(1 << n, dtype=np.uint64)
    keep = np.isin(popcounts(masks), active)
    return BetaFamily.from_masks(step, (int(m) for m in np.flatnonzero(keep)))


def family_levels(family: BetaFamily) -> np.ndarray | None:
    """Level bits when the family is level-constant, else None."""
    n = family.arity
    by_size: dict[int, int] = {}
    from math import comb

    for m in family.members:
        by_size[len(m)] = by_size.get(len(m), 0) + 1
    levels = np.zeros(n + 1, dtype=np.uint8)
    for size, count in by_size.items():
        if count != comb(n, size):
            return None
        levels[size] = 1
    return levels
