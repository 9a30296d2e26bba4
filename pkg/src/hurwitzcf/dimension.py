"""Partition functions, pressure brackets, Bowen-dimension bisection,
convergence exponents, covering thresholds and non-autonomous block
schedules for restricted digit sets.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError
from .gaussian import GaussianInt, norm_sq_shells, shell_members
from .ifs import BRANCH_MIN_NORM_SQ, EngineConstants, _as_digit

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# digit sets


@dataclass(frozen=True)
class DigitSet:
    """Subset of the lattice digit alphabet.

    Radial sets (membership decided by norm_sq alone) are described by a
    half-open norm_sq window [norm_sq_lo, norm_sq_hi); explicit finite sets
    carry their members.  Iteration is norm-ordered with (re, im) ties.
    """

    name: str
    norm_sq_lo: int = 1
    norm_sq_hi: int | None = None  # exclusive; None = unbounded
    explicit: tuple[GaussianInt, ...] | None = None

    @classmethod
    def lattice(cls) -> "DigitSet":
        """All nonzero lattice points."""
        return cls("lattice", 1, None)

    @classmethod
    def lattice_with_zero(cls) -> "DigitSet":
        return cls("lattice0", 0, None)

    @classmethod
    def d2(cls) -> "DigitSet":
        """The branch alphabet: norm_sq >= 8."""
        return cls("d2", BRANCH_MIN_NORM_SQ, None)

    @classmethod
    def annulus(cls, norm_sq_lo: int, norm_sq_hi: int | None) -> "DigitSet":
        hi = "inf" if norm_sq_hi is None else norm_sq_hi
        return cls(f"annulus[{norm_sq_lo},{hi})", norm_sq_lo, norm_sq_hi)

    @classmethod
    def with_min_norm_sq(cls, norm_sq_lo: int) -> "DigitSet":
        return cls(f"min_norm_sq={norm_sq_lo}", norm_sq_lo, None)

    @classmethod
    def from_branches(cls, branches: Iterable) -> "DigitSet":
        members = tuple(
            sorted((_as_digit(b) for b in branches), key=lambda g: (g.norm_sq(), g.re, g.im))
        )
        if not members:
            raise DomainError("empty digit set")
        return cls("explicit", members[0].norm_sq(), members[-1].norm_sq() + 1, members)

    @property
    def is_finite(self) -> bool:
        return self.explicit is not None or self.norm_sq_hi is not None

    def contains(self, g: GaussianInt) -> bool:
        if self.explicit is not None:
            return g in self.explicit
        ns = g.norm_sq()
        if ns < self.norm_sq_lo:
            return False
        return self.norm_sq_hi is None or ns < self.norm_sq_hi

    def members(self) -> tuple[GaussianInt, ...]:
        if self.explicit is not None:
            return self.explicit
        if self.norm_sq_hi is None:
            raise DomainError(f"{self.name} is infinite")
        out: list[GaussianInt] = []
        values, _ = norm_sq_shells(self.norm_sq_hi - 1)
        for ns in values.tolist():
            if ns >= self.norm_sq_lo:
                out.extend(shell_members(int(ns)))
        if self.norm_sq_lo == 0:
            out.insert(0, GaussianInt(0, 0))
        return tuple(out)

    def min_norm_sq(self) -> int:
        if self.explicit is not None:
            return self.explicit[0].norm_sq()
        if self.norm_sq_lo == 0:
            return 0
        # smallest representable norm_sq at or above the cutoff
        values, _ = norm_sq_shells(max(self.norm_sq_lo * 2 + 4, 16))
        for ns in values.tolist():
            if ns >= self.norm_sq_lo and (self.norm_sq_hi is None or ns < self.norm_sq_hi):
                return int(ns)
        raise DomainError(f"{self.name} appears to be empty")

    def shell_counts(self, limit_norm_sq: int) -> tuple[np.ndarray, np.ndarray]:
        """Norm_sq shell values and member counts up to the cutoff."""
        if self.explicit is not None:
            ns = np.array([g.norm_sq() for g in self.explicit], dtype=np.int64)
            ns = ns[ns <= limit_norm_sq]
            return np.unique(ns, return_counts=True)
        values, counts = norm_sq_shells(limit_norm_sq)
        keep = values >= max(self.norm_sq_lo, 1)
        if self.norm_sq_hi is not None:
            keep &= values < self.norm_sq_hi
        return values[keep], counts[keep]

    def norm_sq_array(self, count: int) -> np.ndarray:
        """Norm_sq of the first ``count`` members in enumeration order.

        Zero (when included) occupies the first slot.
        """
        include_zero = self.norm_sq_lo == 0 and self.explicit is None
        parts: list[np.ndarray] = []
        if include_zero:
            parts.append(np.zeros(1))
        total = 1 if include_zero else 0
        limit = max(16, int(4.5 * count / math.pi))
        while total < count:
            values, counts = self.shell_counts(limit)
            total = (1 if include_zero else 0) + int(counts.sum())
            if total >= count:
                break
            limit *= 2
            if self.is_finite and limit > 8 * (self.norm_sq_hi or limit):
                raise DomainError(f"{self.name} has fewer than {count} members")
        parts.append(np.repeat(values.astype(np.float64), counts))
        return np.concatenate(parts)[:count]

    def power_sum_in(self, norm_sq_lo: int, norm_sq_hi: int | None, exponent: float) -> float:
        """Sum of |i|^(-exponent) over members with norm_sq in [lo, hi)."""
        if norm_sq_hi is None:
            raise DomainError("unbounded power sums need a tail bound; see restricted_power_sum")
        values, counts = self.shell_counts(norm_sq_hi - 1)
        keep = values >= norm_sq_lo
        values, counts = values[keep], counts[keep]
        if len(values) == 0:
            return 0.0
        return float(np.sum(counts * np.power(values.astype(np.float64), -exponent / 2.0)))


# ---------------------------------------------------------------------------
# growth functions (tiny expression grammar over n)


class GrowthFunction:
    """Growth bound f(n) parsed from a small expression grammar.

    Supported syntax: numbers, the variable n, parentheses, + - * /, ^ for
    powers, max(a,b), log(a) and sqrt(a).  Evaluation is plain float
    arithmetic, so configurations stay reproducible text.
    """

    def __init__(self, source: str):
        self.source = source.strip()
        self._fn = _parse_growth(self.source)

    def __call__(self, n: int) -> float:
        return float(self._fn(float(n)))

    def __repr__(self) -> str:
        return f"GrowthFunction({self.source!r})"


def _parse_growth(src: str) -> Callable[[float], float]:
    tokens = _tokenize(src)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise DomainError(f"unexpected end of expression in {src!r}")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise DomainError(f"expected {expected!r}, got {tok!r} in {src!r}")
        pos += 1
        return tok

    def parse_expr() -> Callable[[float], float]:
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            lhs = node
            if op == "+":
                node = lambda n, a=lhs, b=rhs: a(n) + b(n)
            else:
                node = lambda n, a=lhs, b=rhs: a(n) - b(n)
        return node

    def parse_term() -> Callable[[float], float]:
        node = parse_power()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_power()
            lhs = node
            if op == "*":
                node = lambda n, a=lhs, b=rhs: a(n) * b(n)
            else:
                node = lambda n, a=lhs, b=rhs: a(n) / b(n)
        return node

    def parse_power() -> Callable[[float], float]:
        base = parse_atom()
        if peek() == "^":
            take()
            exp = parse_power()
            return lambda n, a=base, b=exp: a(n) ** b(n)
        return base

    def parse_atom() -> Callable[[float], float]:
        tok = take()
        if tok == "(":
            inner = parse_expr()
            take(")")
            return inner
        if tok == "-":
            inner = parse_atom()
            return lambda n, a=inner: -a(n)
        if tok == "n":
            return lambda n: n
        if tok == "max":
            take("(")
            first = parse_expr()
            take(",")
            second = parse_expr()
            take(")")
            return lambda n, a=first, b=second: max(a(n), b(n))
        if tok in ("log", "sqrt"):
            take("(")
            inner = parse_expr()
            take(")")
            fn = math.log if tok == "log" else math.sqrt
            return lambda n, a=inner, f=fn: f(a(n))
        try:
            value = float(tok)
        except ValueError as exc:
            raise DomainError(f"bad token {tok!r} in {src!r}") from exc
        return lambda n, v=value: v

    node = parse_expr()
    if pos != len(tokens):
        raise DomainError(f"trailing tokens in {src!r}")
    return node


def _tokenize(src: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*/^(),":
            out.append(ch)
            i += 1
        elif ch.isalpha():
            j = i
            while j < len(src) and src[j].isalpha():
                j += 1
            out.append(src[i:j])
            i = j
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(src) and (src[j].isdigit() or src[j] in ".eE"):
                j += 1
            out.append(src[i:j])
            i = j
        else:
            raise DomainError(f"bad character {ch!r} in {src!r}")
    return out


# ---------------------------------------------------------------------------
# partition function and pressure brackets


@dataclass(frozen=True)
class PressureEstimate:
    """n-normalised log partition sum with distortion brackets.

    The upper bracket is sound for sup-norm sums (submultiplicativity makes
    every finite-n value an upper bound of the limit); the lower bracket is
    sound for base-point sums (they are supermultiplicative up to one
    distortion factor per splice).
    """

    s: float
    n: int
    log_zn_over_n: float
    lower_bracket: float
    upper_bracket: float
    mode: str
    word_count: int
    truncated: bool = False
    dropped_mass: float = 0.0

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "n": self.n,
            "logZ_over_n": self.log_zn_over_n,
            "lo": self.lower_bracket,
            "hi": self.upper_bracket,
        }


def _leaf_values(mat: tuple[int, ...]) -> tuple[float, float]:
    """(sup over box of |Dphi|, |Dphi(0)|) from a composition matrix.

    The matrix is integer 8-tuple (ar, ai, br, bi, cr, ci, dr, di).  With
    w = d/c the exact box minimum of |c z + d|^2 is (nx^2 + ny^2)/(4 |c|^2)
    with nx = max(2 |Re(d conj c)| - |c|^2, 0) and likewise ny, so the sup
    of |Dphi| is the exact rational 4 |c|^2 / (nx^2 + ny^2) (Python's big
    integer division rounds the float correctly).
    """
    _, _, _, _, cr, ci, dr, di = mat
    den = cr * cr + ci * ci
    wr = dr * cr + di * ci
    wi = di * cr - dr * ci
    nx = 2 * abs(wr) - den
    ny = 2 * abs(wi) - den
    nx = nx if nx > 0 else 0
    ny = ny if ny > 0 else 0
    q = nx * nx + ny * ny
    if q == 0:
        raise DomainError("derivative pole inside the box; word is not a branch word")
    return (4 * den) / q, 1.0 / (dr * dr + di * di)


def _extend_mat(mat: tuple[int, ...], xr: int, xi: int) -> tuple[int, ...]:
    ar, ai, br, bi, cr, ci, dr, di = mat
    return (
        br,
        bi,
        ar + br * xr - bi * xi,
        ai + br * xi + bi * xr,
        dr,
        di,
        cr + dr * xr - di * xi,
        ci + dr * xi + di * xr,
    )


_IDENTITY_MAT = (1, 0, 0, 0, 0, 0, 1, 0)


@functools.lru_cache(maxsize=64)
def _word_value_table(digits: tuple[tuple[int, int], ...], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-word (sup, base-point) derivative values, enumerated once.

    Word order is the lexicographic order over the given digit order, so
    sums over the arrays are deterministic.
    """
    sups: list[float] = []
    bases: list[float] = []

    def rec(mat: tuple[int, ...], depth: int) -> None:
        if depth == n:
            sup, base = _leaf_values(mat)
            sups.append(sup)
            bases.append(base)
            return
        for xr, xi in digits:
            rec(_extend_mat(mat, xr, xi), depth + 1)

    rec(_IDENTITY_MAT, 0)
    return np.asarray(sups), np.asarray(bases)


def partition_sum(
    alphabet: DigitSet,
    n: int,
    s: float,
    mode: str = "sup_norm",
    k0: float | None = None,
    max_words: int = 1 << 18,
    prune_tol: float = 0.0,
) -> PressureEstimate:
    """Partition sum over length-n words at inverse-dimension parameter s.

    sup_norm mode bounds each word by its exact supremum derivative over
    the box; base_point mode evaluates the derivative at 0.  When the word
    tree outgrows ``max_words``, subtrees whose bound contributes less than
    prune_tol / (number of words) are dropped and the dropped mass is added
    to the upper bracket; with prune_tol = 0 the budget is a hard error.
    """
    if mode not in ("sup_norm", "base_point"):
        raise DomainError(f"unknown mode {mode!r}")
    if n < 1:
        raise DomainError("word length must be positive")
    if s < 0:
        raise DomainError("s must be nonnegative")
    members = alphabet.members()
    for g in members:
        if g.norm_sq() < BRANCH_MIN_NORM_SQ:
            raise DomainError(f"alphabet digit {g} is not a branch index")
    if not members:
        raise DomainError("alphabet must be nonempty")
    k0 = EngineConstants().k0 if k0 is None else k0
    digits = tuple((g.re, g.im) for g in members)
    nbranch = len(digits)
    total_words = nbranch**n

    if total_words <= max_words:
        sups, bases = _word_value_table(digits, n)
        vals = sups if mode == "sup_norm" else bases
        z = float(np.sum(vals**s))
        log_z = math.log(z) if z > 0 else float("-inf")
        return PressureEstimate(
            s=s,
            n=n,
            log_zn_over_n=log_z / n,
            lower_bracket=(log_z - s * math.log(k0)) / n,
            upper_bracket=log_z / n,
            mode=mode,
            word_count=total_words,
        )

    # pruned enumeration with explicit dropped-mass accounting
    single_sups = [
        _leaf_values(_extend_mat(_IDENTITY_MAT, xr, xi))[0] ** s for xr, xi in digits
    ]
    level_sum = math.fsum(single_sups)
    if prune_tol <= 0.0:
        raise BudgetExceededError(
            f"{nbranch}^{n} words exceed budget {max_words}",
            partial_sum=0.0,
            truncation_bound=level_sum**n,
        )
    threshold = prune_tol / total_words
    terms: list[float] = []
    dropped = 0.0
    kept = 0

    def dfs(mat: tuple[int, ...], depth: int, bound: float) -> None:
        nonlocal dropped, kept
        if bound * (level_sum ** (n - depth)) < threshold:
            dropped += bound * (level_sum ** (n - depth))
            return
        if depth == n:
            kept += 1
            if kept > max_words:
                raise BudgetExceededError(
                    f"kept words exceed budget {max_words}",
                    partial_sum=math.fsum(terms),
                    truncation_bound=dropped + bound,
                )
            sup, base = _leaf_values(mat)
            terms.append((sup if mode == "sup_norm" else base) ** s)
            return
        for (xr, xi), spow in zip(digits, single_sups):
            dfs(_extend_mat(mat, xr, xi), depth + 1, bound * spow)

    dfs(_IDENTITY_MAT, 0, 1.0)
    z = math.fsum(terms)
    log_z = math.log(z) if z > 0 else float("-inf")
    log_z_hi = math.log(z + dropped) if z + dropped > 0 else float("-inf")
    return PressureEstimate(
        s=s,
        n=n,
        log_zn_over_n=log_z / n,
        lower_bracket=(log_z - s * math.log(k0)) / n,
        upper_bracket=log_z_hi / n,
        mode=mode,
        word_count=kept,
        truncated=dropped > 0.0,
        dropped_mass=dropped,
    )


@dataclass(frozen=True)
class BowenDimResult:
    s_low: float
    s_high: float
    n_used: int
    iterations: int
    conclusive: bool
    upper_at_low: float
    lower_at_high: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.s_low + self.s_high)

    @property
    def width(self) -> float:
        return self.s_high - self.s_low

    def to_json(self) -> dict:
        return {"s_low": self.s_low, "s_high": self.s_high, "n_used": self.n_used}


def bowen_dimension(
    alphabet: DigitSet,
    tol: float = 1e-3,
    n_max: int = 12,
    k0: float | None = None,
    max_words: int = 1 << 18,
    max_iterations: int = 64,
) -> BowenDimResult:
    """Bisection for the pressure zero over s in [0, 2].

    At each midpoint the sign is certified when possible: a negative
    sup-norm upper bracket proves negative pressure at every word length;
    a positive base-point lower bracket proves positive pressure.  If
    neither certificate appears by the largest affordable word length, the
    step falls back to the sign of the sup-norm bracket midpoint and the
    result is flagged inconclusive.  The returned endpoints always satisfy
    upper(s_low) >= 0 >= lower(s_high) at the reported word length.
    """
    if not alphabet.is_finite:
        raise DomainError("bowen_dimension needs a finite alphabet")
    members = alphabet.members()
    if not members:
        raise DomainError("alphabet must be nonempty")
    k0 = EngineConstants().k0 if k0 is None else k0
    nbranch = len(members)
    n_eff = 1
    while n_eff < n_max and nbranch ** (n_eff + 1) <= max_words:
        n_eff += 1

    def brackets(s: float, n: int) -> tuple[float, float]:
        sup = partition_sum(alphabet, n, s, "sup_norm", k0, max_words)
        base = partition_sum(alphabet, n, s, "base_point", k0, max_words)
        return base.lower_bracket, sup.upper_bracket

    def certified_sign(s: float) -> tuple[int, bool]:
        """(-1, 0, +1) with a flag saying whether the sign is certified."""
        n = 1
        lower = upper = 0.0
        while True:
            lower, upper = brackets(s, n)
            if upper < 0.0:
                return -1, True
            if lower > 0.0:
                return +1, True
            if n >= n_eff:
                break
            n = min(2 * n, n_eff)
        mid = 0.5 * (lower + upper)
        return (+1 if mid > 0.0 else -1), False

    s_lo, s_hi = 0.0, 2.0
    conclusive = True
    iterations = 0
    # monotonicity sanity of the estimates along the bisection path
    previous: list[tuple[float, float]] = []
    while s_hi - s_lo > tol and iterations < max_iterations:
        mid = 0.5 * (s_lo + s_hi)
        sign, certain = certified_sign(mid)
        conclusive = conclusive and certain
        _, upper_mid = brackets(mid, n_eff)
        for s_prev, up_prev in previous:
            if s_prev < mid and upper_mid > up_prev + 1e-9:
                raise AssertionError("pressure upper bracket not monotone in s")
            if s_prev > mid and upper_mid < up_prev - 1e-9:
                raise AssertionError("pressure upper bracket not monotone in s")
        previous.append((mid, upper_mid))
        if sign > 0:
            s_lo = mid
        else:
            s_hi = mid
        iterations += 1

    _, upper_at_low = brackets(s_lo, n_eff)
    lower_at_high, _ = brackets(s_hi, n_eff)
    return BowenDimResult(
        s_low=s_lo,
        s_high=s_hi,
        n_used=n_eff,
        iterations=iterations,
        conclusive=conclusive,
        upper_at_low=upper_at_low,
        lower_at_high=lower_at_high,
    )


# ---------------------------------------------------------------------------
# convergence exponent


@dataclass(frozen=True)
class TauEstimate:
    estimate: float
    ratio_max: float
    anchor_index: int
    horizon: int
    degenerate: bool
    trajectory_n: np.ndarray = field(repr=False)
    trajectory_x: np.ndarray = field(repr=False)
    trajectory_ratio: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "ratio_max": self.ratio_max,
            "anchor_index": self.anchor_index,
            "horizon": self.horizon,
            "degenerate": self.degenerate,
        }


def tau_exponent(norms: Sequence[float] | np.ndarray, horizon: int) -> TauEstimate:
    """Convergence exponent of a nondecreasing norm sequence.

    The limit being estimated is limsup log n / log x_n.  The plain ratio
    at a finite horizon carries a bias of order 1/log n whenever x_n has a
    power law with a constant factor, so the reported estimate is the
    maximum two-point log-log slope from the tail-window anchor (index
    horizon/10) to later indices where x has at least doubled; the raw
    ratio trajectory is kept for diagnostics.
    """
    if horizon < 1000:
        raise DomainError("horizon must be at least 1000")
    x = np.asarray(norms, dtype=np.float64)[:horizon]
    if len(x) < horizon:
        raise DomainError(f"sequence shorter ({len(x)}) than horizon {horizon}")
    if np.any(np.diff(x) < 0):
        raise DomainError("norm sequence must be nondecreasing")
    if float(x[-1]) <= 1.0:
        raise DomainError("all norms <= 1 within horizon: logarithms degenerate")

    n = np.arange(1, horizon + 1, dtype=np.float64)
    valid = x > 1.0
    ratio = np.full(horizon, np.nan)
    ratio[valid] = np.log(n[valid]) / np.log(x[valid])

    n0 = max(horizon // 10, 10)
    first_valid = int(np.argmax(valid)) + 1
    n0 = max(n0, first_valid)
    x0 = float(x[n0 - 1])

    window = slice(n0 - 1, horizon)
    ratio_max = float(np.nanmax(ratio[window]))

    idx = np.arange(n0, horizon)  # 0-based indices past the anchor
    grown = x[idx] >= 2.0 * x0
    degenerate = not bool(np.any(grown))
    if degenerate:
        estimate = ratio_max
    else:
        sel = idx[grown]
        slopes = (np.log(sel + 1.0) - math.log(n0)) / (np.log(x[sel]) - math.log(x0))
        estimate = float(np.max(slopes))
    return TauEstimate(
        estimate=estimate,
        ratio_max=ratio_max,
        anchor_index=n0,
        horizon=horizon,
        degenerate=degenerate,
        trajectory_n=n,
        trajectory_x=x,
        trajectory_ratio=ratio,
    )


def tau_of_digit_set(s: DigitSet, horizon: int = 200_000) -> TauEstimate:
    """Convergence exponent of the moduli of a digit set's enumeration."""
    ns = s.norm_sq_array(horizon)
    return tau_exponent(np.sqrt(ns), horizon)


# ---------------------------------------------------------------------------
# covering threshold


@dataclass(frozen=True)
class ThresholdResult:
    norm_cutoff: int
    factor: float
    tau: float
    eps: float
    sum_at_cutoff: float
    sum_before_cutoff: float

    def to_json(self) -> dict:
        return {
            "N": self.norm_cutoff,
            "factor": self.factor,
            "tau": self.tau,
            "eps": self.eps,
            "sum_at_N": self.sum_at_cutoff,
            "sum_at_N_minus_1": self.sum_before_cutoff,
        }


def tail_integral_bound(a: float, p: float) -> float:
    """Upper bound on the lattice sum of |i|^-p over |i| >= a, for p > 2.

    Each lattice point owns a unit square within sqrt2/2 of it, so the sum
    is at most the integral of (|x| - sqrt2/2)^-p over |x| >= a - sqrt2/2:
    2 pi [ (a - sqrt2)^(2-p)/(p-2) + (sqrt2/2)(a - sqrt2)^(1-p)/(p-1) ].
    """
    if p <= 2.0:
        raise DomainError("tail bound needs exponent > 2")
    u = a - SQRT2
    if u <= 0:
        raise DomainError("tail bound needs a > sqrt(2)")
    return 2.0 * math.pi * (u ** (2.0 - p) / (p - 2.0) + (SQRT2 / 2.0) * u ** (1.0 - p) / (p - 1.0))


def restricted_power_sum(
    s: DigitSet, norm_cutoff: int, p: float, enum_norm_max: int = 300
) -> float:
    """Estimator of the sum of |i|^-p over members with |i| >= norm_cutoff.

    Shells up to ``enum_norm_max`` are enumerated exactly; the remainder is
    covered by the integral tail bound (an upper bound over the full
    lattice, hence over any subset).
    """
    if norm_cutoff < 1:
        raise DomainError("norm cutoff must be positive")
    head = 0.0
    if norm_cutoff <= enum_norm_max:
        head = s.power_sum_in(norm_cutoff * norm_cutoff, enum_norm_max**2 + 1, p)
    if s.is_finite and s.norm_sq_hi is not None and s.norm_sq_hi <= enum_norm_max**2 + 1:
        return head
    tail_start = math.sqrt(max(norm_cutoff, enum_norm_max) ** 2 + 1)
    return head + tail_integral_bound(tail_start, p)


def upper_threshold(
    s: DigitSet,
    eps: float,
    constants: EngineConstants | None = None,
    tau: float | None = None,
    enum_norm_max: int = 300,
    tau_horizon: int = 100_000,
) -> ThresholdResult:
    """Least norm cutoff N making the weighted covering tail sum <= 1.

    The weight is (k0 k2 c2 / k1)^((tau+eps)/2); the tail sum is evaluated
    by shell enumeration plus the integral tail bound, which is monotone in
    N, so the crossing is located by doubling plus bisection.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    consts = constants or EngineConstants()
    if tau is None:
        tau = tau_of_digit_set(s, tau_horizon).estimate
    p = tau + eps
    factor = (consts.k0 * consts.k2 * consts.c2 / consts.k1) ** (p / 2.0)

    def weighted(n: int) -> float:
        return factor * restricted_power_sum(s, n, p, enum_norm_max)

    n_min = max(1, math.isqrt(s.min_norm_sq()))
    if weighted(n_min) <= 1.0:
        cutoff = n_min
    else:
        hi = n_min + 1
        while weighted(hi) > 1.0:
            hi *= 2
            if hi > 1 << 62:
                raise DomainError("threshold search diverged")
        lo = hi // 2
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if weighted(mid) <= 1.0:
                hi = mid
            else:
                lo = mid
        cutoff = hi
    return ThresholdResult(
        norm_cutoff=cutoff,
        factor=factor,
        tau=tau,
        eps=eps,
        sum_at_cutoff=weighted(cutoff),
        sum_before_cutoff=weighted(cutoff - 1) if cutoff > n_min else float("inf"),
    )


# ---------------------------------------------------------------------------
# non-autonomous block schedules


@dataclass(frozen=True)
class ScheduleBlock:
    """Digit pool and repetition count for one stretch of steps.

    The pool is the annulus of set members with norm_sq in [norm_sq_lo,
    norm_sq_hi); the first block instead uses the single shell at the
    minimal norm (norm_sq_hi equals norm_sq_lo + 1 there).
    """

    index: int
    norm_sq_lo: int
    norm_sq_hi: int
    count: int
    t: int
    start: int

    @property
    def end(self) -> int:
        return self.start + self.t - 1

    def to_json(self) -> dict:
        return {
            "norm_lo": math.sqrt(self.norm_sq_lo),
            "norm_hi": math.sqrt(self.norm_sq_hi),
            "count": self.count,
            "t": self.t,
        }


@dataclass(frozen=True)
class NonAutSchedule:
    """Blocks (digit pool, length) realising a non-autonomous digit system."""

    digit_set: DigitSet
    anchors: tuple[GaussianInt, ...]
    blocks: tuple[ScheduleBlock, ...]
    horizon: int
    eps: float
    ratio_tol: float
    tau_estimate: float
    f_source: str
    truncated: bool = False
    warning: str | None = None

    def block_of(self, n: int) -> ScheduleBlock:
        if n < 1 or n > self.horizon:
            raise DomainError(f"step {n} outside horizon {self.horizon}")
        for blk in self.blocks:
            if blk.start <= n <= blk.end:
                return blk
        return self.blocks[-1]

    def declared_ratio_tolerance(self, m: int) -> float:
        """Per-block tolerance schedule for the size/length ratios."""
        if m < 2:
            return float("inf")
        return self.ratio_tol / m

    def to_json(self) -> dict:
        return {
            "anchors": [a.to_pair() for a in self.anchors],
            "blocks": [b.to_json() for b in self.blocks],
            "horizon": self.horizon,
            "eps": self.eps,
            "ratio_tol": self.ratio_tol,
            "tau_estimate": self.tau_estimate,
            "f": self.f_source,
            "truncated": self.truncated,
        }


class _ShellTable:
    """Growable cache of a digit set's shells."""

    def __init__(self, s: DigitSet):
        self.set = s
        self.limit = 64
        self.values, self.counts = s.shell_counts(self.limit)

    def ensure(self, norm_sq: int) -> None:
        while self.limit < norm_sq:
            self.limit *= 2
            self.values, self.counts = self.set.shell_counts(self.limit)

    def next_shell_after(self, norm_sq: int) -> int:
        self.ensure(norm_sq * 2 + 16)
        later = self.values[self.values > norm_sq]
        while len(later) == 0:
            self.limit *= 2
            self.values, self.counts = self.set.shell_counts(self.limit)
            later = self.values[self.values > norm_sq]
        return int(later[0])

    def weight(self, norm_sq_lo: int, norm_sq_hi: int, exponent: float) -> float:
        """Sum of |i|^-exponent over shells in [lo, hi)."""
        self.ensure(norm_sq_hi)
        keep = (self.values >= norm_sq_lo) & (self.values < norm_sq_hi)
        vals = self.values[keep].astype(np.float64)
        cnts = self.counts[keep]
        if len(vals) == 0:
            return 0.0
        return float(np.sum(cnts * np.power(vals, -exponent / 2.0)))

    def count(self, norm_sq_lo: int, norm_sq_hi: int) -> int:
        self.ensure(norm_sq_hi)
        keep = (self.values >= norm_sq_lo) & (self.values < norm_sq_hi)
        return int(self.counts[keep].sum())


def _clearance_index(f: Callable[[int], float], level: float, horizon: int) -> int | None:
    """Smallest n0 with f(n) >= level for every n in [n0, horizon]."""
    n0 = None
    for n in range(horizon, 0, -1):
        if f(n) >= level:
            n0 = n
        else:
            break
    return n0


def build_schedule(
    s: DigitSet,
    f: GrowthFunction | Callable[[int], float],
    eps: float,
    horizon: int,
    ratio_tol: float = 0.1,
    tau: float | None = None,
    tau_horizon: int = 200_000,
) -> NonAutSchedule:
    """Greedy block schedule matching a growth bound.

    Anchors are chosen minimally so each norm annulus [|z_m|, |z_{m+1}|)
    carries weight sum |i|^-(tau-eps) >= 1; block lengths are minimal
    subject to (i) every step of block m+1 clearing the growth bound at
    level |z_{m+2}| and (ii) the size/length ratio log(#pool)/start falling
    below ratio_tol/m.  Construction stops at the horizon; an unreachable
    clearance level truncates the schedule with a warning instead of
    failing.
    """
    if s.is_finite:
        raise DomainError("schedule construction needs an infinite digit set")
    if horizon < 10:
        raise DomainError("horizon too small")
    f_source = f.source if isinstance(f, GrowthFunction) else getattr(f, "__name__", "callable")
    fn = f if callable(f) else f.__call__
    if tau is None:
        tau = tau_of_digit_set(s, tau_horizon).estimate
    if not 0.0 < eps < tau:
        raise DomainError(f"eps must lie in (0, tau={tau:.4f})")
    p = tau - eps

    shells = _ShellTable(s)
    min_ns = s.min_norm_sq()

    # anchors: z_1 at the minimal norm, then minimal norms making each
    # annulus weight reach 1
    anchor_ns: list[int] = [min_ns]
    anchors: list[GaussianInt] = [shell_members(min_ns)[0]]

    def extend_anchors(upto: int) -> None:
        while len(anchor_ns) < upto:
            lo = anchor_ns[-1]
            hi = shells.next_shell_after(lo)
            while shells.weight(lo, hi, p) < 1.0:
                hi = shells.next_shell_after(hi)
            nxt = hi
            anchor_ns.append(nxt)
            anchors.append(shell_members(nxt)[0])

    blocks: list[ScheduleBlock] = []
    start = 1
    m = 1
    truncated = False
    warning = None
    while start <= horizon:
        extend_anchors(m + 2)
        if m == 1:
            lo, hi = anchor_ns[0], shells.next_shell_after(anchor_ns[0])
        else:
            lo, hi = anchor_ns[m - 1], anchor_ns[m]
        count = shells.count(lo, hi)

        # start of the next block: clearance for its growth level plus the
        # ratio requirement for its pool size
        nxt_lo, nxt_hi = anchor_ns[m], anchor_ns[m + 1]
        nxt_count = shells.count(nxt_lo, nxt_hi)
        level = math.sqrt(anchor_ns[m + 1])  # |z_{m+2}|, the bound block m+1 must clear
        clearance = _clearance_index(fn, level, horizon)
        if clearance is None:
            blocks.append(
                ScheduleBlock(m, lo, hi, count, horizon - start + 1, start)
            )
            truncated = True
            warning = (
                f"growth bound never reaches level {level:.3f} within horizon; "
                f"schedule truncated at block {m}"
            )
            break
        ratio_need = int(math.ceil((m + 1) * math.log(max(nxt_count, 2)) / ratio_tol))
        next_start = max(start + 1, clearance, ratio_need)
        if next_start > horizon:
            blocks.append(ScheduleBlock(m, lo, hi, count, horizon - start + 1, start))
            break
        blocks.append(ScheduleBlock(m, lo, hi, count, next_start - start, start))
        start = next_start
        m += 1

    return NonAutSchedule(
        digit_set=s,
        anchors=tuple(anchors[: len(blocks) + 1]),
        blocks=tuple(blocks),
        horizon=horizon,
        eps=eps,
        ratio_tol=ratio_tol,
        tau_estimate=tau,
        f_source=f_source,
        truncated=truncated,
        warning=warning,
    )


def validate_schedule(
    sched: NonAutSchedule, f: GrowthFunction | Callable[[int], float] | None = None
) -> list[dict]:
    """Re-derive every schedule requirement from scratch.

    Checks, independently of the builder: the first anchor sits at the
    set's minimal norm; every anchor annulus carries weight >= 1 at
    exponent -(tau - eps); block pools match the stated annuli member for
    member; every step of block m >= 2 clears the growth bound at the next
    anchor level; and the size/length ratios respect the declared
    tolerance schedule.  Returns a list of {check, status, witness?}.
    """
    s = sched.digit_set
    shells = _ShellTable(s)
    p = sched.tau_estimate - sched.eps
    checks: list[dict] = []

    def add(name: str, ok: bool, witness: dict | None = None) -> None:
        entry = {"check": name, "status": "pass" if ok else "fail"}
        if witness is not None and not ok:
            entry["witness"] = witness
        checks.append(entry)

    # anchor start at minimal norm
    add(
        "anchor_start_at_min_norm",
        sched.anchors[0].norm_sq() == s.min_norm_sq(),
        {"anchor": sched.anchors[0].to_pair(), "min_norm_sq": s.min_norm_sq()},
    )

    # strictly increasing anchors, annulus weights >= 1
    ok_order = all(
        sched.anchors[i].norm_sq() < sched.anchors[i + 1].norm_sq()
        for i in range(len(sched.anchors) - 1)
    )
    add("anchors_strictly_increasing", ok_order)
    bad = None
    for i in range(len(sched.anchors) - 1):
        lo = sched.anchors[i].norm_sq()
        hi = sched.anchors[i + 1].norm_sq()
        w = shells.weight(lo, hi, p)
        if w < 1.0 - 1e-12:
            bad = {"annulus": [lo, hi], "weight": w}
            break
    add("annulus_weight_at_least_one", bad is None, bad)

    # block membership: counts re-derived from shell enumeration
    bad = None
    for blk in sched.blocks:
        expect_lo = (
            sched.anchors[0].norm_sq()
            if blk.index == 1
            else sched.anchors[blk.index - 1].norm_sq()
        )
        if blk.index == 1:
            expect_hi = shells.next_shell_after(expect_lo)
        else:
            expect_hi = sched.anchors[blk.index].norm_sq()
        count = shells.count(blk.norm_sq_lo, blk.norm_sq_hi)
        if (blk.norm_sq_lo, blk.norm_sq_hi, blk.count) != (expect_lo, expect_hi, count):
            bad = {
                "block": blk.index,
                "stated": [blk.norm_sq_lo, blk.norm_sq_hi, blk.count],
                "expected": [expect_lo, expect_hi, count],
            }
            break
    add("block_membership", bad is None, bad)

    # growth domination for blocks m >= 2
    if f is not None:
        fn = f if callable(f) else f.__call__
        bad = None
        for blk in sched.blocks[1:]:
            if blk.index >= len(sched.anchors):
                continue
            level = math.sqrt(sched.anchors[blk.index].norm_sq())
            for n in range(blk.start, blk.end + 1):
                if fn(n) < level and not sched.truncated:
                    bad = {"block": blk.index, "n": n, "f": fn(n), "level": level}
                    break
            if bad:
                break
        add("growth_domination", bad is None, bad)

    # ratio tolerance schedule
    bad = None
    for blk in sched.blocks:
        if blk.index < 2:
            continue
        tol = sched.declared_ratio_tolerance(blk.index)
        ratio_start = math.log(max(blk.count, 1)) / blk.start
        ratio_end = math.log(max(blk.count, 1)) / blk.end
        if ratio_start > tol or ratio_end > tol:
            bad = {"block": blk.index, "ratio": ratio_start, "tol": tol}
            break
    add("ratio_tolerance_schedule", bad is None, bad)

    # blocks tile [1, horizon]
    ok_tile = sched.blocks[0].start == 1 and sched.blocks[-1].end == sched.horizon
    ok_tile = ok_tile and all(
        sched.blocks[i].end + 1 == sched.blocks[i + 1].start
        for i in range(len(sched.blocks) - 1)
    )
    add("blocks_tile_horizon", ok_tile)
    return checks


@dataclass(frozen=True)
class SubexpTrajectory:
    n: np.ndarray
    ratio: np.ndarray
    final_window_max: float
    ratio_tol: float

    @property
    def ok(self) -> bool:
        return self.final_window_max < self.ratio_tol

    def to_json(self) -> dict:
        return {
            "final_window_max": self.final_window_max,
            "ratio_tol": self.ratio_tol,
            "ok": self.ok,
        }


def subexp_check(sched: NonAutSchedule) -> SubexpTrajectory:
    """Trajectory of log(pool size)/n over the horizon.

    The final-window maximum (last tenth of the horizon) must stay below
    the schedule's ratio tolerance for the system to count as
    subexponentially bounded at desk scale.
    """
    ns = np.arange(1, sched.horizon + 1, dtype=np.float64)
    sizes = np.empty(sched.horizon, dtype=np.float64)
    for blk in sched.blocks:
        sizes[blk.start - 1 : blk.end] = max(blk.count, 1)
    ratio = np.log(sizes) / ns
    window_start = max(int(0.9 * sched.horizon) - 1, 0)
    return SubexpTrajectory(
        n=ns,
        ratio=ratio,
        final_window_max=float(ratio[window_start:].max()),
        ratio_tol=sched.ratio_tol,
    )


@dataclass(frozen=True)
class ChainResult:
    """Outcome of the explicit partition-sum lower bound."""

    s_value: float
    block_cutoff: int
    n_independent_from: int
    log_lower_bound: float
    positive: bool

    def to_json(self) -> dict:
        return {
            "s": self.s_value,
            "N": self.block_cutoff,
            "n_independent_from": self.n_independent_from,
            "log_lower_bound": self.log_lower_bound,
            "positive": self.positive,
        }


def verify_lower_bound_chain(
    sched: NonAutSchedule,
    eps: float,
    delta: float,
    n: int,
    c1: Fraction = Fraction(16, 25),
) -> ChainResult:
    """Evaluate the explicit n-independent lower bound on the partition sum.

    With s = (tau - eps)/(2 + delta), the first N blocks contribute the
    explicit product c1^(N s) |z_1|^(-2 s t_1) prod_m (sum over pool of
    |i|^-2s)^(t_m); blocks beyond N carry exponent -(2+delta)s = -(tau-eps)
    and each contributes a factor >= 1 by the annulus weight construction,
    so the bound does not depend on n.  N is the first block index from
    which c1/|i|^2 >= |i|^-(2+delta) holds for all later digits.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    if n > sched.horizon:
        raise DomainError(f"n = {n} beyond schedule horizon {sched.horizon}")
    tau = sched.tau_estimate
    if not 0 < eps < tau:
        raise DomainError("eps must lie in (0, tau)")
    s_val = (tau - eps) / (2.0 + delta)

    # smallest anchor index from which the decay floor dominates the
    # (2+delta)-power: |z_{N+1}|^delta >= 1/c1
    ns_threshold = math.exp(-2.0 * math.log(float(c1)) / delta)
    cutoff = None
    for idx in range(1, len(sched.anchors)):
        if sched.anchors[idx].norm_sq() >= ns_threshold:
            cutoff = idx
            break
    if cutoff is None:
        raise DomainError(
            "schedule anchors never reach the decay-floor threshold "
            f"(norm_sq >= {ns_threshold:.1f}); build with a larger horizon"
        )
    if cutoff > len(sched.blocks):
        raise DomainError("decay-floor block index beyond built blocks")

    end_cutoff = sched.blocks[cutoff - 1].end
    if n <= end_cutoff:
        raise DomainError(
            f"n = {n} lies inside the first {cutoff} blocks (ends at {end_cutoff}); "
            "the n-independent bound needs n beyond them"
        )

    shells = _ShellTable(sched.digit_set)
    t1 = sched.blocks[0].t
    z1_ns = sched.anchors[0].norm_sq()
    log_bound = cutoff * s_val * math.log(float(c1))
    log_bound += -s_val * t1 * math.log(z1_ns)  # |z_1|^(-2 s t_1)
    for blk in sched.blocks[1:cutoff]:
        w = shells.weight(blk.norm_sq_lo, blk.norm_sq_hi, 2.0 * s_val)
        log_bound += blk.t * math.log(w)

    # blocks after the cutoff must each contribute a factor >= 1
    positive = math.isfinite(log_bound)
    target = sched.block_of(n).index
    for blk in sched.blocks[cutoff:target]:
        w = shells.weight(blk.norm_sq_lo, blk.norm_sq_hi, (2.0 + delta) * s_val)
        if w < 1.0 - 1e-9:
            positive = False
            break
    return ChainResult(
        s_value=s_val,
        block_cutoff=cutoff,
        n_independent_from=end_cutoff + 1,
        log_lower_bound=log_bound,
        positive=positive,
    )
