"""Exact Gaussian-integer and Gaussian-rational arithmetic.

Everything here is exact: integers are arbitrary precision, rational
coordinates are ``fractions.Fraction`` (always in reduced canonical form
with positive denominator).  Floating point never enters a comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError

Rat = int | Fraction


@dataclass(frozen=True)
class GaussianInt:
    """Element of the Gaussian-integer lattice."""

    re: int = 0
    im: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.re, int) or not isinstance(self.im, int):
            raise TypeError("GaussianInt coordinates must be ints")

    # -- ring operations ---------------------------------------------------
    def __add__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianInt":
        return GaussianInt(-self.re, -self.im)

    def __mul__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm_sq(self) -> int:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def lex_key(self) -> tuple[int, int]:
        return (self.re, self.im)

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        imag = f"{abs(self.im)}i" if abs(self.im) != 1 else "i"
        sign = "-" if self.im < 0 else ("+" if self.re != 0 else "")
        if self.re == 0:
            return f"{sign}{imag}"
        return f"{self.re}{sign if sign else '+'}{imag}"

    def to_pair(self) -> list[int]:
        return [self.re, self.im]

    @classmethod
    def from_pair(cls, pair: Sequence[int]) -> "GaussianInt":
        if len(pair) != 2:
            raise ValueError(f"expected [re, im], got {pair!r}")
        return cls(int(pair[0]), int(pair[1]))


@dataclass(frozen=True)
class ExactComplexRational:
    """Element of the Gaussian field with exact rational coordinates."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        # normalise ints to Fractions so equality and hashing are canonical
        if not isinstance(self.re, Fraction):
            object.__setattr__(self, "re", Fraction(self.re))
        if not isinstance(self.im, Fraction):
            object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def from_gaussian(cls, g: GaussianInt) -> "ExactComplexRational":
        return cls(Fraction(g.re), Fraction(g.im))

    # -- field operations --------------------------------------------------
    def __add__(self, other: "ExactComplexRational") -> "ExactComplexRational":
        return ExactComplexRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExactComplexRational") -> "ExactComplexRational":
        return ExactComplexRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ExactComplexRational":
        return ExactComplexRational(-self.re, -self.im)

    def __mul__(self, other: "ExactComplexRational") -> "ExactComplexRational":
        return ExactComplexRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def norm_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def reciprocal(self) -> "ExactComplexRational":
        n = self.norm_sq()
        if n == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return ExactComplexRational(self.re / n, -self.im / n)

    def __truediv__(self, other: "ExactComplexRational") -> "ExactComplexRational":
        return self * other.reciprocal()

    def conj(self) -> "ExactComplexRational":
        return ExactComplexRational(self.re, -self.im)

    def sub_gaussian(self, g: GaussianInt) -> "ExactComplexRational":
        return ExactComplexRational(self.re - g.re, self.im - g.im)

    def add_gaussian(self, g: GaussianInt) -> "ExactComplexRational":
        return ExactComplexRational(self.re + g.re, self.im + g.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def in_unit_box(self) -> bool:
        """Half-open fundamental box: -1/2 <= re < 1/2 and likewise for im."""
        h = Fraction(1, 2)
        return -h <= self.re < h and -h <= self.im < h

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        return f"{self.re}{'+' if self.im >= 0 else ''}{self.im}i"


ZERO = ExactComplexRational()


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def nearest_round(z: ExactComplexRational) -> GaussianInt:
    """Nearest lattice point, via floor(coordinate + 1/2) on each axis.

    Half-integer coordinates round up, which keeps the residual inside the
    half-open fundamental box.
    """
    h = Fraction(1, 2)
    return GaussianInt(_floor_frac(z.re + h), _floor_frac(z.im + h))


def count_in_square(n: int) -> int:
    """Number of lattice points in the closed square [-n, n]^2.

    Counted by explicit enumeration so the closed form (2n+1)^2 stays an
    independent fact to test against.
    """
    if n < 0:
        raise DomainError("square half-width must be nonnegative")
    count = 0
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            if abs(a) <= n and abs(b) <= n:
                count += 1
    return count


def _sorted_lattice_arrays(min_count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First >= min_count lattice points sorted by (norm_sq, re, im).

    Returns (re, im, norm_sq) arrays.  A centred grid of half-width w
    contains the (2w+1)^2 closest points only up to norm w, so we take w
    large enough that the disc of radius w already holds min_count points.
    """
    w = int(math.isqrt(int(min_count / math.pi))) + 2
    while (2 * w + 1) ** 2 < min_count or math.pi * w * w < min_count:
        w += max(w // 2, 1)
    rng = np.arange(-w, w + 1, dtype=np.int64)
    re, im = np.meshgrid(rng, rng, indexing="ij")
    re = re.ravel()
    im = im.ravel()
    ns = re * re + im * im
    # points beyond norm w may be missing siblings of equal norm; drop them
    keep = ns <= w * w
    re, im, ns = re[keep], im[keep], ns[keep]
    order = np.lexsort((im, re, ns))
    return re[order], im[order], ns[order]


def enumerate_by_norm(include_zero: bool, limit: int) -> list[GaussianInt]:
    """First ``limit`` lattice points ordered by norm, ties (re, im)-lexicographic."""
    if limit < 1:
        raise DomainError("limit must be positive")
    need = limit + (0 if include_zero else 1)
    re, im, _ = _sorted_lattice_arrays(need)
    out: list[GaussianInt] = []
    for a, b in zip(re.tolist(), im.tolist()):
        if not include_zero and a == 0 and b == 0:
            continue
        out.append(GaussianInt(a, b))
        if len(out) == limit:
            break
    return out


def lattice_norm_sq_array(count: int, include_zero: bool = True) -> np.ndarray:
    """Norm-squared values of the first ``count`` lattice points in enumeration order."""
    if count < 1:
        raise DomainError("count must be positive")
    need = count + (0 if include_zero else 1)
    _, _, ns = _sorted_lattice_arrays(need)
    if not include_zero:
        ns = ns[ns > 0]
    return ns[:count].astype(np.float64)


def norm_sq_shells(limit_norm_sq: int) -> tuple[np.ndarray, np.ndarray]:
    """Lattice shells up to a norm-squared cutoff.

    Returns (values, counts): the distinct nonzero norm-squared values
    <= limit_norm_sq in increasing order and the number of lattice points
    on each shell.
    """
    if limit_norm_sq < 1:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    w = math.isqrt(limit_norm_sq)
    rng = np.arange(-w, w + 1, dtype=np.int64)
    re, im = np.meshgrid(rng, rng, indexing="ij")
    ns = (re * re + im * im).ravel()
    ns = ns[(ns > 0) & (ns <= limit_norm_sq)]
    values, counts = np.unique(ns, return_counts=True)
    return values, counts


def shell_members(norm_sq: int) -> list[GaussianInt]:
    """All lattice points with the given norm squared, (re, im)-lexicographic."""
    out = []
    w = math.isqrt(norm_sq)
    for a in range(-w, w + 1):
        rem = norm_sq - a * a
        b = math.isqrt(rem)
        if b * b == rem:
            if b == 0:
                out.append(GaussianInt(a, 0))
            else:
                out.append(GaussianInt(a, -b))
                out.append(GaussianInt(a, b))
    return sorted(out, key=GaussianInt.lex_key)


def parse_exact_complex(text: str) -> ExactComplexRational:
    """Parse strings like ``2/5+0/1 i``, ``-3/10+17/10i`` or ``1/2-1/3 i``.

    Plain integers are accepted for either coordinate; a missing imaginary
    part means zero.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise DomainError("empty complex literal")

    def parse_frac(tok: str) -> Fraction:
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad rational {tok!r} in {text!r}") from exc

    if not s.endswith("i"):
        return ExactComplexRational(parse_frac(s), Fraction(0))
    body = s[:-1]
    # the imaginary part starts at the last sign that follows a digit
    split = -1
    for idx in range(1, len(body)):
        if body[idx] in "+-" and body[idx - 1].isdigit():
            split = idx
    if split < 0:
        re_tok, im_tok = "0", body
    else:
        re_tok, im_tok = body[:split], body[split:]
    if im_tok in ("", "+", "-"):
        im_tok += "1"
    return ExactComplexRational(parse_frac(re_tok), parse_frac(im_tok))
