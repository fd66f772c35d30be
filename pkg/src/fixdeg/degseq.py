"""Degree sequences, degree profiles, and head/body/tail cutoffs."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


@dataclass(frozen=True)
class DegreeSequence:
    """Non-increasing tuple of vertex degrees."""

    degrees: tuple[int, ...]

    def __init__(self, degrees: Iterable[int]):
        ds = tuple(int(d) for d in degrees)
        if any(d < 0 for d in ds):
            raise ValueError("degrees must be non-negative")
        object.__setattr__(self, "degrees", tuple(sorted(ds, reverse=True)))

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def min_degree(self) -> int:
        return self.degrees[-1] if self.degrees else 0

    @property
    def max_degree(self) -> int:
        return self.degrees[0] if self.degrees else 0

    @property
    def total(self) -> int:
        return sum(self.degrees)

    @property
    def m(self) -> int:
        """Half the degree sum (edge count of any realization)."""
        return self.total // 2

    def is_even(self) -> bool:
        return self.total % 2 == 0

    def __iter__(self):
        return iter(self.degrees)

    def __len__(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class DegreeProfile:
    """Number of vertices of each degree; zero counts are dropped."""

    counts: Mapping[int, int] = field(default_factory=dict)

    def __init__(self, counts: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        clean: dict[int, int] = {}
        for d, c in items:
            d, c = int(d), int(c)
            if d < 0 or c < 0:
                raise ValueError(f"invalid profile entry {d}: {c}")
            if c:
                clean[d] = clean.get(d, 0) + c
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    @property
    def min_degree(self) -> int:
        return min(self.counts) if self.counts else 0

    @property
    def max_degree(self) -> int:
        return max(self.counts) if self.counts else 0

    @property
    def total(self) -> int:
        return sum(d * c for d, c in self.counts.items())

    def get(self, d: int) -> int:
        return self.counts.get(d, 0)

    def average_degree(self) -> Fraction:
        if not self.n:
            raise ValueError("empty profile")
        return Fraction(self.total, self.n)

    def to_sequence(self) -> DegreeSequence:
        return DegreeSequence(d for d, c in self.counts.items() for _ in range(c))

    def __hash__(self) -> int:
        return hash(tuple(self.counts.items()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DegreeProfile) and self.counts == other.counts


@dataclass(frozen=True)
class Cutoff:
    C: int
    D: int
    delta: int

    def __post_init__(self):
        if not (self.delta < self.C <= self.D):
            raise ValueError(f"cutoff needs delta < C <= D, got delta={self.delta}, C={self.C}, D={self.D}")


def profile_of(seq: DegreeSequence | Iterable[int]) -> DegreeProfile:
    return DegreeProfile(Counter(seq))


def max_degree_sum(seq: DegreeSequence, s: int) -> int:
    """Largest total degree of ``s`` vertices."""
    if not 0 <= s <= seq.n:
        raise ValueError(f"s={s} outside 0..{seq.n}")
    return sum(seq.degrees[:s])


@dataclass(frozen=True)
class LightTailResult:
    passed: bool
    violation_t: int | None  # smallest t with D(t) too large; 0 flags the max-degree clause
    reason: str = ""


def light_tail_check(seq: DegreeSequence, C: float, alpha: float) -> LightTailResult:
    """Max degree at most n^(1/6) and D(t) <= C n (t/n)^alpha for every t."""
    if not 0.5 < alpha < 1:
        raise ValueError("alpha must lie in (1/2, 1)")
    n = seq.n
    if n < 1:
        raise ValueError("empty sequence")
    if seq.max_degree > n ** (1 / 6):
        return LightTailResult(False, 0, "max degree exceeds n^(1/6)")
    running = 0
    for t, d in enumerate(seq.degrees, 1):
        running += d
        if running > C * n * (t / n) ** alpha:
            return LightTailResult(False, t, "D(t) bound")
    return LightTailResult(True, None)


def head_body_tail(profile: DegreeProfile, cutoff: Cutoff) -> tuple[Fraction, Fraction, Fraction]:
    """Degree mass per vertex in the ranges delta+1..C, C..D and >= D.

    The ranges share their endpoints C and D on purpose.
    """
    n = profile.n
    if not n:
        raise ValueError("empty profile")
    head = body = tail = 0
    for d, c in profile.counts.items():
        w = d * c
        if cutoff.delta + 1 <= d <= cutoff.C:
            head += w
        if cutoff.C <= d <= cutoff.D:
            body += w
        if d >= cutoff.D:
            tail += w
    return Fraction(head, n), Fraction(body, n), Fraction(tail, n)


def _upper_mass(profile: DegreeProfile, threshold: int, strict: bool = False) -> Fraction:
    n = profile.n
    return Fraction(sum(d * c for d, c in profile.counts.items() if (d > threshold if strict else d >= threshold)), n)


def compute_cutoff(
    profile: DegreeProfile,
    eps: float,
    mu: float | None = None,
    alpha: float | None = None,
    strategy: str = "small_tail",
) -> Cutoff:
    """Pick degree cutoffs (C, D) with positive head, body and tail.

    First tries a pair with small body plus tail: C is the smallest degree
    whose upper mass sum_{d>=C} d p_d / n is positive and below eps/2, and D
    the smallest degree >= C whose strict upper mass falls below that of C.
    If no such C exists, falls back to the single heavy degree
    D' = min{d > delta : d p_d >= alpha n} giving (D', D'), and failing that
    to the smallest pair bracketing eps n / 8 of cumulative mass.
    ``strategy="heavy_first"`` skips the first step.
    """
    if strategy not in ("small_tail", "heavy_first"):
        raise ValueError(f"unknown strategy {strategy!r}")
    eps_f = Fraction(eps).limit_denominator(10**9)
    if eps_f <= 0:
        raise ValueError("eps must be positive")
    n = profile.n
    if n == 0:
        raise ValueError("empty profile")
    delta = profile.min_degree
    avg = profile.average_degree()
    if avg < delta + eps_f:
        raise ValueError(f"average degree {float(avg):.4g} below delta + eps = {float(delta + eps_f):.4g}")
    if mu is not None and avg > Fraction(mu).limit_denominator(10**9):
        raise ValueError(f"average degree {float(avg):.4g} exceeds mu = {mu}")
    alpha_f = eps_f / 16 if alpha is None else Fraction(alpha).limit_denominator(10**9)
    if not 0 < alpha_f < eps_f / 8:
        raise ValueError("alpha must satisfy 0 < alpha < eps/8")

    degrees = [d for d in profile.counts if d > delta]
    if not degrees:
        raise ValueError("profile has no mass above the minimum degree")

    def valid(c: int, d: int) -> Cutoff | None:
        try:
            cut = Cutoff(c, d, delta)
        except ValueError:
            return None
        if all(x > 0 for x in head_body_tail(profile, cut)):
            return cut
        return None

    # small body + tail
    for c in degrees if strategy == "small_tail" else ():
        s_c = _upper_mass(profile, c)
        if 0 < s_c < eps_f / 2:
            for d in degrees:
                if d >= c and _upper_mass(profile, d, strict=True) < s_c:
                    cut = valid(c, d)
                    if cut is not None:
                        return cut
            break

    # one heavy degree
    for d in degrees:
        if d * profile.get(d) >= alpha_f * n:
            cut = valid(d, d)
            if cut is not None:
                return cut
            break

    # bracketing pair: cumulative mass first reaches eps n / 8 at C, then again from C at D
    target = eps_f * n / 8
    acc = 0
    c_pick = None
    for d in degrees:
        acc += d * profile.get(d)
        if acc >= target:
            c_pick = d
            break
    if c_pick is not None:
        acc = 0
        for d in degrees:
            if d < c_pick:
                continue
            acc += d * profile.get(d)
            if acc >= target:
                cut = valid(c_pick, d)
                if cut is not None:
                    return cut
                break
    raise ValueError("no admissible cutoff for this profile")


def linearly_unbounded_check(profiles: Iterable[DegreeProfile], D: int) -> float:
    """Smallest fraction of vertices with degree >= D across a finite family."""
    vals = [sum(c for d, c in p.counts.items() if d >= D) / p.n for p in profiles]
    if not vals:
        raise ValueError("no profiles supplied")
    return min(vals)


# -- file formats ------------------------------------------------------------


def parse_profile(text: str) -> DegreeProfile:
    counts: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'degree count', got {line!r}")
        try:
            d, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer entry {line!r}") from None
        if d < 0 or c < 0:
            raise ValueError(f"line {lineno}: negative entry")
        counts[d] = counts.get(d, 0) + c
    return DegreeProfile(counts)


def read_profile(path: str | Path) -> DegreeProfile:
    return parse_profile(Path(path).read_text())


def format_profile(profile: DegreeProfile) -> str:
    return "".join(f"{d} {c}\n" for d, c in profile.counts.items())


def parse_sequence(text: str) -> DegreeSequence:
    degs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            degs.append(int(body))
        except ValueError:
            raise ValueError(f"line {lineno}: expected one integer, got {line!r}") from None
    return DegreeSequence(degs)


def read_sequence(path: str | Path) -> DegreeSequence:
    return parse_sequence(Path(path).read_text())


def scale_profile(fractions: Mapping[int, float], n: int) -> DegreeProfile:
    """Integer profile on ``n`` vertices closest to the given degree fractions.

    Rounds by largest remainder and then fixes parity of the degree sum by
    moving one vertex between the two lowest degrees when needed.
    """
    total = sum(fractions.values())
    raw = {d: n * f / total for d, f in fractions.items()}
    counts = {d: math.floor(v) for d, v in raw.items()}
    short = n - sum(counts.values())
    for d in sorted(raw, key=lambda d: (counts[d] - raw[d], d))[:short]:
        counts[d] += 1
    if sum(d * c for d, c in counts.items()) % 2:
        odd = sorted(d for d in counts if d % 2)
        even = sorted(d for d in counts if d % 2 == 0)
        if odd and even and counts[odd[0]] > 0:
            counts[odd[0]] -= 1
            counts[even[0]] += 1
        elif odd and len(odd) > 1:
            raise ValueError("cannot fix parity")
        else:
            raise ValueError("cannot fix parity")
    return DegreeProfile(counts)


@dataclass(frozen=True)
class SuiteProfile:
    name: str
    kind: str  # "admissible" or "unbounded"
    eps: float
    alpha: float | None
    profile: DegreeProfile


def load_profile_suite(path: str | Path | None = None) -> list[SuiteProfile]:
    """The shipped cutoff test profiles (see tools/make_profile_suite.py)."""
    import json

    if path is None:
        path = Path(__file__).parent / "data" / "profile_suite.json"
    data = json.loads(Path(path).read_text())
    return [
        SuiteProfile(e["name"], e["kind"], float(e["eps"]), e["alpha"],
                     DegreeProfile({int(d): int(c) for d, c in e["counts"].items()}))
        for e in data["profiles"]
    ]
