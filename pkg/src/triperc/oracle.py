"""
Exhaustive enumeration over all configurations of small regions.

Configuration ``c`` (an integer in ``[0, 2**|V|)``) has the site with
row-major flat index ``i`` open iff bit ``i`` of ``c`` is set. Event
probabilities are kept as integer coefficient vectors

    P(p) = sum_k c_k p**k (1 - p)**(|V| - k),

where ``c_k`` counts the configurations with ``k`` open sites in the event,
so enumeration introduces no rounding at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .connectivity import lr_open, lr_open_endpoint_exempt, tb_open
from .errors import DomainError, EnumerationCapError
from .geometry import Crossing, bottom_mask, lowest_crossing
from .lattice import CLOSED, OPEN, Configuration, Region, Site, replica_seed, threshold, uniforms

ENUMERATION_CAP = 25
PATH_ENUMERATION_CAP = 16
_CHUNK = 1 << 16


def _check_cap(region: Region, cap: int = ENUMERATION_CAP) -> None:
    if region.size > cap:
        raise EnumerationCapError(
            f"{region} has {region.size} sites; exhaustive enumeration is capped at {cap}")


def region_label(r: Region) -> str:
    return f"[{r.x_min},{r.x_max}]x[{r.y_min},{r.y_max}]"


def _bernstein(coeffs, nsites: int, p: float) -> float:
    q = 1.0 - p
    return math.fsum(float(ck) * p ** k * q ** (nsites - k) for k, ck in enumerate(coeffs))


def _bernstein_derivative(coeffs, nsites: int, p: float) -> float:
    q = 1.0 - p
    terms = []
    for k, ck in enumerate(coeffs):
        if not ck:
            continue
        if k > 0:
            terms.append(float(ck) * k * p ** (k - 1) * q ** (nsites - k))
        if k < nsites:
            terms.append(-float(ck) * (nsites - k) * p ** k * q ** (nsites - k - 1))
    return math.fsum(terms)


@dataclass(frozen=True)
class EventPolynomial:
    """Exact probability of an event as a function of p."""

    nsites: int
    coefficients: tuple[int, ...]

    def __call__(self, p: float) -> float:
        return _bernstein(self.coefficients, self.nsites, p)

    def derivative(self, p: float) -> float:
        return _bernstein_derivative(self.coefficients, self.nsites, p)

    @property
    def count(self) -> int:
        """Number of configurations in the event."""
        return sum(self.coefficients)

    def conditional_fractions(self) -> np.ndarray:
        """``c_k / binomial(|V|, k)``; nondecreasing in ``k`` for increasing events."""
        return np.array([ck / math.comb(self.nsites, k)
                         for k, ck in enumerate(self.coefficients)])

    def root(self, level: float = 0.5) -> float:
        """The p in (0, 1) with ``P(p) = level`` (the polynomial must be increasing)."""
        return brentq(lambda p: self(p) - level, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@lru_cache(maxsize=None)
def _popcounts(nsites: int) -> np.ndarray:
    return _kernels.popcounts(1 << nsites)


def _batches(region: Region):
    """Yield ``(lo, states)`` with a ``(M, H, W)`` state array for each index chunk."""
    nsites = region.size
    ncfg = 1 << nsites
    shifts = np.arange(nsites, dtype=np.int64)
    for lo in range(0, ncfg, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, ncfg), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
        yield lo, bits.reshape((len(idx),) + region.shape)


def event_table(region: Region, event: Callable, *, vectorized: bool = False,
                cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Indicator of `event` on every configuration, indexed by configuration number.

    `event` receives a :class:`Configuration`; with ``vectorized=True`` it
    receives a ``(M, H, W)`` state array and returns ``M`` booleans.
    """
    _check_cap(region, cap)
    ncfg = 1 << region.size
    out = np.empty(ncfg, dtype=bool)
    if vectorized:
        for lo, batch in _batches(region):
            out[lo:lo + len(batch)] = np.asarray(event(batch), dtype=bool)
    else:
        for lo, batch in _batches(region):
            for j, states in enumerate(batch):
                out[lo + j] = bool(event(Configuration(region, states)))
    return out


@lru_cache(maxsize=64)
def crossing_table(region: Region, direction: str = "lr", color: int = OPEN) -> np.ndarray:
    """Crossing indicator on every configuration (compiled fast path)."""
    _check_cap(region)
    H, W = region.shape
    ncfg = 1 << region.size
    parts = [_kernels.crossing_table(H, W, color, direction == "tb", lo, min(lo + _CHUNK, ncfg))
             for lo in range(0, ncfg, _CHUNK)]
    out = np.concatenate(parts)
    out.flags.writeable = False
    return out


def polynomial_from_table(region: Region, table: np.ndarray) -> EventPolynomial:
    coeffs = np.bincount(_popcounts(region.size)[table], minlength=region.size + 1)
    return EventPolynomial(region.size, tuple(int(x) for x in coeffs))


def event_polynomial(region: Region, event: Callable | str, *, vectorized: bool = False,
                     cap: int = ENUMERATION_CAP) -> EventPolynomial:
    """Exact coefficient vector of an event by full enumeration.

    `event` is a predicate (see :func:`event_table`) or one of the strings
    ``"lr"``, ``"tb"``, ``"lr*"``, ``"tb*"`` for the crossing events.
    """
    if isinstance(event, str):
        table = crossing_table(region, *_named_event(event))
    else:
        table = event_table(region, event, vectorized=vectorized, cap=cap)
    return polynomial_from_table(region, table)


def _named_event(name: str) -> tuple[str, int]:
    try:
        return {"lr": ("lr", OPEN), "tb": ("tb", OPEN),
                "lr*": ("lr", CLOSED), "tb*": ("tb", CLOSED)}[name]
    except KeyError:
        raise DomainError(f"unknown event name {name!r}") from None


@lru_cache(maxsize=64)
def flip_pivotal_counts(region: Region) -> np.ndarray:
    """Number of flip-pivotal sites for the open left-right crossing, per configuration."""
    return _kernels.flip_pivotal_counts(crossing_table(region, "lr", OPEN), region.size)


def _weighted_coefficients(region: Region, weights: np.ndarray) -> np.ndarray:
    return np.bincount(_popcounts(region.size), weights=weights,
                       minlength=region.size + 1).astype(np.int64)


def exact_expected_pivotal(region: Region, p: float) -> float:
    """E_p(N): expected number of pivotal sites for the left-right open crossing."""
    coeffs = _weighted_coefficients(region, flip_pivotal_counts(region))
    return _bernstein(coeffs, region.size, p)


def exact_expected_pivotal_joint(region: Region, p: float) -> float:
    """E_p(N; LR) = E_p(N 1_LR)."""
    table = crossing_table(region, "lr", OPEN)
    coeffs = _weighted_coefficients(region, flip_pivotal_counts(region) * table)
    return _bernstein(coeffs, region.size, p)


def exact_expected_pivotal_on_LR(region: Region, p: float) -> float:
    """E_p(N | LR)."""
    prob = event_polynomial(region, "lr")(p)
    if prob == 0.0:
        raise DomainError(f"P_p(LR) = 0 at p={p}")
    return exact_expected_pivotal_joint(region, p) / prob


@dataclass(frozen=True)
class VerificationRecord:
    suite: str
    region: str
    event: str
    p: float | None
    lhs: float | None
    rhs: float | None
    passed: bool

    def to_dict(self) -> dict:
        return {"suite": self.suite, "region": self.region, "event": self.event,
                "p": self.p, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


def verify_russo(region: Region, p: float, tol: float = 1e-9) -> VerificationRecord:
    """Compare d/dp P_p(LR) (analytic, from the coefficients) with E_p(N)."""
    _check_cap(region)
    if not 0.0 < p < 1.0:
        raise DomainError("Russo's formula is checked for 0 < p < 1")
    lhs = event_polynomial(region, "lr").derivative(p)
    rhs = exact_expected_pivotal(region, p)
    return VerificationRecord("russo", region_label(region), "lr", p, lhs, rhs,
                              abs(lhs - rhs) <= tol)


def verify_duality(region: Region) -> bool:
    """Exactly one of an open left-right and a closed top-bottom crossing, in every configuration."""
    lr = crossing_table(region, "lr", OPEN)
    tbs = crossing_table(region, "tb", CLOSED)
    return bool(np.all(lr ^ tbs))


def verify_fkg(region: Region, p: float, a: Callable, b: Callable, *,
               vectorized: bool = False) -> bool:
    """Exact check of P(A and B) >= P(A) P(B) for caller-asserted increasing events."""
    ta = event_table(region, a, vectorized=vectorized)
    tb = event_table(region, b, vectorized=vectorized)
    pa = polynomial_from_table(region, ta)(p)
    pb = polynomial_from_table(region, tb)(p)
    pab = polynomial_from_table(region, ta & tb)(p)
    return pab >= pa * pb - 1e-12


def _enumerate_lr_paths(region: Region, open_mask: np.ndarray | None = None) -> list[tuple[Site, ...]]:
    """All self-avoiding left-to-right paths (through open sites if a mask is given)."""
    out: list[tuple[Site, ...]] = []

    def usable(v):
        return open_mask is None or open_mask[region.local(v)]

    def dfs(v, path, seen):
        if v.x == region.x_max:
            out.append(tuple(path))
        for w in region.neighbors(v):
            if w not in seen and usable(w):
                seen.add(w)
                path.append(w)
                dfs(w, path, seen)
                path.pop()
                seen.discard(w)

    for v in region.boundary("left"):
        if usable(v):
            dfs(v, [v], {v})
    return out


def brute_force_lowest_crossing(c: Configuration, r: Region | None = None) -> Crossing | None:
    """Lowest crossing by enumerating every open left-right path.

    Returns a path with the smallest bottom part B and checks that this
    B is contained in the bottom part of every other crossing. Only B is
    canonical: among paths sharing the minimal B the first one enumerated
    (depth-first from the lowest left site, neighbors in ``OFFSETS`` order)
    is returned.
    """
    r = c.region if r is None else r
    _check_cap(r, PATH_ENUMERATION_CAP)
    if r != c.region:
        c = c.restrict(r)
    paths = _enumerate_lr_paths(r, c.states == OPEN)
    if not paths:
        return None
    bs = [bottom_mask(r, Crossing(p)) for p in paths]
    best = min(range(len(paths)), key=lambda i: int(bs[i].sum()))
    for b in bs:
        if np.any(bs[best] & ~b):
            raise AssertionError("minimal bottom part is not contained in every other")
    return Crossing(paths[best])


@dataclass(frozen=True)
class MinimalBottomTable:
    """Brute-force lowest crossing of every configuration of a region."""

    region: Region
    paths: tuple[tuple[Site, ...], ...]
    best: np.ndarray
    bottom_masks: np.ndarray
    meets: np.ndarray

    def lowest(self, config_index: int) -> Crossing | None:
        i = int(self.best[config_index])
        return None if i < 0 else Crossing(self.paths[i])

    def consistent(self) -> bool:
        """The chosen bottom part equals the intersection of all bottom parts."""
        has = self.best >= 0
        return bool(np.all(self.bottom_masks[self.best[has]] == self.meets[has]))


def _bits_of(region: Region, mask: np.ndarray) -> int:
    flat = np.flatnonzero(mask.ravel())
    return int(sum(1 << int(i) for i in flat))


def minimal_bottom_table(region: Region) -> MinimalBottomTable:
    """Enumerate all left-right paths once and find the minimal B for every configuration."""
    _check_cap(region, PATH_ENUMERATION_CAP)
    paths = _enumerate_lr_paths(region)
    pmask = np.empty(len(paths), dtype=np.int64)
    bmask = np.empty(len(paths), dtype=np.int64)
    bsize = np.empty(len(paths), dtype=np.int64)
    for i, path in enumerate(paths):
        pmask[i] = _bits_of(region, region.mask(path))
        b = bottom_mask(region, Crossing(path))
        bmask[i] = _bits_of(region, b)
        bsize[i] = int(b.sum())
    best, meets = _kernels.minimal_b_all(pmask, bmask, bsize, region.size)
    return MinimalBottomTable(region, tuple(paths), best, bmask, meets)


def exact_pc(region: Region) -> float:
    """p at which the exact P_p(LR) equals 1/2."""
    return event_polynomial(region, "lr").root(0.5)


def endpoint_convention_gap(region: Region, p: float = 0.5) -> tuple[float, float]:
    """P_p(LR) with all-open paths versus paths whose endpoints are unconstrained."""
    strict = event_polynomial(region, "lr")(p)
    exempt = event_polynomial(region, lambda c: lr_open_endpoint_exempt(c))(p)
    return strict, exempt


def random_duality_failures(n: int, count: int, seed: int, p: float = 0.5) -> int:
    """Number of sampled configurations of ``[0, n]^2`` violating duality.

    Replica ``i`` is ``sample(Region.square(n), p, replica_seed(seed, i))``;
    the states are built directly from the draws to skip per-replica objects.
    """
    r = Region.square(n)
    bad = 0
    for i in range(count):
        states = threshold(uniforms(r, replica_seed(seed, i)), p)
        if _kernels.has_crossing(states, OPEN, False) == _kernels.has_crossing(states, CLOSED, True):
            bad += 1
    return bad


def run_suite(max_sites: int = 16, *, random_configs: int = 100_000, random_n: int = 32,
              seed: int = 1729, p_grid=(0.1, 0.3, 0.5, 0.7, 0.9), tol: float = 1e-9) -> dict:
    """Run the duality, symmetry, Russo, FKG and minimal-B checks.

    Square regions ``[0, m]^2`` with at most `max_sites` sites are covered
    exhaustively. Returns a JSON-ready report with one record per check and
    an overall ``pass`` flag.
    """
    regions = [Region.square(m) for m in range(0, 6) if (m + 1) ** 2 <= max_sites]
    recs: list[VerificationRecord] = []
    for r in regions:
        ok = verify_duality(r)
        recs.append(VerificationRecord("duality", region_label(r), "lr xor tb*", None,
                                       float(1 << r.size), None, ok))
    if random_configs:
        bad = random_duality_failures(random_n, random_configs, seed)
        recs.append(VerificationRecord("duality_random", region_label(Region.square(random_n)),
                                       "lr xor tb*", 0.5, float(random_configs), float(bad),
                                       bad == 0))
    for r in regions:
        val = event_polynomial(r, "lr")(0.5)
        recs.append(VerificationRecord("critical_symmetry", region_label(r), "lr", 0.5,
                                       val, 0.5, abs(val - 0.5) <= 1e-12))
    for r in regions:
        for p in p_grid:
            recs.append(verify_russo(r, p, tol))
    for r in regions:
        if r.size < 2:
            continue
        center = Site(r.x_min + r.width // 2, r.y_min + r.height // 2)
        checks = {
            "lr & tb": (lambda c: lr_open(c), lambda c: tb_open(c)),
            f"lr & open{tuple(center)}": (lambda c: lr_open(c), lambda c: c.is_open(center)),
        }
        for name, (a, b) in checks.items():
            for p in (0.4, 0.5):
                recs.append(VerificationRecord("fkg", region_label(r), name, p, None, None,
                                               verify_fkg(r, p, a, b)))
    for r in regions:
        if r.size > PATH_ENUMERATION_CAP:
            continue
        table = minimal_bottom_table(r)
        mismatches = 0
        for ci in np.flatnonzero(table.best >= 0):
            walk = lowest_crossing(Configuration.from_bits(r, int(ci)))
            if walk is None or _bits_of(r, bottom_mask(r, walk)) != table.bottom_masks[table.best[ci]]:
                mismatches += 1
        mismatches += int(np.count_nonzero((table.best < 0) != ~crossing_table(r, "lr", OPEN)))
        recs.append(VerificationRecord("minimal_b", region_label(r), "lowest crossing", None,
                                       float(mismatches), 0.0,
                                       mismatches == 0 and table.consistent()))
    convention = []
    for r in regions:
        strict, exempt = endpoint_convention_gap(r)
        convention.append({"region": region_label(r), "p": 0.5,
                           "all_sites_open": strict, "endpoints_exempt": exempt})
    records = [rec.to_dict() for rec in recs]
    return {"pass": all(rec.passed for rec in recs), "records": records,
            "endpoint_convention": convention}

