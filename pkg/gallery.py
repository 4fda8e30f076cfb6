"""
Named hypersurfaces with few rational points, and the claim registry.

Every constructor is deterministic in its parameters. A claim id such as
`FERMAT_hirschfeld(16)` names a registered checker together with its
pinned arguments; verifying it runs the library operations that decide the
statement and compares the observed value with the expected one.
"""
import itertools
import re
import time
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from tqdm import tqdm

from chord import weil_restrict_p1
from curvespace import EXHAUSTED, pullback_splitting, search_curves
from errors import (
    GeometryError,
    NotAGenerator,
    NotInIdeal,
    ParameterOutOfRange,
    UnknownClaim,
    ValidationError,
)
from gf import FiniteField, embedding, extension, field_of_order, frobenius_orbit, rank
from incidence import all_planes, classify_plane_section, lines_on
from models import FAIL, INFEASIBLE, PASS, ClaimRecord
from mpoly import (
    ENUMERATION_CAP,
    HomogeneousPoly,
    index_block,
    monomials,
    vanishes_on_rational_points,
    vanishing_forms_dimension,
)
from projvar import (
    NONE_FOUND,
    SINGULAR_FOUND,
    Hypersurface,
    ProjPoint,
    count_windows,
    enumerate_points,
    projective_size,
    singular_locus_probe,
)
from settings import get_settings


@dataclass
class GalleryEntry:
    identifier: str
    surface: Hypersurface
    provenance: str
    points: List[ProjPoint] = dc_field(default_factory=list)
    parameters: Dict[str, Any] = dc_field(default_factory=dict)
    parts: Dict[str, HomogeneousPoly] = dc_field(default_factory=dict)


def _monomial(field: FiniteField, exp: Sequence[int]) -> HomogeneousPoly:
    return HomogeneousPoly(field, len(exp), sum(exp), {tuple(exp): 1})


def _check_size(q: int, dim: int, what: str):
    if projective_size(q, dim) > ENUMERATION_CAP:
        raise ParameterOutOfRange(f"{what}: P^{dim}(GF({q})) exceeds the enumeration cap")


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def swinnerton_dyer_surface() -> GalleryEntry:
    """The cubic surface over GF(2) with the single rational point (0:0:0:1)."""
    K = field_of_order(2)
    x, y, z, w = (HomogeneousPoly.variable(K, 4, i) for i in range(4))
    C = x ** 3 + y ** 3 + z ** 3 + x * x * y + y * y * z + z * z * x + x * y * z
    F = z * w * w + z * z * w + C
    return GalleryEntry(
        identifier="SD",
        surface=Hypersurface(F),
        provenance="z w^2 + z^2 w + C(x,y,z), C = x^3+y^3+z^3+x^2y+y^2z+z^2x+xyz, over GF(2)",
        points=[ProjPoint.of(K, [0, 0, 0, 1])],
    )


def bothmer_hypersurface(n: int) -> GalleryEntry:
    """
    Degree n+1 form H over GF(2) in n+2 variables with the single point (1:...:1).

    The affine h = x_0...x_{n+1} + (x_0 - 1)...(x_{n+1} - 1) + 1 is the sum
    of the squarefree monomials of degree 1..n+1; each x_{i1}...x_{ir} with
    i1 < ... < ir is homogenised to x_{i1}^{k+1} x_{i2}...x_{ir}, k = n+1-r.
    """
    if not 2 <= n <= 4:
        raise ParameterOutOfRange(f"n must lie in 2..4, got {n}")
    K = field_of_order(2)
    nvars = n + 2
    terms = {}
    for r in range(1, n + 2):
        for subset in itertools.combinations(range(nvars), r):
            exp = [0] * nvars
            for i in subset:
                exp[i] = 1
            exp[subset[0]] += n + 1 - r
            terms[tuple(exp)] = 1
    return GalleryEntry(
        identifier=f"BOTHMER({n})",
        surface=Hypersurface(HomogeneousPoly(K, nvars, n + 1, terms)),
        provenance="homogenised f + g + 1 with f = prod x_i, g = prod (x_i - 1) over GF(2)",
        points=[ProjPoint.of(K, [1] * nvars)],
        parameters={"n": n},
    )


def bothmer_affine_values(n: int) -> np.ndarray:
    """h = f + g + 1 on GF(2)^(n+2), rows in index order."""
    nvars = n + 2
    points = index_block(2, nvars, 0, 2 ** nvars)
    f = np.prod(points, axis=1)
    g = np.prod((points + 1) % 2, axis=1)
    return (f + g + 1) % 2


def _norm_factors(K: FiniteField, m: int, alpha: Optional[int]) -> Tuple[FiniteField, int, List[HomogeneousPoly]]:
    E = extension(K, m)
    alpha = E.generator if alpha is None else alpha
    if not 0 <= alpha < E.q:
        raise ValidationError(f"{alpha} is not an element of GF({E.q})")
    conjugates = frobenius_orbit(alpha, E, K)
    if len(conjugates) != m:
        raise NotAGenerator(f"{alpha} has degree {len(conjugates)} over GF({K.q}), not {m}")
    factors = [HomogeneousPoly.linear(E, [0] + [E.pow(a, j) for j in range(m)]) for a in conjugates]
    return E, alpha, factors


def _norm_form(K: FiniteField, m: int, alpha: Optional[int]) -> Tuple[int, HomogeneousPoly]:
    E, alpha, factors = _norm_factors(K, m, alpha)
    product = factors[0]
    for f in factors[1:]:
        product = product * f
    emb = embedding(K, E)
    if not all(emb.contains(c) for c in product.terms.values()):
        raise ValidationError("norm form coefficients are not Galois invariant")
    return alpha, HomogeneousPoly(K, m + 1, m, {e: emb.restrict(c) for e, c in product.terms.items()})


def norm_hypersurface(q: int, m: int, alpha: Optional[int] = None) -> GalleryEntry:
    """
    X(alpha) in P^m: the norm form N(x_1 + alpha x_2 + ... + alpha^(m-1) x_m) = 0.

    alpha defaults to the generator of GF(q^m); x_0 does not occur, so
    (1:0:...:0) is the only rational point.
    """
    if m < 2:
        raise ParameterOutOfRange(f"m must be at least 2, got {m}")
    K = field_of_order(q)
    _check_size(q, m, "norm hypersurface")
    alpha, N = _norm_form(K, m, alpha)
    return GalleryEntry(
        identifier=f"NORM({q},{m})",
        surface=Hypersurface(N),
        provenance=f"norm form of GF({q}^{m})/GF({q}) in x_1..x_m",
        points=[ProjPoint.of(K, [1] + [0] * m)],
        parameters={"q": q, "m": m, "alpha": alpha},
        parts={"norm": N},
    )


def ideal_spanning_set(K: FiniteField, nvars: int, degree: int) -> List[HomogeneousPoly]:
    """Degree-`degree` multiples of x_i^q x_j - x_i x_j^q spanning that graded piece of the ideal."""
    q = K.q
    if degree < q + 1:
        return []
    x = [HomogeneousPoly.variable(K, nvars, i) for i in range(nvars)]
    spans = []
    for i, j in itertools.combinations(range(nvars), 2):
        g = x[i] ** q * x[j] - x[i] * x[j] ** q
        for exp in monomials(nvars, degree - q - 1):
            spans.append(g * _monomial(K, exp))
    return spans


def in_frobenius_ideal(H: HomogeneousPoly) -> bool:
    if H.is_zero():
        return True
    spans = ideal_spanning_set(H.field, H.nvars, H.degree)
    if not spans:
        return False
    monos = monomials(H.nvars, H.degree)
    rows = [[g.coefficient(e) for e in monos] for g in spans]
    return rank(H.field, rows) == rank(H.field, rows + [[H.coefficient(e) for e in monos]])


def random_ideal_element(K: FiniteField, nvars: int, degree: int, rng: np.random.Generator) -> HomogeneousPoly:
    total = HomogeneousPoly.zero(K, nvars, degree)
    for g in ideal_spanning_set(K, nvars, degree):
        c = int(rng.integers(0, K.q))
        if c:
            total = total + g.scale(c)
    return HomogeneousPoly(K, nvars, degree, total.terms)


def norm_hypersurface_twisted(q: int, m: int, H: HomogeneousPoly, alpha: Optional[int] = None,
                              identifier: Optional[str] = None) -> GalleryEntry:
    """X(alpha, H): N = H with H of degree m in the ideal of the x_i^q x_j - x_i x_j^q."""
    if q > m - 1:
        raise ParameterOutOfRange(f"the twisted norm form needs q <= m - 1, got q={q}, m={m}")
    base = norm_hypersurface(q, m, alpha)
    N = base.parts["norm"]
    if H.field != N.field or H.nvars != m + 1:
        raise ValidationError(f"H must be a form over GF({q}) in {m + 1} variables")
    if not H.is_zero() and H.degree != m:
        raise ValidationError(f"H has degree {H.degree}, expected {m}")
    if not in_frobenius_ideal(H):
        raise NotInIdeal("H is not in the ideal generated by x_i^q x_j - x_i x_j^q")
    return GalleryEntry(
        identifier=identifier or f"NORM_TWISTED({q},{m})",
        surface=Hypersurface(N - H if not H.is_zero() else N),
        provenance=f"norm form of GF({q}^{m})/GF({q}) minus an element of the Frobenius ideal",
        points=base.points,
        parameters=dict(base.parameters),
        parts={"norm": N, "H": H},
    )


def twisted_from_seed(q: int, m: int, seed: int) -> GalleryEntry:
    K = field_of_order(q)
    H = random_ideal_element(K, m + 1, m, np.random.default_rng(seed))
    return norm_hypersurface_twisted(q, m, H, identifier=f"NORM_TWISTED({q},{m},{seed})")


def norm_factors(entry: GalleryEntry) -> List[HomogeneousPoly]:
    """The m linear forms over GF(q^m) whose product is the entry's norm form."""
    if "norm" not in entry.parts:
        raise ValidationError(f"{entry.identifier} is not a norm hypersurface")
    K = entry.surface.field
    m = entry.parameters["m"]
    E, _, factors = _norm_factors(K, m, entry.parameters["alpha"])
    product = factors[0]
    for f in factors[1:]:
        product = product * f
    if product != entry.parts["norm"].base_change(E):
        raise ValidationError("product of the linear factors differs from the norm form")
    return factors


def fermat_cubic(n: int = 2, q: int = 2) -> GalleryEntry:
    """x_0^3 + ... + x_{n+1}^3 over GF(q)."""
    if n < 1:
        raise ParameterOutOfRange(f"n must be positive, got {n}")
    K = field_of_order(q)
    _check_size(q, n + 1, "Fermat cubic")
    nvars = n + 2
    terms = {}
    for i in range(nvars):
        exp = [0] * nvars
        exp[i] = 3
        terms[tuple(exp)] = 1
    return GalleryEntry(
        identifier=f"FERMAT({n},{q})",
        surface=Hypersurface(HomogeneousPoly(K, nvars, 3, terms)),
        provenance=f"diagonal cubic in {nvars} variables over GF({q})",
        parameters={"n": n, "q": q},
    )


def mystery_form(n: int, m: int) -> GalleryEntry:
    """F = sum_{i != j} x_i^(2^n) x_j over GF(2) in x_0..x_m."""
    if n < 1 or m < 1:
        raise ParameterOutOfRange(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    _check_size(2 ** n, m, "mystery form")
    K = field_of_order(2)
    nvars = m + 1
    terms = {}
    for i, j in itertools.permutations(range(nvars), 2):
        exp = [0] * nvars
        exp[i] += 2 ** n
        exp[j] += 1
        terms[tuple(exp)] = 1
    return GalleryEntry(
        identifier=f"MYSTERY({n},{m})",
        surface=Hypersurface(HomogeneousPoly(K, nvars, 2 ** n + 1, terms)),
        provenance=f"sum over i != j of x_i^{2 ** n} x_j in P^{m} over GF(2)",
        parameters={"n": n, "m": m},
    )


CONSTRUCTORS: Dict[str, Callable[..., GalleryEntry]] = {
    "SD": swinnerton_dyer_surface,
    "BOTHMER": bothmer_hypersurface,
    "NORM": norm_hypersurface,
    "NORM_TWISTED": twisted_from_seed,
    "FERMAT": fermat_cubic,
    "MYSTERY": mystery_form,
}


_ID_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_identifier(text: str) -> Tuple[str, Tuple[Any, ...]]:
    """`NAME` or `NAME(a, b, ...)`; integer arguments become ints, nested ids stay strings."""
    match = _ID_RE.match(text)
    if not match:
        raise ValidationError(f"malformed identifier {text!r}")
    name, inner = match.group(1), match.group(2)
    if inner is None or not inner.strip():
        return name, ()
    args, depth, current = [], 0, ""
    for ch in inner:
        if ch == "," and depth == 0:
            args.append(current)
            current = ""
            continue
        depth += (ch == "(") - (ch == ")")
        current += ch
    args.append(current)
    parsed = []
    for a in args:
        a = a.strip()
        parsed.append(int(a) if re.fullmatch(r"-?\d+", a) else a)
    return name, tuple(parsed)


def format_identifier(name: str, args: Sequence[Any]) -> str:
    return f"{name}({','.join(str(a) for a in args)})" if args else name


def build(identifier: str) -> GalleryEntry:
    name, args = parse_identifier(identifier)
    constructor = CONSTRUCTORS.get(name.upper())
    if constructor is None:
        raise ParameterOutOfRange(f"unknown gallery entry {name!r}; known: {sorted(CONSTRUCTORS)}")
    try:
        return constructor(*args)
    except TypeError as e:
        raise ParameterOutOfRange(f"bad arguments for {name}: {str(e)}")


# ---------------------------------------------------------------------------
# one-point search harness
# ---------------------------------------------------------------------------

@dataclass
class OnePointCandidate:
    entry: GalleryEntry
    count: int
    probe: str


def search_one_point(q: int, m: int, tries: int, seed: Optional[int] = None,
                     kmax: int = 1) -> List[OnePointCandidate]:
    """
    Twisted norm hypersurfaces X(alpha, H) for random H, each counted and probed.

    The count is 1 for every H; the probe verdict is what separates the
    candidates. This is a search harness and never asserts smoothness.
    """
    if m >= 6:
        logger.warning(f"One-point search at m={m} runs a probe per candidate over P^{m}")
    seed = get_settings().SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    K = field_of_order(q)
    found = []
    for i in range(tries):
        H = random_ideal_element(K, m + 1, m, rng)
        entry = norm_hypersurface_twisted(q, m, H, identifier=f"NORM_TWISTED({q},{m},{seed}#{i})")
        count = enumerate_points(entry.surface).count
        if count != 1:
            logger.warning(f"{entry.identifier} has {count} rational points")
        probe = singular_locus_probe(entry.surface, kmax=kmax)
        found.append(OnePointCandidate(entry, count, probe.verdict))
        if probe.verdict == NONE_FOUND:
            logger.info(f"Candidate {entry.identifier}: no singular point up to GF({q}^{probe.searched_up_to})")
    return found


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------

Outcome = Tuple[str, Dict[str, Any]]


@dataclass(frozen=True)
class Claim:
    name: str
    statement: str
    checker: Callable[..., Outcome]
    expected: Callable[..., str]
    defaults: Tuple[Tuple[Any, ...], ...] = ((),)
    domain: Optional[Callable[..., bool]] = None
    anchor: str = ""


def _fmt_points(points: Sequence[ProjPoint]) -> str:
    return f"{len(points)} point(s) " + " ".join(repr(p) for p in points)


def _random_form(K: FiniteField, nvars: int, degree: int, rng: np.random.Generator) -> HomogeneousPoly:
    monos = monomials(nvars, degree)
    while True:
        coeffs = rng.integers(0, K.q, size=len(monos))
        if coeffs.any():
            return HomogeneousPoly(K, nvars, degree, {e: int(c) for e, c in zip(monos, coeffs) if c})


def _sd_unique_point() -> Outcome:
    census = enumerate_points(swinnerton_dyer_surface().surface)
    return _fmt_points(census.points), {"count": census.count}


def _sd_smooth_probe() -> Outcome:
    report = singular_locus_probe(swinnerton_dyer_surface().surface, kmax=4)
    return report.verdict, {"searched_up_to": report.searched_up_to}


def _sd_lines_f8() -> Outcome:
    X = swinnerton_dyer_surface().surface
    over_2, over_8 = len(lines_on(X, 1)), len(lines_on(X, 3))
    return f"GF(2): {over_2} lines, GF(8): {over_8} lines", {}


def _sd_conjugate_sections() -> Outcome:
    entry = swinnerton_dyer_surface()
    X, p = entry.surface, entry.points[0]
    planes = [H for H in all_planes(X.field) if not H.contains_point(p)]
    triples = sum(classify_plane_section(X, H).conjugate_triple for H in planes)
    return f"{triples} of {len(planes)} sections are conjugate line triples", {}


def _sd_no_low_degree_curves(d: int) -> Outcome:
    if d < 1:
        raise ParameterOutOfRange(f"degree bound must be positive, got {d}")
    X = swinnerton_dyer_surface().surface
    parts, details = [], {}
    for k in range(1, d + 1):
        result = search_curves(X, k)
        parts.append(f"d={k}: {result.marker}/{len(result.curves)}")
        details[str(k)] = {"strategy": result.strategy, "examined": result.examined, "space": result.space}
    return ", ".join(parts), details


def _bothmer_unique(n: int) -> Outcome:
    entry = bothmer_hypersurface(n)
    census = enumerate_points(entry.surface)
    nvars = n + 2
    H_values = entry.surface.equation.veval(index_block(2, nvars, 0, 2 ** nvars))
    agree = bool(np.array_equal(np.asarray(H_values) % 2, bothmer_affine_values(n)))
    return f"{_fmt_points(census.points)}, h == H: {agree}", {"count": census.count}


BOTHMER_KMAX = {2: 4, 3: 4, 4: 3}


def _bothmer_probe(n: int) -> Outcome:
    report = singular_locus_probe(bothmer_hypersurface(n).surface, kmax=BOTHMER_KMAX[n])
    return report.verdict, {"searched_up_to": report.searched_up_to}


def _norm_unique(q: int, m: int) -> Outcome:
    entry = norm_hypersurface(q, m)
    census = enumerate_points(entry.surface)
    factors = norm_factors(entry)
    details: Dict[str, Any] = {"factors": len(factors)}
    if projective_size(q ** m, m) <= 1 << 16:
        split = enumerate_points(entry.surface, m).points
        details["splits_into_hyperplanes"] = all(
            any(f.evaluate(p.coords) == 0 for f in factors) for p in split)
    return _fmt_points(census.points), details


def _hirschfeld_cover(q: int) -> Outcome:
    X = fermat_cubic(2, q).surface
    points = enumerate_points(X).points
    lines = lines_on(X)
    covered = set()
    for line in lines:
        covered.update(line.points())
    off = [p for p in points if p not in covered]
    actual = "every point on a line" if not off else f"{len(off)} points off every line"
    return actual, {"points": len(points), "lines": len(lines)}


def _fermat_27_lines() -> Outcome:
    return f"{len(lines_on(fermat_cubic(2, 4).surface))} lines over GF(4)", {}


def _fermat_line_splitting() -> Outcome:
    X = fermat_cubic(2, 4).surface
    types = Counter()
    for line in lines_on(X):
        types[tuple(sorted(pullback_splitting(X, line.as_map()).degrees, reverse=True))] += 1
    return ", ".join(f"{t}: {c}" for t, c in sorted(types.items())), {}


def _random_cubics(count: int, ns: Sequence[int], qs: Sequence[int], seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.choice(ns))
        q = int(rng.choice(qs))
        yield Hypersurface(_random_form(field_of_order(q), n + 2, 3, rng))


def _cw_bound(entry_id: str) -> Outcome:
    if entry_id == "random":
        violations = 0
        for X in _random_cubics(100, (2, 3), (2, 3, 4, 5), get_settings().SEED):
            violations += not count_windows(X).cw_pass
        actual = "bound holds" if violations == 0 else f"{violations} violations in 100 samples"
        return actual, {"samples": 100}
    windows = count_windows(build(entry_id).surface)
    if windows.cw_bound is None:
        raise ParameterOutOfRange(f"{entry_id} has degree above n+1: no lower bound applies")
    actual = "bound holds" if windows.cw_pass else f"bound fails: {windows.count} < {windows.cw_bound}"
    return actual, {"count": windows.count, "bound": windows.cw_bound}


DW_FIELDS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)


def _probe_smooth_cubic(q: int, rng: np.random.Generator, attempts: int = 50) -> Hypersurface:
    K = field_of_order(q)
    for _ in range(attempts):
        X = Hypersurface(_random_form(K, 4, 3, rng))
        if singular_locus_probe(X, kmax=1).verdict == NONE_FOUND:
            return X
    raise ParameterOutOfRange(f"no probe-smooth cubic surface over GF({q}) in {attempts} attempts")


def _dw_window(entry_id: str) -> Outcome:
    if entry_id == "random":
        rng = np.random.default_rng(get_settings().SEED)
        outside = 0
        for i in range(20):
            X = _probe_smooth_cubic(DW_FIELDS[i % len(DW_FIELDS)], rng)
            outside += not count_windows(X, assume_smooth=True).dw_pass
        actual = "within window" if outside == 0 else f"{outside} outside window"
        return actual, {"samples": 20}
    X = build(entry_id).surface
    probe = singular_locus_probe(X, kmax=2)
    if probe.verdict != NONE_FOUND:
        raise ValidationError(f"{entry_id}: the window applies to smooth hypersurfaces; probe says {probe.verdict}")
    windows = count_windows(X, assume_smooth=True)
    actual = "within window" if windows.dw_pass else "outside window"
    return actual, {"count": windows.count, "center": windows.projective_count,
                    "radius": windows.dw_radius, "betti_pass": windows.betti_pass}


def _mystery_vanishes(n: int, m: int) -> Outcome:
    F = mystery_form(n, m).surface.equation
    ok = vanishes_on_rational_points(F.base_change(field_of_order(2 ** n)))
    return ("vanishes" if ok else "does not vanish") + f" on P^{m}(GF({2 ** n}))", {}


def _mystery_probe(n: int, m: int) -> Outcome:
    report = singular_locus_probe(mystery_form(n, m).surface, kmax=1 if m % 2 == 0 else 2)
    return report.verdict, {"searched_up_to": report.searched_up_to}


def _quadric_weil_count(q: int) -> Outcome:
    K = field_of_order(q)
    model = weil_restrict_p1(K, K.non_square)
    E = model.ext
    line = [ProjPoint.of(E, [1, 0])] + [ProjPoint.of(E, [x, 1]) for x in E.elements()]
    images = [model.to_model(y) for y in line]
    model_points = model.points()
    bijective = len(set(images)) == len(line) and set(images) == set(model_points)
    round_trip = all(model.from_model(u) == y for u, y in zip(images, line))
    conjugation = all(model.to_model(y.frobenius(K)) == model.conjugate(u) for u, y in zip(images, line))
    actual = f"{len(model_points)} model points, round trip: {bijective and round_trip}"
    return actual, {"bijective": bijective, "round_trip": round_trip, "conjugation": conjugation}


def _h_vanish(q: int, n: int, d: int) -> Outcome:
    dim = vanishing_forms_dimension(field_of_order(q), n, d)
    return f"dimension {dim}", {}


REGISTRY: Dict[str, Claim] = {c.name: c for c in [
    Claim("SD_unique_point", "the Swinnerton-Dyer cubic surface has exactly one GF(2)-point",
          _sd_unique_point, lambda: "1 point(s) (0:0:0:1)",
          anchor="swinnerton-dyer/rational-points"),
    Claim("SD_smooth_probe", "the Swinnerton-Dyer cubic surface is smooth",
          _sd_smooth_probe, lambda: NONE_FOUND,
          anchor="swinnerton-dyer/smoothness"),
    Claim("SD_lines_F8", "the Swinnerton-Dyer surface carries 27 lines, none of them rational",
          _sd_lines_f8, lambda: "GF(2): 0 lines, GF(8): 27 lines",
          anchor="swinnerton-dyer/lines"),
    Claim("SD_conjugate_sections", "planes missing the rational point cut three conjugate lines",
          _sd_conjugate_sections, lambda: "8 of 8 sections are conjugate line triples",
          anchor="swinnerton-dyer/plane-sections"),
    Claim("SD_no_low_degree_curves", "the Swinnerton-Dyer surface has no rational curve of low degree",
          _sd_no_low_degree_curves,
          lambda d: ", ".join(f"d={k}: {EXHAUSTED}/0" for k in range(1, d + 1)),
          defaults=((4,),),
          anchor="swinnerton-dyer/rational-curves"),
    Claim("BOTHMER_unique", "H has the single GF(2)-point (1:...:1) and agrees with h on GF(2)^(n+2)",
          _bothmer_unique, lambda n: f"1 point(s) ({':'.join(['1'] * (n + 2))}), h == H: True",
          defaults=((2,), (3,), (4,)), domain=lambda n: n in BOTHMER_KMAX,
          anchor="bothmer/one-point-hypersurface"),
    Claim("BOTHMER_probe", "H defines a smooth hypersurface for n = 2, 3, 4",
          _bothmer_probe, lambda n: NONE_FOUND,
          defaults=((2,), (3,), (4,)), domain=lambda n: n in BOTHMER_KMAX,
          anchor="bothmer/smoothness"),
    Claim("NORM_unique", "X(alpha) has the unique rational point (1:0:...:0)",
          _norm_unique, lambda q, m: _fmt_points([ProjPoint.of(field_of_order(q), [1] + [0] * m)]),
          defaults=((2, 3), (3, 2), (2, 4), (4, 3)),
          anchor="norm-form/one-point-hypersurface"),
    Claim("FERMAT_hirschfeld", "every rational point of the Fermat cubic surface lies on a line",
          _hirschfeld_cover, lambda q: "every point on a line",
          defaults=((2,), (4,), (16,)), domain=lambda q: q in (2, 4, 16),
          anchor="fermat-cubic/points-on-lines"),
    Claim("FERMAT_27_lines_F4", "the Fermat cubic surface has all 27 lines over GF(4)",
          _fermat_27_lines, lambda: "27 lines over GF(4)",
          anchor="fermat-cubic/lines"),
    Claim("FERMAT_line_splitting", "the tangent bundle restricts to every line as O(2) + O(-1)",
          _fermat_line_splitting, lambda: "(2, -1): 27",
          anchor="fermat-cubic/tangent-splitting"),
    Claim("CW_bound", "a hypersurface of degree n+1-r has at least #P^r(GF(q)) points",
          _cw_bound, lambda entry: "bound holds",
          defaults=(("SD",), ("BOTHMER(3)",), ("FERMAT(2,4)",), ("random",)),
          anchor="chevalley-warning"),
    Claim("DW_window", "smooth hypersurfaces lie within d^(n+1) q^(n/2) of #P^n(GF(q))",
          _dw_window, lambda entry: "within window",
          defaults=(("SD",), ("FERMAT(2,4)",), ("random",)),
          anchor="deligne-weil"),
    Claim("MYSTERY_vanishes", "sum over i != j of x_i^(2^n) x_j vanishes on P^m(GF(2^n))",
          _mystery_vanishes, lambda n, m: f"vanishes on P^{m}(GF({2 ** n}))",
          defaults=((1, 3), (2, 3), (1, 4), (3, 2)),
          anchor="frobenius-form/vanishing"),
    Claim("MYSTERY_probe", "the form is smooth for m odd and singular at (1:...:1) for m even",
          _mystery_probe, lambda n, m: NONE_FOUND if m % 2 else SINGULAR_FOUND,
          defaults=((1, 3), (1, 4), (2, 3)),
          anchor="frobenius-form/singularity"),
    Claim("QUADRIC_WEIL_COUNT", "u3^2 - a u4^2 = 4 u1 u2 has q^2 + 1 points, one per point of P^1(GF(q^2))",
          _quadric_weil_count, lambda q: f"{q * q + 1} model points, round trip: True",
          defaults=((3,), (5,), (7,), (9,)), domain=lambda q: q % 2 == 1,
          anchor="weil-restriction/quadric-model"),
    Claim("H_VANISH_EXERCISE", "a form of degree d <= q vanishing on GF(q)^n is zero",
          _h_vanish, lambda q, n, d: "dimension 0",
          defaults=((2, 3, 2), (3, 3, 3), (4, 3, 4), (5, 3, 5)),
          domain=lambda q, n, d: n >= 1 and 1 <= d <= q,
          anchor="vanishing-forms"),
]}


def default_claim_ids() -> List[str]:
    return [format_identifier(c.name, args) for c in REGISTRY.values() for args in c.defaults]


def verify_claim(claim_id: str, store=None) -> ClaimRecord:
    """
    Run one registered claim and return its record.

    Library errors raised by the checker become an Infeasible record with
    the error code as reason; an unregistered id or arguments outside the
    claim's pinned domain raise UnknownClaim.
    """
    try:
        name, args = parse_identifier(claim_id)
    except ValidationError:
        raise UnknownClaim(f"unknown claim {claim_id!r}")
    claim = REGISTRY.get(name)
    if claim is None:
        raise UnknownClaim(f"unknown claim {claim_id!r}")
    try:
        in_domain = claim.domain is None or claim.domain(*args)
        expected = claim.expected(*args)
    except TypeError:
        raise UnknownClaim(f"{name} does not take arguments {args}")
    if not in_domain:
        raise UnknownClaim(f"{name} is not registered for arguments {args}")
    cid = format_identifier(name, args)
    started = time.time()
    actual, reason, details = None, None, {}
    try:
        actual, details = claim.checker(*args)
        outcome = PASS if actual == expected else FAIL
    except GeometryError as e:
        outcome, reason = INFEASIBLE, f"{e.code}: {str(e)}"
    runtime = time.time() - started
    record = ClaimRecord(
        claim_id=cid,
        statement=claim.statement,
        anchor=claim.anchor,
        invocation=f"{claim.checker.__name__}({', '.join(repr(a) for a in args)})",
        expected=expected,
        actual=actual,
        outcome=outcome,
        reason=reason,
        runtime=round(runtime, 3),
        details=details,
    )
    logger.info(f"Claim {cid}: {outcome} in {runtime:.2f}s")
    if store is not None:
        store.append(record)
    return record


def run_registry(claim_ids: Optional[Sequence[str]] = None, n_jobs: Optional[int] = None,
                 store=None, progress: bool = True) -> List[ClaimRecord]:
    """Verify claims in parallel workers; records are written by this process only."""
    ids = list(claim_ids) if claim_ids else default_claim_ids()
    n_jobs = get_settings().N_JOBS if n_jobs is None else n_jobs
    started = time.time()
    logger.info(f"Verifying {len(ids)} claims with {n_jobs} worker(s)")
    results = Parallel(n_jobs=n_jobs, return_as="generator")(delayed(verify_claim)(cid) for cid in ids)
    records = list(tqdm(results, total=len(ids), desc="claims", disable=not progress))
    if store is not None:
        for record in records:
            store.append(record)
    tally = Counter(r.outcome for r in records)
    logger.info(f"Registry run finished in {time.time() - started:.2f}s: {dict(tally)}")
    return records
