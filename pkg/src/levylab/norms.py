"""Norm oracles for finite-dimensional l_q and Orlicz spaces.

An Orlicz norm here is the Luxemburg-type functional: the unique s > 0 with
sum_k M(|x_k| / s) = 1, where M is a convex power combination
M(t) = sum_i a_i t^{q_i} with a_i >= 0 and q_i >= 1, normalized so M(1) = 1
(which makes the standard basis vectors have unit norm). Restricting M to
power combinations keeps M' and M'' exact analytic expressions, which the
derivative formulas downstream require.

Spec strings use the grammar (also documented in the cli module):

    lq:q=<number|inf>:dim=<int>
    orlicz:terms=<coef>*t^<exp>(+<coef>*t^<exp>)*:dim=<int>
    euclidean:dim=<int>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_DIM = 2
MAX_DIM = 8
ORLICZ_EQ_TOL = 1e-12       # tolerance on |sum M(|x_k|/s) - 1| at the returned s
ORLICZ_MAX_ITER = 200


class SpecError(ValueError):
    """Semantically invalid norm specification (bad q, dim, coefficients)."""


class SpecParseError(SpecError):
    """Spec string rejected by the grammar. Carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class OrliczError(SpecError):
    """The Orlicz function fails a structural requirement."""


@dataclass(frozen=True)
class OrliczFunction:
    """Power combination M(t) = sum_i a_i t^{q_i}, normalized to M(1) = 1.

    ``terms`` holds (coefficient, exponent) pairs sorted by exponent.
    ``scale`` records the factor divided out of the raw coefficients to
    enforce the normalization.
    """

    terms: tuple[tuple[float, float], ...]
    scale: float = field(default=1.0, compare=False)

    @classmethod
    def from_terms(cls, terms) -> "OrliczFunction":
        """Validate, merge duplicate exponents, sort, and normalize M(1) = 1."""
        merged: dict[float, float] = {}
        for coef, exp in terms:
            coef = float(coef)
            exp = float(exp)
            if not (math.isfinite(coef) and math.isfinite(exp)):
                raise OrliczError("coefficients and exponents must be finite")
            if coef < 0:
                raise OrliczError(f"negative coefficient {coef}")
            if exp < 1:
                raise OrliczError(f"exponent {exp} < 1 breaks convexity on [0, 1]")
            if coef == 0:
                continue
            merged[exp] = merged.get(exp, 0.0) + coef
        if not merged:
            raise OrliczError("at least one term with a positive coefficient is required")
        total = math.fsum(merged.values())
        if abs(total - 1.0) <= 4 * np.finfo(float).eps:
            scale = 1.0
        else:
            scale = total
            merged = {exp: coef / total for exp, coef in merged.items()}
        ordered = tuple(sorted(((coef, exp) for exp, coef in merged.items()),
                               key=lambda item: item[1]))
        return cls(terms=ordered, scale=scale)

    def _arrays(self):
        coefs = np.array([c for c, _ in self.terms])
        exps = np.array([e for _, e in self.terms])
        return coefs, exps

    def value(self, t):
        """M(t); accepts scalars or arrays of nonnegative arguments."""
        t = np.asarray(t, dtype=float)
        coefs, exps = self._arrays()
        out = (coefs * t[..., None] ** exps).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def deriv(self, t):
        """M'(t) = sum a q t^{q-1}."""
        t = np.asarray(t, dtype=float)
        coefs, exps = self._arrays()
        out = (coefs * exps * t[..., None] ** (exps - 1.0)).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def deriv2(self, t):
        """M''(t) = sum a q (q-1) t^{q-2}; +inf at 0 when an exponent lies in (1, 2)."""
        t = np.asarray(t, dtype=float)
        coefs, exps = self._arrays()
        c2 = coefs * exps * (exps - 1.0)
        keep = c2 != 0.0  # exponent-1 terms vanish; avoid 0 * inf at t = 0
        with np.errstate(divide="ignore"):
            powers = t[..., None] ** (exps[keep] - 2.0)
        out = (c2[keep] * powers).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    @property
    def min_exponent(self) -> float:
        return self.terms[0][1]

    @property
    def deriv_at_zero(self) -> float:
        """M'(0): the coefficient of the linear term, zero otherwise."""
        return math.fsum(c for c, e in self.terms if e == 1.0)

    @property
    def deriv2_at_zero(self) -> float:
        """M''(0): 2a for a t^2 term, +inf for exponents in (1, 2), else 0."""
        if any(1.0 < e < 2.0 for _, e in self.terms):
            return math.inf
        return math.fsum(2.0 * c for c, e in self.terms if e == 2.0)

    @property
    def flat_at_zero(self) -> bool:
        """True iff M'(0) = M''(0) = 0, i.e. every exponent exceeds 2."""
        return self.min_exponent > 2.0


@dataclass(frozen=True)
class OrliczValidationReport:
    zero_at_zero: bool
    convex: bool
    normalized: bool
    flat_at_zero: bool
    passed: bool
    reasons: tuple[str, ...]


def validate_orlicz(fn: OrliczFunction) -> OrliczValidationReport:
    """Check M(0) = 0, convexity (M'' >= 0 sampled at 1024 points of [0, 4]),
    the M(1) = 1 normalization, and the flatness flag M'(0) = M''(0) = 0."""
    if not fn.terms:
        raise OrliczError("empty term list")
    reasons = []
    zero_at_zero = fn.value(0.0) == 0.0
    if not zero_at_zero:
        reasons.append(f"M(0) = {fn.value(0.0)} != 0")
    grid = np.linspace(0.0, 4.0, 1024)
    d2 = np.asarray(fn.deriv2(grid))
    convex = bool(np.all(np.nan_to_num(d2, nan=-1.0, posinf=np.inf) >= 0.0))
    if not convex:
        worst = grid[int(np.argmin(d2))]
        reasons.append(f"M''({worst:.6g}) = {d2.min():.6g} < 0")
    normalized = abs(fn.value(1.0) - 1.0) <= 1e-12
    if not normalized:
        reasons.append(f"M(1) = {fn.value(1.0)!r} != 1")
    flat = fn.flat_at_zero
    if not flat:
        bad = [f"{c:g}*t^{e:g}" for c, e in fn.terms if e <= 2.0]
        reasons.append("M'(0) or M''(0) nonzero (terms: " + ", ".join(bad) + ")")
    return OrliczValidationReport(
        zero_at_zero=zero_at_zero,
        convex=convex,
        normalized=normalized,
        flat_at_zero=flat,
        passed=zero_at_zero and convex and normalized,
        reasons=tuple(reasons),
    )


@dataclass(frozen=True)
class NormSpec:
    """A named norm on R^dim: l_q family, power-Orlicz family, or Euclidean."""

    kind: str
    dim: int
    q: float | None = None
    orlicz: OrliczFunction | None = None

    @classmethod
    def lq(cls, q: float, dim: int) -> "NormSpec":
        q = float(q)
        _check_dim(dim)
        if math.isnan(q) or q < 1.0:
            raise SpecError(f"q must be >= 1 (or inf), got {q}")
        return cls(kind="lq", dim=int(dim), q=q)

    @classmethod
    def orlicz_norm(cls, fn, dim: int) -> "NormSpec":
        _check_dim(dim)
        if not isinstance(fn, OrliczFunction):
            fn = OrliczFunction.from_terms(fn)
        return cls(kind="orlicz", dim=int(dim), orlicz=fn)

    @classmethod
    def euclidean(cls, dim: int) -> "NormSpec":
        _check_dim(dim)
        return cls(kind="euclidean", dim=int(dim))

    @property
    def label(self) -> str:
        return format_spec(self)

    @property
    def smooth_in_x1(self) -> bool:
        """True when x1-sections are C^2 off the plane x1 = 0."""
        if self.kind == "euclidean":
            return True
        if self.kind == "lq":
            return 2.0 <= self.q < math.inf
        return self.orlicz.min_exponent >= 2.0

    def as_power_orlicz(self) -> OrliczFunction:
        """The equivalent power-combination Orlicz function, for the analytic
        derivative formulas. The max-norm has no such representation."""
        if self.kind == "euclidean":
            return OrliczFunction.from_terms([(1.0, 2.0)])
        if self.kind == "lq":
            if self.q == math.inf:
                raise SpecError("q = inf has no power-Orlicz form (non-smooth sections)")
            return OrliczFunction.from_terms([(1.0, self.q)])
        return self.orlicz


def _check_dim(dim) -> None:
    if int(dim) != dim or not (MIN_DIM <= int(dim) <= MAX_DIM):
        raise SpecError(f"dim must be an integer in [{MIN_DIM}, {MAX_DIM}], got {dim}")


def _validate_orlicz_terms(fn: OrliczFunction) -> None:
    if not fn.terms:
        raise OrliczError("empty term list")
    for coef, exp in fn.terms:
        if coef < 0 or exp < 1:
            raise OrliczError(f"invalid term {coef}*t^{exp} (convexity check failed)")
    if abs(fn.value(1.0) - 1.0) > 1e-12:
        raise OrliczError(f"M(1) = {fn.value(1.0)!r} != 1; construct via OrliczFunction.from_terms")


def eval_norm(spec: NormSpec, x) -> float:
    """Evaluate ||x|| under ``spec``. Zero only at x = 0."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"expected a vector of length {spec.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input vector")
    return float(norm_batch(spec, x[None, :])[0])


def norm_batch(spec: NormSpec, xs) -> np.ndarray:
    """Row-wise norms of an (m, dim) array. Vectorized for every norm kind."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != spec.dim:
        raise ValueError(f"expected an (m, {spec.dim}) array, got shape {xs.shape}")
    if not np.all(np.isfinite(xs)):
        raise ValueError("non-finite input vector")
    ax = np.abs(xs)
    if spec.kind == "euclidean":
        return np.sqrt((xs * xs).sum(axis=1))
    if spec.kind == "lq":
        if spec.q == math.inf:
            return ax.max(axis=1)
        # factor out the max to dodge overflow for large entries
        m = ax.max(axis=1)
        safe = np.where(m > 0.0, m, 1.0)
        out = safe * ((ax / safe[:, None]) ** spec.q).sum(axis=1) ** (1.0 / spec.q)
        return np.where(m > 0.0, out, 0.0)
    _validate_orlicz_terms(spec.orlicz)
    return _luxemburg_batch(spec.orlicz, ax)


def _luxemburg_batch(fn: OrliczFunction, ax: np.ndarray) -> np.ndarray:
    """Solve sum_k M(|x_k| / s) = 1 row-wise by bisection.

    sum_k M(|x_k| / s) is strictly decreasing in s, and the bracket
    [max_k |x_k|, sum_k |x_k|] always contains the root: at the lower end the
    largest ratio is 1 so the sum is >= M(1) = 1, while at the upper end the
    ratios sum to 1 and convexity with M(0) = 0 gives M(u) <= u there.
    """
    out = np.zeros(len(ax))
    live = ax.max(axis=1) > 0.0
    if not np.any(live):
        return out
    rows = ax[live]
    lo = rows.max(axis=1).copy()
    hi = rows.sum(axis=1).copy()

    def residual(s):
        return fn.value(rows / s[:, None]).sum(axis=1) - 1.0

    # degenerate bracket (single nonzero coordinate): s = max|x_k| exactly
    s = lo.copy()
    done = np.abs(residual(lo)) <= ORLICZ_EQ_TOL
    for _ in range(ORLICZ_MAX_ITER):
        if np.all(done):
            break
        mid = 0.5 * (lo + hi)
        g = residual(mid)
        hit = np.abs(g) <= ORLICZ_EQ_TOL
        s = np.where(hit & ~done, mid, s)
        go_up = (g > 0.0) & ~hit & ~done
        go_dn = (g < 0.0) & ~hit & ~done
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_dn, mid, hi)
        done |= hit
    # rows whose bracket collapsed before hitting the tolerance keep the midpoint
    s = np.where(done, s, 0.5 * (lo + hi))
    # Newton polish: bisection stops at |residual| <= 1e-12, but downstream
    # second differences need the norm at machine precision. The residual is
    # smooth and strictly decreasing in s, so a couple of guarded Newton
    # steps finish the job.
    for _ in range(3):
        u = rows / s[:, None]
        g = fn.value(u).sum(axis=1) - 1.0
        slope = -(u * fn.deriv(u)).sum(axis=1) / s
        step = np.where(slope != 0.0, g / slope, 0.0)
        s_new = s - step
        ok = (s_new > 0.5 * s) & (s_new < 2.0 * s) & np.isfinite(s_new)
        s = np.where(ok, s_new, s)
    out[live] = s
    return out


def subsphere_point(spec: NormSpec, theta: float) -> tuple[float, float]:
    """The point (cos t, sin t) rescaled so ||x2 e2 + x3 e3|| = 1 (dim 3 only)."""
    if spec.dim != 3:
        raise SpecError(f"subsphere_point requires dim = 3, got dim = {spec.dim}")
    c, s = math.cos(theta), math.sin(theta)
    nrm = eval_norm(spec, (0.0, c, s))
    return (c / nrm, s / nrm)


def subsphere_batch(spec: NormSpec, thetas) -> np.ndarray:
    """Vectorized ``subsphere_point``: returns an (m, 2) array."""
    if spec.dim != 3:
        raise SpecError(f"subsphere_batch requires dim = 3, got dim = {spec.dim}")
    thetas = np.asarray(thetas, dtype=float)
    cs = np.column_stack([np.cos(thetas), np.sin(thetas)])
    pts = np.column_stack([np.zeros(len(cs)), cs])
    nrm = norm_batch(spec, pts)
    return cs / nrm[:, None]


def _fmt_number(x: float) -> str:
    if x == math.inf:
        return "inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def format_spec(spec: NormSpec) -> str:
    """Canonical text form; ``parse_spec(format_spec(s)) == s``."""
    if spec.kind == "euclidean":
        return f"euclidean:dim={spec.dim}"
    if spec.kind == "lq":
        return f"lq:q={_fmt_number(spec.q)}:dim={spec.dim}"
    terms = "+".join(f"{_fmt_number(c)}*t^{_fmt_number(e)}" for c, e in spec.orlicz.terms)
    return f"orlicz:terms={terms}:dim={spec.dim}"


def parse_spec(text: str) -> NormSpec:
    """Parse the documented spec grammar.

    Syntax errors raise :class:`SpecParseError` with a character position;
    semantic errors (q < 1, negative coefficients, bad dim) raise
    :class:`SpecError` with a reason.
    """
    if not isinstance(text, str) or not text:
        raise SpecParseError("empty spec string", 0)
    segments = []
    offset = 0
    for seg in text.split(":"):
        segments.append((seg, offset))
        offset += len(seg) + 1
    kind, _ = segments[0]

    def expect_field(index: int, name: str) -> tuple[str, int]:
        if index >= len(segments):
            raise SpecParseError(f"missing field '{name}='", len(text))
        seg, off = segments[index]
        prefix = name + "="
        if not seg.startswith(prefix):
            raise SpecParseError(f"expected '{name}=', got {seg!r}", off)
        return seg[len(prefix):], off + len(prefix)

    def parse_float(raw: str, off: int) -> float:
        if raw == "inf":
            return math.inf
        try:
            return float(raw)
        except ValueError:
            raise SpecParseError(f"not a number: {raw!r}", off) from None

    def parse_dim(raw: str, off: int) -> int:
        try:
            return int(raw)
        except ValueError:
            raise SpecParseError(f"not an integer: {raw!r}", off) from None

    def check_trailing(index: int) -> None:
        if index < len(segments):
            seg, off = segments[index]
            raise SpecParseError(f"unexpected trailing segment {seg!r}", off)

    if kind == "euclidean":
        raw_dim, off_dim = expect_field(1, "dim")
        check_trailing(2)
        return NormSpec.euclidean(parse_dim(raw_dim, off_dim))
    if kind == "lq":
        raw_q, off_q = expect_field(1, "q")
        raw_dim, off_dim = expect_field(2, "dim")
        check_trailing(3)
        return NormSpec.lq(parse_float(raw_q, off_q), parse_dim(raw_dim, off_dim))
    if kind == "orlicz":
        raw_terms, off_terms = expect_field(1, "terms")
        raw_dim, off_dim = expect_field(2, "dim")
        check_trailing(3)
        terms = []
        cursor = off_terms
        for piece in raw_terms.split("+"):
            if "*t^" not in piece:
                raise SpecParseError(f"term {piece!r} is not of the form <coef>*t^<exp>", cursor)
            raw_coef, raw_exp = piece.split("*t^", 1)
            coef = parse_float(raw_coef, cursor)
            exp = parse_float(raw_exp, cursor + len(raw_coef) + 3)
            terms.append((coef, exp))
            cursor += len(piece) + 1
        fn = OrliczFunction.from_terms(terms)
        return NormSpec.orlicz_norm(fn, parse_dim(raw_dim, off_dim))
    raise SpecParseError(f"unknown norm kind {kind!r} (expected lq, orlicz, or euclidean)", 0)
