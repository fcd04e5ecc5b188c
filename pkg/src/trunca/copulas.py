"""Copula models and the right-truncation transform.

``truncate_general`` maps a model C and a threshold vector t in (0, 1]^d with
C(t) > 0 to the copula of U | U <= t.  The construction inverts C along each
coordinate section,

    C_t(u) = C({sec_j_inv(C(t) u_j)}_j) / C(t),

and is exact whenever the sections invert analytically.  Recognized models
dispatch to closed forms: Archimedean models stay Archimedean with a tilted
generator (tilt psi_inv(C(t))), nested Archimedean models keep a nested
closed form, bivariate Marshall-Olkin models keep a piecewise closed form
with an explicit singular curve, and independence/comonotonicity are fixed
points.  Everything else (survival wrappers in particular) evaluates through
monotone bisection of the sections.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .generators import Generator, IndependenceGenerator, OuterPowerGenerator

__all__ = [
    "CopulaModel",
    "IndependenceCopula",
    "ComonotoneCopula",
    "ArchimedeanCopula",
    "NestedArchimedeanCopula",
    "MarshallOlkinCopula",
    "SurvivalCopula",
    "survival",
    "TruncationPoint",
    "TruncatedCopula",
    "ModelTruncation",
    "TiltedArchimedeanTruncation",
    "ProductTruncation",
    "NestedTruncation",
    "MOTruncation",
    "GeneralTruncation",
    "truncate_general",
    "truncate_nested",
    "truncate_mo",
    "truncated_cdf",
    "nested_biv_margin",
    "ev_scaling_check",
    "box_mass",
]

BISECT_MAX_ITER = 200
BISECT_WIDTH = 1e-13
_EDGE_TOL = 1e-12


def _unit_points(u, d):
    arr = np.asarray(u, dtype=float)
    squeeze = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {arr.shape}")
    if np.any(np.isnan(pts)) or np.any(pts < -_EDGE_TOL) or np.any(pts > 1.0 + _EDGE_TOL):
        raise ValueError("points must lie in the unit cube")
    return np.clip(pts, 0.0, 1.0), squeeze


class CopulaModel:
    """Base class: CDF evaluation plus coordinate sections and their inverses."""

    kind = ""
    d: int

    def _cdf(self, pts):
        raise NotImplementedError

    def cdf(self, u):
        """C(u) for a point (d,) or a stack of points (n, d)."""
        pts, squeeze = _unit_points(u, self.d)
        out = self._cdf(pts)
        return float(out[0]) if squeeze else out

    def margin_section(self, j, x, t):
        """The section x -> C(t_1, ..., x at slot j, ..., t_d)."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        pts = np.tile(t, (x.size, 1))
        pts[:, j] = x.ravel()
        out = np.atleast_1d(self.cdf(pts)).reshape(x.shape if x.ndim else ())
        return float(out) if x.ndim == 0 else out

    def _section_inv_analytic(self, j, y, t):
        return None

    def margin_section_inv(self, j, y, t, method="auto"):
        """Generalized inverse inf{x : C(x; t_-j) >= y} on [0, t_j].

        ``method="bisect"`` forces the numeric path even when an analytic
        inverse exists.
        """
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        y_arr = np.atleast_1d(y)
        top = float(self.margin_section(j, t[j], t))
        if np.any(y_arr < -_EDGE_TOL) or np.any(y_arr > top * (1.0 + 1e-9) + _EDGE_TOL):
            raise ValueError("section inverse argument outside [0, C(t)]")
        y_arr = np.clip(y_arr, 0.0, top)
        out = None
        if method != "bisect":
            out = self._section_inv_analytic(j, y_arr, t)
        if out is None:
            out = _bisect_section_inv(self, j, y_arr, t)
        out = np.clip(out, 0.0, t[j])
        return float(out[0]) if y.ndim == 0 else out

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d})"


def _bisect_section_inv(model, j, y, t):
    lo = np.zeros(y.shape)
    hi = np.full(y.shape, t[j])
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        ge = model.margin_section(j, mid, t) >= y
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
        if float(np.max(hi - lo)) <= BISECT_WIDTH:
            break
    # left endpoint: the inf-form generalized inverse
    return lo


class IndependenceCopula(CopulaModel):
    """C(u) = prod_j u_j."""

    kind = "independence"

    def __init__(self, d=2):
        d = int(d)
        if d < 2:
            raise ValueError("copula dimension must be at least 2")
        self.d = d

    def _cdf(self, pts):
        return pts.prod(axis=1)

    def _section_inv_analytic(self, j, y, t):
        rest = float(np.prod(np.delete(t, j)))
        return y / rest


class ComonotoneCopula(CopulaModel):
    """C(u) = min_j u_j."""

    kind = "comonotone"

    def __init__(self, d=2):
        d = int(d)
        if d < 2:
            raise ValueError("copula dimension must be at least 2")
        self.d = d

    def _cdf(self, pts):
        return pts.min(axis=1)

    def _section_inv_analytic(self, j, y, t):
        return y.copy()


class ArchimedeanCopula(CopulaModel):
    """C(u) = psi(sum_j psi_inv(u_j)) for any generator-like object."""

    kind = "archimedean"

    def __init__(self, generator, d=2):
        d = int(d)
        if d < 2:
            raise ValueError("copula dimension must be at least 2")
        if not isinstance(generator, Generator):
            raise TypeError("generator must be a Generator instance")
        self.generator = generator
        self.d = d

    def _cdf(self, pts):
        g = self.generator
        s = np.asarray(g.psi_inv(pts)).sum(axis=1)
        return np.asarray(g.psi(s))

    def _section_inv_analytic(self, j, y, t):
        g = self.generator
        rest = float(np.asarray(g.psi_inv(np.delete(t, j))).sum())
        with np.errstate(invalid="ignore"):
            arg = np.asarray(g.psi_inv(y)) - rest
        return np.asarray(g.psi(np.maximum(arg, 0.0)))

    def __repr__(self):
        return f"ArchimedeanCopula({self.generator!r}, d={self.d})"


def _plain_family(g):
    if isinstance(g, OuterPowerGenerator):
        return None
    return type(g)


def _validate_nesting(root, sectors):
    if isinstance(root, IndependenceGenerator):
        return
    if isinstance(root, OuterPowerGenerator):
        base = root.base
        for g, ds in sectors:
            ok = (
                isinstance(g, OuterPowerGenerator)
                and type(g.base) is type(base)
                and g.base.theta == base.theta
                and root.alpha >= g.alpha - 1e-12
            )
            if not ok:
                raise ValueError(
                    "outer-power nesting requires a shared base generator and "
                    "root alpha >= sector alphas"
                )
        return
    cls = _plain_family(root)
    if cls is None:
        raise ValueError("unsupported root generator for nesting")
    for g, ds in sectors:
        if type(g) is not cls or not (root.theta <= g.theta + 1e-12):
            raise ValueError(
                "nesting condition: sector generators must match the root family "
                "with theta_root <= theta_sector"
            )


class NestedArchimedeanCopula(CopulaModel):
    """Two-level nested model C0(C_1(u_1), ..., C_S(u_S)).

    ``sectors`` is a sequence of (generator, dimension) pairs; the sufficient
    nesting condition is enforced at construction for the supported stacks
    (same family with theta_root <= theta_sector, outer powers of one base
    with alpha_root >= alpha_sector, or an independence root, under which the
    model is simply a product of Archimedean blocks).
    """

    kind = "nested_archimedean"

    def __init__(self, root, sectors):
        sectors = [(g, int(ds)) for g, ds in sectors]
        if not sectors:
            raise ValueError("need at least one sector")
        if any(ds < 1 for _, ds in sectors):
            raise ValueError("sector dimensions must be at least 1")
        d = sum(ds for _, ds in sectors)
        if d < 2:
            raise ValueError("copula dimension must be at least 2")
        _validate_nesting(root, sectors)
        self.root = root
        self.sectors = sectors
        self.d = d
        self.slices = []
        start = 0
        for _, ds in sectors:
            self.slices.append(slice(start, start + ds))
            start += ds

    def sector_of(self, index):
        """(sector, offset-within-sector) of a flat coordinate index."""
        for s, sl in enumerate(self.slices):
            if sl.start <= index < sl.stop:
                return s, index - sl.start
        raise IndexError(index)

    def _sector_cdf(self, s, block):
        g = self.sectors[s][0]
        if block.shape[1] == 1:
            return block[:, 0]
        t = np.asarray(g.psi_inv(block)).sum(axis=1)
        return np.asarray(g.psi(t))

    def _cdf(self, pts):
        root = self.root
        total = np.zeros(pts.shape[0])
        for s, sl in enumerate(self.slices):
            inner = self._sector_cdf(s, pts[:, sl])
            total = total + np.asarray(root.psi_inv(inner))
        return np.asarray(root.psi(total))

    def _section_inv_analytic(self, j, y, t):
        s, _ = self.sector_of(j)
        g = self.sectors[s][0]
        root = self.root
        sl = self.slices[s]
        outer_rest = 0.0
        for s2, sl2 in enumerate(self.slices):
            if s2 != s:
                c2 = float(self._sector_cdf(s2, np.asarray(t[sl2])[None, :])[0])
                outer_rest += float(root.psi_inv(c2))
        inner_rest = float(
            np.asarray(g.psi_inv(np.delete(t[sl], j - sl.start))).sum()
        )
        with np.errstate(invalid="ignore"):
            w = np.asarray(root.psi(np.maximum(np.asarray(root.psi_inv(y)) - outer_rest, 0.0)))
            out = np.asarray(g.psi(np.maximum(np.asarray(g.psi_inv(w)) - inner_rest, 0.0)))
        return out

    def __repr__(self):
        inner = ", ".join(f"({g!r}, {ds})" for g, ds in self.sectors)
        return f"NestedArchimedeanCopula({self.root!r}, [{inner}])"


class MarshallOlkinCopula(CopulaModel):
    """Bivariate Marshall-Olkin copula min(u1^(1-a1) u2, u1 u2^(1-a2)).

    The degenerate boundaries a in {0, 1} are excluded: the sections stop
    being injective there and truncation inverses lose uniqueness.
    """

    kind = "marshall_olkin"
    d = 2

    def __init__(self, alpha1, alpha2):
        alpha1 = float(alpha1)
        alpha2 = float(alpha2)
        if not (0.0 < alpha1 < 1.0 and 0.0 < alpha2 < 1.0):
            raise ValueError("Marshall-Olkin parameters must lie strictly in (0, 1)")
        self.alpha1 = alpha1
        self.alpha2 = alpha2

    def _cdf(self, pts):
        u1 = pts[:, 0]
        u2 = pts[:, 1]
        return np.minimum(u1 ** (1.0 - self.alpha1) * u2, u1 * u2 ** (1.0 - self.alpha2))

    def _section_inv_analytic(self, j, y, t):
        aj = self.alpha1 if j == 0 else self.alpha2
        am = self.alpha2 if j == 0 else self.alpha1
        tm = float(t[1 - j])
        cut = tm ** (1.0 - am + am / aj)
        with np.errstate(divide="ignore"):
            low = y / tm ** (1.0 - am)
            high = np.power(y / tm, 1.0 / (1.0 - aj))
        return np.where(y <= cut, low, high)

    def __repr__(self):
        return f"MarshallOlkinCopula({self.alpha1!r}, {self.alpha2!r})"


class SurvivalCopula(CopulaModel):
    """Survival wrap of a bivariate model: C(u) = u1 + u2 - 1 + C_in(1-u1, 1-u2)."""

    kind = "survival"
    d = 2

    def __init__(self, inner):
        if inner.d != 2:
            raise ValueError("survival wrapping is implemented for d = 2 only")
        self.inner = inner

    def _cdf(self, pts):
        v = np.atleast_1d(self.inner.cdf(1.0 - pts))
        return np.clip(pts.sum(axis=1) - 1.0 + v, 0.0, 1.0)

    def __repr__(self):
        return f"SurvivalCopula({self.inner!r})"


def survival(model):
    """Survival-wrap a bivariate model; wrapping twice is the identity."""
    if model.d != 2:
        raise ValueError("survival wrapping is implemented for d = 2 only")
    if isinstance(model, SurvivalCopula):
        return model.inner
    return SurvivalCopula(model)


@dataclass(frozen=True, eq=False)
class TruncationPoint:
    """A threshold vector t in (0, 1]^d together with its cached C(t) > 0."""

    t: np.ndarray
    c_of_t: float

    @classmethod
    def make(cls, model, t):
        if isinstance(t, TruncationPoint):
            if t.t.shape != (model.d,):
                raise ValueError("truncation point dimension mismatch")
            return t
        t = np.asarray(t, dtype=float).copy()
        if t.shape != (model.d,):
            raise ValueError(f"truncation point must have shape ({model.d},)")
        if np.any(np.isnan(t)) or np.any(t <= 0.0) or np.any(t > 1.0):
            raise ValueError("truncation point must lie in (0, 1]^d")
        c = float(model.cdf(t))
        if not c > 0.0:
            raise ValueError("C(t) must be positive at the truncation point")
        t.setflags(write=False)
        return cls(t=t, c_of_t=c)


class TruncatedCopula:
    """The copula of U | U <= t on the unit cube (copula scale)."""

    form = ""

    def __init__(self, source, point):
        self.source = source
        self.point = point

    @property
    def dim(self):
        return self.source.d

    def _cdf(self, pts):
        raise NotImplementedError

    def cdf(self, u):
        pts, squeeze = _unit_points(u, self.dim)
        out = np.clip(self._cdf(pts), 0.0, 1.0)
        return float(out[0]) if squeeze else out

    def __repr__(self):
        t = np.array2string(self.point.t, separator=", ")
        return f"{type(self).__name__}({self.source!r}, t={t})"


class ModelTruncation(TruncatedCopula):
    """Truncations that collapse onto a plain model (independence, comonotone)."""

    form = "model"

    def __init__(self, source, point, model):
        super().__init__(source, point)
        self.model = model

    def _cdf(self, pts):
        return np.atleast_1d(self.model.cdf(pts))


class TiltedArchimedeanTruncation(TruncatedCopula):
    """Archimedean truncation: Archimedean again, with tilt psi_inv(C(t))."""

    form = "tilted-archimedean"

    def __init__(self, source, point, tilted):
        super().__init__(source, point)
        self.tilted = tilted

    def _cdf(self, pts):
        g = self.tilted
        s = np.asarray(g.psi_inv(pts)).sum(axis=1)
        return np.asarray(g.psi(s))

    def as_model(self):
        """The truncation as a standalone Archimedean model."""
        return ArchimedeanCopula(self.tilted, self.dim)


class ProductTruncation(TruncatedCopula):
    """Truncation of an independence-coupled block model: the blockwise product.

    ``blocks`` pairs each coordinate slice with its own truncated copula
    (``None`` marks a singleton block, whose truncation is uniform).
    """

    form = "product"

    def __init__(self, source, point, blocks):
        super().__init__(source, point)
        self.blocks = blocks

    def _cdf(self, pts):
        out = np.ones(pts.shape[0])
        for block, sl in self.blocks:
            if block is None:
                out = out * pts[:, sl.start]
            else:
                out = out * np.atleast_1d(block.cdf(pts[:, sl]))
        return out


class NestedTruncation(TruncatedCopula):
    """Closed form of a truncated nested Archimedean copula.

    All constants are precomputed: h0 = psi0_inv(C(t)) and, per sector,
    c_s = C_s(t_s), the inner offset b_s = psi_s_inv(c_s) and the sector
    shift a_s = h0 - psi0_inv(c_s) (the root-scale coordinate of the sector's
    complementary threshold mass).
    """

    form = "nested"

    def __init__(self, source, point):
        super().__init__(source, point)
        m = source
        root = m.root
        c = point.c_of_t
        self.h0 = float(root.psi_inv(c))
        self.c_s = []
        self.a_s = []
        self.b_s = []
        for s, sl in enumerate(m.slices):
            cs = float(m._sector_cdf(s, np.asarray(point.t[sl])[None, :])[0])
            self.c_s.append(cs)
            self.a_s.append(self.h0 - float(root.psi_inv(cs)))
            self.b_s.append(float(m.sectors[s][0].psi_inv(cs)))
        self._tilted_root = root.tilt(self.h0)

    def _cdf(self, pts):
        m = self.source
        root = m.root
        c = self.point.c_of_t
        total = np.zeros(pts.shape[0])
        for s, sl in enumerate(m.slices):
            g = m.sectors[s][0]
            ds = sl.stop - sl.start
            with np.errstate(invalid="ignore"):
                w = np.asarray(
                    root.psi(np.maximum(np.asarray(root.psi_inv(c * pts[:, sl])) - self.a_s[s], 0.0))
                )
                arg = np.asarray(g.psi_inv(w)).sum(axis=1) - (ds - 1) * self.b_s[s]
                inner = np.asarray(g.psi(np.maximum(arg, 0.0)))
            total = total + np.asarray(root.psi_inv(inner))
        return np.asarray(root.psi(np.maximum(total, 0.0))) / c

    def biv_margin(self, s1, j1, s2, j2, u1, u2):
        """Bivariate margin of coordinates (s1, j1) and (s2, j2).

        Cross-sector pairs are tilted-Archimedean in the root generator with
        tilt h0; same-sector pairs keep a residual nested form with shift
        a_s and are in general *not* the truncation of the pair's own margin.
        """
        m = self.source
        for s, j in ((s1, j1), (s2, j2)):
            if not (0 <= s < len(m.sectors) and 0 <= j < m.sectors[s][1]):
                raise IndexError(f"invalid sector/coordinate index ({s}, {j})")
        if (s1, j1) == (s2, j2):
            raise ValueError("margin requires two distinct coordinates")
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if s1 != s2:
            g = self._tilted_root
            out = g.psi(np.asarray(g.psi_inv(u1)) + np.asarray(g.psi_inv(u2)))
            return out
        root = m.root
        g = m.sectors[s1][0]
        c = self.point.c_of_t
        a = self.a_s[s1]
        with np.errstate(invalid="ignore"):
            w1 = np.asarray(root.psi(np.maximum(np.asarray(root.psi_inv(c * u1)) - a, 0.0)))
            w2 = np.asarray(root.psi(np.maximum(np.asarray(root.psi_inv(c * u2)) - a, 0.0)))
            arg = np.asarray(g.psi_inv(w1)) + np.asarray(g.psi_inv(w2)) - self.b_s[s1]
            inner = np.asarray(g.psi(np.maximum(arg, 0.0)))
            out = np.asarray(root.psi(a + np.asarray(root.psi_inv(inner)))) / c
        return out


class MOTruncation(TruncatedCopula):
    """Piecewise closed form of a truncated bivariate Marshall-Olkin copula.

    Case 1 applies when t2^a2 <= t1^a1 (the section minimum switches in u1),
    case 2 is the mirror image in u2.  The singular component survives as a
    curve u2(u1) ending strictly inside the square.
    """

    form = "marshall-olkin"

    def __init__(self, source, point):
        super().__init__(source, point)
        a1, a2 = source.alpha1, source.alpha2
        t1, t2 = float(point.t[0]), float(point.t[1])
        self.ratio = t1**a1 / t2**a2  # >= 1 in case 1
        self.case = 1 if t2**a2 <= t1**a1 else 2
        if self.case == 1:
            self.breakpoint = self.ratio ** (-(1.0 - a1) / a1)
        else:
            self.breakpoint = self.ratio ** ((1.0 - a2) / a2)

    def _cdf(self, pts):
        a1, a2 = self.source.alpha1, self.source.alpha2
        r = self.ratio
        u1 = pts[:, 0]
        u2 = pts[:, 1]
        if self.case == 1:
            low = np.minimum((1.0 / r) ** (1.0 - a1) * u1 ** (1.0 - a1) * u2,
                             u1 * u2 ** (1.0 - a2))
            high = np.minimum(u1 * u2, r * u1 ** (1.0 / (1.0 - a1)) * u2 ** (1.0 - a2))
            return np.where(u1 <= self.breakpoint, low, high)
        low = np.minimum(u1 ** (1.0 - a1) * u2, r ** (1.0 - a2) * u1 * u2 ** (1.0 - a2))
        high = np.minimum((1.0 / r) * u1 ** (1.0 - a1) * u2 ** (1.0 / (1.0 - a2)), u1 * u2)
        return np.where(u2 <= self.breakpoint, low, high)

    def singular_curve(self, u1):
        """u2 solving the singular-component equation at u1 (nan off-range)."""
        a1, a2 = self.source.alpha1, self.source.alpha2
        u1 = np.asarray(u1, dtype=float)
        if self.case == 1:
            u2 = (self.ratio ** (1.0 - a1) * u1**a1) ** (1.0 / a2)
            valid = u1 <= self.breakpoint + _EDGE_TOL
        else:
            u2 = (self.ratio ** (1.0 - a2) * u1**a1) ** (1.0 / a2)
            valid = np.ones_like(u1, dtype=bool)
        return np.where(valid, u2, np.nan)


class GeneralTruncation(TruncatedCopula):
    """Componentwise-inversion construction, exact up to the bisection width.

    ``inverse_method="auto"`` uses analytic section inverses where the model
    has them; ``"bisect"`` forces pure bisection (the verification path).
    """

    form = "general"

    def __init__(self, source, point, inverse_method="auto"):
        super().__init__(source, point)
        self.inverse_method = inverse_method

    def _cdf(self, pts):
        c = self.point.c_of_t
        t = self.point.t
        x = np.empty_like(pts)
        for j in range(self.dim):
            x[:, j] = self.source.margin_section_inv(
                j, c * pts[:, j], t, method=self.inverse_method
            )
        return np.atleast_1d(self.source.cdf(np.minimum(x, t))) / c


def truncate_general(model, t, method="auto"):
    """The copula of U | U <= t for U ~ model.

    ``method="auto"`` dispatches to closed forms where the model admits one;
    ``"numeric"`` forces the componentwise-inversion construction with
    analytic section inverses; ``"bisect"`` additionally forces bisection of
    the sections.
    """
    tp = TruncationPoint.make(model, t)
    if method in ("numeric", "bisect"):
        return GeneralTruncation(
            model, tp, inverse_method="auto" if method == "numeric" else "bisect"
        )
    if method != "auto":
        raise ValueError("method must be one of 'auto', 'numeric', 'bisect'")
    if isinstance(model, (IndependenceCopula, ComonotoneCopula)):
        return ModelTruncation(model, tp, model)
    if isinstance(model, ArchimedeanCopula):
        h = float(model.generator.psi_inv(tp.c_of_t))
        return TiltedArchimedeanTruncation(model, tp, model.generator.tilt(h))
    if isinstance(model, NestedArchimedeanCopula):
        return truncate_nested(model, tp)
    if isinstance(model, MarshallOlkinCopula):
        return truncate_mo(model, tp)
    return GeneralTruncation(model, tp)


def truncate_nested(model, t):
    """Truncate a nested Archimedean model.

    With an independence root the result is the product of the truncated
    sectors; otherwise the closed nested form with precomputed constants.
    """
    if not isinstance(model, NestedArchimedeanCopula):
        raise TypeError("truncate_nested expects a NestedArchimedeanCopula")
    tp = TruncationPoint.make(model, t)
    if isinstance(model.root, IndependenceGenerator):
        blocks = []
        for s, sl in enumerate(model.slices):
            g, ds = model.sectors[s]
            if ds == 1:
                blocks.append((None, sl))
            else:
                sub = ArchimedeanCopula(g, ds)
                blocks.append((truncate_general(sub, tp.t[sl]), sl))
        return ProductTruncation(model, tp, blocks)
    return NestedTruncation(model, tp)


def truncate_mo(model, t):
    """Truncate a bivariate Marshall-Olkin model (piecewise closed form)."""
    if not isinstance(model, MarshallOlkinCopula):
        raise TypeError("truncate_mo expects a MarshallOlkinCopula")
    tp = TruncationPoint.make(model, t)
    return MOTruncation(model, tp)


def truncated_cdf(model, t, x):
    """F_t(x) = C(min(x, t)) / C(t): the distribution function of U | U <= t.

    Margins follow as F_{t,j}(x_j) = C(x_j; t_-j) / C(t).
    """
    tp = TruncationPoint.make(model, t)
    pts, squeeze = _unit_points(x, model.d)
    out = np.atleast_1d(model.cdf(np.minimum(pts, tp.t))) / tp.c_of_t
    return float(out[0]) if squeeze else out


def nested_biv_margin(tc, s1, j1, s2, j2, u1, u2):
    """Bivariate margin of a truncated nested copula (see NestedTruncation)."""
    if not isinstance(tc, NestedTruncation):
        raise TypeError("nested_biv_margin expects a NestedTruncation")
    return tc.biv_margin(s1, j1, s2, j2, u1, u2)


def ev_scaling_check(model, t, alpha, grid):
    """max |C_t(u^alpha) - C_{t^(1/alpha)}(u)^alpha| over the given points.

    Zero (up to rounding) exactly when the model is extreme-value; the scaling
    also shows truncations of extreme-value copulas are no longer extreme value.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError("scaling exponent alpha must be positive")
    t = np.asarray(t, dtype=float)
    left = truncate_general(model, t)
    right = truncate_general(model, np.power(t, 1.0 / alpha))
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    lhs = np.atleast_1d(left.cdf(np.power(pts, alpha)))
    rhs = np.power(np.atleast_1d(right.cdf(pts)), alpha)
    return float(np.max(np.abs(lhs - rhs)))


def box_mass(cop, lower, upper):
    """Probability mass the copula-like object assigns to a box (vectorizable).

    ``lower`` and ``upper`` are (d,) or (n, d); inclusion-exclusion over the
    2^d corners.  Nonnegative for every genuine copula.
    """
    lo = np.atleast_2d(np.asarray(lower, dtype=float))
    hi = np.atleast_2d(np.asarray(upper, dtype=float))
    d = lo.shape[1]
    total = np.zeros(lo.shape[0])
    for bits in product((0, 1), repeat=d):
        corner = np.where(np.asarray(bits, dtype=bool), hi, lo)
        sign = (-1) ** (d - sum(bits))
        total = total + sign * np.atleast_1d(cop.cdf(corner))
    return float(total[0]) if np.asarray(lower).ndim == 1 else total
