"""Archimedean generator families with tilting and outer-power transforms.

A generator ``psi`` maps ``[0, inf)`` onto ``(0, 1]`` with ``psi(0) = 1``,
strictly decreasing to 0, and is completely monotone on the stated parameter
ranges, so it is the Laplace-Stieltjes transform of a positive random
variable (its frailty).  The copula built from it is
``C(u) = psi(sum_j psi_inv(u_j))``.

Two transforms are closed on this class and carry the library:

* tilting, ``psi_h(t) = psi(t + h) / psi(h)`` for a tilt ``h >= 0`` -- the
  generator-level image of conditioning on ``U <= t`` (with
  ``h = psi_inv(C(t))``), equivalently an exponential ``e^{-h v}`` tilt of
  the frailty;
* the outer power, ``psi(t^alpha)`` for ``alpha in (0, 1]``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Generator",
    "IndependenceGenerator",
    "ClaytonGenerator",
    "AMHGenerator",
    "FrankGenerator",
    "GumbelGenerator",
    "JoeGenerator",
    "TiltedGenerator",
    "OuterPowerGenerator",
    "generator",
    "generator_from_dict",
    "generator_to_dict",
    "log1mexp",
]

_LOG2 = 0.6931471805599453


def log1mexp(x):
    """log(1 - exp(x)) for x <= 0, stable near both endpoints.

    Uses ``log(-expm1(x))`` for x > -log 2 and ``log1p(-exp(x))`` otherwise.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        near = x > -_LOG2
        out = np.where(
            near,
            np.log(-np.expm1(np.where(near, x, -1.0))),
            np.log1p(-np.exp(np.where(near, -1.0, x))),
        )
    return out


def _validated_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise ValueError("generator argument t must be nonnegative")
    return t


def _validated_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(np.isnan(u)) or np.any(u < 0) or np.any(u > 1):
        raise ValueError("generator inverse argument must lie in [0, 1]")
    return u


def _scalar_like(out, ref):
    return float(out) if np.ndim(ref) == 0 else out


class Generator:
    """Base class: evaluation, inversion, two derivatives, tilt, outer power."""

    family: str = ""
    theta = None

    # subclasses implement the array-valued kernels below
    def _psi(self, t):
        raise NotImplementedError

    def _log_psi(self, t):
        raise NotImplementedError

    def _psi_inv(self, u):
        raise NotImplementedError

    def _dpsi(self, t):
        raise NotImplementedError

    def _d2psi(self, t):
        raise NotImplementedError

    def _log_neg_dpsi(self, t):
        raise NotImplementedError

    def psi(self, t):
        """psi(t) for t >= 0 (elementwise on arrays)."""
        t = _validated_t(t)
        return _scalar_like(self._psi(t), t)

    def log_psi(self, t):
        """log psi(t), exact even where psi underflows."""
        t = _validated_t(t)
        return _scalar_like(self._log_psi(t), t)

    def psi_inv(self, u):
        """Inverse generator; psi_inv(0) = +inf for these (strict) families."""
        u = _validated_u(u)
        with np.errstate(divide="ignore", over="ignore"):
            out = self._psi_inv(u)
        return _scalar_like(out, u)

    def psi_deriv(self, t, order=1):
        """psi'(t) or psi''(t); higher orders are not implemented."""
        if order not in (1, 2):
            raise ValueError("generator derivatives are implemented for orders 1 and 2 only")
        t = _validated_t(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self._dpsi(t) if order == 1 else self._d2psi(t)
        return _scalar_like(out, t)

    def log_neg_psi_deriv(self, t):
        """log(-psi'(t)); usable far beyond the range where psi' underflows."""
        t = _validated_t(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._log_neg_dpsi(t)
        return _scalar_like(out, t)

    def tilt(self, h):
        """The generator psi(. + h)/psi(h)."""
        return TiltedGenerator(self, h)

    def outer_power(self, alpha):
        """The generator psi(.^alpha), alpha in (0, 1]."""
        return OuterPowerGenerator(self, alpha)

    def _tilted_inv(self, h, u):
        # psi_inv(psi(h) u) - h without forming the cancelling difference;
        # None falls back to the generic formula.  Only families whose tilt h
        # grows polynomially in 1/C(t) (power-decay generators) need this.
        return None

    def __repr__(self):
        if self.theta is None:
            return f"{type(self).__name__}()"
        return f"{type(self).__name__}(theta={self.theta!r})"


class IndependenceGenerator(Generator):
    """psi(t) = exp(-t); generates the independence copula.

    Carrying an explicit exponential generator lets independence take part in
    tilting, nesting and outer powers like any other family (for example,
    the outer power of independence with exponent 1/theta is Gumbel).
    """

    family = "independence"

    def _psi(self, t):
        return np.exp(-t)

    def _log_psi(self, t):
        return -t

    def _psi_inv(self, u):
        return -np.log(u)

    def _dpsi(self, t):
        return -np.exp(-t)

    def _d2psi(self, t):
        return np.exp(-t)

    def _log_neg_dpsi(self, t):
        return -t

    def _tilted_inv(self, h, u):
        # tilting the exponential generator is the identity
        return -np.log(u)


class ClaytonGenerator(Generator):
    """psi(t) = (1 + t)^(-1/theta), theta > 0."""

    family = "clayton"

    def __init__(self, theta):
        theta = float(theta)
        if not theta > 0:
            raise ValueError("Clayton generator requires theta > 0")
        self.theta = theta

    def _psi(self, t):
        return np.exp(-np.log1p(t) / self.theta)

    def _log_psi(self, t):
        return -np.log1p(t) / self.theta

    def _psi_inv(self, u):
        # u^(-theta) - 1
        return np.expm1(-self.theta * np.log(u))

    def _dpsi(self, t):
        ith = 1.0 / self.theta
        return -ith * np.exp(-(ith + 1.0) * np.log1p(t))

    def _d2psi(self, t):
        ith = 1.0 / self.theta
        return ith * (ith + 1.0) * np.exp(-(ith + 2.0) * np.log1p(t))

    def _log_neg_dpsi(self, t):
        ith = 1.0 / self.theta
        return np.log(ith) - (ith + 1.0) * np.log1p(t)

    def _tilted_inv(self, h, u):
        # psi_inv(psi(h) u) - h = (1 + h)(u^-theta - 1)
        return (1.0 + h) * np.expm1(-self.theta * np.log(u))


class AMHGenerator(Generator):
    """psi(t) = (1 - theta) / (exp(t) - theta), theta in [0, 1)."""

    family = "amh"

    def __init__(self, theta):
        theta = float(theta)
        if not 0.0 <= theta < 1.0:
            raise ValueError("Ali-Mikhail-Haq generator requires theta in [0, 1)")
        self.theta = theta

    def _log_psi(self, t):
        th = self.theta
        return np.log1p(-th) - t - np.log1p(-th * np.exp(-t))

    def _psi(self, t):
        return np.exp(self._log_psi(t))

    def _psi_inv(self, u):
        # log((1 - theta (1 - u)) / u)
        return np.log1p(-self.theta * (1.0 - u)) - np.log(u)

    def _dpsi(self, t):
        th = self.theta
        et = np.exp(-t)
        return -(1.0 - th) * et / np.square(1.0 - th * et)

    def _d2psi(self, t):
        th = self.theta
        et = np.exp(-t)
        return (1.0 - th) * et * (1.0 + th * et) / (1.0 - th * et) ** 3

    def _log_neg_dpsi(self, t):
        th = self.theta
        return np.log1p(-th) - t - 2.0 * np.log1p(-th * np.exp(-t))


class FrankGenerator(Generator):
    """psi(t) = -log(1 - p e^(-t)) / theta with p = 1 - e^(-theta), theta > 0.

    All evaluations run through log1p/expm1 compositions: the naive forms
    cancel catastrophically once theta exceeds roughly 30.
    """

    family = "frank"

    def __init__(self, theta):
        theta = float(theta)
        if not theta > 0:
            raise ValueError("Frank generator requires theta > 0")
        self.theta = theta
        self._log_p = float(log1mexp(-theta))  # log(1 - e^-theta)

    def _psi(self, t):
        z = self._log_p - t  # log(p e^-t)
        return -log1mexp(z) / self.theta

    def _log_psi(self, t):
        z = self._log_p - t
        v = -log1mexp(z)
        with np.errstate(divide="ignore"):
            out = np.where(z < -700.0, z, np.log(v))
        return out - np.log(self.theta)

    def _psi_inv(self, u):
        # log(p) - log(1 - e^(-theta u))
        return self._log_p - log1mexp(-self.theta * u)

    def _dpsi(self, t):
        z = self._log_p - t
        return -np.exp(z - log1mexp(z)) / self.theta

    def _d2psi(self, t):
        z = self._log_p - t
        return np.exp(z - 2.0 * log1mexp(z)) / self.theta

    def _log_neg_dpsi(self, t):
        z = self._log_p - t
        return z - log1mexp(z) - np.log(self.theta)


class GumbelGenerator(Generator):
    """psi(t) = exp(-t^(1/theta)), theta >= 1."""

    family = "gumbel"

    def __init__(self, theta):
        theta = float(theta)
        if not theta >= 1:
            raise ValueError("Gumbel generator requires theta >= 1")
        self.theta = theta

    def _psi(self, t):
        return np.exp(-np.power(t, 1.0 / self.theta))

    def _log_psi(self, t):
        return -np.power(t, 1.0 / self.theta)

    def _psi_inv(self, u):
        return np.power(-np.log(u), self.theta)

    def _dpsi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return -np.exp(-t)
        s = np.power(t, ith)
        return -ith * np.power(t, ith - 1.0) * np.exp(-s)

    def _d2psi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return np.exp(-t)
        s = np.power(t, ith)
        return ith * np.power(t, ith - 2.0) * np.exp(-s) * ((1.0 - ith) + ith * s)

    def _log_neg_dpsi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return -np.asarray(t, dtype=float)
        return np.log(ith) + (ith - 1.0) * np.log(t) - np.power(t, ith)

    def _tilted_inv(self, h, u):
        # (h^(1/theta) - log u)^theta - h = h expm1(theta log1p(-log(u) h^(-1/theta)))
        if h == 0.0:
            return self._psi_inv(u)
        x = -np.log(u)
        return h * np.expm1(self.theta * np.log1p(x * h ** (-1.0 / self.theta)))


class JoeGenerator(Generator):
    """psi(t) = 1 - (1 - e^(-t))^(1/theta), theta >= 1."""

    family = "joe"

    def __init__(self, theta):
        theta = float(theta)
        if not theta >= 1:
            raise ValueError("Joe generator requires theta >= 1")
        self.theta = theta

    def _psi(self, t):
        return -np.expm1(log1mexp(-t) / self.theta)

    def _log_psi(self, t):
        # the inner log1mexp underflows to -0 past t ~ 745; psi(t) ~ e^-t/theta there
        out = log1mexp(log1mexp(-t) / self.theta)
        return np.where(t > 700.0, -t - np.log(self.theta), out)

    def _psi_inv(self, u):
        # -log(1 - (1-u)^theta)
        return -log1mexp(self.theta * np.log1p(-u))

    def _dpsi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return -np.exp(-t)
        lw = log1mexp(-t)
        return -ith * np.exp((ith - 1.0) * lw - t)

    def _d2psi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return np.exp(-t)
        lw = log1mexp(-t)
        w = -np.expm1(-t)
        return ith * np.exp((ith - 2.0) * lw - t) * (w + (1.0 - ith) * np.exp(-t))

    def _log_neg_dpsi(self, t):
        ith = 1.0 / self.theta
        if ith == 1.0:
            return -np.asarray(t, dtype=float)
        return np.log(ith) + (ith - 1.0) * log1mexp(-t) - t


class TiltedGenerator(Generator):
    """psi_h(t) = psi(t + h) / psi(h) for a base generator and tilt h >= 0.

    The inverse is ``psi_inv(psi(h) u) - h``.  Tilts compose additively, so
    tilting a tilted generator collapses onto the base.  Evaluation goes
    through ``exp(log_psi(t + h) - log_psi(h))`` to survive strong tilts.
    """

    def __init__(self, base, h):
        h = float(h)
        if not h >= 0:
            raise ValueError("tilt h must be nonnegative")
        if isinstance(base, TiltedGenerator):
            h += base.h
            base = base.base
        self.base = base
        self.h = h
        self._log_psi_h = float(base.log_psi(h))
        self.psi_h = float(np.exp(self._log_psi_h))
        if not (np.isfinite(self._log_psi_h) and self.psi_h > 0):
            raise ValueError("psi(h) must be positive for tilting")

    @property
    def family(self):
        return "tilted:" + self.base.family

    @property
    def theta(self):
        return self.base.theta

    def _psi(self, t):
        return np.exp(self._log_psi(t))

    def _log_psi(self, t):
        return self.base.log_psi(t + self.h) - self._log_psi_h

    def _psi_inv(self, u):
        out = self.base._tilted_inv(self.h, u)
        if out is None:
            out = self.base.psi_inv(self.psi_h * u) - self.h
        return np.maximum(out, 0.0)

    def _dpsi(self, t):
        return self.base.psi_deriv(t + self.h, 1) / self.psi_h

    def _d2psi(self, t):
        return self.base.psi_deriv(t + self.h, 2) / self.psi_h

    def _log_neg_dpsi(self, t):
        return self.base.log_neg_psi_deriv(t + self.h) - self._log_psi_h

    def __repr__(self):
        return f"TiltedGenerator({self.base!r}, h={self.h!r})"


class OuterPowerGenerator(Generator):
    """psi_op(t) = psi(t^alpha) for alpha in (0, 1].

    Requires a completely monotone base, which all implemented families are
    on their stated ranges.  Composing outer powers multiplies the exponents.
    """

    def __init__(self, base, alpha):
        alpha = float(alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValueError("outer power exponent alpha must lie in (0, 1]")
        if isinstance(base, TiltedGenerator):
            raise ValueError("outer power applies to untilted generators; tilt afterwards")
        if isinstance(base, OuterPowerGenerator):
            alpha *= base.alpha
            base = base.base
        self.base = base
        self.alpha = alpha

    @property
    def family(self):
        return "op:" + self.base.family

    @property
    def theta(self):
        return self.base.theta

    def _psi(self, t):
        return self.base.psi(np.power(t, self.alpha))

    def _log_psi(self, t):
        return self.base.log_psi(np.power(t, self.alpha))

    def _psi_inv(self, u):
        return np.power(self.base.psi_inv(u), 1.0 / self.alpha)

    def _dpsi(self, t):
        a = self.alpha
        s = np.power(t, a)
        return self.base.psi_deriv(s, 1) * a * np.power(t, a - 1.0)

    def _d2psi(self, t):
        a = self.alpha
        s = np.power(t, a)
        first = self.base.psi_deriv(s, 2) * a * a * np.power(t, 2.0 * a - 2.0)
        second = self.base.psi_deriv(s, 1) * a * (a - 1.0) * np.power(t, a - 2.0)
        return first + second

    def _log_neg_dpsi(self, t):
        a = self.alpha
        return (
            self.base.log_neg_psi_deriv(np.power(t, a))
            + np.log(a)
            + (a - 1.0) * np.log(t)
        )

    def _tilted_inv(self, h, u):
        # (h^alpha + D)^(1/alpha) - h with D the base tilted inverse at h^alpha
        if h == 0.0:
            return self._psi_inv(u)
        ha = h**self.alpha
        d = self.base._tilted_inv(ha, u)
        if d is None:
            d = np.maximum(self.base.psi_inv(self.base.psi(ha) * np.asarray(u)) - ha, 0.0)
        return h * np.expm1(np.log1p(d / ha) / self.alpha)

    def __repr__(self):
        return f"OuterPowerGenerator({self.base!r}, alpha={self.alpha!r})"


_FAMILY_CLASSES = {
    "independence": IndependenceGenerator,
    "clayton": ClaytonGenerator,
    "amh": AMHGenerator,
    "frank": FrankGenerator,
    "gumbel": GumbelGenerator,
    "joe": JoeGenerator,
}


def generator(family, theta=None, outer_alpha=None):
    """Build a generator by family name, optionally outer-powered.

    ``family`` is one of independence, clayton, amh, frank, gumbel, joe.
    """
    fam = str(family).lower()
    if fam not in _FAMILY_CLASSES:
        raise ValueError(f"unknown generator family {family!r}")
    if fam == "independence":
        if theta is not None:
            raise ValueError("the independence generator takes no theta")
        g = IndependenceGenerator()
    else:
        if theta is None:
            raise ValueError(f"family {fam!r} requires theta")
        g = _FAMILY_CLASSES[fam](theta)
    if outer_alpha is not None:
        g = OuterPowerGenerator(g, outer_alpha)
    return g


def generator_to_dict(g):
    """JSON form, e.g. {"family": "clayton", "theta": 2.0} (+ "outer_alpha")."""
    if isinstance(g, TiltedGenerator):
        raise ValueError("tilted generators are derived objects without a JSON form")
    if isinstance(g, OuterPowerGenerator):
        out = generator_to_dict(g.base)
        out["outer_alpha"] = g.alpha
        return out
    out = {"family": g.family}
    if g.theta is not None:
        out["theta"] = g.theta
    return out


def generator_from_dict(spec):
    """Inverse of :func:`generator_to_dict`; rejects unknown fields."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family is None:
        raise ValueError("generator spec requires a 'family' field")
    theta = spec.pop("theta", None)
    outer_alpha = spec.pop("outer_alpha", None)
    if spec:
        raise ValueError(f"unknown generator fields: {sorted(spec)}")
    return generator(family, theta, outer_alpha)
