import logging
from typing import Callable

import numpy as np

from .diffeo import Diffeo
from .grid import Field, deriv, quad
from .metrics import CentralVec, InertiaSpec, ad, ad_transpose, alpha_op, bracket, gelfand_fuchs, inner

logger = logging.getLogger(__name__)

Operator = Callable[[CentralVec], CentralVec]


class DegeneratePlaneError(ValueError):
    pass


def christoffel_emb(f: Diffeo, h: Field, k: Field) -> Field:
    return -deriv(h * k, 1) / f.derivative_field()


def curvature_emb(f: Diffeo, h: Field, k: Field, l: Field) -> Field:
    fx = f.derivative_field()
    fxx = deriv(f.disp, 2)
    hx, hxx = deriv(h, 1), deriv(h, 2)
    kx, kxx = deriv(k, 1), deriv(k, 2)
    lx = deriv(l, 1)
    numerator = (
        fxx * hx * k * l - fxx * h * kx * l
        + fx * h * kxx * l - fx * hxx * k * l
        + 2.0 * fx * h * kx * lx - 2.0 * fx * hx * k * lx
    )
    return numerator / fx ** 3


def emb_christoffel_expansion(f: Diffeo, h: Field, k: Field, l: Field, step: float = 1e-5) -> Field:
    """-dG(h)(k,l) + dG(k)(h,l) + G(h,G(k,l)) - G(k,G(h,l)) with dG by central differences in f."""

    def directional(direction: Field, p: Field, q: Field) -> Field:
        ahead = Diffeo(f.disp + step * direction)
        behind = Diffeo(f.disp - step * direction)
        return (christoffel_emb(ahead, p, q) - christoffel_emb(behind, p, q)) / (2.0 * step)

    return (
        -directional(h, k, l)
        + directional(k, h, l)
        + christoffel_emb(f, h, christoffel_emb(f, k, l))
        - christoffel_emb(f, k, christoffel_emb(f, h, l))
    )


def covariant(spec: InertiaSpec, X: CentralVec, Y: CentralVec) -> CentralVec:
    # constant fields: the derivative term dY.R_X drops out
    return (ad_transpose(spec, X, Y) + ad_transpose(spec, Y, X) - ad(spec, X, Y)) * 0.5


def covariant_dt(spec: InertiaSpec, u: CentralVec, y: CentralVec, yt: CentralVec) -> CentralVec:
    return yt + covariant(spec, u, y)


def metric_compatibility_residual(spec: InertiaSpec, X: CentralVec, Y: CentralVec, Z: CentralVec) -> float:
    return inner(spec, covariant(spec, X, Y), Z) + inner(spec, Y, covariant(spec, X, Z))


def _commutator(first: Operator, second: Operator) -> Operator:
    return lambda Z: first(second(Z)) - second(first(Z))


def curvature_operator(spec: InertiaSpec, X: CentralVec, Y: CentralVec, Z: CentralVec) -> CentralVec:
    def plus(V: CentralVec) -> Operator:
        return lambda W: ad_transpose(spec, V, W) + ad(spec, V, W)

    def minus(V: CentralVec) -> Operator:
        return lambda W: ad_transpose(spec, V, W) - ad(spec, V, W)

    def alpha(V: CentralVec) -> Operator:
        return lambda W: alpha_op(spec, V, W)

    return (
        _commutator(plus(X), plus(Y))(Z) * -0.25
        + _commutator(minus(X), alpha(Y))(Z) * 0.25
        + _commutator(alpha(X), minus(Y))(Z) * 0.25
        + _commutator(alpha(X), alpha(Y))(Z) * 0.25
        + alpha_op(spec, ad(spec, X, Y), Z) * 0.5
    )


def curvature_quadruple(spec: InertiaSpec, X: CentralVec, Y: CentralVec, Z: CentralVec, U: CentralVec) -> float:
    """Return g(4 R(X,Y)Z, U) for the right-invariant metric given by spec."""

    def g(p: CentralVec, q: CentralVec) -> float:
        return inner(spec, p, q)

    def br(p: CentralVec, q: CentralVec) -> CentralVec:
        return ad(spec, p, q)

    def adt(p: CentralVec, q: CentralVec) -> CentralVec:
        return ad_transpose(spec, p, q)

    return (
        2.0 * g(br(X, Y), br(Z, U))
        - g(br(Y, Z), br(X, U))
        + g(br(X, Z), br(Y, U))
        - g(Z, br(U, br(X, Y)))
        + g(U, br(Z, br(X, Y)))
        - g(Y, br(X, br(U, Z)))
        - g(X, br(Y, br(Z, U)))
        + g(adt(X, Z), adt(Y, U))
        + g(adt(X, Z), adt(U, Y))
        + g(adt(Z, X), adt(Y, U))
        - g(adt(U, X), adt(Y, Z))
        - g(adt(Y, Z), adt(X, U))
        - g(adt(Z, Y), adt(X, U))
        - g(adt(U, X), adt(Z, Y))
        + g(adt(U, Y), adt(Z, X))
    )


def sectional(spec: InertiaSpec, X: CentralVec, Y: CentralVec, tol: float = 1e-12) -> float:
    xx = inner(spec, X, X)
    yy = inner(spec, Y, Y)
    xy = inner(spec, X, Y)
    area = xx * yy - xy ** 2
    if area <= tol * max(xx * yy, 1e-300):
        raise DegeneratePlaneError(f"Vectors span a degenerate plane (area {area:.3e})")
    # sign chosen so the Burgers metric has non-negative curvature
    return -0.25 * curvature_quadruple(spec, X, Y, X, Y) / area


def virasoro_curvature_form(X1: Field, a1: float, X2: Field, a2: float) -> float:
    d1 = [X1] + [deriv(X1, m) for m in (1, 2, 3, 4)]
    d2 = [X2] + [deriv(X2, m) for m in (1, 2, 3, 4)]
    commutator = bracket(CentralVec(X1), CentralVec(X2)).x
    mixed = d1[0] * d2[4] - d1[1] * d2[3] + d1[3] * d2[1] - d1[4] * d2[0]
    integrand = (
        -4.0 * commutator ** 2
        + 4.0 * (a1 * X2 - a2 * X1) * mixed
        - d2[3] ** 2 * a1 ** 2
        + 2.0 * d1[3] * d2[3] * a1 * a2
        - d1[3] ** 2 * a2 ** 2
    )
    return quad(integrand) + 3.0 * gelfand_fuchs(X1, X2) ** 2


def sincos_reference(a1: float, a2: float) -> float:
    return -np.pi * (8.0 + a1 ** 2 + a2 ** 2 - 3.0 * np.pi)
