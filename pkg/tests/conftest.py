"""Shared fixtures: the sec^2 reference construction and a small corpus of
synthesized curves reused across test modules."""

import numpy as np
import pytest

from frectify import (
    SphericalCurve,
    SynthesisConfig,
    frenet,
    make_function_spec,
    parse,
    synthesize,
)

# Spherical curve used by most constructions: unit speed, lies on the unit
# sphere, closes nothing (a small circle traversed at unit speed).
Y_COMPONENTS = (
    "sin(sqrt(2)*t)/sqrt(2)",
    "cos(sqrt(2)*t)/sqrt(2)",
    "1/sqrt(2)",
)

# Closed-form solution of the construction for f = sec^2(s), c = 1, t0 = 0
# (variation of constants done by hand; see test_synthesis for the oracle
# that certifies it). Defined up to a translation.
REFERENCE_COMPONENTS = (
    "(3/sqrt(2))*cos(t)*sin(sqrt(2)*t)-2*sin(t)*cos(sqrt(2)*t)",
    "(3/sqrt(2))*cos(t)*cos(sqrt(2)*t)+2*sin(t)*sin(sqrt(2)*t)",
    "-cos(t)/sqrt(2)",
)


def reference_points(t):
    """Evaluate the closed-form sec^2 reference curve."""
    t = np.asarray(t, dtype=float)
    r = np.sqrt(2.0)
    return np.stack(
        [
            3.0 / r * np.cos(t) * np.sin(r * t) - 2.0 * np.sin(t) * np.cos(r * t),
            3.0 / r * np.cos(t) * np.cos(r * t) + 2.0 * np.sin(t) * np.sin(r * t),
            -np.cos(t) / r,
        ],
        axis=-1,
    )


def align_translation(points, reference):
    """Best-fit translation (least squares over nodes) of points onto
    reference; returns the translated points."""
    shift = (reference - points).mean(axis=0)
    return points + shift


def random_expr(rng, depth):
    """Random expression tree for round-trip style property tests."""
    from frectify.exprlang import BinOp, Const, Func, Neg, Var, FUNCTION_NAMES

    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Var()
        return Const(round(float(rng.uniform(0.0, 5.0)), 4))
    kind = rng.integers(0, 4)
    if kind == 0:
        return Neg(random_expr(rng, depth - 1))
    if kind == 1:
        name = FUNCTION_NAMES[rng.integers(0, len(FUNCTION_NAMES))]
        return Func(name, random_expr(rng, depth - 1))
    if kind == 2:
        op = "+-*/"[rng.integers(0, 4)]
        return BinOp(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    return BinOp("^", random_expr(rng, depth - 1), Const(float(rng.integers(0, 4))))


@pytest.fixture(scope="session")
def sphere_Y():
    return SphericalCurve(*(parse(c) for c in Y_COMPONENTS), t_range=(-1.55, 1.55))


@pytest.fixture(scope="session")
def sec2_spec():
    return make_function_spec("sec(t)^2", (-1.2, 1.2), (0.0, 0.0))


@pytest.fixture(scope="session")
def sec2_config(sec2_spec):
    return SynthesisConfig(
        spec=sec2_spec, c=1.0, t0=0.0, t_range=(-0.6, 0.6), n=256
    )


@pytest.fixture(scope="session")
def sec2_curve(sec2_config, sphere_Y):
    return synthesize(sec2_config, sphere_Y)


@pytest.fixture(scope="session")
def sec2_frames(sec2_curve):
    alc = sec2_curve.to_arclength(256)
    return alc, frenet(alc)


def build_case(f_text, domain, anchor, t_range, sphere_Y, n=256, c=1.0, t0=0.0):
    spec = make_function_spec(f_text, domain, anchor)
    cfg = SynthesisConfig(spec=spec, c=c, t0=t0, t_range=t_range, n=n)
    curve = synthesize(cfg, sphere_Y)
    alc = curve.to_arclength(n)
    fd = frenet(alc)
    return {"spec": spec, "cfg": cfg, "curve": curve, "alc": alc, "fd": fd}


CORPUS_PARAMS = {
    "const": ("1", (-0.5, 3.5), (0.0, 0.0), (0.05, 1.2)),
    "linear": ("t", (0.5, 2.5), (0.5, 0.125), (0.15, 1.2)),
    "affine": ("2*t+1", (0.1, 3.0), (0.1, 0.11), (0.12, 1.3)),
    "quadratic": ("t^2", (0.5, 2.0), (0.5, 0.5 ** 3 / 3.0), (0.06, 1.15)),
    "sec2": ("sec(t)^2", (-1.2, 1.2), (0.0, 0.0), (-0.6, 0.6)),
}


@pytest.fixture(scope="session")
def corpus(sphere_Y):
    return {
        name: build_case(*params, sphere_Y)
        for name, params in CORPUS_PARAMS.items()
    }
