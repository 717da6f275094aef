"""Sparse multivariate polynomial systems over the complex numbers.

Supports the generic continuation pipeline: term-list systems, analytic
Jacobians by exponent differentiation, the convex linear homotopy
h(x, t) = gamma*(1-t)*g(x) + t*f(x), and total-degree start systems whose
roots-of-unity solutions are written down directly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Term:
    """One monomial: coeff * prod_j x_j**exponents[j]."""

    coeff: complex
    exponents: tuple[int, ...]


@dataclass
class PolySystem:
    """A list of polynomials, each a list of Terms, in nvars variables."""

    nvars: int
    polys: list[list[Term]]

    def __post_init__(self) -> None:
        for poly in self.polys:
            for term in poly:
                if len(term.exponents) != self.nvars:
                    raise ValueError(
                        f"term {term} does not have {self.nvars} exponents"
                    )
                if any(e < 0 for e in term.exponents):
                    raise ValueError(f"negative exponent in {term}")

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.nvars,):
            raise ValueError(f"expected point of length {self.nvars}, got {x.shape}")
        return x

    def evaluate(self, x) -> np.ndarray:
        x = self._check_point(x)
        values = np.zeros(len(self.polys), dtype=np.complex128)
        for i, poly in enumerate(self.polys):
            acc = 0j
            for term in poly:
                acc += term.coeff * np.prod(x**np.array(term.exponents))
            values[i] = acc
        return values

    def jacobian(self, x) -> np.ndarray:
        x = self._check_point(x)
        jac = np.zeros((len(self.polys), self.nvars), dtype=np.complex128)
        for i, poly in enumerate(self.polys):
            for term in poly:
                for j, ej in enumerate(term.exponents):
                    if ej == 0:
                        continue
                    prod = complex(term.coeff) * ej * x[j] ** (ej - 1)
                    for l, el in enumerate(term.exponents):
                        if l != j and el:
                            prod *= x[l] ** el
                    jac[i, j] += prod
        return jac

    def degrees(self) -> list[int]:
        """Max total degree per polynomial; zero-coefficient terms ignored."""
        out = []
        for poly in self.polys:
            degs = [sum(t.exponents) for t in poly if t.coeff != 0]
            out.append(max(degs) if degs else 0)
        return out

    def is_zero(self, i: int) -> bool:
        return all(t.coeff == 0 for t in self.polys[i])


@dataclass
class Homotopy:
    """h(x, t) = gamma*(1-t)*start(x) + t*target(x), tracked for t in [0, 1]."""

    target: PolySystem
    start: PolySystem
    gamma: complex

    def __post_init__(self) -> None:
        if self.target.nvars != self.start.nvars:
            raise ValueError("start and target systems must share variables")
        if len(self.target.polys) != len(self.start.polys):
            raise ValueError("start and target systems must have equal size")
        if abs(abs(self.gamma) - 1.0) > 1e-9:
            raise ValueError(f"gamma must lie on the unit circle, got {self.gamma!r}")

    @property
    def nvars(self) -> int:
        return self.target.nvars

    @staticmethod
    def _check_t(t: float) -> None:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"continuation parameter t={t} outside [0, 1]")

    def eval(self, x, t: float) -> np.ndarray:
        self._check_t(t)
        return self.gamma * (1.0 - t) * self.start.evaluate(x) + t * self.target.evaluate(x)

    def jacobian_x(self, x, t: float) -> np.ndarray:
        self._check_t(t)
        return self.gamma * (1.0 - t) * self.start.jacobian(x) + t * self.target.jacobian(x)

    def dt(self, x, t: float) -> np.ndarray:
        self._check_t(t)
        return self.target.evaluate(x) - self.gamma * self.start.evaluate(x)


def start_roots(degrees: list[int], constants: list[complex]) -> list[np.ndarray]:
    """All solutions of { c_i * x_i^{d_i} = 1 }: a roots-of-unity grid."""
    per_var: list[list[complex]] = []
    for d, c in zip(degrees, constants):
        base = (1.0 / complex(c)) ** (1.0 / d)
        per_var.append([base * np.exp(2j * np.pi * k / d) for k in range(d)])
    return [np.array(combo, dtype=np.complex128)
            for combo in itertools.product(*per_var)]


def total_degree_start(
    f: PolySystem, rng: np.random.Generator
) -> tuple[PolySystem, list[np.ndarray]]:
    """Build the total-degree start system for f and list its solutions.

    g_i = c_i * x_i^{d_i} - 1 with seeded unit-modulus constants c_i, where
    d_i is the max total degree of f_i.  Returns (g, starts) with
    prod(d_i) start points satisfying g to 1e-12.
    """
    degrees = f.degrees()
    for i in range(len(f.polys)):
        if f.is_zero(i):
            raise ValueError(f"polynomial {i} is identically zero")
    constants = [np.exp(2j * np.pi * rng.uniform()) for _ in degrees]
    polys = []
    for i, (d, c) in enumerate(zip(degrees, constants)):
        lead_exp = tuple(d if j == i else 0 for j in range(f.nvars))
        polys.append([Term(c, lead_exp), Term(-1.0 + 0j, (0,) * f.nvars)])
    g = PolySystem(f.nvars, polys)
    starts = start_roots(degrees, constants)
    for s in starts:
        residual = float(np.linalg.norm(g.evaluate(s)))
        if residual > 1e-12:
            raise AssertionError(f"start residual {residual} exceeds 1e-12")
    return g, starts


def system_to_json(f: PolySystem) -> dict[str, Any]:
    return {
        "nvars": f.nvars,
        "polys": [
            [
                {"re": float(t.coeff.real), "im": float(t.coeff.imag),
                 "exp": list(t.exponents)}
                for t in poly
            ]
            for poly in f.polys
        ],
    }


def system_from_json(obj: Any) -> PolySystem:
    try:
        nvars = int(obj["nvars"])
        polys = []
        for poly in obj["polys"]:
            terms = []
            for t in poly:
                coeff = complex(float(t["re"]), float(t["im"]))
                exps = tuple(int(e) for e in t["exp"])
                terms.append(Term(coeff, exps))
            polys.append(terms)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed polynomial system object: {exc}") from exc
    system = PolySystem(nvars, polys)  # arity check happens here
    return system
