"""Intersection conditions, edge homotopies, and the recursive Pieri solve.

A feedback-law problem asks for every degree-q map X(s) into the p-planes
of C^(m+p) that meets n = mp + q(m+p) general m-planes L_i at prescribed
interpolation points: det([X(s_i) | L_i]) = 0 for i = 1..n.  The solver
walks the tree of localization patterns from the trivial pattern to the
target.  Each edge frees one bottom-pivot coefficient and imposes one new
condition by moving a special plane S_X onto the general plane L_k; the
conditions already satisfied ride along pinned at full strength.  One
homotopy path is tracked per tree edge, and the leaves are the solutions.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, replace

import numpy as np

from .linalg import cofactors_at, lu_decompose
from .patterns import (
    LocalizationPattern,
    count_paths,
    degrees_of_freedom,
    increments,
    num_conditions,
    pieri_root_count,
    target_pattern,
    trivial_pattern,
)
from .scheduler import JobMessage, ResultMessage, run_dynamic
from .tracker import GammaArc, TrackerOptions, track_path

RANK_TOL = 1e-8
MIN_SEPARATION = 1e-3
DUPLICATE_TOL = 1e-8
COLLISION_TOL = 1e-4
# condition orderings tried per solve: the original, then rotations; the
# target system never changes, but a rotation replaces every intermediate
# system, stepping around data that is degenerate for one ordering
MAX_CONDITION_ORDERS = 4
# fixed detour arcs through the complex t-plane, straight path first; a
# path blocked by a near-singular fiber at real t is retried around it
GAMMA_ARCS = (
    1.0 + 0.0j,
    np.exp(0.8j),
    np.exp(-0.8j),
    np.exp(1.6j),
    np.exp(-1.6j),
)
# step shrink factors swept (with all arcs) when an endpoint collides
COLLISION_SHRINKS = (1.0, 5.0, 25.0)


# ----------------------------------------------------- coefficient layout


def star_slots(pattern: LocalizationPattern) -> list[tuple[int, int]]:
    """All star positions as (column, tall row), column-major."""
    return [
        (j, row)
        for j in range(pattern.p)
        for row in range(j + 1, pattern.bottom[j] + 1)
    ]


def free_slots(pattern: LocalizationPattern) -> list[tuple[int, int]]:
    """Star positions that are unknowns: everything but the top pivots."""
    return [(j, row) for j, row in star_slots(pattern) if row != j + 1]


def full_coefficients(pattern: LocalizationPattern, free) -> np.ndarray:
    """Insert the fixed top-pivot ones into a free-coefficient vector."""
    free = np.asarray(free, dtype=np.complex128)
    if free.shape != (degrees_of_freedom(pattern),):
        raise ValueError(
            f"expected {degrees_of_freedom(pattern)} free coefficients, "
            f"got shape {free.shape}"
        )
    lay = _layout(pattern)
    full = np.empty(lay.nstars, dtype=np.complex128)
    full[lay.top_idx] = 1.0
    full[lay.free_idx] = free
    return full


def free_coefficients(pattern: LocalizationPattern, full) -> np.ndarray:
    """Drop the fixed top-pivot entries from a full star vector."""
    full = np.asarray(full, dtype=np.complex128)
    lay = _layout(pattern)
    if full.shape != (lay.nstars,):
        raise ValueError(f"expected {lay.nstars} coefficients, got {full.shape}")
    return full[lay.free_idx].copy()


class _Layout:
    """Precomputed index arrays for one pattern's star template.

    Tall row r of column j contributes coeff * s^k * t^(K_j - k) to the
    physical entry (r-1 mod m+p, j), where k is r's degree block and K_j
    is the block of the column's bottom pivot.
    """

    def __init__(self, pattern: LocalizationPattern):
        mp = pattern.m + pattern.p
        slots = star_slots(pattern)
        self.nstars = len(slots)
        cols = np.array([j for j, _ in slots])
        rows = np.array([r for _, r in slots])
        self.st_cols = cols
        self.st_rows = (rows - 1) % mp
        self.st_degs = (rows - 1) // mp
        kcol = (np.asarray(pattern.bottom) - 1) // mp
        self.st_tpow = kcol[cols] - self.st_degs
        top = rows == cols + 1
        self.top_idx = np.nonzero(top)[0]
        self.free_idx = np.nonzero(~top)[0]
        self.fr_rows = self.st_rows[self.free_idx]
        self.fr_cols = cols[self.free_idx]
        self.fr_degs = self.st_degs[self.free_idx]
        self.fr_tpow = self.st_tpow[self.free_idx]
        # several free slots can share one matrix entry (folded blocks);
        # cofactors are computed once per distinct entry
        key = self.fr_rows * pattern.p + self.fr_cols
        uniq, inverse = np.unique(key, return_inverse=True)
        self.uq_rows = uniq // pattern.p
        self.uq_cols = uniq % pattern.p
        self.fr_uq = inverse


@functools.lru_cache(maxsize=None)
def _layout(pattern: LocalizationPattern) -> _Layout:
    return _Layout(pattern)


# ------------------------------------------------------- map evaluation


class MapEvaluator:
    """The matrix-valued map X(s, t) of one pattern and coefficient set."""

    def __init__(self, pattern: LocalizationPattern, coeffs: np.ndarray):
        self.pattern = pattern
        self.coeffs = coeffs
        self._lay = _layout(pattern)

    def matrix(self, s: complex, t: complex) -> np.ndarray:
        lay = self._lay
        mp = self.pattern.m + self.pattern.p
        x = np.zeros((mp, self.pattern.p), dtype=np.complex128)
        contrib = self.coeffs * complex(s) ** lay.st_degs * t**lay.st_tpow
        np.add.at(x, (lay.st_rows, lay.st_cols), contrib)
        return x


def instantiate_map(pattern: LocalizationPattern, coeffs) -> MapEvaluator:
    """Bind a full star-coefficient vector to its pattern."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    lay = _layout(pattern)
    if coeffs.shape != (lay.nstars,):
        raise ValueError(
            f"pattern {pattern} has {lay.nstars} stars, got {coeffs.shape}"
        )
    return MapEvaluator(pattern, coeffs)


def special_plane(pattern: LocalizationPattern) -> np.ndarray:
    """The m-plane met exactly when a bottom-pivot coefficient vanishes.

    Columns are the standard basis vectors whose indices avoid the bottom
    pivots' physical rows; those rows are pairwise distinct, so exactly m
    basis vectors remain.
    """
    mp = pattern.m + pattern.p
    residues = {(b - 1) % mp for b in pattern.bottom}
    keep = [k for k in range(mp) if k not in residues]
    return np.eye(mp)[:, keep]


def condition_residual(x: MapEvaluator, plane, s: complex, t: complex) -> complex:
    """det of [X(s,t) | plane]: zero means the two planes meet."""
    plane = np.asarray(plane)
    mp = x.pattern.m + x.pattern.p
    if plane.shape != (mp, x.pattern.m):
        raise ValueError(f"plane must be {mp}x{x.pattern.m}, got {plane.shape}")
    a = np.concatenate([x.matrix(s, t), plane], axis=1)
    return complex(np.linalg.det(a))


def condition_gradient(x: MapEvaluator, plane, s: complex, t: complex) -> np.ndarray:
    """Derivative of condition_residual in each free coefficient.

    Each free coefficient feeds exactly one matrix entry with a known
    monomial prefactor, so the derivative is that prefactor times the
    entry's cofactor; cofactors are used because the matrix is singular
    exactly where the residual vanishes.
    """
    plane = np.asarray(plane)
    mp = x.pattern.m + x.pattern.p
    if plane.shape != (mp, x.pattern.m):
        raise ValueError(f"plane must be {mp}x{x.pattern.m}, got {plane.shape}")
    lay = x._lay
    a = np.concatenate([x.matrix(s, t), plane], axis=1)
    cof = cofactors_at(a, lay.uq_rows, lay.uq_cols)
    pref = complex(s) ** lay.fr_degs * t**lay.fr_tpow
    return pref * cof[lay.fr_uq]


# --------------------------------------------------------- problem input


@dataclass(eq=False)
class ProblemInput:
    """One feedback-law instance: sizes, planes, interpolation points."""

    m: int
    p: int
    q: int
    seed: int
    planes: np.ndarray  # (n, m+p, m) complex
    points: np.ndarray  # (n,) complex, never 1

    def __post_init__(self) -> None:
        n = num_conditions(self.m, self.p, self.q)
        mp = self.m + self.p
        self.planes = np.asarray(self.planes, dtype=np.complex128)
        self.points = np.asarray(self.points, dtype=np.complex128)
        if self.planes.shape != (n, mp, self.m):
            raise ValueError(
                f"need {n} planes of shape {mp}x{self.m}, got {self.planes.shape}"
            )
        if self.points.shape != (n,):
            raise ValueError(f"need {n} points, got {self.points.shape}")
        if np.min(np.abs(self.points - 1.0)) < 1e-9:
            raise ValueError("interpolation points must stay away from 1")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(self.points[i] - self.points[j]) < 1e-9:
                    raise ValueError(f"points {i} and {j} coincide")
        rng = np.random.default_rng(0)
        for i in range(n):
            rows = rng.choice(mp, size=self.m, replace=False)
            f = lu_decompose(self.planes[i][rows])
            if f.min_pivot <= RANK_TOL * max(f.scale, 1e-300):
                raise ValueError(f"plane {i} is rank deficient")

    @property
    def n(self) -> int:
        return len(self.points)

    @classmethod
    def generate(cls, m: int, p: int, q: int, seed: int) -> "ProblemInput":
        """Seeded general-position instance.

        Draw order is fixed (planes, then points, then rank-check rows) so
        instances are reproducible across platforms.
        """
        n = num_conditions(m, p, q)
        mp = m + p
        rng = np.random.default_rng(seed)
        planes = rng.standard_normal((n, mp, m)) + 1j * rng.standard_normal((n, mp, m))
        points = np.empty(n, dtype=np.complex128)
        count = 0
        while count < n:
            s = np.exp(2j * np.pi * rng.uniform())
            if abs(s - 1.0) < MIN_SEPARATION:
                continue
            if count and np.min(np.abs(points[:count] - s)) < MIN_SEPARATION:
                continue
            points[count] = s
            count += 1
        for i in range(n):
            while True:
                rows = rng.choice(mp, size=m, replace=False)
                f = lu_decompose(planes[i][rows])
                if f.min_pivot > RANK_TOL * max(f.scale, 1e-300):
                    break
                planes[i] = rng.standard_normal((mp, m)) + 1j * rng.standard_normal(
                    (mp, m)
                )
        return cls(m, p, q, seed, planes, points)


def problem_to_json(problem: ProblemInput) -> str:
    doc = {
        "m": problem.m,
        "p": problem.p,
        "q": problem.q,
        "seed": problem.seed,
        "points": [[z.real, z.imag] for z in problem.points],
        "planes": [
            [[[v.real, v.imag] for v in row] for row in plane]
            for plane in problem.planes
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def problem_from_json(text: str) -> ProblemInput:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed problem file: {exc}") from exc
    try:
        m, p, q = int(doc["m"]), int(doc["p"]), int(doc["q"])
        seed = int(doc.get("seed", 0))
        pts = np.asarray(doc["points"], dtype=float)
        pls = np.asarray(doc["planes"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pls.ndim != 4 or pls.shape[3] != 2:
            raise ValueError("points need [re,im] pairs, planes nested rows of them")
        points = pts[:, 0] + 1j * pts[:, 1]
        planes = pls[..., 0] + 1j * pls[..., 1]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed problem file: {exc}") from exc
    return ProblemInput(m, p, q, seed, planes, points)


# -------------------------------------------------------- edge homotopy


class EdgeHomotopy:
    """Square homotopy for one tree edge in the deeper pattern's unknowns.

    Equation 1 moves: det([X(s(t), t) | (1-t) S_X + t L_k]) with the point
    s(t) = (1-t) + t s_k travelling from 1 to s_k while t simultaneously
    de-homogenizes the map.  Equations 2..k pin the conditions the source
    already satisfies, evaluated at full strength (t = 1); they carry no
    continuation parameter.
    """

    def __init__(
        self,
        pattern: LocalizationPattern,
        pinned_points,
        pinned_planes,
        moving_point: complex,
        moving_plane,
        special,
    ):
        self.pattern = pattern
        self.nvars = degrees_of_freedom(pattern)
        mp = pattern.m + pattern.p
        self._mp = mp
        self._p = pattern.p
        self._s_pin = np.asarray(pinned_points, dtype=np.complex128)
        self._l_pin = np.asarray(pinned_planes, dtype=np.complex128).reshape(
            -1, mp, pattern.m
        )
        if len(self._s_pin) != self.nvars - 1:
            raise ValueError(
                f"pattern depth {self.nvars} needs {self.nvars - 1} pinned "
                f"conditions, got {len(self._s_pin)}"
            )
        self._s_new = complex(moving_point)
        self._special = np.asarray(special, dtype=np.complex128)
        self._plane_delta = np.asarray(moving_plane, dtype=np.complex128) - self._special
        self._lay = _layout(pattern)
        grid = np.arange(mp)
        self._grid_rows = np.repeat(grid, mp)
        self._grid_cols = np.tile(grid, mp)

    def _full(self, x: np.ndarray) -> np.ndarray:
        lay = self._lay
        full = np.empty(lay.nstars, dtype=np.complex128)
        full[lay.top_idx] = 1.0
        full[lay.free_idx] = x
        return full

    def _moving_matrix(self, full: np.ndarray, t: complex) -> tuple[np.ndarray, complex]:
        lay = self._lay
        a = np.zeros((self._mp, self._mp), dtype=np.complex128)
        a[:, self._p :] = self._special + t * self._plane_delta
        s_mov = (1.0 - t) + self._s_new * t
        np.add.at(
            a,
            (lay.st_rows, lay.st_cols),
            full * s_mov**lay.st_degs * t**lay.st_tpow,
        )
        return a, s_mov

    def _matrices(self, x: np.ndarray, t: complex) -> tuple[np.ndarray, complex]:
        lay = self._lay
        k = self.nvars
        full = self._full(x)
        a = np.zeros((k, self._mp, self._mp), dtype=np.complex128)
        a[0], s_mov = self._moving_matrix(full, t)
        if k > 1:
            a[1:, :, self._p :] = self._l_pin
            ii = np.arange(1, k)[:, None]
            contrib = full[None, :] * self._s_pin[:, None] ** lay.st_degs[None, :]
            np.add.at(a, (ii, lay.st_rows[None, :], lay.st_cols[None, :]), contrib)
        return a, s_mov

    def eval(self, x, t: complex) -> np.ndarray:
        a, _ = self._matrices(np.asarray(x, dtype=np.complex128), t)
        return np.linalg.det(a)

    def jacobian_x(self, x, t: complex) -> np.ndarray:
        a, s_mov = self._matrices(np.asarray(x, dtype=np.complex128), t)
        lay = self._lay
        k = self.nvars
        jac = np.empty((k, k), dtype=np.complex128)
        cof = cofactors_at(a[0], lay.uq_rows, lay.uq_cols)
        jac[0] = s_mov**lay.fr_degs * t**lay.fr_tpow * cof[lay.fr_uq]
        for i in range(1, k):
            cof = cofactors_at(a[i], lay.uq_rows, lay.uq_cols)
            jac[i] = self._s_pin[i - 1] ** lay.fr_degs * cof[lay.fr_uq]
        return jac

    def dt(self, x, t: complex) -> np.ndarray:
        lay = self._lay
        full = self._full(np.asarray(x, dtype=np.complex128))
        a, s_mov = self._moving_matrix(full, t)
        adot = np.zeros((self._mp, self._mp), dtype=np.complex128)
        adot[:, self._p :] = self._plane_delta
        degs, tpow = lay.st_degs, lay.st_tpow
        sdot = self._s_new - 1.0
        # d/dt of s(t)^deg t^tpow, with 0 * base^(-1) branches masked off
        term_s = np.where(degs > 0, degs * s_mov ** np.maximum(degs - 1, 0), 0.0)
        term_t = np.where(tpow > 0, tpow * complex(t) ** np.maximum(tpow - 1, 0), 0.0)
        dmono = term_s * sdot * t**tpow + term_t * s_mov**degs
        np.add.at(adot, (lay.st_rows, lay.st_cols), full * dmono)
        cof = cofactors_at(a, self._grid_rows, self._grid_cols)
        out = np.zeros(self.nvars, dtype=np.complex128)
        out[0] = cof @ adot.ravel()
        return out


def embed_start(
    source: LocalizationPattern,
    source_free: np.ndarray,
    dest: LocalizationPattern,
) -> np.ndarray:
    """Lift a solved source node into the deeper pattern's unknowns.

    The one coefficient the source does not have, the freshly opened
    bottom pivot, starts at zero; that is exactly what makes the moving
    equation vanish at t = 0 against the special plane.
    """
    source_free = np.asarray(source_free, dtype=np.complex128)
    known = dict(zip(free_slots(source), source_free))
    if len(known) != degrees_of_freedom(source):
        raise ValueError("source coefficient count does not match its pattern")
    out = np.zeros(degrees_of_freedom(dest), dtype=np.complex128)
    missing = 0
    for i, slot in enumerate(free_slots(dest)):
        if slot in known:
            out[i] = known[slot]
        else:
            missing += 1
    if missing != 1:
        raise ValueError(f"expected exactly one new coefficient, found {missing}")
    return out


def _edge_homotopy(
    problem: ProblemInput, dest: LocalizationPattern, k: int
) -> EdgeHomotopy:
    """The homotopy for the edge that imposes condition k on pattern dest."""
    return EdgeHomotopy(
        dest,
        problem.points[: k - 1],
        problem.planes[: k - 1],
        problem.points[k - 1],
        problem.planes[k - 1],
        special_plane(dest),
    )


@dataclass
class EdgeOutcome:
    """What one tracked edge reports back to the master."""

    status: str  # "converged" | "diverged" | "failed" | "start_violation"
    free: np.ndarray | None
    residual: float
    steps_used: int
    start_residual: float
    start_min_pivot: float
    start_scale: float
    arc_used: int = 0  # index into GAMMA_ARCS of the arc that converged


@dataclass(frozen=True, eq=False)
class EdgeTask:
    """Self-contained worker payload: track one edge of the tree.

    A failed or diverged straight track is retried along the detour arcs
    starting at GAMMA_ARCS[arc_start]; the ladder is fixed, so outcomes
    stay deterministic for every worker count.
    """

    problem: ProblemInput
    source_bottom: tuple[int, ...]
    dest_bottom: tuple[int, ...]
    cond_index: int
    source_free: np.ndarray
    options: TrackerOptions
    arc_start: int = 0

    def run(self) -> EdgeOutcome:
        prob = self.problem
        source = LocalizationPattern(prob.m, prob.p, prob.q, self.source_bottom)
        dest = LocalizationPattern(prob.m, prob.p, prob.q, self.dest_bottom)
        k = self.cond_index
        if k != degrees_of_freedom(dest):
            raise ValueError("condition index must equal the deeper pattern's depth")
        hom = _edge_homotopy(prob, dest, k)
        x0 = embed_start(source, self.source_free, dest)
        start_residual = float(np.linalg.norm(hom.eval(x0, 0.0)))
        f = lu_decompose(hom.jacobian_x(x0, 0.0))
        if start_residual > self.options.residual_tol:
            return EdgeOutcome(
                "start_violation", None, start_residual, 0,
                start_residual, f.min_pivot, f.scale,
            )
        steps_total = 0
        res = None
        arc_used = min(self.arc_start, len(GAMMA_ARCS) - 1)
        for ai in range(arc_used, len(GAMMA_ARCS)):
            gamma = GAMMA_ARCS[ai]
            arc = hom if gamma == 1.0 else GammaArc(hom, gamma)
            res = track_path(arc, x0, self.options)
            steps_total += res.steps_used
            arc_used = ai
            if res.status == "converged":
                break
        free = res.endpoint if res.status == "converged" else None
        return EdgeOutcome(
            res.status, free, res.residual, steps_total,
            start_residual, f.min_pivot, f.scale, arc_used,
        )


# ------------------------------------------------------------- solutions


@dataclass(eq=False)
class SolutionMap:
    """One feedback law: the full star coefficients of the target pattern.

    Top pivots are exactly 1 by normalization; residuals are the raw
    determinant moduli of the n intersection conditions.
    """

    pattern: LocalizationPattern
    coefficients: np.ndarray
    residuals: np.ndarray


def solution_from_free(
    problem: ProblemInput, pattern: LocalizationPattern, free: np.ndarray
) -> SolutionMap:
    full = full_coefficients(pattern, free)
    ev = instantiate_map(pattern, full)
    mats = np.stack(
        [
            np.concatenate([ev.matrix(problem.points[i], 1.0), problem.planes[i]], axis=1)
            for i in range(problem.n)
        ]
    )
    residuals = np.abs(np.linalg.det(mats))
    return SolutionMap(pattern, full, residuals)


@dataclass
class LossRecord:
    """A pruned subtree: one failed edge and every leaf below it."""

    edge_id: str
    pattern: tuple[int, ...]
    status: str
    paths_lost: int


@dataclass
class EdgeRecord:
    """Per-edge diagnostics kept for reporting and contract checks."""

    edge_id: str
    depth: int
    pattern: tuple[int, ...]
    status: str
    steps_used: int
    start_residual: float
    start_min_pivot: float
    start_scale: float


@dataclass
class SolveResult:
    solutions: list[SolutionMap]
    losses: list[LossRecord]
    level_counts: dict[int, int]
    edge_records: list[EdgeRecord]

    @property
    def lost_paths(self) -> int:
        return sum(loss.paths_lost for loss in self.losses)


class PieriTreeSource:
    """Dependency-aware job source walking the pattern tree level by level.

    The master owns all bookkeeping: a node is stored only while its
    children are outstanding, follow-ups for a depth are issued once the
    whole depth has reported, and failed edges become loss records
    covering their subtree.  Paths arriving at one pattern must land on
    distinct roots of one condition system, so converged endpoints are
    deduplicated per pattern before their subtrees spawn; an endpoint that
    collides with an already accepted sibling is re-tracked along
    alternative arcs.  Levels are processed in edge-id order, which keeps
    everything deterministic for any worker count.
    """

    def __init__(self, problem: ProblemInput, options: TrackerOptions):
        self._problem = problem
        self._options = options
        self._trivial = trivial_pattern(problem.m, problem.p, problem.q)
        self._target = target_pattern(problem.m, problem.p, problem.q)
        self._store: dict[str, int] = {}
        self._level_tasks: dict[str, EdgeTask] = {}
        self._level_results: list[tuple[str, ResultMessage]] = []
        self._level_outstanding = 0
        self.solutions: list[SolutionMap] = []
        self.losses: list[LossRecord] = []
        self.level_counts: dict[int, int] = {}
        self.edge_records: list[EdgeRecord] = []
        self.fatal: list[str] = []
        self.retracked_edges: list[str] = []

    @property
    def store_size(self) -> int:
        return len(self._store)

    def _pattern_at(self, path: str) -> LocalizationPattern:
        bottom = list(self._trivial.bottom)
        for part in path.split("."):
            bottom[int(part)] += 1
        prob = self._problem
        return LocalizationPattern(prob.m, prob.p, prob.q, tuple(bottom))

    def _edge_jobs(
        self, path: str, pattern: LocalizationPattern, free: np.ndarray
    ) -> list[JobMessage]:
        depth = degrees_of_freedom(pattern)
        jobs = []
        for inc in increments(pattern):
            if count_paths(inc, self._target) == 0:
                continue  # dead branch: no leaf below, nothing to lose
            col = next(
                j for j in range(pattern.p) if inc.bottom[j] != pattern.bottom[j]
            )
            edge_id = f"{path}.{col}" if path else str(col)
            task = EdgeTask(
                self._problem, pattern.bottom, inc.bottom, depth + 1, free,
                self._options,
            )
            self._level_tasks[edge_id] = task
            jobs.append(JobMessage(edge_id, "pieri-edge", task))
        if jobs:
            self._store[path] = len(jobs)
            self.level_counts[depth + 1] = (
                self.level_counts.get(depth + 1, 0) + len(jobs)
            )
        return jobs

    def initial_jobs(self) -> list[JobMessage]:
        jobs = self._edge_jobs("", self._trivial, np.zeros(0, dtype=np.complex128))
        self._level_outstanding = len(jobs)
        return jobs

    def on_result(self, result: ResultMessage) -> list[JobMessage]:
        edge_id = str(result.job_id)
        source_path = edge_id.rpartition(".")[0]
        self._store[source_path] -= 1
        if self._store[source_path] == 0:
            del self._store[source_path]
        self._level_results.append((edge_id, result))
        self._level_outstanding -= 1
        if self._level_outstanding > 0:
            return []
        return self._process_level()

    def _process_level(self) -> list[JobMessage]:
        entries = sorted(self._level_results, key=lambda e: e[0])
        tasks = self._level_tasks
        self._level_results = []
        self._level_tasks = {}
        # per destination pattern: mutable [edge_id, endpoint, arc_used] rows
        accepted: dict[tuple[int, ...], list[list]] = {}
        for edge_id, result in entries:
            dest = self._pattern_at(edge_id)
            depth = degrees_of_freedom(dest)
            if result.status != "ok":
                self.fatal.append(f"edge {edge_id}: {result.payload}")
                self.losses.append(
                    LossRecord(
                        edge_id, dest.bottom, "error",
                        count_paths(dest, self._target),
                    )
                )
                self.edge_records.append(
                    EdgeRecord(edge_id, depth, dest.bottom, "error", 0, 0.0, 0.0, 0.0)
                )
                continue
            outcome: EdgeOutcome = result.payload
            self.edge_records.append(
                EdgeRecord(
                    edge_id, depth, dest.bottom, outcome.status,
                    outcome.steps_used, outcome.start_residual,
                    outcome.start_min_pivot, outcome.start_scale,
                )
            )
            if outcome.status != "converged":
                if outcome.status == "start_violation":
                    self.fatal.append(
                        f"edge {edge_id}: start residual "
                        f"{outcome.start_residual:.3e} exceeds "
                        f"{self._options.residual_tol:.0e} "
                        "(special plane or normalization contract broken)"
                    )
                self.losses.append(
                    LossRecord(
                        edge_id, dest.bottom, outcome.status,
                        count_paths(dest, self._target),
                    )
                )
                continue
            self._place_endpoint(
                accepted.setdefault(dest.bottom, []),
                tasks, edge_id, dest, outcome,
            )
        survivors = sorted(
            (row[0], bottom, row[1])
            for bottom, rows in accepted.items()
            for row in rows
        )
        next_jobs: list[JobMessage] = []
        for edge_id, bottom, free in survivors:
            dest = LocalizationPattern(
                self._problem.m, self._problem.p, self._problem.q, bottom
            )
            if degrees_of_freedom(dest) == self._problem.n:
                self.solutions.append(
                    solution_from_free(self._problem, dest, free)
                )
            else:
                next_jobs.extend(self._edge_jobs(edge_id, dest, free))
        self._level_outstanding = len(next_jobs)
        return next_jobs

    def _place_endpoint(
        self,
        group: list[list],
        tasks: dict[str, EdgeTask],
        edge_id: str,
        dest: LocalizationPattern,
        outcome: EdgeOutcome,
    ) -> None:
        """Add one converged endpoint to its pattern group, collision-free.

        If the endpoint sits on an already claimed root, first re-track
        this edge along other arcs; if nothing vacant is found, the claim
        may be the jumped one, so re-track the colliding sibling instead
        and let this endpoint keep the spot.  An unresolved collision is
        kept and later reported by verify(), never silently dropped.
        """
        free = outcome.free
        colliding = [
            row for row in group if _coeff_distance(free, row[1]) <= COLLISION_TOL
        ]
        if colliding:
            retracked = self._retry_collision(
                tasks[edge_id], dest, outcome.arc_used, [r[1] for r in group]
            )
            if retracked is not None:
                free = retracked
                self.retracked_edges.append(edge_id)
            else:
                sib = colliding[0]
                others = [r[1] for r in group if r is not sib] + [free]
                moved = self._retry_collision(tasks[sib[0]], dest, sib[2], others)
                if moved is not None:
                    sib[1] = moved
                    self.retracked_edges.append(sib[0])
        group.append([edge_id, free, outcome.arc_used])

    def _retry_collision(
        self,
        task: EdgeTask,
        dest: LocalizationPattern,
        arc_used: int,
        group: list[np.ndarray],
    ) -> np.ndarray | None:
        """Look for this edge's own root along other arcs and step sizes."""
        prob = self._problem
        source = LocalizationPattern(prob.m, prob.p, prob.q, task.source_bottom)
        hom = _edge_homotopy(prob, dest, task.cond_index)
        x0 = embed_start(source, task.source_free, dest)
        for shrink in COLLISION_SHRINKS:
            h = max(task.options.h_max / shrink, task.options.h_min)
            opts = (
                task.options
                if shrink == 1.0
                else replace(task.options, h_init=h, h_max=h)
            )
            for ai, gamma in enumerate(GAMMA_ARCS):
                if shrink == 1.0 and ai == arc_used:
                    continue
                arc = hom if gamma == 1.0 else GammaArc(hom, gamma)
                res = track_path(arc, x0, opts)
                if res.status != "converged":
                    continue
                if all(
                    _coeff_distance(res.endpoint, g) > COLLISION_TOL for g in group
                ):
                    return res.endpoint
        return None


def _canonical_key(sol: SolutionMap) -> tuple:
    rounded = tuple(
        round(float(v), 10) for c in sol.coefficients for v in (c.real, c.imag)
    )
    exact = tuple(float(v) for c in sol.coefficients for v in (c.real, c.imag))
    return rounded + exact


def _coeff_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(
        np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
    )


def _run_tree(
    problem: ProblemInput,
    original: ProblemInput,
    workers: int,
    options: TrackerOptions,
) -> SolveResult:
    """One full tree walk; solutions are rebuilt against the original."""
    source = PieriTreeSource(problem, options)
    run_dynamic(source, workers)
    if source.fatal:
        raise RuntimeError("solve aborted: " + "; ".join(sorted(source.fatal)))
    assert source.store_size == 0, "node store must drain with the job tree"
    accounted = len(source.solutions) + sum(l.paths_lost for l in source.losses)
    root = pieri_root_count(problem.m, problem.p, problem.q)
    assert accounted == root, f"accounted {accounted} of {root} paths"
    solutions = source.solutions
    if problem is not original:
        solutions = [
            solution_from_free(
                original, s.pattern, free_coefficients(s.pattern, s.coefficients)
            )
            for s in solutions
        ]
    return SolveResult(
        sorted(solutions, key=_canonical_key),
        sorted(source.losses, key=lambda loss: loss.edge_id),
        dict(sorted(source.level_counts.items())),
        source.edge_records,
    )


def _result_defects(result: SolveResult) -> int:
    dup_pairs = 0
    sols = result.solutions
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            if (
                _coeff_distance(sols[i].coefficients, sols[j].coefficients)
                <= COLLISION_TOL
            ):
                dup_pairs += 1
    return dup_pairs + result.lost_paths


def solve_pieri(
    problem: ProblemInput,
    schedule: str = "dynamic",
    workers: int = 1,
    options: TrackerOptions | None = None,
) -> SolveResult:
    """Track every tree path from the trivial pattern to the target.

    Solutions come back canonically sorted, so equal seeds give identical
    results for any worker count.  Edge jobs depend on their parent's
    coefficients, hence only dynamic dispatch is possible.  A walk that
    ends with lost paths or colliding endpoints is retried under rotated
    condition orderings; the target system is the same, so the first
    defect-free result wins, else the one with the fewest defects.
    """
    if schedule != "dynamic":
        raise ValueError(
            "pieri solves require dynamic dispatch: edge jobs depend on "
            "their parent's result"
        )
    options = options or TrackerOptions()
    best: SolveResult | None = None
    best_defects = -1
    for roll in range(min(MAX_CONDITION_ORDERS, problem.n)):
        attempt = problem
        if roll:
            attempt = ProblemInput(
                problem.m, problem.p, problem.q, problem.seed,
                np.roll(problem.planes, -roll, axis=0),
                np.roll(problem.points, -roll),
            )
        result = _run_tree(attempt, problem, workers, options)
        defects = _result_defects(result)
        if defects == 0:
            return result
        if best is None or defects < best_defects:
            best, best_defects = result, defects
    return best


# ------------------------------------------------------------ verification


@dataclass
class VerifyReport:
    """Scale-free residuals and separation data for a solution set."""

    residuals: np.ndarray  # (num solutions, n), row-norm normalized
    max_residual: float
    min_distance: float | None
    duplicates: list[tuple[int, int]]


def verify(solutions, problem: ProblemInput) -> VerifyReport:
    """Check every condition of every solution, scale-invariantly.

    Residuals are |det| divided by the product of row norms (so a badly
    scaled matrix cannot hide a miss), and solutions are compared pairwise
    by normalized coefficient distance to flag duplicates.
    """
    n = problem.n
    count = len(solutions)
    residuals = np.zeros((count, n))
    for si, sol in enumerate(solutions):
        ev = instantiate_map(sol.pattern, sol.coefficients)
        for i in range(n):
            a = np.concatenate(
                [ev.matrix(problem.points[i], 1.0), problem.planes[i]], axis=1
            )
            raw = abs(np.linalg.det(a))
            scale = float(np.prod(np.linalg.norm(a, axis=1)))
            residuals[si, i] = raw / scale if scale > 0 else np.inf
    min_distance: float | None = None
    duplicates: list[tuple[int, int]] = []
    for i in range(count):
        for j in range(i + 1, count):
            a, b = solutions[i].coefficients, solutions[j].coefficients
            d = float(
                np.linalg.norm(a - b)
                / max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
            )
            if min_distance is None or d < min_distance:
                min_distance = d
            if d <= DUPLICATE_TOL:
                duplicates.append((i, j))
    max_residual = float(residuals.max()) if count else 0.0
    return VerifyReport(residuals, max_residual, min_distance, duplicates)


def solutions_to_json(result: SolveResult, problem: ProblemInput) -> str:
    """Canonical solution file: no timing, identical for equal seeds."""
    doc = {
        "m": problem.m,
        "p": problem.p,
        "q": problem.q,
        "seed": problem.seed,
        "n": problem.n,
        "root_count": pieri_root_count(problem.m, problem.p, problem.q),
        "count": len(result.solutions),
        "lost_paths": result.lost_paths,
        "losses": [
            {
                "edge": loss.edge_id,
                "pattern": list(loss.pattern),
                "status": loss.status,
                "paths_lost": loss.paths_lost,
            }
            for loss in result.losses
        ],
        "solutions": [
            {
                "pattern": list(sol.pattern.bottom),
                "coefficients": [
                    [float(c.real), float(c.imag)] for c in sol.coefficients
                ],
                "residuals": [float(r) for r in sol.residuals],
            }
            for sol in result.solutions
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
