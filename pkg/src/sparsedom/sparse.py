"""Sparse collections, sparse forms, and the stopping-time constructors.

A collection of cubes is sparse when each cube owns a major subset (more than
half of its cells, exact integer comparison) and the major subsets are
pairwise disjoint.  Feasibility of a candidate cube family is decided by a
bipartite max-flow (cube -> demanded number of cells -> distinct cells); for
laminar families the flow condition collapses to per-subtree Hall counting,
which is what the brute-force sparse-form maximizer exploits.

The constructors mirror the recursive stopping-time scheme: on a node Q the
localized maximal operators are thresholded at an adaptively doubled constant
C, the stopping children are the maximal dyadic subcubes whose 9-fold dilate
sits inside the exceedance set, and Q's major subset is what remains of Q
after removing the children.  The child-measure budget (default 2^-16 of |Q|)
is enforced exactly; with unit cells and desk-scale grids this budget is
below one cell, so default-budget collections consist of the root alone and
deeper recursions appear only with a relaxed budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from . import maximal
from .errors import (
    InfeasibleCollectionError,
    InstanceTooLargeError,
    CalibrationFailureError,
    SpecMismatchError,
)
from .lattice import (
    DyadicCube,
    GridFunction,
    GridSpec,
    children as cube_children,
    cube_cells,
    dilate,
    enumerate_cubes,
    holder_aggregate,
    lr_norm_rows,
    power_mean,
)


def _scalar_profiles(inputs: Sequence[GridFunction], rs=None) -> list:
    """Per-slot scalar profiles ||f^j(x)||_{l^{r_j}} (or |f| when rs is None)."""
    if rs is None:
        out = []
        for f in inputs:
            if f.n_components != 1:
                raise SpecMismatchError("scalar sparse form needs N = 1 inputs")
            out.append(np.abs(f.values[:, 0]))
        return out
    return [lr_norm_rows(f.values, r) for f, r in zip(inputs, rs)]


@dataclass
class SparseCollection:
    """Cubes paired with explicit major subsets (flat cell index arrays)."""

    spec: GridSpec
    cubes: list
    major_sets: list

    def __post_init__(self):
        self.major_sets = [np.asarray(m, dtype=np.int64) for m in self.major_sets]

    def __len__(self):
        return len(self.cubes)

    def validate(self) -> None:
        """Exact integer check of the three sparsity invariants."""
        seen = np.zeros(self.spec.ncells, dtype=bool)
        for cube, major in zip(self.cubes, self.major_sets):
            cells = cube_cells(self.spec, cube)
            size = len(cells)
            if not np.all(np.isin(major, cells)):
                raise InfeasibleCollectionError("major set not inside its cube")
            if 2 * len(major) <= size:
                raise InfeasibleCollectionError(
                    f"|E_Q| = {len(major)} <= |Q|/2 = {size}/2")
            if np.any(seen[major]):
                raise InfeasibleCollectionError("major sets overlap")
            seen[major] = True

    def is_valid(self) -> bool:
        try:
            self.validate()
        except InfeasibleCollectionError:
            return False
        return True

    def to_json(self) -> str:
        return json.dumps({
            "spec": {"d": self.spec.d, "levels": self.spec.levels,
                     "periodic": self.spec.periodic},
            "cubes": [{"shift": c.shift, "level": c.level,
                       "corner": list(c.corner)} for c in self.cubes],
            "major_sets": [_run_length(m) for m in self.major_sets],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SparseCollection":
        doc = json.loads(text)
        spec = GridSpec(**doc["spec"])
        cubes = [DyadicCube(c["shift"], c["level"], tuple(c["corner"]))
                 for c in doc["cubes"]]
        majors = [_from_run_length(rl) for rl in doc["major_sets"]]
        return cls(spec, cubes, majors)


def _run_length(cells: np.ndarray) -> list:
    """Sorted cell array -> [[start, length], ...] runs."""
    cells = np.sort(np.asarray(cells, dtype=np.int64))
    if len(cells) == 0:
        return []
    breaks = np.nonzero(np.diff(cells) != 1)[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [len(cells) - 1]))
    return [[int(cells[s]), int(cells[e] - cells[s] + 1)]
            for s, e in zip(starts, ends)]


def _from_run_length(runs: list) -> np.ndarray:
    if not runs:
        return np.empty(0, dtype=np.int64)
    return np.concatenate([np.arange(s, s + n, dtype=np.int64) for s, n in runs])


@dataclass
class SparsityVerdict:
    feasible: bool
    collection: SparseCollection | None = None
    violating: list | None = None  # indices of a Hall-violating subfamily

    def __bool__(self):
        return self.feasible


def _demand(size: int) -> int:
    return size // 2 + 1


def verify_sparsity(spec: GridSpec, cubes: Sequence[DyadicCube],
                    major_sets=None) -> SparsityVerdict:
    """Check (given major sets) or decide (via max-flow) sparsity feasibility.

    Without major sets, feasibility of assigning disjoint majority subsets is
    a bipartite flow problem; on failure the reachable side of the min cut is
    a subfamily whose union is smaller than its total demand.
    """
    cubes = list(cubes)
    if major_sets is not None:
        coll = SparseCollection(spec, cubes, list(major_sets))
        try:
            coll.validate()
        except InfeasibleCollectionError:
            return SparsityVerdict(False, None, None)
        return SparsityVerdict(True, coll, None)

    cell_sets = [cube_cells(spec, c) for c in cubes]
    demands = [_demand(len(cells)) for cells in cell_sets]
    g = nx.DiGraph()
    source, sink = "s", "t"
    used_cells = sorted(set(int(x) for cells in cell_sets for x in cells))
    for i, (cells, dem) in enumerate(zip(cell_sets, demands)):
        g.add_edge(source, ("q", i), capacity=dem)
        for x in cells:
            g.add_edge(("q", i), ("c", int(x)), capacity=1)
    for x in used_cells:
        g.add_edge(("c", x), sink, capacity=1)
    if not cubes:
        return SparsityVerdict(True, SparseCollection(spec, [], []), None)
    flow_value, flow = nx.maximum_flow(g, source, sink)
    if flow_value == sum(demands):
        majors = []
        for i in range(len(cubes)):
            taken = [x for (kind, x), v in flow[("q", i)].items() if v == 1]
            majors.append(np.array(sorted(taken), dtype=np.int64))
        return SparsityVerdict(True, SparseCollection(spec, cubes, majors), None)
    # min-cut certificate: cubes reachable from the source in the residual graph
    residual = nx.algorithms.flow.build_residual_network(g, "capacity")
    for u, v, val in ((u, v, fv) for u, d in flow.items()
                      for v, fv in d.items()):
        residual[u][v]["flow"] = val
        residual[v][u]["flow"] = -val
    reachable = {source}
    stack = [source]
    while stack:
        u = stack.pop()
        for v in residual[u]:
            if v not in reachable and \
                    residual[u][v]["capacity"] > residual[u][v].get("flow", 0):
                reachable.add(v)
                stack.append(v)
    violating = [i for i in range(len(cubes)) if ("q", i) in reachable]
    return SparsityVerdict(False, None, violating)


def sparse_form(spec: GridSpec, cubes: Sequence[DyadicCube],
                inputs: Sequence[GridFunction], ps: Sequence[float],
                rs=None) -> float:
    """sum_Q |Q| prod_j <||f^j||_{l^{r_j}}>_{p_j,Q} (scalar when rs is None)."""
    profiles = _scalar_profiles(inputs, rs)
    total = 0.0
    for cube in cubes:
        cells = cube_cells(spec, cube)
        if len(cells) == 0:
            continue
        term = float(len(cells))
        for g, p in zip(profiles, ps):
            term *= power_mean(g[cells], p)
        total += term
    return total


def integral_of_form(inputs: Sequence[GridFunction], ps: Sequence[float],
                     r: float = 1.0, region: np.ndarray | None = None,
                     shifts: str = "all", window=None) -> float:
    """Cell sum of the multilinear maximal function over a region."""
    if region is not None and len(region) == 0:
        return 0.0
    m_out = maximal.vector_maximal(list(inputs), ps, r=r, shifts=shifts,
                                   window=window).values[:, 0]
    if region is None:
        return float(np.sum(m_out))
    return float(np.sum(m_out[np.asarray(region, dtype=np.int64)]))


def lower_direction_check(collection: SparseCollection,
                          inputs: Sequence[GridFunction],
                          ps: Sequence[float], rs=None,
                          shifts: str = "all") -> dict:
    """Per-collection factor-2 bound: sparse form <= 2 * integral of the form.

    Mirrors the disjoint-major-subset argument: each cube's term is at most
    twice the integral of the maximal function over its major subset, and the
    major subsets do not overlap.
    """
    profiles = _scalar_profiles(inputs, rs)
    scalars = [GridFunction(collection.spec, g) for g in profiles]
    form = sparse_form(collection.spec, collection.cubes, inputs, ps, rs)
    integral = integral_of_form(scalars, ps, r=1.0, shifts=shifts)
    ratio = 0.0 if integral == 0.0 else form / integral
    return {"sparse_form": form, "integral": integral, "ratio": ratio,
            "holds": form <= 2.0 * integral * (1.0 + 1e-9) + 1e-12}


# ---------------------------------------------------------------------------
# stopping-time constructors


@dataclass
class StoppingNode:
    """Diagnostics for one recursion node of the constructor."""

    cube: DyadicCube
    threshold: float | None          # final scale-free C (None: zero data)
    doublings: int
    exceptional_cells: int
    child_measure: int               # sum |L| over stopping children
    size: int
    local_form: float                # integral of the localized form over Q
    node_bound: float                # |Q| * prod_j of the 3Q-normalizations
    off_exceptional_ratio: float     # property (i): sup off E of A / threshold
    child_average_ratio: float       # property (ii), part 1 only
    child_truncated_ratio: float     # property (iii)
    n_children: int

    @property
    def budget_ratio(self) -> float:
        return self.child_measure / self.size


@dataclass
class ConstructionReport:
    collection: SparseCollection
    variant: int
    eps: float | None
    nodes: list
    lhs: float
    rhs: float

    @property
    def depth(self) -> int:
        root_level = self.nodes[0].cube.level
        return 1 + max(root_level - n.cube.level for n in self.nodes)

    @property
    def theta_emp(self) -> float | None:
        return None if self.rhs == 0.0 else self.lhs / self.rhs

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "n_cubes": len(self.collection),
            "depth": self.depth,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "theta_emp": self.theta_emp,
            "max_budget_ratio": max(n.budget_ratio for n in self.nodes),
            "thresholds": [n.threshold for n in self.nodes],
        }


def _stopping_children(spec: GridSpec, root: DyadicCube,
                       mask: np.ndarray) -> list:
    """Maximal proper dyadic subcubes L of root with cells(9L) inside the mask."""
    out = []
    stack = list(cube_children(spec, root))
    while stack:
        cube = stack.pop()
        nine = dilate(spec, cube, 9)
        if len(nine) > 0 and np.all(mask[nine]):
            out.append(cube)
        elif cube.level > 0:
            stack.extend(cube_children(spec, cube))
    return out


def build_sparse_collection(inputs: Sequence[GridFunction],
                            ps: Sequence[float], rs: Sequence[float],
                            eps: float | None = None, variant: int = 1,
                            shifts: str = "all",
                            child_budget: float = 2.0 ** -16,
                            c0: float = 2.0 ** 10,
                            max_doublings: int = 200) -> ConstructionReport:
    """Run the stopping-time construction (variant 1 with eps, variant 2 without).

    Thresholds are scale-free: the per-node constant C multiplies the 3Q
    normalization of each input, and is doubled from c0 until both the
    exceptional set and the total stopping-child measure meet their budgets
    (children: child_budget * |Q|; exceptional set: 9^d/2 * child_budget * |Q|,
    the slack accounting for the 9-fold dilation in the child selection).
    """
    if variant == 1:
        if eps is None or eps <= 0:
            raise ValueError("variant 1 needs eps > 0")
    elif variant == 2:
        eps = None
    else:
        raise ValueError("variant must be 1 or 2")
    if not (0.0 < child_budget < 0.5):
        raise ValueError("child budget must lie in (0, 1/2)")
    for p, r in zip(ps, rs):
        if not p < r:
            raise ValueError("the construction requires p_j < r_j")

    spec = inputs[0].spec
    exc_budget = child_budget * (9 ** spec.d) / 2.0
    form_exps = [p + eps for p in ps] if variant == 1 else list(ps)
    r_agg = holder_aggregate(rs)
    profiles = _scalar_profiles(inputs, rs)

    cubes, majors, nodes = [], [], []

    def recurse(q: DyadicCube):
        cells_q = cube_cells(spec, q)
        size_q = len(cells_q)
        cells_3q = dilate(spec, q, 3)
        scales = [power_mean(g[cells_3q], e) if np.any(g[cells_3q]) else 0.0
                  for g, e in zip(profiles, form_exps)]

        if variant == 1:
            a_loc = [maximal.localized_maximal([f], (p,), r, q, shifts=shifts)
                     for f, p, r in zip(inputs, ps, rs)]
            thresholds_for = lambda c: [c * s for s in scales]
            exceed_arrays = [maximal.hardy_littlewood(a, shifts=shifts)
                             .values[:, 0] for a in a_loc]
            local_vals = np.prod([a.values[:, 0] for a in a_loc], axis=0)
        else:
            a_vec = maximal.localized_maximal(list(inputs), ps, r_agg, q,
                                              shifts=shifts)
            scale_prod = float(np.prod(scales))
            thresholds_for = lambda c: [c * scale_prod]
            exceed_arrays = [a_vec.values[:, 0]]
            local_vals = a_vec.values[:, 0]

        node_bound = size_q * float(np.prod(scales))
        local_form = float(np.sum(local_vals[cells_q]))

        if any(s == 0.0 for s in scales):
            # some input vanishes on 3Q, so the localized operators vanish on Q
            cubes.append(q)
            majors.append(cells_q)
            nodes.append(StoppingNode(q, None, 0, 0, 0, size_q, local_form,
                                      node_bound, 0.0, 0.0, 0.0, 0))
            return

        c = c0
        for doublings in range(max_doublings + 1):
            ths = thresholds_for(c)
            mask = np.zeros(spec.ncells, dtype=bool)
            for arr, th in zip(exceed_arrays, ths):
                mask |= arr >= th
            exc_count = int(np.count_nonzero(mask[cells_q]))
            kids = _stopping_children(spec, q, mask)
            kid_measure = sum(len(cube_cells(spec, L)) for L in kids)
            if kid_measure <= child_budget * size_q and \
                    exc_count <= exc_budget * size_q:
                break
            c *= 2.0
        else:
            raise CalibrationFailureError(
                f"no threshold below c0 * 2^{max_doublings} met the budget")

        ratios = _node_property_ratios(spec, q, kids, mask, cells_q, inputs,
                                       ps, rs, variant, thresholds_for(c),
                                       exceed_arrays if variant == 1 else None,
                                       shifts)

        kid_cells = [cube_cells(spec, L) for L in kids]
        major = cells_q if not kids else np.setdiff1d(
            cells_q, np.concatenate(kid_cells), assume_unique=False)
        cubes.append(q)
        majors.append(major)
        nodes.append(StoppingNode(q, c, doublings, exc_count, kid_measure,
                                  size_q, local_form, node_bound,
                                  ratios[0], ratios[1], ratios[2], len(kids)))
        for kid in kids:
            recurse(kid)

    root = DyadicCube(shift=0, level=spec.levels,
                      corner=(0,) * spec.d)
    recurse(root)

    collection = SparseCollection(spec, cubes, majors)
    collection.validate()
    if variant == 1:
        lhs = float(np.sum(maximal.holder_dominator(
            list(inputs), ps, rs, shifts=shifts).values[:, 0]))
    else:
        lhs = integral_of_form(inputs, ps, r=r_agg, shifts=shifts)
    rhs = sparse_form(spec, cubes, inputs, form_exps, rs)
    return ConstructionReport(collection, variant, eps, nodes, lhs, rhs)


def _node_property_ratios(spec, q, kids, mask, cells_q, inputs, ps, rs,
                          variant, thresholds, part1_ma, shifts):
    """Scale-free ratios behind the three stopping-node properties.

    (i) localized operator off the exceedance set / threshold;
    (ii) averages of the localized operators over 3L (variant 1);
    (iii) coarse-truncated operator on L, inputs restricted to 3Q.
    All are 0 when vacuous (no off-set cells, no children).
    """
    r_agg = holder_aggregate(rs)
    if variant == 1:
        a_loc = [maximal.localized_maximal([f], (p,), r, q, shifts=shifts)
                 .values[:, 0] for f, p, r in zip(inputs, ps, rs)]
        per_slot = list(zip(a_loc, thresholds))
    else:
        a_vec = maximal.localized_maximal(list(inputs), ps, r_agg, q,
                                          shifts=shifts).values[:, 0]
        per_slot = [(a_vec, thresholds[0])]

    off = cells_q[~mask[cells_q]]
    prop1 = 0.0
    if len(off) > 0:
        prop1 = max(float(a[off].max()) / th for a, th in per_slot)

    prop2 = 0.0
    prop3 = 0.0
    if kids:
        cells_3q = dilate(spec, q, 3)
        restricted = [f.restrict(cells_3q) for f in inputs]
        for kid in kids:
            kid_cells = cube_cells(spec, kid)
            if variant == 1:
                three = dilate(spec, kid, 3)
                for a, th in per_slot:
                    prop2 = max(prop2, float(np.mean(a[three])) / th)
            if kid.side < q.side:
                window = (kid.side, q.side)
                if variant == 1:
                    for (f, p, r), (_, th) in zip(
                            zip(restricted, ps, rs), per_slot):
                        trunc = maximal.truncated_maximal(
                            [f], (p,), r, window, shifts=shifts).values[:, 0]
                        prop3 = max(prop3, float(trunc[kid_cells].max()) / th)
                else:
                    trunc = maximal.truncated_maximal(
                        restricted, ps, r_agg, window, shifts=shifts).values[:, 0]
                    prop3 = max(prop3,
                                float(trunc[kid_cells].max()) / per_slot[0][1])
    return prop1, prop2, prop3


# ---------------------------------------------------------------------------
# sparse-form maximization (the equivalence oracle)


def sup_sparse_form(inputs: Sequence[GridFunction], ps: Sequence[float],
                    mode: str = "bruteforce", shifts: str = "canonical"):
    """Maximize the scalar sparse form over feasible cube families.

    bruteforce (canonical lattice, <= 16 cells): exact optimum by dynamic
    programming on the dyadic tree.  For a laminar family, flow feasibility
    is equivalent to the per-subtree Hall condition (total demand of selected
    cubes within any cube R at most |R|), because the union of any laminar
    subfamily splits into its maximal members; the DP maximizes total weight
    under those counting constraints.  greedy: feasible lower bound by
    descending cube weight with incremental flow checks.

    Returns (value, SparseCollection with flow-assigned major sets).
    """
    spec = inputs[0].spec
    profiles = _scalar_profiles(inputs, None)

    def weight(cube):
        cells = cube_cells(spec, cube)
        w = float(len(cells))
        for g, p in zip(profiles, ps):
            w *= power_mean(g[cells], p)
        return w

    if mode == "bruteforce":
        if spec.ncells > 16:
            raise InstanceTooLargeError(
                "brute-force mode is limited to 16 cells")
        if shifts != "canonical":
            raise InstanceTooLargeError(
                "brute-force mode enumerates the canonical lattice only")
        root = DyadicCube(0, spec.levels, (0,) * spec.d)
        value, chosen = _laminar_optimum(spec, root, weight)
        verdict = verify_sparsity(spec, chosen)
        if not verdict.feasible:  # cannot happen if the Hall reduction is right
            raise InfeasibleCollectionError("laminar optimum failed flow check")
        return value, verdict.collection

    if mode == "greedy":
        scored = []
        for cube in enumerate_cubes(spec, shifts=shifts):
            if len(cube_cells(spec, cube)) == 0:
                continue
            scored.append((weight(cube), cube))
        scored.sort(key=lambda t: (-t[0], -t[1].side, t[1].corner, t[1].shift))
        family, value = [], 0.0
        for w, cube in scored:
            if w <= 0.0:
                break
            if verify_sparsity(spec, family + [cube]).feasible:
                family.append(cube)
                value += w
        verdict = verify_sparsity(spec, family)
        return value, verdict.collection

    raise ValueError("mode must be 'bruteforce' or 'greedy'")


def _laminar_optimum(spec: GridSpec, root: DyadicCube, weight):
    """DP over the dyadic tree: table[d] = best weight with total demand d."""

    def solve(cube):
        size = len(cube_cells(spec, cube))
        table = np.full(size + 1, -np.inf)
        table[0] = 0.0
        picks = [[] for _ in range(size + 1)]
        for child in cube_children(spec, cube):
            ct, cp = solve(child)
            new = np.full(size + 1, -np.inf)
            newp = [None] * (size + 1)
            for a in range(size + 1):
                if table[a] == -np.inf:
                    continue
                for b in range(min(len(ct) - 1, size - a) + 1):
                    if ct[b] == -np.inf:
                        continue
                    if table[a] + ct[b] > new[a + b]:
                        new[a + b] = table[a] + ct[b]
                        newp[a + b] = (a, b)
            merged = [[] for _ in range(size + 1)]
            for dem in range(size + 1):
                if newp[dem] is not None:
                    a, b = newp[dem]
                    merged[dem] = picks[a] + cp[b]
            table, picks = new, merged
        w = weight(cube)
        dem = _demand(size)
        for total in range(size, dem - 1, -1):
            cand = table[total - dem] + w
            if cand > table[total]:
                table[total] = cand
                picks[total] = picks[total - dem] + [cube]
        return table, picks

    table, picks = solve(root)
    best = int(np.argmax(table))
    return float(table[best]), picks[best]
