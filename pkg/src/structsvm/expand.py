"""Effect-space construction and heredity parent graphs.

Raw explanatory variables are expanded into effect columns (main effects,
pairwise interactions, quadratics, dummy-coded categorical groups) and each
derived effect records which main effects are its parents. Expanded columns
are centered/scaled with training statistics so penalties act on comparable
scales; the stored statistics are reapplied to test data.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

MAIN = "main"
INTERACTION = "interaction"
QUADRATIC = "quadratic"
SPLINE_MAIN = "spline_main"
SPLINE_INTERACTION = "spline_interaction"


@dataclass(frozen=True)
class EffectDescriptor:
    effect_id: int
    kind: str
    source_vars: tuple          # raw-variable indices, size 1 or 2
    group_id: str = None        # set only for dummy-coded categorical groups

    def __post_init__(self):
        want = 2 if self.kind in (INTERACTION, SPLINE_INTERACTION) else 1
        if len(set(self.source_vars)) != want:
            raise ValueError(
                f"{self.kind} effect needs {want} distinct source vars, "
                f"got {self.source_vars}"
            )


@dataclass
class HeredityGraph:
    parents: dict               # effect_id -> frozenset of parent effect_ids
    policy: str = "none"        # "strong" | "weak" | "none"


def validate_heredity_graph(graph: HeredityGraph) -> bool:
    """True iff the graph is acyclic and every parent reference resolves."""
    ids = set(graph.parents)
    for j, ps in graph.parents.items():
        if not ps.issubset(ids):
            log.warning("effect %s has unresolved parents %s", j, ps - ids)
            return False
    # Kahn's algorithm; leftovers mean a cycle
    indeg = {j: len(ps) for j, ps in graph.parents.items()}
    children = {j: [] for j in ids}
    for j, ps in graph.parents.items():
        for p in ps:
            children[p].append(j)
    stack = [j for j, d in indeg.items() if d == 0]
    seen = 0
    while stack:
        p = stack.pop()
        seen += 1
        for ch in children[p]:
            indeg[ch] -= 1
            if indeg[ch] == 0:
                stack.append(ch)
    if seen != len(ids):
        log.warning("heredity graph contains a cycle")
        return False
    return True


@dataclass
class BasisExpansion:
    """Maps raw samples to expanded effect columns.

    `column_map[e]` is the contiguous (start, stop) column range of effect e.
    Standardization statistics are learned by `fit` and applied by
    `transform`; `expand_raw` skips them.
    """

    effects: list
    column_map: dict
    _builders: list = field(repr=False, default=None)   # per-effect column builder
    mean_: np.ndarray = field(repr=False, default=None)
    scale_: np.ndarray = field(repr=False, default=None)

    @property
    def num_columns(self):
        return max(stop for _, stop in self.column_map.values())

    def expand_raw(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        X = np.empty((Z.shape[0], self.num_columns))
        for eff, build in zip(self.effects, self._builders):
            start, stop = self.column_map[eff.effect_id]
            X[:, start:stop] = build(Z)
        return X

    def fit(self, Z):
        X = self.expand_raw(Z)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0, ddof=1)
        self.scale_ = np.where(sd > 1e-12, sd, 1.0)
        return self

    def transform(self, Z):
        if self.mean_ is None:
            raise RuntimeError("expansion not fitted; call fit on training data first")
        return (self.expand_raw(Z) - self.mean_) / self.scale_


def expand_polynomial(q: int, include_quadratic: bool = True):
    """All main effects, pairwise interactions z_r z_j (r < j) and optionally
    quadratics z_j^2, with interaction parents {r, j} and quadratic parent {j}.
    """
    if q < 1:
        raise ValueError("need at least one raw variable")
    effects, builders, parents = [], [], {}
    eid = 0
    for j in range(q):
        effects.append(EffectDescriptor(eid, MAIN, (j,)))
        builders.append(lambda Z, j=j: Z[:, j : j + 1])
        parents[eid] = frozenset()
        eid += 1
    main_id = {eff.source_vars[0]: eff.effect_id for eff in effects}
    for r in range(q):
        for j in range(r + 1, q):
            effects.append(EffectDescriptor(eid, INTERACTION, (r, j)))
            builders.append(lambda Z, r=r, j=j: (Z[:, r] * Z[:, j])[:, None])
            parents[eid] = frozenset((main_id[r], main_id[j]))
            eid += 1
    if include_quadratic:
        for j in range(q):
            effects.append(EffectDescriptor(eid, QUADRATIC, (j,)))
            builders.append(lambda Z, j=j: (Z[:, j] ** 2)[:, None])
            parents[eid] = frozenset((main_id[j],))
            eid += 1
    column_map = {e.effect_id: (i, i + 1) for i, e in enumerate(effects)}
    expansion = BasisExpansion(effects, column_map, builders)
    return expansion, HeredityGraph(parents)


def _dummy_columns(col, levels):
    # reference coding: first level dropped
    return np.column_stack([(col == lv).astype(float) for lv in levels[1:]])


def expand_with_dummies(q: int, categorical: dict, include_quadratic: bool = True):
    """Mixed continuous/categorical expansion.

    `categorical` maps raw-variable index -> ordered list of levels (>= 2).
    Each categorical factor becomes one dummy group sharing a single group_id
    (heredity and garrote scaling act on the whole group); quadratic effects
    are built for continuous variables only.
    """
    if q < 1:
        raise ValueError("need at least one raw variable")
    for j, levels in categorical.items():
        if len(levels) < 2:
            raise ValueError(f"categorical variable {j} has < 2 levels")
    if not categorical:
        return expand_polynomial(q, include_quadratic)

    def is_cat(j):
        return j in categorical

    def width(j):
        return len(categorical[j]) - 1 if is_cat(j) else 1

    effects, builders, widths, parents = [], [], [], {}
    eid = 0
    for j in range(q):
        gid = f"var{j}" if is_cat(j) else None
        effects.append(EffectDescriptor(eid, MAIN, (j,), group_id=gid))
        if is_cat(j):
            builders.append(lambda Z, j=j, lv=tuple(categorical[j]): _dummy_columns(Z[:, j], lv))
        else:
            builders.append(lambda Z, j=j: Z[:, j : j + 1])
        widths.append(width(j))
        parents[eid] = frozenset()
        eid += 1
    main_id = {j: j for j in range(q)}
    for r in range(q):
        for j in range(r + 1, q):
            gid = None
            if is_cat(r) or is_cat(j):
                gid = f"var{r}:var{j}"
            effects.append(EffectDescriptor(eid, INTERACTION, (r, j), group_id=gid))

            def build(Z, r=r, j=j):
                cr = _dummy_columns(Z[:, r], tuple(categorical[r])) if is_cat(r) else Z[:, r : r + 1]
                cj = _dummy_columns(Z[:, j], tuple(categorical[j])) if is_cat(j) else Z[:, j : j + 1]
                return (cr[:, :, None] * cj[:, None, :]).reshape(Z.shape[0], -1)

            builders.append(build)
            widths.append(width(r) * width(j))
            parents[eid] = frozenset((main_id[r], main_id[j]))
            eid += 1
    if include_quadratic:
        for j in range(q):
            if is_cat(j):
                continue
            effects.append(EffectDescriptor(eid, QUADRATIC, (j,)))
            builders.append(lambda Z, j=j: (Z[:, j] ** 2)[:, None])
            widths.append(1)
            parents[eid] = frozenset((main_id[j],))
            eid += 1

    column_map, start = {}, 0
    for eff, w in zip(effects, widths):
        column_map[eff.effect_id] = (start, start + w)
        start += w
    expansion = BasisExpansion(effects, column_map, builders)
    return expansion, HeredityGraph(parents)
