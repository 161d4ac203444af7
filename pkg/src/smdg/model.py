"""Exact finite discrete models over partitioned DAGs.

All probability arithmetic uses ``fractions.Fraction``; there is no floating
point and no tolerance anywhere in this module. Visible variables must have
deterministic kernels (their randomness, when needed, comes from explicit
marginalized parents; see :func:`add_private_latents`). Selected variables
are conditioned to a designated zero value in every reported distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Iterable, Mapping, Optional, Sequence

from .graph import GraphError, PartitionedDag, Role, VertexId
from . import io as graph_io

Value = Any  # hashable; ints for serializable models, tuples for transported ones
Assignment = tuple[Value, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(GraphError):
    pass


class SelectedOutError(ModelError):
    """The selection event has probability zero; the distribution is undefined."""


@dataclass(frozen=True)
class KernelTable:
    """Rows map an assignment of the declared parents to a probability vector
    over the vertex's domain values (aligned with the domain ordering)."""

    parents: tuple[VertexId, ...]
    rows: tuple[tuple[Assignment, tuple[Fraction, ...]], ...]

    @classmethod
    def of(
        cls,
        parents: Sequence[VertexId],
        rows: Mapping[Assignment, Sequence[Fraction | int]],
    ) -> "KernelTable":
        fixed = tuple(
            sorted(
                (tuple(k), tuple(Fraction(p) for p in vec))
                for k, vec in rows.items()
            )
        )
        return cls(parents=tuple(parents), rows=fixed)

    def row(self, key: Assignment) -> tuple[Fraction, ...]:
        return dict(self.rows)[tuple(key)]


def deterministic_kernel(
    parents: Sequence[VertexId],
    parent_domains: Sequence[Sequence[Value]],
    domain: Sequence[Value],
    fn,
) -> KernelTable:
    """Point-mass rows computed by ``fn(*parent_values) -> value``."""
    rows = {}
    for key in product(*parent_domains):
        value = fn(*key)
        rows[key] = tuple(ONE if v == value else ZERO for v in domain)
    return KernelTable.of(parents, rows)


def table_kernel(
    parents: Sequence[VertexId],
    parent_domains: Sequence[Sequence[Value]],
    domain: Sequence[Value],
    fn,
) -> KernelTable:
    """Rows computed by ``fn(*parent_values) -> mapping value -> probability``."""
    rows = {}
    for key in product(*parent_domains):
        dist = fn(*key)
        rows[key] = tuple(Fraction(dist.get(v, 0)) for v in domain)
    return KernelTable.of(parents, rows)


def uniform(domain: Sequence[Value]) -> dict[Value, Fraction]:
    p = Fraction(1, len(domain))
    return {v: p for v in domain}


@dataclass(frozen=True)
class DiscreteModel:
    dag: PartitionedDag
    domains: tuple[tuple[VertexId, tuple[Value, ...]], ...]
    kernels: tuple[tuple[VertexId, KernelTable], ...]
    selected_zeros: tuple[tuple[VertexId, Value], ...]

    @classmethod
    def of(
        cls,
        dag: PartitionedDag,
        domains: Mapping[VertexId, Sequence[Value]],
        kernels: Mapping[VertexId, KernelTable],
        selected_zeros: Optional[Mapping[VertexId, Value]] = None,
    ) -> "DiscreteModel":
        zeros = dict(selected_zeros or {})
        for s in dag.selected:
            zeros.setdefault(s, 0)
        model = cls(
            dag=dag,
            domains=tuple(sorted((v, tuple(vals)) for v, vals in domains.items())),
            kernels=tuple(sorted(kernels.items())),
            selected_zeros=tuple(sorted(zeros.items())),
        )
        model.validate()
        return model

    # --- accessors -------------------------------------------------------
    def domain(self, v: VertexId) -> tuple[Value, ...]:
        return dict(self.domains)[v]

    def kernel(self, v: VertexId) -> KernelTable:
        return dict(self.kernels)[v]

    def selected_zero(self, v: VertexId) -> Value:
        return dict(self.selected_zeros)[v]

    def validate(self) -> None:
        domains = dict(self.domains)
        kernels = dict(self.kernels)
        if set(domains) != self.dag.vertices or set(kernels) != self.dag.vertices:
            raise ModelError("domains and kernels must cover exactly the graph vertices")
        for v, dom in domains.items():
            if len(dom) < 1:
                raise ModelError(f"domain of {v!r} is empty")
            if len(set(dom)) != len(dom):
                raise ModelError(f"domain of {v!r} has duplicate values")
        for s in self.dag.selected:
            if self.selected_zero(s) not in domains[s]:
                raise ModelError(f"selected vertex {s!r} lacks its zero value")
        for v, kern in kernels.items():
            if set(kern.parents) != set(self.dag.parents_of(v)):
                raise ModelError(f"kernel of {v!r} does not match its parents")
            expected_rows = 1
            for p in kern.parents:
                expected_rows *= len(domains[p])
            if len(kern.rows) != expected_rows:
                raise ModelError(f"kernel of {v!r} is missing parent-assignment rows")
            deterministic_required = self.dag.role_of(v) is Role.VISIBLE
            for key, vec in kern.rows:
                if len(vec) != len(domains[v]):
                    raise ModelError(f"kernel row of {v!r} has the wrong width")
                if sum(vec) != ONE:
                    raise ModelError(f"kernel row {key} of {v!r} does not sum to 1")
                if any(p < 0 for p in vec):
                    raise ModelError(f"kernel row {key} of {v!r} has a negative entry")
                if deterministic_required and not all(p in (ZERO, ONE) for p in vec):
                    raise ModelError(
                        f"visible vertex {v!r} must have a deterministic kernel"
                    )


@dataclass(frozen=True)
class ProbTable:
    """Exact distribution over an ordered tuple of variables.

    Zero entries are dropped, so equality is support-plus-values equality.
    """

    variables: tuple[str, ...]
    table: tuple[tuple[Assignment, Fraction], ...]

    @classmethod
    def of(cls, variables: Sequence[str], table: Mapping[Assignment, Fraction]) -> "ProbTable":
        cleaned = tuple(
            sorted((tuple(k), Fraction(p)) for k, p in table.items() if p != 0)
        )
        return cls(variables=tuple(variables), table=cleaned)

    def total(self) -> Fraction:
        return sum((p for _, p in self.table), ZERO)

    def normalized(self) -> "ProbTable":
        total = self.total()
        if total == 0:
            raise SelectedOutError("cannot normalize a zero table")
        return ProbTable.of(self.variables, {k: p / total for k, p in self.table})

    def prob(self, key: Assignment) -> Fraction:
        return dict(self.table).get(tuple(key), ZERO)

    def marginal(self, keep: Sequence[str]) -> "ProbTable":
        idx = [self.variables.index(v) for v in keep]
        out: dict[Assignment, Fraction] = {}
        for key, p in self.table:
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, ZERO) + p
        return ProbTable.of(keep, out)

    def items(self):
        return self.table


def conditionally_independent(
    dist: ProbTable, x: Sequence[str], y: Sequence[str], z: Sequence[str]
) -> bool:
    """Exact test of X independent of Y given Z in a joint table:
    P(x,y,z) * P(z) == P(x,z) * P(y,z) for every assignment."""
    x, y, z = list(x), list(y), list(z)
    pxyz = dist.marginal(x + y + z)
    pz = dist.marginal(z)
    pxz = dist.marginal(x + z)
    pyz = dist.marginal(y + z)
    x_vals = {k[: len(x)] for k, _ in pxz.items()} | {k[: len(x)] for k, _ in pxyz.items()}
    y_vals = {k[len(x):len(x) + len(y)] for k, _ in pxyz.items()} | {
        k[: len(y)] for k, _ in pyz.items()
    }
    z_vals = {k for k, _ in pz.items()}
    for zv in z_vals:
        for xv in x_vals:
            for yv in y_vals:
                lhs = pxyz.prob(xv + yv + zv) * pz.prob(zv)
                rhs = pxz.prob(xv + zv) * pyz.prob(yv + zv)
                if lhs != rhs:
                    return False
    return True


@dataclass(frozen=True)
class SelectedDistribution:
    """Normalized distribution over the visible variables given that every
    selected variable took its zero value."""

    dist: ProbTable
    selection_probability: Fraction


@dataclass(frozen=True)
class SmiResult:
    """One intervention paired with the selected joint distribution over the
    intervened (sharp) and natural (flat) visible copies."""

    q: ProbTable
    status: str  # "ok" | "selected_out"
    dist: Optional[ProbTable]
    selection_probability: Fraction


def sharp(v: VertexId) -> str:
    return v + "#"


def flat(v: VertexId) -> str:
    return v + "~"


# --- evaluation -----------------------------------------------------------


def _iter_weighted(
    model: DiscreteModel,
    order: Sequence[VertexId],
    fixed: Mapping[VertexId, Value],
    parent_value,
):
    """Stream (assignment dict, probability) over non-fixed vertices in
    ``order``, forcing each selected vertex to its zero value (conditioning
    numerator) and pruning zero-probability branches."""
    domains = dict(model.domains)
    kernels = dict(model.kernels)
    selected = model.dag.selected

    def rec(i: int, assign: dict, p: Fraction):
        if i == len(order):
            yield assign, p
            return
        v = order[i]
        if v in assign:
            yield from rec(i + 1, assign, p)
            return
        key = tuple(parent_value(assign, u) for u in kernels[v].parents)
        vec = kernels[v].row(key)
        dom = domains[v]
        if v in selected:
            zi = dom.index(model.selected_zero(v))
            p2 = p * vec[zi]
            if p2 != 0:
                assign[v] = dom[zi]
                yield from rec(i + 1, assign, p2)
                del assign[v]
            return
        for value, pv in zip(dom, vec):
            if pv == 0:
                continue
            assign[v] = value
            yield from rec(i + 1, assign, p * pv)
            del assign[v]

    yield from rec(0, dict(fixed), ONE)


def eval_joint(model: DiscreteModel) -> ProbTable:
    """Full product-of-kernels joint over all vertices (no conditioning)."""
    order = model.dag.topological_order()
    out: dict[Assignment, Fraction] = {}
    domains = dict(model.domains)
    kernels = dict(model.kernels)

    def rec(i: int, assign: dict, p: Fraction):
        if i == len(order):
            key = tuple(assign[v] for v in order)
            out[key] = out.get(key, ZERO) + p
            return
        v = order[i]
        key = tuple(assign[u] for u in kernels[v].parents)
        for value, pv in zip(domains[v], kernels[v].row(key)):
            if pv == 0:
                continue
            assign[v] = value
            rec(i + 1, assign, p * pv)
            del assign[v]

    rec(0, {}, ONE)
    return ProbTable.of(tuple(order), out)


def smo_distribution(model: DiscreteModel) -> SelectedDistribution:
    """Marginalize the latent variables and condition every selected variable
    to zero. Raises :class:`SelectedOutError` when the selection event has
    probability zero."""
    order = model.dag.topological_order()
    visibles = tuple(sorted(model.dag.visible))
    out: dict[Assignment, Fraction] = {}
    for assign, p in _iter_weighted(model, order, {}, lambda a, u: a[u]):
        key = tuple(assign[v] for v in visibles)
        out[key] = out.get(key, ZERO) + p
    total = sum(out.values(), ZERO)
    if total == 0:
        raise SelectedOutError("the selection event has probability zero")
    dist = ProbTable.of(visibles, {k: p / total for k, p in out.items()})
    return SelectedDistribution(dist=dist, selection_probability=total)


def doubled_dag(d: PartitionedDag) -> PartitionedDag:
    """The intervention graph: parentless sharp copies of the visibles, and
    the original vertices (visibles renamed to their flat copies) reading
    sharp versions of their visible parents."""
    roles: dict[VertexId, Role] = {}
    for v in d.visible:
        roles[sharp(v)] = Role.VISIBLE
        roles[flat(v)] = Role.VISIBLE
    for v in d.marginalized:
        roles[v] = Role.MARGINALIZED
    for v in d.selected:
        roles[v] = Role.SELECTED
    edges = []
    for a, b in d.edges:
        head = flat(b) if b in d.visible else b
        tail = sharp(a) if a in d.visible else a
        edges.append((tail, head))
    return PartitionedDag.from_roles(roles, edges)


def _check_q(model: DiscreteModel, q: ProbTable, over: Sequence[VertexId],
             full_support: bool) -> None:
    if tuple(q.variables) != tuple(over):
        raise ModelError(f"intervention must range over {tuple(over)}, got {q.variables}")
    if q.total() != ONE:
        raise ModelError("intervention distribution must sum to 1")
    domains = dict(model.domains)
    for key, _ in q.items():
        for v, value in zip(q.variables, key):
            if value not in domains[v]:
                raise ModelError(f"intervention assigns {value!r} outside the domain of {v!r}")
    if full_support:
        size = 1
        for v in q.variables:
            size *= len(domains[v])
        if len(q.table) != size:
            raise ModelError("intervention must have full support")


def smi_distribution(
    model: DiscreteModel, q: ProbTable, *, full_support: bool = False
) -> SmiResult:
    """Joint selected distribution over sharp and flat visible copies under a
    soft intervention q on the sharp copies.

    Flat and non-visible variables read the sharp copies of their visible
    parents. A zero-probability selection yields status "selected_out" (the
    pair is omitted from the interventional family rather than an error).
    """
    visibles = tuple(sorted(model.dag.visible))
    _check_q(model, q, visibles, full_support)
    order = model.dag.topological_order()
    out: dict[Assignment, Fraction] = {}
    for q_key, q_p in q.items():
        sharp_env = dict(zip(visibles, q_key))

        def parent_value(assign, u, env=sharp_env):
            return env[u] if u in env else assign[u]

        for assign, p in _iter_weighted(model, order, {}, parent_value):
            key = q_key + tuple(assign[v] for v in visibles)
            out[key] = out.get(key, ZERO) + q_p * p
    total = sum(out.values(), ZERO)
    variables = tuple(sharp(v) for v in visibles) + tuple(flat(v) for v in visibles)
    if total == 0:
        return SmiResult(q=q, status="selected_out", dist=None, selection_probability=ZERO)
    dist = ProbTable.of(variables, {k: p / total for k, p in out.items()})
    return SmiResult(q=q, status="ok", dist=dist, selection_probability=total)


def observe_or_do_distribution(
    model: DiscreteModel, z: Iterable[VertexId], q: Optional[ProbTable] = None,
    *, full_support: bool = False,
) -> SelectedDistribution:
    """Selected distribution over the visibles when the variables in z are
    intervened to q and everything else is passively observed; each visible
    is either intervened or observed, never both."""
    z = tuple(sorted(set(z)))
    if not set(z) <= model.dag.visible:
        raise ModelError("only visible variables can be intervened")
    if z:
        if q is None:
            raise ModelError("an intervention distribution is required when z is non-empty")
        _check_q(model, q, z, full_support)
    order = [v for v in model.dag.topological_order() if v not in z]
    visibles = tuple(sorted(model.dag.visible))
    out: dict[Assignment, Fraction] = {}
    q_items = q.items() if z else [((), ONE)]
    for q_key, q_p in q_items:
        fixed = dict(zip(z, q_key))
        for assign, p in _iter_weighted(model, order, fixed, lambda a, u: a[u]):
            key = tuple(assign[v] for v in visibles)
            out[key] = out.get(key, ZERO) + q_p * p
    total = sum(out.values(), ZERO)
    if total == 0:
        raise SelectedOutError("the selection event has probability zero")
    dist = ProbTable.of(visibles, {k: p / total for k, p in out.items()})
    return SelectedDistribution(dist=dist, selection_probability=total)


def product_intervention(
    model: DiscreteModel,
    marginals: Mapping[VertexId, Mapping[Value, Fraction]],
    over: Optional[Sequence[VertexId]] = None,
) -> ProbTable:
    """Product-form intervention from per-variable value distributions."""
    names = tuple(sorted(over if over is not None else model.dag.visible))
    table: dict[Assignment, Fraction] = {}
    per = []
    for v in names:
        dist = marginals[v]
        per.append([(value, Fraction(p)) for value, p in dist.items() if p != 0])
    for combo in product(*per):
        table[tuple(value for value, _ in combo)] = (
            Fraction(1) if not combo else _prod(p for _, p in combo)
        )
    return ProbTable.of(names, table)


def _prod(ps) -> Fraction:
    out = ONE
    for p in ps:
        out *= p
    return out


def private_latent(v: VertexId) -> VertexId:
    return f"u⟨{v}⟩"


def add_private_latents(d: PartitionedDag, only: Optional[Iterable[VertexId]] = None) -> PartitionedDag:
    """Give each visible vertex a fresh marginalized parent, so the visible
    kernels can stay deterministic while the variables behave stochastically."""
    targets = sorted(d.visible if only is None else set(only))
    add = {private_latent(v): Role.MARGINALIZED for v in targets}
    edges = {(private_latent(v), v) for v in targets}
    return d.with_vertices(add=add, add_edges=edges)


# --- JSON -------------------------------------------------------------------


def _fraction_to_str(p: Fraction) -> str:
    return str(p)


def _fraction_from_str(text: str | int) -> Fraction:
    return Fraction(text)


def model_to_obj(model: DiscreteModel) -> dict[str, Any]:
    domains = {}
    for v, dom in model.domains:
        if tuple(dom) != tuple(range(len(dom))):
            raise ModelError(
                f"only index domains (0..k-1) are serializable; {v!r} has {dom!r}"
            )
        domains[v] = len(dom)
    kernels = {}
    for v, kern in model.kernels:
        table = {
            ",".join(str(x) for x in key): [_fraction_to_str(p) for p in vec]
            for key, vec in kern.rows
        }
        kernels[v] = {"parents": list(kern.parents), "table": table}
    return {"dag": graph_io.dag_to_obj(model.dag), "domains": domains, "kernels": kernels}


def model_from_obj(obj: Mapping[str, Any]) -> DiscreteModel:
    dag = graph_io.dag_from_obj(obj["dag"])
    domains = {v: tuple(range(int(k))) for v, k in obj["domains"].items()}
    kernels = {}
    for v, spec in obj["kernels"].items():
        parents = [str(p) for p in spec["parents"]]
        rows = {}
        for key_text, vec in spec["table"].items():
            key = tuple(int(x) for x in key_text.split(",")) if key_text else ()
            rows[key] = tuple(_fraction_from_str(p) for p in vec)
        kernels[v] = KernelTable.of(parents, rows)
    return DiscreteModel.of(dag, domains, kernels)


def model_dumps(model: DiscreteModel) -> str:
    return json.dumps(model_to_obj(model), indent=2, sort_keys=True) + "\n"


def model_loads(text: str) -> DiscreteModel:
    return model_from_obj(json.loads(text))


def prob_table_to_obj(dist: ProbTable) -> dict[str, Any]:
    return {
        "variables": list(dist.variables),
        "table": {
            ",".join(str(x) for x in key): _fraction_to_str(p) for key, p in dist.items()
        },
    }


def prob_table_from_obj(obj: Mapping[str, Any]) -> ProbTable:
    variables = [str(v) for v in obj["variables"]]
    table = {}
    for key_text, p in obj["table"].items():
        key = tuple(int(x) for x in key_text.split(",")) if key_text else ()
        table[key] = _fraction_from_str(p)
    return ProbTable.of(variables, table)
