"""Staged right-hand sides for the product-of-exponentials factorization.

Writing K(t) = exp(u_1 X_1) ... exp(u_n X_n) for the solution of
K' = M(t) K, K(0) = I, and expanding M(t) = sum_m a_m(t) X_m in the ordered
basis, the unknowns satisfy the linear system A(u) u' = a with

    A(u) column l = exp(u_1 ad X_1) ... exp(u_(l-1) ad X_(l-1)) X_l.

The block structure of the ordered basis makes A block upper triangular
with identity diagonal blocks for the upper and Cartan stages, so the
system resolves stage by stage without ever inverting A:

* each upper block J_k yields a matrix Riccati stage
  u' = c + C u + u (u^T b), with c, C, b depending only on a and unknowns
  of earlier stages;
* the Cartan stage is a pure quadrature (its rhs involves no Cartan
  unknowns);
* each lower block ~J_k is a linear read-off whose Cartan dependence
  enters only through exponential factors exp(integer linear form).

Two independent routes to u' coexist on purpose and are cross-checked in
the test suite: :func:`rhs` peels the blocks with closed-form inverse
adjoint factors (the production path), and :func:`assemble_A_numeric`
followed by a dense solve is the oracle.  :func:`derive_hierarchy` runs the
same peel over exact symbolic expressions and returns the closed-form
stage data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .adjoint import AdjointMatrix, Algebra, algebra, apply_exp_ad
from .basis import BlockRef
from .symexpr import RationalComplex, SymbolicExpr

__all__ = [
    "CartanStage",
    "ChartBreakdown",
    "HierarchySchedule",
    "LinearStage",
    "RiccatiStage",
    "StageLocalityError",
    "assemble_A_numeric",
    "assemble_A_symbolic",
    "check_A_block_structure",
    "condition_estimate",
    "derive_hierarchy",
    "emit",
    "parse_hierarchy_json",
    "rhs",
]

JSON_SCHEMA = "wn-hierarchy/1"

_HALF = Fraction(1, 2)


class StageLocalityError(RuntimeError):
    """A stage's equations involve unknowns of a later stage (ordering bug)."""


class ChartBreakdown(RuntimeError):
    """The current chart's coordinates left the trust region.

    Attributes carry what triggered the abort: ``trigger`` is ``"u-growth"``
    or ``"condition"``, ``value`` the offending magnitude, and
    ``generator_index`` / ``stage`` locate the worst coordinate.
    """

    def __init__(
        self,
        message: str,
        *,
        trigger: str,
        value: float,
        generator_index: int | None = None,
        stage: int | None = None,
    ):
        super().__init__(message)
        self.trigger = trigger
        self.value = value
        self.generator_index = generator_index
        self.stage = stage


# ---------------------------------------------------------------------------
# stage data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiccatiStage:
    """u' = c + C u + u (u^T b) for the unknowns of one upper block."""

    k: int
    unknowns: tuple[int, ...]
    c: tuple[SymbolicExpr, ...]
    C: tuple[tuple[SymbolicExpr, ...], ...]
    b: tuple[SymbolicExpr, ...]

    kind = "riccati"

    def rhs_exprs(self) -> tuple[SymbolicExpr, ...]:
        dim = len(self.unknowns)
        us = [SymbolicExpr.u(i) for i in self.unknowns]
        quad = SymbolicExpr.zero()
        for j in range(dim):
            quad = quad + self.b[j] * us[j]
        out = []
        for i in range(dim):
            e = self.c[i]
            for j in range(dim):
                e = e + self.C[i][j] * us[j]
            out.append(e + us[i] * quad)
        return tuple(out)


@dataclass(frozen=True)
class CartanStage:
    """Pure quadrature for the Cartan unknowns."""

    unknowns: tuple[int, ...]
    rhs: tuple[SymbolicExpr, ...]

    k = 0
    kind = "cartan"

    def rhs_exprs(self) -> tuple[SymbolicExpr, ...]:
        return self.rhs


@dataclass(frozen=True)
class LinearStage:
    """Linear read-off for one lower block (Cartan enters via exponentials)."""

    k: int
    unknowns: tuple[int, ...]
    rhs: tuple[SymbolicExpr, ...]

    kind = "linear"

    def rhs_exprs(self) -> tuple[SymbolicExpr, ...]:
        return self.rhs


Stage = RiccatiStage | CartanStage | LinearStage


@dataclass(frozen=True)
class HierarchySchedule:
    """All stages for one N, in elimination (basis-index) order."""

    N: int
    stages: tuple[Stage, ...]

    @property
    def n(self) -> int:
        return self.N * self.N - 1

    def equations(self) -> tuple[tuple[int, SymbolicExpr], ...]:
        """(unknown index, rhs expression) pairs in basis order."""
        out: list[tuple[int, SymbolicExpr]] = []
        for stage in self.stages:
            out.extend(zip(stage.unknowns, stage.rhs_exprs()))
        out.sort(key=lambda pair: pair[0])
        return tuple(out)

    def evaluate_rhs(self, u: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Numeric u' from the symbolic equations (cross-check route)."""
        up = np.zeros(self.n, dtype=complex)
        for i, expr in self.equations():
            up[i - 1] = expr.evaluate(a, u)
        return up


# ---------------------------------------------------------------------------
# symbolic derivation
# ---------------------------------------------------------------------------


def _ad_rows(ad: AdjointMatrix) -> list[tuple[int, tuple[tuple[int, int], ...]]]:
    """Nonzero rows of an adjoint matrix as (row, ((col, coeff), ...))."""
    rows: list[tuple[int, tuple[tuple[int, int], ...]]] = []
    for r in range(ad.entries.shape[0]):
        cols = np.nonzero(ad.entries[r])[0]
        if cols.size:
            rows.append((r, tuple((int(q), int(ad.entries[r, q])) for q in cols)))
    return rows


def _apply_ad_symbolic(
    rows: list[tuple[int, tuple[tuple[int, int], ...]]],
    T: list[SymbolicExpr],
) -> list[SymbolicExpr]:
    out = [SymbolicExpr.zero()] * len(T)
    for r, cols in rows:
        acc = SymbolicExpr.zero()
        for q, c in cols:
            if not T[q].is_zero:
                acc = acc + c * T[q]
        out[r] = acc
    return out


def _peel_generator_symbolic(
    ad: AdjointMatrix, l: int, T: list[SymbolicExpr], sign: int
) -> list[SymbolicExpr]:
    """T <- exp(sign * u_l ad X_l) T, exactly."""
    if ad.role == "cartan":
        diag = ad.diagonal
        return [
            T[r].times_exp({l: sign * int(diag[r])}) if diag[r] else T[r]
            for r in range(len(T))
        ]
    rows = _ad_rows(ad)
    ul = SymbolicExpr.u(l)
    AT = _apply_ad_symbolic(rows, T)
    AAT = _apply_ad_symbolic(rows, AT)
    out = []
    for r in range(len(T)):
        e = T[r]
        if not AT[r].is_zero:
            e = e + sign * (ul * AT[r])
        if not AAT[r].is_zero:
            e = e + (_HALF * (ul * ul)) * AAT[r]
        out.append(e)
    return out


def _check_locality(
    expr: SymbolicExpr,
    allowed_poly: set[int],
    cartan: set[int],
    label: str,
) -> None:
    bad = expr.u_indices() - allowed_poly
    if bad:
        raise StageLocalityError(
            f"{label}: unknowns u_{sorted(bad)} appear before their stage"
        )
    if expr.u_indices() & cartan:
        raise StageLocalityError(
            f"{label}: Cartan unknowns appear polynomially"
        )
    if expr.exp_indices() - cartan:
        raise StageLocalityError(
            f"{label}: non-Cartan unknowns appear inside exponentials"
        )


def _split_riccati(
    k: int, indices: tuple[int, ...], exprs: list[SymbolicExpr]
) -> RiccatiStage:
    dim = len(indices)
    own = set(indices)
    pos = {l: i for i, l in enumerate(indices)}
    c = [SymbolicExpr.zero()] * dim
    C = [[SymbolicExpr.zero()] * dim for _ in range(dim)]
    b_reads = [[SymbolicExpr.zero()] * dim for _ in range(dim)]

    for i, expr in enumerate(exprs):
        for (form, mono), coeff in expr.terms():
            own_syms = [
                (idx, p) for (kind, idx), p in mono if kind == "u" and idx in own
            ]
            deg = sum(p for _, p in own_syms)
            rest = tuple(
                (sym, p)
                for sym, p in mono
                if not (sym[0] == "u" and sym[1] in own)
            )
            piece = SymbolicExpr({(form, rest): coeff})
            if deg == 0:
                c[i] = c[i] + piece
            elif deg == 1:
                j = own_syms[0][0]
                C[i][pos[j]] = C[i][pos[j]] + piece
            elif deg == 2:
                idxs = sorted(
                    idx for idx, p in own_syms for _ in range(p)
                )
                if indices[i] not in idxs:
                    raise StageLocalityError(
                        f"stage J_{k}: quadratic term in equation {i + 1} "
                        f"lacks the rank-one structure (monomial u_{idxs})"
                    )
                idxs.remove(indices[i])
                j = idxs[0]
                b_reads[i][pos[j]] = b_reads[i][pos[j]] + piece
            else:
                raise StageLocalityError(
                    f"stage J_{k}: degree-{deg} term in own unknowns"
                )

    b = b_reads[0]
    for i in range(1, dim):
        if b_reads[i] != b:
            raise StageLocalityError(
                f"stage J_{k}: quadratic part is not rank-one "
                f"(equations disagree on the shared vector)"
            )

    stage = RiccatiStage(
        k=k,
        unknowns=indices,
        c=tuple(c),
        C=tuple(tuple(row) for row in C),
        b=tuple(b),
    )
    # lossless-split guard: reassembled equations must match the peel exactly
    for got, want in zip(stage.rhs_exprs(), exprs):
        if got != want:
            raise StageLocalityError(
                f"stage J_{k}: Riccati split does not reassemble"
            )
    return stage


def derive_hierarchy(N: int) -> HierarchySchedule:
    """Closed-form stage data for sl(N), by exact symbolic block peeling.

    Raises :class:`StageLocalityError` if the elimination leaves a
    later-stage unknown inside an earlier stage — that would mean the basis
    ordering violates the triangular structure the peel relies on.
    """
    return _derive_from_algebra(algebra(N))


def _derive_from_algebra(alg: Algebra) -> HierarchySchedule:
    n = alg.n
    cartan = set(alg.partition.cartan)
    T: list[SymbolicExpr] = [SymbolicExpr.a(m) for m in range(1, n + 1)]
    stages: list[Stage] = []
    done_poly: set[int] = set()

    for ref in alg.partition.blocks_in_index_order():
        for l in ref.indices:
            T = _peel_generator_symbolic(alg.ads[l - 1], l, T, sign=-1)
        exprs = [T[l - 1] for l in ref.indices]
        for l in ref.indices:
            T[l - 1] = SymbolicExpr.zero()

        if ref.kind == "upper":
            allowed = done_poly | set(ref.indices)
            for i, e in enumerate(exprs):
                _check_locality(e, allowed, cartan, f"J_{ref.k} eq {i + 1}")
            stages.append(_split_riccati(ref.k, ref.indices, exprs))
        elif ref.kind == "cartan":
            for i, e in enumerate(exprs):
                _check_locality(e, done_poly, cartan, f"cartan eq {i + 1}")
                if e.exp_indices():
                    raise StageLocalityError(
                        "cartan stage: unexpected exponential factors"
                    )
            stages.append(CartanStage(unknowns=ref.indices, rhs=tuple(exprs)))
        else:
            for i, e in enumerate(exprs):
                _check_locality(e, done_poly, cartan, f"~J_{ref.k} eq {i + 1}")
            stages.append(
                LinearStage(k=ref.k, unknowns=ref.indices, rhs=tuple(exprs))
            )
        done_poly |= set(ref.indices)

    # every T entry must be consumed
    for m, e in enumerate(T, start=1):
        if not e.is_zero:
            raise StageLocalityError(f"residual coefficient on X_{m} after peel")
    return HierarchySchedule(N=alg.N, stages=tuple(stages))


# ---------------------------------------------------------------------------
# numeric routes
# ---------------------------------------------------------------------------


def rhs(
    alg: Algebra,
    u: np.ndarray,
    a: np.ndarray,
    *,
    u_threshold: float | None = None,
) -> np.ndarray:
    """u' for given chart coordinates u and expansion a, by block peeling.

    Equivalent to solving A(u) u' = a; never forms or inverts A.  When
    ``u_threshold`` is given, coordinates beyond it raise
    :class:`ChartBreakdown` (the chart is no longer trustworthy).
    """
    u = np.asarray(u, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if u.shape != (alg.n,) or a.shape != (alg.n,):
        raise ValueError(
            f"expected {alg.n}-vectors, got u{u.shape} and a{a.shape}"
        )
    if u_threshold is not None:
        worst = int(np.argmax(np.abs(u)))
        if abs(u[worst]) > u_threshold:
            refs = alg.partition.blocks_in_index_order()
            stage = next(
                i + 1 for i, ref in enumerate(refs) if worst + 1 in ref.indices
            )
            raise ChartBreakdown(
                f"|u_{worst + 1}| = {abs(u[worst]):.3e} exceeds "
                f"{u_threshold:.3e}",
                trigger="u-growth",
                value=float(abs(u[worst])),
                generator_index=worst + 1,
                stage=stage,
            )
    T = a.copy()
    up = np.zeros(alg.n, dtype=complex)
    for ref in alg.partition.blocks_in_index_order():
        for l in ref.indices:
            T = apply_exp_ad(alg.ads[l - 1], -u[l - 1], T)
        sel = np.asarray(ref.indices) - 1
        up[sel] = T[sel]
        T[sel] = 0.0
    return up


def assemble_A_numeric(alg: Algebra, u: np.ndarray) -> np.ndarray:
    """The coefficient matrix A(u) of A(u) u' = a (oracle route).

    Column l is exp(u_1 ad X_1) ... exp(u_(l-1) ad X_(l-1)) applied to the
    l-th coordinate vector; A(0) = I.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (alg.n,):
        raise ValueError(f"expected a {alg.n}-vector, got shape {u.shape}")
    n = alg.n
    A = np.zeros((n, n), dtype=complex)
    for l in range(1, n + 1):
        v = np.zeros(n, dtype=complex)
        v[l - 1] = 1.0
        for k in range(l - 1, 0, -1):
            v = apply_exp_ad(alg.ads[k - 1], u[k - 1], v)
        A[:, l - 1] = v
    return A


def condition_estimate(A: np.ndarray) -> float:
    """2-norm condition number of an assembled A(u)."""
    return float(np.linalg.cond(A))


def assemble_A_symbolic(alg: Algebra) -> list[list[SymbolicExpr]]:
    """A(u) with exact symbolic entries, indexed [row][column] (0-based)."""
    n = alg.n
    cols: list[list[SymbolicExpr]] = []
    for l in range(1, n + 1):
        v = [SymbolicExpr.zero()] * n
        v[l - 1] = SymbolicExpr.number(1)
        for k in range(l - 1, 0, -1):
            v = _peel_generator_symbolic(alg.ads[k - 1], k, v, sign=+1)
        cols.append(v)
    return [[cols[l][r] for l in range(n)] for r in range(n)]


def check_A_block_structure(
    alg: Algebra, A: list[list[SymbolicExpr]] | None = None
) -> list[str]:
    """Violations of the block-triangular shape of symbolic A (empty = ok).

    Checks every entry below the block diagonal is the zero expression and
    that the diagonal blocks of upper and Cartan stages are identities.
    """
    if A is None:
        A = assemble_A_symbolic(alg)
    refs = alg.partition.blocks_in_index_order()
    stage_of = {}
    for s, ref in enumerate(refs):
        for m in ref.indices:
            stage_of[m] = s
    violations: list[str] = []
    n = alg.n
    one = SymbolicExpr.number(1)
    zero = SymbolicExpr.zero()
    for r in range(1, n + 1):
        for l in range(1, n + 1):
            entry = A[r - 1][l - 1]
            if stage_of[r] > stage_of[l] and not entry.is_zero:
                violations.append(
                    f"A[{r},{l}] below the block diagonal is nonzero: "
                    f"{entry.render_plain()}"
                )
            elif stage_of[r] == stage_of[l] and refs[stage_of[r]].kind in (
                "upper",
                "cartan",
            ):
                want = one if r == l else zero
                if entry != want:
                    violations.append(
                        f"A[{r},{l}] in a {refs[stage_of[r]].kind} diagonal "
                        f"block is {entry.render_plain()}"
                    )
    return violations


# ---------------------------------------------------------------------------
# emission / parsing
# ---------------------------------------------------------------------------


def _stage_title(stage: Stage) -> str:
    if stage.kind == "riccati":
        return f"riccati, block J_{stage.k}"
    if stage.kind == "cartan":
        return "cartan"
    return f"linear, block ~J_{stage.k}"


def emit(schedule: HierarchySchedule, fmt: str = "plain") -> str:
    """Render a schedule as ``"plain"``, ``"latex"`` or ``"json"`` text."""
    if fmt == "plain":
        lines = [
            f"# staged right-hand sides for the exponential-product "
            f"factorization on sl({schedule.N})",
            f"# unknowns: {schedule.n}",
        ]
        for s_idx, stage in enumerate(schedule.stages, start=1):
            lines.append(f"# stage {s_idx} ({_stage_title(stage)}):")
            for i, expr in zip(stage.unknowns, stage.rhs_exprs()):
                lines.append(f"u{i}' = {expr.render_plain()}")
        return "\n".join(lines) + "\n"
    if fmt == "latex":
        rows = []
        for stage in schedule.stages:
            for i, expr in zip(stage.unknowns, stage.rhs_exprs()):
                rows.append(f"u_{{{i}}}' &= {expr.render_latex()} \\\\")
        rows[-1] = rows[-1][:-3]
        return "\\begin{aligned}\n" + "\n".join(rows) + "\n\\end{aligned}\n"
    if fmt == "json":
        return json.dumps(_schedule_to_obj(schedule), indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r} (expected plain, latex or json)")


def _schedule_to_obj(schedule: HierarchySchedule) -> dict:
    stages = []
    for stage in schedule.stages:
        obj: dict = {
            "kind": stage.kind,
            "k": stage.k,
            "unknowns": list(stage.unknowns),
        }
        if stage.kind == "riccati":
            obj["c"] = [e.to_json_obj() for e in stage.c]
            obj["C"] = [[e.to_json_obj() for e in row] for row in stage.C]
            obj["b"] = [e.to_json_obj() for e in stage.b]
        else:
            obj["rhs"] = [e.to_json_obj() for e in stage.rhs]
        stages.append(obj)
    return {"schema": JSON_SCHEMA, "N": schedule.N, "stages": stages}


def parse_hierarchy_json(text: str) -> HierarchySchedule:
    """Inverse of ``emit(..., "json")``; validates the schema tag."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("schema") != JSON_SCHEMA:
        raise ValueError(
            f"unsupported schema {obj.get('schema')!r} "
            f"(expected {JSON_SCHEMA!r})"
        )
    stages: list[Stage] = []
    for s in obj["stages"]:
        unknowns = tuple(int(i) for i in s["unknowns"])
        if s["kind"] == "riccati":
            stages.append(
                RiccatiStage(
                    k=int(s["k"]),
                    unknowns=unknowns,
                    c=tuple(SymbolicExpr.from_json_obj(e) for e in s["c"]),
                    C=tuple(
                        tuple(SymbolicExpr.from_json_obj(e) for e in row)
                        for row in s["C"]
                    ),
                    b=tuple(SymbolicExpr.from_json_obj(e) for e in s["b"]),
                )
            )
        elif s["kind"] == "cartan":
            stages.append(
                CartanStage(
                    unknowns=unknowns,
                    rhs=tuple(SymbolicExpr.from_json_obj(e) for e in s["rhs"]),
                )
            )
        elif s["kind"] == "linear":
            stages.append(
                LinearStage(
                    k=int(s["k"]),
                    unknowns=unknowns,
                    rhs=tuple(SymbolicExpr.from_json_obj(e) for e in s["rhs"]),
                )
            )
        else:
            raise ValueError(f"unknown stage kind {s['kind']!r}")
    return HierarchySchedule(N=int(obj["N"]), stages=tuple(stages))
