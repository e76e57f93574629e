import itertools
import math

import cvxpy as cp
import numpy as np
import pytest

from expcone.bench.generators import InstanceSpec, gen_covering, gen_packing
from expcone.bench.oracle import brute_force_oracle, brute_force_solve
from expcone.errors import ParameterError, PrecisionWarning
from expcone.lift import certificate_for, certified_scheme
from expcone.model import AffineExpr, Integrality, ModelBuilder, Sense
from expcone.solve.bnb import Status
from expcone.solve.driver import (cone_residual, cutting_plane, max_cone_residual, polyhedral_model,
                                  propagate_bounds, separate_cones, solve_miecp)
from expcone.model import LinearRow
from helpers import check_cbf


def _affine(expr, x):
    out = expr.constant
    for k, c in expr.terms:
        out = out + c * x[k]
    return out


def mixed_oracle(model):
    """Enumerate binaries; solve each continuous remainder exactly with a conic solver."""
    ints = model.integer_indices()
    best = math.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(ints)):
        x = cp.Variable(model.n_vars)
        cons = [x[j] == b for j, b in zip(ints, bits)]
        for v in model.variables:
            if math.isfinite(v.lower):
                cons.append(x[v.id] >= v.lower)
            if math.isfinite(v.upper):
                cons.append(x[v.id] <= v.upper)
        for row in model.linear_rows:
            lhs = _affine(row.expr, x) - row.rhs
            cons.append({Sense.LE: lhs <= 0, Sense.GE: lhs >= 0, Sense.EQ: lhs == 0}[row.sense])
        for cone in model.cones:
            x1, x2, x3 = (_affine(e, x) for e in cone.exprs())
            cons.append(cp.constraints.ExpCone(x3, x2, x1))
        prob = cp.Problem(cp.Minimize(_affine(model.objective, x)), cons)
        prob.solve(solver=cp.CLARABEL)
        if prob.status in ("optimal", "optimal_inaccurate"):
            best = min(best, prob.value)
    return best


def test_single_cone_toy():
    """min v over (v, 1, c) in K with integer c in [-2, 1]: v = exp(-2)."""
    mb = ModelBuilder()
    c = mb.add_var(-2.0, 1.0, Integrality.INTEGER)
    v = mb.add_var(0.0, 10.0)
    mb.add_cone(AffineExpr.var(v), AffineExpr.const(1.0), AffineExpr.var(c))
    mb.objective = AffineExpr.var(v)
    for method in ("cutting_plane", "branch_and_cut"):
        res = solve_miecp(mb.build(), method)
        assert res.status is Status.OPTIMAL
        assert res.objective == pytest.approx(math.exp(-2.0), rel=1e-5)
        assert res.incumbent[c] == -2.0


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("method", ["cutting_plane", "branch_and_cut"])
def test_covering_matches_oracle(seed, method):
    model = gen_covering(InstanceSpec("covering", 8, 6, 2, seed=seed))
    res = solve_miecp(model, method, tol_gap=1e-9)
    ref = brute_force_oracle(model)
    assert res.status is Status.OPTIMAL
    assert res.objective == pytest.approx(ref, abs=1e-5 * max(1.0, abs(ref)))
    assert res.bound <= res.objective + 1e-9
    assert max_cone_residual(model, res.incumbent) <= 1e-6


def test_packing_seed7_matches_oracle():
    model = gen_packing(InstanceSpec("packing", 15, 10, 2, seed=7))
    ref = brute_force_oracle(model)
    res = solve_miecp(model, tol_gap=1e-9)
    assert res.objective == pytest.approx(ref, rel=1e-5)


@pytest.mark.parametrize("seed", [5, 6, 8])
@pytest.mark.parametrize("family", ["packing", "covering"])
def test_mixed_instances_match_enumeration_oracle(family, seed):
    spec = InstanceSpec(family, 6, 3, 2, t=3, seed=seed)
    model = gen_packing(spec) if family == "packing" else gen_covering(spec)
    ref = mixed_oracle(model)
    for method in ("cutting_plane", "branch_and_cut"):
        res = solve_miecp(model, method, tol_gap=1e-9)
        if math.isinf(ref):
            assert res.status is Status.INFEASIBLE
        else:
            assert res.objective == pytest.approx(ref, abs=2e-5 * max(1.0, abs(ref)))


def test_cutting_plane_root_values_do_not_decrease():
    model = gen_packing(InstanceSpec("packing", 10, 5, 3, seed=2))
    res = cutting_plane(model, seed_eps=0.5)
    roots = [float(v) for v in res.detail.split(": ")[1].split(", ")]
    assert all(b >= a - 1e-9 for a, b in zip(roots, roots[1:]))


def test_shifted_reformulation_within_certificate():
    """limit_shift anchored at a heuristic point: an outer scheme, exact at the anchors."""
    model = gen_packing(InstanceSpec("packing", 8, 4, 2, seed=1))
    opt = brute_force_solve(model)
    anchors = [c.e3.evaluate(opt.assignment) for c in model.cones]
    scheme = certified_scheme("limit_shift", model.domain_M, 1e-3, delta=2.0)
    eps = certificate_for(scheme, model.domain_M).eps
    res = solve_miecp(model, "soc_reformulate", scheme=scheme, anchors=anchors)
    assert res.status is Status.OPTIMAL
    assert opt.objective * math.exp(-eps) - 1e-9 <= res.objective <= opt.objective + 1e-9


def test_deep_unshifted_tower_warns():
    """The certified unshifted limit scheme needs N = 35 here; double precision cannot hold it."""
    model = gen_packing(InstanceSpec("packing", 8, 4, 2, seed=1))
    scheme = certified_scheme("limit", model.domain_M, 1e-4)
    assert scheme.N == 35
    with pytest.warns(PrecisionWarning):
        solve_miecp(model, "soc_reformulate", scheme=scheme, export="/dev/null", export_only=True)


def test_model_without_cones():
    mb = ModelBuilder()
    xs = [mb.add_var(0.0, 1.0, Integrality.BINARY) for _ in range(3)]
    mb.add_row(AffineExpr.build({x: 1.0 for x in xs}), ">=", 2.0)
    mb.objective = AffineExpr.build({xs[0]: 1.0, xs[1]: 2.0, xs[2]: 3.0})
    res = solve_miecp(mb.build())
    assert res.objective == 3.0 and res.incumbent == (1.0, 1.0, 0.0)


def test_polyhedral_model_is_a_relaxation():
    model = gen_packing(InstanceSpec("packing", 8, 4, 2, seed=3))
    outer = polyhedral_model(model, eps=0.05)
    assert not outer.cones
    assert solve_miecp(outer, tol_gap=1e-9).objective <= brute_force_oracle(model) + 1e-9


def test_export_only(tmp_path):
    model = gen_packing(InstanceSpec("packing", 4, 2, 1, seed=0))
    path = tmp_path / "ref.cbf"
    res = solve_miecp(model, "soc-reformulate", scheme=certified_scheme("limit_shift", model.domain_M, 1e-3),
                      export=path, export_only=True)
    assert res.status is Status.EXPORTED and res.incumbent is None
    info = check_cbf(path.read_text())
    assert any(b[0] == "Q" for b in info["con_blocks"])


def test_dispatcher_errors():
    model = gen_packing(InstanceSpec("packing", 3, 1, 1, seed=0))
    with pytest.raises(ParameterError):
        solve_miecp(model, "interior_point")
    with pytest.raises(ParameterError):
        solve_miecp(model, "soc_reformulate")
    with pytest.raises(ParameterError):
        solve_miecp(model, "soc_reformulate", scheme=certified_scheme("limit", 4.0, 1e-2), export_only=True)


def test_node_limit_status():
    model = gen_packing(InstanceSpec("packing", 20, 10, 3, seed=11))
    res = solve_miecp(model, "branch_and_cut", tol_gap=0.0, node_limit=2)
    assert res.status is Status.NODE_LIMIT
    if res.has_incumbent:
        assert res.bound <= res.objective


def test_cone_residual_and_separation():
    assert cone_residual(1.0, 1.0, 0.0) == 0.0
    assert cone_residual(1.0, 0.0, 0.5) == 0.5
    assert cone_residual(-1.0, 1.0, 0.0) == math.inf
    mb = ModelBuilder()
    v = mb.add_var(0.0, 10.0)
    mb.add_cone(AffineExpr.var(v), AffineExpr.const(1.0), AffineExpr.const(1.0))
    model = mb.build()
    assert separate_cones(model, [math.e]) == []
    cuts = separate_cones(model, [1.0])
    assert cuts and all(c.residual([1.0]) > 0 for c in cuts)
    assert all(c.residual([math.e]) <= 1e-12 for c in cuts)


def test_propagate_bounds():
    rows = [LinearRow(AffineExpr.build({0: 1.0, 1: 1.0}), Sense.LE, 1.5)]
    out = propagate_bounds(rows, [(0.0, 5.0), (1.0, 5.0)], integer=[0])
    assert out == [(0.0, 0.0), (1.0, 1.5)]
