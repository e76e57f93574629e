import math

import numpy as np
import pytest

from expcone.bench.formats import emit_json
from expcone.bench.generators import (InstanceSpec, gen_covering, gen_packing, gen_slr, gen_slr_with_layout,
                                      generate, kernel_expand, load_csv, slr_big_m, slr_objective,
                                      synthetic_slr)
from expcone.errors import IngestionError, ParameterError
from expcone.model import Integrality, cone_violation, validate


def test_generation_is_deterministic():
    spec = InstanceSpec("packing", 12, 5, 3, seed=42)
    assert emit_json(gen_packing(spec)) == emit_json(gen_packing(spec))
    assert emit_json(gen_packing(spec)) != emit_json(gen_packing(InstanceSpec("packing", 12, 5, 3, seed=43)))


def test_packing_layout_matches_documented_stream():
    spec = InstanceSpec("packing", 6, 3, 2, seed=9)
    rng = np.random.Generator(np.random.PCG64(9))
    a = rng.integers(0, 10, size=(3, 6))
    c = rng.integers(0, 10, size=(2, 6))
    model = gen_packing(spec)
    for i, row in enumerate(model.linear_rows):
        assert [row.expr.coef(j) for j in range(6)] == list(a[i].astype(float))
        assert row.rhs == 24.0
    for l, cone in enumerate(model.cones):
        assert [cone.e3.coef(j) for j in range(6)] == pytest.approx(list(-c[l] / 6))
    assert validate(model) == []


def test_zero_cone_coefficients_give_objective_p():
    """With every c_l = 0 each cone forces v_l >= exp(0) = 1, so the optimum is p."""
    from expcone.solve.driver import solve_miecp

    spec = InstanceSpec("packing", 4, 2, 3, seed=0)
    model = gen_packing(spec)
    zero = model.__class__(model.variables, model.linear_rows,
                           tuple(type(c)(c.e1, c.e2, c.e3 * 0.0) for c in model.cones),
                           model.objective, model.domain_M)
    assert solve_miecp(zero).objective == pytest.approx(3.0, abs=1e-6)


def test_covering_toy_by_hand():
    """n = 1, m = 1 with a >= 2: the row forces x = 1, so the optimum is v = c log c."""
    from expcone.solve.driver import solve_miecp

    checked = 0
    for seed in range(40):
        model = gen_covering(InstanceSpec("covering", 1, 1, 1, seed=seed))
        a = model.linear_rows[0].expr.coef(0)
        c = model.cones[0].e2.coef(0)
        assert model.linear_rows[0].rhs == 2.0 and model.cones[0].e3.coef(1) == -1.0
        if a < 2.0:
            continue
        expected = c * math.log(c) if c > 0 else 0.0
        assert solve_miecp(model).objective == pytest.approx(expected, abs=1e-5)
        checked += 1
    assert checked >= 5


def test_mixed_instances_have_t_binaries():
    model = gen_packing(InstanceSpec("packing", 8, 2, 1, t=5, seed=1))
    kinds = [v.integrality for v in model.variables[:8]]
    assert kinds.count(Integrality.BINARY) == 5 and kinds.count(Integrality.CONTINUOUS) == 3
    assert model.linear_rows[0].rhs == 16.0


def test_spec_validation():
    with pytest.raises(ParameterError):
        InstanceSpec("knapsack", 3)
    with pytest.raises(ParameterError):
        InstanceSpec("packing", 3, t=4)
    with pytest.raises(ParameterError):
        generate(InstanceSpec("slr", 3))


def test_slr_big_m_value():
    assert slr_big_m(1, 0.01) == pytest.approx(100 * math.log(2))
    X, y = synthetic_slr(5, 3, seed=0)
    _, layout = gen_slr_with_layout(X, y, 0.01, 1)
    assert layout.big_m == pytest.approx(500 * math.log(2))


def test_slr_model_objective_at_feasible_point():
    """Build the natural feasible point for a theta and check the model objective equals the loss."""
    X, y = synthetic_slr(6, 3, seed=2)
    theta = np.array([0.0, 0.7, 0.0])
    model, L = gen_slr_with_layout(X, y, 0.1, 1)
    x = np.zeros(model.n_vars)
    for j, v in enumerate(theta):
        x[L.theta_plus[j]], x[L.theta_minus[j]] = max(v, 0), max(-v, 0)
        x[L.z[j]] = 1.0 if v != 0 else 0.0
    margin = (1 - 2 * y) * (X @ theta)
    t = np.logaddexp(0.0, margin)
    for i in range(6):
        x[L.t[i]] = t[i]
        x[L.p1[i]] = math.exp(margin[i] - t[i])
        x[L.p2[i]] = math.exp(-t[i])
    assert all(cone_violation(*(e.evaluate(x) for e in c.exprs())) <= 1e-12 for c in model.cones)
    assert all(r.residual(x) <= 1e-12 for r in model.linear_rows)
    assert model.objective.evaluate(x) == pytest.approx(slr_objective(X, y, theta, 0.1), abs=1e-12)


def test_kernel_expand_count():
    X = np.arange(62.0).reshape(2, 31)
    K = kernel_expand(X)
    assert K.shape == (2, 31 + 31 * 32 // 2) == (2, 527)
    pairs = [(i, j) for i in range(31) for j in range(i, 31)]
    i, j = pairs[100]
    assert K[1, 31 + 100] == X[1, i] * X[1, j]
    assert gen_slr(np.ones((2, 2)), np.array([0, 1]), 0.1, 1, kernel_expand=True).n_vars == 3 * 5 + 2 * 3


def test_slr_validation():
    with pytest.raises(IngestionError):
        gen_slr(np.ones((2, 2)), np.array([0, 2]), 0.1, 1)
    with pytest.raises(IngestionError):
        gen_slr(np.ones((2, 2)), np.array([0, 1, 1]), 0.1, 1)
    with pytest.raises(ParameterError):
        gen_slr(np.ones((2, 2)), np.array([0, 1]), 0.0, 1)


def test_load_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n1,2,0\n3,4,1\n\n")
    X, y, names = load_csv(p)
    assert X.tolist() == [[1, 2], [3, 4]] and y.tolist() == [0, 1] and names == ["a", "b"]
    X, y, names = load_csv(p, label="a")
    assert y.tolist() == [1, 3] and names == ["b", "label"]
    q = tmp_path / "n.csv"
    q.write_text("1,2,1\n0,5,0\n")
    X, y, names = load_csv(q)
    assert names == ["x0", "x1"] and y.tolist() == [1, 0]
    for bad in ("a,b\n1\n", "a,b\n1,x\n", ""):
        q.write_text(bad)
        with pytest.raises(IngestionError):
            load_csv(q)
    with pytest.raises(IngestionError):
        load_csv(p, label="zz")
