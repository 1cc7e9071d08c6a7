"""
Test suite for the SMO solver and binary SVM training.
"""

from itertools import product

import numpy as np
import pytest

from mbm_forensics.core.exceptions import DimensionMismatch, SingleClassInput
from mbm_forensics.svm.kernel import rbf_kernel_matrix
from mbm_forensics.svm.model import SvmParams
from mbm_forensics.svm.smo import audit_kkt, dual_objective, solve_dual, train_binary

XOR_POINTS = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_LABELS = np.array([-1, -1, 1, 1])


def _clusters(rng, n=10, spread=0.3):
    neg = rng.normal((-2.0, -2.0), spread, size=(n, 2))
    pos = rng.normal((2.0, 2.0), spread, size=(n, 2))
    return np.vstack([neg, pos]), np.array([-1] * n + [1] * n)


def _optimal_dual(kernel, labels, c):
    """
    Best dual objective by enumerating which alphas sit at 0, at C or free.

    For each pattern the free alphas solve the stationarity system with the
    equality constraint; feasible solutions are compared by objective.
    """
    y = labels.astype(np.float64)
    q = np.outer(y, y) * kernel
    n = len(y)
    best = -np.inf
    for states in product((0, 1, 2), repeat=n):
        alpha = np.array([c if s == 1 else 0.0 for s in states])
        free = [t for t, s in enumerate(states) if s == 2]
        if free:
            bound = [t for t, s in enumerate(states) if s != 2]
            size = len(free)
            system = np.zeros((size + 1, size + 1))
            system[:size, :size] = q[np.ix_(free, free)]
            system[:size, size] = y[free]
            system[size, :size] = y[free]
            rhs = np.zeros(size + 1)
            rhs[:size] = 1.0 - q[np.ix_(free, bound)] @ alpha[bound]
            rhs[size] = -y[bound] @ alpha[bound]
            try:
                solution = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                continue
            alpha[free] = solution[:size]
            if np.any(alpha[free] < -1e-10) or np.any(alpha[free] > c + 1e-10):
                continue
        if abs(y @ alpha) > 1e-8:
            continue
        best = max(best, dual_objective(alpha, labels, kernel))
    return best


def test_xor():
    """The RBF machine separates XOR with gamma 1 and C 10."""
    model = train_binary(XOR_POINTS, XOR_LABELS, SvmParams(c=10.0, gamma=1.0))
    decisions = model.machines[0].decision(XOR_POINTS)
    assert list(np.where(decisions > 0, 1, -1)) == list(XOR_LABELS)
    assert model.converged


def test_separable_clusters():
    """Two well-separated clusters classify perfectly, on and off the training set."""
    rng = np.random.default_rng(10)
    samples, labels = _clusters(rng)
    model = train_binary(samples, labels, SvmParams(c=1.0, gamma=0.5))

    machine = model.machines[0]
    assert list(np.sign(machine.decision(samples))) == list(labels)
    assert machine.decision([[-2.2, -1.8]])[0] < 0
    assert machine.decision([[1.9, 2.3]])[0] > 0
    assert model.support_vector_count > 0


def test_kkt_audit_clean():
    """The trained machine satisfies KKT on its training set."""
    rng = np.random.default_rng(12)
    samples, labels = _clusters(rng, spread=1.5)
    params = SvmParams(c=2.0, gamma=0.5, tolerance=1e-4)
    model = train_binary(samples, labels, params)
    assert audit_kkt(model, samples, labels, tolerance=1e-2) == []


def test_dual_constraints_hold():
    """sum(beta) == 0 and every beta stays inside its box."""
    rng = np.random.default_rng(13)
    samples, labels = _clusters(rng, spread=2.0)
    c = 0.5
    kernel = rbf_kernel_matrix(samples, samples, 1.0)
    solution = solve_dual(kernel, labels, c, 1e-6, 100_000)

    assert solution.converged
    assert abs(solution.beta.sum()) < 1e-9
    pos, neg = solution.beta[labels > 0], solution.beta[labels < 0]
    assert np.all(pos >= -1e-12) and np.all(pos <= c + 1e-12)
    assert np.all(neg <= 1e-12) and np.all(neg >= -c - 1e-12)


def test_matches_exhaustive_qp():
    """SMO reaches the optimal dual objective on small random problems."""
    rng = np.random.default_rng(21)
    for trial in range(200):
        size = int(rng.integers(3, 7))
        samples = rng.normal(size=(size, 2))
        labels = np.array([-1, 1] + list(rng.choice([-1, 1], size=size - 2)))
        rng.shuffle(labels)
        c = float(rng.choice([0.5, 1.0, 4.0]))
        gamma = float(rng.choice([0.25, 1.0]))
        kernel = rbf_kernel_matrix(samples, samples, gamma)

        solution = solve_dual(kernel, labels, c, 1e-8, 1_000_000)
        alpha = np.abs(solution.beta)
        smo_value = dual_objective(alpha, labels, kernel)
        optimum = _optimal_dual(kernel, labels, c)

        assert smo_value <= optimum + 1e-9
        assert smo_value == pytest.approx(optimum, rel=1e-6, abs=1e-8), f"trial {trial}"


def test_single_class_rejected():
    """Training needs both labels."""
    with pytest.raises(SingleClassInput):
        train_binary(XOR_POINTS, [1, 1, 1, 1], SvmParams())


def test_bad_training_input():
    """Label values, label count and ragged samples are checked."""
    with pytest.raises(ValueError):
        train_binary(XOR_POINTS, [0, 0, 1, 1], SvmParams())
    with pytest.raises(DimensionMismatch):
        train_binary(XOR_POINTS, [-1, 1], SvmParams())
    with pytest.raises(DimensionMismatch):
        train_binary([[0.0, 1.0], [1.0]], [-1, 1], SvmParams())


def test_iteration_limit_reports_nonconvergence():
    """A tiny pass limit stops early and marks the machine."""
    rng = np.random.default_rng(14)
    samples, labels = _clusters(rng, n=15, spread=3.0)
    model = train_binary(samples, labels, SvmParams(c=100.0, gamma=4.0, tolerance=1e-9, max_passes=1))
    machine = model.machines[0]
    assert machine.iterations <= len(labels)
    if not machine.converged:
        assert not model.converged


def test_params_validation():
    """C, gamma, tolerance and pass limit must be positive."""
    for kwargs in ({"c": 0.0}, {"gamma": -1.0}, {"tolerance": 0.0}, {"max_passes": 0}):
        with pytest.raises(ValueError):
            SvmParams(**kwargs)


def test_sample_order_does_not_matter():
    """Shuffled training data gives the same support vectors and predictions."""
    rng = np.random.default_rng(50)
    samples, labels = _clusters(rng, n=25, spread=1.2)
    params = SvmParams(c=1.0, gamma=0.5, tolerance=1e-6)
    order = rng.permutation(len(labels))

    machine = train_binary(samples, labels, params).machines[0]
    shuffled = train_binary(samples[order], labels[order], params).machines[0]

    assert {tuple(v) for v in machine.support_vectors} == {tuple(v) for v in shuffled.support_vectors}
    axis = np.linspace(-5.0, 5.0, 20)
    grid = np.array([(x, y) for x in axis for y in axis])
    assert np.array_equal(np.sign(machine.decision(grid)), np.sign(shuffled.decision(grid)))
