from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone

from hedonic_dynamics import CoalitionFormation
from hedonic_dynamics.deviations import Stability, is_stable
from hedonic_dynamics.experiments import gen_uniform
from hedonic_dynamics.game import ContractError, DynamicState
from hedonic_dynamics.validation import check_labels, check_positive_int, check_utility_matrix


def test_params_round_trip_through_clone():
    est = CoalitionFormation(stability="IS", perception="both", coefficient="1/2", random_state=3)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin.get_params()["coefficient"] == "1/2"


def test_run_and_chase_fit():
    est = CoalitionFormation(policy="first").fit([[0, -1], [1, 0]])
    assert est.converged_ and est.n_steps_ == 2
    assert est.labels_.tolist() == [0, 1]
    assert est.labels_.dtype == np.intp
    assert est.utilities_ == ((0, -1), (0, 0))
    assert est.agent_values() == [0, 0]
    assert est.score() == 0.0


def test_no_model_hits_step_limit():
    est = CoalitionFormation(perception="none", max_steps=9).fit(np.array([[0, -1], [1, 0]]))
    assert not est.converged_ and est.n_steps_ == 9
    assert est.trace_.steps == 9


def test_fit_predict_and_initial_labels():
    X = [[0, 3, 3], [3, 0, 3], [3, 3, 0]]
    assert CoalitionFormation(policy="first").fit_predict(X).tolist() == [0, 0, 0]
    est = CoalitionFormation(policy="first", max_steps=0).fit(X, initial_labels=[7, 2, 7])
    assert est.labels_.tolist() == [0, 1, 0]
    assert est.n_steps_ == 0 and not est.converged_


@pytest.mark.parametrize("model", ["none", "resent", "appreciation", "both", "deviator-resent"])
def test_fast_engine_matches_exact(model):
    X = np.array(gen_uniform(9, 11).utilities)
    kw = dict(perception=model, max_steps=3000, random_state=5)
    exact = CoalitionFormation(**kw).fit(X)
    fast = CoalitionFormation(engine="fast", **kw).fit(X)
    assert fast.labels_.tolist() == exact.labels_.tolist()
    assert fast.n_steps_ == exact.n_steps_ and fast.utilities_ == exact.utilities_
    assert fast.trace_ is None


def test_fast_engine_with_initial_labels():
    X = gen_uniform(8, 2).utilities
    labels = [0, 1, 0, 2, 1, 2, 0, 3]
    a = CoalitionFormation(random_state=1).fit(X, initial_labels=labels)
    b = CoalitionFormation(engine="fast", random_state=1).fit(X, initial_labels=labels)
    assert (a.labels_ == b.labels_).all() and a.n_steps_ == b.n_steps_


def test_converged_fit_is_stable():
    for kind in ("NS", "IS", "CNS", "CS", "SCS"):
        est = CoalitionFormation(stability=kind, caf="MF", random_state=4, max_steps=2000)
        est.fit(gen_uniform(5, 8, "MF").utilities)
        if est.converged_:
            state = DynamicState(est.partition_, est.utilities_)
            assert is_stable(est.game_, state, Stability.parse(kind))


def test_random_state_generator_and_fraction_utilities():
    X = [[0, Fraction(1, 2), -1], [2, 0, Fraction(-3, 2)], [1, 1, 0]]
    a = CoalitionFormation(random_state=np.random.Generator(np.random.PCG64(0))).fit(X)
    b = CoalitionFormation(random_state=0).fit(X)
    assert a.labels_.tolist() == b.labels_.tolist()


@pytest.mark.parametrize("params", [
    {"caf": "XX"}, {"stability": "ZS"}, {"perception": "spite"}, {"policy": "last"}, {"max_steps": -1},
    {"size_cap": 0}, {"engine": "gpu"}, {"engine": "fast", "caf": "MF"}, {"engine": "fast", "stability": "IS"},
    {"engine": "fast", "policy": "first"}, {"engine": "fast", "strict_ir": True},
])
def test_bad_params(params):
    with pytest.raises(ValueError):
        CoalitionFormation(**params).fit([[0, 1], [1, 0]])


def test_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        CoalitionFormation().agent_values()


@pytest.mark.parametrize("X, message", [
    (np.zeros(3), "2-dimensional"),
    (np.array([[0.0, np.nan], [1.0, 0.0]]), "NaN"),
    ([[0, 1, 2], [1, 0, 2]], "square"),
    ([[1, 0], [0, 0]], "diagonal entry for agent 0"),
    ([[0, 0.5], [1, 0]], "non-integral float"),
    ([], "empty"),
    (5, "sequence of rows"),
])
def test_matrix_validation(X, message):
    with pytest.raises(ValueError, match=message):
        check_utility_matrix(X)


def test_matrix_accepts_integral_floats():
    assert check_utility_matrix(np.array([[0.0, 2.0], [-1.0, 0.0]])) == ((0, 2), (-1, 0))


def test_label_and_int_validation():
    with pytest.raises(ValueError, match="expected 3 labels"):
        check_labels([0, 1], 3)
    with pytest.raises(ValueError, match="integers"):
        check_labels([0, 1.5, 2], 3)
    assert check_labels(np.array([5, 5, 1]), 3).labels() == [0, 0, 1]
    with pytest.raises(ValueError):
        check_positive_int(True, "x")
    with pytest.raises(ValueError):
        check_positive_int(0, "x")
    assert check_positive_int(0, "x", allow_zero=True) == 0
    assert issubclass(ContractError, ValueError)
