import json
import math

import pytest
from hypothesis import given, strategies as st

from ncprob.errors import ValidationError
from ncprob.measures import PARAMETER, STATE, CircleMeasure, FiniteAtomicMeasure

finite = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)
weights = st.floats(0.001, 1.0, allow_nan=False)


def test_mass_examples(bernoulli):
    assert FiniteAtomicMeasure.dirac(0.0).mass == 1.0
    assert FiniteAtomicMeasure.dirac(0.0, 0.5).mass == 0.5
    assert bernoulli.mass == 1.0


def test_generalized_variance_examples(bernoulli):
    assert FiniteAtomicMeasure.dirac(2.7).generalized_variance == 0.0
    assert bernoulli.generalized_variance == 1.0
    mu = FiniteAtomicMeasure.from_pairs([(0.0, 0.5), (2.0, 0.25)])
    # mu(x^2) mu(R) - mu(x)^2 = (0.25*4)(0.75) - 0.5^2
    assert mu.generalized_variance == pytest.approx(0.5, abs=1e-15)


def test_dilate_translate_examples(bernoulli):
    half = bernoulli.dilate(0.5)
    assert half.atoms == ((-0.5, 0.5), (0.5, 0.5))
    assert FiniteAtomicMeasure.dirac(0.0).translate(3.0).atoms == ((3.0, 1.0),)
    flipped = FiniteAtomicMeasure.dirac(2.0, 0.5).dilate(-1.0)
    assert flipped.atoms == ((-2.0, 0.5),)


def test_dilate_zero_rejected(bernoulli):
    with pytest.raises(ValidationError):
        bernoulli.dilate(0.0)


def test_construction_sorts_and_merges():
    mu = FiniteAtomicMeasure.from_pairs([(1.0, 0.25), (-1.0, 0.5), (1.0 + 1e-13, 0.25)])
    assert mu.positions == (-1.0, pytest.approx(1.0, abs=1e-12))
    assert mu.weights == (0.5, 0.5)


def test_zero_weights_dropped_and_state_nonzero():
    mu = FiniteAtomicMeasure.from_pairs([(0.0, 1.0), (5.0, 0.0)])
    assert mu.atoms == ((0.0, 1.0),)
    with pytest.raises(ValidationError):
        FiniteAtomicMeasure.from_pairs([(0.0, 0.0)])
    with pytest.raises(ValidationError):
        FiniteAtomicMeasure.from_pairs([(0.0, -0.5)])


def test_state_mass_capped_parameter_not():
    with pytest.raises(ValidationError):
        FiniteAtomicMeasure.dirac(0.0, 1.5)
    sigma = FiniteAtomicMeasure.dirac(0.0, 7.0, role=PARAMETER)
    assert sigma.mass == 7.0
    assert FiniteAtomicMeasure.zero().is_zero


@given(st.lists(st.tuples(finite, weights), min_size=1, max_size=8))
def test_reconstruction_idempotent(pairs):
    try:
        mu = FiniteAtomicMeasure.from_pairs(pairs, role=PARAMETER)
    except ValidationError:
        return
    again = FiniteAtomicMeasure.from_pairs(mu.atoms, role=PARAMETER)
    assert again.positions == mu.positions
    assert again.weights == mu.weights


@given(st.lists(st.tuples(finite, weights), min_size=1, max_size=6),
       st.floats(0.1, 8.0).filter(lambda s: s != 0))
def test_dilate_roundtrip_and_mass(pairs, s):
    mu = FiniteAtomicMeasure.from_pairs(pairs, role=PARAMETER)
    back = mu.dilate(s).dilate(1.0 / s)
    assert len(back.positions) == len(mu.positions)
    for a, b in zip(back.positions, mu.positions):
        assert abs(a - b) <= 1e-15 * max(1.0, abs(b))
    assert mu.dilate(s).mass == pytest.approx(mu.mass, rel=1e-15)
    assert mu.translate(1.7).mass == pytest.approx(mu.mass, rel=1e-15)


def test_json_roundtrip_exact(rng):
    positions = rng.uniform(-5, 5, 6)
    ws = rng.uniform(0.01, 0.15, 6)
    mu = FiniteAtomicMeasure.from_pairs(zip(positions, ws))
    blob = json.dumps(mu.to_json_pairs())
    back = FiniteAtomicMeasure.from_json_pairs(json.loads(blob))
    assert back.positions == mu.positions
    assert back.weights == mu.weights


def test_circle_moment_examples():
    d = CircleMeasure.dirac(math.pi / 2.0)
    assert d.moment(1) == pytest.approx(1j, abs=1e-15)
    haar4 = CircleMeasure.from_pairs(
        [(k * math.pi / 2.0, 0.25) for k in range(4)]
    )
    assert abs(haar4.moment(1)) <= 1e-15
    two = CircleMeasure.from_pairs([(0.0, 0.5), (math.pi, 0.5)])
    assert two.moment(2) == pytest.approx(1.0, abs=1e-15)


def test_circle_state_mass_must_be_one():
    with pytest.raises(ValidationError):
        CircleMeasure.from_pairs([(0.0, 0.5)])
    CircleMeasure.from_pairs([(0.0, 0.5)], role=PARAMETER)


def test_circle_angles_wrap_and_merge():
    mu = CircleMeasure.from_pairs([(2 * math.pi - 1e-14, 0.5), (0.0, 0.5)])
    assert len(mu.angles) == 1
    assert mu.mass == 1.0


def test_circle_json_roundtrip():
    mu = CircleMeasure.from_pairs([(0.3, 0.25), (4.1, 0.75)])
    back = CircleMeasure.from_json_pairs(json.loads(json.dumps(mu.to_json_pairs())))
    assert back.atoms == mu.atoms
