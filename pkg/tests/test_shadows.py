import math

import numpy as np
import pytest

from subspace_sim.circuits import random_prep
from subspace_sim.pauli import PauliString, PauliSum
from subspace_sim.shadows import (ShadowDataset, acquire, direct_expectations, estimate_pauli,
                                  median_of_means, qcnn_shadow_count, single_shot_values)
from subspace_sim.statevector import expectation, prepare


def test_text_round_trip(tmp_path):
    ds = acquire(random_prep(4, 2, seed=1), 500, seed=2)
    p = tmp_path / "s.txt"
    ds.save(p)
    assert ShadowDataset.load(p) == ds
    assert ShadowDataset.load(p).to_text() == ds.to_text()


def test_acquire_deterministic():
    a = acquire(None, 200, seed=5, n=3)
    b = acquire(None, 200, seed=5, n=3)
    assert a == b


def test_zero_state_z_is_exact():
    ds = acquire(None, 3000, seed=1, n=2)
    v, e = estimate_pauli(ds, PauliString.from_label("ZI"))
    assert v == pytest.approx(1.0, abs=0.15)


def test_single_shot_unbiased():
    prep = random_prep(3, 2, seed=8)
    ds = acquire(prep, 40000, seed=3)
    st = prepare(prep, 3)
    for lab in ["XII", "IYZ"]:
        w = PauliString.from_label(lab)
        v = single_shot_values(ds, w).mean()
        assert v == pytest.approx(expectation(st, PauliSum.from_word(w)), abs=0.06)


def test_median_of_means_constant():
    v, e = median_of_means(np.ones(100), 10)
    assert v == 1.0 and e == 0.0


def test_direct_expectations():
    prep = random_prep(3, 1, seed=2)
    ops = [PauliSum.from_label("ZII"), PauliSum.from_label("XXI")]
    st = prepare(prep, 3)
    assert np.allclose(direct_expectations(prep, ops), [expectation(st, o) for o in ops])


def test_qcnn_count_formula():
    # ceil(300 / 0.01 * 4 * (8 + 6 + ln 200)) evaluated in full precision
    expect = math.ceil(30000 * 4 * (14 + math.log(200)))
    assert qcnn_shadow_count(0.1, 0.01, 2, 1, 8) == expect == 2_315_799


def test_qcnn_count_truncated_log_value():
    # with ln 200 rounded to 5.2983 the same expression gives 2,315,796;
    # the implementation keeps full precision
    assert math.ceil(120000 * (14 + 5.2983)) == 2_315_796
    assert qcnn_shadow_count(0.1, 0.01, 2, 1, 8) - 2_315_796 == 3
