import math

import pytest

from ecg_nlwt.config import NlwtParams
from ecg_nlwt.errors import InvalidParameter
from ecg_nlwt.signal_model import synth_ecg
from ecg_nlwt.tuning import default_grid, tune


@pytest.fixture
def short_synth():
    return synth_ecg(4, 360.0, seed=2)


def test_default_grid_for_360hz():
    grid = default_grid(10)
    c_center = 2.0 * math.sqrt(math.log(21))
    assert grid["shrink_coeff"][0] == pytest.approx(0.75 * c_center)
    assert grid["shrink_coeff"][2] == pytest.approx(c_center)
    assert grid["shrink_coeff"][-1] == pytest.approx(1.25 * c_center)
    assert grid["match_threshold"] == pytest.approx([0.42, 0.84, 1.26, 1.68, 2.1])


def test_default_grid_needs_a_block():
    with pytest.raises(InvalidParameter):
        default_grid(0)


def test_tune_ranks_every_combination(short_synth):
    seen = []
    rows = tune(short_synth, {"c": [1.0, 3.8], "tau": [0.8, 1.2]}, realizations=2,
                base_params=NlwtParams(search_half_width=200),
                on_combination=lambda done, total: seen.append((done, total)))
    assert len(rows) == 4 and seen[-1] == (4, 4)
    scores = [r.snr_imp_db for r in rows]
    assert scores == sorted(scores, reverse=True)
    assert {(r.params["c"], r.params["tau"]) for r in rows} == {(1.0, 0.8), (1.0, 1.2), (3.8, 0.8), (3.8, 1.2)}
    assert all(len(r.per_realization) == 2 for r in rows)
    assert rows[0].to_dict()["snr_imp_db"] == rows[0].snr_imp_db


def test_tune_is_deterministic(short_synth):
    grid = {"shrink_coeff": [3.0]}
    base = NlwtParams(search_half_width=200)
    first = tune(short_synth, grid, realizations=2, base_params=base)
    second = tune(short_synth, grid, realizations=2, base_params=base)
    assert first[0].to_dict() == second[0].to_dict()


@pytest.mark.parametrize("grid", [{"lambda": [1.0]}, {"c": []}, {"L": [0]}])
def test_bad_grids(short_synth, grid):
    with pytest.raises(InvalidParameter):
        tune(short_synth, grid, realizations=1)


def test_realizations_must_be_positive(short_synth):
    with pytest.raises(InvalidParameter):
        tune(short_synth, {"c": [3.8]}, realizations=0)
