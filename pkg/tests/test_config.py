import json

import pytest

from ecg_nlwt.config import NlmParams, NlwtParams, load_config, resolve_nlm, resolve_nlwt
from ecg_nlwt.errors import InvalidParameter


class TestNlwtParams:
    def test_defaults_are_the_tuned_360hz_values(self):
        p = NlwtParams().validate()
        assert (p.L, p.M, p.m, p.tau, p.k, p.c, p.wavelet) == (10, 1000, 42, 1.2, 10, 3.8, "haar")
        assert p.block_size == 21

    def test_derived_defaults_follow_L(self):
        p = NlwtParams(block_half_width=20)
        assert p.m == 82 and p.k == 20

    @pytest.mark.parametrize("overrides, fragment", [
        ({"L": 0}, "0.01*fs"),
        ({"M": 0}, "3-5 heart beats"),
        ({"tau": 0.0}, "1-5 %"),
        ({"c": -1.0}, "±25 %"),
        ({"k": 21}, "0 < k < 2L+1"),
        ({"m": 0}, "maximum number of blocks"),
        ({"n_components": 22}, "n_components"),
        ({"projector": "svd"}, "projector"),
        ({"wavelet": "bior2.2"}, "orthogonal"),
        ({"levels": 0}, "levels"),
        ({"refit_every": 0}, "refit_every"),
        ({"threshold_policy": "sure"}, "threshold_policy"),
        ({"threshold_mode": "garrote"}, "threshold_mode"),
        ({"aggregation": "median"}, "aggregation"),
    ])
    def test_validation_messages(self, overrides, fragment):
        with pytest.raises(InvalidParameter, match=fragment.replace("+", r"\+").replace("*", r"\*")):
            NlwtParams().replace(**overrides).validate()

    def test_replace_accepts_short_and_field_names(self):
        p = NlwtParams().replace(L=5, search_half_width=300, tau=0.8)
        assert (p.block_half_width, p.M, p.match_threshold) == (5, 300, 0.8)

    def test_unknown_key(self):
        with pytest.raises(InvalidParameter, match="unknown NLWT parameter"):
            NlwtParams().replace(lambda_=1.0)

    def test_to_dict_uses_effective_values(self):
        d = NlwtParams(block_half_width=4).to_dict()
        assert d["L"] == 4 and d["m"] == 18 and d["k"] == 4
        assert NlwtParams.from_dict(d) == NlwtParams(block_half_width=4, max_blocks=18, shift=4)

    def test_sample_rate_presets(self):
        assert NlwtParams.for_sample_rate(360.0) == NlwtParams()
        p = NlwtParams.for_sample_rate(1000.0)
        assert (p.L, p.M, p.tau) == (20, 4000, 1.8)
        q = NlwtParams.for_sample_rate(500.0)
        assert q.L == 14 and q.M == 1389 and q.tau == 1.2
        assert 5 <= q.L <= 50
        with pytest.raises(InvalidParameter):
            NlwtParams.for_sample_rate(0.0)


class TestNlmParams:
    def test_bandwidth(self):
        assert NlmParams().bandwidth(0.2) == pytest.approx(0.3)
        assert NlmParams(mu=0.05).bandwidth() == 0.05
        with pytest.raises(InvalidParameter):
            NlmParams().bandwidth(None)

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            NlmParams(patch_half_width=0).validate()
        with pytest.raises(InvalidParameter):
            NlmParams(mu=-1.0).validate()
        with pytest.raises(InvalidParameter):
            NlmParams().replace(bandwidth=2.0)


class TestConfigFiles:
    def test_yaml_and_json(self, tmp_path):
        yml = tmp_path / "c.yaml"
        yml.write_text("nlwt:\n  L: 8\n  c: 3.0\nnlm:\n  mu_factor: 2.0\n")
        js = tmp_path / "c.json"
        js.write_text(json.dumps({"nlwt": {"L": 8, "c": 3.0}, "nlm": {"mu_factor": 2.0}}))
        assert load_config(yml) == load_config(js)

    def test_bad_files(self, tmp_path):
        with pytest.raises(InvalidParameter, match="not found"):
            load_config(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("nlwt: [1, 2\n")
        with pytest.raises(InvalidParameter, match="parsing"):
            load_config(bad)
        extra = tmp_path / "extra.yaml"
        extra.write_text("search_terms: [a]\n")
        with pytest.raises(InvalidParameter, match="unknown config section"):
            load_config(extra)

    def test_layering(self):
        config = {"nlwt": {"L": 15, "c": 3.0}, "nlm": {"mu_factor": 2.0}}
        p = resolve_nlwt(config, {"shrink_coeff": 4.5, "shift": None}, 1000.0)
        # preset M and tau, file L, flag c
        assert (p.L, p.M, p.tau, p.c) == (15, 4000, 1.8, 4.5)
        assert resolve_nlm(config, {"mu": 0.1}).bandwidth() == 0.1

    def test_unknown_key_in_section(self):
        with pytest.raises(InvalidParameter):
            resolve_nlwt({"nlwt": {"lambda": 2.0}}, {})
