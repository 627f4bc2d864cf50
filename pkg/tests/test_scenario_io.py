import copy
import json

import numpy as np
import pytest

from adaptive_sync import scenario_io
from adaptive_sync.errors import SchemaError, UnknownParameterError


@pytest.fixture()
def ode_doc(fixtures_dir):
    return scenario_io.load_scenario(fixtures_dir / "barbell_adaptive.json")


@pytest.fixture()
def pde_doc(fixtures_dir):
    return scenario_io.load_scenario(fixtures_dir / "pde_bistable_split.json")


class TestValidation:
    @pytest.mark.parametrize(
        "name",
        [
            "barbell_adaptive",
            "barbell_no_adaptation",
            "cert_fail_theta1",
            "two_node_linear",
            "pde_bistable_split",
            "multichannel_two_graph",
        ],
    )
    def test_all_fixtures_validate(self, fixtures_dir, name):
        scenario_io.load_scenario(fixtures_dir / f"{name}.json")

    def test_unknown_top_level_key(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        bad["extra_knob"] = 1
        with pytest.raises(SchemaError, match="extra_knob"):
            scenario_io.validate_scenario(bad)

    def test_unknown_nested_key(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        bad["time"]["warp"] = 2
        with pytest.raises(SchemaError):
            scenario_io.validate_scenario(bad)

    def test_missing_time_section(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        del bad["time"]
        with pytest.raises(SchemaError, match="time"):
            scenario_io.validate_scenario(bad)

    def test_pde_keys_rejected_in_ode(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        bad["gamma"] = 1.0
        with pytest.raises(SchemaError):
            scenario_io.validate_scenario(bad)

    def test_channels_rejected_in_pde(self, pde_doc, ode_doc):
        bad = copy.deepcopy(pde_doc)
        bad["channels"] = ode_doc["channels"]
        with pytest.raises(SchemaError):
            scenario_io.validate_scenario(bad)

    def test_bad_json_is_schema_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError):
            scenario_io.load_scenario(path)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            scenario_io.load_scenario(tmp_path / "nope.json")

    def test_semantic_error_wrapped(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        bad["channels"][0]["graph"]["links"].append([1, 2])  # duplicate
        scenario_io.validate_scenario(bad)  # structurally fine
        with pytest.raises(SchemaError):
            scenario_io.build_ode_scenario(bad)


class TestInitialStates:
    def test_seeded_reproducible(self, ode_doc):
        a = scenario_io.build_ode_scenario(ode_doc)
        b = scenario_io.build_ode_scenario(ode_doc)
        assert np.array_equal(a.x0, b.x0)

    def test_seed_override(self, ode_doc):
        a = scenario_io.build_ode_scenario(ode_doc)
        b = scenario_io.build_ode_scenario(ode_doc, seed_override=123)
        assert not np.array_equal(a.x0, b.x0)

    def test_seeded_values_are_philox_stream(self, ode_doc):
        sc = scenario_io.build_ode_scenario(ode_doc)
        rng = np.random.Generator(np.random.Philox(0))
        assert np.array_equal(sc.x0, rng.uniform(-2.0, 2.0, size=(8, 1)))

    def test_explicit_initial_shape_checked(self, ode_doc):
        bad = copy.deepcopy(ode_doc)
        bad["initial"] = [[0.0], [1.0]]  # needs 8 rows
        with pytest.raises(SchemaError):
            scenario_io.build_ode_scenario(bad)

    def test_pde_initial_profile(self, pde_doc):
        sc = scenario_io.build_pde_scenario(pde_doc)
        assert sc.x0.shape == (64, 1)
        assert set(np.unique(sc.x0)) == {-1.0, 1.0}


class TestCertificateSection:
    def test_single_channel_certificate(self, ode_doc):
        cert = scenario_io.build_certificate(ode_doc)
        assert cert is not None
        assert cert.theta == 2.0
        assert cert.channels is None

    def test_missing_certificate(self, fixtures_dir):
        doc = scenario_io.load_scenario(fixtures_dir / "two_node_linear.json")
        assert scenario_io.build_certificate(doc) is None

    def test_multichannel_certificate(self, fixtures_dir):
        doc = scenario_io.load_scenario(fixtures_dir / "multichannel_two_graph.json")
        cert = scenario_io.build_certificate(doc)
        assert cert.channels is not None
        assert len(cert.channels) == 2
        assert cert.B.shape == (2, 2)
        assert cert.C.shape == (2, 2)

    def test_omega_count_checked(self, fixtures_dir):
        doc = scenario_io.load_scenario(fixtures_dir / "multichannel_two_graph.json")
        bad = copy.deepcopy(doc)
        bad["certificate"]["omegas"] = [1.0]
        with pytest.raises(SchemaError):
            scenario_io.build_certificate(bad)


class TestSetScenarioParam:
    def test_replaces_scalar(self, ode_doc):
        out = scenario_io.set_scenario_param(ode_doc, "adaptation.default_gain", 5.0)
        assert out["adaptation"]["default_gain"] == 5.0
        assert ode_doc["adaptation"]["default_gain"] == 1.0  # original untouched

    def test_list_indexing(self, ode_doc):
        out = scenario_io.set_scenario_param(ode_doc, "certificate.box.0.1", 4.0)
        assert out["certificate"]["box"][0][1] == 4.0

    def test_unknown_key(self, ode_doc):
        with pytest.raises(UnknownParameterError):
            scenario_io.set_scenario_param(ode_doc, "adaptation.nope", 1.0)

    def test_non_scalar_target(self, ode_doc):
        with pytest.raises(UnknownParameterError):
            scenario_io.set_scenario_param(ode_doc, "adaptation", 1.0)

    def test_result_is_revalidated(self, ode_doc):
        with pytest.raises(SchemaError):
            scenario_io.set_scenario_param(ode_doc, "time.dt", -1.0)


class TestRoundTrip:
    def test_weights_stored_once_per_link(self, ode_doc, tmp_path):
        # serialization round-trip of the scenario preserves one gain and
        # one initial weight per undirected link
        sc = scenario_io.build_ode_scenario(ode_doc)
        path = tmp_path / "copy.json"
        path.write_text(json.dumps(ode_doc))
        sc2 = scenario_io.build_ode_scenario(scenario_io.load_scenario(path))
        assert sc.channels[0].gains.shape == (13,)
        assert np.array_equal(sc.channels[0].gains, sc2.channels[0].gains)
        assert np.array_equal(
            sc.channels[0].initial_weights, sc2.channels[0].initial_weights
        )
