import json

import numpy as np
import pytest

from ovkron.config import ConfigError, dump_normalized, load, loads, model_from_dict


def base():
    return {
        "schema_version": 1, "n_R": 2, "n_T": 2,
        "r_measures": [{"kind": "atoms", "atoms": [0.5, 1.5]}, {"kind": "point", "location": 1.0}],
        "t_measures": [{"kind": "uniform01", "n_atoms": 4}, {"kind": "atoms", "atoms": [1.0, 0.5], "law_of": "r"}],
        "covariance": {"blocks": [{"variance": 1.0, "diagonal": [1, 1], "permutation": [0, 1]},
                                  {"variance": 0.5, "diagonal": [1, 2], "permutation": [1, 0]}]},
    }


@pytest.mark.parametrize("name", ["trivial", "symmetric_uniform", "separable_2x2", "classical_2x2",
                                  "separable_2x2_pattern"])
def test_shipped_configs_round_trip(load_config, name):
    m = load_config(name)
    again = model_from_dict(json.loads(json.dumps(dump_normalized(m))))
    assert again == m


def test_round_trip_with_padding_and_gamma():
    d = base()
    d.update(n_R=1, r_measures=[{"kind": "point", "location": 2.0}], gamma=0.5,
             covariance={"entry_variances": [[1, 2], [0, 0]]})
    m = model_from_dict(d)
    assert m.n == 2 and m.gamma == 0.5
    norm = dump_normalized(m)
    assert len(norm["r_measures"]) == 2 and norm["r_measures"][1]["atoms"] == [0.0]
    assert model_from_dict(norm) == m


def test_measure_kinds():
    m = model_from_dict(base())
    assert np.allclose(m.r_measures[0].weights, [0.5, 0.5])
    assert np.allclose(m.t_measures[0].atoms, [0.125, 0.375, 0.625, 0.875])
    # law of r is squared on load
    assert np.allclose(sorted(m.t_measures[1].atoms), [0.25, 1.0])


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.update(extra=1), "extra"),
    (lambda d: d["r_measures"][0].update(colour="red"), "r_measures[0].colour"),
    (lambda d: d.pop("covariance"), "covariance"),
    (lambda d: d["covariance"].update(entry_variances=[[1, 1], [1, 1]]), "covariance"),
    (lambda d: d.update(schema_version=2), "schema_version"),
    (lambda d: d.update(n_R=0), "n_R"),
    (lambda d: d.update(gamma=-1), "gamma"),
    (lambda d: d["r_measures"][0].update(kind="beta"), "r_measures[0].kind"),
    (lambda d: d["r_measures"][0].update(law_of="r3"), "r_measures[0].law_of"),
    (lambda d: d["r_measures"][1].update(location=-1.0), "r_measures[1]"),
    (lambda d: d["covariance"]["blocks"][1].update(permutation=[1, 1]), "covariance.blocks[1]"),
    (lambda d: d["covariance"]["blocks"][0].update(diagonal=[1]), "covariance.blocks[0]"),
    (lambda d: d["covariance"]["blocks"][0].update(variance="x"), "covariance.blocks[0].variance"),
    (lambda d: d.update(t_measures=[]), "t_measures"),
])
def test_errors_name_the_field(mutate, where):
    d = base()
    mutate(d)
    with pytest.raises(ConfigError) as info:
        model_from_dict(d)
    assert info.value.path.startswith(where)
    assert where in str(info.value)


def test_json_syntax_error_reports_position():
    with pytest.raises(ConfigError, match="line 3 column"):
        loads('{\n "n_R": 1,\n oops\n}')


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load(tmp_path / "missing.json")


def test_density_measure():
    d = base()
    d["r_measures"][0] = {"kind": "atoms", "atoms": [1.0], "weights": [0.5],
                          "density_grid": [0.0, 1.0], "density_values": [1.0, 0.0]}
    m = model_from_dict(d)
    assert m.r_measures[0].mass() == pytest.approx(1.0)
    d["r_measures"][0].pop("density_values")
    with pytest.raises(ConfigError):
        model_from_dict(d)
