import json

import numpy as np
import pytest

from skperiods.errors import ConfigError
from skperiods.families import (FamilyConfig, bundled_config,
                                config_from_dict, degenerate_reduced,
                                load_config)


def test_bundled_configs_load():
    for name, kind in (("f1", "pair-collision"), ("f3", "multi-collision"),
                       ("r1", "radial")):
        fam = bundled_config(name)
        assert fam.kind == kind


def test_bundled_config_missing():
    with pytest.raises(ConfigError):
        bundled_config("does-not-exist")


def test_roots_at_deterministic_order():
    fam = bundled_config("f1")
    rts = fam.roots_at(0.01)
    assert rts[0] == -0.01 and rts[1] == 0.01
    assert rts[2:] == [1.0, 2.0, 3.0, 4.0]


def test_vector_eps():
    fam = bundled_config("f3")
    rts = fam.roots_at([1e-2, 1e-3, 1e-4, 1e-5])
    assert abs(rts[0] - (2 - 1e-2)) < 1e-15
    assert abs(rts[3] - (4 + 1e-3)) < 1e-15
    with pytest.raises(ConfigError):
        fam.roots_at([1e-2, 1e-3])


def test_ladder_geometric():
    fam = bundled_config("f1")
    lad = fam.ladder()
    assert len(lad) == fam.count
    ratios = [lad[k] / lad[k + 1] for k in range(len(lad) - 1)]
    assert np.allclose(ratios, 10.0 ** 0.25)


def test_config_validation():
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "nope"})
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "pair-collision"})
    with pytest.raises(ConfigError):
        # odd total degree
        config_from_dict({"kind": "raw", "fixed_roots": [0.0, 1.0, 2.0]})


def test_json_config_roundtrip(tmp_path):
    d = {"kind": "raw", "fixed_roots": [[1.0, 0.0], [-1.0, 0.0],
                                        [0.0, 1.0], [0.0, -1.0]],
         "plan": {"pairs": [[0, 1], [2, 3]]}}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    fam = load_config(str(p))
    assert fam.kind == "raw"
    assert fam.fixed_roots == (1 + 0j, -1 + 0j, 1j, -1j)


def test_degenerate_reduced_f1():
    fam = bundled_config("f1")
    curve, plan = degenerate_reduced(fam)
    # the collided pair becomes a double root; genus drops from 2 to 1
    assert curve.genus == 1
    assert 2 in curve.rootset.mults
