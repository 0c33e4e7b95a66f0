import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import sqem

CNOT = sqem.gate_unitary("cnot")


def test_version_and_channels():
    assert sqem.__version__
    ch = sqem.dephasing(0.9)
    assert len(ch) == 2
    assert ch.p_ne == pytest.approx(0.9)
    back = sqem.KrausChannel.from_json(ch.to_json())
    assert back.p_ne == pytest.approx(0.9)
    assert sqem.amplitude_damping(0.36).p_ne == pytest.approx(0.81)


def test_outcome_probabilities_sum_to_one():
    ch = sqem.tensor_power(sqem.dephasing(0.9), 2)
    outcomes = sqem.run(CNOT, ch, d=2, aux="++")
    assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-9)
    plus = [o for o in outcomes if o.control == 0 and o.aux == [0]][0]
    assert plus.state.shape == (16, 16)
    assert np.allclose(plus.state, plus.state.conj().T)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_choi_auxiliary_matches_analytic(d):
    p = 0.7
    got = sqem.figures_of_merit(np.eye(2), sqem.depolarizing(p), d=d, aux="choi")
    want = sqem.analytic_P_R(p, d)
    assert got["P"] == pytest.approx(want["P"], abs=1e-9)
    assert got["R"] == pytest.approx(want["R"], abs=1e-9)
    assert got["F_CJ"] == pytest.approx(d * p / (1 + (d - 1) * p), abs=1e-9)
    assert got["omega1"] == pytest.approx(1.0)


def test_engines_agree():
    ch = sqem.tensor_power(sqem.dephasing(0.8), 2)
    a = sqem.figures_of_merit(CNOT, ch, d=3, aux="11", engine="bruteforce")
    b = sqem.figures_of_merit(CNOT, ch, d=3, aux="11", engine="closed_form")
    assert a["F_CJ"] == pytest.approx(b["F_CJ"], abs=1e-10)
    assert a["omega1"] == pytest.approx(0.0, abs=1e-12)


def test_deterministic_corrections_beat_the_bare_gate():
    t = sqem.gate_unitary("t")
    table = sqem.optimize_corrections(t, sqem.dephasing(0.9), parameterization="pauli_set")
    assert table["format"] == "sqem-corrections/1"
    assert table["achieved_probability"] == pytest.approx(1.0, abs=1e-9)
    assert table["achieved_F_CJ"] > 0.9


def test_noisy_cswap():
    clean = sqem.noisy_cswap(np.eye(2), sqem.dephasing(0.8), aux="+", cswap_eps=0.0)
    noisy = sqem.noisy_cswap(np.eye(2), sqem.dephasing(0.8), aux="+", cswap_eps=0.01)
    assert noisy["F_CJ"] < clean["F_CJ"]
    assert sqem.cswap_cnot_count(1) == 8


def test_sweep_round_trip():
    config = {
        "schema": "sqem-sweep/1",
        "scenario": "probabilistic",
        "gate": "cnot",
        "channel": {"family": "dephasing", "p_ne": [0.6, 0.9]},
        "d": [1, 2],
        "aux": ["choi"],
    }
    text = json.dumps(config)
    assert sqem.validate_config(text) == 4
    csv, manifest = sqem.sweep(text, workers=2, seed=5)
    lines = csv.strip().split("\n")
    assert lines[0] == "scenario,gate,channel,p_ne,d,aux,omega1,omega2,P,R,F_CJ,F0_CJ,engine,ms"
    assert len(lines) == 5
    assert manifest["totals"]["rows"] == 4
    assert manifest["seed"] == 5
    assert csv == sqem.sweep(text, workers=1)[0]
    single = lines[1].split(",")
    assert single[4] == "1" and float(single[8]) == 1.0 and float(single[9]) == pytest.approx(1.0)


def test_config_errors_raise():
    with pytest.raises(sqem.ConfigError, match="line"):
        sqem.validate_config('{\n "schema": "sqem-sweep/1",\n "bogus": 1\n}')
    with pytest.raises(ValueError):
        sqem.dephasing(1.5)


def test_shipped_configs_validate():
    root = Path(os.environ.get("SQEM_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))
    configs = sorted(root.glob("*.json"))
    assert configs
    for path in configs:
        assert sqem.validate_config(path.read_text()) >= 1
