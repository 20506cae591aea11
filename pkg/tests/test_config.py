import json
from pathlib import Path

import pytest

from qacal.config import DEFAULTS, ConfigError, load_config, parse_override

DESK = Path(__file__).resolve().parents[1] / "demos" / "configs" / "desk.json"


def _write(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    return p


def test_defaults_validate():
    cfg = load_config()
    assert cfg == DEFAULTS and cfg is not DEFAULTS


def test_partial_document_merges(tmp_path):
    cfg = load_config(_write(tmp_path, {"sampling": {"m": 7}}))
    assert cfg["sampling"]["m"] == 7
    assert cfg["sampling"]["eta"] == DEFAULTS["sampling"]["eta"]


def test_bundled_config_loads():
    cfg = load_config(DESK)
    assert cfg["backend"]["noise"]["scale"] == 0.05


@pytest.mark.parametrize("doc,field", [
    ({"sampling": {"eta": 1.5}}, "sampling.eta"),
    ({"strategy": {"eta_list": [0.1, -0.2]}}, "strategy.eta_list[1]"),
    ({"sampling": {"m": 0}}, "sampling.m"),
    ({"sampling": {"reads": 2.5}}, "sampling.reads"),
    ({"problem": {"generator": "gaussian"}}, "problem.generator"),
    ({"backend": {"kind": "cloud"}}, "backend.kind"),
    ({"embedding": {"offset": [0]}}, "embedding.offset"),
    ({"sampleing": {}}, "sampleing"),
    ({"sampling": {"etaa": 0.1}}, "sampling.etaa"),
    ({"sampling": 3}, "sampling"),
])
def test_invalid_fields_named(tmp_path, doc, field):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, doc))
    assert info.value.field == field and f"'{field}'" in str(info.value)


def test_overrides():
    cfg = load_config(overrides=["sampling.m=12", "backend.noise.level=physical", "output=x/y"])
    assert cfg["sampling"]["m"] == 12
    assert cfg["backend"]["noise"]["level"] == "physical"
    assert cfg["output"] == "x/y"


def test_override_validated():
    with pytest.raises(ConfigError, match="sampling.eta"):
        load_config(overrides=["sampling.eta=2"])


@pytest.mark.parametrize("text", ["sampling.nope=1", "nope.m=1", "sampling"])
def test_bad_override(text):
    with pytest.raises(ConfigError):
        load_config(overrides=[text])


def test_parse_override_values():
    assert parse_override("a.b=[1, 2]") == ("a.b", [1, 2])
    assert parse_override("a=null") == ("a", None)
    assert parse_override("a=logical") == ("a", "logical")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.json")


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
