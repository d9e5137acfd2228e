import json

import pytest

from aitthermo import specfile
from aitthermo.compose import CompositeMachine, compose, convolve_spectra
from aitthermo.errors import SpecParseError, UnknownMachine
from aitthermo.machines import SpectrumMachine, TableMachine, UniversalMachine, builtin


def test_parse_builtin_names():
    assert specfile.parse_builtin("B").table == builtin("B").table
    assert specfile.parse_builtin("heavy_tail(3,2)").spectrum().values(12) == \
        builtin("heavy_tail", 3, 2).spectrum().values(12)
    assert specfile.parse_builtin("U(500)").budget == 500
    assert specfile.parse_builtin("U", budget=77).budget == 77
    with pytest.raises(UnknownMachine):
        specfile.parse_builtin("nope")
    with pytest.raises(SpecParseError):
        specfile.parse_builtin("heavy_tail(1,1)")


@pytest.mark.parametrize("m", [
    builtin("B"),
    builtin("O"),
    builtin("heavy_tail", 3, 3),
    TableMachine("t", {"00": "1", "01": "", "1": "10"}),
    UniversalMachine(budget=123),
])
def test_round_trip(m):
    again = specfile.loads(specfile.dumps(m))
    assert type(again) is type(m)
    assert again.to_dict() == m.to_dict()


def test_composite_round_trip_spectrum_is_convolution():
    parts = [builtin("B"), builtin("heavy_tail"), UniversalMachine(budget=300)]
    m = compose(parts)
    d = json.loads(specfile.dumps(m))
    assert d["kind"] == "composite" and d["factors"][:2] == ["B", "heavy_tail"]
    again = specfile.loads(specfile.dumps(m))
    assert isinstance(again, CompositeMachine)
    expected = convolve_spectra(convolve_spectra(parts[0].spectrum(), parts[1].spectrum()), parts[2].spectrum())
    assert again.spectrum().values(40) == expected.values(40)


def test_inline_spectrum_spec():
    m = specfile.loads('{"kind": "spectrum", "name": "s", "entries": {"1": 1, "3": 2}}')
    assert isinstance(m, SpectrumMachine) and m.spectrum() == {1: 1, 3: 2}


@pytest.mark.parametrize("text", [
    "not json",
    '{"kind": "table"}',
    '{"kind": "table", "domain": ["0", "01"]}',
    '{"kind": "martian"}',
    '{"kind": "spectrum", "rule": {"name": "unary"}}',
    '[1, 2]',
])
def test_bad_specs(text):
    with pytest.raises(SpecParseError):
        specfile.loads(text)


def test_resolve_reads_files(tmp_path):
    p = tmp_path / "bb.json"
    specfile.dump(compose([builtin("B"), builtin("B")]), p)
    m = specfile.resolve(str(p))
    assert m.spectrum() == {2: 1, 3: 2, 4: 1}
