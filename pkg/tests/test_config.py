import pytest

from anchorner.config import ConfigError, build_config, parse_config_file


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment\n"
        "dump_path = /data/dump.xml\n"
        "seed = 42\n"
        "filter.scarce_threshold = 5\n"
        "sampling.alpha = 0.5\n"
        "filter.relabel_scarce = true\n"
        "\n",
        encoding="utf-8",
    )
    values = parse_config_file(path)
    assert values["dump_path"] == "/data/dump.xml"
    assert values["seed"] == 42
    assert values["sampling.alpha"] == 0.5
    assert values["filter.relabel_scarce"] is True


def test_parse_rejects_garbage_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("this is not a key value line\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_build_config_applies_nested_values():
    config = build_config({"filter.top_k": 7, "sampling.alpha": 0.9, "seed": 3})
    assert config.filter.top_k == 7
    assert config.sampling.alpha == 0.9
    # the run seed propagates into every stochastic stage
    assert config.filter.seed == 3 and config.sampling.seed == 3


def test_overrides_beat_file_values():
    config = build_config({"seed": 1, "workers": 2}, {"seed": 9})
    assert config.seed == 9 and config.workers == 2


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        build_config({"no_such_key": 1})
    with pytest.raises(ConfigError):
        build_config({"filter.bogus": 1})


def test_target_size_same_as_input():
    config = build_config({"sampling.target_size": "same-as-input"})
    assert config.sampling.target_size is None
    config = build_config({"sampling.target_size": 123})
    assert config.sampling.target_size == 123


def test_list_values_coerced():
    config = build_config(
        {"export.merge_maps": "4types, 212types", "export.fewshot_sizes": "10,50"}
    )
    assert config.export.merge_maps == ["4types", "212types"]
    assert config.export.fewshot_sizes == [10, 50]


def test_digest_ignores_execution_knobs():
    a = build_config({"seed": 5, "workers": 1, "output_dir": "x"})
    b = build_config({"seed": 5, "workers": 8, "output_dir": "y"})
    c = build_config({"seed": 6})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()


def test_invalid_nested_value_still_validated():
    with pytest.raises(ValueError):
        build_config({"sampling.alpha": 2.0})
    with pytest.raises(ValueError):
        build_config({"filter.top_k": 0})
