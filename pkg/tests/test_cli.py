import json

import pytest

from abdico.cli import main
from abdico.classifier import ComponentSpan
from abdico.corpus import load_corpus
from abdico.pipeline import PipelineConfig, StageError, config_from_sources


def _args(fixtures_dir, out, *extra):
    return [
        "--corpus", str(fixtures_dir / "asf_like.jsonl"),
        "--gold", str(fixtures_dir / "gold.jsonl"),
        "--taxonomy", str(fixtures_dir / "taxonomy.conf"),
        "--seed", "42",
        "--out", str(out),
        *extra,
    ]


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def full_run(tmp_path_factory, fixtures_dir):
    out = tmp_path_factory.mktemp("run") / "demo"
    assert main(["all", *_args(fixtures_dir, out)]) == 0
    return out


def test_all_writes_complete_tree(full_run):
    files = _tree(full_run)
    for name in ("report.md", "run.json", "spans.jsonl", "records.jsonl", "model.tsv",
                 "clusters/agents.jsonl", "clusters/agent_topics.jsonl", "tables/agent_deontic.csv",
                 "charts/agent_category.svg", "charts/deontic_class.svg"):
        assert name in files, name
    md = files["report.md"].decode()
    assert md.count("chi2=") == 2
    run = json.loads(files["run.json"])
    assert run["config"]["seed"] == 42 and run["config"]["model"] == "model.tsv"
    assert "out" not in run["config"]


def test_output_wire_formats(full_run):
    span = json.loads((full_run / "spans.jsonl").read_text().splitlines()[0])
    assert set(span) == {"statement_id", "label", "start", "end", "text"}
    ComponentSpan.from_record(span)
    cl = json.loads((full_run / "clusters" / "agents.jsonl").read_text().splitlines()[0])
    assert set(cl) == {"component_ref", "cluster_id"}
    assert cl["cluster_id"] == "NOISE" or isinstance(cl["cluster_id"], int)
    topic = json.loads((full_run / "clusters" / "agent_topics.jsonl").read_text().splitlines()[0])
    assert isinstance(topic["cluster_id"], int)
    assert all(isinstance(t, str) and isinstance(s, float) for t, s in topic["terms"])
    assert len(load_corpus(full_run / "corpus.jsonl")) == 327


def test_stages_compose_to_all(tmp_path, fixtures_dir, full_run):
    out = tmp_path / "demo"
    for stage in ("ingest", "train", "extract", "cluster", "analyze", "report"):
        assert main([stage, *_args(fixtures_dir, out)]) == 0, stage
    assert _tree(out) == _tree(full_run)


def test_extract_without_model(tmp_path, fixtures_dir, capsys):
    code = main(["extract", "--corpus", str(fixtures_dir / "asf_like.jsonl"), "--out", str(tmp_path / "x")])
    assert code != 0
    err = capsys.readouterr().err
    assert "model file" in err and "model.tsv" in err


def test_missing_prerequisites(tmp_path, fixtures_dir, capsys):
    assert main(["cluster", "--out", str(tmp_path)]) != 0
    assert "spans.jsonl" in capsys.readouterr().err
    assert main(["all", "--out", str(tmp_path)]) != 0
    assert main(["ingest", "--corpus", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path)]) != 0
    assert "nope.jsonl" in capsys.readouterr().err


def test_bad_parameters(tmp_path, fixtures_dir, capsys):
    assert main(["all", *_args(fixtures_dir, tmp_path / "o", "--distance-threshold", "2.5")]) != 0
    assert "distance-threshold" in capsys.readouterr().err


def test_config_file_and_env(tmp_path, fixtures_dir):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 5, "top_k": 2}))
    cfg = config_from_sources(json.loads(conf.read_text()), {"seed": 9, "top_k": None}, environ={})
    assert (cfg.seed, cfg.top_k) == (9, 2)
    assert config_from_sources({}, {}, environ={"IG_SEED": "17"}).seed == 17
    assert config_from_sources({"seed": 3}, {}, environ={"IG_SEED": "17"}).seed == 3
    assert config_from_sources({}, {}, environ={}).seed == 42
    with pytest.raises(StageError):
        config_from_sources({"bogus": 1}, {}, environ={})
    with pytest.raises(StageError):
        config_from_sources({}, {}, environ={"IG_SEED": "x"})


def test_config_flag_via_cli(tmp_path, fixtures_dir):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({
        "corpus": str(fixtures_dir / "asf_like.jsonl"),
        "gold": str(fixtures_dir / "gold.jsonl"),
        "taxonomy": str(fixtures_dir / "taxonomy.conf"),
        "out": str(tmp_path / "cfgrun"),
        "top_k": 2,
    }))
    assert main(["all", "--config", str(conf)]) == 0
    run = json.loads((tmp_path / "cfgrun" / "run.json").read_text())
    assert run["config"]["top_k"] == 2
    assert len(run["crosstabs"]["agent_deontic_topk"]["cols"]) == 2


def test_fixtures_command(tmp_path, fixtures_dir):
    assert main(["fixtures", "--out", str(tmp_path)]) == 0
    for name in ("asf_like.jsonl", "gold.jsonl", "taxonomy.conf", "templates.jsonl", "templates_gold.jsonl"):
        assert (tmp_path / name).read_bytes() == (fixtures_dir / name).read_bytes()


def test_replayable_config_outside_out():
    cfg = PipelineConfig(out="runs/a", model="/tmp/m.tsv")
    assert cfg.replayable()["model"] == "/tmp/m.tsv"
