import json
import os

import numpy as np
import pytest

from weightlab.cli import generate_instance, main, parse_blocks
from weightlab.serialize import (InstanceError, instance_from_json,
                                 instance_to_json, report_from_json,
                                 report_to_json)
from weightlab.suites import CHECKS, SUITES, check_rng, coverage_manifest, run_suites


def small_instance(tmp_path, seed=3, faithful=True):
    inst = generate_instance([2], seed, faithful, [2])
    path = tmp_path / "inst.json"
    path.write_text(instance_to_json(inst))
    return inst, str(path)


def test_parse_blocks():
    assert parse_blocks("2,3") == [2, 3]
    assert parse_blocks("4") == [4]
    with pytest.raises(InstanceError):
        parse_blocks("0")
    with pytest.raises(InstanceError):
        parse_blocks("two")
    with pytest.raises(InstanceError):
        parse_blocks("")


def test_serialize_roundtrip(tmp_path):
    inst, path = small_instance(tmp_path)
    text = open(path).read()
    back = instance_from_json(text)
    assert back["seed"] == inst["seed"]
    assert back["algebra"].block_dims == inst["algebra"].block_dims
    for a, b in zip(back["weight"].density, inst["weight"].density):
        assert np.allclose(a, b)
    # serialization is byte-stable through a round trip
    assert instance_to_json(back) == text


def test_instance_from_json_errors():
    with pytest.raises(InstanceError):
        instance_from_json("not json")
    with pytest.raises(InstanceError):
        instance_from_json("{}")
    with pytest.raises(InstanceError):
        instance_from_json('{"schema_version": 99}')
    doc = json.loads(instance_to_json(generate_instance([2], 0, True, [2])))
    del doc["weight"]
    with pytest.raises(InstanceError):
        instance_from_json(json.dumps(doc))


def test_gen_deterministic(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["gen", "--blocks", "2,3", "--seed", "11",
                 "--faithful", "--out", a]) == 0
    assert main(["gen", "--blocks", "2,3", "--seed", "11",
                 "--faithful", "--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_gen_bad_blocks_exit_2(capsys):
    assert main(["gen", "--blocks", "0", "--out", "/dev/null"]) == 2
    assert main(["gen", "--blocks", "x,y", "--out", "/dev/null"]) == 2


def test_usage_error_exit_2():
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_run_success_and_report(tmp_path, capsys):
    _, path = small_instance(tmp_path)
    out = str(tmp_path / "report.json")
    code = main(["run", path, "--suite", "gns,kms", "--json", out])
    assert code == 0
    report = report_from_json(open(out).read())
    assert report["schema_version"] == 1
    assert report["counts"]["failed"] == 0
    ids = {r["id"] for r in report["checks"]}
    assert ids == {cid for cid, suite, *_ in CHECKS if suite in ("gns", "kms")}
    for rec in report["checks"]:
        assert rec["anchor"]
        assert rec["tolerance"] > 0


def test_run_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["run", str(bad)]) == 2


def test_run_unknown_suite_exit_2(tmp_path):
    _, path = small_instance(tmp_path)
    assert main(["run", path, "--suite", "nonsense"]) == 2


def test_run_failure_exit_1(tmp_path):
    _, path = small_instance(tmp_path)
    out = str(tmp_path / "r.json")
    # an impossible tolerance forces at least one failure
    code = main(["run", path, "--suite", "gns", "--tol", "1e-300",
                 "--json", out])
    assert code == 1
    report = report_from_json(open(out).read())
    assert report["counts"]["failed"] > 0


def test_report_renders_md_and_png(tmp_path):
    _, path = small_instance(tmp_path)
    rep = str(tmp_path / "r.json")
    assert main(["run", path, "--suite", "hullx", "--json", rep]) == 0
    md = str(tmp_path / "r.md")
    assert main(["report", "--in", rep, "--out", md]) == 0
    text = open(md).read()
    assert text.startswith("# weightlab report")
    assert "hullx.extract" in text
    png = str(tmp_path / "r.png")
    assert os.path.exists(png)
    assert open(png, "rb").read(8) == b"\x89PNG\r\n\x1a\n"


def test_report_bad_inputs(tmp_path):
    assert main(["report", "--in", str(tmp_path / "none.json")]) == 2
    rep = tmp_path / "r.json"
    rep.write_text(report_to_json({"schema_version": 1, "checks": [],
                                   "counts": {}, "seed": 0}))
    assert main(["report", "--in", str(rep), "--format", "html"]) == 2


def test_coverage_manifest():
    man = coverage_manifest()
    assert set(man) == set(SUITES)
    for suite, ids in man.items():
        assert ids, suite
    all_ids = [cid for ids in man.values() for cid in ids]
    assert len(all_ids) == len(set(all_ids)) == len(CHECKS)


def test_check_rng_distinct_and_stable():
    a = check_rng(7, "gns.construct").standard_normal(4)
    b = check_rng(7, "gns.construct").standard_normal(4)
    c = check_rng(7, "kms.gibbs").standard_normal(4)
    assert np.allclose(a, b)
    assert not np.allclose(a, c)


def test_run_suites_nonfaithful(tmp_path):
    inst = generate_instance([2, 2], 5, False, [2])
    report = run_suites(inst, ["gns", "slice"])
    assert report["counts"]["failed"] == 0


def test_every_check_has_anchor_and_unique_id():
    ids = [cid for cid, *_ in CHECKS]
    assert len(ids) == len(set(ids))
    for cid, suite, anchor, tol, fn in CHECKS:
        assert suite in SUITES
        assert isinstance(anchor, str) and anchor
        assert 0 < tol < 1
        assert callable(fn)
