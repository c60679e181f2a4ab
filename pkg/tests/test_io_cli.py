import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anchorlab import io as aio
from anchorlab.cli import main
from anchorlab.core import AnchorCase
from anchorlab.frame import build_canonicalizer, warp_point
from anchorlab.synth import SynthConfig, generate, render


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "data.jsonl"
    assert main(["gen", "--seed", "7", "--count", "60", "--out", str(path)]) == 0
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# --- formats ----------------------------------------------------------------

def test_jsonl_roundtrip_preserves_unknown_keys():
    samples = generate(SynthConfig(seed=1, count=5))
    text = aio.dumps_samples(samples)
    lines = [json.loads(l) for l in text.splitlines()]
    lines[2]["annotator"] = {"name": "x", "pass": 2}
    text = "".join(json.dumps(l) + "\n" for l in lines)
    back = aio.loads_samples(text)
    assert back[2].extra == {"annotator": {"name": "x", "pass": 2}}
    assert back == samples
    again = aio.loads_samples(aio.dumps_samples(back))
    assert again == back and again[2].extra == back[2].extra


def test_jsonl_without_anchor():
    line = '{"image":{"w":10,"h":10},"dissection":{"x":1,"y":2},"grasp":{"x":3,"y":4},"meta":{}}\n'
    (s,) = aio.loads_samples(line)
    assert s.anchor is None
    assert json.loads(aio.dumps_samples([s])) == json.loads(line)


def test_malformed_line_number():
    good = aio.dumps_samples(generate(SynthConfig(seed=1, count=2)))
    with pytest.raises(aio.DataError, match="line 3"):
        aio.loads_samples(good + "{not json}\n")
    with pytest.raises(aio.DataError, match="line 1"):
        aio.loads_samples('{"image":{"w":10,"h":10},"dissection":{"x":50,"y":2},"grasp":{"x":3,"y":4}}\n')


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_roundtrip(v):
    text = aio.dumps_csv(["value"], [[v]])
    assert float(text.splitlines()[1]) == v


def test_ppm_roundtrip(tmp_path):
    raster = render(generate(SynthConfig(seed=2, count=1, image=aio.ImageDims(31, 17)))[0])
    aio.write_ppm(tmp_path / "a.ppm", raster)
    assert np.array_equal(aio.read_ppm(tmp_path / "a.ppm"), raster)
    with pytest.raises(ValueError):
        aio.write_ppm(tmp_path / "b.ppm", raster.astype(float))


def test_svg_structure():
    svg = aio.scatter_svg("t", [("grasp", "#f00", [(1, 2), (500, 0)]), ("dissect", "#00f", [(3, 4)])],
                          (-10, 10), "pct")
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600"')
    assert svg.count("<circle") == 1 and "grasp (n=2)" in svg and "dissect (n=1)" in svg


# --- gen --------------------------------------------------------------------

def test_gen_counts_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    code, out, _ = run(["gen", "--seed", 7, "--count", 100, "--mix", "1,1,1", "--out", a], capsys)
    assert code == 0
    counts = [int(tok.split("=")[1]) for tok in out.split() if tok.startswith("case")]
    assert sum(counts) == 100
    assert len(a.read_text().splitlines()) == 100
    run(["gen", "--seed", 7, "--count", 100, "--mix", "1,1,1", "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_gen_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--count", "0", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    assert "error:" in capsys.readouterr().err
    code, _, err = run(["gen", "--count", 3, "--out", tmp_path / "missing" / "x.jsonl"], capsys)
    assert code == 2 and err.startswith("error:")
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--count", "3", "--mix", "0,0,0", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_seed_env_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ANCHORLAB_SEED", "7")
    run(["gen", "--count", 20, "--out", tmp_path / "env.jsonl"], capsys)
    monkeypatch.delenv("ANCHORLAB_SEED")
    run(["gen", "--seed", 7, "--count", 20, "--out", tmp_path / "flag.jsonl"], capsys)
    run(["gen", "--count", 20, "--out", tmp_path / "default.jsonl"], capsys)
    assert (tmp_path / "env.jsonl").read_bytes() == (tmp_path / "flag.jsonl").read_bytes()
    assert (tmp_path / "env.jsonl").read_bytes() != (tmp_path / "default.jsonl").read_bytes()
    monkeypatch.setenv("ANCHORLAB_SEED", "abc")
    code, _, err = run(["gen", "--count", 2, "--out", tmp_path / "bad.jsonl"], capsys)
    assert code == 2 and "ANCHORLAB_SEED" in err


# --- stats ------------------------------------------------------------------

def test_stats_outputs(dataset, tmp_path, capsys):
    out = tmp_path / "stats"
    assert run(["stats", dataset, "--out", out], capsys)[0] == 0
    rows = aio.read_csv(out / "stats.csv")
    assert list(rows[0]) == ["metric", "representation", "case", "role", "value", "unit", "n"]
    assert not [r for r in rows if r["representation"] == "relative" and r["role"] == "dissect"]
    p_rows = [r for r in rows if r["metric"] == "p_one_sided"]
    assert {r["case"] for r in p_rows} == {"1", "2", "3"}
    svgs = sorted(p.name for p in out.glob("*.svg"))
    assert len(svgs) == 9 and "scatter_anchor_case1.svg" in svgs


def test_stats_ordering_on_larger_dataset(tmp_path, capsys):
    data = tmp_path / "big.jsonl"
    run(["gen", "--seed", 3, "--count", 600, "--out", data], capsys)
    run(["stats", data, "--out", tmp_path / "s"], capsys)
    rows = aio.read_csv(tmp_path / "s" / "stats.csv")
    cell = {(r["representation"], r["case"]): float(r["value"]) for r in rows
            if r["metric"] == "std_x" and r["role"] == "grasp"}
    for case in "123":
        assert cell[("absolute", case)] > cell[("relative", case)] > cell[("anchor", case)]


def test_stats_data_errors(dataset, tmp_path, capsys):
    one = tmp_path / "one.jsonl"
    one.write_text(dataset.read_text().splitlines()[0] + "\n")
    code, _, err = run(["stats", one, "--out", tmp_path / "o"], capsys)
    assert code == 3 and err.startswith("error:") and "insufficient samples" in err
    bad = tmp_path / "bad.jsonl"
    bad.write_text(dataset.read_text() + "garbage\n")
    code, _, err = run(["stats", bad, "--out", tmp_path / "o"], capsys)
    assert code == 3 and "line 61" in err
    with pytest.raises(SystemExit) as exc:
        main(["stats", str(dataset), "--kinds", "nosuch", "--out", str(tmp_path / "o")])
    assert exc.value.code == 2


# --- eval -------------------------------------------------------------------

def test_eval_kfold(dataset, tmp_path, capsys):
    out = tmp_path / "eval.csv"
    code, _, _ = run(["eval", dataset, "--model", "absolute-mean,anchor-radial", "--split", "kfold:3",
                      "--runs", 2, "--seed", 5, "--out", out, "--models-out", tmp_path / "m.jsonl"], capsys)
    assert code == 0
    rows = aio.read_csv(out)
    assert len(rows) == 4
    assert {r["seeds"] for r in rows} == {"5 6"}
    assert all(len(r["plans"].split()) == 2 for r in rows)
    plans = [json.loads(l) for l in (tmp_path / "eval.csv.plans.jsonl").read_text().splitlines()]
    assert {p["digest"] for p in plans} == set(rows[0]["plans"].split())
    models = [json.loads(l) for l in (tmp_path / "m.jsonl").read_text().splitlines()]
    assert [m["kind"] for m in models] == ["absolute-mean", "anchor-radial"]


def test_eval_noise_free_radial_is_perfect(tmp_path, capsys):
    data = tmp_path / "clean.jsonl"
    run(["gen", "--seed", 1, "--count", 90, "--mix", "1,0,0", "--noise-angle", 0, "--noise-radius", 0,
         "--out", data], capsys)
    run(["eval", data, "--model", "anchor-radial", "--split", "kfold:5", "--runs", 5, "--out", tmp_path / "e.csv"],
        capsys)
    (row,) = [r for r in aio.read_csv(tmp_path / "e.csv") if r["metric"] == "precision@6%"]
    assert float(row["mean"]) == 1.0 and float(row["std"]) == 0.0


def test_eval_group_rows(dataset, tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert run(["eval", dataset, "--model", "relative-mean", "--split", "group:surgery_type",
                "--runs", 1, "--out", out], capsys)[0] == 0
    groups = {r["group"] for r in aio.read_csv(out) if r["metric"] == "precision@6%"}
    types = {s.meta["surgery_type"] for s in aio.read_samples(dataset)}
    assert groups == types
    assert run(["eval", dataset, "--model", "anchor-canonical-mean", "--split", "surgeon-groups",
                "--runs", 1, "--out", out], capsys)[0] == 0


def test_eval_usage_errors(dataset, tmp_path, capsys):
    code, _, err = run(["eval", dataset, "--model", "nosuch", "--out", tmp_path / "e.csv"], capsys)
    assert code == 2 and err.startswith("error:") and "anchor-radial" in err
    code, _, err = run(["eval", dataset, "--model", "absolute-mean", "--split", "loo", "--out", tmp_path / "e"],
                       capsys)
    assert code == 2
    code, _, err = run(["eval", dataset, "--model", "absolute-mean", "--split", "group:nokey",
                        "--out", tmp_path / "e"], capsys)
    assert code == 3 and "sample 0" in err


# --- augment ----------------------------------------------------------------

def test_augment_zero_alpha_is_identity(dataset, tmp_path, capsys):
    out = tmp_path / "aug.jsonl"
    assert run(["augment", dataset, "--alpha-max", 0, "--out", out], capsys)[0] == 0
    before, after = aio.read_samples(dataset), aio.read_samples(out)
    for i, (s, t) in enumerate(zip(before, after)):
        assert t.meta["source_index"] == str(i) and float(t.meta["warp_alpha"]) == 0.0
        assert s.anchor == t.anchor
        assert abs(s.grasp.x - t.grasp.x) <= 1e-12 and abs(s.dissection.y - t.dissection.y) <= 1e-12


def test_augment_canonical_coordinates_unchanged(dataset, tmp_path, capsys):
    out = tmp_path / "aug.jsonl"
    run(["augment", dataset, "--seed", 3, "--out", out], capsys)
    for s, t in zip(aio.read_samples(dataset), aio.read_samples(out)):
        assert abs(float(t.meta["warp_alpha"])) <= math.pi / 18
        c1 = warp_point(build_canonicalizer(s.anchor, s.image), s.grasp)
        c2 = warp_point(build_canonicalizer(t.anchor, t.image), t.grasp)
        assert abs(c1.x - c2.x) < 1e-9 and abs(c1.y - c2.y) < 1e-9
    # and the anchor std rows of both files agree
    run(["stats", dataset, "--kinds", "anchor", "--out", tmp_path / "s1"], capsys)
    run(["stats", out, "--kinds", "anchor", "--out", tmp_path / "s2"], capsys)
    r1 = aio.read_csv(tmp_path / "s1" / "stats.csv")
    r2 = aio.read_csv(tmp_path / "s2" / "stats.csv")
    for a, b in zip(r1, r2):
        if a["role"] == "grasp":
            assert float(a["value"]) == pytest.approx(float(b["value"]), abs=1e-9)


def test_augment_rasters(dataset, tmp_path, capsys):
    small = tmp_path / "small.jsonl"
    small.write_text("".join(dataset.read_text().splitlines(keepends=True)[:3]))
    rdir = tmp_path / "r"
    run(["augment", small, "--seed", 1, "--out", tmp_path / "a.jsonl", "--rasters", rdir], capsys)
    assert sorted(p.name for p in rdir.iterdir()) == [
        f"{i:05d}_{tag}.ppm" for i in range(3) for tag in ("after", "before")]
    before = aio.read_ppm(rdir / "00000_before.ppm")
    assert before.shape == (480, 640, 3)


def test_augment_missing_anchor(tmp_path, capsys):
    path = tmp_path / "x.jsonl"
    path.write_text('{"image":{"w":10,"h":10},"dissection":{"x":1,"y":2},"grasp":{"x":3,"y":4},"meta":{}}\n')
    code, _, err = run(["augment", path, "--out", tmp_path / "o.jsonl"], capsys)
    assert code == 3 and "line 1" in err


def test_all_commands_byte_deterministic(tmp_path, capsys):
    outputs = []
    for rep in ("a", "b"):
        d = tmp_path / rep
        d.mkdir()
        run(["gen", "--seed", 9, "--count", 45, "--width", 80, "--height", 60, "--out", d / "data.jsonl"], capsys)
        run(["stats", d / "data.jsonl", "--out", d / "stats"], capsys)
        run(["eval", d / "data.jsonl", "--model", "absolute-mean,anchor-canonical-mean", "--runs", 2,
             "--seed", 4, "--out", d / "eval.csv"], capsys)
        run(["augment", d / "data.jsonl", "--seed", 2, "--out", d / "aug.jsonl", "--rasters", d / "r"], capsys)
        outputs.append({p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()})
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) > 90


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "anchorlab", "gen", "--count", "0", "--out", str(tmp_path / "x")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "error:" in proc.stderr
