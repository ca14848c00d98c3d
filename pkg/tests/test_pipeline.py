import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bottleneck_by_permutation
from topogen.bottleneck import bottleneck_distance
from topogen.errors import InputError
from topogen.genmodels import TrainConfig, build_model
from topogen.pipeline import (
    REPORT_HEADER,
    ConstantSource,
    DataBatches,
    EvalConfig,
    IdentitySource,
    Interval,
    ResampleSource,
    batch_diagram,
    compare_models,
    confidence_interval,
    diameter,
    evaluate,
    file_digest,
    format_manifest,
    read_manifest,
    read_report_csv,
    repetition_seeds,
    write_manifest,
    write_report_csv,
)
from topogen.pointcloud import PointCloud
from topogen.synthetic import two_moons

FAST = dict(m_topo=24, reps=6)


@pytest.fixture(scope="module")
def moons():
    return two_moons(200, seed=1)


# ---- confidence intervals ----

def test_normal_interval_formula():
    v = [0.1, 0.4, 0.25, 0.3]
    mean = sum(v) / 4
    s = math.sqrt(sum((x - mean) ** 2 for x in v) / 3)
    ci = confidence_interval(v)
    assert ci.mean == pytest.approx(mean, abs=1e-15)
    assert ci.upper - ci.mean == pytest.approx(1.96 * s / 2, abs=1e-15)
    assert ci.mean - ci.lower == pytest.approx(1.96 * s / 2, abs=1e-15)


def test_identical_values_have_zero_width():
    assert confidence_interval([0.3, 0.3]) == Interval(0.3, 0.3, 0.3)
    assert confidence_interval([0.3] * 5, "bootstrap") == Interval(0.3, 0.3, 0.3)


def test_lower_bound_clipped_at_zero():
    ci = confidence_interval([0.0, 0.0, 1.0])
    assert ci.lower == 0.0 and ci.upper > ci.mean


def test_infinite_values_propagate():
    assert confidence_interval([0.1, math.inf]) == Interval(math.inf, math.inf, math.inf)


def test_bootstrap_interval(rng):
    v = rng.uniform(size=100)
    ci = confidence_interval(v, "bootstrap", seed=3)
    normal = confidence_interval(v)
    assert ci.lower <= ci.mean <= ci.upper
    assert abs((ci.upper - ci.lower) - (normal.upper - normal.lower)) < 0.03
    assert ci == confidence_interval(v, "bootstrap", seed=3)


def test_interval_errors():
    with pytest.raises(InputError):
        confidence_interval([1.0])
    with pytest.raises(InputError):
        confidence_interval([1.0, 2.0], "jackknife")


# ---- config ----

def test_eval_defaults():
    cfg = EvalConfig()
    assert (cfg.m_topo, cfg.reps, cfg.max_scale, cfg.dims, cfg.ci) == (128, 100, "diameter", (0, 1), "normal")


@pytest.mark.parametrize("bad", [dict(m_topo=3), dict(reps=1), dict(dims=(2,)), dict(dims=()),
                                 dict(max_scale=-1.0), dict(max_scale="huge"), dict(ci="t"),
                                 dict(min_effective=0.0), dict(max_dim=3)])
def test_eval_validation(bad):
    with pytest.raises((InputError, ValueError)):
        EvalConfig(**bad)


# ---- seeding ----

def test_repetition_seeds_are_independent_and_reproducible():
    a, b = repetition_seeds(5, 3), repetition_seeds(5, 3)
    draw = lambda ss: np.random.default_rng(ss).integers(0, 2**63, size=2).tolist()
    assert [list(map(draw, p)) for p in a] == [list(map(draw, p)) for p in b]
    flat = [tuple(draw(s)) for pair in a for s in pair]
    assert len(set(flat)) == 6


def test_data_batches_are_shared_across_models(moons):
    cfg = EvalConfig(**FAST)
    one = DataBatches(moons, cfg)
    two = DataBatches(moons, cfg)
    for r in range(cfg.reps):
        assert np.array_equal(one.batch(r).y1, two.batch(r).y1)
    assert not np.array_equal(one.batch(0).y1, one.batch(1).y1)


def test_paired_evaluation_uses_same_data_rows(moons):
    seen = []

    class Spy:
        name = "spy"

        def sample(self, m, rng, y1):
            seen.append(y1.copy())
            return y1 + 0.01

    cfg = EvalConfig(**FAST)
    compare_models([Spy(), Spy()], moons, cfg)
    for a, b in zip(seen[: cfg.reps], seen[cfg.reps:]):
        assert np.array_equal(a, b)


# ---- evaluation ----

def test_identity_source_gives_zero(moons):
    rep = evaluate(IdentitySource(), moons, EvalConfig(**FAST))
    for key in ("0", "1", "max"):
        assert rep.stats[key] == Interval(0.0, 0.0, 0.0)
    assert rep.reps == 6 and rep.distances.shape == (6, 3)


def test_two_identical_repetitions_give_zero_width():
    # rows are a permutation-invariant set: every batch of 4 from 4 rows is the same cloud
    square = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    rep = evaluate(ConstantSource([0.5, 0.5]), square, EvalConfig(m_topo=4, reps=2))
    ci = rep.combined
    assert ci.lower == ci.mean == ci.upper
    # H0 of the square: three bars of length 1 against none -> 0.5; infinite bars match exactly
    assert ci.mean == 0.5


def test_resample_beats_constant(moons):
    cfg = EvalConfig(m_topo=32, reps=8)
    reports = compare_models([ConstantSource([0.0, 0.0]), ResampleSource(moons)], moons, cfg)
    assert [r.model for r in reports] == ["resample", "constant"]
    assert reports[0].combined.mean < reports[1].combined.mean


def test_compare_models_ties_keep_input_order(moons):
    cfg = EvalConfig(**FAST)
    reports = compare_models([IdentitySource(), IdentitySource()], moons, cfg, names=["b", "a"])
    assert [r.model for r in reports] == ["b", "a"]


def test_distance_columns_match_direct_computation(moons):
    cfg = EvalConfig(**FAST)
    spread = ResampleSource(moons)
    rep = evaluate(spread, moons, cfg)
    batches = DataBatches(moons, cfg)
    for r in range(cfg.reps):
        y1 = batches.batch(r).y1
        y2 = spread.sample(cfg.m_topo, np.random.default_rng(batches.seeds[r][1]), y1)
        scale = max(diameter(y1), diameter(y2))
        d1, d2 = batch_diagram(y1, scale), batch_diagram(y2, scale)
        per = [bottleneck_distance(d1, d2, dim=k) for k in (0, 1)]
        assert rep.distances[r].tolist() == per + [max(per)]


def test_own_diameter_equals_joint_scale(rng):
    # a batch diagram stops changing past the batch's own diameter
    y = rng.normal(size=(15, 2))
    dia = diameter(y)
    assert batch_diagram(y, dia).pairs == batch_diagram(y, 3 * dia).pairs


def test_fixed_scale(moons):
    big = evaluate(ResampleSource(moons), moons, EvalConfig(max_scale=50.0, **FAST))
    auto = evaluate(ResampleSource(moons), moons, EvalConfig(**FAST))
    assert np.array_equal(big.distances, auto.distances)
    # a short scale can leave different numbers of components: unmatched infinite bars
    small = evaluate(ResampleSource(moons), moons, EvalConfig(max_scale=0.3, **FAST))
    assert np.isinf(small.distances[:, 0]).any()
    assert small.stats["0"] == Interval(math.inf, math.inf, math.inf)


def test_model_source(moons):
    cfg = TrainConfig(kind="wae", hidden=(4,), steps=0)
    rep = evaluate(build_model("wae", 2, cfg), moons, EvalConfig(**FAST))
    assert rep.model == "wae" and rep.combined.mean > 0


def test_degenerate_batches(moons):
    const = PointCloud(np.zeros((30, 2)))
    with pytest.raises(InputError, match="repetitions usable"):
        evaluate(ConstantSource([0.0, 0.0]), const, EvalConfig(**FAST))
    rep = evaluate(ConstantSource([0.0, 0.0]), moons, EvalConfig(**FAST))
    assert rep.degenerate == FAST["reps"] and rep.skipped == ()


def test_shape_and_size_checks(moons):
    with pytest.raises(InputError, match="m_topo"):
        evaluate(IdentitySource(), moons, EvalConfig(m_topo=500, reps=2))
    with pytest.raises(InputError, match="shape"):
        evaluate(ConstantSource([0.0, 0.0, 0.0]), moons, EvalConfig(**FAST))
    with pytest.raises(InputError):
        evaluate(object(), moons, EvalConfig(**FAST))
    with pytest.raises(InputError):
        compare_models([IdentitySource()], moons, EvalConfig(**FAST))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_small_batch_distances_against_permutation_oracle(seed):
    rng = np.random.default_rng(seed)
    y1, y2 = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
    scale = max(diameter(y1), diameter(y2))
    d1, d2 = batch_diagram(y1, scale), batch_diagram(y2, scale)
    for k in (0, 1):
        a = [(p.birth, p.death) for p in d1.in_dim(k) if not p.is_infinite]
        b = [(p.birth, p.death) for p in d2.in_dim(k) if not p.is_infinite]
        if len(d1.infinite_births(k)) == len(d2.infinite_births(k)) and len(a) + len(b) <= 8:
            inf_part = max([abs(x - y) for x, y in zip(sorted(d1.infinite_births(k)),
                                                       sorted(d2.infinite_births(k)))], default=0.0)
            expect = max(bottleneck_by_permutation(a, b), inf_part)
            assert bottleneck_distance(d1, d2, dim=k) == pytest.approx(expect, abs=1e-12)


# ---- files ----

def test_report_csv_schema_and_round_trip(moons, tmp_path):
    cfg = EvalConfig(**FAST)
    reports = compare_models([ResampleSource(moons), ConstantSource([0.0, 0.0])], moons, cfg)
    path = tmp_path / "r.csv"
    write_report_csv(reports, path)
    rows = read_report_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(REPORT_HEADER)
    assert [(r["model"], r["dim"]) for r in rows] == [
        ("resample", "0"), ("resample", "1"), ("resample", "max"),
        ("constant", "0"), ("constant", "1"), ("constant", "max")]
    for r, rep in zip(rows[2::3], reports):
        assert float(r["mean"]) == rep.combined.mean
        assert float(r["lower"]) <= float(r["mean"]) <= float(r["upper"])
        assert (r["reps"], r["batch"]) == ("6", "24")
    write_report_csv(reports, path, keys=["max"])
    assert len(read_report_csv(path)) == 2


def test_report_csv_rejects_other_files(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InputError):
        read_report_csv(path)


def test_manifest_round_trip(tmp_path):
    items = [("command", "report"), ("data", "/tmp/x.csv"), *EvalConfig().to_items()]
    path = tmp_path / "manifest.txt"
    write_manifest(items, path)
    back = read_manifest(path)
    assert back == dict(items)
    assert back["eval_seed"] == "0" and back["max_scale"] == "diameter"
    with pytest.raises(InputError):
        format_manifest([("note", "a#b")])
    with pytest.raises(InputError):
        read_manifest(tmp_path / "missing.txt")


def test_file_digest(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"abc")
    assert file_digest(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
