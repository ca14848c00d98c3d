import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from topogen.errors import InputError
from topogen.persistence import PersistenceDiagram, PersistencePair
from topogen.pipeline import batch_diagram, diameter
from topogen.plotting import MARGIN_L, MARGIN_R, WIDTH, PLOT_KINDS, PlotSpec, compose_rows, render_svg

NS = "{http://www.w3.org/2000/svg}"


def parse(svg):
    return ET.fromstring(svg)


def by_class(root, prefix):
    """Elements whose class list starts with the words of ``prefix``."""
    words = prefix.split()
    return [e for e in root.iter() if e.get("class", "").split()[: len(words)] == words]


@pytest.fixture
def square_dgm(square):
    return batch_diagram(square.points, diameter(square.points))


@pytest.mark.parametrize("kind", PLOT_KINDS)
def test_empty_diagram_is_valid_svg(kind):
    root = parse(render_svg(PersistenceDiagram(()), PlotSpec(kind, 1.0)))
    assert root.tag == NS + "svg"
    assert by_class(root, "mark") == [] and by_class(root, "bar") == []


def test_square_diagram_marks(square_dgm):
    root = parse(render_svg(square_dgm, PlotSpec("persistence_diagram", 2.0)))
    h0, h1 = by_class(root, "mark h0"), by_class(root, "mark h1")
    assert len(h0) == 4 and all(e.tag == NS + "circle" and e.get("fill") == "#000000" for e in h0)
    assert len(h1) == 1 and h1[0].tag == NS + "polygon" and h1[0].get("fill") == "#d62728"
    assert len([e for e in h0 if "inf" in e.get("class")]) == 1


def test_infinite_point_sits_on_cap(square_dgm):
    svg = render_svg(square_dgm, PlotSpec("persistence_diagram", 2.0))
    root = parse(svg)
    (inf,) = [e for e in by_class(root, "mark h0") if "inf" in e.get("class")]
    cap = by_class(root, "cap")[0]
    assert inf.get("cy") == cap.get("y1") == cap.get("y2")
    assert "cap 2" in svg


def test_barcode_geometry():
    dgm = PersistenceDiagram((PersistencePair(0, 0.0, 1.0), PersistencePair(0, 0.0, math.inf)))
    root = parse(render_svg(dgm, PlotSpec("barcode", 2.0)))
    bars = by_class(root, "bar")
    assert len(bars) == 2
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    finite = bars[0]
    assert float(finite.get("x1")) == x0
    assert float(finite.get("x2")) == pytest.approx((x0 + x1) / 2, abs=0.01)
    assert finite.get("marker-end") is None
    inf = bars[1]
    assert "inf" in inf.get("class") and inf.get("marker-end") == "url(#arrow)"
    assert float(inf.get("x2")) == pytest.approx(x1, abs=0.01)


def test_barcode_colors_and_order(square_dgm):
    root = parse(render_svg(square_dgm, PlotSpec("barcode", 2.0)))
    bars = by_class(root, "bar")
    assert [b.get("class").split()[1] for b in bars] == ["h0"] * 4 + ["h1"]
    assert bars[-1].get("stroke") == "#d62728" and bars[0].get("stroke") == "#000000"


def test_rotated_diagram(square_dgm):
    root = parse(render_svg(square_dgm, PlotSpec("rotated_persistence_diagram", 2.0)))
    (h1,) = by_class(root, "mark h1")
    # rotated points sit above the horizontal baseline drawn as the diagonal
    diag = by_class(root, "diagonal")[0]
    assert diag.get("y1") == diag.get("y2")
    ys = [float(v.split(",")[1]) for v in h1.get("points").split()]
    assert max(ys) < float(diag.get("y1"))


def test_dims_filter(square_dgm):
    root = parse(render_svg(square_dgm, PlotSpec("persistence_diagram", 2.0, dims=(1,))))
    assert by_class(root, "mark h0") == [] and len(by_class(root, "mark h1")) == 1


def test_extent_covers_values_past_the_cap():
    dgm = PersistenceDiagram((PersistencePair(1, 0.5, 4.0),))
    root = parse(render_svg(dgm, PlotSpec("persistence_diagram", 1.0)))
    (m,) = by_class(root, "mark h1")
    ys = [float(v.split(",")[1]) for v in m.get("points").split()]
    assert min(ys) >= 0


def test_rendering_is_deterministic(rng, tmp_path):
    x = rng.normal(size=(30, 2))
    dgm = batch_diagram(x, diameter(x))
    for kind in PLOT_KINDS:
        path = tmp_path / f"{kind}.svg"
        a = render_svg(dgm, PlotSpec(kind, 1.5, path=str(path), title="a & b"))
        assert a == render_svg(dgm, PlotSpec(kind, 1.5, title="a & b")) == path.read_text()
        assert "a &amp; b" in a
    # coordinates never carry more than two decimals
    for token in a.replace('"', " ").replace(",", " ").split():
        if token.replace(".", "", 1).replace("-", "", 1).isdigit() and "." in token:
            assert len(token.split(".")[1]) <= 2


def test_compose_rows_keeps_marker_ids_unique(square_dgm):
    bar = render_svg(square_dgm, PlotSpec("barcode", 2.0))
    dg = render_svg(square_dgm, PlotSpec("persistence_diagram", 2.0))
    svg = compose_rows([[dg, bar], [bar]])
    root = parse(svg)
    ids = [e.get("id") for e in root.iter() if e.get("id")]
    assert len(ids) == len(set(ids)) == 3
    for e in by_class(root, "bar h0 inf"):
        assert e.get("marker-end") in ("url(#arrow-1)", "url(#arrow-2)")
    assert float(root.get("width")) == 2 * WIDTH + 10


def test_plot_spec_validation():
    for bad in (dict(kind="scatter", scale_cap=1.0), dict(kind="barcode", scale_cap=0.0),
                dict(kind="barcode", scale_cap=math.inf)):
        with pytest.raises(InputError):
            PlotSpec(**bad)


def test_many_bars_grow_the_canvas():
    pairs = tuple(PersistencePair(0, 0.0, float(v)) for v in np.linspace(0.1, 1, 50))
    root = parse(render_svg(PersistenceDiagram(pairs), PlotSpec("barcode", 1.0)))
    assert float(root.get("height")) > 300
    assert len(by_class(root, "bar")) == 50
