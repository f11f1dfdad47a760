import os
import pathlib

import numpy as np
import pytest

import cdgbrinkman as cdg

DATA = pathlib.Path(os.environ.get("CDG_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_mesh_counts():
    m = cdg.generate_mesh("tri", 4)
    assert m.num_cells == 32
    assert m.num_boundary_edges == 16
    assert m.labeled_h == 0.25
    assert m.h == pytest.approx(np.sqrt(2) / 4)
    assert m.vertices.shape == (25, 2)
    assert len(m.cells) == 32


@pytest.mark.parametrize("family", ["tri", "rect", "poly"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_patch_exact(family, k):
    r = cdg.patch_error(family, 4, k)
    assert max(r["trb_e"], r["l2_e"], r["l2_eps"]) <= 1e-9


def test_convergence_orders():
    res = cdg.converge("tri", [4, 8, 16], k=1, mu=1.0, a=1.0)
    assert len(res["levels"]) == 3
    assert 1.6 < res["ord_l2"][-1] < 2.3
    assert all(lvl["residual"] <= 1e-9 for lvl in res["levels"])


def test_uniform_flow_with_matching_force():
    r = cdg.solve_flow(3.0, family="tri", n=8, matching_force=True)
    s = r.sample(9)
    assert np.allclose(s["u1"], 1.0, atol=1e-9)
    assert np.allclose(s["u2"], 0.0, atol=1e-9)
    assert np.allclose(s["p"], 0.0, atol=1e-9)


def test_raster_flow_bounded():
    kappa = cdg.synthetic_raster("vuggy", 32)
    assert kappa.min() == pytest.approx(1.0)
    assert kappa.max() == pytest.approx(1e4)
    r = cdg.solve_flow(kappa, n=16)
    assert r.relative_residual <= 1e-9
    s = r.sample(16)
    assert np.abs(np.hypot(s["u1"], s["u2"])).max() <= 10.0


def test_raster_file(tmp_path):
    r = cdg.solve_flow(str(DATA / "fiber64.csv"), n=8)
    assert r.num_cells == 64


def test_errors():
    with pytest.raises(cdg.CdgError):
        cdg.generate_mesh("hex", 4)
    with pytest.raises(cdg.CdgError):
        cdg.solve_flow(np.array([[1.0, -1.0]]), n=4)


def test_cli(tmp_path):
    code, out, _ = cdg.run_cli(["patchtest", "--mesh", "rect", "--k", "2", "--levels", "4..8"])
    assert code == 0
    code, _, err = cdg.run_cli(["solve", "--kappa-raster", str(tmp_path / "missing.csv")])
    assert code == 2
    assert "--kappa-raster" in err
