import math
import re
from pathlib import Path

import numpy as np
import pytest

from prime_ldp import EstimatorConfig, InvalidParametersError, ParseError
from prime_ldp.experiments import (
    CSV_HEADER,
    SweepRow,
    SweepSpec,
    alignment_bins,
    collect_replications,
    emit_results,
    format_csv,
    hard_labels,
    load_edge_list,
    parse_edge_lines,
    private_vs_nonprivate_curve,
    read_pi_csv,
    rep_losses,
    run_sweep,
    sweep_model,
    write_edge_list,
    write_pi_csv,
)

DATA = Path(__file__).parent / "data"


class TestEdgeList:
    def test_duplicate_collapse(self):
        g = parse_edge_lines(["a b\n", "b a\n"])
        assert g.n == 2 and g.n_edges == 1

    def test_self_loop_dropped(self):
        g = parse_edge_lines(["x x\n"])
        assert g.n == 1 and g.n_edges == 0 and g.self_loops == 1

    def test_comments_and_blank_lines(self):
        g = parse_edge_lines(["# header\n", "\n", "1 2\n", "  2 3  \n"])
        assert g.labels == ("1", "2", "3") and g.n_edges == 2

    def test_bad_line_reports_line_number(self):
        with pytest.raises(ParseError) as info:
            parse_edge_lines(["1 2\n", "1 2 3\n"])
        assert info.value.line == 2

    def test_round_trip(self, tmp_path):
        g = load_edge_list(DATA / "tiny_two_block.txt")
        write_edge_list(g, tmp_path / "out.txt")
        h = load_edge_list(tmp_path / "out.txt")
        assert h.n_edges == g.n_edges
        idx = [h.index[lab] for lab in g.labels]
        np.testing.assert_array_equal(h.adjacency[np.ix_(idx, idx)], g.adjacency)

    def test_fixture_size(self):
        g = load_edge_list(DATA / "tiny_two_block.txt")
        assert g.n == 120 and g.n_edges == 816


class TestPiCsv:
    def test_round_trip_full_precision(self, tmp_path, rng):
        pi = rng.dirichlet(np.ones(3), 7)
        write_pi_csv(tmp_path / "pi.csv", [f"n{i}" for i in range(7)], pi)
        labels, back = read_pi_csv(tmp_path / "pi.csv")
        assert labels == [f"n{i}" for i in range(7)]
        np.testing.assert_array_equal(back, pi)
        assert (tmp_path / "pi.csv").read_text().splitlines()[0] == "node,pi_1,pi_2,pi_3"

    def test_bad_header(self, tmp_path):
        (tmp_path / "x.csv").write_text("id,a\n1,2\n")
        with pytest.raises(ParseError):
            read_pi_csv(tmp_path / "x.csv")


class TestBins:
    def test_two_bin(self):
        pi = np.array([[0.7, 0.1, 0.1, 0.1], [0.25, 0.25, 0.25, 0.25], [0.625, 0.375, 0, 0]])
        assert alignment_bins(pi).tolist() == ["strong", "weak", "weak"]

    def test_five_bin(self):
        pi = np.array([[0.5, 0.5], [0.1, 0.9], [0.4, 0.6], [0.95, 0.05], [0.65, 0.35]])
        assert alignment_bins(pi, "five_bin").tolist() == [
            "neutral", "highly conservative", "moderately conservative",
            "highly liberal", "moderately liberal",
        ]

    def test_five_bin_requires_k2(self):
        with pytest.raises(InvalidParametersError):
            alignment_bins(np.full((2, 3), 1 / 3), "five_bin")

    def test_hard_labels(self):
        labs = hard_labels(np.array([[0.9, 0.1], [0.2, 0.8]]), 0)
        assert labs.tolist() == [0, 1]


def _small_spec(**kw):
    base = dict(n=200, K=2, bn_grid=[4.0, 5.0], eps_grid=[6.0, math.inf], reps=2, seed=3)
    base.update(kw)
    return SweepSpec(**base)


class TestSweep:
    def test_single_cell_bit_exact(self):
        spec = SweepSpec(n=200, K=2, bn_grid=[5.0], eps_grid=[math.inf], reps=1, seed=1)
        a = run_sweep(spec)
        b = run_sweep(spec)
        assert len(a) == 1
        assert a[0].reps == 1 and a[0].mean_loss == b[0].mean_loss

    def test_grid_order_and_counts(self):
        rows = run_sweep(_small_spec())
        assert [(r.b_n, r.epsilon) for r in rows] == [
            (4.0, 6.0), (4.0, math.inf), (5.0, 6.0), (5.0, math.inf)]
        assert all(r.reps == 2 for r in rows)

    def test_workers_do_not_change_results(self):
        spec = _small_spec()
        serial = collect_replications(spec, 1)
        parallel = collect_replications(spec, 2)
        for key in serial:
            np.testing.assert_array_equal(rep_losses(serial, *key), rep_losses(parallel, *key))

    def test_model_draws_shared_across_bn(self):
        spec = _small_spec()
        p4, p5 = sweep_model(spec, 4.0, 0), sweep_model(spec, 5.0, 0)
        np.testing.assert_array_equal(p4.pi, p5.pi)
        np.testing.assert_allclose(p4.theta / p5.theta, 4 / 5)

    def test_invalid_model_counts_as_warning(self):
        rows = run_sweep(SweepSpec(n=60, K=2, bn_grid=[40.0], eps_grid=[math.inf], reps=1, seed=0))
        assert rows[0].warnings == 1 and rows[0].reps == 0 and math.isnan(rows[0].mean_loss)

    def test_rejects_bad_spec(self):
        with pytest.raises(InvalidParametersError):
            _small_spec(reps=0)
        with pytest.raises(InvalidParametersError):
            _small_spec(eps_grid=[0.0])


class TestEmit:
    def _rows(self, bns, epss):
        return [SweepRow(b, e, 0.1 * b + 0.01 * (e if math.isfinite(e) else 0), 0.01, 3, 1.0, 0)
                for b in bns for e in epss]

    def test_one_row_csv(self):
        text = format_csv(self._rows([8.0], [math.inf]), timing=False)
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("8.0,inf,")

    def test_default_format_is_csv_only(self, tmp_path):
        paths = emit_results(self._rows([5.0], [6.0]), tmp_path, formats=[])
        assert [Path(p).name for p in paths] == ["sweep.csv"]

    def test_svg_curve_counts(self, tmp_path):
        bns = [5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]
        epss = [5.0, 6.0, 7.0, 8.0]
        emit_results(self._rows(bns, epss), tmp_path, formats=["csv", "svg"])
        by_bn = (tmp_path / "loss_vs_bn.svg").read_text()
        by_eps = (tmp_path / "loss_vs_eps.svg").read_text()
        assert len(set(re.findall(r'id="curve-\d+"', by_bn))) == 4
        assert len(set(re.findall(r'id="curve-\d+"', by_eps))) == 8

    def test_metadata_lines(self):
        text = format_csv(self._rows([5.0], [6.0]), meta={"seed": 3}, timing=False)
        assert text.startswith("# seed=3\n")


class TestCurve:
    def test_near_identity_mechanism(self):
        g = load_edge_list(DATA / "tiny_two_block.txt")
        pts = private_vs_nonprivate_curve(g, 2, [40.0], EstimatorConfig(2), seed=0, reps=2)
        assert pts[0].mean_distance < 1e-8

    def test_shape_and_determinism(self):
        g = load_edge_list(DATA / "tiny_two_block.txt")
        a = private_vs_nonprivate_curve(g, 2, [2.0, 6.0], seed=1, reps=3)
        b = private_vs_nonprivate_curve(g, 2, [2.0, 6.0], seed=1, reps=3)
        assert [p.epsilon for p in a] == [2.0, 6.0]
        assert [p.distances for p in a] == [p.distances for p in b]
        assert all(len(p.distances) + p.failures == 3 for p in a)


def test_tau_ladder_rescues_negative_degrees():
    # sparse graph: debiased degrees go strongly negative at small epsilon
    rng = np.random.default_rng(0)
    n = 300
    a = np.triu((rng.random((n, n)) < 0.02).astype(np.uint8), 1)
    a = a + a.T
    pts = private_vs_nonprivate_curve(a, 2, [0.5], seed=0, reps=3, max_tau_doublings=0)
    rescued = private_vs_nonprivate_curve(a, 2, [0.5], seed=0, reps=3, max_tau_doublings=8)
    assert pts[0].failures > 0
    assert rescued[0].failures < pts[0].failures
    assert max(rescued[0].taus) > 1.0
