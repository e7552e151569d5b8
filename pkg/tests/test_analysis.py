import csv
from importlib import resources

import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from oracles import wilson_closed_form
from scriptfidelity.analysis import (
    EvalCell,
    EvalMatrix,
    classify_collapse,
    family_summary,
    gated_report,
    infer_family,
    quadrant,
    scatter_data,
    wilson_ci,
)
from scriptfidelity.rounding import round_half_away

Z95 = 1.959963984540054


def fixture_rows():
    text = resources.files("scriptfidelity").joinpath("data/fleurs_matrix.csv").read_text()
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


class TestWilson:
    def test_published_interval(self):
        lo, hi = wilson_ci(18, 53, 0.95)
        assert lo == pytest.approx(0.227, abs=0.005)
        assert hi == pytest.approx(0.474, abs=0.005)
        assert (round(100 * lo), round(100 * hi)) == (23, 47)

    def test_zero_successes(self):
        lo, hi = wilson_ci(0, 10, 0.95)
        assert lo == 0.0 and 0 < hi < 1

    def test_all_successes(self):
        assert wilson_ci(10, 10)[1] == 1.0

    def test_symmetric_about_center(self):
        lo, hi = wilson_ci(5, 10, 0.95)
        ref_lo, ref_hi = wilson_closed_form(5, 10, Z95)
        assert (lo, hi) == pytest.approx((ref_lo, ref_hi), abs=1e-12)
        assert (lo + hi) / 2 == pytest.approx(0.5)

    @pytest.mark.parametrize("k, n", [(18, 53), (1, 7), (3, 40), (39, 40), (5, 10)])
    @pytest.mark.parametrize("conf", [0.9, 0.95, 0.99])
    def test_matches_statsmodels(self, k, n, conf):
        ref = proportion_confint(k, n, alpha=1 - conf, method="wilson")
        assert wilson_ci(k, n, conf) == pytest.approx(ref, abs=1e-10)

    def test_n_zero(self):
        with pytest.raises(ValueError):
            wilson_ci(0, 0)

    @settings(max_examples=300)
    @given(st.integers(1, 500).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
    def test_properties(self, kn):
        k, n = kn
        lo, hi = wilson_ci(k, n)
        assert 0.0 <= lo <= k / n <= hi <= 1.0
        assert (lo, hi) == pytest.approx(wilson_closed_form(k, n, Z95), abs=1e-12)


class TestCollapseOnFixture:
    def test_counts(self, fixture_matrix):
        rep = classify_collapse(fixture_matrix, 10.0)
        assert rep.n_collapsed == 18 and rep.n_evaluated == 53
        assert all(m.startswith("whisper") for m, _ in rep.collapsed_pairs)
        assert rep.proportion == pytest.approx(18 / 53)

    def test_gap(self, fixture_matrix):
        rep = classify_collapse(fixture_matrix)
        assert rep.gap == (7.2, 13.0)
        assert rep.insensitive_interval == (7.2, 13.0)
        assert round_half_away(rep.gap_width, 1) == 5.8

    def test_bimodality(self, fixture_matrix):
        assert classify_collapse(fixture_matrix).bimodality == {
            "below": 18,
            "intermediate": 5,
            "above": 30,
        }

    def test_threshold_insensitivity(self, fixture_matrix):
        base = set(classify_collapse(fixture_matrix).collapsed_pairs)
        lo, hi = classify_collapse(fixture_matrix).insensitive_interval
        for t in [lo + 1e-9, 7.3, 8, 9.99, 11, 12.5, hi]:
            assert set(classify_collapse(fixture_matrix, t).collapsed_pairs) == base
        assert set(classify_collapse(fixture_matrix, hi + 1e-9).collapsed_pairs) != base
        assert set(classify_collapse(fixture_matrix, lo).collapsed_pairs) != base

    def test_no_evaluated_cells(self):
        with pytest.raises(ValueError):
            classify_collapse(EvalMatrix((EvalCell("m", "x", None),)))

    def test_bad_threshold(self, fixture_matrix):
        with pytest.raises(ValueError):
            classify_collapse(fixture_matrix, 0)

    def test_no_collapse_has_no_gap(self):
        m = EvalMatrix((EvalCell("m", "a", 95.0), EvalCell("m", "b", 99.0)))
        rep = classify_collapse(m)
        assert rep.gap is None and rep.insensitive_interval is None


class TestFamilies:
    def test_medians_and_counts(self, fixture_matrix):
        rows = {r.family: r for r in family_summary(fixture_matrix)}
        assert round_half_away(rows["Whisper"].median_sfr) == 56.9
        assert (rows["Whisper"].collapsed, rows["Whisper"].evaluated) == (18, 42)
        assert round_half_away(rows["MMS-1B"].mean_sfr) == 99.3
        assert round_half_away(rows["MMS-1B"].median_sfr) == 99.4
        assert round_half_away(rows["SeamlessM4T-v2"].mean_sfr) == 99.9
        assert round_half_away(rows["All models"].median_sfr) == 97.3
        assert (rows["All models"].collapsed, rows["All models"].evaluated) == (18, 53)

    def test_means_recomputed_from_raw_cells(self, fixture_matrix):
        rows = {r.family: r for r in family_summary(fixture_matrix)}
        raw = [float(r["sfr"]) for r in fixture_rows() if r["sfr"]]
        whisper = [float(r["sfr"]) for r in fixture_rows() if r["model"].startswith("whisper")]
        assert rows["All models"].mean_sfr == pytest.approx(sum(raw) / len(raw))
        assert rows["Whisper"].mean_sfr == pytest.approx(sum(whisper) / len(whisper))
        for r in rows.values():
            assert abs(round_half_away(r.mean_sfr, 1) - r.mean_sfr) <= 0.05 + 1e-9

    def test_single_cell_family(self):
        m = EvalMatrix((EvalCell("solo", "x", 100.0),))
        rows = family_summary(m, {"solo": "Solo"})
        assert rows[0].mean_sfr == rows[0].median_sfr == 100.0
        assert (rows[0].collapsed, rows[0].evaluated) == (0, 1)

    def test_even_median_is_midpoint(self):
        m = EvalMatrix(tuple(EvalCell("m", str(i), v) for i, v in enumerate([1, 2, 3, 10])))
        assert family_summary(m, {"m": "F"})[0].median_sfr == 2.5

    def test_unmapped_model(self, fixture_matrix):
        with pytest.raises(ValueError, match="family"):
            family_summary(fixture_matrix, {"whisper-tiny": "W"})

    def test_unevaluated_excluded(self, fixture_matrix):
        rows = {r.family: r for r in family_summary(fixture_matrix)}
        assert rows["MMS-1B"].evaluated == 5

    def test_infer_family(self):
        assert infer_family("whisper-large-v3") == "Whisper"
        assert infer_family("mms-1b") == "MMS-1B"
        assert infer_family("custom-x") == "custom"


class TestScatter:
    def test_count(self, fixture_matrix):
        assert len(scatter_data(fixture_matrix)) == 53

    def test_empty(self):
        assert scatter_data(EvalMatrix(())) == []

    def test_large_v2_bengali(self, fixture_matrix):
        (p,) = [
            p for p in scatter_data(fixture_matrix)
            if (p.model_id, p.language_id) == ("whisper-large-v2", "bn")
        ]
        assert (p.wer_percent, p.sfr_percent, p.collapsed) == (113.3, 0.7, True)
        assert p.quadrant == "high-wer/low-sfr"

    @pytest.mark.parametrize(
        "wer, sfr, tag",
        [(20, 99, "low-wer/high-sfr"), (150, 1, "high-wer/low-sfr"),
         (90, 99, "high-wer/high-sfr"), (10, 2, "low-wer/low-sfr"), (None, 50, "na-wer/high-sfr")],
    )
    def test_quadrants(self, wer, sfr, tag):
        assert quadrant(wer, sfr) == tag


class TestGated:
    def test_fixture_gate(self, fixture_matrix):
        expected = sum(1 for r in fixture_rows() if r["sfr"] and float(r["sfr"]) < 80)
        assert expected == 22
        rep = gated_report(fixture_matrix, 0.8)
        assert len(rep.flagged) == expected
        assert ("whisper-large-v3-turbo", "ml") in rep.flagged
        assert ("whisper-large-v3-turbo", "so") not in rep.flagged

    def test_degenerate_gate(self, fixture_matrix):
        # only exact-zero cells sit below 0.01%
        zeros = {(r["model"], r["language"]) for r in fixture_rows() if r["sfr"] == "0.0"}
        assert set(gated_report(fixture_matrix, 0.0001).flagged) == zeros
        m = EvalMatrix(tuple(EvalCell("m", str(i), 0.5 + i, 90.0) for i in range(4)))
        assert gated_report(m, 0.0001).flagged == []

    def test_all_perfect(self):
        m = EvalMatrix(tuple(EvalCell("m", str(i), 100.0, 5.0) for i in range(4)))
        assert gated_report(m).flagged == []

    def test_render_marks(self, fixture_matrix):
        text = gated_report(fixture_matrix).render_text()
        assert "0.7*" in text and "113.3!" in text and "---" in text

    def test_rows_keep_unevaluated_marker(self, fixture_matrix):
        (row,) = [r for r in gated_report(fixture_matrix).rows() if r["model"] == "mms-1b"
                  and r["language"] == "ur"]
        assert row["sfr"] == "" and row["wer"] == "" and row["wer_meaningful"] == ""

    def test_bad_gate(self, fixture_matrix):
        with pytest.raises(ValueError):
            gated_report(fixture_matrix, 1.5)


class TestMatrix:
    def test_duplicate_cell(self):
        with pytest.raises(ValueError, match="duplicate"):
            EvalMatrix((EvalCell("m", "a", 1.0), EvalCell("m", "a", 2.0)))

    def test_wer_without_sfr(self):
        with pytest.raises(ValueError):
            EvalCell("m", "a", None, 50.0)

    def test_fixture_shape(self, fixture_matrix):
        assert len(fixture_matrix) == 54
        assert len(fixture_matrix.evaluated) == 53
        assert fixture_matrix.cell("mms-1b", "ur").evaluated is False
        assert len(fixture_matrix.models) == 9 and len(fixture_matrix.languages) == 6
