import math

import numpy as np
import pytest

from loftune import (
    CellStats,
    ContaminationStats,
    LofScores,
    NctParams,
    TuningGrid,
    gen_polygons,
    lof_scores_over_grid,
    noncentral_t_cdf,
    select_c,
    select_k_for_c,
    split_out_in,
    t_statistic,
    tune,
    validate_dataset,
)
from loftune.errors import (
    ContaminationTooLarge,
    ContaminationTooSmall,
    GridInfeasible,
    KOutOfRange,
)
from loftune.tuner import write_diagnostics

from oracles import algorithm1_transcription, two_sample_statistic


def _fake_scores(values):
    arr = np.asarray(values, dtype=np.float64)
    return LofScores(k=1, scores=arr, lrd=arr, kdist=arr)


def test_split_ranks_descending():
    out, inn = split_out_in(_fake_scores([5.0, 4.0, 3.0, 2.0, 1.0, 0.5]), m=2)
    assert np.allclose(out, np.log([5.0, 4.0]))
    assert np.allclose(inn, np.log([3.0, 2.0]))


def test_split_all_equal_uses_row_ids():
    out, inn = split_out_in(_fake_scores([2.0] * 6), m=3)
    assert np.allclose(out, math.log(2.0))
    assert np.allclose(inn, math.log(2.0))
    assert t_statistic(out, inn) == 0.0  # 0/0 guarded to zero


def test_split_bounds():
    scores = _fake_scores(np.linspace(1, 2, 10))
    split_out_in(scores, 5)  # boundary accepted
    with pytest.raises(ContaminationTooLarge):
        split_out_in(scores, 6)
    with pytest.raises(ContaminationTooSmall):
        split_out_in(scores, 1)


def test_t_statistic_hand_case():
    t = t_statistic(np.array([2.0, 4.0]), np.array([1.0, 3.0]))
    assert t == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)


def test_t_statistic_zero_variance_sentinel():
    t = t_statistic(np.array([1.0, 1.0, 1.0]), np.array([0.0, 0.0, 0.0]))
    assert math.isfinite(t)
    assert t > 1e40  # orders above anything a non-degenerate cell produces


def test_t_statistic_matches_direct_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        out = rng.normal(0.4, 0.3, size=50)
        inn = rng.normal(0.1, 0.2, size=50)
        assert t_statistic(out, inn) == pytest.approx(
            two_sample_statistic(list(out), list(inn)), rel=1e-12
        )


def _cell(c, k, t):
    return CellStats(c=c, k=k, m=10, m_out=1.0, m_in=0.5, v_out=0.1, v_in=0.1, t=t)


def test_select_k_tiebreaks_to_smaller():
    cells = [_cell(0.1, 10, 1.2), _cell(0.1, 11, 3.4), _cell(0.1, 12, 3.4)]
    assert select_k_for_c(cells).k == 11
    assert select_k_for_c([_cell(0.1, 7, 0.2)]).k == 7


def _row(c, t, df, ncp):
    return ContaminationStats(
        c=c, m=int(df / 2 + 1), df=df, ncp=ncp, k_opt=5, t_at_k_opt=t,
        quantile=noncentral_t_cdf(t, NctParams(df, ncp)),
    )


def test_select_c_single_and_monotone():
    only = _row(0.05, 2.0, 18.0, 1.0)
    assert select_c([only]) is only
    # identical df and ncp: the larger statistic must win
    low, high = _row(0.05, 1.0, 18.0, 1.0), _row(0.1, 2.5, 18.0, 1.0)
    assert select_c([low, high]).c == 0.1
    # exact quantile tie breaks to the smaller contamination
    tie_a, tie_b = _row(0.05, 2.0, 18.0, 1.0), _row(0.1, 2.0, 18.0, 1.0)
    assert select_c([tie_b, tie_a]).c == 0.05


def test_select_k_matches_exhaustive_recomputation():
    rng = np.random.default_rng(14)
    rows = np.vstack([
        rng.normal(0, 1, size=(120, 2)),
        rng.normal(6, 0.5, size=(80, 2)),
    ])
    data = validate_dataset(rows)
    ks = tuple(range(5, 31))
    c = 0.05
    m = math.floor(c * data.n)
    per_k = lof_scores_over_grid(data, ks)
    cells = []
    best_k, best_t = None, -math.inf
    for sc in per_k:
        out, inn = split_out_in(sc, m)
        t = t_statistic(out, inn)
        cells.append(CellStats(c=c, k=sc.k, m=m, m_out=float(out.mean()),
                               m_in=float(inn.mean()), v_out=float(out.var(ddof=1)),
                               v_in=float(inn.var(ddof=1)), t=t))
        if t > best_t:
            best_k, best_t = sc.k, t
    assert select_k_for_c(cells).k == best_k


def _random_dataset(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(60, 140))
    p = int(rng.integers(2, 4))
    centers = rng.normal(scale=4.0, size=(2, p))
    rows = np.vstack([
        centers[0] + rng.normal(size=(n // 2, p)),
        centers[1] + rng.normal(size=(n - n // 2, p)),
    ])
    return validate_dataset(rows)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_tune_matches_transcription(seed):
    data = _random_dataset(seed)
    grid_c = (0.05, 0.08, 0.12)
    grid_k = (3, 5, 8, 11)
    grid = TuningGrid(contaminations=grid_c, neighborhood_sizes=grid_k)
    model = tune(data, grid)
    cells, per_c, c_opt, k_opt, threshold = algorithm1_transcription(
        data.rows, grid_c, grid_k)
    table = model.score_table
    for cell in table.cells:
        m_out, m_in, v_out, v_in, t = cells[(cell.c, cell.k)]
        assert cell.m_out == pytest.approx(m_out, rel=1e-9)
        assert cell.m_in == pytest.approx(m_in, rel=1e-9)
        assert cell.v_out == pytest.approx(v_out, rel=1e-9, abs=1e-15)
        assert cell.v_in == pytest.approx(v_in, rel=1e-9, abs=1e-15)
        assert cell.t == pytest.approx(t, rel=1e-9)
    for row in table.per_c:
        df, ncp, k_opt_c, t_best, quantile = per_c[row.c]
        assert row.df == df
        assert row.ncp == pytest.approx(ncp, rel=1e-9)
        assert row.k_opt == k_opt_c
        assert row.quantile == pytest.approx(quantile, abs=1e-9)
    assert (model.c_opt, model.k_opt) == (c_opt, k_opt)
    assert model.threshold == pytest.approx(threshold, rel=1e-9)


def test_polygons_protocol_selection():
    # two-polygon protocol; reference outcome on the original data draw:
    # contamination 0.01, neighborhood size 16
    train, _ = gen_polygons(seed=2)
    grid = TuningGrid(contaminations=(0.006, 0.008, 0.01),
                      neighborhood_sizes=tuple(range(10, 51)))
    model = tune(train, grid)
    assert model.c_opt == 0.01
    assert len(model.score_table.cells) == 3 * 41
    sparse_k = (10, 16, 23, 31, 40, 50)
    sparse = tune(train, TuningGrid(contaminations=(0.006, 0.008, 0.01),
                                    neighborhood_sizes=sparse_k))
    _, per_c, c_opt, k_opt, _ = algorithm1_transcription(
        train.rows, (0.006, 0.008, 0.01), sparse_k)
    assert (sparse.c_opt, sparse.k_opt) == (c_opt, k_opt)
    for row in sparse.score_table.per_c:
        assert row.quantile == pytest.approx(per_c[row.c][4], abs=1e-9)


def test_grid_infeasible():
    rng = np.random.default_rng(10)
    data = validate_dataset(rng.uniform(size=(100, 2)))
    with pytest.raises(GridInfeasible) as err:
        tune(data, TuningGrid(contaminations=(0.01,), neighborhood_sizes=(5,)))
    assert err.value.contamination == 0.01
    assert err.value.n == 100
    # the grid's c < 0.5 bound already guarantees 2*floor(c*n) <= n
    with pytest.raises(KOutOfRange):
        tune(data, TuningGrid(contaminations=(0.05,), neighborhood_sizes=(99, 100)))


def test_threshold_rank_count():
    data = _random_dataset(5)
    grid = TuningGrid(contaminations=(0.06, 0.1), neighborhood_sizes=(4, 7))
    model = tune(data, grid)
    m = math.floor(model.c_opt * data.n)
    scores = lof_scores_over_grid(data, [model.k_opt])[0].scores
    order = np.argsort(-scores, kind="stable")
    assert scores[order[m - 1]] == model.threshold
    assert int(np.sum(scores >= model.threshold)) == m  # no boundary ties here


def test_score_scaling_leaves_statistics_unchanged():
    rng = np.random.default_rng(17)
    out = np.log(rng.uniform(1.0, 4.0, size=40))
    inn = np.log(rng.uniform(0.8, 2.0, size=40))
    base = t_statistic(out, inn)
    for lam in (1e-6, 3.0, 1e6):
        shifted = t_statistic(out + math.log(lam), inn + math.log(lam))
        assert shifted == pytest.approx(base, rel=1e-9)


def test_permutation_invariance():
    data = _random_dataset(6)
    grid = TuningGrid(contaminations=(0.06, 0.1), neighborhood_sizes=(4, 7, 10))
    base = tune(data, grid)
    rng = np.random.default_rng(0)
    perm = rng.permutation(data.n)
    shuffled = tune(validate_dataset(data.rows[perm]), grid)
    assert (shuffled.c_opt, shuffled.k_opt) == (base.c_opt, base.k_opt)
    for a, b in zip(shuffled.score_table.cells, base.score_table.cells):
        assert a.t == pytest.approx(b.t, abs=1e-12, rel=1e-12)
    assert shuffled.threshold == pytest.approx(base.threshold, rel=1e-12)


def test_data_scaling_preserves_selection():
    data = _random_dataset(7)
    grid = TuningGrid(contaminations=(0.06, 0.1), neighborhood_sizes=(4, 8))
    base = tune(data, grid)
    scaled = tune(validate_dataset(data.rows * 37.5), grid)
    assert (scaled.c_opt, scaled.k_opt) == (base.c_opt, base.k_opt)
    for a, b in zip(scaled.score_table.cells, base.score_table.cells):
        assert a.t == pytest.approx(b.t, rel=1e-9)


def test_df_formula():
    data = _random_dataset(8)
    grid = TuningGrid(contaminations=(0.05, 0.09, 0.2), neighborhood_sizes=(3, 6))
    model = tune(data, grid)
    for row in model.score_table.per_c:
        assert row.df == 2 * math.floor(row.c * data.n) - 2
        assert row.m == math.floor(row.c * data.n)


def test_diagnostics_file(tmp_path):
    data = _random_dataset(9)
    grid = TuningGrid(contaminations=(0.06, 0.1, 0.15), neighborhood_sizes=(3, 5, 7, 9, 11))
    model = tune(data, grid)
    path = tmp_path / "diag.tsv"
    write_diagnostics(model.score_table, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0].split("\t") == [
        "c", "k", "m", "M_out", "M_in", "V_out", "V_in", "T",
        "df", "ncp", "quantile", "k_opt",
    ]
    assert len(lines) == 1 + 3 * 5
