import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from eegemotion.corpus import Geometry, LabelScheme, SynthConfig, synth_generate
from eegemotion.evaluation import (ConfusionMatrix, ReportFormatError, RunReport, ScoreSet,
                                   TrialResult, betainc, compare, confusion, f1, make_folds,
                                   read_report, run_experiment, run_features, scores_csv, t_cdf, t_sf2,
                                   trial_seed, welch_t, write_report)
from eegemotion.nn import ModelConfig, TrainConfig
from eegemotion.signal_core import StftPlan

HAND = np.array([[5, 1, 0], [2, 3, 1], [0, 0, 8]])

# two-sided critical values from printed t tables: P(|T| > t) = alpha
T_TABLE = [
    (1, 0.10, 6.314), (1, 0.05, 12.706), (5, 0.10, 2.015), (5, 0.05, 2.571),
    (5, 0.01, 4.032), (10, 0.05, 2.228), (10, 0.01, 3.169), (30, 0.05, 2.042),
    (30, 0.01, 2.750),
]


# ---- folds

def test_folds_equal_sizes():
    plan = make_folds(100, 5, 5, seed=3)
    for r in range(5):
        assert [len(f) for f in plan.folds(r)] == [20] * 5


def test_folds_uneven():
    sizes = sorted(len(f) for f in make_folds(101, 5, 1, seed=1).folds(0))
    assert sizes == [20, 20, 20, 20, 21]


def test_folds_deterministic():
    a, b = make_folds(57, 5, 5, seed=9), make_folds(57, 5, 5, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.permutations, b.permutations))


def test_folds_errors():
    with pytest.raises(ValueError):
        make_folds(4, 5, 1, 0)
    with pytest.raises(ValueError):
        make_folds(10, 1, 1, 0)


def test_split_is_complementary():
    plan = make_folds(23, 5, 2, seed=0)
    for r, f in plan.trials():
        tr, te = plan.split(r, f)
        assert np.array_equal(np.sort(np.concatenate([tr, te])), np.arange(23))
        assert np.intersect1d(tr, te).size == 0


@given(st.integers(5, 2000), st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_fold_properties(n, seed, k):
    if n < k:
        return
    plan = make_folds(n, k, 5, seed)
    for r in range(plan.repeats):
        folds = plan.folds(r)
        joined = np.concatenate(folds)
        assert np.array_equal(np.sort(joined), np.arange(n))
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1
    assert len({p.tobytes() for p in plan.permutations}) == plan.repeats


def test_tiny_n_repeats_still_distinct():
    # n=5 has 120 permutations; five repeats must all differ
    plan = make_folds(5, 5, 5, seed=0)
    assert len({p.tobytes() for p in plan.permutations}) == 5


# ---- confusion / F1

def test_confusion_perfect():
    c = confusion([0, 1, 2, 2], [0, 1, 2, 2], 3)
    assert np.array_equal(c.counts, np.diag([1, 1, 2]))
    assert c.accuracy == 1.0
    assert np.all(c.precision == 1) and np.all(c.recall == 1)
    for avg in ("macro", "micro", "weighted"):
        assert f1(c, avg) == 100.0


def test_confusion_degenerate_predictor():
    actual = np.repeat(np.arange(4), 5)
    c = confusion(actual, np.zeros(20, int), 4)
    assert c.accuracy == 0.25
    assert c.precision[0] == 0.25 and c.recall[0] == 1.0
    assert np.all(c.precision[1:] == 0)
    assert not np.isnan(f1(c))
    assert f1(c) == pytest.approx(100 * (2 * 0.25 / 1.25) / 4)


def test_hand_matrix():
    c = ConfusionMatrix(HAND)
    assert np.allclose(c.recall, [5 / 6, 3 / 6, 8 / 8])
    assert np.allclose(c.precision, [5 / 7, 3 / 4, 8 / 9])
    p, r = np.array([5 / 7, 3 / 4, 8 / 9]), np.array([5 / 6, 3 / 6, 1.0])
    per = 2 * p * r / (p + r)
    assert f1(c, "macro") == pytest.approx(100 * per.mean())
    assert f1(c, "weighted") == pytest.approx(100 * np.dot(per, [6, 6, 8]) / 20)
    assert f1(c, "micro") == pytest.approx(100 * 16 / 20)


def test_confusion_rows_are_actual():
    c = confusion([0, 0, 1], [1, 1, 1], 2)
    assert c.counts[0, 1] == 2 and c.counts[1, 1] == 1


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion([0, 1], [0], 2)
    with pytest.raises(ValueError):
        confusion([0, 3], [0, 1], 3)
    with pytest.raises(ValueError):
        ConfusionMatrix(np.array([[1, -1], [0, 1]]))
    with pytest.raises(ValueError):
        f1(ConfusionMatrix(np.zeros((2, 2), int)))
    with pytest.raises(ValueError):
        f1(ConfusionMatrix(HAND), "samples")


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=200))
def test_confusion_properties(pairs):
    a, p = zip(*pairs)
    c = confusion(a, p, 4)
    assert c.total == len(pairs)
    assert f1(c, "micro") == pytest.approx(100 * np.mean(np.array(a) == np.array(p)))
    for avg in ("macro", "micro", "weighted"):
        v = f1(c, avg)
        assert 0 <= v <= 100 and not np.isnan(v)
    # margins in the CSV agree with the raw counts
    rows = list(csv.reader(io.StringIO(c.to_csv())))
    counts_t = np.array([[int(v) for v in row[1:5]] for row in rows[1:5]])
    assert np.array_equal(counts_t, c.counts.T)
    for i in range(4):
        col = counts_t[i].sum()
        assert float(rows[1 + i][5]) == (counts_t[i, i] / col if col else 0.0)
        row = counts_t[:, i].sum()
        assert float(rows[5][1 + i]) == (counts_t[i, i] / row if row else 0.0)


def test_confusion_csv_layout():
    text = ConfusionMatrix(HAND).to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "predicted\\actual,0,1,2,precision"
    assert lines[1].startswith("0,5,2,0,")
    assert lines[-1].startswith("recall,")


# ---- t distribution

@pytest.mark.parametrize("df,alpha,t", T_TABLE)
def test_t_table_critical_values(df, alpha, t):
    # printed tables round t to 3 decimals, which moves alpha by up to ~1e-4
    assert t_sf2(t, df) == pytest.approx(alpha, abs=2e-4)


@pytest.mark.parametrize("df", [1, 5, 10, 30])
@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_t_cdf_grid(df, t):
    assert abs(t_cdf(t, df) - sps.t.cdf(t, df)) < 1e-10


def test_t_cdf_closed_forms():
    # df=1 is Cauchy, df=2 has a closed form
    for t in (-3.0, -0.5, 0.0, 1.0, 7.0):
        assert t_cdf(t, 1) == pytest.approx(0.5 + np.arctan(t) / np.pi, abs=1e-13)
        assert t_cdf(t, 2) == pytest.approx(0.5 + t / (2 * np.sqrt(2 + t * t)), abs=1e-13)


@given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    from scipy.special import betainc as ref
    assert betainc(a, b, x) == pytest.approx(ref(a, b, x), abs=1e-11)


def test_betainc_domain():
    with pytest.raises(ValueError):
        betainc(0, 1, 0.5)
    with pytest.raises(ValueError):
        betainc(1, 1, 1.5)


# ---- Welch

@pytest.mark.parametrize("ma,sa,mb,sb,t_range,df_range", [
    (95.65, 0.38, 96.82, 0.18, (13.5, 14.0), (34, 36)),
    (95.65, 0.37, 97.68, 0.13, (25.0, 26.0), (29, 32)),
])
def test_welch_summary_stats(ma, sa, mb, sb, t_range, df_range):
    a, b = ScoreSet.with_summary(ma, sa), ScoreSet.with_summary(mb, sb, seed=1)
    assert a.mean == pytest.approx(ma) and a.sd == pytest.approx(sa)
    res = welch_t(a, b)
    assert t_range[0] <= abs(res.t) <= t_range[1]
    assert df_range[0] <= res.df <= df_range[1]
    assert res.p < 1e-4
    ref = sps.ttest_ind(a.scores, b.scores, equal_var=False)
    assert res.t == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p == pytest.approx(ref.pvalue, rel=1e-8)


def test_welch_closed_form_values():
    res = welch_t(ScoreSet.with_summary(95.65, 0.38), ScoreSet.with_summary(96.82, 0.18))
    assert res.t == pytest.approx(-13.91, abs=0.01)
    assert res.df == pytest.approx(34.25, abs=0.01)
    assert res.cohen_d == pytest.approx(-1.17 / np.sqrt((0.38**2 + 0.18**2) / 2), rel=1e-9)
    half = 1.96 * np.sqrt(50 / 625 + res.cohen_d**2 / 96)
    assert res.ci95_d == pytest.approx((res.cohen_d - half, res.cohen_d + half))


def test_welch_identical():
    a = ScoreSet((90.0, 91.0, 92.5, 89.0))
    res = welch_t(a, a)
    assert res.t == 0.0 and res.p == 1.0 and res.cohen_d == 0.0


def test_welch_zero_variance():
    with pytest.raises(ValueError):
        welch_t(ScoreSet((90.0, 90.0)), ScoreSet((91.0, 91.0)))
    res = welch_t(ScoreSet((90.0, 90.0)), ScoreSet((90.0, 90.0)))
    assert res.t == 0.0 and res.p == 1.0
    with pytest.raises(ValueError):
        welch_t(ScoreSet((90.0,)), ScoreSet((90.0, 91.0)))


@given(st.lists(st.floats(50, 100), min_size=2, max_size=30),
       st.lists(st.floats(50, 100), min_size=2, max_size=30))
def test_welch_antisymmetric(a, b):
    if np.std(a) == 0 and np.std(b) == 0:
        return
    ab, ba = welch_t(a, b), welch_t(b, a)
    assert ab.t == pytest.approx(-ba.t, abs=1e-12)
    assert ab.cohen_d == pytest.approx(-ba.cohen_d, abs=1e-12)
    assert ab.df == pytest.approx(ba.df, abs=1e-12)
    assert ab.p == pytest.approx(ba.p, abs=1e-12)
    assert 0 <= ab.p <= 1 and ab.df > 0


def test_scoreset_validation():
    with pytest.raises(ValueError):
        ScoreSet((101.0,))
    with pytest.raises(ValueError):
        ScoreSet(())


# ---- reports

def _report(scores, seed=0):
    trials = []
    for i, s in enumerate(scores):
        c = ConfusionMatrix(np.array([[8, 2], [1, 9]]))
        trials.append(TrialResult(i, i // 5, i % 5, trial_seed(seed, i // 5, i % 5), 80, 20, c,
                                  float(s), 85.0, 85.0, 0.85, 3, 2))
    return RunReport(trials, 2, seed, 5, len(scores) // 5, {"seed": seed})


def test_trial_seed_distinct_and_stable():
    seeds = {trial_seed(0, r, f) for r in range(5) for f in range(5)}
    assert len(seeds) == 25
    assert trial_seed(0, 1, 2) == trial_seed(0, 1, 2)
    assert trial_seed(0, 1, 2) != trial_seed(1, 1, 2)


def test_report_roundtrip(tmp_path):
    rep = _report(np.linspace(80, 95, 25))
    write_report(rep, tmp_path)
    back = read_report(tmp_path)
    assert scores_csv(back) == scores_csv(rep)
    assert (tmp_path / "scores.csv").read_text().count("\n") == 26
    assert len(list(tmp_path.glob("confusion_*.csv"))) == 25
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["config"] == {"seed": 0} and len(d["seeds"]["trials"]) == 25


def test_read_report_malformed(tmp_path):
    (tmp_path / "report.json").write_text("{not json")
    with pytest.raises(ReportFormatError):
        read_report(tmp_path)
    (tmp_path / "report.json").write_text(json.dumps({"format_version": 1}))
    with pytest.raises(ReportFormatError):
        read_report(tmp_path)


def test_compare_self():
    rep = _report(np.linspace(80, 95, 25))
    cmp = compare(rep, rep)
    assert cmp.result.t == 0.0 and cmp.result.p == 1.0
    assert "t(" in cmp.table and "p = 1.0000" in cmp.table
    lines = cmp.series_csv.strip().split("\n")
    assert lines[0] == "run,trial,repeat,fold,f1_macro"
    assert sum(l.startswith("A,") for l in lines) == 25
    assert sum(l.startswith("B,") for l in lines) == 25
    assert cmp.notes


def test_compare_reference_sets():
    a = _report(ScoreSet.with_summary(95.65, 0.38).scores)
    b = _report(ScoreSet.with_summary(96.82, 0.18, seed=1).scores)
    cmp = compare(a, b)
    assert 13.5 <= abs(cmp.result.t) <= 14.0
    assert "95.65" in cmp.table and "96.82" in cmp.table


def test_compare_structure_mismatch():
    with pytest.raises(ValueError, match="structure"):
        compare(_report(np.full(25, 90.0)), _report(np.full(20, 90.0)))


# ---- experiment runner (tiny)

def _separable(n=90, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 3
    X = rng.normal(0, 0.2, (n, 8, 6)) + y[:, None, None] / 2
    return X.astype(np.float32), y


TINY = ModelConfig(conv_filters=(2, 2), lstm_units=(5, 4), dense_units=4)


def test_run_features_structure_and_determinism():
    X, y = _separable()
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=3, patience=3)
    a = run_features(X, y, 3, TINY, cfg, k=3, repeats=2, seed=5)
    b = run_features(X, y, 3, TINY, cfg, k=3, repeats=2, seed=5)
    assert len(a.trials) == 6
    assert [(t.repeat, t.fold) for t in a.trials] == [(r, f) for r in range(2) for f in range(3)]
    assert scores_csv(a) == scores_csv(b)
    assert all(t.confusion.total == t.n_test for t in a.trials)
    assert sum(t.n_test for t in a.trials[:3]) == 90


def test_run_features_parallel_matches_serial():
    X, y = _separable()
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=2, patience=2)
    a = run_features(X, y, 3, TINY, cfg, k=3, repeats=1, seed=2, workers=1)
    b = run_features(X, y, 3, TINY, cfg, k=3, repeats=1, seed=2, workers=2)
    assert scores_csv(a) == scores_csv(b)


def test_higher_snr_run_scores_higher():
    g = Geometry("small", 8, 1000, 100.0)
    model = ModelConfig(conv_filters=(4, 4), lstm_units=(8, 8), dense_units=8)
    tcfg = TrainConfig(learning_rate=3e-3, batch_size=32, max_epochs=8, patience=8)
    runs = []
    for snr in (0.0, -25.0):
        es = synth_generate(g, 3, 20, seed=5, cfg=SynthConfig(snr_db=snr))
        runs.append(run_experiment(es, LabelScheme(es.scheme), StftPlan.from_seconds(g.fs), model,
                                   tcfg, k=3, repeats=2, seed=1))
    cmp = compare(*runs, name_a="easy", name_b="hard")
    assert cmp.result.mean_a > cmp.result.mean_b
    assert cmp.result.p < 0.05
    assert "p < 0.0001" in cmp.table
