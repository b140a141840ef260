import numpy as np
import pytest

from greenladder import SyntheticWorldParams, synth_generate
from greenladder.analysis import (
    MissingCell,
    ZeroVariance,
    anchor_ranking,
    anchor_sweep,
    default_anchor_candidates,
    pairwise_correlation,
)
from greenladder.core import (
    ConfigSpace,
    Dataset,
    MeasurementRecord,
    Representation,
    Resolution,
    default_space,
)

SPACE = ConfigSpace.of([360, 1080], [17, 47])


def rep(h, qp):
    return Representation(Resolution.from_height(h), qp)


def dataset_from_times(times_by_config, n_videos):
    """times_by_config: {(h, qp): [t per video]}."""
    records = []
    for i in range(n_videos):
        for (h, qp), times in times_by_config.items():
            records.append(
                MeasurementRecord(
                    video_id=f"clip{i:02d}",
                    rep=rep(h, qp),
                    enc_time=times[i],
                    enc_energy=times[i] / 100.0,
                    dec_time=0.1,
                    dec_energy=0.001,
                    bitrate=100.0,
                    psnr=30.0,
                    vmaf=50.0,
                )
            )
    return Dataset(records=tuple(records))


class TestPairwiseCorrelation:
    def test_diagonal_is_exactly_one_and_symmetric(self):
        ds = synth_generate(SyntheticWorldParams(n_videos=8, seed=1), SPACE)
        cm = pairwise_correlation(ds, SPACE)
        assert np.array_equal(np.diag(cm.values), np.ones(len(cm.configs)))
        assert np.array_equal(cm.values, cm.values.T)
        assert np.all(cm.values <= 1.0 + 1e-12) and np.all(cm.values >= -1.0 - 1e-12)

    def test_proportional_configs_correlate_perfectly(self):
        times = {(360, 47): [1.0, 2.0, 5.0], (1080, 17): [3.0, 6.0, 15.0],
                 (360, 17): [2.0, 4.0, 10.0], (1080, 47): [1.5, 3.0, 7.5]}
        ds = dataset_from_times(times, 3)
        cm = pairwise_correlation(ds, SPACE)
        assert np.allclose(cm.values, 1.0, atol=1e-12)

    def test_hand_computed_pearson(self):
        ta = [1.0, 2.0, 4.0]
        tb = [2.0, 1.0, 3.0]
        times = {(360, 47): ta, (360, 17): tb,
                 (1080, 17): [5.0, 6.0, 7.0], (1080, 47): [4.0, 5.0, 6.0]}
        ds = dataset_from_times(times, 3)
        cm = pairwise_correlation(ds, SPACE)
        a, b = np.asarray(ta), np.asarray(tb)
        want = float(np.sum((a - a.mean()) * (b - b.mean()))
                     / np.sqrt(np.sum((a - a.mean()) ** 2) * np.sum((b - b.mean()) ** 2)))
        i = cm.configs.index(rep(360, 47))
        j = cm.configs.index(rep(360, 17))
        assert cm.values[i, j] == pytest.approx(want, abs=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        base = {(h, qp): list(rng.uniform(1, 50, 5))
                for h in (360, 1080) for qp in (17, 47)}
        ds = pairwise_correlation(dataset_from_times(base, 5), SPACE)
        scaled = {k: [3.0 * t + 7.0 for t in v] if k == (360, 47) else v
                  for k, v in base.items()}
        ds2 = pairwise_correlation(dataset_from_times(scaled, 5), SPACE)
        assert np.allclose(ds.values, ds2.values, atol=1e-12)

    def test_missing_cell(self):
        ds = dataset_from_times({(360, 47): [1.0, 2.0]}, 2)
        with pytest.raises(MissingCell):
            pairwise_correlation(ds, SPACE)

    def test_zero_variance_names_config(self):
        times = {(360, 47): [1.0, 1.0, 1.0], (360, 17): [2.0, 3.0, 4.0],
                 (1080, 17): [5.0, 6.0, 7.0], (1080, 47): [4.0, 5.0, 6.0]}
        ds = dataset_from_times(times, 3)
        with pytest.raises(ZeroVariance) as err:
            pairwise_correlation(ds, SPACE)
        assert err.value.rep == rep(360, 47)


class TestAnchorRanking:
    def test_two_config_mean_is_the_off_diagonal(self):
        space2 = ConfigSpace.of([360], [17, 47])
        times = {(360, 47): [1.0, 2.0, 4.0], (360, 17): [2.0, 1.0, 3.0]}
        ds = dataset_from_times(times, 3)
        cm = pairwise_correlation(ds, space2)
        rows = anchor_ranking(cm, ds)
        assert rows[0][1] == pytest.approx(cm.values[0, 1])
        assert rows[1][1] == pytest.approx(cm.values[0, 1])

    def test_sorted_ascending_by_mean_time(self):
        ds = synth_generate(SyntheticWorldParams(n_videos=6, seed=3), SPACE)
        cm = pairwise_correlation(ds, SPACE)
        rows = anchor_ranking(cm, ds)
        mean_times = [mt for _, _, mt in rows]
        assert mean_times == sorted(mean_times)
        assert rows[0][0] == rep(360, 47)

    def test_noiseless_world_collapses_to_rank_one(self):
        # Without noise every config's time is proportional to complexity.
        ds = synth_generate(SyntheticWorldParams(n_videos=6, noise_sd=0.0, seed=4), SPACE)
        cm = pairwise_correlation(ds, SPACE)
        assert np.allclose(cm.values, 1.0, atol=1e-9)
        for _, mean_corr, _ in anchor_ranking(cm, ds):
            assert mean_corr == pytest.approx(1.0, abs=1e-9)


class TestAnchorSweep:
    def test_two_candidates_two_finite_rows(self):
        ds = synth_generate(SyntheticWorldParams(n_videos=8, seed=5), SPACE)
        rows = anchor_sweep(ds, [rep(360, 47), rep(1080, 17)], family="linear", seed=0)
        assert len(rows) == 2
        assert all(np.isfinite(r.r2) for r in rows)
        assert all(r.mean_anchor_time > 0 for r in rows)

    def test_noiseless_world_every_candidate_is_accurate(self):
        space = default_space()
        ds = synth_generate(SyntheticWorldParams(n_videos=24, noise_sd=0.0, seed=6), space)
        candidates = default_anchor_candidates(space)
        rows = anchor_sweep(ds, candidates, family="gbm_leafwise", seed=2)
        assert len(rows) == 6
        for row in rows:
            assert row.r2 > 0.99

    def test_cheapest_candidate_is_min_res_max_qp(self):
        space = default_space()
        ds = synth_generate(SyntheticWorldParams(n_videos=10, seed=7), space)
        candidates = default_anchor_candidates(space)
        rows = anchor_sweep(ds, candidates, family="linear", seed=1)
        cheapest = min(rows, key=lambda r: r.mean_anchor_time)
        assert cheapest.anchor == rep(360, 47)

    def test_default_candidates_match_low_mid_high_pattern(self):
        space = default_space()
        candidates = default_anchor_candidates(space)
        assert [(c.height, c.qp) for c in candidates] == [
            (360, 17), (360, 47), (1080, 17), (1080, 47), (2160, 17), (2160, 47),
        ]

    def test_missing_candidate_row(self):
        ds = synth_generate(SyntheticWorldParams(n_videos=8, seed=8), SPACE)
        with pytest.raises(MissingCell):
            anchor_sweep(ds, [rep(720, 32)], family="linear", seed=0)
