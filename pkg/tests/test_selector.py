import json

import numpy as np
import pytest

from gridgen import brute_force_select, random_grid

from greenladder import SyntheticWorldParams, synth_generate
from greenladder.core import ConfigSpace, InvariantViolation, Representation, Resolution, anchor_of, split_by_video
from greenladder.models import ModelSpec, fit, features_for_target, predict
from greenladder.selector import (
    EmptyGrid,
    MissingGroundTruth,
    MissingModel,
    PredictionGrid,
    Rho,
    build_grid,
    evaluate_policy,
    make_cell,
    select,
)

SPACE = ConfigSpace.of([360, 720, 1080], [17, 32, 47])

CHEAP = {"n_trees": [120], "d_max": [8], "learning_rate": [0.1], "num_leaves": [64]}


def rep(h, qp):
    return Representation(Resolution.from_height(h), qp)


def trained_models(ds, space, targets=("enc_energy", "dec_energy", "vmaf", "psnr")):
    models = {}
    for target in targets:
        X, y = features_for_target(ds, space, target)
        spec = ModelSpec("gbm_leafwise",
                         {"n_trees": 120, "d_max": 8, "learning_rate": 0.1,
                          "num_leaves": 64}, seed=0)
        models[target] = fit(spec, X, y, target=target)
    return models


class TestRho:
    def test_bounds(self):
        Rho(0.0)
        Rho(1.0)
        with pytest.raises(InvariantViolation):
            Rho(1.5)
        with pytest.raises(InvariantViolation):
            Rho(-0.1)


class TestSelect:
    def test_hand_case_three_cells(self):
        cells = {
            rep(360, 40): make_cell(0.5, 0.5, 90.0),
            rep(720, 40): make_cell(1.0, 1.0, 95.0),
            rep(1080, 40): make_cell(2.0, 2.0, 100.0),
        }
        result = select(PredictionGrid(video_id="v", cells=cells), 0.05)
        assert result.q_max_hat == 100.0
        assert sorted(r.height for r in result.feasible) == [720, 1080]
        assert result.chosen == rep(720, 40)
        assert result.predicted.e_total_hat == 2.0

    def test_rho_zero_returns_quality_maximal_cell(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            grid = random_grid(rng)
            result = select(grid, 0.0)
            q_max = max(c.q_hat for c in grid.cells.values())
            assert grid.cells[result.chosen].q_hat == q_max

    def test_rho_one_returns_energy_minimal_cell(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            grid = random_grid(rng)
            result = select(grid, 1.0)
            e_min = min(c.e_total_hat for c in grid.cells.values())
            assert grid.cells[result.chosen].e_total_hat == e_min

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            grid = random_grid(rng)
            rho = float(rng.choice([0.0, 0.03, 0.05, 0.1, 0.5, 1.0]))
            result = select(grid, rho)
            chosen, q_max, feasible = brute_force_select(grid, rho)
            assert result.chosen == chosen
            assert result.q_max_hat == q_max
            assert set(result.feasible) == set(feasible)

    def test_feasible_set_nested_in_rho(self):
        rng = np.random.default_rng(3)
        rhos = [0.0, 0.05, 0.1, 0.3, 0.5, 0.7, 1.0]
        for _ in range(50):
            grid = random_grid(rng)
            previous = None
            last_energy = None
            for rho in rhos:
                result = select(grid, rho)
                current = set(result.feasible)
                if previous is not None:
                    assert previous <= current
                    assert result.predicted.e_total_hat <= last_energy + 1e-15
                previous = current
                last_energy = result.predicted.e_total_hat

    def test_quality_scaling_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            grid = random_grid(rng)
            a = float(rng.uniform(0.1, 4.0))
            scaled = PredictionGrid(
                video_id=grid.video_id,
                cells={r: make_cell(c.e_enc_hat, c.e_dec_hat, a * c.q_hat)
                       for r, c in grid.cells.items()},
            )
            rho = float(rng.choice([0.0, 0.05, 0.3, 1.0]))
            assert select(grid, rho).chosen == select(scaled, rho).chosen
            assert set(select(grid, rho).feasible) == set(select(scaled, rho).feasible)

    def test_max_quality_cell_always_feasible(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            grid = random_grid(rng)
            rho = float(rng.uniform(0, 1))
            result = select(grid, rho)
            q_max = max(c.q_hat for c in grid.cells.values())
            assert any(grid.cells[r].q_hat == q_max for r in result.feasible)

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            select(PredictionGrid(video_id="v", cells={}), 0.0)

    def test_chosen_in_feasible(self):
        rng = np.random.default_rng(6)
        grid = random_grid(rng)
        result = select(grid, 0.2)
        assert result.chosen in result.feasible


class TestBuildGrid:
    def setup_method(self):
        params = SyntheticWorldParams(n_videos=6, noise_sd=0.0, seed=3)
        self.ds = synth_generate(params, SPACE)
        self.models = trained_models(self.ds, SPACE)

    def test_covers_full_ladder(self):
        anchor = anchor_of(self.ds, "v0000", SPACE)
        grid = build_grid(self.models, anchor, SPACE)
        assert len(grid.cells) == SPACE.size == 9
        assert set(grid.cells) == set(SPACE.grid())

    def test_totals_are_definitional(self):
        anchor = anchor_of(self.ds, "v0001", SPACE)
        grid = build_grid(self.models, anchor, SPACE)
        for cell in grid.cells.values():
            assert cell.e_total_hat == cell.e_enc_hat + cell.e_dec_hat

    def test_one_by_one_space_equals_direct_predict(self):
        space1 = ConfigSpace.of([360], [47])
        anchor = anchor_of(self.ds, "v0002", SPACE)
        grid = build_grid(self.models, anchor, space1)
        from greenladder.models import FeatureVector

        direct = predict(
            self.models["enc_energy"],
            [FeatureVector(anchor_value=anchor.enc_time, height=360, qp=47)],
        )[0]
        assert grid.cells[rep(360, 47)].e_enc_hat == pytest.approx(direct, rel=1e-12)

    def test_missing_model(self):
        anchor = anchor_of(self.ds, "v0000", SPACE)
        with pytest.raises(MissingModel) as err:
            build_grid({"enc_energy": self.models["enc_energy"]}, anchor, SPACE)
        assert err.value.target == "dec_energy"

    def test_psnr_metric_selects_psnr_model(self):
        anchor = anchor_of(self.ds, "v0000", SPACE)
        grid = build_grid(self.models, anchor, SPACE, quality_metric="psnr")
        assert all(c.q_hat >= 0 for c in grid.cells.values())

    def test_energy_weights_extension(self):
        anchor = anchor_of(self.ds, "v0000", SPACE)
        weighted = build_grid(self.models, anchor, SPACE, weights=(2.0, 0.5))
        plain = build_grid(self.models, anchor, SPACE)
        for r in plain.cells:
            assert weighted.cells[r].e_total_hat == pytest.approx(
                2.0 * plain.cells[r].e_enc_hat + 0.5 * plain.cells[r].e_dec_hat, rel=1e-12
            )


class TestEvaluatePolicy:
    def setup_method(self):
        params = SyntheticWorldParams(n_videos=14, noise_sd=0.02, seed=9)
        ds = synth_generate(params, SPACE)
        self.train, self.test = split_by_video(ds, 0.6, seed=1)
        self.models = trained_models(self.train, SPACE)

    def test_rho_zero_row_is_self_baseline(self):
        reports = evaluate_policy(self.test, self.models, SPACE, [0.0])
        row = reports[0]
        assert row.rho == 0.0
        assert row.vmaf_drop == 0.0
        assert row.psnr_drop == 0.0
        assert row.enc_savings_pct == 0.0
        assert row.dec_savings_pct == 0.0

    def test_predicted_energy_non_increasing_in_rho(self):
        rhos = [0.0, 0.05, 0.1, 0.3, 1.0]
        for video_id in self.test.video_ids:
            anchor = anchor_of(self.test, video_id, SPACE)
            grid = build_grid(self.models, anchor, SPACE)
            energies = [select(grid, r).predicted.e_total_hat for r in rhos]
            assert all(a >= b - 1e-12 for a, b in zip(energies, energies[1:]))

    def test_savings_close_to_ground_truth_oracle_policy(self):
        # Oracle: per-video selection on true (not predicted) values.
        rho = 0.3
        reports = evaluate_policy(self.test, self.models, SPACE, [rho])
        oracle_savings = []
        for video_id in self.test.video_ids:
            cells = {
                r: make_cell(
                    self.test.record_at(video_id, r).enc_energy,
                    self.test.record_at(video_id, r).dec_energy,
                    self.test.record_at(video_id, r).vmaf,
                )
                for r in SPACE.grid()
            }
            truth_grid = PredictionGrid(video_id=video_id, cells=cells)
            base = select(truth_grid, 0.0).chosen
            green = select(truth_grid, rho).chosen
            base_e = self.test.record_at(video_id, base).enc_energy
            green_e = self.test.record_at(video_id, green).enc_energy
            oracle_savings.append(100.0 * (base_e - green_e) / base_e)
        assert reports[0].enc_savings_pct == pytest.approx(
            float(np.mean(oracle_savings)), abs=10.0
        )

    def test_missing_ground_truth(self):
        # Anchor-only ladders: rho = 0 picks a high-quality cell that has no
        # ground-truth row.
        from greenladder.core import Dataset

        anchor_only = Dataset(records=tuple(
            r for r in self.test.records if r.rep == SPACE.anchor_rep
        ))
        with pytest.raises(MissingGroundTruth):
            evaluate_policy(anchor_only, self.models, SPACE, [0.0])

    def test_selection_result_serializes(self):
        anchor = anchor_of(self.test, self.test.video_ids[0], SPACE)
        grid = build_grid(self.models, anchor, SPACE)
        doc = select(grid, 0.05).to_dict()
        text = json.dumps(doc)
        assert "chosen" in doc and "feasible" in doc
        assert json.loads(text) == doc
