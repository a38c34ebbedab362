"""End-to-end tests for the command-line interface.

Everything runs in-process through ``main(argv)`` against per-test temp
directories, except one subprocess check of the installed console script.
"""

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

import pgtables
from pgtables import (
    EMConfig,
    NIWHyper,
    NormalPrior,
    PosteriorChain,
    ZPseudoCounts,
    em_fit,
    skene_wakefield_table,
    summarize,
)
from pgtables.cli import main
from pgtables.exceptions import NumericalError
from pgtables.tables import TwoArmTable, save_two_arm_csv


def small_table():
    successes = [[3, 5], [7, 2], [4, 4]]
    totals = [[10, 12], [11, 9], [8, 10]]
    return TwoArmTable(successes, totals, labels=["a", "b", "c"])


def write_table(tmp_path, table=None, name="table.csv"):
    path = tmp_path / name
    save_two_arm_csv(table if table is not None else small_table(), path)
    return path


def write_prior(tmp_path, spec, name="prior.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec), encoding="utf-8")
    return path


def write_multinomial_csv(tmp_path, name="multi.csv"):
    rows = [
        "center,treatment,outcome,count",
        "c1,t1,good,12", "c1,t1,ok,5", "c1,t1,bad,7",
        "c1,t2,good,3", "c1,t2,ok,9", "c1,t2,bad,6",
        "c2,t1,good,8", "c2,t1,ok,8", "c2,t1,bad,8",
        "c2,t2,good,10", "c2,t2,ok,2", "c2,t2,bad,12",
    ]
    path = tmp_path / name
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


NORMAL_SPEC = {"type": "normal", "mu": [0.0, 0.0], "sigma": [[4.0, 0.0], [0.0, 4.0]]}
MATRIX_SPEC = {
    "type": "matrix-normal",
    "M": [[0.0, 0.0], [0.0, 0.0]],
    "Sigma_R": [[1.0, 0.0], [0.0, 1.0]],
    "Sigma_C": [[1.0, 0.0], [0.0, 1.0]],
}


class TestFitEm:
    def test_report_and_manifest_contents(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        argv = ["fit", "--method", "em", "--data", str(data), "--prior", str(prior), "--out", str(out)]
        assert main(argv) == 0

        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["method"] == "em"
        assert report["center_labels"] == ["a", "b", "c"]
        assert report["arms"] == ["treatment", "control"]
        assert np.asarray(report["psi"]).shape == (3, 2)
        assert report["converged"] is True
        assert np.isfinite(report["log_posterior"])

        manifest_path = tmp_path / "fit_manifest.json"
        assert str(manifest_path) == report["manifest"]
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert manifest["command"] == ["pgtables"] + argv
        assert manifest["inputs"] == {"data": str(data), "prior": str(prior)}
        assert manifest["config"]["method"] == "em"
        assert manifest["outputs"] == [str(out)]
        assert manifest["version"] == pgtables.__version__
        assert manifest["duration_seconds"] > 0

    def test_psi_matches_library_call(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        assert main(["fit", "--method", "em", "--data", str(data), "--prior", str(prior), "--out", str(out)]) == 0
        report = json.loads(out.read_text(encoding="utf-8"))

        state = em_fit(small_table(), NormalPrior((0.0, 0.0), ((4.0, 0.0), (0.0, 4.0))))
        np.testing.assert_allclose(report["psi"], state.psi, atol=1e-12)
        assert report["n_iter"] == state.n_iter

    def test_z_prior_runs_against_diffuse_normal(self, tmp_path):
        table = TwoArmTable([[0, 3]], [[12, 10]], labels=["only"])
        data = write_table(tmp_path, table=table)
        prior = write_prior(tmp_path, {"type": "z", "a": 0.5, "b": 0.5})
        out = tmp_path / "fit.json"
        assert main(["fit", "--method", "em", "--data", str(data), "--prior", str(prior), "--out", str(out)]) == 0
        report = json.loads(out.read_text(encoding="utf-8"))

        diffuse = NormalPrior((0.0, 0.0), ((1e6, 0.0), (0.0, 1e6)))
        state = em_fit(table, diffuse, z=ZPseudoCounts(0.5, 0.5))
        np.testing.assert_allclose(report["psi"], state.psi, atol=1e-10)

    def test_custom_manifest_path(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        manifest = tmp_path / "runs" / "m.json"
        manifest.parent.mkdir()
        argv = [
            "fit", "--method", "em", "--data", str(data), "--prior", str(prior),
            "--out", str(out), "--manifest", str(manifest),
        ]
        assert main(argv) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["manifest"] == str(manifest)
        assert manifest.exists()

    def test_niw_prior_rejected_for_em(self, tmp_path, capsys):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, {"type": "niw", "d": 10, "B": [[1.0, 0.0], [0.0, 1.0]]})
        rc = main(["fit", "--method", "em", "--data", str(data), "--prior", str(prior)])
        assert rc == 2
        assert "holds (mu, sigma) fixed" in capsys.readouterr().err

    def test_update_hyper_rejected_for_em(self, tmp_path, capsys):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main([
            "fit", "--method", "em", "--data", str(data), "--prior", str(prior),
            "--update-hyper", "mu_only",
        ])
        assert rc == 2
        assert "use --method ecm" in capsys.readouterr().err


class TestFitEcm:
    def test_niw_prior_becomes_penalty(self, tmp_path):
        from pgtables.em import ecm_fit

        data = write_table(tmp_path)
        hyper = {"type": "niw", "d": 10, "B": [[7.0, 0.0], [0.0, 7.0]]}
        prior = write_prior(tmp_path, hyper)
        out = tmp_path / "fit.json"
        assert main(["fit", "--method", "ecm", "--data", str(data), "--prior", str(prior), "--out", str(out)]) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["method"] == "ecm"
        assert report["converged"] is True

        niw = NIWHyper(10, ((7.0, 0.0), (0.0, 7.0)))
        start = NormalPrior((0.0, 0.0), niw.B / (niw.d - 3.0))
        state = ecm_fit(
            small_table(), start, config=EMConfig(update_hyper="mu_and_sigma"), niw_penalty=niw
        )
        np.testing.assert_allclose(report["psi"], state.psi, atol=1e-12)
        np.testing.assert_allclose(report["sigma"], state.sigma, atol=1e-12)

    def test_mu_only_update_with_normal_prior(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        rc = main([
            "fit", "--method", "ecm", "--data", str(data), "--prior", str(prior),
            "--update-hyper", "mu_only", "--out", str(out),
        ])
        assert rc == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        psi = np.asarray(report["psi"])
        np.testing.assert_allclose(report["mu"], psi.mean(axis=0), atol=1e-8)

    def test_update_none_rejected_for_ecm(self, tmp_path, capsys):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main([
            "fit", "--method", "ecm", "--data", str(data), "--prior", str(prior),
            "--update-hyper", "none",
        ])
        assert rc == 2
        assert "use --method em" in capsys.readouterr().err


class TestFitGibbs:
    def test_example_report_shape(self, tmp_path):
        out = tmp_path / "fit.json"
        argv = [
            "fit", "--example", "skene-wakefield", "--method", "gibbs",
            "--iters", "400", "--burnin", "100", "--seed", "7", "--out", str(out),
        ]
        assert main(argv) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["method"] == "gibbs"
        assert report["n_chains"] == 1
        assert report["n_draws"] == 300
        assert len(report["center_labels"]) == 8
        assert 0.0 <= report["p_mu1_gt_mu2"] <= 1.0
        # 16 cell log-odds plus the population mean and covariance scalars
        assert len(report["scalars"]) == 16 + 5
        assert {"mean", "sd", "q2.5", "q97.5"} <= set(report["scalars"]["mu_1"])

        manifest = json.loads((tmp_path / "fit_manifest.json").read_text(encoding="utf-8"))
        assert manifest["inputs"]["data"] == "embedded:skene-wakefield"
        assert manifest["inputs"]["prior"] == "embedded:skene-wakefield"
        assert manifest["config"]["seed"] == 7

    def test_save_draws_csv(self, tmp_path):
        out = tmp_path / "fit.json"
        draws = tmp_path / "draws.csv"
        argv = [
            "fit", "--example", "skene-wakefield", "--method", "gibbs",
            "--iters", "300", "--burnin", "100", "--seed", "3",
            "--out", str(out), "--save-draws", str(draws),
        ]
        assert main(argv) == 0
        first = draws.read_text(encoding="utf-8").splitlines()[0]
        assert first == f"# manifest: {tmp_path / 'fit_manifest.json'}"
        chain = PosteriorChain.from_csv(draws)
        assert len(chain) == 200
        assert chain.labels == skene_wakefield_table().labels

        manifest = json.loads((tmp_path / "fit_manifest.json").read_text(encoding="utf-8"))
        assert manifest["outputs"] == [str(out), str(draws)]

    def test_two_chains_concatenate(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        draws = tmp_path / "draws.csv"
        rc = main([
            "fit", "--method", "gibbs", "--data", str(data), "--prior", str(prior),
            "--iters", "200", "--burnin", "50", "--seed", "11", "--chains", "2",
            "--out", str(out), "--save-draws", str(draws),
        ])
        assert rc == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["n_chains"] == 2
        assert report["n_draws"] == 300
        chain = PosteriorChain.from_csv(draws)
        assert sorted(set(chain.chain_ids.tolist())) == [1, 2]

    def test_second_chain_differs_only_by_seed(self, tmp_path):
        from pgtables import GibbsConfig, run_gibbs

        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        draws = tmp_path / "draws.csv"
        rc = main([
            "fit", "--method", "gibbs", "--data", str(data), "--prior", str(prior),
            "--iters", "120", "--burnin", "40", "--seed", "5", "--chains", "2",
            "--out", str(tmp_path / "fit.json"), "--save-draws", str(draws),
        ])
        assert rc == 0
        chain = PosteriorChain.from_csv(draws)
        second = run_gibbs(
            small_table(),
            NormalPrior((0.0, 0.0), ((4.0, 0.0), (0.0, 4.0))),
            config=GibbsConfig(iters=120, burnin=40, seed=6),
        )
        np.testing.assert_allclose(chain.psi[chain.chain_ids == 2], second.psi, atol=1e-12)

    def test_byte_identical_rerun(self, tmp_path):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        out = tmp_path / "fit.json"
        draws = tmp_path / "draws.csv"
        argv = [
            "fit", "--method", "gibbs", "--data", str(data), "--prior", str(prior),
            "--iters", "250", "--burnin", "50", "--seed", "21",
            "--out", str(out), "--save-draws", str(draws),
        ]
        assert main(argv) == 0
        first_out = out.read_bytes()
        first_draws = draws.read_bytes()
        assert main(argv) == 0
        assert out.read_bytes() == first_out
        assert draws.read_bytes() == first_draws

    def test_matrix_normal_prior_rejected(self, tmp_path, capsys):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, MATRIX_SPEC)
        rc = main(["fit", "--method", "gibbs", "--data", str(data), "--prior", str(prior)])
        assert rc == 2
        assert "matrix-normal" in capsys.readouterr().err


class TestFitMultinomial:
    def test_fit_report(self, tmp_path):
        data = write_multinomial_csv(tmp_path)
        prior = write_prior(tmp_path, MATRIX_SPEC)
        out = tmp_path / "fit.json"
        draws = tmp_path / "draws.csv"
        rc = main([
            "fit", "--method", "multinomial-gibbs", "--data", str(data), "--prior", str(prior),
            "--iters", "200", "--burnin", "50", "--seed", "2",
            "--out", str(out), "--save-draws", str(draws),
        ])
        assert rc == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["method"] == "multinomial-gibbs"
        assert report["n_draws"] == 150
        assert report["center_labels"] == ["c1", "c2"]
        assert report["treatment_labels"] == ["t1", "t2"]
        assert report["outcome_labels"] == ["good", "ok", "bad"]
        probs = np.asarray(report["mean_probs"])
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)
        assert draws.exists()

    def test_baseline_flag_reorders_outcomes(self, tmp_path):
        data = write_multinomial_csv(tmp_path)
        prior = write_prior(tmp_path, MATRIX_SPEC)
        out = tmp_path / "fit.json"
        rc = main([
            "fit", "--method", "multinomial-gibbs", "--data", str(data), "--prior", str(prior),
            "--baseline", "ok", "--iters", "100", "--burnin", "20", "--out", str(out),
        ])
        assert rc == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["outcome_labels"][-1] == "ok"

    def test_requires_matrix_normal_prior(self, tmp_path, capsys):
        data = write_multinomial_csv(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main(["fit", "--method", "multinomial-gibbs", "--data", str(data), "--prior", str(prior)])
        assert rc == 2
        assert "matrix-normal" in capsys.readouterr().err

    def test_chains_flag_rejected(self, tmp_path, capsys):
        data = write_multinomial_csv(tmp_path)
        prior = write_prior(tmp_path, MATRIX_SPEC)
        rc = main([
            "fit", "--method", "multinomial-gibbs", "--data", str(data), "--prior", str(prior),
            "--chains", "2",
        ])
        assert rc == 2
        assert "--chains" in capsys.readouterr().err


class TestInputValidation:
    def test_example_and_data_conflict(self, tmp_path, capsys):
        data = write_table(tmp_path)
        rc = main([
            "fit", "--method", "em", "--example", "skene-wakefield", "--data", str(data),
        ])
        assert rc == 2
        assert "not both" in capsys.readouterr().err

    def test_data_without_prior(self, tmp_path, capsys):
        data = write_table(tmp_path)
        rc = main(["fit", "--method", "em", "--data", str(data)])
        assert rc == 2
        assert "--data and --prior are required" in capsys.readouterr().err

    def test_missing_data_file(self, tmp_path, capsys):
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main([
            "fit", "--method", "em", "--data", str(tmp_path / "nope.csv"), "--prior", str(prior),
        ])
        assert rc == 2
        capsys.readouterr()

    def test_malformed_table_csv(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("center,arm,successes,total\nA,treatment,5,3\n", encoding="utf-8")
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main(["fit", "--method", "em", "--data", str(bad), "--prior", str(prior)])
        assert rc == 2
        assert "line 2" in capsys.readouterr().err

    def test_malformed_prior_json(self, tmp_path, capsys):
        data = write_table(tmp_path)
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        rc = main(["fit", "--method", "em", "--data", str(data), "--prior", str(bad)])
        assert rc == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_unknown_prior_type(self, tmp_path, capsys):
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, {"type": "bogus"})
        rc = main(["fit", "--method", "em", "--data", str(data), "--prior", str(prior)])
        assert rc == 2
        assert "unknown prior type" in capsys.readouterr().err


class TestNumericalFailureExit:
    def test_numerical_error_exits_3(self, tmp_path, monkeypatch, capsys):
        import pgtables.cli as cli_mod

        def boom(*args, **kwargs):
            raise NumericalError("omega update diverged")

        monkeypatch.setattr(cli_mod, "run_gibbs", boom)
        rc = main([
            "fit", "--example", "skene-wakefield", "--method", "gibbs",
            "--out", str(tmp_path / "fit.json"),
        ])
        assert rc == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_linalg_error_exits_3_not_2(self, tmp_path, monkeypatch, capsys):
        # LinAlgError subclasses ValueError, so the order of except clauses matters
        import pgtables.cli as cli_mod

        def boom(*args, **kwargs):
            raise np.linalg.LinAlgError("matrix is singular")

        monkeypatch.setattr(cli_mod, "em_fit", boom)
        data = write_table(tmp_path)
        prior = write_prior(tmp_path, NORMAL_SPEC)
        rc = main([
            "fit", "--method", "em", "--data", str(data), "--prior", str(prior),
            "--out", str(tmp_path / "fit.json"),
        ])
        assert rc == 3
        assert "numerical failure" in capsys.readouterr().err


class TestPgSample:
    def test_zero_shape_is_degenerate_at_zero(self, capsys):
        assert main(["pg-sample", "--a", "0", "--c", "1.5", "--n", "5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[:5] == ["0.0"] * 5
        assert lines[5].startswith("# sample_mean=0.0 pg_mean=0.0")

    def test_seed_reproducible(self, capsys):
        assert main(["pg-sample", "--a", "2", "--c", "1", "--n", "4", "--seed", "9"]) == 0
        first = capsys.readouterr().out
        assert main(["pg-sample", "--a", "2", "--c", "1", "--n", "4", "--seed", "9"]) == 0
        assert capsys.readouterr().out == first
        assert main(["pg-sample", "--a", "2", "--c", "1", "--n", "4", "--seed", "10"]) == 0
        assert capsys.readouterr().out != first

    def test_sample_mean_tracks_exact_mean(self, capsys):
        rc = main(["pg-sample", "--a", "1", "--c", "0", "--n", "100000", "--seed", "20260825"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        values = np.array([float(v) for v in lines[:-1]])
        assert values.shape == (100000,)
        assert 0.245 < values.mean() < 0.255
        assert "pg_mean=0.25" in lines[-1]

    def test_truncation_flag_changes_draws(self, capsys):
        assert main(["pg-sample", "--a", "1", "--c", "0", "--n", "3", "--seed", "4"]) == 0
        full = capsys.readouterr().out
        assert main(["pg-sample", "--a", "1", "--c", "0", "--n", "3", "--seed", "4", "--trunc-k", "1"]) == 0
        short = capsys.readouterr().out
        assert full != short

    def test_nonpositive_n_rejected(self, capsys):
        assert main(["pg-sample", "--a", "1", "--c", "0", "--n", "0"]) == 2
        assert "--n must be at least 1" in capsys.readouterr().err

    def test_negative_shape_rejected(self, capsys):
        assert main(["pg-sample", "--a", "-1", "--c", "0", "--n", "2"]) == 2
        capsys.readouterr()


class TestSummarize:
    @pytest.fixture()
    def fitted(self, tmp_path):
        """Gibbs fit of the embedded table with saved draws plus its CSV form."""
        data = tmp_path / "sw.csv"
        save_two_arm_csv(skene_wakefield_table(), data)
        draws = tmp_path / "draws.csv"
        rc = main([
            "fit", "--example", "skene-wakefield", "--method", "gibbs",
            "--iters", "1400", "--burnin", "200", "--seed", "13",
            "--out", str(tmp_path / "fit.json"), "--save-draws", str(draws),
        ])
        assert rc == 0
        return data, draws

    def test_summary_matches_in_process_summarize(self, tmp_path, fitted):
        data, draws = fitted
        out_summary = tmp_path / "summary.json"
        out_plot = tmp_path / "plot.csv"
        rc = main([
            "summarize", "--draws", str(draws), "--data", str(data),
            "--out-summary", str(out_summary), "--out-plot", str(out_plot),
        ])
        assert rc == 0
        payload = json.loads(out_summary.read_text(encoding="utf-8"))
        expected = summarize(PosteriorChain.from_csv(draws)).to_dict()
        assert payload["n_draws"] == expected["n_draws"]
        assert payload["p_mu1_gt_mu2"] == expected["p_mu1_gt_mu2"]
        assert payload["scalars"] == expected["scalars"]

    def test_plot_csv_layout_and_infinite_mles(self, tmp_path, fitted):
        data, draws = fitted
        out_plot = tmp_path / "plot.csv"
        rc = main([
            "summarize", "--draws", str(draws), "--data", str(data),
            "--out-summary", str(tmp_path / "summary.json"), "--out-plot", str(out_plot),
        ])
        assert rc == 0
        lines = out_plot.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# manifest: ")
        assert lines[1] == "param,center,arm,mle,mean,q2.5,q97.5"
        rows = [line.split(",") for line in lines[2:]]
        assert len(rows) == 16

        table = skene_wakefield_table()
        mles = table.mle_log_odds()
        by_name = {row[0]: row for row in rows}
        for i, label in enumerate(table.labels):
            for j, arm in enumerate(("treatment", "control")):
                row = by_name[f"psi_{label}_{arm}"]
                if np.isneginf(mles[i, j]):
                    assert row[3] == "-inf"
                else:
                    assert np.isclose(float(row[3]), mles[i, j])
                # posterior columns stay finite even where the MLE is not
                assert np.isfinite(float(row[4]))
        neg_inf_rows = [row for row in rows if row[3] == "-inf"]
        assert len(neg_inf_rows) == 2

    def test_scatter_subsample_capped_at_1000(self, tmp_path, fitted):
        data, draws = fitted
        out_plot = tmp_path / "plot.csv"
        rc = main([
            "summarize", "--draws", str(draws), "--data", str(data),
            "--out-summary", str(tmp_path / "summary.json"), "--out-plot", str(out_plot),
        ])
        assert rc == 0
        scatter = tmp_path / "plot_mu_scatter.csv"
        lines = scatter.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "mu_1,mu_2"
        # 1200 retained draws get subsampled down to the 1000-point cap
        assert len(lines) == 2 + 1000
        first = [float(v) for v in lines[2].split(",")]
        assert len(first) == 2

    def test_manifest_lists_all_outputs(self, tmp_path, fitted):
        data, draws = fitted
        out_summary = tmp_path / "summary.json"
        out_plot = tmp_path / "plot.csv"
        out_scatter = tmp_path / "cloud.csv"
        rc = main([
            "summarize", "--draws", str(draws), "--data", str(data),
            "--out-summary", str(out_summary), "--out-plot", str(out_plot),
            "--out-scatter", str(out_scatter),
        ])
        assert rc == 0
        manifest = json.loads((tmp_path / "summary_manifest.json").read_text(encoding="utf-8"))
        assert manifest["outputs"] == [str(out_summary), str(out_plot), str(out_scatter)]
        assert manifest["inputs"] == {"draws": str(draws), "data": str(data)}
        assert out_scatter.exists()

    def test_label_mismatch_rejected(self, tmp_path, fitted, capsys):
        _, draws = fitted
        other = write_table(tmp_path, name="other.csv")
        rc = main([
            "summarize", "--draws", str(draws), "--data", str(other),
            "--out-summary", str(tmp_path / "s.json"), "--out-plot", str(tmp_path / "p.csv"),
        ])
        assert rc == 2
        assert "do not match" in capsys.readouterr().err


class TestEntryPoints:
    def test_version_flag_in_process(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert capsys.readouterr().out.strip() == f"pgtables {pgtables.__version__}"

    def test_console_script_version(self):
        exe = shutil.which("pgtables")
        if exe is None:
            pytest.skip("console script not on PATH")
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True, check=True)
        assert proc.stdout.strip() == f"pgtables {pgtables.__version__}"

    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pgtables.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == f"pgtables {pgtables.__version__}"

    def test_subcommand_required(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2
        capsys.readouterr()
