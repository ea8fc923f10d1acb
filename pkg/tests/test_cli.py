import pytest

from aumac.cli import (
    UsageError,
    dump_config,
    main,
    merge_options,
    parse_config_text,
    parse_delays,
    parse_float_list,
    parse_int_grid,
)


class TestParsing:
    def test_int_grid_range_inclusive(self):
        assert parse_int_grid("50:160:10") == list(range(50, 161, 10))
        assert len(parse_int_grid("50:160:10")) == 12

    def test_int_grid_list_and_scalar(self):
        assert parse_int_grid("50,80,110") == [50, 80, 110]
        assert parse_int_grid("7") == [7]

    def test_bad_range(self):
        with pytest.raises(UsageError):
            parse_int_grid("50:40:10")
        with pytest.raises(UsageError):
            parse_int_grid("1:2:3:4")

    def test_float_list(self):
        assert parse_float_list("0,0.2,0.4") == [0.0, 0.2, 0.4]

    def test_delays_default_zeros(self):
        assert parse_delays(None, 3).delays == (0, 0, 0)
        assert parse_delays("0,1,3", 3).delays == (0, 1, 3)


class TestConfigFile:
    def test_parse_comments_and_blank_lines(self):
        text = "# comment\n\nn = 200\nlog_m = 3.5  # trailing\n"
        assert parse_config_text(text) == {"n": "200", "log_m": "3.5"}

    def test_bad_line_rejected(self):
        with pytest.raises(UsageError):
            parse_config_text("just words\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(UsageError, match="unknown config key"):
            merge_options("eval", {}, {"bogus": "1"})

    def test_precedence_flags_over_config_over_defaults(self):
        merged = merge_options(
            "eval", {"n": 99, "ka": None}, {"n": "1000", "ka": "7", "alpha": "0.25"}
        )
        assert merged["n"] == 99          # flag wins
        assert merged["ka"] == 7          # config fills
        assert merged["alpha"] == 0.25
        assert merged["log_m"] == 100.0   # built-in default
        assert merged["epsilon"] == 1e-3

    def test_dump_then_load_is_identity(self, tmp_path):
        merged = merge_options("eval", {"p": 0.5, "p_prime": 1.0}, {"ka": "9"})
        path = tmp_path / "run.cfg"
        dump_config(merged, str(path))
        reloaded = merge_options("eval", {}, parse_config_text(path.read_text()))
        assert reloaded == merged
        # and dumping again is byte-identical
        path2 = tmp_path / "run2.cfg"
        dump_config(reloaded, str(path2))
        assert path.read_text() == path2.read_text()


class TestSubcommands:
    def test_eval_thm2_line(self, capsys):
        rc = main(
            "eval --n 50 --log-m 3 --ka 4 --alpha 0.2 --p 0.8 --p-prime 1.2 --variant thm2".split()
        )
        out = capsys.readouterr().out.strip()
        assert rc == 0
        assert out.startswith("thm2_worst_case,")
        assert ",valid," in out

    def test_eval_invalid_exit_code(self, capsys):
        rc = main(
            "eval --n 10 --log-m 20 --ka 2 --p 0.1 --p-prime 0.2 --variant thm2".split()
        )
        assert rc == 2

    def test_eval_rejects_bad_invariant(self, capsys):
        rc = main("eval --n 50 --ka 4 --p 2.0 --p-prime 1.0".split())
        err = capsys.readouterr().err
        assert rc == 1
        assert "p_prime" in err

    def test_eval_thm1_guard_names_alternatives(self, capsys):
        rc = main(
            "eval --n 50 --log-m 3 --ka 40 --p 0.8 --p-prime 1.2 --variant thm1".split()
        )
        err = capsys.readouterr().err
        assert rc == 1
        assert "theorem2_bound" in err

    def test_missing_required_flag(self, capsys):
        rc = main("eval --n 50".split())
        assert rc == 1
        assert "--p" in capsys.readouterr().err

    def test_unknown_subcommand_usage_error(self):
        assert main(["frobnicate"]) == 1

    def test_sweep_csv_and_determinism(self, tmp_path, capsys):
        args = (
            "sweep --n 50 --log-m 6 --epsilon 0.05 --ka 2:4:1 --alpha 0,0.2 "
            "--variant thm2"
        ).split()
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(args + ["--output", str(out1)]) == 0
        assert main(args + ["--output", str(out2)]) == 0
        a = out1.read_bytes()
        assert a == out2.read_bytes()
        lines = a.decode().strip().split("\n")
        assert lines[0] == "ka,alpha,variant,ebn0_db,ebn0_linear,p_prime,p,bound,status"
        assert len(lines) == 1 + 3 * 2

    def test_sweep_plot_file(self, tmp_path):
        out = tmp_path / "sweep.csv"
        fig = tmp_path / "sweep.png"
        args = (
            "sweep --n 50 --log-m 6 --epsilon 0.05 --ka 2,3 --alpha 0.2 "
            f"--variant thm2 --output {out} --plot {fig}"
        ).split()
        assert main(args) == 0
        assert fig.exists() and fig.stat().st_size > 1000

    def test_sweep_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("n = 50\nlog_m = 6\nepsilon = 0.05\nka = 2\nalpha = 0.2\nvariant = thm2\n")
        rc = main(["sweep", "--config", str(cfg)])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("\n") == 2  # header + one row

    def test_simulate_prints_both_sides(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        args = (
            "simulate --n-sim 32 --m-sim 16 --ka-sim 2 --p 1.0 --p-prime 2.0 "
            f"--delays 0,4 --trials 128 --seed 7 --output {out}"
        ).split()
        rc = main(args)
        text = capsys.readouterr().out
        assert rc == 0
        assert "empirical" in text and "analytic" in text
        header = out.read_text().split("\n")[0]
        assert header == "mean,stderr,trials,collision_rate,power_rate,missed_rate,bound"

    def test_eval_details_breakdown(self, capsys):
        rc = main(
            "eval --n 50 --log-m 3 --ka 3 --alpha 0.2 --p 0.8 --p-prime 1.2 "
            "--variant thm2 --details".split()
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert "profile=10:1,40:3" in out  # worst-case run form for k=3, iota=1

    def test_aloha_csv(self, tmp_path):
        out = tmp_path / "aloha.csv"
        args = (
            "aloha --n 4096 --log-m 2 --epsilon 0.05 --ka 4 --alpha 0 --t-fold 1 "
            f"--output {out}"
        ).split()
        assert main(args) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2
        assert lines[1].split(",")[2] == "aloha16"

    def test_check_passes(self, capsys):
        assert main(["check"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out
