"""
命令行集成测试。

测试子命令的输出、退出码约定、报告落盘以及CSV的逐字节可复现性。
"""

import json

import pandas as pd
import pytest

from app.core.equation import AlgebroidEquation, is_identical
from app.main import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main
from app.services.suite_service import SuiteService

pytestmark = pytest.mark.integration


def test_count(capsys):
    """测试 count --q 2 --s 1 输出3"""
    assert main(["count", "--q", "2", "--s", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "3"


def test_stable_s(capsys):
    """测试 stable-s --q 3 --epsilon 0.5 输出4"""
    assert main(["stable-s", "--q", "3", "--epsilon", "0.5"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "4"


def test_usage_error_exit_code(capsys):
    """测试用法错误返回1"""
    assert main(["verify", "nonsense", "x.json"]) == EXIT_ERROR
    assert main(["count", "--q", "two", "--s", "1"]) == EXIT_ERROR
    assert main([]) == EXIT_ERROR


@pytest.mark.parametrize("s", ["0", "-1"])
def test_count_rejects_small_s(capsys, s):
    """测试count拒绝s<1并返回1"""
    assert main(["count", "--q", "2", "--s", s]) == EXIT_ERROR
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "s必须≥1" in captured.err


def test_malformed_spec_exit_code(tmp_path, capsys):
    """测试格式错误的规格文件返回1并指出键名"""
    path = tmp_path / "bad.json"
    path.write_text('{\n  "version": 1,\n  "function": "W^2 - z"\n}\n', encoding="utf-8")
    assert main(["verify", "smt", str(path), "--out-dir", str(tmp_path)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "function" in err
    assert "第3行" in err


def test_characteristic_csv(spec_dir, tmp_path):
    """测试特征函数CSV：r = 4 处为 (4, 0.6931, 0, 0.6931, 0.6931)"""
    out = tmp_path / "sqrt.csv"
    assert main(["characteristic", str(spec_dir / "sqrt_z.json"), "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["r", "m", "N", "T", "Nx"]
    assert len(frame) == 10
    first = frame.iloc[0]
    assert first["r"] == pytest.approx(4.0)
    assert first["m"] == pytest.approx(0.6931, abs=1e-4)
    assert first["N"] == pytest.approx(0.0)
    assert first["T"] == pytest.approx(0.6931, abs=1e-4)
    assert first["Nx"] == pytest.approx(0.6931, abs=1e-4)


@pytest.mark.slow
def test_characteristic_csv_is_bit_stable(spec_dir, tmp_path):
    """测试相同规格和种子下CSV逐字节一致"""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    spec = str(spec_dir / "sqrt_z.json")
    assert main(["characteristic", spec, "--out", str(first), "--seed", "42"]) == EXIT_OK
    assert main(["characteristic", spec, "--out", str(second), "--seed", "42"]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_op_invert_round_trip(spec_dir, tmp_path, capsys):
    """测试 op invert 两次回到原方程"""
    spec = spec_dir / "sqrt_z.json"
    assert main(["op", "invert", str(spec)]) == EXIT_OK
    once = tmp_path / "once.json"
    once.write_text(capsys.readouterr().out, encoding="utf-8")

    assert main(["op", "invert", str(once)]) == EXIT_OK
    twice = json.loads(capsys.readouterr().out)
    assert twice["version"] == 1

    original = SuiteService.from_path(spec).equation
    table = [[complex(*pair) for pair in row] for row in twice["function"]]
    assert is_identical(AlgebroidEquation.from_table(table), original).identical


def test_op_pushforward_named_map(spec_dir, capsys):
    """测试 op pushforward --map 1/w 与逆元一致"""
    assert main(["op", "pushforward", str(spec_dir / "sqrt_z.json"), "--map", "1/w"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    table = [[complex(*pair) for pair in row] for row in data["function"]]
    expected = AlgebroidEquation.from_table([[-1], [], [0, 1]])
    assert is_identical(AlgebroidEquation.from_table(table), expected).identical


def test_op_unknown_map(spec_dir):
    """测试未定义的映射标签返回1"""
    assert main(["op", "pushforward", str(spec_dir / "sqrt_z.json"), "--map", "nope"]) == EXIT_ERROR


def test_monodromy_command(spec_dir, capsys):
    """测试 monodromy 输出置换的循环"""
    assert main(["monodromy", str(spec_dir / "sqrt_z.json"), "--center", "0"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "(1 2)"
    assert main(["monodromy", str(spec_dir / "sqrt_z.json"), "--center", "1"]) == EXIT_ERROR


@pytest.mark.slow
def test_verify_smt_passes(spec_dir, tmp_path, capsys):
    """测试 verify smt 在 √z 上通过并写出报告"""
    code = main(["verify", "smt", str(spec_dir / "sqrt_z.json"), "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    assert "smt: pass" in capsys.readouterr().out
    report = json.loads((tmp_path / "smt.json").read_text(encoding="utf-8"))
    assert report["verdict"] == "pass"
    assert len(report["rows"]) == 30
    frame = pd.read_csv(tmp_path / "smt.csv")
    assert set(frame["label"]) == {"smt-counting", "smt-reduced", "smt-proximity"}


def test_verify_falsified_inequality_fails(spec_dir, tmp_path, capsys):
    """测试声明零松弛时接近函数可加性不成立，返回2"""
    code = main(
        ["verify", "lemma3.1", str(spec_dir / "falsified_lemma31.json"), "--out-dir", str(tmp_path)]
    )
    assert code == EXIT_FAIL
    assert "lemma3.1: fail" in capsys.readouterr().out
    report = json.loads((tmp_path / "lemma3.1.json").read_text(encoding="utf-8"))
    assert report["slack_model"]["c0"] > 0


@pytest.mark.slow
def test_verify_thm_2_5_all_maps(spec_dir, tmp_path):
    """测试 thm2.5 对规格文件中的每个映射都做检查"""
    code = main(["verify", "thm2.5", str(spec_dir / "sqrt_z.json"), "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "thm2.5.json").read_text(encoding="utf-8"))
    labels = {row["label"].split(":")[0] for row in report["rows"]}
    assert labels == {"w", "1/w"}


def test_verify_lemma_3_3_defaults(spec_dir, tmp_path):
    """测试 lemma3.3 使用默认函数组"""
    code = main(["verify", "lemma3.3", str(spec_dir / "identity_z.json"), "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
