import json
import shutil
from pathlib import Path

import pytest

from manifold_figures.cli import main
from manifold_figures.loading import ExportError, load_json, load_report
from manifold_figures.recipes import RECIPES


def test_render_all_complete_dir(export_dir, tmp_path, capsys):
    out = tmp_path / "figs"
    assert main([str(export_dir), str(out)]) == 0
    for fid in RECIPES:
        assert (out / f"{fid}.png").exists(), fid
    assert "[ok]" in capsys.readouterr().out


@pytest.mark.parametrize("victim,figure", [
    ("wm2/curvature.json", "fig6"),
    ("context/eigen_decay.json", "fig4"),
    ("static/gridlines.json", "fig2"),
    ("romo/stable_rank_trace.json", "figS-romo"),
])
def test_missing_file_fails_naming_it(export_dir, tmp_path, victim, figure,
                                      capsys):
    broken = tmp_path / "broken"
    shutil.copytree(export_dir, broken)
    (broken / victim).unlink()
    out = tmp_path / "figs"
    code = main([str(broken), str(out), "--figures", figure])
    assert code == 1
    err = capsys.readouterr().err
    assert Path(victim).name in err


def test_rerun_byte_stable(export_dir, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main([str(export_dir), str(out), "--figures", "figS-romo"]) == 0
        outs.append((out / "figS-romo.png").read_bytes())
    assert outs[0] == outs[1]


def test_unknown_figure_id(export_dir, tmp_path):
    assert main([str(export_dir), str(tmp_path / "o"),
                 "--figures", "fig99"]) == 2


class TestLoaders:
    def test_missing_file_named(self, tmp_path):
        with pytest.raises(ExportError) as exc:
            load_json(tmp_path / "absent.json")
        assert "absent.json" in str(exc.value)

    def test_invalid_json_named(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ExportError) as exc:
            load_json(p)
        assert "bad.json" in str(exc.value)

    def test_missing_field_named(self, tmp_path):
        p = tmp_path / "doc.json"
        p.write_text(json.dumps({"analysis_id": "x"}))
        with pytest.raises(ExportError) as exc:
            load_json(p, required_fields=("tables",))
        assert "tables" in str(exc.value)

    def test_missing_table_named(self, tmp_path):
        p = tmp_path / "doc.json"
        p.write_text(json.dumps({"analysis_id": "x", "tables": {}}))
        with pytest.raises(ExportError) as exc:
            load_report(p, tables=("gridlines",))
        assert "gridlines" in str(exc.value)
