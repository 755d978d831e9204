"""Acceptance: every figure kind renders from the golden bundle, repeat
renders are pixel-identical, and the survival figure carries right-continuous
steps with a two-entry legend."""

from pathlib import Path

from newsflow_figures.render import FigureSpec, build_figure, render

from test_render import GOLDEN, KIND_TO_FILE


def check(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
          + (f" ({detail})" if detail else ""))
    assert ok, f"{name} failed: {detail}"


def test_figures_acceptance(tmp_path):
    rendered = {}
    for kind, name in KIND_TO_FILE.items():
        first = render(FigureSpec(kind=kind, input=GOLDEN / name,
                                  out=tmp_path / f"{kind}_a.png"))
        second = render(FigureSpec(kind=kind, input=GOLDEN / name,
                                   out=tmp_path / f"{kind}_b.png"))
        rendered[kind] = (first.stat().st_size > 0
                          and first.read_bytes() == second.read_bytes())
    all_kinds = all(rendered.values())

    fig, _ = build_figure(FigureSpec(kind="km", input=GOLDEN / KIND_TO_FILE["km"],
                                     out=tmp_path / "km.png"))
    ax = fig.axes[0]
    steps = [line for line in ax.lines if line.get_drawstyle() == "steps-post"]
    legend = [t.get_text() for t in ax.get_legend().get_texts()]
    km_ok = len(steps) == 2 and legend == ["Questionable", "Reliable"]

    check("figures-render-deterministic", all_kinds and km_ok,
          f"kinds={rendered}, km-steps={len(steps)}, legend={legend}")
