"""Graph markup: TikZ and DOT renderings of DAGs and split graphs.

Layout is longest-path layering on the graph with split pairs merged
back into one unit, so the two halves of an intervened variable sit
side by side.  Within a layer, units fan out from the horizontal axis
in label order.  Output is deterministic down to the byte: node order,
edge order, and coordinate formatting never depend on dict iteration.

The TikZ output needs \\usetikzlibrary{shapes.geometric} for the
semicircular halves of split nodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .graph import CausalGraph, NodeId
from .swig import SWIG

__all__ = ["RenderStyle", "to_tikz", "to_dot"]


@dataclass(frozen=True)
class RenderStyle:
    fixed_half_color: str = "red"
    edge_color: str = "blue"
    latent_fill: str = "gray!40"
    x_step: float = 2.75
    y_step: float = 2.5
    pair_gap: float = 1.1


def _graph_of(target: CausalGraph | SWIG) -> CausalGraph:
    return target.graph if isinstance(target, SWIG) else target


def _layout(graph: CausalGraph, style: RenderStyle) -> dict[NodeId, tuple[float, float]]:
    """Positions keyed by node; split pairs share a unit, fixed half offset right."""
    randoms: dict[str, NodeId] = {}
    fixed: dict[str, NodeId] = {}
    for n in graph.nodes:
        (fixed if n.fixed else randoms)[n.base] = n

    unit_parents: dict[str, set[str]] = {b: set() for b in randoms}
    for u, v in graph.edges:
        if u.base != v.base:
            unit_parents[v.base].add(u.base)

    layer: dict[str, int] = {}
    for node in graph.topological_order():
        if node.fixed:
            continue
        b = node.base
        layer[b] = max((layer[p] + 1 for p in unit_parents[b] if p in layer), default=0)

    by_layer: dict[int, list[str]] = {}
    for b, k in layer.items():
        by_layer.setdefault(k, []).append(b)

    pos: dict[NodeId, tuple[float, float]] = {}
    for k in sorted(by_layer):
        members = sorted(by_layer[k], key=lambda b: randoms[b].label)
        for i, b in enumerate(members):
            offset = (i + 1) // 2 * (1 if i % 2 else -1)
            x = k * style.x_step
            y = offset * style.y_step
            pos[randoms[b]] = (x, y)
            if b in fixed:
                pos[fixed[b]] = (x + style.pair_gap, y)
    return pos


def _safe_id(label: str, used: set[str]) -> str:
    base = re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "n"
    name = base
    k = 2
    while name in used:
        name = f"{base}_{k}"
        k += 1
    used.add(name)
    return name


def _tex(label: str) -> str:
    return label.replace("_", r"\_")


def _tikz_options(
    graph: CausalGraph,
    node: NodeId,
    swig_mode: bool,
    split_bases: set[str],
    boxed: bool,
    style: RenderStyle,
) -> str:
    a = graph.attrs[node]
    if node.fixed:
        return (
            "semicircle, draw, shape border rotate=270,"
            f" color={style.fixed_half_color}, inner sep=2pt"
        )
    if boxed or a.conditioned:
        return "rectangle, draw"
    if a.role == "latent":
        return f"circle, draw, fill={style.latent_fill}"
    if swig_mode:
        if node.base in split_bases:
            return "semicircle, draw, shape border rotate=90, inner sep=2pt"
        return "inner sep=1pt"
    return "circle, draw"


def to_tikz(
    target: CausalGraph | SWIG,
    style: RenderStyle | None = None,
    conditioned_values: Mapping[str, int] | None = None,
) -> str:
    """TikZ picture for a DAG or a split graph.

    ``conditioned_values`` boxes the named variables and appends
    ``=value`` to their labels, for stratum-membership displays.
    """
    style = style or RenderStyle()
    shown = dict(conditioned_values or {})
    graph = _graph_of(target)
    swig_mode = any(n.fixed for n in graph.nodes) or isinstance(target, SWIG)
    split_bases = {n.base for n in graph.nodes if n.fixed}
    pos = _layout(graph, style)

    ordered = sorted(graph.nodes, key=lambda n: (pos[n][0], -pos[n][1], n.label))
    used: set[str] = set()
    ids: dict[NodeId, str] = {n: _safe_id(n.label, used) for n in ordered}

    lines = [r"\begin{tikzpicture}[>=stealth, semithick]"]
    for n in ordered:
        x, y = pos[n]
        boxed = not n.fixed and n.base in shown
        label = n.label
        if boxed:
            label = f"{label}={shown[n.base]}"
        options = _tikz_options(graph, n, swig_mode, split_bases, boxed, style)
        lines.append(
            f"  \\node ({ids[n]}) at ({x:.2f}, {y:.2f}) [{options}] {{${_tex(label)}$}};"
        )
    for u, v in sorted(graph.edges, key=lambda e: (e[0].label, e[1].label)):
        lines.append(
            f"  \\path ({ids[u]}) edge [->, very thick, color={style.edge_color}] ({ids[v]});"
        )
    lines.append(r"\end{tikzpicture}")
    return "\n".join(lines) + "\n"


def to_dot(
    target: CausalGraph | SWIG,
    style: RenderStyle | None = None,
    conditioned_values: Mapping[str, int] | None = None,
) -> str:
    """DOT digraph; split pairs are tied into same-rank invisible clusters."""
    style = style or RenderStyle()
    shown = dict(conditioned_values or {})
    graph = _graph_of(target)
    split_bases = sorted({n.base for n in graph.nodes if n.fixed})

    lines = ["digraph G {", "  rankdir=LR;", f"  edge [color={style.edge_color}];"]
    for i, base in enumerate(split_bases):
        random_label = next(n.label for n in graph.nodes if not n.fixed and n.base == base)
        fixed_label = next(n.label for n in graph.nodes if n.fixed and n.base == base)
        lines.append(
            f'  subgraph cluster_{i} {{ rank=same; style=invis;'
            f' "{random_label}"; "{fixed_label}"; }}'
        )
    for n in sorted(graph.nodes, key=lambda m: m.label):
        a = graph.attrs[n]
        attrs = []
        if n.fixed:
            attrs.append("shape=ellipse")
            attrs.append(f"color={style.fixed_half_color}")
            attrs.append(f"fontcolor={style.fixed_half_color}")
        elif not n.fixed and n.base in shown:
            attrs.append("shape=box")
            attrs.append(f'label="{n.label}={shown[n.base]}"')
        elif a.conditioned:
            attrs.append("shape=box")
        elif a.role == "latent":
            attrs.append("shape=ellipse")
            attrs.append("style=filled")
            attrs.append("fillcolor=lightgray")
        else:
            attrs.append("shape=ellipse")
        lines.append(f'  "{n.label}" [{", ".join(attrs)}];')
    for u, v in sorted(graph.edges, key=lambda e: (e[0].label, e[1].label)):
        lines.append(f'  "{u.label}" -> "{v.label}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
