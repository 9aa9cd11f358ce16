"""Ternary diagrams of three-part compositions, emitted as SVG text.

A composition ``x`` is drawn at ``x1 A + x2 B + x3 C`` on the triangle with
vertices ``A = (0, 0)``, ``B = (1, 0)`` and ``C = (1/2, √3/2)``. Scenes are
plain data; :func:`render` turns one into a byte-stable SVG document.
"""
import math
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import contourpy
import numpy as np

from .dirichlet import DirichletParams, log_density
from .exceptions import DimensionError, InvalidParameter
from .simplex import Composition, CompositionLike, CompositionSample

HEIGHT = math.sqrt(3.0) / 2.0
VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, HEIGHT]])
GROUP_COLORS = ("#d62728", "#1f77b4")
DEFAULT_RESOLUTION = 200
DEFAULT_LABELS = ("A", "B", "C")


@dataclass(frozen=True)
class Canvas:
    """The pixel size of a drawing and the margin around its triangle."""

    width: int = 600
    height: int = 560
    margin: int = 40

    @property
    def scale(self) -> float:
        usable = self.height - 2 * self.margin
        return min(self.width - 2 * self.margin, usable / HEIGHT)

    def to_pixels(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        px = self.margin + xy[..., 0] * self.scale
        py = self.height - self.margin - xy[..., 1] * self.scale
        return np.stack([px, py], axis=-1)


def _three_parts(x: CompositionLike) -> np.ndarray:
    parts = np.asarray(x, dtype=float)
    if parts.shape[-1] != 3:
        raise DimensionError(3, parts.shape[-1])
    return parts


def barycentric_to_xy(
    x: CompositionLike, canvas: Optional[Canvas] = None
) -> np.ndarray:
    """The position of one composition, or of every row of an ``(n, 3)`` array.

    Args:
        x: Three-part compositions.
        canvas: Scales the unit triangle to pixels; unit coordinates when omitted.

    Raises:
        DimensionError: ``x`` does not have 3 parts.
    """
    xy = _three_parts(x) @ VERTICES
    return xy if canvas is None else canvas.to_pixels(xy)


###################################################################################
#                                     SCENES                                      #
###################################################################################


@dataclass(frozen=True, eq=False)
class PointLayer:
    points: np.ndarray
    color: str
    radius: Union[float, np.ndarray] = 3.0


@dataclass(frozen=True, eq=False)
class PathLayer:
    paths: Tuple[np.ndarray, ...]
    color: str


@dataclass(frozen=True, eq=False)
class ContourLayer:
    """Level curves, already in unit triangle coordinates."""

    lines: Tuple[np.ndarray, ...]
    color: str


Layer = Union[PointLayer, PathLayer, ContourLayer]


@dataclass
class TernaryScene:
    """What to draw on one ternary diagram.

    Args:
        labels: The names of the three vertices, in part order.
        layers: Drawn in order, later layers on top.
        canvas: The drawing size.
    """

    labels: Tuple[str, str, str] = DEFAULT_LABELS
    layers: List[Layer] = field(default_factory=list)
    canvas: Canvas = field(default_factory=Canvas)

    def add_points(
        self, points, color: str, radius: Union[float, np.ndarray] = 3.0
    ) -> "TernaryScene":
        parts = _three_parts(np.atleast_2d(points))
        self.layers.append(PointLayer(parts, color, radius))
        return self

    def add_paths(self, paths: Sequence, color: str) -> "TernaryScene":
        self.layers.append(
            PathLayer(tuple(_three_parts(np.atleast_2d(p)) for p in paths), color)
        )
        return self

    def add_contours(self, lines: Sequence[np.ndarray], color: str) -> "TernaryScene":
        self.layers.append(ContourLayer(tuple(np.asarray(l) for l in lines), color))
        return self


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _polyline(pixels: np.ndarray, color: str, width: float = 1.0) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pixels)
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" '
        f'stroke-width="{_fmt(width)}"/>'
    )


def render(scene: TernaryScene) -> str:
    """The SVG 1.1 document of ``scene``; equal scenes give equal text."""
    canvas = scene.canvas
    corners = canvas.to_pixels(VERTICES)
    frame = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{canvas.width}" height="{canvas.height}" '
        f'viewBox="0 0 {canvas.width} {canvas.height}">',
        f'<polygon points="{frame}" fill="none" stroke="#000000" '
        'stroke-width="1.0000"/>',
    ]
    offsets = ((-6.0, 18.0, "end"), (6.0, 18.0, "start"), (0.0, -8.0, "middle"))
    for (x, y), label, (dx, dy, anchor) in zip(corners, scene.labels, offsets):
        lines.append(
            f'<text x="{_fmt(x + dx)}" y="{_fmt(y + dy)}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="14">{escape(label)}</text>'
        )

    for layer in scene.layers:
        if isinstance(layer, PointLayer):
            pixels = barycentric_to_xy(layer.points, canvas)
            radii = np.broadcast_to(np.asarray(layer.radius, dtype=float), len(pixels))
            for (x, y), r in zip(pixels, radii):
                lines.append(
                    f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" '
                    f'fill="{layer.color}" fill-opacity="0.6"/>'
                )
        elif isinstance(layer, PathLayer):
            for path in layer.paths:
                lines.append(_polyline(barycentric_to_xy(path, canvas), layer.color))
        else:
            for line in layer.lines:
                lines.append(_polyline(canvas.to_pixels(line), layer.color))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


###################################################################################
#                                    CONTOURS                                     #
###################################################################################


def _grid(resolution: int):
    u = np.linspace(0.0, 1.0, resolution)
    v = np.linspace(0.0, HEIGHT, resolution)
    U, V = np.meshgrid(u, v)
    x3 = V / HEIGHT
    x2 = U - 0.5 * x3
    x1 = 1.0 - x2 - x3
    parts = np.stack([x1, x2, x3], axis=-1)
    inside = np.all(parts > 0, axis=-1)
    return U, V, parts, inside


def density_grid(params: DirichletParams, resolution: int = DEFAULT_RESOLUTION):
    """Log-density of ``params`` on a ``resolution × resolution`` grid of the
    triangle's bounding box, masked outside the open triangle."""
    if params.d != 3:
        raise DimensionError(3, params.d)
    U, V, parts, inside = _grid(resolution)
    values = np.zeros(inside.shape)
    values[inside] = log_density(params, parts[inside])
    return U, V, np.ma.masked_array(values, mask=~inside)


def density_contours(
    params: DirichletParams,
    levels: Sequence[float],
    resolution: int = DEFAULT_RESOLUTION,
) -> List[np.ndarray]:
    """Level curves of a three-part Dirichlet density by marching squares.

    Args:
        params: A Dirichlet law with ``d = 3``.
        levels: Positive density values.
        resolution: Grid points per axis.

    Returns:
        Polylines in unit triangle coordinates, level by level.

    Raises:
        DimensionError: ``params`` does not have 3 parts.
        InvalidParameter: A level is not positive.
    """
    for level in levels:
        if not level > 0:
            raise InvalidParameter("level", level, "(0, inf)")
    U, V, Z = density_grid(params, resolution)
    generator = contourpy.contour_generator(U, V, Z)
    polylines = []
    for level in levels:
        polylines.extend(
            np.asarray(line)
            for line in generator.lines(math.log(level))
            if len(line) > 1
        )
    return polylines


def default_levels(
    params: DirichletParams, count: int = 5, resolution: int = DEFAULT_RESOLUTION
) -> List[float]:
    """Density levels at evenly spaced upper quantiles of the gridded density."""
    _, _, Z = density_grid(params, resolution)
    values = Z.compressed()
    quantiles = np.quantile(values, np.linspace(0.5, 0.95, count))
    return sorted({float(np.exp(q)) for q in quantiles})


###################################################################################
#                                 SCENE BUILDERS                                  #
###################################################################################


def points_scene(
    samples: Sequence[CompositionSample],
    labels: Tuple[str, str, str] = DEFAULT_LABELS,
    canvas: Optional[Canvas] = None,
) -> TernaryScene:
    """Every sample as dots, colored by group."""
    scene = TernaryScene(labels, canvas=canvas or Canvas())
    for sample in samples:
        scene.add_points(sample.points, GROUP_COLORS[sample.group_label])
    return scene


def transport_scene(
    source: CompositionSample,
    trajectories: Sequence[Sequence[Composition]],
    labels: Tuple[str, str, str] = DEFAULT_LABELS,
    canvas: Optional[Canvas] = None,
    target: Optional[CompositionSample] = None,
) -> TernaryScene:
    """Source dots with one displacement path per source point."""
    scene = TernaryScene(labels, canvas=canvas or Canvas())
    if target is not None:
        scene.add_points(target.points, GROUP_COLORS[target.group_label], radius=2.0)
    scene.add_paths([np.vstack(path) for path in trajectories], "#7f7f7f")
    scene.add_points(source.points, GROUP_COLORS[source.group_label])
    return scene


def matching_scene(
    point: CompositionLike,
    target: CompositionSample,
    weights: Sequence[float],
    labels: Tuple[str, str, str] = DEFAULT_LABELS,
    canvas: Optional[Canvas] = None,
    max_radius: float = 8.0,
) -> TernaryScene:
    """One source point and the target points it is matched to, sized by weight."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != target.n:
        raise DimensionError(target.n, weights.shape[0])
    matched = weights > 0
    scene = TernaryScene(labels, canvas=canvas or Canvas())
    target_color = GROUP_COLORS[target.group_label]
    scene.add_points(target.points, target_color, radius=1.5)
    if matched.any():
        radii = max_radius * weights[matched] / weights[matched].max()
        scene.add_points(target.points[matched], target_color, radii)
    source_color = GROUP_COLORS[1 - target.group_label]
    scene.add_points(np.asarray(point)[None, :], source_color, 5.0)
    return scene


def contour_scene(
    params: Mapping[int, DirichletParams],
    levels: Optional[Mapping[int, Sequence[float]]] = None,
    labels: Tuple[str, str, str] = DEFAULT_LABELS,
    canvas: Optional[Canvas] = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> TernaryScene:
    """Density level curves of the Dirichlet law fitted to each group."""
    scene = TernaryScene(labels, canvas=canvas or Canvas())
    for group, fitted in sorted(params.items()):
        group_levels = (levels or {}).get(group) or default_levels(
            fitted, resolution=resolution
        )
        scene.add_contours(
            density_contours(fitted, group_levels, resolution), GROUP_COLORS[group]
        )
    return scene
