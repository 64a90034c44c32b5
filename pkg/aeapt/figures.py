"""Static figures: ranking bands and reconstruction grids.

Figures are rendered from Jinja2 templates shipped in ``aeapt/templates``.
SVG is the primary format; reconstruction grids also have a plain PGM (P2)
variant. Every figure embeds the seed and config digest of the run that
produced it.

Color scales:
    * binary tier: ``0`` light gray, ``1`` red
    * reconstruction tier: linear ramp from white (``0``) to dark blue (``1``)
    * error tier: linear blue (``-1``) to white (``0``) to red (``+1``)
"""

from typing import List, NamedTuple, Sequence, Tuple, Union

from dataclasses import dataclass
import math
from pathlib import Path

from jinja2 import Environment, PackageLoader, select_autoescape
import numpy as np

from .enums import FigureFormats
from .evaluation import ndcg, RankingReport
from .exceptions import DomainError, ShapeError

env = Environment(
    loader=PackageLoader("aeapt"),
    autoescape=select_autoescape(enabled_extensions=('svg.j2',), default_for_string=False),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


class Templates:
    RANKING_BAND = env.get_template("ranking_band.svg.j2")
    RECONSTRUCTION_GRID = env.get_template("reconstruction_grid.svg.j2")
    RECONSTRUCTION_GRID_PGM = env.get_template("reconstruction_grid.pgm.j2")


MAX_ASPECT = 3
ZERO_ERROR = 1e-6
PGM_DATA_MAX = 250
PGM_PADDING = 255

WHITE = (255, 255, 255)
DARK_BLUE = (8, 48, 107)
BLUE = (33, 102, 172)
RED = (178, 24, 43)
BINARY_COLORS = ('#d9d9d9', '#d62728')


@dataclass(frozen=True)
class GridLayout:
    rows: int
    cols: int

    @property
    def cells(self) -> int:
        return self.rows * self.cols

    @classmethod
    def for_size(cls, m: int) -> 'GridLayout':
        """Most-square exact factor pair of ``m``, unless it is too elongated.

        An exact pair wider than :data:`MAX_ASPECT` (e.g. a prime ``m``) gives
        way to ``floor(sqrt(m))`` rows with the last row padded.
        """
        if m < 1:
            raise DomainError(f"Cannot lay out {m} cells")
        rows = max(r for r in range(1, math.isqrt(m) + 1) if m % r == 0)
        cols = m // rows
        if cols <= MAX_ASPECT * rows:
            return cls(rows, cols)
        rows = math.isqrt(m)
        return cls(rows, math.ceil(m / rows))

    def position(self, index: int) -> Tuple[int, int]:
        return divmod(index, self.cols)


class Bar(NamedTuple):
    rank: int
    x: float
    width: float


@dataclass(frozen=True)
class BandGeometry:
    width: int = 1000
    margin: int = 20
    band_height: int = 40
    gap: int = 50
    title_height: int = 40

    @property
    def height(self) -> int:
        return self.title_height + 2 * self.band_height + self.gap + self.margin

    @property
    def full_band_y(self) -> int:
        return self.title_height

    @property
    def zoom_band_y(self) -> int:
        return self.title_height + self.band_height + self.gap


def band_bars(ranks: Sequence[int], first: int, last: int, width: float, margin: float = 0.0) -> List[Bar]:
    """Bars of ``ranks`` on a linear scale over ``first..last``.

    Each rank owns a slot of ``width / span``; a bar is at least one pixel wide.
    """
    span = last - first + 1
    slot = width / span
    return [Bar(rank, margin + (rank - first) * slot, max(1.0, slot)) for rank in ranks]


def binary_color(value: float) -> str:
    return BINARY_COLORS[int(round(value))]


def _hex(rgb: Sequence[float]) -> str:
    return '#' + ''.join(f'{int(round(channel)):02x}' for channel in rgb)


def _mix(a: Sequence[int], b: Sequence[int], t: float) -> str:
    return _hex([ca + (cb - ca) * t for ca, cb in zip(a, b)])


def ramp_color(value: float) -> str:
    """White to dark blue over ``[0, 1]``."""
    return _mix(WHITE, DARK_BLUE, float(np.clip(value, 0.0, 1.0)))


def diverging_color(error: float) -> str:
    """Blue to white to red over ``[-1, 1]``; exactly white for ``|error| < 1e-6``."""
    if abs(error) < ZERO_ERROR:
        return _hex(WHITE)
    error = float(np.clip(error, -1.0, 1.0))
    return _mix(WHITE, RED, error) if error > 0 else _mix(WHITE, BLUE, -error)


def render_ranking_band(
        ranking: RankingReport,
        out_path: Union[str, Path],
        title: str = '',
        seed: int = 0,
        digest: str = '',
        geometry: BandGeometry = BandGeometry(),
) -> Path:
    """Two horizontal bands marking anomaly positions: the whole list and a zoom on the anomaly interval.

    Raises:
        DomainError: If the ranking holds no anomaly.
    """
    metrics = ndcg(ranking)
    ranks = list(metrics.anomaly_ranks)
    inner = geometry.width - 2 * geometry.margin
    low, high = min(ranks), max(ranks)

    svg = Templates.RANKING_BAND.render(
        geometry=geometry,
        inner_width=inner,
        title=title,
        ndcg=f'{metrics.ndcg:.4f}',
        size=ranking.size,
        anomaly_count=len(ranks),
        low=low,
        high=high,
        full_bars=band_bars(ranks, 1, ranking.size, inner, geometry.margin),
        zoom_bars=band_bars(ranks, low, high, inner, geometry.margin),
        seed=seed,
        digest=digest,
    )
    out_path = Path(out_path)
    out_path.write_text(svg, encoding='utf-8')
    return out_path


class GridCell(NamedTuple):
    index: int
    row: int
    col: int
    value: float
    color: str
    padding: bool


def _tier(values: np.ndarray, layout: GridLayout, color) -> List[GridCell]:
    cells = []
    for index in range(layout.cells):
        row, col = layout.position(index)
        if index < values.shape[0]:
            cells.append(GridCell(index, row, col, float(values[index]), color(values[index]), False))
        else:
            cells.append(GridCell(index, row, col, 0.0, '', True))
    return cells


def _pgm_tier(values: np.ndarray, layout: GridLayout) -> List[List[int]]:
    grid = [[PGM_PADDING] * layout.cols for _ in range(layout.rows)]
    for index, value in enumerate(values):
        row, col = layout.position(index)
        grid[row][col] = int(round(PGM_DATA_MAX * float(np.clip(value, 0.0, 1.0))))
    return grid


def render_reconstruction_grid(
        x: Sequence[float],
        x_rec: Sequence[float],
        layout: GridLayout,
        out_path: Union[str, Path],
        figure_format: FigureFormats = FigureFormats.SVG,
        title: str = '',
        seed: int = 0,
        digest: str = '',
        cell_size: int = 12,
) -> Path:
    """Original row, reconstruction and error ``x - x_rec`` as three aligned grids.

    Raises:
        ShapeError: If the vectors differ in length or do not fit the layout.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    x_rec = np.asarray(x_rec, dtype=np.float64).reshape(-1)
    if x.shape != x_rec.shape:
        raise ShapeError("Row and reconstruction differ in length", x.shape, x_rec.shape)
    if x.shape[0] > layout.cells:
        raise ShapeError("Layout is too small", x.shape, (layout.rows, layout.cols))
    error = x - x_rec

    out_path = Path(out_path)
    if figure_format is FigureFormats.PGM:
        separator = [PGM_PADDING] * layout.cols
        rows = (
            _pgm_tier(x, layout) + [separator]
            + _pgm_tier(x_rec, layout) + [separator]
            + _pgm_tier((error + 1.0) / 2.0, layout)
        )
        content = Templates.RECONSTRUCTION_GRID_PGM.render(
            width=layout.cols, height=len(rows), maxval=PGM_PADDING, rows=rows, seed=seed, digest=digest,
        )
    else:
        tier_height = layout.rows * cell_size
        content = Templates.RECONSTRUCTION_GRID.render(
            title=title,
            layout=layout,
            cell_size=cell_size,
            tier_height=tier_height,
            width=layout.cols * cell_size,
            tiers=[
                ('original', _tier(x, layout, binary_color)),
                ('reconstruction', _tier(x_rec, layout, ramp_color)),
                ('error', _tier(error, layout, diverging_color)),
            ],
            seed=seed,
            digest=digest,
        )
    out_path.write_text(content, encoding='utf-8')
    return out_path
