"""Piecewise gamma-Weibull density estimator.

Points in ``[0, a]`` are smoothed with the gamma kernel, points beyond
``a`` with the Weibull kernel. The split point itself belongs to the gamma
branch.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
from pathlib import Path

import numpy as np

from .kernels import InvalidShapeError, gamma_pdf, weibull_pdf


class SampleError(ValueError):
    """Sample data are malformed or too small."""


class DegenerateSampleError(SampleError):
    """Sample has zero variance."""


@dataclass(frozen=True)
class Sample:
    """Nonnegative observations with their first two (biased) moments."""

    values: np.ndarray
    n: int = field(init=False)
    mean: float = field(init=False)
    variance: float = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size < 2:
            raise SampleError(f"need at least 2 observations, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise SampleError("observations must be finite")
        if np.any(values < 0):
            raise SampleError("observations must be nonnegative")
        values.setflags(write=False)
        mean = float(np.mean(values))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", int(values.size))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", float(np.mean((values - mean) ** 2)))

    @classmethod
    def from_file(cls, path):
        """Read one value per line; blank lines and ``#`` comments are skipped."""
        values = []
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise SampleError(f"{path}:{lineno}: cannot parse {line!r}") from None
            if not math.isfinite(values[-1]) or values[-1] < 0:
                raise SampleError(f"{path}:{lineno}: expected a nonnegative "
                                  f"number, got {line!r}")
        if len(values) < 2:
            raise SampleError(f"{path}: need at least 2 observations, "
                              f"found {len(values)}")
        return cls(np.array(values))

    def quantile(self, q):
        return float(np.quantile(self.values, q))

    def median(self):
        return float(np.median(self.values))


@dataclass(frozen=True)
class DensityGrid:
    points: np.ndarray
    values: np.ndarray
    junction_index: int
    skipped_zeros: int = 0
    invalid_points: int = 0

    def to_csv(self, path=None):
        lines = ["x,density"]
        lines += [f"{x!r},{v!r}" for x, v in zip(self.points.tolist(),
                                                 self.values.tolist())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


class EstimationError(ValueError):
    """Estimator could not be evaluated at one or more points."""


_CHUNK_ELEMENTS = 1 << 20


def _branch_rows(xs, values, cfg):
    """Estimates at points ``xs`` that all lie in one branch.

    Returns ``(estimates, skipped_zero_count)``; raises
    :class:`InvalidShapeError` naming the branch for the first bad point.
    """
    xs = np.asarray(xs, dtype=float)
    body = xs[0] <= cfg.a
    shapes = (xs + (cfg.body_shift if body else cfg.c2 * cfg.b)) / cfg.a
    bad = shapes <= 0
    if np.any(bad):
        x_bad, s_bad = xs[bad][0], shapes[bad][0]
        if body:
            raise InvalidShapeError(
                f"gamma branch: shape rho={s_bad:.6g} <= 0 at x={x_bad:.6g} "
                f"(bandwidth h={cfg.h} too large)")
        raise InvalidShapeError(
            f"Weibull branch: shape k={s_bad:.6g} <= 0 at x={x_bad:.6g} "
            f"(bandwidth b={cfg.b} too large)")
    if body:
        kern = gamma_pdf(values[None, :], shapes[:, None], cfg.scale)
        return np.mean(kern, axis=1), 0
    kern = weibull_pdf(values[None, :], shapes[:, None], cfg.scale)
    singular = (values[None, :] == 0) & (shapes[:, None] < 1)
    skipped = int(np.count_nonzero(singular))
    if skipped:
        # a zero observation contributes nothing to a k < 1 tail point,
        # but still counts in n
        kern = np.where(singular, 0.0, kern)
    return np.mean(kern, axis=1), skipped


def _evaluate(xs, values, cfg):
    out = np.empty(len(xs))
    skipped = 0
    step = max(1, _CHUNK_ELEMENTS // max(values.size, 1))
    for lo in range(0, len(xs), step):
        est, sk = _branch_rows(xs[lo:lo + step], values, cfg)
        out[lo:lo + step] = est
        skipped += sk
    return out, skipped


def estimate_at(x, sample, cfg):
    """Density estimate at ``x``.

    Gamma kernel for ``x <= a``, Weibull kernel beyond. Observations at 0
    are dropped from tail points whose Weibull shape is below 1, where the
    kernel is infinite there.
    """
    if x < 0:
        raise ValueError(f"estimator is defined on [0, inf), got x={x}")
    return float(_branch_rows([x], sample.values, cfg)[0][0])


def default_grid(sample, points=512, spacing="linear", upper_q=0.999,
                 lower=None):
    """Evaluation grid from ``lower`` to the sample's ``upper_q`` quantile.

    The default lower end for linear spacing is 0; log spacing needs a
    positive lower end and defaults to 1e-3 of the upper end.
    """
    upper = sample.quantile(upper_q)
    if spacing == "linear":
        lo = 0.0 if lower is None else lower
        return np.linspace(lo, upper, points)
    if spacing == "log":
        lo = upper * 1e-3 if lower is None else lower
        if lo <= 0:
            raise ValueError("log spacing needs a positive lower end")
        return np.geomspace(lo, upper, points)
    raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")


def _valid_mask(points, cfg):
    body = points <= cfg.a
    shapes = np.where(body, points + cfg.body_shift, points + cfg.c2 * cfg.b) / cfg.a
    return shapes > 0, body


def estimate_grid(grid_points, sample, cfg, on_invalid="raise", workers=1):
    """Evaluate the estimator over an increasing grid.

    ``on_invalid="raise"`` collects every point with a non-positive kernel
    shape into one :class:`EstimationError`. With ``"zero"`` those points
    evaluate to 0 and are counted in ``invalid_points``.
    """
    if on_invalid not in ("raise", "zero"):
        raise ValueError(f"on_invalid must be 'raise' or 'zero', got {on_invalid!r}")
    points = np.asarray(grid_points, dtype=float).ravel()
    if points.size > 1 and np.any(np.diff(points) <= 0):
        raise ValueError("grid points must be strictly increasing")
    if points.size and points[0] < 0:
        raise ValueError("grid points must be nonnegative")
    junction = int(np.searchsorted(points, cfg.a, side="right"))
    values = np.zeros(points.size)
    valid, body = _valid_mask(points, cfg)
    invalid = int(np.count_nonzero(~valid))
    if invalid and on_invalid == "raise":
        bad = points[~valid]
        head = ", ".join(f"{x:.6g}" for x in bad[:3])
        more = f" (and {invalid - 3} more)" if invalid > 3 else ""
        branches = sorted({"gamma" if b else "Weibull" for b in body[~valid]})
        raise EstimationError(
            f"{invalid} grid points have non-positive kernel shape in the "
            f"{'/'.join(branches)} branch (h={cfg.h}, b={cfg.b}): "
            f"x={head}{more}")

    # jobs are contiguous single-branch blocks, so results never depend on
    # how they are scheduled
    jobs = []
    for mask in (valid & body, valid & ~body):
        idx = np.flatnonzero(mask)
        if idx.size:
            jobs.extend(np.array_split(idx, max(1, min(workers, idx.size))))

    def run(idx):
        return _evaluate(points[idx], sample.values, cfg)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(idx) for idx in jobs]
    skipped = 0
    for idx, (est, sk) in zip(jobs, results):
        values[idx] = est
        skipped += sk
    return DensityGrid(points=points, values=values, junction_index=junction,
                       skipped_zeros=skipped, invalid_points=invalid)


def junction_jump(sample, cfg, eps):
    """``|f_G(a) - f_W(a + eps)|``: size of the splice discontinuity."""
    if not 0 < eps < cfg.a / 10:
        raise ValueError(f"eps must lie in (0, a/10), got {eps}")
    return abs(estimate_at(cfg.a, sample, cfg) - estimate_at(cfg.a + eps, sample, cfg))
