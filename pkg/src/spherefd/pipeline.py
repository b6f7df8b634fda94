"""End-to-end box-counting runs, reports, plot data and benchmarks."""

from __future__ import annotations

import csv
import io
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dimension import BoxCountSeries, FitResult, fit_slope
from .errors import ConfigError
from .exact import exact_box_counts, length_schedule
from .neighbors import build_neighbor_list
from .radii import RadType
from .structure import Structure, load_xyz, write_xyz
from .surface import SurfaceAlgorithm, SurfaceFlags, find_surface_atoms
from .voxel import count_boxes_grid, gen_surface_points, grid_frame, voxelise

log = logging.getLogger(__name__)

# run parameter -> canonical camelCase name
TABLE_NAMES = {
    "inp_file_path": "inpFilePath",
    "rad_type": "radType",
    "rad_mult": "radMult",
    "find_surf_alg": "findSurfAlg",
    "alpha_mult": "alphaMult",
    "trim_len": "trimLen",
    "min_sample": "minSample",
    "conf_lvl": "confLvl",
    "rm_in_surf": "rmInSurf",
    "voxel_surf": "voxelSurf",
    "num_points": "numPoints",
    "grid_num": "gridNum",
    "exact_surf": "exactSurf",
    "min_len_mult": "minLenMult",
    "max_len_mult": "maxLenMult",
    "num_cpus": "numCPUs",
    "num_box_len": "numBoxLen",
}


@dataclass
class RunConfig:
    inp_file_path: str | None = None
    rad_type: str = "atomic"
    rad_mult: float = 1.2
    find_surf_alg: str = "alphaShape"
    alpha_mult: float = 2.0
    trim_len: bool = True
    min_sample: int = 6
    conf_lvl: float = 95
    rm_in_surf: bool = True
    voxel_surf: bool = True
    num_points: int = 10000
    grid_num: int = 1024
    exact_surf: bool = True
    min_len_mult: float = 0.25
    max_len_mult: float = 1.0
    num_cpus: int = 8
    num_box_len: int = 10
    num_neigh_threshold: int = 12
    out_dir: str | None = None
    dump_surface_atoms: bool = False
    dump_points: bool = False
    dump_voxels: bool = False
    dump_boxes: bool = False
    plot: bool = False
    verbose: bool = False

    def table_params(self) -> dict:
        """Parameters keyed by their canonical camelCase names."""
        return {TABLE_NAMES[k]: getattr(self, k) for k in TABLE_NAMES}

    def validate(self):
        if not (self.voxel_surf or self.exact_surf):
            raise ConfigError("both surface representations are disabled; nothing to run")
        try:
            RadType(self.rad_type)
            SurfaceAlgorithm(self.find_surf_alg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        checks = [
            (self.rad_mult > 0, "radMult must be positive"),
            (self.alpha_mult > 0, "alphaMult must be positive"),
            (self.min_sample >= 3, "minSample must be at least 3"),
            (0 < self.conf_lvl < 100, "confLvl must be a percentage in (0, 100)"),
            (self.num_points >= 1, "numPoints must be positive"),
            (self.grid_num >= 4, "gridNum must be at least 4"),
            (self.min_len_mult > 0, "minLenMult must be positive"),
            (self.max_len_mult > 0, "maxLenMult must be positive"),
            (self.num_cpus >= 1, "numCPUs must be positive"),
            (self.num_box_len >= 2, "numBoxLen must be at least 2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)


@dataclass
class Representation:
    name: str
    series: BoxCountSeries
    fit: FitResult


@dataclass
class RunReport:
    config: RunConfig
    label: str
    n_atoms: int
    n_surface: int
    voxel: Representation | None = None
    exact: Representation | None = None
    timings: dict = field(default_factory=dict)

    @property
    def representations(self) -> list[Representation]:
        return [r for r in (self.voxel, self.exact) if r is not None]


@contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    try:
        yield
    except Exception as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise
    timings[name] = time.perf_counter() - start
    log.info("%s: %.3f s", name, timings[name])


def run_structure(structure: Structure, config: RunConfig, label: str = "structure",
                  write: bool = True) -> RunReport:
    """Run the enabled counting pipelines on an in-memory structure."""
    config.validate()
    timings = {}
    with _stage("neighbors", timings):
        nlist = build_neighbor_list(structure, config.rad_mult)
    with _stage("surface", timings):
        if config.rm_in_surf:
            flags = find_surface_atoms(structure, nlist, config.find_surf_alg,
                                       config.alpha_mult, config.num_neigh_threshold)
        else:
            # inner surfaces kept: every atom contributes
            flags = SurfaceFlags.all_surface(len(structure))
    report = RunReport(config, label, len(structure), int(flags.flags.sum()), timings=timings)

    cloud = grid = classifications = None
    if config.voxel_surf:
        with _stage("voxel_points", timings):
            cloud = gen_surface_points(structure, nlist, flags, config.num_points,
                                       config.rm_in_surf, config.num_cpus)
        with _stage("voxel_grid", timings):
            origin, edge = grid_frame(structure)
            grid = voxelise(cloud, config.grid_num, origin, edge)
        with _stage("voxel_count", timings):
            series = count_boxes_grid(grid)
        with _stage("voxel_fit", timings):
            fit = fit_slope(series, config.min_sample, config.conf_lvl, config.trim_len)
        report.voxel = Representation("voxel", series, fit)
    if config.exact_surf:
        with _stage("exact_count", timings):
            lengths = length_schedule(structure, config.min_len_mult, config.max_len_mult,
                                      config.num_box_len)
            series, classifications = exact_box_counts(
                structure, nlist, flags, lengths, config.rm_in_surf, config.num_cpus,
                keep_boxes=True)
        with _stage("exact_fit", timings):
            fit = fit_slope(series, config.min_sample, config.conf_lvl, config.trim_len)
        report.exact = Representation("exact", series, fit)

    if write and config.out_dir:
        with _stage("write", timings):
            out = Path(config.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_report(report, out)
            emit_plot_data(report, out, svg=config.plot)
            _write_dumps(config, out, label, structure, flags, cloud, grid, classifications)
    return report


def run_box_cnt(config: RunConfig) -> RunReport:
    """Load the configured XYZ file and run every enabled pipeline."""
    config.validate()
    if not config.inp_file_path:
        raise ConfigError("no input file given")
    timings = {}
    with _stage("load", timings):
        structure = load_xyz(config.inp_file_path, config.rad_type)
    report = run_structure(structure, config, Path(config.inp_file_path).stem)
    report.timings = {**timings, **report.timings}
    return report


# -- serialisation ------------------------------------------------------------

FIT_FIELDS = ["label", "representation", "d_box", "ci_low", "ci_high", "r2",
              "l_min", "l_max", "points_used"]


def fit_rows(report: RunReport) -> list[dict]:
    return [{"label": report.label, "representation": rep.name, "d_box": rep.fit.d_box,
             "ci_low": float(rep.fit.ci[0]), "ci_high": float(rep.fit.ci[1]),
             "r2": rep.fit.r2, "l_min": rep.fit.l_min, "l_max": rep.fit.l_max,
             "points_used": rep.fit.points_used}
            for rep in report.representations]


def fit_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, FIT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in fit_rows(report):
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def key_value_block(report: RunReport) -> str:
    lines = [f"label={report.label}", f"n_atoms={report.n_atoms}",
             f"n_surface={report.n_surface}"]
    for row in fit_rows(report):
        rep = row["representation"]
        for k in FIT_FIELDS[2:]:
            v = row[k]
            lines.append(f"{rep}.{k}={v!r}" if isinstance(v, float) else f"{rep}.{k}={v}")
        series = getattr(report, rep).series
        lines.append(f"{rep}.box_lengths=" + ",".join(repr(float(x)) for x in series.lengths))
        lines.append(f"{rep}.box_counts=" + ",".join(str(int(c)) for c in series.counts))
    return "\n".join(lines) + "\n"


def format_report(report: RunReport) -> str:
    out = [f"{report.label}: {report.n_atoms} atoms, {report.n_surface} surface atoms"]
    for rep in report.representations:
        f = rep.fit
        out.append(f"  {rep.name:<5s} D_box = {f.d_box:.4f}  "
                   f"{report.config.conf_lvl:g}% CI [{f.ci[0]:.4f}, {f.ci[1]:.4f}]  "
                   f"R2 = {f.r2:.4f}  lengths {f.l_min:.4g}-{f.l_max:.4g} A  "
                   f"({f.points_used}/{len(rep.series)} points)")
    return "\n".join(out) + "\n"


def write_report(report: RunReport, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    text = format_report(report) + "\n[results]\n" + key_value_block(report)
    paths.append(out_dir / "report.txt")
    paths[-1].write_text(text)
    paths.append(out_dir / "fit.csv")
    paths[-1].write_text(fit_csv(report))
    for rep in report.representations:
        p = out_dir / f"counts_{rep.name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["box_length", "box_count"])
            for l, c in zip(rep.series.lengths, rep.series.counts):
                w.writerow([repr(float(l)), int(c)])
        paths.append(p)
    p = out_dir / "timings.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stage", "seconds"])
        for k, v in report.timings.items():
            w.writerow([k, f"{v:.6f}"])
    paths.append(p)
    return paths


def emit_plot_data(report: RunReport, out_dir, svg: bool = False) -> list[Path]:
    """Log-log points with fit-window flags and the fitted line, per representation.

    x is log10(1 / box length), so the line is ``y = d_box * x + intercept``.
    """
    out_dir = Path(out_dir)
    paths = []
    for rep in report.representations:
        fit = rep.fit
        p = out_dir / f"plot_{rep.name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["log10_length", "log10_count", "in_window"])
            for k, (l, c) in enumerate(zip(rep.series.lengths, rep.series.counts)):
                w.writerow([repr(float(np.log10(l))), repr(float(np.log10(c))),
                            int(fit.start <= k < fit.stop)])
        paths.append(p)
        x_lo = float(-np.log10(fit.l_max))
        x_hi = float(-np.log10(fit.l_min))
        p = out_dir / f"fitline_{rep.name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["slope", "intercept", "x_start", "x_end", "y_start", "y_end"])
            w.writerow([repr(fit.d_box), repr(fit.intercept), repr(x_lo), repr(x_hi),
                        repr(fit.d_box * x_lo + fit.intercept),
                        repr(fit.d_box * x_hi + fit.intercept)])
        paths.append(p)
        if svg:
            paths.append(_plot_svg(rep, out_dir / f"plot_{rep.name}.svg"))
    return paths


def _plot_svg(rep: Representation, path: Path) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = rep.series.log_inv_lengths
    y = rep.series.log_counts
    win = rep.fit.in_window
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(x, y, "o", mfc="none", color="grey", label="box counts")
    ax.plot(x[win], y[win], "o", color="C0", label="fit window")
    xs = np.array([x[win].min(), x[win].max()])
    ax.plot(xs, rep.fit.d_box * xs + rep.fit.intercept, "-", color="C3",
            label=f"D_box = {rep.fit.d_box:.3f}, R2 = {rep.fit.r2:.3f}")
    ax.set_xlabel("log10(1 / box length)")
    ax.set_ylabel("log10(box count)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def _write_dumps(config, out, label, structure, flags, cloud, grid, classifications):
    if config.dump_surface_atoms:
        idx = flags.indices
        write_xyz(out / f"{label}_surface_atoms.xyz",
                  [structure.elements[i] for i in idx], structure.positions[idx],
                  "surface atoms")
    if config.dump_points and cloud is not None:
        write_xyz(out / f"{label}_points.xyz",
                  [structure.elements[i] for i in cloud.owner_atom], cloud.points,
                  "surface points, element of owner atom")
    if config.dump_voxels and grid is not None:
        centres = grid.occupied_centres()
        write_xyz(out / f"{label}_voxels.xyz", ["V"] * len(centres), centres,
                  f"occupied voxel centres, edge {grid.voxel_edge!r}")
    if config.dump_boxes and classifications is not None:
        for k, cls in enumerate(classifications):
            kept = cls.grid.centres(cls.surface)
            rejected = cls.grid.centres(cls.rejected)
            write_xyz(out / f"{label}_boxes_{k:02d}.xyz",
                      ["K"] * len(kept) + ["R"] * len(rejected),
                      np.concatenate([kept, rejected]),
                      f"box length {cls.grid.box_len!r}; K kept, R rejected")


# -- benchmarking -------------------------------------------------------------

@dataclass
class BenchRow:
    label: str
    n_atoms: int
    n_surface: int
    pipeline: str
    runs: int
    kept: int
    mean: float
    median: float


def iqr_filter(times) -> np.ndarray:
    """Drop values outside 1.5 interquartile ranges of the quartiles."""
    times = np.asarray(times, dtype=float)
    q1, q3 = np.percentile(times, [25, 75])
    iqr = q3 - q1
    return times[(times >= q1 - 1.5 * iqr) & (times <= q3 + 1.5 * iqr)]


PIPELINE_STAGES = {
    "voxel": ("voxel_points", "voxel_grid", "voxel_count", "voxel_fit"),
    "exact": ("exact_count", "exact_fit"),
}


def bench(specs, repeats: int = 5, config: RunConfig | None = None) -> list[BenchRow]:
    """Time both pipelines on generated structures.

    Each pipeline's time is the sum of its own stages; the shared neighbour
    and surface stages are excluded.
    """
    from .synth import generate_structure

    if repeats < 3:
        raise ConfigError("bench needs at least 3 repeats")
    config = config or RunConfig()
    rows = []
    for spec in specs:
        structure = generate_structure(spec, config.rad_type)
        samples = {name: [] for name in PIPELINE_STAGES}
        n_surface = 0
        for _ in range(repeats):
            report = run_structure(structure, config, spec.label, write=False)
            n_surface = report.n_surface
            for name, stages in PIPELINE_STAGES.items():
                if all(s in report.timings for s in stages):
                    samples[name].append(sum(report.timings[s] for s in stages))
        for name, times in samples.items():
            if not times:
                continue
            kept = iqr_filter(times)
            rows.append(BenchRow(spec.label, len(structure), n_surface, name, len(times),
                                 len(kept), float(kept.mean()), float(np.median(times))))
    return rows


def bench_csv(rows) -> str:
    buf = io.StringIO()
    names = [f.name for f in fields(BenchRow)]
    writer = csv.DictWriter(buf, names, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))
    return buf.getvalue()
