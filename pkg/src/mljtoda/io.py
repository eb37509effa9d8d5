"""CSV/JSON writers for run outputs and the replayable run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .analysis.lyapunov import LyapunovSeries
from .analysis.section import SectionResult

OUTPUT_DIR_ENV = "MLJTODA_OUTPUT_DIR"
SECTION_HEADER = ("orbit", "y", "py", "t_cross")
LYAPUNOV_HEADER = ("t", "chi_mean", "chi_min", "chi_max")


def artifact_version() -> str:
    try:
        return metadata.version("mljtoda")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or "runs")


def fmt(x) -> str:
    """Round-trip decimal: 17 significant digits."""
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def write_rows(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int, np.integer)) else fmt(v) for v in row])
    return path


def write_section(result: SectionResult, csv_path: Path, json_path: Path) -> list[Path]:
    rows = ((k, y, py, t) for k, o in enumerate(result.orbits)
            for y, py, t in zip(o.y, o.py, o.t_cross))
    write_rows(csv_path, SECTION_HEADER, rows)
    doc = {"metadata": result.metadata(),
           "orbits": [{"initial": list(o.initial), "status": o.status,
                       "max_energy_error": fmt(o.max_energy_error),
                       "y": [fmt(v) for v in o.y], "py": [fmt(v) for v in o.py],
                       "t_cross": [fmt(v) for v in o.t_cross]} for o in result.orbits]}
    write_json(json_path, doc)
    return [Path(csv_path), Path(json_path)]


def read_section_csv(path: Path) -> dict[int, np.ndarray]:
    """``{orbit: array of (y, py, t_cross)}``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {int(k): data[data[:, 0] == k, 1:] for k in np.unique(data[:, 0])}


def write_lyapunov(series: LyapunovSeries, csv_path: Path, json_path: Path,
                   per_member: bool = False) -> list[Path]:
    header = list(LYAPUNOV_HEADER)
    cols = [series.times, series.chi_mean, series.chi_min, series.chi_max]
    if per_member:
        header += [f"chi_{k}" for k in range(series.n_samples)]
        cols += list(series.chi_samples)
    write_rows(csv_path, header, zip(*cols))
    doc = {"metadata": series.metadata(),
           "t": [fmt(v) for v in series.times],
           "chi_mean": [fmt(v) for v in series.chi_mean]}
    write_json(json_path, doc)
    return [Path(csv_path), Path(json_path)]


def read_lyapunov_csv(path: Path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """Everything needed to re-run a command and check its outputs byte for byte.

    ``argv`` is the exact argument list with the output location stripped;
    ``digests`` maps each output's file name to its SHA-256.
    """

    command: str
    parameters: dict
    seed: int | None
    artifact_version: str
    outputs: list[str]
    argv: list[str] = field(default_factory=list)
    digests: dict[str, str] = field(default_factory=dict)
    backend: str = ""
    status: str = "ok"

    @classmethod
    def build(cls, command, parameters, seed, outputs, argv, backend, status="ok"):
        outputs = [Path(p) for p in outputs]
        return cls(command, dict(parameters), seed, artifact_version(),
                   [p.name for p in outputs], list(argv),
                   {p.name: file_digest(p) for p in outputs}, backend, status)

    def write(self, path: Path) -> Path:
        return write_json(path, asdict(self))

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))

    def verify(self, directory: Path) -> dict[str, bool]:
        """Which outputs in ``directory`` match the recorded digests."""
        directory = Path(directory)
        return {name: (directory / name).exists()
                and file_digest(directory / name) == self.digests.get(name)
                for name in self.outputs}
