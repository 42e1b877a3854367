"""Simulation campaign, data splits, cross-validated training and evaluation."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .neural import TARGETS, NetworkSpec, NetworkWeights, predict, train
from .simulate import (DURATION, N_STEPS, SENSOR_NOISE, Scenario, add_sensor_noise,
                       simulate_response)
from .spectral import K_HEADING, K_HEIGHT_PERIOD, WELCH_POLICY, FeatureVector, normalize_mask, top_components, welch_psd
from .vessel import AFT_PRISM_FRACTION, DOFS, VesselParams
from .wave_model import N_COMPONENTS, OMEGA_MAX, OMEGA_MIN

log = logging.getLogger(__name__)

RANGES = {"h_s": (0.5, 2.5), "t_1": (4.0, 13.0), "mu_h": (0.0, 180.0), "speed": (0.0, 5.0)}
TARGET_FIELDS = {"hs": "h_s", "t1": "t_1", "mu": "mu_h"}
K_MAX = K_HEADING
N_FOLDS = 5
TEST_FRACTION = 0.10

MASKS = {
    "heave": ("heave",),
    "pitch": ("pitch",),
    "roll": ("roll",),
    "heave+pitch": ("heave", "pitch"),
    "heave+roll": ("heave", "roll"),
    "pitch+roll": ("pitch", "roll"),
    "3dof": ("heave", "pitch", "roll"),
}
CELLS = [f"{m}:{t}" for m in MASKS for t in TARGETS]


def parse_cell(name: str) -> tuple[tuple[str, ...], str]:
    try:
        mask_name, target = name.split(":")
        mask = MASKS[mask_name] if mask_name in MASKS else normalize_mask(mask_name)
    except (ValueError, KeyError):
        raise ValueError(f"invalid cell {name!r}; expected e.g. '3dof:hs' or 'heave+pitch:mu'") from None
    if target not in TARGETS:
        raise ValueError(f"invalid target in cell {name!r}; expected one of {TARGETS}")
    return mask, target


def cell_name(mask, target: str) -> str:
    mask = normalize_mask(mask)
    for name, m in MASKS.items():
        if m == mask:
            return f"{name}:{target}"
    raise ValueError(mask)


# -- scenarios and dataset ----------------------------------------------------

def scenario_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)[0])


def sample_scenarios(n: int, seed: int) -> list[Scenario]:
    """Independent uniform draws over the campaign ranges."""
    if n < 1:
        raise ValueError("need at least one scenario")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5CE]))
    draws = {name: rng.uniform(lo, hi, size=n) for name, (lo, hi) in RANGES.items()}
    return [
        Scenario(float(draws["h_s"][i]), float(draws["t_1"][i]), float(draws["mu_h"][i]),
                 float(draws["speed"][i]), scenario_seed(seed, i))
        for i in range(n)
    ]


def scenario_features(vessel: VesselParams, scenario: Scenario, noise: bool = True, k_max: int = K_MAX):
    """Top ``k_max`` ordinates/frequencies and total power for every DOF."""
    resp = simulate_response(vessel, scenario)
    if noise:
        resp = add_sensor_noise(resp)
    ords = np.empty((len(DOFS), k_max))
    freqs = np.empty((len(DOFS), k_max))
    m0 = np.empty(len(DOFS))
    for j, dof in enumerate(DOFS):
        psd = welch_psd(resp.series(dof), resp.dt, dof)
        ords[j], freqs[j] = top_components(psd, k_max)
        m0[j] = psd.m0
    return ords, freqs, m0


@dataclass
class Dataset:
    """Per-record scenario, targets and top-``k_max`` spectral features.

    Top-K selection is a sorted prefix, so the K=30 features of a record are
    the first 30 entries of its K=80 features.
    """

    h_s: np.ndarray
    t_1: np.ndarray
    mu_h: np.ndarray
    speed: np.ndarray
    seeds: np.ndarray
    ordinates: np.ndarray  # (n, 3, k_max)
    freqs: np.ndarray      # (n, 3, k_max)
    m0: np.ndarray         # (n, 3)
    manifest: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.h_s.size

    @property
    def k_max(self) -> int:
        return self.ordinates.shape[2]

    def scenario(self, i: int) -> Scenario:
        return Scenario(float(self.h_s[i]), float(self.t_1[i]), float(self.mu_h[i]),
                        float(self.speed[i]), int(self.seeds[i]))

    def targets(self, target: str) -> np.ndarray:
        return getattr(self, TARGET_FIELDS[target])

    def features(self, dof_mask, k: int, index=None) -> np.ndarray:
        """Feature matrix in :class:`FeatureVector` flat layout."""
        if k > self.k_max:
            raise ValueError(f"dataset stores only the top {self.k_max} components")
        mask = normalize_mask(dof_mask)
        sel = slice(None) if index is None else np.asarray(index)
        blocks = []
        for dof in mask:
            j = DOFS.index(dof)
            blocks += [self.ordinates[sel, j, :k], self.freqs[sel, j, :k], self.m0[sel, j, None]]
        blocks.append(self.speed[sel, None])
        return np.concatenate(blocks, axis=1)

    def feature_vector(self, i: int, dof_mask, k: int) -> FeatureVector:
        mask = normalize_mask(dof_mask)
        js = {d: DOFS.index(d) for d in mask}
        return FeatureVector({d: self.ordinates[i, j, :k] for d, j in js.items()},
                             {d: self.freqs[i, j, :k] for d, j in js.items()},
                             {d: float(self.m0[i, j]) for d, j in js.items()},
                             float(self.speed[i]), mask, k)


def build_manifest(n: int, seed: int, vessel: VesselParams, noise: bool, k_max: int = K_MAX) -> dict:
    prisms = vessel.prism_sections()
    return {
        "format": "sawb-dataset",
        "code_version": __version__,
        "n": int(n),
        "seed": int(seed),
        "ranges": {k: list(v) for k, v in RANGES.items()},
        "grid": {"omega_min": OMEGA_MIN, "omega_max": OMEGA_MAX, "n_components": N_COMPONENTS},
        "duration": DURATION,
        "n_steps": N_STEPS,
        "noise": dict(SENSOR_NOISE) if noise else None,
        "vessel": vessel.as_dict(),
        "roll_model": {"aft_prism_fraction": AFT_PRISM_FRACTION,
                       "forward_breadth": prisms[1].breadth,
                       "natural_roll_period": vessel.natural_roll_period},
        "welch": {d: {"segment": p.segment, "hop": p.hop, "overlap": p.overlap,
                      "n_segments": p.n_segments()} for d, p in WELCH_POLICY.items()},
        "k_max": int(k_max),
        "k_values": [K_HEIGHT_PERIOD, K_HEADING],
    }


_WORKER_STATE: dict = {}


def _init_sim_worker(vessel, noise, k_max):
    _WORKER_STATE.update(vessel=vessel, noise=noise, k_max=k_max)


def _simulate_one(job):
    i, scenario = job
    try:
        return scenario_features(_WORKER_STATE["vessel"], scenario, _WORKER_STATE["noise"], _WORKER_STATE["k_max"])
    except Exception as exc:  # re-raised in the parent with the scenario id
        raise RuntimeError(f"simulation of scenario {i} failed: {exc!r}") from exc


def default_parallelism() -> int:
    try:
        return max(1, int(os.environ.get("SAWB_PARALLELISM", "1")))
    except ValueError:
        return 1


def generate_dataset(n: int, seed: int, parallelism: int = 1, vessel: VesselParams | None = None,
                     noise: bool = True, k_max: int = K_MAX, progress=None) -> Dataset:
    """Run the simulation campaign; results do not depend on ``parallelism``."""
    vessel = vessel or VesselParams()
    scenarios = sample_scenarios(n, seed)
    jobs = list(enumerate(scenarios))
    if parallelism <= 1:
        _init_sim_worker(vessel, noise, k_max)
        results = []
        for job in jobs:
            results.append(_simulate_one(job))
            if progress:
                progress(len(results), n)
    else:
        with ProcessPoolExecutor(parallelism, initializer=_init_sim_worker,
                                 initargs=(vessel, noise, k_max)) as pool:
            results = list(pool.map(_simulate_one, jobs, chunksize=max(1, n // (8 * parallelism))))
    return Dataset(
        h_s=np.array([s.h_s for s in scenarios]),
        t_1=np.array([s.t_1 for s in scenarios]),
        mu_h=np.array([s.mu_h for s in scenarios]),
        speed=np.array([s.speed for s in scenarios]),
        seeds=np.array([s.seed for s in scenarios], dtype=np.uint64),
        ordinates=np.stack([r[0] for r in results]),
        freqs=np.stack([r[1] for r in results]),
        m0=np.stack([r[2] for r in results]),
        manifest=build_manifest(n, seed, vessel, noise, k_max),
    )


def regenerate_record(manifest: dict, index: int):
    """Rebuild one record from the manifest alone."""
    scenario = sample_scenarios(manifest["n"], manifest["seed"])[index]
    vessel = VesselParams(**manifest["vessel"])
    return scenario, scenario_features(vessel, scenario, manifest["noise"] is not None, manifest["k_max"])


# -- splits and metrics -------------------------------------------------------

@dataclass(frozen=True)
class Split:
    test: np.ndarray
    folds: tuple[np.ndarray, ...]  # validation indices per fold

    @property
    def pool(self) -> np.ndarray:
        return np.sort(np.concatenate(self.folds))

    def fold(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """(train, validation) indices of fold ``j``."""
        train_idx = np.sort(np.concatenate([f for i, f in enumerate(self.folds) if i != j]))
        return train_idx, self.folds[j]


def split_and_fold(data, seed: int, n_folds: int = N_FOLDS) -> Split:
    """Hold out floor(10 %) for testing; partition the rest into folds.

    Fold sizes differ by at most one, larger folds first.
    """
    n = data if isinstance(data, (int, np.integer)) else len(data)
    if n < 10:
        raise ValueError("need at least 10 records to split")
    perm = np.random.default_rng(np.random.SeedSequence([int(seed), 0xF01D])).permutation(n)
    n_test = int(np.floor(TEST_FRACTION * n))
    test, pool = np.sort(perm[:n_test]), perm[n_test:]
    base, extra = divmod(pool.size, n_folds)
    sizes = [base + (1 if j < extra else 0) for j in range(n_folds)]
    bounds = np.cumsum([0] + sizes)
    folds = tuple(np.sort(pool[bounds[j]:bounds[j + 1]]) for j in range(n_folds))
    return Split(test, folds)


def rmse(estimates, truths) -> float:
    e, t = np.asarray(estimates, dtype=float), np.asarray(truths, dtype=float)
    if e.shape != t.shape or e.size == 0:
        raise ValueError("rmse needs equal-length, non-empty inputs")
    return float(np.sqrt(np.mean((t - e) ** 2)))


def r_squared(estimates, truths) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    e, t = np.asarray(estimates, dtype=float), np.asarray(truths, dtype=float)
    if e.shape != t.shape or e.size < 2:
        raise ValueError("r_squared needs equal-length inputs with at least two values")
    ss_tot = np.sum((t - t.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError("r_squared undefined when all truths are identical")
    return float(1.0 - np.sum((t - e) ** 2) / ss_tot)


# -- cross-validated training -------------------------------------------------

def fold_seed(master_seed: int, cell: str, fold: int) -> int:
    mask, target = parse_cell(cell)
    mi = list(MASKS.values()).index(mask)
    ti = TARGETS.index(target)
    return int(np.random.SeedSequence([int(master_seed), mi, ti, fold]).generate_state(1)[0])


@dataclass
class CellResult:
    cell: str
    fold_rmse: list[float]
    fold_r2: list[float]
    test_rmse: list[float]
    test_r2: list[float]
    test_index: np.ndarray
    test_truth: np.ndarray
    test_estimate: np.ndarray   # mean over the fold models
    models: list[NetworkWeights] = field(default_factory=list, repr=False)

    @property
    def target(self) -> str:
        return parse_cell(self.cell)[1]

    @property
    def rmse_mean(self) -> float:
        return float(np.mean(self.fold_rmse))

    @property
    def rmse_std(self) -> float:
        return float(np.std(self.fold_rmse))

    @property
    def r2_mean(self) -> float:
        return float(np.mean(self.fold_r2))

    @property
    def test_rmse_mean(self) -> float:
        return float(np.mean(self.test_rmse))

    @property
    def test_rmse_std(self) -> float:
        return float(np.std(self.test_rmse))

    @property
    def test_r2_mean(self) -> float:
        return float(np.mean(self.test_r2))

    @property
    def residuals(self) -> np.ndarray:
        return self.test_estimate - self.test_truth


def train_fold(dataset: Dataset, split: Split, cell: str, fold: int, master_seed: int,
               epochs: int | None = None) -> NetworkWeights:
    mask, target = parse_cell(cell)
    spec = NetworkSpec.for_cell(mask, target)
    tr, va = split.fold(fold)
    y = dataset.targets(target)
    weights, history = train(spec, (dataset.features(mask, spec.k, tr), y[tr]),
                             (dataset.features(mask, spec.k, va), y[va]),
                             seed=fold_seed(master_seed, cell, fold), epochs=epochs)
    weights.meta["val_loss"] = history["val_loss"][-1] if history["val_loss"] else None
    weights.meta["cell"] = cell
    weights.meta["fold"] = fold
    return weights


def evaluate_cell(dataset: Dataset, split: Split, cell: str, models: list[NetworkWeights]) -> CellResult:
    mask, target = parse_cell(cell)
    y = dataset.targets(target)
    if len(models) != len(split.folds):
        raise ValueError(f"{cell}: expected {len(split.folds)} fold models, got {len(models)}")
    k = models[0].spec.k
    x_test = dataset.features(mask, k, split.test)
    fold_rmse, fold_r2, test_rmse, test_r2, test_preds = [], [], [], [], []
    for j, w in enumerate(models):
        _, va = split.fold(j)
        pv = predict(w, dataset.features(mask, k, va))
        fold_rmse.append(rmse(pv, y[va]))
        fold_r2.append(r_squared(pv, y[va]))
        pt = predict(w, x_test)
        test_preds.append(pt)
        test_rmse.append(rmse(pt, y[split.test]))
        test_r2.append(r_squared(pt, y[split.test]))
    return CellResult(cell, fold_rmse, fold_r2, test_rmse, test_r2, split.test.copy(),
                      y[split.test].copy(), np.mean(test_preds, axis=0), list(models))


_TRAIN_STATE: dict = {}


def _init_train_worker(dataset, split, master_seed, epochs):
    _TRAIN_STATE.update(dataset=dataset, split=split, master_seed=master_seed, epochs=epochs)


def _train_job(job):
    cell, fold = job
    s = _TRAIN_STATE
    return train_fold(s["dataset"], s["split"], cell, fold, s["master_seed"], s["epochs"])


def train_cells(dataset: Dataset, split: Split, cells, master_seed: int, parallelism: int = 1,
                epochs: int | None = None, progress=None) -> dict[str, list[NetworkWeights]]:
    jobs = [(c, j) for c in cells for j in range(len(split.folds))]
    if parallelism <= 1:
        _init_train_worker(dataset, split, master_seed, epochs)
        models = []
        for job in jobs:
            models.append(_train_job(job))
            if progress:
                progress(len(models), len(jobs))
    else:
        with ProcessPoolExecutor(parallelism, initializer=_init_train_worker,
                                 initargs=(dataset, split, master_seed, epochs)) as pool:
            models = list(pool.map(_train_job, jobs))
    out: dict[str, list[NetworkWeights]] = {c: [] for c in cells}
    for (c, _), w in zip(jobs, models):
        out[c].append(w)
    return out


@dataclass
class EvalReport:
    cells: dict[str, CellResult]

    def __getitem__(self, cell: str) -> CellResult:
        return self.cells[cell]

    def __len__(self) -> int:
        return len(self.cells)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def table(name, header, rows):
            path = out / name
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            written.append(path)

        table("metrics.csv", ["cell", "fold", "rmse", "r2"],
              [(c, j, repr(r.fold_rmse[j]), repr(r.fold_r2[j]))
               for c, r in self.cells.items() for j in range(len(r.fold_rmse))])
        test_rows = []
        for c, r in self.cells.items():
            test_rows += [(c, j, repr(r.test_rmse[j]), repr(r.test_r2[j])) for j in range(len(r.test_rmse))]
            test_rows.append((c, "ensemble", repr(rmse(r.test_estimate, r.test_truth)),
                              repr(r_squared(r.test_estimate, r.test_truth))))
        table("test_metrics.csv", ["cell", "fold", "rmse", "r2"], test_rows)
        table("summary.csv",
              ["cell", "rmse_mean", "rmse_std", "r2_mean", "test_rmse_mean", "test_rmse_std", "test_r2_mean"],
              [(c, *(repr(v) for v in (r.rmse_mean, r.rmse_std, r.r2_mean, r.test_rmse_mean,
                                        r.test_rmse_std, r.test_r2_mean)))
               for c, r in self.cells.items()])
        table("residuals.csv", ["cell", "index", "truth", "estimate", "residual"],
              [(c, int(i), repr(float(t)), repr(float(e)), repr(float(e - t)))
               for c, r in self.cells.items()
               for i, t, e in zip(r.test_index, r.test_truth, r.test_estimate)])
        return written


def component_study(dataset: Dataset, seed: int, cells=None, parallelism: int = 1,
                    epochs: int | None = None, progress=None) -> EvalReport:
    """Cross-validate every requested (DOF selection, target) cell.

    Validation metrics come from each fold's held-out part; test metrics
    evaluate every fold model on the common 10 % test split.
    """
    cells = list(CELLS if cells is None else cells)
    split = split_and_fold(dataset, seed)
    models = train_cells(dataset, split, cells, seed, parallelism, epochs, progress)
    return EvalReport({c: evaluate_cell(dataset, split, c, models[c]) for c in cells})


# -- low-power analysis -------------------------------------------------------

@dataclass(frozen=True)
class PowerErrorTable:
    cell: str
    index: np.ndarray
    m0: np.ndarray          # (n, 3) heave, pitch, roll total power
    abs_error: np.ndarray

    def column(self, dof: str) -> np.ndarray:
        return self.m0[:, DOFS.index(dof)]

    def spearman(self, dof: str) -> float:
        return float(stats.spearmanr(self.column(dof), self.abs_error).statistic)


def power_error_analysis(report: EvalReport, dataset: Dataset, cells=None) -> dict[str, PowerErrorTable]:
    """Response total power against absolute test-split error for each cell."""
    cells = list(report.cells if cells is None else cells)
    out = {}
    for c in cells:
        r = report[c]
        out[c] = PowerErrorTable(c, r.test_index.copy(), dataset.m0[r.test_index].copy(), np.abs(r.residuals))
    return out


def write_power_error(tables: dict[str, PowerErrorTable], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "index", "m0_heave", "m0_pitch", "m0_roll", "abs_error"])
        for c, t in tables.items():
            for i, m, e in zip(t.index, t.m0, t.abs_error):
                w.writerow([c, int(i), *(repr(float(v)) for v in m), repr(float(e))])
    return path
