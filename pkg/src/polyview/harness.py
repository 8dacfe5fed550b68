"""Experiment runner: seeded training runs, M-sweeps, variance and validity
studies, aggregation, and self-check suites.

Every run is a pure function of its RunSpec: parameters come from the INIT
stream, epoch t trains on the TRAIN_BATCH stream keyed by t, and recorded
epochs evaluate on fresh EVAL_BATCH streams keyed by (epoch, batch index).
Equal specs therefore produce byte-identical CSV files, which also makes
sweeps resumable: a finished per-run file is trusted and skipped.

Evaluation protocol: at each recorded epoch the loss is averaged over
eval_batches fresh held-out batches (never the training batch), and the
bound/gap columns are derived from that average.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import streams
from .bounds import (
    bound_from_loss,
    mi_gap,
    offset_c,
    optimal_multiplicity,
    variance_bound_factor,
)
from .gaussian_world import (
    GaussianConfig,
    conditional_convergence_probe,
    mi_infomax_limit,
    mi_via_gaussian_kl,
    sample_batch,
    true_one_vs_rest_mi,
)
from .losses import (
    EmbeddingBatch,
    Method,
    compute_loss,
    l2_normalize,
    loss_multicrop,
    loss_pair_infonce,
)
from .tinynn import (
    AdamWState,
    TrainConfig,
    adamw_step,
    backward,
    finite_difference_grads,
    forward,
    init_params,
    loss_and_grads,
    max_relative_grad_error,
)

CSV_HEADER = "method,m,k,seed,epoch,train_loss,eval_loss,bound,true_mi,gap,relative_mi"


class NumericalFailure(RuntimeError):
    """Training hit a non-finite value; carries the partial record."""

    def __init__(self, message: str, record: "RunRecord"):
        super().__init__(message)
        self.record = record


@dataclass(frozen=True)
class RunSpec:
    """Complete description of one training run; determines every output byte."""

    method: Method
    m: int
    k: int = 1024
    sigma0_sq: float = 1.0
    sigma_sq: float = 0.25
    tau: float = 0.5
    train: TrainConfig = TrainConfig()
    seed: int = 0
    eval_batches: int = 16
    record_stride: int = 1

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"need M >= 2, got {self.m}")
        if self.k < 2:
            raise ValueError(f"need K >= 2, got {self.k}")
        if self.method is Method.INFONCE and self.m != 2:
            raise ValueError(f"infonce requires M = 2, got M = {self.m}")
        if not (self.sigma0_sq > 0 and self.sigma_sq > 0):
            raise ValueError("variances must be positive")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.eval_batches < 1:
            raise ValueError(f"eval_batches must be >= 1, got {self.eval_batches}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        streams.stream(self.seed, streams.TEST)  # validates the seed range

    def gaussian(self) -> GaussianConfig:
        return GaussianConfig(
            sigma0_sq=self.sigma0_sq,
            sigma_sq=self.sigma_sq,
            k=self.k,
            m=self.m,
            seed=self.seed,
        )

    def true_mi(self) -> float:
        return true_one_vs_rest_mi(self.sigma0_sq, self.sigma_sq, self.m)


@dataclass(frozen=True)
class RunRow:
    """One recorded epoch. train_loss is None at epoch 0 (nothing trained
    yet); relative_mi is None when the bound is not positive."""

    method: str
    m: int
    k: int
    seed: int
    epoch: int
    train_loss: float | None
    eval_loss: float
    bound: float
    true_mi: float
    gap: float
    relative_mi: float | None


def _fmt(value: float | None) -> str:
    return "NA" if value is None else "%.17g" % value


def _parse(value: str) -> float | None:
    return None if value == "NA" else float(value)


@dataclass(frozen=True)
class RunRecord:
    """All recorded rows of one run, in epoch order."""

    spec: RunSpec
    rows: tuple[RunRow, ...]

    def final(self) -> RunRow:
        if not self.rows:
            raise ValueError("record has no rows")
        return self.rows[-1]

    def to_csv_text(self) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for r in self.rows:
            out.write(
                f"{r.method},{r.m},{r.k},{r.seed},{r.epoch},"
                f"{_fmt(r.train_loss)},{_fmt(r.eval_loss)},{_fmt(r.bound)},"
                f"{_fmt(r.true_mi)},{_fmt(r.gap)},{_fmt(r.relative_mi)}\n"
            )
        return out.getvalue()

    def write(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            fh.write(self.to_csv_text())
        os.replace(tmp, path)


def read_csv_rows(path: str) -> list[RunRow]:
    """Parse a per-run CSV back into rows; raises on a malformed file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for line in reader:
            if len(line) != 11:
                raise ValueError(f"{path}: malformed row {line}")
            rows.append(
                RunRow(
                    method=line[0],
                    m=int(line[1]),
                    k=int(line[2]),
                    seed=int(line[3]),
                    epoch=int(line[4]),
                    train_loss=_parse(line[5]),
                    eval_loss=float(line[6]),
                    bound=float(line[7]),
                    true_mi=float(line[8]),
                    gap=float(line[9]),
                    relative_mi=_parse(line[10]),
                )
            )
    return rows


def _eval_row(spec: RunSpec, params, epoch: int, train_loss: float | None) -> RunRow:
    cfg = spec.gaussian()
    losses = []
    for j in range(spec.eval_batches):
        rng = streams.stream(spec.seed, streams.EVAL_BATCH, a=epoch, b=j)
        batch = sample_batch(cfg, rng)
        z = forward(params, batch.views)
        losses.append(compute_loss(spec.method, z, spec.tau).total)
    eval_loss = float(np.mean(losses))
    bound = bound_from_loss(spec.method, eval_loss, spec.k, spec.m)
    true_mi = spec.true_mi()
    rel = true_mi / bound if bound > 0 else None
    return RunRow(
        method=spec.method.value,
        m=spec.m,
        k=spec.k,
        seed=spec.seed,
        epoch=epoch,
        train_loss=train_loss,
        eval_loss=eval_loss,
        bound=bound,
        true_mi=true_mi,
        gap=mi_gap(true_mi, bound),
        relative_mi=rel,
    )


def run_training(spec: RunSpec) -> RunRecord:
    """Train the run described by spec, recording epoch 0, every
    record_stride epochs, and the final epoch. Raises NumericalFailure
    (with the partial record) if any loss or parameter goes non-finite."""
    params = init_params(streams.stream(spec.seed, streams.INIT))
    state = AdamWState.initial()
    cfg = spec.gaussian()
    rows = [_eval_row(spec, params, 0, None)]

    for epoch in range(1, spec.train.epochs + 1):
        batch_key = 1 if spec.train.fixed_dataset else epoch
        rng = streams.stream(spec.seed, streams.TRAIN_BATCH, a=batch_key)
        batch = sample_batch(cfg, rng)
        try:
            result, grads = loss_and_grads(params, batch.views, spec.method, spec.tau)
            if not math.isfinite(result.total):
                raise ValueError(f"training loss is {result.total}")
            params, state = adamw_step(params, grads, state, spec.train)
            if epoch % spec.record_stride == 0 or epoch == spec.train.epochs:
                rows.append(_eval_row(spec, params, epoch, result.total))
        except (ValueError, FloatingPointError) as exc:
            raise NumericalFailure(
                f"numerical failure at epoch {epoch}: {exc}",
                RunRecord(spec=spec, rows=tuple(rows)),
            ) from exc

    return RunRecord(spec=spec, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

_SWEEP_KEYS = {
    "methods", "m_values", "seeds", "k", "sigma0_sq", "sigma_sq", "tau",
    "train", "eval_batches", "record_stride", "jobs",
}
_TRAIN_KEYS = {
    "learning_rate", "weight_decay", "beta1", "beta2", "epsilon", "epochs",
    "fixed_dataset",
}


@dataclass(frozen=True)
class SweepSpec:
    """Cross product of methods x m_values x seeds with shared settings."""

    methods: tuple[Method, ...]
    m_values: tuple[int, ...]
    seeds: tuple[int, ...]
    k: int = 1024
    sigma0_sq: float = 1.0
    sigma_sq: float = 0.25
    tau: float = 0.5
    train: TrainConfig = TrainConfig()
    eval_batches: int = 16
    record_stride: int = 1
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "m_values", tuple(self.m_values))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not (self.methods and self.m_values and self.seeds):
            raise ValueError("methods, m_values, and seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if len(set(self.m_values)) != len(self.m_values):
            raise ValueError("m_values must be distinct")
        if Method.INFONCE in self.methods and any(m != 2 for m in self.m_values):
            raise ValueError("infonce only supports M = 2; use a separate sweep")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        self.expand()  # validates every combination via RunSpec

    def expand(self) -> list[RunSpec]:
        return [
            RunSpec(
                method=method,
                m=m,
                k=self.k,
                sigma0_sq=self.sigma0_sq,
                sigma_sq=self.sigma_sq,
                tau=self.tau,
                train=self.train,
                seed=seed,
                eval_batches=self.eval_batches,
                record_stride=self.record_stride,
            )
            for method in self.methods
            for m in self.m_values
            for seed in self.seeds
        ]

    def to_json_dict(self) -> dict:
        return {
            "methods": [m.value for m in self.methods],
            "m_values": list(self.m_values),
            "seeds": list(self.seeds),
            "k": self.k,
            "sigma0_sq": self.sigma0_sq,
            "sigma_sq": self.sigma_sq,
            "tau": self.tau,
            "train": {
                "learning_rate": self.train.learning_rate,
                "weight_decay": self.train.weight_decay,
                "beta1": self.train.beta1,
                "beta2": self.train.beta2,
                "epsilon": self.train.epsilon,
                "epochs": self.train.epochs,
                "fixed_dataset": self.train.fixed_dataset,
            },
            "eval_batches": self.eval_batches,
            "record_stride": self.record_stride,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SweepSpec":
        if not isinstance(data, dict):
            raise ValueError("sweep config must be a JSON object")
        unknown = set(data) - _SWEEP_KEYS
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        for key in ("methods", "m_values", "seeds"):
            if key not in data:
                raise ValueError(f"sweep config missing required key {key!r}")
        kwargs = dict(data)
        kwargs["methods"] = tuple(Method.from_token(t) for t in data["methods"])
        kwargs["m_values"] = tuple(int(m) for m in data["m_values"])
        kwargs["seeds"] = tuple(int(s) for s in data["seeds"])
        if "train" in data:
            tr = data["train"]
            if not isinstance(tr, dict):
                raise ValueError("train must be a JSON object")
            bad = set(tr) - _TRAIN_KEYS
            if bad:
                raise ValueError(f"unknown train config keys: {sorted(bad)}")
            kwargs["train"] = TrainConfig(**tr)
        return cls(**kwargs)


def run_path(out_dir: str, spec: RunSpec) -> str:
    return os.path.join(
        out_dir, f"{spec.method.value}_m{spec.m:02d}_seed{spec.seed:04d}.csv"
    )


def _is_complete(path: str, spec: RunSpec) -> bool:
    if not os.path.exists(path):
        return False
    try:
        rows = read_csv_rows(path)
    except (ValueError, OSError):
        return False
    return bool(rows) and rows[-1].epoch == spec.train.epochs


def _sweep_worker(args: tuple[RunSpec, str]) -> tuple[str, str, str]:
    spec, path = args
    try:
        run_training(spec).write(path)
        return path, "ran", ""
    except NumericalFailure as exc:
        exc.record.write(path + ".partial")
        return path, "failed", str(exc)


@dataclass(frozen=True)
class SweepResult:
    spec: RunSpec
    path: str
    status: str  # "ran" | "cached" | "failed"
    message: str = ""


def run_sweep(sweep: SweepSpec, out_dir: str) -> list[SweepResult]:
    """Execute every run of the sweep into out_dir, one CSV per
    (method, M, seed). Complete files from earlier invocations are trusted
    (runs are byte-deterministic) and skipped; failures are recorded and the
    sweep continues."""
    os.makedirs(out_dir, exist_ok=True)
    config_path = os.path.join(out_dir, "sweep.json")
    meta = sweep.to_json_dict()
    meta["eval_protocol"] = "fresh held-out batches at each recorded epoch"
    with open(config_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

    pending: list[tuple[RunSpec, str]] = []
    results: list[SweepResult] = []
    for spec in sweep.expand():
        path = run_path(out_dir, spec)
        if _is_complete(path, spec):
            results.append(SweepResult(spec=spec, path=path, status="cached"))
        else:
            pending.append((spec, path))

    if sweep.jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=sweep.jobs) as pool:
            outcomes = list(pool.map(_sweep_worker, pending))
    else:
        outcomes = [_sweep_worker(item) for item in pending]
    for (spec, path), (_, status, message) in zip(pending, outcomes):
        results.append(SweepResult(spec=spec, path=path, status=status, message=message))

    failures = [r for r in results if r.status == "failed"]
    if failures:
        with open(os.path.join(out_dir, "failures.json"), "w") as fh:
            json.dump(
                [{"path": r.path, "message": r.message} for r in failures],
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
    return results


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AggregateRow:
    method: str
    m: int
    n_seeds: int
    bound_mean: float
    bound_std: float
    gap_mean: float
    gap_std: float
    relative_mi_mean: float | None
    relative_mi_std: float | None
    single_seed: bool


@dataclass(frozen=True)
class AggregateTable:
    rows: tuple[AggregateRow, ...]

    def by_group(self) -> dict[tuple[str, int], AggregateRow]:
        return {(r.method, r.m): r for r in self.rows}

    def to_csv_text(self) -> str:
        out = io.StringIO()
        out.write(
            "method,m,n_seeds,bound_mean,bound_std,gap_mean,gap_std,"
            "relative_mi_mean,relative_mi_std,single_seed\n"
        )
        for r in self.rows:
            out.write(
                f"{r.method},{r.m},{r.n_seeds},{_fmt(r.bound_mean)},"
                f"{_fmt(r.bound_std)},{_fmt(r.gap_mean)},{_fmt(r.gap_std)},"
                f"{_fmt(r.relative_mi_mean)},{_fmt(r.relative_mi_std)},"
                f"{int(r.single_seed)}\n"
            )
        return out.getvalue()

    def to_gnuplot_text(self) -> str:
        """Whitespace table, one block per method (usable as gnuplot index)."""
        out = io.StringIO()
        out.write("# method m n_seeds bound_mean bound_std gap_mean gap_std"
                  " relative_mi_mean relative_mi_std\n")
        for i, method in enumerate(sorted({r.method for r in self.rows})):
            if i:
                out.write("\n\n")
            out.write(f"# method={method}\n")
            for r in self.rows:
                if r.method != method:
                    continue
                out.write(
                    f"{r.method} {r.m} {r.n_seeds} {_fmt(r.bound_mean)} "
                    f"{_fmt(r.bound_std)} {_fmt(r.gap_mean)} {_fmt(r.gap_std)} "
                    f"{_fmt(r.relative_mi_mean)} {_fmt(r.relative_mi_std)}\n"
                )
        return out.getvalue()


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values)
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


def aggregate(in_dir: str) -> AggregateTable:
    """Group final-epoch rows of every per-run CSV by (method, M) and report
    mean/std over seeds of bound, gap, and relative_mi. Groups with a single
    seed report std = 0 and are flagged."""
    paths = sorted(
        os.path.join(in_dir, name)
        for name in os.listdir(in_dir)
        if name.endswith(".csv") and not name.endswith(".partial")
    )
    if not paths:
        raise ValueError(f"no run CSV files found in {in_dir}")
    groups: dict[tuple[str, int], list[RunRow]] = {}
    for path in paths:
        rows = read_csv_rows(path)
        if not rows:
            raise ValueError(f"{path}: no data rows")
        final = max(rows, key=lambda r: r.epoch)
        groups.setdefault((final.method, final.m), []).append(final)

    out = []
    for (method, m), finals in sorted(groups.items()):
        bounds_ms = _mean_std([r.bound for r in finals])
        gaps_ms = _mean_std([r.gap for r in finals])
        rels = [r.relative_mi for r in finals if r.relative_mi is not None]
        rel_ms = _mean_std(rels) if rels else (None, None)
        out.append(
            AggregateRow(
                method=method,
                m=m,
                n_seeds=len(finals),
                bound_mean=bounds_ms[0],
                bound_std=bounds_ms[1],
                gap_mean=gaps_ms[0],
                gap_std=gaps_ms[1],
                relative_mi_mean=rel_ms[0],
                relative_mi_std=rel_ms[1],
                single_seed=len(finals) == 1,
            )
        )
    return AggregateTable(rows=tuple(out))


# ---------------------------------------------------------------------------
# Variance and validity studies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceReport:
    m: int
    k: int
    n_batches: int
    var_multicrop: float
    var_pair: float
    ratio: float
    ci_low: float
    ci_high: float
    theoretical_factor: float

    def lines(self) -> list[str]:
        return [
            f"multi-crop variance study: M={self.m} K={self.k} batches={self.n_batches}",
            f"  Var[multi-crop per-sample loss] = {self.var_multicrop:.6f}",
            f"  Var[pair per-sample loss]       = {self.var_pair:.6f}",
            f"  ratio = {self.ratio:.6f}   99% bootstrap CI [{self.ci_low:.6f}, {self.ci_high:.6f}]",
            f"  theoretical factor 2(2M-1)/(3M(M-1)) = {self.theoretical_factor:.6f}",
        ]


def variance_study(spec: RunSpec, n_batches: int) -> VarianceReport:
    """Empirical Var[per-sample Multi-Crop loss] / Var[per-sample pair loss]
    under a frozen random encoder, with a 99% bootstrap CI over batches.

    Whole batches are resampled (per-sample losses share negatives within a
    batch, so samples are not independent); 2000 bootstrap draws.
    """
    if n_batches < 32:
        raise ValueError(f"need at least 32 batches for a stable ratio, got {n_batches}")
    params = init_params(streams.stream(spec.seed, streams.INIT))
    cfg = spec.gaussian()
    k = spec.k
    stats = np.zeros((4, n_batches))  # sum/sumsq for multicrop and pair
    for i in range(n_batches):
        rng = streams.stream(spec.seed, streams.STUDY, a=i + 1)
        z = forward(params, sample_batch(cfg, rng).views)
        mc = loss_multicrop(z, spec.tau).per_sample
        pair = loss_pair_infonce(z, 0, 1, spec.tau).per_sample
        stats[:, i] = mc.sum(), (mc * mc).sum(), pair.sum(), (pair * pair).sum()

    def pooled_ratio(idx: np.ndarray) -> np.ndarray:
        n = idx.shape[-1] * k
        s = stats[:, idx].sum(axis=-1)  # (4, ...) sums over chosen batches
        var_mc = (s[1] - s[0] * s[0] / n) / (n - 1)
        var_pair = (s[3] - s[2] * s[2] / n) / (n - 1)
        return var_mc / var_pair

    full = np.arange(n_batches)
    ratio = float(pooled_ratio(full))
    boot_rng = streams.stream(spec.seed, streams.STUDY, a=0, b=1)
    draws = boot_rng.integers(0, n_batches, size=(2000, n_batches))
    boot = pooled_ratio(draws)
    lo, hi = np.quantile(boot, [0.005, 0.995])
    return VarianceReport(
        m=spec.m,
        k=k,
        n_batches=n_batches,
        var_multicrop=float((stats[1].sum() - stats[0].sum() ** 2 / (n_batches * k)) / (n_batches * k - 1)),
        var_pair=float((stats[3].sum() - stats[2].sum() ** 2 / (n_batches * k)) / (n_batches * k - 1)),
        ratio=ratio,
        ci_low=float(lo),
        ci_high=float(hi),
        theoretical_factor=variance_bound_factor(spec.m),
    )


@dataclass(frozen=True)
class ValidityReport:
    method: str
    m: int
    k: int
    n_batches: int
    gap_m: float
    mean_pairwise_gap: float
    diff: float
    diff_stderr: float

    def lines(self) -> list[str]:
        return [
            f"validity study: method={self.method} M={self.m} K={self.k} "
            f"batches={self.n_batches}",
            f"  M-view gap            = {self.gap_m:.6f}",
            f"  mean two-view gap     = {self.mean_pairwise_gap:.6f}",
            f"  difference (M - pair) = {self.diff:.6f} +/- {self.diff_stderr:.6f} (stderr)",
        ]


def validity_study(spec: RunSpec, n_batches: int = 64) -> ValidityReport:
    """Compare the M-view MI gap against the mean of the (M-1) two-view gaps
    under a frozen random encoder.

    The two-view gap for target view beta applies the same objective to the
    sub-batch of views (0, beta) with its M=2 offset, so at M=2 the two
    quantities coincide by construction.
    """
    if n_batches < 2:
        raise ValueError(f"need at least 2 batches, got {n_batches}")
    params = init_params(streams.stream(spec.seed, streams.INIT))
    cfg = spec.gaussian()
    true_m = spec.true_mi()
    true_2 = true_one_vs_rest_mi(spec.sigma0_sq, spec.sigma_sq, 2)

    gap_m = np.zeros(n_batches)
    gap_pair = np.zeros(n_batches)
    for i in range(n_batches):
        rng = streams.stream(spec.seed, streams.STUDY, a=i + 1)
        z = forward(params, sample_batch(cfg, rng).views)
        loss_m = compute_loss(spec.method, z, spec.tau).total
        gap_m[i] = true_m - bound_from_loss(spec.method, loss_m, spec.k, spec.m)
        pair_gaps = []
        for beta in range(1, spec.m):
            sub = EmbeddingBatch(z=np.ascontiguousarray(z.z[:, (0, beta), :]))
            loss_2 = compute_loss(spec.method, sub, spec.tau).total
            pair_gaps.append(true_2 - bound_from_loss(spec.method, loss_2, spec.k, 2))
        gap_pair[i] = np.mean(pair_gaps)

    diff = gap_m - gap_pair
    return ValidityReport(
        method=spec.method.value,
        m=spec.m,
        k=spec.k,
        n_batches=n_batches,
        gap_m=float(gap_m.mean()),
        mean_pairwise_gap=float(gap_pair.mean()),
        diff=float(diff.mean()),
        diff_stderr=float(diff.std(ddof=1) / math.sqrt(n_batches)),
    )


# ---------------------------------------------------------------------------
# Check suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class CheckReport:
    suite: str
    results: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        out = [f"suite {self.suite}:"]
        for r in self.results:
            mark = "ok  " if r.ok else "FAIL"
            out.append(f"  [{mark}] {r.name}: {r.detail}")
        out.append(f"suite {self.suite}: {'PASS' if self.ok else 'FAIL'}")
        return out


def _random_unit_batch(rng: np.random.Generator, k: int, m: int, d: int) -> EmbeddingBatch:
    return EmbeddingBatch(z=l2_normalize(rng.standard_normal((k, m, d))))


def _collapsed_batch(k: int, m: int, d: int = 8) -> EmbeddingBatch:
    e = np.zeros(d)
    e[0] = 1.0
    return EmbeddingBatch(z=np.broadcast_to(e, (k, m, d)).copy())


def _suite_oracles() -> list[CheckResult]:
    results = []
    worst = 0.0
    for s0 in (0.25, 0.5, 1.0, 2.0, 4.0):
        for s in (0.25, 0.5, 1.0, 2.0, 4.0):
            for m in range(2, 17):
                worst = max(worst, abs(
                    true_one_vs_rest_mi(s0, s, m) - mi_via_gaussian_kl(s0, s, m)
                ))
    results.append(CheckResult(
        "closed form vs matrix KL grid", worst < 1e-9, f"max |diff| = {worst:.3e}"
    ))

    probe = conditional_convergence_probe(
        GaussianConfig(sigma0_sq=1.0, sigma_sq=1.0, k=100_000, m=2, seed=7),
        m_values=[2, 8],
    )
    ok = True
    details = []
    for m, got in probe.items():
        want = 1.0 * 1.0 / (1.0 + (m - 1) * 1.0)
        se = want * math.sqrt(2.0 / 100_000)
        ok &= abs(got - want) < 5 * se
        details.append(f"M={m}: {got:.5f} vs {want:.5f}")
    results.append(CheckResult("conditional probe residual", ok, "; ".join(details)))

    limit = mi_infomax_limit(1.0, 0.25)
    near = true_one_vs_rest_mi(1.0, 0.25, 10**6)
    grid = [true_one_vs_rest_mi(1.0, 0.25, m) for m in range(2, 20)]
    mono = all(a < b for a, b in zip(grid, grid[1:]))
    results.append(CheckResult(
        "MI increases to the InfoMax limit",
        mono and abs(near - limit) < 1e-5 and grid[-1] < limit,
        f"MI(10^6) = {near:.8f}, limit = {limit:.8f}",
    ))
    return results


def _suite_grads() -> list[CheckResult]:
    results = []
    shapes = [(2, 2), (4, 3), (3, 4)]
    for method in Method:
        worst = 0.0
        for i, (k, m) in enumerate(shapes):
            if method is Method.INFONCE and m != 2:
                continue
            rng = streams.stream(11, streams.TEST, a=i)
            views = rng.standard_normal((k, m))
            params = init_params(streams.stream(11, streams.INIT, a=i))
            analytic = backward(params, views, method, 0.5)
            numeric = finite_difference_grads(params, views, method, 0.5)
            worst = max(worst, max_relative_grad_error(analytic, numeric))
        results.append(CheckResult(
            f"finite differences: {method.value}", worst < 1e-5,
            f"max relative error = {worst:.3e}",
        ))
    return results


def _suite_identities() -> list[CheckResult]:
    from .losses import (
        loss_arithmetic_pvc,
        loss_geometric_pvc,
        loss_suffstats,
    )

    results = []
    rng = streams.stream(13, streams.TEST)
    k, d = 16, 8
    z2 = _random_unit_batch(rng, k, 2, d)
    tau = 0.5

    a = loss_arithmetic_pvc(z2, tau).total
    g = loss_geometric_pvc(z2, tau).total
    results.append(CheckResult(
        "arithmetic = geometric at M=2", abs(a - g) < 1e-12, f"|diff| = {abs(a - g):.3e}"
    ))

    s = loss_suffstats(z2, tau).total
    results.append(CheckResult(
        "suffstats = poly-view loss at M=2 (both reduce to the 2K-1 candidate"
        " two-view loss)", abs(s - a) < 1e-12, f"|diff| = {abs(s - a):.3e}"
    ))

    mc = loss_multicrop(z2, tau).total
    inf = compute_loss(Method.INFONCE, z2, tau).total
    results.append(CheckResult(
        "multicrop = infonce at M=2", abs(mc - inf) < 1e-12, f"|diff| = {abs(mc - inf):.3e}"
    ))

    for k_c, m_c in ((8, 2), (6, 4)):
        zc = _collapsed_batch(k_c, m_c)
        sentinel = math.log(k_c * m_c - m_c + 1)
        worst = max(
            abs(loss_arithmetic_pvc(zc, tau).total - sentinel),
            abs(loss_geometric_pvc(zc, tau).total - sentinel),
            abs(loss_suffstats(zc, tau).total - sentinel),
        )
        worst_mc = abs(loss_multicrop(zc, tau).total - math.log(k_c))
        bound = bound_from_loss(Method.GEOMETRIC_PVC, sentinel, k_c, m_c)
        results.append(CheckResult(
            f"collapse sentinels at K={k_c}, M={m_c}",
            worst < 1e-12 and worst_mc < 1e-12 and bound == 0.0,
            f"poly/test |diff| = {worst:.3e}, multicrop |diff| = {worst_mc:.3e}",
        ))
    return results


def _suite_invariants() -> list[CheckResult]:
    from .losses import loss_arithmetic_pvc, loss_geometric_pvc

    results = []
    tau = 0.5
    strict = 0
    total = 0
    ordered = True
    for i in range(50):
        rng = streams.stream(17, streams.TEST, a=i)
        z = _random_unit_batch(rng, 8, 3, 8)
        a = loss_arithmetic_pvc(z, tau).total
        g = loss_geometric_pvc(z, tau).total
        ordered &= a <= g + 1e-12
        strict += a < g
        total += 1
    results.append(CheckResult(
        "arithmetic <= geometric (Jensen)", ordered and strict >= 45,
        f"ordered on {total}/{total}, strict on {strict}/{total}",
    ))

    worst = 0.0
    for i in range(10):
        rng = streams.stream(19, streams.TEST, a=i)
        z = _random_unit_batch(rng, 8, 4, 8)
        perm = rng.permutation(4)
        zp = EmbeddingBatch(z=np.ascontiguousarray(z.z[:, perm, :]))
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        zr = EmbeddingBatch(z=z.z @ q.T)
        for method in (Method.MULTICROP, Method.ARITHMETIC_PVC,
                       Method.GEOMETRIC_PVC, Method.SUFFSTATS):
            base = compute_loss(method, z, tau).total
            worst = max(
                worst,
                abs(compute_loss(method, zp, tau).total - base),
                abs(compute_loss(method, zr, tau).total - base),
            )
    results.append(CheckResult(
        "view permutation and orthogonal map invariance", worst < 1e-12,
        f"max |change| = {worst:.3e}",
    ))

    factors = [variance_bound_factor(m) for m in range(2, 65)]
    ok = factors[0] == 1.0 and all(x > y for x, y in zip(factors, factors[1:]))
    ok &= all(f < 1 for f in factors[1:])
    results.append(CheckResult(
        "variance factor strictly decreasing, < 1 for M >= 3", ok,
        f"M=2: {factors[0]}, M=3: {factors[1]:.6f}, M=8: {variance_bound_factor(8):.6f}",
    ))

    ok = offset_c(1, 5) == 0.0 and abs(offset_c(4, 2) - math.log(7)) < 1e-15
    v1 = optimal_multiplicity(4096, 1 - 1e-12, "linear-1")
    v2 = optimal_multiplicity(4096, 1 - 1e-12, "linear-2")
    ok &= v1 < 1e-3 and abs(v2 - 1) < 1e-3
    results.append(CheckResult(
        "offset and optimal-multiplicity limits", ok,
        f"offset_c(1,5) = {offset_c(1, 5)}, M*(p->1) = {v1:.2e} / {v2:.6f}",
    ))
    return results


def check_suites(which: str) -> CheckReport:
    """Run one named self-check suite: oracles, grads, identities, or
    invariants. Returns a report; the CLI turns a failing report into exit
    code 3."""
    suites = {
        "oracles": _suite_oracles,
        "grads": _suite_grads,
        "identities": _suite_identities,
        "invariants": _suite_invariants,
    }
    if which not in suites:
        raise ValueError(
            f"unknown suite {which!r}; expected one of {sorted(suites)}"
        )
    return CheckReport(suite=which, results=tuple(suites[which]()))
