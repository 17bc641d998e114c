"""Closed-loop simulation, Monte Carlo batches, summaries and export."""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, fields
import io
import json
import math
import os

import numpy as np

from . import control, estimator
from .config import ScenarioConfig
from .dynamics import (BodyState, DynamicsParams, RelativeState, TargetNoise,
                       sample_target_accel, step_target, step_uuv)
from .observability import pe_gram
from .sensing import SensorRig, sense
from .so3 import exp_so3, log_so3, orthonormalize

TRANSIENT_STEPS = 50
LOG_COLUMNS = (
    "k",
    "qx", "qy", "qz", "vx", "vy", "vz",
    "qhat_x", "qhat_y", "qhat_z", "vhat_x", "vhat_y", "vhat_z",
    "ex", "ey", "ez",
    "Y", "Gamma", "pe_lambda_min",
    "att_wx", "att_wy", "att_wz",
)
# column name -> (RunLog attribute, component index or None)
_COLUMN_SOURCE = {"k": ("k", None), "Y": ("Y", None), "Gamma": ("Gamma", None),
                  "pe_lambda_min": ("pe_lambda_min", None)}
for _i, _ax in enumerate("xyz"):
    _COLUMN_SOURCE[f"q{_ax}"] = ("q", _i)
    _COLUMN_SOURCE[f"v{_ax}"] = ("vel", _i)
    _COLUMN_SOURCE[f"qhat_{_ax}"] = ("q_hat", _i)
    _COLUMN_SOURCE[f"vhat_{_ax}"] = ("vel_hat", _i)
    _COLUMN_SOURCE[f"e{_ax}"] = ("e", _i)
    _COLUMN_SOURCE[f"att_w{_ax}"] = ("att", _i)


class SimulationError(RuntimeError):
    def __init__(self, message, step=None, seed=None):
        super().__init__(message)
        self.step = step
        self.seed = seed


@dataclass
class RunLog:
    """Per-step records ``k = 0 .. horizon``.

    The exported columns are the first block of fields; the remaining
    arrays are kept in memory for diagnostics and plotting and are ``None``
    for logs reloaded from disk.
    """
    k: np.ndarray
    q: np.ndarray
    vel: np.ndarray
    q_hat: np.ndarray
    vel_hat: np.ndarray
    e: np.ndarray
    Y: np.ndarray
    Gamma: np.ndarray
    pe_lambda_min: np.ndarray
    att: np.ndarray
    p: np.ndarray = None
    p_target: np.ndarray = None
    cov_min_eig: np.ndarray = None
    cov_asym: np.ndarray = None
    nees: np.ndarray = None
    u2_norm: np.ndarray = None

    def __len__(self):
        return len(self.k)

    @property
    def pos_error(self):
        return np.linalg.norm(self.q - self.q_hat, axis=1)

    @property
    def vel_error(self):
        return np.linalg.norm(self.vel - self.vel_hat, axis=1)

    @property
    def track_error(self):
        return np.linalg.norm(self.e, axis=1)

    def column(self, name):
        attr, idx = _COLUMN_SOURCE[name]
        arr = getattr(self, attr)
        return arr if idx is None else arr[:, idx]

    def rows(self):
        cols = [self.column(c) for c in LOG_COLUMNS]
        for i in range(len(self)):
            yield [int(cols[0][i])] + [float(c[i]) for c in cols[1:]]


@dataclass(frozen=True)
class RunSummary:
    pos_rmse_ss: float
    vel_rmse_ss: float
    track_rmse_ss: float
    pos_rmse_transient: float
    track_rmse_transient: float
    transient_length: int
    min_pe_lambda: float
    nees_mean: float
    sigma_surrogate: float
    max_u2: float


SUMMARY_FIELDS = tuple(f.name for f in fields(RunSummary))


def _h_values(cfg, rng):
    hs = cfg.h_spec
    n = cfg.horizon + 1
    if hs.kind == "cosine":
        return [hs.amplitude * math.cos(hs.frequency * k * math.pi) for k in range(n)]
    if hs.kind == "noise":
        return list(hs.sigma * rng.standard_normal(n))
    return [0.0] * n


def _streams(seed):
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(4)]


def attitude_command(cfg, r, k, bq, traj, rng):
    if cfg.attitude_mode == "trajectory":
        return control.attitude_trajectory_step(r, k, bq, traj, cfg.t)[0]
    if cfg.attitude_mode == "random":
        return control.attitude_random_step(r, cfg.t, rng)[0]
    return np.zeros(3)


def attitude_schedule(cfg):
    """Attitudes ``R(0..horizon)`` produced by the configured attitude law
    alone, using the same random streams as :func:`run_scenario`."""
    _, _, rng_att, rng_h = _streams(cfg.seed)
    h_vals = _h_values(cfg, rng_h)
    bq = np.array(cfg.bq)
    traj = control.TrajectoryParams(cfg.rho, lambda k: h_vals[k], float(np.linalg.norm(bq)))
    r = np.array(cfg.init.R)
    out = [r]
    for k in range(cfg.horizon):
        u2 = attitude_command(cfg, r, k, bq, traj, rng_att)
        r = orthonormalize(exp_so3(u2 * cfg.t) @ r)
        out.append(r)
    return out


def run_scenario(cfg: ScenarioConfig):
    """Simulate one closed-loop run; returns ``(RunLog, RunSummary)``.

    Step ``k -> k+1``: attitude command, tracking acceleration from the
    current estimate, truth propagation, sensing at the new geometry,
    filter predict (with the applied input) and update.  A measurement is
    also taken at ``k = 0`` to refine the initial estimate.
    """
    rng_target, rng_sense, rng_att, rng_h = _streams(cfg.seed)
    dp = DynamicsParams(cfg.t)
    truth_noise = TargetNoise(np.array(cfg.W))
    model_noise = TargetNoise(np.array(cfg.W_model))
    rig = SensorRig(np.array(cfg.bq), cfg.f, cfg.eta1, cfg.eta2)
    bq = rig.bq
    bq_star = np.array(cfg.bq_star)
    track = control.TrackingParams(cfg.alpha, bq_star, cfg.t, override=cfg.alpha_override)
    h_vals = _h_values(cfg, rng_h)
    traj = control.TrajectoryParams(cfg.rho, lambda k: h_vals[k], rig.baseline)
    a_bar = np.hstack([cfg.alpha * np.eye(3), cfg.t * np.eye(3)])

    ini = cfg.init
    x = BodyState(np.array(ini.p), np.array(ini.v))
    xt = BodyState(np.array(ini.p_target), np.array(ini.v_target))
    r = np.array(ini.R)
    n = cfg.horizon + 1
    window = cfg.pe_window

    q = np.empty((n, 3)); vel = np.empty((n, 3))
    q_hat = np.empty((n, 3)); vel_hat = np.empty((n, 3))
    e = np.empty((n, 3)); att = np.empty((n, 3))
    p_log = np.empty((n, 3)); pt_log = np.empty((n, 3))
    Y = np.empty(n); Gamma = np.empty(n); pe_min = np.empty(n)
    cov_min = np.empty(n); cov_asym = np.empty(n); nees = np.empty(n)
    u2_norm = np.zeros(n)
    baselines = np.empty((n, 3))
    sigma_sur = 0.0

    fs = estimator.initial_state(scale=cfg.xi0_scale)
    meas = sense(x.p, r, xt.p, rig, rng_sense)
    fs = estimator.update(estimator.Prediction(fs.est, fs.cov), meas)

    def record(k):
        rel = RelativeState.between(x, xt)
        q[k] = rel.q; vel[k] = rel.vel
        q_hat[k] = fs.est.q; vel_hat[k] = fs.est.vel
        e[k] = rel.q - r @ bq_star
        att[k] = log_so3(r)
        p_log[k] = x.p; pt_log[k] = xt.p
        Y[k] = meas.Y; Gamma[k] = meas.Gamma
        baselines[k] = r @ bq
        pe_min[k] = pe_gram(baselines[max(0, k - window + 1):k + 1],
                            rig.baseline).lambda_min
        cov = fs.cov
        cov_min[k] = np.linalg.eigvalsh(cov)[0]
        cov_asym[k] = np.max(np.abs(cov - cov.T))
        nees[k] = estimator.nees(rel, fs)
        if not (np.all(np.isfinite(q[k])) and np.all(np.isfinite(vel[k]))
                and np.all(np.isfinite(q_hat[k])) and np.all(np.isfinite(vel_hat[k]))):
            raise SimulationError(f"non-finite state at step {k}", step=k, seed=cfg.seed)

    record(0)
    for k in range(cfg.horizon):
        u2 = attitude_command(cfg, r, k, bq, traj, rng_att)
        u1 = control.tracking_accel(r, fs.est, track)
        if cfg.zero_target_accel:
            u_bar = np.zeros(3)
        else:
            u_bar = sample_target_accel(truth_noise, rng_target)

        err = RelativeState.between(x, xt).as_vector() - fs.est.as_vector()
        r_prev = r
        x, r = step_uuv(x, r_prev, u1, u2, dp)
        r = orthonormalize(r)
        xt = step_target(xt, u_bar, dp)
        d = a_bar @ err + (r_prev - r) @ bq_star
        sigma_sur = max(sigma_sur, 2.0 * float(d @ d))

        meas = sense(x.p, r, xt.p, rig, rng_sense)
        pred = estimator.predict(fs, r_prev, u1, model_noise, dp)
        fs = estimator.update(pred, meas)
        u2_norm[k + 1] = np.linalg.norm(u2)
        record(k + 1)

    log = RunLog(np.arange(n), q, vel, q_hat, vel_hat, e, Y, Gamma, pe_min, att,
                 p_log, pt_log, cov_min, cov_asym, nees, u2_norm)
    return log, summarize(log, cfg, sigma_sur)


def _rms(x):
    return float(np.sqrt(np.mean(np.square(x)))) if len(x) else math.nan


def summarize(log, cfg, sigma_surrogate=0.0):
    """Steady state is the final third of the horizon; transient is the
    first ``TRANSIENT_STEPS`` records."""
    n = len(log)
    ss = slice(n - max(1, cfg.horizon // 3), n)
    tr = slice(0, min(TRANSIENT_STEPS, n))
    pos, velo, trk = log.pos_error, log.vel_error, log.track_error
    hits = np.nonzero(pos < 0.1 * pos[0])[0]
    full = log.pe_lambda_min[min(cfg.pe_window - 1, n - 1):]
    return RunSummary(
        pos_rmse_ss=_rms(pos[ss]),
        vel_rmse_ss=_rms(velo[ss]),
        track_rmse_ss=_rms(trk[ss]),
        pos_rmse_transient=_rms(pos[tr]),
        track_rmse_transient=_rms(trk[tr]),
        transient_length=int(hits[0]) if len(hits) else n,
        min_pe_lambda=float(np.min(full)),
        nees_mean=float(np.mean(log.nees[ss])) if log.nees is not None else math.nan,
        sigma_surrogate=float(sigma_surrogate),
        max_u2=float(np.max(log.u2_norm)) if log.u2_norm is not None else math.nan,
    )


# ---------------------------------------------------------------- Monte Carlo

@dataclass
class MonteCarloResult:
    seeds: list
    summaries: list
    aggregate: dict
    # per-run error curves (runs, horizon+1), in seed order
    pos_error: np.ndarray = None
    track_error: np.ndarray = None


QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def aggregate(summaries):
    out = {}
    for name in SUMMARY_FIELDS:
        vals = np.array([getattr(s, name) for s in summaries], dtype=float)
        stats = {"median": float(np.median(vals)),
                 "mean": math.fsum(vals) / len(vals),
                 "min": float(np.min(vals)),
                 "max": float(np.max(vals))}
        for qtl in QUANTILES:
            stats[f"q{int(round(qtl * 100)):02d}"] = float(np.quantile(vals, qtl))
        out[name] = stats
    return out


def _mc_worker(cfg):
    try:
        log, summary = run_scenario(cfg)
    except Exception as exc:
        raise SimulationError(f"run with seed {cfg.seed} failed: {exc}",
                              getattr(exc, "step", None), cfg.seed) from exc
    return summary, log.pos_error, log.track_error


def monte_carlo(cfg, n_runs, base_seed, workers=1):
    """Independent runs with seeds ``base_seed .. base_seed + n_runs - 1``.

    Results are ordered by seed, so the aggregate does not depend on the
    number of workers.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    seeds = [base_seed + i for i in range(n_runs)]
    cfgs = [cfg.with_seed(s) for s in seeds]
    if workers <= 1:
        results = [_mc_worker(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_worker, cfgs))
    summaries = [r[0] for r in results]
    return MonteCarloResult(seeds, summaries, aggregate(summaries),
                            np.array([r[1] for r in results]),
                            np.array([r[2] for r in results]))


# --------------------------------------------------------------------- export

def _fmt(x):
    return str(x) if isinstance(x, int) else repr(float(x))


def log_to_csv(log):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for row in log.rows():
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def log_to_json(log):
    records = [dict(zip(LOG_COLUMNS, row)) for row in log.rows()]
    return json.dumps({"columns": list(LOG_COLUMNS), "records": records}, indent=1) + "\n"


def mc_to_json(result):
    doc = {
        "seeds": result.seeds,
        "summaries": [dict(seed=s, **asdict(m)) for s, m in zip(result.seeds, result.summaries)],
        "aggregate": result.aggregate,
    }
    return json.dumps(doc, indent=1) + "\n"


def mc_to_csv(result):
    """One row per seed, then one row per aggregate statistic."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("run",) + SUMMARY_FIELDS)
    for seed, s in zip(result.seeds, result.summaries):
        w.writerow([str(seed)] + [_fmt(getattr(s, f)) for f in SUMMARY_FIELDS])
    for stat in next(iter(result.aggregate.values())):
        w.writerow([stat] + [_fmt(result.aggregate[f][stat]) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def export(obj, fmt, path):
    """Write a :class:`RunLog` or :class:`MonteCarloResult` as csv or json."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(obj, RunLog):
        text = log_to_csv(obj) if fmt == "csv" else log_to_json(obj)
    elif isinstance(obj, MonteCarloResult):
        text = mc_to_csv(obj) if fmt == "csv" else mc_to_json(obj)
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc
    return path


def _log_from_columns(cols):
    def stack(*names):
        return np.column_stack([np.asarray(cols[c], dtype=float) for c in names])
    return RunLog(
        k=np.asarray(cols["k"], dtype=int),
        q=stack("qx", "qy", "qz"),
        vel=stack("vx", "vy", "vz"),
        q_hat=stack("qhat_x", "qhat_y", "qhat_z"),
        vel_hat=stack("vhat_x", "vhat_y", "vhat_z"),
        e=stack("ex", "ey", "ez"),
        Y=np.asarray(cols["Y"], dtype=float),
        Gamma=np.asarray(cols["Gamma"], dtype=float),
        pe_lambda_min=np.asarray(cols["pe_lambda_min"], dtype=float),
        att=stack("att_wx", "att_wy", "att_wz"),
    )


def load_log(path):
    """Reload an exported run log (format inferred from the extension)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if os.fspath(path).endswith(".json"):
        records = json.loads(text)["records"]
        cols = {c: [r[c] for r in records] for c in LOG_COLUMNS}
    else:
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if tuple(header) != LOG_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        cols = {c: [] for c in header}
        for row in body:
            for c, v in zip(header, row):
                cols[c].append(int(v) if c == "k" else float(v))
    return _log_from_columns(cols)
