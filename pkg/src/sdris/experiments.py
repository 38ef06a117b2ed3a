"""Configuration-driven Monte-Carlo experiment runners.

Sum-rate power sweeps over methods, per-iteration convergence traces, the
block-solver NMSE study on synthetic triangular systems, and the golden
sphere-decoder check, all emitting deterministic CSV.

Seeding rule (fixed): channels for trial i come from
``SeedSequence([base_seed, 12, i])`` and are shared by every method and
power point so comparisons are paired; engine randomness (the initial RIS
configuration) comes from ``SeedSequence([base_seed, i, method_id,
power_index])``.
"""

import io
import sys
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
import yaml

from . import _kernels, mils
from .channel import SceneConfig, dbm_to_mw, draw_channels, trial_rng
from .metrics import build_report
from .quantizer import build_quantizer, optimal_step_size
from .wmmse import EngineConfig, RisCodebook, run_method

CHANNEL_STREAM = 12  # tag separating the channel stream from engine streams
METHOD_IDS = {"sesd": 1, "nearest_point": 2, "coordinate_descent": 3, "random_ris": 4}

CSV_SCHEMA = "# schema=1"


class ConfigError(ValueError):
    """Bad experiment configuration; message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    levels: int = 4
    step: object = "auto"  # "auto" or a positive float
    codebook: RisCodebook = field(default_factory=RisCodebook)
    powers_dbm: tuple = (10.0, 20.0, 30.0)
    trials: int = 50
    methods: tuple = ("sesd",)
    base_seed: int = 1
    out: str = "results.csv"
    # convergence-trace section
    converge_p_dbm: float = 30.0
    converge_seeds: int = 20
    converge_combos: tuple = ((4, None), (8, None), (4, 2), (4, 3))
    # NMSE table section
    nmse_realizations: int = 100
    nmse_etas: tuple = (4, 8, 10)
    nmse_dimension: int = 40
    nmse_node_cap: int = 2 * 10**9


def _coerce_number(value):
    # YAML reads unsigned-exponent literals like 1.0e6 as strings
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return tuple(_coerce_number(v) for v in value)
    return value


def _take_section(data, name, cls, path):
    known = {f.name for f in fields(cls)}
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{path}{name} must be a mapping")
    bad = set(sec) - known
    if bad:
        raise ConfigError(f"{path}{name}.{sorted(bad)[0]} is not a recognized field")
    sec = {k: _coerce_number(v) for k, v in sec.items()}
    try:
        return cls(**sec)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}{name}: {err}") from None


def config_from_dict(data):
    """Build and validate an ExperimentConfig from a plain mapping."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    scene = _take_section(data, "scene", SceneConfig, "")
    engine = _take_section(data, "engine", EngineConfig, "")

    qsec = data.get("quantizer", {})
    levels = qsec.get("levels", 4)
    step = qsec.get("step", "auto")
    if not isinstance(levels, int) or levels < 2:
        raise ConfigError("quantizer.levels must be an integer >= 2")
    if step != "auto" and not (isinstance(step, (int, float)) and step > 0):
        raise ConfigError("quantizer.step must be 'auto' or a positive number")

    csec = data.get("codebook", {})
    mode = csec.get("mode", "continuous")
    if mode == "continuous":
        codebook = RisCodebook(None)
    elif mode == "discrete":
        bits = csec.get("bits")
        if not isinstance(bits, int) or bits < 1:
            raise ConfigError("codebook.bits must be a positive integer in discrete mode")
        codebook = RisCodebook(bits)
    else:
        raise ConfigError("codebook.mode must be 'continuous' or 'discrete'")

    ssec = data.get("sweep", {})
    powers = tuple(float(p) for p in ssec.get("powers_dbm", (10.0, 20.0, 30.0)))
    if not powers:
        raise ConfigError("sweep.powers_dbm must be a nonempty list")
    trials = ssec.get("trials", 50)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("sweep.trials must be an integer >= 1")
    methods = tuple(ssec.get("methods", ["sesd"]))
    if not methods:
        raise ConfigError("sweep.methods must be nonempty")
    for m in methods:
        if m not in METHOD_IDS:
            raise ConfigError(f"sweep.methods: unknown method {m!r}")
    base_seed = ssec.get("seed", 1)
    out = ssec.get("out", "results.csv")

    vsec = data.get("converge", {})
    combos = []
    for item in vsec.get("combos", [(4, None), (8, None), (4, 2), (4, 3)]):
        if isinstance(item, dict):
            combos.append((item.get("levels", 4), item.get("bits")))
        else:
            combos.append((item[0], item[1]))
    nsec = data.get("nmse", {})

    eta = engine.eta
    n_elem = scene.ris_elements
    if n_elem % eta != 0:
        raise ConfigError(f"engine.eta: {eta} does not divide the RIS size {n_elem}")

    return ExperimentConfig(
        scene=scene,
        engine=engine,
        levels=levels,
        step=step,
        codebook=codebook,
        powers_dbm=powers,
        trials=trials,
        methods=methods,
        base_seed=int(base_seed),
        out=str(out),
        converge_p_dbm=float(vsec.get("p_dbm", 30.0)),
        converge_seeds=int(vsec.get("seeds", 20)),
        converge_combos=tuple(combos),
        nmse_realizations=int(nsec.get("realizations", 100)),
        nmse_etas=tuple(nsec.get("etas", (4, 8, 10))),
    )


def config_from_yaml(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    return config_from_dict(data)


def quantizer_for(cfg, p_mw):
    """Quantizer for one power point: explicit step, or the distortion-
    optimal step for per-component variance p/(2KM)."""
    if cfg.step == "auto":
        var = p_mw / (2.0 * cfg.scene.users * cfg.scene.bs_antennas)
        delta = optimal_step_size(cfg.levels, var)
    else:
        delta = float(cfg.step)
    return build_quantizer(cfg.levels, delta)


@dataclass
class ResultRow:
    """One (trial, method, power point) outcome; column order is fixed."""

    seed: int
    trial: int
    method: str
    ris_mode: str
    levels: int
    bits: object
    p_dbm: float
    iterations_used: int
    sum_rate: float
    rates: tuple  # per-UE
    total_power: float
    power_ok: int
    entries_in_alphabet: int
    theta_in_codebook: int
    power_floor: int
    budget_exceeded: int
    nodes_precoding: int
    nodes_ris: int
    wall_time_ms: float


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_header(users):
    cols = [
        "seed", "trial", "method", "ris_mode", "levels", "bits", "p_dbm",
        "iterations_used", "sum_rate",
    ]
    cols += [f"rate_ue{k}" for k in range(users)]
    cols += [
        "total_power", "power_ok", "entries_in_alphabet", "theta_in_codebook",
        "power_floor", "budget_exceeded", "nodes_precoding", "nodes_ris",
        "wall_time_ms",
    ]
    return cols


def emit_csv(rows, path, header):
    """Write rows as UTF-8 CSV with a schema comment line.

    Floats are serialized with repr (shortest round-trip), so output bytes
    are a pure function of the row values.
    """
    buf = io.StringIO()
    buf.write(CSV_SCHEMA + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        flat = []
        for v in row:
            flat.append(_fmt(float(v)) if isinstance(v, (float, np.floating)) else _fmt(v))
        buf.write(",".join(flat) + "\n")
    data = buf.getvalue().encode("utf-8")
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "wb") as fh:
            fh.write(data)
    return data


def _row_values(row):
    vals = [
        row.seed, row.trial, row.method, row.ris_mode, row.levels,
        "" if row.bits is None else row.bits, float(row.p_dbm),
        row.iterations_used, float(row.sum_rate),
    ]
    vals += [float(r) for r in row.rates]
    vals += [
        float(row.total_power), row.power_ok, row.entries_in_alphabet,
        row.theta_in_codebook, row.power_floor, row.budget_exceeded,
        row.nodes_precoding, row.nodes_ris, float(row.wall_time_ms),
    ]
    return vals


def run_power_sweep(cfg, with_timings=False, log=None):
    """Monte-Carlo sweep over (power, trial, method); returns ResultRows.

    Channels are drawn once per trial and shared across methods and power
    points, so per-trial method comparisons are paired.
    """
    _kernels.warmup()
    scene = cfg.scene
    noise = scene.noise_mw
    rows = []
    t_start = time.perf_counter()
    channels = [
        draw_channels(scene, trial_rng(cfg.base_seed, CHANNEL_STREAM, t))
        for t in range(cfg.trials)
    ]
    for ip, p_dbm in enumerate(cfg.powers_dbm):
        p_mw = dbm_to_mw(p_dbm)
        qspec = quantizer_for(cfg, p_mw)
        for method in cfg.methods:
            mid = METHOD_IDS[method]
            for trial in range(cfg.trials):
                rng = trial_rng(cfg.base_seed, trial, mid, ip)
                t0 = time.perf_counter()
                state, trace, info = run_method(
                    method, channels[trial], cfg.engine, cfg.codebook, qspec,
                    p_mw, noise, rng,
                )
                wall_ms = (time.perf_counter() - t0) * 1e3
                quant_labels = qspec.labels if cfg.engine.precoder_mode == "quantized" else None
                ris_vals = None
                ris_mode = "continuous"
                if method == "random_ris":
                    ris_mode = "random"
                elif not cfg.codebook.continuous:
                    ris_vals = cfg.codebook.values()
                    ris_mode = f"b{cfg.codebook.bits}"
                rep = build_report(
                    state.W, state.theta, channels[trial], noise, p_mw,
                    quant_labels, ris_vals,
                )
                rows.append(ResultRow(
                    seed=cfg.base_seed, trial=trial, method=method,
                    ris_mode=ris_mode, levels=cfg.levels,
                    bits=None if cfg.codebook.continuous else cfg.codebook.bits,
                    p_dbm=float(p_dbm), iterations_used=info.iterations_used,
                    sum_rate=rep.sum_rate, rates=tuple(rep.rates),
                    total_power=rep.total_power, power_ok=int(rep.power_ok),
                    entries_in_alphabet=int(rep.entries_in_alphabet),
                    theta_in_codebook=int(rep.theta_in_codebook),
                    power_floor=int(info.power_floor),
                    budget_exceeded=int(info.budget_exceeded),
                    nodes_precoding=info.nodes_precoding,
                    nodes_ris=info.nodes_ris,
                    wall_time_ms=wall_ms if with_timings else 0.0,
                ))
    rows.sort(key=lambda r: (r.p_dbm, r.method, r.trial))
    if log is not None:
        log(f"power sweep: {len(rows)} rows in {time.perf_counter() - t_start:.1f}s")
    return rows


CONVERGE_HEADER = [
    "seed", "rep", "levels", "bits", "p_dbm", "iteration", "f",
    "sum_rate", "gap", "converged",
]


def run_convergence_trace(cfg, log=None):
    """Per-iteration objective and sum rate for each (levels, bits) combo."""
    _kernels.warmup()
    scene = cfg.scene
    noise = scene.noise_mw
    p_mw = dbm_to_mw(cfg.converge_p_dbm)
    rows = []
    for rep in range(cfg.converge_seeds):
        chs = draw_channels(scene, trial_rng(cfg.base_seed, CHANNEL_STREAM, rep))
        for levels, bits in cfg.converge_combos:
            sub = replace(cfg, levels=levels, codebook=RisCodebook(bits))
            qspec = quantizer_for(sub, p_mw)
            rng = trial_rng(cfg.base_seed, rep, 1, 0)
            state, trace, info = run_method(
                "sesd", chs, cfg.engine, sub.codebook, qspec, p_mw, noise, rng
            )
            prev_f = info.f_init
            for r in trace:
                rows.append([
                    cfg.base_seed, rep, levels, "" if bits is None else bits,
                    float(cfg.converge_p_dbm), r.iteration, float(r.f),
                    float(r.sum_rate), float(abs(r.f - prev_f)), int(info.converged),
                ])
                prev_f = r.f
    if log is not None:
        log(f"convergence traces: {len(rows)} rows")
    return rows


NMSE_HEADER = ["seed", "eta", "block_size", "nmse", "realizations", "dimension"]


def run_nmse_table(cfg, log=None):
    """Block-solver accuracy study on random triangular systems.

    Setup per realization: n=40, d ~ U[0, 20], upper-triangular R with
    U[0, 1] entries, labels {-1, +1}.  The exact solver provides the
    reference residual; the block solver is scored by the normalized mean
    square error of its residual for each block count eta.
    """
    _kernels.warmup()
    n = cfg.nmse_dimension
    labels = mils.LabelSet.real([-1.0, 1.0])
    rng = trial_rng(cfg.base_seed, 40, 1)
    exact = []
    blocks = {eta: [] for eta in cfg.nmse_etas}
    for _ in range(cfg.nmse_realizations):
        R = np.triu(rng.uniform(0.0, 1.0, (n, n)))
        d = rng.uniform(0.0, 20.0, n)
        sys_ = mils.TriangularSystem(R, d)
        exact.append(mils.sesd_real(sys_, labels, node_cap=cfg.nmse_node_cap).residual_sq)
        for eta in cfg.nmse_etas:
            blocks[eta].append(mils.block_sesd(sys_, labels, eta).residual_sq)
    q = np.asarray(exact)
    rows = []
    out = {}
    for eta in cfg.nmse_etas:
        qb = np.asarray(blocks[eta])
        nmse = float(np.mean(np.abs(q - qb) ** 2 / q**2))
        out[eta] = nmse
        rows.append([
            cfg.base_seed, eta, n // eta, nmse, cfg.nmse_realizations, n,
        ])
        if log is not None:
            log(f"eta={eta:3d}  block size {n // eta:3d}  NMSE {nmse:.4f}")
    return rows, out


def load_example1():
    """Read the shipped golden triangular system (R, d, labels)."""
    from importlib.resources import files

    text = files("sdris.data").joinpath("example1.txt").read_text(encoding="utf-8")
    mats = read_tagged_matrices(text)
    return mats["R"], mats["d"].ravel(), mats["labels"].ravel()


def read_tagged_matrices(text):
    """Parse the plain-text fixture format.

    Blocks are ``name rows cols`` on one line followed by rows*cols decimal
    literals in row-major order, whitespace separated; ``#`` lines are
    comments.
    """
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    mats = {}
    i = 0
    while i < len(tokens):
        name = tokens[i]
        rows, cols = int(tokens[i + 1]), int(tokens[i + 2])
        vals = [float(v) for v in tokens[i + 3 : i + 3 + rows * cols]]
        if len(vals) != rows * cols:
            raise ValueError(f"fixture block {name!r} is truncated")
        mats[name] = np.array(vals).reshape(rows, cols)
        i += 3 + rows * cols
    return mats


@dataclass
class Example1Report:
    passed: bool
    x: np.ndarray
    residual_sq: float
    nodes_visited: int
    runtime_ms: float
    brute_force_match: bool
    details: str


def run_example1():
    """Golden check of the sphere decoder on the shipped 4-level system."""
    _kernels.warmup()
    R, d, labvals = load_example1()
    labels = mils.LabelSet.real(labvals)
    sys_ = mils.TriangularSystem(R, d)
    out = mils.sesd_real(sys_, labels)  # warm call, excluded from timing
    t0 = time.perf_counter()
    out = mils.sesd_real(sys_, labels)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    expected_x = np.array([1.0, -1.0, 2.0, -1.0])
    expected_res = 46.0
    bf = mils.brute_force_mils(R, d, labels)
    ok_x = bool(np.array_equal(out.x, expected_x))
    ok_res = abs(out.residual_sq - expected_res) <= 1e-9
    ok_bf = bf.residual_sq == out.residual_sq and np.array_equal(bf.x, out.x)
    details = []
    if not ok_x:
        details.append(f"solution {out.x.tolist()} != expected {expected_x.tolist()}")
    if not ok_res:
        details.append(f"residual {out.residual_sq!r} != expected {expected_res!r}")
    if not ok_bf:
        details.append("exhaustive enumeration disagrees")
    return Example1Report(
        passed=ok_x and ok_res and ok_bf,
        x=out.x,
        residual_sq=out.residual_sq,
        nodes_visited=out.nodes_visited,
        runtime_ms=runtime_ms,
        brute_force_match=ok_bf,
        details="; ".join(details) if details else "ok",
    )
