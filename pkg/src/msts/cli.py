"""Command-line entry point: ``msts run | takagi | crow-gen | oracle-compare | limits-check``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration, 3 the
integration failed.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import crow as crow_mod
from .dynamics import NonFiniteState, StepSizeUnderflow, derived_rates, integrate, rhs
from .limits import TWO_MODE_U, lossless_solution, single_mode_rhs, two_mode_rhs
from .model import CouplingSpec, ModelError, PumpModel, QuasimodeSet, validate
from .observables import QuadratureSpec, correlation_variance, optimize_angles, photon_numbers, physicality, second_moments
from .oracle import CutoffSaturation, FockConfig, evolve_fock, moment_ode_oracle
from .takagi import SchmidtBasis, schmidt_basis, takagi_factorize

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INTEGRATION = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------- config


def _complex(value, path):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(value.get("re", 0.0), value.get("im", 0.0))
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise ConfigError(path, f"expected a number or [re, im], got {value!r}")


def _complex_array(value, path, ndim):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    if ndim == 1:
        return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(value)])
    rows = [_complex_array(row, f"{path}[{i}]", 1) for i, row in enumerate(value)]
    if len({len(r) for r in rows}) > 1:
        raise ConfigError(path, "rows have different lengths")
    return np.array(rows)


def _encode_complex(a):
    a = np.asarray(a)
    if a.ndim == 0:
        z = complex(a)
        return [z.real, z.imag]
    return [_encode_complex(x) for x in a]


def _require(d, key, path, kind=None):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    if key not in d:
        raise ConfigError(f"{path}.{key}", "missing required field")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind}, got {type(v).__name__}")
    return v


def _number(d, key, path, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}", "must be positive")
    return float(v)


@dataclass
class SimConfig:
    structure: dict
    coupling: dict
    pump: dict
    integration: dict
    observables: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("$", "config must be a JSON object")
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("$", f"unknown fields {sorted(unknown)}")
        cfg = cls(
            structure=_require(data, "structure", "$", dict),
            coupling=_require(data, "coupling", "$", dict),
            pump=_require(data, "pump", "$", dict),
            integration=_require(data, "integration", "$", dict),
            observables=data.get("observables", {}),
            seed=data.get("seed", 0),
        )
        cfg.check()
        return cfg

    def to_dict(self):
        return {
            "structure": self.structure,
            "coupling": self.coupling,
            "pump": self.pump,
            "integration": self.integration,
            "observables": self.observables,
            "seed": self.seed,
        }

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    # validation -----------------------------------------------------

    def check(self):
        self.build()
        integ = self.integration
        _number(integ, "t_end", "$.integration", positive=True)
        if integ.get("time_unit", "s") not in ("s", "t_c"):
            raise ConfigError("$.integration.time_unit", "must be 's' or 't_c'")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("$.seed", "must be an integer")
        self.pairs()
        return self

    def crow_params(self):
        if "crow" not in self.structure:
            return None
        try:
            return crow_mod.CrowParams.from_dict(self.structure["crow"])
        except (TypeError, ModelError) as exc:
            raise ConfigError("$.structure.crow", str(exc)) from exc

    def build(self):
        """Return ``(model, basis, pump)``."""
        st = self.structure
        params = self.crow_params()
        if params is not None:
            structure = crow_mod.build_crow(params)
        elif "modes" in st:
            modes = _require(st, "modes", "$.structure", list)
            if not modes:
                raise ConfigError("$.structure.modes", "needs at least one mode")
            om = [_number(m, "omega", f"$.structure.modes[{i}]") for i, m in enumerate(modes)]
            ga = [_number(m, "gamma", f"$.structure.modes[{i}]") for i, m in enumerate(modes)]
            labels = [m.get("label", str(i + 1)) for i, m in enumerate(modes)]
            try:
                structure = QuasimodeSet(om, ga, labels)
            except ModelError as exc:
                raise ConfigError("$.structure.modes", str(exc)) from exc
        else:
            raise ConfigError("$.structure", "needs `modes` or `crow`")

        co = self.coupling
        sources = [k for k in ("matrix", "schmidt", "from_crow") if k in co]
        if len(sources) != 1:
            raise ConfigError("$.coupling", "give exactly one of `matrix`, `schmidt`, `from_crow`")
        scale = _number(co, "scale", "$.coupling", default=1.0, positive=True)
        try:
            if "matrix" in co:
                coupling = CouplingSpec.from_matrix(_complex_array(co["matrix"], "$.coupling.matrix", 2), scale)
            elif "schmidt" in co:
                sch = co["schmidt"]
                U = _complex_array(_require(sch, "U", "$.coupling.schmidt"), "$.coupling.schmidt.U", 2)
                lam = _complex_array(_require(sch, "lambda", "$.coupling.schmidt"), "$.coupling.schmidt.lambda", 1)
                coupling = CouplingSpec.from_schmidt(U, lam, scale)
            else:
                if params is None:
                    raise ConfigError("$.coupling.from_crow", "needs a `crow` structure")
                src = co["from_crow"]
                if src == "table":
                    coupling = crow_mod.table_coupling(params)
                elif src == "analytic":
                    coupling = crow_mod.crow_coupling(params)
                else:
                    raise ConfigError("$.coupling.from_crow", "must be 'table' or 'analytic'")
            model = validate(structure, coupling)
            basis = schmidt_basis(coupling)
        except ConfigError:
            raise
        except ModelError as exc:
            raise ConfigError("$.coupling", str(exc)) from exc

        pu = self.pump
        kind = _require(pu, "kind", "$.pump", str)
        try:
            omega_p = _number(pu, "omega_p", "$.pump")
            process = pu.get("process", "sfwm")
            if kind == "cw":
                pump = PumpModel.cw(omega_p, _number(pu, "alpha_sq", "$.pump"), process)
            elif kind == "decaying":
                pump = PumpModel.decaying(omega_p, _number(pu, "gamma_p", "$.pump"), _number(pu, "alpha_sq", "$.pump"), process)
            elif kind == "envelope":
                pump = PumpModel.envelope(omega_p, _require(pu, "times", "$.pump", list), _require(pu, "samples", "$.pump", list), process)
            else:
                raise ConfigError("$.pump.kind", f"unknown pump kind {kind!r}")
        except ConfigError:
            raise
        except ModelError as exc:
            raise ConfigError("$.pump", str(exc)) from exc
        return model, basis, pump

    def time_unit(self):
        integ = self.integration
        if integ.get("time_unit", "s") == "s":
            return 1.0
        if "t_c" in integ:
            return _number(integ, "t_c", "$.integration", positive=True)
        params = self.crow_params()
        if params is None:
            raise ConfigError("$.integration.t_c", "time_unit 't_c' needs `t_c` or a crow structure")
        return params.t_c

    def pairs(self):
        obs = self.observables
        M = len(self.structure["modes"]) if "modes" in self.structure else int(self.structure["crow"].get("M_cav", 4))
        out = []
        for i, p in enumerate(obs.get("pairs", [])):
            if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, int) for x in p)):
                raise ConfigError(f"$.observables.pairs[{i}]", "expected [m, l] with 1-based integers")
            m, l = p
            if not (1 <= m <= M and 1 <= l <= M) or m == l:
                raise ConfigError(f"$.observables.pairs[{i}]", f"modes must be distinct and in 1..{M}")
            out.append((m - 1, l - 1))
        sign = obs.get("sign", "+")
        if sign not in ("+", "-", "both"):
            raise ConfigError("$.observables.sign", "must be '+', '-' or 'both'")
        strat = obs.get("angle_strategy", "optimal")
        if strat != "optimal" and not (isinstance(strat, dict) and isinstance(strat.get("fixed"), list) and len(strat["fixed"]) == 2):
            raise ConfigError("$.observables.angle_strategy", "must be 'optimal' or {'fixed': [phi_m, phi_l]}")
        return out


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc


def load_config(path):
    return SimConfig.from_dict(_load_json(path))


# ---------------------------------------------------------------- run


def _fmt(x):
    return format(float(x), ".17g")


def simulate(cfg):
    """Run one configuration; return (columns dict, summary dict)."""
    model, basis, pump = cfg.build()
    unit = cfg.time_unit()
    integ = cfg.integration
    t_end = _number(integ, "t_end", "$.integration", positive=True) * unit
    stride = integ.get("output_stride")
    traj = integrate(
        model, basis, pump, t_end=t_end,
        rtol=_number(integ, "rtol", "$.integration", default=1e-9, positive=True),
        atol=_number(integ, "atol", "$.integration", default=1e-12, positive=True),
        output_stride=None if stride is None else float(stride) * unit,
        n_samples=None if stride is not None else int(integ.get("n_samples", 201)),
    )
    M = traj.M
    pairs = cfg.pairs()
    obs = cfg.observables
    sign = obs.get("sign", "+")
    signs = ["+", "-"] if sign == "both" else [sign]
    strat = obs.get("angle_strategy", "optimal")

    cols = {"t": traj.t / unit}
    for name, arr in (("r", traj.r), ("phi", traj.phi), ("n", traj.n)):
        for mu in range(M):
            cols[f"{name}_{mu + 1}"] = arr[:, mu]
    diag = np.empty((len(traj), M))
    total = np.empty(len(traj))
    d2 = {}
    worst_phys = np.inf
    for i, state in enumerate(traj.states()):
        mom = second_moments(state, basis)
        diag[i], total[i] = photon_numbers(mom)
        worst_phys = min(worst_phys, physicality(mom)["min_eig_uncertainty"])
        for (m, l) in pairs:
            for s in signs:
                key = f"Delta2_{m + 1}_{l + 1}" + ("" if len(signs) == 1 else ("_plus" if s == "+" else "_minus"))
                if strat == "optimal":
                    val = optimize_angles(mom, (m, l), s)[2]
                else:
                    pm, pl = strat["fixed"]
                    val = correlation_variance(mom, QuadratureSpec(m, l, pm, pl, s))
                d2.setdefault(key, np.empty(len(traj)))[i] = val
    for m in range(M):
        cols[f"N_{m + 1}{m + 1}" if M < 10 else f"N_{m + 1}_{m + 1}"] = diag[:, m]
    cols["total_photons"] = total
    cols.update(d2)

    warnings = list(model.warnings)
    if traj.stats["gauge_flips"]:
        warnings.append(f"{len(traj.stats['gauge_flips'])} gauge flips r -> -r applied")
    if traj.stats["min_n"] < -1e-12:
        warnings.append(f"thermal photon number dipped to {traj.stats['min_n']:.3e}")
    if worst_phys < -1e-8:
        warnings.append(f"uncertainty relation violated: min eigenvalue {worst_phys:.3e}")
    summary = {
        "config_hash": cfg.digest(),
        "modes": M,
        "samples": len(traj),
        "time_unit": integ.get("time_unit", "s"),
        "solver": {"method": "RK45", "nfev": traj.stats["nfev"], "segments": traj.stats["naccepted_segments"],
                   "gauge_flips": len(traj.stats["gauge_flips"])},
        "max_scaled_trace_residual": float(np.abs(traj.scaled_trace_residual).max()),
        "min_uncertainty_eigenvalue": float(worst_phys),
        "final": {"r": traj.r[-1].tolist(), "n": traj.n[-1].tolist(), "total_photons": float(total[-1])},
        "warnings": warnings,
    }
    if model.structure.lossless:
        rates = derived_rates(model.structure, basis)
        r_cf, _ = lossless_solution(basis, pump, traj.t[-1], omega_diag=np.real(np.diag(rates.Omega)))
        err = float(np.max(np.abs(traj.r[-1] - r_cf) / np.maximum(np.abs(r_cf), 1e-300)))
        resonant = bool(np.allclose(np.real(np.diag(rates.Omega)), 0.5 * pump.carrier_rate, rtol=1e-12, atol=0))
        summary["checks"] = {"lossless_r_rel_error": err, "resonant": resonant,
                             "pass": bool(err <= 1e-7) if resonant else None}
    return cols, summary


def _write_outputs(cols, summary, out_dir, fmt, stem="trajectory"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = list(cols)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(names) + "\n")
        data = np.column_stack([cols[k] for k in names])
        for row in data:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        (out_dir / f"{stem}.csv").write_text(buf.getvalue())
    else:
        payload = {k: [float(_fmt(x)) for x in v] for k, v in cols.items()}
        (out_dir / f"{stem}.json").write_text(json.dumps(payload, indent=1) + "\n")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _run_one(path, out_dir, fmt):
    cfg = load_config(path)
    cols, summary = simulate(cfg)
    _write_outputs(cols, summary, out_dir, fmt)
    return summary


# ---------------------------------------------------------------- subcommands


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        p = Path(out)
        if p.suffix != ".json":
            p.mkdir(parents=True, exist_ok=True)
            p = p / "report.json"
        else:
            p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args):
    paths = args.config or []
    if not paths:
        raise ConfigError("--config", "at least one config path is required")
    out = Path(args.out or ".")
    if len(paths) == 1:
        summary = _run_one(paths[0], out, args.format)
        if not args.quiet:
            print(json.dumps(summary, indent=2, sort_keys=True))
        return EXIT_OK
    workers = max(1, int(os.environ.get("MSTS_THREADS", "1")))
    jobs = [(p, out / Path(p).stem, args.format) for p in paths]
    for p in paths:
        load_config(p)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        summaries = list(pool.map(_run_one, *zip(*jobs)))
    if not args.quiet:
        print(json.dumps({Path(p).stem: s for p, s in zip(paths, summaries)}, indent=2, sort_keys=True))
    return EXIT_OK


def _two_mode_example():
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def cmd_takagi(args):
    if args.config:
        data = _load_json(args.config[0])
        co = data.get("coupling", data) if isinstance(data, dict) else {}
        if "matrix" not in co:
            raise ConfigError("$.coupling.matrix", "takagi needs a coupling matrix")
        G = _complex_array(co["matrix"], "$.coupling.matrix", 2)
    else:
        G = _two_mode_example()
    basis = takagi_factorize(G)
    norm = max(np.linalg.norm(G), 1e-300)
    rec = float(np.linalg.norm(basis.reconstruct() - G) / norm)
    uni = float(np.linalg.norm(basis.U.conj().T @ basis.U - np.eye(basis.M)))
    failures = []
    if rec > 1e-12:
        failures.append({"check": "reconstruction", "value": rec, "bound": 1e-12})
    if uni > 1e-12:
        failures.append({"check": "unitarity", "value": uni, "bound": 1e-12})
    report = {
        "U": _encode_complex(basis.U),
        "lambda_abs": basis.lambda_abs.tolist(),
        "theta": basis.theta.tolist(),
        "reconstruction_error": rec,
        "unitarity_error": uni,
        "failures": failures,
        "pass": not failures,
    }
    _emit(report, args.out)
    return EXIT_OK if not failures else EXIT_CHECK


def crow_config(params, coupling="table", t_end=100.0, output_stride=0.5, pairs=((2, 3),)):
    """Complete simulation config for a CROW run, times in units of t_c."""
    return SimConfig(
        structure={"crow": params.to_dict()},
        coupling={"from_crow": coupling},
        pump={"kind": "cw", "omega_p": params.omega_p, "alpha_sq": params.alpha_sq, "process": "sfwm"},
        integration={"t_end": t_end, "rtol": 1e-9, "atol": 1e-12, "output_stride": output_stride, "time_unit": "t_c"},
        observables={"pairs": [list(p) for p in pairs], "angle_strategy": "optimal", "sign": "+"},
        seed=0,
    )


def cmd_crow_gen(args):
    changes = {}
    if args.g is not None:
        changes["g"] = args.g
    if args.sinc is not None:
        changes["sinc"] = args.sinc
    if args.cavities is not None:
        changes["M_cav"] = args.cavities
    params = crow_mod.silicon_crow(**changes)
    cfg = crow_config(params, args.coupling, args.t_end)
    cfg.check()
    _emit(cfg.to_dict(), args.out)
    return EXIT_OK


def _oracle_default_setup(M):
    if M == 1:
        structure = QuasimodeSet([1.0], [0.05])
        coupling = CouplingSpec.from_matrix([[0.1]])
        pump = PumpModel.cw(0.5, 1.0)
        return validate(structure, coupling), pump, 10.0
    structure = QuasimodeSet([0.98, 1.02], [0.02, 0.05])
    coupling = CouplingSpec.from_schmidt(TWO_MODE_U, [0.08, 0.08])
    pump = PumpModel.cw(0.5, 1.0)
    return validate(structure, coupling), pump, 8.0


def cmd_oracle_compare(args):
    if args.config:
        cfg = load_config(args.config[0])
        model, basis, pump = cfg.build()
        t_end = _number(cfg.integration, "t_end", "$.integration", positive=True) * cfg.time_unit()
    else:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model, pump, t_end = _oracle_default_setup(args.modes)
        basis = schmidt_basis(model.coupling)
    ts = np.linspace(0.0, t_end, args.samples)
    traj = integrate(model, basis, pump, t_end=t_end, t_eval=ts)
    moments = [second_moments(s, basis) for s in traj.states()]
    ref = moment_ode_oracle(model, basis, pump, t_end, t_eval=ts)

    def rel(a, b):
        return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))

    rows = {"moment_oracle": {
        "number": max(rel(m.number, N) for m, N in zip(moments[1:], ref.number[1:])),
        "pair": max(rel(m.pair, A) for m, A in zip(moments[1:], ref.pair[1:])),
    }}
    saturated = False
    if basis.M <= 2:
        cutoff = args.cutoff or (40 if basis.M == 1 else 14)
        try:
            fock = evolve_fock(FockConfig(model, basis, pump, cutoff), t_end, t_eval=ts, keep_rho=False, strict=False)
            saturated = fock.saturated
            rows["fock_oracle"] = {
                "number": max(rel(m.number, N) for m, N in zip(moments[1:], fock.number[1:])),
                "pair": max(rel(m.pair, A) for m, A in zip(moments[1:], fock.pair[1:])),
                "cutoff": cutoff,
                "top_layer_population": float(fock.top_population.max()),
            }
        except CutoffSaturation:
            saturated = True
    bound = args.tolerance
    failures = [
        {"check": f"{name}.{key}", "value": val, "bound": bound}
        for name, row in rows.items() for key, val in row.items()
        if key in ("number", "pair") and val > bound
    ]
    if saturated:
        failures.append({"check": "cutoff_saturation", "value": True, "bound": False})
    report = {"modes": basis.M, "relative_errors": rows, "cutoff_saturation": saturated,
              "failures": failures, "pass": not failures}
    _emit(report, args.out)
    return EXIT_OK if not failures else EXIT_CHECK


def limits_report(n_states=2000, seed=0):
    """Run the limiting-case checks and return a report dict."""
    rng = np.random.default_rng(seed)
    checks = []

    # lossless, four modes, resonant, CW
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    G = 0.05 * (X + X.T)
    structure = QuasimodeSet(np.full(4, 1.0), np.zeros(4))
    pump = PumpModel.cw(1.0, 1.0)
    model = validate(structure, CouplingSpec.from_matrix(G))
    basis = schmidt_basis(model.coupling)
    t_end = 50.0 / (2 * basis.lambda_abs.max())
    traj = integrate(model, basis, pump, t_end=t_end, n_samples=51, rtol=1e-11, atol=1e-13)
    r_cf, phi_cf = lossless_solution(basis, pump, traj.t[:, None])
    err_r = float(np.max(np.abs(traj.r[1:] - r_cf[1:]) / r_cf[1:]))
    err_phi = float(np.max(np.abs(traj.phi - phi_cf) / np.maximum(np.abs(phi_cf), 1.0)))
    checks.append({"check": "lossless_r", "value": err_r, "bound": 1e-7})
    checks.append({"check": "lossless_phi", "value": err_phi, "bound": 1e-7})
    checks.append({"check": "lossless_n", "value": float(np.abs(traj.n).max()), "bound": 1e-12})

    checks.append({"check": "single_mode_rhs", "value": single_mode_reduction_error(rng, n_states), "bound": 1e-10})
    checks.append({"check": "two_mode_rhs", "value": two_mode_reduction_error(rng, n_states), "bound": 1e-10})
    for c in checks:
        c["pass"] = bool(c["value"] <= c["bound"])
    return {"checks": checks, "pass": all(c["pass"] for c in checks)}


def _phase_locked_phi(theta, pump, t):
    return theta + pump.carrier_rate * t - np.pi / 2


def single_mode_reduction_error(rng, n_states):
    """Max relative gap between the general and single-mode right-hand sides."""
    from .dynamics import MstsState

    worst = 0.0
    for _ in range(n_states):
        om, ga = rng.uniform(0.5, 2.0), rng.uniform(0.0, 0.5)
        lam = rng.uniform(0.01, 1.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        pump = PumpModel.cw(rng.uniform(0.2, 1.5), rng.uniform(0.0, 2.0))
        t = rng.uniform(0.0, 10.0)
        basis = SchmidtBasis.from_lambda(np.eye(1), [lam])
        rates = derived_rates(QuasimodeSet([om], [ga]), basis)
        state = MstsState([rng.uniform(0.0, 3.0)], [_phase_locked_phi(np.angle(lam), pump, t)], [rng.uniform(0.0, 10.0)], t)
        got = rhs(t, state, rates, basis, pump)
        ref = single_mode_rhs(state, om, ga, lam, pump, t)
        for a, b in zip(got, ref):
            worst = max(worst, float(np.abs(a - b).max() / max(np.abs(b).max(), 1.0)))
    return worst


def two_mode_reduction_error(rng, n_states):
    """Max relative gap between the general and two-mode right-hand sides."""
    from .dynamics import MstsState

    worst = 0.0
    for _ in range(n_states):
        om = rng.uniform(0.5, 2.0, 2)
        ga = rng.uniform(0.0, 0.5, 2)
        lam_abs = rng.uniform(0.01, 1.0)
        pump = PumpModel.cw(rng.uniform(0.2, 1.5), rng.uniform(0.0, 2.0))
        t = rng.uniform(0.0, 10.0)
        basis = SchmidtBasis(TWO_MODE_U, [lam_abs, lam_abs], [0.0, 0.0])
        rates = derived_rates(QuasimodeSet(om, ga), basis)
        r = rng.uniform(0.0, 3.0)
        phi = _phase_locked_phi(0.0, pump, t)
        state = MstsState([r, r], [phi, phi], rng.uniform(0.0, 10.0, 2), t)
        dr, dphi, dn = rhs(t, state, rates, basis, pump)
        ref = two_mode_rhs(state, om[0], om[1], ga[0], ga[1], lam_abs, pump, t)
        got = (dr[0], dphi[0], dn[0], dn[1], dr[1], dphi[1])
        want = (ref[0], ref[1], ref[2], ref[3], ref[0], ref[1])
        for a, b in zip(got, want):
            worst = max(worst, float(abs(a - b) / max(abs(b), 1.0)))
    return worst


def cmd_limits_check(args):
    report = limits_report(n_states=args.states, seed=args.seed)
    report["failures"] = [c for c in report["checks"] if not c["pass"]]
    _emit(report, args.out)
    return EXIT_OK if report["pass"] else EXIT_CHECK


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", metavar="PATH", help="JSON config (repeat for a sweep)")
    common.add_argument("--out", metavar="DIR", help="output directory (or .json file for reports)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="trajectory format")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")

    parser = argparse.ArgumentParser(prog="msts", description="Multimode squeezed thermal state simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="integrate a configuration")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("takagi", parents=[common], help="Takagi-factorize a coupling matrix")
    p.set_defaults(func=cmd_takagi)

    p = sub.add_parser("crow-gen", parents=[common], help="emit a CROW simulation config")
    p.add_argument("--coupling", choices=("table", "analytic"), default="table")
    p.add_argument("--sinc", choices=("unnormalized", "normalized"))
    p.add_argument("--g", type=float)
    p.add_argument("--cavities", type=int)
    p.add_argument("--t-end", type=float, default=100.0, help="duration in units of t_c")
    p.set_defaults(func=cmd_crow_gen)

    p = sub.add_parser("oracle-compare", parents=[common], help="compare against brute-force oracles")
    p.add_argument("--modes", type=int, choices=(1, 2), default=1)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("limits-check", parents=[common], help="check the limiting cases")
    p.add_argument("--states", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_limits_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeUnderflow, NonFiniteState) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
